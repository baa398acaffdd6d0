//! Integrable maps behind the nets.
//!
//! The discrete confocal factor `f` of an IC-net obeys a symmetric QRT map:
//! consecutive values satisfy a biquadratic relation whose only free
//! coefficient `B^2` is conserved. Along a line family of a net in the
//! normalized pencil `(a + lambda) v^2 + (b + lambda) w^2 = d^2 + lambda`,
//! the `d` coordinates obey a non-autonomous biquadratic recurrence; each step
//! may use a different pencil member, which gives generalized nets.

use thiserror::Error;

use crate::confocal::{ConfocalConic, ConfocalError, Regime};
use crate::exec::Execution;
use crate::laguerre::{GeometryError, OrientedLine};
use crate::net::{
    fill_incircles, Branch, Cell, CellPattern, CheckerboardNet, Family, NetLine, NetMeta,
    DEFAULT_TOLERANCE,
};
use crate::pencil::{QuadricForm, Ruling};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("a - b must be nonzero")]
    ZeroSplit,
    #[error("QRT denominator vanishes at f = {f}, f_half = {f_half}")]
    SingularFiber { f: f64, f_half: f64 },
    #[error("invariant undefined: f * f_half = a - b")]
    DegenerateInvariant,
    #[error("lambda = {0} is a singular member (lambda^2 = ab)")]
    SingularMember(f64),
    #[error("no real next point (discriminant {0})")]
    NoRealGenerator(f64),
    #[error("degenerate step: {0}")]
    DegenerateStep(&'static str),
    #[error("start line is not on the base curve (residual {0:e})")]
    OffBaseCurve(f64),
    #[error("neither root lies on the requested generator family")]
    AmbiguousFamily,
    #[error("schedule has no entry {0}")]
    ScheduleTooShort(usize),
    #[error("empty schedule")]
    EmptySchedule,
    #[error("{family} line {index}: {source}")]
    At {
        family: Family,
        index: i64,
        source: Box<DynamicsError>,
    },
    #[error(transparent)]
    Confocal(#[from] ConfocalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl DynamicsError {
    fn at(self, family: Family, index: i64) -> Self {
        DynamicsError::At {
            family,
            index,
            source: Box::new(self),
        }
    }
}

/// Coefficients of the symmetric QRT map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrtParams {
    ab_diff: f64,
    a_scale: f64,
}

impl QrtParams {
    /// `ab_diff = a - b`, `a_scale = A`.
    pub fn new(ab_diff: f64, a_scale: f64) -> Result<Self, DynamicsError> {
        if ab_diff == 0.0 || !ab_diff.is_finite() || !a_scale.is_finite() {
            return Err(DynamicsError::ZeroSplit);
        }
        Ok(QrtParams { ab_diff, a_scale })
    }

    pub fn ab_diff(&self) -> f64 {
        self.ab_diff
    }

    pub fn a_scale(&self) -> f64 {
        self.a_scale
    }

    fn f_coefficients(&self, f_half: f64) -> (f64, f64, f64) {
        let (c, a) = (self.ab_diff, self.a_scale);
        (2.0 * c * f_half, f_half * f_half + c * a, 2.0 * a * f_half)
    }
}

/// Next value `f_1` of the orbit through `(f, f_half)`.
pub fn qrt_step(f: f64, f_half: f64, p: &QrtParams) -> Result<f64, DynamicsError> {
    let (f1, f2, f3) = p.f_coefficients(f_half);
    let den = f2 - f * f3;
    if den.abs() <= 1e-14 * (f2.abs() + (f * f3).abs()) {
        return Err(DynamicsError::SingularFiber { f, f_half });
    }
    Ok((f1 - f * f2) / den)
}

/// Next value of the orbit on the invariant curve `b2`: the second root of
/// the biquadratic in `f`. Equal to [`qrt_step`] when `b2` is the invariant
/// of `(f, f_half)`, but iterating it keeps rounding errors along the curve,
/// where the rational form lets them leak across curves when `A` is near 1.
pub fn qrt_step_on(f: f64, f_half: f64, b2: f64, p: &QrtParams) -> Result<f64, DynamicsError> {
    let (c, a) = (p.ab_diff, p.a_scale);
    let h2 = f_half * f_half;
    let lead = b2 * h2 - a * a * h2 + c * a;
    if lead.abs() <= 1e-14 * ((b2 * h2).abs() + (a * a * h2).abs() + (c * a).abs()) {
        return Err(DynamicsError::SingularFiber { f, f_half });
    }
    Ok(2.0 * b2 * c * f_half / lead - f)
}

/// The conserved `B^2` of the pair `(f, f_half)`.
pub fn qrt_invariant(f: f64, f_half: f64, p: &QrtParams) -> Result<f64, DynamicsError> {
    let (c, a) = (p.ab_diff, p.a_scale);
    let den = f * f_half - c;
    if den.abs() <= 1e-14 * ((f * f_half).abs() + c.abs()) {
        return Err(DynamicsError::DegenerateInvariant);
    }
    let num = a * a * f_half * f_half * f * f - c * a * (f_half * f_half + f * f) + c * c;
    Ok(num / (den * den))
}

/// Residual of the biquadratic relation between `f`, `f_half` and `B^2`.
pub fn qrt_relation(f: f64, f_half: f64, b2: f64, p: &QrtParams) -> f64 {
    let (c, a) = (p.ab_diff, p.a_scale);
    b2 * (f * f_half - c).powi(2)
        - (a * a * f_half * f_half * f * f - c * a * (f_half * f_half + f * f) + c * c)
}

/// Coefficients of the `d`-recurrence for the member `lambda` of the pencil
/// with cone `a v^2 + b w^2 = d^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiquadraticCoeffs {
    pub kv: f64,
    pub kw: f64,
    pub kd: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl BiquadraticCoeffs {
    pub fn new(lambda: f64, a: f64, b: f64) -> Result<Self, DynamicsError> {
        let ab = a * b;
        let den = lambda * lambda - ab;
        if den.abs() <= 1e-12 * (lambda * lambda).max(ab.abs()) || !den.is_finite() {
            return Err(DynamicsError::SingularMember(lambda));
        }
        Ok(BiquadraticCoeffs {
            kv: (lambda * lambda + 2.0 * a * lambda + ab) / den,
            kw: (lambda * lambda + 2.0 * b * lambda + ab) / den,
            kd: 4.0 * lambda * (lambda + a) * (lambda + b) / (den * den),
            a,
            b,
            lambda,
        })
    }

    /// `(A, B, C)` of the quadratic `A d'^2 + B d' + C = 0` given `d_n`.
    fn quadratic(&self, d: f64) -> (f64, f64, f64) {
        (
            self.kd * d * d + 1.0,
            2.0 * self.kv * self.kw * d,
            self.kd * self.a * self.b + d * d,
        )
    }

    /// Left side of the biquadratic relation between `d` and `d_next`.
    pub fn relation(&self, d: f64, d_next: f64) -> f64 {
        self.kd * (d * d * d_next * d_next + self.a * self.b)
            + d * d
            + d_next * d_next
            + 2.0 * self.kv * self.kw * d * d_next
    }
}

/// Both roots `d_(n+1)`, ordered `[Plus, Minus]`: the `Plus` root is the one
/// farther from the antipode `-d_n`.
pub fn step_d_roots(d: f64, c: &BiquadraticCoeffs) -> Result<[f64; 2], DynamicsError> {
    let (qa, qb, qc) = c.quadratic(d);
    let (r0, r1) = if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
        if qb == 0.0 {
            return Err(DynamicsError::DegenerateStep(
                "biquadratic vanishes identically in d'",
            ));
        }
        let r = -qc / qb;
        (r, r)
    } else {
        let mut disc = qb * qb - 4.0 * qa * qc;
        let scale = qb * qb + (4.0 * qa * qc).abs();
        if disc < 0.0 {
            if disc < -1e-12 * scale {
                return Err(DynamicsError::NoRealGenerator(disc));
            }
            disc = 0.0;
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / qa, qc / q)
        }
    };
    Ok(if (r0 + d).abs() >= (r1 + d).abs() {
        [r0, r1]
    } else {
        [r1, r0]
    })
}

pub fn step_d(d: f64, c: &BiquadraticCoeffs, branch: Branch) -> Result<f64, DynamicsError> {
    let roots = step_d_roots(d, c)?;
    Ok(match branch {
        Branch::Plus => roots[0],
        Branch::Minus => roots[1],
    })
}

/// `(v_(n+1), w_(n+1))` of the point with coordinate `d_next` joined to `p`
/// by a generator of the member `c.lambda`.
pub fn recover_vw(
    p: &OrientedLine,
    d_next: f64,
    c: &BiquadraticCoeffs,
) -> Result<(f64, f64), DynamicsError> {
    vw_candidates(p, d_next, c)?
        .into_iter()
        .next()
        .ok_or(DynamicsError::DegenerateStep(
            "recovered point misses the constraints",
        ))
}

/// Solutions of the linear pair; where it is singular (`v_n w_n = 0` or
/// `a kw^2 = b kv^2`), the unit circle is cut with the tangency line instead
/// and every cut point satisfying the constraints is returned, best first.
fn vw_candidates(
    p: &OrientedLine,
    d_next: f64,
    c: &BiquadraticCoeffs,
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    let (vn, wn, dn) = (p.v(), p.w(), p.d());
    let (a, b, lam) = (c.a, c.b, c.lambda);
    let m = [[c.kw * a * vn, c.kv * b * wn], [c.kv * vn, c.kw * wn]];
    let rhs = [-dn * d_next, 1.0];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let size = m
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let miss = |v: f64, w: f64| {
        let cone = (a * v * v + b * w * w - d_next * d_next).abs();
        let tangency = (a + lam) * vn * v + (b + lam) * wn * w - dn * d_next - lam;
        let scale = 1.0 + lam.abs() + dn.abs() * d_next.abs();
        (v * v + w * w - 1.0)
            .abs()
            .max(cone / (1.0 + d_next * d_next))
            .max(tangency.abs() / scale)
    };
    let mut cands = if det.abs() > 1e-8 * size * size {
        vec![(
            (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
            (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det,
        )]
    } else {
        let (p1, p2, r) = ((a + lam) * vn, (b + lam) * wn, dn * d_next + lam);
        let n2 = p1 * p1 + p2 * p2;
        if n2 == 0.0 {
            return Err(DynamicsError::DegenerateStep("tangency line undefined"));
        }
        let h = 1.0 - r * r / n2;
        if h < -1e-9 {
            return Err(DynamicsError::DegenerateStep(
                "tangency line misses the cylinder",
            ));
        }
        let t = h.max(0.0).sqrt() / n2.sqrt();
        let (x0, y0) = (r * p1 / n2, r * p2 / n2);
        vec![(x0 - t * p2, y0 + t * p1), (x0 + t * p2, y0 - t * p1)]
    };
    cands.retain(|&(v, w)| miss(v, w) <= DEFAULT_TOLERANCE);
    cands.sort_by(|x, y| miss(x.0, x.1).total_cmp(&miss(y.0, y.1)));
    if cands.is_empty() {
        return Err(DynamicsError::DegenerateStep(
            "recovered point misses the constraints",
        ));
    }
    Ok(cands)
}

/// The pencil `(a + lambda) v^2 + (b + lambda) w^2 = d^2 + lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPencil {
    pub a: f64,
    pub b: f64,
}

impl NormalizedPencil {
    pub fn from_conic(conic: &ConfocalConic) -> Self {
        let (a, b) = conic.cone_coefficients();
        NormalizedPencil { a, b }
    }

    pub fn member(&self, lambda: f64) -> QuadricForm {
        QuadricForm::confocal_member(self.a, self.b, lambda)
    }

    /// Nearest base-curve point with the same sign of `d`, which keeps long
    /// orbits from drifting off the curve.
    pub fn project(&self, v: f64, w: f64, d: f64) -> Result<OrientedLine, GeometryError> {
        let n = v.hypot(w);
        let (v, w) = (v / n, w / n);
        let t = self.a * v * v + self.b * w * w;
        let d = if t > 0.0 { d.signum() * t.sqrt() } else { d };
        OrientedLine::new(v, w, d)
    }

    pub fn base_residual(&self, l: &OrientedLine) -> f64 {
        (self.a * l.v() * l.v() + self.b * l.w() * l.w() - l.d() * l.d()).abs()
    }
}

/// Pencil member and generator family of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub lambda: f64,
    pub ruling: Ruling,
}

/// Per-step members for one line family.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    /// `Some(len)` repeats the entries; `None` allows only `len` steps.
    pub period: Option<usize>,
}

impl Schedule {
    /// All steps in the same `ruling`.
    pub fn from_lambdas(
        values: &[f64],
        ruling: Ruling,
        periodic: bool,
    ) -> Result<Self, DynamicsError> {
        if values.is_empty() {
            return Err(DynamicsError::EmptySchedule);
        }
        let entries: Vec<ScheduleEntry> = values
            .iter()
            .map(|&lambda| ScheduleEntry { lambda, ruling })
            .collect();
        let period = periodic.then_some(entries.len());
        Ok(Schedule { entries, period })
    }

    /// Step `n` joins base points with parameters `psi` and `psi + s_n` on
    /// alternating components. The ruling is that of the chord starting on
    /// the component of step `n`, so an odd period is doubled to keep the
    /// parity.
    pub fn from_s_values(
        conic: &ConfocalConic,
        values: &[f64],
        periodic: bool,
    ) -> Result<Self, DynamicsError> {
        if values.is_empty() {
            return Err(DynamicsError::EmptySchedule);
        }
        let mut s_values = values.to_vec();
        if periodic && s_values.len() % 2 == 1 {
            s_values.extend_from_slice(values);
        }
        let entries = s_values
            .iter()
            .enumerate()
            .map(|(n, &s)| {
                let lambda = conic.lambda_from_s(s, Regime::CrossBranch)?;
                let start = if n % 2 == 0 {
                    Branch::Plus
                } else {
                    Branch::Minus
                };
                let end = if n % 2 == 0 {
                    Branch::Minus
                } else {
                    Branch::Plus
                };
                let member = conic.pencil_member(lambda);
                let ruling = member
                    .ruling_through(&conic.base_point(0.0, start), &conic.base_point(s, end))
                    .unwrap_or(Ruling::Plus);
                Ok(ScheduleEntry { lambda, ruling })
            })
            .collect::<Result<Vec<_>, DynamicsError>>()?;
        let period = periodic.then_some(entries.len());
        Ok(Schedule { entries, period })
    }

    pub fn entry(&self, n: usize) -> Result<ScheduleEntry, DynamicsError> {
        match self.period {
            Some(p) => Ok(self.entries[n % p]),
            None => self
                .entries
                .get(n)
                .copied()
                .ok_or(DynamicsError::ScheduleTooShort(n)),
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

/// One step along a generator of `member(entry.lambda)` in family
/// `entry.ruling`, via the `d`-recurrence.
pub fn step_scheduled(
    p: &OrientedLine,
    entry: ScheduleEntry,
    pencil: &NormalizedPencil,
) -> Result<OrientedLine, DynamicsError> {
    let miss = pencil.base_residual(p) / (1.0 + p.d() * p.d());
    if !(miss <= DEFAULT_TOLERANCE) {
        return Err(DynamicsError::OffBaseCurve(miss));
    }
    let c = BiquadraticCoeffs::new(entry.lambda, pencil.a, pencil.b)?;
    let roots = step_d_roots(p.d(), &c)?;
    let member = pencil.member(entry.lambda);
    let mut fallback = None;
    let mut last_err = None;
    let distinct = if (roots[0] - roots[1]).abs() <= 1e-14 * (1.0 + roots[0].abs()) {
        1
    } else {
        2
    };
    for &d_next in &roots[..distinct] {
        let cands = match vw_candidates(p, d_next, &c) {
            Ok(cs) => cs,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        for (v, w) in cands {
            let cand = pencil.project(v, w, d_next)?;
            match member.ruling_through(p, &cand) {
                Some(r) if r == entry.ruling => return Ok(cand),
                None => fallback = fallback.or(Some(cand)),
                Some(_) => {}
            }
        }
    }
    match (fallback, last_err) {
        (Some(l), _) => Ok(l),
        (None, Some(e)) => Err(e),
        (None, None) => Err(DynamicsError::AmbiguousFamily),
    }
}

/// Cells `(i, k)` whose two steps use the same member in opposite families.
pub fn eligible_cells(
    schedule_h: &Schedule,
    schedule_v: &Schedule,
    steps_v: usize,
    steps_h: usize,
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for i in 0..steps_v {
        for k in 0..steps_h {
            let (Ok(eh), Ok(ev)) = (schedule_h.entry(i), schedule_v.entry(k)) else {
                continue;
            };
            let tol = 1e-12 * eh.lambda.abs().max(1.0);
            if (eh.lambda - ev.lambda).abs() <= tol && eh.ruling != ev.ruling {
                cells.push(Cell::new(i as i64, k as i64));
            }
        }
    }
    cells
}

/// Net from Cauchy data: `count_v` lines `l_i` from `l0` stepped by
/// `schedule_h`, `count_h` lines `m_k` from `m0` stepped by `schedule_v`.
/// Circles are filled on the eligible cells.
#[allow(clippy::too_many_arguments)]
pub fn generalized_net(
    pencil: NormalizedPencil,
    schedule_h: &Schedule,
    schedule_v: &Schedule,
    l0: OrientedLine,
    m0: OrientedLine,
    count_v: usize,
    count_h: usize,
    exec: Execution,
) -> Result<CheckerboardNet, DynamicsError> {
    let walk = |start: OrientedLine, count: usize, schedule: &Schedule, family: Family| {
        let mut lines = vec![NetLine::plain(0, start)];
        for n in 1..count {
            let entry = schedule.entry(n - 1).map_err(|e| e.at(family, n as i64))?;
            let next = step_scheduled(&lines[n - 1].line, entry, &pencil)
                .map_err(|e| e.at(family, n as i64))?;
            lines.push(NetLine::plain(n as i64, next));
        }
        Ok::<_, DynamicsError>(lines)
    };
    let vertical = walk(l0, count_v, schedule_h, Family::Vertical)?;
    let horizontal = walk(m0, count_h, schedule_v, Family::Horizontal)?;
    let mut meta = NetMeta::new("generalized");
    meta.parameters = vec![("a".into(), pencil.a), ("b".into(), pencil.b)];
    meta.pencil = Some(pencil.member(0.0));
    let mut net = CheckerboardNet::new(vertical, horizontal, meta);
    net.pattern = CellPattern::Listed(eligible_cells(
        schedule_h,
        schedule_v,
        count_v.saturating_sub(1),
        count_h.saturating_sub(1),
    ));
    Ok(fill_incircles(net, DEFAULT_TOLERANCE, exec))
}
