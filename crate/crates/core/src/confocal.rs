//! Closed-form confocal checkerboard nets.
//!
//! Lines tangent to the ellipse `x^2/alpha^2 + y^2/beta^2 = 1` or the
//! hyperbola `x^2/alpha^2 - y^2/beta^2 = 1` form the base curve of the
//! pencil `(a + lambda) v^2 + (b + lambda) w^2 = d^2 + lambda` with
//! `(a, b) = (alpha^2, +-beta^2)`. The base curve is parametrized by Jacobi
//! functions, and shifting the parameter by `s` while switching components
//! moves along a generator of the member with `lambda(s)`. Alternating two
//! shifts `s`, `s_tilde` gives the nets.
//!
//! For the elliptic IC-nets (`s_tilde = 2K`) this module also evaluates
//! intersection points, circle centres and the discrete confocal
//! coordinate factors in closed form.

use std::ops::Range;

use thiserror::Error;

use crate::elliptic::{jacobi, quotient, EllipticError, Modulus, Ratio};
use crate::exec::Execution;
use crate::laguerre::{GeometryError, OrientedLine};
use crate::net::{fill_incircles, Branch, CheckerboardNet, NetLine, NetMeta, DEFAULT_TOLERANCE};
use crate::pencil::QuadricForm;

/// Denominators of Jacobi quotients below this abort a construction.
pub const CONSTRUCTION_POLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfocalError {
    #[error("invalid semi-axes alpha = {alpha}, beta = {beta}")]
    InvalidAxes { alpha: f64, beta: f64 },
    #[error("closed-form IC-net formulas need an elliptic conic")]
    NotElliptic,
    #[error("discrete confocal factors need a non-circular ellipse")]
    Circular,
    #[error("periodic nets need N >= 3 (got {0})")]
    Period(u32),
    #[error("cn(delta/2) = {0} is not positive (superdiscrete regime)")]
    Superdiscrete(f64),
    #[error("lambda = {lambda} is outside the range [{low}, {high}] of this branch")]
    LambdaOutOfRange { lambda: f64, low: f64, high: f64 },
    #[error("{what}: {source}")]
    Pole {
        what: &'static str,
        source: EllipticError,
    },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn pole(what: &'static str) -> impl Fn(EllipticError) -> ConfocalError {
    move |source| ConfocalError::Pole { what, source }
}

/// Ellipse or hyperbola of contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConicKind {
    Elliptic,
    Hyperbolic,
}

impl ConicKind {
    pub fn name(self) -> &'static str {
        match self {
            ConicKind::Elliptic => "elliptic",
            ConicKind::Hyperbolic => "hyperbolic",
        }
    }
}

/// Which pairs of base-curve points a generator joins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Points on different components (`lambda >= 0` for ellipses,
    /// `-alpha^2 <= lambda <= 0` for hyperbolas).
    CrossBranch,
    /// Points on the same component (`-alpha^2 <= lambda <= -beta^2` for
    /// ellipses, `lambda >= beta^2` for hyperbolas).
    SameBranch,
}

/// The conic of contact together with the modulus of its parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalConic {
    kind: ConicKind,
    alpha: f64,
    beta: f64,
    modulus: Modulus,
}

impl ConfocalConic {
    pub fn new(kind: ConicKind, alpha: f64, beta: f64) -> Result<Self, ConfocalError> {
        let bad = ConfocalError::InvalidAxes { alpha, beta };
        if !(alpha.is_finite() && beta.is_finite() && beta > 0.0 && alpha > 0.0) {
            return Err(bad);
        }
        let k = match kind {
            ConicKind::Elliptic if alpha < beta => return Err(bad),
            ConicKind::Elliptic => (1.0 - (beta / alpha).powi(2)).sqrt(),
            ConicKind::Hyperbolic => alpha / alpha.hypot(beta),
        };
        Ok(ConfocalConic {
            kind,
            alpha,
            beta,
            modulus: Modulus::new(k)?,
        })
    }

    /// Ellipse `x^2/alpha^2 + y^2/beta^2 = 1`, `alpha >= beta > 0`.
    pub fn elliptic(alpha: f64, beta: f64) -> Result<Self, ConfocalError> {
        Self::new(ConicKind::Elliptic, alpha, beta)
    }

    /// Hyperbola `x^2/alpha^2 - y^2/beta^2 = 1`.
    pub fn hyperbolic(alpha: f64, beta: f64) -> Result<Self, ConfocalError> {
        Self::new(ConicKind::Hyperbolic, alpha, beta)
    }

    pub fn kind(&self) -> ConicKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn quarter_period(&self) -> f64 {
        self.modulus.quarter_period()
    }

    /// `(a, b)` of the cone `a v^2 + b w^2 = d^2`.
    pub fn cone_coefficients(&self) -> (f64, f64) {
        let b2 = self.beta * self.beta;
        match self.kind {
            ConicKind::Elliptic => (self.alpha * self.alpha, b2),
            ConicKind::Hyperbolic => (self.alpha * self.alpha, -b2),
        }
    }

    /// `a v^2 + b w^2 - d^2`.
    pub fn cone_residual(&self, l: &OrientedLine) -> f64 {
        let (a, b) = self.cone_coefficients();
        a * l.v() * l.v() + b * l.w() * l.w() - l.d() * l.d()
    }

    /// Pencil member with parameter `lambda`.
    pub fn pencil_member(&self, lambda: f64) -> QuadricForm {
        let (a, b) = self.cone_coefficients();
        QuadricForm::confocal_member(a, b, lambda)
    }

    pub fn cone(&self) -> QuadricForm {
        self.pencil_member(0.0)
    }

    /// Point `psi` of the given component of the base curve.
    pub fn base_point(&self, psi: f64, branch: Branch) -> OrientedLine {
        let j = jacobi(psi, self.modulus);
        let (v, w, d) = match self.kind {
            ConicKind::Elliptic => (j.cn, j.sn, branch.sign() * self.alpha * j.dn),
            ConicKind::Hyperbolic => (
                branch.sign() * j.dn,
                self.modulus.k() * j.sn,
                self.alpha * j.cn,
            ),
        };
        OrientedLine::new(v, w, d).expect("base-curve points have unit normals")
    }

    /// Pencil parameter of the quadric whose generators join base points
    /// `psi` and `psi + s`.
    pub fn lambda_from_s(&self, s: f64, regime: Regime) -> Result<f64, ConfocalError> {
        let m = self.modulus;
        let (a2, b2) = (self.alpha * self.alpha, self.beta * self.beta);
        let half = 0.5 * s;
        let q =
            |r: Ratio| quotient(r, half, m, CONSTRUCTION_POLE_TOLERANCE).map_err(pole("lambda(s)"));
        Ok(match (self.kind, regime) {
            (ConicKind::Elliptic, Regime::CrossBranch) => a2 * q(Ratio::Cs)?.powi(2),
            (ConicKind::Elliptic, Regime::SameBranch) => -b2 * q(Ratio::Nd)?.powi(2),
            (ConicKind::Hyperbolic, Regime::CrossBranch) => -a2 * jacobi(half, m).cn.powi(2),
            (ConicKind::Hyperbolic, Regime::SameBranch) => (a2 + b2) * q(Ratio::Ds)?.powi(2),
        })
    }

    /// Inverse of [`Self::lambda_from_s`] on `(0, 2K]`, by bisection.
    pub fn s_from_lambda(&self, lambda: f64, regime: Regime) -> Result<f64, ConfocalError> {
        let two_k = 2.0 * self.quarter_period();
        let f = |s: f64| self.lambda_from_s(s, regime);
        let (f_end, near_zero) = (f(two_k)?, 1e-9 * two_k);
        let f_start = f(near_zero).unwrap_or(f64::INFINITY);
        let (low, high) = (f_start.min(f_end), f_start.max(f_end));
        let slack = 1e-12 * lambda.abs().max(1.0);
        if !(lambda >= low - slack && lambda <= high + slack) {
            return Err(ConfocalError::LambdaOutOfRange { lambda, low, high });
        }
        let increasing = f_end > f_start;
        let (mut lo, mut hi) = (0.0_f64, two_k);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = f(mid).unwrap_or(f64::INFINITY);
            if (v < lambda) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * two_k {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn require_elliptic(&self) -> Result<(), ConfocalError> {
        match self.kind {
            ConicKind::Elliptic => Ok(()),
            ConicKind::Hyperbolic => Err(ConfocalError::NotElliptic),
        }
    }

    fn q(&self, r: Ratio, u: f64, what: &'static str) -> Result<f64, ConfocalError> {
        quotient(r, u, self.modulus, CONSTRUCTION_POLE_TOLERANCE).map_err(pole(what))
    }

    /// Line `psi` of the undirected IC-net parametrization, `(cn, sn, alpha dn)`.
    pub fn ic_line(&self, psi: f64) -> OrientedLine {
        self.base_point(psi, Branch::Plus)
    }

    /// Intersection of the IC-net lines at `xi1 + xi2` and `xi1 - xi2`.
    pub fn intersection_point(&self, xi1: f64, xi2: f64) -> Result<(f64, f64), ConfocalError> {
        self.require_elliptic()?;
        let kc2 = 1.0 - self.modulus.k2();
        let x = self.alpha
            * self.q(Ratio::Cd, xi1, "intersection")?
            * self.q(Ratio::Dc, xi2, "intersection")?;
        let y = self.alpha
            * kc2
            * self.q(Ratio::Sd, xi1, "intersection")?
            * self.q(Ratio::Nc, xi2, "intersection")?;
        Ok((x, y))
    }

    /// Squared semi-axes `(lambda, mu)` of the confocal conic through the
    /// intersection points: the ellipse for `xi = xi2`, the hyperbola for
    /// `xi = xi1`.
    pub fn confocal_conic_params(
        &self,
        xi: f64,
        which: ConfocalFamily,
    ) -> Result<(f64, f64), ConfocalError> {
        self.require_elliptic()?;
        let (a2, k2) = (self.alpha * self.alpha, self.modulus.k2());
        Ok(match which {
            ConfocalFamily::Ellipse => (
                a2 * self.q(Ratio::Dc, xi, "confocal ellipse")?.powi(2),
                a2 * (1.0 - k2) * self.q(Ratio::Nc, xi, "confocal ellipse")?.powi(2),
            ),
            ConfocalFamily::Hyperbola => (
                a2 * k2 * self.q(Ratio::Cd, xi, "confocal hyperbola")?.powi(2),
                -a2 * k2 * (1.0 - k2) * self.q(Ratio::Sd, xi, "confocal hyperbola")?.powi(2),
            ),
        })
    }

    /// Centre of the circle of the IC-net cell with lines
    /// `xi1 +- xi2` and, reversed, `xi1 + xi2 + delta`, `xi1 - xi2 - delta`.
    pub fn circle_center(
        &self,
        xi1: f64,
        xi2: f64,
        delta: f64,
    ) -> Result<(f64, f64), ConfocalError> {
        self.require_elliptic()?;
        let kc2 = 1.0 - self.modulus.k2();
        let (h, shifted) = (0.5 * delta, xi2 + 0.5 * delta);
        let x = self.alpha
            * self.q(Ratio::Dc, h, "centre")?
            * self.q(Ratio::Cd, xi1, "centre")?
            * self.q(Ratio::Dc, shifted, "centre")?;
        let y = self.alpha
            * kc2
            * self.q(Ratio::Nc, h, "centre")?
            * self.q(Ratio::Sd, xi1, "centre")?
            * self.q(Ratio::Nc, shifted, "centre")?;
        Ok((x, y))
    }

    /// The affine scales `(A, B) = (cd(delta/2), cn(delta/2))` taking circle
    /// centres to intersection points at `xi2 + delta/2`.
    pub fn affine_scales(&self, delta: f64) -> Result<(f64, f64), ConfocalError> {
        let h = 0.5 * delta;
        Ok((
            self.q(Ratio::Cd, h, "affine scale")?,
            jacobi(h, self.modulus).cn,
        ))
    }

    /// Factors `f, g, f_tilde, g_tilde` of the circle centres.
    pub fn discrete_confocal_factors(
        &self,
        c: &IcNetCoords,
    ) -> Result<ConfocalFactors, ConfocalError> {
        self.require_elliptic()?;
        let m = self.modulus;
        if m.k() == 0.0 {
            return Err(ConfocalError::Circular);
        }
        let h = 0.5 * c.delta();
        let cn_h = jacobi(h, m).cn;
        if !(cn_h > CONSTRUCTION_POLE_TOLERANCE) {
            return Err(ConfocalError::Superdiscrete(cn_h));
        }
        let (dc_h, nc_h) = (
            self.q(Ratio::Dc, h, "factors")?,
            self.q(Ratio::Nc, h, "factors")?,
        );
        let ak = (self.alpha * m.k()).abs();
        let kc = m.complementary();
        let shifted = c.xi2() + h;
        Ok(ConfocalFactors {
            f: ak * dc_h.sqrt() * self.q(Ratio::Cd, c.xi1(), "factors")?,
            g: ak * kc * nc_h.sqrt() * self.q(Ratio::Sd, c.xi1(), "factors")?,
            f_tilde: self.alpha * dc_h.sqrt() * self.q(Ratio::Dc, shifted, "factors")?,
            g_tilde: self.alpha * kc * nc_h.sqrt() * self.q(Ratio::Nc, shifted, "factors")?,
            a_scale: self.q(Ratio::Cd, h, "factors")?,
            b_scale: cn_h,
            ab_diff: self.alpha * self.alpha * m.k2(),
        })
    }
}

/// The two confocal families through an intersection point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfocalFamily {
    Ellipse,
    Hyperbola,
}

/// Lattice coordinates of an IC-net vertex or cell.
///
/// Half-integers `m1, m2` index the vertex of lines `n1 = m2 + m1` and
/// `n2 = m2 - m1`, with offsets `n0v, n0h` and step `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcNetCoords {
    m1: f64,
    m2: f64,
    n0v: f64,
    n0h: f64,
    delta: f64,
    xi1: f64,
    xi2: f64,
}

impl IcNetCoords {
    pub fn new(m1: f64, m2: f64, n0v: f64, n0h: f64, delta: f64) -> Self {
        IcNetCoords {
            m1,
            m2,
            n0v,
            n0h,
            delta,
            xi1: delta * (m1 + 0.5 * (n0v + n0h)),
            xi2: delta * (m2 + 0.5 * (n0v - n0h)),
        }
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn n0v(&self) -> f64 {
        self.n0v
    }

    pub fn n0h(&self) -> f64 {
        self.n0h
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    pub fn xi2(&self) -> f64 {
        self.xi2
    }

    /// Same offsets, lattice point moved by `(dm1, dm2)`.
    pub fn shifted(&self, dm1: f64, dm2: f64) -> Self {
        Self::new(self.m1 + dm1, self.m2 + dm2, self.n0v, self.n0h, self.delta)
    }
}

/// Factorization `centre = (f f_tilde, g g_tilde) / sqrt(a - b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalFactors {
    pub f: f64,
    pub g: f64,
    pub f_tilde: f64,
    pub g_tilde: f64,
    /// `A = cd(delta/2)`.
    pub a_scale: f64,
    /// `B = cn(delta/2)`.
    pub b_scale: f64,
    /// `a - b = alpha^2 k^2`.
    pub ab_diff: f64,
}

impl ConfocalFactors {
    pub fn center(&self) -> (f64, f64) {
        let r = self.ab_diff.sqrt();
        (self.f * self.f_tilde / r, self.g * self.g_tilde / r)
    }
}

/// Period and shape of an embedded (closing) net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicSpec {
    pub n_azimuthal: u32,
    pub kappa: f64,
    pub psi0v: f64,
}

/// Parameters of a confocal checkerboard net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    conic: ConfocalConic,
    s: f64,
    s_tilde: f64,
    psi0v: f64,
    psi0h: f64,
    lambda: f64,
    lambda_tilde: f64,
}

impl NetParams {
    /// Rejects shifts at which the pencil parameter has a pole.
    pub fn new(
        conic: ConfocalConic,
        s: f64,
        s_tilde: f64,
        psi0v: f64,
        psi0h: f64,
    ) -> Result<Self, ConfocalError> {
        let lambda = conic.lambda_from_s(s, Regime::CrossBranch)?;
        let lambda_tilde = conic.lambda_from_s(s_tilde, Regime::CrossBranch)?;
        Ok(NetParams {
            conic,
            s,
            s_tilde,
            psi0v,
            psi0h,
            lambda,
            lambda_tilde,
        })
    }

    /// Closing net: `s + s_tilde = 4K + 4K/N`, with the horizontal family
    /// equal to the vertical one up to orientation.
    pub fn periodic(conic: ConfocalConic, spec: PeriodicSpec) -> Result<Self, ConfocalError> {
        if spec.n_azimuthal < 3 {
            return Err(ConfocalError::Period(spec.n_azimuthal));
        }
        let kk = conic.quarter_period();
        let step = 4.0 * kk / spec.n_azimuthal as f64;
        Self::new(
            conic,
            2.0 * kk + step - spec.kappa,
            2.0 * kk + spec.kappa,
            spec.psi0v,
            spec.psi0v + step - spec.kappa,
        )
    }

    pub fn conic(&self) -> &ConfocalConic {
        &self.conic
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn s_tilde(&self) -> f64 {
        self.s_tilde
    }

    pub fn psi0v(&self) -> f64 {
        self.psi0v
    }

    pub fn psi0h(&self) -> f64 {
        self.psi0h
    }

    /// Pencil parameters of the two hyperboloids.
    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda, self.lambda_tilde)
    }

    /// Parameter and component of line `index` of a family with start
    /// `psi0`; `sign` is `+1` for vertical and `-1` for horizontal lines.
    fn place(&self, psi0: f64, index: i64, sign: f64) -> (f64, Branch) {
        let n = index.div_euclid(2) as f64;
        let base = psi0 + sign * n * (self.s + self.s_tilde);
        if index.rem_euclid(2) == 0 {
            (base, Branch::Plus)
        } else {
            (base + sign * self.s, Branch::Minus)
        }
    }

    fn net_line(&self, psi0: f64, index: i64, sign: f64) -> NetLine {
        let (psi, branch) = self.place(psi0, index, sign);
        NetLine {
            index,
            line: self.conic.base_point(psi, branch),
            branch: Some(branch),
            psi: Some(psi),
        }
    }

    pub fn vertical_line(&self, index: i64) -> NetLine {
        self.net_line(self.psi0v, index, 1.0)
    }

    pub fn horizontal_line(&self, index: i64) -> NetLine {
        self.net_line(self.psi0h, index, -1.0)
    }

    /// Both line families over the given index ranges.
    pub fn lines(
        &self,
        vertical: Range<i64>,
        horizontal: Range<i64>,
        exec: Execution,
    ) -> (Vec<NetLine>, Vec<NetLine>) {
        let v: Vec<i64> = vertical.collect();
        let h: Vec<i64> = horizontal.collect();
        (
            exec.map(&v, |&i| self.vertical_line(i)),
            exec.map(&h, |&j| self.horizontal_line(j)),
        )
    }

    pub fn meta(&self) -> NetMeta {
        let mut meta = NetMeta::new(self.conic.kind.name());
        meta.parameters = vec![
            ("alpha".into(), self.conic.alpha),
            ("beta".into(), self.conic.beta),
            ("k".into(), self.conic.modulus.k()),
            ("s".into(), self.s),
            ("s_tilde".into(), self.s_tilde),
            ("psi0v".into(), self.psi0v),
            ("psi0h".into(), self.psi0h),
            ("lambda".into(), self.lambda),
            ("lambda_tilde".into(), self.lambda_tilde),
        ];
        meta.pencil = Some(self.conic.cone());
        meta
    }

    /// The net over the given index ranges with its circles filled in.
    pub fn net(
        &self,
        vertical: Range<i64>,
        horizontal: Range<i64>,
        exec: Execution,
    ) -> Result<CheckerboardNet, ConfocalError> {
        let (v, h) = self.lines(vertical, horizontal, exec);
        let net = CheckerboardNet::new(v, h, self.meta());
        Ok(fill_incircles(net, DEFAULT_TOLERANCE, exec))
    }
}
