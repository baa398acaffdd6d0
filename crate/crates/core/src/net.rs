//! Net assembly in the Blaschke model: the generic generator stepper,
//! incircle filling, verification, and the envelope and common-tangent
//! helpers used for rendering and for the Graves-Chasles checks.
//!
//! Lines of the vertical family are `l_i`, lines of the horizontal family
//! `m_j`. Cell `(i, j)` is the quadrilateral bounded by `l_i, l_(i+1), m_j,
//! m_(j+1)`; in a checkerboard net it carries a circle iff `i + j` is even.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use nalgebra::{Matrix3, Vector3, Vector4};
use thiserror::Error;

use crate::confocal::{ConfocalConic, ConfocalError, NetParams};
use crate::exec::Execution;
use crate::laguerre::{
    apply, contact_residual, coplanarity_residual, GeometryError, LaguerreTransform,
    OrientedCircle, OrientedLine, SINGULAR_TOLERANCE,
};
use crate::pencil::{PencilError, QuadricForm, Ruling};

/// Default tolerance for construction and verification.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative threshold separating two generator directions from one.
const DIRECTION_TOLERANCE: f64 = 1e-12;

/// Cells whose best incircle system has a smaller determinant cannot be
/// verified meaningfully.
const UNVERIFIABLE_DETERMINANT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("point is off the base curve (residual {0:e})")]
    OffBaseCurve(f64),
    #[error("no real generator through the point (discriminant {0:e})")]
    NoRealGenerator(f64),
    #[error("degenerate step: {0}")]
    DegenerateStep(&'static str),
    #[error("generator families cannot be told apart on this quadric")]
    AmbiguousFamily,
    #[error("quadrics do not span a pencil with the cylinder (residual {0:e})")]
    NotInPencil(f64),
    #[error("{family} line {index} repeats line {repeats}")]
    DuplicateLines {
        family: Family,
        index: i64,
        repeats: i64,
    },
    #[error("{family} line {index}: {source}")]
    At {
        family: Family,
        index: i64,
        source: Box<NetError>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Confocal(#[from] ConfocalError),
}

impl NetError {
    fn at(self, family: Family, index: i64) -> Self {
        NetError::At {
            family,
            index,
            source: Box::new(self),
        }
    }
}

/// The two line families of a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Lines `l_i`, combinatorially vertical.
    Vertical,
    /// Lines `m_j`, combinatorially horizontal.
    Horizontal,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Vertical => "vertical",
            Family::Horizontal => "horizontal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Component of a two-component base curve a line was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

/// A line of a net with its index and construction data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetLine {
    pub index: i64,
    pub line: OrientedLine,
    pub branch: Option<Branch>,
    pub psi: Option<f64>,
}

impl NetLine {
    pub fn plain(index: i64, line: OrientedLine) -> Self {
        NetLine {
            index,
            line,
            branch: None,
            psi: None,
        }
    }
}

/// Cell `(i, j)` bounded by `l_i, l_(i+1), m_j, m_(j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub i: i64,
    pub j: i64,
}

impl Cell {
    pub fn new(i: i64, j: i64) -> Self {
        Cell { i, j }
    }

    pub fn is_black(self) -> bool {
        (self.i + self.j).rem_euclid(2) == 0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Which cells are meant to carry circles.
#[derive(Debug, Clone, PartialEq)]
pub enum CellPattern {
    /// All cells with `i + j` even.
    Checkerboard,
    /// An explicit list, for generalized nets.
    Listed(Vec<Cell>),
}

/// Circle of a cell and its largest contact residual over the four sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCircle {
    pub cell: Cell,
    pub circle: OrientedCircle,
    pub residual: f64,
}

/// Construction parameters and pencil description of a net.
#[derive(Debug, Clone, PartialEq)]
pub struct NetMeta {
    pub kind: String,
    pub parameters: Vec<(String, f64)>,
    /// A member of the pencil other than the cylinder; every line of the
    /// net lies on it.
    pub pencil: Option<QuadricForm>,
    pub tolerance: f64,
}

impl NetMeta {
    pub fn new(kind: &str) -> Self {
        NetMeta {
            kind: kind.to_owned(),
            parameters: Vec::new(),
            pencil: None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|p| p.1)
    }
}

/// Two indexed line families, the circles of their black cells, and
/// provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerboardNet {
    /// Lines `l_i`, sorted by consecutive index.
    pub vertical: Vec<NetLine>,
    /// Lines `m_j`, sorted by consecutive index.
    pub horizontal: Vec<NetLine>,
    pub pattern: CellPattern,
    pub circles: Vec<CellCircle>,
    /// Black cells without a circle because three of their sides are
    /// (nearly) concurrent or parallel.
    pub degenerate: Vec<Cell>,
    pub meta: NetMeta,
}

impl CheckerboardNet {
    pub fn new(vertical: Vec<NetLine>, horizontal: Vec<NetLine>, meta: NetMeta) -> Self {
        CheckerboardNet {
            vertical,
            horizontal,
            pattern: CellPattern::Checkerboard,
            circles: Vec::new(),
            degenerate: Vec::new(),
            meta,
        }
    }

    pub fn family(&self, family: Family) -> &[NetLine] {
        match family {
            Family::Vertical => &self.vertical,
            Family::Horizontal => &self.horizontal,
        }
    }

    pub fn line(&self, family: Family, index: i64) -> Option<&NetLine> {
        let lines = self.family(family);
        let first = lines.first()?.index;
        let k = usize::try_from(index - first).ok()?;
        lines.get(k).filter(|l| l.index == index)
    }

    /// The sides `[l_i, l_(i+1), m_j, m_(j+1)]` of a cell.
    pub fn cell_lines(&self, cell: Cell) -> Option<[OrientedLine; 4]> {
        Some([
            self.line(Family::Vertical, cell.i)?.line,
            self.line(Family::Vertical, cell.i + 1)?.line,
            self.line(Family::Horizontal, cell.j)?.line,
            self.line(Family::Horizontal, cell.j + 1)?.line,
        ])
    }

    /// Cells that should carry circles and whose four sides are present.
    pub fn black_cells(&self) -> Vec<Cell> {
        match &self.pattern {
            CellPattern::Checkerboard => {
                let (Some(v0), Some(h0)) = (self.vertical.first(), self.horizontal.first()) else {
                    return Vec::new();
                };
                let (nv, nh) = (self.vertical.len() as i64, self.horizontal.len() as i64);
                let mut cells = Vec::new();
                for i in v0.index..v0.index + nv - 1 {
                    for j in h0.index..h0.index + nh - 1 {
                        let c = Cell::new(i, j);
                        if c.is_black() {
                            cells.push(c);
                        }
                    }
                }
                cells
            }
            CellPattern::Listed(cells) => cells
                .iter()
                .copied()
                .filter(|c| self.cell_lines(*c).is_some())
                .collect(),
        }
    }

    pub fn circle(&self, cell: Cell) -> Option<&CellCircle> {
        self.circles.iter().find(|c| c.cell == cell)
    }

    /// Image of the net under a Laguerre transformation, circles refilled.
    pub fn transformed(&self, t: &LaguerreTransform, exec: Execution) -> Result<Self, NetError> {
        let map = |lines: &[NetLine]| -> Result<Vec<NetLine>, GeometryError> {
            lines
                .iter()
                .map(|l| {
                    Ok(NetLine {
                        line: apply(t, &l.line)?,
                        ..*l
                    })
                })
                .collect()
        };
        let mut meta = self.meta.clone();
        meta.pencil = match &self.meta.pencil {
            Some(q) => Some(q.transformed(t)?),
            None => None,
        };
        let net = CheckerboardNet {
            vertical: map(&self.vertical)?,
            horizontal: map(&self.horizontal)?,
            pattern: self.pattern.clone(),
            circles: Vec::new(),
            degenerate: Vec::new(),
            meta,
        };
        let tol = net.meta.tolerance;
        Ok(fill_incircles(net, tol, exec))
    }
}

fn solve_three(ls: [&OrientedLine; 3]) -> Option<(OrientedCircle, f64)> {
    let a = Matrix3::from_fn(|i, j| match j {
        0 => ls[i].v(),
        1 => ls[i].w(),
        _ => -1.0,
    });
    let det = a.determinant();
    if det.abs() < SINGULAR_TOLERANCE {
        return None;
    }
    let x = a
        .lu()
        .solve(&Vector3::new(ls[0].d(), ls[1].d(), ls[2].d()))?;
    Some((
        OrientedCircle {
            cx: x[0],
            cy: x[1],
            r: x[2],
        },
        det.abs(),
    ))
}

/// Incircle of four lines from their best-conditioned triple, with the
/// determinant of that triple and the largest contact residual of all four.
pub fn cell_incircle(sides: &[OrientedLine; 4]) -> Option<(OrientedCircle, f64, f64)> {
    let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let (circle, det) = triples
        .iter()
        .filter_map(|t| solve_three([&sides[t[0]], &sides[t[1]], &sides[t[2]]]))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let residual = sides
        .iter()
        .map(|l| contact_residual(l, &circle).abs())
        .fold(0.0, f64::max);
    Some((circle, det, residual))
}

/// Computes the circle of every black cell. Cells whose sides admit no
/// well-posed triple are recorded in `degenerate` instead of failing.
pub fn fill_incircles(mut net: CheckerboardNet, tol: f64, exec: Execution) -> CheckerboardNet {
    let cells = net.black_cells();
    let results = exec.map(&cells, |&cell| {
        let sides = net.cell_lines(cell)?;
        cell_incircle(&sides).map(|(circle, _, residual)| CellCircle {
            cell,
            circle,
            residual,
        })
    });
    net.circles.clear();
    net.degenerate.clear();
    for (cell, r) in cells.into_iter().zip(results) {
        match r {
            Some(c) => net.circles.push(c),
            None => net.degenerate.push(cell),
        }
    }
    net.meta.tolerance = tol;
    net
}

/// Per-check maxima of a net verification.
#[derive(Debug, Clone, PartialEq)]
pub struct NetReport {
    pub tolerance: f64,
    pub max_cylinder: f64,
    /// Largest `|q(p)| / scale(q)` over all lines, when the net records its
    /// pencil.
    pub max_pencil: Option<f64>,
    pub max_contact: f64,
    pub max_coplanarity: f64,
    pub cells_checked: usize,
    pub failing_cells: Vec<Cell>,
    pub unverifiable_cells: Vec<Cell>,
    pub failing_lines: Vec<(Family, i64)>,
}

impl NetReport {
    pub fn passed(&self) -> bool {
        self.failing_cells.is_empty()
            && self.failing_lines.is_empty()
            && self.max_cylinder <= self.tolerance
            && self.max_pencil.map_or(true, |p| p <= self.tolerance)
    }
}

impl fmt::Display for NetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cylinder residual    {:.3e}", self.max_cylinder)?;
        match self.max_pencil {
            Some(p) => writeln!(f, "pencil residual      {p:.3e}")?,
            None => writeln!(f, "pencil residual      n/a")?,
        }
        writeln!(f, "contact residual     {:.3e}", self.max_contact)?;
        writeln!(f, "coplanarity residual {:.3e}", self.max_coplanarity)?;
        writeln!(f, "cells checked        {}", self.cells_checked)?;
        if !self.unverifiable_cells.is_empty() {
            writeln!(f, "unverifiable cells   {}", list(&self.unverifiable_cells))?;
        }
        for (family, index) in &self.failing_lines {
            writeln!(f, "failing line         {family} {index}")?;
        }
        if !self.failing_cells.is_empty() {
            writeln!(f, "failing cells        {}", list(&self.failing_cells))?;
        }
        write!(
            f,
            "{} at tolerance {:e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.tolerance
        )
    }
}

fn list(cells: &[Cell]) -> String {
    cells
        .iter()
        .map(Cell::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

struct CellCheck {
    cell: Cell,
    contact: f64,
    coplanarity: f64,
    unverifiable: bool,
}

/// Checks cylinder and pencil membership of every line, and contact and
/// coplanarity of every black cell. Stored circles are checked as stored;
/// cells without one get a freshly computed incircle.
pub fn verify_net(net: &CheckerboardNet, tol: f64, exec: Execution) -> NetReport {
    let lines: Vec<(Family, &NetLine)> = net
        .vertical
        .iter()
        .map(|l| (Family::Vertical, l))
        .chain(net.horizontal.iter().map(|l| (Family::Horizontal, l)))
        .collect();
    let mut max_cylinder = 0.0_f64;
    let mut max_pencil = net.meta.pencil.map(|_| 0.0_f64);
    let mut failing_lines = Vec::new();
    for (family, l) in &lines {
        let cyl = l.line.cylinder_residual().abs();
        max_cylinder = max_cylinder.max(cyl);
        let mut bad = cyl > tol;
        if let (Some(q), Some(m)) = (&net.meta.pencil, max_pencil.as_mut()) {
            let r = q.eval(&l.line).abs() / q.scale();
            *m = m.max(r);
            bad |= r > tol;
        }
        if bad {
            failing_lines.push((*family, l.index));
        }
    }

    let cells = net.black_cells();
    let stored: HashMap<Cell, &CellCircle> = net.circles.iter().map(|c| (c.cell, c)).collect();
    let checks = exec.map(&cells, |&cell| {
        let sides = net.cell_lines(cell).expect("black cells have all sides");
        let coplanarity = coplanarity_residual(&sides[0], &sides[1], &sides[2], &sides[3]).abs();
        let fresh = cell_incircle(&sides);
        let unverifiable = fresh.map_or(true, |(_, det, _)| det < UNVERIFIABLE_DETERMINANT);
        let contact = match stored.get(&cell) {
            Some(c) => sides
                .iter()
                .map(|l| contact_residual(l, &c.circle).abs())
                .fold(0.0, f64::max),
            None => fresh.map_or(f64::INFINITY, |f| f.2),
        };
        CellCheck {
            cell,
            contact,
            coplanarity,
            unverifiable,
        }
    });

    let mut report = NetReport {
        tolerance: tol,
        max_cylinder,
        max_pencil,
        max_contact: 0.0,
        max_coplanarity: 0.0,
        cells_checked: 0,
        failing_cells: Vec::new(),
        unverifiable_cells: Vec::new(),
        failing_lines,
    };
    for c in checks {
        if c.unverifiable {
            report.unverifiable_cells.push(c.cell);
            continue;
        }
        report.cells_checked += 1;
        report.max_contact = report.max_contact.max(c.contact);
        report.max_coplanarity = report.max_coplanarity.max(c.coplanarity);
        if !(c.contact <= tol && c.coplanarity <= tol) {
            report.failing_cells.push(c.cell);
        }
    }
    report
}

/// Directions `(x, y, 0, z)` of the straight lines of `h` through `p`:
/// one for a cone-like tangent section, two otherwise.
fn generator_directions(p: &Vector4<f64>, h: &QuadricForm) -> Result<Vec<Vector4<f64>>, NetError> {
    let q = h.matrix();
    let idx = [0usize, 1, 3];
    let qp = q * p;
    let g = Vector3::new(qp[0], qp[1], qp[3]);
    if g.norm() < 1e-14 * h.scale() {
        return Err(NetError::DegenerateStep(
            "tangent plane contains no affine direction",
        ));
    }
    // Orthonormal basis of the tangent directions g . u = 0.
    let n = g.normalize();
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    let q3 = Matrix3::from_fn(|i, j| q[(idx[i], idx[j])]);
    let (a, b, c) = (e1.dot(&(q3 * e1)), e1.dot(&(q3 * e2)), e2.dot(&(q3 * e2)));
    let norm2 = a * a + 2.0 * b * b + c * c;
    if norm2 == 0.0 {
        return Err(NetError::DegenerateStep(
            "plane section of the quadric vanishes",
        ));
    }
    let disc = b * b - a * c;
    if disc < -DIRECTION_TOLERANCE * norm2 {
        return Err(NetError::NoRealGenerator(disc));
    }
    let lift = |x: f64, y: f64| {
        let u = e1 * x + e2 * y;
        Vector4::new(u[0], u[1], 0.0, u[2])
    };
    if disc <= DIRECTION_TOLERANCE * norm2 {
        return Ok(vec![if a.abs() >= c.abs() {
            lift(-b / a, 1.0)
        } else {
            lift(1.0, -b / c)
        }]);
    }
    let root = disc.sqrt();
    // Roots of a x^2 + 2 b x + c = 0 (or the swapped form), stably.
    Ok(if a.abs() >= c.abs() {
        let t = -(b + b.signum() * root);
        let (x1, x2) = (t / a, if t != 0.0 { c / t } else { -t / a });
        vec![lift(x1, 1.0), lift(x2, 1.0)]
    } else {
        let t = -(b + b.signum() * root);
        let (y1, y2) = (t / c, if t != 0.0 { a / t } else { -t / c });
        vec![lift(1.0, y1), lift(1.0, y2)]
    })
}

/// Second intersection of the line `p + t u` with the cylinder.
fn second_cylinder_point(p: &Vector4<f64>, u: &Vector4<f64>) -> Result<OrientedLine, NetError> {
    let uu = u[0] * u[0] + u[1] * u[1];
    if uu < 1e-24 * u.norm_squared() {
        return Err(NetError::DegenerateStep(
            "generator is parallel to the cylinder axis",
        ));
    }
    let t = -2.0 * (p[0] * u[0] + p[1] * u[1]) / uu;
    if t.abs() * u.norm() < 1e-12 {
        return Err(NetError::DegenerateStep("generator touches the cylinder"));
    }
    let x = p + u * t;
    Ok(OrientedLine::new(x[0], x[1], x[3])?)
}

/// The next point of the base curve along the generator of `h` through `p`
/// in the family `ruling`. Where `h` has a single straight line through `p`
/// (cones), that line is used and `ruling` is ignored.
pub fn step_general(
    p: &OrientedLine,
    h: &QuadricForm,
    ruling: Ruling,
) -> Result<OrientedLine, NetError> {
    let base = p.cylinder_residual().abs().max(h.eval(p).abs() / h.scale());
    if base > DEFAULT_TOLERANCE {
        return Err(NetError::OffBaseCurve(base));
    }
    let ph = p.homogeneous();
    let dirs = generator_directions(&ph, h)?;
    let chosen = if dirs.len() == 1 {
        dirs[0]
    } else {
        let labels: Vec<Option<Ruling>> =
            dirs.iter().map(|u| h.ruling_of_direction(&ph, u)).collect();
        match (labels[0], labels[1]) {
            (Some(r0), Some(r1)) if r0 != r1 => {
                if r0 == ruling {
                    dirs[0]
                } else {
                    dirs[1]
                }
            }
            _ => return Err(NetError::AmbiguousFamily),
        }
    };
    second_cylinder_point(&ph, &chosen)
}

/// Choice of generator family for the `L` and `M` steps on each quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyMarks {
    pub l_on_h: Ruling,
    pub m_on_h: Ruling,
    pub l_on_h_tilde: Ruling,
    pub m_on_h_tilde: Ruling,
}

impl FamilyMarks {
    /// `L` and `M` in opposite families on both quadrics.
    pub fn opposite(l_on_h: Ruling, l_on_h_tilde: Ruling) -> Self {
        FamilyMarks {
            l_on_h,
            m_on_h: l_on_h.opposite(),
            l_on_h_tilde,
            m_on_h_tilde: l_on_h_tilde.opposite(),
        }
    }
}

/// Residual of writing `other` as `mu * h + nu * Z`, relative to its size.
pub fn pencil_membership(h: &QuadricForm, other: &QuadricForm) -> f64 {
    let z = QuadricForm::blaschke_cylinder();
    let (x1, x2, y) = (h.upper(), z.upper(), other.upper());
    let dot = |a: &[f64; 10], b: &[f64; 10]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let (a11, a12, a22) = (dot(&x1, &x1), dot(&x1, &x2), dot(&x2, &x2));
    let (b1, b2) = (dot(&x1, &y), dot(&x2, &y));
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-14 * a11 * a22 {
        return f64::INFINITY;
    }
    let mu = (b1 * a22 - b2 * a12) / det;
    let nu = (a11 * b2 - a12 * b1) / det;
    let r = y
        .iter()
        .zip(x1.iter().zip(&x2))
        .map(|(yi, (p, q))| (yi - mu * p - nu * q).abs())
        .fold(0.0, f64::max);
    r / other.scale()
}

/// Builds `count_v` vertical and `count_h` horizontal lines starting from
/// `l0` and `m0`, stepping along generators of `h` from even indices and of
/// `h_tilde` from odd ones, then fills the incircles.
#[allow(clippy::too_many_arguments)]
pub fn build_net(
    h: &QuadricForm,
    h_tilde: &QuadricForm,
    l0: OrientedLine,
    m0: OrientedLine,
    count_v: usize,
    count_h: usize,
    marks: FamilyMarks,
    exec: Execution,
) -> Result<CheckerboardNet, NetError> {
    let miss = pencil_membership(h, h_tilde);
    if !(miss <= DEFAULT_TOLERANCE) {
        return Err(NetError::NotInPencil(miss));
    }
    let walk = |start: OrientedLine, count: usize, family: Family, r: Ruling, r_tilde: Ruling| {
        let mut lines = vec![NetLine::plain(0, start)];
        for n in 1..count {
            let prev = &lines[n - 1].line;
            let (q, rule) = if (n - 1) % 2 == 0 {
                (h, r)
            } else {
                (h_tilde, r_tilde)
            };
            let next = step_general(prev, q, rule).map_err(|e| e.at(family, n as i64))?;
            if n >= 2 && next.distance(&lines[n - 2].line) < DEFAULT_TOLERANCE {
                return Err(NetError::DuplicateLines {
                    family,
                    index: n as i64,
                    repeats: n as i64 - 2,
                });
            }
            lines.push(NetLine::plain(n as i64, next));
        }
        Ok(lines)
    };
    let vertical = walk(
        l0,
        count_v,
        Family::Vertical,
        marks.l_on_h,
        marks.l_on_h_tilde,
    )?;
    let horizontal = walk(
        m0,
        count_h,
        Family::Horizontal,
        marks.m_on_h,
        marks.m_on_h_tilde,
    )?;
    let mut meta = NetMeta::new("quadrics");
    meta.pencil = Some(*h);
    let net = CheckerboardNet::new(vertical, horizontal, meta);
    Ok(fill_incircles(net, DEFAULT_TOLERANCE, exec))
}

/// The elliptic net with `s + s_tilde = s_total`. All such nets share the
/// even-indexed vertical lines; `s_tilde = 2K` is the undivided IC-net.
pub fn subdivision_check(
    s_total: f64,
    s: f64,
    p: &NetParams,
    vertical: Range<i64>,
    horizontal: Range<i64>,
    exec: Execution,
) -> Result<CheckerboardNet, NetError> {
    let params = NetParams::new(*p.conic(), s, s_total - s, p.psi0v(), p.psi0h())?;
    Ok(params.net(vertical, horizontal, exec)?)
}

/// Envelope of the family `psi -> line(psi)` at `count` equally spaced
/// parameters in `[start, end]`; `None` marks parameters where the normal
/// is stationary.
pub fn envelope_samples<F>(line: F, start: f64, end: f64, count: usize) -> Vec<Option<(f64, f64)>>
where
    F: Fn(f64) -> OrientedLine,
{
    const H: f64 = 1e-5;
    let step = if count > 1 {
        (end - start) / (count - 1) as f64
    } else {
        0.0
    };
    (0..count)
        .map(|i| {
            let psi = start + step * i as f64;
            let (l, lp, lm) = (line(psi), line(psi + H), line(psi - H));
            let dv = (lp.v() - lm.v()) / (2.0 * H);
            let dw = (lp.w() - lm.w()) / (2.0 * H);
            let dd = (lp.d() - lm.d()) / (2.0 * H);
            let det = l.v() * dw - l.w() * dv;
            if det.abs() < 1e-10 {
                return None;
            }
            Some((
                (l.d() * dw - l.w() * dd) / det,
                (l.v() * dd - l.d() * dv) / det,
            ))
        })
        .collect()
}

/// All oriented lines tangent to the conic `a v^2 + b w^2 = d^2` (that is,
/// to `x^2/a + y^2/b = 1`) and in oriented contact with `circle`.
pub fn tangents_to_circle(conic: &ConfocalConic, circle: &OrientedCircle) -> Vec<OrientedLine> {
    let (a, b) = conic.cone_coefficients();
    let mut found: Vec<OrientedLine> = Vec::new();
    for sign in [1.0, -1.0] {
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            let dd = a * c * c + b * s * s;
            if dd < 0.0 {
                return None;
            }
            Some(circle.cx * c + circle.cy * s - circle.r - sign * dd.sqrt())
        };
        let n = 4096;
        let step = std::f64::consts::TAU / n as f64;
        for i in 0..n {
            let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
            let (Some(f0), Some(f1)) = (f(t0), f(t1)) else {
                continue;
            };
            if f0 == 0.0 || f0 * f1 < 0.0 {
                let (mut lo, mut hi, mut flo) = (t0, t1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let Some(fm) = f(mid) else { break };
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                let (s, c) = t.sin_cos();
                let d = sign * (a * c * c + b * s * s).max(0.0).sqrt();
                let l = OrientedLine::from_angle(t, d);
                if !found.iter().any(|g| g.distance(&l) < 1e-9) {
                    found.push(l);
                }
            }
        }
    }
    found
}
