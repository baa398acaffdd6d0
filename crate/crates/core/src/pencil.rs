//! Quadrics and conics of line space, and pencils spanned with the Blaschke
//! cylinder.
//!
//! A quadric is a symmetric 4x4 form on `(v, w, 1, d)`. After
//! [`pre_normalize`] it reads `p^T S p - d^2` with `p = (v, w, 1)`, and the
//! pencil it spans with the cylinder is governed by the pencil of conics
//! spanned by `S` and the unit circle `Z = diag(1, 1, -1)`. That pencil is
//! one of nine real types, decided by the roots of `det(S + t Z)` and the
//! base points of the pencil on the circle.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use thiserror::Error;

use crate::laguerre::{lorentz_defect, GeometryError, LaguerreTransform, OrientedLine};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("quadric is not generic: q44 = {0:e}")]
    NonGeneric(f64),
    #[error("conic coincides with the Blaschke circle")]
    DegeneratePencil,
    #[error("unresolved classification: characteristic roots {cubic}, base points {base}")]
    Unresolved { cubic: String, base: String },
    #[error("pencil of type {0} is not diagonalizable")]
    NotDiagonalizable(PencilType),
    #[error("improper net: {0}")]
    Improper(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Symmetric 4x4 form on homogeneous line coordinates `(v, w, 1, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricForm {
    q: Matrix4<f64>,
}

impl QuadricForm {
    pub fn new(q: Matrix4<f64>) -> Result<Self, PencilError> {
        let asym = max_abs(&(q - q.transpose()));
        if asym > 1e-14 * max_abs(&q).max(1.0) {
            return Err(PencilError::NotSymmetric(asym));
        }
        Ok(QuadricForm {
            q: 0.5 * (q + q.transpose()),
        })
    }

    /// From the upper triangle `q11, q12, q13, q14, q22, q23, q24, q33, q34, q44`.
    pub fn from_upper(e: [f64; 10]) -> Self {
        let q = Matrix4::new(
            e[0], e[1], e[2], e[3], //
            e[1], e[4], e[5], e[6], //
            e[2], e[5], e[7], e[8], //
            e[3], e[6], e[8], e[9],
        );
        QuadricForm { q }
    }

    pub fn upper(&self) -> [f64; 10] {
        let q = &self.q;
        [
            q[(0, 0)],
            q[(0, 1)],
            q[(0, 2)],
            q[(0, 3)],
            q[(1, 1)],
            q[(1, 2)],
            q[(1, 3)],
            q[(2, 2)],
            q[(2, 3)],
            q[(3, 3)],
        ]
    }

    pub fn diagonal(q11: f64, q22: f64, q33: f64, q44: f64) -> Self {
        QuadricForm {
            q: Matrix4::from_diagonal(&Vector4::new(q11, q22, q33, q44)),
        }
    }

    /// The cylinder `v^2 + w^2 - 1 = 0`.
    pub fn blaschke_cylinder() -> Self {
        Self::diagonal(1.0, 1.0, -1.0, 0.0)
    }

    /// Member `diag(a + t, b + t, -t, -1)` of the normalized pencil; `t = 0`
    /// is the cone `a v^2 + b w^2 = d^2`.
    pub fn confocal_member(a: f64, b: f64, t: f64) -> Self {
        Self::diagonal(a + t, b + t, -t, -1.0)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.q
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        max_abs(&self.q)
    }

    pub fn eval(&self, l: &OrientedLine) -> f64 {
        let p = l.homogeneous();
        p.dot(&(self.q * p))
    }

    pub fn bilinear(&self, p: &Vector4<f64>, u: &Vector4<f64>) -> f64 {
        p.dot(&(self.q * u))
    }

    pub fn q44(&self) -> f64 {
        self.q[(3, 3)]
    }

    pub fn is_generic(&self) -> bool {
        self.q44().abs() > 1e-14 * self.scale()
    }

    /// Upper-left 3x3 block.
    pub fn conic_block(&self) -> ConicForm {
        ConicForm {
            s: self.q.fixed_view::<3, 3>(0, 0).into_owned(),
        }
    }

    /// `self + t * cylinder`.
    pub fn shifted(&self, t: f64) -> Self {
        QuadricForm {
            q: self.q + Self::blaschke_cylinder().q * t,
        }
    }

    /// The quadric whose zero set is the image of this one under `t`.
    pub fn transformed(&self, t: &LaguerreTransform) -> Result<Self, PencilError> {
        let inv = t
            .on_quadric_coords()
            .try_inverse()
            .ok_or(GeometryError::Degenerate(0.0))?;
        let q = inv.transpose() * self.q * inv;
        Ok(QuadricForm {
            q: 0.5 * (q + q.transpose()),
        })
    }

    /// Family of the line through the points `p` and `p + u` of the quadric,
    /// or `None` when the quadric is singular along it (cones).
    pub fn ruling_of_direction(&self, p: &Vector4<f64>, u: &Vector4<f64>) -> Option<Ruling> {
        let (qp, qu) = (self.q * p, self.q * u);
        let det = Matrix4::from_columns(&[*p, *u, qp, qu]).determinant();
        let size = p.norm() * u.norm() * qp.norm() * qu.norm();
        if !(det.abs() > 1e-10 * size) {
            return None;
        }
        Some(if det > 0.0 {
            Ruling::Plus
        } else {
            Ruling::Minus
        })
    }

    /// Family of the chord between two lines lying on the quadric.
    pub fn ruling_through(&self, from: &OrientedLine, to: &OrientedLine) -> Option<Ruling> {
        let p = from.homogeneous();
        self.ruling_of_direction(&p, &(to.homogeneous() - p))
    }
}

/// One of the two families of straight lines on a ruled quadric.
///
/// The label is `sign det[P, U, QP, QU]` for a point `P` and direction `U`
/// of the line, which is the same for all lines of one family and opposite
/// between the families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ruling {
    Plus,
    Minus,
}

impl Ruling {
    pub fn opposite(self) -> Self {
        match self {
            Ruling::Plus => Ruling::Minus,
            Ruling::Minus => Ruling::Plus,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Ruling::Plus => 1,
            Ruling::Minus => -1,
        }
    }

    pub fn from_sign(s: i8) -> Option<Self> {
        match s {
            1 => Some(Ruling::Plus),
            -1 => Some(Ruling::Minus),
            _ => None,
        }
    }
}

/// Symmetric 3x3 form on `(v, w, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicForm {
    s: Matrix3<f64>,
}

impl ConicForm {
    pub fn new(s: Matrix3<f64>) -> Result<Self, PencilError> {
        let asym = max_abs(&(s - s.transpose()));
        if asym > 1e-14 * max_abs(&s).max(1.0) {
            return Err(PencilError::NotSymmetric(asym));
        }
        Ok(ConicForm {
            s: 0.5 * (s + s.transpose()),
        })
    }

    /// From the upper triangle `s11, s12, s13, s22, s23, s33`.
    pub fn from_upper(e: [f64; 6]) -> Self {
        ConicForm {
            s: Matrix3::new(e[0], e[1], e[2], e[1], e[3], e[4], e[2], e[4], e[5]),
        }
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self, PencilError> {
        Self::new(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn diagonal(a: f64, b: f64, c: f64) -> Self {
        ConicForm {
            s: Matrix3::from_diagonal(&Vector3::new(a, b, c)),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.s
    }

    pub fn eval(&self, v: f64, w: f64) -> f64 {
        let p = Vector3::new(v, w, 1.0);
        p.dot(&(self.s * p))
    }

    /// `B^T S B`.
    pub fn conjugated(&self, b: &Matrix3<f64>) -> Self {
        let s = b.transpose() * self.s * b;
        ConicForm {
            s: 0.5 * (s + s.transpose()),
        }
    }

    /// `S + t Z`.
    pub fn shifted(&self, t: f64) -> Self {
        ConicForm {
            s: self.s + Matrix3::from_diagonal(&Vector3::new(t, t, -t)),
        }
    }
}

/// The nine real types of pencils of conics spanned with a circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PencilType {
    Ia,
    Ib,
    Ic,
    IIa,
    IIb,
    IIIa,
    IIIb,
    IV,
    V,
}

impl PencilType {
    pub const ALL: [PencilType; 9] = [
        PencilType::Ia,
        PencilType::Ib,
        PencilType::Ic,
        PencilType::IIa,
        PencilType::IIb,
        PencilType::IIIa,
        PencilType::IIIb,
        PencilType::IV,
        PencilType::V,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PencilType::Ia => "Ia",
            PencilType::Ib => "Ib",
            PencilType::Ic => "Ic",
            PencilType::IIa => "IIa",
            PencilType::IIb => "IIb",
            PencilType::IIIa => "IIIa",
            PencilType::IIIb => "IIIb",
            PencilType::IV => "IV",
            PencilType::V => "V",
        }
    }

    /// Whether a Laguerre transformation brings the pencil to diagonal form.
    pub fn is_diagonalizable(self) -> bool {
        matches!(
            self,
            PencilType::Ia | PencilType::Ic | PencilType::IIIa | PencilType::IIIb
        )
    }

    /// Real base-point multiplicities, largest first.
    pub fn base_pattern(self) -> &'static [usize] {
        match self {
            PencilType::Ia => &[1, 1, 1, 1],
            PencilType::Ib => &[1, 1],
            PencilType::Ic | PencilType::IIIb => &[],
            PencilType::IIa => &[2, 1, 1],
            PencilType::IIb => &[2],
            PencilType::IIIa => &[2, 2],
            PencilType::IV => &[3, 1],
            PencilType::V => &[4],
        }
    }
}

impl fmt::Display for PencilType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pencil type {0:?}")]
pub struct UnknownPencilType(pub String);

impl FromStr for PencilType {
    type Err = UnknownPencilType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PencilType::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| UnknownPencilType(s.to_owned()))
    }
}

/// Normalizes `q44` to `-1` and removes the mixed `d`-terms.
///
/// Returns the block-diagonal quadric `diag(S, -1)` and the transform taking
/// lines of the input to lines of the output (a pure shift of `d`).
pub fn pre_normalize(qt: &QuadricForm) -> Result<(QuadricForm, LaguerreTransform), PencilError> {
    if !qt.is_generic() {
        return Err(PencilError::NonGeneric(qt.q44()));
    }
    let q = qt.q / -qt.q44();
    let a: Vector3<f64> = q.fixed_view::<3, 1>(0, 3).into_owned();
    let s = q.fixed_view::<3, 3>(0, 0) + a * a.transpose();
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&s);
    out[(3, 3)] = -1.0;
    // d' = d - a . (v, w, 1), i.e. 2d' = 2d - 2a . (v, w, 1).
    let t = LaguerreTransform::new(1.0, Matrix3::identity(), -2.0 * a)?;
    Ok((QuadricForm { q: out }, t))
}

/// Coefficients `[c3, c2, c1, c0]` of `det(S + t Z)`.
pub fn characteristic_cubic(s: &ConicForm) -> [f64; 4] {
    let m = &s.s;
    let z = Vector3::new(1.0, 1.0, -1.0);
    // det(S + tZ) = det S + t tr(adj(S) Z) + t^2 tr(S adj(Z)) + t^3 det Z,
    // with adj(Z) = -Z.
    let cof = |i: usize, j: usize| {
        let (i0, i1) = ((i + 1) % 3, (i + 2) % 3);
        let (j0, j1) = ((j + 1) % 3, (j + 2) % 3);
        m[(i0, j0)] * m[(i1, j1)] - m[(i0, j1)] * m[(i1, j0)]
    };
    let c1 = (0..3).map(|i| cof(i, i) * z[i]).sum::<f64>();
    let c2 = -(0..3).map(|i| m[(i, i)] * z[i]).sum::<f64>();
    [-1.0, c2, c1, m.determinant()]
}

fn cubic_value(c: &[f64; 4], t: f64) -> f64 {
    ((c[0] * t + c[1]) * t + c[2]) * t + c[3]
}

/// Roots of `c3 t^3 + c2 t^2 + c1 t + c0` with `c3 != 0`, real ones first
/// (ascending), then a conjugate pair if present.
pub fn cubic_roots(c: &[f64; 4]) -> [Complex<f64>; 3] {
    let (a2, a1, a0) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    let shift = a2 / 3.0;
    let p = a1 - a2 * shift;
    let q = 2.0 * shift * shift * shift - a1 * shift + a0;
    let disc = (q * 0.5).powi(2) + (p / 3.0).powi(3);
    let mut out = if p == 0.0 && q == 0.0 {
        [Complex::new(0.0, 0.0); 3]
    } else if disc <= 0.0 {
        let r = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos() / 3.0;
        let tau = std::f64::consts::TAU / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex::new(2.0 * r * (arg - tau * k).cos(), 0.0))
    } else {
        let big = -(q.signum()) * (q.abs() * 0.5 + disc.sqrt()).cbrt();
        let small = if big == 0.0 { 0.0 } else { -p / (3.0 * big) };
        let re = -0.5 * (big + small);
        let im = 0.5 * 3f64.sqrt() * (big - small);
        [
            Complex::new(big + small, 0.0),
            Complex::new(re, im.abs()),
            Complex::new(re, -im.abs()),
        ]
    };
    for z in out.iter_mut() {
        z.re -= shift;
    }
    // Polish real roots with a few guarded Newton steps.
    for z in out.iter_mut().filter(|z| z.im == 0.0) {
        for _ in 0..3 {
            let f = cubic_value(c, z.re);
            let df = (3.0 * c[0] * z.re + 2.0 * c[1]) * z.re + c[2];
            if df.abs() < 1e-8 * (c[0].abs() + c[1].abs() + c[2].abs()) {
                break;
            }
            let next = z.re - f / df;
            if cubic_value(c, next).abs() >= f.abs() {
                break;
            }
            z.re = next;
        }
    }
    let nreal = out.iter().filter(|z| z.im == 0.0).count();
    out[..nreal].sort_by(|a, b| a.re.total_cmp(&b.re));
    out
}

/// A real base point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint {
    pub v: f64,
    pub w: f64,
    pub multiplicity: usize,
}

/// Real base points of a pencil plus the number of non-real ones (with
/// multiplicity).
#[derive(Debug, Clone, PartialEq)]
pub struct BasePointSet {
    pub points: Vec<BasePoint>,
    pub complex: usize,
}

impl BasePointSet {
    /// Real multiplicities, largest first.
    pub fn pattern(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.points.iter().map(|p| p.multiplicity).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        m
    }
}

/// Exact power-of-two rescaling bringing the largest entry into [1, 2).
fn binary_scale(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        2f64.powi(-(x.log2().floor() as i32))
    }
}

/// Spread allowed inside a cluster of `m` coincident roots. Rounding of
/// order 1e-16 splits an m-fold root by about its m-th root.
fn cluster_tolerance(m: usize) -> f64 {
    match m {
        1 => 1e-9,
        2 => 1e-6,
        3 => 1e-4,
        _ => 2e-3,
    }
}

struct Cluster {
    centre: Complex<f64>,
    size: usize,
}

fn spread(pts: &[Complex<f64>]) -> (Complex<f64>, f64) {
    let c = pts.iter().sum::<Complex<f64>>() / pts.len() as f64;
    let r = pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    (c, r)
}

/// Groups roots into coincidence clusters, preferring the coarsest grouping
/// whose clusters each fit within their multiplicity's tolerance.
fn cluster_roots(roots: &[Complex<f64>], tol: impl Fn(usize) -> f64) -> Vec<Cluster> {
    let n = roots.len();
    let fits = |idx: &[usize]| {
        let pts: Vec<_> = idx.iter().map(|&i| roots[i]).collect();
        let (c, r) = spread(&pts);
        r <= tol(idx.len()) * (1.0 + c.norm())
    };
    // Enumerate set partitions of a handful of roots via restricted growth strings.
    let mut best: Option<Vec<Vec<usize>>> = None;
    let mut labels = vec![0usize; n];
    loop {
        let parts = labels.iter().max().map_or(0, |m| m + 1);
        let groups: Vec<Vec<usize>> = (0..parts)
            .map(|g| (0..n).filter(|&i| labels[i] == g).collect())
            .collect();
        if groups.iter().all(|g| fits(g)) && best.as_ref().map_or(true, |b| groups.len() < b.len())
        {
            best = Some(groups);
        }
        // next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                let groups = best.unwrap_or_else(|| (0..n).map(|i| vec![i]).collect());
                return groups
                    .into_iter()
                    .map(|g| {
                        let pts: Vec<_> = g.iter().map(|&i| roots[i]).collect();
                        Cluster {
                            centre: spread(&pts).0,
                            size: g.len(),
                        }
                    })
                    .collect();
            }
            i -= 1;
            let prefix_max = labels[..i].iter().max().copied().unwrap_or(0);
            if labels[i] <= prefix_max {
                labels[i] += 1;
                for l in labels[i + 1..].iter_mut() {
                    *l = 0;
                }
                break;
            }
        }
    }
}

/// All complex roots of `sum c[i] t^i` (leading coefficient nonzero) by the
/// Aberth-Ehrlich simultaneous iteration. Clustered roots converge linearly
/// and end up spread by roughly the m-th root of the rounding level, which
/// is what the clustering tolerances allow for.
fn polynomial_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex<f64>| {
        let mut p = Complex::new(1.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &a in monic[..n].iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let radius = 1.0 + monic[..n].iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| {
            Complex::from_polar(
                0.5 * radius,
                0.4 + std::f64::consts::TAU * k as f64 / n as f64,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Real common points of the conic and the unit circle, with multiplicities.
///
/// The circle is parametrized by the half-angle `t = tan((theta - theta0)/2)`
/// with `theta0` chosen so that the antipodal point is far from the conic.
pub fn base_points(s: &ConicForm) -> Result<BasePointSet, PencilError> {
    let m = s.s * binary_scale(max_abs(&s.s));
    let quartic = |theta0: f64| {
        let (sn, cs) = theta0.sin_cos();
        let a0 = Vector3::new(cs, sn, 1.0);
        let a1 = Vector3::new(-2.0 * sn, 2.0 * cs, 0.0);
        let a2 = Vector3::new(-cs, -sn, 1.0);
        let f = |x: &Vector3<f64>, y: &Vector3<f64>| x.dot(&(m * y));
        [
            f(&a0, &a0),
            2.0 * f(&a0, &a1),
            f(&a1, &a1) + 2.0 * f(&a0, &a2),
            2.0 * f(&a1, &a2),
            f(&a2, &a2),
        ]
    };
    let (theta0, coeffs) = (0..24)
        .map(|i| {
            let th = i as f64 * std::f64::consts::TAU / 24.0;
            (th, quartic(th))
        })
        .max_by(|a, b| a.1[4].abs().total_cmp(&b.1[4].abs()))
        .unwrap();
    let size = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    if size < 1e-13 || coeffs[4].abs() < 1e-9 * size {
        return Err(PencilError::DegeneratePencil);
    }
    let roots = polynomial_roots(&coeffs);

    let mut points = Vec::new();
    let mut complex = 0;
    for c in cluster_roots(&roots, cluster_tolerance) {
        let real_tol = if c.size == 1 {
            1e-9
        } else {
            cluster_tolerance(c.size)
        };
        if c.centre.im.abs() > real_tol * (1.0 + c.centre.norm()) {
            complex += c.size;
            continue;
        }
        let theta = theta0 + 2.0 * c.centre.re.atan();
        let (w, v) = theta.sin_cos();
        if m.iter().all(|x| x.is_finite())
            && (Vector3::new(v, w, 1.0).dot(&(m * Vector3::new(v, w, 1.0)))).abs() > 1e-7
        {
            complex += c.size;
            continue;
        }
        points.push(BasePoint {
            v,
            w,
            multiplicity: c.size,
        });
    }
    points.sort_by(|a, b| a.w.atan2(a.v).total_cmp(&b.w.atan2(b.v)));
    Ok(BasePointSet { points, complex })
}

/// Root pattern of the characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicPattern {
    /// Three distinct real roots.
    Simple,
    /// One real root and a conjugate pair.
    ComplexPair,
    /// A double root `at` (with rank of `S + at Z`) and a simple root.
    Double { at: f64, simple: f64, rank: usize },
    /// A triple root `at` (with rank of `S + at Z`).
    Triple { at: f64, rank: usize },
}

impl fmt::Display for CubicPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubicPattern::Simple => write!(f, "three simple real"),
            CubicPattern::ComplexPair => write!(f, "one real and a complex pair"),
            CubicPattern::Double { at, rank, .. } => write!(f, "double at {at} (rank {rank})"),
            CubicPattern::Triple { at, rank } => write!(f, "triple at {at} (rank {rank})"),
        }
    }
}

fn rank_of_member(s: &Matrix3<f64>, t: f64) -> usize {
    let m = s + Matrix3::from_diagonal(&Vector3::new(t, t, -t));
    let eig = SymmetricEigen::new(m).eigenvalues;
    let tol = 1e-7 * (max_abs(s) + t.abs()).max(1e-300);
    eig.iter().filter(|e| e.abs() > tol).count()
}

fn cubic_pattern(s: &Matrix3<f64>, roots: &[Complex<f64>; 3]) -> CubicPattern {
    let clusters = cluster_roots(roots, |m| match m {
        1 => 0.0,
        2 => 1e-7,
        _ => 1e-4,
    });
    match clusters.len() {
        1 => {
            let at = clusters[0].centre.re;
            CubicPattern::Triple {
                at,
                rank: rank_of_member(s, at),
            }
        }
        2 => {
            let (d, o) = if clusters[0].size == 2 {
                (&clusters[0], &clusters[1])
            } else {
                (&clusters[1], &clusters[0])
            };
            CubicPattern::Double {
                at: d.centre.re,
                simple: o.centre.re,
                rank: rank_of_member(s, d.centre.re),
            }
        }
        _ if roots.iter().all(|r| r.im == 0.0) => CubicPattern::Simple,
        _ => CubicPattern::ComplexPair,
    }
}

/// Everything the classifier looked at.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilAnalysis {
    pub pencil_type: PencilType,
    pub cubic: [f64; 4],
    pub roots: [Complex<f64>; 3],
    pub pattern: CubicPattern,
    pub base_points: BasePointSet,
}

/// Classifies the pencil and returns the supporting diagnostics.
pub fn analyze(s: &ConicForm) -> Result<PencilAnalysis, PencilError> {
    let scale = binary_scale(max_abs(&s.s));
    let m = s.s * scale;
    let z = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
    let fit = (m.component_mul(&z)).sum() / 3.0;
    if max_abs(&(m - z * fit)) < 1e-12 {
        return Err(PencilError::DegeneratePencil);
    }
    let cubic = characteristic_cubic(&ConicForm { s: m });
    let roots = cubic_roots(&cubic);
    let pattern = cubic_pattern(&m, &roots);
    let base = base_points(s)?;
    let real = base.pattern();

    let candidates: &[PencilType] = match pattern {
        CubicPattern::Simple => &[PencilType::Ia, PencilType::Ic],
        CubicPattern::ComplexPair => &[PencilType::Ib],
        CubicPattern::Double { rank: 2, .. } => &[PencilType::IIa, PencilType::IIb],
        CubicPattern::Double { rank: 1, .. } => &[PencilType::IIIa, PencilType::IIIb],
        CubicPattern::Triple { rank: 2, .. } => &[PencilType::IV],
        CubicPattern::Triple { rank: 1, .. } => &[PencilType::V],
        _ => &[],
    };
    let found = candidates
        .iter()
        .copied()
        .find(|t| t.base_pattern() == real.as_slice());
    let pencil_type = found.ok_or_else(|| PencilError::Unresolved {
        cubic: pattern.to_string(),
        base: format!("{real:?} real, {} complex", base.complex),
    })?;
    let unscale = |r: Complex<f64>| r / scale;
    Ok(PencilAnalysis {
        pencil_type,
        cubic: characteristic_cubic(s),
        roots: roots.map(unscale),
        pattern: match pattern {
            CubicPattern::Double { at, simple, rank } => CubicPattern::Double {
                at: at / scale,
                simple: simple / scale,
                rank,
            },
            CubicPattern::Triple { at, rank } => CubicPattern::Triple {
                at: at / scale,
                rank,
            },
            p => p,
        },
        base_points: base,
    })
}

pub fn classify(s: &ConicForm) -> Result<PencilType, PencilError> {
    analyze(s).map(|a| a.pencil_type)
}

/// Result of [`diagonalize`]: `B` in O(2,1) with `B^T S B = diag(values)`.
///
/// Columns are ordered spacelike, spacelike, timelike; spacelike columns by
/// decreasing diagonal value.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub b: Matrix3<f64>,
    pub values: [f64; 3],
    pub pencil_type: PencilType,
}

fn z_norm(x: &Vector3<f64>) -> f64 {
    x[0] * x[0] + x[1] * x[1] - x[2] * x[2]
}

fn z_dot(x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    x[0] * y[0] + x[1] * y[1] - x[2] * y[2]
}

/// Kernel direction of a rank-2 symmetric matrix.
fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let rows = [
        m.row(0).transpose(),
        m.row(1).transpose(),
        m.row(2).transpose(),
    ];
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| rows[i].cross(&rows[j]))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    best / best.norm()
}

/// Fixes the sign of a basis vector: timelike ones point to positive third
/// coordinate, spacelike ones have a positive largest component.
fn canonical_sign(x: Vector3<f64>) -> Vector3<f64> {
    let flip = if z_norm(&x) < 0.0 {
        x[2] < 0.0
    } else {
        let i = x.iamax();
        x[i] < 0.0
    };
    if flip {
        -x
    } else {
        x
    }
}

fn z_unit(x: Vector3<f64>) -> Result<Vector3<f64>, PencilError> {
    let n = z_norm(&x);
    if n.abs() < 1e-10 * x.norm_squared() {
        return Err(PencilError::DegeneratePencil);
    }
    Ok(canonical_sign(x / n.abs().sqrt()))
}

/// Z-orthonormal basis of the Z-orthogonal complement of `x`.
fn z_complement(x: &Vector3<f64>) -> Result<[Vector3<f64>; 2], PencilError> {
    let g = Vector3::new(x[0], x[1], -x[2]);
    let g = g / g.norm();
    let seed = if g[0].abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (seed - g * g.dot(&seed)).normalize();
    let e2 = g.cross(&e1);
    let gram = nalgebra::Matrix2::new(z_norm(&e1), z_dot(&e1, &e2), z_dot(&e1, &e2), z_norm(&e2));
    let eig = SymmetricEigen::new(gram);
    let mut out = [Vector3::zeros(); 2];
    for (k, slot) in out.iter_mut().enumerate() {
        let r = eig.eigenvectors.column(k);
        *slot = z_unit(e1 * r[0] + e2 * r[1])?;
    }
    Ok(out)
}

/// Laguerre-diagonalizes the pencil: finds `B` in O(2,1) with `B^T S B` diagonal.
pub fn diagonalize(s: &ConicForm) -> Result<Diagonalization, PencilError> {
    let analysis = analyze(s)?;
    let kind = analysis.pencil_type;
    let vectors: Vec<Vector3<f64>> = match analysis.pattern {
        CubicPattern::Simple => analysis
            .roots
            .iter()
            .map(|r| z_unit(null_vector(&s.shifted(r.re).s)))
            .collect::<Result<_, _>>()?,
        CubicPattern::Double {
            simple, rank: 1, ..
        } => {
            let x = z_unit(null_vector(&s.shifted(simple).s))?;
            let [y1, y2] = z_complement(&x)?;
            vec![x, y1, y2]
        }
        _ => return Err(PencilError::NotDiagonalizable(kind)),
    };
    let (mut space, time): (Vec<_>, Vec<_>) = vectors.into_iter().partition(|x| z_norm(x) > 0.0);
    if space.len() != 2 || time.len() != 1 {
        return Err(PencilError::DegeneratePencil);
    }
    let value = |x: &Vector3<f64>| x.dot(&(s.s * x));
    space.sort_by(|a, b| {
        value(b)
            .total_cmp(&value(a))
            .then(a.iamax().cmp(&b.iamax()))
    });
    let b = Matrix3::from_columns(&[space[0], space[1], time[0]]);
    let values = [value(&space[0]), value(&space[1]), value(&time[0])];
    Ok(Diagonalization {
        b,
        values,
        pencil_type: kind,
    })
}

/// A generic quadric brought to the normalized pencil `diag(a + t, b + t, -t, -1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfocalNormalization {
    /// Takes lines of the input configuration to the normalized one.
    pub transform: LaguerreTransform,
    pub a: f64,
    pub b: f64,
    pub pencil_type: PencilType,
}

/// Composes [`pre_normalize`] and [`diagonalize`] into one Laguerre transform
/// with `a >= b`.
pub fn to_confocal(qt: &QuadricForm) -> Result<ConfocalNormalization, PencilError> {
    let (q, shear) = pre_normalize(qt)?;
    let diag = diagonalize(&q.conic_block())?;
    let [s1, s2, s3] = diag.values;
    let (mut a, mut b) = (s1 + s3, s2 + s3);
    let mut basis = diag.b;
    if a < b {
        // quarter turn of the plane keeps the transform orientation preserving
        let c0 = basis.column(0).into_owned();
        let c1 = basis.column(1).into_owned();
        basis.set_column(0, &c1);
        basis.set_column(1, &(-c0));
        std::mem::swap(&mut a, &mut b);
    }
    let zero = 1e-12 * a.abs().max(b.abs()).max(1.0);
    if a < -zero {
        return Err(PencilError::Improper("empty base curve"));
    }
    if a.abs() <= zero {
        return Err(PencilError::Improper("base curve consists of two points"));
    }
    let z = lorentz_metric_3();
    let inv = z * basis.transpose() * z;
    debug_assert!(lorentz_defect(&inv) < 1e-8);
    let to_diag = LaguerreTransform::new(1.0, inv, Vector3::zeros())?;
    Ok(ConfocalNormalization {
        transform: to_diag.compose(&shear),
        a,
        b,
        pencil_type: diag.pencil_type,
    })
}

fn lorentz_metric_3() -> Matrix3<f64> {
    crate::laguerre::lorentz_metric()
}

/// Classifies the pencil of a generic quadric; also returns the sign of `q44`.
pub fn classify_quadric(qt: &QuadricForm) -> Result<(PencilType, f64), PencilError> {
    let (q, _) = pre_normalize(qt)?;
    Ok((classify(&q.conic_block())?, qt.q44().signum()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_examples() {
        assert_eq!(
            characteristic_cubic(&ConicForm::diagonal(0.0, 0.0, 0.0)),
            [-1.0, 0.0, 0.0, 0.0]
        );
        let r = cubic_roots(&characteristic_cubic(&ConicForm::diagonal(2.0, 0.5, 0.0)));
        let re: Vec<f64> = r.iter().map(|z| z.re).collect();
        assert!((re[0] + 2.0).abs() < 1e-14 && (re[1] + 0.5).abs() < 1e-14 && re[2].abs() < 1e-14);
    }

    #[test]
    fn cubic_matches_determinants() {
        let s = ConicForm::from_upper([0.3, -1.2, 0.7, 2.1, 0.4, -0.9]);
        let c = characteristic_cubic(&s);
        for t in [0.0, 1.0, -1.0, 2.0] {
            let det = s.shifted(t).matrix().determinant();
            assert!((cubic_value(&c, t) - det).abs() < 1e-12);
        }
    }

    #[test]
    fn base_point_examples() {
        let bp = base_points(&ConicForm::diagonal(1.0, -1.0, 0.0)).unwrap();
        assert_eq!(bp.pattern(), vec![1, 1, 1, 1]);
        let h = 0.5f64.sqrt();
        for p in &bp.points {
            assert!((p.v.abs() - h).abs() < 1e-12 && (p.w.abs() - h).abs() < 1e-12);
        }
        assert!(base_points(&ConicForm::diagonal(1.0, 1.0, 0.0))
            .unwrap()
            .points
            .is_empty());
        let bp = base_points(&ConicForm::diagonal(0.0, 1.0, -1.0)).unwrap();
        assert_eq!(bp.pattern(), vec![2, 2]);
        for p in &bp.points {
            assert!(p.v.abs() < 1e-6 && (p.w.abs() - 1.0).abs() < 1e-9);
        }
        assert_eq!(
            base_points(&ConicForm::diagonal(1.0, 1.0, -1.0)),
            Err(PencilError::DegeneratePencil)
        );
    }

    #[test]
    fn simple_labels() {
        assert_eq!(
            classify(&ConicForm::diagonal(1.0, -1.0, 0.0)).unwrap(),
            PencilType::Ia
        );
        assert_eq!(
            classify(&ConicForm::diagonal(2.0, 1.0, 0.0)).unwrap(),
            PencilType::Ic
        );
        assert_eq!(
            classify(&ConicForm::diagonal(0.0, 1.0, -1.0)).unwrap(),
            PencilType::IIIa
        );
        // a double root with a rank-one member: the point pencil of the centre
        assert_eq!(
            classify(&ConicForm::diagonal(1.0, 1.0, 0.0)).unwrap(),
            PencilType::IIIb
        );
    }

    #[test]
    fn pre_normalize_shear() {
        let qt = QuadricForm::from_upper([2.0, 0.3, -0.4, 0.5, 1.5, 0.2, -0.7, 0.1, 0.9, -2.0]);
        let (q, t) = pre_normalize(&qt).unwrap();
        assert_eq!(q.q44(), -1.0);
        for i in 0..3 {
            assert_eq!(q.matrix()[(i, 3)], 0.0);
        }
        let via = qt.transformed(&t).unwrap();
        let ratio = via.q44() / q.q44();
        assert!((via.matrix() - q.matrix() * ratio).abs().max() < 1e-12);
        let (_, t) = pre_normalize(&QuadricForm::diagonal(4.0, 1.0, 0.0, -1.0)).unwrap();
        assert_eq!(*t.matrix(), Matrix4::identity());
        assert!(matches!(
            pre_normalize(&QuadricForm::diagonal(1.0, 1.0, 1.0, 0.0)),
            Err(PencilError::NonGeneric(_))
        ));
    }

    #[test]
    fn cone_is_already_confocal() {
        let n = to_confocal(&QuadricForm::diagonal(4.0, 1.0, 0.0, -1.0)).unwrap();
        assert_eq!((n.a, n.b), (4.0, 1.0));
        assert!((n.transform.matrix() - Matrix4::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn rulings_of_a_hyperboloid() {
        // (v^2 + w^2)/4 + 3/4 - d^2 = 0 meets the cylinder in d = +-1.
        let h = QuadricForm::confocal_member(1.0, 1.0, -0.75);
        let p = OrientedLine::from_angle(0.3, 1.0);
        let q = OrientedLine::from_angle(1.3, -1.0);
        assert!(h.eval(&p).abs() < 1e-15);
        let label = h.ruling_through(&p, &q);
        assert!(label.is_some());
        assert_eq!(h.ruling_through(&q, &p), label);
        let cone = QuadricForm::confocal_member(1.0, 1.0, 0.0);
        let a = OrientedLine::from_angle(0.3, 1.0);
        assert_eq!(cone.ruling_through(&a, &a.reversed()), None);
    }
}
