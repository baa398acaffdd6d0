//! Oriented lines and circles of the plane, oriented contact, and Laguerre
//! transformations acting on the Blaschke cylinder.
//!
//! A line `v x + w y = d` with unit normal `(v, w)` is a point of the
//! cylinder `v^2 + w^2 = 1`; reversing its orientation negates all three
//! coordinates. A circle with centre `c` and signed radius `r` touches the
//! line in oriented contact when `c . (v, w) - r - d = 0`, so positive radii
//! go with normals pointing away from the centre.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector3, Vector4};
use thiserror::Error;

/// Determinants below this are treated as singular in 2x2 and 3x3 solves.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("line normal has zero length")]
    ZeroNormal,
    #[error("degenerate configuration (determinant {0:e})")]
    Degenerate(f64),
    #[error("image is the line at infinity (third coordinate {0:e})")]
    LineAtInfinity(f64),
    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),
    #[error("not a Laguerre transformation: {0}")]
    NotLaguerre(&'static str),
    #[error("no real confocal conic through the point (discriminant {0:e})")]
    NoRealConfocal(f64),
}

/// An oriented line `v x + w y = d` with `v^2 + w^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine {
    v: f64,
    w: f64,
    d: f64,
}

impl OrientedLine {
    /// Normalizes `(v, w, d)` by the length of `(v, w)`.
    pub fn new(v: f64, w: f64, d: f64) -> Result<Self, GeometryError> {
        let n = v.hypot(w);
        if !(n > 1e-300) || !n.is_finite() || !d.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(OrientedLine {
            v: v / n,
            w: w / n,
            d: d / n,
        })
    }

    /// Components taken as given, for reading stored nets bit-exactly; the
    /// cylinder constraint is left to verification.
    pub fn from_components(v: f64, w: f64, d: f64) -> Result<Self, GeometryError> {
        if !(v.is_finite() && w.is_finite() && d.is_finite()) || v.hypot(w) < 1e-300 {
            return Err(GeometryError::ZeroNormal);
        }
        Ok(OrientedLine { v, w, d })
    }

    /// Line with normal angle `theta` and offset `d`.
    pub fn from_angle(theta: f64, d: f64) -> Self {
        let (w, v) = theta.sin_cos();
        OrientedLine { v, w, d }
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn normal(&self) -> Vector2<f64> {
        Vector2::new(self.v, self.w)
    }

    /// Same carrier, opposite orientation.
    pub fn reversed(&self) -> Self {
        OrientedLine {
            v: -self.v,
            w: -self.w,
            d: -self.d,
        }
    }

    /// Image under the translation `x -> x + delta`.
    pub fn translated(&self, delta: Vector2<f64>) -> Self {
        OrientedLine {
            d: self.d + self.normal().dot(&delta),
            ..*self
        }
    }

    /// Homogeneous coordinates `(v, w, 1, d)` used by quadric forms.
    pub fn homogeneous(&self) -> Vector4<f64> {
        Vector4::new(self.v, self.w, 1.0, self.d)
    }

    /// Signed distance-like residual `v x + w y - d` of a point.
    pub fn point_residual(&self, x: f64, y: f64) -> f64 {
        self.v * x + self.w * y - self.d
    }

    /// `v^2 + w^2 - 1`; zero up to rounding for every constructed line.
    pub fn cylinder_residual(&self) -> f64 {
        self.v * self.v + self.w * self.w - 1.0
    }

    /// Largest coordinate difference to `other`.
    pub fn distance(&self, other: &OrientedLine) -> f64 {
        (self.v - other.v)
            .abs()
            .max((self.w - other.w).abs())
            .max((self.d - other.d).abs())
    }
}

/// A circle with centre `(cx, cy)` and signed radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedCircle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

/// `c . n - r - d`; zero iff line and circle are in oriented contact.
pub fn contact_residual(l: &OrientedLine, c: &OrientedCircle) -> f64 {
    c.cx * l.v + c.cy * l.w - c.r - l.d
}

/// The circle in oriented contact with three lines.
pub fn incircle_of_three(
    l1: &OrientedLine,
    l2: &OrientedLine,
    l3: &OrientedLine,
) -> Result<OrientedCircle, GeometryError> {
    let a = Matrix3::new(
        l1.v, l1.w, -1.0, //
        l2.v, l2.w, -1.0, //
        l3.v, l3.w, -1.0,
    );
    let det = a.determinant();
    if det.abs() < SINGULAR_TOLERANCE {
        return Err(GeometryError::Degenerate(det));
    }
    let x = a
        .lu()
        .solve(&Vector3::new(l1.d, l2.d, l3.d))
        .ok_or(GeometryError::Degenerate(det))?;
    Ok(OrientedCircle {
        cx: x[0],
        cy: x[1],
        r: x[2],
    })
}

/// Determinant of the rows `(1, v, w, d)`: zero iff the four lines touch a
/// common oriented circle (or are all parallel).
pub fn coplanarity_residual(
    l1: &OrientedLine,
    l2: &OrientedLine,
    l3: &OrientedLine,
    l4: &OrientedLine,
) -> f64 {
    let rows = [l1, l2, l3, l4];
    Matrix4::from_fn(|i, j| match j {
        0 => 1.0,
        1 => rows[i].v,
        2 => rows[i].w,
        _ => rows[i].d,
    })
    .determinant()
}

/// Intersection point of two non-parallel lines.
pub fn intersect(l1: &OrientedLine, l2: &OrientedLine) -> Result<(f64, f64), GeometryError> {
    let det = l1.v * l2.w - l1.w * l2.v;
    if det.abs() < SINGULAR_TOLERANCE {
        return Err(GeometryError::Degenerate(det));
    }
    Ok((
        (l1.d * l2.w - l1.w * l2.d) / det,
        (l1.v * l2.d - l1.d * l2.v) / det,
    ))
}

const Z3: Matrix3<f64> = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);

/// The Lorentz metric `diag(1, 1, -1)` on `(v, w, 1)`.
pub fn lorentz_metric() -> Matrix3<f64> {
    Z3
}

/// Deviation of `b` from the group O(2,1): `max |B^T Z B - Z|`.
pub fn lorentz_defect(b: &Matrix3<f64>) -> f64 {
    (b.transpose() * Z3 * b - Z3).abs().max()
}

/// A Laguerre transformation in the 4x4 form `[[lambda B, 0], [b^T, 1]]`
/// acting on lifted line coordinates `(v, w, 1, 2d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreTransform {
    m: Matrix4<f64>,
}

impl LaguerreTransform {
    /// `b` must lie in O(2,1) to 1e-10 and `lambda` must be nonzero.
    pub fn new(lambda: f64, b: Matrix3<f64>, shift: Vector3<f64>) -> Result<Self, GeometryError> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(GeometryError::NotLaguerre("scale must be nonzero"));
        }
        if lorentz_defect(&b) > 1e-10 {
            return Err(GeometryError::NotLaguerre("linear block is not in O(2,1)"));
        }
        Ok(Self::assemble(lambda, &b, &shift))
    }

    fn assemble(lambda: f64, b: &Matrix3<f64>, shift: &Vector3<f64>) -> Self {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(b * lambda));
        m.fixed_view_mut::<1, 3>(3, 0).copy_from(&shift.transpose());
        m[(3, 3)] = 1.0;
        LaguerreTransform { m }
    }

    pub fn identity() -> Self {
        LaguerreTransform {
            m: Matrix4::identity(),
        }
    }

    /// The 4x4 matrix acting on `(v, w, 1, 2d)`.
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Upper-left block `lambda B`.
    pub fn linear_block(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    /// Bottom row `b`.
    pub fn shift(&self) -> Vector3<f64> {
        self.m.fixed_view::<1, 3>(3, 0).transpose()
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &LaguerreTransform) -> Self {
        LaguerreTransform {
            m: self.m * first.m,
        }
    }

    pub fn inverse(&self) -> Self {
        // (lambda B)^-1 = lambda^-1 Z B^T Z for B in O(2,1).
        let lb = self.linear_block();
        let inv = Z3 * lb.transpose() * Z3 / (lb.transpose() * Z3 * lb)[(0, 0)];
        let shift = -(inv.transpose() * self.shift());
        Self::assemble(1.0, &inv, &shift)
    }

    /// The same map on quadric coordinates `(v, w, 1, d)`.
    pub fn on_quadric_coords(&self) -> Matrix4<f64> {
        let mut n = self.m;
        for i in 0..3 {
            n[(3, i)] *= 0.5;
        }
        n
    }

    /// Whether the transform is a Euclidean motion (`lambda = 1`, `B` fixes
    /// the third axis).
    pub fn is_euclidean(&self) -> bool {
        let lb = self.linear_block();
        (lb[(2, 2)] - 1.0).abs() < 1e-12
            && lb[(0, 2)].abs() < 1e-12
            && lb[(1, 2)].abs() < 1e-12
            && lb[(2, 0)].abs() < 1e-12
            && lb[(2, 1)].abs() < 1e-12
    }
}

/// Image of an oriented line.
pub fn apply(t: &LaguerreTransform, l: &OrientedLine) -> Result<OrientedLine, GeometryError> {
    let y = t.m * Vector4::new(l.v, l.w, 1.0, 2.0 * l.d);
    let s = y[2];
    if s.abs() < SINGULAR_TOLERANCE {
        return Err(GeometryError::LineAtInfinity(s));
    }
    OrientedLine::new(y[0] / s, y[1] / s, 0.5 * y[3] / s)
}

/// Laguerre transform induced by the Euclidean motion `x -> R^T x + delta`.
///
/// The normal of every line is mapped by `R^T` and the offset picks up the
/// translation, so `R` rotating by `theta` turns lines by `-theta`.
pub fn euclidean(r: Matrix2<f64>, delta: Vector2<f64>) -> Result<LaguerreTransform, GeometryError> {
    let dev = (r.transpose() * r - Matrix2::identity()).abs().max();
    if dev > 1e-12 {
        return Err(GeometryError::NotOrthogonal(dev));
    }
    let mut b = Matrix3::identity();
    b.fixed_view_mut::<2, 2>(0, 0).copy_from(&r.transpose());
    let rd = 2.0 * (r * delta);
    Ok(LaguerreTransform::assemble(
        1.0,
        &b,
        &Vector3::new(rd[0], rd[1], 0.0),
    ))
}

/// The two parameters `t` of confocal conics `x^2/(a+t) + y^2/(b+t) = 1`
/// through `(x, y)`, ascending.
pub fn confocal_parameters(x: f64, y: f64, a: f64, b: f64) -> Result<(f64, f64), GeometryError> {
    let p = a + b - x * x - y * y;
    let q = a * b - x * x * b - y * y * a;
    let disc = p * p - 4.0 * q;
    let scale = p * p + 4.0 * q.abs();
    if disc < -1e-12 * scale.max(1e-300) {
        return Err(GeometryError::NoRealConfocal(disc));
    }
    let root = disc.max(0.0).sqrt();
    // Stable pair: one root from the quadratic formula, the other from Vieta.
    let big = -0.5 * (p + p.signum() * root);
    let (t1, t2) = if big == 0.0 {
        (0.0, 0.0)
    } else {
        (big, q / big)
    };
    Ok((t1.min(t2), t1.max(t2)))
}
