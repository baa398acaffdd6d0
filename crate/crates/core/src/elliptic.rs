//! Jacobi elliptic functions of a real argument and real modulus `0 <= k < 1`.
//!
//! `sn`, `cn`, `dn` come from the descending Landen (AGM) iteration after
//! reducing the argument modulo the real period `4K`. The quarter period `K`
//! is computed once per [`Modulus`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use thiserror::Error;

/// Denominators below this magnitude are reported as poles.
pub const POLE_TOLERANCE: f64 = 1e-13;

const AGM_TOLERANCE: f64 = 1e-15;
const MAX_AGM_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EllipticError {
    #[error("elliptic modulus {0} outside [0, 1)")]
    Domain(f64),
    #[error("{ratio} has a pole at u = {u}")]
    Pole { ratio: Ratio, u: f64 },
}

/// Elliptic modulus `k` together with its quarter period `K(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    quarter: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(0.0..1.0).contains(&k) {
            return Err(EllipticError::Domain(k));
        }
        let kc = (1.0 - k * k).sqrt();
        Ok(Modulus {
            k,
            quarter: FRAC_PI_2 / agm(1.0, kc),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k2(&self) -> f64 {
        self.k * self.k
    }

    /// Complementary modulus `sqrt(1 - k^2)`.
    pub fn complementary(&self) -> f64 {
        (1.0 - self.k * self.k).sqrt()
    }

    /// Quarter period `K(k)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= AGM_TOLERANCE * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(m: Modulus) -> f64 {
    m.quarter
}

/// Values `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi elliptic functions `sn, cn, dn` at `u`.
pub fn jacobi(u: f64, m: Modulus) -> Jacobi {
    let period = 4.0 * m.quarter;
    let u = u - period * (u / period).round();

    let mut a = [0.0; MAX_AGM_STEPS + 1];
    let mut c = [0.0; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = m.k;
    let mut b = m.complementary();
    let mut n = 0;
    while c[n].abs() > AGM_TOLERANCE && n < MAX_AGM_STEPS {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    if n == 0 {
        return Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        };
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // The amplitude-ratio form of dn is 0/0 at u = K; the square root is not.
    Jacobi {
        sn,
        cn,
        dn: (1.0 - m.k2() * sn * sn).sqrt(),
    }
}

/// Glaisher quotients of the Jacobi functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ratio {
    Cd,
    Dc,
    Nc,
    Cs,
    Sc,
    Nd,
    Sd,
    Ds,
}

impl Ratio {
    pub const ALL: [Ratio; 8] = [
        Ratio::Cd,
        Ratio::Dc,
        Ratio::Nc,
        Ratio::Cs,
        Ratio::Sc,
        Ratio::Nd,
        Ratio::Sd,
        Ratio::Ds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ratio::Cd => "cd",
            Ratio::Dc => "dc",
            Ratio::Nc => "nc",
            Ratio::Cs => "cs",
            Ratio::Sc => "sc",
            Ratio::Nd => "nd",
            Ratio::Sd => "sd",
            Ratio::Ds => "ds",
        }
    }

    fn parts(self, j: Jacobi) -> (f64, f64) {
        match self {
            Ratio::Cd => (j.cn, j.dn),
            Ratio::Dc => (j.dn, j.cn),
            Ratio::Nc => (1.0, j.cn),
            Ratio::Cs => (j.cn, j.sn),
            Ratio::Sc => (j.sn, j.cn),
            Ratio::Nd => (1.0, j.dn),
            Ratio::Sd => (j.sn, j.dn),
            Ratio::Ds => (j.dn, j.sn),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown Jacobi ratio {0:?}")]
pub struct UnknownRatio(pub String);

impl FromStr for Ratio {
    type Err = UnknownRatio;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ratio::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRatio(s.to_owned()))
    }
}

/// Quotient named by `ratio` at `u`, or a pole error when its denominator
/// is below [`POLE_TOLERANCE`].
pub fn glaisher(ratio: Ratio, u: f64, m: Modulus) -> Result<f64, EllipticError> {
    quotient(ratio, u, m, POLE_TOLERANCE)
}

/// [`glaisher`] with a caller-chosen pole threshold.
pub fn quotient(ratio: Ratio, u: f64, m: Modulus, pole_tol: f64) -> Result<f64, EllipticError> {
    let (num, den) = ratio.parts(jacobi(u, m));
    if den.abs() < pole_tol {
        return Err(EllipticError::Pole { ratio, u });
    }
    Ok(num / den)
}

/// Coefficients `(c_s, c_c)` such that
/// `c_s sn(x) sn(x+s) + c_c cn(x) cn(x+s) - c_d dn(x) dn(x+s) = 1` for all `x`.
pub fn addition_coefficients(s: f64, c_d: f64, m: Modulus) -> Result<(f64, f64), EllipticError> {
    let dc = glaisher(Ratio::Dc, s, m)?;
    let nc = glaisher(Ratio::Nc, s, m)?;
    Ok((dc + c_d * (1.0 - m.k2()) * nc, nc + c_d * dc))
}

/// Determinant of the rows `(1, sn z_i, cn z_i, dn z_i)`; zero whenever the
/// four arguments sum to zero.
pub fn four_point_determinant(z: [f64; 4], m: Modulus) -> f64 {
    let mut a = Matrix4::zeros();
    for (i, &zi) in z.iter().enumerate() {
        let j = jacobi(zi, m);
        a[(i, 0)] = 1.0;
        a[(i, 1)] = j.sn;
        a[(i, 2)] = j.cn;
        a[(i, 3)] = j.dn;
    }
    a.determinant()
}

/// `sn(2u)` and `sn^2(u/2)` from the values at `u`.
pub fn double_half(u: f64, m: Modulus) -> Result<(f64, f64), EllipticError> {
    let j = jacobi(u, m);
    let den = 1.0 - m.k2() * j.sn.powi(4);
    if den.abs() < POLE_TOLERANCE {
        return Err(EllipticError::Pole {
            ratio: Ratio::Nd,
            u,
        });
    }
    Ok((2.0 * j.sn * j.cn * j.dn / den, (1.0 - j.cn) / (1.0 + j.dn)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use icnet_testkit::{complete_k as quad_k, jacobi_by_inversion};

    fn md(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn quarter_period_matches_quadrature() {
        assert_eq!(complete_k(md(0.0)), FRAC_PI_2);
        for k in [0.1, 0.5, 0.75f64.sqrt(), 0.9, 0.99] {
            assert!((complete_k(md(k)) - quad_k(k)).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn domain() {
        assert_eq!(Modulus::new(1.0), Err(EllipticError::Domain(1.0)));
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
    }

    #[test]
    fn special_values() {
        let m = md(0.6);
        let z = jacobi(0.0, m);
        assert_eq!((z.sn, z.cn, z.dn), (0.0, 1.0, 1.0));
        let q = jacobi(m.quarter_period(), m);
        assert!((q.sn - 1.0).abs() < 1e-14);
        assert!(q.cn.abs() < 1e-14);
        assert!((q.dn - 0.8).abs() < 1e-14);
    }

    #[test]
    fn matches_inverted_integral() {
        for (u, k) in [
            (0.3, 0.2),
            (1.7, 0.8),
            (-2.4, 0.95),
            (7.9, 0.5),
            (3.0, 0.99),
        ] {
            let j = jacobi(u, md(k));
            let (sn, cn, dn) = jacobi_by_inversion(u, k);
            assert!((j.sn - sn).abs() < 1e-12, "sn at ({u}, {k})");
            assert!((j.cn - cn).abs() < 1e-12, "cn at ({u}, {k})");
            assert!((j.dn - dn).abs() < 1e-12, "dn at ({u}, {k})");
        }
    }

    #[test]
    fn circular_case() {
        for u in [-5.0, -0.4, 0.9, 12.0] {
            let j = jacobi(u, md(0.0));
            assert!((j.sn - f64::sin(u)).abs() < 1e-13);
            assert!((j.cn - f64::cos(u)).abs() < 1e-13);
            assert_eq!(j.dn, 1.0);
        }
    }

    #[test]
    fn periodicity() {
        let m = md(0.7);
        let p = 4.0 * m.quarter_period();
        for u in [0.1, 1.3, -2.2, 40.0] {
            let a = jacobi(u, m);
            let b = jacobi(u + p, m);
            assert!((a.sn - b.sn).abs() < 1e-11 && (a.cn - b.cn).abs() < 1e-11);
            let c = jacobi(u + 0.5 * p, m);
            assert!((a.dn - c.dn).abs() < 1e-11);
        }
    }

    #[test]
    fn ratios_and_poles() {
        let m = md(0.5);
        let kk = m.quarter_period();
        assert!(glaisher(Ratio::Cs, kk, m).unwrap().abs() < 1e-14);
        assert_eq!(glaisher(Ratio::Dc, 0.0, m).unwrap(), 1.0);
        let j = jacobi(0.77, m);
        assert!((glaisher(Ratio::Sd, 0.77, m).unwrap() - j.sn / j.dn).abs() < 1e-14);
        assert!(matches!(
            glaisher(Ratio::Cs, 0.0, m),
            Err(EllipticError::Pole {
                ratio: Ratio::Cs,
                ..
            })
        ));
        assert!(glaisher(Ratio::Nc, kk, m).is_err());
        for r in Ratio::ALL {
            assert_eq!(r.name().parse::<Ratio>().unwrap(), r);
        }
        assert!("xx".parse::<Ratio>().is_err());
    }

    #[test]
    fn addition_identity() {
        let m = md(0.8);
        let (cs, cc) = addition_coefficients(0.0, 0.3, m).unwrap();
        assert!((cs - (1.0 + 0.3 * 0.36)).abs() < 1e-15 && (cc - 1.3).abs() < 1e-15);
        let (s, c_d) = (0.9, -0.45);
        let (cs, cc) = addition_coefficients(s, c_d, m).unwrap();
        for x in [-1.0, 0.2, 2.5] {
            let (a, b) = (jacobi(x, m), jacobi(x + s, m));
            let r = cs * a.sn * b.sn + cc * a.cn * b.cn - c_d * a.dn * b.dn - 1.0;
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn four_points() {
        let m = md(0.6);
        assert_eq!(four_point_determinant([0.0; 4], m), 0.0);
        assert!(four_point_determinant([0.3, -1.1, 2.0, -1.2], m).abs() < 1e-12);
        assert!(four_point_determinant([0.3, -1.1, 2.0, -0.2], m).abs() > 1e-6);
    }

    #[test]
    fn doubling_and_halving() {
        let m = md(0.9);
        assert_eq!(double_half(0.0, m).unwrap(), (0.0, 0.0));
        for u in [0.4, 1.9, -3.3] {
            let (d, h) = double_half(u, m).unwrap();
            assert!((d - jacobi(2.0 * u, m).sn).abs() < 1e-12);
            assert!((h - jacobi(0.5 * u, m).sn.powi(2)).abs() < 1e-12);
        }
    }
}
