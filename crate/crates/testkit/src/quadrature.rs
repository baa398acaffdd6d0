//! Elliptic integrals by adaptive Gauss-Kronrod quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 15-point Gauss-Kronrod integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = kronrod(f, a, b);
        // |K - G| overestimates the Kronrod error; stop once it is at rounding level.
        if err <= tol.max(50.0 * f64::EPSILON * v.abs()) || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(&f, a, b, tol, 40)
}

/// Incomplete integral of the first kind, F(phi | k).
pub fn incomplete_f(phi: f64, k: f64) -> f64 {
    integrate(
        |t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        phi,
        1e-15,
    )
}

/// Quarter period K(k) by quadrature.
pub fn complete_k(k: f64) -> f64 {
    incomplete_f(std::f64::consts::FRAC_PI_2, k)
}

/// (sn, cn, dn) by inverting the incomplete integral for the amplitude.
/// Slow but independent of any Landen-type iteration.
pub fn jacobi_by_inversion(u: f64, k: f64) -> (f64, f64, f64) {
    let kk = complete_k(k);
    // F(phi + pi) = F(phi) + 2K, so reduce u into [0, 2K) first.
    let period = 2.0 * kk;
    let turns = (u / period).floor();
    let r = u - turns * period;
    let dn_of = |phi: f64| (1.0 - k * k * phi.sin().powi(2)).sqrt();
    // Newton on F(phi) = r with F' = 1/dn, from the circular guess.
    let mut phi = r * std::f64::consts::PI / period;
    for _ in 0..50 {
        let step = (incomplete_f(phi, k) - r) * dn_of(phi);
        phi -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let phi = phi + turns * std::f64::consts::PI;
    let sn = phi.sin();
    (sn, phi.cos(), dn_of(phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_limit() {
        assert!((complete_k(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (sn, cn, dn) = jacobi_by_inversion(0.7, 0.0);
        assert!((sn - 0.7f64.sin()).abs() < 1e-13);
        assert!((cn - 0.7f64.cos()).abs() < 1e-13);
        assert_eq!(dn, 1.0);
    }

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x, -1.0, 2.0, 1e-14);
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 4.5)).abs() < 1e-13);
    }
}
