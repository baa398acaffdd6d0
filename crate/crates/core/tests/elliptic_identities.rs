use icnet::elliptic::{
    addition_coefficients, complete_k, double_half, four_point_determinant, jacobi, quotient,
    Modulus, Ratio,
};
use icnet_testkit::{complete_k as quad_k, jacobi_by_inversion};
use proptest::prelude::*;

fn md(k: f64) -> Modulus {
    Modulus::new(k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pythagorean_identities(u in -60.0..60.0_f64, k in 0.0..0.99_f64) {
        let m = md(k);
        let j = jacobi(u, m);
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() <= 1e-12);
        prop_assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn addition_identity(x in -8.0..8.0_f64, s in 0.1..3.0_f64, c_d in -2.0..2.0_f64, k in 0.0..0.95_f64) {
        let m = md(k);
        let Ok((c_s, c_c)) = addition_coefficients(s, c_d, m) else { return Ok(()) };
        prop_assume!(c_s.abs() < 1e4 && c_c.abs() < 1e4);
        let (a, b) = (jacobi(x, m), jacobi(x + s, m));
        let lhs = c_s * a.sn * b.sn + c_c * a.cn * b.cn - c_d * a.dn * b.dn;
        prop_assert!((lhs - 1.0).abs() <= 1e-10 * (1.0 + c_s.abs() + c_c.abs() + c_d.abs()));
    }

    #[test]
    fn four_points_summing_to_zero(z in prop::array::uniform3(-5.0..5.0_f64), k in 0.0..0.99_f64) {
        let det = four_point_determinant([z[0], z[1], z[2], -(z[0] + z[1] + z[2])], md(k));
        prop_assert!(det.abs() <= 1e-10);
    }

    #[test]
    fn double_and_half(u in -6.0..6.0_f64, k in 0.0..0.99_f64) {
        let m = md(k);
        let (sn2, half) = double_half(u, m).unwrap();
        prop_assert!((sn2 - jacobi(2.0 * u, m).sn).abs() <= 1e-12);
        prop_assert!((half - jacobi(0.5 * u, m).sn.powi(2)).abs() <= 1e-12);
    }

    #[test]
    fn quotients_are_ratios(u in -6.0..6.0_f64, k in 0.0..0.99_f64) {
        let m = md(k);
        let j = jacobi(u, m);
        if let Ok(cd) = quotient(Ratio::Cd, u, m, 1e-8) {
            prop_assert!((cd * j.dn - j.cn).abs() <= 1e-12 * (1.0 + cd.abs()));
        }
        if let Ok(sc) = quotient(Ratio::Sc, u, m, 1e-8) {
            prop_assert!((sc * j.cn - j.sn).abs() <= 1e-12 * (1.0 + sc.abs()));
        }
    }
}

#[test]
fn quarter_period_against_quadrature() {
    assert!((complete_k(md(0.0)) - std::f64::consts::FRAC_PI_2).abs() <= 1e-14);
    for i in 0..=99 {
        let k = 0.01 * i as f64;
        let k = k.min(0.99);
        let (ours, oracle) = (complete_k(md(k)), quad_k(k));
        assert!(
            (ours - oracle).abs() <= 1e-11,
            "k = {k}: {ours} vs {oracle}"
        );
    }
}

#[test]
fn jacobi_against_amplitude_inversion() {
    for &(u, k) in &[(0.3, 0.2), (1.7, 0.8), (-2.4, 0.5), (5.1, 0.95), (0.0, 0.7)] {
        let j = jacobi(u, md(k));
        let (sn, cn, dn) = jacobi_by_inversion(u, k);
        assert!(
            (j.sn - sn).abs() <= 1e-11 && (j.cn - cn).abs() <= 1e-11 && (j.dn - dn).abs() <= 1e-11
        );
    }
}
