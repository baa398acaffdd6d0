use icnet::confocal::{ConfocalConic, ConfocalFamily, IcNetCoords, NetParams};
use icnet::dynamics::{qrt_invariant, qrt_step, step_d_roots, BiquadraticCoeffs, QrtParams};
use icnet::elliptic::jacobi;
use icnet::laguerre::{apply, contact_residual, incircle_of_three, LaguerreTransform};
use icnet::net::verify_net;
use icnet::{Execution, OrientedLine};
use icnet_testkit::solve;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn ellipse(alpha: f64, ratio: f64) -> ConfocalConic {
    ConfocalConic::elliptic(alpha, alpha * ratio).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn discrete_confocal_relations(
        m1 in -6.0..6.0_f64, m2 in -6.0..6.0_f64, delta in 0.01..1.5_f64,
        alpha in 0.5..3.0_f64, ratio in 0.2..0.95_f64,
    ) {
        let c = ellipse(alpha, ratio);
        let coords = IcNetCoords::new(m1, m2, 0.3, 0.1, delta);
        prop_assume!(jacobi(0.5 * delta, c.modulus()).cn > 1e-3);
        let (Ok(f), Ok(next)) = (
            c.discrete_confocal_factors(&coords),
            c.discrete_confocal_factors(&coords.shifted(0.5, 0.5)),
        ) else { return Ok(()) };
        let ab = f.ab_diff;
        let size = |xs: &[f64]| xs.iter().fold(ab, |m, x| m.max(x.abs()));
        let s1 = size(&[f.f * next.f, f.g * next.g]);
        let s2 = size(&[f.f_tilde * next.f_tilde, f.g_tilde * next.g_tilde]);
        prop_assume!(s1 < 1e6 && s2 < 1e6);
        prop_assert!((f.f * next.f + f.g * next.g - ab).abs() <= 1e-10 * s1);
        prop_assert!((f.f_tilde * next.f_tilde - f.g_tilde * next.g_tilde - ab).abs() <= 1e-10 * s2);
        let s3 = size(&[f.a_scale * f.f * f.f, f.b_scale * f.g * f.g]);
        let s4 = size(&[f.a_scale * f.f_tilde * f.f_tilde, f.b_scale * f.g_tilde * f.g_tilde]);
        prop_assert!((f.a_scale * f.f * f.f + f.b_scale * f.g * f.g - ab).abs() <= 1e-10 * s3);
        prop_assert!((f.a_scale * f.f_tilde.powi(2) - f.b_scale * f.g_tilde.powi(2) - ab).abs() <= 1e-10 * s4);
    }

    #[test]
    fn intersections_and_centres(
        xi1 in -4.0..4.0_f64, xi2 in -4.0..4.0_f64, delta in 0.05..1.0_f64,
        alpha in 0.5..3.0_f64, ratio in 0.2..0.95_f64,
    ) {
        let c = ellipse(alpha, ratio);
        let (Ok((x, y)), Ok((cx, cy))) = (c.intersection_point(xi1, xi2), c.circle_center(xi1, xi2, delta)) else {
            return Ok(());
        };
        let (l1, l2) = (c.ic_line(xi1 + xi2), c.ic_line(xi1 - xi2));
        let Some(sol) = solve(vec![vec![l1.v(), l1.w()], vec![l2.v(), l2.w()]], vec![l1.d(), l2.d()]) else {
            return Ok(());
        };
        let scale = 1.0 + x.abs().max(y.abs());
        prop_assume!(scale < 1e4);
        prop_assert!((x - sol[0]).abs() <= 1e-9 * scale && (y - sol[1]).abs() <= 1e-9 * scale);
        let (le, me) = c.confocal_conic_params(xi2, ConfocalFamily::Ellipse).unwrap();
        let (lh, mh) = c.confocal_conic_params(xi1, ConfocalFamily::Hyperbola).unwrap();
        let a2k2 = alpha * alpha * c.modulus().k2();
        prop_assert!((le - me - a2k2).abs() <= 1e-11 * le.abs().max(1.0));
        prop_assert!((lh - mh - a2k2).abs() <= 1e-11 * lh.abs().max(1.0));
        let (a, b) = c.affine_scales(delta).unwrap();
        let (xs, ys) = c.intersection_point(xi1, xi2 + 0.5 * delta).unwrap();
        let cscale = 1.0 + cx.abs().max(cy.abs());
        prop_assume!(cscale < 1e4);
        prop_assert!((a * cx - xs).abs() <= 1e-9 * cscale && (b * cy - ys).abs() <= 1e-9 * cscale);
    }

    #[test]
    fn qrt_conserves_its_invariant(ab in 0.2..5.0_f64, a in 0.1..1.0_f64, f in -2.0..2.0_f64, fh in -2.0..2.0_f64) {
        let p = QrtParams::new(ab, a).unwrap();
        let Ok(b2) = qrt_invariant(f, fh, &p) else { return Ok(()) };
        prop_assume!(b2.abs() < 1e6);
        // Near f * f_half = a - b both formulas cancel; stay off that fiber.
        let clear = |x: f64, y: f64| (x * y - ab).abs() > 1e-2 * ab;
        prop_assume!(clear(f, fh));
        let (mut x, mut y) = (f, fh);
        for _ in 0..20 {
            let Ok(z) = qrt_step(x, y, &p) else { return Ok(()) };
            prop_assume!(z.abs() < 1e6);
            if !clear(y, z) {
                break;
            }
            (x, y) = (y, z);
            let Ok(now) = qrt_invariant(x, y, &p) else { return Ok(()) };
            prop_assert!((now - b2).abs() <= 1e-8 * b2.abs().max(1.0));
        }
    }

    #[test]
    fn step_d_is_an_involution(lambda in -3.0..6.0_f64, d in -2.0..2.0_f64) {
        let Ok(c) = BiquadraticCoeffs::new(lambda, 4.0, 1.0) else { return Ok(()) };
        let Ok(roots) = step_d_roots(d, &c) else { return Ok(()) };
        for r in roots {
            let back = step_d_roots(r, &c).unwrap();
            let gap = back.iter().map(|b| (b - d).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(gap <= 1e-10 * (1.0 + d.abs() + r.abs()), "{gap}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_nets_verify(
        alpha in 0.8..3.0_f64, ratio in 0.3..0.95_f64,
        s in 0.1..0.9_f64, st in 0.1..0.9_f64, psi in -2.0..2.0_f64,
    ) {
        let c = ellipse(alpha, ratio);
        let kk = c.quarter_period();
        let p = NetParams::new(c, 4.0 * kk * s, 4.0 * kk * st, psi, -psi).unwrap();
        let net = p.net(-4..5, -4..5, Execution::default()).unwrap();
        let report = verify_net(&net, 1e-9, Execution::default());
        prop_assert!(report.passed(), "{}", report);
    }

    #[test]
    fn contact_survives_laguerre_maps(
        t in prop::array::uniform3(0.0..std::f64::consts::TAU), d in prop::array::uniform3(-2.0..2.0_f64),
        eta in -0.8..0.8_f64, lam in 0.3..3.0_f64,
    ) {
        let lines: Vec<OrientedLine> = (0..3).map(|i| OrientedLine::from_angle(t[i], d[i])).collect();
        let Ok(c) = incircle_of_three(&lines[0], &lines[1], &lines[2]) else { return Ok(()) };
        prop_assume!(c.r.abs() < 1e3 && c.cx.abs() < 1e3 && c.cy.abs() < 1e3);
        let b = Matrix3::new(eta.cosh(), 0.0, eta.sinh(), 0.0, 1.0, 0.0, eta.sinh(), 0.0, eta.cosh());
        let tr = LaguerreTransform::new(lam, b, Vector3::new(0.2, -0.3, 0.5)).unwrap();
        let images: Vec<OrientedLine> = lines.iter().map(|l| apply(&tr, l).unwrap()).collect();
        let Ok(ci) = incircle_of_three(&images[0], &images[1], &images[2]) else { return Ok(()) };
        // A fourth tangent line of the original circle stays tangent.
        let extra = OrientedLine::from_angle(0.5 * (t[0] + t[1]), 0.0);
        let extra = OrientedLine::from_angle(0.5 * (t[0] + t[1]), c.cx * extra.v() + c.cy * extra.w() - c.r);
        let image = apply(&tr, &extra).unwrap();
        prop_assert!(contact_residual(&image, &ci).abs() <= 1e-7 * (1.0 + ci.r.abs() + ci.cx.abs() + ci.cy.abs()));
    }
}
