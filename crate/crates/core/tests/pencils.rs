use icnet::laguerre::{apply, euclidean, lorentz_defect};
use icnet::pencil::{
    base_points, classify, classify_quadric, diagonalize, to_confocal, ConicForm, PencilError,
    PencilType, QuadricForm,
};
use icnet::OrientedLine;
use icnet_testkit::{classify_by_sampling, golden_catalogue};
use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_lorentz(rng: &mut StdRng) -> Matrix3<f64> {
    let rot = |t: f64| Matrix3::new(t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0);
    let eta: f64 = rng.gen_range(-1.0..1.0);
    let boost = Matrix3::new(
        eta.cosh(),
        0.0,
        eta.sinh(),
        0.0,
        1.0,
        0.0,
        eta.sinh(),
        0.0,
        eta.cosh(),
    );
    rot(rng.gen_range(0.0..6.3)) * boost * rot(rng.gen_range(0.0..6.3))
}

#[test]
fn golden_catalogue_labels() {
    for g in golden_catalogue() {
        let s = ConicForm::from_rows(g.s).unwrap();
        let t = classify(&s).unwrap();
        assert_eq!(t.label(), g.label);
        assert_eq!(classify_by_sampling(&g.s), g.label);
        assert_eq!(t.is_diagonalizable(), g.diagonalizable);
        let mut pattern = base_points(&s).unwrap().pattern();
        let mut expected = g.multiplicities.to_vec();
        pattern.sort_unstable();
        expected.sort_unstable();
        assert_eq!(pattern, expected, "{}", g.label);
    }
}

#[test]
fn diagonalization_succeeds_exactly_on_the_diagonalizable_types() {
    for g in golden_catalogue() {
        let s = ConicForm::from_rows(g.s).unwrap();
        let r = diagonalize(&s);
        let expected = matches!(g.label, "Ia" | "Ic" | "IIIa" | "IIIb");
        assert_eq!(r.is_ok(), expected, "{}", g.label);
        if let Err(e) = r {
            assert!(matches!(e, PencilError::NotDiagonalizable(_)), "{e}");
        }
    }
    let iia = golden_catalogue()
        .into_iter()
        .find(|g| g.label == "IIa")
        .unwrap();
    assert_eq!(
        diagonalize(&ConicForm::from_rows(iia.s).unwrap()).unwrap_err(),
        PencilError::NotDiagonalizable(PencilType::IIa)
    );
}

#[test]
fn conjugation_round_trip() {
    let mut rng = StdRng::seed_from_u64(21);
    let diagonalizable: Vec<_> = golden_catalogue()
        .into_iter()
        .filter(|g| g.diagonalizable)
        .collect();
    for n in 0..100 {
        let base = if n % 5 == 4 {
            ConicForm::diagonal(
                rng.gen_range(1.0..3.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..0.5),
            )
        } else {
            ConicForm::from_rows(diagonalizable[n % diagonalizable.len()].s).unwrap()
        };
        let b = random_lorentz(&mut rng);
        assert!(lorentz_defect(&b) < 1e-10);
        let s = base.conjugated(&b);
        assert_eq!(classify(&s).unwrap(), classify(&base).unwrap());
        let d = diagonalize(&s).unwrap();
        assert!(lorentz_defect(&d.b) < 1e-8);
        let back = d.b.transpose() * s.matrix() * d.b;
        let scale = s.matrix().abs().max().max(1.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(back[(i, j)].abs() <= 1e-8 * scale, "{n}: {back}");
                }
            }
            assert!((back[(i, i)] - d.values[i]).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn classification_is_laguerre_invariant() {
    let mut rng = StdRng::seed_from_u64(22);
    for g in golden_catalogue() {
        let s = ConicForm::from_rows(g.s).unwrap();
        for _ in 0..5 {
            let b = random_lorentz(&mut rng);
            assert_eq!(classify(&s.conjugated(&b)).unwrap().label(), g.label);
        }
    }
}

#[test]
fn moved_cone_normalizes_back() {
    let cone = QuadricForm::confocal_member(4.0, 1.0, 0.0);
    let th: f64 = 0.7;
    let t = euclidean(
        Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos()),
        Vector2::new(1.5, -0.4),
    )
    .unwrap();
    let moved = cone.transformed(&t).unwrap();
    let (kind, sign) = classify_quadric(&moved).unwrap();
    assert_eq!((kind, sign), (PencilType::Ic, -1.0));
    let n = to_confocal(&moved).unwrap();
    assert!(
        (n.a - 4.0).abs() < 1e-9 && (n.b - 1.0).abs() < 1e-9,
        "{} {}",
        n.a,
        n.b
    );
    let target = QuadricForm::confocal_member(n.a, n.b, 0.0);
    for k in 0..12 {
        let psi = 0.5 * k as f64;
        let l = OrientedLine::new(
            psi.cos(),
            psi.sin(),
            (4.0 * psi.cos().powi(2) + psi.sin().powi(2)).sqrt(),
        )
        .unwrap();
        let image = apply(&t, &l).unwrap();
        assert!(moved.eval(&image).abs() < 1e-9);
        let normalized = apply(&n.transform, &image).unwrap();
        assert!(target.eval(&normalized).abs() < 1e-9);
    }
}

#[test]
fn non_generic_and_improper_quadrics() {
    let flat = QuadricForm::diagonal(1.0, 2.0, 0.0, 0.0);
    assert!(matches!(
        to_confocal(&flat),
        Err(PencilError::NonGeneric(_))
    ));
    // d^2 = -4 on the cylinder: empty base curve.
    let empty = QuadricForm::diagonal(1.0, 1.0, -5.0, -1.0);
    assert!(matches!(to_confocal(&empty), Err(PencilError::Improper(_))));
}
