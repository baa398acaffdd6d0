//! One representative conic per pencil type.
//!
//! Each matrix is a conic in homogeneous (v, w, 1) coordinates; the pencil
//! is the one spanned with the unit circle diag(1, 1, -1). Labels were
//! derived by hand from the base points on the circle and the rank of the
//! degenerate pencil members, and are re-derived by [`classify_by_sampling`].
//!
//! [`classify_by_sampling`]: crate::classify_by_sampling

pub struct GoldenConic {
    pub label: &'static str,
    pub s: [[f64; 3]; 3],
    /// Expected (angle-sorted) real base-point multiplicities.
    pub multiplicities: &'static [usize],
    pub diagonalizable: bool,
}

pub fn golden_catalogue() -> Vec<GoldenConic> {
    vec![
        // v^2 - w^2 = 0: two lines through the centre, four crossings.
        GoldenConic {
            label: "Ia",
            s: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]],
            multiplicities: &[1, 1, 1, 1],
            diagonalizable: true,
        },
        // w^2 - 2w = 0: the lines w = 0 and w = 2.
        GoldenConic {
            label: "Ib",
            s: [[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, 0.0]],
            multiplicities: &[1, 1],
            diagonalizable: false,
        },
        // 2v^2 + w^2 = 0: a real point at the centre, no real base points.
        GoldenConic {
            label: "Ic",
            s: [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
            multiplicities: &[],
            diagonalizable: true,
        },
        // (w - 1)^2 = v^2: two lines meeting on the circle at (0, 1).
        GoldenConic {
            label: "IIa",
            s: [[-1.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0]],
            multiplicities: &[2, 1, 1],
            diagonalizable: false,
        },
        // (2w - 2)^2 + v^2 = 0: real point (0, 1) only.
        GoldenConic {
            label: "IIb",
            s: [[1.0, 0.0, 0.0], [0.0, 4.0, -4.0], [0.0, -4.0, 4.0]],
            multiplicities: &[2],
            diagonalizable: false,
        },
        // w^2 = 1: two tangent lines.
        GoldenConic {
            label: "IIIa",
            s: [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
            multiplicities: &[2, 2],
            diagonalizable: true,
        },
        // 1 = 0 counted twice: the double line at infinity.
        GoldenConic {
            label: "IIIb",
            s: [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            multiplicities: &[],
            diagonalizable: true,
        },
        // (w - 1)^2 - v (w - 1) = 0: the tangent at (0, 1) and a secant through it.
        GoldenConic {
            label: "IV",
            s: [[0.0, -0.5, 0.5], [-0.5, 1.0, -1.0], [0.5, -1.0, 1.0]],
            multiplicities: &[3, 1],
            diagonalizable: false,
        },
        // (w - 1)^2 = 0: the tangent at (0, 1) counted twice.
        GoldenConic {
            label: "V",
            s: [[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0]],
            multiplicities: &[4],
            diagonalizable: false,
        },
    ]
}
