//! Brute-force base points and pencil type by dense sampling of the circle.

use crate::linalg::det;

#[derive(Debug, Clone, Copy)]
pub struct SampledPoint {
    pub angle: f64,
    pub multiplicity: usize,
}

fn conic_on_circle(s: &[[f64; 3]; 3], t: f64) -> f64 {
    let u = [t.cos(), t.sin(), 1.0];
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += u[i] * s[i][j] * u[j];
        }
    }
    acc
}

fn scale(s: &[[f64; 3]; 3]) -> f64 {
    s.iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1e-300)
}

/// Order of vanishing of `f` at `t0`, estimated from the decay of |f|
/// between two symmetric stencils.
fn local_order<F: Fn(f64) -> f64>(f: F, t0: f64) -> usize {
    let (h1, h2) = (2e-2, 2e-3);
    let m1 = 0.5 * (f(t0 + h1).abs() + f(t0 - h1).abs());
    let m2 = 0.5 * (f(t0 + h2).abs() + f(t0 - h2).abs());
    let order = (m1 / m2).log10() / (h1 / h2).log10();
    order.round().clamp(1.0, 4.0) as usize
}

/// Real base points of the pencil spanned by `s` and the unit circle,
/// found by sampling the restriction of the conic to the circle.
pub fn sampled_base_points(s: &[[f64; 3]; 3]) -> Vec<SampledPoint> {
    let sc = scale(s);
    let f = |t: f64| conic_on_circle(s, t) / sc;
    let n = 20_000;
    let step = std::f64::consts::TAU / n as f64;
    let vals: Vec<f64> = (0..=n + 1).map(|i| f(i as f64 * step)).collect();
    let mut roots: Vec<f64> = Vec::new();

    for i in 0..n {
        let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(t0);
        } else if a * b < 0.0 {
            let (mut lo, mut hi, mut flo) = (t0, t1, a);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    // Even-order zeros do not change sign: look for small local minima of |f|.
    for i in 1..=n {
        let (a, b, c) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        if b <= a && b < c && vals[i - 1] * vals[i + 1] > 0.0 {
            let (mut lo, mut hi) = ((i - 1) as f64 * step, (i + 1) as f64 * step);
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if f(m1).abs() < f(m2).abs() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t = 0.5 * (lo + hi);
            if f(t).abs() < 1e-12 {
                roots.push(t);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for t in roots {
        let t = t.rem_euclid(std::f64::consts::TAU);
        let dup = merged.iter().any(|&m| {
            let d = (m - t).abs();
            d.min(std::f64::consts::TAU - d) < 2e-3
        });
        if !dup {
            merged.push(t);
        }
    }
    merged
        .into_iter()
        .map(|t| SampledPoint {
            angle: t,
            multiplicity: local_order(f, t),
        })
        .collect()
}

fn minor_norm(s: &[[f64; 3]; 3], lam: f64) -> f64 {
    let z = [1.0, 1.0, -1.0];
    let mut m = *s;
    for i in 0..3 {
        m[i][i] += lam * z[i];
    }
    let mut worst = 0.0_f64;
    for (r0, r1) in [(0, 1), (0, 2), (1, 2)] {
        for (c0, c1) in [(0, 1), (0, 2), (1, 2)] {
            let d = det(vec![vec![m[r0][c0], m[r0][c1]], vec![m[r1][c0], m[r1][c1]]]);
            worst = worst.max(d.abs());
        }
    }
    worst
}

/// Whether some member S + lam Z of the pencil has rank at most one.
fn has_rank_one_member(s: &[[f64; 3]; 3]) -> bool {
    let sc = scale(s);
    let reach = 1.0 + 4.0 * sc;
    let n = 40_000;
    let g = |l: f64| minor_norm(s, l) / (sc * sc);
    let step = 2.0 * reach / n as f64;
    let mut best = f64::INFINITY;
    for i in 1..n {
        let l = -reach + i as f64 * step;
        let (a, b, c) = (g(l - step), g(l), g(l + step));
        if b <= a && b <= c {
            let (mut lo, mut hi) = (l - step, l + step);
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if g(m1) < g(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(g(0.5 * (lo + hi)));
        }
    }
    best < 1e-10
}

/// Pencil type label from sampled base points and a scan for rank-one members.
pub fn classify_by_sampling(s: &[[f64; 3]; 3]) -> &'static str {
    let mut mult: Vec<usize> = sampled_base_points(s)
        .iter()
        .map(|p| p.multiplicity)
        .collect();
    mult.sort_unstable_by(|a, b| b.cmp(a));
    match mult.as_slice() {
        [1, 1, 1, 1] => "Ia",
        [1, 1] => "Ib",
        [] if has_rank_one_member(s) => "IIIb",
        [] => "Ic",
        [2, 1, 1] => "IIa",
        [2] => "IIb",
        [2, 2] => "IIIa",
        [3, 1] => "IV",
        [4] => "V",
        _ => "unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden_catalogue;

    #[test]
    fn catalogue_labels_rederived() {
        for g in golden_catalogue() {
            assert_eq!(classify_by_sampling(&g.s), g.label, "{}", g.label);
            let mut m: Vec<usize> = sampled_base_points(&g.s)
                .iter()
                .map(|p| p.multiplicity)
                .collect();
            let mut e = g.multiplicities.to_vec();
            m.sort_unstable();
            e.sort_unstable();
            assert_eq!(m, e, "{}", g.label);
        }
    }
}
