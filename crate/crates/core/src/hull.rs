//! Small dense QP: minimum-norm point of a convex combination over a product
//! of simplices. Backs facial distance, explicit-polytope projection and the
//! face test. Only meant for tiny point sets.

use std::ops::Range;

/// Result of [`min_norm_combination`].
#[derive(Debug, Clone)]
pub(crate) struct MinNorm {
    pub weights: Vec<f64>,
    /// ‖Σ λ_k w_k‖²
    pub value: f64,
}

/// Minimizes ‖Σ_k λ_k w_k‖² where λ restricted to each block is a point of
/// the probability simplex. `points` are the columns w_k, each of length `dim`.
///
/// Accelerated projected gradient with gradient-based restart, stopped on the
/// Frank-Wolfe gap.
pub(crate) fn min_norm_combination(
    points: &[Vec<f64>],
    blocks: &[Range<usize>],
    gap_tol: f64,
    max_iter: usize,
) -> MinNorm {
    let k = points.len();
    let dim = points.first().map_or(0, Vec::len);
    // L = 2 λ_max(WᵀW) ≤ 2 ‖W‖_F²
    let frob: f64 = points.iter().flatten().map(|v| v * v).sum();
    let lip = (2.0 * frob).max(1e-300);

    let mut lam = vec![0.0; k];
    for b in blocks {
        let len = b.len() as f64;
        for j in b.clone() {
            lam[j] = 1.0 / len;
        }
    }
    let combine = |lam: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (w, &l) in points.iter().zip(lam) {
            if l != 0.0 {
                for (o, wi) in out.iter_mut().zip(w) {
                    *o += l * wi;
                }
            }
        }
    };
    let grad = |s: &[f64], out: &mut [f64]| {
        for (g, w) in out.iter_mut().zip(points) {
            *g = 2.0 * w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
        }
    };
    let fw_gap = |lam: &[f64], g: &[f64]| -> f64 {
        blocks
            .iter()
            .map(|b| {
                let lin: f64 = b.clone().map(|j| lam[j] * g[j]).sum();
                let min = b.clone().map(|j| g[j]).fold(f64::INFINITY, f64::min);
                lin - min
            })
            .sum()
    };

    let mut s = vec![0.0; dim];
    let mut g = vec![0.0; k];
    let mut y = lam.clone();
    let mut prev = lam.clone();
    let mut theta = 1.0_f64;

    for _ in 0..max_iter {
        combine(&lam, &mut s);
        grad(&s, &mut g);
        if fw_gap(&lam, &g) <= gap_tol {
            break;
        }
        combine(&y, &mut s);
        grad(&s, &mut g);
        let mut next: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - gi / lip).collect();
        for b in blocks {
            project_simplex_in_place(&mut next[b.clone()], 1.0);
        }
        // restart when the momentum direction is uphill
        let uphill: f64 = g.iter().zip(next.iter().zip(&lam)).map(|(gi, (n, l))| gi * (n - l)).sum();
        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        let beta = if uphill > 0.0 {
            theta = 1.0;
            0.0
        } else {
            let b = (theta - 1.0) / theta_next;
            theta = theta_next;
            b
        };
        prev.copy_from_slice(&lam);
        lam.copy_from_slice(&next);
        for ((yi, n), p) in y.iter_mut().zip(&lam).zip(&prev) {
            *yi = n + beta * (n - p);
        }
    }
    combine(&lam, &mut s);
    let value = s.iter().map(|v| v * v).sum();
    MinNorm { weights: lam, value }
}

/// Euclidean projection onto {x ≥ 0, Σx = radius} by sort and threshold.
pub(crate) fn project_simplex_in_place(x: &mut [f64], radius: f64) {
    if x.is_empty() {
        return;
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (k + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}

/// Distance between conv(`p`) and conv(`q`).
pub(crate) fn hull_distance(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    let mut points: Vec<Vec<f64>> = p.to_vec();
    points.extend(q.iter().map(|v| v.iter().map(|x| -x).collect()));
    let blocks = [0..p.len(), p.len()..p.len() + q.len()];
    let res = min_norm_combination(&points, &blocks, 1e-15, 200_000);
    res.value.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_by_hand() {
        let mut x = [0.8, 0.8];
        project_simplex_in_place(&mut x, 1.0);
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);

        let mut y = [0.2, 0.3, 0.5];
        project_simplex_in_place(&mut y, 1.0);
        assert_eq!(y, [0.2, 0.3, 0.5]);
    }

    #[test]
    fn point_to_segment() {
        // (1,0) to segment (0,1)-(0,-1)
        let d = hull_distance(&[vec![1.0, 0.0]], &[vec![0.0, 1.0], vec![0.0, -1.0]]);
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn parallel_edges() {
        let d = hull_distance(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert!((d - 2f64.sqrt()).abs() < 1e-9, "{d}");
    }

    #[test]
    fn intersecting_hulls_have_zero_distance() {
        let d = hull_distance(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(d < 1e-6, "{d}");
    }
}
