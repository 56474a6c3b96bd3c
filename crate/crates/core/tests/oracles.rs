use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use polycd::objective::{KdeHuberObjective, LeastSquaresObjective, LogisticObjective, Objective};
use polycd::polytope::Polytope;
use polycd::problems::{gen_kde, gen_logistic, gen_quadratic, uniform_simplex, KdeSpec, LogisticSpec, QuadraticSpec};
use polycd::verify::{frank_wolfe_gap, grid_minimum, reference_solve, ReferenceOptions};

fn largest_eigenvalue(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let dense = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    dense.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn reference_on_squared_norm_is_one_third() {
    let obj = LeastSquaresObjective::least_squares(Array2::eye(3), Array1::zeros(3)).unwrap();
    let p = Polytope::simplex(3).unwrap();
    let r = reference_solve(&obj, &p, &ReferenceOptions::default()).unwrap();
    assert!((r.f - 1.0 / 3.0).abs() < 1e-12);
    assert!(r.x.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-9));
    assert!((r.grid_value.unwrap() - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn reference_beats_a_million_random_feasible_points() {
    let q = gen_quadratic(&QuadraticSpec { dim: 5, rows: 7, seed: 77 }).unwrap();
    let obj = LeastSquaresObjective::least_squares(q.a, q.b).unwrap();
    let p = Polytope::simplex(5).unwrap();
    let opts = ReferenceOptions { grid_check: false, ..Default::default() };
    let r = reference_solve(&obj, &p, &opts).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut best = f64::INFINITY;
    for _ in 0..1_000_000 {
        best = best.min(obj.value_at(uniform_simplex(&mut rng, 5).view()));
    }
    assert!(r.f <= best + 1e-12, "reference {} vs sampled {best}", r.f);
    // sampling a million points should land near the optimum
    assert!(best - r.f <= 0.05 * best.abs().max(1.0));
    assert!(r.fw_gap <= 1e-9);
}

#[test]
fn frank_wolfe_gap_bounds_suboptimality() {
    let q = gen_quadratic(&QuadraticSpec { dim: 4, rows: 4, seed: 5 }).unwrap();
    let obj = LeastSquaresObjective::least_squares(q.a, q.b).unwrap();
    let p = Polytope::simplex(4).unwrap();
    let fs = grid_minimum(&obj, &p).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..200 {
        let x = uniform_simplex(&mut rng, 4);
        let f = obj.value_at(x.view());
        // the grid value sits at or above the true optimum
        assert!(f - frank_wolfe_gap(&obj, &p, x.view()) <= fs + 1e-12);
    }
}

/// Exact distance between the hulls of two disjoint vertex groups of the
/// standard simplex, by a grid over both groups fine enough to contain the
/// uniform weights of any group of up to six vertices.
fn simplex_split_distance(d: usize, mask: u32) -> f64 {
    let inside: Vec<usize> = (0..d).filter(|&k| mask >> k & 1 == 1).collect();
    let outside: Vec<usize> = (0..d).filter(|&k| mask >> k & 1 == 0).collect();
    let steps = 60;
    let mut best = f64::INFINITY;
    for a in compositions(inside.len(), steps) {
        for b in compositions(outside.len(), steps) {
            let mut diff = vec![0.0; d];
            for (k, &i) in inside.iter().enumerate() {
                diff[i] += a[k];
            }
            for (k, &j) in outside.iter().enumerate() {
                diff[j] -= b[k];
            }
            best = best.min(diff.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    best
}

/// Every weight vector of `parts` entries on the grid with spacing 1/steps.
fn compositions(parts: usize, steps: usize) -> Vec<Vec<f64>> {
    if parts == 1 {
        return vec![vec![1.0]];
    }
    let mut out = Vec::new();
    for first in 0..=steps {
        for rest in compositions_of(parts - 1, steps - first) {
            let mut w = vec![first as f64 / steps as f64];
            w.extend(rest.iter().map(|&r| r as f64 / steps as f64));
            out.push(w);
        }
    }
    out
}

fn compositions_of(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| {
            compositions_of(parts - 1, total - k).into_iter().map(move |mut r| {
                r.insert(0, k);
                r
            })
        })
        .collect()
}

#[test]
fn simplex_facial_distance_matches_brute_force() {
    for d in 2..=4usize {
        let mut brute = f64::INFINITY;
        for mask in 1..(1u32 << d) - 1 {
            brute = brute.min(simplex_split_distance(d, mask));
        }
        let psi = Polytope::simplex(d).unwrap().facial_distance().unwrap();
        assert!((psi - brute).abs() < 1e-8, "d = {d}: {psi} vs {brute}");
        // closed form: balanced split, sqrt(1/k + 1/(d − k))
        let k = d / 2;
        let closed = (1.0 / k as f64 + 1.0 / (d - k) as f64).sqrt();
        assert!((psi - closed).abs() < 1e-8);
    }
}

#[test]
fn diamond_facial_distance_matches_brute_force() {
    // faces of the unit ℓ1 ball in the plane: four corners and four edges;
    // a corner against the other three corners is the binding pair
    let corners = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    let faces: [&[usize]; 8] = [&[0], &[1], &[2], &[3], &[0, 2], &[0, 3], &[1, 2], &[1, 3]];
    let steps = 400;
    let mut brute = f64::INFINITY;
    for face in faces {
        let rest: Vec<usize> = (0..4).filter(|k| !face.contains(k)).collect();
        for a in compositions(face.len(), steps) {
            let pa = face
                .iter()
                .zip(&a)
                .fold([0.0, 0.0], |s, (&i, &w)| [s[0] + w * corners[i][0], s[1] + w * corners[i][1]]);
            for b in compositions(rest.len(), 40) {
                let pb = rest
                    .iter()
                    .zip(&b)
                    .fold([0.0, 0.0], |s, (&i, &w)| [s[0] + w * corners[i][0], s[1] + w * corners[i][1]]);
                brute = brute.min(((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt());
            }
        }
    }
    let psi = Polytope::l1_ball(2, 1.0).unwrap().facial_distance().unwrap();
    assert!((psi - 1.0).abs() < 1e-8);
    assert!((psi - brute).abs() < 1e-8, "{psi} vs {brute}");
}

#[test]
fn least_squares_smoothness_brackets_the_dense_eigenvalue() {
    for seed in 0..5 {
        let q = gen_quadratic(&QuadraticSpec { dim: 12, rows: 20, seed }).unwrap();
        let exact = 2.0 * largest_eigenvalue(&q.a.t().dot(&q.a));
        let obj = LeastSquaresObjective::least_squares(q.a, q.b).unwrap();
        let est = obj.estimate_smoothness();
        assert!(est >= exact && est <= 1.01 * exact * (1.0 + 1e-9), "{est} vs {exact}");
    }
}

#[test]
fn kernel_smoothness_brackets_the_dense_eigenvalue() {
    let data = gen_kde(&KdeSpec { n: 150, seed: 4, ..Default::default() }).unwrap();
    let obj = KdeHuberObjective::new(data.points, 1.0, 0.4).unwrap();
    let n = 150;
    let k = Array2::from_shape_fn((n, n), |(i, j)| obj.kernel(i, j));
    let exact = n as f64 * largest_eigenvalue(&k);
    let est = obj.estimate_smoothness();
    assert!(est >= exact && est <= 1.01 * exact * (1.0 + 1e-9), "{est} vs {exact}");
}

/// ‖∇f(x) − ∇f(y)‖ ≤ L ‖x − y‖ on random pairs from the feasible set.
fn check_gradient_lipschitz(obj: &dyn Objective, sample: impl Fn(&mut ChaCha20Rng) -> Array1<f64>) {
    let l = obj.estimate_smoothness();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for _ in 0..200 {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let dg = obj.gradient_at(x.view()) - obj.gradient_at(y.view());
        let dx = &x - &y;
        assert!(dg.dot(&dg).sqrt() <= l * dx.dot(&dx).sqrt() * (1.0 + 1e-12));
    }
}

#[test]
fn smoothness_estimates_bound_gradient_differences() {
    let data = gen_kde(&KdeSpec { n: 200, seed: 6, ..Default::default() }).unwrap();
    let kde = KdeHuberObjective::new(data.points, 1.0, 0.4).unwrap();
    check_gradient_lipschitz(&kde, |r| uniform_simplex(r, 200));

    let g = gen_logistic(&LogisticSpec { n: 60, d: 15, r: 3, seed: 6, ..Default::default() }).unwrap();
    let radius = g.radius;
    let logistic = LogisticObjective::logistic(g.a, g.labels).unwrap();
    check_gradient_lipschitz(&logistic, |r| {
        let signs = Array1::from_shape_fn(15, |_| if r.gen::<bool>() { radius } else { -radius });
        uniform_simplex(r, 15) * signs
    });
}
