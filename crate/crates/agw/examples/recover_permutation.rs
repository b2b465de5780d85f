//! Recovering a hidden feature permutation.
//!
//! Builds a dataset Y by shuffling the columns of X, then solves GW, COOT
//! and the interpolation at alpha = 0.5. All three drive the objective to
//! zero (a column permutation is an isometry and a feature bijection at
//! once), and the feature coupling pinpoints the hidden permutation.
//!
//! Run: cargo run -p agw --example recover_permutation

use ndarray::Array2;

use agw::core::{uniform_hist, DataMatrix, SolverConfig};
use agw::preprocess::{build_distance_matrix, MetricKind};
use agw::solvers::solve_agw;

fn main() {
    let n = 10;
    let d = 6;
    // fixed pseudo-random data; no dependency on an RNG crate for a demo
    let mut state = 0x9e3779b97f4a7c15_u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    let x = Array2::from_shape_fn((n, d), |_| next());

    let perm = [3usize, 0, 5, 1, 4, 2];
    let y = Array2::from_shape_fn((n, d), |(i, j)| x[[i, perm[j]]]);
    println!("hidden permutation: y column j came from x column perm[j] = {perm:?}\n");

    let x = DataMatrix::new(x).unwrap();
    let y = DataMatrix::new(y).unwrap();
    let dx = build_distance_matrix(&x, MetricKind::Euclidean).unwrap();
    let dy = build_distance_matrix(&y, MetricKind::Euclidean).unwrap();
    let mu = uniform_hist(n).unwrap();
    let muf = uniform_hist(d).unwrap();

    for alpha in [1.0, 0.5, 0.0] {
        let cfg = SolverConfig::default().with_alpha(alpha);
        let report = solve_agw(&dx, &dy, &x, &y, &mu, &mu, &muf, &muf, &cfg, None).unwrap();
        println!(
            "alpha = {alpha}: objective {:.3e} after {} iterations (converged: {})",
            report.final_objective, report.bcd_iterations, report.converged
        );
        let gv = report.feature_coupling.expect("feature coupling present");
        let recovered: Vec<usize> = (0..d)
            .map(|j| {
                (0..d)
                    .max_by(|&a, &b| {
                        gv.values()[[a, j]]
                            .partial_cmp(&gv.values()[[b, j]])
                            .unwrap()
                    })
                    .unwrap()
            })
            .collect();
        println!("  feature argmax per y column: {recovered:?}");
    }
}
