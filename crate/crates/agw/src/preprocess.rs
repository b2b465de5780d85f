//! Distance-matrix construction and data normalization.

use ndarray::{Array1, Array2};

use crate::core::{DataMatrix, DistanceMatrix};
use crate::error::{AgwError, Result};

/// How to build an intra-domain distance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    Euclidean,
    /// `1 - cos(x, y)`; rows of all zeros are maximally dissimilar to
    /// everything else (distance 1) and at distance 0 from themselves.
    Cosine,
    /// Shortest-path distances on the union-symmetrized k-nearest-neighbor
    /// graph, max-normalized to 1.
    KnnGeodesic {
        k: usize,
        base: BaseMetric,
    },
}

/// Base metric for the kNN graph edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseMetric {
    Euclidean,
    Cosine,
}

/// Dispatches to the matching distance construction.
pub fn build_distance_matrix(x: &DataMatrix, kind: MetricKind) -> Result<DistanceMatrix> {
    match kind {
        MetricKind::Euclidean => pairwise_distances(x, BaseMetric::Euclidean),
        MetricKind::Cosine => pairwise_distances(x, BaseMetric::Cosine),
        MetricKind::KnnGeodesic { k, base } => knn_geodesic(x, k, base),
    }
}

/// Dense pairwise distances under `euclidean` or `cosine`.
pub fn pairwise_distances(x: &DataMatrix, metric: BaseMetric) -> Result<DistanceMatrix> {
    let n = x.n_samples();
    let v = x.values();
    let mut d = Array2::zeros((n, n));
    match metric {
        BaseMetric::Euclidean => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let dist = row_l2(v, i, j);
                    d[[i, j]] = dist;
                    d[[j, i]] = dist;
                }
            }
        }
        BaseMetric::Cosine => {
            let norms: Array1<f64> = (0..n)
                .map(|i| v.row(i).iter().map(|a| a * a).sum::<f64>().sqrt())
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let dist = if norms[i] == 0.0 || norms[j] == 0.0 {
                        1.0
                    } else {
                        let dot: f64 = v.row(i).iter().zip(v.row(j)).map(|(a, b)| a * b).sum();
                        // rounding can push 1 - cos a hair below zero
                        (1.0 - dot / (norms[i] * norms[j])).max(0.0)
                    };
                    d[[i, j]] = dist;
                    d[[j, i]] = dist;
                }
            }
        }
    }
    DistanceMatrix::new(d)
}

fn row_l2(v: &Array2<f64>, i: usize, j: usize) -> f64 {
    v.row(i)
        .iter()
        .zip(v.row(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Geodesic distances on the symmetrized kNN graph with base-metric edge
/// weights. If the graph is disconnected, k doubles (capped at n-1) until it
/// connects. The result is divided by its maximum so the largest entry is
/// exactly 1.
pub fn knn_geodesic(x: &DataMatrix, k: usize, base: BaseMetric) -> Result<DistanceMatrix> {
    let n = x.n_samples();
    if n < 2 {
        return Err(AgwError::invalid("kNN geodesics need at least 2 samples"));
    }
    if k == 0 || k >= n {
        return Err(AgwError::invalid(format!(
            "kNN geodesics need 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let base_dist = pairwise_distances(x, base)?;

    let mut k_eff = k;
    loop {
        let adj = knn_union_graph(base_dist.values(), k_eff);
        if connected(&adj, n) {
            let mut geo = all_pairs_shortest_paths(&adj, n);
            // symmetrize rounding residue from per-source Dijkstra runs,
            // then normalize so the max entry is exactly 1
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = geo[[i, j]].min(geo[[j, i]]);
                    geo[[i, j]] = v;
                    geo[[j, i]] = v;
                }
            }
            let max = geo.iter().fold(0.0_f64, |acc, &g| acc.max(g));
            if max > 0.0 {
                geo.mapv_inplace(|g| g / max);
            }
            return DistanceMatrix::new(geo);
        }
        if k_eff >= n - 1 {
            // complete graph is always connected, so this is unreachable;
            // belt and braces for the loop bound
            return Err(AgwError::invalid("kNN graph failed to connect"));
        }
        k_eff = (k_eff * 2).min(n - 1);
    }
}

/// Union-symmetrized kNN adjacency: edge (i,j) exists when j is among i's k
/// nearest or vice versa. Neighbor ties break to the lower index.
fn knn_union_graph(dist: &Array2<f64>, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = dist.nrows();
    let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut linked = vec![false; n * n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            dist[[i, a]]
                .partial_cmp(&dist[[i, b]])
                .unwrap()
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(k) {
            let (lo, hi) = (i.min(j), i.max(j));
            if !linked[lo * n + hi] {
                linked[lo * n + hi] = true;
                edges[lo].push((hi, dist[[lo, hi]]));
                edges[hi].push((lo, dist[[lo, hi]]));
            }
        }
    }
    edges
}

fn connected(adj: &[Vec<(usize, f64)>], n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(w, _) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Dijkstra from every source over the weighted graph.
fn all_pairs_shortest_paths(adj: &[Vec<(usize, f64)>], n: usize) -> Array2<f64> {
    let mut out = Array2::from_elem((n, n), f64::INFINITY);
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for src in 0..n {
        dist.fill(f64::INFINITY);
        done.fill(false);
        dist[src] = 0.0;
        // binary-heap-free O(n²) scan; n stays small enough that the simple
        // loop beats heap bookkeeping on dense-ish kNN graphs
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (node, &d) in dist.iter().enumerate() {
                if !done[node] && d < best {
                    best = d;
                    u = node;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &(w, weight) in &adj[u] {
                let cand = dist[u] + weight;
                if cand < dist[w] {
                    dist[w] = cand;
                }
            }
        }
        for (node, &d) in dist.iter().enumerate() {
            out[[src, node]] = d;
        }
        out[[src, src]] = 0.0;
    }
    out
}

/// Scales every row to unit L2 norm; zero rows stay zero.
pub fn unit_normalize(x: &DataMatrix) -> DataMatrix {
    let mut v = x.values().clone();
    for mut row in v.rows_mut() {
        let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|a| a / norm);
        }
    }
    DataMatrix::new(v).expect("normalization preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dm(values: Array2<f64>) -> DataMatrix {
        DataMatrix::new(values).unwrap()
    }

    #[test]
    fn euclidean_two_points() {
        let d = pairwise_distances(&dm(array![[0.0], [3.0]]), BaseMetric::Euclidean).unwrap();
        assert_eq!(d.values(), &array![[0.0, 3.0], [3.0, 0.0]]);
    }

    #[test]
    fn cosine_orthogonal_and_colinear() {
        let ortho =
            pairwise_distances(&dm(array![[1.0, 0.0], [0.0, 1.0]]), BaseMetric::Cosine).unwrap();
        assert_eq!(ortho.values(), &array![[0.0, 1.0], [1.0, 0.0]]);

        let colinear =
            pairwise_distances(&dm(array![[1.0, 0.0], [2.0, 0.0]]), BaseMetric::Cosine).unwrap();
        assert_eq!(colinear.values(), &array![[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn cosine_zero_row_is_maximally_distant() {
        let d =
            pairwise_distances(&dm(array![[0.0, 0.0], [1.0, 1.0]]), BaseMetric::Cosine).unwrap();
        assert_eq!(d.values(), &array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn knn_geodesic_three_colinear_points() {
        let x = dm(array![[0.0], [1.0], [2.0]]);
        let d = knn_geodesic(&x, 1, BaseMetric::Euclidean).unwrap();
        let want = array![[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]];
        for (a, b) in d.values().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn knn_geodesic_complete_graph_is_scaled_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = dm(Array2::from_shape_fn((6, 3), |_| rng.gen_range(-2.0..2.0)));
        let geo = knn_geodesic(&x, 5, BaseMetric::Euclidean).unwrap();
        let plain = pairwise_distances(&x, BaseMetric::Euclidean).unwrap();
        let max = plain.values().iter().fold(0.0_f64, |a, &b| a.max(b));
        for (g, p) in geo.values().iter().zip(plain.values()) {
            assert!((g - p / max).abs() < 1e-12);
        }
    }

    #[test]
    fn knn_geodesic_reconnects_far_clusters() {
        let x = dm(array![[0.0, 0.0], [0.1, 0.0], [100.0, 0.0], [100.1, 0.0]]);
        let d = knn_geodesic(&x, 1, BaseMetric::Euclidean).unwrap();
        assert!(d.values().iter().all(|v| v.is_finite()));
        let max = d.values().iter().fold(0.0_f64, |a, &b| a.max(b));
        assert_eq!(max, 1.0);
    }

    #[test]
    fn knn_geodesic_output_is_valid_distance_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..5 {
            let n = rng.gen_range(4..=12);
            let x = dm(Array2::from_shape_fn((n, 2), |_| rng.gen_range(-3.0..3.0)));
            let k = rng.gen_range(1..n);
            let d = knn_geodesic(&x, k, BaseMetric::Euclidean).unwrap();
            let max = d.values().iter().fold(0.0_f64, |a, &b| a.max(b));
            assert_eq!(max, 1.0);
        }
    }

    #[test]
    fn knn_geodesic_rejects_bad_k() {
        let x = dm(array![[0.0], [1.0], [2.0]]);
        assert!(knn_geodesic(&x, 0, BaseMetric::Euclidean).is_err());
        assert!(knn_geodesic(&x, 3, BaseMetric::Euclidean).is_err());
        let single = dm(array![[0.0]]);
        assert!(knn_geodesic(&single, 1, BaseMetric::Euclidean).is_err());
    }

    #[test]
    fn unit_normalize_examples() {
        let x = unit_normalize(&dm(array![[3.0, 4.0]]));
        assert_eq!(x.values(), &array![[0.6, 0.8]]);

        let zeros = unit_normalize(&dm(array![[0.0, 0.0]]));
        assert_eq!(zeros.values(), &array![[0.0, 0.0]]);

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = unit_normalize(&dm(Array2::from_shape_fn((5, 4), |_| {
            rng.gen_range(-2.0..2.0)
        })));
        for row in x.values().rows() {
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn euclidean_invariant_under_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let x = Array2::from_shape_fn((8, 2), |_| rng.gen_range(-2.0..2.0));
        // rotation by 0.7 rad, then translation
        let (c, s) = (0.7_f64.cos(), 0.7_f64.sin());
        let mut y = Array2::zeros((8, 2));
        for i in 0..8 {
            y[[i, 0]] = c * x[[i, 0]] - s * x[[i, 1]] + 5.0;
            y[[i, 1]] = s * x[[i, 0]] + c * x[[i, 1]] - 2.0;
        }
        let dx = pairwise_distances(&dm(x), BaseMetric::Euclidean).unwrap();
        let dy = pairwise_distances(&dm(y), BaseMetric::Euclidean).unwrap();
        for (a, b) in dx.values().iter().zip(dy.values()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}
