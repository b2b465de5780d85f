//! Brute-force reference implementations used to validate the factored
//! computational paths. Shipped as test support: nothing on the solve path
//! calls into this module, and nothing here reuses the factored code.

use ndarray::Array2;

use crate::error::{AgwError, Result};

/// Literal quadruple-loop contraction of the squared-difference cost tensor:
/// `out[i][j] = Σ_{k,l} (left[i,k] - right[j,l])² gamma[k,l]`.
///
/// Works for both the distance-matrix tensor (`left`, `right` square) and the
/// raw-data tensor (`left`, `right` rectangular); `gamma` may be any matrix,
/// feasible or not.
pub fn tensor_contract_bruteforce(
    left: &Array2<f64>,
    right: &Array2<f64>,
    gamma: &Array2<f64>,
) -> Result<Array2<f64>> {
    let (n, r) = left.dim();
    let (m, s) = right.dim();
    if gamma.dim() != (r, s) {
        return Err(AgwError::dims(format!(
            "gamma must be {r}x{s} to contract {n}x{r} against {m}x{s}, got {:?}",
            gamma.dim()
        )));
    }
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for k in 0..r {
                for l in 0..s {
                    let diff = left[[i, k]] - right[[j, l]];
                    acc += diff * diff * gamma[[k, l]];
                }
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

/// Exhaustive minimum of `(1/n)·Σ_i C[i, σ(i)]` over all permutations σ.
/// Valid for uniform marginals by the vertex property of the Birkhoff
/// polytope. Capped at n ≤ 8 to keep enumeration cheap.
pub fn permutation_ot_oracle(cost: &Array2<f64>) -> Result<(f64, Vec<usize>)> {
    let (n, m) = cost.dim();
    if n != m {
        return Err(AgwError::dims(format!(
            "permutation oracle needs a square cost, got {n}x{m}"
        )));
    }
    if n == 0 || n > 8 {
        return Err(AgwError::invalid(format!(
            "permutation oracle supports 1 <= n <= 8, got {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_perm = perm.clone();
    let mut best = perm_cost(cost, &perm);
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let val = perm_cost(cost, &perm);
            if val < best {
                best = val;
                best_perm = perm.clone();
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok((best / n as f64, best_perm))
}

fn perm_cost(cost: &Array2<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum()
}

/// The 2×2 uniform transportation polytope is the one-parameter family
/// `Γ(a) = [[a, 0.5-a], [0.5-a, a]]`, `a ∈ [0, 0.5]`. Scans `resolution`
/// evenly spaced values of `a` and returns the best objective with its
/// coupling. Ties keep the first (smallest `a`) grid point.
pub fn coupling_scan_2x2<F>(objective: F, resolution: usize) -> Result<(f64, Array2<f64>)>
where
    F: Fn(&Array2<f64>) -> f64,
{
    if resolution < 2 {
        return Err(AgwError::invalid("scan resolution must be >= 2"));
    }
    let mut best_val = f64::INFINITY;
    let mut best_a = 0.0;
    for step in 0..resolution {
        let a = 0.5 * step as f64 / (resolution - 1) as f64;
        let gamma = coupling_2x2(a);
        let val = objective(&gamma);
        if val < best_val {
            best_val = val;
            best_a = a;
        }
    }
    Ok((best_val, coupling_2x2(best_a)))
}

/// The member of the 2×2 uniform coupling family at parameter `a`.
pub fn coupling_2x2(a: f64) -> Array2<f64> {
    ndarray::array![[a, 0.5 - a], [0.5 - a, a]]
}

/// Central finite differences of `objective` at `gamma`, entrywise on the
/// unconstrained matrix space.
pub fn finite_diff_gradient<F>(objective: F, gamma: &Array2<f64>, h: f64) -> Array2<f64>
where
    F: Fn(&Array2<f64>) -> f64,
{
    let mut grad = Array2::zeros(gamma.dim());
    let mut probe = gamma.clone();
    for i in 0..gamma.nrows() {
        for j in 0..gamma.ncols() {
            let orig = probe[[i, j]];
            probe[[i, j]] = orig + h;
            let plus = objective(&probe);
            probe[[i, j]] = orig - h;
            let minus = objective(&probe);
            probe[[i, j]] = orig;
            grad[[i, j]] = (plus - minus) / (2.0 * h);
        }
    }
    grad
}
