//! Linear (Kantorovich) optimal transport: an exact network-simplex solver
//! and a log-domain Sinkhorn solver. These run standalone and as the inner
//! step of every block-coordinate iteration of the quadratic solvers.

mod network_simplex;

use ndarray::{Array1, Array2, Axis};

use crate::core::{Coupling, ProbVector, SOLVER_TOL};
use crate::error::{AgwError, Result};

/// Default absolute marginal-violation tolerance for Sinkhorn.
pub const SINKHORN_TOL: f64 = 1e-9;
/// Default Sinkhorn iteration cap.
pub const SINKHORN_MAX_ITER: usize = 10_000;

/// Outcome of a linear OT solve.
#[derive(Debug, Clone)]
pub struct LinearOtResult {
    pub plan: Coupling,
    /// Transport cost `<C, plan>` of the returned plan (unregularized).
    pub value: f64,
    pub iterations: usize,
    /// Max of the row-sum and column-sum L1 deviations from the marginals.
    pub marginal_violation: f64,
    pub converged: bool,
}

fn check_inputs(cost: &Array2<f64>, mu: &ProbVector, nu: &ProbVector) -> Result<()> {
    let (n, m) = cost.dim();
    if n != mu.len() || m != nu.len() {
        return Err(AgwError::dims(format!(
            "cost is {n}x{m} but marginals have lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(AgwError::invalid("cost matrix entries must be finite"));
    }
    Ok(())
}

fn violation(plan: &Array2<f64>, mu: &ProbVector, nu: &ProbVector) -> f64 {
    let row_dev: f64 = plan
        .sum_axis(Axis(1))
        .iter()
        .zip(mu.values())
        .map(|(s, w)| (s - w).abs())
        .sum();
    let col_dev: f64 = plan
        .sum_axis(Axis(0))
        .iter()
        .zip(nu.values())
        .map(|(s, w)| (s - w).abs())
        .sum();
    row_dev.max(col_dev)
}

/// Exact solution of `min <C, Γ>` over `Π(mu, nu)`.
///
/// The returned plan is a vertex of the transportation polytope with at most
/// n+m-1 nonzero entries. The pivot rule is deterministic, so identical
/// inputs give identical plans.
pub fn solve_exact(cost: &Array2<f64>, mu: &ProbVector, nu: &ProbVector) -> Result<LinearOtResult> {
    check_inputs(cost, mu, nu)?;
    let (n, m) = cost.dim();

    // Zero-mass rows and columns carry no flow; strip them so the simplex
    // basis stays strongly feasible.
    let rows: Vec<usize> = (0..n).filter(|&i| mu.values()[i] > 0.0).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| nu.values()[j] > 0.0).collect();
    let a: Vec<f64> = rows.iter().map(|&i| mu.values()[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| nu.values()[j]).collect();
    let sub_cost =
        Array2::from_shape_fn((rows.len(), cols.len()), |(p, q)| cost[[rows[p], cols[q]]]);

    let sol = network_simplex::solve_transportation(&sub_cost, &a, &b)?;

    let mut plan = Array2::zeros((n, m));
    for (p, &i) in rows.iter().enumerate() {
        for (q, &j) in cols.iter().enumerate() {
            plan[[i, j]] = sol.plan[[p, q]];
        }
    }
    let value = (&plan * cost).sum();
    let marginal_violation = violation(&plan, mu, nu);
    let plan = Coupling::new(plan, mu.clone(), nu.clone(), SOLVER_TOL)?;
    Ok(LinearOtResult {
        plan,
        value,
        iterations: sol.pivots,
        marginal_violation,
        converged: true,
    })
}

/// Entropic OT by Sinkhorn scaling, always in the log domain:
/// `plan = diag(u)·exp(-C/eps)·diag(v)` via stabilized potential updates.
///
/// Non-convergence within `max_iter` is not an error; the result carries
/// `converged = false` and the final violation.
pub fn sinkhorn(
    cost: &Array2<f64>,
    mu: &ProbVector,
    nu: &ProbVector,
    eps: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LinearOtResult> {
    check_inputs(cost, mu, nu)?;
    if eps <= 0.0 || !eps.is_finite() {
        return Err(AgwError::invalid(format!(
            "sinkhorn needs eps > 0, got {eps}"
        )));
    }
    if max_iter == 0 || tol <= 0.0 {
        return Err(AgwError::invalid(
            "sinkhorn needs max_iter >= 1 and tol > 0",
        ));
    }
    let (n, m) = cost.dim();

    let log_mu: Array1<f64> = mu.values().mapv(f64::ln); // -inf on zero mass
    let log_nu: Array1<f64> = nu.values().mapv(f64::ln);
    let mut f = Array1::zeros(n);
    let mut g = Array1::zeros(m);
    for i in 0..n {
        if mu.values()[i] == 0.0 {
            f[i] = f64::NEG_INFINITY;
        }
    }
    for j in 0..m {
        if nu.values()[j] == 0.0 {
            g[j] = f64::NEG_INFINITY;
        }
    }

    let mut plan = Array2::zeros((n, m));
    let mut iterations = 0;
    let mut converged = false;
    let mut current_violation = f64::INFINITY;

    for it in 1..=max_iter {
        // f-update: rows match exactly afterwards.
        for i in 0..n {
            if mu.values()[i] == 0.0 {
                continue;
            }
            let lse = log_sum_exp((0..m).map(|j| (g[j] - cost[[i, j]]) / eps));
            f[i] = eps * (log_mu[i] - lse);
        }
        // g-update: columns match exactly afterwards.
        for j in 0..m {
            if nu.values()[j] == 0.0 {
                continue;
            }
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost[[i, j]]) / eps));
            g[j] = eps * (log_nu[j] - lse);
        }

        for i in 0..n {
            for j in 0..m {
                let e = (f[i] + g[j] - cost[[i, j]]) / eps;
                plan[[i, j]] = e.exp();
            }
        }
        iterations = it;
        current_violation = violation(&plan, mu, nu);
        if current_violation <= tol {
            converged = true;
            break;
        }
    }

    let value = (&plan * cost).sum();
    let plan = if converged && current_violation <= SOLVER_TOL {
        Coupling::new(plan, mu.clone(), nu.clone(), SOLVER_TOL)?
    } else {
        Coupling::lenient(plan, mu.clone(), nu.clone())?
    };
    Ok(LinearOtResult {
        plan,
        value,
        iterations,
        marginal_violation: current_violation,
        converged,
    })
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
