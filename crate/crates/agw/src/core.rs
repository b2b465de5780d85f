//! Shared domain types: histograms, data matrices, distance matrices,
//! couplings, and solver configuration.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Matrices are dense, row-major, double precision.

use ndarray::{Array1, Array2, Axis};

use crate::error::{AgwError, Result};

/// Tolerance for marginal checks on couplings built analytically
/// (product couplings, scaled permutations).
pub const CONSTRUCTED_TOL: f64 = 1e-12;

/// Tolerance for marginal checks on couplings returned by iterative solvers,
/// which stop at finite precision.
pub const SOLVER_TOL: f64 = 1e-7;

/// A histogram on the probability simplex: nonnegative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    w: Array1<f64>,
}

impl ProbVector {
    /// Validates nonnegativity and unit mass (within 1e-12).
    pub fn new(w: Array1<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(AgwError::invalid("probability vector must be non-empty"));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(AgwError::invalid(
                "probability vector entries must be finite and >= 0",
            ));
        }
        let sum: f64 = w.sum();
        if (sum - 1.0).abs() > CONSTRUCTED_TOL {
            return Err(AgwError::invalid(format!(
                "probability vector sums to {sum}, expected 1 within {CONSTRUCTED_TOL:e}"
            )));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.w
    }
}

/// The uniform histogram with `n` bins.
pub fn uniform_hist(n: usize) -> Result<ProbVector> {
    if n == 0 {
        return Err(AgwError::invalid("uniform histogram needs n >= 1"));
    }
    // Entries are exactly 1/n; the sum check tolerates the rounding of n*(1/n).
    Ok(ProbVector {
        w: Array1::from_elem(n, 1.0 / n as f64),
    })
}

/// Raw n×d feature representation of one domain (rows = samples).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(AgwError::invalid(format!(
                "data matrix must have n >= 1 and d >= 1, got {n}x{d}"
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(AgwError::invalid("data matrix entries must be finite"));
        }
        Ok(Self { values })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Square matrix of pairwise distances: symmetric, zero diagonal, nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
}

/// Symmetry and zero-diagonal are enforced within this tolerance.
pub const DISTANCE_TOL: f64 = 1e-10;

impl DistanceMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m {
            return Err(AgwError::dims(format!(
                "distance matrix must be square, got {n}x{m}"
            )));
        }
        if n == 0 {
            return Err(AgwError::invalid("distance matrix must be non-empty"));
        }
        for i in 0..n {
            if values[[i, i]].abs() > DISTANCE_TOL {
                return Err(AgwError::invalid(format!(
                    "distance matrix diagonal entry ({i},{i}) = {} is not zero",
                    values[[i, i]]
                )));
            }
            for j in 0..n {
                let v = values[[i, j]];
                if !v.is_finite() || v < 0.0 {
                    return Err(AgwError::invalid(format!(
                        "distance matrix entry ({i},{j}) = {v} must be finite and >= 0"
                    )));
                }
                if (v - values[[j, i]]).abs() > DISTANCE_TOL {
                    return Err(AgwError::invalid(format!(
                        "distance matrix is asymmetric at ({i},{j}): {v} vs {}",
                        values[[j, i]]
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Nonnegative matrix with prescribed row and column marginals
/// (a transport plan).
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    values: Array2<f64>,
    row_marginal: ProbVector,
    col_marginal: ProbVector,
}

impl Coupling {
    /// Wraps a plan after checking nonnegativity and both marginal
    /// constraints within `tol`. Use [`CONSTRUCTED_TOL`] for analytic plans
    /// and [`SOLVER_TOL`] for solver output.
    pub fn new(
        values: Array2<f64>,
        row_marginal: ProbVector,
        col_marginal: ProbVector,
        tol: f64,
    ) -> Result<Self> {
        check_coupling(&values, &row_marginal, &col_marginal, tol)?;
        Ok(Self {
            values,
            row_marginal,
            col_marginal,
        })
    }

    /// Wraps solver output that may sit outside the post-solve marginal
    /// tolerance (a non-converged run). Shape, finiteness and nonnegativity
    /// are still enforced; the target marginals are recorded as-is.
    pub(crate) fn lenient(
        values: Array2<f64>,
        row_marginal: ProbVector,
        col_marginal: ProbVector,
    ) -> Result<Self> {
        let (n, m) = values.dim();
        if n != row_marginal.len() || m != col_marginal.len() {
            return Err(AgwError::dims(format!(
                "coupling is {n}x{m} but marginals have lengths {} and {}",
                row_marginal.len(),
                col_marginal.len()
            )));
        }
        if values.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(AgwError::invalid(
                "coupling entries must be finite and >= 0",
            ));
        }
        Ok(Self {
            values,
            row_marginal,
            col_marginal,
        })
    }

    /// The independent (product) coupling `row ⊗ col`, always feasible.
    pub fn product(row_marginal: &ProbVector, col_marginal: &ProbVector) -> Self {
        let n = row_marginal.len();
        let m = col_marginal.len();
        let mut values = Array2::zeros((n, m));
        for i in 0..n {
            for j in 0..m {
                values[[i, j]] = row_marginal.values()[i] * col_marginal.values()[j];
            }
        }
        Self {
            values,
            row_marginal: row_marginal.clone(),
            col_marginal: col_marginal.clone(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row_marginal(&self) -> &ProbVector {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &ProbVector {
        &self.col_marginal
    }
}

fn check_coupling(
    values: &Array2<f64>,
    row_marginal: &ProbVector,
    col_marginal: &ProbVector,
    tol: f64,
) -> Result<()> {
    let (n, m) = values.dim();
    if n != row_marginal.len() || m != col_marginal.len() {
        return Err(AgwError::dims(format!(
            "coupling is {n}x{m} but marginals have lengths {} and {}",
            row_marginal.len(),
            col_marginal.len()
        )));
    }
    if values.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(AgwError::invalid(
            "coupling entries must be finite and >= 0",
        ));
    }
    let row_sums = values.sum_axis(Axis(1));
    for (i, (&s, &w)) in row_sums.iter().zip(row_marginal.values()).enumerate() {
        if (s - w).abs() > tol {
            return Err(AgwError::invalid(format!(
                "row {i} sums to {s}, expected {w} within {tol:e}"
            )));
        }
    }
    let col_sums = values.sum_axis(Axis(0));
    for (j, (&s, &w)) in col_sums.iter().zip(col_marginal.values()).enumerate() {
        if (s - w).abs() > tol {
            return Err(AgwError::invalid(format!(
                "column {j} sums to {s}, expected {w} within {tol:e}"
            )));
        }
    }
    Ok(())
}

/// True iff `values` is nonnegative and matches both marginals within `tol`.
///
/// Errors on a shape mismatch rather than returning `false`: a wrongly-shaped
/// plan is a programming error, not an infeasible one.
pub fn validate_coupling(
    values: &Array2<f64>,
    row_marginal: &ProbVector,
    col_marginal: &ProbVector,
    tol: f64,
) -> Result<bool> {
    let (n, m) = values.dim();
    if n != row_marginal.len() || m != col_marginal.len() {
        return Err(AgwError::dims(format!(
            "coupling is {n}x{m} but marginals have lengths {} and {}",
            row_marginal.len(),
            col_marginal.len()
        )));
    }
    Ok(check_coupling(values, row_marginal, col_marginal, tol).is_ok())
}

/// Which algorithm solves the quadratic sample step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSampleSolver {
    /// Conditional gradient with exact quadratic line search.
    FrankWolfe,
    /// Repeated entropic projections of the local linearization
    /// (requires `eps_s > 0`).
    EntropicProximal,
}

/// Which algorithm solves the inner linear OT problems
/// (feature step and Frank-Wolfe directions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerLinearSolver {
    /// Network simplex; returns a vertex of the transportation polytope.
    Exact,
    /// Log-domain Sinkhorn with the matching entropic strength.
    Sinkhorn,
}

/// Solver configuration shared by GW, COOT and AGW.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Interpolation weight in [0,1]: 1 = pure GW, 0 = pure COOT.
    pub alpha: f64,
    /// Entropic strength on the sample coupling (0 disables).
    pub eps_s: f64,
    /// Entropic strength on the feature coupling (0 disables).
    pub eps_v: f64,
    pub max_bcd_iters: usize,
    pub max_inner_iters: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub inner_sample_solver: InnerSampleSolver,
    pub inner_linear_solver: InnerLinearSolver,
    /// Seed recorded for reproducibility of any randomized driver around the
    /// solvers; the solvers themselves are deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            eps_s: 0.0,
            eps_v: 0.0,
            max_bcd_iters: 200,
            max_inner_iters: 500,
            tol_abs: 1e-9,
            tol_rel: 1e-9,
            inner_sample_solver: InnerSampleSolver::FrankWolfe,
            inner_linear_solver: InnerLinearSolver::Exact,
            seed: 1976,
        }
    }
}

impl SolverConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Sets both entropic strengths and selects the matching inner solvers:
    /// entropic variants where a strength is positive, exact otherwise.
    /// Assign the solver fields directly to mix strategies by hand (say,
    /// Frank-Wolfe with Sinkhorn directions).
    pub fn with_entropy(mut self, eps_s: f64, eps_v: f64) -> Self {
        self.eps_s = eps_s;
        self.eps_v = eps_v;
        self.inner_sample_solver = if eps_s > 0.0 {
            InnerSampleSolver::EntropicProximal
        } else {
            InnerSampleSolver::FrankWolfe
        };
        self.inner_linear_solver = if eps_s > 0.0 || eps_v > 0.0 {
            InnerLinearSolver::Sinkhorn
        } else {
            InnerLinearSolver::Exact
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(AgwError::invalid(format!(
                "alpha must be in [0,1], got {}",
                self.alpha
            )));
        }
        if self.eps_s < 0.0
            || self.eps_v < 0.0
            || !self.eps_s.is_finite()
            || !self.eps_v.is_finite()
        {
            return Err(AgwError::invalid(
                "entropic strengths must be finite and >= 0",
            ));
        }
        if self.max_bcd_iters == 0 || self.max_inner_iters == 0 {
            return Err(AgwError::invalid("iteration caps must be >= 1"));
        }
        if self.tol_abs <= 0.0 || self.tol_rel <= 0.0 {
            return Err(AgwError::invalid("tolerances must be > 0"));
        }
        if self.inner_sample_solver == InnerSampleSolver::EntropicProximal && self.eps_s == 0.0 {
            return Err(AgwError::invalid(
                "entropic_proximal sample solver requires eps_s > 0",
            ));
        }
        Ok(())
    }
}

/// Everything a solver run reports back.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Objective value after each outer iteration; non-increasing by
    /// construction (slack 1e-10 per step).
    pub objective_trajectory: Vec<f64>,
    pub final_objective: f64,
    pub sample_coupling: Coupling,
    /// Present for COOT and AGW, absent for pure GW.
    pub feature_coupling: Option<Coupling>,
    pub converged: bool,
    pub bcd_iterations: usize,
    pub wall_time_seconds: f64,
}
