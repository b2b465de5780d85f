//! Block-coordinate solvers for the three quadratic transport objectives:
//! Gromov-Wasserstein, CO-Optimal Transport, and their convex interpolation.
//!
//! Every outer iteration alternates an exactly-solved feature step with a
//! sample step handled by Frank-Wolfe (exact quadratic line search) or, with
//! `eps_s > 0`, entropic proximal projections. Recorded trajectories are
//! non-increasing by construction: a candidate iterate that would raise the
//! objective is discarded and the run stops there.

use std::time::Instant;

use ndarray::Array2;

use crate::core::{
    Coupling, DataMatrix, DistanceMatrix, InnerLinearSolver, InnerSampleSolver, ProbVector,
    SolveReport, SolverConfig, SOLVER_TOL,
};
use crate::error::{AgwError, Result};
use crate::linot::{sinkhorn, solve_exact, SINKHORN_MAX_ITER, SINKHORN_TOL};
use crate::quad::FactoredQuadCost;

/// Step choice of the exact line search over `τ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchStep {
    pub tau: f64,
    /// Modeled decrease `f(0) - f(τ)` of the 1-D quadratic; nonnegative.
    pub predicted_decrease: f64,
}

/// Exact minimizer of the quadratic `f(τ) = f0 + slope·τ + a·τ²` on [0, 1],
/// with `a = f1 - f0 - slope` recovered from the endpoint value.
pub fn line_search_quadratic(f0: f64, slope: f64, f1: f64) -> LineSearchStep {
    let a = f1 - f0 - slope;
    let tau = if a > 0.0 {
        (-slope / (2.0 * a)).clamp(0.0, 1.0)
    } else if f1 < f0 {
        1.0
    } else {
        0.0
    };
    LineSearchStep {
        tau,
        predicted_decrease: -(slope * tau + a * tau * tau),
    }
}

/// Per-iteration couplings recorded by the `_with_trace` solver variants.
#[derive(Debug, Default, Clone)]
pub struct IterateTrace {
    pub sample: Vec<Array2<f64>>,
    pub feature: Vec<Array2<f64>>,
}

/// Gromov-Wasserstein: `min_{Γ ∈ Π(μ,ν)} <L(D_X,D_Y) ⊗ Γ, Γ>`.
///
/// With `eps_s = 0` each outer iteration is one Frank-Wolfe step (exact OT
/// direction on the gradient, exact line search); with `eps_s > 0` it is one
/// entropic projection of the local linearization.
pub fn solve_gw(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    if dx.len() != mu.len() || dy.len() != nu.len() {
        return Err(AgwError::dims(format!(
            "distance matrices are {}x{} and {}x{} but marginals have lengths {} and {}",
            dx.len(),
            dx.len(),
            dy.len(),
            dy.len(),
            mu.len(),
            nu.len()
        )));
    }
    let start = Instant::now();
    let fq = FactoredQuadCost::new(dx.values().clone(), dy.values().clone());
    let zeros = Array2::zeros((mu.len(), nu.len()));
    let step = SampleStep {
        fq_gw: Some(&fq),
        alpha: 1.0,
        linear_cost: &zeros,
        mu,
        nu,
        cfg,
    };

    let mut gamma = Coupling::product(mu, nu).values().clone();
    let mut objective = step.objective(&gamma)?;
    let mut trajectory = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_bcd_iters {
        let (candidate, cand_obj) =
            if cfg.eps_s > 0.0 && cfg.inner_sample_solver == InnerSampleSolver::EntropicProximal {
                // proximal cost is the half-gradient L ⊗ Γ
                let cost = fq.linearized(&gamma)?;
                let plan = step.linear_plan(&cost, cfg.eps_s)?;
                let obj = step.objective(&plan)?;
                (plan, obj)
            } else {
                step.frank_wolfe_step(&gamma, objective)?
            };

        if cand_obj > objective {
            converged = cand_obj - objective <= cfg.tol_abs + cfg.tol_rel * objective.abs();
            break;
        }
        let delta = objective - cand_obj;
        gamma = candidate;
        objective = cand_obj;
        trajectory.push(objective);
        if delta <= cfg.tol_abs + cfg.tol_rel * objective.abs() {
            converged = true;
            break;
        }
    }
    if trajectory.is_empty() {
        trajectory.push(objective);
    }

    finish_report(
        trajectory, gamma, None, mu, nu, None, None, converged, start,
    )
}

/// CO-Optimal Transport: alternating exact (or entropic) linear OT over the
/// feature and sample couplings.
pub fn solve_coot(
    x: &DataMatrix,
    y: &DataMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: &ProbVector,
    nu_f: &ProbVector,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    agw_impl(
        None,
        None,
        x,
        y,
        mu,
        nu,
        mu_f,
        nu_f,
        &cfg.clone().with_alpha(0.0),
        None,
        None,
    )
}

/// [`solve_coot`] recording every accepted iterate.
#[allow(clippy::too_many_arguments)]
pub fn solve_coot_with_trace(
    x: &DataMatrix,
    y: &DataMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: &ProbVector,
    nu_f: &ProbVector,
    cfg: &SolverConfig,
    trace: &mut IterateTrace,
) -> Result<SolveReport> {
    agw_impl(
        None,
        None,
        x,
        y,
        mu,
        nu,
        mu_f,
        nu_f,
        &cfg.clone().with_alpha(0.0),
        None,
        Some(trace),
    )
}

/// Augmented Gromov-Wasserstein (block-coordinate descent):
/// `min α·<L(D_X,D_Y) ⊗ Γˢ, Γˢ> + (1-α)·<L(X,Y) ⊗ Γᵛ + S, Γˢ>`.
///
/// Both couplings start at the product coupling. Each iteration solves the
/// feature OT problem (α-free) and then the fused sample step. An optional
/// supervision matrix `S` enters only the linear part of the sample step;
/// when present, the reported objective includes its contribution so the
/// trajectory tracks exactly what is being minimized.
#[allow(clippy::too_many_arguments)]
pub fn solve_agw(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    x: &DataMatrix,
    y: &DataMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: &ProbVector,
    nu_f: &ProbVector,
    cfg: &SolverConfig,
    supervision: Option<&Array2<f64>>,
) -> Result<SolveReport> {
    agw_impl(
        Some(dx),
        Some(dy),
        x,
        y,
        mu,
        nu,
        mu_f,
        nu_f,
        cfg,
        supervision,
        None,
    )
}

/// [`solve_agw`] recording every accepted iterate.
#[allow(clippy::too_many_arguments)]
pub fn solve_agw_with_trace(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    x: &DataMatrix,
    y: &DataMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: &ProbVector,
    nu_f: &ProbVector,
    cfg: &SolverConfig,
    supervision: Option<&Array2<f64>>,
    trace: &mut IterateTrace,
) -> Result<SolveReport> {
    agw_impl(
        Some(dx),
        Some(dy),
        x,
        y,
        mu,
        nu,
        mu_f,
        nu_f,
        cfg,
        supervision,
        Some(trace),
    )
}

#[allow(clippy::too_many_arguments)]
fn agw_impl(
    dx: Option<&DistanceMatrix>,
    dy: Option<&DistanceMatrix>,
    x: &DataMatrix,
    y: &DataMatrix,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: &ProbVector,
    nu_f: &ProbVector,
    cfg: &SolverConfig,
    supervision: Option<&Array2<f64>>,
    mut trace: Option<&mut IterateTrace>,
) -> Result<SolveReport> {
    cfg.validate()?;
    let (n, d) = (x.n_samples(), x.n_features());
    let (m, dp) = (y.n_samples(), y.n_features());
    if mu.len() != n || nu.len() != m || mu_f.len() != d || nu_f.len() != dp {
        return Err(AgwError::dims(format!(
            "data is {n}x{d} vs {m}x{dp} but marginals have lengths {}, {}, {}, {}",
            mu.len(),
            nu.len(),
            mu_f.len(),
            nu_f.len()
        )));
    }
    if cfg.alpha > 0.0 {
        match (dx, dy) {
            (Some(dx), Some(dy)) if dx.len() == n && dy.len() == m => {}
            (Some(_), Some(_)) => {
                return Err(AgwError::dims(
                    "distance matrices must match the sample counts",
                ))
            }
            _ => {
                return Err(AgwError::invalid(
                    "alpha > 0 requires both distance matrices",
                ))
            }
        }
    }
    if let Some(s) = supervision {
        if s.dim() != (n, m) {
            return Err(AgwError::dims(format!(
                "supervision must be {n}x{m}, got {:?}",
                s.dim()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(AgwError::invalid("supervision entries must be finite"));
        }
    }

    let start = Instant::now();
    let fq_gw = match (dx, dy) {
        (Some(dx), Some(dy)) => Some(FactoredQuadCost::new(
            dx.values().clone(),
            dy.values().clone(),
        )),
        _ => None,
    };
    let fq_samples = FactoredQuadCost::new(x.values().clone(), y.values().clone());
    let fq_features = FactoredQuadCost::new(x.values().t().to_owned(), y.values().t().to_owned());

    let mut gamma_s = Coupling::product(mu, nu).values().clone();
    let mut gamma_v = Coupling::product(mu_f, nu_f).values().clone();

    let feature_step = LinearStep {
        mu: mu_f,
        nu: nu_f,
        eps: cfg.eps_v,
        solver: cfg.inner_linear_solver,
    };

    let mut trajectory: Vec<f64> = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_bcd_iters {
        let prev_s = gamma_s.clone();
        let prev_v = gamma_v.clone();

        // Feature step: alpha scales out of the argmin, so the cost is the
        // plain linearization.
        let lv = fq_features.linearized(&gamma_s)?;
        gamma_v = feature_step.plan(&lv)?;

        // Sample step on the fused objective at the fresh feature coupling.
        let ls = fq_samples.linearized(&gamma_v)?;
        let linear_cost = match supervision {
            Some(s) => &ls + s,
            None => ls,
        };
        let step = SampleStep {
            fq_gw: fq_gw.as_ref(),
            alpha: cfg.alpha,
            linear_cost: &linear_cost,
            mu,
            nu,
            cfg,
        };
        gamma_s = step.minimize(&gamma_s)?;

        let objective = step.objective(&gamma_s)?;
        if let Some(&last) = trajectory.last() {
            if objective > last {
                // entropic steps may overshoot; keep the previous iterate
                gamma_s = prev_s;
                gamma_v = prev_v;
                converged = objective - last <= cfg.tol_abs + cfg.tol_rel * last.abs();
                break;
            }
            let delta = last - objective;
            trajectory.push(objective);
            if let Some(t) = trace.as_deref_mut() {
                t.sample.push(gamma_s.clone());
                t.feature.push(gamma_v.clone());
            }
            if delta <= cfg.tol_abs + cfg.tol_rel * objective.abs() {
                converged = true;
                break;
            }
        } else {
            trajectory.push(objective);
            if let Some(t) = trace.as_deref_mut() {
                t.sample.push(gamma_s.clone());
                t.feature.push(gamma_v.clone());
            }
        }
    }

    finish_report(
        trajectory,
        gamma_s,
        Some(gamma_v),
        mu,
        nu,
        Some(mu_f),
        Some(nu_f),
        converged,
        start,
    )
}

/// One linear OT subproblem: exact by default, Sinkhorn when selected and
/// its entropic strength is positive.
struct LinearStep<'a> {
    mu: &'a ProbVector,
    nu: &'a ProbVector,
    eps: f64,
    solver: InnerLinearSolver,
}

impl LinearStep<'_> {
    fn plan(&self, cost: &Array2<f64>) -> Result<Array2<f64>> {
        let res = if self.solver == InnerLinearSolver::Sinkhorn && self.eps > 0.0 {
            sinkhorn(
                cost,
                self.mu,
                self.nu,
                self.eps,
                SINKHORN_MAX_ITER,
                SINKHORN_TOL,
            )?
        } else {
            solve_exact(cost, self.mu, self.nu)?
        };
        Ok(res.plan.values().clone())
    }
}

/// The fused sample subproblem
/// `min_Γ alpha·<L_gw ⊗ Γ, Γ> + (1-alpha)·<linear_cost, Γ>`.
struct SampleStep<'a> {
    fq_gw: Option<&'a FactoredQuadCost>,
    alpha: f64,
    linear_cost: &'a Array2<f64>,
    mu: &'a ProbVector,
    nu: &'a ProbVector,
    cfg: &'a SolverConfig,
}

impl SampleStep<'_> {
    fn objective(&self, gamma: &Array2<f64>) -> Result<f64> {
        let mut value = (1.0 - self.alpha) * (self.linear_cost * gamma).sum();
        if self.alpha > 0.0 {
            let fq = self.fq_gw.expect("alpha > 0 implies distance matrices");
            value += self.alpha * (&fq.linearized(gamma)? * gamma).sum();
        }
        Ok(value)
    }

    fn gradient(&self, gamma: &Array2<f64>) -> Result<Array2<f64>> {
        let mut grad = (1.0 - self.alpha) * self.linear_cost;
        if self.alpha > 0.0 {
            let fq = self.fq_gw.expect("alpha > 0 implies distance matrices");
            grad = grad + 2.0 * self.alpha * fq.linearized(gamma)?;
        }
        Ok(grad)
    }

    fn linear_plan(&self, cost: &Array2<f64>, eps: f64) -> Result<Array2<f64>> {
        let res = if eps > 0.0 {
            sinkhorn(cost, self.mu, self.nu, eps, SINKHORN_MAX_ITER, SINKHORN_TOL)?
        } else {
            solve_exact(cost, self.mu, self.nu)?
        };
        Ok(res.plan.values().clone())
    }

    /// Direction oracle for Frank-Wolfe steps.
    fn direction(&self, gradient: &Array2<f64>) -> Result<Array2<f64>> {
        let use_sinkhorn =
            self.cfg.inner_linear_solver == InnerLinearSolver::Sinkhorn && self.cfg.eps_s > 0.0;
        self.linear_plan(gradient, if use_sinkhorn { self.cfg.eps_s } else { 0.0 })
    }

    /// One Frank-Wolfe step from `gamma`; returns the new iterate and its
    /// objective. Exact line search keeps this non-increasing.
    fn frank_wolfe_step(&self, gamma: &Array2<f64>, f0: f64) -> Result<(Array2<f64>, f64)> {
        let grad = self.gradient(gamma)?;
        let direction = self.direction(&grad)?;
        let d = &direction - gamma;
        let slope = (&grad * &d).sum();
        let f1 = self.objective(&direction)?;
        let step = line_search_quadratic(f0, slope, f1);
        if step.tau == 0.0 {
            return Ok((gamma.clone(), f0));
        }
        if step.tau == 1.0 {
            return Ok((direction, f1));
        }
        let next = gamma + &(step.tau * &d);
        let f_next = self.objective(&next)?;
        Ok((next, f_next))
    }

    /// Full sample-step minimization from `gamma0`.
    fn minimize(&self, gamma0: &Array2<f64>) -> Result<Array2<f64>> {
        // A vanishing GW term makes the subproblem a single linear solve,
        // exactly the COOT sample step.
        if self.alpha == 0.0 {
            return self.linear_plan(self.linear_cost, self.cfg.eps_s);
        }
        match self.cfg.inner_sample_solver {
            InnerSampleSolver::FrankWolfe => self.frank_wolfe_loop(gamma0),
            InnerSampleSolver::EntropicProximal => self.proximal_loop(gamma0),
        }
    }

    fn frank_wolfe_loop(&self, gamma0: &Array2<f64>) -> Result<Array2<f64>> {
        let mut gamma = gamma0.clone();
        let mut f = self.objective(&gamma)?;
        for _ in 0..self.cfg.max_inner_iters {
            let (next, f_next) = self.frank_wolfe_step(&gamma, f)?;
            let delta = f - f_next;
            gamma = next;
            if delta <= self.cfg.tol_abs + self.cfg.tol_rel * f_next.abs() {
                break;
            }
            f = f_next;
        }
        Ok(gamma)
    }

    /// Entropic proximal scheme: project the local linearization (the full
    /// gradient) with strength `eps_s`, rejecting any step that would raise
    /// the objective.
    fn proximal_loop(&self, gamma0: &Array2<f64>) -> Result<Array2<f64>> {
        let mut gamma = gamma0.clone();
        let mut f = self.objective(&gamma)?;
        for _ in 0..self.cfg.max_inner_iters {
            let grad = self.gradient(&gamma)?;
            let candidate = self.linear_plan(&grad, self.cfg.eps_s)?;
            let f_cand = self.objective(&candidate)?;
            if f_cand > f {
                break;
            }
            let plan_change = (&candidate - &gamma)
                .iter()
                .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
            let delta = f - f_cand;
            gamma = candidate;
            f = f_cand;
            if delta <= self.cfg.tol_abs + self.cfg.tol_rel * f.abs()
                || plan_change <= self.cfg.tol_abs
            {
                break;
            }
        }
        Ok(gamma)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    trajectory: Vec<f64>,
    gamma_s: Array2<f64>,
    gamma_v: Option<Array2<f64>>,
    mu: &ProbVector,
    nu: &ProbVector,
    mu_f: Option<&ProbVector>,
    nu_f: Option<&ProbVector>,
    converged: bool,
    start: Instant,
) -> Result<SolveReport> {
    let mut converged = converged;
    let sample_coupling = wrap_coupling(gamma_s, mu, nu, &mut converged)?;
    let feature_coupling = match gamma_v {
        Some(gv) => Some(wrap_coupling(
            gv,
            mu_f.expect("feature marginals accompany feature couplings"),
            nu_f.expect("feature marginals accompany feature couplings"),
            &mut converged,
        )?),
        None => None,
    };
    let final_objective = *trajectory.last().expect("at least one iteration runs");
    Ok(SolveReport {
        bcd_iterations: trajectory.len(),
        objective_trajectory: trajectory,
        final_objective,
        sample_coupling,
        feature_coupling,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Wraps solver output, downgrading `converged` if the plan misses the
/// post-solve marginal tolerance (possible when inner Sinkhorn ran out of
/// iterations).
fn wrap_coupling(
    values: Array2<f64>,
    mu: &ProbVector,
    nu: &ProbVector,
    converged: &mut bool,
) -> Result<Coupling> {
    match Coupling::new(values.clone(), mu.clone(), nu.clone(), SOLVER_TOL) {
        Ok(c) => Ok(c),
        Err(_) => {
            *converged = false;
            Coupling::lenient(values, mu.clone(), nu.clone())
        }
    }
}
