//! Factored evaluation of the quadratic transport cost tensors.
//!
//! The squared-difference tensor contraction
//! `out[i,j] = Σ_{k,l} (A[i,k] - B[j,l])² Γ[k,l]`
//! decomposes into three dense products,
//!
//! `out = (A∘² r) 1ᵀ + 1 (B∘² c)ᵀ - A Γ (2B)ᵀ`,
//!
//! where `r`/`c` are the row/column sums of `Γ`. Using the actual sums of
//! `Γ` rather than its nominal marginals keeps the identity exact on
//! arbitrary (even infeasible) matrices, which the gradient checks and the
//! Frank-Wolfe line search rely on. A single evaluation costs
//! Θ(pr + qs + prs + psq) multiplications instead of the naive Θ(pqrs).

use ndarray::{Array1, Array2, Axis};

use crate::core::{DataMatrix, DistanceMatrix};
use crate::error::{AgwError, Result};

/// Precomputed factor pair for the squared loss: the identity factor, the
/// doubled factor, and the elementwise squares of both.
#[derive(Debug, Clone)]
pub struct FactoredQuadCost {
    left: Array2<f64>,
    right: Array2<f64>,
    left_sq: Array2<f64>,
    right_sq: Array2<f64>,
}

impl FactoredQuadCost {
    pub fn new(left: Array2<f64>, right: Array2<f64>) -> Self {
        let left_sq = left.mapv(|x| x * x);
        let right_sq = right.mapv(|x| x * x);
        Self {
            left,
            right,
            left_sq,
            right_sq,
        }
    }

    pub fn left(&self) -> &Array2<f64> {
        &self.left
    }

    pub fn right(&self) -> &Array2<f64> {
        &self.right
    }

    pub fn left_sq(&self) -> &Array2<f64> {
        &self.left_sq
    }

    pub fn right_sq(&self) -> &Array2<f64> {
        &self.right_sq
    }

    /// `Σ_{k,l} (left[i,k] - right[j,l])² gamma[k,l]` for every `(i,j)`,
    /// via the three-term factorization.
    pub fn linearized(&self, gamma: &Array2<f64>) -> Result<Array2<f64>> {
        let (_, r) = self.left.dim();
        let (_, s) = self.right.dim();
        if gamma.dim() != (r, s) {
            return Err(AgwError::dims(format!(
                "gamma must be {r}x{s}, got {:?}",
                gamma.dim()
            )));
        }
        let row_sums: Array1<f64> = gamma.sum_axis(Axis(1));
        let col_sums: Array1<f64> = gamma.sum_axis(Axis(0));

        let left_term = self.left_sq.dot(&row_sums); // length p
        let right_term = self.right_sq.dot(&col_sums); // length q

        // h1 = identity, h2 = doubling: cross term = left · Γ · (2·right)ᵀ
        let cross = self.left.dot(gamma).dot(&(2.0 * &self.right).t());

        let mut out = -cross;
        for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let l = left_term[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v += l + right_term[j];
            }
        }
        Ok(out)
    }
}

/// `L(D_X, D_Y) ⊗ Γ`: the GW cost tensor contracted against `gamma`.
pub fn gw_linearized_cost(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    gamma: &Array2<f64>,
) -> Result<Array2<f64>> {
    FactoredQuadCost::new(dx.values().clone(), dy.values().clone()).linearized(gamma)
}

/// `L(X, Y) ⊗ Γᵛ`: the COOT tensor contracted over features, giving the
/// n×m cost of the sample step.
pub fn coot_linearized_for_samples(
    x: &DataMatrix,
    y: &DataMatrix,
    gamma_v: &Array2<f64>,
) -> Result<Array2<f64>> {
    FactoredQuadCost::new(x.values().clone(), y.values().clone()).linearized(gamma_v)
}

/// The transpose analogue: contract over samples, giving the d×d' cost of
/// the feature step.
pub fn coot_linearized_for_features(
    x: &DataMatrix,
    y: &DataMatrix,
    gamma_s: &Array2<f64>,
) -> Result<Array2<f64>> {
    FactoredQuadCost::new(x.values().t().to_owned(), y.values().t().to_owned()).linearized(gamma_s)
}

/// `⟨L(D_X, D_Y) ⊗ Γ, Γ⟩`.
pub fn gw_objective(dx: &DistanceMatrix, dy: &DistanceMatrix, gamma: &Array2<f64>) -> Result<f64> {
    let lin = gw_linearized_cost(dx, dy, gamma)?;
    Ok((&lin * gamma).sum())
}

/// `⟨L(X, Y) ⊗ Γᵛ, Γˢ⟩`.
pub fn coot_objective(
    x: &DataMatrix,
    y: &DataMatrix,
    gamma_s: &Array2<f64>,
    gamma_v: &Array2<f64>,
) -> Result<f64> {
    let lin = coot_linearized_for_samples(x, y, gamma_v)?;
    if lin.dim() != gamma_s.dim() {
        return Err(AgwError::dims(format!(
            "sample coupling must be {:?}, got {:?}",
            lin.dim(),
            gamma_s.dim()
        )));
    }
    Ok((&lin * gamma_s).sum())
}

/// `α·L_GW + (1-α)·L_COOT`, exactly affine in `alpha`. Entropic terms are
/// solver devices and never appear here.
#[allow(clippy::too_many_arguments)]
pub fn agw_objective(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    x: &DataMatrix,
    y: &DataMatrix,
    gamma_s: &Array2<f64>,
    gamma_v: &Array2<f64>,
    alpha: f64,
) -> Result<f64> {
    let gw = gw_objective(dx, dy, gamma_s)?;
    let coot = coot_objective(x, y, gamma_s, gamma_v)?;
    Ok(alpha * gw + (1.0 - alpha) * coot)
}

/// Gradient of `Γ ↦ ⟨L(D_X,D_Y) ⊗ Γ, Γ⟩` on the unconstrained matrix space.
/// Symmetry of the distance matrices (a type invariant) makes this exactly
/// `2·(L ⊗ Γ)`.
pub fn gw_gradient(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    gamma: &Array2<f64>,
) -> Result<Array2<f64>> {
    Ok(2.0 * gw_linearized_cost(dx, dy, gamma)?)
}
