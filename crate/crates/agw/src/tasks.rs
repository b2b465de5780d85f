//! Downstream alignment procedures: barycentric projection, the FOSCTTM
//! alignment error, matching accuracy, label propagation, supervision cost
//! construction and group-level aggregation.
//!
//! Every argmax in this module breaks ties to the lowest index so results
//! are identical across platforms.

use ndarray::Array2;

use crate::core::{Coupling, DataMatrix};
use crate::error::{AgwError, Result};

/// Integer labels in `[0, K)` with `-1` marking unlabeled entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<i64>,
    n_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<i64>, n_classes: usize) -> Result<Self> {
        if n_classes == 0 {
            return Err(AgwError::invalid("label vector needs K >= 1"));
        }
        if labels.is_empty() {
            return Err(AgwError::invalid("label vector must be non-empty"));
        }
        for (i, &l) in labels.iter().enumerate() {
            if l != -1 && !(0..n_classes as i64).contains(&l) {
                return Err(AgwError::invalid(format!(
                    "label {l} at position {i} is outside [0, {n_classes}) and not -1"
                )));
            }
        }
        Ok(Self { labels, n_classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn fully_labeled(&self) -> bool {
        self.labels.iter().all(|&l| l != -1)
    }
}

/// How known (row, column) matches enter the sample-step cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupervisionMode {
    /// Matched pairs keep their natural cost; the additive matrix is zero.
    ZeroMatched,
    /// Listed rows pay `penalty` everywhere except at their matched columns.
    PenalizeMismatch,
    /// Matched pairs receive the negative offset `-(1 - scale) * base_scale`.
    DownscaleMatched,
}

/// Known cross-domain matches plus how strongly to enforce them.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionSpec {
    pub pairs: Vec<(usize, usize)>,
    pub mode: SupervisionMode,
    /// Penalty for mismatches; defaults to `100 * base_scale` when `None`.
    pub penalty: Option<f64>,
    /// Downscale factor in (0, 1].
    pub scale: f64,
}

impl SupervisionSpec {
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        for &(r, c) in &self.pairs {
            if r >= n || c >= m {
                return Err(AgwError::invalid(format!(
                    "supervision pair ({r},{c}) out of range for {n}x{m}"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &p in &self.pairs {
            if !seen.insert(p) {
                return Err(AgwError::invalid(format!(
                    "duplicate supervision pair ({}, {})",
                    p.0, p.1
                )));
            }
        }
        if let Some(p) = self.penalty {
            if !p.is_finite() || p < 0.0 {
                return Err(AgwError::invalid(
                    "supervision penalty must be finite and >= 0",
                ));
            }
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(AgwError::invalid("supervision scale must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Maps each source sample to the coupling-weighted mean of target rows:
/// `out[i] = Σ_j Γ[i,j]·Y[j] / Σ_j Γ[i,j]`.
pub fn barycentric_project(gamma_s: &Coupling, y: &DataMatrix) -> Result<DataMatrix> {
    let g = gamma_s.values();
    let (n, m) = g.dim();
    if m != y.n_samples() {
        return Err(AgwError::dims(format!(
            "coupling has {m} columns but Y has {} rows",
            y.n_samples()
        )));
    }
    let d = y.n_features();
    let mut out = Array2::zeros((n, d));
    for i in 0..n {
        let mass: f64 = g.row(i).sum();
        if mass <= 0.0 {
            return Err(AgwError::invalid(format!(
                "sample {i} receives no transport mass; cannot project"
            )));
        }
        for j in 0..m {
            let w = g[[i, j]];
            if w == 0.0 {
                continue;
            }
            for c in 0..d {
                out[[i, c]] += w * y.values()[[j, c]];
            }
        }
        for c in 0..d {
            out[[i, c]] /= mass;
        }
    }
    DataMatrix::new(out)
}

/// Fraction of samples closer than the true match, averaged over both
/// directions; 0 is a perfect alignment, 0.5 is chance level.
///
/// Row i of `a` corresponds to row i of `b`. "Closer" is strict, and the
/// true match is excluded from the denominator (n-1 comparisons per sample).
pub fn foscttm(a: &DataMatrix, b: &DataMatrix) -> Result<f64> {
    if a.n_samples() != b.n_samples() || a.n_features() != b.n_features() {
        return Err(AgwError::dims(format!(
            "foscttm needs equal shapes, got {}x{} vs {}x{}",
            a.n_samples(),
            a.n_features(),
            b.n_samples(),
            b.n_features()
        )));
    }
    let n = a.n_samples();
    if n < 2 {
        return Err(AgwError::invalid("foscttm needs at least 2 samples"));
    }
    let mut total = 0.0;
    for (from, to) in [(a, b), (b, a)] {
        for i in 0..n {
            let true_dist = row_dist_sq(from, i, to, i);
            let closer = (0..n)
                .filter(|&j| j != i && row_dist_sq(from, i, to, j) < true_dist)
                .count();
            total += closer as f64 / (n - 1) as f64;
        }
    }
    Ok(total / (2 * n) as f64)
}

fn row_dist_sq(a: &DataMatrix, i: usize, b: &DataMatrix, j: usize) -> f64 {
    a.values()
        .row(i)
        .iter()
        .zip(b.values().row(j))
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Fraction of labeled rows whose highest-mass column shares their label.
/// Rows labeled `-1` are left out of the denominator.
pub fn matching_accuracy(
    gamma_s: &Coupling,
    labels_x: &LabelVector,
    labels_y: &LabelVector,
) -> Result<f64> {
    let g = gamma_s.values();
    let (n, m) = g.dim();
    if labels_x.len() != n || labels_y.len() != m {
        return Err(AgwError::dims(format!(
            "coupling is {n}x{m} but labels have lengths {} and {}",
            labels_x.len(),
            labels_y.len()
        )));
    }
    let mut hits = 0usize;
    let mut counted = 0usize;
    for i in 0..n {
        let lx = labels_x.labels()[i];
        if lx == -1 {
            continue;
        }
        counted += 1;
        let j = argmax_lowest_tie(g.row(i).iter().copied());
        if labels_y.labels()[j] == lx {
            hits += 1;
        }
    }
    if counted == 0 {
        return Err(AgwError::invalid("no labeled rows to score"));
    }
    Ok(hits as f64 / counted as f64)
}

fn argmax_lowest_tie(values: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (idx, v) in values.enumerate() {
        if v > best {
            best = v;
            best_idx = idx;
        }
    }
    best_idx
}

/// Propagates fully-known source labels through the coupling:
/// `L = D_s Γˢ` with one-hot `D_s`, prediction `argmax_k L[k, j]`.
pub fn label_propagation(
    gamma_s: &Coupling,
    y_source: &LabelVector,
    n_classes: usize,
) -> Result<LabelVector> {
    let g = gamma_s.values();
    let (n_s, n_t) = g.dim();
    if y_source.len() != n_s {
        return Err(AgwError::dims(format!(
            "coupling has {n_s} rows but source labels have length {}",
            y_source.len()
        )));
    }
    if !y_source.fully_labeled() {
        return Err(AgwError::invalid(
            "label propagation needs fully labeled sources",
        ));
    }
    if y_source.labels().iter().any(|&l| l >= n_classes as i64) {
        return Err(AgwError::invalid(format!(
            "source label outside [0, {n_classes})"
        )));
    }
    // class-mass matrix L[k, j] = Σ_{i: y_i = k} Γ[i, j]
    let mut class_mass = Array2::zeros((n_classes, n_t));
    for i in 0..n_s {
        let k = y_source.labels()[i] as usize;
        for j in 0..n_t {
            class_mass[[k, j]] += g[[i, j]];
        }
    }
    let labels = (0..n_t)
        .map(|j| argmax_lowest_tie(class_mass.column(j).iter().copied()) as i64)
        .collect();
    LabelVector::new(labels, n_classes)
}

/// Builds the additive cost matrix the sample step adds to its linear part.
///
/// `base_scale` is the magnitude reference (typically the mean absolute
/// linearized cost at initialization); a `None` penalty defaults to
/// `100 * base_scale`.
pub fn build_supervision_cost(
    n: usize,
    m: usize,
    spec: &SupervisionSpec,
    base_scale: f64,
) -> Result<Array2<f64>> {
    spec.validate(n, m)?;
    let mut out = Array2::zeros((n, m));
    match spec.mode {
        SupervisionMode::ZeroMatched => {
            // matched pairs contribute an additive zero: the matrix stays 0
        }
        SupervisionMode::PenalizeMismatch => {
            let penalty = spec.penalty.unwrap_or(100.0 * base_scale);
            let mut matched: Vec<Vec<usize>> = vec![Vec::new(); n];
            for &(r, c) in &spec.pairs {
                matched[r].push(c);
            }
            for (r, cols) in matched.iter().enumerate() {
                if cols.is_empty() {
                    continue;
                }
                for j in 0..m {
                    if !cols.contains(&j) {
                        out[[r, j]] = penalty;
                    }
                }
            }
        }
        SupervisionMode::DownscaleMatched => {
            let offset = -(1.0 - spec.scale) * base_scale;
            for &(r, c) in &spec.pairs {
                out[[r, c]] = offset;
            }
        }
    }
    Ok(out)
}

/// Block means of the sample coupling over group assignments: entry (g, h)
/// is the mean of `Γ` over rows in group g and columns in group h.
pub fn aggregate_coupling_by_group(
    gamma_s: &Coupling,
    groups_x: &[usize],
    groups_y: &[usize],
) -> Result<Array2<f64>> {
    let g = gamma_s.values();
    let (n, m) = g.dim();
    if groups_x.len() != n || groups_y.len() != m {
        return Err(AgwError::dims(format!(
            "coupling is {n}x{m} but groups have lengths {} and {}",
            groups_x.len(),
            groups_y.len()
        )));
    }
    let n_groups = 1 + *groups_x.iter().max().unwrap();
    let m_groups = 1 + *groups_y.iter().max().unwrap();
    let mut sums = Array2::zeros((n_groups, m_groups));
    let mut counts = Array2::<f64>::zeros((n_groups, m_groups));
    for i in 0..n {
        for j in 0..m {
            sums[[groups_x[i], groups_y[j]]] += g[[i, j]];
            counts[[groups_x[i], groups_y[j]]] += 1.0;
        }
    }
    for (s, c) in sums.iter_mut().zip(counts.iter()) {
        if *c > 0.0 {
            *s /= c;
        }
    }
    Ok(sums)
}

/// Fraction of row groups whose strongest aggregated alignment is their
/// designated partner.
pub fn group_match_accuracy(aggregated: &Array2<f64>, partner: &[usize]) -> Result<f64> {
    let (g, h) = aggregated.dim();
    if partner.len() != g {
        return Err(AgwError::dims(format!(
            "aggregated matrix has {g} row groups but {} partners given",
            partner.len()
        )));
    }
    if partner.iter().any(|&p| p >= h) {
        return Err(AgwError::invalid("partner index out of range"));
    }
    let hits = (0..g)
        .filter(|&gi| argmax_lowest_tie(aggregated.row(gi).iter().copied()) == partner[gi])
        .count();
    Ok(hits as f64 / g as f64)
}
