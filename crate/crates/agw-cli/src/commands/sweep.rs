//! `agw sweep`: cross-product hyperparameter grid execution with an
//! optional worker pool. Rows are emitted in grid order whatever the worker
//! count, so tables are byte-reproducible.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use ndarray::Array2;

use agw::core::{DistanceMatrix, SolveReport};
use agw::tasks::{barycentric_project, foscttm, matching_accuracy, LabelVector};

use super::{Method, SolveArgs, SolveInputs};
use crate::io::{format_f64, read_pairs_file};
use crate::report::Report;

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Alpha grid (comma-separated); default 0.1..0.9 in steps of 0.1.
    #[arg(long)]
    pub alphas: Option<String>,

    /// Sample entropic grid (comma-separated); default
    /// 5e-4,1e-3,5e-3,1e-2,5e-2,1e-1.
    #[arg(long)]
    pub eps_s_grid: Option<String>,

    /// Feature entropic grid (comma-separated); same default.
    #[arg(long)]
    pub eps_v_grid: Option<String>,

    /// Worker pool size; AGW_THREADS caps it when set.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    /// Select the best row by this column (objective, foscttm or accuracy).
    #[arg(long)]
    pub select: Option<String>,

    /// Correspondence file enabling foscttm/accuracy columns.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

const DEFAULT_EPS_GRID: [f64; 6] = [5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1];

struct RowResult {
    alpha: f64,
    eps_s: f64,
    eps_v: f64,
    outcome: Result<(SolveReport, Option<(f64, f64)>)>,
}

pub fn run(args: &SweepArgs) -> Result<i32> {
    let inputs = SolveInputs::resolve(&args.solve)?;

    let alphas = match (&args.alphas, inputs.method) {
        (Some(text), _) => parse_grid(text, "alphas")?,
        (None, Method::Agw) => (1..=9).map(|i| i as f64 / 10.0).collect(),
        (None, Method::Gw) => vec![1.0],
        (None, Method::Coot) => vec![0.0],
    };
    let eps_s_grid = match &args.eps_s_grid {
        Some(text) => parse_grid(text, "eps_s_grid")?,
        None => DEFAULT_EPS_GRID.to_vec(),
    };
    let eps_v_grid = match (&args.eps_v_grid, inputs.method) {
        (Some(text), _) => parse_grid(text, "eps_v_grid")?,
        (None, Method::Gw) => vec![0.0], // no feature coupling to regularize
        (None, _) => DEFAULT_EPS_GRID.to_vec(),
    };
    if alphas.is_empty() || eps_s_grid.is_empty() || eps_v_grid.is_empty() {
        bail!("hyperparameter grid is empty");
    }

    let n = inputs.x.n_samples();
    let m = inputs.y.n_samples();
    let correspondence: Option<Vec<usize>> = match &args.pairs {
        Some(path) => {
            let pairs = read_pairs_file(path)?;
            if pairs.len() != n {
                bail!("correspondence has {} rows, expected {n}", pairs.len());
            }
            let mut c = vec![usize::MAX; n];
            for (i, j) in pairs {
                if i >= n || j >= m {
                    bail!("correspondence ({i},{j}) out of range");
                }
                c[i] = j;
            }
            Some(c)
        }
        None if n == m => Some((0..n).collect()),
        None => None,
    };

    // distance matrices are grid-invariant; build them once
    let dists: Option<(DistanceMatrix, DistanceMatrix)> = if inputs.method == Method::Coot {
        None
    } else {
        Some(inputs.distance_matrices()?)
    };

    let mut grid: Vec<(f64, f64, f64)> = Vec::new();
    for &a in &alphas {
        for &es in &eps_s_grid {
            for &ev in &eps_v_grid {
                grid.push((a, es, ev));
            }
        }
    }

    let workers = effective_workers(args.workers)?;
    let run_row = |&(alpha, eps_s, eps_v): &(f64, f64, f64)| -> RowResult {
        let outcome = solve_row(
            &inputs,
            dists.as_ref(),
            correspondence.as_deref(),
            alpha,
            eps_s,
            eps_v,
        );
        RowResult {
            alpha,
            eps_s,
            eps_v,
            outcome,
        }
    };
    let rows: Vec<RowResult> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("cannot build worker pool")?;
        pool.install(|| {
            use rayon::prelude::*;
            grid.par_iter().map(run_row).collect()
        })
    } else {
        grid.iter().map(run_row).collect()
    };

    let with_metrics = correspondence.is_some();
    let mut table = String::new();
    table.push_str("alpha\teps_s\teps_v\tobjective\tconverged\titerations");
    if with_metrics {
        table.push_str("\tfoscttm\tmatching_accuracy");
    }
    table.push('\n');
    for row in &rows {
        match &row.outcome {
            Ok((report, metrics)) => {
                table.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    format_f64(row.alpha),
                    format_f64(row.eps_s),
                    format_f64(row.eps_v),
                    format_f64(report.final_objective),
                    report.converged,
                    report.bcd_iterations
                ));
                if with_metrics {
                    let (fosc, acc) = metrics.expect("metrics computed when correspondence known");
                    table.push_str(&format!("\t{}\t{}", format_f64(fosc), format_f64(acc)));
                }
                table.push('\n');
            }
            Err(e) => bail!(
                "grid point alpha={} eps_s={} eps_v={} failed: {e}",
                row.alpha,
                row.eps_s,
                row.eps_v
            ),
        }
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    fs::write(args.out.join("table.tsv"), &table)?;

    let mut summary = Report::new();
    summary
        .str("method", inputs.method.as_str())
        .str("metric", &super::describe_metric(inputs.metric))
        .usize("rows", rows.len())
        .usize("workers", workers);
    if let Some(select) = &args.select {
        let best = select_best(&rows, select, with_metrics)?;
        let row = &rows[best];
        summary.usize("best_row", best);
        summary.f64("best_alpha", row.alpha);
        summary.f64("best_eps_s", row.eps_s);
        summary.f64("best_eps_v", row.eps_v);
        if let Ok((report, metrics)) = &row.outcome {
            summary.f64("best_objective", report.final_objective);
            if let Some((fosc, acc)) = metrics {
                summary.f64("best_foscttm", *fosc);
                summary.f64("best_matching_accuracy", *acc);
            }
        }
    }
    let rendered = summary.render();
    fs::write(args.out.join("summary.txt"), &rendered)?;
    print!("{rendered}");
    Ok(0)
}

fn solve_row(
    inputs: &SolveInputs,
    dists: Option<&(DistanceMatrix, DistanceMatrix)>,
    correspondence: Option<&[usize]>,
    alpha: f64,
    eps_s: f64,
    eps_v: f64,
) -> Result<(SolveReport, Option<(f64, f64)>)> {
    let cfg = inputs
        .cfg
        .clone()
        .with_alpha(alpha)
        .with_entropy(eps_s, eps_v);
    let report = inputs.solve_with(&cfg, dists, None)?;
    let metrics = match correspondence {
        None => None,
        Some(c) => {
            let projected = barycentric_project(&report.sample_coupling, &inputs.y)?;
            let matched = agw::core::DataMatrix::new(Array2::from_shape_fn(
                (inputs.x.n_samples(), inputs.y.n_features()),
                |(i, col)| inputs.y.values()[[c[i], col]],
            ))?;
            let fosc = foscttm(&projected, &matched)?;
            let n = inputs.x.n_samples();
            let labels_x = LabelVector::new((0..n as i64).collect(), n)?;
            let mut y_labels = vec![-1i64; inputs.y.n_samples()];
            for (i, &j) in c.iter().enumerate() {
                y_labels[j] = i as i64;
            }
            let labels_y = LabelVector::new(y_labels, n)?;
            let acc = matching_accuracy(&report.sample_coupling, &labels_x, &labels_y)?;
            Some((fosc, acc))
        }
    };
    Ok((report, metrics))
}

fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        bail!("{what} grid is empty");
    }
    trimmed
        .split(',')
        .map(|field| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| anyhow::anyhow!("{what}: not a number: {field:?}"))
        })
        .collect()
}

fn effective_workers(requested: usize) -> Result<usize> {
    if requested == 0 {
        bail!("--workers must be >= 1");
    }
    let cap = match std::env::var("AGW_THREADS") {
        Ok(text) => text
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| anyhow::anyhow!("AGW_THREADS must be a positive integer"))?,
        Err(_) => usize::MAX,
    };
    Ok(requested.min(cap))
}

fn select_best(rows: &[RowResult], select: &str, with_metrics: bool) -> Result<usize> {
    let key = |row: &RowResult| -> Result<f64> {
        let (report, metrics) = row
            .outcome
            .as_ref()
            .map_err(|e| anyhow::anyhow!("row failed: {e}"))?;
        match select {
            "objective" => Ok(report.final_objective),
            "foscttm" => {
                if !with_metrics {
                    bail!("--select foscttm needs a correspondence (equal sizes or --pairs)");
                }
                Ok(metrics.expect("metrics present").0)
            }
            // accuracy is maximized: negate so lower is better
            "accuracy" => {
                if !with_metrics {
                    bail!("--select accuracy needs a correspondence");
                }
                Ok(-metrics.expect("metrics present").1)
            }
            other => bail!("unknown selection metric {other:?}"),
        }
    };
    let mut best = 0usize;
    let mut best_key = key(&rows[0])?;
    for (idx, row) in rows.iter().enumerate().skip(1) {
        let k = key(row)?;
        if k < best_key {
            best_key = k;
            best = idx;
        }
    }
    Ok(best)
}
