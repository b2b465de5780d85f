//! `agw align`: solve, project the source into the target space, and score
//! the alignment with FOSCTTM and matching accuracy.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use ndarray::Array2;

use agw::core::DataMatrix;
use agw::tasks::{
    aggregate_coupling_by_group, barycentric_project, foscttm, group_match_accuracy,
    matching_accuracy, LabelVector,
};

use super::{report_solver_fields, SolveArgs, SolveInputs, EXIT_NOT_CONVERGED};
use crate::io::{read_labels_file, read_pairs_file, write_matrix_file};
use crate::report::Report;

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Correspondence file with one `i,j` row per known match; defaults to
    /// the identity (requires equal sample counts).
    #[arg(long)]
    pub pairs: Option<PathBuf>,

    /// Class labels for X rows (enables label-level matching accuracy).
    #[arg(long)]
    pub labels_x: Option<PathBuf>,

    /// Class labels for Y rows.
    #[arg(long)]
    pub labels_y: Option<PathBuf>,

    /// Group ids for X rows (enables group-aggregated coupling output).
    #[arg(long)]
    pub groups_x: Option<PathBuf>,

    /// Group ids for Y rows.
    #[arg(long)]
    pub groups_y: Option<PathBuf>,
}

pub fn run(args: &AlignArgs) -> Result<i32> {
    let inputs = SolveInputs::resolve(&args.solve)?;
    let solve = inputs.solve(None)?;
    let n = inputs.x.n_samples();
    let m = inputs.y.n_samples();

    // true match of X row i is Y row correspondence[i]
    let correspondence: Vec<usize> = match &args.pairs {
        Some(path) => {
            let pairs = read_pairs_file(path)?;
            if pairs.len() != n {
                bail!(
                    "correspondence file has {} rows but X has {n} samples",
                    pairs.len()
                );
            }
            let mut c = vec![usize::MAX; n];
            for (i, j) in pairs {
                if i >= n || j >= m {
                    bail!("correspondence ({i},{j}) out of range for {n}x{m}");
                }
                if c[i] != usize::MAX {
                    bail!("duplicate correspondence for sample {i}");
                }
                c[i] = j;
            }
            c
        }
        None => {
            if n != m {
                bail!(
                    "identity correspondence needs equal sample counts ({n} vs {m}); pass --pairs"
                );
            }
            (0..n).collect()
        }
    };

    let projected = barycentric_project(&solve.sample_coupling, &inputs.y)?;
    let matched_targets = DataMatrix::new(Array2::from_shape_fn(
        (n, inputs.y.n_features()),
        |(i, c)| inputs.y.values()[[correspondence[i], c]],
    ))?;
    let fosc = foscttm(&projected, &matched_targets)?;

    // correspondence-level accuracy through the label machinery: each X row
    // is its own class, Y rows inherit the class of the row they are matched
    // to (unmatched rows stay unlabeled)
    let labels_x = LabelVector::new((0..n as i64).collect(), n)?;
    let mut y_labels = vec![-1i64; m];
    for (i, &j) in correspondence.iter().enumerate() {
        y_labels[j] = i as i64;
    }
    let labels_y = LabelVector::new(y_labels, n)?;
    let accuracy = matching_accuracy(&solve.sample_coupling, &labels_x, &labels_y)?;

    let label_accuracy = match (&args.labels_x, &args.labels_y) {
        (Some(lx), Some(ly)) => {
            let raw_x = read_labels_file(lx)?;
            let raw_y = read_labels_file(ly)?;
            let k = class_count(&raw_x, &raw_y)?;
            Some(matching_accuracy(
                &solve.sample_coupling,
                &LabelVector::new(raw_x, k)?,
                &LabelVector::new(raw_y, k)?,
            )?)
        }
        (None, None) => None,
        _ => bail!("--labels-x and --labels-y must be given together"),
    };

    let groups = match (&args.groups_x, &args.groups_y) {
        (Some(gx), Some(gy)) => {
            let gx = read_group_ids(gx)?;
            let gy = read_group_ids(gy)?;
            let agg = aggregate_coupling_by_group(&solve.sample_coupling, &gx, &gy)?;
            let accuracy = if agg.nrows() == agg.ncols() {
                let partner: Vec<usize> = (0..agg.nrows()).collect();
                Some(group_match_accuracy(&agg, &partner)?)
            } else {
                None
            };
            Some((agg, accuracy))
        }
        (None, None) => None,
        _ => bail!("--groups-x and --groups-y must be given together"),
    };

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_matrix_file(
        &args.out.join("sample_coupling.agw"),
        solve.sample_coupling.values(),
    )?;
    if let Some(fc) = &solve.feature_coupling {
        write_matrix_file(&args.out.join("feature_coupling.agw"), fc.values())?;
    }
    write_matrix_file(&args.out.join("projected.agw"), projected.values())?;

    let mut report = Report::new();
    report_solver_fields(&mut report, &inputs, &solve);
    report.f64("foscttm", fosc);
    report.f64("matching_accuracy", accuracy);
    if let Some(acc) = label_accuracy {
        report.f64("label_matching_accuracy", acc);
    }
    if let Some((agg, group_acc)) = &groups {
        write_matrix_file(&args.out.join("group_coupling.agw"), agg)?;
        if let Some(acc) = group_acc {
            report.f64("group_match_accuracy", *acc);
        }
    }
    if inputs.timing {
        report.f64("wall_time_seconds", solve.wall_time_seconds);
    }
    let rendered = report.render();
    fs::write(args.out.join("report.txt"), &rendered)?;
    print!("{rendered}");

    Ok(if solve.converged {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn read_group_ids(path: &Path) -> Result<Vec<usize>> {
    let labels = read_labels_file(path)?;
    labels
        .into_iter()
        .map(|l| usize::try_from(l).map_err(|_| anyhow::anyhow!("group ids must be >= 0, got {l}")))
        .collect()
}

/// Shared class count for two label files; both sides must use the same
/// number of classes.
pub fn class_count(a: &[i64], b: &[i64]) -> Result<usize> {
    let max_a = a.iter().copied().max().unwrap_or(-1);
    let max_b = b.iter().copied().max().unwrap_or(-1);
    if max_a < 0 || max_b < 0 {
        bail!("label files need at least one labeled entry");
    }
    if max_a != max_b {
        bail!(
            "label files disagree on the class count ({} vs {})",
            max_a + 1,
            max_b + 1
        );
    }
    Ok((max_a + 1) as usize)
}
