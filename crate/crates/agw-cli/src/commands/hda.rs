//! `agw hda`: heterogeneous domain adaptation. Aligns a labeled source
//! domain with a target domain, optionally seeding the sample step with a
//! penalize-mismatch supervision cost built from a few revealed target
//! labels, then predicts target labels by propagation through the coupling.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use agw::core::Coupling;
use agw::quad::coot_linearized_for_samples;
use agw::tasks::{
    build_supervision_cost, label_propagation, LabelVector, SupervisionMode, SupervisionSpec,
};

use super::align::class_count;
use super::{report_solver_fields, Method, SolveArgs, SolveInputs, EXIT_NOT_CONVERGED};
use crate::io::{read_labels_file, write_matrix_file};
use crate::report::Report;

#[derive(Debug, Args)]
pub struct HdaArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Class labels of the source rows (fully labeled).
    #[arg(long)]
    pub source_labels: PathBuf,

    /// Ground-truth class labels of the target rows (used for seeding the
    /// semi-supervised cost and for scoring).
    #[arg(long)]
    pub target_labels: PathBuf,

    /// Labeled targets revealed per class; 0 runs unsupervised.
    #[arg(long, default_value_t = 0)]
    pub supervised_per_class: usize,

    /// Mismatch penalty override; defaults to 100x the mean absolute
    /// sample-step cost at initialization.
    #[arg(long)]
    pub penalty: Option<f64>,
}

pub fn run(args: &HdaArgs) -> Result<i32> {
    let inputs = SolveInputs::resolve(&args.solve)?;
    let n = inputs.x.n_samples();
    let m = inputs.y.n_samples();

    let y_source = read_labels_file(&args.source_labels)?;
    let y_target = read_labels_file(&args.target_labels)?;
    if y_source.len() != n {
        bail!("source labels have length {}, expected {n}", y_source.len());
    }
    if y_target.len() != m {
        bail!("target labels have length {}, expected {m}", y_target.len());
    }
    if y_source.iter().any(|&l| l < 0) {
        bail!("source labels must be fully labeled");
    }
    let k = class_count(&y_source, &y_target)?;
    let source = LabelVector::new(y_source.clone(), k)?;

    // reveal t target labels per class, seeded for reproducibility
    let t = args.supervised_per_class;
    let mut revealed = vec![false; m];
    if t > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(inputs.seed);
        for class in 0..k as i64 {
            let mut members: Vec<usize> = (0..m).filter(|&j| y_target[j] == class).collect();
            members.shuffle(&mut rng);
            for &j in members.iter().take(t) {
                revealed[j] = true;
            }
        }
    }

    let supervision = if t > 0 {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for j in (0..m).filter(|&j| revealed[j]) {
            for i in (0..n).filter(|&i| y_source[i] == y_target[j]) {
                pairs.push((i, j));
            }
        }
        let spec = SupervisionSpec {
            pairs,
            mode: SupervisionMode::PenalizeMismatch,
            penalty: args.penalty,
            scale: 1.0,
        };
        // scale reference: mean |cost| of the initial sample linearization
        let product_v = Coupling::product(&inputs.muf, &inputs.nuf);
        let ls = coot_linearized_for_samples(&inputs.x, &inputs.y, product_v.values())?;
        let base_scale = ls.iter().map(|v| v.abs()).sum::<f64>() / ls.len() as f64;
        Some(build_supervision_cost(n, m, &spec, base_scale)?)
    } else {
        None
    };

    let solve = inputs.solve(supervision.as_ref())?;
    let predictions = label_propagation(&solve.sample_coupling, &source, k)?;

    let mut correct_all = 0usize;
    let mut correct_unlabeled = 0usize;
    let mut unlabeled_total = 0usize;
    for j in 0..m {
        let hit = predictions.labels()[j] == y_target[j];
        if hit {
            correct_all += 1;
        }
        if !revealed[j] {
            unlabeled_total += 1;
            if hit {
                correct_unlabeled += 1;
            }
        }
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_matrix_file(
        &args.out.join("sample_coupling.agw"),
        solve.sample_coupling.values(),
    )?;
    if let Some(fc) = &solve.feature_coupling {
        write_matrix_file(&args.out.join("feature_coupling.agw"), fc.values())?;
    }

    let mut report = Report::new();
    report_solver_fields(&mut report, &inputs, &solve);
    report.usize("classes", k);
    report.usize("supervised_per_class", t);
    report.usize("revealed_targets", revealed.iter().filter(|&&r| r).count());
    if inputs.method == Method::Gw && t > 0 {
        // the supervision term is weighted by 1 - alpha and vanishes for GW
        report.str("note", "supervision has no effect at alpha = 1 (pure GW)");
    }
    report.f64("accuracy_all_targets", correct_all as f64 / m as f64);
    if unlabeled_total > 0 {
        report.f64(
            "accuracy_unlabeled_targets",
            correct_unlabeled as f64 / unlabeled_total as f64,
        );
    } else {
        report.str("accuracy_unlabeled_targets", "absent");
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
