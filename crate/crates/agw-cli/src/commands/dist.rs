//! `agw dist`: solve one instance and write couplings plus a report.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;

use agw::core::SolveReport;

use super::{report_solver_fields, SolveArgs, SolveInputs, EXIT_NOT_CONVERGED};
use crate::io::write_matrix_file;
use crate::report::Report;

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &DistArgs) -> Result<i32> {
    let inputs = SolveInputs::resolve(&args.solve)?;
    let report = inputs.solve(None)?;
    write_outputs(&args.out, &inputs, &report)?;
    Ok(if report.converged {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn write_outputs(out: &Path, inputs: &SolveInputs, solve: &SolveReport) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write_matrix_file(
        &out.join("sample_coupling.agw"),
        solve.sample_coupling.values(),
    )?;
    if let Some(fc) = &solve.feature_coupling {
        write_matrix_file(&out.join("feature_coupling.agw"), fc.values())?;
    }

    let mut report = Report::new();
    report_solver_fields(&mut report, inputs, solve);
    if inputs.timing {
        report.f64("wall_time_seconds", solve.wall_time_seconds);
    }
    let rendered = report.render();
    fs::write(out.join("report.txt"), &rendered)?;
    print!("{rendered}");
    Ok(())
}
