//! `agw prep`: normalization, distance-matrix construction and format
//! conversion for matrix files.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};

use agw::core::DataMatrix;
use agw::preprocess::unit_normalize;

use super::parse_metric;
use crate::io::{matrix_to_binary, matrix_to_text, read_matrix_file};
use agw::preprocess::build_distance_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    /// Input matrix (text or binary, sniffed).
    #[arg(long = "in")]
    pub input: PathBuf,

    /// Output matrix file.
    #[arg(long)]
    pub out: PathBuf,

    /// Row normalization applied before any distance construction.
    #[arg(long)]
    pub normalize: Option<Normalize>,

    /// Produce a distance matrix instead of passing data through:
    /// euclidean, cosine, knn:<k> or knn:<k>:cosine.
    #[arg(long)]
    pub metric: Option<String>,

    /// Skip one header line when reading delimited text.
    #[arg(long)]
    pub skip_header: bool,

    /// Output encoding; defaults to csv/txt/tsv extensions -> text,
    /// anything else -> binary.
    #[arg(long)]
    pub format: Option<Format>,
}

pub fn run(args: &PrepArgs) -> Result<i32> {
    let raw = read_matrix_file(&args.input, args.skip_header)?;
    let mut data = DataMatrix::new(raw).map_err(|e| anyhow::anyhow!("{e}"))?;
    if args.normalize == Some(Normalize::Unit) {
        data = unit_normalize(&data);
    }
    let out_matrix = match &args.metric {
        None => data.values().clone(),
        Some(text) => {
            let metric = parse_metric(text)?;
            build_distance_matrix(&data, metric)
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .values()
                .clone()
        }
    };

    let as_text = match args.format {
        Some(Format::Csv) => true,
        Some(Format::Bin) => false,
        None => matches!(
            args.out.extension().and_then(|e| e.to_str()),
            Some("csv") | Some("txt") | Some("tsv")
        ),
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            bail!("output directory {} does not exist", parent.display());
        }
    }
    if as_text {
        fs::write(&args.out, matrix_to_text(&out_matrix))?;
    } else {
        fs::write(&args.out, matrix_to_binary(&out_matrix))?;
    }
    Ok(0)
}
