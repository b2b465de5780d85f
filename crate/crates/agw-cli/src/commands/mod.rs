//! Subcommand implementations and the options they share.

pub mod align;
pub mod dist;
pub mod hda;
pub mod prep;
pub mod sweep;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use ndarray::{Array1, Array2};

use agw::core::{uniform_hist, DataMatrix, DistanceMatrix, ProbVector, SolveReport, SolverConfig};
use agw::preprocess::{build_distance_matrix, BaseMetric, MetricKind};
use agw::solvers::{solve_agw, solve_coot, solve_gw};

use crate::config::RunConfig;
use crate::io::read_matrix_file;

/// Exit code for invalid inputs.
pub const EXIT_INVALID: i32 = 2;
/// Exit code when the solver did not converge (outputs are still written).
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gw,
    Coot,
    Agw,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gw => "gw",
            Method::Coot => "coot",
            Method::Agw => "agw",
        }
    }
}

/// Options common to every solving command. Explicit flags win over the
/// `--config` file, which wins over defaults.
#[derive(Debug, Args, Clone)]
pub struct SolveArgs {
    /// Solver: gw, coot or agw.
    #[arg(long, value_enum)]
    pub method: Option<Method>,

    /// Interpolation weight in [0,1] (agw only; 1 = GW, 0 = COOT).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Entropic strength on the sample coupling (0 = exact inner solver).
    #[arg(long)]
    pub eps_s: Option<f64>,

    /// Entropic strength on the feature coupling (0 = exact inner solver).
    #[arg(long)]
    pub eps_v: Option<f64>,

    /// Intra-domain metric: euclidean, cosine, knn:<k> or knn:<k>:cosine.
    #[arg(long)]
    pub metric: Option<String>,

    /// First-domain data matrix (rows = samples).
    #[arg(long)]
    pub x: Option<PathBuf>,

    /// Second-domain data matrix.
    #[arg(long)]
    pub y: Option<PathBuf>,

    /// Sample histogram over X rows (default uniform).
    #[arg(long)]
    pub mu: Option<PathBuf>,

    /// Sample histogram over Y rows (default uniform).
    #[arg(long)]
    pub nu: Option<PathBuf>,

    /// Feature histogram over X columns (default uniform).
    #[arg(long)]
    pub muf: Option<PathBuf>,

    /// Feature histogram over Y columns (default uniform).
    #[arg(long)]
    pub nuf: Option<PathBuf>,

    /// Skip one header line when reading delimited text matrices.
    #[arg(long)]
    pub skip_header: bool,

    #[arg(long)]
    pub max_bcd_iters: Option<usize>,

    #[arg(long)]
    pub max_inner_iters: Option<usize>,

    #[arg(long)]
    pub tol_abs: Option<f64>,

    #[arg(long)]
    pub tol_rel: Option<f64>,

    /// Seed for randomized drivers (supervision draws, subsampling).
    #[arg(long)]
    pub seed: Option<u64>,

    /// TOML run configuration; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Include wall-clock timing in the report file (breaks byte-level
    /// reproducibility of output files).
    #[arg(long)]
    pub timing: bool,
}

/// Parses `euclidean`, `cosine`, `knn:<k>` or `knn:<k>:<base>`.
pub fn parse_metric(text: &str) -> Result<MetricKind> {
    match text {
        "euclidean" => Ok(MetricKind::Euclidean),
        "cosine" => Ok(MetricKind::Cosine),
        _ => {
            let rest = text
                .strip_prefix("knn:")
                .ok_or_else(|| anyhow!("unknown metric {text:?} (euclidean, cosine, knn:<k>)"))?;
            let (k_text, base) = match rest.split_once(':') {
                Some((k, "euclidean")) => (k, BaseMetric::Euclidean),
                Some((k, "cosine")) => (k, BaseMetric::Cosine),
                Some((_, other)) => bail!("unknown kNN base metric {other:?}"),
                None => (rest, BaseMetric::Euclidean),
            };
            let k: usize = k_text
                .parse()
                .map_err(|_| anyhow!("invalid neighbor count in {text:?}"))?;
            Ok(MetricKind::KnnGeodesic { k, base })
        }
    }
}

pub fn describe_metric(kind: MetricKind) -> String {
    match kind {
        MetricKind::Euclidean => "euclidean".into(),
        MetricKind::Cosine => "cosine".into(),
        MetricKind::KnnGeodesic {
            k,
            base: BaseMetric::Euclidean,
        } => format!("knn:{k}"),
        MetricKind::KnnGeodesic {
            k,
            base: BaseMetric::Cosine,
        } => format!("knn:{k}:cosine"),
    }
}

/// Everything a solving command needs after flag/config resolution.
pub struct SolveInputs {
    pub method: Method,
    pub metric: MetricKind,
    pub x: DataMatrix,
    pub y: DataMatrix,
    pub mu: ProbVector,
    pub nu: ProbVector,
    pub muf: ProbVector,
    pub nuf: ProbVector,
    pub cfg: SolverConfig,
    pub seed: u64,
    pub timing: bool,
}

impl SolveInputs {
    pub fn resolve(args: &SolveArgs) -> Result<Self> {
        let config = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };

        let method = match (args.method, config.solver.method.as_deref()) {
            (Some(m), _) => m,
            (None, Some("gw")) => Method::Gw,
            (None, Some("coot")) => Method::Coot,
            (None, Some("agw")) | (None, None) => Method::Agw,
            (None, Some(other)) => bail!("unknown method {other:?} in config"),
        };

        let metric_text = args
            .metric
            .clone()
            .or_else(|| config.data.metric.clone())
            .unwrap_or_else(|| "euclidean".to_string());
        let metric = parse_metric(&metric_text)?;

        let skip_header = args.skip_header || config.data.skip_header.unwrap_or(false);
        let x_path = args
            .x
            .clone()
            .or_else(|| config.data.x.clone())
            .ok_or_else(|| anyhow!("no X matrix given (use --x or a config file)"))?;
        let y_path = args
            .y
            .clone()
            .or_else(|| config.data.y.clone())
            .ok_or_else(|| anyhow!("no Y matrix given (use --y or a config file)"))?;
        let x = DataMatrix::new(read_matrix_file(&x_path, skip_header)?)
            .with_context(|| format!("invalid X matrix {}", x_path.display()))?;
        let y = DataMatrix::new(read_matrix_file(&y_path, skip_header)?)
            .with_context(|| format!("invalid Y matrix {}", y_path.display()))?;

        let load_hist = |flag: &Option<PathBuf>,
                         from_config: &Option<PathBuf>,
                         len: usize,
                         what: &str|
         -> Result<ProbVector> {
            let path = flag.clone().or_else(|| from_config.clone());
            match path {
                None => Ok(uniform_hist(len).expect("positive length")),
                Some(p) => {
                    let raw = read_matrix_file(&p, false)?;
                    let vector = flatten_vector(&raw)
                        .ok_or_else(|| anyhow!("{}: {what} must be a vector", p.display()))?;
                    if vector.len() != len {
                        bail!(
                            "{}: {what} has length {}, expected {len}",
                            p.display(),
                            vector.len()
                        );
                    }
                    ProbVector::new(vector)
                        .map_err(|e| anyhow!("{}: invalid {what}: {e}", p.display()))
                }
            }
        };
        let mu = load_hist(&args.mu, &config.data.mu, x.n_samples(), "mu")?;
        let nu = load_hist(&args.nu, &config.data.nu, y.n_samples(), "nu")?;
        let muf = load_hist(&args.muf, &config.data.muf, x.n_features(), "muf")?;
        let nuf = load_hist(&args.nuf, &config.data.nuf, y.n_features(), "nuf")?;

        let alpha = args.alpha.or(config.solver.alpha).unwrap_or(match method {
            Method::Gw => 1.0,
            Method::Coot => 0.0,
            Method::Agw => 0.5,
        });
        let eps_s = args.eps_s.or(config.solver.eps_s).unwrap_or(0.0);
        let eps_v = args.eps_v.or(config.solver.eps_v).unwrap_or(0.0);
        let seed = args.seed.or(config.solver.seed).unwrap_or(1976);

        let mut cfg = SolverConfig::default()
            .with_alpha(alpha)
            .with_entropy(eps_s, eps_v);
        if let Some(v) = args.max_bcd_iters.or(config.solver.max_bcd_iters) {
            cfg.max_bcd_iters = v;
        }
        if let Some(v) = args.max_inner_iters.or(config.solver.max_inner_iters) {
            cfg.max_inner_iters = v;
        }
        if let Some(v) = args.tol_abs.or(config.solver.tol_abs) {
            cfg.tol_abs = v;
        }
        if let Some(v) = args.tol_rel.or(config.solver.tol_rel) {
            cfg.tol_rel = v;
        }
        cfg.seed = seed;
        cfg.validate().map_err(|e| anyhow!("{e}"))?;

        Ok(Self {
            method,
            metric,
            x,
            y,
            mu,
            nu,
            muf,
            nuf,
            cfg,
            seed,
            timing: args.timing,
        })
    }

    pub fn distance_matrices(&self) -> Result<(DistanceMatrix, DistanceMatrix)> {
        Ok((
            build_distance_matrix(&self.x, self.metric).map_err(|e| anyhow!("{e}"))?,
            build_distance_matrix(&self.y, self.metric).map_err(|e| anyhow!("{e}"))?,
        ))
    }

    /// Runs the selected solver. `supervision` needs the sample-coupling
    /// shape and only affects methods with a linear sample term (its weight
    /// is 1 - alpha, so pure GW ignores it).
    pub fn solve(&self, supervision: Option<&Array2<f64>>) -> Result<SolveReport> {
        self.solve_with(&self.cfg, None, supervision)
    }

    /// Variant taking a per-run configuration and optionally reusing
    /// prebuilt distance matrices (grid sweeps).
    pub fn solve_with(
        &self,
        cfg: &SolverConfig,
        dists: Option<&(DistanceMatrix, DistanceMatrix)>,
        supervision: Option<&Array2<f64>>,
    ) -> Result<SolveReport> {
        let needs_dists = !matches!((self.method, supervision), (Method::Coot, None));
        let owned = if needs_dists && dists.is_none() {
            Some(self.distance_matrices()?)
        } else {
            None
        };
        let dists = dists.or(owned.as_ref());
        let report = match (self.method, supervision) {
            (Method::Gw, _) => {
                let (dx, dy) = dists.expect("distances built above");
                solve_gw(dx, dy, &self.mu, &self.nu, cfg)?
            }
            (Method::Coot, None) => solve_coot(
                &self.x, &self.y, &self.mu, &self.nu, &self.muf, &self.nuf, cfg,
            )?,
            (Method::Coot, Some(s)) => {
                let (dx, dy) = dists.expect("distances built above");
                let cfg = cfg.clone().with_alpha(0.0);
                solve_agw(
                    dx,
                    dy,
                    &self.x,
                    &self.y,
                    &self.mu,
                    &self.nu,
                    &self.muf,
                    &self.nuf,
                    &cfg,
                    Some(s),
                )?
            }
            (Method::Agw, s) => {
                let (dx, dy) = dists.expect("distances built above");
                solve_agw(
                    dx, dy, &self.x, &self.y, &self.mu, &self.nu, &self.muf, &self.nuf, cfg, s,
                )?
            }
        };
        Ok(report)
    }
}

fn flatten_vector(raw: &Array2<f64>) -> Option<Array1<f64>> {
    let (n, m) = raw.dim();
    if n == 1 {
        Some(raw.row(0).to_owned())
    } else if m == 1 {
        Some(raw.column(0).to_owned())
    } else {
        None
    }
}

/// Writes the standard solver fields shared by every report.
pub fn report_solver_fields(
    report: &mut crate::report::Report,
    inputs: &SolveInputs,
    solve: &SolveReport,
) {
    report
        .str("method", inputs.method.as_str())
        .f64("alpha", inputs.cfg.alpha)
        .f64("eps_s", inputs.cfg.eps_s)
        .f64("eps_v", inputs.cfg.eps_v)
        .str("metric", &describe_metric(inputs.metric))
        .usize("n", inputs.x.n_samples())
        .usize("m", inputs.y.n_samples())
        .usize("d_x", inputs.x.n_features())
        .usize("d_y", inputs.y.n_features())
        .usize("seed", inputs.seed as usize)
        .f64("final_objective", solve.final_objective)
        .bool("converged", solve.converged)
        .usize("bcd_iterations", solve.bcd_iterations)
        .f64_array("objective_trajectory", &solve.objective_trajectory);
}
