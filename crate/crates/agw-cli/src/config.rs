//! Run configuration files: TOML carrying solver settings, data paths,
//! metric choices and supervision pairs. Unknown keys are rejected, and
//! every referenced path is resolved (relative to the config file) and
//! checked for existence before any solving starts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub supervision: Option<SupervisionSection>,
    #[serde(default)]
    pub metrics: MetricsSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub eps_s: Option<f64>,
    pub eps_v: Option<f64>,
    pub max_bcd_iters: Option<usize>,
    pub max_inner_iters: Option<usize>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
    pub mu: Option<PathBuf>,
    pub nu: Option<PathBuf>,
    pub muf: Option<PathBuf>,
    pub nuf: Option<PathBuf>,
    pub metric: Option<String>,
    pub skip_header: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SupervisionSection {
    pub pairs: Vec<(usize, usize)>,
    pub mode: Option<String>,
    pub penalty: Option<f64>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub foscttm: Option<bool>,
    pub pairs_file: Option<PathBuf>,
    pub labels_x: Option<PathBuf>,
    pub labels_y: Option<PathBuf>,
}

impl RunConfig {
    /// Parses the file, anchors its relative paths at the config directory,
    /// and verifies each one exists.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base)?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) -> anyhow::Result<()> {
        let anchor = |p: &mut PathBuf| -> anyhow::Result<()> {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                anyhow::bail!("configured path does not exist: {}", p.display());
            }
            Ok(())
        };
        for slot in [
            &mut self.data.x,
            &mut self.data.y,
            &mut self.data.mu,
            &mut self.data.nu,
            &mut self.data.muf,
            &mut self.data.nuf,
            &mut self.metrics.pairs_file,
            &mut self.metrics.labels_x,
            &mut self.metrics.labels_y,
        ]
        .into_iter()
        .flatten()
        {
            anchor(slot)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = r#"
            [solver]
            method = "agw"
            alpha = 0.3
            eps_s = 0.01
            seed = 7

            [data]
            metric = "knn:5"
            skip_header = true

            [supervision]
            pairs = [[0, 1], [2, 2]]
            mode = "penalize_mismatch"
            penalty = 50.0

            [metrics]
            foscttm = true
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(config.solver.method.as_deref(), Some("agw"));
        assert_eq!(config.solver.alpha, Some(0.3));
        assert_eq!(config.supervision.unwrap().pairs, vec![(0, 1), (2, 2)]);
        assert_eq!(config.data.metric.as_deref(), Some("knn:5"));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("[solver]\nalhpa = 0.5\n").is_err());
        assert!(toml::from_str::<RunConfig>("[extra]\nx = 1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[data]\npath = \"x.csv\"\n").is_err());
    }

    #[test]
    fn load_rejects_missing_paths() {
        let dir = std::env::temp_dir().join("agw_config_test_missing");
        std::fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("run.toml");
        std::fs::write(&config_path, "[data]\nx = \"nope.csv\"\n").unwrap();
        assert!(RunConfig::load(&config_path).is_err());
    }
}
