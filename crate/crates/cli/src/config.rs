//! Experiment configuration: a single TOML file with nested sections, plus
//! command-line overrides.

use serde::Deserialize;
use std::path::PathBuf;

/// Errors that should terminate with the config exit code (2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Linear stiffness.
    #[serde(default = "default_k")]
    pub k: f64,
    /// Cubic stiffness coefficient.
    #[serde(default = "default_a")]
    pub a: f64,
    /// Mass count (chain only).
    #[serde(default = "default_n")]
    pub n: usize,
    /// Truss node natural positions `[x, y]`.
    pub nodes: Option<Vec<[f64; 2]>>,
    /// Truss edges as node index pairs.
    pub edges: Option<Vec<[usize; 2]>>,
    /// Truss fixed node indices.
    pub fixed: Option<Vec<usize>>,
    /// Truss node receiving the horizontal sweep force.
    pub force_node: Option<usize>,
}

fn default_k() -> f64 {
    10.0
}
fn default_a() -> f64 {
    3000.0
}
fn default_n() -> usize {
    8
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            k: default_k(),
            a: default_a(),
            n: default_n(),
            nodes: None,
            edges: None,
            fixed: None,
            force_node: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    /// "carleman" or "psc".
    #[serde(default = "default_closure")]
    pub closure: String,
    #[serde(default = "default_pivot")]
    pub pivot: f64,
    /// Truncation order of the lifted system.
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_closure() -> String {
    "carleman".into()
}
fn default_pivot() -> f64 {
    0.01
}
fn default_order() -> usize {
    5
}

impl Default for MethodSection {
    fn default() -> Self {
        Self {
            closure: default_closure(),
            pivot: default_pivot(),
            order: default_order(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_div_threshold")]
    pub divergence_threshold: f64,
    /// Horizon of the separate divergence-classification run for the spring
    /// sweep (unstable runs cross the threshold well after t_end = 1).
    #[serde(default = "default_div_horizon")]
    pub divergence_horizon: f64,
}

fn default_t_end() -> f64 {
    1.0
}
fn default_rel_tol() -> f64 {
    1e-8
}
fn default_abs_tol() -> f64 {
    1e-10
}
fn default_div_threshold() -> f64 {
    1e6
}
fn default_div_horizon() -> f64 {
    5.0
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            divergence_threshold: default_div_threshold(),
            divergence_horizon: default_div_horizon(),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    /// Explicit sweep values; overrides start/stop/step.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default)]
    pub svg: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_out_dir(),
            csv: true,
            svg: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    #[serde(default = "default_est_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_est_p")]
    pub p: Vec<usize>,
    /// Half-chain load amplitude used to build the force vector.
    #[serde(default = "default_est_f")]
    pub f: f64,
    #[serde(default = "default_t_end")]
    pub t: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Largest lifted dimension for which the norm is measured numerically.
    #[serde(default = "default_numeric_cap")]
    pub numeric_cap: usize,
}

fn default_est_n() -> Vec<usize> {
    vec![2, 4, 8]
}
fn default_est_p() -> Vec<usize> {
    vec![2, 3, 5]
}
fn default_est_f() -> f64 {
    0.3
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_numeric_cap() -> usize {
    equiflow::spectral::NUMERIC_CAP
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            n: default_est_n(),
            p: default_est_p(),
            f: default_est_f(),
            t: default_t_end(),
            epsilon: default_epsilon(),
            numeric_cap: default_numeric_cap(),
        }
    }
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        // toml errors carry line/column diagnostics in their Display output
        let cfg: FileConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.model.k <= 0.0 {
            return Err(ConfigError(format!(
                "[model] k must be positive (got {})",
                self.model.k
            )));
        }
        if self.model.a < 0.0 {
            return Err(ConfigError(format!(
                "[model] a must be nonnegative (got {})",
                self.model.a
            )));
        }
        // every model field here has degree 3, so blocks up to p + 2 feed
        // each retained block; anything below order 2 truncates the linear
        // part itself
        if self.method.order < 2 && self.model.a > 0.0 {
            return Err(ConfigError(format!(
                "[method] order must be at least the field degree minus 1 (= 2); got {}",
                self.method.order
            )));
        }
        match self.method.closure.as_str() {
            "carleman" | "psc" => {}
            other => {
                return Err(ConfigError(format!(
                    "[method] closure must be \"carleman\" or \"psc\" (got \"{other}\")"
                )))
            }
        }
        if self.integrator.t_end <= 0.0 {
            return Err(ConfigError("[integrator] t_end must be positive".into()));
        }
        if self.integrator.rel_tol <= 0.0 || self.integrator.abs_tol <= 0.0 {
            return Err(ConfigError("[integrator] tolerances must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_none() {
                if let (Some(start), Some(stop), Some(step)) = (sweep.start, sweep.stop, sweep.step)
                {
                    if step <= 0.0 || stop < start {
                        return Err(ConfigError(
                            "[sweep] requires step > 0 and stop >= start".into(),
                        ));
                    }
                } else {
                    return Err(ConfigError(
                        "[sweep] needs either values or start/stop/step".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sweep grid, falling back to the given default when no sweep section
    /// is present.
    pub fn sweep_values(&self, default: &[f64]) -> Vec<f64> {
        match &self.sweep {
            None => default.to_vec(),
            Some(s) => {
                if let Some(values) = &s.values {
                    values.clone()
                } else {
                    let (start, stop, step) =
                        (s.start.unwrap(), s.stop.unwrap(), s.step.unwrap());
                    let count = ((stop - start) / step).round() as usize;
                    (0..=count).map(|i| start + step * i as f64).collect()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FileConfig, ConfigError> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.model.k, 10.0);
        assert_eq!(cfg.model.a, 3000.0);
        assert_eq!(cfg.model.n, 8);
        assert_eq!(cfg.method.closure, "carleman");
        assert_eq!(cfg.method.order, 5);
        assert_eq!(cfg.integrator.t_end, 1.0);
        assert!(cfg.output.csv && !cfg.output.svg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse("[model]\nstiffness = 3.0\n").is_err());
        assert!(parse("[typo]\nk = 1.0\n").is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(parse("[model]\nk = 0.0\n").is_err());
        assert!(parse("[model]\na = -1.0\n").is_err());
        assert!(parse("[method]\nclosure = \"exact\"\n").is_err());
        assert!(parse("[method]\norder = 1\n").is_err());
        assert!(parse("[integrator]\nt_end = 0.0\n").is_err());
        assert!(parse("[integrator]\nrel_tol = -1e-8\n").is_err());
    }

    #[test]
    fn linear_model_allows_order_one() {
        let cfg = parse("[model]\na = 0.0\n[method]\norder = 1\n").unwrap();
        assert_eq!(cfg.method.order, 1);
    }

    #[test]
    fn sweep_grid_from_start_stop_step() {
        let cfg = parse("[sweep]\nstart = 0.0\nstop = 2.0\nstep = 0.5\n").unwrap();
        assert_eq!(cfg.sweep_values(&[]), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn explicit_sweep_values_win() {
        let cfg =
            parse("[sweep]\nstart = 0.0\nstop = 1.0\nstep = 0.5\nvalues = [0.3, 0.9]\n").unwrap();
        assert_eq!(cfg.sweep_values(&[]), vec![0.3, 0.9]);
    }

    #[test]
    fn sweep_needs_a_full_range_or_values() {
        assert!(parse("[sweep]\nstart = 0.0\nstop = 1.0\n").is_err());
        assert!(parse("[sweep]\nstart = 1.0\nstop = 0.0\nstep = 0.5\n").is_err());
        assert!(parse("[sweep]\nstart = 0.0\nstop = 1.0\nstep = -0.5\n").is_err());
    }

    #[test]
    fn missing_sweep_uses_default_grid() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.sweep_values(&[0.3, 0.9]), vec![0.3, 0.9]);
    }
}
