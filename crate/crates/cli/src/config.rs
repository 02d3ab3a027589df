//! Experiment configuration: JSON files with desk-scale defaults and the
//! optional `--paper-scale` preset.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Which optimizer a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Anneal,
    Pimc,
    Lasso,
    Ridge,
    Brute,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Anneal => "anneal",
            Solver::Pimc => "pimc",
            Solver::Lasso => "lasso",
            Solver::Ridge => "ridge",
            Solver::Brute => "brute",
        }
    }

    /// Bit-encoded solvers assemble a QUBO; continuous ones fit directly.
    pub fn is_encoded(&self) -> bool {
        matches!(self, Solver::Anneal | Solver::Pimc | Solver::Brute)
    }
}

/// Synthetic event-set parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EventParams {
    pub n_events: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub pt_total: f64,
    pub angular_scale: f64,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams { n_events: 100, m_min: 2, m_max: 12, pt_total: 100.0, angular_scale: 0.4 }
    }
}

/// Population-annealing schedule parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealParams {
    pub beta_0: f64,
    pub beta_l: f64,
    pub steps: usize,
    pub r0: usize,
    pub sweeps_per_step: usize,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams { beta_0: 10.0, beta_l: 1e8, steps: 2048, r0: 256, sweeps_per_step: 1 }
    }
}

/// PIMC schedule parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PimcParams {
    pub p_slices: usize,
    pub steps: usize,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub j_start: f64,
    pub j_end: f64,
    pub r0: usize,
    pub temperature: f64,
    pub sweeps_per_step: usize,
}

impl Default for PimcParams {
    fn default() -> Self {
        PimcParams {
            p_slices: 32,
            steps: 2048,
            gamma_start: 1.0,
            gamma_end: 0.0,
            j_start: 10.0,
            j_end: 1e8,
            r0: 64,
            temperature: 1.0,
            sweeps_per_step: 1,
        }
    }
}

fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-3, 10.0, 40)
}

/// `points` log-spaced values over [lo, hi], endpoints exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo * (ratio * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

fn default_runs() -> usize {
    10
}

fn default_seed() -> u64 {
    7
}

fn default_refine() -> bool {
    true
}

fn default_exponent_range() -> (i32, i32) {
    (-3, 2)
}

fn default_cross_penalty() -> f64 {
    2.0
}

fn default_true() -> bool {
    true
}

/// One experiment: relation, solver, encoding, λ grid, runs, seeds, events.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Table 1 relation label, "a" through "l".
    pub relation: String,
    pub solver: Solver,
    /// Encoding scheme: plain | l1_mod | l0_single | l0_double.
    /// Ignored by the continuous solvers (lasso, ridge).
    #[serde(default = "l0_double_name")]
    pub scheme: String,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_refine")]
    pub refine: bool,
    /// Apply the relation's restriction when generating events in-process.
    #[serde(default = "default_true")]
    pub apply_restriction: bool,
    #[serde(default)]
    pub events: EventParams,
    /// Optional pre-generated events file (JSONL); generated in-process when
    /// absent.
    #[serde(default)]
    pub events_file: Option<String>,
    #[serde(default)]
    pub anneal: AnnealParams,
    #[serde(default)]
    pub pimc: PimcParams,
    /// Power-of-two exponent range [i_min, i_max] of the value bits.
    #[serde(default = "default_exponent_range")]
    pub exponent_range: (i32, i32),
    #[serde(default = "default_cross_penalty")]
    pub cross_penalty: f64,
    /// Also dump the first grid point's assembled QUBO as problem.json.
    #[serde(default)]
    pub dump_problem: bool,
    /// Write per-(lambda, run) solver diagnostics CSVs.
    #[serde(default)]
    pub diagnostics: bool,
}

fn l0_double_name() -> String {
    "l0_double".into()
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.relation.len() != 1 || !("abcdefghijkl").contains(&self.relation) {
            return Err(CliError::config(format!(
                "relation must be a Table 1 label a-l, got {:?}",
                self.relation
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(CliError::config("lambda_grid must be non-empty"));
        }
        let mut prev = 0.0;
        for &l in &self.lambda_grid {
            if !(l.is_finite() && l > 0.0) {
                return Err(CliError::config(format!("lambda grid values must be > 0, got {l}")));
            }
            if l <= prev {
                return Err(CliError::config("lambda_grid must be strictly ascending"));
            }
            prev = l;
        }
        if self.runs < 1 {
            return Err(CliError::config("runs must be >= 1"));
        }
        if self.events.n_events < 1 {
            return Err(CliError::config("events.n_events must be >= 1"));
        }
        if self.events.m_min < 1 || self.events.m_min > self.events.m_max {
            return Err(CliError::config("events must satisfy 1 <= m_min <= m_max"));
        }
        if self.exponent_range.0 > self.exponent_range.1 {
            return Err(CliError::config("exponent_range must satisfy i_min <= i_max"));
        }
        efpqubo_core::encoding::Scheme::from_name(&self.scheme)
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(())
    }

    /// Switch to the paper's large-scale settings (§6 experiments).
    pub fn apply_paper_scale(&mut self) {
        self.events.n_events = 100_000;
        self.anneal.beta_l = 1e10;
        self.anneal.steps = 1 << 14;
        self.anneal.r0 = 1024;
        self.pimc.r0 = 1024;
    }

    pub fn relation_label(&self) -> char {
        self.relation.chars().next().unwrap()
    }
}

/// Load and validate a config file.
pub fn load_config(path: &std::path::Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        serde_json::from_str(r#"{"relation": "a", "solver": "anneal"}"#).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.scheme, "l0_double");
        assert_eq!(c.lambda_grid.len(), 40);
        assert!((c.lambda_grid[0] - 1e-3).abs() < 1e-18);
        assert_eq!(c.lambda_grid[39], 10.0);
        assert_eq!(c.runs, 10);
        assert!(c.refine);
        assert_eq!(c.events.n_events, 100);
        assert_eq!(c.anneal.r0, 256);
        assert_eq!(c.anneal.steps, 2048);
        c.validate().unwrap();
    }

    #[test]
    fn log_grid_ascending_and_bounded() {
        let g = log_grid(1e-3, 10.0, 40);
        for w in g.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[39], 10.0);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut c = minimal();
        c.relation = "z".into();
        assert!(c.validate().is_err());

        let mut c = minimal();
        c.lambda_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());

        let mut c = minimal();
        c.lambda_grid = vec![-1.0];
        assert!(c.validate().is_err());

        let mut c = minimal();
        c.scheme = "bogus".into();
        assert!(c.validate().is_err());

        let mut c = minimal();
        c.runs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn paper_scale_overrides() {
        let mut c = minimal();
        c.apply_paper_scale();
        assert_eq!(c.events.n_events, 100_000);
        assert_eq!(c.anneal.steps, 16384);
        assert_eq!(c.anneal.r0, 1024);
        assert!((c.anneal.beta_l - 1e10).abs() < 1.0);
    }
}
