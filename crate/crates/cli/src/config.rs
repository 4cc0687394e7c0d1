//! Effective run configuration: flags override file values override defaults.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    /// Aspect ratio for single-`K` commands.
    pub k: f64,
    /// Grid for sweeps and the Hausdorff report.
    pub k_grid: Vec<f64>,
    /// Sweep behind the limit fit.
    pub fit_grid: Vec<f64>,
    pub tol_solver: f64,
    pub tol_quad: f64,
    pub tol_track: f64,
    pub theta_max: f64,
    pub strip_depth: f64,
    /// Cloud points per unit length.
    pub density: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
    /// Also draw the limit set when rendering.
    pub render_limit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            k: 2.0,
            k_grid: (2..=6).map(|n| 10f64.powi(n)).collect(),
            fit_grid: (1..=8).map(|n| 10f64.powi(n)).collect(),
            tol_solver: 1e-10,
            tol_quad: 1e-13,
            tol_track: 1e-9,
            theta_max: 8.0 * PI,
            strip_depth: 1e12,
            density: 500.0,
            out: PathBuf::from("out"),
            seed: 0,
            format: Format::Text,
            render_limit: false,
        }
    }
}

/// Values read from a configuration file; absent keys keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<f64>,
    pub k_grid: Option<Vec<f64>>,
    pub fit_grid: Option<Vec<f64>>,
    pub tol_solver: Option<f64>,
    pub tol_quad: Option<f64>,
    pub tol_track: Option<f64>,
    pub theta_max: Option<f64>,
    pub strip_depth: Option<f64>,
    pub density: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub render_limit: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set here replace those of `base`.
    pub fn apply(self, base: &mut RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { base.$f = v; })*};
        }
        take!(
            k,
            k_grid,
            fit_grid,
            tol_solver,
            tol_quad,
            tol_track,
            theta_max,
            strip_depth,
            density,
            out,
            seed,
            format,
            render_limit
        );
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("tol-solver", self.tol_solver),
            ("tol-quad", self.tol_quad),
            ("tol-track", self.tol_track),
            ("theta-max", self.theta_max),
            ("strip-depth", self.strip_depth),
            ("density", self.density),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(CliError::Usage(format!(
                "--k must be a finite value >= 1, got {}",
                self.k
            )));
        }
        for (name, grid) in [("k-grid", &self.k_grid), ("fit-grid", &self.fit_grid)] {
            if grid.is_empty() || grid.iter().any(|&k| !(k >= 1.0 && k.is_finite())) {
                return Err(CliError::Usage(format!("--{name} needs finite values >= 1")));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Usage(format!(
                    "--{name} must be sorted ascending without repeats"
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json))
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.density
    }
}

/// Number with an optional `pi` suffix, as in `8pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix("pi") {
        Some("") => ("1", PI),
        Some(n) => (n, PI),
        None => (s, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| format!("expected a number or a multiple of pi, got {s:?}"))
}
