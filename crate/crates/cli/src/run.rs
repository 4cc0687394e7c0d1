//! Commands, the run report and its file manifest.

use std::fs;
use std::path::{Path, PathBuf};

use affine_limit::limit::{convergence_report, image_c_infinity, image_c_k, ReportConfig, Verdict};
use affine_limit::solver::{
    continuation_sweep, extract_limit, trivial_solution, AsymptoticFit, FitConfig, Solution, Sweep,
};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::checks::{sampling, solver_config, Suite};
use crate::config::{parse_angle, FileConfig, Format, RunConfig};
use crate::svg::{self, Layer};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "affine-limit",
    version,
    about = "Glued affine surfaces, their uniformization and flat limit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file with configuration values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Comma-separated ascending list of aspect ratios.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k_grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub tol_solver: Option<f64>,
    #[arg(long, global = true)]
    pub tol_quad: Option<f64>,
    #[arg(long, global = true)]
    pub tol_track: Option<f64>,
    /// Spiral truncation, in radians or as a multiple like `8pi`.
    #[arg(long, global = true, value_parser = parse_angle)]
    pub theta_max: Option<f64>,
    #[arg(long, global = true)]
    pub strip_depth: Option<f64>,
    /// Cloud points per unit length.
    #[arg(long, global = true)]
    pub density: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve for the prevertex at one aspect ratio.
    Solve,
    /// Continuation sweep over the grid, with the limit fit.
    Sweep,
    /// Draw the image of the rectangle, optionally with the limit set.
    Render {
        #[arg(long)]
        limit: bool,
    },
    /// Build the limit set.
    Limit,
    /// Hausdorff convergence report.
    Hausdorff,
    /// Run the full property suite.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::Render { .. } => "render",
            Self::Limit => "limit",
            Self::Hausdorff => "hausdorff",
            Self::Verify => "verify",
        }
    }
}

impl Cli {
    pub fn effective_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            command: self.command.name().to_string(),
            ..RunConfig::default()
        };
        if let Some(path) = &self.config {
            FileConfig::load(path)?.apply(&mut cfg);
        }
        macro_rules! flag {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$f = v; })*};
        }
        flag!(
            k,
            k_grid,
            tol_solver,
            tol_quad,
            tol_track,
            theta_max,
            strip_depth,
            density,
            out,
            seed,
            format
        );
        if let Command::Render { limit: true } = self.command {
            cfg.render_limit = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub name: String,
    pub status: Status,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    /// Absent for the report itself.
    pub bytes: Option<usize>,
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub config: RunConfig,
    pub config_hash: String,
    pub status: Status,
    pub first_failure: Option<String>,
    pub steps: Vec<Step>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }
}

pub const REPORT_FILE: &str = "report.json";

struct Output {
    dir: PathBuf,
    manifest: Vec<ManifestEntry>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.manifest.push(ManifestEntry {
            path: name.to_string(),
            bytes: Some(bytes.len()),
            sha256: Some(format!("{:x}", Sha256::digest(bytes))),
        });
        Ok(())
    }
}

struct Steps(Vec<Step>);

impl Steps {
    fn push(&mut self, name: impl Into<String>, status: Status, detail: Value) {
        self.0.push(Step {
            name: name.into(),
            status,
            detail,
        });
    }

    /// Records a numerical failure and passes the error on.
    fn guard<T>(&mut self, name: &str, r: affine_limit::Result<T>) -> Result<T, affine_limit::Error> {
        r.inspect_err(|e| self.push(name, Status::Error, json!({ "error": e.to_string() })))
    }
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

/// Decade grid from 10 up to `k`, ending exactly at `k`.
fn approach_grid(k: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (1..).map(|n| 10f64.powi(n)).take_while(|&x| x < k).collect();
    g.push(k);
    g
}

fn solve_at(k: f64, cfg: &RunConfig) -> affine_limit::Result<Solution> {
    if k == 1.0 {
        return Ok(trivial_solution());
    }
    let sweep = continuation_sweep(&approach_grid(k), trivial_solution(), &solver_config(cfg))?;
    match (sweep.failure, sweep.rows.last()) {
        (None, Some(&s)) => Ok(s),
        (Some(f), _) => Err(affine_limit::Error::SweepAborted {
            k: f.k,
            source: Box::new(affine_limit::Error::InvalidArgument(f.message)),
        }),
        (None, None) => Err(affine_limit::Error::InvalidArgument("empty sweep".into())),
    }
}

fn fit_from(cfg: &RunConfig) -> affine_limit::Result<(Sweep, AsymptoticFit)> {
    let sweep = continuation_sweep(&cfg.fit_grid, trivial_solution(), &solver_config(cfg))?;
    if let Some(f) = &sweep.failure {
        return Err(affine_limit::Error::SweepAborted {
            k: f.k,
            source: Box::new(affine_limit::Error::InvalidArgument(f.message.clone())),
        });
    }
    let fit = extract_limit(&sweep.rows, &FitConfig::default())?;
    Ok((sweep, fit))
}

fn solution_json(s: &Solution) -> Value {
    json!({
        "K": s.k,
        "z1": [s.z1.re, s.z1.im],
        "residual": s.residual,
        "iterations": s.iterations,
        "condition": s.condition,
    })
}

fn region(cfg: &RunConfig) -> affine_limit::limit::RegionSpec {
    affine_limit::limit::RegionSpec {
        theta_max: cfg.theta_max,
        strip_depth: cfg.strip_depth,
    }
}

fn execute(cfg: &RunConfig, command: Command, out: &mut Output, steps: &mut Steps) -> Result<(), CliError> {
    match command {
        Command::Solve => {
            let s = steps.guard("solve", solve_at(cfg.k, cfg))?;
            steps.push("solve", Status::Pass, solution_json(&s));
        }
        Command::Sweep => {
            let sweep = steps.guard(
                "sweep",
                continuation_sweep(&cfg.k_grid, trivial_solution(), &solver_config(cfg)),
            )?;
            out.write("sweep.csv", sweep.to_table().as_bytes())?;
            let detail = json!({
                "rows": sweep.rows.len(),
                "max_abs_z1": sweep.max_abs_z1,
                "non_monotone": sweep.non_monotone,
            });
            if let Some(f) = &sweep.failure {
                steps.push(
                    "sweep",
                    Status::Error,
                    json!({ "failed_at": f.k, "error": f.message, "partial": detail }),
                );
                return Ok(());
            }
            steps.push("sweep", Status::Pass, detail);
            match extract_limit(&sweep.rows, &FitConfig::default()) {
                Ok(fit) => {
                    out.write("fit.json", &pretty(&fit))?;
                    steps.push("fit", Status::Pass, json!({ "x_inf": fit.x_inf, "tau": fit.tau }));
                }
                Err(e @ affine_limit::Error::Unstable(_)) => {
                    steps.push("fit", Status::Fail, json!({ "error": e.to_string() }));
                }
                Err(e) => steps.push("fit", Status::Pass, json!({ "skipped": e.to_string() })),
            }
        }
        Command::Render { .. } => {
            let ks = if cfg.k_grid != RunConfig::default().k_grid {
                cfg.k_grid.clone()
            } else {
                vec![cfg.k]
            };
            let limit = if cfg.render_limit {
                let (_, fit) = steps.guard("fit", fit_from(cfg))?;
                Some(
                    steps
                        .guard("limit", image_c_infinity(&fit, &region(cfg), &sampling(cfg)))?
                        .cloud,
                )
            } else {
                None
            };
            for k in ks {
                let s = steps.guard("solve", solve_at(k, cfg))?;
                let cloud = steps.guard("image", image_c_k(k, s.z1, &sampling(cfg)))?;
                let mut layers = vec![Layer {
                    cloud: &cloud,
                    stroke: "#1f3a93",
                }];
                if let Some(l) = &limit {
                    layers.push(Layer {
                        cloud: l,
                        stroke: "#b03a2e",
                    });
                }
                let name = format!("render_K{k:e}.svg");
                out.write(&name, svg::render(&layers, &cloud.provenance).as_bytes())?;
                steps.push(
                    format!("render K={k:e}"),
                    Status::Pass,
                    json!({ "file": name, "curves": cloud.curves.len() }),
                );
            }
        }
        Command::Limit => {
            let (_, fit) = steps.guard("fit", fit_from(cfg))?;
            out.write("fit.json", &pretty(&fit))?;
            let set = steps.guard("limit", image_c_infinity(&fit, &region(cfg), &sampling(cfg)))?;
            out.write("c_infinity.txt", set.cloud.to_text().as_bytes())?;
            steps.push(
                "limit",
                Status::Pass,
                json!({ "x_inf": fit.x_inf, "tau": fit.tau, "points": set.cloud.len(), "truncated": set.truncated }),
            );
        }
        Command::Hausdorff => {
            let (_, fit) = steps.guard("fit", fit_from(cfg))?;
            let sweep = steps.guard(
                "sweep",
                continuation_sweep(&cfg.k_grid, trivial_solution(), &solver_config(cfg)),
            )?;
            let report_cfg = ReportConfig {
                region: region(cfg),
                sampling: sampling(cfg),
                ..ReportConfig::default()
            };
            let rep = steps.guard("hausdorff", convergence_report(&sweep.rows, &fit, &report_cfg))?;
            out.write("hausdorff.json", &pretty(&rep))?;
            let status = if rep.verdict == Verdict::Pass {
                Status::Pass
            } else {
                Status::Fail
            };
            steps.push(
                "hausdorff",
                status,
                json!({
                    "verdict": rep.verdict,
                    "distances": rep.entries.iter().map(|e| json!([e.k, e.distance])).collect::<Vec<_>>(),
                }),
            );
        }
        Command::Verify => {
            let mut suite = Suite::new(cfg);
            for check in suite.run_all() {
                let status = match (&check.error, check.pass) {
                    (Some(_), _) => Status::Error,
                    (None, true) => Status::Pass,
                    (None, false) => Status::Fail,
                };
                let mut detail = Value::Object(check.details.clone());
                if let Some(e) = &check.error {
                    detail["error"] = json!(e);
                }
                steps.push(format!("{} {}", check.id, check.name), status, detail);
            }
        }
    }
    Ok(())
}

/// Runs one command and writes its report into the output directory.
pub fn run(cfg: &RunConfig, command: Command, argv: Vec<String>) -> Result<RunReport, CliError> {
    let mut out = Output::new(&cfg.out)?;
    let mut steps = Steps(Vec::new());
    let outcome = execute(cfg, command, &mut out, &mut steps);
    if let Err(e) = &outcome {
        if !matches!(e, CliError::Numerical(_)) {
            return Err(outcome.unwrap_err());
        }
    }
    let first_failure = steps
        .0
        .iter()
        .find(|s| s.status != Status::Pass)
        .map(|s| s.name.clone());
    let status = if steps.0.iter().any(|s| s.status == Status::Error) {
        Status::Error
    } else if first_failure.is_some() {
        Status::Fail
    } else {
        Status::Pass
    };
    let mut manifest = out.manifest;
    manifest.push(ManifestEntry {
        path: REPORT_FILE.to_string(),
        bytes: None,
        sha256: None,
    });
    let report = RunReport {
        command: argv,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        status,
        first_failure,
        steps: steps.0,
        manifest,
    };
    fs::write(cfg.out.join(REPORT_FILE), pretty(&report))?;
    Ok(report)
}

/// Human-readable summary for the terminal.
pub fn summary(report: &RunReport) -> String {
    let mut s = String::new();
    for step in &report.steps {
        let tag = match step.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        s.push_str(&format!("{tag:5} {}\n", step.name));
    }
    s.push_str(&format!(
        "{:?}: {} file(s) in {}\n",
        report.status,
        report.manifest.len(),
        report.config.out.display()
    ));
    s
}

pub fn main_with(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match cli.effective_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match run(&cfg, cli.command, args.into_iter().skip(1).collect()) {
        Ok(report) => {
            match cfg.format {
                Format::Text => print!("{}", summary(&report)),
                Format::Json => print!("{}", String::from_utf8_lossy(&pretty(&report))),
            }
            if let Some(f) = &report.first_failure {
                eprintln!("first failing check: {f}");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
