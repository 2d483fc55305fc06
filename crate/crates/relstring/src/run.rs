//! Frame-run orchestration: build a pair (scenario or file), evaluate the
//! requested time window, and emit frames, diagnostics and a manifest.
//!
//! Frames are computed in parallel (the pair is immutable) and written
//! serially in frame order, so output is deterministic. The environment
//! variable RELSTRING_THREADS caps the worker count.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::dalembert::{evaluate_state, DAlembertPair};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::output;
use crate::scenarios::{build_scenario, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything one `run` invocation needs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub input: Option<PathBuf>,
    pub grid: usize,
    pub t0: f64,
    pub t1: f64,
    pub frames: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// collapse-detection tolerance relative to the period
    pub collapse_tol: f64,
    /// singular-set speed threshold
    pub singular_tol: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_none() && self.input.is_none() {
            return Err(Error::Config(
                "need a scenario name (--scenario) or an input file (--input)".into(),
            ));
        }
        if self.grid < 8 {
            return Err(Error::Config("grid must be at least 8".into()));
        }
        if self.frames < 1 {
            return Err(Error::Config("need at least one frame".into()));
        }
        if !(self.t0 <= self.t1) {
            return Err(Error::Config("need t0 <= t1".into()));
        }
        Ok(())
    }
}

pub struct RunSummary {
    pub frames_written: usize,
    pub out_dir: PathBuf,
    pub energy_first: f64,
    pub energy_last: f64,
}

fn build_pair(config: &RunConfig) -> Result<(DAlembertPair, Option<ScenarioSpec>)> {
    if let Some(name) = &config.scenario {
        let built = build_scenario(name, &config.parameters)?;
        return Ok((built.pair, Some(built.spec)));
    }
    let path = config.input.as_ref().unwrap();
    let (curve, velocity) = output::read_curve_csv(path)?;
    let (nc, nv, _report) = crate::gauge::conformal_normalize(&curve, &velocity, config.grid)?;
    let pair = crate::dalembert::decompose(&nc, &nv)?;
    Ok((pair, None))
}

/// Thread pool honoring RELSTRING_THREADS (0 or unset: rayon default).
pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var("RELSTRING_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Execute a run: frames_XXXX.{csv,json}, diagnostics.{csv,json},
/// manifest.json in the output directory.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let (pair, scenario) = build_pair(config)?;
    let m = config.frames;
    let times: Vec<f64> = if m == 1 {
        vec![config.t0]
    } else {
        (0..m)
            .map(|j| config.t0 + (config.t1 - config.t0) * j as f64 / (m - 1) as f64)
            .collect()
    };

    let pool = thread_pool();
    let frames: Vec<(String, DiagnosticsReport)> = pool.install(|| {
        times
            .par_iter()
            .map(|&t| {
                let st = evaluate_state(&pair, t, config.grid);
                let body = match config.format {
                    OutputFormat::Csv => output::frame_csv(&st),
                    OutputFormat::Json => output::frame_json(&st),
                };
                let report = DiagnosticsReport::compute(&pair, t, config.grid);
                (body, report)
            })
            .collect()
    });

    let ext = match config.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    for (j, (body, _)) in frames.iter().enumerate() {
        let path = config.out_dir.join(format!("frames_{j:04}.{ext}"));
        output::write_file(&path, body)?;
    }
    let reports: Vec<DiagnosticsReport> = frames.into_iter().map(|(_, r)| r).collect();
    match config.format {
        OutputFormat::Csv => {
            output::write_file(
                &config.out_dir.join("diagnostics.csv"),
                &output::diagnostics_csv(&reports),
            )?;
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
            s.push('\n');
            output::write_file(&config.out_dir.join("diagnostics.json"), &s)?;
        }
    }
    let echo = serde_json::to_value(config).expect("config serializes");
    output::write_file(
        &config.out_dir.join("manifest.json"),
        &output::manifest_json(&echo, scenario.as_ref()),
    )?;
    Ok(RunSummary {
        frames_written: reports.len(),
        out_dir: config.out_dir.clone(),
        energy_first: reports.first().map(|r| r.conserved_energy).unwrap_or(0.0),
        energy_last: reports.last().map(|r| r.conserved_energy).unwrap_or(0.0),
    })
}
