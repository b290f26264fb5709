//! Refinement sweeps: one simulation per level, run in parallel, with CSV
//! and summary output written afterwards by the calling thread.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::diagnostics::{convergence_table, detect_plateau, PlateauReport, Recorder, TimeSeriesRecord};
use crate::gas::IdealGas;
use crate::mesh::Grid1D;
use crate::reference::ManufacturedSolution;
use crate::scheme::{initial_state, run_simulation, SchemeParams, SimulationConfig};
use crate::{Error, Result};

/// Bumped whenever a column or summary field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 11] = [
    "t",
    "l2_error",
    "l2_error_normalized",
    "l2_error_vs_projected",
    "rel_energy",
    "aux_G",
    "mod_energy",
    "dissipation_D",
    "newton_iters",
    "residual_max_norm",
    "a1h_pass",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    /// `0` when the level failed before the first step.
    pub step: usize,
    pub time: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelResult {
    pub level: u32,
    pub cells: usize,
    pub steps: usize,
    pub h: f64,
    pub tau: f64,
    /// Records up to the last accepted step.
    #[serde(skip)]
    pub records: Vec<TimeSeriesRecord<f64>>,
    pub failure: Option<Failure>,
    pub plateau: Option<PlateauReport>,
    pub max_residual: f64,
    pub max_newton_iterations: usize,
    pub a1h_all_steps: bool,
}

impl LevelResult {
    pub fn csv_name(level: u32) -> String {
        format!("level_k{level}.csv")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn normalized_errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.l2_error_normalized).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub mu: f64,
    pub gamma: f64,
    pub t_final: f64,
    pub noise: String,
    pub m_init: String,
    pub levels: Vec<LevelResult>,
    /// Observed orders between consecutive levels that both reached a plateau.
    pub orders: Vec<OrderEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderEntry {
    pub coarse: u32,
    pub fine: u32,
    pub order: f64,
}

impl ExperimentSummary {
    pub fn level(&self, k: u32) -> Option<&LevelResult> {
        self.levels.iter().find(|l| l.level == k)
    }
}

/// Runs one refinement level to completion or to its first failure.
pub fn run_level(config: &ExperimentConfig, k: u32) -> LevelResult {
    let cells = config.cells(k);
    let steps = config.steps(k);
    let mut result = LevelResult {
        level: k,
        cells,
        steps,
        h: config.length / cells as f64,
        tau: config.t_final / steps as f64,
        records: Vec::with_capacity(steps + 1),
        failure: None,
        plateau: None,
        max_residual: 0.0,
        max_newton_iterations: 0,
        a1h_all_steps: true,
    };

    let outcome = (|| -> Result<()> {
        let grid = Grid1D::new(config.length, cells, steps, config.t_final)?;
        let reference = ManufacturedSolution::new(config.gamma);
        let sim = SimulationConfig {
            grid,
            params: SchemeParams::new(config.mu, config.gamma)?,
            reference,
            noise: config.noise,
            initial: initial_state(&grid, &reference, &config.noise, config.rho_init, config.m_init)?,
            jacobian_check_every: config.jacobian_check_every,
        };
        let mut recorder = Recorder::new(grid, reference, IdealGas, config.delta, config.bounds);
        let records = &mut result.records;
        run_simulation(&sim, |_, state, report| {
            records.push(recorder.record(state, report)?);
            Ok(())
        })?;
        Ok(())
    })();

    if let Err(e) = outcome {
        let (step, time) = match &e {
            Error::StepFailed { step, time, .. } => (*step, *time),
            _ => (0, 0.0),
        };
        result.failure = Some(Failure {
            step,
            time,
            message: e.to_string(),
        });
    }

    for r in &result.records {
        result.max_residual = result.max_residual.max(r.residual_max_norm);
        result.max_newton_iterations = result.max_newton_iterations.max(r.newton_iterations);
        result.a1h_all_steps &= r.a1h_pass;
    }
    if result.failure.is_none() {
        result.plateau = detect_plateau(&result.times(), &result.normalized_errors(), &config.plateau).ok();
    }
    result
}

/// Runs every configured level without writing anything.
pub fn simulate_levels(config: &ExperimentConfig) -> Result<Vec<LevelResult>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let levels: Vec<u32> = config.levels.iter().collect();
    // finest level first so it does not start last
    let mut results: Vec<LevelResult> =
        pool.install(|| levels.par_iter().rev().map(|&k| run_level(config, k)).collect());
    results.sort_by_key(|r| r.level);
    Ok(results)
}

pub fn summarize(config: &ExperimentConfig, levels: Vec<LevelResult>) -> ExperimentSummary {
    let mut orders = Vec::new();
    for w in levels.windows(2) {
        let pair = (w[0].plateau.and_then(|p| p.plateau_level), w[1].plateau.and_then(|p| p.plateau_level));
        if let (Some(p0), Some(p1)) = pair {
            if let Ok(o) = convergence_table(&[(w[0].h, p0), (w[1].h, p1)]) {
                orders.push(OrderEntry {
                    coarse: w[0].level,
                    fine: w[1].level,
                    order: o[0],
                });
            }
        }
    }
    ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        mu: config.mu,
        gamma: config.gamma,
        t_final: config.t_final,
        noise: config.noise.to_string(),
        m_init: config.m_init.to_string(),
        levels,
        orders,
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one level's records with 17 significant digits.
pub fn write_level_csv(path: &Path, records: &[TimeSeriesRecord<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            fmt_float(r.t),
            fmt_float(r.l2_error),
            fmt_float(r.l2_error_normalized),
            fmt_float(r.l2_error_vs_projected),
            fmt_float(r.rel_energy),
            fmt_float(r.aux_g),
            fmt_float(r.mod_energy),
            fmt_float(r.dissipation_d),
            r.newton_iterations.to_string(),
            fmt_float(r.residual_max_norm),
            r.a1h_pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"))
}

pub fn summary_text(summary: &ExperimentSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "schema_version {}", summary.schema_version);
    let _ = writeln!(
        s,
        "mu {}  gamma {}  t_final {}  noise {}  m_init {}",
        summary.mu, summary.gamma, summary.t_final, summary.noise, summary.m_init
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>3} {:>6} {:>7} {:>13} {:>13} {:>13} {:>13} {:>13} {:>6} {:>5}  status",
        "k", "M", "N", "h", "plateau", "onset", "lambda", "max_resid", "iters", "a1h"
    );
    for l in &summary.levels {
        let p = l.plateau.unwrap_or(PlateauReport {
            plateau_level: None,
            plateau_onset_time: None,
            decay_rate: None,
            fit_window: None,
        });
        let status = match &l.failure {
            Some(f) => format!("FAILED at step {} (t = {}): {}", f.step, f.time, f.message),
            None if p.has_plateau() => "ok".to_string(),
            None => "ok (no plateau)".to_string(),
        };
        let _ = writeln!(
            s,
            "{:>3} {:>6} {:>7} {:>13.6e} {:>13} {:>13} {:>13} {:>13.3e} {:>6} {:>5}  {}",
            l.level,
            l.cells,
            l.steps,
            l.h,
            opt(p.plateau_level),
            opt(p.plateau_onset_time),
            opt(p.decay_rate),
            l.max_residual,
            l.max_newton_iterations,
            l.a1h_all_steps,
            status
        );
    }
    if !summary.orders.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "observed orders (plateau levels)");
        for o in &summary.orders {
            let _ = writeln!(s, "  k {} -> {}: {:.4}", o.coarse, o.fine, o.order);
        }
    }
    s
}

/// Writes CSVs, `summary.txt`, `summary.json` and `config.txt` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, summary: &ExperimentSummary) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for l in &summary.levels {
        let p = dir.join(LevelResult::csv_name(l.level));
        write_level_csv(&p, &l.records)?;
        written.push(p);
    }
    let txt = dir.join("summary.txt");
    fs::write(&txt, summary_text(summary))?;
    written.push(txt);
    let json = dir.join("summary.json");
    let mut f = fs::File::create(&json)?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    written.push(json);
    let cfg = dir.join("config.txt");
    fs::write(&cfg, config.to_text())?;
    written.push(cfg);
    Ok(written)
}

/// Simulates every level, then writes all outputs to `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let levels = simulate_levels(config)?;
    let summary = summarize(config, levels);
    write_outputs(&config.out_dir, config, &summary)?;
    if config.emit_plots {
        let curves: Vec<super::plot::Curve> = summary
            .levels
            .iter()
            .map(|l| super::plot::Curve {
                label: format!("k = {}", l.level),
                points: l.times().into_iter().zip(l.normalized_errors()).collect(),
            })
            .collect();
        let style = super::plot::PlotStyle {
            title: format!("normalized L2 error, mu = {}", config.mu),
            ..Default::default()
        };
        let svg = super::plot::emit_plot(&curves, &style)?;
        fs::write(config.out_dir.join("error.svg"), svg)?;
    }
    Ok(summary)
}
