use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use euler_observer::experiment::{
    emit_plot, read_curve, run_experiment, ExperimentConfig, ExperimentSummary, Levels, PlotStyle,
};
use euler_observer::reference::NoiseModel;
use euler_observer::scheme::InitialMomentum;
use euler_observer::Result;

#[derive(Parser)]
#[command(name = "euler-observer", version, about = "Nudging observer for the 1-D barotropic Euler equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement sweep for one nudging gain.
    Run(RunArgs),
    /// Observer with mu = 1 on levels 0..K.
    Exp1(StudyArgs),
    /// Observer with mu = 5 and mu = 25 on levels 0..K.
    Exp2(StudyArgs),
    /// Plot one CSV column against t for several files.
    Plot(PlotArgs),
}

#[derive(Args, Default)]
struct Overrides {
    /// Key = value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rho_init: Option<f64>,
    /// none | random:<eps>:<seed> | sin:<eps>:<freq>
    #[arg(long)]
    noise: Option<NoiseModel<f64>>,
    /// measured | exact | zero
    #[arg(long)]
    m_init: Option<InitialMomentum>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_plots: bool,
    /// Defaults to one per level.
    #[arg(long)]
    workers: Option<usize>,
    /// Allow levels up to 4.
    #[arg(long)]
    deep: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    mu: Option<f64>,
    /// Inclusive range such as 0..2.
    #[arg(long)]
    levels: Option<Levels>,
    #[command(flatten)]
    common: Overrides,
}

#[derive(Args)]
struct StudyArgs {
    /// Finest level K.
    #[arg(long, default_value_t = 2)]
    max_level: u32,
    #[command(flatten)]
    common: Overrides,
}

#[derive(Args)]
struct PlotArgs {
    /// Output SVG file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "l2_error_normalized")]
    column: String,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(required = true)]
    csv: Vec<PathBuf>,
}

fn build_config(o: &Overrides, mu: Option<f64>, levels: Option<Levels>) -> Result<ExperimentConfig> {
    let mut c = match &o.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = mu {
        c.mu = v;
    }
    if let Some(v) = levels {
        c.levels = v;
    }
    if let Some(v) = o.t_final {
        c.t_final = v;
    }
    if let Some(v) = o.gamma {
        c.gamma = v;
    }
    if let Some(v) = o.rho_init {
        c.rho_init = v;
    }
    if let Some(v) = o.noise {
        c.noise = v;
    }
    if let Some(v) = o.m_init {
        c.m_init = v;
    }
    if let Some(v) = &o.out {
        c.out_dir = v.clone();
    }
    c.emit_plots |= o.emit_plots;
    c.deep |= o.deep;
    match o.workers {
        Some(w) => c.workers = w,
        None if o.config.is_none() => c.workers = c.levels.iter().count(),
        None => {}
    }
    Ok(c)
}

fn run_one(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    eprintln!(
        "mu = {}, levels {}, output in {}",
        config.mu,
        config.levels,
        config.out_dir.display()
    );
    let summary = run_experiment(config)?;
    print!("{}", euler_observer::experiment::runner::summary_text(&summary));
    Ok(summary)
}

fn failed(summary: &ExperimentSummary) -> bool {
    summary.levels.iter().any(|l| l.failure.is_some())
}

fn study(args: &StudyArgs, mus: &[f64], default_out: &str) -> Result<bool> {
    let mut any_failed = false;
    let levels = Levels {
        first: 0,
        last: args.max_level,
    };
    for &mu in mus {
        let mut c = build_config(&args.common, Some(mu), Some(levels))?;
        let base = args.common.out.clone().unwrap_or_else(|| PathBuf::from(default_out));
        c.out_dir = if mus.len() > 1 { base.join(format!("mu{mu}")) } else { base };
        any_failed |= failed(&run_one(&c)?);
    }
    Ok(any_failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => build_config(&a.common, a.mu, a.levels).and_then(|c| run_one(&c).map(|s| failed(&s))),
        Command::Exp1(a) => study(&a, &[1.0], "out/exp1"),
        Command::Exp2(a) => study(&a, &[5.0, 25.0], "out/exp2"),
        Command::Plot(a) => (|| {
            let curves = a.csv.iter().map(|p| read_curve(p, &a.column)).collect::<Result<Vec<_>>>()?;
            let style = PlotStyle {
                title: a.title.clone(),
                y_label: a.column.clone(),
                ..Default::default()
            };
            let svg = emit_plot(&curves, &style)?;
            std::fs::write(&a.out, svg)?;
            Ok(false)
        })(),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: at least one level failed, see the summary");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
