use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use genvi_cli::config::read_config_file;
use genvi_cli::{
    run_adjoint_demo, run_check, run_fpu, run_order, run_resonance, CliResult, Experiment, ExperimentConfig, Outputs,
};

#[derive(Parser)]
#[command(name = "genvi", version, about = "Generating-function variational integrators: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Plain-text key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV destination; an SVG plot is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// Long final time (T = 10000) unless --t-final is given.
    #[arg(long, global = true)]
    long: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Energy error against step size for the averaged and exact methods.
    Resonance {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        h_min: Option<f64>,
        #[arg(long)]
        h_max: Option<f64>,
        #[arg(long)]
        h_count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Oscillatory energy exchange in the stiff Fermi-Pasta-Ulam chain.
    Fpu {
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        /// sv, htvi or imex.
        #[arg(long)]
        method: Option<String>,
        /// Write every n-th step.
        #[arg(long)]
        stride: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Property suites; exits with status 1 if any check fails.
    Check {
        #[arg(long)]
        suite: Option<String>,
        /// Adds an assertion that Euler-A is symmetric, which must fail.
        #[arg(long)]
        negative_control: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Global convergence order on the harmonic oscillator.
    Order {
        /// Method name, or a comma separated list.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Adjoint relations between generating functions on random states.
    AdjointDemo {
        #[command(flatten)]
        common: Common,
    },
}

fn build(experiment: Experiment, common: &Common, flags: Vec<(&str, Option<String>)>) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(path) = &common.config {
        cfg.apply(&read_config_file(path)?)?;
        cfg.experiment = experiment;
    }
    let shared = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("t_final", common.t_final.map(|v| v.to_string())),
        ("long", common.long.then(|| "true".to_string())),
    ];
    for (key, value) in shared.into_iter().chain(flags) {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn s<T: ToString>(v: Option<T>) -> Option<String> {
    v.map(|x| x.to_string())
}

fn emit(cfg: &ExperimentConfig, outputs: &Outputs) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            let (csv, svg) = outputs.write(path)?;
            eprintln!("wrote {} and {}", csv.display(), svg.display());
        }
        None => print!("{}", outputs.csv),
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Resonance { eps, h_min, h_max, h_count, common } => {
            let flags = vec![("eps", s(eps)), ("h_min", s(h_min)), ("h_max", s(h_max)), ("h_count", s(h_count))];
            let cfg = build(Experiment::Resonance, &common, flags)?;
            emit(&cfg, &run_resonance(&cfg)?)?;
        }
        Command::Fpu { omega, m, h, method, stride, common } => {
            let flags = vec![("omega", s(omega)), ("m", s(m)), ("h", s(h)), ("method", method), ("stride", s(stride))];
            let cfg = build(Experiment::Fpu, &common, flags)?;
            emit(&cfg, &run_fpu(&cfg)?)?;
        }
        Command::Check { suite, negative_control, common } => {
            let flags = vec![("suite", suite), ("negative_control", negative_control.then(|| "true".to_string()))];
            let cfg = build(Experiment::Check, &common, flags)?;
            let report = run_check(&cfg)?;
            print!("{report}");
            if !report.passed() {
                eprintln!("{} check(s) failed", report.failures());
                return Ok(ExitCode::from(1));
            }
        }
        Command::Order { method, common } => {
            let cfg = build(Experiment::Order, &common, vec![("method", method)])?;
            let (outputs, estimates) = run_order(&cfg)?;
            emit(&cfg, &outputs)?;
            for (name, est) in estimates {
                match est.slope {
                    Some(k) => eprintln!("{name}: order {k:.4}"),
                    None => eprintln!("{name}: errors at roundoff, order undefined"),
                }
            }
        }
        Command::AdjointDemo { common } => {
            let cfg = build(Experiment::AdjointDemo, &common, Vec::new())?;
            emit(&cfg, &run_adjoint_demo(&cfg)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
