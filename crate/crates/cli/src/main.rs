use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cascade_cooling::adiabatic::KappaBridge;
use cascade_cooling::config::{load_config, Config};
use cascade_cooling::linearize::{delta6_criterion, drift_matrix};
use cascade_cooling::output::{csv_string, write_json, write_outputs};
use cascade_cooling::par::{workers_from_env, Execution};
use cascade_cooling::params::check_regime;
use cascade_cooling::presets::{preset, PRESETS};
use cascade_cooling::quadrature::QuadOptions;
use cascade_cooling::sweep::{run_sweep, two_mode_phonons, Format, MethodOptions, SweepSpec, Target};
use cascade_cooling::validate::{validate_suite, Status, ValidateOptions};
use cascade_cooling::{Error, Method};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

/// Sideband cooling of coupled mechanical resonators.
///
/// CONFIG is a TOML file or the name of a shipped preset (fig2 ... fig8).
/// The worker count is read from CASCOOL_WORKERS.
#[derive(Parser)]
#[command(name = "cascool", version)]
struct Cli {
    /// Evaluate grid points on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-mode cavity system.
    #[command(name = "two-mode", subcommand)]
    TwoMode(TwoModeCmd),
    /// Exact against adiabatic occupations.
    #[command(subcommand)]
    Adiabatic(AdiabaticCmd),
    /// Resonator chains.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Routh and eigenvalue stability verdicts.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// Run the cross-path oracle battery.
    Validate(ValidateArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Subcommand)]
enum TwoModeCmd {
    /// Occupations at the configured operating point.
    Point(PointArgs),
    /// Sweep one or two parameters.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum AdiabaticCmd {
    Compare(SweepArgs),
}

#[derive(Subcommand)]
enum ChainCmd {
    Sweep(ChainArgs),
}

#[derive(Subcommand)]
enum StabilityCmd {
    Map(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct PointArgs {
    config: String,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct SweepArgs {
    config: String,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file; `-` writes to stdout. Defaults to the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Override the number of resonators.
    #[arg(long)]
    resonators: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Use kappa_B = kappa in the adiabatic bridge (negative control).
    #[arg(long)]
    wrong_bridge: bool,
    /// Set both mechanical damping rates to zero.
    #[arg(long)]
    gamma_zero: bool,
    /// Random draws for the oracle comparisons.
    #[arg(long, default_value_t = 40)]
    draws: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. }
            | Error::IncompleteBath(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidPotential(_)
            | Error::Io(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn load(arg: &str) -> Result<Config, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(load_config(path)?);
    }
    if PRESETS.iter().any(|(n, _)| *n == arg) {
        return Ok(preset(arg)?);
    }
    Err(config_failure(format!("{arg}: no such file or preset")))
}

fn parse_methods(list: &[String]) -> Result<Vec<Method>, Failure> {
    list.iter()
        .map(|m| Method::parse(m.trim()).ok_or_else(|| config_failure(format!("unknown method `{m}`"))))
        .collect()
}

fn sweep_spec(cli: &Cli, args: &SweepArgs, target: Target) -> Result<SweepSpec, Failure> {
    let config = load(&args.config)?;
    let mut spec = config
        .sweep
        .ok_or_else(|| config_failure(format!("{}: no [sweep] section", args.config)))?;
    if spec.target != target {
        let compatible = target != Target::Chain && spec.target != Target::Chain;
        if !compatible {
            return Err(config_failure(format!(
                "config target {} cannot drive a {} run",
                spec.target.name(),
                target.name()
            )));
        }
        spec.target = target;
        spec.methods = target.default_methods();
    }
    if let Some(m) = &args.methods {
        spec.methods = parse_methods(m)?;
    }
    if let Some(f) = args.format {
        spec.format = f.into();
    }
    if let Some(o) = &args.out {
        spec.output = Some(o.clone());
    }
    spec.execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    spec.workers = workers_from_env();
    spec.validate()?;
    Ok(spec)
}

fn emit_sweep(spec: &SweepSpec) -> Result<(), Failure> {
    let result = run_sweep(spec)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match spec.output.as_deref().filter(|p| *p != Path::new("-")) {
        Some(path) => {
            let written = write_outputs(&result, path, spec.format)?;
            log::info!("wrote {} ({} rows)", written.table.display(), result.rows.len());
        }
        None => {
            let mut out = std::io::stdout().lock();
            match spec.format {
                Format::Csv => out.write_all(csv_string(&result)?.as_bytes()).map_err(Error::from)?,
                Format::Json => {
                    write_json(&result, &mut out)?;
                    writeln!(out).map_err(Error::from)?;
                }
            }
        }
    }
    Ok(())
}

fn point(args: &PointArgs) -> Result<(), Failure> {
    let config = load(&args.config)?;
    let scenario = config
        .two_mode
        .ok_or_else(|| config_failure(format!("{}: no [mechanics]/[cavity] sections", args.config)))?;
    let methods = match &args.methods {
        Some(m) => parse_methods(m)?,
        None => vec![Method::Closedform],
    };
    let (n, op) = scenario.resolve()?;
    let drift = drift_matrix(&op, &n);
    let max_re = drift.max_real_part()?;
    let d6 = delta6_criterion(&op, &n);
    let opts = MethodOptions {
        quad: QuadOptions::default(),
        bridge: KappaBridge::default(),
        ..MethodOptions::default()
    };
    let mut results = Vec::new();
    let mut first_error = None;
    for &m in &methods {
        match two_mode_phonons(m, &op, &n, &opts) {
            Ok(r) => results.push(serde_json::json!({
                "method": m.name(), "status": "ok", "n1": r.n1, "n2": r.n2,
                "var_q": r.var_q, "var_p": r.var_p,
            })),
            Err(e) => {
                results.push(serde_json::json!({ "method": m.name(), "status": e.code() }));
                first_error.get_or_insert(e);
            }
        }
    }
    match args.format.unwrap_or(FormatArg::Json) {
        FormatArg::Json => {
            let v = serde_json::json!({
                "params": n,
                "operating_point": op,
                "regime": check_regime(&n, &op),
                "max_re": max_re,
                "routh_passes": d6.passes,
                "results": results,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
        FormatArg::Csv => {
            println!("method,status,n1,n2");
            for r in &results {
                let num = |k: &str| r[k].as_f64().map(|x| format!("{x:.16e}")).unwrap_or_default();
                println!(
                    "{},{},{},{}",
                    r["method"].as_str().unwrap_or(""),
                    r["status"].as_str().unwrap_or(""),
                    num("n1"),
                    num("n2")
                );
            }
        }
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let opts = ValidateOptions {
        bridge: if args.wrong_bridge {
            KappaBridge::SameRate
        } else {
            KappaBridge::EnergyRate
        },
        gamma_override: args.gamma_zero.then_some(0.0),
        random_draws: args.draws,
        seed: args.seed,
        ..ValidateOptions::default()
    };
    let report = validate_suite(&opts);
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
        eprintln!(
            "{status} {:<26} {:?} measured={} threshold={} {}",
            c.name,
            c.severity,
            fmt(c.measured),
            fmt(c.threshold),
            c.detail
        );
    }
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    if let Some(path) = &args.out {
        std::fs::write(path, &json).map_err(Error::from)?;
    }
    println!("{json}");
    if report.passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: "validation failed".into(),
        })
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::TwoMode(TwoModeCmd::Point(a)) => point(a),
        Command::TwoMode(TwoModeCmd::Sweep(a)) => emit_sweep(&sweep_spec(cli, a, Target::TwoMode)?),
        Command::Adiabatic(AdiabaticCmd::Compare(a)) => {
            emit_sweep(&sweep_spec(cli, a, Target::AdiabaticCompare)?)
        }
        Command::Stability(StabilityCmd::Map(a)) => emit_sweep(&sweep_spec(cli, a, Target::StabilityMap)?),
        Command::Chain(ChainCmd::Sweep(a)) => {
            let mut spec = sweep_spec(cli, &a.sweep, Target::Chain)?;
            if let (Some(n), Some(c)) = (a.resonators, spec.chain.as_mut()) {
                c.n_resonators = n;
                c.validate()?;
            }
            emit_sweep(&spec)
        }
        Command::Validate(a) => validate(a),
        Command::Presets => {
            for (name, text) in PRESETS {
                let title = text
                    .lines()
                    .find_map(|l| l.strip_prefix("title = "))
                    .unwrap_or("")
                    .trim_matches('"');
                println!("{name}\t{title}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
