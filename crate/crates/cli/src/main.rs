mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use commands::*;
use error::CliError;
use plot::PlotKind;

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// TOML file of key = value parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "STEPFIELD_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// de Gennes constant Θ₀.
    Theta0(Theta0Params),
    /// Iwatsuka band minima β_a.
    Beta(BetaParams),
    /// Ground energy of the corner-step half-plane operator.
    Mu(MuParams),
    /// Neumann sector ground energy.
    Sector(SectorParams),
    /// Bound-state certificate for one (α, a).
    Certify(CertifyParams),
    /// Certificate over an (α, a) grid.
    Region(RegionParams),
    /// λ(b)/b on a domain.
    LambdaCurve(LambdaCurveParams),
    /// Linear third critical field.
    Hc3(Hc3Params),
    /// Ginzburg–Landau minimizers along a field sweep.
    GlSweep(GlSweepParams),
    /// Quick structural checks.
    Validate,
    /// gnuplot script for a table written by another command.
    Plot {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

#[derive(Parser)]
#[command(name = "stepfield", version, about = "Spectral and Ginzburg-Landau computations for step magnetic fields")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

struct Resolved {
    out: PathBuf,
    seed: u64,
    jobs: usize,
}

fn resolve_common(common: &Common, file: Option<&toml::Table>, command: &str) -> Result<Resolved, CliError> {
    let get = |k: &str| file.and_then(|t| t.get(k)).cloned();
    let bad = |k: &str| CliError::Config(format!("config key `{k}` has the wrong type"));
    let out = match (&common.out, get("out")) {
        (Some(p), _) => p.clone(),
        (None, Some(v)) => PathBuf::from(v.as_str().ok_or_else(|| bad("out"))?),
        (None, None) => PathBuf::from("stepfield-out").join(command),
    };
    let seed = match (common.seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_integer().filter(|i| *i >= 0).ok_or_else(|| bad("seed"))? as u64,
        (None, None) => 0,
    };
    let jobs = match (common.jobs, get("jobs")) {
        (Some(j), _) => j,
        (None, Some(v)) => v.as_integer().filter(|i| *i > 0).ok_or_else(|| bad("jobs"))? as usize,
        (None, None) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    if jobs == 0 {
        return Err(CliError::Config("jobs must be positive".into()));
    }
    Ok(Resolved { out, seed, jobs })
}

fn run_with<P, F>(
    name: &str,
    flags: &P,
    file: Option<toml::Table>,
    common: &Common,
    f: F,
) -> Result<String, CliError>
where
    P: Serialize + DeserializeOwned + Default,
    F: FnOnce(&mut P, u64, &mut Sink) -> Result<String, CliError>,
{
    let (params_file, common_file) = match file {
        Some(t) => {
            let (p, c) = config::split_common(t);
            (Some(p), Some(c))
        }
        None => (None, None),
    };
    let res = resolve_common(common, common_file.as_ref(), name)?;
    let mut params: P = config::merge(flags, params_file)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(res.jobs)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut sink = Sink::new(res.out.clone())?;
    let start = Instant::now();
    let summary = f(&mut params, res.seed, &mut sink)?;
    let wall = start.elapsed().as_secs_f64();
    // params now carries every default that was applied
    let replay = config::to_toml(
        &params,
        &[
            ("seed", toml::Value::Integer(res.seed as i64)),
            ("out", toml::Value::String(res.out.display().to_string())),
        ],
    )?;
    sink.text("config.toml", &replay)?;
    let mut outputs = sink.written.clone();
    outputs.push("manifest.json".into());
    let manifest = json!({
        "command": name,
        "config": serde_json::to_value(&params).map_err(|e| CliError::Config(e.to_string()))?,
        "seed": res.seed,
        "jobs": res.jobs,
        "out": res.out.display().to_string(),
        "versions": { "stepfield": env!("CARGO_PKG_VERSION") },
        "wall_time_s": wall,
        "outputs": outputs,
    });
    sink.json("manifest.json", &manifest)?;
    Ok(summary)
}

fn run(w: Cli) -> Result<String, CliError> {
    let file = match &w.common.config {
        Some(p) => Some(config::read_file(p)?),
        None => None,
    };
    let c = &w.common;
    match w.command {
        Command::Theta0(p) => run_with("theta0", &p, file, c, |p, _, s| theta0(p, s)),
        Command::Beta(p) => run_with("beta", &p, file, c, |p, _, s| beta(p, s)),
        Command::Mu(p) => run_with("mu", &p, file, c, |p, _, s| mu(p, s)),
        Command::Sector(p) => run_with("sector", &p, file, c, |p, _, s| sector(p, s)),
        Command::Certify(p) => run_with("certify", &p, file, c, |p, _, s| certify(p, s)),
        Command::Region(p) => run_with("region", &p, file, c, |p, _, s| region(p, s)),
        Command::LambdaCurve(p) => run_with("lambda-curve", &p, file, c, |p, _, s| lambda_curve(p, s)),
        Command::Hc3(p) => run_with("hc3", &p, file, c, |p, _, s| hc3(p, s)),
        Command::GlSweep(p) => run_with("gl-sweep", &p, file, c, |p, seed, s| gl_sweep(p, seed, s)),
        Command::Validate => run_with("validate", &NoParams::default(), file, c, |_, _, s| validate(s)),
        Command::Plot { table, kind } => {
            let script = plot::plot_emit(&table, kind)?;
            let path = table.with_extension("gp");
            std::fs::write(&path, &script)?;
            Ok(json!({ "script": path.display().to_string() }).to_string())
        }
    }
}

#[derive(Serialize, serde::Deserialize, Default)]
struct NoParams {}

fn main() -> ExitCode {
    let w = match Cli::try_parse() {
        Ok(w) => w,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(w) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
