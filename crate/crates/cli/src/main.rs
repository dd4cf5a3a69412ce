//! `ptchaos`: simulate the optomechanical dimer and write plot-ready results.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};

use crate::commands::{CmdResult, Ctx};
use crate::config::{parse_assignment, read_config_file, resolve, Settings};
use crate::output::{Format, OutputDir, RunManifest};

#[derive(Parser)]
#[command(name = "ptchaos", version, about = "Chaos in a PT-symmetric optomechanical dimer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equations of motion and write the sampled trajectory.
    Simulate(Common),
    /// Power spectrum of I1 over the analysis window, or of a CSV series.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Two-column CSV (time in 1/gamma, value) to analyse instead of a simulation.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Largest Lyapunov exponent, optionally scanned over `lyapunov_scan`.
    Lyapunov(Common),
    /// Local maxima of I1 across `bifurcation_scan`.
    Bifurcation(Common),
    /// Phase labels over the `j_grid` x `kappa_grid` plane.
    Phase(Common),
    /// Chaos onset time for every drive in `drives`.
    Onset(Common),
    /// Parallel grid over `sweep_axes` with exponents and flatness per point.
    Sweep(Common),
    /// List configuration keys, defaults and presets.
    Keys,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON file of key/value pairs, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "PTCHAOS_OUT", default_value = "ptchaos-out")]
    out: PathBuf,
    /// Figure preset: fig2, fig3, fig4, fig5ab or fig5c.
    #[arg(long)]
    preset: Option<String>,
    /// Override one key, e.g. `--set j=0.2g` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for parallel scans; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Integration horizon, e.g. `12us`.
    #[arg(long)]
    t_end: Option<String>,
    /// Analysis window `t_a:t_b`, e.g. `8us:9us`.
    #[arg(long)]
    window: Option<String>,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn settings(c: &Common) -> Result<Settings, config::ConfigError> {
    let mut s = Settings::new(c.preset.as_deref())?;
    if let Some(path) = &c.config {
        s.apply(read_config_file(path)?, &path.display().to_string())?;
    }
    let flags = c.set.iter().map(|item| parse_assignment(item)).collect::<Result<_, _>>()?;
    s.apply(flags, "--set")?;
    if let Some(t) = &c.t_end {
        s.set("t_end", t, "--t-end")?;
    }
    if let Some(w) = &c.window {
        s.set("window", w, "--window")?;
    }
    Ok(s)
}

fn execute(name: &str, c: &Common, body: impl FnOnce(Ctx) -> CmdResult) -> Result<String, String> {
    let started = SystemTime::now();
    let run = settings(c).and_then(|s| resolve(&s)).map_err(|e| format!("configuration: {e}"))?;
    let mut out = OutputDir::create(&c.out).map_err(|e| format!("cannot create {}: {e}", c.out.display()))?;
    let summary = body(Ctx { run: &run, out: &mut out, format: c.format, workers: c.workers }).map_err(|e| format!("{name}: {e}"))?;
    let manifest = RunManifest::new(name, std::env::args().skip(1).collect(), started, &run, out.files());
    out.json(&format!("manifest-{name}.json"), &manifest).map_err(|e| format!("writing manifest: {e}"))?;
    out.commit();
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => execute("simulate", c, commands::simulate),
        Command::Spectrum { common, input } => execute("spectrum", common, |ctx| commands::spectrum(ctx, input.as_deref())),
        Command::Lyapunov(c) => execute("lyapunov", c, commands::lyapunov),
        Command::Bifurcation(c) => execute("bifurcation", c, commands::bifurcation),
        Command::Phase(c) => execute("phase", c, commands::phase),
        Command::Onset(c) => execute("onset", c, commands::onset),
        Command::Sweep(c) => execute("sweep", c, commands::sweep),
        Command::Keys => {
            let presets: Vec<&str> = config::PRESETS.iter().map(|(n, _)| *n).collect();
            Ok(format!("keys:\n{}presets: {}", config::key_help(), presets.join(", ")))
        }
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
