use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nosig::{
    csv_path, parse_scenario, report, run, sha256_hex, Command, RunOptions, ScenarioFile,
    OUT_DIR_VAR,
};

#[derive(Parser)]
#[command(name = "nosig", version, about = "No-signaling and decoherence checks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Random local channels leave Alice's reduced state unchanged.
    VerifyNosignal(Common),
    /// Causal-window grid in both regimes.
    Window(Common),
    /// Decoherence from N separable traps.
    Ntrap(Common),
    /// Decoherence from traps in superposed configurations.
    EntangledTraps(Common),
    /// Trap patches on spheres around Alice.
    Sphere(Common),
    /// Gaussian overlaps against numerical quadrature.
    Packets(Common),
    /// Equal center-of-mass statistics, orthogonal states.
    ComExample(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file; defaults apply without one.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Replaces the command's primary tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// CSV destination; defaults to <command>.csv in $NOSIG_OUT_DIR or ".".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Points per axis of the causal-window grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Sphere radius (repeatable); reuses the first sphere's other parameters.
    #[arg(long = "radius")]
    radii: Vec<f64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::VerifyNosignal(c) => (Command::VerifyNosignal, c),
            Sub::Window(c) => (Command::Window, c),
            Sub::Ntrap(c) => (Command::Ntrap, c),
            Sub::EntangledTraps(c) => (Command::EntangledTraps, c),
            Sub::Sphere(c) => (Command::Sphere, c),
            Sub::Packets(c) => (Command::Packets, c),
            Sub::ComExample(c) => (Command::ComExample, c),
        }
    }
}

fn execute(cmd: Command, c: Common) -> Result<bool, String> {
    if let Some(jobs) = c.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let (file, digest) = match &c.scenario {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| format!("{}: not valid UTF-8", path.display()))?;
            let file = parse_scenario(&text)
                .map_err(|e| format!("{}: {} error: {e}", path.display(), e.class()))?;
            (file, Some(sha256_hex(&bytes)))
        }
        None => (ScenarioFile::default(), None),
    };
    let opts = RunOptions {
        seed: c.seed,
        trials: c.trials,
        tolerance: c.tolerance,
        grid: c.grid,
        radii: c.radii,
    };
    let outcome = run(cmd, &file, &opts).map_err(|e| e.to_string())?;
    let out_dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from);
    let path = csv_path(cmd, c.out.as_deref(), out_dir.as_deref());
    std::fs::write(&path, outcome.table.to_csv())
        .map_err(|e| format!("{}: {e}", path.display()))?;
    print!(
        "{}",
        report::render_summary(
            cmd.name(),
            digest.as_deref(),
            &outcome,
            &path.display().to_string()
        )
    );
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let (cmd, common) = Cli::parse().command.split();
    match execute(cmd, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
