use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qiso::config::ExperimentKind;
use qiso::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qiso", version, about = "Quantum-circuit isometric tensor network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variational ground-state search with AMSgrad.
    Vqe(Common),
    /// Final VQE energy versus transverse field.
    Sweep(Common),
    /// Gradient variance sweeps over depth, bond qubits or column.
    Variance(Common),
    /// Gradient variance before and after training the leading columns.
    Pretrain(Common),
    /// Noisy VQE, target-energy accuracy and correlator-error benchmarks.
    Noise(Common),
    /// Computational-basis samples of the network state.
    Sample(Common),
    /// OpenQASM 3 export of the holographic circuit.
    ExportCircuit(Common),
    /// Lowest levels by exact diagonalization.
    Ed(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    /// Caps worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Config override as `section.key=value`, repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Validate and print the resolved configuration without running.
    #[arg(long)]
    dry_run: bool,
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    kind.name()
}

fn resolve(kind: ExperimentKind, c: &Common) -> Result<ExperimentConfig, CliError> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = vec![format!("kind=\"{}\"", kind_name(kind))];
    if let Some(o) = &c.out {
        overrides.push(format!("output_dir={}", toml_string(o)));
    }
    if let Some(s) = c.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(s) = c.steps {
        overrides.push(format!("optimizer.steps={s}"));
    }
    if let Some(s) = c.shots {
        overrides.push(format!("shots={s}"));
    }
    overrides.extend(c.set.iter().cloned());
    ExperimentConfig::from_toml_with_overrides(&text, &overrides)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, common) = match &cli.command {
        Command::Vqe(c) => (ExperimentKind::Vqe, c),
        Command::Sweep(c) => (ExperimentKind::Sweep, c),
        Command::Variance(c) => (ExperimentKind::Variance, c),
        Command::Pretrain(c) => (ExperimentKind::Pretrain, c),
        Command::Noise(c) => (ExperimentKind::Noise, c),
        Command::Sample(c) => (ExperimentKind::Sample, c),
        Command::ExportCircuit(c) => (ExperimentKind::Export, c),
        Command::Ed(c) => (ExperimentKind::Ed, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("{}", CliError::Config(e.to_string()));
            return ExitCode::from(1);
        }
    }
    let result = resolve(kind, common).and_then(|config| {
        if common.dry_run {
            config.validate()?;
            print!("{}", config.to_toml());
            return Ok(());
        }
        let files = qiso::run(&config)?;
        println!("{}: wrote {} files to {}", kind_name(kind), files.len() + 1, config.output_dir);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
