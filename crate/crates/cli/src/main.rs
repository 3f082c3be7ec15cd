use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use raibfd::scene::Layout;
use raibfd::{Enob, PhaseResolution};
use raibfd_harness::spec::parse_ris_size;
use raibfd_harness::{execute, ExperimentKind, ExperimentSpec, HarnessError, SweepValue};

/// Monte-Carlo experiments for RIS-assisted full-duplex links.
#[derive(Parser)]
#[command(name = "raibfd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Terminal SIM cost of the alternating design across RIS sizes.
    Convergence(Overrides),
    /// Residual self-interference versus the number of DL streams.
    KappaVsMd(Overrides),
    /// Residual self-interference versus RIS phase resolution.
    KappaVsBits(Overrides),
    /// UL, DL and sum-rate versus the number of DL streams.
    RatesVsMd(Overrides),
    /// Rates versus ADC ENOB for RAIBFD, SoftNull and the ideal system.
    RatesVsEnob(Overrides),
    /// Sum-rate under random RIS phase deviations (degrees).
    PhaseDeviation(Overrides),
}

/// Flags override values from the config file.
#[derive(Args, Clone)]
struct Overrides {
    /// JSON config mirroring the experiment spec.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; per-trial seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Antenna array layout: ula or ura.
    #[arg(long)]
    layout: Option<String>,
    /// RIS size as <rows>x<cols>.
    #[arg(long)]
    ris: Option<String>,
    /// RIS phase resolution: 2..6 or inf.
    #[arg(long)]
    bits: Option<String>,
    /// Number of DL streams M_d.
    #[arg(long)]
    md: Option<usize>,
    /// ADC ENOB. A comma list sets the sweep of rates-vs-enob; other kinds
    /// take a single value.
    #[arg(long, value_delimiter = ',')]
    enob: Option<Vec<String>>,
    /// Comma-separated sweep points for the chosen experiment.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<String>>,
    /// Worker threads. Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG chart next to the CSV.
    #[arg(long)]
    svg: bool,
}

fn config_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn sweep_values(items: &[String]) -> Vec<SweepValue> {
    items
        .iter()
        .map(|s| match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => SweepValue::Number(x),
            _ => SweepValue::Text(s.trim().to_string()),
        })
        .collect()
}

fn build_spec(kind: ExperimentKind, o: &Overrides) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let spec = ExperimentSpec::from_json(&text)?;
            if spec.kind != kind {
                return Err(config_err(format!(
                    "config is for {} but the subcommand is {kind}",
                    spec.kind
                )));
            }
            spec
        }
        None => ExperimentSpec::new(kind),
    };
    if spec.sweep.is_empty() && o.config.is_none() {
        spec.sweep = kind.default_sweep();
    }
    if let Some(seed) = o.seed {
        spec.scenario.seed = seed;
    }
    if let Some(t) = o.trials {
        spec.trials = t;
    }
    if let Some(l) = &o.layout {
        spec.scenario.layout = l.parse::<Layout>().map_err(config_err)?;
    }
    if let Some(r) = &o.ris {
        let (rows, cols) = parse_ris_size(r)?;
        spec.scenario.ris_rows = rows;
        spec.scenario.ris_cols = cols;
    }
    if let Some(b) = &o.bits {
        spec.scenario.ris_bits = b.parse::<PhaseResolution>().map_err(config_err)?;
    }
    if let Some(m) = o.md {
        spec.scenario.m_d = m;
    }
    if let Some(list) = &o.enob {
        if kind == ExperimentKind::RatesVsEnob {
            spec.sweep = sweep_values(list);
        } else {
            let [one] = list.as_slice() else {
                return Err(config_err("--enob takes a single value for this experiment"));
            };
            spec.scenario.enob = one.parse::<Enob>().map_err(config_err)?;
        }
    }
    if let Some(list) = &o.sweep {
        spec.sweep = sweep_values(list);
    }
    if let Some(w) = o.workers {
        spec.workers = Some(w);
    }
    if let Some(out) = &o.out {
        spec.out_path = out.display().to_string();
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, overrides) = match &cli.command {
        Command::Convergence(o) => (ExperimentKind::Convergence, o),
        Command::KappaVsMd(o) => (ExperimentKind::KappaVsMd, o),
        Command::KappaVsBits(o) => (ExperimentKind::KappaVsBits, o),
        Command::RatesVsMd(o) => (ExperimentKind::RatesVsMd, o),
        Command::RatesVsEnob(o) => (ExperimentKind::RatesVsEnob, o),
        Command::PhaseDeviation(o) => (ExperimentKind::PhaseDeviation, o),
    };
    let result = build_spec(kind, overrides).and_then(|spec| {
        let records = execute(&spec, overrides.svg)?;
        eprintln!("wrote {} records to {}", records.len(), spec.out_path);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
