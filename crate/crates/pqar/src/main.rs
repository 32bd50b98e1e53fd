// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pqar::experiment::{run_experiment, ExperimentConfig, Setting};
use pqar::io::{read_series, write_file, write_series};
use pqar::report::write_plot_data;
use pqar::{segment, PqarError, Result, SegmentationReport};
use pqar_core::mdl::optimal_weights;
use pqar_core::sim::{normal_pdf, normal_quantile, simulate_piecewise, simulate_preset, Preset, Regime};
use pqar_core::{GaConfig, QuantileSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "pqar", version, about = "Piecewise quantile autoregression segmentation")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a series read from CSV.
    Segment(SegmentArgs),
    /// Simulate a named or user-specified process to CSV.
    Simulate(SimulateArgs),
    /// Replicate a simulation study and summarize detection rates.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct GaArgs {
    /// JSON file with GA settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    islands: Option<usize>,
    #[arg(long)]
    subpopulation: Option<usize>,
    #[arg(long)]
    migration_interval: Option<usize>,
    #[arg(long)]
    migrants: Option<usize>,
    #[arg(long)]
    stall_limit: Option<usize>,
    #[arg(long)]
    max_generations: Option<usize>,
    #[arg(long)]
    max_order: Option<usize>,
}

impl GaArgs {
    fn resolve(&self, seed: u64) -> Result<GaConfig> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&read_text(path)?)?,
            None => GaConfig::default(),
        };
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.islands, self.islands);
        set(&mut c.subpopulation, self.subpopulation);
        set(&mut c.migration_interval, self.migration_interval);
        set(&mut c.migrants, self.migrants);
        set(&mut c.stall_limit, self.stall_limit);
        set(&mut c.max_generations, self.max_generations);
        set(&mut c.max_order, self.max_order);
        c.seed = seed;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// CSV with one value per line or `index,value` rows.
    input: PathBuf,
    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    tau: Vec<f64>,
    /// `equal`, `optimal`, or a comma-separated list of weights.
    #[arg(long, default_value = "equal")]
    weights: String,
    /// Density values f(F^-1(tau)) for `--weights optimal`; standard normal
    /// when omitted.
    #[arg(long, value_delimiter = ',')]
    densities: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `t,y,q_tau...,break` columns for plotting.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
    /// Add the elapsed wall time to the report (makes it irreproducible).
    #[arg(long)]
    record_timing: bool,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<String>,
    /// JSON file `{"regimes": [{"spec": {...}, "len": ...}, ...]}`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series CSV; the ground truth goes to `<out>.truth.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    preset: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Quantile levels, comma separated, each analysed on its own.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    tau: Vec<f64>,
    /// Also analyse all levels jointly with equal weights.
    #[arg(long)]
    mult: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary CSV; a table is printed to standard output either way.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full summary with every run as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Serialize, Deserialize)]
struct SimSpecFile {
    regimes: Vec<Regime>,
}

#[derive(Serialize)]
struct SimMetadata {
    source: String,
    seed: u64,
    n: usize,
    num_breaks: usize,
    /// 1-based last observation of each segment before a change.
    breaks: Vec<usize>,
    fractions: Vec<f64>,
    segments: Vec<String>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| PqarError::Read {
        path: path.to_owned(),
        source,
    })
}

fn quantile_spec(taus: Vec<f64>, weights: &str, densities: Option<Vec<f64>>) -> Result<QuantileSpec> {
    let spec = match weights {
        "equal" => QuantileSpec::equal(taus)?,
        "optimal" => {
            let v = densities
                .unwrap_or_else(|| taus.iter().map(|&t| normal_pdf(normal_quantile(t))).collect());
            QuantileSpec::new(taus.clone(), optimal_weights(&taus, &v)?)?
        }
        list => {
            let w = list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| PqarError::Input(format!("invalid --weights value {list:?}")))?;
            QuantileSpec::new(taus, w)?
        }
    };
    Ok(spec)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, |f| f.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_segment(args: SegmentArgs) -> Result<()> {
    let started = Instant::now();
    let series = read_series(&args.input)?;
    let spec = quantile_spec(args.tau, &args.weights, args.densities)?;
    let config = args.ga.resolve(args.seed)?;
    let outcome = segment(&series, &spec, &config)?;
    let mut report = SegmentationReport::new(&outcome, &spec, &config);
    report.input = args
        .input
        .file_name()
        .map(|s| s.to_string_lossy().into_owned());
    if let Some(path) = &args.emit_plot_data {
        write_file(path, |f| {
            write_plot_data(f, &series, &outcome).map_err(std::io::Error::other)
        })?;
    }
    if args.record_timing {
        report.wall_time_secs = Some(started.elapsed().as_secs_f64());
    }
    emit(args.out.as_deref(), &report.to_json()?)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (series, meta) = if let Some(name) = &args.preset {
        let preset: Preset = name.parse()?;
        let n = args.n.unwrap_or(preset.default_len());
        let sim = simulate_preset(preset, n, &mut rng)?;
        let t = sim.truth;
        let meta = SimMetadata {
            source: t.preset,
            seed: args.seed,
            n,
            num_breaks: t.num_breaks,
            breaks: t.breaks,
            fractions: t.fractions,
            segments: t.segments,
        };
        (sim.series, meta)
    } else {
        let path = args.spec.as_ref().expect("clap enforces --preset or --spec");
        let file: SimSpecFile = serde_json::from_str(&read_text(path)?)?;
        let n: usize = file.regimes.iter().map(|r| r.len).sum();
        if args.n.is_some_and(|m| m != n) {
            return Err(PqarError::Input(format!(
                "--n {} disagrees with the regime lengths (total {n})",
                args.n.unwrap()
            )));
        }
        let breaks: Vec<usize> = file
            .regimes
            .iter()
            .scan(0, |acc, r| {
                *acc += r.len;
                Some(*acc)
            })
            .take(file.regimes.len().saturating_sub(1))
            .collect();
        let series = simulate_piecewise(&file.regimes, &mut rng)?;
        let meta = SimMetadata {
            source: path.display().to_string(),
            seed: args.seed,
            n,
            num_breaks: breaks.len(),
            fractions: breaks.iter().map(|&k| k as f64 / n as f64).collect(),
            breaks,
            segments: file
                .regimes
                .iter()
                .map(|r| serde_json::to_string(&r.spec).unwrap_or_default())
                .collect(),
        };
        (series, meta)
    };
    write_file(&args.out, |f| write_series(f, &series).map_err(std::io::Error::other))?;
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".truth.json");
    let text = serde_json::to_string_pretty(&meta)? + "\n";
    write_file(Path::new(&sidecar), |f| f.write_all(text.as_bytes()))
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let preset: Preset = args.preset.parse()?;
    let mut settings: Vec<Setting> = args.tau.iter().map(|&t| Setting::single(t)).collect();
    if args.mult {
        settings.push(Setting::mult(args.tau.clone()));
    }
    let cfg = ExperimentConfig {
        preset,
        n: args.n.unwrap_or(preset.default_len()),
        reps: args.reps,
        settings,
        seed: args.seed,
        ga: args.ga.resolve(0)?,
    };
    let summary = run_experiment(&cfg)?;
    print!("{summary}");
    if let Some(path) = &args.out {
        write_file(path, |f| summary.write_csv(f).map_err(std::io::Error::other))?;
    }
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&summary)? + "\n";
        write_file(path, |f| f.write_all(text.as_bytes()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || match cli.command {
        Command::Segment(a) => cmd_segment(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(PqarError::Input(format!("cannot start {t} threads: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pqar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
