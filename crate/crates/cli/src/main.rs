//! `nfirs` command-line front end.
//!
//! `simulate` writes a scenario directory (`config.toml`, `truth.csv`,
//! `operators.json`, `tensor.csv`) that `estimate` and `crlb` read back
//! with `--input`. `sweep` runs the Monte Carlo experiment and writes the
//! result CSV plus its manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nfirs::estimator::{self, Codebooks};
use nfirs::harness::{self, sweep, SweepSpec};
use nfirs::{crlb, io, measurement, Error, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nfirs", version, about = "Near-field IRS channel simulation, estimation and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a scenario and write the noisy measurement tensor and its truth.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// SNR of the written tensor (dB, or `inf` for no noise).
        #[arg(long = "snr-list", default_value = "20")]
        snr: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the estimator on a directory written by `simulate`.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Overrides `<input>/config.toml`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Estimate CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cramér-Rao bounds of a scenario over a list of SNR points.
    Crlb {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Scenario directory written by `simulate`; otherwise one is drawn
        /// from the seed.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "snr-list", default_value = "0,10,20,30")]
        snr: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo NMSE-versus-SNR sweep.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long = "snr-list", default_value = "0,10,20,30")]
        snr: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; unset fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-size scenario instead of the desk-scale one.
    #[arg(long)]
    full_scale: bool,
    /// Master seed (overrides the `seed` field of the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Scatterer distance range in meters, `lo,hi`.
    #[arg(long = "distance-range")]
    distance_range: Option<String>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path, self.full_scale)?,
            None if self.full_scale => ScenarioConfig::full_scale(),
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(range) = &self.distance_range {
            let v = parse_list(range)?;
            if v.len() != 2 {
                return Err(Error::InvalidConfig(format!("--distance-range needs two values, got {range:?}")));
            }
            cfg.distance_range = [v[0], v[1]];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A config file overlaid on the desk or full-size defaults.
fn load_config(path: &Path, full_scale: bool) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    if !full_scale {
        return ScenarioConfig::from_toml_str(&text);
    }
    let overrides: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut base: toml::Table = toml::from_str(&ScenarioConfig::full_scale().to_toml_string()).expect("own output parses");
    merge(&mut base, overrides);
    ScenarioConfig::from_toml_str(&toml::to_string(&base).expect("table serializes"))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Comma-separated numbers; `inf` is accepted.
fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            _ => t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}"))),
        })
        .collect()
}

fn parse_snr(s: &str) -> Result<Vec<f64>> {
    let v = parse_list(s)?;
    if v.is_empty() {
        return Err(Error::InvalidConfig("SNR list is empty".into()));
    }
    if v.iter().any(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
        return Err(Error::InvalidConfig("SNR values must be finite or inf".into()));
    }
    Ok(v)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(cfg: &ScenarioConfig, snr: &str, out: &Path) -> Result<()> {
    let snr = parse_snr(snr)?;
    if snr.len() != 1 {
        return Err(Error::InvalidConfig("simulate takes a single SNR value".into()));
    }
    let (paths, ops) = sweep::trial_scenario(cfg, cfg.seed, 0);
    let clean = measurement::synthesize_noiseless(&paths, &ops, cfg)?;
    let y = measurement::add_noise(&clean, ops, snr[0], sweep::noise_seed(cfg.seed, 0, 0));
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    fs::write(out.join("truth.csv"), io::paths_to_csv(&paths))?;
    fs::write(out.join("operators.json"), io::operators_to_json(&y.operators))?;
    io::save_tensor(out.join("tensor.csv"), &y.data, y.sigma2, y.snr_linear)?;
    println!(
        "wrote {} ({} paths, Q={} T_a={} P={}, sigma2={:e})",
        out.display(),
        paths.len(),
        cfg.slots,
        cfg.frames,
        cfg.subcarriers,
        y.sigma2
    );
    Ok(())
}

fn estimate(input: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let cfg = match config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::load(input.join("config.toml"))?,
    };
    let tensor = io::load_tensor(input.join("tensor.csv"))?;
    let ops = io::operators_from_json(&fs::read_to_string(input.join("operators.json"))?)?;
    let books = Codebooks::from_config(&cfg);
    let est = estimator::estimate_tensor(&tensor.data, &ops, &cfg, &books)?;
    write_or_print(out, &io::estimate_to_csv(&est))?;
    let truth = input.join("truth.csv");
    if out.is_some() && truth.exists() {
        let truth = io::paths_from_csv(&fs::read_to_string(truth)?)?;
        let est_paths: Vec<_> = est.paths.iter().map(|p| p.to_path()).collect();
        let nmse = harness::channel_nmse(&truth, &est_paths, &cfg)?;
        println!("channel NMSE {:.2} dB", harness::to_db(nmse));
    }
    Ok(())
}

fn bounds(cfg: &ScenarioConfig, input: Option<&Path>, snr: &str, out: Option<&Path>) -> Result<()> {
    let snr = parse_snr(snr)?;
    let (cfg, paths, ops) = match input {
        Some(dir) => {
            let cfg = ScenarioConfig::load(dir.join("config.toml"))?;
            let paths = io::paths_from_csv(&fs::read_to_string(dir.join("truth.csv"))?)?;
            let ops = io::operators_from_json(&fs::read_to_string(dir.join("operators.json"))?)?;
            (cfg, paths, ops)
        }
        None => {
            let (paths, ops) = sweep::trial_scenario(cfg, cfg.seed, 0);
            (cfg.clone(), paths, ops)
        }
    };
    let clean = measurement::synthesize_noiseless(&paths, &ops, &cfg)?;
    let unit = crlb::crlb_report(&paths, &ops, &cfg, 1.0)?;
    let mut rows = Vec::with_capacity(snr.len());
    for s in snr {
        let sigma2 = measurement::noise_variance(&clean, s);
        if sigma2 == 0.0 {
            return Err(Error::InvalidConfig("the bound is undefined without noise (inf SNR)".into()));
        }
        rows.push((s, unit.rescaled(sigma2)));
    }
    write_or_print(out, &io::crlb_to_csv(&rows))
}

fn run_sweep(cfg: ScenarioConfig, snr: &str, trials: usize, out: &Path) -> Result<()> {
    let spec = SweepSpec {
        master_seed: cfg.seed,
        scenario: cfg,
        snr_db: parse_snr(snr)?,
        trials,
    };
    let outcome = harness::run_sweep(&spec)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    harness::emit_results(&outcome.rows, &spec, out)?;
    for row in outcome.rows.iter().filter(|r| r.family == "channel") {
        println!(
            "snr {:>6} dB  channel NMSE median {:>8.2} dB  mean {:>8.2} dB  failed {}/{}",
            row.snr_db,
            row.median_nmse_db,
            row.mean_nmse_db,
            row.trials_failed,
            row.trials_ok + row.trials_failed
        );
    }
    println!("wrote {} and {}", out.display(), harness::manifest_path(out).display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, snr, out } => simulate(&scenario.resolve()?, &snr, &out),
        Command::Estimate { input, config, out } => estimate(&input, config.as_deref(), out.as_deref()),
        Command::Crlb {
            scenario,
            input,
            snr,
            out,
        } => bounds(&scenario.resolve()?, input.as_deref(), &snr, out.as_deref()),
        Command::Sweep {
            scenario,
            snr,
            trials,
            out,
        } => run_sweep(scenario.resolve()?, &snr, trials, &out),
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let message = message.replace('\n', " ");
    eprintln!("error: kind={kind} message={}", message.trim());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("Usage", &e.to_string()),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
