use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use risgsm::curve::BerCurve;
use risgsm::sim::{in_pool, run_simulation, SimOptions};
use risgsm::sweep::{compare, run_theory, write_outputs, SweepError, SweepManifest};
use risgsm::theory::{BoundOptions, CovarianceModel, Enumeration, TheoryError, DEFAULT_PAIR_CEILING};
use risgsm::{SystemConfig, SystemParams};

const EXIT_CONFIG: u8 = 2;
const EXIT_REFUSED: u8 = 3;

#[derive(Parser)]
#[command(name = "risgsm", version, about = "RIS-aided receive GSM link simulator and union bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER of one configuration.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Also evaluate the union bound.
        #[arg(long)]
        theory: bool,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Union bound of one configuration.
    Theory {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Run every curve of a manifest and report SNR gaps.
    Compare {
        /// Manifest TOML with `[[curve]]` entries.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the seed of every curve.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the trial cap of every curve.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the error target of every curve.
        #[arg(long)]
        max_bit_errors: Option<u64>,
        /// Force the union bound on (it is otherwise taken from the manifest).
        #[arg(long)]
        theory: bool,
        /// Skip Monte Carlo.
        #[arg(long)]
        no_simulate: bool,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Check a configuration or manifest and print its derived quantities.
    ValidateConfig {
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// System configuration TOML.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated SNR grid in dB, overriding the configuration.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    /// Curve label used for file names.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumerationArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct BoundArgs {
    /// Pair enumeration for the union bound.
    #[arg(long, value_enum)]
    enumeration: Option<EnumerationArg>,
    /// Ordered pairs drawn by sampled enumeration.
    #[arg(long, default_value_t = 100_000)]
    pairs: u64,
    /// Seed of sampled enumeration.
    #[arg(long, default_value_t = 1)]
    pair_seed: u64,
    /// Largest number of ordered pairs exhaustive enumeration accepts.
    #[arg(long, default_value_t = DEFAULT_PAIR_CEILING)]
    ceiling: u64,
    /// Use the per-antenna interference variance `|s|^2 + |s_hat|^2` for
    /// every selected antenna.
    #[arg(long)]
    simplified_covariance: bool,
}

impl BoundArgs {
    fn enumeration(&self) -> Option<Enumeration> {
        self.enumeration.map(|e| match e {
            EnumerationArg::Exhaustive => Enumeration::Exhaustive {
                ceiling: self.ceiling,
            },
            EnumerationArg::Sampled => Enumeration::Sampled {
                pairs: self.pairs,
                seed: self.pair_seed,
            },
        })
    }

    fn options(&self, base: BoundOptions) -> BoundOptions {
        let mut o = base;
        if self.simplified_covariance {
            o.covariance = CovarianceModel::Simplified;
        }
        o
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn config_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        error: error.into(),
    }
}

fn theory_failure(error: TheoryError) -> Failure {
    let code = if matches!(error, TheoryError::PairCeiling { .. }) {
        EXIT_REFUSED
    } else {
        1
    };
    Failure {
        code,
        error: error.into(),
    }
}

fn sweep_failure(error: SweepError) -> Failure {
    let code = if error.is_enumeration_refusal() {
        EXIT_REFUSED
    } else if error.is_config_error() {
        EXIT_CONFIG
    } else {
        1
    };
    Failure {
        code,
        error: error.into(),
    }
}

fn load_config(path: &Path) -> Result<SystemConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_failure)?;
    SystemConfig::from_toml(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(config_failure)
}

fn prepare(run: &RunArgs) -> Result<(SystemParams, Vec<f64>, String), Failure> {
    let mut config = load_config(&run.config)?;
    if let Some(seed) = run.seed {
        config.seed = seed;
    }
    if let Some(grid) = &run.snr_db {
        config.snr_db = grid.clone();
    }
    let params = config.validate().map_err(config_failure)?;
    if params.config.snr_db.is_empty() {
        return Err(config_failure(anyhow::anyhow!("empty SNR grid")));
    }
    let grid = params.config.snr_db.clone();
    let label = run.label.clone().unwrap_or_else(|| {
        run.config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| params.scheme().to_string())
    });
    Ok((params, grid, label))
}

fn report(curve: &BerCurve) {
    println!("{} (R = {}, {})", curve.label, curve.rate, curve.fingerprint);
    for p in &curve.points {
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
        println!(
            "  {:>7} dB  ber {:>11}  bound {:>11}  errors {:>6}  trials {:>9}  {}",
            p.snr_db,
            fmt(p.ber),
            fmt(p.theory_bound),
            p.errors.total,
            p.trials,
            p.flag().as_str()
        );
    }
}

fn finish(out: &Path, name: &str, curves: &[BerCurve]) -> Result<(), Failure> {
    let files = write_outputs(out, name, curves, None).map_err(sweep_failure)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn simulate(run: RunArgs, theory: bool, bound: BoundArgs) -> Result<(), Failure> {
    let (params, grid, label) = prepare(&run)?;
    let options = SimOptions {
        workers: run.workers,
        ..SimOptions::default()
    };
    let mut curve = run_simulation(&params, &grid, options).with_label(label.clone());
    if theory {
        in_pool(run.workers, || {
            run_theory(
                &mut curve,
                &params,
                bound.enumeration().unwrap_or_default(),
                bound.options(BoundOptions::default()),
            )
        })
        .map_err(theory_failure)?;
    }
    report(&curve);
    finish(&run.out, &label, &[curve])
}

fn theory(run: RunArgs, bound: BoundArgs) -> Result<(), Failure> {
    let (params, grid, label) = prepare(&run)?;
    let mut curve = BerCurve::new(&params, &grid).with_label(label.clone());
    in_pool(run.workers, || {
        run_theory(
            &mut curve,
            &params,
            bound.enumeration().unwrap_or_default(),
            bound.options(BoundOptions::default()),
        )
    })
    .map_err(theory_failure)?;
    report(&curve);
    finish(&run.out, &label, &[curve])
}

#[allow(clippy::too_many_arguments)]
fn run_compare(
    manifest: PathBuf,
    out: PathBuf,
    workers: usize,
    seed: Option<u64>,
    trials: Option<u64>,
    max_bit_errors: Option<u64>,
    theory: bool,
    no_simulate: bool,
    bound: BoundArgs,
) -> Result<(), Failure> {
    let mut m = SweepManifest::load(&manifest).map_err(sweep_failure)?;
    for c in &mut m.curves {
        if let Some(s) = seed {
            c.config.seed = s;
        }
        if let Some(t) = trials {
            c.config.trials = t;
        }
        if let Some(e) = max_bit_errors {
            c.config.max_bit_errors = e;
        }
    }
    m.theory |= theory;
    m.simulate &= !no_simulate;
    if let Some(e) = bound.enumeration() {
        m.enumeration = Some(e);
    }
    m.bound = bound.options(m.bound);
    let options = SimOptions {
        workers,
        ..SimOptions::default()
    };
    let cmp = compare(&m, options).map_err(sweep_failure)?;
    for c in &cmp.curves {
        report(c);
    }
    for g in &cmp.gaps {
        match g.advantage_db {
            Some(d) => println!(
                "gap at BER {:.0e} ({:?}): {} vs {}: {:+.2} dB",
                g.target_ber, g.source, g.first, g.second, d
            ),
            None => println!(
                "gap at BER {:.0e} ({:?}): {} vs {}: target not bracketed",
                g.target_ber, g.source, g.first, g.second
            ),
        }
    }
    let files = write_outputs(&out, &cmp.name, &cmp.curves, Some(&cmp)).map_err(sweep_failure)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn describe(label: &str, p: &SystemParams) {
    println!(
        "{label}: scheme {} N={} N_R={} N_a={} N_g={} m0={} group_bits={} carrier_bits={} R={} codebook={}",
        p.scheme(),
        p.elements(),
        p.receive_antennas(),
        p.active_antennas(),
        p.group_len,
        p.spatial_bits,
        p.group_bits,
        p.carrier_bits,
        p.rate,
        p.codebook_size()
    );
}

fn validate(config: Option<PathBuf>, manifest: Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = config {
        let p = load_config(&path)?.validate().map_err(config_failure)?;
        describe(&path.display().to_string(), &p);
    } else if let Some(path) = manifest {
        let m = SweepManifest::load(&path).map_err(sweep_failure)?;
        let params = m.validate().map_err(sweep_failure)?;
        for (c, p) in m.curves.iter().zip(&params) {
            describe(&c.label, p);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { run, theory: t, bound } => simulate(run, t, bound),
        Command::Theory { run, bound } => theory(run, bound),
        Command::Compare {
            manifest,
            out,
            workers,
            seed,
            trials,
            max_bit_errors,
            theory,
            no_simulate,
            bound,
        } => run_compare(
            manifest,
            out,
            workers,
            seed,
            trials,
            max_bit_errors,
            theory,
            no_simulate,
            bound,
        ),
        Command::ValidateConfig { config, manifest } => validate(config, manifest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
