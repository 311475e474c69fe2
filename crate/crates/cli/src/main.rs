//! `gfdm-lab`: runs the validation suite and writes experiment CSVs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gfdm::channel::{ebn0_to_noise_variance, sample_channel, trial_rng};
use gfdm::experiment::{ChannelKind, ExperimentConfig};
use gfdm::metrics::complexity::{matches_printed, ComplexityEntry, ComplexityExtras, Scenario};
use gfdm::metrics::{complexity_count, frequency_spread, occupancy, papr_ccdf, run_ber, BerCurve, PaprCcdf, Scheme};
use gfdm::modulator::{build_modulation_matrix, Ordering};
use gfdm::precoders::SvdFactors;
use gfdm::receivers::{effective_channel, MmseSinrModel};
use gfdm::validation::{desk_scale, run_validation, ValidationOptions};
use gfdm::channel::ChannelRealization;
use gfdm::make_rrc_pulse;

#[derive(Parser, Debug)]
#[command(name = "gfdm-lab", version, about = "GFDM waveform laboratory")]
struct Cli {
    /// Flat `key = value` experiment file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo trials; 0 uses every core.
    #[arg(long, global = true, value_name = "INT", default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs the structure, unitarity, oracle and reconstruction properties.
    Validate,
    /// Simulated and analytical BER per scheme (ber.csv).
    Ber,
    /// PAPR CCDF per scheme (papr.csv).
    Papr,
    /// Per-symbol MMSE SINR decomposition averaged over channels (sinr.csv).
    Sinr,
    /// Frequency spread of one symbol per scheme (spread.csv).
    Spread,
    /// Complex-multiplication counts against the published tables (complexity.csv).
    Complexity {
        #[arg(long, value_enum, default_value_t = ScenarioArg::All)]
        scenario: ScenarioArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Ti,
    Wran,
    All,
}

impl ScenarioArg {
    fn scenarios(self) -> Vec<Scenario> {
        match self {
            ScenarioArg::Ti => vec![Scenario::TactileInternet],
            ScenarioArg::Wran => vec![Scenario::Wran],
            ScenarioArg::All => Scenario::ALL.to_vec(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut exp = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        exp.seed = seed;
    }
    if let Some(out) = &cli.out {
        exp.output = out.clone();
    }
    Ok(exp)
}

fn create_csv(dir: &Path, name: &str, header: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}")?;
    Ok((path, w))
}

fn finish(path: PathBuf, mut w: BufWriter<File>) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(exp: &ExperimentConfig) -> Result<bool> {
    let desk = desk_scale(exp);
    let g = &desk.gfdm;
    println!(
        "validating N = {}, M = {}, Q = {}, ROF = {}, cp = {}, channel {:?} of {} taps",
        g.n_subcarriers, g.n_timeslots, g.spreading_factor, g.rolloff, g.cp_length, desk.channel, desk.channel_length
    );
    let report = run_validation(&desk, &ValidationOptions::default());
    println!("{report}");
    Ok(report.passed())
}

fn cmd_ber(exp: &ExperimentConfig) -> Result<()> {
    let settings = exp.ber_settings()?;
    let (path, mut w) = create_csv(&exp.output, "ber.csv", BerCurve::CSV_HEADER)?;
    for &scheme in &exp.schemes {
        let curve = run_ber(&exp.gfdm, scheme, &settings).with_context(|| format!("BER run for {scheme}"))?;
        curve.write_csv_rows(&mut w)?;
    }
    finish(path, w)
}

fn cmd_papr(exp: &ExperimentConfig) -> Result<()> {
    let settings = exp.papr_settings()?;
    let (path, mut w) = create_csv(&exp.output, "papr.csv", PaprCcdf::CSV_HEADER)?;
    for &scheme in &exp.schemes {
        let ccdf = papr_ccdf(&exp.gfdm, scheme, &settings).with_context(|| format!("PAPR run for {scheme}"))?;
        println!("{scheme}: PAPR exceeded by 0.1% of blocks = {:.2} dB", ccdf.quantile(1e-3));
        ccdf.write_csv_rows(&mut w)?;
    }
    finish(path, w)
}

fn channel_for(exp: &ExperimentConfig, index: u64) -> Result<ChannelRealization> {
    let dim = exp.gfdm.block_len();
    Ok(match exp.channel {
        ChannelKind::Awgn => ChannelRealization::identity(dim),
        ChannelKind::Fsfc => sample_channel(&exp.pdp()?, dim, &mut trial_rng(exp.seed, index << 20))?,
    })
}

fn cmd_sinr(exp: &ExperimentConfig) -> Result<()> {
    use rayon::prelude::*;
    let cfg = &exp.gfdm;
    let a = build_modulation_matrix(&make_rrc_pulse(cfg)?, Ordering::NOrdered);
    let models: Vec<MmseSinrModel> = (0..exp.n_channels as u64)
        .into_par_iter()
        .map(|c| Ok(MmseSinrModel::new(&effective_channel(&channel_for(exp, c)?, &a)?)?))
        .collect::<Result<_>>()?;
    let (path, mut w) = create_csv(&exp.output, "sinr.csv", "ebn0_db,symbol,sinr_db,p_sig,p_inr,p_npp")?;
    let count = models.len() as f64;
    for &ebn0 in &exp.ebn0_db {
        let nv = ebn0_to_noise_variance(cfg, ebn0, exp.cp_loss);
        let reports: Vec<_> = models.iter().map(|m| m.report(nv, cfg.symbol_power)).collect();
        for l in 0..a.dim() {
            let mean = |f: &dyn Fn(&gfdm::receivers::SinrReport) -> f64| reports.iter().map(f).sum::<f64>() / count;
            let sinr = mean(&|r| r.per_symbol[l]);
            writeln!(
                w,
                "{ebn0},{l},{:.6},{:.6e},{:.6e},{:.6e}",
                10.0 * sinr.log10(),
                mean(&|r| r.p_sig[l]),
                mean(&|r| r.p_inr[l]),
                mean(&|r| r.p_npp[l])
            )?;
        }
    }
    finish(path, w)
}

fn cmd_spread(exp: &ExperimentConfig) -> Result<()> {
    let cfg = &exp.gfdm;
    let (path, mut w) = create_csv(&exp.output, "spread.csv", "scheme,bin,magnitude")?;
    for &scheme in &exp.schemes {
        let svd = if scheme == Scheme::SvdPrec {
            let a = build_modulation_matrix(&make_rrc_pulse(cfg)?, scheme.ordering());
            Some(SvdFactors::new(&effective_channel(&channel_for(exp, 0)?, &a)?))
        } else {
            None
        };
        let spectrum = frequency_spread(cfg, scheme, exp.spread_symbol, svd.as_ref())?;
        println!("{scheme}: {} bins hold 99% of the energy", occupancy(&spectrum, 0.99));
        for (bin, mag) in spectrum.iter().enumerate() {
            writeln!(w, "{scheme},{bin},{mag:.6e}")?;
        }
    }
    finish(path, w)
}

fn cmd_complexity(exp: &ExperimentConfig, scenario: ScenarioArg) -> Result<()> {
    let extras = ComplexityExtras {
        dsic_iterations: exp.dsic_iterations,
        spreading_factor: exp.gfdm.spreading_factor,
    };
    let (path, mut w) = create_csv(&exp.output, "complexity.csv", "scenario,entry,n,m,count,published,matches")?;
    for sc in scenario.scenarios() {
        let (n, m) = sc.dims();
        println!("{} (N = {n}, M = {m})", sc.label());
        for entry in ComplexityEntry::ALL {
            let report = complexity_count(entry, n, m, extras)?;
            let published = sc.published_value(entry);
            let matches = published.map(|p| matches_printed(report.count, p)).transpose()?;
            let flag = match matches {
                Some(false) => "  <- differs from the published value",
                _ => "",
            };
            println!("  {:<22} {:>12.4e}  published {:<8}{flag}", entry.label(), report.count, published.unwrap_or("-"));
            writeln!(
                w,
                "{},{},{n},{m},{:.1},{},{}",
                sc.label(),
                entry.label(),
                report.count,
                published.unwrap_or(""),
                matches.map_or(String::new(), |b| b.to_string())
            )?;
        }
    }
    finish(path, w)
}

fn run(cli: &Cli) -> Result<bool> {
    let exp = load_config(cli)?;
    match &cli.command {
        Command::Validate => return cmd_validate(&exp),
        Command::Ber => cmd_ber(&exp)?,
        Command::Papr => cmd_papr(&exp)?,
        Command::Sinr => cmd_sinr(&exp)?,
        Command::Spread => cmd_spread(&exp)?,
        Command::Complexity { scenario } => cmd_complexity(&exp, *scenario)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cli.workers);
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
