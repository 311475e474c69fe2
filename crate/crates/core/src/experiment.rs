//! Flat `key = value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are skipped.
//! Every key may appear at most once and unknown keys are rejected, so a
//! typo cannot silently fall back to a default. Lists are comma-separated.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `n_subcarriers` | subcarriers N | 128 |
//! | `n_timeslots` | time slots M | 5 |
//! | `mod_order` | square QAM order | 16 |
//! | `rolloff` | RRC roll-off | 0.5 |
//! | `cp_length` | cyclic prefix N_cp | 16 |
//! | `spreading_factor` | DFT spreading Q | 4 |
//! | `symbol_power` | data symbol power | 1 |
//! | `channel` | `awgn` or `fsfc` | fsfc |
//! | `channel_length` | taps N_ch | 16 |
//! | `pdp_exponent` | tap powers 10^(-α/exponent) | 5 |
//! | `cp_loss` | charge CP energy to Eb | true |
//! | `schemes` | scheme labels | GFDM-ZF,GFDM-MMSE |
//! | `ebn0_db` | Eb/N0 grid, `inf` = noiseless | 0,4,8,12,16,20 |
//! | `n_channels` | channel realizations | 200 |
//! | `n_blocks` | blocks per channel and point | 4 |
//! | `dsic_iterations` | DSIC passes J | 4 |
//! | `papr_blocks` | PAPR blocks | 100000 |
//! | `papr_active_chunks` | occupied DFT chunks per slot | 1 |
//! | `svd_channels` | channels cycled for SVD PAPR | 10 |
//! | `spread_symbol` | symbol index for spectra | 0 |
//! | `seed` | master seed | 1 |
//! | `output` | output directory | results |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::PowerDelayProfile;
use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::metrics::{parse_scheme_list, BerSettings, ChannelModel, PaprSettings, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Fsfc,
}

impl ChannelKind {
    fn label(self) -> &'static str {
        match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Fsfc => "fsfc",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "fsfc" => Ok(ChannelKind::Fsfc),
            _ => Err(format!("expected awgn or fsfc, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gfdm: GfdmConfig,
    pub channel: ChannelKind,
    pub channel_length: usize,
    pub pdp_exponent: f64,
    pub cp_loss: bool,
    pub schemes: Vec<Scheme>,
    pub ebn0_db: Vec<f64>,
    pub n_channels: usize,
    pub n_blocks: usize,
    pub dsic_iterations: usize,
    pub papr_blocks: usize,
    pub papr_active_chunks: usize,
    pub svd_channels: usize,
    pub spread_symbol: usize,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gfdm: GfdmConfig::default(),
            channel: ChannelKind::Fsfc,
            channel_length: 16,
            pdp_exponent: 5.0,
            cp_loss: true,
            schemes: vec![Scheme::GfdmZf, Scheme::GfdmMmse],
            ebn0_db: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
            n_channels: 200,
            n_blocks: 4,
            dsic_iterations: 4,
            papr_blocks: 100_000,
            papr_active_chunks: 1,
            svd_channels: 10,
            spread_symbol: 0,
            seed: 1,
            output: PathBuf::from("results"),
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_value<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| format!("invalid value {value:?}: {e}"))
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(format!("invalid Eb/N0 value {t:?}")),
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| GfdmError::Config { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            cfg.assign(key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "n_subcarriers" => self.gfdm.n_subcarriers = parse_value(value)?,
            "n_timeslots" => self.gfdm.n_timeslots = parse_value(value)?,
            "mod_order" => self.gfdm.mod_order = parse_value(value)?,
            "rolloff" => self.gfdm.rolloff = parse_value(value)?,
            "cp_length" => self.gfdm.cp_length = parse_value(value)?,
            "spreading_factor" => self.gfdm.spreading_factor = parse_value(value)?,
            "symbol_power" => self.gfdm.symbol_power = parse_value(value)?,
            "channel" => self.channel = value.parse()?,
            "channel_length" => self.channel_length = parse_value(value)?,
            "pdp_exponent" => self.pdp_exponent = parse_value(value)?,
            "cp_loss" => self.cp_loss = parse_bool(value)?,
            "schemes" => self.schemes = parse_scheme_list(value).map_err(|e| e.to_string())?,
            "ebn0_db" => self.ebn0_db = parse_grid(value)?,
            "n_channels" => self.n_channels = parse_value(value)?,
            "n_blocks" => self.n_blocks = parse_value(value)?,
            "dsic_iterations" => self.dsic_iterations = parse_value(value)?,
            "papr_blocks" => self.papr_blocks = parse_value(value)?,
            "papr_active_chunks" => self.papr_active_chunks = parse_value(value)?,
            "svd_channels" => self.svd_channels = parse_value(value)?,
            "spread_symbol" => self.spread_symbol = parse_value(value)?,
            "seed" => self.seed = parse_value(value)?,
            "output" => {
                if value.is_empty() {
                    return Err("output path is empty".into());
                }
                self.output = PathBuf::from(value);
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks cross-field constraints that single values cannot express.
    pub fn validate(&self) -> Result<()> {
        self.gfdm.validate()?;
        let bad = |m: &str| Err(GfdmError::InvalidConfig(m.to_string()));
        if self.channel_length == 0 || self.channel_length > self.gfdm.block_len() {
            return bad("channel_length must lie in 1..=N*M");
        }
        if !(self.pdp_exponent.is_finite() && self.pdp_exponent > 0.0) {
            return bad("pdp_exponent must be positive and finite");
        }
        if self.schemes.is_empty() {
            return bad("schemes must name at least one scheme");
        }
        if self.ebn0_db.is_empty() {
            return bad("ebn0_db must hold at least one value");
        }
        if self.n_channels == 0 || self.n_blocks == 0 || self.papr_blocks == 0 || self.svd_channels == 0 {
            return bad("trial counts must be positive");
        }
        if self.spread_symbol >= self.gfdm.block_len() {
            return bad("spread_symbol must be below N*M");
        }
        if self.output.as_os_str().is_empty() {
            return bad("output path is empty");
        }
        Ok(())
    }

    /// Text that [`ExperimentConfig::parse`] maps back to `self`.
    pub fn render(&self) -> String {
        let g = &self.gfdm;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String");
        kv("n_subcarriers", g.n_subcarriers.to_string());
        kv("n_timeslots", g.n_timeslots.to_string());
        kv("mod_order", g.mod_order.to_string());
        kv("rolloff", g.rolloff.to_string());
        kv("cp_length", g.cp_length.to_string());
        kv("spreading_factor", g.spreading_factor.to_string());
        kv("symbol_power", g.symbol_power.to_string());
        kv("channel", self.channel.label().to_string());
        kv("channel_length", self.channel_length.to_string());
        kv("pdp_exponent", self.pdp_exponent.to_string());
        kv("cp_loss", self.cp_loss.to_string());
        kv("schemes", join(&self.schemes));
        kv("ebn0_db", join(&self.ebn0_db));
        kv("n_channels", self.n_channels.to_string());
        kv("n_blocks", self.n_blocks.to_string());
        kv("dsic_iterations", self.dsic_iterations.to_string());
        kv("papr_blocks", self.papr_blocks.to_string());
        kv("papr_active_chunks", self.papr_active_chunks.to_string());
        kv("svd_channels", self.svd_channels.to_string());
        kv("spread_symbol", self.spread_symbol.to_string());
        kv("seed", self.seed.to_string());
        kv("output", self.output.display().to_string());
        s
    }

    pub fn pdp(&self) -> Result<PowerDelayProfile> {
        PowerDelayProfile::from_raw(
            (0..self.channel_length)
                .map(|a| 10f64.powf(-(a as f64) / self.pdp_exponent))
                .collect(),
        )
    }

    pub fn channel_model(&self) -> Result<ChannelModel> {
        Ok(match self.channel {
            ChannelKind::Awgn => ChannelModel::Awgn,
            ChannelKind::Fsfc => ChannelModel::Fsfc(self.pdp()?),
        })
    }

    pub fn ber_settings(&self) -> Result<BerSettings> {
        Ok(BerSettings {
            ebn0_db: self.ebn0_db.clone(),
            n_channels: self.n_channels,
            n_blocks: self.n_blocks,
            channel: self.channel_model()?,
            seed: self.seed,
            cp_loss: self.cp_loss,
            dsic_iterations: self.dsic_iterations,
        })
    }

    pub fn papr_settings(&self) -> Result<PaprSettings> {
        Ok(PaprSettings {
            n_blocks: self.papr_blocks,
            symbols_per_block: 2,
            seed: self.seed,
            active_chunks: self.papr_active_chunks,
            svd_channels: self.svd_channels,
            pdp: self.pdp()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
        assert_eq!(ExperimentConfig::parse("# only a comment\n\n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn assignments_override_defaults() {
        let cfg = ExperimentConfig::parse(
            "n_subcarriers = 16  # desk scale\nmod_order=4\nschemes = gfdm-mmse, OFDM\nebn0_db = 0, inf\nchannel = AWGN\n",
        )
        .unwrap();
        assert_eq!(cfg.gfdm.n_subcarriers, 16);
        assert_eq!(cfg.gfdm.mod_order, 4);
        assert_eq!(cfg.schemes, vec![Scheme::GfdmMmse, Scheme::Ofdm]);
        assert_eq!(cfg.ebn0_db, vec![0.0, f64::INFINITY]);
        assert_eq!(cfg.channel, ChannelKind::Awgn);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("n_subcarriers = 8\nn_subcariers = 16\n", 2),
            ("seed = 1\nseed = 2\n", 2),
            ("rolloff 0.5\n", 1),
            ("\n\nschemes = GFDM-XX\n", 3),
            ("ebn0_db = 1, NaN\n", 1),
            ("cp_loss = maybe\n", 1),
        ];
        for (text, want) in cases {
            match ExperimentConfig::parse(text) {
                Err(GfdmError::Config { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            ExperimentConfig::parse("mod_order = 8\n"),
            Err(GfdmError::UnsupportedModulation(8))
        ));
        assert!(ExperimentConfig::parse("channel_length = 0\n").is_err());
    }

    #[test]
    fn pdp_follows_exponent() {
        let cfg = ExperimentConfig::default();
        let p = cfg.pdp().unwrap();
        assert_eq!(p.len(), 16);
        assert!((p.powers()[1] / p.powers()[0] - 10f64.powf(-0.2)).abs() < 1e-12);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let gfdm = (
            prop::sample::select(vec![(8usize, 3usize), (16, 5), (32, 5), (128, 5)]),
            0usize..=16,
            0.0f64..=1.0,
            prop::sample::select(vec![4usize, 16, 64]),
            prop::sample::select(vec![1usize, 2, 4]),
            0.1f64..10.0,
        );
        let run = (
            prop::bool::ANY,
            1usize..=8,
            0.5f64..10.0,
            prop::bool::ANY,
            prop::sample::subsequence(Scheme::ALL.to_vec(), 1..=Scheme::ALL.len()),
            prop::collection::vec(prop_oneof![-10.0f64..30.0, Just(f64::INFINITY)], 1..6),
        );
        let counts = (1usize..1000, 1usize..100, 0usize..8, 1usize..100_000, 1usize..5, 1usize..20, any::<u64>(), "[a-z][a-z0-9_/]{0,12}");
        (gfdm, run, counts).prop_map(|(g, r, c)| {
            let ((n, m), cp, rolloff, mod_order, q, power) = g;
            ExperimentConfig {
                gfdm: GfdmConfig {
                    n_subcarriers: n,
                    n_timeslots: m,
                    cp_length: cp,
                    rolloff,
                    mod_order,
                    spreading_factor: q,
                    symbol_power: power,
                },
                channel: if r.0 { ChannelKind::Awgn } else { ChannelKind::Fsfc },
                channel_length: r.1,
                pdp_exponent: r.2,
                cp_loss: r.3,
                schemes: r.4,
                ebn0_db: r.5,
                n_channels: c.0,
                n_blocks: c.1,
                dsic_iterations: c.2,
                papr_blocks: c.3,
                papr_active_chunks: c.4,
                svd_channels: c.5,
                spread_symbol: 0,
                seed: c.6,
                output: PathBuf::from(c.7),
            }
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(cfg in arb_config()) {
            prop_assert_eq!(ExperimentConfig::parse(&cfg.render()).unwrap(), cfg);
        }

        #[test]
        fn parse_never_panics(text in "(\\PC{0,40}\n){0,6}") {
            let _ = ExperimentConfig::parse(&text);
        }
    }
}
