//! Peak-to-average power ratio and its empirical CCDF.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::Scheme;
use crate::channel::{sample_channel, trial_rng, PowerDelayProfile};
use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::linalg::{ifft_unitary, SplitMatrix, C64};
use crate::modulator::{build_modulation_matrix, GfdmModem};
use crate::precoders::{make_precoder, PrecoderKind, PrecoderSpec, SvdFactors};
use crate::pulse::make_rrc_pulse;
use crate::qam::Constellation;
use crate::receivers::effective_channel;

/// Blocks drawn from one random stream.
const BATCH: usize = 500;
/// Stream offset of the SVD channel draws, above every batch index.
const CHANNEL_STREAM: u64 = 1 << 40;
const GRID_STEP_DB: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct PaprSettings {
    pub n_blocks: usize,
    /// GFDM symbols concatenated into one measured block.
    pub symbols_per_block: usize,
    pub seed: u64,
    /// DFT chunks per time slot that carry data for LFDMA/IFDMA; the rest
    /// of the subcarriers stay empty, as seen by one user's transmitter.
    pub active_chunks: usize,
    /// Channels whose SVD precoders are cycled through for SVD-Prec.
    pub svd_channels: usize,
    pub pdp: PowerDelayProfile,
}

impl Default for PaprSettings {
    fn default() -> Self {
        Self {
            n_blocks: 100_000,
            symbols_per_block: 2,
            seed: 1,
            active_chunks: 1,
            svd_channels: 10,
            pdp: PowerDelayProfile::exponential(16).expect("nonempty profile"),
        }
    }
}

/// Empirical PAPR distribution of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PaprCcdf {
    pub scheme: Scheme,
    pub papr_grid_db: Vec<f64>,
    /// `P(PAPR ≥ grid point)`.
    pub ccdf: Vec<f64>,
    /// Per-block PAPR in dB, ascending.
    pub samples: Vec<f64>,
}

impl PaprCcdf {
    pub const CSV_HEADER: &'static str = "scheme,papr_db,ccdf";

    fn from_samples(scheme: Scheme, mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        let top = samples.last().copied().unwrap_or(0.0);
        let points = (top / GRID_STEP_DB).ceil() as usize + 2;
        let n = samples.len() as f64;
        let papr_grid_db: Vec<f64> = (0..points).map(|i| i as f64 * GRID_STEP_DB).collect();
        let ccdf = papr_grid_db
            .iter()
            .map(|&g| (samples.len() - samples.partition_point(|&s| s < g)) as f64 / n)
            .collect();
        Self {
            scheme,
            papr_grid_db,
            ccdf,
            samples,
        }
    }

    /// PAPR exceeded by at most a fraction `p` of the blocks.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        let above = ((n as f64 * p).floor() as usize).min(n - 1);
        self.samples[n - 1 - above]
    }

    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (g, c) in self.papr_grid_db.iter().zip(&self.ccdf) {
            writeln!(out, "{},{g:.1},{c:.6e}", self.scheme)?;
        }
        Ok(())
    }
}

/// `max|x|² / mean|x|²` in dB; an all-zero signal counts as 0 dB.
pub fn papr_db(x: &[C64]) -> f64 {
    let powers = x.iter().map(|v| v.norm_sqr());
    let (peak, total) = powers.fold((0.0f64, 0.0), |(p, t), v| (p.max(v), t + v));
    if total <= 0.0 {
        return 0.0;
    }
    (10.0 * (peak * x.len() as f64 / total).log10()).max(0.0)
}

enum Source {
    Gfdm {
        modem: GfdmModem,
        precoder: PrecoderSpec,
        /// Data positions in the precoder input; `None` fills all.
        active: Option<Vec<usize>>,
    },
    Ofdm,
    Svd(Vec<SplitMatrix>),
}

fn build_source(cfg: &GfdmConfig, scheme: Scheme, settings: &PaprSettings) -> Result<Source> {
    let Some(kind) = scheme.precoder() else {
        return Ok(Source::Ofdm);
    };
    let pulse = make_rrc_pulse(cfg)?;
    if kind == PrecoderKind::Svd {
        let a = build_modulation_matrix(&pulse, kind.ordering());
        let tx = (0..settings.svd_channels.max(1))
            .into_par_iter()
            .map(|c| {
                let mut rng = trial_rng(settings.seed, CHANNEL_STREAM + c as u64);
                let channel = sample_channel(&settings.pdp, a.dim(), &mut rng)?;
                let factors = SvdFactors::new(&effective_channel(&channel, &a)?);
                Ok(SplitMatrix::new(&(a.entries() * &factors.v)))
            })
            .collect::<Result<_>>()?;
        return Ok(Source::Svd(tx));
    }
    let precoder = make_precoder(kind, cfg, None)?;
    let active = matches!(kind, PrecoderKind::DftLfdma | PrecoderKind::DftIfdma).then(|| {
        let (n, nd) = (cfg.n_subcarriers, cfg.n_dft());
        let chunks = settings.active_chunks.clamp(1, cfg.spreading_factor);
        (0..cfg.n_timeslots)
            .flat_map(|m| (0..chunks * nd).map(move |i| m * n + i))
            .collect()
    });
    Ok(Source::Gfdm {
        modem: GfdmModem::new(&pulse),
        precoder,
        active,
    })
}

fn batch_paprs(
    cfg: &GfdmConfig,
    source: &Source,
    constellation: &Constellation,
    settings: &PaprSettings,
    batch: usize,
    count: usize,
) -> Result<Vec<f64>> {
    let mut rng = trial_rng(settings.seed, batch as u64);
    let dim = cfg.block_len();
    let spb = settings.symbols_per_block;
    match source {
        Source::Gfdm {
            modem,
            precoder,
            active,
        } => (0..count)
            .map(|_| {
                let mut block = Vec::with_capacity(dim * spb);
                for _ in 0..spb {
                    let d = match active {
                        None => constellation.random_symbols(&mut rng, dim).1,
                        Some(pos) => {
                            let mut d = vec![C64::new(0.0, 0.0); dim];
                            let (_, sym) = constellation.random_symbols(&mut rng, pos.len());
                            pos.iter().zip(sym).for_each(|(&p, s)| d[p] = s);
                            d
                        }
                    };
                    block.extend(modem.modulate(&precoder.precode(&d)?, precoder.ordering())?);
                }
                Ok(papr_db(&block))
            })
            .collect(),
        Source::Ofdm => Ok((0..count)
            .map(|_| {
                // Same duration as the GFDM block: M OFDM symbols per GFDM symbol.
                let n = cfg.n_subcarriers;
                let block: Vec<C64> = (0..spb * cfg.n_timeslots)
                    .flat_map(|_| ifft_unitary(&constellation.random_symbols(&mut rng, n).1))
                    .collect();
                papr_db(&block)
            })
            .collect()),
        Source::Svd(tx) => {
            let p = &tx[batch % tx.len()];
            let cols = count * spb;
            let (_, d) = constellation.random_symbols(&mut rng, dim * cols);
            let d_re = DMatrix::from_iterator(dim, cols, d.iter().map(|v| v.re));
            let d_im = DMatrix::from_iterator(dim, cols, d.iter().map(|v| v.im));
            let (x_re, x_im) = p.mul_split(&d_re, &d_im);
            Ok((0..count)
                .map(|b| {
                    let block: Vec<C64> = (b * spb..(b + 1) * spb)
                        .flat_map(|c| x_re.column(c).iter().zip(x_im.column(c).iter()).map(|(&r, &i)| C64::new(r, i)).collect::<Vec<_>>())
                        .collect();
                    papr_db(&block)
                })
                .collect())
        }
    }
}

/// Empirical PAPR CCDF over `settings.n_blocks` blocks of
/// `symbols_per_block` concatenated symbols without prefix or oversampling.
///
/// Blocks are drawn in fixed batches of 500, batch `b` from stream `b`, so
/// the result does not depend on the rayon pool size.
pub fn papr_ccdf(cfg: &GfdmConfig, scheme: Scheme, settings: &PaprSettings) -> Result<PaprCcdf> {
    cfg.validate()?;
    if settings.n_blocks == 0 || settings.symbols_per_block == 0 {
        return Err(GfdmError::InvalidConfig("PAPR run needs at least one block of one symbol".into()));
    }
    let constellation = Constellation::new(cfg.mod_order, cfg.symbol_power)?;
    let source = build_source(cfg, scheme, settings)?;
    let n_batches = settings.n_blocks.div_ceil(BATCH);
    let per_batch: Vec<Vec<f64>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH.min(settings.n_blocks - b * BATCH);
            batch_paprs(cfg, &source, &constellation, settings, b, count)
        })
        .collect::<Result<_>>()?;
    Ok(PaprCcdf::from_samples(scheme, per_batch.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_envelope_is_zero_db() {
        let x: Vec<C64> = (0..64).map(|n| C64::from_polar(2.0, n as f64 * 0.3)).collect();
        assert!(papr_db(&x).abs() < 1e-12);
        assert_eq!(papr_db(&[C64::new(0.0, 0.0); 4]), 0.0);
        // One nonzero sample out of four: 10 log10 4.
        let spike = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!((papr_db(&spike) - 10.0 * 4f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn full_spread_ifdma_gives_back_the_qpsk_sequence() {
        // One time slot, zero roll-off: A is the unitary IDFT.
        let cfg = GfdmConfig::new(16, 1).with_rolloff(0.0);
        let settings = PaprSettings {
            n_blocks: 50,
            ..PaprSettings::default()
        };
        let ccdf = papr_ccdf(&cfg, Scheme::IfdmaZf, &settings).unwrap();
        assert!(ccdf.samples.iter().all(|s| s.abs() < 1e-9), "{:?}", ccdf.samples);
    }

    #[test]
    fn ccdf_starts_at_one_and_is_deterministic() {
        let cfg = GfdmConfig::new(16, 3);
        let settings = PaprSettings {
            n_blocks: 1200,
            svd_channels: 2,
            ..PaprSettings::default()
        };
        for scheme in [Scheme::GfdmZf, Scheme::LfdmaZf, Scheme::BidftM, Scheme::SvdPrec, Scheme::Ofdm] {
            let a = papr_ccdf(&cfg, scheme, &settings).unwrap();
            assert_eq!(a.ccdf[0], 1.0);
            assert_eq!(a.samples.len(), 1200);
            assert!(a.ccdf.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(*a.ccdf.last().unwrap(), 0.0);
            let b = rayon::ThreadPoolBuilder::new()
                .num_threads(2)
                .build()
                .unwrap()
                .install(|| papr_ccdf(&cfg, scheme, &settings).unwrap());
            assert_eq!(a, b, "{scheme}");
        }
    }

    #[test]
    fn quantile_counts_exceedances() {
        let c = PaprCcdf::from_samples(Scheme::Ofdm, (0..1000).map(|i| i as f64 / 100.0).collect());
        // Exactly ten samples lie above the 1% point.
        let q = c.quantile(0.01);
        assert_eq!(c.samples.iter().filter(|&&s| s > q).count(), 10);
    }

    proptest! {
        #[test]
        fn ccdf_is_nonincreasing(samples in proptest::collection::vec(0.0f64..20.0, 1..200)) {
            let c = PaprCcdf::from_samples(Scheme::GfdmZf, samples);
            prop_assert_eq!(c.ccdf[0], 1.0);
            prop_assert!(c.ccdf.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
