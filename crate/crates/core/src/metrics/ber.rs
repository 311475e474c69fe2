//! Monte-Carlo bit error rate with analytical overlays.

use std::io::Write;

use rayon::prelude::*;

use super::Scheme;
use crate::channel::{ebn0_to_noise_variance, fde_equalize, sample_channel, transmit, trial_rng};
use crate::channel::{ChannelRealization, NoiseModel, PowerDelayProfile};
use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::frame::{add_cp, remove_cp};
use crate::linalg::{fft_unitary, ifft_unitary, matvec, CMat, C64};
use crate::modulator::{build_modulation_matrix, GfdmModem, ModulationMatrix};
use crate::precoders::{make_precoder, BidftJointReceiver, PrecodedZfReceiver, PrecoderKind, PrecoderSpec};
use crate::precoders::{SnrReport, SvdFactors, TwoStageReceiver};
use crate::pulse::make_rrc_pulse;
use crate::qam::Constellation;
use crate::receivers::{ber_qam_awgn, effective_channel, mmse_sinr_awgn, DsicDetector, LinearReceiver};
use crate::receivers::{MmseSinrModel, SinrReport};
use crate::stats::binomial_stderr;

/// Propagation model of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Awgn,
    /// Frequency-selective Rayleigh fading with the given tap powers.
    Fsfc(PowerDelayProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerSettings {
    /// Eb/N0 grid in dB; `+inf` means noiseless.
    pub ebn0_db: Vec<f64>,
    /// Channel realizations (independent batches under AWGN).
    pub n_channels: usize,
    /// Blocks per channel and Eb/N0 point.
    pub n_blocks: usize,
    pub channel: ChannelModel,
    pub seed: u64,
    /// Charge the prefix energy to the bit budget.
    pub cp_loss: bool,
    pub dsic_iterations: usize,
}

impl Default for BerSettings {
    fn default() -> Self {
        Self {
            ebn0_db: vec![0.0, 4.0, 8.0, 12.0],
            n_channels: 200,
            n_blocks: 4,
            channel: ChannelModel::Awgn,
            seed: 1,
            cp_loss: false,
            dsic_iterations: 4,
        }
    }
}

/// Simulated and analytical BER of one scheme over an Eb/N0 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub scheme: Scheme,
    pub ebn0_db: Vec<f64>,
    pub ber_sim: Vec<f64>,
    pub ber_stderr: Vec<f64>,
    pub ber_analytic: Vec<Option<f64>>,
    pub errors: Vec<u64>,
    pub bits: Vec<u64>,
}

impl BerCurve {
    pub const CSV_HEADER: &'static str = "scheme,ebn0_db,ber_sim,ber_stderr,ber_analytic";

    /// Data rows without the header; a missing overlay is an empty field.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for i in 0..self.ebn0_db.len() {
            let analytic = self.ber_analytic[i].map_or(String::new(), |v| format!("{v:.6e}"));
            writeln!(
                out,
                "{},{},{:.6e},{:.6e},{}",
                self.scheme, self.ebn0_db[i], self.ber_sim[i], self.ber_stderr[i], analytic
            )?;
        }
        Ok(())
    }
}

/// Closed-form Gray square-QAM BER over flat Rayleigh fading with mean SNR
/// `mean_snr`, using `E[Q(c√γ)] = (1 - √(c²γ̄/(2 + c²γ̄)))/2`.
pub fn ber_qam_rayleigh(mean_snr: f64, order: usize) -> Result<f64> {
    // Rejects unsupported orders.
    ber_qam_awgn(0.0, order)?;
    let root = (order as f64).sqrt().round() as usize;
    let m = order as f64;
    let sm = root as f64;
    if mean_snr.is_infinite() {
        return Ok(0.0);
    }
    let sum: f64 = (0..root / 2)
        .map(|r| {
            let c2 = ((2 * r + 1) as f64).powi(2) * 3.0 / (m - 1.0);
            0.5 * (1.0 - (c2 * mean_snr / (2.0 + c2 * mean_snr)).sqrt())
        })
        .sum();
    Ok(4.0 * (sm - 1.0) / (sm * m.log2()) * sum)
}

/// Channel-independent parts of a link.
struct Setup {
    cfg: GfdmConfig,
    scheme: Scheme,
    constellation: Constellation,
    a: ModulationMatrix,
    modem: GfdmModem,
    precoder: Option<PrecoderSpec>,
    two_stage: Option<TwoStageReceiver>,
    dsic: Option<DsicDetector>,
}

/// Per-channel receiver state.
enum Detector {
    MatchedFilter,
    ZeroForcing(PrecodedZfReceiver),
    Mmse { ha: CMat, model: MmseSinrModel },
    Dsic,
    Joint(BidftJointReceiver),
    TwoStage,
    PrecodedZf(PrecodedZfReceiver),
    Svd { factors: SvdFactors, tx: CMat },
    Ofdm,
}

impl Setup {
    fn new(cfg: &GfdmConfig, scheme: Scheme, dsic_iterations: usize) -> Result<Self> {
        cfg.validate()?;
        let pulse = make_rrc_pulse(cfg)?;
        let a = build_modulation_matrix(&pulse, scheme.ordering());
        let constellation = Constellation::new(cfg.mod_order, cfg.symbol_power)?;
        let precoder = match scheme.precoder() {
            Some(PrecoderKind::Svd) | None => None,
            Some(kind) => Some(make_precoder(kind, cfg, None)?),
        };
        let two_stage = match scheme {
            Scheme::BidftN | Scheme::BidftM => Some(TwoStageReceiver::new(&a)?),
            _ => None,
        };
        let dsic = (scheme == Scheme::GfdmDsic && dsic_iterations > 0)
            .then(|| DsicDetector::new(&a, &constellation));
        Ok(Self {
            cfg: cfg.clone(),
            scheme,
            constellation,
            modem: GfdmModem::new(&pulse),
            a,
            precoder,
            two_stage,
            dsic,
        })
    }

    fn detector(&self, channel: &ChannelRealization) -> Result<Detector> {
        let ha = || effective_channel(channel, &self.a);
        let precoder = || self.precoder.as_ref().expect("non-SVD GFDM scheme has a precoder");
        Ok(match self.scheme {
            Scheme::GfdmMf => Detector::MatchedFilter,
            Scheme::GfdmZf => Detector::ZeroForcing(PrecodedZfReceiver::new(&ha()?, precoder())?),
            Scheme::GfdmMmse => {
                let ha = ha()?;
                let model = MmseSinrModel::new(&ha)?;
                Detector::Mmse { ha, model }
            }
            Scheme::GfdmDsic => Detector::Dsic,
            Scheme::BidftJp => Detector::Joint(BidftJointReceiver::new(&ha()?, self.cfg.n_subcarriers)?),
            Scheme::BidftN | Scheme::BidftM => Detector::TwoStage,
            Scheme::LfdmaZf | Scheme::IfdmaZf => Detector::PrecodedZf(PrecodedZfReceiver::new(&ha()?, precoder())?),
            Scheme::SvdPrec => {
                let factors = SvdFactors::new(&ha()?);
                let tx = self.a.entries() * &factors.v;
                Detector::Svd { factors, tx }
            }
            Scheme::Ofdm => Detector::Ofdm,
        })
    }

    fn modulate(&self, det: &Detector, d: &[C64]) -> Result<Vec<C64>> {
        match det {
            Detector::Ofdm => Ok(ifft_unitary(d)),
            Detector::Svd { tx, .. } => Ok(matvec(tx, d)),
            _ => {
                let p = self.precoder.as_ref().expect("GFDM scheme has a precoder");
                self.modem.modulate(&p.precode(d)?, self.scheme.ordering())
            }
        }
    }

    /// Unbiased symbol estimates from one received block.
    fn detect(&self, det: &Detector, point: &PointState, y: &[C64], channel: &ChannelRealization) -> Result<Vec<C64>> {
        let psi = channel.freq_response();
        match det {
            Detector::MatchedFilter => {
                let mf = self.modem.matched_filter(&fde_equalize(y, channel)?, self.scheme.ordering())?;
                let gram_diag = self.a.entries().column(0).iter().map(|v| v.norm_sqr()).sum::<f64>();
                Ok(mf.into_iter().map(|v| v / gram_diag).collect())
            }
            Detector::ZeroForcing(rx) | Detector::PrecodedZf(rx) => Ok(rx.receive(y, 0.0, 1.0)?.0),
            Detector::Mmse { .. } => {
                let (rx, gain) = point.mmse.as_ref().expect("MMSE state is built per point");
                Ok(rx.apply(y)?.into_iter().zip(gain).map(|(v, g)| v / g).collect())
            }
            Detector::Dsic => {
                let eq = fde_equalize(y, channel)?;
                match &self.dsic {
                    Some(d) => d.detect(&eq, point.dsic_iterations),
                    None => self.modem.matched_filter(&eq, self.scheme.ordering()),
                }
            }
            Detector::Joint(rx) => Ok(rx.receive(y, 0.0, 1.0)?.0),
            Detector::TwoStage => self.two_stage.as_ref().expect("two-stage scheme").detect(y, channel),
            Detector::Svd { factors, .. } => {
                let z = crate::precoders::svd_precode_receive(y, factors, 0.0, 1.0)?.0;
                Ok(z.into_iter().zip(&factors.singular_values).map(|(v, s)| v / s).collect())
            }
            Detector::Ofdm => Ok(fft_unitary(y).into_iter().zip(psi).map(|(v, p)| v / p).collect()),
        }
    }

    /// Mean analytical BER over the symbols of one channel, where defined.
    fn analytic(&self, det: &Detector, channel: &ChannelRealization, noise_var: f64, model: &ChannelModel) -> Result<Option<f64>> {
        let sp = self.cfg.symbol_power;
        let order = self.cfg.mod_order;
        let from_snr = |r: SnrReport| mean_ber(&r.per_symbol, order).map(Some);
        let from_noise = |n: Vec<f64>| from_snr(SnrReport::from_noise(n, sp));
        match det {
            Detector::MatchedFilter | Detector::Dsic => Ok(None),
            Detector::ZeroForcing(rx) | Detector::PrecodedZf(rx) => from_noise(rx.noise_power(noise_var)),
            Detector::Mmse { model: m, .. } => {
                let report: SinrReport = match model {
                    ChannelModel::Awgn => SinrReport::uniform(mmse_sinr_awgn(&self.a, noise_var, sp)?, self.a.dim(), sp),
                    ChannelModel::Fsfc(_) => m.report(noise_var, sp),
                };
                mean_ber(&report.per_symbol, order).map(Some)
            }
            Detector::Joint(rx) => from_noise(rx.noise_gain().into_iter().map(|g| g * noise_var).collect()),
            Detector::TwoStage => from_noise(self.two_stage.as_ref().expect("two-stage scheme").noise_power(channel, noise_var)),
            Detector::Svd { factors, .. } => {
                from_noise(factors.singular_values.iter().map(|s| noise_var / (s * s)).collect())
            }
            Detector::Ofdm => {
                let snr = sp / noise_var;
                match model {
                    ChannelModel::Awgn => ber_qam_awgn(snr, order).map(Some),
                    ChannelModel::Fsfc(_) => ber_qam_rayleigh(snr, order).map(Some),
                }
            }
        }
    }
}

/// Noise-dependent receiver state for one Eb/N0 point.
struct PointState {
    mmse: Option<(LinearReceiver, Vec<f64>)>,
    dsic_iterations: usize,
}

fn mean_ber(gammas: &[f64], order: usize) -> Result<f64> {
    let mut total = 0.0;
    for &g in gammas {
        total += ber_qam_awgn(g, order)?;
    }
    Ok(total / gammas.len().max(1) as f64)
}

#[derive(Debug, Clone, Copy, Default)]
struct PointTally {
    errors: u64,
    bits: u64,
    analytic: Option<f64>,
}

fn run_channel(setup: &Setup, settings: &BerSettings, index: usize) -> Result<Vec<PointTally>> {
    let cfg = &setup.cfg;
    let dim = cfg.block_len();
    let base = (index as u64) << 20;
    let channel = match &settings.channel {
        ChannelModel::Awgn => ChannelRealization::identity(dim),
        ChannelModel::Fsfc(pdp) => {
            if cfg.cp_length + 1 < pdp.len() {
                return Err(GfdmError::CyclicPrefixTooShort {
                    cp_length: cfg.cp_length,
                    channel_len: pdp.len(),
                });
            }
            sample_channel(pdp, dim, &mut trial_rng(settings.seed, base))?
        }
    };
    let det = setup.detector(&channel)?;
    let bits_per_block = dim as u64 * cfg.bits_per_symbol() as u64;
    let mut out = Vec::with_capacity(settings.ebn0_db.len());
    for (p, &ebn0) in settings.ebn0_db.iter().enumerate() {
        let noise_var = ebn0_to_noise_variance(cfg, ebn0, settings.cp_loss);
        let noise = NoiseModel::new(noise_var, settings.seed)?;
        let mmse = match &det {
            Detector::Mmse { ha, model } => Some((
                LinearReceiver::mmse(ha, noise_var, cfg.symbol_power)?,
                model.signal_gain(noise_var, cfg.symbol_power),
            )),
            _ => None,
        };
        let point = PointState {
            mmse,
            dsic_iterations: settings.dsic_iterations,
        };
        let mut rng = trial_rng(settings.seed, base | (p as u64 + 1));
        let mut tally = PointTally {
            analytic: setup.analytic(&det, &channel, noise_var, &settings.channel)?,
            ..PointTally::default()
        };
        for _ in 0..settings.n_blocks {
            let (idx, d) = setup.constellation.random_symbols(&mut rng, dim);
            let x = setup.modulate(&det, &d)?;
            let frame = add_cp(&x, cfg.cp_length)?;
            let y = remove_cp(&transmit(&frame, &channel, &noise, &mut rng)?, cfg.cp_length, channel.len())?;
            let est = setup.detect(&det, &point, &y, &channel)?;
            tally.errors += idx
                .iter()
                .zip(&est)
                .map(|(&i, &e)| setup.constellation.bit_errors(i, setup.constellation.slice(e)) as u64)
                .sum::<u64>();
            tally.bits += bits_per_block;
        }
        out.push(tally);
    }
    Ok(out)
}

/// Simulated BER of `scheme` with binomial standard errors and, where a
/// closed form exists, the analytical average over the same channels.
///
/// Channel `c` draws its taps from stream `c << 20` and the data and noise
/// of grid point `p` from stream `(c << 20) | (p + 1)`, so the result is
/// independent of the rayon pool size.
pub fn run_ber(cfg: &GfdmConfig, scheme: Scheme, settings: &BerSettings) -> Result<BerCurve> {
    if settings.n_channels == 0 || settings.n_blocks == 0 {
        return Err(GfdmError::InvalidConfig("BER run needs at least one channel and one block".into()));
    }
    let setup = Setup::new(cfg, scheme, settings.dsic_iterations)?;
    let per_channel: Vec<Vec<PointTally>> = (0..settings.n_channels)
        .into_par_iter()
        .map(|c| run_channel(&setup, settings, c))
        .collect::<Result<_>>()?;
    let n_points = settings.ebn0_db.len();
    let mut curve = BerCurve {
        scheme,
        ebn0_db: settings.ebn0_db.clone(),
        ber_sim: Vec::with_capacity(n_points),
        ber_stderr: Vec::with_capacity(n_points),
        ber_analytic: Vec::with_capacity(n_points),
        errors: Vec::with_capacity(n_points),
        bits: Vec::with_capacity(n_points),
    };
    for p in 0..n_points {
        let errors: u64 = per_channel.iter().map(|t| t[p].errors).sum();
        let bits: u64 = per_channel.iter().map(|t| t[p].bits).sum();
        let analytic = per_channel
            .iter()
            .map(|t| t[p].analytic)
            .sum::<Option<f64>>()
            .map(|s| s / settings.n_channels as f64);
        let ber = errors as f64 / bits as f64;
        curve.ber_sim.push(ber);
        curve.ber_stderr.push(binomial_stderr(ber, bits));
        curve.ber_analytic.push(analytic);
        curve.errors.push(errors);
        curve.bits.push(bits);
    }
    Ok(curve)
}
