//! Multipath Rayleigh channel, AWGN, and one-tap frequency-domain equalization.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::frame::Frame;
use crate::linalg::{circulant, fft, ifft, CMat, C64, SINGULAR_RATIO};

/// Tap powers of a power-delay profile, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile(Vec<f64>);

impl PowerDelayProfile {
    /// Raw powers `10^{-α/5}` for `α = 0..len`, before normalization.
    pub fn exponential_raw(len: usize) -> Vec<f64> {
        (0..len).map(|a| 10f64.powf(-(a as f64) / 5.0)).collect()
    }

    pub fn exponential(len: usize) -> Result<Self> {
        Self::from_raw(Self::exponential_raw(len))
    }

    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() || raw.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(GfdmError::InvalidConfig(
                "power-delay profile needs at least one finite nonnegative tap".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(GfdmError::InvalidConfig("power-delay profile has zero power".into()));
        }
        Ok(Self(raw.into_iter().map(|p| p / total).collect()))
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Channel taps plus their `MN`-point frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<C64>,
    freq_response: Vec<C64>,
}

impl ChannelRealization {
    pub fn new(taps: Vec<C64>, block_len: usize) -> Result<Self> {
        if taps.is_empty() || taps.len() > block_len {
            return Err(GfdmError::LengthViolation(format!(
                "channel of {} taps does not fit a block of {block_len}",
                taps.len()
            )));
        }
        let mut padded = taps.clone();
        padded.resize(block_len, C64::new(0.0, 0.0));
        Ok(Self {
            freq_response: fft(&padded),
            taps,
        })
    }

    /// Distortion-free channel `h = [1]`.
    pub fn identity(block_len: usize) -> Self {
        Self::new(vec![C64::new(1.0, 0.0)], block_len).expect("block_len >= 1")
    }

    pub fn taps(&self) -> &[C64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn block_len(&self) -> usize {
        self.freq_response.len()
    }

    /// Unnormalized DFT of the zero-padded taps; `H = W diag(Ψ) W^H`.
    pub fn freq_response(&self) -> &[C64] {
        &self.freq_response
    }

    /// The `MN × MN` circulant convolution matrix.
    pub fn circulant(&self) -> CMat {
        let mut padded = self.taps.clone();
        padded.resize(self.block_len(), C64::new(0.0, 0.0));
        circulant(&padded)
    }

    /// `H x` through the FFT.
    pub fn apply_circular(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.block_len() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.block_len(),
                found: x.len(),
            });
        }
        let spec: Vec<C64> = fft(x)
            .iter()
            .zip(&self.freq_response)
            .map(|(a, b)| a * b)
            .collect();
        let n = x.len() as f64;
        Ok(ifft(&spec).into_iter().map(|v| v / n).collect())
    }
}

/// Zero-mean circularly-symmetric complex Gaussian with variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Draws independent Rayleigh taps `h_α ~ CN(0, p_α)`.
pub fn sample_channel<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    block_len: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let taps = pdp.powers().iter().map(|&p| complex_gaussian(rng, p)).collect();
    ChannelRealization::new(taps, block_len)
}

/// AWGN level and the seed of its random stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(GfdmError::InvalidConfig(format!(
                "noise variance must be finite and nonnegative, got {variance}"
            )));
        }
        Ok(Self { variance, seed })
    }

    /// Independent stream `stream` of this model's seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        trial_rng(self.seed, stream)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<C64> {
        (0..len).map(|_| complex_gaussian(rng, self.variance)).collect()
    }
}

/// Reproducible per-trial generator: one ChaCha stream per trial index.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Linear convolution of the framed block with the taps, plus AWGN. The
/// result has `MN + N_cp + L - 1` samples.
pub fn transmit<R: Rng + ?Sized>(
    frame: &Frame,
    channel: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<C64>> {
    let cp_length = frame.cp_length();
    let l = channel.len();
    if cp_length + 1 < l {
        return Err(GfdmError::CyclicPrefixTooShort {
            cp_length,
            channel_len: l,
        });
    }
    let x = &frame.with_cp;
    let mut y = vec![C64::new(0.0, 0.0); x.len() + l - 1];
    for (i, xi) in x.iter().enumerate() {
        for (a, h) in channel.taps().iter().enumerate() {
            y[i + a] += xi * h;
        }
    }
    if noise.variance > 0.0 {
        for v in &mut y {
            *v += complex_gaussian(rng, noise.variance);
        }
    }
    Ok(y)
}

fn check_nulls(channel: &ChannelRealization) -> Result<()> {
    let peak = channel
        .freq_response()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    for (bin, v) in channel.freq_response().iter().enumerate() {
        if v.norm() < SINGULAR_RATIO * peak || peak == 0.0 {
            return Err(GfdmError::SpectralNull {
                bin,
                magnitude: v.norm(),
            });
        }
    }
    Ok(())
}

/// One-tap equalization `W Ψ^{-1} W^H y` through the FFT.
pub fn fde_equalize(y: &[C64], channel: &ChannelRealization) -> Result<Vec<C64>> {
    if y.len() != channel.block_len() {
        return Err(GfdmError::DimensionMismatch {
            expected: channel.block_len(),
            found: y.len(),
        });
    }
    check_nulls(channel)?;
    let spec: Vec<C64> = fft(y)
        .iter()
        .zip(channel.freq_response())
        .map(|(a, b)| a / b)
        .collect();
    let n = y.len() as f64;
    Ok(ifft(&spec).into_iter().map(|v| v / n).collect())
}

/// Dense form of [`fde_equalize`] with explicit DFT matrices.
pub fn fde_equalize_dense(y: &[C64], channel: &ChannelRealization) -> Result<Vec<C64>> {
    check_nulls(channel)?;
    let n = channel.block_len();
    let w = crate::linalg::unitary_idft_matrix(n);
    let inv_psi = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        channel.freq_response().iter().map(|v| v.inv()),
    ));
    let op = &w * inv_psi * w.adjoint();
    Ok(crate::linalg::matvec(&op, y))
}

/// `σ_ν² = σ_d² / (log2 𝓜 · 10^{Eb/N0 / 10})`, scaled by `(MN + N_cp)/MN`
/// when the prefix energy is charged to the bit budget.
pub fn ebn0_to_noise_variance(cfg: &GfdmConfig, ebn0_db: f64, with_cp_loss: bool) -> f64 {
    let bits = cfg.bits_per_symbol() as f64;
    let base = cfg.symbol_power / (bits * 10f64.powf(ebn0_db / 10.0));
    if with_cp_loss {
        let mn = cfg.block_len() as f64;
        base * (mn + cfg.cp_length as f64) / mn
    } else {
        base
    }
}
