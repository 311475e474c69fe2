//! Unitary precoders (block IDFT, DFT spreading, SVD) and their matched
//! receivers with closed-form post-processing SNR.

use std::fmt;
use std::str::FromStr;

use crate::bccb::{block_diagonalize_fast, invert_block_diagonal, BlockDiagonal, BlockFourier};
use crate::channel::{fde_equalize, ChannelRealization};
use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::linalg::{adjoint_matvec, checked_inverse, fft_unitary, matvec, row_norms_sq, CMat, C64};
use crate::modulator::{GfdmModem, ModulationMatrix, Ordering};
use crate::receivers::ber_qam_awgn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecoderKind {
    Identity,
    BidftN,
    BidftM,
    DftLfdma,
    DftIfdma,
    Svd,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 6] = [
        PrecoderKind::Identity,
        PrecoderKind::BidftN,
        PrecoderKind::BidftM,
        PrecoderKind::DftLfdma,
        PrecoderKind::DftIfdma,
        PrecoderKind::Svd,
    ];

    /// Column ordering of the modulation matrix this precoder is paired with.
    pub fn ordering(self) -> Ordering {
        match self {
            PrecoderKind::BidftM => Ordering::MOrdered,
            _ => Ordering::NOrdered,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PrecoderKind::Identity => "identity",
            PrecoderKind::BidftN => "bidft-n",
            PrecoderKind::BidftM => "bidft-m",
            PrecoderKind::DftLfdma => "lfdma",
            PrecoderKind::DftIfdma => "ifdma",
            PrecoderKind::Svd => "svd",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PrecoderKind {
    type Err = GfdmError;

    fn from_str(s: &str) -> Result<Self> {
        PrecoderKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GfdmError::UnknownScheme(s.to_string()))
    }
}

/// Factors of `HA = U S V^H` with singular values in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: CMat,
    pub v: CMat,
    pub singular_values: Vec<f64>,
}

impl SvdFactors {
    /// Ties keep their original order.
    pub fn new(ha: &CMat) -> Self {
        let svd = ha.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V^H").adjoint();
        let values: Vec<f64> = svd.singular_values.iter().copied().collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let dim = values.len();
        let mut su = CMat::zeros(u.nrows(), dim);
        let mut sv = CMat::zeros(v.nrows(), dim);
        for (dst, &src) in order.iter().enumerate() {
            su.set_column(dst, &u.column(src));
            sv.set_column(dst, &v.column(src));
        }
        Self {
            u: su,
            v: sv,
            singular_values: order.iter().map(|&i| values[i]).collect(),
        }
    }

    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (c, s) in self.singular_values.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

/// A unitary `MN × MN` precoder with the data needed for its fast path.
#[derive(Debug, Clone)]
pub struct PrecoderSpec {
    kind: PrecoderKind,
    matrix: CMat,
    n_subcarriers: usize,
    n_timeslots: usize,
    spreading_factor: usize,
    n_dft: usize,
    fourier: Option<BlockFourier>,
}

/// Subcarrier that carries element `i` of DFT chunk `q` within a time slot.
fn dft_subcarrier(kind: PrecoderKind, q: usize, i: usize, n_dft: usize, spreading: usize) -> usize {
    match kind {
        PrecoderKind::DftIfdma => q + i * spreading,
        _ => q * n_dft + i,
    }
}

pub fn make_precoder(kind: PrecoderKind, cfg: &GfdmConfig, svd: Option<&SvdFactors>) -> Result<PrecoderSpec> {
    let (n, m) = (cfg.n_subcarriers, cfg.n_timeslots);
    let dim = n * m;
    let q = cfg.spreading_factor;
    if q == 0 || n % q != 0 {
        return Err(GfdmError::InvalidConfig(format!(
            "spreading factor {q} does not divide {n} subcarriers"
        )));
    }
    let n_dft = n / q;
    let mut fourier = None;
    let matrix = match kind {
        PrecoderKind::Identity => CMat::identity(dim, dim),
        PrecoderKind::BidftN | PrecoderKind::BidftM => {
            let bs = kind.ordering().block_size(n, m);
            let f = BlockFourier::new(bs, dim / bs);
            let mat = f.matrix().clone();
            fourier = Some(f);
            mat
        }
        PrecoderKind::DftLfdma | PrecoderKind::DftIfdma => {
            let w = crate::linalg::unitary_dft_matrix(n_dft);
            let mut p = CMat::zeros(dim, dim);
            for slot in 0..m {
                for chunk in 0..q {
                    for i in 0..n_dft {
                        let row = slot * n + dft_subcarrier(kind, chunk, i, n_dft, q);
                        for j in 0..n_dft {
                            p[(row, slot * n + chunk * n_dft + j)] = w[(i, j)];
                        }
                    }
                }
            }
            p
        }
        PrecoderKind::Svd => {
            let f = svd.ok_or(GfdmError::MissingChannelState)?;
            if f.v.nrows() != dim {
                return Err(GfdmError::DimensionMismatch {
                    expected: dim,
                    found: f.v.nrows(),
                });
            }
            f.v.clone()
        }
    };
    Ok(PrecoderSpec {
        kind,
        matrix,
        n_subcarriers: n,
        n_timeslots: m,
        spreading_factor: q,
        n_dft,
        fourier,
    })
}

impl PrecoderSpec {
    pub fn kind(&self) -> PrecoderKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn ordering(&self) -> Ordering {
        self.kind.ordering()
    }

    pub fn spreading_factor(&self) -> usize {
        self.spreading_factor
    }

    pub fn n_dft(&self) -> usize {
        self.n_dft
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check(&self, d: &[C64]) -> Result<()> {
        if d.len() != self.dim() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.dim(),
                found: d.len(),
            });
        }
        Ok(())
    }

    /// `P d` through the structured fast path where one exists.
    pub fn precode(&self, d: &[C64]) -> Result<Vec<C64>> {
        self.check(d)?;
        match self.kind {
            PrecoderKind::Identity => Ok(d.to_vec()),
            PrecoderKind::BidftN | PrecoderKind::BidftM => {
                self.fourier.as_ref().expect("block precoder").apply(d)
            }
            PrecoderKind::DftLfdma | PrecoderKind::DftIfdma => {
                let (n, q, nd) = (self.n_subcarriers, self.spreading_factor, self.n_dft);
                let mut out = vec![C64::new(0.0, 0.0); d.len()];
                for slot in 0..self.n_timeslots {
                    for chunk in 0..q {
                        let start = slot * n + chunk * nd;
                        let spread = fft_unitary(&d[start..start + nd]);
                        for (i, v) in spread.into_iter().enumerate() {
                            out[slot * n + dft_subcarrier(self.kind, chunk, i, nd, q)] = v;
                        }
                    }
                }
                Ok(out)
            }
            PrecoderKind::Svd => Ok(matvec(&self.matrix, d)),
        }
    }

    /// `P^H v`.
    pub fn deprecode(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check(v)?;
        match self.kind {
            PrecoderKind::Identity => Ok(v.to_vec()),
            PrecoderKind::BidftN | PrecoderKind::BidftM => {
                self.fourier.as_ref().expect("block precoder").apply_adjoint(v)
            }
            PrecoderKind::DftLfdma | PrecoderKind::DftIfdma => {
                let (n, q, nd) = (self.n_subcarriers, self.spreading_factor, self.n_dft);
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                let mut chunk_buf = vec![C64::new(0.0, 0.0); nd];
                for slot in 0..self.n_timeslots {
                    for chunk in 0..q {
                        for (i, b) in chunk_buf.iter_mut().enumerate() {
                            *b = v[slot * n + dft_subcarrier(self.kind, chunk, i, nd, q)];
                        }
                        let despread = crate::linalg::ifft_unitary(&chunk_buf);
                        let start = slot * n + chunk * nd;
                        out[start..start + nd].copy_from_slice(&despread);
                    }
                }
                Ok(out)
            }
            PrecoderKind::Svd => Ok(adjoint_matvec(&self.matrix, v)),
        }
    }
}

/// Per-symbol post-processing noise power and SNR of a precoded receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrReport {
    pub per_symbol: Vec<f64>,
    pub noise_power: Vec<f64>,
}

impl SnrReport {
    /// SNR `σ_d²/noise_l` of an unbiased estimate.
    pub fn from_noise(noise_power: Vec<f64>, symbol_power: f64) -> Self {
        Self {
            per_symbol: noise_power.iter().map(|n| symbol_power / n).collect(),
            noise_power,
        }
    }

    pub fn len(&self) -> usize {
        self.per_symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_symbol.is_empty()
    }
}

/// Joint processing for BIDFT-N precoding: matched filter, block-Fourier
/// despreading and blockwise inversion of `D = F^H (HA)^H HA F`.
#[derive(Debug, Clone)]
pub struct BidftJointReceiver {
    ha: CMat,
    fourier: BlockFourier,
    blocks: BlockDiagonal,
    inverse: BlockDiagonal,
}

impl BidftJointReceiver {
    /// `ha` is the effective channel `H A_N`.
    pub fn new(ha: &CMat, n_subcarriers: usize) -> Result<Self> {
        let dim = ha.nrows();
        if n_subcarriers == 0 || dim % n_subcarriers != 0 {
            return Err(GfdmError::BlockSizeMismatch {
                block_size: n_subcarriers,
                dim,
            });
        }
        let gram = ha.adjoint() * ha;
        let blocks = block_diagonalize_fast(&gram, n_subcarriers)?;
        let inverse = invert_block_diagonal(&blocks)?;
        Ok(Self {
            ha: ha.clone(),
            fourier: BlockFourier::new(n_subcarriers, dim / n_subcarriers),
            blocks,
            inverse,
        })
    }

    pub fn blocks(&self) -> &BlockDiagonal {
        &self.blocks
    }

    pub fn noise_gain(&self) -> Vec<f64> {
        // diag(D^{-1} D D^{-H}), evaluated blockwise.
        self.inverse
            .mul(&self.blocks)
            .and_then(|p| p.mul(&self.inverse.adjoint()))
            .map(|p| {
                p.blocks()
                    .iter()
                    .flat_map(|b| (0..b.nrows()).map(move |i| b[(i, i)].re))
                    .collect()
            })
            .expect("blocks share one shape")
    }

    pub fn receive(&self, y: &[C64], noise_var: f64, symbol_power: f64) -> Result<(Vec<C64>, SnrReport)> {
        let mf = adjoint_matvec(&self.ha, y);
        let z = self.fourier.apply_adjoint(&mf)?;
        let d = self.inverse.apply(&z)?;
        let noise = self.noise_gain().into_iter().map(|g| g * noise_var).collect();
        Ok((d, SnrReport::from_noise(noise, symbol_power)))
    }
}

/// Two-stage BIDFT receiver: one-tap FDE, fast matched filter, block-Fourier
/// despreading, then the channel-independent blockwise inverse of
/// `F^H A^H A F`.
#[derive(Debug, Clone)]
pub struct TwoStageReceiver {
    modem: GfdmModem,
    ordering: Ordering,
    fourier: BlockFourier,
    blocks: BlockDiagonal,
    inverse: BlockDiagonal,
    /// `|[D̃^{-1} (AF)^H W]_{lj}|²`, row-major.
    noise_map: Vec<f64>,
}

impl TwoStageReceiver {
    pub fn new(a: &ModulationMatrix) -> Result<Self> {
        let dim = a.dim();
        let bs = a.block_size();
        let blocks = block_diagonalize_fast(&a.gram(), bs)?;
        let inverse = invert_block_diagonal(&blocks)?;
        let fourier = BlockFourier::new(bs, dim / bs);
        // Columns of (AF)^H W: F^H A^H w_j, with A^H w_j read off the row-FFT of A.
        let mut noise_map = vec![0.0; dim * dim];
        for j in 0..dim {
            let w_j: Vec<C64> = (0..dim)
                .map(|r| crate::linalg::expj(2.0 * std::f64::consts::PI * ((r * j) % dim) as f64 / dim as f64) / (dim as f64).sqrt())
                .collect();
            let col = inverse.apply(&fourier.apply_adjoint(&adjoint_matvec(a.entries(), &w_j))?)?;
            for (l, v) in col.iter().enumerate() {
                noise_map[l * dim + j] = v.norm_sqr();
            }
        }
        Ok(Self {
            modem: GfdmModem::new(a.pulse()),
            ordering: a.ordering(),
            fourier,
            blocks,
            inverse,
            noise_map,
        })
    }

    pub fn blocks(&self) -> &BlockDiagonal {
        &self.blocks
    }

    /// Per-symbol noise power for a channel with response `Ψ`.
    pub fn noise_power(&self, channel: &ChannelRealization, noise_var: f64) -> Vec<f64> {
        let inv_gain: Vec<f64> = channel
            .freq_response()
            .iter()
            .map(|p| 1.0 / p.norm_sqr())
            .collect();
        self.noise_map
            .chunks(inv_gain.len())
            .map(|row| noise_var * row.iter().zip(&inv_gain).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn receive(
        &self,
        y: &[C64],
        channel: &ChannelRealization,
        noise_var: f64,
        symbol_power: f64,
    ) -> Result<(Vec<C64>, SnrReport)> {
        let d = self.detect(y, channel)?;
        let report = SnrReport::from_noise(self.noise_power(channel, noise_var), symbol_power);
        Ok((d, report))
    }

    /// Estimates only, without the SNR bookkeeping.
    pub fn detect(&self, y: &[C64], channel: &ChannelRealization) -> Result<Vec<C64>> {
        let eq = fde_equalize(y, channel)?;
        let mf = self.modem.matched_filter(&eq, self.ordering)?;
        let z = self.fourier.apply_adjoint(&mf)?;
        self.inverse.apply(&z)
    }
}

/// Zero forcing followed by despreading: `d̂ = P^H (HA)^{-1} y`.
#[derive(Debug, Clone)]
pub struct PrecodedZfReceiver {
    matrix: CMat,
}

impl PrecodedZfReceiver {
    pub fn new(ha: &CMat, precoder: &PrecoderSpec) -> Result<Self> {
        Ok(Self {
            matrix: precoder.matrix().adjoint() * checked_inverse(ha)?,
        })
    }

    pub fn noise_power(&self, noise_var: f64) -> Vec<f64> {
        row_norms_sq(&self.matrix)
            .into_iter()
            .map(|r| r * noise_var)
            .collect()
    }

    pub fn receive(&self, y: &[C64], noise_var: f64, symbol_power: f64) -> Result<(Vec<C64>, SnrReport)> {
        if y.len() != self.matrix.ncols() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: y.len(),
            });
        }
        Ok((
            matvec(&self.matrix, y),
            SnrReport::from_noise(self.noise_power(noise_var), symbol_power),
        ))
    }
}

pub fn dft_precoded_receive(
    y: &[C64],
    ha: &CMat,
    precoder: &PrecoderSpec,
    noise_var: f64,
    symbol_power: f64,
) -> Result<(Vec<C64>, SnrReport)> {
    PrecodedZfReceiver::new(ha, precoder)?.receive(y, noise_var, symbol_power)
}

/// `U^H y`: symbol `l` arrives scaled by `s_l` and with white noise, so
/// `γ_l = s_l² σ_d²/σ_ν²`. Uses unitary products only.
pub fn svd_precode_receive(
    y: &[C64],
    factors: &SvdFactors,
    noise_var: f64,
    symbol_power: f64,
) -> Result<(Vec<C64>, SnrReport)> {
    if y.len() != factors.u.nrows() {
        return Err(GfdmError::DimensionMismatch {
            expected: factors.u.nrows(),
            found: y.len(),
        });
    }
    let z = adjoint_matvec(&factors.u, y);
    let noise = factors
        .singular_values
        .iter()
        .map(|s| noise_var / (s * s))
        .collect();
    Ok((z, SnrReport::from_noise(noise, symbol_power)))
}

/// Mean QAM bit error probability over every symbol of every report.
pub fn precoded_ber_average(reports: &[SnrReport], order: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for r in reports {
        for &g in &r.per_symbol {
            total += ber_qam_awgn(g, order)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(GfdmError::InvalidConfig("no SNR values to average".into()));
    }
    Ok(total / count as f64)
}
