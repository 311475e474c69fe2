//! Receivers for unprecoded GFDM: matched filter, zero forcing, joint MMSE
//! and double successive interference cancellation, plus the per-symbol
//! MMSE SINR decomposition and the resulting QAM error probabilities.

use rand::Rng;

use crate::bccb::bccb_eigenvalues;
use crate::channel::{complex_gaussian, ChannelRealization};
use crate::error::{GfdmError, Result};
use crate::linalg::{adjoint_matvec, checked_inverse, hermitian_eigen, matvec, CMat, C64};
use crate::modulator::ModulationMatrix;
use crate::qam::Constellation;
use crate::stats::q_function;

/// Most negative eigenvalue, relative to the spectral radius, still
/// accepted as rounding noise of a PSD Gram matrix.
const PSD_TOLERANCE: f64 = 1e-10;

/// Equal-diagonal tolerance for the AWGN Gram matrix structure check.
const BCCB_TOLERANCE: f64 = 1e-9;

/// `H A`, computed column by column through the FFT.
pub fn effective_channel(channel: &ChannelRealization, a: &ModulationMatrix) -> Result<CMat> {
    let dim = a.dim();
    if channel.block_len() != dim {
        return Err(GfdmError::DimensionMismatch {
            expected: dim,
            found: channel.block_len(),
        });
    }
    let mut out = CMat::zeros(dim, dim);
    for c in 0..dim {
        let col: Vec<C64> = a.entries().column(c).iter().copied().collect();
        out.column_mut(c)
            .copy_from_slice(&channel.apply_circular(&col)?);
    }
    Ok(out)
}

fn check_len(expected: usize, v: &[C64]) -> Result<()> {
    if v.len() != expected {
        return Err(GfdmError::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// A precomputed linear receiver `d̂ = R y`.
#[derive(Debug, Clone)]
pub struct LinearReceiver {
    matrix: CMat,
}

impl LinearReceiver {
    /// `R = (HA)^H`.
    pub fn matched_filter(ha: &CMat) -> Self {
        Self {
            matrix: ha.adjoint(),
        }
    }

    /// `R = (HA)^{-1}`.
    pub fn zero_forcing(ha: &CMat) -> Result<Self> {
        Ok(Self {
            matrix: checked_inverse(ha)?,
        })
    }

    /// `R = (ρ I + (HA)^H HA)^{-1} (HA)^H` with `ρ = σ_ν²/σ_d²`.
    pub fn mmse(ha: &CMat, noise_var: f64, symbol_power: f64) -> Result<Self> {
        let rho = noise_var / symbol_power;
        let gram = ha.adjoint() * ha;
        let reg = &gram + CMat::identity(gram.nrows(), gram.ncols()) * C64::new(rho, 0.0);
        Ok(Self {
            matrix: checked_inverse(&reg)? * ha.adjoint(),
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, y: &[C64]) -> Result<Vec<C64>> {
        check_len(self.matrix.ncols(), y)?;
        Ok(matvec(&self.matrix, y))
    }
}

pub fn mf_equalize(y: &[C64], channel: &ChannelRealization, a: &ModulationMatrix) -> Result<Vec<C64>> {
    check_len(a.dim(), y)?;
    Ok(adjoint_matvec(&effective_channel(channel, a)?, y))
}

pub fn zf_equalize(y: &[C64], channel: &ChannelRealization, a: &ModulationMatrix) -> Result<Vec<C64>> {
    LinearReceiver::zero_forcing(&effective_channel(channel, a)?)?.apply(y)
}

pub fn mmse_equalize(
    y: &[C64],
    channel: &ChannelRealization,
    a: &ModulationMatrix,
    noise_var: f64,
    symbol_power: f64,
) -> Result<Vec<C64>> {
    LinearReceiver::mmse(&effective_channel(channel, a)?, noise_var, symbol_power)?.apply(y)
}

/// Signal and noise paths of the MMSE estimate `d̂ = B d + C ν`, together
/// with the eigendecomposition `(HA)^H HA = V Λ V^H`.
#[derive(Debug, Clone)]
pub struct EqualizerMatrices {
    pub signal: CMat,
    pub noise: CMat,
    pub eigvals: Vec<f64>,
    pub eigvecs: CMat,
}

impl EqualizerMatrices {
    pub fn new(ha: &CMat, noise_var: f64, symbol_power: f64) -> Result<Self> {
        let rx = LinearReceiver::mmse(ha, noise_var, symbol_power)?;
        let signal = rx.matrix() * ha;
        let (eigvals, eigvecs) = psd_eigen(&(ha.adjoint() * ha))?;
        Ok(Self {
            signal,
            noise: rx.matrix,
            eigvals,
            eigvecs,
        })
    }
}

fn psd_eigen(gram: &CMat) -> Result<(Vec<f64>, CMat)> {
    let (vals, vecs) = hermitian_eigen(gram);
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if let Some(&bad) = vals.iter().find(|&&v| v < -PSD_TOLERANCE * scale) {
        return Err(GfdmError::NotPositiveSemidefinite { eigenvalue: bad });
    }
    Ok((vals.into_iter().map(|v| v.max(0.0)).collect(), vecs))
}

/// Per-symbol post-equalization powers and SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub per_symbol: Vec<f64>,
    pub p_sig: Vec<f64>,
    pub p_inr: Vec<f64>,
    pub p_npp: Vec<f64>,
}

impl SinrReport {
    fn from_powers(p_sig: Vec<f64>, p_inr: Vec<f64>, p_npp: Vec<f64>) -> Self {
        let per_symbol = p_sig
            .iter()
            .zip(p_inr.iter().zip(&p_npp))
            .map(|(s, (i, n))| s / (i + n))
            .collect();
        Self {
            per_symbol,
            p_sig,
            p_inr,
            p_npp,
        }
    }

    /// Interference-free report with the same SINR `γ` on each of `len` symbols.
    pub fn uniform(gamma: f64, len: usize, symbol_power: f64) -> Self {
        Self::from_powers(
            vec![symbol_power; len],
            vec![0.0; len],
            vec![symbol_power / gamma; len],
        )
    }

    pub fn len(&self) -> usize {
        self.per_symbol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_symbol.is_empty()
    }
}

/// `λ̃ = λ/(ρ+λ)` and `λ̃̃ = λ/(ρ+λ)²`; zero modes contribute nothing.
fn shrink(lambda: f64, rho: f64) -> (f64, f64) {
    let den = rho + lambda;
    if den <= 0.0 {
        (0.0, 0.0)
    } else {
        (lambda / den, lambda / (den * den))
    }
}

/// MMSE per-symbol SINR through the eigendecomposition of `(HA)^H HA`.
pub fn mmse_sinr_fsfc(
    channel: &ChannelRealization,
    a: &ModulationMatrix,
    noise_var: f64,
    symbol_power: f64,
) -> Result<SinrReport> {
    let ha = effective_channel(channel, a)?;
    mmse_sinr_from_effective(&ha, noise_var, symbol_power)
}

/// As [`mmse_sinr_fsfc`] for an explicit effective channel `HA`.
pub fn mmse_sinr_from_effective(ha: &CMat, noise_var: f64, symbol_power: f64) -> Result<SinrReport> {
    Ok(MmseSinrModel::new(ha)?.report(noise_var, symbol_power))
}

/// Eigendecomposition of `(HA)^H HA` kept for evaluating the MMSE SINR at
/// many noise levels.
#[derive(Debug, Clone)]
pub struct MmseSinrModel {
    eigvals: Vec<f64>,
    /// `|V_ls|²`, row-major by symbol `l`.
    weights: Vec<f64>,
}

impl MmseSinrModel {
    pub fn new(ha: &CMat) -> Result<Self> {
        let (eigvals, vecs) = psd_eigen(&(ha.adjoint() * ha))?;
        let dim = eigvals.len();
        let mut weights = vec![0.0; dim * dim];
        for s in 0..dim {
            for l in 0..dim {
                weights[l * dim + s] = vecs[(l, s)].norm_sqr();
            }
        }
        Ok(Self { eigvals, weights })
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// `[B]_ll`, the real gain of symbol `l` in its own MMSE estimate.
    pub fn signal_gain(&self, noise_var: f64, symbol_power: f64) -> Vec<f64> {
        let rho = noise_var / symbol_power;
        let shrunk: Vec<f64> = self.eigvals.iter().map(|&l| shrink(l, rho).0).collect();
        self.weights
            .chunks(shrunk.len())
            .map(|row| row.iter().zip(&shrunk).map(|(w, t)| w * t).sum())
            .collect()
    }

    pub fn report(&self, noise_var: f64, symbol_power: f64) -> SinrReport {
        let rho = noise_var / symbol_power;
        let shrunk: Vec<(f64, f64)> = self.eigvals.iter().map(|&l| shrink(l, rho)).collect();
        let dim = shrunk.len();
        let mut p_sig = vec![0.0; dim];
        let mut p_inr = vec![0.0; dim];
        let mut p_npp = vec![0.0; dim];
        for (l, row) in self.weights.chunks(dim).enumerate() {
            let (mut sig, mut sig_inr, mut npp) = (0.0, 0.0, 0.0);
            for (w, &(lt, ltt)) in row.iter().zip(&shrunk) {
                sig += w * lt;
                sig_inr += w * lt * lt;
                npp += w * ltt;
            }
            p_sig[l] = symbol_power * sig * sig;
            p_inr[l] = (symbol_power * sig_inr - p_sig[l]).max(0.0);
            p_npp[l] = noise_var * npp;
        }
        SinrReport::from_powers(p_sig, p_inr, p_npp)
    }
}

/// Literal evaluation from `B`, `B B^H` and `C C^H`.
pub fn mmse_sinr_dense(ha: &CMat, noise_var: f64, symbol_power: f64) -> Result<SinrReport> {
    let eq = EqualizerMatrices::new(ha, noise_var, symbol_power)?;
    let bbh = &eq.signal * eq.signal.adjoint();
    let cch = &eq.noise * eq.noise.adjoint();
    let dim = ha.ncols();
    let p_sig: Vec<f64> = (0..dim).map(|l| symbol_power * eq.signal[(l, l)].norm_sqr()).collect();
    let p_inr = (0..dim)
        .map(|l| (symbol_power * bbh[(l, l)].re - p_sig[l]).max(0.0))
        .collect();
    let p_npp = (0..dim).map(|l| noise_var * cch[(l, l)].re).collect();
    Ok(SinrReport::from_powers(p_sig, p_inr, p_npp))
}

/// AWGN MMSE SINR, identical for every symbol, from the eigenvalues of the
/// BCCB matrix `A^H A`.
pub fn mmse_sinr_awgn(a: &ModulationMatrix, noise_var: f64, symbol_power: f64) -> Result<f64> {
    let eig = bccb_eigenvalues(&a.gram(), a.block_size(), BCCB_TOLERANCE)?;
    let rho = noise_var / symbol_power;
    let dim = eig.len() as f64;
    let (mut sum_t, mut sum_t2, mut sum_tt) = (0.0, 0.0, 0.0);
    for e in &eig {
        let (t, tt) = shrink(e.re.max(0.0), rho);
        sum_t += t;
        sum_t2 += t * t;
        sum_tt += tt;
    }
    let p_sig = symbol_power * (sum_t / dim).powi(2);
    let p_inr = (symbol_power * sum_t2 / dim - p_sig).max(0.0);
    let p_npp = noise_var * sum_tt / dim;
    Ok(p_sig / (p_inr + p_npp))
}

/// Bit error probability of Gray-mapped square QAM at SINR `γ`.
pub fn ber_qam_awgn(gamma: f64, order: usize) -> Result<f64> {
    let root = (order as f64).sqrt().round() as usize;
    if order < 4 || root * root != order || !order.is_power_of_two() {
        return Err(GfdmError::UnsupportedModulation(order));
    }
    let m = order as f64;
    let sm = root as f64;
    let arg = (3.0 * gamma.max(0.0) / (m - 1.0)).sqrt();
    let sum: f64 = (0..root / 2)
        .map(|r| q_function((2 * r + 1) as f64 * arg))
        .sum();
    Ok(4.0 * (sm - 1.0) / (sm * m.log2()) * sum)
}

/// Mean of [`ber_qam_awgn`] over every symbol of every report.
pub fn ber_fsfc_average(reports: &[SinrReport], order: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for r in reports {
        for &g in &r.per_symbol {
            total += ber_qam_awgn(g, order)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(GfdmError::InvalidConfig("no SINR values to average".into()));
    }
    Ok(total / count as f64)
}

/// Double successive interference cancellation on a channel-free block.
/// Each pass re-estimates every subcarrier after subtracting the current
/// decisions of its two neighbours.
#[derive(Debug, Clone)]
pub struct DsicDetector {
    modulation: ModulationMatrix,
    gram: CMat,
    constellation: Constellation,
}

impl DsicDetector {
    pub fn new(a: &ModulationMatrix, constellation: &Constellation) -> Self {
        Self {
            gram: a.gram(),
            modulation: a.clone(),
            constellation: constellation.clone(),
        }
    }

    /// Soft estimates after `iterations` cancellation passes.
    pub fn detect(&self, y: &[C64], iterations: usize) -> Result<Vec<C64>> {
        let a = &self.modulation;
        check_len(a.dim(), y)?;
        let (n_sub, n_slots) = (a.n_subcarriers(), a.n_timeslots());
        let mf = adjoint_matvec(a.entries(), y);
        let mut soft = mf.clone();
        if iterations == 0 {
            return Ok(soft);
        }
        let mut hard: Vec<C64> = mf.iter().map(|&v| self.constellation.decide(v)).collect();
        for _ in 0..iterations {
            for k in 0..n_sub {
                let mut neighbours = vec![(k + n_sub - 1) % n_sub, (k + 1) % n_sub];
                neighbours.sort_unstable();
                neighbours.dedup();
                neighbours.retain(|&j| j != k);
                for m in 0..n_slots {
                    let row = a.column_index(k, m);
                    let mut est = mf[row];
                    for &j in &neighbours {
                        for mm in 0..n_slots {
                            let col = a.column_index(j, mm);
                            est -= self.gram[(row, col)] * hard[col];
                        }
                    }
                    soft[row] = est;
                    hard[row] = self.constellation.decide(est);
                }
            }
        }
        Ok(soft)
    }
}

pub fn dsic_equalize(
    y_fde: &[C64],
    a: &ModulationMatrix,
    iterations: usize,
    constellation: &Constellation,
) -> Result<Vec<C64>> {
    DsicDetector::new(a, constellation).detect(y_fde, iterations)
}

/// Samples of `d̂_l - B_ll d_l` after joint MMSE detection of random blocks,
/// pooled over symbol positions.
pub fn interference_noise_samples<R: Rng + ?Sized>(
    ha: &CMat,
    noise_var: f64,
    constellation: &Constellation,
    symbol_power: f64,
    rng: &mut R,
    count: usize,
) -> Result<Vec<C64>> {
    let eq = EqualizerMatrices::new(ha, noise_var, symbol_power)?;
    let dim = ha.ncols();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (_, d) = constellation.random_symbols(rng, dim);
        let mut y = matvec(ha, &d);
        if noise_var > 0.0 {
            for v in &mut y {
                *v += complex_gaussian(rng, noise_var);
            }
        }
        let est = matvec(&eq.noise, &y);
        for l in 0..dim {
            if out.len() == count {
                break;
            }
            out.push(est[l] - eq.signal[(l, l)] * d[l]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, trial_rng, PowerDelayProfile};
    use crate::config::GfdmConfig;
    use crate::linalg::{c, max_abs_diff_vec, solve};
    use crate::modulator::{build_modulation_matrix, Ordering};
    use crate::pulse::make_rrc_pulse;

    fn matrix(n: usize, m: usize, rolloff: f64) -> ModulationMatrix {
        let g = make_rrc_pulse(&GfdmConfig::new(n, m).with_rolloff(rolloff)).unwrap();
        build_modulation_matrix(&g, Ordering::NOrdered)
    }

    fn random_data(len: usize, seed: u64) -> Vec<C64> {
        let mut rng = trial_rng(seed, 7);
        Constellation::new(16, 1.0).unwrap().random_symbols(&mut rng, len).1
    }

    fn channel(len: usize, taps: usize, seed: u64) -> ChannelRealization {
        sample_channel(&PowerDelayProfile::exponential(taps).unwrap(), len, &mut trial_rng(seed, 0)).unwrap()
    }

    #[test]
    fn zf_and_mf_examples() {
        let a = matrix(4, 5, 0.9);
        let h = channel(20, 3, 1);
        let d = random_data(20, 1);
        let y = matvec(&effective_channel(&h, &a).unwrap(), &d);
        assert!(max_abs_diff_vec(&zf_equalize(&y, &h, &a).unwrap(), &d) < 1e-9);

        let unitary = matrix(4, 5, 0.0);
        let id = ChannelRealization::identity(20);
        let x = matvec(unitary.entries(), &d);
        assert!(max_abs_diff_vec(&mf_equalize(&x, &id, &unitary).unwrap(), &d) < 1e-9);

        let x = matvec(a.entries(), &d);
        let mf = mf_equalize(&x, &id, &a).unwrap();
        assert!(max_abs_diff_vec(&mf, &d) > 0.01);
    }

    #[test]
    fn mmse_limits_and_literal_formula() {
        let a = matrix(4, 3, 0.5);
        let h = channel(12, 3, 2);
        let d = random_data(12, 2);
        let ha = effective_channel(&h, &a).unwrap();
        let y = matvec(&ha, &d);
        let zf = zf_equalize(&y, &h, &a).unwrap();
        assert!(max_abs_diff_vec(&mmse_equalize(&y, &h, &a, 0.0, 1.0).unwrap(), &zf) < 1e-8);
        assert!(max_abs_diff_vec(&mmse_equalize(&y, &h, &a, 1e-12, 1.0).unwrap(), &zf) < 1e-6);

        let sigma = 0.3;
        let gram = ha.adjoint() * &ha + CMat::identity(12, 12) * c(sigma, 0.0);
        let rhs = CMat::from_column_slice(12, 1, &adjoint_matvec(&ha, &y));
        let literal = solve(&gram, &rhs).unwrap();
        let fast = mmse_equalize(&y, &h, &a, sigma, 1.0).unwrap();
        assert!(max_abs_diff_vec(&fast, literal.as_slice()) < 1e-10);

        let unitary = matrix(4, 5, 0.0);
        let d = random_data(20, 3);
        let x = matvec(unitary.entries(), &d);
        let est = mmse_equalize(&x, &ChannelRealization::identity(20), &unitary, 1.0, 1.0).unwrap();
        for (e, s) in est.iter().zip(&d) {
            assert!((e - s * 0.5).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_effective_channel_is_reported() {
        let a = matrix(4, 2, 0.5);
        let h = ChannelRealization::new(vec![c(1.0, 0.0), c(1.0, 0.0)], 8).unwrap();
        assert!(matches!(
            zf_equalize(&[c(0.0, 0.0); 8], &h, &a),
            Err(GfdmError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn sinr_eigen_path_matches_dense() {
        let a = matrix(4, 3, 0.5);
        for seed in 0..5 {
            let h = channel(12, 3, 10 + seed);
            let ha = effective_channel(&h, &a).unwrap();
            for nv in [0.01, 0.1, 1.0] {
                let fast = mmse_sinr_fsfc(&h, &a, nv, 1.0).unwrap();
                let dense = mmse_sinr_dense(&ha, nv, 1.0).unwrap();
                for l in 0..12 {
                    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
                    assert!(rel(fast.per_symbol[l], dense.per_symbol[l]) <= 1e-8);
                    assert!(rel(fast.p_sig[l], dense.p_sig[l]) <= 1e-8);
                    assert!(rel(fast.p_npp[l], dense.p_npp[l]) <= 1e-8);
                    assert!((fast.p_inr[l] - dense.p_inr[l]).abs() <= 1e-8 * dense.p_sig[l]);
                }
            }
        }
    }

    #[test]
    fn sinr_without_interference() {
        let unitary = matrix(4, 5, 0.0);
        let id = ChannelRealization::identity(20);
        let r = mmse_sinr_fsfc(&id, &unitary, 0.25, 1.0).unwrap();
        for g in &r.per_symbol {
            assert!((g - 4.0).abs() < 1e-9);
        }
        assert!((mmse_sinr_awgn(&unitary, 0.25, 1.0).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn sinr_decreases_with_noise() {
        let a = matrix(4, 3, 0.5);
        let h = channel(12, 2, 3);
        let mut last = f64::INFINITY;
        for nv in [1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e3, 1e6] {
            let g = mmse_sinr_fsfc(&h, &a, nv, 1.0).unwrap().per_symbol[0];
            assert!(g < last);
            last = g;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn awgn_sinr_matches_per_symbol_and_dense() {
        let a = matrix(8, 3, 0.5);
        let cfg = GfdmConfig::new(8, 3);
        let nv = crate::channel::ebn0_to_noise_variance(&cfg, 9.0, false);
        let g = mmse_sinr_awgn(&a, nv, 1.0).unwrap();
        let id = ChannelRealization::identity(24);
        let dense = mmse_sinr_dense(a.entries(), nv, 1.0).unwrap();
        let per = mmse_sinr_fsfc(&id, &a, nv, 1.0).unwrap();
        for l in 0..24 {
            assert!((dense.per_symbol[l] - g).abs() / g <= 1e-9);
            assert!((per.per_symbol[l] - g).abs() <= 1e-9 * g.max(1.0));
        }
    }

    #[test]
    fn ber_closed_form_examples() {
        for g in [0.0, 0.5, 3.0, 10.0] {
            let b = ber_qam_awgn(g, 4).unwrap();
            assert!((b - q_function(g.sqrt())).abs() < 1e-15);
        }
        for order in [4usize, 16, 64] {
            let sm = (order as f64).sqrt();
            let expect = 4.0 * (sm - 1.0) / (sm * (order as f64).log2()) * (sm / 2.0) * 0.5;
            assert!((ber_qam_awgn(0.0, order).unwrap() - expect).abs() < 1e-15);
        }
        // Q(x) = ½ erfc(x/√2) evaluated through libm's erfc on the two terms.
        let q = |x: f64| 0.5 * libm_erfc(x / 2f64.sqrt());
        let a = (3.0 * 40.0 / 15.0f64).sqrt();
        let expect = 4.0 * 3.0 / (4.0 * 4.0) * (q(a) + q(3.0 * a));
        assert!((ber_qam_awgn(40.0, 16).unwrap() - expect).abs() <= 1e-12);
        assert!(ber_qam_awgn(1.0, 8).is_err());
    }

    /// Continued-fraction erfc, independent of the statrs implementation.
    fn libm_erfc(x: f64) -> f64 {
        // Lentz evaluation of erfc(x) = exp(-x²)/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...)))).
        let tiny = 1e-300;
        let mut f = x.max(tiny);
        let mut c = f;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    #[test]
    fn ber_average_examples() {
        let r = SinrReport::uniform(5.0, 10, 1.0);
        assert!((ber_fsfc_average(&[r], 16).unwrap() - ber_qam_awgn(5.0, 16).unwrap()).abs() < 1e-15);
        let zero = SinrReport::uniform(0.0, 4, 1.0);
        let inf = SinrReport::uniform(1e300, 4, 1.0);
        let avg = ber_fsfc_average(&[zero, inf], 4).unwrap();
        assert!((avg - 0.5 * ber_qam_awgn(0.0, 4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn dsic_examples() {
        let qpsk = Constellation::qpsk();
        let a = matrix(8, 3, 0.9);
        let d = random_data(24, 5);
        let y = matvec(a.entries(), &d);
        let mf = adjoint_matvec(a.entries(), &y);
        assert!(max_abs_diff_vec(&dsic_equalize(&y, &a, 0, &qpsk).unwrap(), &mf) < 1e-15);
        let unitary = matrix(4, 5, 0.0);
        let y = matvec(unitary.entries(), &random_data(20, 6));
        let mf = adjoint_matvec(unitary.entries(), &y);
        assert!(max_abs_diff_vec(&dsic_equalize(&y, &unitary, 3, &qpsk).unwrap(), &mf) < 1e-12);
    }

    #[test]
    fn interference_samples_vanish_without_noise_or_interference() {
        let unitary = matrix(4, 5, 0.0);
        let s = interference_noise_samples(unitary.entries(), 0.0, &Constellation::qpsk(), 1.0, &mut trial_rng(1, 1), 100).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|v| v.norm() < 1e-12));
    }
}
