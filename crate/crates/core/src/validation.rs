//! Property suite behind `validate`: structure, unitarity, fast-vs-dense
//! agreement and noiseless reconstruction, each reported by name.

use std::fmt;

use rand::Rng;

use crate::bccb::{bccb_eigenvalues, block_diagonalize, block_diagonalize_fast, invert_block_diagonal, is_bccb, BlockFourier};
use crate::channel::{fde_equalize, fde_equalize_dense, sample_channel, trial_rng, ChannelRealization};
use crate::error::{GfdmError, Result};
use crate::experiment::{ChannelKind, ExperimentConfig};
use crate::linalg::{hermitian_eigen, matvec, max_abs_diff, max_abs_diff_vec, unitarity_error, CMat, C64};
use crate::metrics::Scheme;
use crate::modulator::{build_modulation_matrix, GfdmModem, ModulationMatrix, Ordering};
use crate::precoders::{make_precoder, svd_precode_receive, BidftJointReceiver, PrecodedZfReceiver, PrecoderKind};
use crate::precoders::{SvdFactors, TwoStageReceiver};
use crate::pulse::make_rrc_pulse;
use crate::qam::Constellation;
use crate::receivers::{effective_channel, mmse_sinr_dense, mmse_sinr_from_effective};

pub const STRUCTURE_TOL: f64 = 1e-10;
pub const OFF_BLOCK_TOL: f64 = 1e-9;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const SINR_REL_TOL: f64 = 1e-8;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Schemes whose receiver inverts the precoded link exactly.
pub const INVERTIBLE_SCHEMES: [Scheme; 8] = [
    Scheme::GfdmZf,
    Scheme::GfdmMmse,
    Scheme::BidftJp,
    Scheme::BidftN,
    Scheme::BidftM,
    Scheme::LfdmaZf,
    Scheme::IfdmaZf,
    Scheme::SvdPrec,
];

/// Largest block size `N·M` validated as configured.
pub const DESK_MAX_DIM: usize = 256;
const DESK_SUBCARRIERS: usize = 16;

/// The configuration itself when `N·M ≤ DESK_MAX_DIM`; otherwise the same
/// experiment with 16 subcarriers, time slots capped at 16 and the largest
/// spreading factor not above the configured one that divides 16.
pub fn desk_scale(exp: &ExperimentConfig) -> ExperimentConfig {
    let mut out = exp.clone();
    if exp.gfdm.block_len() <= DESK_MAX_DIM {
        return out;
    }
    out.gfdm.n_subcarriers = DESK_SUBCARRIERS;
    out.gfdm.n_timeslots = exp.gfdm.n_timeslots.min(DESK_MAX_DIM / DESK_SUBCARRIERS);
    out.gfdm.spreading_factor = (1..=exp.gfdm.spreading_factor.min(DESK_SUBCARRIERS))
        .rev()
        .find(|q| DESK_SUBCARRIERS % q == 0)
        .unwrap_or(1);
    out.channel_length = exp.channel_length.min(out.gfdm.block_len());
    out.spread_symbol = 0;
    out
}

/// A deliberate corruption of the `N`-ordered modulation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub row: usize,
    pub col: usize,
    pub delta: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub n_channels: usize,
    pub noise_levels: Vec<f64>,
    pub perturbation: Option<Perturbation>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            n_channels: 3,
            noise_levels: vec![0.01, 0.1, 1.0],
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub outcomes: Vec<PropertyOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    fn record(&mut self, name: impl Into<String>, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.outcomes.push(PropertyOutcome {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn bound(&mut self, name: impl Into<String>, value: Result<f64>, tol: f64) {
        self.record(
            name,
            value.map(|v| (v <= tol, format!("max deviation {v:.3e} (tolerance {tol:.0e})"))),
        );
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} properties, {failed} failed", self.outcomes.len())
    }
}

fn perturbed(a: &ModulationMatrix, p: &Perturbation) -> Result<ModulationMatrix> {
    let dim = a.dim();
    if p.row >= dim || p.col >= dim {
        return Err(GfdmError::IndexOutOfRange {
            what: "perturbed entry",
            index: p.row.max(p.col),
            bound: dim,
        });
    }
    let mut entries = a.entries().clone();
    entries[(p.row, p.col)] += p.delta;
    ModulationMatrix::from_parts(entries, a.ordering(), a.pulse().clone())
}

/// Largest relative per-symbol SINR gap between the eigen and dense paths.
pub fn sinr_path_gap(ha: &CMat, noise_var: f64, symbol_power: f64) -> Result<f64> {
    let fast = mmse_sinr_from_effective(ha, noise_var, symbol_power)?;
    let dense = mmse_sinr_dense(ha, noise_var, symbol_power)?;
    Ok(fast
        .per_symbol
        .iter()
        .zip(&dense.per_symbol)
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max))
}

/// Largest error between random data and its noiseless estimate through
/// `scheme`'s precoder, modulator, channel and matched receiver.
pub fn reconstruction_error<R: Rng + ?Sized>(
    cfg: &crate::config::GfdmConfig,
    scheme: Scheme,
    channel: &ChannelRealization,
    rng: &mut R,
) -> Result<f64> {
    let kind = scheme.precoder().ok_or(GfdmError::UnknownScheme(scheme.label().into()))?;
    if !INVERTIBLE_SCHEMES.contains(&scheme) {
        return Err(GfdmError::UnknownScheme(format!("{scheme} has no exact inverse")));
    }
    let pulse = make_rrc_pulse(cfg)?;
    let a = build_modulation_matrix(&pulse, kind.ordering());
    let ha = effective_channel(channel, &a)?;
    let svd = (kind == PrecoderKind::Svd).then(|| SvdFactors::new(&ha));
    let precoder = make_precoder(kind, cfg, svd.as_ref())?;
    let constellation = Constellation::new(cfg.mod_order, cfg.symbol_power)?;
    let (_, d) = constellation.random_symbols(rng, a.dim());
    let x = GfdmModem::new(&pulse).modulate(&precoder.precode(&d)?, kind.ordering())?;
    let y = channel.apply_circular(&x)?;
    let est = match scheme {
        Scheme::GfdmMmse => crate::receivers::LinearReceiver::mmse(&ha, 0.0, cfg.symbol_power)?.apply(&y)?,
        Scheme::BidftJp => BidftJointReceiver::new(&ha, cfg.n_subcarriers)?.receive(&y, 0.0, 1.0)?.0,
        Scheme::BidftN | Scheme::BidftM => TwoStageReceiver::new(&a)?.detect(&y, channel)?,
        Scheme::SvdPrec => {
            let f = svd.as_ref().expect("factored above");
            let z = svd_precode_receive(&y, f, 0.0, 1.0)?.0;
            z.into_iter().zip(&f.singular_values).map(|(v, s)| v / s).collect()
        }
        _ => PrecodedZfReceiver::new(&ha, &precoder)?.receive(&y, 0.0, 1.0)?.0,
    };
    Ok(max_abs_diff_vec(&est, &d))
}

/// Runs every property at the configuration's dimensions.
pub fn run_validation(exp: &ExperimentConfig, opts: &ValidationOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    let cfg = &exp.gfdm;
    let channel_len = match exp.channel {
        ChannelKind::Awgn => 1,
        ChannelKind::Fsfc => exp.channel_length,
    };
    report.record(
        "model-assumption:cyclic-prefix",
        Ok((
            cfg.cp_length + 1 >= channel_len,
            format!("cp {} for a channel of {channel_len} taps (needs cp >= taps - 1)", cfg.cp_length),
        )),
    );
    if let Err(e) = cfg.validate() {
        report.record("config", Err(e));
        return report;
    }
    let pulse = match make_rrc_pulse(cfg) {
        Ok(p) => p,
        Err(e) => {
            report.record("pulse", Err(e));
            return report;
        }
    };
    let (n, m) = (cfg.n_subcarriers, cfg.n_timeslots);
    let a_m = build_modulation_matrix(&pulse, Ordering::MOrdered);
    let a_n = match &opts.perturbation {
        None => Ok(build_modulation_matrix(&pulse, Ordering::NOrdered)),
        Some(p) => perturbed(&build_modulation_matrix(&pulse, Ordering::NOrdered), p),
    };
    let a_n = match a_n {
        Ok(a) => a,
        Err(e) => {
            report.record("perturbation", Err(e));
            return report;
        }
    };

    for (name, a, bs) in [("bccb:gram-n-ordered", &a_n, n), ("bccb:gram-m-ordered", &a_m, m)] {
        report.bound(name, is_bccb(&a.gram(), bs, STRUCTURE_TOL).map(|c| c.deviation), STRUCTURE_TOL);
    }
    report.bound(
        "bccb:eigenvalues",
        bccb_eigenvalues(&a_n.gram(), n, 1e-9).map(|eig| {
            let mut fast: Vec<f64> = eig.iter().map(|v| v.re).collect();
            let (mut dense, _) = hermitian_eigen(&a_n.gram());
            fast.sort_by(f64::total_cmp);
            dense.sort_by(f64::total_cmp);
            fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        }),
        1e-9,
    );

    for (name, f) in [
        ("unitarity:block-fourier-n", BlockFourier::new(n, m)),
        ("unitarity:block-fourier-m", BlockFourier::new(m, n)),
    ] {
        report.bound(name, Ok(unitarity_error(f.matrix())), IDENTITY_TOL);
    }

    let modem = GfdmModem::new(&pulse);
    let mut rng = trial_rng(exp.seed, 0);
    let constellation = Constellation::new(cfg.mod_order, cfg.symbol_power).expect("validated order");
    let (_, d) = constellation.random_symbols(&mut rng, a_n.dim());
    report.bound(
        "oracle:fast-modulator",
        [&a_n, &a_m]
            .into_iter()
            .map(|a| Ok(max_abs_diff_vec(&modem.modulate(&d, a.ordering())?, &matvec(a.entries(), &d))))
            .try_fold(0.0, |acc: f64, v: Result<f64>| v.map(|v| acc.max(v))),
        1e-10,
    );

    let pdp = exp.pdp().unwrap_or_else(|_| crate::channel::PowerDelayProfile::exponential(1).expect("one tap"));
    let channels: Vec<ChannelRealization> = (0..opts.n_channels)
        .filter_map(|c| match exp.channel {
            ChannelKind::Awgn => Some(ChannelRealization::identity(a_n.dim())),
            ChannelKind::Fsfc => sample_channel(&pdp, a_n.dim(), &mut trial_rng(exp.seed, 1 + c as u64)).ok(),
        })
        .collect();

    let mut fde_gap = Ok(0.0f64);
    let mut diag_gap = Ok(0.0f64);
    let mut off_block = Ok(0.0f64);
    let mut sinr_gap = Ok(0.0f64);
    let mut inverse_gap = Ok(0.0f64);
    let mut precoder_gap = Ok(0.0f64);
    let fourier_n = BlockFourier::new(n, m);
    for ch in &channels {
        let y: Vec<C64> = constellation.random_symbols(&mut rng, a_n.dim()).1;
        fold_max(&mut fde_gap, || {
            Ok(max_abs_diff_vec(&fde_equalize(&y, ch)?, &fde_equalize_dense(&y, ch)?))
        });
        let ha = effective_channel(ch, &a_n);
        let Ok(ha) = ha else {
            fold_max(&mut diag_gap, || ha.map(|_| 0.0));
            continue;
        };
        let gram = ha.adjoint() * &ha;
        fold_max(&mut diag_gap, || {
            let fast = block_diagonalize_fast(&gram, n)?;
            let dense = block_diagonalize(&gram, &fourier_n, 1.0)?;
            Ok(max_abs_diff(&fast.to_dense(), &dense.blocks.to_dense()))
        });
        fold_max(&mut off_block, || Ok(block_diagonalize(&gram, &fourier_n, 1.0)?.off_block_ratio));
        for &nv in &opts.noise_levels {
            fold_max(&mut sinr_gap, || sinr_path_gap(&ha, nv, cfg.symbol_power));
        }
        fold_max(&mut inverse_gap, || {
            let d = block_diagonalize_fast(&gram, n)?;
            let prod = d.mul(&invert_block_diagonal(&d)?)?.to_dense();
            Ok(max_abs_diff(&prod, &CMat::identity(prod.nrows(), prod.ncols())))
        });
        fold_max(&mut precoder_gap, || {
            let svd = SvdFactors::new(&ha);
            PrecoderKind::ALL.iter().try_fold(0.0f64, |acc, &k| {
                Ok(acc.max(unitarity_error(make_precoder(k, cfg, Some(&svd))?.matrix())))
            })
        });
    }
    report.bound("oracle:fde", fde_gap, 1e-10);
    report.bound("oracle:block-diagonalization", diag_gap, 1e-9);
    report.bound("bccb:effective-gram-off-block", off_block, OFF_BLOCK_TOL);
    report.bound("oracle:mmse-sinr", sinr_gap, SINR_REL_TOL);
    report.bound("inverse:block-diagonal", inverse_gap, IDENTITY_TOL);
    report.bound("unitarity:precoders", precoder_gap, IDENTITY_TOL);

    for scheme in INVERTIBLE_SCHEMES {
        let mut gap = Ok(0.0f64);
        for ch in &channels {
            fold_max(&mut gap, || reconstruction_error(cfg, scheme, ch, &mut rng));
        }
        report.bound(format!("reconstruction:{scheme}"), gap, RECONSTRUCTION_TOL);
    }
    report
}

/// Keeps the running maximum, or the first error.
fn fold_max(acc: &mut Result<f64>, f: impl FnOnce() -> Result<f64>) {
    if let Ok(current) = acc {
        *acc = f().map(|v| current.max(v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> ExperimentConfig {
        let mut exp = ExperimentConfig::default();
        exp.gfdm.n_subcarriers = 8;
        exp.gfdm.n_timeslots = 3;
        exp.gfdm.spreading_factor = 2;
        exp.gfdm.cp_length = 4;
        exp.channel_length = 4;
        exp
    }

    #[test]
    fn desk_config_passes() {
        let report = run_validation(&desk(), &ValidationOptions::default());
        assert!(report.passed(), "{report}");
        assert!(report.outcomes.len() > 15);
    }

    #[test]
    fn desk_scale_shrinks_large_blocks_only() {
        let small = desk();
        assert_eq!(desk_scale(&small), small);
        let big = desk_scale(&ExperimentConfig::default());
        assert_eq!((big.gfdm.n_subcarriers, big.gfdm.n_timeslots), (16, 5));
        assert_eq!(big.gfdm.spreading_factor, 4);
        assert_eq!((big.gfdm.cp_length, big.channel_length), (16, 16));
        assert!(big.validate().is_ok());
    }

    #[test]
    fn short_prefix_is_a_model_failure() {
        let mut exp = desk();
        exp.gfdm.cp_length = 1;
        let report = run_validation(&exp, &ValidationOptions::default());
        let names: Vec<&str> = report.failures().map(|o| o.name.as_str()).collect();
        assert_eq!(names, vec!["model-assumption:cyclic-prefix"]);
    }

    #[test]
    fn perturbed_matrix_fails_bccb_by_name() {
        let opts = ValidationOptions {
            perturbation: Some(Perturbation {
                row: 3,
                col: 5,
                delta: C64::new(0.05, 0.0),
            }),
            ..ValidationOptions::default()
        };
        let report = run_validation(&desk(), &opts);
        assert!(!report.passed());
        assert!(report.failures().any(|o| o.name == "bccb:gram-n-ordered"));
        assert!(report.outcomes.iter().any(|o| o.name == "bccb:gram-m-ordered" && o.passed));
        assert!(report.to_string().contains("FAIL bccb:gram-n-ordered"));
    }
}
