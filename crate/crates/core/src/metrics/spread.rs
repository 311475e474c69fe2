//! Spectral footprint of a single transmitted symbol.

use super::Scheme;
use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::linalg::{fft, ifft_unitary, C64};
use crate::modulator::GfdmModem;
use crate::precoders::{make_precoder, PrecoderKind, SvdFactors};
use crate::pulse::make_rrc_pulse;

/// `|DFT(A P e_l)|` over `MN` bins, scaled to a unit peak. SVD precoding
/// needs the channel's factors; other schemes ignore `svd`.
pub fn frequency_spread(cfg: &GfdmConfig, scheme: Scheme, symbol: usize, svd: Option<&SvdFactors>) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dim = cfg.block_len();
    if symbol >= dim {
        return Err(GfdmError::IndexOutOfRange {
            what: "symbol",
            index: symbol,
            bound: dim,
        });
    }
    let mut unit = vec![C64::new(0.0, 0.0); dim];
    unit[symbol] = C64::new(1.0, 0.0);
    let x = match scheme.precoder() {
        None => ifft_unitary(&unit),
        Some(kind) => {
            let precoded = if kind == PrecoderKind::Svd {
                let f = svd.ok_or(GfdmError::MissingChannelState)?;
                if f.v.nrows() != dim {
                    return Err(GfdmError::DimensionMismatch {
                        expected: dim,
                        found: f.v.nrows(),
                    });
                }
                f.v.column(symbol).iter().copied().collect()
            } else {
                make_precoder(kind, cfg, None)?.precode(&unit)?
            };
            GfdmModem::new(&make_rrc_pulse(cfg)?).modulate(&precoded, kind.ordering())?
        }
    };
    let mags: Vec<f64> = fft(&x).iter().map(|v| v.norm()).collect();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    Ok(mags.into_iter().map(|m| if peak > 0.0 { m / peak } else { 0.0 }).collect())
}

/// Fewest bins that together hold `fraction` of the spectrum's energy.
pub fn occupancy(spectrum: &[f64], fraction: f64) -> usize {
    let mut energy: Vec<f64> = spectrum.iter().map(|m| m * m).collect();
    energy.sort_by(|a, b| b.total_cmp(a));
    let target = fraction * energy.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc >= target * (1.0 - 1e-12) {
            return i + 1;
        }
    }
    energy.len()
}
