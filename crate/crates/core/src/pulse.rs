//! Circular root-raised-cosine prototype filter.

use crate::config::GfdmConfig;
use crate::error::{GfdmError, Result};
use crate::linalg::{ifft, C64};

/// Real prototype filter `g(n)`, periodic with period `MN`, unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    taps: Vec<f64>,
    rolloff: f64,
    n_subcarriers: usize,
    n_timeslots: usize,
}

impl PulseShape {
    /// Wraps explicit taps. The caller is responsible for the energy normalization.
    pub fn from_taps(taps: Vec<f64>, rolloff: f64, n_subcarriers: usize, n_timeslots: usize) -> Result<Self> {
        if taps.len() != n_subcarriers * n_timeslots {
            return Err(GfdmError::DimensionMismatch {
                expected: n_subcarriers * n_timeslots,
                found: taps.len(),
            });
        }
        Ok(Self {
            taps,
            rolloff,
            n_subcarriers,
            n_timeslots,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_timeslots(&self) -> usize {
        self.n_timeslots
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `g(n mod MN)` for any signed index.
    pub fn at(&self, n: isize) -> f64 {
        let len = self.taps.len() as isize;
        self.taps[n.rem_euclid(len) as usize]
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|g| g * g).sum()
    }
}

/// Root-raised-cosine amplitude at normalized frequency `nu`, measured in
/// subcarrier spacings from the band centre.
pub fn rrc_response(nu: f64, rolloff: f64) -> f64 {
    let a = nu.abs();
    let lower = (1.0 - rolloff) / 2.0;
    let upper = (1.0 + rolloff) / 2.0;
    if a <= lower + 1e-12 {
        1.0
    } else if a > upper + 1e-12 {
        0.0
    } else {
        (0.5 * (1.0 + (std::f64::consts::PI / rolloff * (a - lower)).cos())).sqrt()
    }
}

/// Builds the circular RRC prototype on the `MN`-point grid: the spectrum is
/// sampled at `M` bins per subcarrier spacing, inverse transformed, and
/// scaled to unit energy.
pub fn make_rrc_pulse(cfg: &GfdmConfig) -> Result<PulseShape> {
    let rolloff = cfg.rolloff;
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(GfdmError::RolloffOutOfRange(rolloff));
    }
    let (n, m) = (cfg.n_subcarriers, cfg.n_timeslots);
    let len = n * m;
    if len == 0 {
        return Err(GfdmError::InvalidConfig("empty block".into()));
    }
    let spectrum: Vec<C64> = (0..len)
        .map(|f| {
            let signed = if 2 * f <= len { f as f64 } else { f as f64 - len as f64 };
            C64::new(rrc_response(signed / m as f64, rolloff), 0.0)
        })
        .collect();
    let time = ifft(&spectrum);
    let mut taps: Vec<f64> = time.iter().map(|v| v.re).collect();
    let norm = taps.iter().map(|g| g * g).sum::<f64>().sqrt();
    for g in &mut taps {
        *g /= norm;
    }
    PulseShape::from_taps(taps, rolloff, n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Textbook raised-cosine spectrum, square-rooted, inverted by a direct DFT sum.
    fn oracle_rrc(n: usize, m: usize, rolloff: f64) -> Vec<f64> {
        let len = n * m;
        let rc = |f: f64| -> f64 {
            let f = f.abs();
            if f <= (1.0 - rolloff) / 2.0 {
                1.0
            } else if f <= (1.0 + rolloff) / 2.0 {
                0.5 * (1.0 + (PI / rolloff * (f - (1.0 - rolloff) / 2.0)).cos())
            } else {
                0.0
            }
        };
        let spec: Vec<f64> = (0..len)
            .map(|k| {
                let kk = if k > len / 2 { k as f64 - len as f64 } else { k as f64 };
                rc(kk / m as f64).sqrt()
            })
            .collect();
        let raw: Vec<f64> = (0..len)
            .map(|t| {
                (0..len)
                    .map(|k| spec[k] * (2.0 * PI * (k * t) as f64 / len as f64).cos())
                    .sum::<f64>()
            })
            .collect();
        let e = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.into_iter().map(|x| x / e).collect()
    }

    #[test]
    fn rolloff_zero_is_periodic_sinc() {
        let p = make_rrc_pulse(&GfdmConfig::new(4, 5).with_rolloff(0.0)).unwrap();
        // Five bins (|f| <= 2) of a 20-point grid: Dirichlet kernel.
        let len = 20.0;
        let dir: Vec<f64> = (0..20)
            .map(|t| (-2..=2).map(|f| (2.0 * PI * f as f64 * t as f64 / len).cos()).sum::<f64>())
            .collect();
        let e = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (g, d) in p.taps().iter().zip(&dir) {
            assert!((g - d / e).abs() < 1e-12);
        }
        assert!((p.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_energy() {
        let p = make_rrc_pulse(&GfdmConfig::new(128, 5).with_rolloff(0.5)).unwrap();
        assert!((p.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_textbook_sampler() {
        let p = make_rrc_pulse(&GfdmConfig::new(4, 5).with_rolloff(0.9)).unwrap();
        let o = oracle_rrc(4, 5, 0.9);
        let diff = p.taps().iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-9, "max diff {diff}");
    }

    #[test]
    fn circularly_symmetric() {
        let p = make_rrc_pulse(&GfdmConfig::new(8, 3).with_rolloff(0.3)).unwrap();
        for n in 1..24 {
            assert!((p.at(n) - p.at(-n)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_rolloff_out_of_range() {
        let cfg = GfdmConfig::new(4, 5).with_rolloff(-0.1);
        assert!(matches!(make_rrc_pulse(&cfg), Err(GfdmError::RolloffOutOfRange(_))));
        let cfg = GfdmConfig::new(4, 5).with_rolloff(1.01);
        assert!(make_rrc_pulse(&cfg).is_err());
    }

    #[test]
    fn degenerate_single_sample() {
        let p = make_rrc_pulse(&GfdmConfig::new(1, 1)).unwrap();
        assert_eq!(p.taps(), &[1.0]);
    }
}
