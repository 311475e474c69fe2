//! Complex-multiplication counts of transmitters and receivers.

use std::fmt;
use std::str::FromStr;

use crate::error::{GfdmError, Result};

/// One counted processing chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexityEntry {
    OfdmTx,
    GfdmTx,
    SvdTx,
    BidftTx,
    DftTx,
    OfdmRx,
    /// FDE followed by matched filtering or zero forcing; both cost the same.
    GfdmZfRx,
    GfdmMmseRx,
    GfdmDsicRx,
    SvdRxKnown,
    SvdRxUnknown,
    BidftJointRx,
    BidftTwoStageNRx,
    BidftTwoStageMRx,
    DftRx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

impl ComplexityEntry {
    pub const ALL: [ComplexityEntry; 15] = [
        ComplexityEntry::OfdmTx,
        ComplexityEntry::GfdmTx,
        ComplexityEntry::SvdTx,
        ComplexityEntry::BidftTx,
        ComplexityEntry::DftTx,
        ComplexityEntry::OfdmRx,
        ComplexityEntry::GfdmZfRx,
        ComplexityEntry::GfdmMmseRx,
        ComplexityEntry::GfdmDsicRx,
        ComplexityEntry::SvdRxKnown,
        ComplexityEntry::SvdRxUnknown,
        ComplexityEntry::BidftJointRx,
        ComplexityEntry::BidftTwoStageNRx,
        ComplexityEntry::BidftTwoStageMRx,
        ComplexityEntry::DftRx,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ComplexityEntry::OfdmTx => "ofdm-tx",
            ComplexityEntry::GfdmTx => "gfdm-tx",
            ComplexityEntry::SvdTx => "svd-tx",
            ComplexityEntry::BidftTx => "bidft-tx",
            ComplexityEntry::DftTx => "dft-tx",
            ComplexityEntry::OfdmRx => "ofdm-rx",
            ComplexityEntry::GfdmZfRx => "gfdm-zf-rx",
            ComplexityEntry::GfdmMmseRx => "gfdm-mmse-rx",
            ComplexityEntry::GfdmDsicRx => "gfdm-dsic-rx",
            ComplexityEntry::SvdRxKnown => "svd-rx-known",
            ComplexityEntry::SvdRxUnknown => "svd-rx-unknown",
            ComplexityEntry::BidftJointRx => "bidft-jp-rx",
            ComplexityEntry::BidftTwoStageNRx => "bidftn-two-stage-rx",
            ComplexityEntry::BidftTwoStageMRx => "bidftm-two-stage-rx",
            ComplexityEntry::DftRx => "dft-rx",
        }
    }

    pub fn side(self) -> Side {
        match self {
            ComplexityEntry::OfdmTx
            | ComplexityEntry::GfdmTx
            | ComplexityEntry::SvdTx
            | ComplexityEntry::BidftTx
            | ComplexityEntry::DftTx => Side::Tx,
            _ => Side::Rx,
        }
    }
}

impl fmt::Display for ComplexityEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ComplexityEntry {
    type Err = GfdmError;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityEntry::ALL
            .into_iter()
            .find(|e| e.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GfdmError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityExtras {
    /// Cancellation passes of the DSIC receiver.
    pub dsic_iterations: usize,
    /// DFT spreading factor; the DFT size is `N / Q`.
    pub spreading_factor: usize,
}

impl Default for ComplexityExtras {
    fn default() -> Self {
        Self {
            dsic_iterations: 4,
            spreading_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub entry: ComplexityEntry,
    /// Named additive terms; `count` is their sum.
    pub terms: Vec<(&'static str, f64)>,
    pub count: f64,
}

impl ComplexityReport {
    fn new(entry: ComplexityEntry, terms: Vec<(&'static str, f64)>) -> Self {
        let count = terms.iter().map(|(_, v)| v).sum();
        Self { entry, terms, count }
    }
}

/// Evaluates the operation count of `entry` for `N` subcarriers and `M`
/// slots. Logarithms are exact real `log2`, so counts need not be integers.
pub fn complexity_count(entry: ComplexityEntry, n: usize, m: usize, extras: ComplexityExtras) -> Result<ComplexityReport> {
    if n == 0 || m == 0 {
        return Err(GfdmError::InvalidConfig(format!("N = {n} and M = {m} must be positive")));
    }
    let q = extras.spreading_factor;
    if q == 0 || n % q != 0 {
        return Err(GfdmError::InvalidConfig(format!("spreading factor {q} does not divide N = {n}")));
    }
    let (nf, mf) = (n as f64, m as f64);
    let mn = nf * mf;
    let fde = vec![("fde", 1.5 * mn * mn.log2()), ("fde-scaling", 2.0 * mn)];
    let dft_spread = ("dft-spreading", mn / 2.0 * (nf / q as f64).log2());
    let with = |mut base: Vec<(&'static str, f64)>, extra: &[(&'static str, f64)]| {
        base.extend_from_slice(extra);
        base
    };
    let terms = match entry {
        ComplexityEntry::OfdmTx => vec![("ifft", mn * nf.log2())],
        ComplexityEntry::GfdmTx | ComplexityEntry::BidftTx => vec![("modulation", mn * mn)],
        ComplexityEntry::SvdTx => vec![("precoding", mn * mn), ("modulation", mn * mn)],
        ComplexityEntry::DftTx => vec![("modulation", mn * mn), dft_spread],
        ComplexityEntry::OfdmRx => vec![("fft-and-equalization", 2.0 * mn * nf.log2())],
        ComplexityEntry::GfdmZfRx => with(fde, &[("demodulation", mn * mn)]),
        ComplexityEntry::GfdmMmseRx => with(
            fde,
            &[
                ("inversion", mn.powi(3) / 3.0),
                ("products", 2.0 * mn * mn),
                ("inversion-linear", 2.0 * mn / 3.0),
            ],
        )
        .into_iter()
        .filter(|(name, _)| *name != "fde-scaling")
        .collect(),
        ComplexityEntry::GfdmDsicRx => with(
            fde,
            &[("cancellation", 2.0 * mn * mn * extras.dsic_iterations as f64)],
        ),
        ComplexityEntry::SvdRxKnown => vec![("projection", mn * mn)],
        ComplexityEntry::SvdRxUnknown => vec![("projection", mn * mn), ("svd", 26.0 * mn.powi(3))],
        ComplexityEntry::BidftJointRx => vec![
            ("effective-channel", mn * mn * nf.log2()),
            ("block-diagonal", 2.0 * mn * mn),
            ("block-inversion", mf * nf * nf),
        ],
        ComplexityEntry::BidftTwoStageNRx => with(
            fde,
            &[
                ("despreading", nf * mf * mf),
                ("demodulation", mn * mn),
                ("block-inverse", mf * nf * nf),
            ],
        ),
        ComplexityEntry::BidftTwoStageMRx => with(
            fde,
            &[
                ("despreading", nf * mf * mf),
                ("demodulation", mn * mn),
                ("block-inverse", nf * mf * mf),
            ],
        ),
        ComplexityEntry::DftRx => with(fde, &[("demodulation", mn * mn), dft_spread]),
    };
    Ok(ComplexityReport::new(entry, terms))
}

/// Application scenarios with their published operation counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Tactile internet, `N = 128`, `M = 5`.
    TactileInternet,
    /// Wireless regional area network, `N = 16`, `M = 127`.
    Wran,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::TactileInternet, Scenario::Wran];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::TactileInternet => "TI",
            Scenario::Wran => "WRAN",
        }
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            Scenario::TactileInternet => (128, 5),
            Scenario::Wran => (16, 127),
        }
    }

    /// Entries with a published count and that count as printed.
    pub fn published(self) -> &'static [(ComplexityEntry, &'static str)] {
        use ComplexityEntry::*;
        match self {
            Scenario::TactileInternet => &[
                (OfdmTx, "4.4e3"),
                (GfdmTx, "4.09e5"),
                (SvdTx, "8.19e5"),
                (BidftTx, "4.09e5"),
                (DftTx, "4.12e5"),
                (OfdmRx, "8.9e3"),
                (GfdmZfRx, "4.19e5"),
                (GfdmMmseRx, "8.8e7"),
                (GfdmDsicRx, "3.2e6"),
                (SvdRxKnown, "4.09e5"),
                (SvdRxUnknown, "6.8e9"),
                (BidftJointRx, "3.7e6"),
                (BidftTwoStageNRx, "5e5"),
                (DftRx, "4.2e5"),
            ],
            Scenario::Wran => &[
                (OfdmTx, "8.1e3"),
                (GfdmTx, "4.1e5"),
                (SvdTx, "8.25e5"),
                (BidftTx, "4.12e5"),
                (DftTx, "4.13e5"),
                (OfdmRx, "1.62e4"),
                (GfdmZfRx, "4.16e6"),
                (GfdmMmseRx, "2.8e9"),
                (GfdmDsicRx, "3.3e7"),
                (SvdRxKnown, "4.1e6"),
                (SvdRxUnknown, "2.1e11"),
                (BidftJointRx, "2.4e7"),
                (BidftTwoStageNRx, "4.19e6"),
                (DftRx, "4.16e6"),
            ],
        }
    }

    pub fn published_value(self, entry: ComplexityEntry) -> Option<&'static str> {
        self.published().iter().find(|(e, _)| *e == entry).map(|(_, v)| *v)
    }
}

impl FromStr for Scenario {
    type Err = GfdmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ti" | "tactile" => Ok(Scenario::TactileInternet),
            "wran" => Ok(Scenario::Wran),
            _ => Err(GfdmError::InvalidConfig(format!("unknown scenario {s:?}; use TI or WRAN"))),
        }
    }
}

/// Whether `count` agrees with a value printed in scientific notation
/// (`"4.09e5"`) to within one unit of its last printed digit.
pub fn matches_printed(count: f64, printed: &str) -> Result<bool> {
    let bad = || GfdmError::InvalidConfig(format!("malformed printed value {printed:?}"));
    let (mantissa, exponent) = printed.split_once(['e', 'E']).ok_or_else(bad)?;
    let exponent: i32 = exponent.parse().map_err(|_| bad())?;
    let decimals = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
    let value: f64 = printed.parse().map_err(|_| bad())?;
    let unit = 10f64.powi(exponent - decimals);
    Ok((count - value).abs() < unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(entry: ComplexityEntry, n: usize, m: usize) -> f64 {
        complexity_count(entry, n, m, ComplexityExtras::default()).unwrap().count
    }

    #[test]
    fn gfdm_tx_is_exact_square() {
        assert_eq!(count(ComplexityEntry::GfdmTx, 128, 5), 409_600.0);
        assert_eq!(count(ComplexityEntry::SvdTx, 128, 5), 819_200.0);
    }

    #[test]
    fn receiver_counts_by_hand() {
        let l = 640f64.log2();
        let zf = 960.0 * l + 1280.0 + 409_600.0;
        assert!((count(ComplexityEntry::GfdmZfRx, 128, 5) - zf).abs() < 1e-6);
        let mmse = 960.0 * l + 640f64.powi(3) / 3.0 + 819_200.0 + 1280.0 / 3.0;
        assert!((count(ComplexityEntry::GfdmMmseRx, 128, 5) - mmse).abs() < 1e-3);
        let dsic = 960.0 * l + 1280.0 + 8.0 * 409_600.0;
        assert!((count(ComplexityEntry::GfdmDsicRx, 128, 5) - dsic).abs() < 1e-6);
        let extras = ComplexityExtras {
            dsic_iterations: 1,
            ..ComplexityExtras::default()
        };
        let one = complexity_count(ComplexityEntry::GfdmDsicRx, 128, 5, extras).unwrap().count;
        assert!((one - (960.0 * l + 1280.0 + 819_200.0)).abs() < 1e-6);
    }

    #[test]
    fn terms_sum_to_count() {
        for e in ComplexityEntry::ALL {
            let r = complexity_count(e, 16, 3, ComplexityExtras::default()).unwrap();
            assert!(r.count > 0.0);
            let total: f64 = r.terms.iter().map(|(_, v)| v).sum();
            assert_eq!(total, r.count);
            assert_eq!(e.label().parse::<ComplexityEntry>().unwrap(), e);
        }
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        assert!(complexity_count(ComplexityEntry::GfdmTx, 0, 5, ComplexityExtras::default()).is_err());
        let bad_q = ComplexityExtras {
            spreading_factor: 3,
            ..ComplexityExtras::default()
        };
        assert!(complexity_count(ComplexityEntry::DftTx, 128, 5, bad_q).is_err());
    }

    #[test]
    fn printed_value_tolerance() {
        assert!(matches_printed(409_600.0, "4.09e5").unwrap());
        assert!(matches_printed(504_949.0, "5e5").unwrap());
        assert!(!matches_printed(390_000.0, "5e5").unwrap());
        assert!(!matches_printed(4_129_024.0, "4.1e5").unwrap());
        assert!(matches_printed(1.0, "x").is_err());
    }

    #[test]
    fn wran_tx_column_disagrees_with_its_formula() {
        // The published WRAN transmitter counts are a factor ten below (MN)².
        let gfdm = count(ComplexityEntry::GfdmTx, 16, 127);
        assert_eq!(gfdm, 2032.0 * 2032.0);
        assert!(!matches_printed(gfdm, Scenario::Wran.published_value(ComplexityEntry::GfdmTx).unwrap()).unwrap());
        for (e, printed) in Scenario::Wran.published() {
            if e.side() == Side::Rx && *e != ComplexityEntry::BidftTwoStageNRx {
                assert!(matches_printed(count(*e, 16, 127), printed).unwrap(), "{e}");
            }
        }
    }
}
