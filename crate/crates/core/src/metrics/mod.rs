//! Experiment harnesses: Monte-Carlo BER, PAPR CCDF, frequency spread and
//! complex-multiplication counts.

use std::fmt;
use std::str::FromStr;

use crate::error::{GfdmError, Result};
use crate::modulator::Ordering;
use crate::precoders::PrecoderKind;

pub mod ber;
pub mod complexity;
pub mod papr;
pub mod spread;

pub use ber::{run_ber, BerCurve, BerSettings, ChannelModel};
pub use complexity::{complexity_count, ComplexityEntry, ComplexityExtras, ComplexityReport, Scenario};
pub use papr::{papr_ccdf, papr_db, PaprCcdf, PaprSettings};
pub use spread::{frequency_spread, occupancy};

/// A transmit/receive chain as named in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    GfdmMf,
    GfdmZf,
    GfdmMmse,
    GfdmDsic,
    /// BIDFT-N precoding with joint processing.
    BidftJp,
    /// BIDFT-N precoding with two-stage processing.
    BidftN,
    /// BIDFT-M precoding with two-stage processing.
    BidftM,
    LfdmaZf,
    IfdmaZf,
    SvdPrec,
    /// CP-OFDM with one-tap FDE on the same block length.
    Ofdm,
}

impl Scheme {
    pub const ALL: [Scheme; 11] = [
        Scheme::GfdmMf,
        Scheme::GfdmZf,
        Scheme::GfdmMmse,
        Scheme::GfdmDsic,
        Scheme::BidftJp,
        Scheme::BidftN,
        Scheme::BidftM,
        Scheme::LfdmaZf,
        Scheme::IfdmaZf,
        Scheme::SvdPrec,
        Scheme::Ofdm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::GfdmMf => "GFDM-MF",
            Scheme::GfdmZf => "GFDM-ZF",
            Scheme::GfdmMmse => "GFDM-MMSE",
            Scheme::GfdmDsic => "GFDM-DSIC",
            Scheme::BidftJp => "BIDFT-JP",
            Scheme::BidftN => "BIDFTN",
            Scheme::BidftM => "BIDFTM",
            Scheme::LfdmaZf => "LFDMA-ZF",
            Scheme::IfdmaZf => "IFDMA-ZF",
            Scheme::SvdPrec => "SVD-Prec",
            Scheme::Ofdm => "OFDM",
        }
    }

    /// Precoder applied before GFDM modulation; `None` for OFDM.
    pub fn precoder(self) -> Option<PrecoderKind> {
        match self {
            Scheme::GfdmMf | Scheme::GfdmZf | Scheme::GfdmMmse | Scheme::GfdmDsic => Some(PrecoderKind::Identity),
            Scheme::BidftJp | Scheme::BidftN => Some(PrecoderKind::BidftN),
            Scheme::BidftM => Some(PrecoderKind::BidftM),
            Scheme::LfdmaZf => Some(PrecoderKind::DftLfdma),
            Scheme::IfdmaZf => Some(PrecoderKind::DftIfdma),
            Scheme::SvdPrec => Some(PrecoderKind::Svd),
            Scheme::Ofdm => None,
        }
    }

    pub fn ordering(self) -> Ordering {
        self.precoder().map_or(Ordering::NOrdered, PrecoderKind::ordering)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = GfdmError;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Scheme::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(key))
            .ok_or_else(|| GfdmError::UnknownScheme(s.to_string()))
    }
}

/// Parses a comma-separated scheme list; empty items are skipped.
pub fn parse_scheme_list(s: &str) -> Result<Vec<Scheme>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}
