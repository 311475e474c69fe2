use crate::error::{GfdmError, Result};

/// Scalar parameters of one GFDM block.
#[derive(Debug, Clone, PartialEq)]
pub struct GfdmConfig {
    /// Number of subcarriers `N`.
    pub n_subcarriers: usize,
    /// Number of time slots `M`.
    pub n_timeslots: usize,
    /// Cyclic prefix length in samples.
    pub cp_length: usize,
    /// Roll-off of the root-raised-cosine prototype, in `[0, 1]`.
    pub rolloff: f64,
    /// Square QAM order (4, 16 or 64).
    pub mod_order: usize,
    /// DFT spreading factor `Q`; the DFT size is `N / Q`.
    pub spreading_factor: usize,
    /// Average data symbol power.
    pub symbol_power: f64,
}

impl Default for GfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 128,
            n_timeslots: 5,
            cp_length: 16,
            rolloff: 0.5,
            mod_order: 16,
            spreading_factor: 4,
            symbol_power: 1.0,
        }
    }
}

impl GfdmConfig {
    /// Configuration with `N` subcarriers and `M` time slots, no CP,
    /// ROF 0.5, QPSK and no spreading.
    pub fn new(n_subcarriers: usize, n_timeslots: usize) -> Self {
        Self {
            n_subcarriers,
            n_timeslots,
            cp_length: 0,
            rolloff: 0.5,
            mod_order: 4,
            spreading_factor: 1,
            symbol_power: 1.0,
        }
    }

    pub fn with_rolloff(mut self, rolloff: f64) -> Self {
        self.rolloff = rolloff;
        self
    }

    pub fn with_cp(mut self, cp_length: usize) -> Self {
        self.cp_length = cp_length;
        self
    }

    pub fn with_mod_order(mut self, mod_order: usize) -> Self {
        self.mod_order = mod_order;
        self
    }

    pub fn with_spreading(mut self, spreading_factor: usize) -> Self {
        self.spreading_factor = spreading_factor;
        self
    }

    /// Samples (and symbols) per block, `MN`.
    pub fn block_len(&self) -> usize {
        self.n_subcarriers * self.n_timeslots
    }

    /// DFT precoder size `N / Q`.
    pub fn n_dft(&self) -> usize {
        self.n_subcarriers / self.spreading_factor.max(1)
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.mod_order.trailing_zeros()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GfdmError::InvalidConfig(msg));
        if self.n_subcarriers == 0 || self.n_timeslots == 0 {
            return bad("N and M must be positive".into());
        }
        if self.cp_length > self.block_len() {
            return bad(format!(
                "cp_length {} exceeds block length {}",
                self.cp_length,
                self.block_len()
            ));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(GfdmError::RolloffOutOfRange(self.rolloff));
        }
        if ![4, 16, 64].contains(&self.mod_order) {
            return Err(GfdmError::UnsupportedModulation(self.mod_order));
        }
        if self.spreading_factor == 0 || self.n_subcarriers % self.spreading_factor != 0 {
            return bad(format!(
                "spreading factor {} must divide N = {}",
                self.spreading_factor, self.n_subcarriers
            ));
        }
        if !(self.symbol_power > 0.0 && self.symbol_power.is_finite()) {
            return bad(format!("symbol power {} must be positive", self.symbol_power));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        GfdmConfig::default().validate().unwrap();
        GfdmConfig::new(1, 1).validate().unwrap();
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GfdmConfig::new(4, 5).with_spreading(3).validate().is_err());
        assert!(GfdmConfig::new(4, 5).with_mod_order(8).validate().is_err());
        assert!(GfdmConfig::new(4, 5).with_cp(21).validate().is_err());
        assert!(matches!(
            GfdmConfig::new(4, 5).with_rolloff(1.5).validate(),
            Err(GfdmError::RolloffOutOfRange(_))
        ));
        assert!(GfdmConfig::new(0, 5).validate().is_err());
    }

    #[test]
    fn derived_sizes() {
        let cfg = GfdmConfig::default();
        assert_eq!(cfg.block_len(), 640);
        assert_eq!(cfg.n_dft(), 32);
        assert_eq!(cfg.bits_per_symbol(), 4);
    }
}
