//! Cyclic-prefix framing.

use crate::error::{GfdmError, Result};
use crate::linalg::C64;

/// One modulated block with and without its cyclic prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub payload: Vec<C64>,
    pub with_cp: Vec<C64>,
}

impl Frame {
    pub fn cp_length(&self) -> usize {
        self.with_cp.len() - self.payload.len()
    }
}

/// Prepends the last `cp_length` samples of `x`.
pub fn add_cp(x: &[C64], cp_length: usize) -> Result<Frame> {
    if cp_length > x.len() {
        return Err(GfdmError::LengthViolation(format!(
            "cyclic prefix {cp_length} longer than block {}",
            x.len()
        )));
    }
    let mut with_cp = Vec::with_capacity(x.len() + cp_length);
    with_cp.extend_from_slice(&x[x.len() - cp_length..]);
    with_cp.extend_from_slice(x);
    Ok(Frame {
        payload: x.to_vec(),
        with_cp,
    })
}

/// Drops the first `cp_length` and the last `channel_len - 1` samples of a
/// received block.
pub fn remove_cp(y_cp: &[C64], cp_length: usize, channel_len: usize) -> Result<Vec<C64>> {
    let tail = channel_len.saturating_sub(1);
    if channel_len == 0 || y_cp.len() <= cp_length + tail {
        return Err(GfdmError::LengthViolation(format!(
            "received {} samples, need more than cp {cp_length} + tail {tail}",
            y_cp.len()
        )));
    }
    Ok(y_cp[cp_length..y_cp.len() - tail].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn cp_by_hand() {
        let x = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let f = add_cp(&x, 2).unwrap();
        assert_eq!(f.with_cp, vec![x[2], x[3], x[0], x[1], x[2], x[3]]);
        assert_eq!(f.cp_length(), 2);
        assert_eq!(add_cp(&x, 0).unwrap().with_cp, x.to_vec());
        assert!(add_cp(&x, 5).is_err());
    }

    #[test]
    fn identity_channel_round_trip() {
        let x: Vec<C64> = (0..8).map(|i| c(i as f64, -(i as f64))).collect();
        let f = add_cp(&x, 3).unwrap();
        // A length-3 channel [1, 0, 0] appends two zero samples.
        let mut y = f.with_cp.clone();
        y.extend([c(0.0, 0.0); 2]);
        assert_eq!(remove_cp(&y, 3, 3).unwrap(), x);
    }

    #[test]
    fn rejects_short_input() {
        assert!(remove_cp(&[c(0.0, 0.0); 3], 3, 1).is_err());
        assert!(remove_cp(&[c(0.0, 0.0); 3], 0, 0).is_err());
    }
}
