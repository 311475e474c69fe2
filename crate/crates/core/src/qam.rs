//! Gray-mapped square QAM.

use rand::Rng;

use crate::error::{GfdmError, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    side: usize,
    scale: f64,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl Constellation {
    /// Square QAM of the given order scaled to average power `symbol_power`.
    pub fn new(order: usize, symbol_power: f64) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() || order.trailing_zeros() % 2 != 0 {
            return Err(GfdmError::UnsupportedModulation(order));
        }
        let side = 1usize << (order.trailing_zeros() / 2);
        // Mean energy of the unscaled grid {±1, ±3, ...}² is 2(M-1)/3.
        let scale = (3.0 * symbol_power / (2.0 * (order as f64 - 1.0))).sqrt();
        Ok(Self { order, side, scale })
    }

    pub fn qpsk() -> Self {
        Self::new(4, 1.0).expect("QPSK is square")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    fn level(&self, i: usize) -> f64 {
        (2.0 * i as f64 - (self.side as f64 - 1.0)) * self.scale
    }

    /// Symbol for index `idx`; the low half of the bits selects the in-phase level.
    pub fn point(&self, idx: usize) -> C64 {
        C64::new(self.level(idx % self.side), self.level(idx / self.side))
    }

    fn axis_index(&self, v: f64) -> usize {
        let u = (v / self.scale + (self.side as f64 - 1.0)) / 2.0;
        u.round().clamp(0.0, (self.side - 1) as f64) as usize
    }

    /// Nearest constellation index.
    pub fn slice(&self, y: C64) -> usize {
        self.axis_index(y.re) + self.side * self.axis_index(y.im)
    }

    pub fn decide(&self, y: C64) -> C64 {
        self.point(self.slice(y))
    }

    /// Bit errors between two symbol indices under Gray labelling.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        let re = gray(a % self.side) ^ gray(b % self.side);
        let im = gray(a / self.side) ^ gray(b / self.side);
        (re.count_ones() + im.count_ones()) as u32
    }

    /// Uniform random symbol indices and the matching symbols.
    pub fn random_symbols<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> (Vec<usize>, Vec<C64>) {
        let idx: Vec<usize> = (0..count).map(|_| rng.random_range(0..self.order)).collect();
        let sym = idx.iter().map(|&i| self.point(i)).collect();
        (idx, sym)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_average_power() {
        for order in [4, 16, 64] {
            let c = Constellation::new(order, 1.0).unwrap();
            let p: f64 = (0..order).map(|i| c.point(i).norm_sqr()).sum::<f64>() / order as f64;
            assert!((p - 1.0).abs() < 1e-12, "order {order}: {p}");
        }
    }

    #[test]
    fn slicing_inverts_mapping() {
        for order in [4, 16, 64] {
            let c = Constellation::new(order, 2.0).unwrap();
            for i in 0..order {
                assert_eq!(c.slice(c.point(i)), i);
            }
        }
    }

    #[test]
    fn neighbours_differ_by_one_bit() {
        let c = Constellation::new(16, 1.0).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let d = (c.point(i) - c.point(j)).norm();
                if (d - 2.0 * c.scale).abs() < 1e-9 {
                    assert_eq!(c.bit_errors(i, j), 1);
                }
            }
        }
    }

    #[test]
    fn rejects_non_square_orders() {
        assert!(Constellation::new(8, 1.0).is_err());
        assert!(Constellation::new(2, 1.0).is_err());
        assert!(Constellation::new(12, 1.0).is_err());
    }
}
