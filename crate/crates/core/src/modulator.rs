//! GFDM kernels, the modulation matrix in both column orderings, and a
//! fast modulator/matched filter that never materializes the matrix.

use std::f64::consts::PI;

use crate::error::{GfdmError, Result};
use crate::linalg::{expj, fft_plan, matvec, CMat, C64};
use crate::pulse::PulseShape;

/// Column ordering of the modulation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    /// Column `l = mN + k`: kernels grouped by time slot.
    NOrdered,
    /// Column `l = kM + m`: kernels grouped by subcarrier.
    MOrdered,
}

impl Ordering {
    pub fn column(self, k: usize, m: usize, n_sub: usize, n_slots: usize) -> usize {
        match self {
            Ordering::NOrdered => m * n_sub + k,
            Ordering::MOrdered => k * n_slots + m,
        }
    }

    /// `(k, m)` for column `l`.
    pub fn indices(self, l: usize, n_sub: usize, n_slots: usize) -> (usize, usize) {
        match self {
            Ordering::NOrdered => (l % n_sub, l / n_sub),
            Ordering::MOrdered => (l / n_slots, l % n_slots),
        }
    }

    /// Side of the BCCB blocks of `A^H A` for this ordering.
    pub fn block_size(self, n_sub: usize, n_slots: usize) -> usize {
        match self {
            Ordering::NOrdered => n_sub,
            Ordering::MOrdered => n_slots,
        }
    }
}

/// `a_{k,m}(n) = g((n - mN) mod MN) · e^{j2πkn/N}`.
pub fn kernel(g: &PulseShape, k: usize, m: usize) -> Result<Vec<C64>> {
    let (n_sub, n_slots) = (g.n_subcarriers(), g.n_timeslots());
    if k >= n_sub {
        return Err(GfdmError::IndexOutOfRange {
            what: "subcarrier",
            index: k,
            bound: n_sub,
        });
    }
    if m >= n_slots {
        return Err(GfdmError::IndexOutOfRange {
            what: "time slot",
            index: m,
            bound: n_slots,
        });
    }
    Ok(kernel_unchecked(g, k, m))
}

fn kernel_unchecked(g: &PulseShape, k: usize, m: usize) -> Vec<C64> {
    let n_sub = g.n_subcarriers();
    let shift = (m * n_sub) as isize;
    (0..g.len())
        .map(|n| {
            let phase = 2.0 * PI * ((k * n) % n_sub) as f64 / n_sub as f64;
            expj(phase) * g.at(n as isize - shift)
        })
        .collect()
}

/// The `MN × MN` modulation matrix whose columns are the GFDM kernels.
#[derive(Debug, Clone)]
pub struct ModulationMatrix {
    entries: CMat,
    ordering: Ordering,
    pulse: PulseShape,
}

pub fn build_modulation_matrix(g: &PulseShape, ordering: Ordering) -> ModulationMatrix {
    let (n_sub, n_slots) = (g.n_subcarriers(), g.n_timeslots());
    let len = g.len();
    let mut entries = CMat::zeros(len, len);
    for m in 0..n_slots {
        for k in 0..n_sub {
            let col = ordering.column(k, m, n_sub, n_slots);
            let a = kernel_unchecked(g, k, m);
            entries.column_mut(col).copy_from_slice(&a);
        }
    }
    ModulationMatrix {
        entries,
        ordering,
        pulse: g.clone(),
    }
}

impl ModulationMatrix {
    /// Wraps an arbitrary matrix; used to inject corrupted inputs in validation.
    pub fn from_parts(entries: CMat, ordering: Ordering, pulse: PulseShape) -> Result<Self> {
        let len = pulse.len();
        if entries.nrows() != len || entries.ncols() != len {
            return Err(GfdmError::DimensionMismatch {
                expected: len,
                found: entries.nrows(),
            });
        }
        Ok(Self {
            entries,
            ordering,
            pulse,
        })
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.pulse.n_subcarriers()
    }

    pub fn n_timeslots(&self) -> usize {
        self.pulse.n_timeslots()
    }

    /// Side of the BCCB blocks of `A^H A`.
    pub fn block_size(&self) -> usize {
        self.ordering.block_size(self.n_subcarriers(), self.n_timeslots())
    }

    pub fn column_index(&self, k: usize, m: usize) -> usize {
        self.ordering
            .column(k, m, self.n_subcarriers(), self.n_timeslots())
    }

    pub fn gram(&self) -> CMat {
        self.entries.adjoint() * &self.entries
    }
}

/// Column permutation `π` with `π(mN + k) = kM + m`: column `l` of `A_N` is
/// column `π(l)` of `A_M`.
pub fn reorder_map(n_sub: usize, n_slots: usize) -> Vec<usize> {
    (0..n_sub * n_slots)
        .map(|l| {
            let (k, m) = (l % n_sub, l / n_sub);
            k * n_slots + m
        })
        .collect()
}

/// `x = A · d̃`.
pub fn modulate(a: &ModulationMatrix, data: &[C64]) -> Result<Vec<C64>> {
    if data.len() != a.dim() {
        return Err(GfdmError::DimensionMismatch {
            expected: a.dim(),
            found: data.len(),
        });
    }
    Ok(matvec(a.entries(), data))
}

/// FFT-based GFDM modulator and matched filter. Costs `O(M·MN + M·N log N)`
/// per block instead of `(MN)²`.
#[derive(Debug, Clone)]
pub struct GfdmModem {
    pulse: PulseShape,
}

impl GfdmModem {
    pub fn new(pulse: &PulseShape) -> Self {
        Self {
            pulse: pulse.clone(),
        }
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn block_len(&self) -> usize {
        self.pulse.len()
    }

    fn check_len(&self, v: &[C64]) -> Result<()> {
        if v.len() != self.block_len() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.block_len(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `A d̃` with `d̃` laid out according to `ordering`.
    pub fn modulate(&self, data: &[C64], ordering: Ordering) -> Result<Vec<C64>> {
        self.check_len(data)?;
        let (n_sub, n_slots) = (self.pulse.n_subcarriers(), self.pulse.n_timeslots());
        let len = self.block_len();
        let ifft = fft_plan(n_sub, true);
        let taps = self.pulse.taps();
        let mut out = vec![C64::new(0.0, 0.0); len];
        let mut buf = vec![C64::new(0.0, 0.0); n_sub];
        for m in 0..n_slots {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = data[ordering.column(k, m, n_sub, n_slots)];
            }
            ifft.process(&mut buf);
            let shift = m * n_sub;
            for (n, o) in out.iter_mut().enumerate() {
                let g = taps[(n + len - shift) % len];
                *o += buf[n % n_sub] * g;
            }
        }
        Ok(out)
    }

    /// Matched filter `A^H y`, output laid out according to `ordering`.
    pub fn matched_filter(&self, y: &[C64], ordering: Ordering) -> Result<Vec<C64>> {
        self.check_len(y)?;
        let (n_sub, n_slots) = (self.pulse.n_subcarriers(), self.pulse.n_timeslots());
        let len = self.block_len();
        let fft = fft_plan(n_sub, false);
        let taps = self.pulse.taps();
        let mut out = vec![C64::new(0.0, 0.0); len];
        let mut buf = vec![C64::new(0.0, 0.0); n_sub];
        for m in 0..n_slots {
            buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
            let shift = m * n_sub;
            for (n, yn) in y.iter().enumerate() {
                buf[n % n_sub] += yn * taps[(n + len - shift) % len];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                out[ordering.column(k, m, n_sub, n_slots)] = *b;
            }
        }
        Ok(out)
    }
}
