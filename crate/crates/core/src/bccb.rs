//! Block-circulant (and block-circulant-with-circulant-blocks) algebra.
//!
//! A matrix of `n_blocks × n_blocks` square blocks is block circulant when
//! block `(u, v)` depends only on `(v - u) mod n_blocks`. The block-Fourier
//! matrix `F = F_{n_blocks} ⊗ I_{n_block}` turns any such matrix into a
//! block-diagonal one.

use std::f64::consts::PI;

use crate::error::{GfdmError, Result};
use crate::linalg::{expj, fft_plan, is_singular, CMat, C64};

/// Outcome of a structure predicate: whether it holds within tolerance and
/// the largest deviation found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCheck {
    pub holds: bool,
    pub deviation: f64,
}

fn check_block_size(x: &CMat, block_size: usize) -> Result<usize> {
    let dim = x.nrows();
    if x.ncols() != dim {
        return Err(GfdmError::DimensionMismatch {
            expected: dim,
            found: x.ncols(),
        });
    }
    if block_size == 0 || dim % block_size != 0 {
        return Err(GfdmError::BlockSizeMismatch { block_size, dim });
    }
    Ok(dim / block_size)
}

/// Block `(u, v)` of side `bs`.
fn block(x: &CMat, u: usize, v: usize, bs: usize) -> CMat {
    x.view((u * bs, v * bs), (bs, bs)).into_owned()
}

fn block_circulant_deviation(x: &CMat, bs: usize, nb: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for u in 0..nb {
        for v in 0..nb {
            let k = (v + nb - u) % nb;
            for r in 0..bs {
                for c in 0..bs {
                    let d = (x[(u * bs + r, v * bs + c)] - x[(r, k * bs + c)]).norm();
                    dev = dev.max(d);
                }
            }
        }
    }
    dev
}

fn circulant_deviation(x: &CMat, u: usize, v: usize, bs: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..bs {
        for c in 0..bs {
            let k = (c + bs - r) % bs;
            let d = (x[(u * bs + r, v * bs + c)] - x[(u * bs, v * bs + k)]).norm();
            dev = dev.max(d);
        }
    }
    dev
}

/// Block `(u, v)` equals block `(0, (v - u) mod n_blocks)` for every pair.
pub fn is_block_circulant(x: &CMat, block_size: usize, tol: f64) -> Result<StructureCheck> {
    let nb = check_block_size(x, block_size)?;
    let deviation = block_circulant_deviation(x, block_size, nb);
    Ok(StructureCheck {
        holds: deviation <= tol,
        deviation,
    })
}

/// Block circulant, and every block is itself circulant.
pub fn is_bccb(x: &CMat, block_size: usize, tol: f64) -> Result<StructureCheck> {
    let nb = check_block_size(x, block_size)?;
    let mut deviation = block_circulant_deviation(x, block_size, nb);
    for u in 0..nb {
        for v in 0..nb {
            deviation = deviation.max(circulant_deviation(x, u, v, block_size));
        }
    }
    Ok(StructureCheck {
        holds: deviation <= tol,
        deviation,
    })
}

/// Eigenvalues of a BCCB matrix from the 2-D DFT of its first row, in
/// `(block frequency, intra-block frequency)` order.
pub fn bccb_eigenvalues(x: &CMat, block_size: usize, tol: f64) -> Result<Vec<C64>> {
    let check = is_bccb(x, block_size, tol)?;
    if !check.holds {
        return Err(GfdmError::NotBccb {
            max_deviation: check.deviation,
        });
    }
    let nb = x.nrows() / block_size;
    let mut grid: Vec<C64> = x.row(0).iter().copied().collect();
    let inner = fft_plan(block_size, false);
    for chunk in grid.chunks_mut(block_size) {
        inner.process(chunk);
    }
    let outer = fft_plan(nb, false);
    let mut col = vec![C64::new(0.0, 0.0); nb];
    for j in 0..block_size {
        for (b, v) in col.iter_mut().enumerate() {
            *v = grid[b * block_size + j];
        }
        outer.process(&mut col);
        for (b, v) in col.iter().enumerate() {
            grid[b * block_size + j] = *v;
        }
    }
    Ok(grid)
}

/// Unitary block-Fourier matrix: block `(p, i)` is `w^{pi}/√n_blocks · I`
/// with `w = e^{j2π/n_blocks}`.
#[derive(Debug, Clone)]
pub struct BlockFourier {
    n_block: usize,
    n_blocks: usize,
    matrix: CMat,
}

impl BlockFourier {
    pub fn new(n_block: usize, n_blocks: usize) -> Self {
        let dim = n_block * n_blocks;
        let scale = 1.0 / (n_blocks as f64).sqrt();
        let matrix = CMat::from_fn(dim, dim, |r, c| {
            if r % n_block != c % n_block {
                return C64::new(0.0, 0.0);
            }
            let (p, i) = (r / n_block, c / n_block);
            expj(2.0 * PI * ((p * i) % n_blocks) as f64 / n_blocks as f64) * scale
        });
        Self {
            n_block,
            n_blocks,
            matrix,
        }
    }

    pub fn n_block(&self) -> usize {
        self.n_block
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn dim(&self) -> usize {
        self.n_block * self.n_blocks
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    fn transform(&self, x: &[C64], inverse: bool) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let plan = fft_plan(self.n_blocks, inverse);
        let scale = 1.0 / (self.n_blocks as f64).sqrt();
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        let mut buf = vec![C64::new(0.0, 0.0); self.n_blocks];
        for r in 0..self.n_block {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = x[i * self.n_block + r];
            }
            plan.process(&mut buf);
            for (p, b) in buf.iter().enumerate() {
                out[p * self.n_block + r] = b * scale;
            }
        }
        Ok(out)
    }

    /// `F x` via length-`n_blocks` inverse FFTs.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.transform(x, true)
    }

    /// `F^H x` via length-`n_blocks` forward FFTs.
    pub fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.transform(x, false)
    }
}

/// Block-diagonal matrix stored as its diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<CMat>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        if let Some(first) = blocks.first() {
            let bs = first.nrows();
            for b in &blocks {
                if b.nrows() != bs || b.ncols() != bs {
                    return Err(GfdmError::DimensionMismatch {
                        expected: bs,
                        found: b.ncols().max(b.nrows()),
                    });
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    pub fn dim(&self) -> usize {
        self.block_size() * self.blocks.len()
    }

    pub fn to_dense(&self) -> CMat {
        let bs = self.block_size();
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (i, b) in self.blocks.iter().enumerate() {
            out.view_mut((i * bs, i * bs), (bs, bs)).copy_from(b);
        }
        out
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let bs = self.block_size();
        let mut out = Vec::with_capacity(x.len());
        for (b, chunk) in self.blocks.iter().zip(x.chunks(bs)) {
            for r in 0..bs {
                out.push(
                    (0..bs)
                        .map(|c| b[(r, c)] * chunk[c])
                        .fold(C64::new(0.0, 0.0), |a, v| a + v),
                );
            }
        }
        Ok(out)
    }

    /// Blockwise product `self · other`.
    pub fn mul(&self, other: &BlockDiagonal) -> Result<BlockDiagonal> {
        if self.blocks.len() != other.blocks.len() || self.block_size() != other.block_size() {
            return Err(GfdmError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(BlockDiagonal {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn adjoint(&self) -> BlockDiagonal {
        BlockDiagonal {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }
}

/// Diagonal blocks of `F^H X F` with the share of energy left off the blocks.
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub blocks: BlockDiagonal,
    pub off_block_ratio: f64,
}

/// Dense block diagonalization `F^H X F`. Fails when more than `tol` of the
/// Frobenius energy falls outside the diagonal blocks.
pub fn block_diagonalize(x: &CMat, f: &BlockFourier, tol: f64) -> Result<Diagonalization> {
    if x.nrows() != f.dim() || x.ncols() != f.dim() {
        return Err(GfdmError::DimensionMismatch {
            expected: f.dim(),
            found: x.nrows(),
        });
    }
    let bs = f.n_block();
    let d = f.matrix().adjoint() * x * f.matrix();
    let mut total = 0.0;
    let mut on_block = 0.0;
    for c in 0..d.ncols() {
        for r in 0..d.nrows() {
            let e = d[(r, c)].norm_sqr();
            total += e;
            if r / bs == c / bs {
                on_block += e;
            }
        }
    }
    let off_block_ratio = if total > 0.0 { (total - on_block).max(0.0) / total } else { 0.0 };
    if off_block_ratio > tol {
        return Err(GfdmError::OffBlockEnergy {
            ratio: off_block_ratio,
        });
    }
    let blocks = (0..f.n_blocks()).map(|i| block(&d, i, i, bs)).collect();
    Ok(Diagonalization {
        blocks: BlockDiagonal { blocks },
        off_block_ratio,
    })
}

/// Block diagonalization of a block-circulant matrix from its first block
/// row alone: `D_i = Σ_k w^{ki} C_k`, one length-`n_blocks` FFT per entry.
pub fn block_diagonalize_fast(x: &CMat, block_size: usize) -> Result<BlockDiagonal> {
    let nb = check_block_size(x, block_size)?;
    let plan = fft_plan(nb, true);
    let mut blocks = vec![CMat::zeros(block_size, block_size); nb];
    let mut buf = vec![C64::new(0.0, 0.0); nb];
    for r in 0..block_size {
        for c in 0..block_size {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = x[(r, k * block_size + c)];
            }
            plan.process(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                blocks[i][(r, c)] = *b;
            }
        }
    }
    Ok(BlockDiagonal { blocks })
}

/// Blockwise inverse; names the first singular block.
pub fn invert_block_diagonal(d: &BlockDiagonal) -> Result<BlockDiagonal> {
    let blocks = d
        .blocks
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let (singular, smallest, largest) = is_singular(b);
            let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
            if singular {
                return Err(GfdmError::SingularBlock { index, ratio });
            }
            b.clone()
                .try_inverse()
                .ok_or(GfdmError::SingularBlock { index, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockDiagonal { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GfdmConfig;
    use crate::linalg::{c, hermitian_eigen, max_abs_diff, max_abs_diff_vec, unitarity_error};
    use crate::modulator::{build_modulation_matrix, Ordering};
    use crate::pulse::make_rrc_pulse;

    fn gram(n: usize, m: usize, rolloff: f64, ord: Ordering) -> CMat {
        let g = make_rrc_pulse(&GfdmConfig::new(n, m).with_rolloff(rolloff)).unwrap();
        build_modulation_matrix(&g, ord).gram()
    }

    fn lcg_matrix(dim: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_fn(dim, dim, |_, _| c(next(), next()))
    }

    #[test]
    fn identity_is_bccb() {
        let id = CMat::identity(12, 12);
        for bs in [1, 2, 3, 4, 6, 12] {
            let chk = is_bccb(&id, bs, 0.0).unwrap();
            assert!(chk.holds);
            assert_eq!(chk.deviation, 0.0);
        }
        assert!(matches!(
            is_bccb(&id, 5, 0.0),
            Err(GfdmError::BlockSizeMismatch { .. })
        ));
    }

    #[test]
    fn gram_matrices_are_bccb() {
        let an = gram(4, 5, 0.5, Ordering::NOrdered);
        assert!(is_block_circulant(&an, 4, 1e-10).unwrap().holds);
        assert!(is_bccb(&an, 4, 1e-10).unwrap().holds);
        let am = gram(4, 5, 0.5, Ordering::MOrdered);
        assert!(is_bccb(&am, 5, 1e-10).unwrap().holds);
    }

    #[test]
    fn random_matrix_is_not_block_circulant() {
        let x = lcg_matrix(12, 9);
        let chk = is_block_circulant(&x, 4, 1e-10).unwrap();
        assert!(!chk.holds);
        assert!(chk.deviation > 0.1);
    }

    #[test]
    fn fast_eigenvalues_match_dense() {
        let id = CMat::identity(6, 6);
        for e in bccb_eigenvalues(&id, 3, 1e-12).unwrap() {
            assert!((e - c(1.0, 0.0)).norm() < 1e-12);
        }
        let x = gram(8, 3, 0.5, Ordering::NOrdered);
        let mut fast: Vec<f64> = bccb_eigenvalues(&x, 8, 1e-10)
            .unwrap()
            .iter()
            .map(|e| {
                assert!(e.im.abs() < 1e-10);
                e.re
            })
            .collect();
        let (mut dense, _) = hermitian_eigen(&x);
        fast.sort_by(f64::total_cmp);
        dense.sort_by(f64::total_cmp);
        let diff = fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff}");
    }

    #[test]
    fn eigenvalues_reject_unstructured_input() {
        assert!(matches!(
            bccb_eigenvalues(&lcg_matrix(6, 1), 3, 1e-10),
            Err(GfdmError::NotBccb { .. })
        ));
    }

    #[test]
    fn block_fourier_is_unitary_and_fast_path_agrees() {
        for (bs, nb) in [(2, 2), (4, 5), (5, 4), (8, 3), (1, 6), (6, 1)] {
            let f = BlockFourier::new(bs, nb);
            assert!(unitarity_error(f.matrix()) < 1e-10);
            let x: Vec<C64> = lcg_matrix(bs * nb, 4).column(0).iter().copied().collect();
            let dense = crate::linalg::matvec(f.matrix(), &x);
            assert!(max_abs_diff_vec(&dense, &f.apply(&x).unwrap()) < 1e-10);
            let dense_h = crate::linalg::adjoint_matvec(f.matrix(), &x);
            assert!(max_abs_diff_vec(&dense_h, &f.apply_adjoint(&x).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn two_by_two_block_fourier_entries() {
        let f = BlockFourier::new(2, 2);
        let s = 1.0 / 2f64.sqrt();
        let expect = [[s, 0.0, s, 0.0], [0.0, s, 0.0, s], [s, 0.0, -s, 0.0], [0.0, s, 0.0, -s]];
        for (r, row) in expect.iter().enumerate() {
            for (col, v) in row.iter().enumerate() {
                assert!((f.matrix()[(r, col)] - c(*v, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn diagonalization_of_identity_and_reconstruction() {
        let f = BlockFourier::new(4, 3);
        let d = block_diagonalize(&CMat::identity(12, 12), &f, 1e-12).unwrap();
        for b in d.blocks.blocks() {
            assert!(max_abs_diff(b, &CMat::identity(4, 4)) < 1e-12);
        }
        let x = gram(4, 5, 0.5, Ordering::NOrdered);
        let f = BlockFourier::new(4, 5);
        let d = block_diagonalize(&x, &f, 1e-9).unwrap();
        assert!(d.off_block_ratio <= 1e-9);
        let rebuilt = f.matrix() * d.blocks.to_dense() * f.matrix().adjoint();
        assert!(max_abs_diff(&rebuilt, &x) < 1e-9);
        let fast = block_diagonalize_fast(&x, 4).unwrap();
        for (a, b) in fast.blocks().iter().zip(d.blocks.blocks()) {
            assert!(max_abs_diff(a, b) < 1e-10);
        }
    }

    #[test]
    fn diagonalization_flags_unstructured_input() {
        let f = BlockFourier::new(4, 3);
        assert!(matches!(
            block_diagonalize(&lcg_matrix(12, 3), &f, 1e-9),
            Err(GfdmError::OffBlockEnergy { .. })
        ));
    }

    #[test]
    fn block_inverse_examples() {
        let id = BlockDiagonal::new(vec![CMat::identity(3, 3); 2]).unwrap();
        assert_eq!(invert_block_diagonal(&id).unwrap(), id);
        let d = BlockDiagonal::new(vec![CMat::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)],
        )])
        .unwrap();
        let inv = invert_block_diagonal(&d).unwrap();
        let expect = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)]);
        assert!(max_abs_diff(&inv.blocks()[0], &expect) < 1e-15);

        let blocks: Vec<CMat> = (0..4)
            .map(|i| lcg_matrix(5, i) + CMat::identity(5, 5) * c(3.0, 0.0))
            .collect();
        let d = BlockDiagonal::new(blocks).unwrap();
        let prod = d.mul(&invert_block_diagonal(&d).unwrap()).unwrap();
        for b in prod.blocks() {
            assert!(max_abs_diff(b, &CMat::identity(5, 5)) < 1e-10);
        }
    }

    #[test]
    fn singular_block_is_named() {
        let good = CMat::identity(2, 2);
        let bad = CMat::from_element(2, 2, c(1.0, 0.0));
        let d = BlockDiagonal::new(vec![good.clone(), good, bad]).unwrap();
        assert!(matches!(
            invert_block_diagonal(&d),
            Err(GfdmError::SingularBlock { index: 2, .. })
        ));
    }
}
