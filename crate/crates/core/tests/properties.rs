//! Structural invariants of the modulation, channel and receiver algebra.

use gfdm::bccb::{invert_block_diagonal, block_diagonalize_fast, is_bccb, is_block_circulant, BlockDiagonal};
use gfdm::channel::{sample_channel, trial_rng, PowerDelayProfile};
use gfdm::linalg::{max_abs_diff, CMat, C64};
use gfdm::modulator::{modulate, reorder_map};
use gfdm::receivers::{effective_channel, mmse_sinr_dense};
use gfdm::stats::binomial_stderr;
use gfdm::{build_modulation_matrix, make_rrc_pulse, GfdmConfig, GfdmModem, Ordering};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    // Odd M keeps the RRC modulation matrix invertible.
    (prop::sample::select(vec![2usize, 4, 6, 8]), prop::sample::select(vec![1usize, 3, 5]))
}

/// BCCB matrix whose block `(u, v)` row `i` column `j` is
/// `t[(v - u) mod nb][(j - i) mod bs]`.
fn bccb_from(t: &[Vec<C64>], bs: usize) -> CMat {
    let nb = t.len();
    CMat::from_fn(nb * bs, nb * bs, |r, c| {
        let (u, i, v, j) = (r / bs, r % bs, c / bs, c % bs);
        t[(v + nb - u) % nb][(j + bs - i) % bs]
    })
}

fn bccb_strategy() -> impl Strategy<Value = (CMat, usize)> {
    (2usize..5, 2usize..5).prop_flat_map(|(nb, bs)| {
        prop::collection::vec(prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), bs), nb).prop_map(move |t| {
            let t: Vec<Vec<C64>> = t.into_iter().map(|row| row.into_iter().map(|(a, b)| C64::new(a, b)).collect()).collect();
            (bccb_from(&t, bs), bs)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn reorder_map_permutes_columns_between_orderings((n, m) in dims(), rof in 0.05f64..0.95) {
        let pulse = make_rrc_pulse(&GfdmConfig::new(n, m).with_rolloff(rof)).unwrap();
        let a_n = build_modulation_matrix(&pulse, Ordering::NOrdered);
        let a_m = build_modulation_matrix(&pulse, Ordering::MOrdered);
        let map = reorder_map(n, m);
        let mut seen = map.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n * m).collect::<Vec<_>>());
        for (l, &p) in map.iter().enumerate() {
            prop_assert!(a_n.entries().column(l) == a_m.entries().column(p));
        }
    }

    #[test]
    fn fast_modulator_matches_dense_product((n, m) in dims(), rof in 0.05f64..0.95, seed in any::<u64>()) {
        let pulse = make_rrc_pulse(&GfdmConfig::new(n, m).with_rolloff(rof)).unwrap();
        let modem = GfdmModem::new(&pulse);
        let mut rng = trial_rng(seed, 0);
        let data: Vec<C64> = (0..n * m).map(|_| gfdm::channel::complex_gaussian(&mut rng, 1.0)).collect();
        for ordering in [Ordering::NOrdered, Ordering::MOrdered] {
            let dense = modulate(&build_modulation_matrix(&pulse, ordering), &data).unwrap();
            let fast = modem.modulate(&data, ordering).unwrap();
            let gap = dense.iter().zip(&fast).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(gap < 1e-12, "gap {gap:e}");
        }
    }

    #[test]
    fn bccb_closed_under_products((x, bs) in bccb_strategy(), seed in any::<u64>()) {
        let nb = x.nrows() / bs;
        let mut rng = trial_rng(seed, 1);
        let t: Vec<Vec<C64>> = (0..nb).map(|_| (0..bs).map(|_| gfdm::channel::complex_gaussian(&mut rng, 1.0)).collect()).collect();
        let y = bccb_from(&t, bs);
        prop_assert!(is_bccb(&x, bs, 1e-10).unwrap().holds);
        prop_assert!(is_bccb(&(&x * &y), bs, 1e-10).unwrap().holds);
        prop_assert!(is_bccb(&x.adjoint(), bs, 1e-10).unwrap().holds);
    }

    #[test]
    fn bccb_inverse_is_bccb((x, bs) in bccb_strategy()) {
        // Diagonal loading keeps the draw well conditioned.
        let dim = x.nrows();
        let loaded = &x * x.adjoint() + CMat::identity(dim, dim);
        let inv = loaded.clone().try_inverse().unwrap();
        prop_assert!(is_bccb(&inv, bs, 1e-10).unwrap().holds);
        let d = block_diagonalize_fast(&loaded, bs).unwrap();
        let d_inv: BlockDiagonal = invert_block_diagonal(&d).unwrap();
        let back = block_diagonalize_fast(&inv, bs).unwrap();
        prop_assert!(max_abs_diff(&d_inv.to_dense(), &back.to_dense()) < 1e-10);
    }

    #[test]
    fn fading_gram_stays_block_circulant((n, m) in dims(), taps in 1usize..6, seed in any::<u64>()) {
        prop_assume!(taps <= n * m);
        let pulse = make_rrc_pulse(&GfdmConfig::new(n, m)).unwrap();
        let a = build_modulation_matrix(&pulse, Ordering::NOrdered);
        let ch = sample_channel(&PowerDelayProfile::exponential(taps).unwrap(), a.dim(), &mut trial_rng(seed, 2)).unwrap();
        let ha = effective_channel(&ch, &a).unwrap();
        prop_assert!(is_block_circulant(&(ha.adjoint() * &ha), n, 1e-10).unwrap().holds);
    }

    #[test]
    fn stderr_halves_with_four_times_the_trials(p in 0.0f64..1.0, trials in 1u64..1_000_000) {
        let a = binomial_stderr(p, trials);
        let b = binomial_stderr(p, 4 * trials);
        prop_assert!((a - 2.0 * b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn mmse_sinr_dominates_zero_forcing((n, m) in dims(), noise_db in -10.0f64..20.0, seed in any::<u64>()) {
        let pulse = make_rrc_pulse(&GfdmConfig::new(n, m)).unwrap();
        let a = build_modulation_matrix(&pulse, Ordering::NOrdered);
        prop_assume!(n * m >= 3);
        let ch = sample_channel(&PowerDelayProfile::exponential(3).unwrap(), a.dim(), &mut trial_rng(seed, 3)).unwrap();
        let ha = effective_channel(&ch, &a).unwrap();
        let nv = 10f64.powf(noise_db / 10.0);
        let mmse = mmse_sinr_dense(&ha, nv, 1.0).unwrap();
        let gram_inv = (ha.adjoint() * &ha).try_inverse().unwrap();
        for (l, &g) in mmse.per_symbol.iter().enumerate() {
            let zf = 1.0 / (nv * gram_inv[(l, l)].re);
            prop_assert!(g >= zf * (1.0 - 1e-9), "symbol {l}: mmse {g} < zf {zf}");
        }
    }
}
