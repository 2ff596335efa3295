//! Random sampling on top of a raw 64-bit source.
//!
//! All randomness in the crate is drawn through these helpers from a
//! [`ChaCha8Rng`] so that a seed pins every generated instance and every
//! search run, independent of the `rand` crate's distribution code.

use alloc::vec::Vec;
use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng as Rng;

/// Creates the crate's RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi)`.
#[inline]
pub fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Uniform integer in `0..n` (multiply-shift, `n > 0`).
#[inline]
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// Uniform integer in `lo..=hi`.
#[inline]
pub fn int_inclusive(rng: &mut impl RngCore, lo: i64, hi: i64) -> i64 {
    debug_assert!(hi >= lo);
    lo + below(rng, (hi - lo) as u64 + 1) as i64
}

/// `k` distinct indices from `0..n`, in draw order (partial Fisher-Yates).
pub fn sample_indices(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_in_range_and_seeded() {
        let mut a = rng_from_seed(7);
        let mut b = rng_from_seed(7);
        for _ in 0..1000 {
            let u = unit(&mut a);
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u, unit(&mut b));
        }
    }

    #[test]
    fn sample_indices_are_distinct() {
        let mut rng = rng_from_seed(3);
        let mut s = sample_indices(&mut rng, 20, 8);
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|&i| i < 20));
        assert_eq!(sample_indices(&mut rng, 3, 10).len(), 3);
    }

    #[test]
    fn below_covers_all_values() {
        let mut rng = rng_from_seed(11);
        let mut seen = [0u32; 5];
        for _ in 0..5000 {
            seen[below(&mut rng, 5) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 850 && c < 1150), "{seen:?}");
    }
}
