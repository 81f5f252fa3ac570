//! Small helpers over [`rand_core::RngCore`] so the core stays independent of
//! any particular generator. Protocol code takes `&mut impl RngCore` and the
//! caller picks the stream (the CLI uses ChaCha8 seeded from `--seed`).

use alloc::vec::Vec;
use rand_core::RngCore;

/// Uniform f64 in [0, 1) with 53 bits of precision.
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform usize in [0, n). Rejection-sampled, no modulo bias.
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// One uniform bit.
pub fn bit<R: RngCore + ?Sized>(rng: &mut R) -> u8 {
    (rng.next_u64() & 1) as u8
}

/// `n` uniform bits.
pub fn bits<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| bit(rng)).collect()
}

/// `k` distinct indices drawn from `0..n`, returned sorted.
///
/// Partial Fisher-Yates over an index vector.
pub fn choose_indices<R: RngCore + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, n - i);
        pool.swap(i, j);
    }
    let mut chosen = pool[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn unit_f64_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn choose_indices_distinct_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let c = choose_indices(&mut rng, 20, 7);
            assert_eq!(c.len(), 7);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
            assert!(c.iter().all(|&i| i < 20));
        }
    }
}
