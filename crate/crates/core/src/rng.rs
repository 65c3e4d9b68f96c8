//! Counter-based deterministic pseudo-random draws.
//!
//! Every draw is a pure function of `(seed, counter)`, so results are
//! bitwise reproducible no matter how work is split across threads or
//! chunks. Streams are carved out of the counter space by the caller
//! (one stream per Monte Carlo sample, see [`crate::mc`]).

/// SplitMix64 finalizer. Bijective on u64 with strong avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One 64-bit word from the `(seed, counter)` pair.
#[inline]
pub fn draw_u64(seed: u64, counter: u64) -> u64 {
    mix64(mix64(seed).wrapping_add(mix64(counter)))
}

/// Uniform draw in [0, 1) with 53 random mantissa bits.
#[inline]
pub fn draw_uniform(seed: u64, counter: u64) -> f64 {
    (draw_u64(seed, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A counter allocator for one logical stream.
///
/// `stream` indexes the substream (e.g. the Monte Carlo sample); local
/// draw indices occupy the low bits. The split leaves room for 2^20
/// draws per stream and 2^44 streams.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    base: u64,
    local: u64,
}

pub const DRAWS_PER_STREAM_BITS: u32 = 20;

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng {
            seed,
            base: stream << DRAWS_PER_STREAM_BITS,
            local: 0,
        }
    }

    /// The `(seed, counter)` pair the next draw will consume.
    #[inline]
    pub fn peek(&self) -> (u64, u64) {
        (self.seed, self.base | self.local)
    }

    #[inline]
    pub fn next_counter(&mut self) -> u64 {
        debug_assert!(self.local < (1 << DRAWS_PER_STREAM_BITS));
        let c = self.base | self.local;
        self.local += 1;
        c
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let c = self.next_counter();
        draw_uniform(self.seed, c)
    }

    /// Standard normal via Box-Muller (consumes two counters).
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_uniform().max(f64::MIN_POSITIVE);
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_seed_and_counter() {
        for ctr in [0u64, 1, 2, 1 << 20, u64::MAX] {
            assert_eq!(draw_u64(42, ctr), draw_u64(42, ctr));
            assert_ne!(draw_u64(42, ctr), draw_u64(43, ctr));
        }
    }

    #[test]
    fn uniforms_live_in_unit_interval() {
        for ctr in 0..10_000u64 {
            let u = draw_uniform(7, ctr);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn uniform_mean_is_near_half() {
        let n = 100_000u64;
        let mean: f64 = (0..n).map(|c| draw_uniform(123, c)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn streams_do_not_collide() {
        let mut a = CounterRng::new(9, 0);
        let mut b = CounterRng::new(9, 1);
        let xs: Vec<u64> = (0..64).map(|_| a.next_counter()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_counter()).collect();
        for x in &xs {
            assert!(!ys.contains(x));
        }
    }

    #[test]
    fn normal_moments_are_sane() {
        let mut rng = CounterRng::new(5, 0);
        let n = 50_000;
        let zs: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
        let mean = zs.iter().sum::<f64>() / n as f64;
        let var = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }
}
