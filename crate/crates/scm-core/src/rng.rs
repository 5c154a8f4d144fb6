//! Deterministic random numbers for the simulation harness.
//!
//! Generator: xoshiro256++ (Blackman/Vigna), state expanded from a 64-bit
//! seed with SplitMix64, the seeding procedure the xoshiro authors
//! recommend. Normals come from Box-Muller. Everything here is pure
//! integer/f64 arithmetic, so streams are identical on every platform.
//!
//! Per-dataset seeds are derived, not sequential: `derive_seed` mixes
//! (base, config_index, replication) through SplitMix64 finalizers so
//! that each (config, rep) cell owns an independent stream and any cell
//! can be regenerated in isolation. Injectivity over the default grid is
//! covered by tests.

/// SplitMix64 finalizer: the 64-bit avalanche at the heart of the
/// generator's output function.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

/// SplitMix64 stream: `next = mix64(state += GOLDEN)`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }
}

/// Collision-resistant mixing of the run's base seed with the cell
/// coordinates. Each input is passed through the SplitMix64 finalizer
/// with a distinct additive constant before combining, which breaks the
/// linear structure of (config_index, replication) pairs.
pub fn derive_seed(base_seed: u64, config_index: u64, replication: u64) -> u64 {
    let a = mix64(base_seed.wrapping_add(GOLDEN));
    let b = mix64(config_index.wrapping_add(2).wrapping_mul(GOLDEN) ^ a);
    mix64(replication.wrapping_add(3).wrapping_mul(GOLDEN) ^ b)
}

/// xoshiro256++ with Box-Muller normal sampling.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    cached_normal: Option<f64>,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = sm.next_u64();
        }
        // All-zero state is the one fixed point; SplitMix64 cannot emit
        // four zeros in a row, asserted for safety.
        debug_assert!(s.iter().any(|&x| x != 0));
        Rng { s, cached_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal. Box-Muller produces pairs; the second value is
    /// cached so consecutive draws cost one transform per two normals.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // u1 in (0, 1]: guards the log.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        let z0 = r * libm::cos(theta);
        let z1 = r * libm::sin(theta);
        self.cached_normal = Some(z1);
        z0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn splitmix_reference_vector() {
        // Known stream for seed 1234567: first three outputs of the
        // reference SplitMix64.
        let mut sm = SplitMix64::new(1234567);
        assert_eq!(sm.next_u64(), 6457827717110365317);
        assert_eq!(sm.next_u64(), 3203168211198807973);
        assert_eq!(sm.next_u64(), 9817491932198370423);
    }

    #[test]
    fn streams_are_deterministic() {
        let mut a = Rng::from_seed(42);
        let mut b = Rng::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::from_seed(42);
        let mut d = Rng::from_seed(43);
        let same = (0..100).filter(|_| c.next_u64() == d.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut rng = Rng::from_seed(7);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn normal_moments() {
        let mut rng = Rng::from_seed(99);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n as f64;
        let skew = draws.iter().map(|z| (z - mean) * (z - mean) * (z - mean)).sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        assert!(skew.abs() < 0.05, "skew {skew}");
    }

    #[test]
    fn derive_seed_separates_neighbours() {
        // Adjacent cells must not collide nor produce related streams.
        let s00 = derive_seed(1, 0, 0);
        let s01 = derive_seed(1, 0, 1);
        let s10 = derive_seed(1, 1, 0);
        assert_ne!(s00, s01);
        assert_ne!(s00, s10);
        assert_ne!(s01, s10);
        // The classic trap: (config+1, rep-1) vs (config, rep) under
        // additive schemes.
        assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
    }

    #[test]
    fn derive_seed_injective_on_default_grid_scale() {
        use alloc::collections::BTreeSet;
        let mut seen = BTreeSet::new();
        for config in 0..384u64 {
            for rep in 0..100u64 {
                assert!(
                    seen.insert(derive_seed(0xD0E5EED, config, rep)),
                    "collision at config {config} rep {rep}"
                );
            }
        }
    }
}
