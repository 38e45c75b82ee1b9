//! Deterministic simulation RNG and measurement-outcome sources.
//!
//! SplitMix64: a counter-based 64-bit generator with stable output across
//! platforms. Each Monte Carlo trial owns one stream seeded from
//! (base seed, trial index), so trials are reproducible and independent.

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRng {
    state: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    #[inline]
    pub fn gen_bit(&mut self) -> bool {
        self.next_u64() >> 63 != 0
    }

    /// Uniform in [0, bound). Modulo bias is irrelevant at test scales.
    #[inline]
    pub fn gen_range(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }
}

/// Seed for trial `index` of a run with the given base seed.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    mix(base_seed.wrapping_add(mix(index.wrapping_add(1).wrapping_mul(GOLDEN))))
}

/// Source of the random bit consumed by a non-deterministic Pauli measurement.
///
/// `true` selects the −1 outcome. Deterministic measurements never consult
/// the chooser, so forcing a branch means supplying exactly one bit per
/// genuinely random measurement.
pub trait OutcomeChooser {
    fn choose_minus(&mut self) -> bool;
}

impl OutcomeChooser for SimRng {
    fn choose_minus(&mut self) -> bool {
        self.gen_bit()
    }
}

/// Replays a fixed outcome branch; panics when over-consumed so tests notice
/// a mismatch in the number of random measurements.
pub struct ForcedOutcomes {
    bits: Vec<bool>,
    cursor: usize,
}

impl ForcedOutcomes {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits, cursor: 0 }
    }

    /// Branch b of `count` random measurements, bit i = (b >> i) & 1.
    pub fn branch(b: usize, count: usize) -> Self {
        Self::new((0..count).map(|i| b >> i & 1 != 0).collect())
    }

    pub fn fully_consumed(&self) -> bool {
        self.cursor == self.bits.len()
    }
}

impl OutcomeChooser for ForcedOutcomes {
    fn choose_minus(&mut self) -> bool {
        let bit = *self
            .bits
            .get(self.cursor)
            .expect("forced outcome branch exhausted");
        self.cursor += 1;
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = SimRng::new(42);
        let mut b = SimRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn trial_seeds_differ() {
        let s: Vec<u64> = (0..64).map(|i| trial_seed(7, i)).collect();
        let mut dedup = s.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
    }

    #[test]
    fn gen_bool_frequency() {
        let mut rng = SimRng::new(1);
        let hits = (0..100_000).filter(|_| rng.gen_bool(0.25)).count();
        // 4 sigma around 25000 with sigma = sqrt(n p (1-p)) ~ 137
        assert!((24452..=25548).contains(&hits), "hits = {hits}");
    }

    #[test]
    fn forced_outcomes_replay_branch() {
        let mut f = ForcedOutcomes::branch(0b101, 3);
        assert!(f.choose_minus());
        assert!(!f.choose_minus());
        assert!(f.choose_minus());
        assert!(f.fully_consumed());
    }
}
