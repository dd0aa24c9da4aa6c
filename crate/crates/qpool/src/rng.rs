//! Counter-based deterministic randomness.
//!
//! Every consumer derives an independent stream from a `(seed, stream)` pair,
//! so results never depend on scheduling or worker count: trial `t` always
//! sees the stream `(seed, t)` no matter which worker runs it.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 generator keyed by a `(seed, stream)` pair.
///
/// Not cryptographic; used only for reproducible sampling.
#[derive(Clone, Debug)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let state = mix(seed ^ mix(stream.wrapping_mul(GAMMA).wrapping_add(GAMMA)));
        Self { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform value in `[0, bound)` by rejection, free of modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0) is meaningless");
        // Accept r in [0, bound * floor(2^64 / bound)).
        let rem = (u64::MAX % bound + 1) % bound; // 2^64 mod bound
        let limit = u64::MAX - rem;
        loop {
            let r = self.next_u64();
            if r <= limit {
                return r % bound;
            }
        }
    }

    /// Draws `count` distinct values from `[0, bound)`, sorted ascending.
    ///
    /// Uses Floyd's sampling algorithm, so exactly `count` draws are consumed
    /// from the stream when no rejection occurs.
    pub fn distinct(&mut self, count: u64, bound: u64) -> Vec<u64> {
        assert!(count <= bound, "cannot draw {count} distinct from {bound}");
        let mut picked: Vec<u64> = Vec::with_capacity(count as usize);
        for j in bound - count..bound {
            let r = self.below(j + 1);
            if picked.contains(&r) {
                picked.push(j);
            } else {
                picked.push(r);
            }
        }
        picked.sort_unstable();
        picked
    }

    /// Draws `count` distinct values from `[0, bound)` excluding `excluded`,
    /// sorted ascending.
    pub fn distinct_excluding(&mut self, count: u64, bound: u64, excluded: u64) -> Vec<u64> {
        assert!(excluded < bound);
        let mut picked = self.distinct(count, bound - 1);
        for v in &mut picked {
            if *v >= excluded {
                *v += 1;
            }
        }
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn streams_are_independent_of_order() {
        let a: Vec<u64> = (0..4).map(|t| CounterRng::new(7, t).next_u64()).collect();
        let b: Vec<u64> = (0..4)
            .rev()
            .map(|t| CounterRng::new(7, t).next_u64())
            .collect();
        let b_rev: Vec<u64> = b.into_iter().rev().collect();
        assert_eq!(a, b_rev);
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = CounterRng::new(0xDEAD_BEEF, 0);
        for _ in 0..10_000 {
            assert!(rng.below(7) < 7);
        }
    }

    #[test]
    fn below_covers_all_residues() {
        let mut rng = CounterRng::new(1, 1);
        let seen: HashSet<u64> = (0..1000).map(|_| rng.below(5)).collect();
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn distinct_yields_sorted_unique() {
        let mut rng = CounterRng::new(42, 9);
        let v = rng.distinct(10, 30);
        assert_eq!(v.len(), 10);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&x| x < 30));
    }

    #[test]
    fn distinct_full_range() {
        let mut rng = CounterRng::new(3, 3);
        let v = rng.distinct(8, 8);
        assert_eq!(v, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn distinct_excluding_never_picks_excluded() {
        for stream in 0..50 {
            let mut rng = CounterRng::new(11, stream);
            let v = rng.distinct_excluding(4, 9, 5);
            assert_eq!(v.len(), 4);
            assert!(!v.contains(&5));
            assert!(v.iter().all(|&x| x < 9));
        }
    }
}
