//! Counter-based random streams.
//!
//! Every random word is a pure function of a 64-bit stream key and a 64-bit
//! counter, so a replica's draws can be regenerated in any order and on any
//! thread. Replica `r` of a run with master seed `s` uses the key
//! `StreamKey::master(s).split(r)`; inside a replica, coordinate `j` of step
//! `k` (1-based) of a `D`-dimensional walk reads counter `(k - 1) * D + j`.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SPLIT_SALT: u64 = 0xd1b5_4a32_d192_ed03;
const COUNTER_SALT: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// SplitMix64 output function (Stafford variant 13).
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn master(seed: u64) -> Self {
        StreamKey(mix64(seed.wrapping_add(GOLDEN)))
    }

    /// Child stream `index`; distinct indices give unrelated keys.
    pub fn split(self, index: u64) -> Self {
        StreamKey(mix64(
            self.0 ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(SPLIT_SALT)),
        ))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    #[inline(always)]
    pub fn draw(self, counter: u64) -> u64 {
        mix64(self.0.wrapping_add(mix64(counter ^ COUNTER_SALT)).wrapping_add(GOLDEN))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(self, counter: u64) -> f64 {
        (self.draw(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Replica key for `(master, replica)`.
pub fn replica_key(master_seed: u64, replica: u64) -> StreamKey {
    StreamKey::master(master_seed).split(replica)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_key_and_counter() {
        let k = replica_key(7, 3);
        let forward: Vec<u64> = (0..64).map(|c| k.draw(c)).collect();
        let backward: Vec<u64> = (0..64).rev().map(|c| k.draw(c)).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn split_streams_differ() {
        let m = StreamKey::master(1);
        assert_ne!(m.split(0), m.split(1));
        assert_ne!(m.split(0).draw(0), m.split(1).draw(0));
    }

    #[test]
    fn uniform_moments() {
        let k = replica_key(42, 0);
        let n = 200_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for c in 0..n {
            let u = k.uniform(c);
            assert!((0.0..1.0).contains(&u));
            s += u;
            s2 += u * u;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0f64 / n as f64).sqrt());
        assert!((var - 1.0 / 12.0).abs() < 2e-3);
    }

    #[test]
    fn bit_balance() {
        let k = replica_key(9, 9);
        let mut ones = [0u32; 64];
        let n = 50_000;
        for c in 0..n {
            let w = k.draw(c);
            for (b, o) in ones.iter_mut().enumerate() {
                *o += ((w >> b) & 1) as u32;
            }
        }
        for o in ones {
            let p = o as f64 / n as f64;
            assert!((p - 0.5).abs() < 0.01, "bit frequency {p}");
        }
    }
}
