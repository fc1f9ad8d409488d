use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded uniform shuffle of `0..n`.
pub fn permutation(n: u64, seed: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

/// Bijection on `0..n` computed one element at a time: a balanced Feistel
/// network over the smallest even bit width covering `n`, cycle-walked back
/// into range.
#[derive(Debug, Clone)]
pub struct KeyedPermutation {
    n: u64,
    half_bits: u32,
    keys: [u64; 6],
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl KeyedPermutation {
    pub fn new(n: u64, seed: u64) -> Self {
        assert!(n >= 1, "permutation domain must be non-empty");
        let bits = (64 - (n - 1).leading_zeros()).max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keys = [0u64; 6];
        rng.fill(&mut keys[..]);
        Self {
            n,
            half_bits: bits.div_ceil(2),
            keys,
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn encrypt(&self, x: u64) -> u64 {
        let mask = (1u64 << self.half_bits) - 1;
        let (mut l, mut r) = (x >> self.half_bits, x & mask);
        for k in self.keys {
            let t = l ^ (mix(r ^ k) & mask);
            l = r;
            r = t;
        }
        (l << self.half_bits) | r
    }

    /// Image of `i`; panics if `i >= n`.
    pub fn apply(&self, i: u64) -> u64 {
        assert!(i < self.n, "{i} outside permutation domain 0..{}", self.n);
        let mut x = self.encrypt(i);
        while x >= self.n {
            x = self.encrypt(x);
        }
        x
    }
}
