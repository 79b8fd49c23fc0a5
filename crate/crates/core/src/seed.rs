use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Randomization seed. Identical seeds and inputs give identical outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

pub type SeedRng = ChaCha8Rng;

impl Seed {
    pub fn rng(self) -> SeedRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derives an independent child seed from this seed and a path of labels.
    pub fn derive(self, labels: &[u64]) -> Seed {
        let mut state = splitmix64(self.0 ^ 0x5EED_5EED_5EED_5EED);
        for &label in labels {
            state = splitmix64(state ^ splitmix64(label));
        }
        Seed(state)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
