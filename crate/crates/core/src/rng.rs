//! Counter-based seeding and per-purpose random streams.
//!
//! Every random decision in a generated dataset is drawn from a stream keyed by
//! `(global_seed, image_index, purpose)`. Seeds are derived by hashing rather
//! than by splitting a parent generator, so image `k` can be produced alone,
//! in any order, on any worker, and still match a sequential run.
//!
//! The pinned generator is ChaCha8 (`rand_chacha` 0.9), seeded with 32 bytes
//! expanded from the derived 64-bit key by SplitMix64.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Image index reserved for dataset-wide streams (e.g. the single texture
/// picked for `PlantUniform` datasets, manifest shuffles).
pub const DATASET_STREAM: u64 = u64::MAX;

/// Truncated-normal rejection loop limit.
pub const MAX_REJECTIONS: usize = 10_000;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_DOMAIN: u64 = 0x6C65_6166_7379_6E74; // "leafsynt"

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RngError {
    #[error("invalid interval: lo ({lo}) > hi ({hi})")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid normal parameters: mean {mean}, stddev {stddev}, clamp [{lo}, {hi}]")]
    InvalidNormal { mean: f64, stddev: f64, lo: f64, hi: f64 },
    #[error("truncated normal rejected {0} draws in a row; clamp interval too narrow")]
    RejectionLimit(usize),
}

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of image `image_index` in the dataset keyed by `global_seed`.
///
/// For a fixed global seed this is a bijection of the index (and vice versa),
/// so distinct indices can never collide.
pub fn derive_image_seed(global_seed: u64, image_index: u64) -> u64 {
    let base = mix64(global_seed ^ SEED_DOMAIN);
    mix64(base.wrapping_add(image_index.wrapping_mul(GOLDEN_GAMMA)))
}

/// What a stream is used for. Each purpose gets an unrelated sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    LeafCount,
    LeafPose,
    TextureAssign,
    TextureAugment,
    Camera,
    Light,
    Background,
    BackgroundAugment,
    DatasetTexture,
    Shuffle,
    Split,
}

impl Purpose {
    pub fn tag(self) -> u64 {
        match self {
            Purpose::LeafCount => 1,
            Purpose::LeafPose => 2,
            Purpose::TextureAssign => 3,
            Purpose::TextureAugment => 4,
            Purpose::Camera => 5,
            Purpose::Light => 6,
            Purpose::Background => 7,
            Purpose::BackgroundAugment => 8,
            Purpose::DatasetTexture => 9,
            Purpose::Shuffle => 10,
            Purpose::Split => 11,
        }
    }
}

/// A single-owner stream of uniform variates.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(global_seed: u64, image_index: u64, purpose: Purpose) -> Self {
        Self::with_tag(global_seed, image_index, purpose.tag())
    }

    /// Stream for an arbitrary numeric tag (sub-streams, tests).
    pub fn with_tag(global_seed: u64, image_index: u64, tag: u64) -> Self {
        let key = mix64(derive_image_seed(global_seed, image_index) ^ mix64(tag.wrapping_add(GOLDEN_GAMMA)));
        let mut state = key;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        Self { rng: ChaCha8Rng::from_seed(seed) }
    }

    /// Dataset-wide stream.
    pub fn dataset(global_seed: u64, purpose: Purpose) -> Self {
        Self::new(global_seed, DATASET_STREAM, purpose)
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `[lo, hi)`; exactly `lo` when the interval is degenerate.
    pub fn sample_uniform(&mut self, lo: f64, hi: f64) -> Result<f64, RngError> {
        if !(lo <= hi) {
            return Err(RngError::InvalidInterval { lo, hi });
        }
        if lo == hi {
            return Ok(lo);
        }
        let x = lo + (hi - lo) * self.next_f64();
        // lo + span * u can round up to hi
        Ok(if x >= hi { hi.next_down() } else { x })
    }

    /// Convenience for callers that validated the interval already.
    pub fn uniform(&mut self, range: [f64; 2]) -> f64 {
        self.sample_uniform(range[0], range[1]).expect("validated interval")
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Draw from N(mean, stddev²) truncated to `[clamp_lo, clamp_hi]` by rejection.
    pub fn sample_normal(&mut self, mean: f64, stddev: f64, clamp_lo: f64, clamp_hi: f64) -> Result<f64, RngError> {
        let valid = stddev >= 0.0 && clamp_lo <= mean && mean <= clamp_hi && stddev.is_finite() && mean.is_finite();
        if !valid {
            return Err(RngError::InvalidNormal { mean, stddev, lo: clamp_lo, hi: clamp_hi });
        }
        if stddev == 0.0 {
            return Ok(mean);
        }
        for _ in 0..MAX_REJECTIONS {
            let x = mean + stddev * self.standard_normal();
            if (clamp_lo..=clamp_hi).contains(&x) {
                return Ok(x);
            }
        }
        Err(RngError::RejectionLimit(MAX_REJECTIONS))
    }

    /// Uniform index in `0..n`. `n` must be nonzero.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}
