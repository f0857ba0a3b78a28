//! Seeded input families and test corpora.

use std::fmt;
use std::str::FromStr;

use aplab_core::setgen::{bohr_sample, embedded_primes, interval_set, random_set};
use aplab_core::{BohrSet, SetOnZN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// SplitMix64 finalizer; mixes a base seed with an index into a decorrelated seed.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Independent random sets of densities α, β, γ.
    Random,
    /// Random subsets of a one-frequency Bohr set.
    Bohr,
    /// Dense random subsets of a short interval.
    Planted,
    /// A = B = C = the Freiman image of the primes up to N/6; densities are ignored.
    Primes,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Random, Family::Bohr, Family::Planted, Family::Primes];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Bohr => "bohr",
            Family::Planted => "planted",
            Family::Primes => "primes",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::Config(format!("unknown family {s}")))
    }
}

/// Density of the planted sets inside their window.
const PLANTED_FILL: f64 = 0.9;

/// Builds the three sets of one instance.
pub fn instance(family: Family, modulus: usize, densities: [f64; 3], seed: u64) -> Result<[SetOnZN; 3]> {
    let seeds = [mix_seed(seed, 0), mix_seed(seed, 1), mix_seed(seed, 2)];
    let max = densities.iter().copied().fold(0.0, f64::max);
    let sets = match family {
        Family::Random => [0, 1, 2].map(|j| random_set(modulus, densities[j], seeds[j])),
        Family::Bohr => {
            let share = (1.25 * max).min(1.0);
            let delta = 2.0 * (std::f64::consts::PI * share / 2.0).sin();
            let g = 1 + (mix_seed(seed, 3) % (modulus as u64 - 1)) as usize;
            let b = BohrSet::new(modulus, &[g], delta)?;
            let rel = b.len() as f64 / modulus as f64;
            [0, 1, 2].map(|j| bohr_sample(&b, (densities[j] / rel).min(1.0), seeds[j]))
        }
        Family::Planted => {
            let m = ((max * modulus as f64 / PLANTED_FILL).ceil() as usize).clamp(1, modulus);
            let window = interval_set(modulus, m)?;
            let rel = m as f64 / modulus as f64;
            [0, 1, 2].map(|j| {
                random_set(modulus, (densities[j] / rel).min(1.0), seeds[j]).and_then(|s| s.intersection(&window))
            })
        }
        Family::Primes => {
            let p = embedded_primes(modulus / 6)?;
            [Ok(p.clone()), Ok(p.clone()), Ok(p)]
        }
    };
    let [a, b, c] = sets;
    Ok([a?, b?, c?])
}

/// Parameters of a seeded random Bohr set.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrSpec {
    pub modulus: usize,
    pub gamma: Vec<usize>,
    pub delta: f64,
}

/// `count` Bohr sets with N ∈ {256, …, 4096}, d ≤ 4 and δ ∈ [0.1, 2].
pub fn bohr_corpus(count: usize, seed: u64) -> Vec<BohrSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let modulus = 256usize << rng.gen_range(0..5);
            let d = rng.gen_range(1..=4);
            let gamma = (0..d).map(|_| rng.gen_range(1..modulus)).collect();
            let delta = rng.gen_range(0.1..=2.0);
            BohrSpec { modulus, gamma, delta }
        })
        .collect()
}
