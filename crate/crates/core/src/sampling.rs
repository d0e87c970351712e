//! Seeded, sharded Monte Carlo.
//!
//! Work is split into a fixed number of shards, each driven by its own
//! ChaCha stream, and shard results are merged in index order. The estimate
//! therefore depends only on `(n, seed)`, not on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SHARDS: usize = 64;

/// Mean of a Monte Carlo estimator and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// RNG for shard `shard` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Averages `draw` over `n` independent samples.
pub fn sharded_mean<F>(n: usize, seed: u64, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let shards: Vec<Moments> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let count = n / SHARDS + usize::from(s < n % SHARDS);
            let mut rng = shard_rng(seed, s as u64);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let total = shards.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1.0 {
        total.m2 / (total.n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean: total.mean,
        stderr: (var / total.n.max(1.0)).sqrt(),
    }
}
