//! Label-randomized baselines and bootstrap distributions.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Independent work units (replicates, bootstrap
//! chunks) select their own ChaCha stream, so results never depend on how
//! work is split across threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::Cascade;

pub const RNG_ALGORITHM: &str = "ChaCha8";
pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 50_000;
const BOOTSTRAP_CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for stream `stream` of this seed.
    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// A distinct seed for a named sub-task (splitmix64 of seed ^ tag).
    pub fn derive(self, tag: u64) -> Seed {
        let mut z = (self.0 ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NullModelError {
    #[error("bootstrap needs at least one value")]
    EmptyInput,
    #[error("bootstrap columns differ in length")]
    RaggedColumns,
}

/// Permutes coordination flags over the global pool of non-root nodes.
///
/// Structure, times and root flags are untouched and the number of
/// coordinated nodes is preserved exactly.
pub fn shuffle_labels(cascades: &[Cascade], seed: Seed) -> Vec<Cascade> {
    shuffle_labels_with(cascades, &mut seed.rng(0))
}

pub fn shuffle_labels_with(cascades: &[Cascade], rng: &mut impl Rng) -> Vec<Cascade> {
    let mut pool: Vec<bool> = cascades
        .iter()
        .flat_map(|c| c.nodes()[1..].iter().map(|n| n.coordinated))
        .collect();
    if !pool.iter().any(|&f| f) {
        return cascades.to_vec();
    }
    pool.shuffle(rng);
    let mut next = pool.into_iter();
    cascades
        .iter()
        .map(|c| {
            let mut flags = Vec::with_capacity(c.len());
            flags.push(c.root().coordinated);
            flags.extend(next.by_ref().take(c.len() - 1));
            c.with_flags(&flags)
        })
        .collect()
}

/// `replicates` shuffles; replicate `r` uses stream `r` of `seed`.
pub fn shuffle_replicates(cascades: &[Cascade], replicates: usize, seed: Seed) -> Vec<Vec<Cascade>> {
    (0..replicates)
        .into_par_iter()
        .map(|r| shuffle_labels_with(cascades, &mut seed.rng(r as u64)))
        .collect()
}

/// Means of `n_samples` resamples (with replacement) of `values`.
pub fn bootstrap_means(values: &[f64], n_samples: usize, seed: Seed) -> Result<Vec<f64>, NullModelError> {
    let mut out = bootstrap_column_means(&[values], n_samples, seed)?;
    Ok(out.pop().expect("one column"))
}

/// Bootstrap means of several equally long columns sharing the same row
/// resamples, so per-row records are resampled as a unit.
pub fn bootstrap_column_means(
    columns: &[&[f64]],
    n_samples: usize,
    seed: Seed,
) -> Result<Vec<Vec<f64>>, NullModelError> {
    let n = columns.first().map_or(0, |c| c.len());
    if n == 0 {
        return Err(NullModelError::EmptyInput);
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(NullModelError::RaggedColumns);
    }
    let chunks = n_samples.div_ceil(BOOTSTRAP_CHUNK);
    let per_chunk: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = seed.rng(ci as u64);
            let len = BOOTSTRAP_CHUNK.min(n_samples - ci * BOOTSTRAP_CHUNK);
            let mut means = vec![Vec::with_capacity(len); columns.len()];
            let mut totals = vec![0.0; columns.len()];
            for _ in 0..len {
                totals.iter_mut().for_each(|t| *t = 0.0);
                for _ in 0..n {
                    let row = rng.random_range(0..n);
                    for (t, col) in totals.iter_mut().zip(columns) {
                        *t += col[row];
                    }
                }
                for (m, t) in means.iter_mut().zip(&totals) {
                    m.push(t / n as f64);
                }
            }
            means
        })
        .collect();
    let mut out = vec![Vec::with_capacity(n_samples); columns.len()];
    for chunk in per_chunk {
        for (o, c) in out.iter_mut().zip(chunk) {
            o.extend(c);
        }
    }
    Ok(out)
}
