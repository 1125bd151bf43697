//! Deterministic random substreams and the multinomial bootstrap.
//!
//! A [`SeedPath`] names a stream by a root seed plus a path of indices such
//! as `[replicate, bootstrap]`. The 256-bit ChaCha key is a SHA-256 digest of
//! the root and the full path, so a stream depends only on its own name and
//! never on the order in which other streams were created or on how work is
//! split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::Dataset;

/// The random generator behind every substream.
pub type Stream = ChaCha8Rng;

const DOMAIN_TAG: &[u8] = b"bagbayes/seed-path/v1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub root_seed: u64,
    pub path: Vec<u32>,
}

impl SeedPath {
    pub fn root(root_seed: u64) -> Self {
        Self {
            root_seed,
            path: Vec::new(),
        }
    }

    pub fn new(root_seed: u64, path: impl Into<Vec<u32>>) -> Self {
        Self {
            root_seed,
            path: path.into(),
        }
    }

    pub fn child(&self, index: u32) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Self {
            root_seed: self.root_seed,
            path,
        }
    }

    pub fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(self.root_seed.to_le_bytes());
        h.update((self.path.len() as u64).to_le_bytes());
        for idx in &self.path {
            h.update(idx.to_le_bytes());
        }
        h.finalize().into()
    }

    /// A fresh generator positioned at the start of this path's stream.
    pub fn stream(&self) -> Stream {
        Stream::from_seed(self.key())
    }
}

impl std::fmt::Display for SeedPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.root_seed)?;
        for idx in &self.path {
            write!(f, "/{idx}")?;
        }
        Ok(())
    }
}

/// Multiplicities `K_1..K_N` of each observation in a bootstrap dataset of size `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapCounts {
    counts: Vec<u32>,
    m: usize,
}

impl BootstrapCounts {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("bootstrap counts must cover at least one observation"));
        }
        let m = counts.iter().map(|&c| c as usize).sum();
        Ok(Self { counts, m })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }
}

/// Draws `Multinomial(m, (1/n, ..., 1/n))` counts from the stream named by `stream`.
pub fn draw_counts(n: usize, m: usize, stream: &SeedPath) -> Result<BootstrapCounts> {
    draw_counts_with(n, m, &mut stream.stream())
}

/// Sequential conditional-binomial multinomial sampler: observation `i`
/// receives `Binomial(remaining, 1 / (n - i))` of the remaining mass.
pub fn draw_counts_with<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<BootstrapCounts> {
    if n == 0 {
        return Err(Error::invalid("cannot bootstrap an empty dataset (n = 0)"));
    }
    let mut counts = vec![0u32; n];
    let mut remaining = m as u64;
    for (i, slot) in counts.iter_mut().enumerate().take(n - 1) {
        if remaining == 0 {
            break;
        }
        let p = 1.0 / (n - i) as f64;
        let k = Binomial::new(remaining, p)
            .map_err(|e| Error::invalid(format!("binomial({remaining}, {p}): {e}")))?
            .sample(rng);
        *slot = k as u32;
        remaining -= k;
    }
    counts[n - 1] += remaining as u32;
    Ok(BootstrapCounts { counts, m })
}

/// Expands `counts` into a bootstrap dataset: row `i` repeated `counts[i]`
/// times, rows kept in index order.
pub fn resample(data: &Dataset, counts: &BootstrapCounts) -> Result<Dataset> {
    if counts.n() != data.n() {
        return Err(Error::invalid(format!(
            "counts cover {} observations but the dataset has {} rows",
            counts.n(),
            data.n()
        )));
    }
    let index: Vec<usize> = counts
        .counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect();
    Ok(data.select_rows(&index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn rows(values: &[f64]) -> Dataset {
        Dataset::location(DMatrix::from_column_slice(values.len(), 1, values)).unwrap()
    }

    #[test]
    fn single_atom_takes_all_mass() {
        let c = draw_counts(1, 3, &SeedPath::root(7)).unwrap();
        assert_eq!(c.counts(), &[3]);
    }

    #[test]
    fn empty_resample() {
        let c = draw_counts(2, 0, &SeedPath::root(7)).unwrap();
        assert_eq!(c.counts(), &[0, 0]);
        assert_eq!(c.m(), 0);
    }

    #[test]
    fn zero_observations_rejected() {
        assert!(matches!(
            draw_counts(0, 3, &SeedPath::root(1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn resample_examples() {
        let out = resample(&rows(&[1.0, 2.0]), &BootstrapCounts::new(vec![2, 0]).unwrap()).unwrap();
        assert_eq!(out.location_matrix().unwrap().as_slice(), &[1.0, 1.0]);
        let out = resample(&rows(&[1.0, 2.0, 3.0]), &BootstrapCounts::new(vec![0, 1, 2]).unwrap()).unwrap();
        assert_eq!(out.location_matrix().unwrap().as_slice(), &[2.0, 3.0, 3.0]);
    }

    #[test]
    fn resample_length_mismatch() {
        let err = resample(&rows(&[1.0, 2.0]), &BootstrapCounts::new(vec![1, 1, 1]).unwrap());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn distinct_paths_give_distinct_keys() {
        let a = SeedPath::new(1, vec![0, 1]);
        let b = SeedPath::new(1, vec![1, 0]);
        let c = SeedPath::new(1, vec![0, 1, 0]);
        assert_ne!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
        assert_ne!(SeedPath::root(1).key(), SeedPath::root(2).key());
        assert_eq!(a.key(), SeedPath::root(1).child(0).child(1).key());
    }

    #[test]
    fn counts_mean_matches_binomial() {
        // Binomial(10, 1/4): mean 2.5, variance 1.875
        let draws = 100_000;
        let mut sums = [0.0_f64; 4];
        let root = SeedPath::root(20240611);
        for b in 0..draws {
            let c = draw_counts(4, 10, &root.child(b)).unwrap();
            assert_eq!(c.counts().iter().sum::<u32>(), 10);
            for (s, &k) in sums.iter_mut().zip(c.counts()) {
                *s += k as f64;
            }
        }
        let se = (1.875_f64 / draws as f64).sqrt();
        for s in sums {
            assert!((s / draws as f64 - 2.5).abs() < 3.0 * se, "mean {}", s / draws as f64);
        }
    }
}
