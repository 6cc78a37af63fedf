//! Probability tables over qubit bitstrings.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// `Pr(z)` for every `z ∈ {0,1}^n`, indexed by the bitstring value.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n_bits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        if n_bits > Bitstring::MAX_LEN {
            return Err(Error::InvalidConfig("too many bits for a dense distribution"));
        }
        if probs.len() != 1 << n_bits {
            return Err(Error::SizeMismatch { expected: 1 << n_bits, found: probs.len() });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(Error::InvalidConfig("probabilities must be finite and non-negative"));
        }
        Ok(Self { n_bits, probs })
    }

    pub fn uniform(n_bits: usize) -> Self {
        let len = 1usize << n_bits;
        Self { n_bits, probs: vec![1.0 / len as f64; len] }
    }

    pub fn point(z: Bitstring) -> Self {
        let mut probs = vec![0.0; 1 << z.len()];
        probs[z.value() as usize] = 1.0;
        Self { n_bits: z.len(), probs }
    }

    /// Empirical frequencies of a sample.
    pub fn from_samples(n_bits: usize, samples: &[Bitstring]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("empty sample"));
        }
        let mut probs = vec![0.0; 1 << n_bits];
        for z in samples {
            if z.len() != n_bits {
                return Err(Error::SizeMismatch { expected: n_bits, found: z.len() });
            }
            probs[z.value() as usize] += 1.0;
        }
        let n = samples.len() as f64;
        probs.iter_mut().for_each(|p| *p /= n);
        Ok(Self { n_bits, probs })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, z: Bitstring) -> f64 {
        self.probs[z.value() as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Bitstring, f64)> + '_ {
        Bitstring::all(self.n_bits).zip(self.probs.iter().copied())
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        assert_eq!(self.n_bits, other.n_bits);
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// The same distribution under a global bit flip.
    pub fn complemented(&self) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for (z, p) in self.iter() {
            probs[z.complement().value() as usize] = p;
        }
        Self { n_bits: self.n_bits, probs }
    }

    /// `shots` i.i.d. draws using a seeded ChaCha8 stream.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<Bitstring>> {
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p.max(0.0);
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..shots)
            .map(|_| {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * total;
                let idx = cumulative.partition_point(|&c| c <= u).min(self.probs.len() - 1);
                Bitstring::from_raw(idx as u32, self.n_bits)
            })
            .collect())
    }
}
