//! Erdős–Rényi Max-Cut instances and exact cut enumeration.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// Generator used by [`generate_er`], recorded in experiment metadata.
pub const RNG_FAMILY: &str =
    "ChaCha8 (rand_chacha 0.3, seed_from_u64); one 53-bit uniform per candidate edge (i<j) in lexicographic order";

/// Exhaustive search refuses graphs larger than this.
pub const MAX_BRUTEFORCE_VERTICES: usize = 24;

/// An unweighted simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    seed: u64,
    edge_prob: f64,
}

impl GraphInstance {
    /// Builds a graph from an explicit edge list. Edges are stored as `(i, j)`
    /// with `i < j`.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)], seed: u64, edge_prob: f64) -> Result<Self> {
        if n_vertices > Bitstring::MAX_LEN {
            return Err(Error::InvalidGraph("too many vertices for bitstring encoding"));
        }
        let mut stored = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::InvalidGraph("edge endpoint out of range"));
            }
            if a == b {
                return Err(Error::InvalidGraph("self-loop"));
            }
            let e = (a.min(b), a.max(b));
            if stored.contains(&e) {
                return Err(Error::InvalidGraph("duplicate edge"));
            }
            stored.push(e);
        }
        Ok(Self { n_vertices, edges: stored, seed, edge_prob })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_prob(&self) -> f64 {
        self.edge_prob
    }

    /// `C(z)` for every bitstring, indexed by its integer value.
    pub fn cut_table(&self) -> Vec<u32> {
        Bitstring::all(self.n_vertices).map(|z| self.cut_unchecked(z)).collect()
    }

    fn cut_unchecked(&self, z: Bitstring) -> u32 {
        self.edges.iter().filter(|&&(i, j)| z.bit(i) != z.bit(j)).count() as u32
    }
}

/// `G(n, p)` with one uniform draw per candidate edge in `(0,1), (0,2), …`
/// order.
pub fn generate_er(n: usize, edge_prob: f64, seed: u64) -> Result<GraphInstance> {
    if n < 2 {
        return Err(Error::InvalidGraph("need at least two vertices"));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidGraph("edge probability outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u < edge_prob {
                edges.push((i, j));
            }
        }
    }
    GraphInstance::new(n, &edges, seed, edge_prob)
}

/// Number of edges whose endpoints fall on different sides of `z`.
pub fn cut_value(g: &GraphInstance, z: Bitstring) -> Result<u32> {
    if z.len() != g.n_vertices {
        return Err(Error::SizeMismatch { expected: g.n_vertices, found: z.len() });
    }
    Ok(g.cut_unchecked(z))
}

/// The optimal cut value and every bitstring achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCut {
    pub c_max: u32,
    pub optimal: Vec<Bitstring>,
}

impl MaxCut {
    pub fn is_optimal(&self, z: Bitstring) -> bool {
        self.optimal.binary_search(&z).is_ok()
    }
}

/// Exact Max-Cut by enumerating all `2^n` bitstrings.
pub fn max_cut_bruteforce(g: &GraphInstance) -> Result<MaxCut> {
    if g.n_vertices > MAX_BRUTEFORCE_VERTICES {
        return Err(Error::TooManyVertices { n: g.n_vertices, limit: MAX_BRUTEFORCE_VERTICES });
    }
    let table = g.cut_table();
    let c_max = table.iter().copied().max().unwrap_or(0);
    let optimal = Bitstring::all(g.n_vertices).filter(|z| table[z.value() as usize] == c_max).collect();
    Ok(MaxCut { c_max, optimal })
}
