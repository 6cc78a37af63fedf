//! Max-Cut quality metrics of an output distribution.

use alloc::vec::Vec;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::graph::{max_cut_bruteforce, GraphInstance, MaxCut};

/// Expected cut, approximation ratio and optimal-solution probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub expected_cut: f64,
    /// `None` when the graph has no edges (`c_max = 0`).
    pub approx_ratio: Option<f64>,
    pub p_opt: f64,
    pub c_max: u32,
}

/// Cut table and optimal set of one graph, computed once and reused for
/// every distribution scored against it.
#[derive(Debug, Clone)]
pub struct CutScorer {
    n_vertices: usize,
    cuts: Vec<u32>,
    max_cut: MaxCut,
}

impl CutScorer {
    pub fn new(g: &GraphInstance) -> Result<Self> {
        let max_cut = max_cut_bruteforce(g)?;
        Ok(Self { n_vertices: g.n_vertices(), cuts: g.cut_table(), max_cut })
    }

    pub fn cuts(&self) -> &[u32] {
        &self.cuts
    }

    pub fn max_cut(&self) -> &MaxCut {
        &self.max_cut
    }

    fn check(&self, dist: &Distribution) -> Result<()> {
        if dist.n_bits() != self.n_vertices {
            return Err(Error::SizeMismatch { expected: self.n_vertices, found: dist.n_bits() });
        }
        Ok(())
    }

    /// `Σ_z Pr(z) C(z)`.
    pub fn expected_cut(&self, dist: &Distribution) -> Result<f64> {
        self.check(dist)?;
        Ok(dist.probs().iter().zip(&self.cuts).map(|(p, &c)| p * c as f64).sum())
    }

    pub fn approximation_ratio(&self, dist: &Distribution) -> Result<Option<f64>> {
        let expected = self.expected_cut(dist)?;
        Ok((self.max_cut.c_max > 0).then(|| expected / self.max_cut.c_max as f64))
    }

    /// Total probability on bitstrings achieving `c_max`.
    pub fn optimal_solution_probability(&self, dist: &Distribution) -> Result<f64> {
        self.check(dist)?;
        Ok(self.max_cut.optimal.iter().map(|&z| dist.prob(z)).sum())
    }

    pub fn report(&self, dist: &Distribution) -> Result<MetricReport> {
        Ok(MetricReport {
            expected_cut: self.expected_cut(dist)?,
            approx_ratio: self.approximation_ratio(dist)?,
            p_opt: self.optimal_solution_probability(dist)?,
            c_max: self.max_cut.c_max,
        })
    }
}

pub fn expected_cut(dist: &Distribution, g: &GraphInstance) -> Result<f64> {
    CutScorer::new(g)?.expected_cut(dist)
}

pub fn approximation_ratio(dist: &Distribution, g: &GraphInstance) -> Result<Option<f64>> {
    CutScorer::new(g)?.approximation_ratio(dist)
}

pub fn optimal_solution_probability(dist: &Distribution, g: &GraphInstance) -> Result<f64> {
    CutScorer::new(g)?.optimal_solution_probability(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bitstring;
    use crate::graph::generate_er;
    use proptest::prelude::*;

    fn four_cycle() -> GraphInstance {
        GraphInstance::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], 0, 1.0).unwrap()
    }

    #[test]
    fn point_mass_on_optimum() {
        let g = four_cycle();
        let opt = Distribution::point(Bitstring::parse("1010").unwrap());
        assert_eq!(expected_cut(&opt, &g).unwrap(), 4.0);
        assert_eq!(approximation_ratio(&opt, &g).unwrap(), Some(1.0));
        assert_eq!(optimal_solution_probability(&opt, &g).unwrap(), 1.0);
    }

    #[test]
    fn uniform_distribution() {
        let g = four_cycle();
        let u = Distribution::uniform(4);
        assert!((expected_cut(&u, &g).unwrap() - 2.0).abs() < 1e-15);
        assert!((approximation_ratio(&u, &g).unwrap().unwrap() - 0.5).abs() < 1e-15);
        assert!((optimal_solution_probability(&u, &g).unwrap() - 2.0 / 16.0).abs() < 1e-15);
        let er = generate_er(6, 0.5, 77).unwrap();
        let half = er.edges().len() as f64 / 2.0;
        assert!((expected_cut(&Distribution::uniform(6), &er).unwrap() - half).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_ratio_not_applicable() {
        let g = GraphInstance::new(3, &[], 0, 0.0).unwrap();
        let u = Distribution::uniform(3);
        assert_eq!(expected_cut(&u, &g).unwrap(), 0.0);
        assert_eq!(approximation_ratio(&u, &g).unwrap(), None);
    }

    #[test]
    fn size_mismatch() {
        assert!(expected_cut(&Distribution::uniform(3), &four_cycle()).is_err());
    }

    proptest! {
        #[test]
        fn optimal_mass_bound_and_flip_invariance(
            seed in any::<u64>(),
            weights in proptest::collection::vec(0.0f64..1.0, 32),
        ) {
            let g = generate_er(5, 0.5, seed).unwrap();
            let total: f64 = weights.iter().sum::<f64>() + 1e-9;
            let dist = Distribution::new(5, weights.iter().map(|w| (w + 1e-9 / 32.0) / total).collect()).unwrap();
            let scorer = CutScorer::new(&g).unwrap();
            let r = scorer.report(&dist).unwrap();
            prop_assert!(r.expected_cut + 1e-12 >= r.p_opt * r.c_max as f64);
            let flipped = scorer.report(&dist.complemented()).unwrap();
            prop_assert!((flipped.expected_cut - r.expected_cut).abs() < 1e-12);
            prop_assert!((flipped.p_opt - r.p_opt).abs() < 1e-12);
        }
    }
}
