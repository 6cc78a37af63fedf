//! Truncated oscillator operators and finite-energy GKP codewords.
//!
//! Quadratures use Wigner units: `x = (a + a†)/2`, `p = (a − a†)/(2i)`, so
//! `[x, p] = i/2` and the vacuum has position variance `1/4`. The matching
//! position wavefunctions are `ψ_n(x) = 2^{1/4} h_n(√2 x)` with `h_n` the
//! standard Hermite functions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, ComplexMatrix, C64};

/// Ladder and quadrature operators of one oscillator truncated at `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMode {
    pub n_max: usize,
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub x: ComplexMatrix,
    pub p: ComplexMatrix,
    pub n: ComplexMatrix,
}

impl TruncatedMode {
    pub fn new(n_max: usize) -> Self {
        let dim = n_max + 1;
        let a = ComplexMatrix::from_fn(dim, dim, |r, c| {
            if c == r + 1 {
                C64::new(libm::sqrt(c as f64), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let a_dag = a.adjoint();
        let x = a.add_scaled(&a_dag, C64::new(1.0, 0.0)).scale(C64::new(0.5, 0.0));
        // (a − a†)/(2i) = −(i/2)(a − a†)
        let p = a.add_scaled(&a_dag, C64::new(-1.0, 0.0)).scale(C64::new(0.0, -0.5));
        let n = ComplexMatrix::from_diag(&(0..dim).map(|k| C64::new(k as f64, 0.0)).collect::<Vec<_>>());
        Self { n_max, a, a_dag, x, p, n }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// `β a† − β* a`, the anti-Hermitian displacement generator.
pub fn displacement_generator(mode: &TruncatedMode, beta: C64) -> ComplexMatrix {
    mode.a_dag.scale(beta).add_scaled(&mode.a, -beta.conj())
}

/// `D(β) = e^{β a† − β* a}` on the truncated space.
pub fn displacement(mode: &TruncatedMode, beta: C64) -> ComplexMatrix {
    if beta == C64::new(0.0, 0.0) {
        return ComplexMatrix::identity(mode.dim());
    }
    // e^{G} = e^{i·(−iG)} with −iG Hermitian.
    let h = displacement_generator(mode, beta).scale(C64::new(0.0, -1.0));
    expm_i_hermitian(&h, 1.0).expect("displacement generator is anti-Hermitian by construction")
}

/// `ψ_n(x)` in the Wigner-unit convention.
pub fn position_wavefunction(n: usize, x: f64) -> f64 {
    position_wavefunctions(n, x)[n]
}

/// `[ψ_0(x), …, ψ_{n_top}(x)]` by the normalized Hermite recurrence
/// `h_{k+1}(u) = u·√(2/(k+1))·h_k(u) − √(k/(k+1))·h_{k−1}(u)`, `u = √2 x`.
///
/// The recurrence runs on rescaled values with a separate log-magnitude so
/// peaks far outside the Gaussian core of `h_0` do not underflow.
pub fn position_wavefunctions(n_top: usize, x: f64) -> Vec<f64> {
    const RESCALE: f64 = 1e200;
    let u = core::f64::consts::SQRT_2 * x;
    // ψ_n = 2^{1/4} π^{−1/4} e^{−u²/2} · (scaled recurrence value)
    let mut log_scale = 0.25 * libm::log(2.0 / PI) - 0.5 * u * u;
    let mut out = Vec::with_capacity(n_top + 1);
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    for k in 0..=n_top {
        out.push(cur * libm::exp(log_scale));
        let next = if k == 0 {
            libm::sqrt(2.0) * u * cur
        } else {
            let kf = k as f64;
            u * libm::sqrt(2.0 / (kf + 1.0)) * cur - libm::sqrt(kf / (kf + 1.0)) * prev
        };
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += libm::log(RESCALE);
        }
    }
    out
}

/// Finite-energy GKP construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpConfig {
    pub delta: f64,
    pub n_max: usize,
    pub comb_tolerance: f64,
}

impl GkpConfig {
    pub const DEFAULT_COMB_TOLERANCE: f64 = 1e-12;

    pub fn new(delta: f64, n_max: usize) -> Result<Self> {
        Self::with_tolerance(delta, n_max, Self::DEFAULT_COMB_TOLERANCE)
    }

    pub fn with_tolerance(delta: f64, n_max: usize, comb_tolerance: f64) -> Result<Self> {
        let cfg = Self { delta, n_max, comb_tolerance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig("GKP envelope delta must lie in (0, 1]"));
        }
        if !(self.comb_tolerance > 0.0 && self.comb_tolerance <= 1e-6) {
            return Err(Error::InvalidConfig("GKP comb tolerance must lie in (0, 1e-6]"));
        }
        Ok(())
    }
}

/// A normalized codeword together with its truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GkpCodeword {
    /// Unit-norm Fock amplitudes `0..=n_max` (real in this construction).
    pub amplitudes: Vec<f64>,
    /// Norm of the truncated envelope-damped comb before normalization.
    pub raw_norm: f64,
    /// Fraction of the untruncated codeword's squared norm that lies inside
    /// the cutoff. Approaches 1 as the cutoff becomes adequate.
    pub captured_weight: f64,
}

impl GkpCodeword {
    pub fn to_complex(&self) -> Vec<C64> {
        self.amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect()
    }
}

/// Refuse codewords whose truncated comb has essentially no weight.
const MIN_RAW_NORM: f64 = 1e-6;

/// Reference cutoff used for `captured_weight`: the envelope makes the tail
/// beyond it smaller than `e^{−40}` relative to the retained part.
fn reference_cutoff(delta: f64, n_max: usize) -> usize {
    let n_ref = libm::ceil(20.0 / (delta * delta)) as usize;
    n_ref.clamp(n_max, 20_000)
}

/// `e^{−Δ² n} Σ_j ψ_n(√π(2j + logical))` for `n = 0..=n_top`, adding peaks
/// symmetrically outward from the origin until a further pair changes the
/// norm by less than `tol` and lies past the classical turning point.
fn damped_comb(delta: f64, logical: bool, n_top: usize, tol: f64) -> Vec<f64> {
    let sqrt_pi = libm::sqrt(PI);
    let offset = if logical { 1.0 } else { 0.0 };
    let turning = libm::sqrt(n_top as f64 + 0.5) + 1.0;
    let mut sums = vec![0.0f64; n_top + 1];
    let mut norm = 0.0f64;
    for k in 0usize.. {
        let x = sqrt_pi * (2.0 * k as f64 + offset);
        let mut peaks: [Option<f64>; 2] = [Some(x), Some(-x)];
        if !logical && k == 0 {
            peaks[1] = None;
        }
        for xp in peaks.into_iter().flatten() {
            for (s, v) in sums.iter_mut().zip(position_wavefunctions(n_top, xp)) {
                *s += v;
            }
        }
        let new_norm = sums
            .iter()
            .enumerate()
            .map(|(n, s)| {
                let d = libm::exp(-delta * delta * n as f64) * s;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let increment = (new_norm - norm).abs();
        norm = new_norm;
        if k > 0 && increment < tol && x > turning {
            break;
        }
    }
    sums.iter()
        .enumerate()
        .map(|(n, s)| libm::exp(-delta * delta * n as f64) * s)
        .collect()
}

/// Finite-energy codeword `|logical⟩_GKP` in the Fock basis, normalized.
pub fn gkp_codeword(cfg: &GkpConfig, logical: bool) -> Result<GkpCodeword> {
    cfg.validate()?;
    let comps = damped_comb(cfg.delta, logical, cfg.n_max, cfg.comb_tolerance);
    let raw_sq: f64 = comps.iter().map(|c| c * c).sum();
    let raw_norm = libm::sqrt(raw_sq);
    if raw_norm < MIN_RAW_NORM {
        return Err(Error::CutoffTooSmall { norm: raw_norm });
    }
    let n_ref = reference_cutoff(cfg.delta, cfg.n_max);
    let captured_weight = if n_ref == cfg.n_max {
        1.0
    } else {
        let full = damped_comb(cfg.delta, logical, n_ref, cfg.comb_tolerance);
        let full_sq: f64 = full.iter().map(|c| c * c).sum();
        (raw_sq / full_sq).min(1.0)
    };
    Ok(GkpCodeword {
        amplitudes: comps.iter().map(|c| c / raw_norm).collect(),
        raw_norm,
        captured_weight,
    })
}

/// `|+⟩_GKP ∝ |0⟩_GKP + |1⟩_GKP`, re-normalized after the sum because the
/// finite-energy codewords are only approximately orthogonal.
pub fn gkp_plus(cfg: &GkpConfig) -> Result<Vec<f64>> {
    let zero = gkp_codeword(cfg, false)?;
    let one = gkp_codeword(cfg, true)?;
    let sum: Vec<f64> = zero.amplitudes.iter().zip(&one.amplitudes).map(|(a, b)| a + b).collect();
    let norm = libm::sqrt(sum.iter().map(|v| v * v).sum::<f64>());
    Ok(sum.into_iter().map(|v| v / norm).collect())
}
