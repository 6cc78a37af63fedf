//! Dense complex linear algebra and the hybrid state vector.
//!
//! Everything here works on small dense operators (at most a few dozen rows)
//! and a single global amplitude vector. Local gates are applied by a strided
//! kernel instead of forming the Kronecker-expanded matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::bits::Bitstring;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// `e^{iθ}` via `libm`. The `num-complex` methods switch to `std` math when
/// any crate in the build enables it, which changes last-bit results.
pub fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}

/// `|z|` via `libm`; see [`cis`].
pub fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Numerical tolerances used by contract checks and property tests.
pub mod tol {
    /// `‖U†U − I‖_max` bound for a matrix treated as unitary.
    pub const UNITARY: f64 = 1e-10;
    /// `‖H − H†‖_max` bound accepted by the Hermitian exponential.
    pub const HERMITIAN: f64 = 1e-10;
    /// Total norm drift allowed over a full circuit.
    pub const NORM_DRIFT: f64 = 1e-8;
}

/// Largest dimension `kron` will produce.
pub const MAX_KRON_DIM: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    /// Entrywise `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| modulus(a - b)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&a| modulus(a)).fold(0.0, f64::max)
    }

    /// `‖H − H†‖_max`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max(modulus(self[(r, c)] - self[(c, r)].conj()));
            }
        }
        worst
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let dim = rows.max(cols);
    if dim > MAX_KRON_DIM {
        return Err(Error::DimensionOverflow { dim, max: MAX_KRON_DIM });
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    }))
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues and a unitary whose columns are the
/// matching eigenvectors. Input Hermiticity is not checked here.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.rows;
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = modulus(apq);
                if g <= 1e-300 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * libm::atan2(2.0 * g, aqq - app);
                let (s, c) = (libm::sin(theta), libm::cos(theta));
                let pc = phase.conj();
                // A ← A·J with J = [[c, s], [−s·e^{−iα}, c·e^{−iα}]] on (p, q).
                for r in 0..n {
                    let xp = a[(r, p)];
                    let xq = a[(r, q)];
                    a[(r, p)] = xp * c - xq * pc * s;
                    a[(r, q)] = xp * s + xq * pc * c;
                }
                // A ← J†·A.
                for col in 0..n {
                    let xp = a[(p, col)];
                    let xq = a[(q, col)];
                    a[(p, col)] = xp * c - xq * phase * s;
                    a[(q, col)] = xp * s + xq * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for r in 0..n {
                    let xp = v[(r, p)];
                    let xq = v[(r, q)];
                    v[(r, p)] = xp * c - xq * pc * s;
                    v[(r, q)] = xp * s + xq * pc * c;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// `e^{i·scale·h}` for Hermitian `h`, built from its eigendecomposition so the
/// result is unitary to rounding error.
pub fn expm_i_hermitian(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::SizeMismatch { expected: h.rows, found: h.cols });
    }
    let deviation = h.hermiticity_error();
    if deviation > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.rows;
    if scale == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let (vals, vecs) = hermitian_eigen(h);
    let phases: Vec<C64> = vals.iter().map(|&l| cis(scale * l)).collect();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n).map(|k| vecs[(r, k)] * phases[k] * vecs[(c, k)].conj()).sum()
    }))
}

/// Joint amplitude vector of `n_pairs` oscillator–qubit pairs.
///
/// Layout: pair 0 is the slowest-varying digit; within a pair the oscillator
/// level varies slower than the qubit bit, so the pair digit is
/// `2·level + bit`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    n_pairs: usize,
    osc_dim: usize,
    amplitudes: Vec<C64>,
}

impl HybridState {
    pub fn new(n_pairs: usize, osc_dim: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_pairs == 0 || n_pairs > Bitstring::MAX_LEN || osc_dim == 0 {
            return Err(Error::InvalidConfig("state needs at least one pair and one oscillator level"));
        }
        let expected = (2 * osc_dim).checked_pow(n_pairs as u32).ok_or(Error::DimensionOverflow {
            dim: usize::MAX,
            max: usize::MAX,
        })?;
        if amplitudes.len() != expected {
            return Err(Error::SizeMismatch { expected, found: amplitudes.len() });
        }
        Ok(Self { n_pairs, osc_dim, amplitudes })
    }

    /// `|pair⟩^{⊗ n_pairs}` for a single-pair vector of length `2·osc_dim`.
    pub fn product(pair_state: &[C64], n_pairs: usize) -> Result<Self> {
        if !pair_state.len().is_multiple_of(2) || pair_state.is_empty() {
            return Err(Error::SizeMismatch { expected: 2, found: pair_state.len() });
        }
        let mut amps = vec![ONE];
        for _ in 0..n_pairs {
            let mut next = Vec::with_capacity(amps.len() * pair_state.len());
            for &a in &amps {
                next.extend(pair_state.iter().map(|&b| a * b));
            }
            amps = next;
        }
        Self::new(n_pairs, pair_state.len() / 2, amps)
    }

    /// Computational basis state from per-pair `(level, bit)` digits.
    pub fn basis(n_pairs: usize, osc_dim: usize, digits: &[(usize, bool)]) -> Result<Self> {
        if digits.len() != n_pairs {
            return Err(Error::SizeMismatch { expected: n_pairs, found: digits.len() });
        }
        let m = 2 * osc_dim;
        let mut index = 0usize;
        for &(level, bit) in digits {
            if level >= osc_dim {
                return Err(Error::SizeMismatch { expected: osc_dim, found: level + 1 });
            }
            index = index * m + 2 * level + bit as usize;
        }
        let mut amps = vec![ZERO; m.pow(n_pairs as u32)];
        amps[index] = ONE;
        Self::new(n_pairs, osc_dim, amps)
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn osc_dim(&self) -> usize {
        self.osc_dim
    }

    pub fn pair_dim(&self) -> usize {
        2 * self.osc_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a `pair_dim × pair_dim` matrix to one pair, identity elsewhere.
    pub fn apply_pair_unitary(&mut self, pair: usize, u: &ComplexMatrix) -> Result<()> {
        let mut scratch = Vec::new();
        self.apply_pair_unitary_with(pair, u, &mut scratch)
    }

    /// As [`apply_pair_unitary`](Self::apply_pair_unitary), reusing `scratch`.
    pub fn apply_pair_unitary_with(
        &mut self,
        pair: usize,
        u: &ComplexMatrix,
        scratch: &mut Vec<C64>,
    ) -> Result<()> {
        let m = self.pair_dim();
        if pair >= self.n_pairs {
            return Err(Error::SizeMismatch { expected: self.n_pairs, found: pair + 1 });
        }
        if u.rows != m || u.cols != m {
            return Err(Error::SizeMismatch { expected: m, found: u.rows.max(u.cols) });
        }
        let inner = m.pow((self.n_pairs - 1 - pair) as u32);
        apply_axis(&mut self.amplitudes, scratch, m, inner, &u.data);
        Ok(())
    }

    /// Multiplies each amplitude by `phases[z]`, where `z` is the qubit
    /// bitstring of its index. `phases` has length `2^n_pairs`.
    pub fn apply_qubit_phases(&mut self, phases: &[C64]) -> Result<()> {
        if phases.len() != 1 << self.n_pairs {
            return Err(Error::SizeMismatch { expected: 1 << self.n_pairs, found: phases.len() });
        }
        let m = self.pair_dim();
        for_each_qubit_block(&mut self.amplitudes, m, self.n_pairs, 0, &mut |chunk, z| {
            let (p0, p1) = (phases[2 * z], phases[2 * z + 1]);
            for pairs in chunk.chunks_exact_mut(2) {
                pairs[0] *= p0;
                pairs[1] *= p1;
            }
        });
        Ok(())
    }

    /// Marginal probability of each qubit bitstring, summing out oscillators.
    pub fn qubit_probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << self.n_pairs];
        let m = self.pair_dim();
        let mut amps = self.amplitudes.clone();
        for_each_qubit_block(&mut amps, m, self.n_pairs, 0, &mut |chunk, z| {
            for pairs in chunk.chunks_exact(2) {
                probs[2 * z] += pairs[0].norm_sqr();
                probs[2 * z + 1] += pairs[1].norm_sqr();
            }
        });
        probs
    }
}

/// Visits contiguous last-pair blocks of length `m`, passing the qubit prefix
/// formed by all pairs before the last one.
fn for_each_qubit_block(
    amps: &mut [C64],
    m: usize,
    remaining: usize,
    prefix: usize,
    f: &mut impl FnMut(&mut [C64], usize),
) {
    if remaining == 1 {
        f(amps, prefix);
        return;
    }
    let stride = amps.len() / m;
    for (digit, sub) in amps.chunks_exact_mut(stride).enumerate() {
        for_each_qubit_block(sub, m, remaining - 1, (prefix << 1) | (digit & 1), f);
    }
}

/// `amps ← (I_left ⊗ U ⊗ I_inner) amps` for an `m × m` row-major `u`.
pub(crate) fn apply_axis(amps: &mut [C64], scratch: &mut Vec<C64>, m: usize, inner: usize, u: &[C64]) {
    let block = m * inner;
    scratch.clear();
    scratch.resize(block, ZERO);
    for chunk in amps.chunks_exact_mut(block) {
        scratch.copy_from_slice(chunk);
        if inner == 1 {
            for (r, out) in chunk.iter_mut().enumerate() {
                let row = &u[r * m..(r + 1) * m];
                *out = row.iter().zip(scratch.iter()).map(|(&a, &b)| a * b).sum();
            }
            continue;
        }
        for r in 0..m {
            let out = &mut chunk[r * inner..(r + 1) * inner];
            out.fill(ZERO);
            for c in 0..m {
                let uc = u[r * m + c];
                if uc == ZERO {
                    continue;
                }
                let src = &scratch[c * inner..(c + 1) * inner];
                for (o, &s) in out.iter_mut().zip(src) {
                    *o += uc * s;
                }
            }
        }
    }
}

/// Pure form of [`HybridState::apply_pair_unitary`].
pub fn apply_local_pair_unitary(state: &HybridState, pair: usize, u: &ComplexMatrix) -> Result<HybridState> {
    let mut out = state.clone();
    out.apply_pair_unitary(pair, u)?;
    Ok(out)
}

/// Multiplies every amplitude by `phase_fn` of its qubit bitstring.
pub fn apply_qubit_diagonal(state: &HybridState, phase_fn: impl Fn(Bitstring) -> C64) -> HybridState {
    let n = state.n_pairs;
    let phases: Vec<C64> = Bitstring::all(n).map(|z| {
        let p = phase_fn(z);
        debug_assert!((modulus(p) - 1.0).abs() < 1e-12, "phase_fn must return unit-modulus values");
        p
    }).collect();
    let mut out = state.clone();
    out.apply_qubit_phases(&phases).expect("phase table sized from the state");
    out
}
