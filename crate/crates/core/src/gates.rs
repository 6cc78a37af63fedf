//! Phase-space instruction set: qubit rotations, conditional displacements,
//! logical ZZ rotations and the GKP logical readout map.
//!
//! Products of operators compose by left multiplication: in `A·B` the factor
//! `B` acts on the state first. Single-pair operators act on
//! `oscillator ⊗ qubit` with the oscillator index slower.

use alloc::vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{displacement, TruncatedMode};
use crate::linalg::{cis, expm_i_hermitian, kron, ComplexMatrix, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[ONE, -ONE])
}

/// Unit rotation axis on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAxis {
    n_x: f64,
    n_y: f64,
    n_z: f64,
}

impl QubitAxis {
    pub const X: Self = Self { n_x: 1.0, n_y: 0.0, n_z: 0.0 };
    pub const Y: Self = Self { n_x: 0.0, n_y: 1.0, n_z: 0.0 };
    pub const Z: Self = Self { n_x: 0.0, n_y: 0.0, n_z: 1.0 };

    pub fn new(n_x: f64, n_y: f64, n_z: f64) -> Result<Self> {
        let norm_sq = n_x * n_x + n_y * n_y + n_z * n_z;
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("rotation axis must be a unit vector"));
        }
        Ok(Self { n_x, n_y, n_z })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.n_x, self.n_y, self.n_z]
    }

    /// `n̂·σ⃗`.
    pub fn pauli(&self) -> ComplexMatrix {
        pauli_x()
            .scale(C64::new(self.n_x, 0.0))
            .add_scaled(&pauli_y(), C64::new(self.n_y, 0.0))
            .add_scaled(&pauli_z(), C64::new(self.n_z, 0.0))
    }
}

/// Which Pauli operator controls a conditional displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdAxisMode {
    /// `σ = Z`: displacement sign set by the computational basis.
    ZControl,
    /// `σ_φ = cos φ X + sin φ Y`.
    XyPlane(f64),
}

impl CdAxisMode {
    pub fn pauli(&self) -> ComplexMatrix {
        match *self {
            CdAxisMode::ZControl => pauli_z(),
            CdAxisMode::XyPlane(phi) => pauli_x()
                .scale(C64::new(libm::cos(phi), 0.0))
                .add_scaled(&pauli_y(), C64::new(libm::sin(phi), 0.0)),
        }
    }
}

/// `R_n̂(θ) = e^{−iθ/2 n̂·σ⃗} = cos(θ/2) I − i sin(θ/2) n̂·σ⃗`.
pub fn qubit_rotation(axis: QubitAxis, theta: f64) -> ComplexMatrix {
    let (s, c) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
    ComplexMatrix::identity(2).scale(C64::new(c, 0.0)).add_scaled(&axis.pauli(), C64::new(0.0, -s))
}

/// `R_X(θ)`.
pub fn rx(theta: f64) -> ComplexMatrix {
    qubit_rotation(QubitAxis::X, theta)
}

/// `CD(β, σ) = e^{(β a† − β* a) ⊗ σ} = D(β) ⊗ P₊ + D(−β) ⊗ P₋`, with `P±`
/// the projectors onto the ±1 eigenspaces of `σ`.
pub fn conditional_displacement(mode: &TruncatedMode, beta: C64, axis: CdAxisMode) -> ComplexMatrix {
    let dim = 2 * mode.dim();
    if beta == ZERO {
        return ComplexMatrix::identity(dim);
    }
    let d_plus = displacement(mode, beta);
    let d_minus = d_plus.adjoint();
    let sigma = axis.pauli();
    let id2 = ComplexMatrix::identity(2);
    let p_plus = id2.add_scaled(&sigma, ONE).scale(C64::new(0.5, 0.0));
    let p_minus = id2.add_scaled(&sigma, -ONE).scale(C64::new(0.5, 0.0));
    let plus = kron(&d_plus, &p_plus).expect("pair operator fits the kron limit");
    let minus = kron(&d_minus, &p_minus).expect("pair operator fits the kron limit");
    plus.add_scaled(&minus, ONE)
}

/// `R_ZZ(θ) = e^{−iθ/2 Z⊗Z}`.
pub fn rzz(theta: f64) -> ComplexMatrix {
    let minus = cis(-theta / 2.0);
    let plus = cis(theta / 2.0);
    ComplexMatrix::from_diag(&[minus, plus, plus, minus])
}

/// `e^{i(√π/2) x̂⊗X}`: rotates the ancilla by the oscillator position.
pub fn position_readout(mode: &TruncatedMode) -> ComplexMatrix {
    let gen = kron(&mode.x, &pauli_x()).expect("pair operator fits the kron limit");
    expm_i_hermitian(&gen, libm::sqrt(PI) / 2.0).expect("x⊗X is Hermitian")
}

/// `e^{i√π Δ² p̂⊗Y}`: finite-envelope precorrection of the readout.
pub fn readout_precorrection(mode: &TruncatedMode, delta: f64) -> ComplexMatrix {
    let gen = kron(&mode.p, &pauli_y()).expect("pair operator fits the kron limit");
    expm_i_hermitian(&gen, libm::sqrt(PI) * delta * delta).expect("p⊗Y is Hermitian")
}

/// Logical readout map `E_x(√π/2, Δ)`: the precorrection acts on the state
/// first, then the position-controlled ancilla rotation.
pub fn ex_readout(mode: &TruncatedMode, delta: f64) -> ComplexMatrix {
    let rotation = position_readout(mode);
    if delta == 0.0 {
        return rotation;
    }
    rotation.matmul(&readout_precorrection(mode, delta))
}
