//! The hybrid QAOA circuit: GKP-encoded initial state, per-layer readout,
//! cost phases, inverse readout and non-Abelian mixer, then a final readout
//! and an exact ancilla distribution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::bits::Bitstring;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::fock::{gkp_plus, GkpConfig, TruncatedMode};
use crate::gates::{conditional_displacement, ex_readout, rx, CdAxisMode};
use crate::graph::GraphInstance;
use crate::linalg::{apply_axis, cis, kron, ComplexMatrix, HybridState, C64};

/// How the mixer's conditional displacements choose their control axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixerAxes {
    /// Every CD is controlled by `Z`; no phase parameters.
    ZControl,
    /// Every CD is controlled by `σ_φ` with its own trainable `φ`.
    XyPlane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzConfig {
    pub n_pairs: usize,
    pub n_max: usize,
    pub delta: f64,
    pub qaoa_depth: usize,
    pub mixer_depth: usize,
    pub cd_axis: MixerAxes,
}

impl AnsatzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qaoa_depth == 0 {
            return Err(Error::InvalidConfig("QAOA depth must be at least 1"));
        }
        if self.n_pairs == 0 || self.n_pairs > Bitstring::MAX_LEN {
            return Err(Error::InvalidConfig("need between 1 and 31 oscillator-qubit pairs"));
        }
        self.gkp()?;
        Ok(())
    }

    pub fn gkp(&self) -> Result<GkpConfig> {
        GkpConfig::new(self.delta, self.n_max)
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout { qaoa_depth: self.qaoa_depth, mixer_depth: self.mixer_depth, axes: self.cd_axis }
    }

    fn check_graph(&self, g: &GraphInstance) -> Result<()> {
        if g.n_vertices() != self.n_pairs {
            return Err(Error::SizeMismatch { expected: self.n_pairs, found: g.n_vertices() });
        }
        Ok(())
    }
}

/// Role of one entry of the flat parameter vector; sets its initialization range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamClass {
    /// Cost angle `γ_k`.
    Gamma,
    /// Qubit rotation angles `β_0`, `θ_x`, `θ_p`.
    Angle,
    /// CD amplitudes `β_x`, `β_p`.
    CdAmplitude,
    /// CD axis phases `φ_x`, `φ_p`.
    CdPhase,
}

/// Flat layout of the trainable parameters.
///
/// Per layer: `[γ, β₀, then per mixer block: β_x, (φ_x), θ_x, β_p, (φ_p), θ_p]`,
/// the phases present only for [`MixerAxes::XyPlane`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLayout {
    pub qaoa_depth: usize,
    pub mixer_depth: usize,
    pub axes: MixerAxes,
}

impl ParamLayout {
    fn block_len(&self) -> usize {
        match self.axes {
            MixerAxes::ZControl => 4,
            MixerAxes::XyPlane => 6,
        }
    }

    pub fn layer_len(&self) -> usize {
        2 + self.block_len() * self.mixer_depth
    }

    pub fn mixer_len(&self) -> usize {
        self.layer_len() - 1
    }

    pub fn len(&self) -> usize {
        self.qaoa_depth * self.layer_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn classes(&self) -> Vec<ParamClass> {
        let block: &[ParamClass] = match self.axes {
            MixerAxes::ZControl => &[ParamClass::CdAmplitude, ParamClass::Angle, ParamClass::CdAmplitude, ParamClass::Angle],
            MixerAxes::XyPlane => &[
                ParamClass::CdAmplitude,
                ParamClass::CdPhase,
                ParamClass::Angle,
                ParamClass::CdAmplitude,
                ParamClass::CdPhase,
                ParamClass::Angle,
            ],
        };
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.qaoa_depth {
            out.push(ParamClass::Gamma);
            out.push(ParamClass::Angle);
            for _ in 0..self.mixer_depth {
                out.extend_from_slice(block);
            }
        }
        out
    }

    /// Human-readable names, e.g. `gamma[1]`, `beta_x[1][2]` (layer, block).
    pub fn names(&self) -> Vec<alloc::string::String> {
        use alloc::format;
        let mut out = Vec::with_capacity(self.len());
        for k in 1..=self.qaoa_depth {
            out.push(format!("gamma[{k}]"));
            out.push(format!("beta0[{k}]"));
            for l in 1..=self.mixer_depth {
                let fields: &[&str] = match self.axes {
                    MixerAxes::ZControl => &["beta_x", "theta_x", "beta_p", "theta_p"],
                    MixerAxes::XyPlane => &["beta_x", "phi_x", "theta_x", "beta_p", "phi_p", "theta_p"],
                };
                out.extend(fields.iter().map(|f| format!("{f}[{k}][{l}]")));
            }
        }
        out
    }

    pub fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.len() {
            return Err(Error::LayoutMismatch { expected: self.len(), found: params.len() });
        }
        Ok(())
    }

    /// Splits a flat vector into per-layer parameters.
    pub fn layers(&self, params: &[f64]) -> Result<Vec<LayerParams>> {
        self.check(params)?;
        params
            .chunks_exact(self.layer_len())
            .map(|chunk| {
                Ok(LayerParams { gamma: chunk[0], mixer: MixerParams::parse(&chunk[1..], self.mixer_depth, self.axes)? })
            })
            .collect()
    }
}

/// One `CD(iβ_x) R_X(2θ_x) CD(β_p) R_X(2θ_p)` block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerBlock {
    pub beta_x: f64,
    pub phi_x: f64,
    pub theta_x: f64,
    pub beta_p: f64,
    pub phi_p: f64,
    pub theta_p: f64,
}

/// The per-layer mixer parameters `Θ_k`, shared by every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MixerParams {
    pub beta0: f64,
    pub blocks: Vec<MixerBlock>,
    pub axes: MixerAxes,
}

impl MixerParams {
    /// Parses `[β₀, blocks…]` for the given depth and axis mode.
    pub fn parse(theta: &[f64], depth: usize, axes: MixerAxes) -> Result<Self> {
        let layout = ParamLayout { qaoa_depth: 1, mixer_depth: depth, axes };
        if theta.len() != layout.mixer_len() {
            return Err(Error::LayoutMismatch { expected: layout.mixer_len(), found: theta.len() });
        }
        let blocks = theta[1..]
            .chunks_exact(layout.block_len())
            .map(|b| match axes {
                MixerAxes::ZControl => {
                    MixerBlock { beta_x: b[0], phi_x: 0.0, theta_x: b[1], beta_p: b[2], phi_p: 0.0, theta_p: b[3] }
                }
                MixerAxes::XyPlane => {
                    MixerBlock { beta_x: b[0], phi_x: b[1], theta_x: b[2], beta_p: b[3], phi_p: b[4], theta_p: b[5] }
                }
            })
            .collect();
        Ok(Self { beta0: theta[0], blocks, axes })
    }

    fn axis(&self, phi: f64) -> CdAxisMode {
        match self.axes {
            MixerAxes::ZControl => CdAxisMode::ZControl,
            MixerAxes::XyPlane => CdAxisMode::XyPlane(phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub gamma: f64,
    pub mixer: MixerParams,
}

/// `I_osc ⊗ R_X(θ)`.
fn qubit_rx(osc_dim: usize, theta: f64) -> ComplexMatrix {
    kron(&ComplexMatrix::identity(osc_dim), &rx(theta)).expect("pair operator fits the kron limit")
}

/// Local mixer `R_X(2β₀) ∏_l [CD(iβ_x, σ) R_X(2θ_x) CD(β_p, σ) R_X(2θ_p)]`
/// with `l = 1` leftmost, so `R_X(2β₀)` acts last.
pub fn mixer_operator(mode: &TruncatedMode, params: &MixerParams) -> ComplexMatrix {
    let osc_dim = mode.dim();
    let mut u = qubit_rx(osc_dim, 2.0 * params.beta0);
    for b in &params.blocks {
        let cd_x = conditional_displacement(mode, C64::new(0.0, b.beta_x), params.axis(b.phi_x));
        let cd_p = conditional_displacement(mode, C64::new(b.beta_p, 0.0), params.axis(b.phi_p));
        u = u
            .matmul(&cd_x)
            .matmul(&qubit_rx(osc_dim, 2.0 * b.theta_x))
            .matmul(&cd_p)
            .matmul(&qubit_rx(osc_dim, 2.0 * b.theta_p));
    }
    u
}

/// Single-pair mixer for the layer parameters `theta_k = [β₀, blocks…]`.
pub fn mixer_unitary(cfg: &AnsatzConfig, theta_k: &[f64]) -> Result<ComplexMatrix> {
    let params = MixerParams::parse(theta_k, cfg.mixer_depth, cfg.cd_axis)?;
    Ok(mixer_operator(&TruncatedMode::new(cfg.n_max), &params))
}

/// `⊗_i (|+⟩_GKP ⊗ |0⟩)`.
pub fn initial_state(cfg: &AnsatzConfig) -> Result<HybridState> {
    HybridState::product(&initial_pair_state(cfg)?, cfg.n_pairs)
}

fn initial_pair_state(cfg: &AnsatzConfig) -> Result<Vec<C64>> {
    cfg.validate()?;
    let plus = gkp_plus(&cfg.gkp()?)?;
    Ok(plus.iter().flat_map(|&a| [C64::new(a, 0.0), C64::new(0.0, 0.0)]).collect())
}

/// `z ↦ e^{−iγC(z)}`. Equals `∏_{(i,j)∈E} R_ZZ^{(i,j)}(−γ)` up to the global
/// phase `e^{iγ|E|/2}`.
pub fn cost_unitary_phases(g: &GraphInstance, gamma: f64) -> impl Fn(Bitstring) -> C64 {
    let table = cost_phase_table(&g.cut_table(), gamma);
    move |z: Bitstring| table[z.value() as usize]
}

/// Phase table `e^{−iγC(z)}` for a precomputed cut table.
pub fn cost_phase_table(cuts: &[u32], gamma: f64) -> Vec<C64> {
    cuts.iter().map(|&c| cis(-gamma * c as f64)).collect()
}

/// Exact ancilla marginal of a hybrid state.
pub fn output_distribution(state: &HybridState) -> Distribution {
    Distribution::new(state.n_pairs(), state.qubit_probabilities()).expect("distribution sized from state")
}

pub fn sample_bitstrings(dist: &Distribution, shots: usize, seed: u64) -> Result<Vec<Bitstring>> {
    dist.sample(shots, seed)
}

/// A configured circuit for one graph, with the readout map, its adjoint, the
/// cut table and the read-out initial state precomputed.
#[derive(Debug, Clone)]
pub struct Ansatz {
    cfg: AnsatzConfig,
    mode: TruncatedMode,
    readout: ComplexMatrix,
    readout_dag: ComplexMatrix,
    pair_state: Vec<C64>,
    initial: HybridState,
    prepared: HybridState,
    cuts: Vec<u32>,
}

impl Ansatz {
    pub fn new(cfg: AnsatzConfig, g: &GraphInstance) -> Result<Self> {
        cfg.validate()?;
        cfg.check_graph(g)?;
        let mode = TruncatedMode::new(cfg.n_max);
        let readout = ex_readout(&mode, cfg.delta);
        let readout_dag = readout.adjoint();
        let pair_state = initial_pair_state(&cfg)?;
        let initial = HybridState::product(&pair_state, cfg.n_pairs)?;
        let mut prepared = initial.clone();
        let mut scratch = Vec::new();
        for pair in 0..cfg.n_pairs {
            prepared.apply_pair_unitary_with(pair, &readout, &mut scratch)?;
        }
        Ok(Self { cfg, mode, readout, readout_dag, pair_state, initial, prepared, cuts: g.cut_table() })
    }

    pub fn config(&self) -> &AnsatzConfig {
        &self.cfg
    }

    pub fn layout(&self) -> ParamLayout {
        self.cfg.layout()
    }

    pub fn mode(&self) -> &TruncatedMode {
        &self.mode
    }

    pub fn readout(&self) -> &ComplexMatrix {
        &self.readout
    }

    pub fn initial_state(&self) -> &HybridState {
        &self.initial
    }

    pub fn cuts(&self) -> &[u32] {
        &self.cuts
    }

    fn apply_all_pairs(&self, state: &mut HybridState, u: &ComplexMatrix, scratch: &mut Vec<C64>) -> Result<()> {
        for pair in 0..self.cfg.n_pairs {
            state.apply_pair_unitary_with(pair, u, scratch)?;
        }
        Ok(())
    }

    /// One layer applied gate by gate: `E_x`, cost phases, `E_x†`, mixer.
    pub fn apply_layer(&self, state: &mut HybridState, layer: &LayerParams) -> Result<()> {
        let mut scratch = Vec::new();
        self.apply_all_pairs(state, &self.readout, &mut scratch)?;
        state.apply_qubit_phases(&cost_phase_table(&self.cuts, layer.gamma))?;
        self.apply_all_pairs(state, &self.readout_dag, &mut scratch)?;
        self.apply_all_pairs(state, &mixer_operator(&self.mode, &layer.mixer), &mut scratch)
    }

    /// The final per-pair readout before measurement.
    pub fn apply_final_readout(&self, state: &mut HybridState) -> Result<()> {
        let mut scratch = Vec::new();
        self.apply_all_pairs(state, &self.readout, &mut scratch)
    }

    /// Gate-by-gate evolution exactly as the circuit is written.
    pub fn evolve_stepwise(&self, params: &[f64]) -> Result<HybridState> {
        let layers = self.layout().layers(params)?;
        let mut state = self.initial.clone();
        for layer in &layers {
            self.apply_layer(&mut state, layer)?;
        }
        self.apply_final_readout(&mut state)?;
        Ok(state)
    }

    /// Final state. Each mixer is conjugated into `E_x U_M E_x†`, which
    /// absorbs the next layer's (or the final) readout, and the first readout
    /// is precomputed, so a layer costs one phase pass and one pair pass.
    pub fn evolve(&self, params: &[f64]) -> Result<HybridState> {
        let layers = self.layout().layers(params)?;
        let mut state = self.prepared.clone();
        let mut scratch = Vec::new();
        for layer in &layers {
            state.apply_qubit_phases(&cost_phase_table(&self.cuts, layer.gamma))?;
            let conjugated = self
                .readout
                .matmul(&mixer_operator(&self.mode, &layer.mixer))
                .matmul(&self.readout_dag);
            self.apply_all_pairs(&mut state, &conjugated, &mut scratch)?;
        }
        Ok(state)
    }

    /// Exact ancilla distribution of the final state.
    ///
    /// While `2^P` does not exceed the pair dimension this is computed in
    /// factored form and never builds the full state vector.
    pub fn distribution(&self, params: &[f64]) -> Result<Distribution> {
        let layers = self.layout().layers(params)?;
        let m = 2 * self.mode.dim();
        let fits = layers.len() < usize::BITS as usize && (1usize << layers.len()) <= m;
        if !fits {
            return Ok(output_distribution(&self.evolve(params)?));
        }
        let mut state = Factored::product(self.readout.mul_vec(&self.pair_state), self.cfg.n_pairs);
        for layer in &layers {
            state.apply_phases(&cost_phase_table(&self.cuts, layer.gamma));
            let conjugated = self
                .readout
                .matmul(&mixer_operator(&self.mode, &layer.mixer))
                .matmul(&self.readout_dag);
            state.apply_pair_operator(&conjugated);
        }
        Distribution::new(self.cfg.n_pairs, state.probabilities())
    }

    /// `⟨H_C⟩` of the final distribution.
    pub fn expected_cut(&self, params: &[f64]) -> Result<f64> {
        let dist = self.distribution(params)?;
        Ok(dist.probs().iter().zip(&self.cuts).map(|(p, &c)| p * c as f64).sum())
    }
}

/// `Σ_s c_s ⊗_i b_{s_i}`: a list of `rank` pair vectors shared by all pairs
/// and a coefficient tensor with `rank^n` entries, pair 0 slowest.
struct Factored {
    n_pairs: usize,
    basis: Vec<Vec<C64>>,
    coeffs: Vec<C64>,
}

impl Factored {
    fn product(pair: Vec<C64>, n_pairs: usize) -> Self {
        Self { n_pairs, basis: vec![pair], coeffs: vec![C64::new(1.0, 0.0)] }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Splits every basis vector into its qubit-0 and qubit-1 parts so the
    /// qubit-diagonal phase becomes a coefficient rescaling.
    fn apply_phases(&mut self, phases: &[C64]) {
        let (n, r) = (self.n_pairs, self.rank());
        let zero = C64::new(0.0, 0.0);
        let basis = self
            .basis
            .iter()
            .flat_map(|b| {
                [0, 1].map(|q| b.iter().enumerate().map(|(k, &a)| if k % 2 == q { a } else { zero }).collect())
            })
            .collect();
        let r2 = 2 * r;
        let total = r2.pow(n as u32);
        let mut coeffs = Vec::with_capacity(total);
        for idx in 0..total {
            let (mut rest, mut place) = (idx, total / r2);
            let (mut old, mut z) = (0, 0);
            for _ in 0..n {
                let digit = rest / place;
                rest %= place;
                place /= r2.max(1);
                old = old * r + digit / 2;
                z = (z << 1) | (digit % 2);
            }
            coeffs.push(self.coeffs[old] * phases[z]);
        }
        self.basis = basis;
        self.coeffs = coeffs;
    }

    fn apply_pair_operator(&mut self, u: &ComplexMatrix) {
        for b in &mut self.basis {
            *b = u.mul_vec(b);
        }
    }

    /// `p(z) = c† (⊗_i G^{z_i}) c` with qubit-resolved Gram matrices
    /// `G^q_{st} = ⟨b_s|(I ⊗ |q⟩⟨q|)|b_t⟩`.
    fn probabilities(&self) -> Vec<f64> {
        let (n, r) = (self.n_pairs, self.rank());
        let gram = [0, 1].map(|q| {
            ComplexMatrix::from_fn(r, r, |s, t| {
                self.basis[s].iter().zip(&self.basis[t]).skip(q).step_by(2).map(|(a, b)| a.conj() * b).sum()
            })
        });
        let mut scratch = Vec::new();
        (0..1usize << n)
            .map(|z| {
                let mut y = self.coeffs.clone();
                for i in 0..n {
                    let q = (z >> (n - 1 - i)) & 1;
                    apply_axis(&mut y, &mut scratch, r, r.pow((n - 1 - i) as u32), gram[q].as_slice());
                }
                let p: f64 = self.coeffs.iter().zip(&y).map(|(c, v)| (c.conj() * v).re).sum();
                p.max(0.0)
            })
            .collect()
    }
}

/// Convenience wrapper around [`Ansatz::evolve`].
pub fn evolve(cfg: &AnsatzConfig, g: &GraphInstance, params: &[f64]) -> Result<HybridState> {
    cfg.layout().check(params)?;
    Ansatz::new(*cfg, g)?.evolve(params)
}

/// Qubit-only QAOA with the transverse-field mixer, from `|+⟩^{⊗n}`. Used as
/// a sanity reference; `betas[k]` enters as `e^{−iβ_k Σ X_i}`.
pub fn transverse_field_qaoa(g: &GraphInstance, gammas: &[f64], betas: &[f64]) -> Result<Distribution> {
    if gammas.len() != betas.len() {
        return Err(Error::LayoutMismatch { expected: gammas.len(), found: betas.len() });
    }
    let n = g.n_vertices();
    let dim = 1usize << n;
    let cuts = g.cut_table();
    let mut amps = vec![C64::new(1.0 / libm::sqrt(dim as f64), 0.0); dim];
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        for (a, p) in amps.iter_mut().zip(cost_phase_table(&cuts, gamma)) {
            *a *= p;
        }
        let (c, s) = (libm::cos(beta), libm::sin(beta));
        for q in 0..n {
            let bit = 1usize << q;
            for idx in 0..dim {
                if idx & bit == 0 {
                    let (a0, a1) = (amps[idx], amps[idx | bit]);
                    amps[idx] = a0 * c + a1 * C64::new(0.0, -s);
                    amps[idx | bit] = a0 * C64::new(0.0, -s) + a1 * c;
                }
            }
        }
    }
    Distribution::new(n, amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Natural initialization scale of CD amplitudes: half the GKP lattice step.
pub fn cd_amplitude_scale() -> f64 {
    libm::sqrt(PI) / 2.0
}
