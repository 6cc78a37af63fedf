//! Derivative-free minimization with a linear model on a simplex and a
//! shrinking trust region, plus seeded multistart.
//!
//! The local method follows the unconstrained core of COBYLA: `n + 1`
//! vertices define a linear interpolant, steps of length `ρ` go downhill on
//! it, poorly shaped simplices are repaired before `ρ` is reduced, and the
//! run ends when `ρ` reaches its floor or the evaluation budget is spent.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::ansatz::ParamClass;
use crate::error::{Error, Result};
use crate::seed;

/// Simplex edges shorter than `ALPHA·ρ` in the normal direction need repair.
const ALPHA: f64 = 0.25;
/// Vertices farther than `BETA·ρ` from the best vertex need repair.
const BETA: f64 = 2.1;
/// Length of a repair step, in units of `ρ`.
const GAMMA: f64 = 0.5;
/// A step that achieves less than this fraction of the predicted decrease
/// triggers a radius reduction.
const ACCEPT: f64 = 0.1;

/// Uniform initialization ranges `[lo, hi)` per parameter class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitRanges {
    pub gamma: (f64, f64),
    pub angle: (f64, f64),
    pub cd_amplitude: (f64, f64),
    pub cd_phase: (f64, f64),
}

impl Default for InitRanges {
    fn default() -> Self {
        let half_lattice = libm::sqrt(PI) / 2.0;
        Self { gamma: (0.0, 2.0 * PI), angle: (0.0, PI), cd_amplitude: (-half_lattice, half_lattice), cd_phase: (0.0, 2.0 * PI) }
    }
}

impl InitRanges {
    pub fn range(&self, class: ParamClass) -> (f64, f64) {
        match class {
            ParamClass::Gamma => self.gamma,
            ParamClass::Angle => self.angle,
            ParamClass::CdAmplitude => self.cd_amplitude,
            ParamClass::CdPhase => self.cd_phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub initial_step: f64,
    pub final_step: f64,
    /// Evaluation budget per start.
    pub max_evals: usize,
    pub init_ranges: InitRanges,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { n_starts: 5, initial_step: 0.5, final_step: 1e-4, max_evals: 400, init_ranges: InitRanges::default(), seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidConfig("n_starts must be at least 1"));
        }
        if !(self.final_step > 0.0 && self.final_step < self.initial_step && self.initial_step.is_finite()) {
            return Err(Error::InvalidConfig("need 0 < final_step < initial_step"));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidConfig("max_evals must be at least 1"));
        }
        let r = &self.init_ranges;
        for (lo, hi) in [r.gamma, r.angle, r.cd_amplitude, r.cd_phase] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig("initialization range must be finite with lo <= hi"));
            }
        }
        Ok(())
    }
}

/// Why a local run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// The trust radius reached `final_step`.
    RadiusFloor,
    /// `max_evals` objective calls were made.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Best objective seen after each evaluation.
    pub history: Vec<f64>,
    pub termination: Termination,
}

/// Result of one start within [`multistart`].
#[derive(Debug, Clone, PartialEq)]
pub enum StartOutcome {
    Finished(LocalResult),
    /// The objective returned a non-finite value at this (1-based) evaluation.
    Aborted { eval: usize, history: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartRecord {
    pub index: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub outcome: StartOutcome,
}

impl StartRecord {
    pub fn evals(&self) -> usize {
        match &self.outcome {
            StartOutcome::Finished(r) => r.evals,
            StartOutcome::Aborted { eval, .. } => *eval,
        }
    }

    pub fn history(&self) -> &[f64] {
        match &self.outcome {
            StartOutcome::Finished(r) => &r.history,
            StartOutcome::Aborted { history, .. } => history,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub best_params: Vec<f64>,
    pub best_objective: f64,
    pub best_start: usize,
    pub starts: Vec<StartRecord>,
    /// Wall-clock milliseconds; left at 0 here and filled by callers that time runs.
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn total_evals(&self) -> usize {
        self.starts.iter().map(StartRecord::evals).sum()
    }
}

/// Counts calls, tracks the best point and rejects non-finite values.
struct Tracker<F> {
    objective: F,
    max_evals: usize,
    history: Vec<f64>,
    best_x: Vec<f64>,
    best_f: f64,
}

/// Signals that evaluation must stop.
enum Stop {
    Budget,
    NonFinite(usize),
}

impl<F: FnMut(&[f64]) -> f64> Tracker<F> {
    fn eval(&mut self, x: &[f64]) -> core::result::Result<f64, Stop> {
        if self.history.len() >= self.max_evals {
            return Err(Stop::Budget);
        }
        let f = (self.objective)(x);
        if !f.is_finite() {
            return Err(Stop::NonFinite(self.history.len() + 1));
        }
        if self.history.is_empty() || f < self.best_f {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        self.history.push(self.best_f);
        Ok(f)
    }
}

/// Inverse of a square row-major matrix by Gauss-Jordan with partial
/// pivoting; `None` when it is numerically singular.
fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))?;
        if m[pivot * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        for k in 0..n {
            m.swap(col * n + k, pivot * n + k);
            inv.swap(col * n + k, pivot * n + k);
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r != col {
                let factor = m[r * n + col];
                if factor != 0.0 {
                    for k in 0..n {
                        m[r * n + k] -= factor * m[col * n + k];
                        inv[r * n + k] -= factor * inv[col * n + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

/// Simplex vertices, stored absolutely, with their objective values.
struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn build<F: FnMut(&[f64]) -> f64>(
        center: &[f64],
        f_center: f64,
        rho: f64,
        t: &mut Tracker<F>,
    ) -> core::result::Result<Self, Stop> {
        let mut points = vec![center.to_vec()];
        let mut values = vec![f_center];
        for j in 0..center.len() {
            let mut x = center.to_vec();
            x[j] += rho;
            values.push(t.eval(&x)?);
            points.push(x);
        }
        Ok(Self { points, values })
    }

    /// Lowest value, ties to the lowest index.
    fn best(&self) -> usize {
        let mut b = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[b] {
                b = i;
            }
        }
        b
    }

    /// Vertex indices other than `best`, and the inverse of the matrix whose
    /// rows are their displacements from `best`.
    fn frame(&self, best: usize, n: usize) -> (Vec<usize>, Option<Vec<f64>>) {
        let others: Vec<usize> = (0..=n).filter(|&j| j != best).collect();
        let mut d = Vec::with_capacity(n * n);
        for &j in &others {
            d.extend(self.points[j].iter().zip(&self.points[best]).map(|(a, b)| a - b));
        }
        (others, invert(&d, n))
    }
}

/// Local search outcome before packaging: the tracker and why it stopped.
fn local_search<F: FnMut(&[f64]) -> f64>(
    objective: F,
    x0: &[f64],
    initial_step: f64,
    final_step: f64,
    max_evals: usize,
) -> (Tracker<F>, core::result::Result<Termination, usize>) {
    let mut t = Tracker { objective, max_evals, history: Vec::new(), best_x: x0.to_vec(), best_f: f64::INFINITY };
    let status = match run_local(&mut t, x0, initial_step, final_step) {
        Ok(()) => Ok(Termination::RadiusFloor),
        Err(Stop::Budget) => Ok(Termination::Budget),
        Err(Stop::NonFinite(eval)) => Err(eval),
    };
    (t, status)
}

fn run_local<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<F>,
    x0: &[f64],
    initial_step: f64,
    final_step: f64,
) -> core::result::Result<(), Stop> {
    let n = x0.len();
    let f0 = t.eval(x0)?;
    if n == 0 {
        return Ok(());
    }
    let mut rho = initial_step;
    let mut simplex = Simplex::build(x0, f0, rho, t)?;
    loop {
        let best = simplex.best();
        let (others, inverse) = simplex.frame(best, n);
        let Some(inv) = inverse else {
            let center = simplex.points[best].clone();
            simplex = Simplex::build(&center, simplex.values[best], rho, t)?;
            continue;
        };
        // `inv` is the inverse of D (rows: displacements d_j). Column j of
        // inv is the dual vector of vertex j; its norm is 1/(distance from
        // the vertex to the opposite face).
        let column = |j: usize| -> Vec<f64> { (0..n).map(|r| inv[r * n + j]).collect() };

        // Model gradient from D g = Δf.
        let f_best = simplex.values[best];
        let df: Vec<f64> = others.iter().map(|&j| simplex.values[j] - f_best).collect();
        let g: Vec<f64> = (0..n).map(|r| (0..n).map(|k| inv[r * n + k] * df[k]).sum()).collect();

        // Geometry: too far, or too flat in the normal direction.
        let mut worst: Option<(usize, bool)> = None;
        let mut far = BETA * rho;
        for (k, &j) in others.iter().enumerate() {
            let edge = norm(&simplex.points[j].iter().zip(&simplex.points[best]).map(|(a, b)| a - b).collect::<Vec<_>>());
            if edge > far {
                far = edge;
                worst = Some((k, true));
            }
        }
        if worst.is_none() {
            let mut thin = ALPHA * rho;
            for k in 0..n {
                let sigma = 1.0 / norm(&column(k));
                if sigma < thin {
                    thin = sigma;
                    worst = Some((k, false));
                }
            }
        }
        if let Some((k, _)) = worst {
            let dual = column(k);
            let scale = GAMMA * rho / norm(&dual);
            let downhill = if dual.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() > 0.0 { -scale } else { scale };
            let x: Vec<f64> = simplex.points[best].iter().zip(&dual).map(|(b, d)| b + downhill * d).collect();
            let f = t.eval(&x)?;
            let j = others[k];
            simplex.points[j] = x;
            simplex.values[j] = f;
            continue;
        }

        let gnorm = norm(&g);
        let mut shrink = gnorm == 0.0;
        if !shrink {
            let step: Vec<f64> = g.iter().map(|gi| -rho * gi / gnorm).collect();
            let x: Vec<f64> = simplex.points[best].iter().zip(&step).map(|(b, s)| b + s).collect();
            let f = t.eval(&x)?;
            let predicted = rho * gnorm;
            shrink = f_best - f < ACCEPT * predicted;
            // Replace the vertex whose removal keeps the simplex best
            // conditioned: largest |coefficient| of the step in the frame.
            let weights: Vec<f64> = (0..n).map(|k| column(k).iter().zip(&step).map(|(a, b)| a * b).sum::<f64>().abs()).collect();
            let mut k_out = 0;
            for k in 1..n {
                if weights[k] > weights[k_out] {
                    k_out = k;
                }
            }
            let j = others[k_out];
            simplex.points[j] = x;
            simplex.values[j] = f;
        }
        if shrink {
            if rho <= final_step {
                return Ok(());
            }
            rho *= 0.5;
            if rho <= 1.5 * final_step {
                rho = final_step;
            }
        }
    }
}

/// Minimizes `objective` from `x0`. The trust radius starts at
/// `initial_step` and the run ends once `final_step` is reached or after
/// `max_evals` calls. A NaN or infinite objective value is an error.
pub fn minimize_local(
    objective: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    initial_step: f64,
    final_step: f64,
    max_evals: usize,
) -> Result<LocalResult> {
    if max_evals == 0 {
        return Err(Error::InvalidConfig("max_evals must be at least 1"));
    }
    let (t, status) = local_search(objective, x0, initial_step, final_step, max_evals);
    match status {
        Ok(termination) => Ok(LocalResult { x: t.best_x, f: t.best_f, evals: t.history.len(), history: t.history, termination }),
        Err(eval) => Err(Error::NonFiniteObjective { eval }),
    }
}

/// Uniform draws from the class ranges, one 53-bit uniform per parameter.
pub fn initial_point(classes: &[ParamClass], ranges: &InitRanges, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    classes
        .iter()
        .map(|&c| {
            let (lo, hi) = ranges.range(c);
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            lo + (hi - lo) * u
        })
        .collect()
}

/// Runs [`minimize_local`] from `cfg.n_starts` random points. Start `i` uses
/// seed `derive(cfg.seed, [i])`; the best start wins with ties going to the
/// lowest index.
pub fn multistart(
    mut objective: impl FnMut(&[f64]) -> f64,
    cfg: &OptimizerConfig,
    classes: &[ParamClass],
) -> Result<RunRecord> {
    cfg.validate()?;
    let mut starts = Vec::with_capacity(cfg.n_starts);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for index in 0..cfg.n_starts {
        let seed = seed::derive(cfg.seed, &[index as u64]);
        let x0 = initial_point(classes, &cfg.init_ranges, seed);
        let (t, status) = local_search(&mut objective, &x0, cfg.initial_step, cfg.final_step, cfg.max_evals);
        let outcome = match status {
            Ok(termination) => {
                if best.as_ref().is_none_or(|(_, f, _)| t.best_f < *f) {
                    best = Some((index, t.best_f, t.best_x.clone()));
                }
                StartOutcome::Finished(LocalResult {
                    x: t.best_x,
                    f: t.best_f,
                    evals: t.history.len(),
                    history: t.history,
                    termination,
                })
            }
            Err(eval) => StartOutcome::Aborted { eval, history: t.history },
        };
        starts.push(StartRecord { index, seed, x0, outcome });
    }
    let (best_start, best_objective, best_params) = best.ok_or(Error::AllStartsAborted)?;
    Ok(RunRecord { best_params, best_objective, best_start, starts, wall_ms: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(a: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x: &[f64]| x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum()
    }

    /// Gaussian wells of depth 1 at (0.8, 0.8) and depth 2 at (2.4, 2.4).
    fn two_basins(x: &[f64]) -> f64 {
        let well = |c: f64, depth: f64| {
            let r2: f64 = x.iter().map(|xi| (xi - c) * (xi - c)).sum();
            -depth * libm::exp(-r2 / 0.4)
        };
        well(0.8, 1.0) + well(2.4, 2.0)
    }

    #[test]
    fn quadratic_converges_within_budget() {
        let a = [1.0, -0.5, 0.3, 2.0];
        let r = minimize_local(quadratic(&a), &[0.0; 4], 0.5, 1e-4, 200).unwrap();
        let err = norm(&r.x.iter().zip(&a).map(|(x, y)| x - y).collect::<Vec<_>>());
        assert!(err <= 1e-3, "error {err} after {} evals", r.evals);
        assert!(r.evals <= 200);
    }

    #[test]
    fn constant_objective_hits_radius_floor() {
        let r = minimize_local(|_: &[f64]| 3.5, &[0.2, 0.1, -1.0], 0.5, 1e-4, 400).unwrap();
        assert_eq!(r.termination, Termination::RadiusFloor);
        assert_eq!(r.f, 3.5);
        assert!(r.evals < 400);
    }

    #[test]
    fn cosine_from_near_zero() {
        let r = minimize_local(|x: &[f64]| libm::cos(x[0]), &[0.1], 0.5, 1e-4, 400).unwrap();
        let wrapped = (r.x[0] - PI).rem_euclid(2.0 * PI);
        let dist = wrapped.min(2.0 * PI - wrapped);
        assert!(dist <= 1e-2, "x = {}", r.x[0]);
    }

    #[test]
    fn history_is_monotone_and_budget_respected() {
        let r = minimize_local(two_basins, &[0.1, 2.9], 0.5, 1e-6, 37).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.evals <= 37);
        assert_eq!(*r.history.last().unwrap(), r.f);
    }

    #[test]
    fn budget_termination_reported() {
        let a = [5.0, -5.0, 5.0];
        let r = minimize_local(quadratic(&a), &[0.0; 3], 0.5, 1e-8, 10).unwrap();
        assert_eq!((r.evals, r.termination), (10, Termination::Budget));
    }

    #[test]
    fn non_finite_aborts() {
        let e = minimize_local(|x: &[f64]| if x[0] > 0.3 { f64::NAN } else { -x[0] }, &[0.0], 0.5, 1e-4, 50);
        assert!(matches!(e, Err(Error::NonFiniteObjective { eval: 2 })));
    }

    #[test]
    fn two_basins_found_by_multistart() {
        let classes = [ParamClass::Angle, ParamClass::Angle];
        let hits = (0..20)
            .filter(|&seed| {
                let cfg = OptimizerConfig { n_starts: 8, seed, ..OptimizerConfig::default() };
                multistart(two_basins, &cfg, &classes).unwrap().best_objective <= -1.9
            })
            .count();
        assert!(hits >= 19, "{hits}/20 seeds found the deep basin");
    }

    #[test]
    fn multistart_is_deterministic_and_within_budget() {
        let classes = [ParamClass::Gamma, ParamClass::CdAmplitude, ParamClass::CdPhase];
        let cfg = OptimizerConfig { n_starts: 3, max_evals: 60, seed: 42, ..OptimizerConfig::default() };
        let f = |x: &[f64]| libm::sin(x[0]) + x[1] * x[1] + libm::cos(x[2]);
        let a = multistart(f, &cfg, &classes).unwrap();
        let b = multistart(f, &cfg, &classes).unwrap();
        assert_eq!(a, b);
        assert!(a.total_evals() <= cfg.n_starts * cfg.max_evals);
        let min = a
            .starts
            .iter()
            .filter_map(|s| match &s.outcome {
                StartOutcome::Finished(r) => Some(r.f),
                StartOutcome::Aborted { .. } => None,
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_objective, min);
        for s in &a.starts {
            assert!(s.history().windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn single_start_matches_local() {
        let classes = [ParamClass::Angle; 2];
        let cfg = OptimizerConfig { n_starts: 1, seed: 9, ..OptimizerConfig::default() };
        let rec = multistart(two_basins, &cfg, &classes).unwrap();
        let x0 = initial_point(&classes, &cfg.init_ranges, seed::derive(9, &[0]));
        let local = minimize_local(two_basins, &x0, cfg.initial_step, cfg.final_step, cfg.max_evals).unwrap();
        assert_eq!((rec.best_params, rec.best_objective), (local.x, local.f));
    }

    #[test]
    fn all_aborted_is_an_error() {
        let cfg = OptimizerConfig { n_starts: 2, ..OptimizerConfig::default() };
        assert!(matches!(multistart(|_: &[f64]| f64::NAN, &cfg, &[ParamClass::Angle]), Err(Error::AllStartsAborted)));
    }

    #[test]
    fn init_ranges_respected() {
        let ranges = InitRanges::default();
        let classes = [ParamClass::Gamma, ParamClass::Angle, ParamClass::CdAmplitude, ParamClass::CdPhase];
        for seed in 0..50 {
            let x = initial_point(&classes, &ranges, seed);
            for (v, &c) in x.iter().zip(&classes) {
                let (lo, hi) = ranges.range(c);
                assert!(*v >= lo && *v < hi);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(OptimizerConfig { n_starts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { final_step: 0.6, ..Default::default() }.validate().is_err());
    }
}
