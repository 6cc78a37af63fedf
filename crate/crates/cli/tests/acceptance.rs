//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hybrid_qaoa::ansatz::{cost_unitary_phases, mixer_operator, Ansatz, AnsatzConfig, MixerAxes, MixerParams, ParamClass};
use hybrid_qaoa::bits::Bitstring;
use hybrid_qaoa::fock::{displacement, gkp_codeword, gkp_plus, GkpConfig, TruncatedMode};
use hybrid_qaoa::gates::{
    conditional_displacement, ex_readout, pauli_x, pauli_y, pauli_z, position_readout, qubit_rotation,
    readout_precorrection, rzz, CdAxisMode, QubitAxis,
};
use hybrid_qaoa::graph::{generate_er, max_cut_bruteforce, GraphInstance};
use hybrid_qaoa::linalg::{kron, ComplexMatrix, C64};
use hybrid_qaoa::optimizer::{minimize_local, multistart, OptimizerConfig};
use hybrid_qaoa_cli::experiment::{compare_summary, sweep_summary, Metric};
use hybrid_qaoa_cli::output::write_outputs;
use hybrid_qaoa_cli::{run_experiment, ExperimentConfig, Kind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 2024;

struct Check {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `exp(A)` by scaling and squaring a Taylor series; independent of the
/// eigendecomposition used by the library.
fn expm_series(a: &ComplexMatrix) -> ComplexMatrix {
    let norm = a.max_abs() * a.rows() as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(c(0.5f64.powi(squarings as i32), 0.0));
    let mut term = ComplexMatrix::identity(a.rows());
    let mut sum = term.clone();
    for k in 1..40 {
        term = term.matmul(&scaled).scale(c(1.0 / k as f64, 0.0));
        sum = sum.add_scaled(&term, c(1.0, 0.0));
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

fn criterion_1() -> Check {
    let mode = TruncatedMode::new(12);
    let osc = mode.dim();
    let mut worst_unitary = 0.0f64;
    let mut note = |m: &ComplexMatrix| worst_unitary = worst_unitary.max(m.unitarity_error());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let beta = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        note(&displacement(&mode, beta));
        note(&conditional_displacement(&mode, beta, CdAxisMode::ZControl));
        note(&conditional_displacement(&mode, beta, CdAxisMode::XyPlane(phi)));
        let (a, b) = (rng.gen_range(-1.0..1.0f64), rng.gen_range(-1.0..1.0f64));
        let n = (a * a + b * b + 0.25f64).sqrt();
        note(&qubit_rotation(QubitAxis::new(a / n, b / n, 0.5 / n).unwrap(), rng.gen_range(-4.0..4.0)));
        note(&rzz(rng.gen_range(-4.0..4.0)));
    }
    for delta in [0.0, 0.35, 0.45] {
        note(&ex_readout(&mode, delta));
        note(&readout_precorrection(&mode, delta));
    }
    note(&position_readout(&mode));
    let params = MixerParams::parse(&[0.3, 0.4, 1.1, -0.6, 0.2, -0.7, 0.9, 2.0, 0.5, 1.3, 0.1, -1.4, 0.8], 2, MixerAxes::XyPlane).unwrap();
    note(&mixer_operator(&mode, &params));

    // [x, p] = i/2 away from the top Fock level.
    let comm = mode.x.matmul(&mode.p).add_scaled(&mode.p.matmul(&mode.x), c(-1.0, 0.0));
    let mut comm_err = 0.0f64;
    for r in 0..osc - 1 {
        for col in 0..osc - 1 {
            let want = if r == col { c(0.0, 0.5) } else { c(0.0, 0.0) };
            comm_err = comm_err.max((comm[(r, col)] - want).norm());
        }
    }

    // CD(iβ, Z) = exp(2iβ x⊗Z), CD(β, Z) = exp(−2iβ p⊗Z) for real β.
    let mut coupling_err = 0.0f64;
    for beta in [0.2, -0.55, 0.9] {
        let gx = kron(&mode.x, &pauli_z()).unwrap().scale(c(0.0, 2.0 * beta));
        let gp = kron(&mode.p, &pauli_z()).unwrap().scale(c(0.0, -2.0 * beta));
        let cdx = conditional_displacement(&mode, c(0.0, beta), CdAxisMode::ZControl);
        let cdp = conditional_displacement(&mode, c(beta, 0.0), CdAxisMode::ZControl);
        coupling_err = coupling_err.max(cdx.max_abs_diff(&expm_series(&gx)));
        coupling_err = coupling_err.max(cdp.max_abs_diff(&expm_series(&gp)));
    }

    // CD(β, σ_φ) against exp[(βa† − β*a) ⊗ σ_φ].
    let mut cd_err = 0.0f64;
    for _ in 0..10 {
        let beta = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let sigma = pauli_x().scale(c(phi.cos(), 0.0)).add_scaled(&pauli_y(), c(phi.sin(), 0.0));
        let gen = mode.a_dag.scale(beta).add_scaled(&mode.a, -beta.conj());
        let want = expm_series(&kron(&gen, &sigma).unwrap());
        cd_err = cd_err.max(conditional_displacement(&mode, beta, CdAxisMode::XyPlane(phi)).max_abs_diff(&want));
        let want_z = expm_series(&kron(&gen, &pauli_z()).unwrap());
        cd_err = cd_err.max(conditional_displacement(&mode, beta, CdAxisMode::ZControl).max_abs_diff(&want_z));
    }
    check(
        worst_unitary <= 1e-10 && comm_err <= 1e-12 && coupling_err <= 1e-10 && cd_err <= 1e-10,
        format!(
            "max unitarity error {worst_unitary:.1e} (≤1e-10), [x,p] error {comm_err:.1e} (≤1e-12), \
             quadrature coupling {coupling_err:.1e}, CD vs generator expm at N_max=12 {cd_err:.1e} (≤1e-10)"
        ),
    )
}

/// Full-register composition for `n ≤ 2` pairs, written independently of
/// the strided kernels: every stage is a dense matrix on the whole space.
fn dense_evolution(cfg: &AnsatzConfig, g: &GraphInstance, params: &[f64]) -> Vec<C64> {
    let mode = TruncatedMode::new(cfg.n_max);
    let osc = mode.dim();
    let m = 2 * osc;
    let n = cfg.n_pairs;
    let lift = |u: &ComplexMatrix| (1..n).fold(u.clone(), |acc, _| kron(&acc, u).unwrap());
    let readout = lift(&ex_readout(&mode, cfg.delta));
    let plus = gkp_plus(&cfg.gkp().unwrap()).unwrap();
    let pair: Vec<C64> = plus.iter().flat_map(|&a| [c(a, 0.0), c(0.0, 0.0)]).collect();
    let mut psi = pair.clone();
    for _ in 1..n {
        psi = psi.iter().flat_map(|a| pair.iter().map(move |b| a * b)).collect();
    }
    let dim = m.pow(n as u32);
    let layout = cfg.layout();
    for chunk in params.chunks(layout.layer_len()) {
        let gamma = chunk[0];
        let cost = ComplexMatrix::from_diag(
            &(0..dim)
                .map(|idx| {
                    // Qubit of pair k is the low bit of digit k (pair 0 most significant).
                    let bits: Vec<usize> = (0..n).map(|k| (idx / m.pow((n - 1 - k) as u32)) % m % 2).collect();
                    let cut = g.edges().iter().filter(|&&(a, b)| bits[a] != bits[b]).count();
                    C64::from_polar(1.0, -gamma * cut as f64)
                })
                .collect::<Vec<_>>(),
        );
        let mixer = lift(&mixer_operator(&mode, &MixerParams::parse(&chunk[1..], cfg.mixer_depth, cfg.cd_axis).unwrap()));
        let layer = mixer.matmul(&readout.adjoint()).matmul(&cost).matmul(&readout);
        psi = layer.mul_vec(&psi);
    }
    readout.mul_vec(&psi)
}

fn criterion_2() -> Check {
    let mut worst = 0.0f64;
    let mut worst_dist = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 1 + (seed % 2) as usize;
        let cfg = AnsatzConfig {
            n_pairs: n,
            n_max: 2 + (seed % 3) as usize,
            delta: 0.45,
            qaoa_depth: 1 + (seed % 2) as usize,
            mixer_depth: (seed % 3) as usize,
            cd_axis: if seed % 4 < 2 { MixerAxes::ZControl } else { MixerAxes::XyPlane },
        };
        let g = if n == 1 { GraphInstance::new(1, &[], 0, 0.0).unwrap() } else { GraphInstance::new(2, &[(0, 1)], 0, 1.0).unwrap() };
        let a = Ansatz::new(cfg, &g).unwrap();
        let params: Vec<f64> = (0..a.layout().len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let want = dense_evolution(&cfg, &g, &params);
        for state in [a.evolve(&params).unwrap(), a.evolve_stepwise(&params).unwrap()] {
            let diff = state.amplitudes().iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            worst = worst.max(diff);
        }
        let m = 2 * (cfg.n_max + 1);
        let mut probs = vec![0.0; 1 << n];
        for (idx, amp) in want.iter().enumerate() {
            let z = (0..n).fold(0, |z, k| (z << 1) | ((idx / m.pow((n - 1 - k) as u32)) % 2));
            probs[z] += amp.norm_sqr();
        }
        let dist = a.distribution(&params).unwrap();
        worst_dist = worst_dist.max(dist.probs().iter().zip(&probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }

    let mut phase_err = 0.0f64;
    for seed in 0..10 {
        let g = generate_er(4, 0.6, seed).unwrap();
        let gamma = 0.37 + seed as f64;
        let phases = cost_unitary_phases(&g, gamma);
        for z in Bitstring::all(4) {
            let s = z.to_string().into_bytes();
            let cut = g.edges().iter().filter(|&&(i, j)| s[i] != s[j]).count() as f64;
            phase_err = phase_err.max((phases(z) - C64::from_polar(1.0, -gamma * cut)).norm());
        }
    }

    let mut bruteforce_ok = 0;
    for seed in 0..50u64 {
        let n = 2 + (seed % 7) as usize;
        let g = generate_er(n, 0.5, 9000 + seed).unwrap();
        let mut best = 0;
        let mut optimal = Vec::new();
        for v in 0u32..(1 << n) {
            let side = |i: usize| (v >> (n - 1 - i)) & 1;
            let cut = g.edges().iter().filter(|&&(i, j)| side(i) != side(j)).count();
            if cut > best {
                best = cut;
                optimal.clear();
            }
            if cut == best {
                optimal.push(v);
            }
        }
        let got = max_cut_bruteforce(&g).unwrap();
        let got_set: Vec<u32> = got.optimal.iter().map(|z| z.value()).collect();
        if got.c_max as usize == best && got_set == optimal {
            bruteforce_ok += 1;
        }
    }
    check(
        worst <= 1e-10 && worst_dist <= 1e-10 && phase_err <= 1e-12 && bruteforce_ok == 50,
        format!(
            "evolve vs dense composition {worst:.1e} over 20 seeds (≤1e-10), distribution {worst_dist:.1e}, \
             cost phases {phase_err:.1e}, brute force matches re-enumeration on {bruteforce_ok}/50 graphs"
        ),
    )
}

/// Probability that the ancilla reads `logical` after the map.
fn readout_success(u: &ComplexMatrix, codeword: &[f64], logical: bool) -> f64 {
    let input: Vec<C64> = codeword.iter().flat_map(|&a| [c(a, 0.0), c(0.0, 0.0)]).collect();
    let out = u.mul_vec(&input);
    out.iter().skip(logical as usize).step_by(2).map(|a| a.norm_sqr()).sum()
}

fn criterion_3() -> Check {
    let mode = TruncatedMode::new(30);
    let cfg = GkpConfig::new(0.35, 30).unwrap();
    let u = ex_readout(&mode, 0.35);
    let ok: Vec<f64> = [false, true]
        .iter()
        .map(|&b| readout_success(&u, &gkp_codeword(&cfg, b).unwrap().amplitudes, b))
        .collect();

    let cfg45 = GkpConfig::new(0.45, 30).unwrap();
    let with = ex_readout(&mode, 0.45);
    let without = position_readout(&mode);
    let mut errors = Vec::new();
    for b in [false, true] {
        let w = gkp_codeword(&cfg45, b).unwrap().amplitudes;
        errors.push((1.0 - readout_success(&with, &w, b), 1.0 - readout_success(&without, &w, b)));
    }
    let increases = errors.iter().all(|(w, wo)| wo > w);
    check(
        ok.iter().all(|&p| p >= 0.95) && increases,
        format!(
            "Δ=0.35 success P(0)={:.4} P(1)={:.4} (≥0.95); Δ=0.45 error with/without precorrection: \
             b=0 {:.4}/{:.4}, b=1 {:.4}/{:.4}",
            ok[0], ok[1], errors[0].0, errors[0].1, errors[1].0, errors[1].1
        ),
    )
}

fn acceptance_config(toml: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(toml).unwrap();
    cfg.seed = MASTER_SEED;
    cfg
}

fn keep_outputs(outcome: &hybrid_qaoa_cli::Outcome, name: &str) {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    write_outputs(outcome, &dir).unwrap();
}

fn criterion_4() -> Check {
    let cfg = acceptance_config(
        "[graph]\nn = [4]\nedge_prob = 0.5\nn_instances = 10\n[ansatz]\nn_max = [10]\ndelta = [0.45]\nqaoa_depth = 2\nmixer_depth = [2]",
    );
    let outcome = run_experiment(&cfg, Kind::Compare).unwrap();
    keep_outputs(&outcome, "compare");
    let failed = outcome.jobs.iter().filter(|j| j.outcome.is_err()).count();
    let summary = compare_summary(&outcome);
    let get = |m: Metric| summary.iter().find(|s| s.metric == m).unwrap();
    let (ar, po) = (get(Metric::ApproxRatio), get(Metric::POpt));
    let ar_mean = ar.mean_improvement.unwrap_or(f64::NAN);
    let po_mean = po.mean_improvement.unwrap_or(f64::NAN);
    let in_band = (ar_mean - 0.132).abs() <= 0.10;
    check(
        failed == 0 && ar_mean > 0.0 && po_mean > 0.0 && in_band,
        format!(
            "{} instances; approx-ratio improvement mean {ar_mean:.4} (target 0.132 ± 0.10, median {:.4}, \
             baseline {:.4} → mixer {:.4}); P_opt improvement mean {po_mean:.4} (> 0; baseline {:.4} → mixer {:.4})",
            ar.instances,
            ar.median_improvement.unwrap_or(f64::NAN),
            ar.mean_baseline.unwrap_or(f64::NAN),
            ar.mean_target.unwrap_or(f64::NAN),
            po.mean_baseline.unwrap_or(f64::NAN),
            po.mean_target.unwrap_or(f64::NAN),
        ),
    )
}

fn criterion_5() -> Check {
    let cfg = acceptance_config(
        "repeats = 10\n[graph]\nn = [4]\nedge_prob = 0.5\n[ansatz]\nn_max = [10]\ndelta = [0.45]\nqaoa_depth = 2\nmixer_depth = [0, 1]",
    );
    let outcome = run_experiment(&cfg, Kind::DepthSweep).unwrap();
    keep_outputs(&outcome, "depth-sweep");
    let summary = sweep_summary(&outcome);
    let at = |d: usize| summary.iter().find(|s| s.d == d).unwrap();
    let (d0, d1) = (at(0), at(1));
    let ratio = (d0.mean_approx_ratio.unwrap_or(f64::NAN), d1.mean_approx_ratio.unwrap_or(f64::NAN));
    let popt = (d0.mean_p_opt.unwrap_or(f64::NAN), d1.mean_p_opt.unwrap_or(f64::NAN));
    let edges = outcome.graphs[0].edges().to_vec();
    check(
        popt.1 - popt.0 >= 0.05 && ratio.1 - ratio.0 >= 0.05 && d0.runs == 10 && d1.runs == 10,
        format!(
            "graph {edges:?}; P_opt {:.4} → {:.4} (Δ {:.4} ≥ 0.05); approx ratio {:.4} → {:.4} (Δ {:.4} ≥ 0.05)",
            popt.0,
            popt.1,
            popt.1 - popt.0,
            ratio.0,
            ratio.1,
            ratio.1 - ratio.0
        ),
    )
}

fn criterion_6() -> Check {
    let deltas = [0.25, 0.35, 0.45, 0.55, 0.65];
    let mut ok = true;
    let mut text = Vec::new();
    for b in [false, true] {
        let weights: Vec<f64> =
            deltas.iter().map(|&d| gkp_codeword(&GkpConfig::new(d, 10).unwrap(), b).unwrap().captured_weight).collect();
        ok &= weights.windows(2).all(|w| w[1] >= w[0]);
        text.push(format!("|{}⟩: {}", b as u8, weights.iter().map(|w| format!("{w:.5}")).collect::<Vec<_>>().join(", ")));
    }
    check(ok, format!("captured weight at N_max=10 over Δ={deltas:?}; {}", text.join("; ")))
}

fn criterion_7() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let base = "[graph]\nn = [3]\nn_instances = 2\n[ansatz]\nn_max = [5]\ndelta = [0.35, 0.45]\nqaoa_depth = 2\nmixer_depth = [0, 1]\n[optimizer]\nn_starts = 2\nmax_evals = 80";
    let mut identical = 0;
    let mut total = 0;
    for kind in [Kind::Single, Kind::Compare, Kind::DepthSweep, Kind::DeltaSweep] {
        let mut cfg = acceptance_config(&format!("repeats = 2\nshots = 2000\n{base}"));
        let mut files = Vec::new();
        for (run, workers) in [(0, 1), (1, 2)] {
            cfg.workers = workers;
            let out = dir.path().join(format!("{kind}-{run}"));
            write_outputs(&run_experiment(&cfg, kind).unwrap(), &out).unwrap();
            let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
            names.sort();
            files.push(names.iter().map(|n| (n.clone(), fs::read(out.join(n)).unwrap())).collect::<Vec<_>>());
        }
        total += 1;
        if files[0] == files[1] {
            identical += 1;
        }
    }
    check(identical == total, format!("{identical}/{total} experiment kinds byte-identical across reruns (workers 1 vs 2)"))
}

fn criterion_8() -> Check {
    let a = [1.0, -0.5, 0.3, 2.0];
    let quad = minimize_local(|x: &[f64]| x.iter().zip(&a).map(|(x, y)| (x - y).powi(2)).sum(), &[0.0; 4], 0.5, 1e-4, 200).unwrap();
    let quad_err = quad.x.iter().zip(&a).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();

    let cos = minimize_local(|x: &[f64]| x[0].cos(), &[0.1], 0.5, 1e-4, 400).unwrap();
    let wrapped = (cos.x[0] - std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
    let cos_err = wrapped.min(std::f64::consts::TAU - wrapped);

    let flat = minimize_local(|_: &[f64]| 2.0, &[0.3, 0.3], 0.5, 1e-4, 400).unwrap();

    let wells = |x: &[f64]| {
        let well = |c: f64, depth: f64| -depth * (-x.iter().map(|v| (v - c).powi(2)).sum::<f64>() / 0.4).exp();
        well(0.8, 1.0) + well(2.4, 2.0)
    };
    let classes = [ParamClass::Angle; 2];
    let hits = (0..20)
        .filter(|&seed| {
            let cfg = OptimizerConfig { n_starts: 8, seed, ..OptimizerConfig::default() };
            multistart(wells, &cfg, &classes).unwrap().best_objective <= -1.9
        })
        .count();
    check(
        quad_err <= 1e-3 && quad.evals <= 200 && cos_err <= 1e-2 && flat.f == 2.0 && hits >= 19,
        format!(
            "quadratic error {quad_err:.1e} in {} evals (≤1e-3, ≤200); cos distance to π {cos_err:.1e} (≤1e-2); \
             constant objective stopped after {} evals; two basins reached ≤ -1.9 on {hits}/20 seeds (≥19)",
            quad.evals, flat.evals
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("operator identities", criterion_1, Duration::from_secs(10)),
        ("oracle equivalence", criterion_2, Duration::from_secs(60)),
        ("GKP readout", criterion_3, Duration::from_secs(5)),
        ("baseline improvement", criterion_4, Duration::from_secs(30 * 60)),
        ("depth effect", criterion_5, Duration::from_secs(20 * 60)),
        ("envelope truncation weight", criterion_6, Duration::from_secs(1)),
        ("determinism", criterion_7, Duration::from_secs(5 * 60)),
        ("optimizer suite", criterion_8, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
