//! The three noisy-execution benchmarks: noisy VQE traces, energy accuracy
//! against a gate-matched hardware-efficient baseline, and correlator error
//! versus circuit depth.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{build_hea, matched_hea_depth, FlatCircuit};
use crate::eigen::ground_eigenpairs;
use crate::error::{Error, Result};
use crate::exact_sim::{expect_pauli, EnergyModel, SimConfig};
use crate::hamiltonians::{build_j1j2, build_tfi, Hamiltonian, Pauli, PauliTerm};
use crate::network::{build_network, LatticeSpec, Network};
use crate::noise::{
    binomial_estimate, exact_noisy_expectation, exact_noisy_shifts, final_noisy_density, noisy_energy, noisy_estimate, pauli_expectation,
    term_circuit, EstimatorKind, NoiseModel, ShotEstimate,
};
use crate::optimize::{run_vqe, AmsGradConfig, OptimizerState, VqeOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyTrace {
    pub p_error: f64,
    /// Shot-estimated energy before each step and after the last.
    pub energies: Vec<f64>,
    pub final_params: Vec<f64>,
}

/// VQE where the energy and every shifted gradient evaluation are estimated
/// from `shots` noisy samples per term.
pub fn run_noisy_vqe(
    net: &Network,
    h: &Hamiltonian,
    noise: &NoiseModel,
    steps: usize,
    shots: usize,
    amsgrad: AmsGradConfig,
    seed: u64,
) -> Result<NoisyTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = net.random_params(&mut rng);
    let mut state = OptimizerState::new(params.len(), amsgrad);
    let mut energies = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let mut energy = 0.0;
        let mut grad = vec![0.0; params.len()];
        for (g, t) in h.terms.iter().enumerate() {
            if t.is_identity() {
                energy += t.coefficient;
                continue;
            }
            let c = term_circuit(net, &params, t)?;
            if step == steps {
                energy += t.coefficient * noisy_estimate(&c, t, noise, shots, rng.gen(), EstimatorKind::ChannelSampled)?.mean;
                continue;
            }
            let (f, shifts) = exact_noisy_shifts(&c, t, noise)?;
            energy += t.coefficient * binomial_estimate(f, shots, g, &mut rng)?.mean;
            for (k, plus, minus) in shifts {
                let ep = binomial_estimate(plus, shots, g, &mut rng)?.mean;
                let em = binomial_estimate(minus, shots, g, &mut rng)?.mean;
                grad[k] += t.coefficient * 0.5 * (ep - em);
            }
        }
        energies.push(energy);
        if step < steps {
            state.apply(&mut params, &grad)?;
        }
    }
    Ok(NoisyTrace { p_error: noise.p_error, energies, final_params: params })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ansatz {
    Qiso,
    Hea,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRow {
    pub n: usize,
    pub p_error: f64,
    pub ansatz: Ansatz,
    pub gates: usize,
    pub steps: usize,
    pub e_gs: f64,
    pub e_target: f64,
    /// Noise-free energy of the optimized parameters.
    pub e_exact: f64,
    pub estimate: ShotEstimate,
    /// `(estimate − E_target) / N²`.
    pub deviation_per_site: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorRow {
    pub x: usize,
    pub exact: f64,
    pub estimate: ShotEstimate,
    pub percent_error: f64,
    pub percent_std_error: f64,
    /// Percent error of the infinite-shot noisy value.
    pub channel_percent_error: f64,
}

/// Model for the correlator study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelatorModel {
    /// The TFI model of the other two studies.
    Tfi,
    J1j2 { j1: f64, j2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBenchmarkConfig {
    /// TFI couplings of the noisy VQE and target-energy studies.
    pub lambda: f64,
    pub delta: f64,
    pub correlator_model: CorrelatorModel,
    pub depolarizing_fraction: f64,
    pub amsgrad: AmsGradConfig,
    /// Noisy VQE lattice side, block depth, steps, shots and error rates.
    pub vqe_side: usize,
    pub vqe_n_bl: usize,
    pub vqe_steps: usize,
    pub vqe_shots: usize,
    pub vqe_p: Vec<f64>,
    /// Target-energy comparison sizes, block depth, error rates and shots.
    pub target_sides: Vec<usize>,
    pub target_n_bl: usize,
    pub target_p: Vec<f64>,
    pub target_shots: usize,
    pub target_max_steps: usize,
    /// Correlator benchmark: noise-free training steps, error rate and shots.
    pub correlator_steps: usize,
    pub correlator_p: f64,
    pub correlator_shots: usize,
}

impl Default for NoiseBenchmarkConfig {
    fn default() -> Self {
        Self {
            lambda: 3.5,
            delta: 1.0,
            correlator_model: CorrelatorModel::J1j2 { j1: 1.0, j2: 0.5 },
            depolarizing_fraction: 0.5,
            amsgrad: AmsGradConfig::default(),
            vqe_side: 4,
            vqe_n_bl: 3,
            vqe_steps: 100,
            vqe_shots: 1000,
            vqe_p: vec![1e-4, 1e-3, 1e-2],
            target_sides: vec![2, 3],
            target_n_bl: 2,
            target_p: vec![0.0, 1e-3, 5e-3, 1e-2],
            target_shots: 10_000,
            target_max_steps: 5000,
            correlator_steps: 500,
            correlator_p: 1e-2,
            correlator_shots: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBenchmarkResults {
    /// Noise-free trace of the same VQE problem.
    pub exact_trace: Vec<f64>,
    pub noisy_traces: Vec<NoisyTrace>,
    pub target: Vec<TargetRow>,
    pub correlators: Vec<CorrelatorRow>,
}

impl NoiseBenchmarkConfig {
    fn correlator_hamiltonian(&self, rows: usize, cols: usize) -> Hamiltonian {
        match self.correlator_model {
            CorrelatorModel::Tfi => build_tfi(rows, cols, self.lambda, self.delta),
            CorrelatorModel::J1j2 { j1, j2 } => build_j1j2(rows, cols, j1, j2),
        }
    }
}

fn noise_with(config: &NoiseBenchmarkConfig, p: f64) -> Result<NoiseModel> {
    let m = NoiseModel { p_error: p, depolarizing_fraction: config.depolarizing_fraction };
    m.validate()?;
    Ok(m)
}

/// Noise-free AMSgrad descent of the qisoTNS until `target` is reached.
fn train_qiso_to(model: &EnergyModel, target: f64, max_steps: usize, amsgrad: AmsGradConfig, seed: u64) -> Result<(Vec<f64>, f64, usize)> {
    let mut params = model.network.random_params(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut state = OptimizerState::new(params.len(), amsgrad);
    let mut best = f64::INFINITY;
    for step in 0..=max_steps {
        let (e, g) = model.energy_and_gradient(&params, None)?;
        best = best.min(e);
        if e <= target {
            return Ok((params, e, step));
        }
        if step < max_steps {
            state.apply(&mut params, &g)?;
        }
    }
    Err(Error::TargetUnreached { target, steps: max_steps, best })
}

fn train_hea_to(
    rows: usize,
    cols: usize,
    depth: usize,
    h: &Hamiltonian,
    target: f64,
    max_steps: usize,
    amsgrad: AmsGradConfig,
    seed: u64,
) -> Result<(FlatCircuit, f64, usize)> {
    let n = 3 * rows * cols * depth;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params: Vec<f64> = (0..n).map(|_| rng.gen_range(-core::f64::consts::PI..core::f64::consts::PI)).collect();
    let mut state = OptimizerState::new(n, amsgrad);
    let mut best = f64::INFINITY;
    for step in 0..=max_steps {
        let c = build_hea(rows, cols, depth, &params)?;
        let (e, g) = c.energy_and_gradient(h)?;
        best = best.min(e);
        if e <= target {
            return Ok((c, e, step));
        }
        if step < max_steps {
            state.apply(&mut params, &g)?;
        }
    }
    Err(Error::TargetUnreached { target, steps: max_steps, best })
}

pub fn run_noise_benchmarks(config: &NoiseBenchmarkConfig, seed: u64, cfg: &SimConfig) -> Result<NoiseBenchmarkResults> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Noisy VQE traces next to the exact trace from the same initial point.
    let side = config.vqe_side;
    let h = build_tfi(side, side, config.lambda, config.delta);
    let net = build_network(LatticeSpec::square(side, side, 1, config.vqe_n_bl))?;
    let model = EnergyModel::new(&net, &h, cfg)?;
    let vqe_seed: u64 = rng.gen();
    let mut opts = VqeOptions::new(config.vqe_steps, vqe_seed);
    opts.amsgrad = config.amsgrad;
    let exact_trace = run_vqe(&model, &opts, cfg)?.energies;
    let mut noisy_traces = Vec::new();
    for &p in &config.vqe_p {
        let noise = noise_with(config, p)?;
        let mut trace = run_noisy_vqe(&net, &h, &noise, config.vqe_steps, config.vqe_shots, config.amsgrad, vqe_seed)?;
        trace.p_error = p;
        noisy_traces.push(trace);
    }

    // Energy accuracy at a common target for both ansatze.
    let mut target = Vec::new();
    for &n in &config.target_sides {
        let h = build_tfi(n, n, config.lambda, config.delta);
        let e_gs = ground_eigenpairs(&h, 1)?.ground_energy();
        let e_target = e_gs + 0.1 * (n * n) as f64;
        let qnet = build_network(LatticeSpec::square(n, n, 1, config.target_n_bl))?;
        let qmodel = EnergyModel::new(&qnet, &h, cfg)?;
        let (qparams, q_exact, q_steps) = train_qiso_to(&qmodel, e_target, config.target_max_steps, config.amsgrad, rng.gen())?;
        let depth = matched_hea_depth(n * n, qnet.gate_count())?;
        let (hea, h_exact, h_steps) =
            train_hea_to(n, n, depth, &h, e_target, config.target_max_steps, config.amsgrad, rng.gen())?;
        for &p in &config.target_p {
            let noise = noise_with(config, p)?;
            let est = noisy_energy(&qnet, &qparams, &h, &noise, config.target_shots, rng.gen(), EstimatorKind::ChannelSampled)?;
            target.push(TargetRow {
                n,
                p_error: p,
                ansatz: Ansatz::Qiso,
                gates: qnet.gate_count(),
                steps: q_steps,
                e_gs,
                e_target,
                e_exact: q_exact,
                estimate: est,
                deviation_per_site: (est.mean - e_target) / (n * n) as f64,
            });
            let rho = final_noisy_density(&hea, &noise)?;
            let (mut mean, mut var) = (0.0, 0.0);
            for (g, t) in h.terms.iter().enumerate() {
                let e = binomial_estimate(pauli_expectation(&rho, t), config.target_shots, g, &mut rng)?;
                mean += t.coefficient * e.mean;
                var += t.coefficient * t.coefficient * e.std_error * e.std_error;
            }
            let est = ShotEstimate { mean, std_error: libm::sqrt(var), shots: config.target_shots, group: usize::MAX };
            target.push(TargetRow {
                n,
                p_error: p,
                ansatz: Ansatz::Hea,
                gates: hea.gate_count(),
                steps: h_steps,
                e_gs,
                e_target,
                e_exact: h_exact,
                estimate: est,
                deviation_per_site: (est.mean - e_target) / (n * n) as f64,
            });
        }
    }

    // Correlator error versus column on a trained network.
    let mut copts = VqeOptions::new(config.correlator_steps, rng.gen());
    copts.amsgrad = config.amsgrad;
    let ch = config.correlator_hamiltonian(side, side);
    let trained = run_vqe(&EnergyModel::new(&net, &ch, cfg)?, &copts, cfg)?.final_params;
    let noise = noise_with(config, config.correlator_p)?;
    let mut correlators = Vec::new();
    for x in 0..side {
        let term = PauliTerm::at(1.0, &[((0, x), Pauli::Z), ((1, x), Pauli::Z)], side)?;
        let exact = expect_pauli(&net, &trained, &term, cfg)?;
        let c = term_circuit(&net, &trained, &term)?;
        let est = noisy_estimate(&c, &term, &noise, config.correlator_shots, rng.gen(), EstimatorKind::ChannelSampled)?;
        let channel = exact_noisy_expectation(&c, &term, &noise)?;
        correlators.push(CorrelatorRow {
            x,
            exact,
            estimate: est,
            percent_error: 100.0 * (est.mean - exact).abs() / exact.abs(),
            percent_std_error: 100.0 * est.std_error / exact.abs(),
            channel_percent_error: 100.0 * (channel - exact).abs() / exact.abs(),
        });
    }

    Ok(NoiseBenchmarkResults { exact_trace, noisy_traces, target, correlators })
}
