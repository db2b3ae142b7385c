//! AMSgrad and the variational energy minimization loop.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_sim::{fidelity, EnergyModel, SimConfig};
use crate::linalg::C64;
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmsGradConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AmsGradConfig {
    fn default() -> Self {
        Self { alpha: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub step: usize,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub config: AmsGradConfig,
}

impl OptimizerState {
    pub fn new(n: usize, config: AmsGradConfig) -> Self {
        Self { step: 0, m: vec![0.0; n], v: vec![0.0; n], v_hat: vec![0.0; n], config }
    }

    /// Updates the moments and returns the parameter increment.
    pub fn step(&mut self, grads: &[f64]) -> Result<Vec<f64>> {
        if grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: grads.len() });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let c = self.config;
        self.step += 1;
        Ok(grads
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
                self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
                self.v_hat[i] = self.v_hat[i].max(self.v[i]);
                -c.alpha * self.m[i] / (libm::sqrt(self.v_hat[i]) + c.eps)
            })
            .collect())
    }

    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        let delta = self.step(grads)?;
        params.iter_mut().zip(delta).for_each(|(p, d)| *p += d);
        Ok(())
    }
}

pub fn amsgrad_step(state: &mut OptimizerState, grads: &[f64]) -> Result<Vec<f64>> {
    state.step(grads)
}

/// Per-parameter trainability flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainMask {
    pub trainable: Vec<bool>,
}

impl TrainMask {
    pub fn all(n: usize) -> Self {
        Self { trainable: vec![true; n] }
    }

    /// Trainable exactly on the blocks of sites accepted by `select(row, col)`.
    pub fn from_sites(net: &Network, mut select: impl FnMut(usize, usize) -> bool) -> Self {
        let mut trainable = vec![false; net.n_params];
        for s in &net.sites {
            if select(s.coord.0, s.coord.1) {
                trainable[s.param_offset..s.param_offset + s.param_count].iter_mut().for_each(|b| *b = true);
            }
        }
        Self { trainable }
    }

    pub fn columns(net: &Network, cols: core::ops::Range<usize>) -> Self {
        Self::from_sites(net, |_, c| cols.contains(&c))
    }

    pub fn count(&self) -> usize {
        self.trainable.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMethod {
    /// Backward sweep through the exact contraction.
    #[default]
    Adjoint,
    /// Two shifted evaluations per angle.
    ParameterShift,
}

pub fn gradient(model: &EnergyModel, params: &[f64], mask: Option<&TrainMask>, method: GradientMethod) -> Result<Vec<f64>> {
    let m = mask.map(|m| m.trainable.as_slice());
    if let Some(m) = m {
        if m.len() != params.len() {
            return Err(Error::DimensionMismatch { expected: params.len(), got: m.len() });
        }
    }
    match method {
        GradientMethod::Adjoint => Ok(model.energy_and_gradient(params, m)?.1),
        GradientMethod::ParameterShift => model.parameter_shift_gradient(params, m),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeOptions {
    pub steps: usize,
    pub seed: u64,
    pub amsgrad: AmsGradConfig,
    pub mask: Option<TrainMask>,
    /// Starting point; drawn uniformly from the seed when absent.
    pub initial: Option<Vec<f64>>,
    /// Orthonormal reference states for fidelity recording.
    pub reference: Option<Vec<Vec<C64>>>,
    /// Record fidelity every this many steps (and at the end).
    pub fidelity_every: usize,
    pub method: GradientMethod,
}

impl VqeOptions {
    pub fn new(steps: usize, seed: u64) -> Self {
        Self {
            steps,
            seed,
            amsgrad: AmsGradConfig::default(),
            mask: None,
            initial: None,
            reference: None,
            fidelity_every: 1,
            method: GradientMethod::Adjoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeTrace {
    /// Energy before each step and after the last one (`steps + 1` entries).
    pub energies: Vec<f64>,
    /// `(step, fidelity)` pairs.
    pub fidelities: Vec<(usize, f64)>,
    pub final_params: Vec<f64>,
}

impl VqeTrace {
    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trace is never empty")
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelities.last().map(|f| f.1)
    }
}

pub fn initial_params(net: &Network, seed: u64) -> Vec<f64> {
    net.random_params(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn run_vqe(model: &EnergyModel, options: &VqeOptions, cfg: &SimConfig) -> Result<VqeTrace> {
    let net = &model.network;
    let mut params = match &options.initial {
        Some(p) => {
            net.check_params(p)?;
            p.clone()
        }
        None => initial_params(net, options.seed),
    };
    let mut state = OptimizerState::new(params.len(), options.amsgrad);
    let mut energies = Vec::with_capacity(options.steps + 1);
    let mut fidelities = Vec::new();
    let every = options.fidelity_every.max(1);
    for step in 0..=options.steps {
        if let Some(r) = &options.reference {
            if step % every == 0 || step == options.steps {
                fidelities.push((step, fidelity(net, &params, r, cfg)?));
            }
        }
        if step == options.steps {
            energies.push(model.energy(&params)?);
            break;
        }
        let mask = options.mask.as_ref().map(|m| m.trainable.as_slice());
        let (e, g) = match options.method {
            GradientMethod::Adjoint => model.energy_and_gradient(&params, mask)?,
            GradientMethod::ParameterShift => (model.energy(&params)?, model.parameter_shift_gradient(&params, mask)?),
        };
        energies.push(e);
        state.apply(&mut params, &g)?;
    }
    Ok(VqeTrace { energies, fidelities, final_params: params })
}
