//! Gradient-variance diagnostics over random initializations.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_sim::{EnergyModel, SimConfig};
use crate::hamiltonians::{build_tfi, Hamiltonian, Pauli, PauliTerm};
use crate::network::{build_network, LatticeSpec, Network};
use crate::optimize::{run_vqe, AmsGradConfig, TrainMask, VqeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceGroup {
    Layers { rows: usize, cols: usize, n_bl: usize },
    BondQubits { n_bq: usize },
    Column { x: usize },
    PretrainColumn { x: usize, trained: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub group: VarianceGroup,
    /// Mean over the group's parameters of the per-parameter variance.
    pub mean_variance: f64,
    pub max_variance: f64,
    pub samples: usize,
    pub parameters: usize,
}

/// Unbiased per-coordinate variance of equally long samples.
pub fn per_parameter_variance(samples: &[Vec<f64>]) -> Vec<f64> {
    let n = samples.len();
    let dim = samples.first().map_or(0, |s| s.len());
    if n < 2 {
        return vec![0.0; dim];
    }
    (0..dim)
        .map(|k| {
            let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n as f64;
            samples.iter().map(|s| (s[k] - mean) * (s[k] - mean)).sum::<f64>() / (n - 1) as f64
        })
        .collect()
}

fn aggregate(group: VarianceGroup, var: &[f64], select: &[usize], samples: usize) -> VarianceReport {
    let vals: Vec<f64> = select.iter().map(|&k| var[k]).collect();
    let mean = if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 };
    VarianceReport {
        group,
        mean_variance: mean,
        max_variance: vals.iter().copied().fold(0.0, f64::max),
        samples,
        parameters: vals.len(),
    }
}

/// Gradients at `n_samples` uniformly random parameter points.
pub fn gradient_samples(model: &EnergyModel, n_samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    (0..n_samples)
        .map(|_| {
            let p = model.network.random_params(rng);
            model.energy_and_gradient(&p, None).map(|r| r.1)
        })
        .collect()
}

/// Parameters of the blocks in the union of the model's causal cones.
pub fn active_parameters(model: &EnergyModel) -> Vec<usize> {
    let net = &model.network;
    let mut active = vec![false; net.n_sites()];
    for (_, plan) in model.groups() {
        for s in plan.sites() {
            active[s] = true;
        }
    }
    site_parameters(net, |s| active[s])
}

fn site_parameters(net: &Network, mut keep: impl FnMut(usize) -> bool) -> Vec<usize> {
    (0..net.n_sites())
        .filter(|&s| keep(s))
        .flat_map(|s| {
            let site = &net.sites[s];
            site.param_offset..site.param_offset + site.param_count
        })
        .collect()
}

/// Terms whose support lies in the first `band` rows or the first `band` columns.
pub fn band_hamiltonian(h: &Hamiltonian, band: usize) -> Hamiltonian {
    let cols = h.cols;
    h.filtered(|t| {
        let sites = t.sites();
        sites.iter().all(|&s| s / cols < band) || sites.iter().all(|&s| s % cols < band)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarianceSweep {
    /// Full TFI gradient versus block depth at one bond qubit.
    Layers { sizes: Vec<(usize, usize)>, layers: Vec<usize>, lambda: f64, delta: f64 },
    /// TFI gradient restricted to the two-wide band along the first row and
    /// column, versus bond qubits.
    BondQubits { rows: usize, cols: usize, n_bl: usize, n_bqs: Vec<usize>, band: usize, lambda: f64, delta: f64 },
    /// Single `Z(r, x) Z(r, x+1)` term on the last row, aggregated over the
    /// orthogonality-center block.
    Column { rows: usize, cols: usize, n_bl: usize, columns: Vec<usize> },
}

pub fn gradient_variance(sweep: &VarianceSweep, n_samples: usize, seed: u64, cfg: &SimConfig) -> Result<Vec<VarianceReport>> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("variance needs at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    match sweep {
        VarianceSweep::Layers { sizes, layers, lambda, delta } => {
            for &(rows, cols) in sizes {
                let h = build_tfi(rows, cols, *lambda, *delta);
                for &n_bl in layers {
                    let net = build_network(LatticeSpec::square(rows, cols, 1, n_bl))?;
                    let model = EnergyModel::new(&net, &h, cfg)?;
                    let var = per_parameter_variance(&gradient_samples(&model, n_samples, &mut rng)?);
                    out.push(aggregate(VarianceGroup::Layers { rows, cols, n_bl }, &var, &active_parameters(&model), n_samples));
                }
            }
        }
        VarianceSweep::BondQubits { rows, cols, n_bl, n_bqs, band, lambda, delta } => {
            let h = band_hamiltonian(&build_tfi(*rows, *cols, *lambda, *delta), *band);
            for &n_bq in n_bqs {
                let net = build_network(LatticeSpec::square(*rows, *cols, n_bq, *n_bl))?;
                let model = EnergyModel::new(&net, &h, cfg)?;
                let var = per_parameter_variance(&gradient_samples(&model, n_samples, &mut rng)?);
                out.push(aggregate(VarianceGroup::BondQubits { n_bq }, &var, &active_parameters(&model), n_samples));
            }
        }
        VarianceSweep::Column { rows, cols, n_bl, columns } => {
            let net = build_network(LatticeSpec::square(*rows, *cols, 1, *n_bl))?;
            let center = site_parameters(&net, |s| s == 0);
            for &x in columns {
                if x + 1 >= *cols {
                    return Err(Error::SiteOutOfBounds(rows - 1, x + 1));
                }
                let term = PauliTerm::at(1.0, &[((rows - 1, x), Pauli::Z), ((rows - 1, x + 1), Pauli::Z)], *cols)?;
                let h = Hamiltonian { rows: *rows, cols: *cols, terms: vec![term] };
                let model = EnergyModel::new(&net, &h, cfg)?;
                let var = per_parameter_variance(&gradient_samples(&model, n_samples, &mut rng)?);
                out.push(aggregate(VarianceGroup::Column { x }, &var, &center, n_samples));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub rows: usize,
    pub cols: usize,
    pub n_bq: usize,
    pub n_bl: usize,
    pub lambda: f64,
    pub delta: f64,
    /// Columns `0..train_cols` are trained against the terms inside them.
    pub train_cols: usize,
    pub steps: usize,
    pub seeds: usize,
    pub amsgrad: AmsGradConfig,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 10,
            n_bq: 1,
            n_bl: 4,
            lambda: 3.5,
            delta: 1.0,
            train_cols: 4,
            steps: 200,
            seeds: 30,
            amsgrad: AmsGradConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainReport {
    /// Per-column variance of the full-Hamiltonian gradient at random initialization.
    pub before: Vec<VarianceReport>,
    /// The same after masked pretraining of the leading columns.
    pub after: Vec<VarianceReport>,
}

pub fn pretrain_experiment(config: &PretrainConfig, seed: u64, cfg: &SimConfig) -> Result<PretrainReport> {
    if config.train_cols > config.cols || config.seeds < 2 {
        return Err(Error::InvalidArgument("pretraining needs train_cols <= cols and two seeds".into()));
    }
    let net = build_network(LatticeSpec::square(config.rows, config.cols, config.n_bq, config.n_bl))?;
    let h = build_tfi(config.rows, config.cols, config.lambda, config.delta);
    let full = EnergyModel::new(&net, &h, cfg)?;
    let tc = config.train_cols;
    let sub = EnergyModel::new(&net, &h.filtered(|t| t.sites().iter().all(|&s| s % config.cols < tc)), cfg)?;
    let mask = TrainMask::columns(&net, 0..tc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for _ in 0..config.seeds {
        let p0 = net.random_params(&mut rng);
        before.push(full.energy_and_gradient(&p0, None)?.1);
        let mut opts = VqeOptions::new(config.steps, rng.gen());
        opts.initial = Some(p0);
        opts.mask = Some(mask.clone());
        opts.amsgrad = config.amsgrad;
        let trained = run_vqe(&sub, &opts, cfg)?;
        after.push(full.energy_and_gradient(&trained.final_params, None)?.1);
    }
    let (vb, va) = (per_parameter_variance(&before), per_parameter_variance(&after));
    let column = |x: usize| site_parameters(&net, |s| s % config.cols == x);
    let report = |var: &[f64], trained: bool| {
        (0..config.cols)
            .map(|x| aggregate(VarianceGroup::PretrainColumn { x, trained }, var, &column(x), config.seeds))
            .collect()
    };
    Ok(PretrainReport { before: report(&vb, false), after: report(&va, true) })
}
