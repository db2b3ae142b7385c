//! Exact evaluation of qisoTNS states by frontier contraction.
//!
//! Expectation values sweep a density operator through the causal cone of the
//! observable's support. Wires that no later block in the cone reads are
//! traced as soon as they are produced; the physical wires of the support stay
//! open and the observable is applied at the end. Gradients come from a
//! backward Heisenberg sweep over the same plan.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::{angle_gradients, Block};
use crate::error::{Error, Result};
use crate::frontier::{
    adjoint_stack, conjugate_blocks, front_permutation, invert_permutation, kraus_environment, kraus_stack,
    pure_apply, scatter_bits, trace_product, FrontierMode, FrontierOperator, Label,
};
use crate::hamiltonians::{Hamiltonian, LocalObservable, PauliTerm};
use crate::linalg::{permute_square, Matrix, C64, ZERO};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Largest density frontier, in wires, before refusing to contract.
    pub max_wires: usize,
    /// Largest pure frontier, in wires, for state-vector style sweeps.
    pub max_pure_wires: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { max_wires: 13, max_pure_wires: 26 }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct DensityStep {
    site: usize,
    perm: Vec<usize>,
    in_dim: usize,
    rest: usize,
    kept: Vec<usize>,
    traced: Vec<usize>,
}

/// A precomputed density sweep for one observable support.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    steps: Vec<DensityStep>,
    final_labels: Vec<Label>,
    pub cone: Vec<bool>,
    pub peak_wires: usize,
    pub cost: f64,
}

impl ContractionPlan {
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.site)
    }
}

fn plan_for_order(net: &Network, order: &[usize], cone: &[bool], support: &[usize]) -> ContractionPlan {
    let nb = net.spec.n_bq;
    let mut labels: Vec<Label> = Vec::new();
    let mut steps = Vec::new();
    let mut peak = 0usize;
    let mut cost = 0.0;
    for &s in order.iter().filter(|&&s| cone[s]) {
        let site = &net.sites[s];
        let inputs: Vec<Label> =
            site.inputs.iter().flat_map(|&b| (0..nb).map(move |wire| Label::Bond { bond: b, wire })).collect();
        let perm = front_permutation(&labels, &inputs);
        let mut kept = Vec::new();
        let mut kept_labels = Vec::new();
        if support.contains(&s) {
            kept.push(0);
            kept_labels.push(Label::Phys(s));
        }
        for (k, &b) in site.outputs.iter().enumerate() {
            if net.bonds[b].to.is_some_and(|t| cone[t]) {
                for (wire, local) in site.output_wires(k, nb).enumerate() {
                    kept.push(local);
                    kept_labels.push(Label::Bond { bond: b, wire });
                }
            }
        }
        let traced: Vec<usize> = (0..site.wires()).filter(|w| !kept.contains(w)).collect();
        let mut rest_labels = vec![Label::Phys(usize::MAX); labels.len() - inputs.len()];
        for (pos, &l) in labels.iter().enumerate() {
            if perm[pos] >= inputs.len() {
                rest_labels[perm[pos] - inputs.len()] = l;
            }
        }
        let in_dim = 1usize << inputs.len();
        let rest = 1usize << rest_labels.len();
        let out_dim = 1usize << kept.len();
        let nt = (1usize << traced.len()) as f64;
        cost += (rest * rest) as f64 * nt * (out_dim * in_dim) as f64 * (in_dim + out_dim) as f64;
        peak = peak.max(labels.len()).max(kept.len() + rest_labels.len());
        labels = kept_labels;
        labels.extend(rest_labels);
        steps.push(DensityStep { site: s, perm, in_dim, rest, kept, traced });
    }
    ContractionPlan { steps, final_labels: labels, cone: cone.to_vec(), peak_wires: peak, cost }
}

/// Chooses the cheapest sweep order for an observable on `support`.
pub fn plan_observable(net: &Network, support: &[usize], cfg: &SimConfig) -> Result<ContractionPlan> {
    if let Some(&s) = support.iter().find(|&&s| s >= net.n_sites()) {
        return Err(Error::SiteOutOfBounds(s / net.spec.cols, s % net.spec.cols));
    }
    let cone = net.cone_mask(support);
    let best = net
        .orders
        .iter()
        .map(|o| plan_for_order(net, o, &cone, support))
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("network has at least one order");
    if best.peak_wires > cfg.max_wires {
        return Err(Error::MemoryBudget { wires: best.peak_wires, budget: cfg.max_wires });
    }
    Ok(best)
}

fn observable_in_plan(plan: &ContractionPlan, obs: &LocalObservable) -> Vec<C64> {
    let perm: Vec<usize> = obs
        .sites
        .iter()
        .map(|&s| plan.final_labels.iter().position(|&l| l == Label::Phys(s)).expect("support site kept"))
        .collect();
    permute_square(&obs.matrix.data, &perm)
}

fn forward(plan: &ContractionPlan, blocks: &[Block], mut store: Option<&mut Vec<Vec<C64>>>) -> Vec<C64> {
    let mut rho = vec![C64::new(1.0, 0.0)];
    for step in &plan.steps {
        let permuted = permute_square(&rho, &step.perm);
        let ks = kraus_stack(&blocks[step.site].unitary, step.in_dim, &step.kept, &step.traced);
        rho = conjugate_blocks(&permuted, step.in_dim, step.rest, &ks, 1 << step.kept.len());
        if let Some(st) = store.as_deref_mut() {
            st.push(permuted);
        }
    }
    rho
}

fn evaluate(plan: &ContractionPlan, obs: &LocalObservable, blocks: &[Block]) -> f64 {
    let rho = forward(plan, blocks, None);
    let e = observable_in_plan(plan, obs);
    trace_product(&e, &rho, 1 << plan.final_labels.len()).re
}

/// Value of `obs` and its gradient accumulated into `grad`.
fn evaluate_with_gradient(
    net: &Network,
    plan: &ContractionPlan,
    obs: &LocalObservable,
    blocks: &[Block],
    params: &[f64],
    mask: Option<&[bool]>,
    grad: &mut [f64],
) -> f64 {
    let mut stored = Vec::with_capacity(plan.steps.len());
    let rho = forward(plan, blocks, Some(&mut stored));
    let mut e = observable_in_plan(plan, obs);
    let value = trace_product(&e, &rho, 1 << plan.final_labels.len()).re;
    drop(rho);
    let layers = net.spec.n_bl;
    for (step, rho_in) in plan.steps.iter().zip(stored.into_iter()).rev() {
        let site = &net.sites[step.site];
        let out_dim = 1usize << step.kept.len();
        let ks = kraus_stack(&blocks[step.site].unitary, step.in_dim, &step.kept, &step.traced);
        let range = site.param_offset..site.param_offset + site.param_count;
        let trainable = mask.is_none_or(|m| m[range.clone()].iter().any(|&b| b));
        if trainable {
            let g = kraus_environment(&rho_in, &e, step.in_dim, out_dim, step.rest, &ks);
            let w = site.wires();
            let mut full = Matrix::zeros(1 << w, 1 << w);
            for t in 0..(1usize << step.traced.len()) {
                let tb = scatter_bits(t, &step.traced);
                for o in 0..out_dim {
                    let row = tb | scatter_bits(o, &step.kept);
                    let src = &g.data[(t * out_dim + o) * step.in_dim..(t * out_dim + o + 1) * step.in_dim];
                    full.data[row * full.cols..row * full.cols + step.in_dim].copy_from_slice(src);
                }
            }
            let local = angle_gradients(w, layers, &params[range.clone()], &full);
            for (k, d) in local.into_iter().enumerate() {
                if mask.is_none_or(|m| m[range.start + k]) {
                    grad[range.start + k] += d;
                }
            }
        }
        drop(rho_in);
        let back = conjugate_blocks(&e, out_dim, step.rest, &adjoint_stack(&ks, out_dim), step.in_dim);
        e = permute_square(&back, &invert_permutation(&step.perm));
    }
    value
}

fn check_term(net: &Network, term: &PauliTerm) -> Result<()> {
    match term.sites().into_iter().find(|&s| s >= net.n_sites()) {
        Some(s) => Err(Error::SiteOutOfBounds(s / net.spec.cols, s % net.spec.cols)),
        None => Ok(()),
    }
}

/// `⟨P⟩` of the Pauli string of `term` (its coefficient is not applied).
pub fn expect_pauli(net: &Network, params: &[f64], term: &PauliTerm, cfg: &SimConfig) -> Result<f64> {
    check_term(net, term)?;
    if term.is_identity() {
        return Ok(1.0);
    }
    let blocks = net.build_blocks(params)?;
    let unit = PauliTerm::new(1.0, term.factors().to_vec())?;
    expect_local(net, &blocks, &LocalObservable::from_term(&unit), cfg)
}

/// `Tr(O ρ)` for a local observable, given prebuilt blocks.
pub fn expect_local(net: &Network, blocks: &[Block], obs: &LocalObservable, cfg: &SimConfig) -> Result<f64> {
    let plan = plan_observable(net, &obs.sites, cfg)?;
    Ok(evaluate(&plan, obs, blocks))
}

pub fn energy(net: &Network, params: &[f64], h: &Hamiltonian, cfg: &SimConfig) -> Result<f64> {
    EnergyModel::new(net, h, cfg)?.energy(params)
}

/// A Hamiltonian bound to a network with contraction plans cached per
/// group of terms sharing a support.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub network: Network,
    pub constant: f64,
    groups: Vec<(LocalObservable, ContractionPlan)>,
}

impl EnergyModel {
    pub fn new(net: &Network, h: &Hamiltonian, cfg: &SimConfig) -> Result<Self> {
        for t in &h.terms {
            check_term(net, t)?;
        }
        let (constant, observables) = h.grouped();
        let groups = observables
            .into_iter()
            .map(|o| plan_observable(net, &o.sites, cfg).map(|p| (o, p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { network: net.clone(), constant, groups })
    }

    pub fn n_params(&self) -> usize {
        self.network.n_params
    }

    pub fn groups(&self) -> impl Iterator<Item = (&LocalObservable, &ContractionPlan)> {
        self.groups.iter().map(|(o, p)| (o, p))
    }

    pub fn peak_wires(&self) -> usize {
        self.groups.iter().map(|g| g.1.peak_wires).max().unwrap_or(0)
    }

    /// Value of each term group, in group order.
    pub fn group_values(&self, params: &[f64]) -> Result<Vec<f64>> {
        let blocks = self.network.build_blocks(params)?;
        Ok(self.groups.iter().map(|(o, p)| evaluate(p, o, &blocks)).collect())
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64> {
        Ok(self.constant + self.group_values(params)?.into_iter().sum::<f64>())
    }

    /// Energy and its exact gradient; masked-out entries are zero.
    pub fn energy_and_gradient(&self, params: &[f64], mask: Option<&[bool]>) -> Result<(f64, Vec<f64>)> {
        let blocks = self.network.build_blocks(params)?;
        if let Some(m) = mask {
            if m.len() != params.len() {
                return Err(Error::DimensionMismatch { expected: params.len(), got: m.len() });
            }
        }
        let mut grad = vec![0.0; params.len()];
        let mut e = self.constant;
        for (o, p) in &self.groups {
            if mask.is_some_and(|m| !p.sites().any(|s| m[self.site_range(s)].iter().any(|&b| b))) {
                e += evaluate(p, o, &blocks);
                continue;
            }
            e += evaluate_with_gradient(&self.network, p, o, &blocks, params, mask, &mut grad);
        }
        Ok((e, grad))
    }

    fn site_range(&self, s: usize) -> core::ops::Range<usize> {
        let site = &self.network.sites[s];
        site.param_offset..site.param_offset + site.param_count
    }

    /// Gradient by the two-point shift rule at `±π/2`, evaluating each group
    /// only for angles inside its causal cone.
    pub fn parameter_shift_gradient(&self, params: &[f64], mask: Option<&[bool]>) -> Result<Vec<f64>> {
        let mut blocks = self.network.build_blocks(params)?;
        let mut grad = vec![0.0; params.len()];
        let mut shifted = params.to_vec();
        let half_pi = core::f64::consts::FRAC_PI_2;
        for (o, p) in &self.groups {
            for s in p.sites() {
                let original = blocks[s].clone();
                for k in self.site_range(s) {
                    if mask.is_some_and(|m| !m[k]) {
                        continue;
                    }
                    shifted[k] = params[k] + half_pi;
                    blocks[s] = self.network.build_site_block(&shifted, s)?;
                    let plus = evaluate(p, o, &blocks);
                    shifted[k] = params[k] - half_pi;
                    blocks[s] = self.network.build_site_block(&shifted, s)?;
                    let minus = evaluate(p, o, &blocks);
                    shifted[k] = params[k];
                    grad[k] += 0.5 * (plus - minus);
                }
                blocks[s] = original;
            }
        }
        Ok(grad)
    }
}

/// Output labels of a site in pure sweeps: physical, consumed bonds, spares.
fn pure_output_labels(net: &Network, s: usize) -> Vec<Label> {
    let site = &net.sites[s];
    let nb = net.spec.n_bq;
    let mut out = vec![Label::Phys(s); site.wires()];
    for (k, &b) in site.outputs.iter().enumerate() {
        for (wire, local) in site.output_wires(k, nb).enumerate() {
            out[local] = match net.bonds[b].to {
                Some(_) => Label::Bond { bond: b, wire },
                None => Label::Spare { site: s, wire: local },
            };
        }
    }
    for local in site.discard_wires(nb) {
        out[local] = Label::Spare { site: s, wire: local };
    }
    out
}

/// Applies the isometry of site `s` to a pure frontier.
fn pure_step(state: &mut FrontierOperator, net: &Network, s: usize, iso: &Matrix) {
    let nb = net.spec.n_bq;
    let site = &net.sites[s];
    let inputs: Vec<Label> =
        site.inputs.iter().flat_map(|&b| (0..nb).map(move |wire| Label::Bond { bond: b, wire })).collect();
    state.bring_to_front(&inputs);
    let rest = state.dim() >> inputs.len();
    state.payload = pure_apply(&state.payload, iso, rest);
    let mut labels = pure_output_labels(net, s);
    labels.extend_from_slice(&state.labels[inputs.len()..]);
    state.labels = labels;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalState {
    /// Reduced density operator; bit `s` of its index is site `s`.
    pub rho: Matrix,
    pub purity: f64,
}

/// Physical reduced state with dangling and discarded wires traced.
pub fn physical_state(net: &Network, params: &[f64], cfg: &SimConfig) -> Result<PhysicalState> {
    let n = net.n_sites();
    let spares: usize = net.bonds.iter().filter(|b| b.to.is_none()).count() * net.spec.n_bq
        + net.sites.iter().map(|s| s.signature.n_discard).sum::<usize>();
    if n + spares > cfg.max_pure_wires || n > cfg.max_wires {
        return Err(Error::MemoryBudget { wires: n + spares, budget: cfg.max_pure_wires });
    }
    let blocks = net.build_blocks(params)?;
    let mut state = FrontierOperator::vacuum(FrontierMode::Pure);
    for &s in &net.order {
        pure_step(&mut state, net, s, &blocks[s].isometry());
    }
    let phys: Vec<Label> = (0..n).map(Label::Phys).collect();
    state.bring_to_front(&phys);
    let d = 1usize << n;
    let psi = &state.payload;
    let mut rho = Matrix::zeros(d, d);
    for chunk in psi.chunks(d) {
        for a in 0..d {
            if chunk[a] == ZERO {
                continue;
            }
            let row = &mut rho.data[a * d..(a + 1) * d];
            for (z, b) in row.iter_mut().zip(chunk) {
                *z += chunk[a] * b.conj();
            }
        }
    }
    let purity = rho.data.iter().map(|z| z.norm_sqr()).sum();
    Ok(PhysicalState { rho, purity })
}

/// `Σ_k ⟨φ_k| ρ_phys |φ_k⟩` for orthonormal reference vectors `φ_k`.
pub fn fidelity(net: &Network, params: &[f64], reference: &[Vec<C64>], cfg: &SimConfig) -> Result<f64> {
    let n = net.n_sites();
    let blocks = net.build_blocks(params)?;
    let isos: Vec<Matrix> = blocks.iter().map(|b| b.isometry()).collect();
    let mut total = 0.0;
    for phi in reference {
        if phi.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: phi.len() });
        }
        let mut state = FrontierOperator {
            labels: (0..n).map(Label::Ref).collect(),
            mode: FrontierMode::Pure,
            payload: phi.iter().map(|z| z.conj()).collect(),
        };
        for &s in &net.order {
            pure_step(&mut state, net, s, &isos[s]);
            if state.width() > cfg.max_pure_wires {
                return Err(Error::MemoryBudget { wires: state.width(), budget: cfg.max_pure_wires });
            }
            state.bring_to_front(&[Label::Phys(s), Label::Ref(s)]);
            let p = &state.payload;
            state.payload = (0..p.len() / 4).map(|r| p[4 * r] + p[4 * r + 3]).collect();
            state.labels.drain(..2);
        }
        total += state.trace();
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Measurement record of one shot; entry `s` is the bit of site `s`.
pub type Shot = Vec<u8>;

/// Ancestral sampling of physical outcomes along the sweep order.
pub fn sample(net: &Network, params: &[f64], shots: usize, seed: u64) -> Result<Vec<Shot>> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let blocks = net.build_blocks(params)?;
    let isos: Vec<Matrix> = blocks.iter().map(|b| b.isometry()).collect();
    let outs: Vec<Vec<Label>> = (0..net.n_sites()).map(|s| pure_output_labels(net, s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = Vec::new();
    let mut result = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut shot = vec![0u8; net.n_sites()];
        let mut state = FrontierOperator::vacuum(FrontierMode::Pure);
        for &s in &net.order {
            pure_step(&mut state, net, s, &isos[s]);
            let measured: Vec<usize> = outs[s]
                .iter()
                .enumerate()
                .filter(|(_, l)| matches!(l, Label::Phys(_) | Label::Spare { .. }))
                .map(|(k, _)| k)
                .collect();
            let front: Vec<Label> = measured.iter().map(|&k| outs[s][k]).collect();
            state.bring_to_front(&front);
            let m = 1usize << measured.len();
            probs.clear();
            probs.resize(m, 0.0);
            for (a, z) in state.payload.iter().enumerate() {
                probs[a % m] += z.norm_sqr();
            }
            let norm: f64 = probs.iter().sum();
            let mut u = rng.gen::<f64>() * norm;
            let mut key = m - 1;
            for (k, &p) in probs.iter().enumerate() {
                if u < p {
                    key = k;
                    break;
                }
                u -= p;
            }
            let scale = 1.0 / libm::sqrt(probs[key]);
            state.payload = state.payload.iter().skip(key).step_by(m).map(|z| z * scale).collect();
            state.labels.drain(..measured.len());
            shot[s] = (key & 1) as u8;
        }
        result.push(shot);
    }
    Ok(result)
}

/// Packs a shot into an integer index, site `s` at bit `s`.
pub fn shot_index(shot: &[u8]) -> usize {
    shot.iter().enumerate().fold(0, |acc, (s, &b)| acc | (b as usize) << s)
}

/// Empirical distribution over `2^sites` outcomes.
pub fn histogram(shots: &[Shot], sites: usize) -> Vec<f64> {
    let mut h = vec![0.0; 1 << sites];
    for s in shots {
        h[shot_index(s)] += 1.0;
    }
    let n = shots.len() as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}
