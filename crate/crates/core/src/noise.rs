//! Noisy execution of flat circuits: Pauli error channels after every gate,
//! mid-circuit measurement and reset, exact channel evolution of the register
//! density matrix and Monte Carlo trajectories.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{schedule_network, FlatCircuit, Op};
use crate::error::{Error, Result};
use crate::gates::{hadamard, s_dagger, u3, Gate2};
use crate::hamiltonians::{Hamiltonian, Pauli, PauliTerm};
use crate::linalg::{apply_1q, apply_1q_cols, apply_cx, apply_cx_cols, conj_gate, dagger_gate, C64, ZERO};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Probability of an error after each gate.
    pub p_error: f64,
    /// Share of errors that are depolarizing; the rest are bit flips.
    pub depolarizing_fraction: f64,
}

impl NoiseModel {
    pub fn new(p_error: f64) -> Result<Self> {
        let m = Self { p_error, depolarizing_fraction: 0.5 };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        Self { p_error: 0.0, depolarizing_fraction: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(self.p_error) || !ok(self.depolarizing_fraction) {
            return Err(Error::InvalidNoise(alloc::format!("{self:?}")));
        }
        Ok(())
    }

    fn p_dep(&self) -> f64 {
        self.p_error * self.depolarizing_fraction
    }

    fn p_flip(&self) -> f64 {
        self.p_error * (1.0 - self.depolarizing_fraction)
    }

    /// Pauli errors after a gate on `qubits` as `(probability, x mask, z mask)`.
    fn error_terms(&self, qubits: &[usize]) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        let n = qubits.len();
        let paulis = 1usize << (2 * n);
        for code in 1..paulis {
            let (mut x, mut z) = (0, 0);
            for (k, &q) in qubits.iter().enumerate() {
                match (code >> (2 * k)) & 3 {
                    1 => x |= 1 << q,
                    2 => {
                        x |= 1 << q;
                        z |= 1 << q;
                    }
                    3 => z |= 1 << q,
                    _ => {}
                }
            }
            out.push((self.p_dep() / (paulis - 1) as f64, x, z));
        }
        // Bit flips: each single-qubit X and, for two qubits, the joint XX.
        let flips: Vec<usize> = if n == 1 {
            vec![1 << qubits[0]]
        } else {
            vec![1 << qubits[0], 1 << qubits[1], (1 << qubits[0]) | (1 << qubits[1])]
        };
        let pf = self.p_flip() / flips.len() as f64;
        for x in flips {
            match out.iter_mut().find(|t| t.1 == x && t.2 == 0) {
                Some(t) => t.0 += pf,
                None => out.push((pf, x, 0)),
            }
        }
        out.retain(|t| t.0 > 0.0);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub shots: usize,
    /// Basis group the estimate was measured in (the term index).
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorKind {
    /// Pure-state trajectories with sampled errors and measurements.
    Trajectories,
    /// Shot counts drawn from the exact channel expectation; identically
    /// distributed to trajectory sampling for a single Pauli string.
    #[default]
    ChannelSampled,
}

/// Rotation taking the eigenbasis of `p` to the computational basis.
pub fn basis_rotation(p: Pauli) -> Option<Gate2> {
    match p {
        Pauli::Z => None,
        Pauli::X => Some(hadamard()),
        Pauli::Y => {
            let (h, sd) = (hadamard(), s_dagger());
            let mut g = [[ZERO; 2]; 2];
            for (r, row) in g.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = h[r][0] * sd[0][c] + h[r][1] * sd[1][c];
                }
            }
            Some(g)
        }
    }
}

fn term_basis(term: &PauliTerm, n_sites: usize) -> Vec<Option<Pauli>> {
    let mut b = vec![None; n_sites];
    for &(s, p) in term.factors() {
        b[s] = Some(p);
    }
    b
}

/// Appends a measurement of every qubit `s` as site `s` when the circuit has
/// no measurements of its own.
pub fn with_final_measurements(c: &FlatCircuit) -> FlatCircuit {
    let mut c = c.clone();
    if !c.ops.iter().any(|o| matches!(o, Op::Measure { .. })) {
        c.ops.extend((0..c.n_qubits).map(|q| Op::Measure { q, site: q }));
    }
    c
}

/// Row-major register operator with exact channel updates.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterDensity {
    pub n_qubits: usize,
    pub data: Vec<C64>,
}

impl RegisterDensity {
    pub fn zero_state(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        let mut data = vec![ZERO; d * d];
        data[0] = C64::new(1.0, 0.0);
        Self { n_qubits, data }
    }

    fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|k| self.data[k * d + k]).sum()
    }

    /// `ρ → g ρ g†` on qubit `q`.
    pub fn conjugate(&mut self, q: usize, g: &Gate2) {
        let d = self.dim();
        apply_1q(&mut self.data, q, d, g);
        apply_1q_cols(&mut self.data, q, d, &conj_gate(g));
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        let d = self.dim();
        apply_cx(&mut self.data, control, target, d);
        apply_cx_cols(&mut self.data, control, target, d);
    }

    /// `ρ → (1 − Σp) ρ + Σ p P ρ P` over Pauli strings given by masks.
    pub fn pauli_mix(&mut self, terms: &[(f64, usize, usize)]) {
        if terms.is_empty() {
            return;
        }
        let d = self.dim();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let mut out: Vec<C64> = self.data.iter().map(|z| z * (1.0 - total)).collect();
        for &(p, x, z) in terms {
            for r in 0..d {
                let sr = if ((r ^ x) & z).count_ones() % 2 == 0 { p } else { -p };
                let src = &self.data[(r ^ x) * d..((r ^ x) + 1) * d];
                let dst = &mut out[r * d..(r + 1) * d];
                for (c, v) in dst.iter_mut().enumerate() {
                    let s = if ((c ^ x) & z).count_ones() % 2 == 0 { sr } else { -sr };
                    *v += src[c ^ x] * s;
                }
            }
        }
        self.data = out;
    }

    /// Measures qubit `q` with outcome weights `w` and resets it:
    /// `ρ → Σ_b w_b ⟨b|ρ|b⟩ ⊗ |0⟩⟨0|`.
    pub fn weighted_reset(&mut self, q: usize, w: [f64; 2]) {
        let d = self.dim();
        let bit = 1usize << q;
        let mut out = vec![ZERO; d * d];
        for r in (0..d).filter(|r| r & bit == 0) {
            for c in (0..d).filter(|c| c & bit == 0) {
                out[r * d + c] = self.data[r * d + c] * w[0] + self.data[(r | bit) * d + (c | bit)] * w[1];
            }
        }
        self.data = out;
    }

    /// Heisenberg dual of [`weighted_reset`]: `E → diag(w) ⊗ ⟨0|E|0⟩`.
    pub fn weighted_reset_dual(&mut self, q: usize, w: [f64; 2]) {
        let d = self.dim();
        let bit = 1usize << q;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                if (r & bit) == (c & bit) {
                    let b = usize::from(r & bit != 0);
                    out[r * d + c] = self.data[(r & !bit) * d + (c & !bit)] * w[b];
                }
            }
        }
        self.data = out;
    }
}

/// How a measurement op acts for a given observed term.
fn measurement_action(basis: &[Option<Pauli>], site: usize) -> (Option<Gate2>, [f64; 2]) {
    match basis.get(site).copied().flatten() {
        Some(p) => (basis_rotation(p), [1.0, -1.0]),
        None => (None, [1.0, 1.0]),
    }
}

/// Exact noisy expectation of the Pauli string of `term` (coefficient not
/// applied), with each support site measured in its eigenbasis.
pub fn exact_noisy_expectation(circuit: &FlatCircuit, term: &PauliTerm, noise: &NoiseModel) -> Result<f64> {
    let c = with_final_measurements(circuit);
    let basis = term_basis(term, c.n_sites.max(c.n_qubits));
    let mut rho = RegisterDensity::zero_state(c.n_qubits);
    for op in &c.ops {
        apply_forward(&mut rho, op, &basis, noise);
    }
    Ok(rho.trace().re)
}

fn apply_forward(rho: &mut RegisterDensity, op: &Op, basis: &[Option<Pauli>], noise: &NoiseModel) {
    match *op {
        Op::U3 { q, angles: [t, p, l], .. } => {
            rho.conjugate(q, &u3(t, p, l));
            rho.pauli_mix(&noise.error_terms(&[q]));
        }
        Op::Cx { control, target } => {
            rho.cx(control, target);
            rho.pauli_mix(&noise.error_terms(&[control, target]));
        }
        Op::Measure { q, site } => {
            let (rot, w) = measurement_action(basis, site);
            if let Some(g) = rot {
                rho.conjugate(q, &g);
            }
            rho.weighted_reset(q, w);
        }
        Op::Reset { q } => rho.weighted_reset(q, [1.0, 1.0]),
    }
}

fn apply_backward(e: &mut RegisterDensity, op: &Op, basis: &[Option<Pauli>], noise: &NoiseModel) {
    match *op {
        Op::U3 { q, angles: [t, p, l], .. } => {
            e.pauli_mix(&noise.error_terms(&[q]));
            e.conjugate(q, &dagger_gate(&u3(t, p, l)));
        }
        Op::Cx { control, target } => {
            e.pauli_mix(&noise.error_terms(&[control, target]));
            e.cx(control, target);
        }
        Op::Measure { q, site } => {
            let (rot, w) = measurement_action(basis, site);
            e.weighted_reset_dual(q, w);
            if let Some(g) = rot {
                e.conjugate(q, &dagger_gate(&g));
            }
        }
        Op::Reset { q } => e.weighted_reset_dual(q, [1.0, 1.0]),
    }
}

/// Exact noisy expectation together with, for every rotation angle `k`, the
/// expectations with that angle shifted by `+π/2` and `−π/2`.
pub fn exact_noisy_shifts(
    circuit: &FlatCircuit,
    term: &PauliTerm,
    noise: &NoiseModel,
) -> Result<(f64, Vec<(usize, f64, f64)>)> {
    let c = with_final_measurements(circuit);
    let basis = term_basis(term, c.n_sites.max(c.n_qubits));
    let mut rho = RegisterDensity::zero_state(c.n_qubits);
    let mut stored = Vec::new();
    for op in &c.ops {
        if matches!(op, Op::U3 { .. }) {
            stored.push(rho.data.clone());
        }
        apply_forward(&mut rho, op, &basis, noise);
    }
    let value = rho.trace().re;
    let d = 1usize << c.n_qubits;
    let mut e = RegisterDensity { n_qubits: c.n_qubits, data: vec![ZERO; d * d] };
    for k in 0..d {
        e.data[k * d + k] = C64::new(1.0, 0.0);
    }
    let mut shifts = Vec::new();
    for op in c.ops.iter().rev() {
        if let Op::U3 { q, angles, param } = *op {
            // F is the operator just after the gate, before its noise.
            e.pauli_mix(&noise.error_terms(&[q]));
            let rho_b = stored.pop().expect("one state per rotation");
            let t = gate_environment(&rho_b, &e.data, q, d);
            for comp in 0..3 {
                let eval = |delta: f64| {
                    let mut a = angles;
                    a[comp] += delta;
                    let g = u3(a[0], a[1], a[2]);
                    let mut acc = ZERO;
                    for (idx, &tv) in t.iter().enumerate() {
                        let (j, l, i, kk) = (idx >> 3 & 1, idx >> 2 & 1, idx >> 1 & 1, idx & 1);
                        acc += g[i][j] * g[kk][l].conj() * tv;
                    }
                    acc.re
                };
                let half = core::f64::consts::FRAC_PI_2;
                shifts.push((param + comp, eval(half), eval(-half)));
            }
            e.conjugate(q, &dagger_gate(&u3(angles[0], angles[1], angles[2])));
        } else {
            apply_backward(&mut e, op, &basis, noise);
        }
    }
    shifts.reverse();
    Ok((value, shifts))
}

/// `T[j,l,i,k] = Σ_{r,r'} ρ[(j;r),(l;r')] F[(k;r'),(i;r)]` for qubit `q`,
/// flattened as `j<<3 | l<<2 | i<<1 | k`.
fn gate_environment(rho: &[C64], f: &[C64], q: usize, d: usize) -> [C64; 16] {
    let bit = 1usize << q;
    let mut t = [ZERO; 16];
    for row in 0..d {
        let j = usize::from(row & bit != 0);
        let r = row & !bit;
        for col in 0..d {
            let v = rho[row * d + col];
            if v == ZERO {
                continue;
            }
            let l = usize::from(col & bit != 0);
            let rp = col & !bit;
            for i in 0..2 {
                for k in 0..2 {
                    let fv = f[(rp | (k * bit)) * d + (r | (i * bit))];
                    t[j << 3 | l << 2 | i << 1 | k] += v * fv;
                }
            }
        }
    }
    t
}

fn apply_pauli_state(psi: &mut [C64], x: usize, z: usize) {
    for (b, a) in psi.iter_mut().enumerate() {
        if (b & z).count_ones() % 2 == 1 {
            *a = -*a;
        }
    }
    if x != 0 {
        for b in 0..psi.len() {
            let b2 = b ^ x;
            if b < b2 {
                psi.swap(b, b2);
            }
        }
    }
}

/// One noisy shot; returns the product of the term's eigenvalues.
fn run_trajectory(c: &FlatCircuit, basis: &[Option<Pauli>], noise: &NoiseModel, rng: &mut ChaCha8Rng) -> f64 {
    let mut psi = vec![ZERO; 1 << c.n_qubits];
    psi[0] = C64::new(1.0, 0.0);
    let mut value = 1.0;
    let insert_error = |psi: &mut [C64], qubits: &[usize], rng: &mut ChaCha8Rng| {
        if noise.p_error == 0.0 || rng.gen::<f64>() >= noise.p_error {
            return;
        }
        let n = qubits.len();
        let (x, z) = if rng.gen::<f64>() < noise.depolarizing_fraction {
            let code = rng.gen_range(1..1usize << (2 * n));
            let (mut x, mut z) = (0, 0);
            for (k, &q) in qubits.iter().enumerate() {
                match (code >> (2 * k)) & 3 {
                    1 => x |= 1 << q,
                    2 => {
                        x |= 1 << q;
                        z |= 1 << q;
                    }
                    3 => z |= 1 << q,
                    _ => {}
                }
            }
            (x, z)
        } else if n == 1 {
            (1 << qubits[0], 0)
        } else {
            let flips = [1 << qubits[0], 1 << qubits[1], (1 << qubits[0]) | (1 << qubits[1])];
            (flips[rng.gen_range(0..3)], 0)
        };
        apply_pauli_state(psi, x, z);
    };
    for op in &c.ops {
        match *op {
            Op::U3 { q, angles: [t, p, l], .. } => {
                apply_1q(&mut psi, q, 1, &u3(t, p, l));
                insert_error(&mut psi, &[q], rng);
            }
            Op::Cx { control, target } => {
                apply_cx(&mut psi, control, target, 1);
                insert_error(&mut psi, &[control, target], rng);
            }
            Op::Measure { q, .. } | Op::Reset { q } => {
                let observed = match *op {
                    Op::Measure { site, .. } => basis.get(site).copied().flatten(),
                    _ => None,
                };
                if let Some(g) = observed.and_then(basis_rotation) {
                    apply_1q(&mut psi, q, 1, &g);
                }
                let bit = 1usize << q;
                let p1: f64 = psi.iter().enumerate().filter(|(b, _)| b & bit != 0).map(|(_, a)| a.norm_sqr()).sum();
                let total: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
                let one = rng.gen::<f64>() * total < p1;
                if observed.is_some() && one {
                    value = -value;
                }
                let keep = if one { p1 } else { total - p1 };
                let scale = 1.0 / libm::sqrt(keep);
                for b in 0..psi.len() {
                    if (b & bit != 0) == one {
                        psi[b] *= scale;
                    } else {
                        psi[b] = ZERO;
                    }
                }
                if one {
                    apply_pauli_state(&mut psi, bit, 0);
                }
            }
        }
    }
    value
}

fn shot_estimate(values_sum: f64, sq_sum: f64, shots: usize, group: usize) -> ShotEstimate {
    let n = shots as f64;
    let mean = values_sum / n;
    let var = if shots > 1 { ((sq_sum - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    ShotEstimate { mean, std_error: libm::sqrt(var / n), shots, group }
}

/// Estimate from `shots` ±1 outcomes with `P(+1) = (1 + f) / 2`.
pub fn binomial_estimate<R: Rng + ?Sized>(f: f64, shots: usize, group: usize, rng: &mut R) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let p = ((1.0 + f) / 2.0).clamp(0.0, 1.0);
    let plus = Binomial::new(shots as u64, p).map_err(|e| Error::InvalidArgument(alloc::format!("{e}")))?.sample(rng) as f64;
    let n = shots as f64;
    Ok(shot_estimate(2.0 * plus - n, n, shots, group))
}

/// Noisy estimate of the term's Pauli string on a flat circuit.
pub fn noisy_estimate(
    circuit: &FlatCircuit,
    term: &PauliTerm,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
    kind: EstimatorKind,
) -> Result<ShotEstimate> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        EstimatorKind::ChannelSampled => {
            let f = exact_noisy_expectation(circuit, term, noise)?;
            binomial_estimate(f, shots, 0, &mut rng)
        }
        EstimatorKind::Trajectories => {
            let c = with_final_measurements(circuit);
            let basis = term_basis(term, c.n_sites.max(c.n_qubits));
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..shots {
                let v = run_trajectory(&c, &basis, noise, &mut rng);
                sum += v;
                sq += v * v;
            }
            Ok(shot_estimate(sum, sq, shots, 0))
        }
    }
}

/// Holographic schedule of the causal cone of `term`'s support.
pub fn term_circuit(net: &Network, params: &[f64], term: &PauliTerm) -> Result<FlatCircuit> {
    let cone = net.cone_mask(&term.sites());
    schedule_network(net, params, Some(&cone))
}

/// Noisy energy estimate with every term measured in its own basis.
pub fn noisy_energy(
    net: &Network,
    params: &[f64],
    h: &Hamiltonian,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
    kind: EstimatorKind,
) -> Result<ShotEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut var) = (0.0, 0.0);
    for (g, t) in h.terms.iter().enumerate() {
        if t.is_identity() {
            mean += t.coefficient;
            continue;
        }
        let c = term_circuit(net, params, t)?;
        let mut est = noisy_estimate(&c, t, noise, shots, rng.gen(), kind)?;
        est.group = g;
        mean += t.coefficient * est.mean;
        var += t.coefficient * t.coefficient * est.std_error * est.std_error;
    }
    Ok(ShotEstimate { mean, std_error: libm::sqrt(var), shots, group: usize::MAX })
}

/// Exact noisy energy (infinite shots) of a circuit measuring every site.
pub fn exact_noisy_energy(circuit: &FlatCircuit, h: &Hamiltonian, noise: &NoiseModel) -> Result<f64> {
    let mut e = 0.0;
    for t in &h.terms {
        e += t.coefficient * if t.is_identity() { 1.0 } else { exact_noisy_expectation(circuit, t, noise)? };
    }
    Ok(e)
}

/// Noisy register state at the end of a measurement-free circuit.
pub fn final_noisy_density(circuit: &FlatCircuit, noise: &NoiseModel) -> Result<RegisterDensity> {
    let mut rho = RegisterDensity::zero_state(circuit.n_qubits);
    for op in &circuit.ops {
        if !op.is_gate() {
            return Err(Error::InvalidArgument("final density needs a measurement-free circuit".into()));
        }
        apply_forward(&mut rho, op, &[], noise);
    }
    Ok(rho)
}

/// `Tr(P ρ)` for the Pauli string of `term`, qubit `s` being site `s`.
pub fn pauli_expectation(rho: &RegisterDensity, term: &PauliTerm) -> f64 {
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
    for &(s, p) in term.factors() {
        match p {
            Pauli::X => x |= 1 << s,
            Pauli::Z => z |= 1 << s,
            Pauli::Y => {
                x |= 1 << s;
                z |= 1 << s;
                ny += 1;
            }
        }
    }
    let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][ny % 4];
    let d = 1usize << rho.n_qubits;
    // Tr(P ρ) = Σ_b ⟨b|P ρ|b⟩ with P|c⟩ = phase (−1)^{|c & z|} |c ⊕ x⟩.
    let mut acc = ZERO;
    for b in 0..d {
        let c = b ^ x;
        let sign = if (c & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += rho.data[c * d + b] * sign;
    }
    (acc * phase).re
}
