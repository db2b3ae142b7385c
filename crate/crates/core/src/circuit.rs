//! Flat circuits over a reusable qubit register: the holographic schedule of a
//! network, its OpenQASM 3 text, and the hardware-efficient baseline ansatz.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gates::{layered_pattern, u3, u3_derivative, PatternGate};
use crate::linalg::{apply_1q, apply_cx, C64, ZERO};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    /// Parameterized rotation; `param` is the global index of its θ angle.
    U3 { q: usize, angles: [f64; 3], param: usize },
    Cx { control: usize, target: usize },
    /// Measure the physical output of `site`, then reset the qubit.
    Measure { q: usize, site: usize },
    /// Reset a qubit whose content is discarded.
    Reset { q: usize },
}

impl Op {
    pub fn is_gate(&self) -> bool {
        matches!(self, Op::U3 { .. } | Op::Cx { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatCircuit {
    pub n_qubits: usize,
    /// Number of classical bits, one per physical site.
    pub n_sites: usize,
    pub ops: Vec<Op>,
}

/// Holographic schedule of the blocks selected by `include` (all when `None`)
/// in the network's primary order. Qubits are recycled lowest-index first.
pub fn schedule_network(net: &Network, params: &[f64], include: Option<&[bool]>) -> Result<FlatCircuit> {
    net.check_params(params)?;
    let nb = net.spec.n_bq;
    let mut free: BTreeSet<usize> = BTreeSet::new();
    let mut n_qubits = 0usize;
    let mut alloc_q = |free: &mut BTreeSet<usize>| match free.pop_first() {
        Some(q) => q,
        None => {
            n_qubits += 1;
            n_qubits - 1
        }
    };
    let mut carried: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ops = Vec::new();
    let selected = |s: usize| include.is_none_or(|m| m[s]);
    for &s in net.order.iter().filter(|&&s| selected(s)) {
        let site = &net.sites[s];
        let mut wires = Vec::with_capacity(site.wires());
        for &b in &site.inputs {
            for w in 0..nb {
                wires.push(carried.remove(&(b, w)).expect("bond produced before use"));
            }
        }
        while wires.len() < site.wires() {
            wires.push(alloc_q(&mut free));
        }
        let angles = net.site_params(params, s);
        for g in layered_pattern(site.wires(), net.spec.n_bl) {
            ops.push(match g {
                PatternGate::U3 { wire, param } => Op::U3 {
                    q: wires[wire],
                    angles: [angles[param], angles[param + 1], angles[param + 2]],
                    param: site.param_offset + param,
                },
                PatternGate::Cx { control, target } => Op::Cx { control: wires[control], target: wires[target] },
            });
        }
        ops.push(Op::Measure { q: wires[0], site: s });
        free.insert(wires[0]);
        for (k, &b) in site.outputs.iter().enumerate() {
            let live = net.bonds[b].to.is_some_and(selected);
            for (w, local) in site.output_wires(k, nb).enumerate() {
                if live {
                    carried.insert((b, w), wires[local]);
                } else {
                    ops.push(Op::Reset { q: wires[local] });
                    free.insert(wires[local]);
                }
            }
        }
        for local in site.discard_wires(nb) {
            ops.push(Op::Reset { q: wires[local] });
            free.insert(wires[local]);
        }
    }
    Ok(FlatCircuit { n_qubits, n_sites: net.n_sites(), ops })
}

/// OpenQASM 3 text of a network's full holographic schedule.
pub fn export_circuit(net: &Network, params: &[f64]) -> Result<String> {
    Ok(schedule_network(net, params, None)?.to_qasm())
}

impl FlatCircuit {
    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_gate()).count()
    }

    pub fn to_qasm(&self) -> String {
        let mut s = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
        s += &format!("qubit[{}] q;\nbit[{}] c;\n", self.n_qubits, self.n_sites);
        for op in &self.ops {
            s += &match *op {
                Op::U3 { q, angles: [t, p, l], .. } => format!("U({t:.17e}, {p:.17e}, {l:.17e}) q[{q}];\n"),
                Op::Cx { control, target } => format!("cx q[{control}], q[{target}];\n"),
                Op::Measure { q, site } => format!("c[{site}] = measure q[{q}];\nreset q[{q}];\n"),
                Op::Reset { q } => format!("reset q[{q}];\n"),
            };
        }
        s
    }

    pub fn param_count(&self) -> usize {
        self.ops.iter().filter_map(|o| if let Op::U3 { param, .. } = o { Some(param + 3) } else { None }).max().unwrap_or(0)
    }

    /// Copy with the rotation angles taken from `params`.
    pub fn with_params(&self, params: &[f64]) -> FlatCircuit {
        let mut c = self.clone();
        for op in &mut c.ops {
            if let Op::U3 { angles, param, .. } = op {
                angles.copy_from_slice(&params[*param..*param + 3]);
            }
        }
        c
    }

    /// Statevector after the unitary part, for circuits without mid-circuit
    /// measurement or reset.
    pub fn statevector(&self) -> Result<Vec<C64>> {
        let mut psi = vec![ZERO; 1 << self.n_qubits];
        psi[0] = C64::new(1.0, 0.0);
        for op in &self.ops {
            match *op {
                Op::U3 { q, angles: [t, p, l], .. } => apply_1q(&mut psi, q, 1, &u3(t, p, l)),
                Op::Cx { control, target } => apply_cx(&mut psi, control, target, 1),
                _ => return Err(Error::InvalidArgument("statevector needs a measurement-free circuit".into())),
            }
        }
        Ok(psi)
    }

    /// `⟨ψ|H|ψ⟩` and its exact gradient for a measurement-free circuit whose
    /// qubit `s` is site `s`, by a backward sweep over the gates.
    pub fn energy_and_gradient(&self, h: &crate::hamiltonians::Hamiltonian) -> Result<(f64, Vec<f64>)> {
        let mut psi = self.statevector()?;
        let mut lam = vec![ZERO; psi.len()];
        h.apply(&psi, &mut lam);
        let energy = crate::linalg::inner(&psi, &lam).re;
        let mut grad = vec![0.0; self.param_count()];
        for op in self.ops.iter().rev() {
            match *op {
                Op::U3 { q, angles: [t, p, l], param } => {
                    let inv = crate::linalg::dagger_gate(&u3(t, p, l));
                    apply_1q(&mut psi, q, 1, &inv);
                    for k in 0..3 {
                        let mut d = psi.clone();
                        apply_1q(&mut d, q, 1, &u3_derivative(t, p, l, k));
                        grad[param + k] = 2.0 * crate::linalg::inner(&lam, &d).re;
                    }
                    apply_1q(&mut lam, q, 1, &inv);
                }
                Op::Cx { control, target } => {
                    apply_cx(&mut psi, control, target, 1);
                    apply_cx(&mut lam, control, target, 1);
                }
                _ => unreachable!("checked by statevector"),
            }
        }
        Ok((energy, grad))
    }
}

/// Hardware-efficient ansatz: `depth` layers of U3 on every qubit followed by
/// a cyclic CNOT chain, on `rows * cols` qubits with qubit `s` = site `s`.
pub fn build_hea(rows: usize, cols: usize, depth: usize, params: &[f64]) -> Result<FlatCircuit> {
    let n = rows * cols;
    let expected = 3 * n * depth;
    if params.len() != expected {
        return Err(Error::ParamCount { expected, got: params.len() });
    }
    let ops = layered_pattern(n, depth)
        .into_iter()
        .map(|g| match g {
            PatternGate::U3 { wire, param } => {
                Op::U3 { q: wire, angles: [params[param], params[param + 1], params[param + 2]], param }
            }
            PatternGate::Cx { control, target } => Op::Cx { control, target },
        })
        .collect();
    Ok(FlatCircuit { n_qubits: n, n_sites: n, ops })
}

pub fn hea_gate_count(qubits: usize, depth: usize) -> usize {
    depth * crate::gates::gates_per_layer(qubits)
}

/// Depth whose gate count is closest to `target`, provided it lies within 10%.
pub fn matched_hea_depth(qubits: usize, target: usize) -> Result<usize> {
    let per = crate::gates::gates_per_layer(qubits).max(1);
    let lo = (target / per).max(1);
    [lo, lo + 1]
        .into_iter()
        .filter(|&d| (hea_gate_count(qubits, d) as f64 - target as f64).abs() <= 0.1 * target as f64)
        .min_by_key(|&d| hea_gate_count(qubits, d).abs_diff(target))
        .ok_or(Error::NoMatchingDepth { target })
}
