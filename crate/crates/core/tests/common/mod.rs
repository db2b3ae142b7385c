//! Brute-force reference implementations used as oracles by the
//! integration tests. Nothing here calls the simulators under test; block
//! unitaries are rebuilt from dense Kronecker products and the whole
//! network is held as one statevector over every wire it ever allocates.

#![allow(dead_code)]

use qiso_core::linalg::C64;
use qiso_core::network::Network;

const Z0: C64 = C64::new(0.0, 0.0);
const O1: C64 = C64::new(1.0, 0.0);

pub type Dense = Vec<Vec<C64>>;

pub fn identity(d: usize) -> Dense {
    (0..d).map(|r| (0..d).map(|c| if r == c { O1 } else { Z0 }).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![Z0; m]; n];
    for r in 0..n {
        for k in 0..b.len() {
            let x = a[r][k];
            if x == Z0 {
                continue;
            }
            for c in 0..m {
                out[r][c] += x * b[k][c];
            }
        }
    }
    out
}

pub fn u3_matrix(t: f64, p: f64, l: f64) -> Dense {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let e = |a: f64| C64::new(a.cos(), a.sin());
    vec![vec![O1 * c, -e(l) * s], vec![e(p) * s, e(p + l) * c]]
}

/// `g` on wire `q` of a `w`-wire register, built entry by entry.
pub fn embed_1q(g: &Dense, q: usize, w: usize) -> Dense {
    let d = 1 << w;
    let mut out = vec![vec![Z0; d]; d];
    for r in 0..d {
        for c in 0..d {
            if (r ^ c) & !(1 << q) == 0 {
                out[r][c] = g[(r >> q) & 1][(c >> q) & 1];
            }
        }
    }
    out
}

pub fn embed_cx(control: usize, target: usize, w: usize) -> Dense {
    let d = 1 << w;
    let mut out = vec![vec![Z0; d]; d];
    for c in 0..d {
        let r = if (c >> control) & 1 == 1 { c ^ (1 << target) } else { c };
        out[r][c] = O1;
    }
    out
}

/// Block unitary of `layers` repetitions of "U3 on every wire, then CX from
/// each wire to the next, cyclically".
pub fn block_unitary(w: usize, layers: usize, params: &[f64]) -> Dense {
    assert_eq!(params.len(), 3 * w * layers);
    let mut u = identity(1 << w);
    for layer in 0..layers {
        for wire in 0..w {
            let a = &params[3 * (layer * w + wire)..3 * (layer * w + wire) + 3];
            u = matmul(&embed_1q(&u3_matrix(a[0], a[1], a[2]), wire, w), &u);
        }
        if w >= 2 {
            for k in 0..w {
                u = matmul(&embed_cx(k, (k + 1) % w, w), &u);
            }
        }
    }
    u
}

/// The whole network as a pure state over physical plus spare wires.
pub struct BruteState {
    pub psi: Vec<C64>,
    pub n_wires: usize,
    /// Global wire holding site `s`'s physical qubit.
    pub phys: Vec<usize>,
}

pub fn brute_force(net: &Network, params: &[f64]) -> BruteState {
    let n_bq = net.spec.n_bq;
    let mut psi = vec![O1];
    let mut n_wires = 0usize;
    let mut bond_wires: Vec<Vec<usize>> = vec![Vec::new(); net.bonds.len()];
    let mut phys = vec![usize::MAX; net.n_sites()];
    for &s in &net.order {
        let site = &net.sites[s];
        let w = site.wires();
        let mut local: Vec<usize> = Vec::with_capacity(w);
        for &b in &site.inputs {
            assert_eq!(bond_wires[b].len(), n_bq, "bond consumed before it was produced");
            local.extend(bond_wires[b].iter().copied());
        }
        while local.len() < w {
            local.push(n_wires);
            n_wires += 1;
            psi.extend(std::iter::repeat(Z0).take(psi.len()));
        }
        let p = &params[site.param_offset..site.param_offset + site.param_count];
        let u = block_unitary(w, net.spec.n_bl, p);
        apply_on(&mut psi, &u, &local);
        phys[s] = local[0];
        for (k, &b) in site.outputs.iter().enumerate() {
            bond_wires[b] = local[1 + k * n_bq..1 + (k + 1) * n_bq].to_vec();
        }
    }
    BruteState { psi, n_wires, phys }
}

/// Applies the dense `u` to the given global wires (local wire `j` is
/// `wires[j]`).
pub fn apply_on(psi: &mut [C64], u: &Dense, wires: &[usize]) {
    let w = wires.len();
    let mask: usize = wires.iter().map(|&q| 1usize << q).sum();
    let spread = |local: usize| -> usize { (0..w).filter(|j| local >> j & 1 == 1).map(|j| 1 << wires[j]).sum() };
    let offsets: Vec<usize> = (0..1 << w).map(spread).collect();
    let mut buf = vec![Z0; 1 << w];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        for (k, o) in offsets.iter().enumerate() {
            buf[k] = psi[base | o];
        }
        for (r, o) in offsets.iter().enumerate() {
            psi[base | o] = u[r].iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

impl BruteState {
    fn phys_index(&self, global: usize) -> usize {
        self.phys.iter().enumerate().filter(|(_, &g)| global >> g & 1 == 1).map(|(s, _)| 1 << s).sum()
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ| P |ψ⟩` for a Pauli string given as `(site, 'X' | 'Y' | 'Z')`.
    pub fn pauli(&self, factors: &[(usize, char)]) -> f64 {
        let mut out = self.psi.clone();
        for &(s, p) in factors {
            let g = match p {
                'X' => vec![vec![Z0, O1], vec![O1, Z0]],
                'Y' => vec![vec![Z0, C64::new(0.0, -1.0)], vec![C64::new(0.0, 1.0), Z0]],
                'Z' => vec![vec![O1, Z0], vec![Z0, -O1]],
                _ => panic!("unknown Pauli {p}"),
            };
            apply_on(&mut out, &g, &[self.phys[s]]);
        }
        self.psi.iter().zip(&out).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    /// Distribution of physical outcomes, indexed with site `s` as bit `s`.
    pub fn marginal(&self) -> Vec<f64> {
        let mut p = vec![0.0; 1 << self.phys.len()];
        for (g, z) in self.psi.iter().enumerate() {
            p[self.phys_index(g)] += z.norm_sqr();
        }
        p
    }

    /// `Σ_i ⟨φ_i| ρ_phys |φ_i⟩` for orthonormal reference states over the sites.
    pub fn fidelity(&self, reference: &[Vec<C64>]) -> f64 {
        let spare_mask: usize = (0..self.n_wires).filter(|q| !self.phys.contains(q)).map(|q| 1 << q).sum();
        let mut total = 0.0;
        for phi in reference {
            let mut overlap: std::collections::BTreeMap<usize, C64> = Default::default();
            for (g, z) in self.psi.iter().enumerate() {
                *overlap.entry(g & spare_mask).or_insert(Z0) += phi[self.phys_index(g)].conj() * z;
            }
            total += overlap.values().map(|z| z.norm_sqr()).sum::<f64>();
        }
        total
    }
}

/// Dense Hamiltonian from `(coefficient, factors)` terms, built by
/// Kronecker embedding.
pub fn dense_hamiltonian(n: usize, terms: &[(f64, Vec<(usize, char)>)]) -> Dense {
    let d = 1 << n;
    let mut h = vec![vec![Z0; d]; d];
    for (c, factors) in terms {
        let mut m = identity(d);
        for &(s, p) in factors {
            let g = match p {
                'X' => vec![vec![Z0, O1], vec![O1, Z0]],
                'Y' => vec![vec![Z0, C64::new(0.0, -1.0)], vec![C64::new(0.0, 1.0), Z0]],
                'Z' => vec![vec![O1, Z0], vec![Z0, -O1]],
                _ => panic!("unknown Pauli {p}"),
            };
            m = matmul(&embed_1q(&g, s, n), &m);
        }
        for r in 0..d {
            for k in 0..d {
                h[r][k] += m[r][k] * *c;
            }
        }
    }
    h
}

/// Exact distribution of the classical record of an OpenQASM 3 program made
/// of `U`, `cx`, `measure` and `reset`, by branching on every measurement.
pub fn qasm_distribution(text: &str) -> Vec<f64> {
    let mut n_qubits = 0;
    let mut n_bits = 0;
    let mut branches: Vec<(Vec<C64>, usize)> = Vec::new();
    let num = |s: &str| -> usize { s.trim().trim_start_matches("q[").trim_start_matches("c[").trim_end_matches(']').parse().unwrap() };
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let line = line.trim_end_matches(';');
        if line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        } else if let Some(rest) = line.strip_prefix("qubit[") {
            n_qubits = rest.split(']').next().unwrap().parse().unwrap();
            let mut psi = vec![Z0; 1 << n_qubits];
            psi[0] = O1;
            branches = vec![(psi, 0)];
        } else if let Some(rest) = line.strip_prefix("bit[") {
            n_bits = rest.split(']').next().unwrap().parse().unwrap();
        } else if let Some(rest) = line.strip_prefix("U(") {
            let (args, target) = rest.split_once(')').unwrap();
            let a: Vec<f64> = args.split(',').map(|x| x.trim().parse().unwrap()).collect();
            let g = u3_matrix(a[0], a[1], a[2]);
            let q = num(target);
            for (psi, _) in &mut branches {
                apply_on(psi, &g, &[q]);
            }
        } else if let Some(rest) = line.strip_prefix("cx ") {
            let (c, t) = rest.split_once(',').unwrap();
            let u = embed_cx(0, 1, 2);
            for (psi, _) in &mut branches {
                apply_on(psi, &u, &[num(c), num(t)]);
            }
        } else if let Some((bit, q)) = line.split_once("= measure") {
            let (bit, q) = (num(bit), num(q));
            branches = split(branches, q, |rec, outcome| rec | outcome << bit);
        } else if let Some(q) = line.strip_prefix("reset ") {
            let q = num(q);
            let x = vec![vec![Z0, O1], vec![O1, Z0]];
            branches = split(branches, q, |rec, _| rec);
            for (psi, _) in &mut branches {
                if psi.iter().enumerate().any(|(k, z)| k >> q & 1 == 1 && z.norm_sqr() > 0.0) {
                    apply_on(psi, &x, &[q]);
                }
            }
        } else {
            panic!("unsupported QASM line: {line}");
        }
    }
    let _ = n_qubits;
    let mut p = vec![0.0; 1 << n_bits];
    for (psi, rec) in branches {
        p[rec] += psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    p
}

fn split(branches: Vec<(Vec<C64>, usize)>, q: usize, record: impl Fn(usize, usize) -> usize) -> Vec<(Vec<C64>, usize)> {
    let mut out = Vec::new();
    for (psi, rec) in branches {
        for outcome in 0..2 {
            let proj: Vec<C64> =
                psi.iter().enumerate().map(|(k, z)| if k >> q & 1 == outcome { *z } else { Z0 }).collect();
            if proj.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-30 {
                out.push((proj, record(rec, outcome)));
            }
        }
    }
    out
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Expected total variation between `p` and the histogram of `shots`
/// independent draws from it, from the binomial mean absolute deviation
/// `E|X - Np| = 2 (m+1) C(N, m+1) p^(m+1) (1-p)^(N-m)`, `m = floor(Np)`.
pub fn ideal_sampler_tv(p: &[f64], shots: usize) -> f64 {
    let n = shots as f64;
    let ln_choose = |k: f64| libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0);
    let mad = |q: f64| -> f64 {
        if q <= 0.0 || q >= 1.0 {
            return 0.0;
        }
        let m = (n * q).floor();
        let ln = (2.0 * (m + 1.0)).ln() + ln_choose(m + 1.0) + (m + 1.0) * q.ln() + (n - m) * (1.0 - q).ln();
        ln.exp()
    };
    0.5 * p.iter().map(|&q| mad(q) / n).sum::<f64>()
}
