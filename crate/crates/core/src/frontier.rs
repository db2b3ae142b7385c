//! Running contraction state over the live wires of a sweep, and the dense
//! kernels that push it through one block.
//!
//! Payload index bit `q` belongs to `labels[q]`. A density payload is a
//! row-major `2^n x 2^n` matrix, a pure payload a `2^n` vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{permute_square, permute_vector, Matrix, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Wire `wire` of bond `bond`.
    Bond { bond: usize, wire: usize },
    /// Physical output of a site.
    Phys(usize),
    /// Unused output of a site: dangling bond or discarded wire.
    Spare { site: usize, wire: usize },
    /// Reference-state index of a site, used by overlap contractions.
    Ref(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierMode {
    Pure,
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierOperator {
    pub labels: Vec<Label>,
    pub mode: FrontierMode,
    pub payload: Vec<C64>,
}

impl FrontierOperator {
    pub fn vacuum(mode: FrontierMode) -> Self {
        Self { labels: Vec::new(), mode, payload: vec![C64::new(1.0, 0.0)] }
    }

    pub fn width(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    /// Trace of a density payload, squared norm of a pure one.
    pub fn trace(&self) -> f64 {
        match self.mode {
            FrontierMode::Density => {
                let d = self.dim();
                (0..d).map(|k| self.payload[k * d + k].re).sum()
            }
            FrontierMode::Pure => self.payload.iter().map(|a| a.norm_sqr()).sum(),
        }
    }

    /// Reorders wires so that `front` occupies the low bits in the given order
    /// and the remaining labels keep their relative order above it.
    pub fn bring_to_front(&mut self, front: &[Label]) {
        let perm = front_permutation(&self.labels, front);
        self.apply_permutation(&perm);
    }

    pub fn apply_permutation(&mut self, perm: &[usize]) {
        if perm.iter().enumerate().all(|(a, &b)| a == b) {
            return;
        }
        self.payload = match self.mode {
            FrontierMode::Density => permute_square(&self.payload, perm),
            FrontierMode::Pure => permute_vector(&self.payload, perm),
        };
        let mut labels = self.labels.clone();
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old];
        }
        self.labels = labels;
    }
}

/// `perm[old] = new` moving `front` to the low positions.
pub fn front_permutation(labels: &[Label], front: &[Label]) -> Vec<usize> {
    let mut perm = vec![usize::MAX; labels.len()];
    let mut next = front.len();
    for (pos, l) in labels.iter().enumerate() {
        perm[pos] = match front.iter().position(|f| f == l) {
            Some(k) => k,
            None => {
                next += 1;
                next - 1
            }
        };
    }
    debug_assert!(front.iter().all(|f| labels.contains(f)));
    perm
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (a, &b) in perm.iter().enumerate() {
        inv[b] = a;
    }
    inv
}

/// Spreads the bits of `value` onto positions `wires`.
#[inline]
pub fn scatter_bits(value: usize, wires: &[usize]) -> usize {
    let mut out = 0;
    for (k, &w) in wires.iter().enumerate() {
        out |= ((value >> k) & 1) << w;
    }
    out
}

/// Kraus operators of a block restricted to its first `cols` input columns,
/// with output wires split into `kept` (new low bits, in order) and `traced`.
/// Returned as one stacked `(2^traced * 2^kept) x cols` matrix, `t`-major.
pub fn kraus_stack(unitary: &Matrix, cols: usize, kept: &[usize], traced: &[usize]) -> Matrix {
    let o = 1usize << kept.len();
    let nt = 1usize << traced.len();
    let mut k = Matrix::zeros(nt * o, cols);
    for t in 0..nt {
        let tb = scatter_bits(t, traced);
        for oo in 0..o {
            let row = tb | scatter_bits(oo, kept);
            let dst = (t * o + oo) * cols;
            k.data[dst..dst + cols].copy_from_slice(&unitary.data[row * unitary.cols..row * unitary.cols + cols]);
        }
    }
    k
}

/// `out_{rr'} = Σ_t L_t X_{rr'} L_t†` for a Hermitian `X` whose low `a` bits
/// are acted on. `ls` stacks the `b x a` maps `L_t`; returns a Hermitian
/// matrix with `b` low bits.
pub fn conjugate_blocks(x: &[C64], a_dim: usize, rest: usize, ls: &Matrix, b_dim: usize) -> Vec<C64> {
    let nt = ls.rows / b_dim;
    let d = a_dim * rest;
    let dn = b_dim * rest;
    let lc: Vec<C64> = ls.data.iter().map(|z| z.conj()).collect();
    let mut out = vec![ZERO; dn * dn];
    let mut tr = vec![ZERO; ls.rows * d];
    for r in 0..rest {
        let c0 = a_dim * r;
        // tr[(t, o), c] = Σ_i L[(t, o), i] X[(i + a r), c] for c ≥ c0.
        for row in 0..ls.rows {
            let dst = &mut tr[row * d..(row + 1) * d];
            dst[c0..].iter_mut().for_each(|z| *z = ZERO);
            for i in 0..a_dim {
                let l = ls.data[row * a_dim + i];
                if l == ZERO {
                    continue;
                }
                let src = &x[(i + c0) * d..(i + c0 + 1) * d];
                for (z, s) in dst[c0..].iter_mut().zip(&src[c0..]) {
                    *z += l * s;
                }
            }
        }
        for t in 0..nt {
            for o in 0..b_dim {
                let row = &tr[(t * b_dim + o) * d..(t * b_dim + o + 1) * d];
                let out_row = (o + b_dim * r) * dn;
                for r2 in r..rest {
                    let seg = &row[a_dim * r2..a_dim * (r2 + 1)];
                    for o2 in 0..b_dim {
                        let kc = &lc[(t * b_dim + o2) * a_dim..(t * b_dim + o2 + 1) * a_dim];
                        let mut acc = ZERO;
                        for (s, k) in seg.iter().zip(kc) {
                            acc += s * k;
                        }
                        out[out_row + o2 + b_dim * r2] += acc;
                    }
                }
            }
        }
    }
    for r in 0..rest {
        for r2 in r + 1..rest {
            for o in 0..b_dim {
                for o2 in 0..b_dim {
                    let v = out[(o + b_dim * r) * dn + o2 + b_dim * r2];
                    out[(o2 + b_dim * r2) * dn + o + b_dim * r] = v.conj();
                }
            }
        }
    }
    out
}

/// Conjugate-transposes every `b x a` block of a stacked matrix.
pub fn adjoint_stack(ls: &Matrix, b_dim: usize) -> Matrix {
    let nt = ls.rows / b_dim;
    let a = ls.cols;
    let mut out = Matrix::zeros(nt * a, b_dim);
    for t in 0..nt {
        for o in 0..b_dim {
            for i in 0..a {
                out.data[(t * a + i) * b_dim + o] = ls.data[(t * b_dim + o) * a + i].conj();
            }
        }
    }
    out
}

/// Environment of the Kraus operators: returns the stacked
/// `G_t = Σ_{r,r'} E_{r'r} K_t ρ_{rr'}` (same shape as `ks`), where `rho` has
/// the block inputs in its low bits and `e` the kept outputs in its low bits.
pub fn kraus_environment(rho: &[C64], e: &[C64], in_dim: usize, out_dim: usize, rest: usize, ks: &Matrix) -> Matrix {
    let d = in_dim * rest;
    let dn = out_dim * rest;
    let nt = ks.rows / out_dim;
    let mut g = Matrix::zeros(ks.rows, in_dim);
    let mut tr = vec![ZERO; ks.rows * d];
    for r in 0..rest {
        for row in 0..ks.rows {
            let dst = &mut tr[row * d..(row + 1) * d];
            dst.iter_mut().for_each(|z| *z = ZERO);
            for i in 0..in_dim {
                let k = ks.data[row * in_dim + i];
                if k == ZERO {
                    continue;
                }
                let src = &rho[(i + in_dim * r) * d..(i + in_dim * r + 1) * d];
                for (z, s) in dst.iter_mut().zip(src) {
                    *z += k * s;
                }
            }
        }
        // G_t[o, i] += Σ_{r'} Σ_{o'} E[(o + O r'), (o' + O r)] tr[(t, o'), (i + I r')]
        for t in 0..nt {
            for r2 in 0..rest {
                for o in 0..out_dim {
                    let e_row = &e[(o + out_dim * r2) * dn + out_dim * r..(o + out_dim * r2) * dn + out_dim * (r + 1)];
                    let g_row = &mut g.data[(t * out_dim + o) * in_dim..(t * out_dim + o + 1) * in_dim];
                    for (o2, &ev) in e_row.iter().enumerate() {
                        if ev == ZERO {
                            continue;
                        }
                        let src = &tr[(t * out_dim + o2) * d + in_dim * r2..(t * out_dim + o2) * d + in_dim * (r2 + 1)];
                        for (z, s) in g_row.iter_mut().zip(src) {
                            *z += ev * s;
                        }
                    }
                }
            }
        }
    }
    g
}

/// `ψ'[(a, r)] = Σ_i X[a, i] ψ[(i, r)]` for an `out x in` matrix `x`.
pub fn pure_apply(psi: &[C64], x: &Matrix, rest: usize) -> Vec<C64> {
    let (o, i_dim) = (x.rows, x.cols);
    let mut out = vec![ZERO; o * rest];
    for r in 0..rest {
        let src = &psi[i_dim * r..i_dim * (r + 1)];
        let dst = &mut out[o * r..o * (r + 1)];
        for (a, z) in dst.iter_mut().enumerate() {
            let row = &x.data[a * i_dim..(a + 1) * i_dim];
            let mut acc = ZERO;
            for (u, s) in row.iter().zip(src) {
                acc += u * s;
            }
            *z = acc;
        }
    }
    out
}

/// `Σ_{a,b} E[a,b] ρ[b,a]`.
pub fn trace_product(e: &[C64], rho: &[C64], dim: usize) -> C64 {
    let mut acc = ZERO;
    for a in 0..dim {
        for b in 0..dim {
            acc += e[a * dim + b] * rho[b * dim + a];
        }
    }
    acc
}
