//! Unitary blocks realizing site tensors.
//!
//! A block acts on `w` local wires. Inputs occupy the wires in the order
//! left bond, top bond, diagonal bond, fresh `|0>` wires; outputs are read from
//! the same wires in the order physical, right bond, bottom bond, diagonal
//! bond, discarded. With bit `q` of a basis index belonging to local wire `q`,
//! the site tensor is `A[i][j][k][l][p] = <p k l| U |i j 0>`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gates::{self, PatternGate};
use crate::linalg::{apply_1q, apply_cx, dagger_gate, Matrix, C64, ZERO};

/// Wire counts of each index group of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WireSignature {
    pub n_left: usize,
    pub n_top: usize,
    pub n_diag_in: usize,
    pub n_fresh: usize,
    pub n_phys: usize,
    pub n_right: usize,
    pub n_bottom: usize,
    pub n_diag_out: usize,
    pub n_discard: usize,
}

impl WireSignature {
    /// Square-lattice block with `n_bq` qubits per bond. Missing left or top
    /// bonds are replaced by fresh wires so the unitary stays square.
    pub fn square(n_bq: usize, has_left: bool, has_top: bool) -> Self {
        let n_left = if has_left { n_bq } else { 0 };
        let n_top = if has_top { n_bq } else { 0 };
        Self {
            n_left,
            n_top,
            n_fresh: 1 + 2 * n_bq - n_left - n_top,
            n_phys: 1,
            n_right: n_bq,
            n_bottom: n_bq,
            ..Self::default()
        }
    }

    pub fn interior(n_bq: usize) -> Self {
        Self::square(n_bq, true, true)
    }

    pub fn inputs(&self) -> usize {
        self.n_left + self.n_top + self.n_diag_in + self.n_fresh
    }

    pub fn outputs(&self) -> usize {
        self.n_phys + self.n_right + self.n_bottom + self.n_diag_out + self.n_discard
    }

    /// Input wires carrying bonds (everything except fresh wires).
    pub fn bond_inputs(&self) -> usize {
        self.n_left + self.n_top + self.n_diag_in
    }

    pub fn wires(&self) -> usize {
        self.inputs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs() != self.outputs() {
            return Err(Error::NonSquareSignature { inputs: self.inputs(), outputs: self.outputs() });
        }
        if self.inputs() == 0 {
            return Err(Error::EmptyBlock);
        }
        Ok(())
    }

    pub fn param_count(&self, layers: usize) -> usize {
        layers * gates::params_per_layer(self.wires())
    }

    pub fn gate_count(&self, layers: usize) -> usize {
        layers * gates::gates_per_layer(self.wires())
    }
}

/// Rotation angles of a block, three per U3 gate, layer-major then wire-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub layers: usize,
    pub angles: Vec<f64>,
}

impl BlockParams {
    pub fn zeros(signature: &WireSignature, layers: usize) -> Self {
        Self { layers, angles: vec![0.0; signature.param_count(layers)] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub signature: WireSignature,
    pub params: BlockParams,
    pub unitary: Matrix,
}

impl Block {
    /// Wraps an arbitrary matrix without checking unitarity.
    pub fn with_matrix(signature: WireSignature, params: BlockParams, unitary: Matrix) -> Self {
        Self { signature, params, unitary }
    }

    /// The `t = 0` slice: columns of `U` whose fresh input wires are zero,
    /// as a `2^w x 2^(bond inputs)` matrix.
    pub fn isometry(&self) -> Matrix {
        let dim = self.unitary.rows;
        let cols = 1usize << self.signature.bond_inputs();
        let mut out = Matrix::zeros(dim, cols);
        for r in 0..dim {
            for c in 0..cols {
                out.set(r, c, self.unitary.get(r, c));
            }
        }
        out
    }
}

/// Composes the layered U3/CNOT pattern into a dense unitary.
pub fn build_block(signature: WireSignature, params: BlockParams) -> Result<Block> {
    signature.validate()?;
    let expected = signature.param_count(params.layers);
    if params.angles.len() != expected {
        return Err(Error::ParamCount { expected, got: params.angles.len() });
    }
    let unitary = block_unitary(signature.wires(), params.layers, &params.angles);
    Ok(Block { signature, params, unitary })
}

pub(crate) fn block_unitary(wires: usize, layers: usize, angles: &[f64]) -> Matrix {
    let dim = 1usize << wires;
    let mut u = Matrix::identity(dim);
    for gate in gates::layered_pattern(wires, layers) {
        match gate {
            PatternGate::U3 { wire, param } => {
                let g = gates::u3(angles[param], angles[param + 1], angles[param + 2]);
                apply_1q(&mut u.data, wire, dim, &g);
            }
            PatternGate::Cx { control, target } => apply_cx(&mut u.data, control, target, dim),
        }
    }
    u
}

/// Largest entry deviation of `M M†` from the identity, where `M` is the
/// fresh-wire-zero slice reshaped as `M[(i,j), (p,k,l)]`.
pub fn isometry_deviation(block: &Block) -> f64 {
    let x = block.isometry();
    // M = X^T, so M M† = conj(X† X); the deviation is the same.
    x.adjoint().matmul(&x).max_identity_deviation()
}

/// Rank-5 site tensor with index order (left, top, right, bottom, physical).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub dims: [usize; 5],
    pub data: Vec<C64>,
}

impl SiteTensor {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize, p: usize) -> C64 {
        let [_, dj, dk, dl, dp] = self.dims;
        self.data[(((i * dj + j) * dk + k) * dl + l) * dp + p]
    }
}

/// Re-indexes the `t = 0` slice as `A[i][j][k][l][p]`. Only defined for
/// square-lattice signatures (no diagonal or discarded wires).
pub fn block_tensor(block: &Block) -> Result<SiteTensor> {
    let s = block.signature;
    if s.n_diag_in + s.n_diag_out + s.n_discard != 0 {
        return Err(Error::InvalidArgument("site tensor needs a square-lattice signature".into()));
    }
    let dims = [1 << s.n_left, 1 << s.n_top, 1 << s.n_right, 1 << s.n_bottom, 1 << s.n_phys];
    let mut data = Vec::with_capacity(dims.iter().product());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            let col = i | j << s.n_left;
            for k in 0..dims[2] {
                for l in 0..dims[3] {
                    for p in 0..dims[4] {
                        let row = p | k << s.n_phys | l << (s.n_phys + s.n_right);
                        data.push(block.unitary.get(row, col));
                    }
                }
            }
        }
    }
    Ok(SiteTensor { dims, data })
}

/// Given `g = ∂f/∂conj(U)` for a real function `f` that depends on the block
/// unitary sesquilinearly, returns `∂f/∂angle = 2 Re Tr(∂U† g)` for every angle.
pub fn angle_gradients(wires: usize, layers: usize, angles: &[f64], g: &Matrix) -> Vec<f64> {
    let dim = 1usize << wires;
    let pattern = gates::layered_pattern(wires, layers);
    let per_layer = gates::gates_per_layer(wires);
    let rotations = |layer: usize| -> Vec<[[C64; 2]; 2]> {
        (0..wires)
            .map(|w| {
                let p = 3 * (layer * wires + w);
                gates::u3(angles[p], angles[p + 1], angles[p + 2])
            })
            .collect()
    };
    let apply_chain = |data: &mut [C64], stride: usize, reverse: bool| {
        if wires < 2 {
            return;
        }
        let order: Vec<usize> = if reverse { (0..wires).rev().collect() } else { (0..wires).collect() };
        for c in order {
            apply_cx(data, c, (c + 1) % wires, stride);
        }
    };

    // prefixes[l] = L_{l-1} ... L_0 (product of the first l layers)
    let mut prefixes = Vec::with_capacity(layers);
    let mut p = Matrix::identity(dim);
    for layer in 0..layers {
        prefixes.push(p.clone());
        for gate in &pattern[layer * per_layer..(layer + 1) * per_layer] {
            match *gate {
                PatternGate::U3 { wire, param } => {
                    let u = gates::u3(angles[param], angles[param + 1], angles[param + 2]);
                    apply_1q(&mut p.data, wire, dim, &u);
                }
                PatternGate::Cx { control, target } => apply_cx(&mut p.data, control, target, dim),
            }
        }
    }

    let mut grads = vec![0.0; layers * 3 * wires];
    // k = S_l† g with S_l = L_last ... L_{l+1} C
    let mut k = g.clone();
    apply_chain(&mut k.data, dim, true);
    for layer in (0..layers).rev() {
        let h = k.matmul(&prefixes[layer].adjoint());
        let rots = rotations(layer);
        for q in 0..wires {
            let t = contract_except(&h.data, wires, q, &rots);
            let p0 = 3 * (layer * wires + q);
            for comp in 0..3 {
                let d = gates::u3_derivative(angles[p0], angles[p0 + 1], angles[p0 + 2], comp);
                let mut acc = ZERO;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += d[a][b].conj() * t[a][b];
                    }
                }
                grads[p0 + comp] = 2.0 * acc.re;
            }
        }
        if layer > 0 {
            for (w, r) in rots.iter().enumerate() {
                apply_1q(&mut k.data, w, dim, &dagger_gate(r));
            }
            apply_chain(&mut k.data, dim, true);
        }
    }
    grads
}

/// Contracts the row/column bits of every wire except `keep` of a
/// `2^w x 2^w` row-major matrix with `conj(rots[r][a][b])`, returning the
/// remaining 2x2 block `T[a][b]`.
fn contract_except(h: &[C64], wires: usize, keep: usize, rots: &[[[C64; 2]; 2]]) -> [[C64; 2]; 2] {
    // index layout: bits 0..w = column, bits w..2w = row
    let mut data = h.to_vec();
    let mut col_bits: Vec<usize> = (0..wires).collect();
    let mut row_bits: Vec<usize> = (wires..2 * wires).collect();
    let mut nbits = 2 * wires;
    for r in (0..wires).rev() {
        if r == keep {
            continue;
        }
        let cb = col_bits[r];
        let rb = row_bits[r];
        let g = &rots[r];
        let new_bits = nbits - 2;
        let mut out = vec![ZERO; 1 << new_bits];
        let (lo, hi) = if cb < rb { (cb, rb) } else { (rb, cb) };
        for (idx, slot) in out.iter_mut().enumerate() {
            // reinsert two zero bits at positions lo and hi
            let low_mask = (1usize << lo) - 1;
            let base = (idx & low_mask) | ((idx & !low_mask) << 1);
            let low_mask2 = (1usize << hi) - 1;
            let base = (base & low_mask2) | ((base & !low_mask2) << 1);
            let mut acc = ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    let full = base | a << rb | b << cb;
                    acc += data[full] * g[a][b].conj();
                }
            }
            *slot = acc;
        }
        data = out;
        nbits = new_bits;
        let shift = |bit: usize| bit - (bit > lo) as usize - (bit > hi) as usize;
        for w in 0..wires {
            if w != r {
                col_bits[w] = shift(col_bits[w]);
                row_bits[w] = shift(row_bits[w]);
            }
        }
    }
    let cb = col_bits[keep];
    let rb = row_bits[keep];
    let mut t = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            t[a][b] = data[a << rb | b << cb];
        }
    }
    t
}
