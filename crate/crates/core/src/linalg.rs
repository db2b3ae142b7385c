//! Dense complex matrices and the bit-indexed kernels shared by the simulators.
//!
//! Basis convention everywhere: wire `q` of an `n`-wire register is bit `q`
//! of the basis index (little endian).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.data[k * n + k] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs` where `rhs` occupies the low bits.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Matrix::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..rhs.rows {
                    for c2 in 0..rhs.cols {
                        out.set(r1 * rhs.rows + r2, c1 * rhs.cols + c2, a * rhs.get(r2, c2));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self.get(k, k)).sum()
    }

    /// Largest entry modulus of `self - 1`.
    pub fn max_identity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((self.get(r, c) - target).norm());
            }
        }
        worst
    }

    /// Largest entry modulus of `U U† - 1`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.matmul(&self.adjoint()).max_identity_deviation()
    }
}

/// Applies a 2x2 gate on bit `q` of a row-major buffer whose leading index is
/// a register of `n` bits followed by `stride` trailing entries. With
/// `stride = 1` this is a statevector update; with `stride = cols` it left
/// multiplies a matrix.
pub fn apply_1q(data: &mut [C64], q: usize, stride: usize, g: &[[C64; 2]; 2]) {
    let step = (1usize << q) * stride;
    let block = step * 2;
    for base in (0..data.len()).step_by(block) {
        for off in 0..step {
            let i0 = base + off;
            let i1 = i0 + step;
            let a = data[i0];
            let b = data[i1];
            data[i0] = g[0][0] * a + g[0][1] * b;
            data[i1] = g[1][0] * a + g[1][1] * b;
        }
    }
}

/// Controlled-NOT on the leading register of `data` (see [`apply_1q`]).
pub fn apply_cx(data: &mut [C64], control: usize, target: usize, stride: usize) {
    let n_rows = data.len() / stride;
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    for r in 0..n_rows {
        if r & cbit != 0 && r & tbit == 0 {
            let r2 = r | tbit;
            for k in 0..stride {
                data.swap(r * stride + k, r2 * stride + k);
            }
        }
    }
}

/// Applies a 2x2 gate on bit `q` of the column index of a row-major matrix
/// with `cols` columns, i.e. right multiplication by `g^T` on that bit.
/// Used to conjugate density matrices: `rho -> g rho g†` is `apply_1q` with
/// `g` followed by `apply_1q_cols` with `conj(g)`.
pub fn apply_1q_cols(data: &mut [C64], q: usize, cols: usize, g: &[[C64; 2]; 2]) {
    let step = 1usize << q;
    let rows = data.len() / cols;
    for r in 0..rows {
        let row = &mut data[r * cols..(r + 1) * cols];
        for base in (0..cols).step_by(step * 2) {
            for off in 0..step {
                let i0 = base + off;
                let i1 = i0 + step;
                let a = row[i0];
                let b = row[i1];
                row[i0] = g[0][0] * a + g[0][1] * b;
                row[i1] = g[1][0] * a + g[1][1] * b;
            }
        }
    }
}

/// Controlled-NOT on the column index of a row-major matrix.
pub fn apply_cx_cols(data: &mut [C64], control: usize, target: usize, cols: usize) {
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    let rows = data.len() / cols;
    for r in 0..rows {
        let row = &mut data[r * cols..(r + 1) * cols];
        for c in 0..cols {
            if c & cbit != 0 && c & tbit == 0 {
                row.swap(c, c | tbit);
            }
        }
    }
}

pub fn conj_gate(g: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[g[0][0].conj(), g[0][1].conj()], [g[1][0].conj(), g[1][1].conj()]]
}

pub fn dagger_gate(g: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]]
}

/// Maps every index of an `n`-bit register through a bit permutation:
/// bit `k` of the old index moves to bit `perm[k]` of the new one.
pub fn permutation_table(perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut table = vec![0usize; 1 << n];
    for (old, slot) in table.iter_mut().enumerate() {
        let mut new = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            if old >> k & 1 == 1 {
                new |= 1 << p;
            }
        }
        *slot = new;
    }
    table
}

/// Permutes both indices of a square row-major matrix over an `n`-bit register.
pub fn permute_square(data: &[C64], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return data.to_vec();
    }
    let table = permutation_table(perm);
    let d = table.len();
    let mut out = vec![ZERO; d * d];
    for r in 0..d {
        let nr = table[r] * d;
        let row = &data[r * d..(r + 1) * d];
        for (c, v) in row.iter().enumerate() {
            out[nr + table[c]] = *v;
        }
    }
    out
}

/// Permutes the index of a vector over an `n`-bit register.
pub fn permute_vector(data: &[C64], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return data.to_vec();
    }
    let table = permutation_table(perm);
    let mut out = vec![ZERO; data.len()];
    for (k, v) in data.iter().enumerate() {
        out[table[k]] = *v;
    }
    out
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_roundtrip() {
        let perm = [2usize, 0, 1];
        let inv = [1usize, 2, 0];
        let v: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 0.0)).collect();
        let w = permute_vector(&permute_vector(&v, &perm), &inv);
        assert_eq!(v, w);
        // bit 0 of old index 1 lands on bit 2
        assert_eq!(permute_vector(&v, &perm)[4], v[1]);
    }

    #[test]
    fn cx_matches_matrix() {
        let mut m = Matrix::identity(4);
        apply_cx(&mut m.data, 0, 1, 4);
        // |01> (bit0 = 1) -> |11>
        assert_eq!(m.get(3, 1), ONE);
        assert_eq!(m.get(1, 3), ONE);
        assert_eq!(m.get(0, 0), ONE);
    }
}
