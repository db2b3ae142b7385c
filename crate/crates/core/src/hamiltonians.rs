//! Benchmark spin Hamiltonians as sums of weighted Pauli strings.
//!
//! Sites are indexed row-major, `s = m * cols + n`, and site `s` is bit `s` of
//! a many-body basis index. Operators are σ matrices with eigenvalues ±1.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        let data = match self {
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, -I, I, ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        Matrix::from_vec(2, 2, data)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A real-weighted Pauli string. An empty factor list is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    factors: Vec<(usize, Pauli)>,
}

/// A single Pauli-string observable request.
pub type ObservableRequest = PauliTerm;

impl PauliTerm {
    pub fn new(coefficient: f64, mut factors: Vec<(usize, Pauli)>) -> Result<Self> {
        factors.sort();
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTerm(format!("duplicate site in {factors:?}")));
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidTerm("non-finite coefficient".into()));
        }
        Ok(Self { coefficient, factors })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self { coefficient, factors: Vec::new() }
    }

    /// Builds a term from `(row, col)` coordinates on a lattice with `cols` columns.
    pub fn at(coefficient: f64, factors: &[((usize, usize), Pauli)], cols: usize) -> Result<Self> {
        Self::new(coefficient, factors.iter().map(|&((m, n), p)| (m * cols + n, p)).collect())
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn sites(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.0).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Dense operator on the term's own sites, bit `q` belonging to the
    /// `q`-th factor; includes the coefficient.
    pub fn local_matrix(&self) -> Matrix {
        let mut m = Matrix::from_vec(1, 1, vec![C64::new(self.coefficient, 0.0)]);
        for &(_, p) in &self.factors {
            m = p.matrix().kron(&m);
        }
        m
    }

    fn masks(&self) -> (usize, usize, usize) {
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
        for &(s, p) in &self.factors {
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
        (x, z, ny)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<PauliTerm>,
}

/// Nearest-neighbour bonds of an open `rows x cols` square lattice.
pub fn nearest_neighbor_bonds(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut bonds = Vec::new();
    for m in 0..rows {
        for n in 0..cols {
            let s = m * cols + n;
            if n + 1 < cols {
                bonds.push((s, s + 1));
            }
            if m + 1 < rows {
                bonds.push((s, s + cols));
            }
        }
    }
    bonds
}

/// Diagonal next-nearest-neighbour bonds of an open square lattice.
pub fn diagonal_bonds(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut bonds = Vec::new();
    for m in 0..rows.saturating_sub(1) {
        for n in 0..cols {
            let s = m * cols + n;
            if n + 1 < cols {
                bonds.push((s, s + cols + 1));
            }
            if n >= 1 {
                bonds.push((s, s + cols - 1));
            }
        }
    }
    bonds
}

/// `λ Σ X_i + Δ Σ_<ij> Z_i Z_j` with open boundaries.
pub fn build_tfi(rows: usize, cols: usize, lambda: f64, delta: f64) -> Hamiltonian {
    let mut terms = Vec::new();
    for s in 0..rows * cols {
        terms.push(PauliTerm { coefficient: lambda, factors: vec![(s, Pauli::X)] });
    }
    for (a, b) in nearest_neighbor_bonds(rows, cols) {
        terms.push(PauliTerm { coefficient: delta, factors: vec![(a, Pauli::Z), (b, Pauli::Z)] });
    }
    Hamiltonian { rows, cols, terms }
}

/// `J1 Σ_<ij> σ_i·σ_j + J2 Σ_<<ij>> σ_i·σ_j` with open boundaries.
pub fn build_j1j2(rows: usize, cols: usize, j1: f64, j2: f64) -> Hamiltonian {
    let mut terms = Vec::new();
    let mut push = |coef: f64, a: usize, b: usize| {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push(PauliTerm { coefficient: coef, factors: vec![(a, p), (b, p)] });
        }
    };
    for (a, b) in nearest_neighbor_bonds(rows, cols) {
        push(j1, a, b);
    }
    for (a, b) in diagonal_bonds(rows, cols) {
        push(j2, a, b);
    }
    Hamiltonian { rows, cols, terms }
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        for t in &self.terms {
            if let Some(&(s, _)) = t.factors.iter().find(|f| f.0 >= n) {
                return Err(Error::SiteOutOfBounds(s / self.cols.max(1), s % self.cols.max(1)));
            }
        }
        Ok(())
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&PauliTerm) -> bool) -> Hamiltonian {
        Hamiltonian { rows: self.rows, cols: self.cols, terms: self.terms.iter().filter(|t| keep(t)).cloned().collect() }
    }

    /// Matrix-free `out = H v` on the full `2^sites` space.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        let phases = [ONE, I, -ONE, -I];
        for t in &self.terms {
            let (x, z, ny) = t.masks();
            let base = phases[ny % 4] * t.coefficient;
            let neg = -base;
            for (b, &amp) in v.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let ph = if (b & z).count_ones() % 2 == 0 { base } else { neg };
                out[b ^ x] += ph * amp;
            }
        }
    }

    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mut hv = vec![ZERO; v.len()];
        self.apply(v, &mut hv);
        crate::linalg::inner(v, &hv).re
    }

    pub fn to_dense(&self) -> Matrix {
        let dim = self.dim();
        let mut m = Matrix::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        let mut col = vec![ZERO; dim];
        for c in 0..dim {
            e[c] = ONE;
            self.apply(&e, &mut col);
            for r in 0..dim {
                m.set(r, c, col[r]);
            }
            e[c] = ZERO;
        }
        m
    }

    /// Sums terms acting on the same set of sites into one local operator.
    /// Returns the identity part separately.
    pub fn grouped(&self) -> (f64, Vec<LocalObservable>) {
        let mut constant = 0.0;
        let mut groups: BTreeMap<Vec<usize>, Matrix> = BTreeMap::new();
        for t in &self.terms {
            if t.is_identity() {
                constant += t.coefficient;
                continue;
            }
            let sites = t.sites();
            let m = t.local_matrix();
            match groups.get_mut(&sites) {
                Some(acc) => acc.data.iter_mut().zip(&m.data).for_each(|(a, b)| *a += b),
                None => {
                    groups.insert(sites, m);
                }
            }
        }
        (constant, groups.into_iter().map(|(sites, matrix)| LocalObservable { sites, matrix }).collect())
    }
}

/// A Hermitian operator on a few sites; bit `q` of its index belongs to `sites[q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObservable {
    pub sites: Vec<usize>,
    pub matrix: Matrix,
}

impl LocalObservable {
    pub fn from_term(term: &PauliTerm) -> Self {
        Self { sites: term.sites(), matrix: term.local_matrix() }
    }
}
