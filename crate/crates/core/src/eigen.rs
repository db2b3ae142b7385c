//! Lowest eigenpairs of Hermitian operators by Lanczos iteration with full
//! reorthogonalization, restarts and locking of converged vectors.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;
use crate::linalg::{inner, norm_sqr, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Convergence threshold on the residual norm `‖Hv − θv‖`.
    pub tol: f64,
    pub degeneracy_tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_krylov: 120, max_restarts: 60, tol: 1e-10, degeneracy_tol: 1e-8, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
    pub degeneracy_tol: f64,
}

impl SpectrumResult {
    /// Distinct levels with their multiplicities among the computed pairs.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &e in &self.eigenvalues {
            match out.last_mut() {
                Some((first, count)) if (e - *first).abs() <= self.degeneracy_tol => *count += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Energy of the `k`-th distinct level (0 is the ground level).
    pub fn level(&self, k: usize) -> Option<f64> {
        self.levels().get(k).map(|l| l.0)
    }

    /// Orthonormal basis of the (possibly degenerate) ground space.
    pub fn ground_space(&self) -> &[Vec<C64>] {
        &self.eigenvectors[..self.levels()[0].1]
    }
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL.
/// `diag` receives the eigenvalues, `z` (row-major `n x n`) the eigenvectors as
/// columns. `off[i]` couples `i` and `i + 1`.
pub fn tridiagonal_eigen(diag: &mut [f64], off: &[f64], z: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    z.iter_mut().for_each(|x| *x = 0.0);
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NoConvergence(iter));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = diag[m] - diag[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for u in against {
            let c = inner(u, v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = libm::sqrt(norm_sqr(v));
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `k` lowest eigenpairs of the Hermitian operator `apply` on `dim` dimensions.
pub fn lowest_eigenpairs(
    dim: usize,
    k: usize,
    mut apply: impl FnMut(&[C64], &mut [C64]),
    cfg: &LanczosConfig,
) -> Result<SpectrumResult> {
    let k = k.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut values = Vec::new();
    let mut w = vec![ZERO; dim];
    let mut total_iters = 0;
    while locked.len() < k {
        let mut start: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let mut converged = None;
        for _ in 0..=cfg.max_restarts {
            orthogonalize(&mut start, &locked);
            if normalize(&mut start) < 1e-300 {
                return Err(Error::NoConvergence(total_iters));
            }
            let m_max = cfg.max_krylov.min(dim - locked.len()).max(1);
            let mut basis: Vec<Vec<C64>> = vec![start.clone()];
            let (mut alpha, mut beta) = (Vec::new(), Vec::new());
            let y = loop {
                let j = basis.len() - 1;
                apply(&basis[j], &mut w);
                total_iters += 1;
                let a = inner(&basis[j], &w).re;
                alpha.push(a);
                orthogonalize(&mut w, &locked);
                orthogonalize(&mut w, &basis);
                let b = libm::sqrt(norm_sqr(&w));
                let m = alpha.len();
                let exhausted = b < 1e-12 || m >= m_max;
                if m % 5 == 0 || exhausted {
                    let mut d = alpha.clone();
                    let mut z = vec![0.0; m * m];
                    tridiagonal_eigen(&mut d, &beta, &mut z)?;
                    let lowest = (0..m).min_by(|&x, &y| d[x].total_cmp(&d[y])).unwrap();
                    let y: Vec<f64> = (0..m).map(|r| z[r * m + lowest]).collect();
                    if (b * y[m - 1]).abs() < cfg.tol * 0.1 || exhausted {
                        break y;
                    }
                }
                beta.push(b);
                let next: Vec<C64> = w.iter().map(|x| x / b).collect();
                basis.push(next);
            };
            let mut x = vec![ZERO; dim];
            for (c, v) in y.iter().zip(&basis) {
                x.iter_mut().zip(v).for_each(|(a, b)| *a += b * *c);
            }
            orthogonalize(&mut x, &locked);
            normalize(&mut x);
            apply(&x, &mut w);
            let rq = inner(&x, &w).re;
            let res: f64 = libm::sqrt(w.iter().zip(&x).map(|(a, b)| (a - b * rq).norm_sqr()).sum::<f64>());
            if res < cfg.tol {
                converged = Some((rq, x));
                break;
            }
            start = x;
        }
        let (value, vector) = converged.ok_or(Error::NoConvergence(total_iters))?;
        values.push(value);
        locked.push(vector);
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(SpectrumResult {
        eigenvalues: idx.iter().map(|&i| values[i]).collect(),
        eigenvectors: idx.iter().map(|&i| locked[i].clone()).collect(),
        degeneracy_tol: cfg.degeneracy_tol,
    })
}

pub fn ground_eigenpairs(h: &Hamiltonian, k: usize) -> Result<SpectrumResult> {
    ground_eigenpairs_with(h, k, &LanczosConfig::default())
}

pub fn ground_eigenpairs_with(h: &Hamiltonian, k: usize, cfg: &LanczosConfig) -> Result<SpectrumResult> {
    h.validate()?;
    lowest_eigenpairs(h.dim(), k, |v, out| h.apply(v, out), cfg)
}
