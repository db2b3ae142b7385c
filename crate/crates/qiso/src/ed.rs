//! Exact-diagonalization oracle with an on-disk cache.
//!
//! Spectra are stored as JSON under the cache directory, keyed by a hash of
//! the Hamiltonian; ground spaces go next to them as raw little-endian `f64`
//! pairs. The directory comes from `QISO_CACHE_DIR`, defaulting to
//! `.qiso-cache` in the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qiso_core::eigen::ground_eigenpairs;
use qiso_core::hamiltonians::Hamiltonian;
use qiso_core::linalg::C64;

use crate::CliError;

pub const CACHE_ENV: &str = "QISO_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdRecord {
    pub key: String,
    pub rows: usize,
    pub cols: usize,
    pub eigenvalues: Vec<f64>,
    pub degeneracy_tol: f64,
    /// Distinct levels and their multiplicities among the computed pairs.
    pub levels: Vec<(f64, usize)>,
}

impl EdRecord {
    pub fn level(&self, k: usize) -> Option<f64> {
        self.levels.get(k).map(|l| l.0)
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".qiso-cache"))
}

pub fn hamiltonian_key(h: &Hamiltonian, k: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{}x{};k={k};", h.rows, h.cols));
    for t in &h.terms {
        hasher.update(format!("{:?}", t.coefficient));
        for (s, p) in t.factors() {
            hasher.update(format!("{s}{}", p.symbol()));
        }
        hasher.update(";");
    }
    hasher.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_ground_space(path: &Path, vectors: &[Vec<C64>]) -> Result<(), CliError> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut bytes = Vec::with_capacity(16 + vectors.len() * dim * 16);
    bytes.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(dim as u64).to_le_bytes());
    for v in vectors {
        for z in v {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn read_ground_space(path: &Path) -> Option<Vec<Vec<C64>>> {
    let bytes = fs::read(path).ok()?;
    let word = |i: usize| -> Option<[u8; 8]> { bytes.get(8 * i..8 * i + 8)?.try_into().ok() };
    let count = u64::from_le_bytes(word(0)?) as usize;
    let dim = u64::from_le_bytes(word(1)?) as usize;
    if bytes.len() != 16 + count * dim * 16 {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    for v in 0..count {
        let base = 2 + 2 * v * dim;
        let vec = (0..dim)
            .map(|k| {
                let re = f64::from_le_bytes(word(base + 2 * k).unwrap());
                let im = f64::from_le_bytes(word(base + 2 * k + 1).unwrap());
                C64::new(re, im)
            })
            .collect();
        out.push(vec);
    }
    Some(out)
}

/// Lowest `k` eigenvalues of `h`, plus the ground space when requested,
/// served from the cache when present.
pub fn exact_spectrum(h: &Hamiltonian, k: usize, with_ground_space: bool) -> Result<(EdRecord, Option<Vec<Vec<C64>>>), CliError> {
    let dir = cache_dir();
    let key = hamiltonian_key(h, k);
    let json_path = dir.join(format!("ed-{key}.json"));
    let bin_path = dir.join(format!("ed-{key}.ground.bin"));
    let cached: Option<EdRecord> = fs::read_to_string(&json_path).ok().and_then(|t| serde_json::from_str(&t).ok());
    if let Some(record) = cached {
        if !with_ground_space {
            return Ok((record, None));
        }
        if let Some(space) = read_ground_space(&bin_path) {
            return Ok((record, Some(space)));
        }
    }
    let spectrum = ground_eigenpairs(h, k).map_err(|e| CliError::Runtime(e.to_string()))?;
    let record = EdRecord {
        key,
        rows: h.rows,
        cols: h.cols,
        eigenvalues: spectrum.eigenvalues.clone(),
        degeneracy_tol: spectrum.degeneracy_tol,
        levels: spectrum.levels(),
    };
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let text = serde_json::to_string_pretty(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&json_path, text).map_err(|e| io_error(&json_path, e))?;
    let space = spectrum.ground_space().to_vec();
    write_ground_space(&bin_path, &space)?;
    Ok((record, with_ground_space.then_some(space)))
}
