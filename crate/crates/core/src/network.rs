//! Lattice networks of circuit blocks.
//!
//! Every bond carries `n_bq` wires and points from the site nearer the
//! orthogonality center `(0, 0)` to the site further away. A block's local
//! wires are laid out as
//!
//! * inputs: `[bond inputs in site order..., fresh...]`
//! * outputs: `[phys, bond outputs in site order..., discard...]`
//!
//! Bonds leaving the lattice are kept as dangling bonds with no consumer.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::blocks::{build_block, Block, BlockParams, WireSignature};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Square,
    Triangular,
    Honeycomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub rows: usize,
    pub cols: usize,
    pub n_bq: usize,
    pub n_bl: usize,
}

impl LatticeSpec {
    pub fn square(rows: usize, cols: usize, n_bq: usize, n_bl: usize) -> Self {
        Self { kind: LatticeKind::Square, rows, cols, n_bq, n_bl }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidLattice(format!("empty lattice {}x{}", self.rows, self.cols)));
        }
        if self.n_bq == 0 || self.n_bl == 0 {
            return Err(Error::InvalidLattice(format!("n_bq = {}, n_bl = {}", self.n_bq, self.n_bl)));
        }
        if self.kind == LatticeKind::Honeycomb && (self.rows * self.cols) % 2 == 1 {
            return Err(Error::InvalidLattice(format!(
                "honeycomb needs an even site count, got {}",
                self.rows * self.cols
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondDirection {
    Right,
    Down,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub from: usize,
    /// Consuming site, `None` for a dangling boundary bond.
    pub to: Option<usize>,
    pub direction: BondDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub coord: (usize, usize),
    pub signature: WireSignature,
    /// Incoming bond ids in local wire order.
    pub inputs: Vec<usize>,
    /// Outgoing bond ids in local wire order.
    pub outputs: Vec<usize>,
    pub param_offset: usize,
    pub param_count: usize,
}

impl Site {
    pub fn wires(&self) -> usize {
        self.signature.wires()
    }

    /// Local input wires of the `k`-th incoming bond.
    pub fn input_wires(&self, k: usize, n_bq: usize) -> core::ops::Range<usize> {
        k * n_bq..(k + 1) * n_bq
    }

    /// Local output wires of the `k`-th outgoing bond.
    pub fn output_wires(&self, k: usize, n_bq: usize) -> core::ops::Range<usize> {
        1 + k * n_bq..1 + (k + 1) * n_bq
    }

    pub fn discard_wires(&self, n_bq: usize) -> core::ops::Range<usize> {
        1 + self.outputs.len() * n_bq..self.wires()
    }

    pub fn bond_input_wires(&self, n_bq: usize) -> usize {
        self.inputs.len() * n_bq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: LatticeSpec,
    /// Sites in row-major index order.
    pub sites: Vec<Site>,
    pub bonds: Vec<Bond>,
    /// Primary sweep order.
    pub order: Vec<usize>,
    /// All sweep orders the simulator may choose between; `orders[0] == order`.
    pub orders: Vec<Vec<usize>>,
    pub n_params: usize,
}

pub fn build_network(spec: LatticeSpec) -> Result<Network> {
    spec.validate()?;
    let (rows, cols) = (spec.rows, spec.cols);
    let n = rows * cols;
    let idx = |m: usize, c: usize| m * cols + c;

    // Directed edges (from, to or dangling, direction) emitted per site.
    let mut bonds: Vec<Bond> = Vec::new();
    let mut outputs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut discards = vec![false; n];
    for m in 0..rows {
        for c in 0..cols {
            let s = idx(m, c);
            let mut dirs: Vec<(BondDirection, Option<usize>)> = Vec::new();
            let right = (c + 1 < cols).then(|| idx(m, c + 1));
            let down = (m + 1 < rows).then(|| idx(m + 1, c));
            match spec.kind {
                LatticeKind::Square => {
                    dirs.push((BondDirection::Right, right));
                    dirs.push((BondDirection::Down, down));
                }
                LatticeKind::Triangular => {
                    let diag = (m + 1 < rows && c + 1 < cols).then(|| idx(m + 1, c + 1));
                    dirs.push((BondDirection::Right, right));
                    dirs.push((BondDirection::Down, down));
                    dirs.push((BondDirection::Diagonal, diag));
                }
                LatticeKind::Honeycomb => {
                    dirs.push((BondDirection::Right, right));
                    if (m + c) % 2 == 0 {
                        dirs.push((BondDirection::Down, down));
                    } else {
                        discards[s] = true;
                    }
                }
            }
            for (direction, to) in dirs {
                outputs[s].push(bonds.len());
                bonds.push(Bond { from: s, to, direction });
            }
        }
    }

    let mut inputs: Vec<Vec<(BondDirection, usize)>> = vec![Vec::new(); n];
    for (id, b) in bonds.iter().enumerate() {
        if let Some(t) = b.to {
            inputs[t].push((b.direction, id));
        }
    }
    let rank = |d: BondDirection| match d {
        BondDirection::Right => 0,
        BondDirection::Down => 1,
        BondDirection::Diagonal => 2,
    };

    let nb = spec.n_bq;
    let mut sites = Vec::with_capacity(n);
    let mut offset = 0;
    for s in 0..n {
        let mut ins = core::mem::take(&mut inputs[s]);
        ins.sort_by_key(|&(d, _)| rank(d));
        let has = |d: BondDirection| ins.iter().any(|x| x.0 == d);
        let outs = &outputs[s];
        let has_out = |d: BondDirection| outs.iter().any(|&b| bonds[b].direction == d);
        let count = |present: bool| if present { nb } else { 0 };
        let n_discard = if discards[s] { nb } else { 0 };
        let mut sig = WireSignature {
            n_left: count(has(BondDirection::Right)),
            n_top: count(has(BondDirection::Down)),
            n_diag_in: count(has(BondDirection::Diagonal)),
            n_fresh: 0,
            n_phys: 1,
            n_right: count(has_out(BondDirection::Right)),
            n_bottom: count(has_out(BondDirection::Down)),
            n_diag_out: count(has_out(BondDirection::Diagonal)),
            n_discard,
        };
        let outputs_total = sig.outputs();
        sig.n_fresh = outputs_total - sig.bond_inputs();
        sig.validate()?;
        let param_count = sig.param_count(spec.n_bl);
        sites.push(Site {
            coord: (s / cols, s % cols),
            signature: sig,
            inputs: ins.into_iter().map(|x| x.1).collect(),
            outputs: outs.clone(),
            param_offset: offset,
            param_count,
        });
        offset += param_count;
    }

    let row_major: Vec<usize> = (0..n).collect();
    let col_major: Vec<usize> = (0..cols).flat_map(|c| (0..rows).map(move |m| m * cols + c)).collect();
    let orders = if cols >= rows { vec![col_major, row_major] } else { vec![row_major, col_major] };

    Ok(Network { spec, sites, bonds, order: orders[0].clone(), orders, n_params: offset })
}

impl Network {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_index(&self, m: usize, n: usize) -> Result<usize> {
        if m >= self.spec.rows || n >= self.spec.cols {
            return Err(Error::SiteOutOfBounds(m, n));
        }
        Ok(m * self.spec.cols + n)
    }

    pub fn predecessors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        self.sites[site].inputs.iter().map(move |&b| self.bonds[b].from)
    }

    pub fn gate_count(&self) -> usize {
        self.sites.iter().map(|s| s.signature.gate_count(self.spec.n_bl)).sum()
    }

    pub fn total_wires(&self) -> usize {
        self.sites.iter().map(|s| s.wires()).sum::<usize>() - self.bonds.iter().filter(|b| b.to.is_some()).count() * self.spec.n_bq
    }

    /// Membership mask over site indices of the ancestor closure of `sites`.
    pub fn cone_mask(&self, sites: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n_sites()];
        let mut stack: Vec<usize> = sites.to_vec();
        while let Some(s) = stack.pop() {
            if mask[s] {
                continue;
            }
            mask[s] = true;
            stack.extend(self.predecessors(s).filter(|&p| !mask[p]));
        }
        mask
    }

    /// All sites whose blocks can influence the physical wires of `coords`.
    pub fn causal_cone(&self, coords: &[(usize, usize)]) -> Result<BTreeSet<(usize, usize)>> {
        let idx = coords.iter().map(|&(m, n)| self.site_index(m, n)).collect::<Result<Vec<_>>>()?;
        Ok(self
            .cone_mask(&idx)
            .iter()
            .enumerate()
            .filter(|(_, &inside)| inside)
            .map(|(s, _)| self.sites[s].coord)
            .collect())
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParamCount { expected: self.n_params, got: params.len() });
        }
        Ok(())
    }

    pub fn site_params<'a>(&self, params: &'a [f64], site: usize) -> &'a [f64] {
        let s = &self.sites[site];
        &params[s.param_offset..s.param_offset + s.param_count]
    }

    /// Global parameter index -> (site, position within the block).
    pub fn param_location(&self, index: usize) -> Option<(usize, usize)> {
        self.sites
            .iter()
            .position(|s| index >= s.param_offset && index < s.param_offset + s.param_count)
            .map(|s| (s, index - self.sites[s].param_offset))
    }

    pub fn build_site_block(&self, params: &[f64], site: usize) -> Result<Block> {
        let s = &self.sites[site];
        build_block(s.signature, BlockParams { layers: self.spec.n_bl, angles: self.site_params(params, site).to_vec() })
    }

    pub fn build_blocks(&self, params: &[f64]) -> Result<Vec<Block>> {
        self.check_params(params)?;
        (0..self.n_sites()).map(|s| self.build_site_block(params, s)).collect()
    }

    /// Angles drawn uniformly from `[-π, π)`.
    pub fn random_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n_params).map(|_| rng.gen_range(-core::f64::consts::PI..core::f64::consts::PI)).collect()
    }

    /// Whether `order` visits every site once and after all its predecessors.
    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        if order.len() != self.n_sites() {
            return false;
        }
        let mut seen = vec![false; self.n_sites()];
        for &s in order {
            if s >= seen.len() || seen[s] || self.predecessors(s).any(|p| !seen[p]) {
                return false;
            }
            seen[s] = true;
        }
        true
    }

    /// Peak number of simultaneously live qubits when `order` is executed
    /// with mid-circuit reset and reuse.
    pub fn register_width(&self, order: &[usize]) -> usize {
        let nb = self.spec.n_bq;
        let mut live = 0usize;
        let mut peak = 0usize;
        for &s in order {
            let site = &self.sites[s];
            peak = peak.max(live + site.signature.n_fresh);
            live -= site.bond_input_wires(nb);
            live += site.outputs.iter().filter(|&&b| self.bonds[b].to.is_some()).count() * nb;
        }
        peak
    }
}
