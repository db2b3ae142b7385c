//! Experiment configuration: one TOML file, every field defaulted, with
//! command-line overrides applied as `section.key=value` edits.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qiso_core::exact_sim::SimConfig;
use qiso_core::hamiltonians::{build_j1j2, build_tfi, Hamiltonian};
use qiso_core::network::{LatticeKind, LatticeSpec};
use qiso_core::noise_bench::{CorrelatorModel, NoiseBenchmarkConfig};
use qiso_core::optimize::{AmsGradConfig, GradientMethod};
use qiso_core::variance::{PretrainConfig, VarianceSweep};

use crate::CliError;

/// Largest lattice for which reference ground states are held in memory.
pub const MAX_ED_SITES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Vqe,
    Sweep,
    Variance,
    Pretrain,
    Noise,
    Sample,
    Export,
    Ed,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vqe => "vqe",
            Self::Sweep => "sweep",
            Self::Variance => "variance",
            Self::Pretrain => "pretrain",
            Self::Noise => "noise",
            Self::Sample => "sample",
            Self::Export => "export",
            Self::Ed => "ed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Tfi,
    J1j2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub lambda: f64,
    pub delta: f64,
    pub j1: f64,
    pub j2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: ModelKind::Tfi, lambda: 3.5, delta: 1.0, j1: 1.0, j2: 0.5 }
    }
}

impl ModelConfig {
    pub fn hamiltonian(&self, rows: usize, cols: usize) -> Hamiltonian {
        match self.kind {
            ModelKind::Tfi => build_tfi(rows, cols, self.lambda, self.delta),
            ModelKind::J1j2 => build_j1j2(rows, cols, self.j1, self.j2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeName {
    Square,
    Triangular,
    Honeycomb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub kind: LatticeName,
    pub rows: usize,
    pub cols: usize,
    pub n_bq: usize,
    pub n_bl: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { kind: LatticeName::Square, rows: 4, cols: 4, n_bq: 1, n_bl: 4 }
    }
}

impl LatticeConfig {
    pub fn spec(&self) -> LatticeSpec {
        let kind = match self.kind {
            LatticeName::Square => LatticeKind::Square,
            LatticeName::Triangular => LatticeKind::Triangular,
            LatticeName::Honeycomb => LatticeKind::Honeycomb,
        };
        LatticeSpec { kind, rows: self.rows, cols: self.cols, n_bq: self.n_bq, n_bl: self.n_bl }
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientName {
    Adjoint,
    ParameterShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub steps: usize,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub gradient: GradientName,
    /// Record the ground-space fidelity every this many steps; 0 disables it.
    pub fidelity_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let a = AmsGradConfig::default();
        Self {
            steps: 500,
            alpha: a.alpha,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            gradient: GradientName::Adjoint,
            fidelity_every: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn amsgrad(&self) -> AmsGradConfig {
        AmsGradConfig { alpha: self.alpha, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }

    pub fn method(&self) -> GradientMethod {
        match self.gradient {
            GradientName::Adjoint => GradientMethod::Adjoint,
            GradientName::ParameterShift => GradientMethod::ParameterShift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub max_wires: usize,
    pub max_pure_wires: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        let c = SimConfig::default();
        Self { max_wires: c.max_wires, max_pure_wires: c.max_pure_wires }
    }
}

impl SimSettings {
    pub fn sim(&self) -> SimConfig {
        SimConfig { max_wires: self.max_wires, max_pure_wires: self.max_pure_wires }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    /// Location of the phase transition used to pick the comparison level.
    pub lambda_c: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { lambdas: vec![1.0, 2.0, 2.5, 3.5, 4.0, 4.5], lambda_c: 3.044 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceName {
    Layers,
    BondQubits,
    Column,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    pub group: VarianceName,
    pub samples: usize,
    /// Lattice sizes for the block-depth sweep.
    pub sizes: Vec<[usize; 2]>,
    pub layers: Vec<usize>,
    pub n_bqs: Vec<usize>,
    /// Width of the boundary band whose terms enter the bond-qubit sweep.
    pub band: usize,
    pub columns: Vec<usize>,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            group: VarianceName::Layers,
            samples: 30,
            sizes: vec![[2, 2], [3, 3], [4, 4]],
            layers: (2..=8).collect(),
            n_bqs: vec![1, 2, 3],
            band: 2,
            columns: (0..19).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainSettings {
    pub train_cols: usize,
    pub steps: usize,
    pub seeds: usize,
}

impl Default for PretrainSettings {
    fn default() -> Self {
        let p = PretrainConfig::default();
        Self { train_cols: p.train_cols, steps: p.steps, seeds: p.seeds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSettings {
    /// Model for the correlator study, with couplings from `[model]`; the
    /// noisy VQE and target-energy studies use the TFI model.
    pub correlator_model: ModelKind,
    pub depolarizing_fraction: f64,
    pub vqe_side: usize,
    pub vqe_n_bl: usize,
    pub vqe_steps: usize,
    pub vqe_shots: usize,
    pub vqe_p: Vec<f64>,
    pub target_sides: Vec<usize>,
    pub target_n_bl: usize,
    pub target_p: Vec<f64>,
    pub target_shots: usize,
    pub target_max_steps: usize,
    pub correlator_steps: usize,
    pub correlator_p: f64,
    pub correlator_shots: usize,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        let d = NoiseBenchmarkConfig::default();
        Self {
            correlator_model: match d.correlator_model {
                CorrelatorModel::Tfi => ModelKind::Tfi,
                CorrelatorModel::J1j2 { .. } => ModelKind::J1j2,
            },
            depolarizing_fraction: d.depolarizing_fraction,
            vqe_side: d.vqe_side,
            vqe_n_bl: d.vqe_n_bl,
            vqe_steps: d.vqe_steps,
            vqe_shots: d.vqe_shots,
            vqe_p: d.vqe_p,
            target_sides: d.target_sides,
            target_n_bl: d.target_n_bl,
            target_p: d.target_p,
            target_shots: d.target_shots,
            target_max_steps: d.target_max_steps,
            correlator_steps: d.correlator_steps,
            correlator_p: d.correlator_p,
            correlator_shots: d.correlator_shots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Independent optimizer runs, seeded `seed, seed + 1, ...`.
    pub n_seeds: usize,
    pub output_dir: String,
    /// Shots for sampling experiments.
    pub shots: usize,
    /// Levels requested from the exact diagonalization oracle.
    pub ed_levels: usize,
    /// JSON array of parameters for `sample` and `export`; drawn from the
    /// seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_file: Option<String>,
    pub model: ModelConfig,
    pub lattice: LatticeConfig,
    pub optimizer: OptimizerConfig,
    pub sim: SimSettings,
    pub sweep: SweepConfig,
    pub variance: VarianceConfig,
    pub pretrain: PretrainSettings,
    pub noise: NoiseSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Vqe,
            seed: 0,
            n_seeds: 1,
            output_dir: "results".into(),
            shots: 10_000,
            ed_levels: 4,
            params_file: None,
            model: ModelConfig::default(),
            lattice: LatticeConfig::default(),
            optimizer: OptimizerConfig::default(),
            sim: SimSettings::default(),
            sweep: SweepConfig::default(),
            variance: VarianceConfig::default(),
            pretrain: PretrainSettings::default(),
            noise: NoiseSettings::default(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parses `text` (possibly empty) and applies `key=value` overrides,
    /// where the key is a dotted path such as `lattice.rows` and the value is
    /// TOML (bare words are taken as strings).
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| config_error(format!("override `{item}` is not key=value")))?;
            let value = parse_value(raw.trim());
            let path: Vec<&str> = key.trim().split('.').collect();
            let mut table = &mut doc;
            for part in &path[..path.len() - 1] {
                let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
                table = entry.as_table_mut().ok_or_else(|| config_error(format!("`{part}` is not a section")))?;
            }
            table.insert(path[path.len() - 1].to_string(), value);
        }
        let text = toml::to_string(&doc).map_err(|e| config_error(e.to_string()))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical serialization with `output_dir` cleared, as
    /// lowercase hex.
    pub fn hash(&self) -> String {
        let canonical = Self { output_dir: String::new(), ..self.clone() };
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64).map(|k| self.seed + k).collect()
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        self.model.hamiltonian(self.lattice.rows, self.lattice.cols)
    }

    pub fn variance_sweep(&self) -> VarianceSweep {
        let v = &self.variance;
        let (rows, cols) = (self.lattice.rows, self.lattice.cols);
        match v.group {
            VarianceName::Layers => VarianceSweep::Layers {
                sizes: v.sizes.iter().map(|s| (s[0], s[1])).collect(),
                layers: v.layers.clone(),
                lambda: self.model.lambda,
                delta: self.model.delta,
            },
            VarianceName::BondQubits => VarianceSweep::BondQubits {
                rows,
                cols,
                n_bl: self.lattice.n_bl,
                n_bqs: v.n_bqs.clone(),
                band: v.band,
                lambda: self.model.lambda,
                delta: self.model.delta,
            },
            VarianceName::Column => VarianceSweep::Column { rows, cols, n_bl: self.lattice.n_bl, columns: v.columns.clone() },
        }
    }

    pub fn pretrain_config(&self) -> PretrainConfig {
        PretrainConfig {
            rows: self.lattice.rows,
            cols: self.lattice.cols,
            n_bq: self.lattice.n_bq,
            n_bl: self.lattice.n_bl,
            lambda: self.model.lambda,
            delta: self.model.delta,
            train_cols: self.pretrain.train_cols,
            steps: self.pretrain.steps,
            seeds: self.pretrain.seeds,
            amsgrad: self.optimizer.amsgrad(),
        }
    }

    pub fn noise_config(&self) -> NoiseBenchmarkConfig {
        let n = &self.noise;
        NoiseBenchmarkConfig {
            lambda: self.model.lambda,
            delta: self.model.delta,
            correlator_model: match n.correlator_model {
                ModelKind::Tfi => CorrelatorModel::Tfi,
                ModelKind::J1j2 => CorrelatorModel::J1j2 { j1: self.model.j1, j2: self.model.j2 },
            },
            depolarizing_fraction: n.depolarizing_fraction,
            amsgrad: self.optimizer.amsgrad(),
            vqe_side: n.vqe_side,
            vqe_n_bl: n.vqe_n_bl,
            vqe_steps: n.vqe_steps,
            vqe_shots: n.vqe_shots,
            vqe_p: n.vqe_p.clone(),
            target_sides: n.target_sides.clone(),
            target_n_bl: n.target_n_bl,
            target_p: n.target_p.clone(),
            target_shots: n.target_shots,
            target_max_steps: n.target_max_steps,
            correlator_steps: n.correlator_steps,
            correlator_p: n.correlator_p,
            correlator_shots: n.correlator_shots,
        }
    }

    /// Rejects combinations that cannot run, before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.lattice.spec().validate().map_err(|e| config_error(e.to_string()))?;
        if self.n_seeds == 0 {
            return Err(config_error("n_seeds must be at least 1"));
        }
        let o = &self.optimizer;
        if !(o.alpha > 0.0 && (0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2) && o.eps > 0.0) {
            return Err(config_error("optimizer hyperparameters out of range"));
        }
        let sites = self.lattice.n_sites();
        let needs_ed = matches!(self.kind, ExperimentKind::Sweep | ExperimentKind::Ed)
            || (self.kind == ExperimentKind::Vqe && o.fidelity_every > 0);
        if needs_ed && sites > MAX_ED_SITES {
            return Err(config_error(format!(
                "{} needs exact diagonalization, limited to {MAX_ED_SITES} sites (lattice has {sites})",
                self.kind.name()
            )));
        }
        if self.model.kind == ModelKind::J1j2 && matches!(self.kind, ExperimentKind::Sweep) {
            return Err(config_error("the field sweep is defined for the tfi model"));
        }
        if matches!(self.kind, ExperimentKind::Sample | ExperimentKind::Noise) && self.shots == 0 {
            return Err(config_error("shots must be at least 1"));
        }
        if self.kind == ExperimentKind::Sweep && self.sweep.lambdas.is_empty() {
            return Err(config_error("sweep needs at least one lambda"));
        }
        if self.kind == ExperimentKind::Ed && self.ed_levels == 0 {
            return Err(config_error("ed_levels must be at least 1"));
        }
        if self.kind == ExperimentKind::Variance {
            let v = &self.variance;
            if v.samples < 2 {
                return Err(config_error("variance needs at least two samples"));
            }
            if v.group == VarianceName::Column && v.columns.iter().any(|&x| x + 1 >= self.lattice.cols) {
                return Err(config_error("column sweep needs x + 1 < cols"));
            }
        }
        if self.kind == ExperimentKind::Pretrain {
            let p = &self.pretrain;
            if p.train_cols > self.lattice.cols || p.seeds < 2 {
                return Err(config_error("pretraining needs train_cols <= cols and at least two seeds"));
            }
        }
        if self.kind == ExperimentKind::Noise {
            let n = &self.noise;
            let ps = n.vqe_p.iter().chain(&n.target_p).chain(core::iter::once(&n.correlator_p));
            if ps.clone().any(|&p| !(0.0..=1.0).contains(&p)) || !(0.0..=1.0).contains(&n.depolarizing_fraction) {
                return Err(config_error("noise probabilities must lie in [0, 1]"));
            }
            if n.vqe_shots == 0 || n.target_shots == 0 || n.correlator_shots == 0 {
                return Err(config_error("noise shot counts must be at least 1"));
            }
            if n.target_sides.iter().any(|&s| s * s > MAX_ED_SITES) {
                return Err(config_error("target-energy sides are limited by exact diagonalization"));
            }
        }
        Ok(())
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
