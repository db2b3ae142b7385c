//! One runner per experiment kind. Each writes its tables into the output
//! directory and returns; the manifest is written by [`run`].

use std::fs;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use qiso_core::circuit::export_circuit;
use qiso_core::exact_sim::{histogram, sample, EnergyModel, SimConfig};
use qiso_core::hamiltonians::Hamiltonian;
use qiso_core::linalg::C64;
use qiso_core::network::{build_network, Network};
use qiso_core::noise_bench::{run_noise_benchmarks, Ansatz};
use qiso_core::optimize::{initial_params, run_vqe, VqeOptions, VqeTrace};
use qiso_core::variance::{gradient_variance, pretrain_experiment, VarianceGroup};

use crate::config::{ExperimentConfig, ExperimentKind, ModelKind};
use crate::ed::{exact_spectrum, EdRecord};
use crate::output::{fmt, write_manifest, Manifest, OutputDir};
use crate::CliError;

fn runtime(e: qiso_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Validates `config`, runs it and writes all artifacts plus the manifest.
/// Returns the list of written files.
pub fn run(config: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = OutputDir::create(config)?;
    match config.kind {
        ExperimentKind::Vqe => run_vqe_experiment(config, &mut out)?,
        ExperimentKind::Sweep => run_sweep(config, &mut out)?,
        ExperimentKind::Variance => run_variance(config, &mut out)?,
        ExperimentKind::Pretrain => run_pretrain(config, &mut out)?,
        ExperimentKind::Noise => run_noise(config, &mut out)?,
        ExperimentKind::Sample => run_sample(config, &mut out)?,
        ExperimentKind::Export => run_export(config, &mut out)?,
        ExperimentKind::Ed => run_ed(config, &mut out)?,
    }
    let manifest = Manifest {
        kind: config.kind.name().into(),
        config_hash: config.hash(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        finished_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files: out.files.clone(),
        config: config.to_toml(),
    };
    write_manifest(&out.root, &manifest)?;
    Ok(out.files)
}

fn network(config: &ExperimentConfig) -> Result<Network, CliError> {
    build_network(config.lattice.spec()).map_err(|e| CliError::Config(e.to_string()))
}

fn load_params(config: &ExperimentConfig, net: &Network) -> Result<Vec<f64>, CliError> {
    let Some(path) = &config.params_file else {
        return Ok(initial_params(net, config.seed));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let params: Vec<f64> = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    net.check_params(&params).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params)
}

fn train(
    config: &ExperimentConfig,
    model: &EnergyModel,
    seed: u64,
    reference: Option<&[Vec<C64>]>,
    sim: &SimConfig,
) -> Result<VqeTrace, CliError> {
    let mut opts = VqeOptions::new(config.optimizer.steps, seed);
    opts.amsgrad = config.optimizer.amsgrad();
    opts.method = config.optimizer.method();
    if let Some(r) = reference {
        opts.reference = Some(r.to_vec());
        opts.fidelity_every = config.optimizer.fidelity_every;
    }
    run_vqe(model, &opts, sim).map_err(runtime)
}

#[derive(Serialize)]
struct VqeSummary {
    seed: u64,
    final_energy: f64,
    final_fidelity: Option<f64>,
    final_params: Vec<f64>,
}

fn run_vqe_experiment(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let sim = config.sim.sim();
    let net = network(config)?;
    let h = config.hamiltonian();
    let model = EnergyModel::new(&net, &h, &sim).map_err(runtime)?;
    let (record, reference) = if config.optimizer.fidelity_every > 0 {
        let (r, space) = exact_spectrum(&h, config.ed_levels, true)?;
        (Some(r), space)
    } else {
        (None, None)
    };
    let traces: Vec<Result<(u64, VqeTrace), CliError>> = config
        .seeds()
        .into_par_iter()
        .map(|seed| train(config, &model, seed, reference.as_deref(), &sim).map(|t| (seed, t)))
        .collect();
    let traces: Vec<(u64, VqeTrace)> = traces.into_iter().collect::<Result<_, _>>()?;

    let e0 = record.as_ref().map(EdRecord::ground_energy);
    let mut rows = Vec::new();
    for (seed, t) in &traces {
        for (step, e) in t.energies.iter().enumerate() {
            let above = e0.map_or(String::new(), |g| fmt(e - g));
            rows.push(vec![seed.to_string(), step.to_string(), fmt(*e), above]);
        }
    }
    out.csv("trace.csv", &["seed", "step", "energy", "energy_above_gs"], &rows)?;
    if let Some(g) = e0 {
        let blocks: Vec<Vec<Vec<f64>>> = traces
            .iter()
            .map(|(_, t)| t.energies.iter().enumerate().map(|(k, e)| vec![k as f64, e - g]).collect())
            .collect();
        out.gnuplot("fig3a.dat", &["step", "energy_above_gs"], &blocks)?;
        let rows: Vec<Vec<String>> = traces
            .iter()
            .flat_map(|(seed, t)| t.fidelities.iter().map(move |(k, f)| vec![seed.to_string(), k.to_string(), fmt(*f)]))
            .collect();
        out.csv("fidelity.csv", &["seed", "step", "fidelity"], &rows)?;
        let blocks: Vec<Vec<Vec<f64>>> = traces
            .iter()
            .map(|(_, t)| t.fidelities.iter().map(|(k, f)| vec![*k as f64, 1.0 - f]).collect())
            .collect();
        out.gnuplot("fig3b.dat", &["step", "fidelity_error"], &blocks)?;
    }
    let summary: Vec<VqeSummary> = traces
        .iter()
        .map(|(seed, t)| VqeSummary {
            seed: *seed,
            final_energy: t.final_energy(),
            final_fidelity: t.final_fidelity(),
            final_params: t.final_params.clone(),
        })
        .collect();
    out.json("summary.json", config, &serde_json::json!({ "spectrum": record, "runs": summary }))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub final_energy: f64,
    pub min_energy: f64,
    pub levels: Vec<f64>,
    /// Level the final energy is compared against: E1 above the transition,
    /// E2 below it.
    pub comparison_level: f64,
    pub below: bool,
}

fn run_sweep(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let sim = config.sim.sim();
    let net = network(config)?;
    let (rows, cols) = (config.lattice.rows, config.lattice.cols);
    let mut table: Vec<SweepRow> = Vec::new();
    for &lambda in &config.sweep.lambdas {
        let mut model_cfg = config.model.clone();
        model_cfg.lambda = lambda;
        let h: Hamiltonian = model_cfg.hamiltonian(rows, cols);
        let (record, _) = exact_spectrum(&h, config.ed_levels.max(4), false)?;
        let index = if lambda > config.sweep.lambda_c { 1 } else { 2 };
        let level = record
            .level(index)
            .ok_or_else(|| CliError::Runtime(format!("spectrum at lambda={lambda} resolved fewer than {} levels", index + 1)))?;
        let model = EnergyModel::new(&net, &h, &sim).map_err(runtime)?;
        let traces: Vec<Result<(u64, VqeTrace), CliError>> = config
            .seeds()
            .into_par_iter()
            .map(|seed| train(config, &model, seed, None, &sim).map(|t| (seed, t)))
            .collect();
        for r in traces {
            let (seed, t) = r?;
            let final_energy = t.final_energy();
            table.push(SweepRow {
                lambda,
                seed,
                final_energy,
                min_energy: t.energies.iter().copied().fold(f64::INFINITY, f64::min),
                levels: record.levels.iter().map(|l| l.0).collect(),
                comparison_level: level,
                below: final_energy < level,
            });
        }
    }
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            let lvl = |k: usize| r.levels.get(k).map_or(String::new(), |v| fmt(*v));
            vec![
                fmt(r.lambda),
                r.seed.to_string(),
                fmt(r.final_energy),
                fmt(r.min_energy),
                lvl(0),
                lvl(1),
                lvl(2),
                fmt(r.comparison_level),
                r.below.to_string(),
            ]
        })
        .collect();
    out.csv(
        "sweep.csv",
        &["lambda", "seed", "final_energy", "min_energy", "e0", "e1", "e2", "comparison_level", "below"],
        &rows,
    )?;
    // Best run per lambda next to the first three levels.
    let mut best: Vec<Vec<f64>> = Vec::new();
    for &lambda in &config.sweep.lambdas {
        let runs: Vec<&SweepRow> = table.iter().filter(|r| r.lambda == lambda).collect();
        let e = runs.iter().map(|r| r.final_energy).fold(f64::INFINITY, f64::min);
        let l = &runs[0].levels;
        best.push(vec![lambda, e, l[0], l.get(1).copied().unwrap_or(f64::NAN), l.get(2).copied().unwrap_or(f64::NAN)]);
    }
    out.gnuplot("fig3c.dat", &["lambda", "energy", "e0", "e1", "e2"], &[best])?;
    out.json("sweep.json", config, &table)
}

fn group_columns(g: &VarianceGroup) -> [String; 5] {
    let s = |v: usize| v.to_string();
    match *g {
        VarianceGroup::Layers { rows, cols, n_bl } => ["layers".into(), s(rows), s(cols), s(n_bl), s(n_bl)],
        VarianceGroup::BondQubits { n_bq } => ["bond-qubits".into(), String::new(), String::new(), String::new(), s(n_bq)],
        VarianceGroup::Column { x } => ["column".into(), String::new(), String::new(), String::new(), s(x)],
        VarianceGroup::PretrainColumn { x, trained } => {
            [if trained { "after" } else { "before" }.into(), String::new(), String::new(), String::new(), s(x)]
        }
    }
}

fn run_variance(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    if config.model.kind != ModelKind::Tfi {
        return Err(CliError::Config("gradient variance sweeps use the tfi model".into()));
    }
    let sweep = config.variance_sweep();
    let reports = gradient_variance(&sweep, config.variance.samples, config.seed, &config.sim.sim()).map_err(runtime)?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = group_columns(&r.group).to_vec();
            row.extend([fmt(r.mean_variance), fmt(r.max_variance), r.samples.to_string(), r.parameters.to_string()]);
            row
        })
        .collect();
    out.csv(
        "variance.csv",
        &["group", "rows", "cols", "n_bl", "x", "mean_variance", "max_variance", "samples", "parameters"],
        &rows,
    )?;
    // One data set per lattice size for the depth sweep, a single set otherwise.
    let mut blocks: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut last_size = None;
    for r in &reports {
        let (size, x) = match r.group {
            VarianceGroup::Layers { rows, cols, n_bl } => (Some((rows, cols)), n_bl),
            VarianceGroup::BondQubits { n_bq } => (None, n_bq),
            VarianceGroup::Column { x } | VarianceGroup::PretrainColumn { x, .. } => (None, x),
        };
        if blocks.is_empty() || size != last_size {
            blocks.push(Vec::new());
            last_size = size;
        }
        blocks.last_mut().unwrap().push(vec![x as f64, r.mean_variance]);
    }
    out.gnuplot("fig4.dat", &["x", "mean_variance"], &blocks)
}

fn run_pretrain(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let report = pretrain_experiment(&config.pretrain_config(), config.seed, &config.sim.sim()).map_err(runtime)?;
    let rows: Vec<Vec<String>> = report
        .before
        .iter()
        .zip(&report.after)
        .enumerate()
        .map(|(x, (b, a))| vec![x.to_string(), fmt(b.mean_variance), fmt(a.mean_variance), fmt(a.mean_variance / b.mean_variance)])
        .collect();
    out.csv("pretrain.csv", &["column", "variance_before", "variance_after", "ratio"], &rows)?;
    let data: Vec<Vec<f64>> = report
        .before
        .iter()
        .zip(&report.after)
        .enumerate()
        .map(|(x, (b, a))| vec![x as f64, b.mean_variance, a.mean_variance])
        .collect();
    out.gnuplot("fig5.dat", &["column", "variance_before", "variance_after"], &[data])
}

fn run_noise(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let nc = config.noise_config();
    let r = run_noise_benchmarks(&nc, config.seed, &config.sim.sim()).map_err(runtime)?;

    let mut header = vec!["step".to_string(), "exact".to_string()];
    header.extend(r.noisy_traces.iter().map(|t| format!("p={}", t.p_error)));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..r.exact_trace.len())
        .map(|k| {
            let mut row = vec![k.to_string(), fmt(r.exact_trace[k])];
            row.extend(r.noisy_traces.iter().map(|t| fmt(t.energies[k])));
            row
        })
        .collect();
    out.csv("fig6a.csv", &header_refs, &rows)?;
    let data: Vec<Vec<f64>> = (0..r.exact_trace.len())
        .map(|k| {
            let mut row = vec![k as f64, r.exact_trace[k]];
            row.extend(r.noisy_traces.iter().map(|t| t.energies[k]));
            row
        })
        .collect();
    out.gnuplot("fig6a.dat", &header_refs, &[data])?;

    let name = |a: Ansatz| match a {
        Ansatz::Qiso => "qiso",
        Ansatz::Hea => "hea",
    };
    let rows: Vec<Vec<String>> = r
        .target
        .iter()
        .map(|t| {
            vec![
                t.n.to_string(),
                fmt(t.p_error),
                name(t.ansatz).into(),
                t.gates.to_string(),
                t.steps.to_string(),
                fmt(t.e_gs),
                fmt(t.e_target),
                fmt(t.e_exact),
                fmt(t.estimate.mean),
                fmt(t.estimate.std_error),
                fmt(t.deviation_per_site),
            ]
        })
        .collect();
    out.csv(
        "fig6b.csv",
        &["n", "p_error", "ansatz", "gates", "steps", "e_gs", "e_target", "e_exact", "e_noisy", "std_error", "deviation_per_site"],
        &rows,
    )?;
    let mut blocks = Vec::new();
    for ansatz in [Ansatz::Qiso, Ansatz::Hea] {
        for &n in &nc.target_sides {
            blocks.push(
                r.target
                    .iter()
                    .filter(|t| t.ansatz == ansatz && t.n == n)
                    .map(|t| vec![t.p_error, t.deviation_per_site, t.estimate.std_error / (n * n) as f64])
                    .collect(),
            );
        }
    }
    out.gnuplot("fig6b.dat", &["p_error", "deviation_per_site", "std_error_per_site"], &blocks)?;

    let rows: Vec<Vec<String>> = r
        .correlators
        .iter()
        .map(|c| {
            vec![
                c.x.to_string(),
                fmt(c.exact),
                fmt(c.estimate.mean),
                fmt(c.estimate.std_error),
                fmt(c.percent_error),
                fmt(c.percent_std_error),
                fmt(c.channel_percent_error),
            ]
        })
        .collect();
    out.csv(
        "fig6c.csv",
        &["x", "exact", "noisy", "std_error", "percent_error", "percent_std_error", "channel_percent_error"],
        &rows,
    )?;
    let data: Vec<Vec<f64>> =
        r.correlators.iter().map(|c| vec![c.x as f64, c.percent_error, c.percent_std_error]).collect();
    out.gnuplot("fig6c.dat", &["x", "percent_error", "percent_std_error"], &[data])
}

fn run_sample(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let net = network(config)?;
    let params = load_params(config, &net)?;
    let shots = sample(&net, &params, config.shots, config.seed).map_err(runtime)?;
    let n = net.n_sites();
    let rows: Vec<Vec<String>> = shots
        .iter()
        .map(|s| vec![s.iter().map(|b| char::from(b'0' + b)).collect::<String>()])
        .collect();
    out.csv("shots.csv", &["bits_by_site"], &rows)?;
    if n <= 20 {
        let hist = histogram(&shots, n);
        let rows: Vec<Vec<String>> = hist
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| vec![k.to_string(), fmt(*p)])
            .collect();
        out.csv("histogram.csv", &["basis_index", "frequency"], &rows)?;
    }
    Ok(())
}

fn run_export(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let net = network(config)?;
    let params = load_params(config, &net)?;
    let qasm = export_circuit(&net, &params).map_err(runtime)?;
    out.text("circuit.qasm", &qasm)
}

fn run_ed(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let h = config.hamiltonian();
    let (record, _) = exact_spectrum(&h, config.ed_levels, false)?;
    out.json("ed.json", config, &record)
}
