//! The five experiments. Each has a pure function returning its data and a
//! writer that lays the data out under an output directory.

use std::path::{Path, PathBuf};

use eigenforge_core::diagnostics::{overlaps, p_prime_actual, partition, OverlapProfile};
use eigenforge_core::fock::{
    coherent_state, displaced_tail_mass, displacement_generator, fock_state, number_op,
    squeezed_coherent_with_ceiling, FockSpace,
};
use eigenforge_core::kernel::{bound_crossing, kernel_modulus, lambda_param, p_prime_lower_bound};
use eigenforge_core::linalg::C_I;
use eigenforge_core::qpe::{run_qpe, spectral_decompose, QpeRun};
use eigenforge_core::{
    Complex, Eigenphase, IndexSize, OutcomePolicy, QRule, SamplingSeed, TargetState, TargetUnitary,
};
use serde::Serialize;

use crate::config::{
    BoundPlotConfig, CoherentToFockConfig, DisplacementSqueezedConfig, ExperimentConfig, KernelPlotConfig,
    NumopFockConfig, OutcomeConfig,
};
use crate::error::CliError;
use crate::output::{ensure_dir, write_csv, write_json};

/// Spacing of the `ω` grid in kernel plots.
pub const KERNEL_GRID_STEP: f64 = 0.01;
/// Spacing of the `G` grid in bound plots.
pub const BOUND_GRID_STEP: f64 = 0.005;
/// Tolerance on probability tables and on the Fock-readout audits.
pub const RECORD_TOL: f64 = 1e-9;

fn index_size(m: u32) -> Result<IndexSize, CliError> {
    IndexSize::new(m).map_err(|e| CliError::Config(e.to_string()))
}

fn fock_space(trunc: usize) -> Result<FockSpace, CliError> {
    FockSpace::new(trunc).map_err(|e| CliError::Config(e.to_string()))
}

/// `(ω, |f(ω, j)|)` for `ω = 0, 0.01, …` below `M`.
pub fn kernel_rows(c: &KernelPlotConfig) -> Result<Vec<(f64, f64)>, CliError> {
    let size = index_size(c.m)?;
    let steps = (size.dim() as f64 / KERNEL_GRID_STEP).round() as usize;
    (0..steps)
        .map(|i| {
            let omega = i as f64 / 100.0;
            let w = Eigenphase::new(omega, size)?;
            Ok((omega, kernel_modulus(w, c.j, size)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub p: f64,
    pub g_star: f64,
    pub bound_at_g_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub lambda: f64,
    /// `(p, G, bound)`.
    pub rows: Vec<(f64, f64, f64)>,
    pub crossings: Vec<Crossing>,
}

pub fn bound_table(c: &BoundPlotConfig) -> Result<BoundTable, CliError> {
    let lambda = lambda_param(index_size(c.m)?);
    let mut rows = Vec::new();
    let mut crossings = Vec::new();
    for &p in &c.p_list {
        let steps = ((1.0 - p) / BOUND_GRID_STEP + 1e-9).floor() as usize;
        for i in 0..=steps {
            let g = (i as f64 * BOUND_GRID_STEP).min(1.0 - p);
            rows.push((p, g, p_prime_lower_bound(p, g, c.fqq2, lambda)?));
        }
        let g_star = bound_crossing(p, c.fqq2, lambda);
        crossings.push(Crossing {
            p,
            g_star,
            bound_at_g_star: p_prime_lower_bound(p, g_star, c.fqq2, lambda)?,
        });
    }
    Ok(BoundTable {
        lambda,
        rows,
        crossings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub policy: &'static str,
    pub seed: Option<u64>,
    pub j: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub q: usize,
    pub q_omega: f64,
    pub readout: usize,
    pub p: f64,
    pub g_value: f64,
    pub g_set: Vec<usize>,
    pub h_count: usize,
    pub fqq2: f64,
    pub lambda: f64,
    /// Only defined when the measured outcome is the readout `[ω_q]`.
    pub p_prime_bound: Option<f64>,
    pub p_prime_actual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumopChecks {
    pub omega_t: f64,
    pub post_fidelity: f64,
    /// Largest `|P(j) − |f(ω_n, j)|²|`.
    pub kernel_max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailAudit {
    pub ceiling: f64,
    /// Weight pushed above the truncation by `D(i·d·(M − 1))`.
    pub worst_displacement_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub index_qubits: u32,
    pub index_dim: usize,
    pub trunc: usize,
    pub outcome: OutcomeRecord,
    pub distribution: Vec<f64>,
    pub distribution_sum: f64,
    pub diagnostics: DiagnosticsRecord,
    pub tail_mass: f64,
    pub populations_before: Vec<f64>,
    pub populations_after: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numop_checks: Option<NumopChecks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_audit: Option<TailAudit>,
}

fn policy(outcome: OutcomeConfig, readout: usize) -> OutcomePolicy {
    match (outcome.forced_j, outcome.seed) {
        (Some(j), _) => OutcomePolicy::Forced(j),
        (None, Some(seed)) => OutcomePolicy::Sampled(SamplingSeed::new(seed)),
        (None, None) => OutcomePolicy::Forced(readout),
    }
}

/// Runs the algorithm and gathers the diagnostics shared by every measuring
/// experiment.
fn measured_run(
    config: &ExperimentConfig,
    u: &TargetUnitary,
    psi: &TargetState,
    rule: QRule,
) -> Result<(RunRecord, QpeRun, OverlapProfile), CliError> {
    let size = u.size();
    let profile = overlaps(u, psi, rule)?;
    let part = partition(&profile, size);
    let outcome = config.outcome().expect("measuring experiment");
    let policy = policy(outcome, part.readout);
    let run = run_qpe(u, psi, size, policy)?;
    let m = &run.measurement;

    let distribution_sum: f64 = run.distribution.iter().sum();
    if (distribution_sum - 1.0).abs() > RECORD_TOL || run.distribution.iter().any(|p| !(0.0..=1.0 + RECORD_TOL).contains(p)) {
        return Err(CliError::Numerical(format!("outcome table sums to {distribution_sum}")));
    }

    let lambda = lambda_param(size);
    let p = profile.p();
    let p_prime_bound = if m.outcome == part.readout {
        Some(p_prime_lower_bound(p, part.g_value.min(1.0 - p), part.fqq2, lambda)?)
    } else {
        None
    };
    let diagnostics = DiagnosticsRecord {
        q: profile.q(),
        q_omega: profile.q_entry().omega.value(),
        readout: part.readout,
        p,
        g_value: part.g_value,
        h_count: part.h_set.len(),
        g_set: part.g_set,
        fqq2: part.fqq2,
        lambda,
        p_prime_bound,
        p_prime_actual: p_prime_actual(&m.post, &profile)?,
    };
    let (policy_name, seed) = match policy {
        OutcomePolicy::Forced(_) => ("forced", None),
        OutcomePolicy::Sampled(s) => ("sampled", Some(s.seed)),
    };
    let record = RunRecord {
        experiment: config.experiment().name(),
        config: config.clone(),
        index_qubits: size.qubits(),
        index_dim: size.dim(),
        trunc: psi.space().trunc(),
        outcome: OutcomeRecord {
            policy: policy_name,
            seed,
            j: m.outcome,
            probability: m.probability,
        },
        distribution: run.distribution.clone(),
        distribution_sum,
        diagnostics,
        tail_mass: psi.tail_mass(),
        populations_before: run.populations_before.clone(),
        populations_after: run.populations_after.clone(),
        numop_checks: None,
        tail_audit: None,
    };
    Ok((record, run, profile))
}

fn number_unitary(space: FockSpace, omega_t: f64, size: IndexSize) -> Result<TargetUnitary, CliError> {
    Ok(spectral_decompose(&number_op(space).scale(-C_I), omega_t, size)?)
}

/// Fock state input: the target must come back unchanged and `P(j)` must be
/// the bare kernel of its eigenphase.
pub fn numop_fock(c: &NumopFockConfig) -> Result<RunRecord, CliError> {
    let config = ExperimentConfig::NumopFock(c.clone());
    let size = index_size(c.m)?;
    let space = fock_space(c.trunc)?;
    let omega_t = c.omega_t();
    let u = number_unitary(space, omega_t, size)?;
    let psi = fock_state(space, c.n)?;
    let (mut record, run, _) = measured_run(&config, &u, &psi, QRule::BasisState(c.n))?;

    let post_fidelity = run.measurement.post.fidelity(&psi)?;
    let omega_n = Eigenphase::from_phase(-omega_t * c.n as f64, size);
    let kernel_max_deviation = run
        .distribution
        .iter()
        .enumerate()
        .map(|(j, &pj)| Ok((pj - kernel_modulus(omega_n, j, size)?.powi(2)).abs()))
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if post_fidelity < 1.0 - RECORD_TOL {
        return Err(CliError::Numerical(format!("Fock state changed: fidelity {post_fidelity}")));
    }
    if kernel_max_deviation > RECORD_TOL {
        return Err(CliError::Numerical(format!(
            "outcome table departs from the kernel by {kernel_max_deviation:e}"
        )));
    }
    record.numop_checks = Some(NumopChecks {
        omega_t,
        post_fidelity,
        kernel_max_deviation,
    });
    Ok(record)
}

/// Coherent state input filtered towards the Fock level `n_target`.
pub fn coherent_to_fock(c: &CoherentToFockConfig) -> Result<RunRecord, CliError> {
    let config = ExperimentConfig::CoherentToFock(c.clone());
    let size = index_size(c.m)?;
    let space = fock_space(c.trunc)?;
    let u = number_unitary(space, c.omega_t, size)?;
    let psi = coherent_state(space, c.alpha.value())?;
    Ok(measured_run(&config, &u, &psi, QRule::BasisState(c.n_target))?.0)
}

/// Squeezed coherent input under the displacement `D(i·d)`.
pub fn displacement_squeezed(c: &DisplacementSqueezedConfig) -> Result<RunRecord, CliError> {
    let config = ExperimentConfig::DisplacementSqueezed(c.clone());
    let size = index_size(c.m)?;
    let space = fock_space(c.trunc)?;
    let psi = squeezed_coherent_with_ceiling(
        space,
        Complex::new(c.alpha_state, 0.0),
        Complex::new(c.r, 0.0),
        c.tail_ceiling,
    )?;
    let worst = Complex::new(0.0, c.d * (size.dim() - 1) as f64);
    let worst_displacement_tail = displaced_tail_mass(&psi, worst)?;
    if worst_displacement_tail > c.tail_ceiling {
        return Err(CliError::Numerical(format!(
            "D(i·d·(M−1)) pushes {worst_displacement_tail:e} of the norm past trunc = {}; ceiling {:e}",
            c.trunc, c.tail_ceiling
        )));
    }
    let generator = displacement_generator(space, Complex::new(0.0, c.d));
    let u = spectral_decompose(&generator, 1.0, size)?;
    let (mut record, _, _) = measured_run(&config, &u, &psi, QRule::ArgMax)?;
    record.tail_audit = Some(TailAudit {
        ceiling: c.tail_ceiling,
        worst_displacement_tail,
    });
    Ok(record)
}

#[derive(Serialize)]
struct KernelSummary<'a> {
    experiment: &'static str,
    config: &'a ExperimentConfig,
    index_dim: usize,
    rows: usize,
    peak_omega: f64,
    peak_value: f64,
}

#[derive(Serialize)]
struct BoundSummary<'a> {
    experiment: &'static str,
    config: &'a ExperimentConfig,
    lambda: f64,
    rows: usize,
    crossings: &'a [Crossing],
}

fn write_run_record(record: &RunRecord, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dist = out.join("distribution.csv");
    write_csv(
        &dist,
        &["j", "probability"],
        record.distribution.iter().enumerate().map(|(j, &p)| vec![j.into(), p.into()]),
    )?;
    let pops = out.join("populations.csv");
    write_csv(
        &pops,
        &["n", "pop_before", "pop_after"],
        record
            .populations_before
            .iter()
            .zip(&record.populations_after)
            .enumerate()
            .map(|(n, (&b, &a))| vec![n.into(), b.into(), a.into()]),
    )?;
    let json = out.join("run_record.json");
    write_json(&json, record)?;
    Ok(vec![dist, pops, json])
}

/// Runs `config` and writes its files into `out`. Returns the paths written.
pub fn execute(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    match config {
        ExperimentConfig::KernelPlot(c) => {
            let rows = kernel_rows(c)?;
            let csv_path = out.join("kernel.csv");
            write_csv(&csv_path, &["omega", "abs_f"], rows.iter().map(|&(w, f)| vec![w.into(), f.into()]))?;
            let (peak_omega, peak_value) = rows
                .iter()
                .copied()
                .fold((0.0, f64::NEG_INFINITY), |best, r| if r.1 > best.1 { r } else { best });
            let summary = out.join("summary.json");
            write_json(
                &summary,
                &KernelSummary {
                    experiment: config.experiment().name(),
                    config,
                    index_dim: 1 << c.m,
                    rows: rows.len(),
                    peak_omega,
                    peak_value,
                },
            )?;
            Ok(vec![csv_path, summary])
        }
        ExperimentConfig::BoundPlot(c) => {
            let table = bound_table(c)?;
            let csv_path = out.join("bound.csv");
            write_csv(
                &csv_path,
                &["p", "g", "bound"],
                table.rows.iter().map(|&(p, g, b)| vec![p.into(), g.into(), b.into()]),
            )?;
            let crossings = out.join("crossings.csv");
            write_csv(
                &crossings,
                &["p", "g_star", "bound_at_g_star"],
                table
                    .crossings
                    .iter()
                    .map(|x| vec![x.p.into(), x.g_star.into(), x.bound_at_g_star.into()]),
            )?;
            let summary = out.join("summary.json");
            write_json(
                &summary,
                &BoundSummary {
                    experiment: config.experiment().name(),
                    config,
                    lambda: table.lambda,
                    rows: table.rows.len(),
                    crossings: &table.crossings,
                },
            )?;
            Ok(vec![csv_path, crossings, summary])
        }
        ExperimentConfig::NumopFock(c) => write_run_record(&numop_fock(c)?, out),
        ExperimentConfig::CoherentToFock(c) => write_run_record(&coherent_to_fock(c)?, out),
        ExperimentConfig::DisplacementSqueezed(c) => write_run_record(&displacement_squeezed(c)?, out),
    }
}

/// Measuring experiments as a record, for callers that want the numbers
/// without files.
pub fn run_record(config: &ExperimentConfig) -> Result<Option<RunRecord>, CliError> {
    Ok(match config {
        ExperimentConfig::NumopFock(c) => Some(numop_fock(c)?),
        ExperimentConfig::CoherentToFock(c) => Some(coherent_to_fock(c)?),
        ExperimentConfig::DisplacementSqueezed(c) => Some(displacement_squeezed(c)?),
        ExperimentConfig::KernelPlot(_) | ExperimentConfig::BoundPlot(_) => None,
    })
}
