//! Convergence, conditioning, and quantum-vs-classical studies, driven by a
//! JSON config and emitting CSV/JSON report artifacts.
//!
//! Studies use the dense factorization even where CG would do: at fixed
//! support radius the finest ladder levels reach condition numbers where an
//! unpreconditioned CG stalls, and the study's subject is the discretization
//! error, not the iteration count. The qlsa comparison runs CG as well,
//! because its iteration count is one of the recorded columns.

use crate::assembly::{
    assemble_collocation, assemble_evaluation, assemble_rhs, dense_from_csc,
    normalize_for_encoding,
};
use crate::error::{Error, Result};
use crate::kernel::WendlandKernel;
use crate::points::{
    generate_boundary, generate_halton, matched_per_face, Domain, PointSet, DEFAULT_PROBE_COUNT,
};
use crate::quantum::pipeline::{prepare_solution_state, qlsa_solve};
use crate::solve::{
    condition_number, conjugate_gradient, dense_solve, evaluate_solution_at, l2_relative_error,
    manufactured_f, manufactured_g, manufactured_u, singular_value_extremes, DENSE_EIGEN_LIMIT,
};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Full pipeline rows above this size are refused: statevector cost is
/// exponential in the register width.
pub const QLSA_POINT_LIMIT: usize = 64;

/// Rows larger than this skip the dense eigensolve for kappa; the column is
/// a diagnostic and the eigensolve at a few thousand points costs more than
/// the solve itself.
const KAPPA_EIGEN_CAP: usize = 1200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DeltaRule {
    /// One support radius for every ladder level.
    Fixed { delta: f64 },
    /// delta = C h^(1 - beta/tau), anchored so the finest level gets 0.9 and
    /// capped at 1.0.
    Scaled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Classical,
    QuantumSim,
    Both,
}

impl SolverChoice {
    pub fn wants_quantum(self) -> bool {
        matches!(self, SolverChoice::QuantumSim | SolverChoice::Both)
    }

    pub fn wants_classical(self) -> bool {
        matches!(self, SolverChoice::Classical | SolverChoice::Both)
    }
}

fn default_beta() -> f64 {
    3.0
}

fn default_eps() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub schema: u32,
    pub d: usize,
    pub k: usize,
    /// Support-scaling exponent; must exceed 2 so the error exponent
    /// beta - 2 stays positive.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Target fill distances for convergence ladders.
    #[serde(default)]
    pub h_ladder: Vec<f64>,
    pub delta_rule: DeltaRule,
    /// Target accuracy; the comparison study derives the linear-system
    /// target from it as eps / cond(M).
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub seed_skip: usize,
    /// Interior count for studies that hold the points fixed.
    #[serde(default)]
    pub n_interior: Option<usize>,
    /// Support radii for the conditioning sweep.
    #[serde(default)]
    pub delta_ladder: Option<Vec<f64>>,
    /// Interior counts, one comparison row each.
    #[serde(default)]
    pub n_ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "config schema {} unsupported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.beta <= 2.0 {
            return Err(Error::Config(format!(
                "scaling exponent beta = {} must exceed 2",
                self.beta
            )));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Config(format!(
                "target accuracy {} outside (0, 1/2)",
                self.eps
            )));
        }
        if self.h_ladder.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("fill-distance targets must be positive".into()));
        }
        if let DeltaRule::Fixed { delta } = self.delta_rule {
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(Error::Config(format!(
                    "support radius {delta} outside (0, 1]"
                )));
            }
        }
        if let Some(ladder) = &self.delta_ladder {
            if ladder.iter().any(|&dl| !(dl > 0.0 && dl <= 1.0)) {
                return Err(Error::Config(
                    "every support radius in the sweep must lie in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    /// Resolves the delta rule against the ladder. The scaled rule anchors
    /// delta = 0.9 at the finest level so every level stays within (0, 1].
    pub fn deltas_for_ladder(&self, tau: f64) -> Result<Vec<f64>> {
        match self.delta_rule {
            DeltaRule::Fixed { delta } => Ok(vec![delta; self.h_ladder.len()]),
            DeltaRule::Scaled => {
                let e = 1.0 - self.beta / tau;
                let hmin = self
                    .h_ladder
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if !hmin.is_finite() {
                    return Err(Error::Config("scaled rule needs a nonempty ladder".into()));
                }
                let c = 0.9 / hmin.powf(e);
                Ok(self
                    .h_ladder
                    .iter()
                    .map(|&h| (c * h.powf(e)).min(1.0))
                    .collect())
            }
        }
    }
}

pub fn load_config(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let config: StudyConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// One study row. Columns not produced by the study kind stay empty; a
/// failed row keeps whatever was measured before the error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub level: usize,
    pub n_total: usize,
    pub n_interior: usize,
    pub h: f64,
    pub q: f64,
    pub delta: f64,
    pub sparsity: Option<usize>,
    pub kappa: Option<f64>,
    pub cond_m: Option<f64>,
    pub smin_m: Option<f64>,
    pub l2_error: Option<f64>,
    pub cg_iterations: Option<usize>,
    pub runtime_ns: Option<u64>,
    pub eps_l: Option<f64>,
    pub fidelity_c: Option<f64>,
    pub fidelity_u: Option<f64>,
    pub success_solve: Option<f64>,
    pub success_prepare: Option<f64>,
    pub rbf_state_error: Option<f64>,
    pub qlsa_state_error: Option<f64>,
    pub total_state_error: Option<f64>,
    pub error_budget: Option<f64>,
    pub filter_degree: Option<usize>,
    pub evolution_time: Option<f64>,
    pub aqc_steps: Option<usize>,
    pub repetitions: Option<usize>,
    pub integrator_budget: Option<f64>,
    pub kappa_ratio: Option<f64>,
    pub s_ratio: Option<f64>,
    pub cond_m_ratio: Option<f64>,
    pub smin_m_ratio: Option<f64>,
    pub failed: Option<String>,
}

/// Geometric mean and max/min spread of a measured/bound ratio column; the
/// spread is what the "varies by less than an order of magnitude" checks
/// look at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub geometric_mean: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub fitted_slope: Option<f64>,
    pub fitted_constants: Vec<FittedConstant>,
}

impl StudyReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(Error::Io)?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self).map_err(|e| Error::Serde(e.to_string()))?;
        Ok(())
    }
}

/// Least-squares slope of log y against log x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Parameter(
            "slope fit needs at least two matched samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::Parameter(
            "slope fit needs strictly positive samples".into(),
        ));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("slope fit needs distinct x values".into()));
    }
    Ok(sxy / sxx)
}

/// Grows the interior count until the measured fill distance reaches the
/// target (at most twelve rounds; the last attempt is returned either way,
/// with a warning when it falls short).
pub fn point_set_for_target(
    d: usize,
    target_h: f64,
    seed_skip: usize,
    domain: &Domain,
) -> Result<PointSet> {
    if !(target_h > 0.0) {
        return Err(Error::Parameter(format!(
            "fill-distance target {target_h} must be positive"
        )));
    }
    let mut n = ((1.0 / target_h).ceil() as usize)
        .pow(d as u32)
        .div_euclid(2)
        .max(4);
    let mut set = None;
    for _ in 0..12 {
        let interior = generate_halton(n, domain, seed_skip)?;
        let boundary = generate_boundary(domain, matched_per_face(n, d))?;
        let candidate = PointSet::new(interior, boundary, domain, DEFAULT_PROBE_COUNT)?;
        let h = candidate.h;
        set = Some(candidate);
        if h <= target_h {
            break;
        }
        n = (n as f64 * (h / target_h).powi(d as i32) * 1.08).ceil() as usize + 1;
    }
    let set = set.expect("at least one candidate point set");
    if set.h > target_h {
        log::warn!(
            "fill target {target_h} not reached (h = {} at {} points)",
            set.h,
            set.n_total()
        );
    }
    Ok(set)
}

/// Runs independent row closures on their own threads and merges results by
/// row index.
fn parallel_rows<F>(count: usize, f: F) -> Vec<StudyRow>
where
    F: Fn(usize) -> StudyRow + Sync,
{
    // Batch by core count: rows hold dense factorizations and near-dense
    // sparse matrices, so unbounded fan-out multiplies peak memory for no
    // throughput once the cores are saturated.
    let width = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1);
    let mut out: Vec<Option<StudyRow>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let fref = &f;
        for batch in (0..count).collect::<Vec<_>>().chunks(width) {
            let handles: Vec<_> = batch
                .iter()
                .map(|&i| scope.spawn(move || (i, fref(i))))
                .collect();
            for handle in handles {
                let (i, row) = handle.join().expect("study row thread panicked");
                out[i] = Some(row);
            }
        }
    });
    out.into_iter().map(|r| r.expect("row filled")).collect()
}

fn failed_row(level: usize, err: &Error) -> StudyRow {
    StudyRow {
        level,
        failed: Some(err.to_string()),
        ..StudyRow::default()
    }
}

/// Distance between the rays of two unit vectors: min over global phase of
/// the two-norm distance, i.e. sqrt(2 - 2|<a|b>|). Being a quotient metric it
/// still satisfies the triangle inequality.
fn ray_distance_from_fidelity(fid: f64) -> f64 {
    (2.0 - 2.0 * fid.min(1.0)).max(0.0).sqrt()
}

fn overlap_real_real(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let take = a.len().min(b.len());
    let mut acc = 0.0;
    for i in 0..take {
        acc += a[i] * b[i];
    }
    acc.abs()
}

fn overlap_real_complex(a: &DVector<f64>, b: &DVector<Complex64>) -> f64 {
    let take = a.len().min(b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..take {
        acc += b[i].conj() * a[i];
    }
    acc.norm()
}

fn exact_solution_at(points: &PointSet) -> DVector<f64> {
    let vals: Vec<f64> = points
        .interior
        .iter()
        .chain(&points.boundary)
        .map(|p| manufactured_u(p))
        .collect();
    DVector::from_vec(vals)
}

struct ClassicalRow {
    c: DVector<f64>,
    u_bar: DVector<f64>,
    l2_error: f64,
    kappa: Option<f64>,
    sparsity: usize,
    runtime_ns: u64,
}

fn classical_solve(
    kernel: &WendlandKernel,
    points: &PointSet,
    delta: f64,
    with_evaluation: bool,
) -> Result<(
    ClassicalRow,
    crate::assembly::CollocationSystem,
    Option<crate::assembly::EvaluationMatrix>,
)> {
    let start = std::time::Instant::now();
    let mut system = assemble_collocation(kernel, points, delta)?;
    system.b = assemble_rhs(manufactured_f, manufactured_g, points, delta)?;
    // The evaluation matrices (plain, normalized, dilated) together carry
    // several times the collocation matrix's storage at large support radii,
    // and only the quantum stage reads them; classical-only rows reconstruct
    // the nodal solution by direct summation instead.
    let evaluation = if with_evaluation {
        Some(assemble_evaluation(kernel, points, delta)?)
    } else {
        None
    };
    let c = dense_solve(&system.a, &system.b)?;
    let u_bar = match &evaluation {
        Some(ev) => &ev.m * &c,
        None => {
            let nodes = points.interior.iter().chain(&points.boundary);
            let vals: Vec<f64> = nodes
                .map(|x| evaluate_solution_at(kernel, points, &c, delta, x))
                .collect::<Result<_>>()?;
            DVector::from_vec(vals)
        }
    };
    let u_exact = exact_solution_at(points);
    let l2_error = l2_relative_error(&u_bar, &u_exact)?;
    let kappa = if system.n() <= KAPPA_EIGEN_CAP {
        let k = condition_number(&system.a)?;
        system.kappa = Some(k);
        Some(k)
    } else {
        None
    };
    let row = ClassicalRow {
        c,
        u_bar,
        l2_error,
        kappa,
        sparsity: system.sparsity,
        runtime_ns: start.elapsed().as_nanos() as u64,
    };
    Ok((row, system, evaluation))
}

/// Fills the quantum columns of a row: full pipeline on the normalized
/// system, then the evaluation stage on the resulting coefficient state.
fn attach_quantum_columns(
    row: &mut StudyRow,
    points: &PointSet,
    eps: f64,
    system: &mut crate::assembly::CollocationSystem,
    evaluation: &crate::assembly::EvaluationMatrix,
    classical: &ClassicalRow,
) -> Result<()> {
    let n = points.n_total();
    if n > QLSA_POINT_LIMIT {
        return Err(Error::Config(format!(
            "quantum pipeline is desk-scale: {n} points exceed the {QLSA_POINT_LIMIT} limit"
        )));
    }
    let (a_hat, _eta) = normalize_for_encoding(system)?;
    let b_norm = system.b.norm();
    if b_norm == 0.0 {
        return Err(Error::Parameter("zero right-hand side".into()));
    }
    let b_state = &system.b / b_norm;

    let (smax_m, smin_m) = singular_value_extremes(&dense_from_csc(&evaluation.m));
    let cond_m = smax_m / smin_m;
    // Linear-system target derived from the accuracy target through the
    // measured conditioning of the evaluation stage.
    let eps_l = (eps / cond_m).min(0.45);
    row.cond_m = Some(cond_m);
    row.smin_m = Some(smin_m);
    row.eps_l = Some(eps_l);

    let out = qlsa_solve(&a_hat, &b_state, eps_l)?;
    let c_dir = classical.c.normalize();
    let fidelity_c = overlap_real_complex(&c_dir, &out.c_state.amplitudes);

    let mut c_trunc = out.c_state.amplitudes.rows(0, n).clone_owned();
    let trunc_norm = c_trunc.norm();
    if trunc_norm == 0.0 {
        return Err(Error::Simulation(
            "coefficient state has no weight on the system block".into(),
        ));
    }
    c_trunc /= Complex64::new(trunc_norm, 0.0);
    let s_m = evaluation.sparsity.next_power_of_two();
    let (u_state, prob_prepare) =
        prepare_solution_state(&evaluation.dilation, s_m, &c_trunc, None)?;

    let u_bar_dir = classical.u_bar.normalize();
    let u_exact_dir = exact_solution_at(points).normalize();
    let fidelity_u = overlap_real_complex(&u_bar_dir, &u_state.amplitudes);
    let rbf_err = ray_distance_from_fidelity(overlap_real_real(&u_exact_dir, &u_bar_dir));
    let qlsa_err = ray_distance_from_fidelity(fidelity_u);
    let total_err =
        ray_distance_from_fidelity(overlap_real_complex(&u_exact_dir, &u_state.amplitudes));

    row.kappa = Some(out.resources.kappa);
    row.fidelity_c = Some(fidelity_c);
    row.fidelity_u = Some(fidelity_u);
    row.success_solve = Some(out.success_probability);
    row.success_prepare = Some(prob_prepare);
    row.rbf_state_error = Some(rbf_err);
    row.qlsa_state_error = Some(qlsa_err);
    row.total_state_error = Some(total_err);
    row.error_budget = Some(rbf_err + 2.0 * cond_m * eps_l + out.resources.integrator_budget);
    row.filter_degree = Some(out.resources.filter_degree);
    row.evolution_time = Some(out.resources.evolution_time);
    row.aqc_steps = Some(out.resources.aqc_steps);
    row.repetitions = Some(out.resources.repetitions);
    row.integrator_budget = Some(out.resources.integrator_budget);
    Ok(())
}

pub fn run_convergence_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    if config.h_ladder.is_empty() {
        return Err(Error::Config(
            "convergence study needs at least one fill-distance target".into(),
        ));
    }
    let kernel = WendlandKernel::new(config.d, config.k)?;
    let domain = Domain::unit_cube(config.d)?;
    let deltas = config.deltas_for_ladder(kernel.tau())?;
    if deltas.iter().any(|&dl| !(dl > 0.0 && dl <= 1.0)) {
        return Err(Error::Config(
            "resolved support radii left (0, 1]; adjust the ladder or the rule".into(),
        ));
    }

    let rows = parallel_rows(config.h_ladder.len(), |level| {
        let target = config.h_ladder[level];
        let delta = deltas[level];
        let inner = || -> Result<StudyRow> {
            let points = point_set_for_target(config.d, target, config.seed_skip, &domain)?;
            let with_evaluation =
                config.solver.wants_quantum() && points.n_total() <= QLSA_POINT_LIMIT;
            let (classical, mut system, evaluation) =
                classical_solve(&kernel, &points, delta, with_evaluation)?;
            let mut row = StudyRow {
                level,
                n_total: points.n_total(),
                n_interior: points.n_interior(),
                h: points.h,
                q: points.q,
                delta,
                sparsity: Some(classical.sparsity),
                kappa: classical.kappa,
                l2_error: Some(classical.l2_error),
                runtime_ns: Some(classical.runtime_ns),
                ..StudyRow::default()
            };
            if config.solver.wants_quantum() {
                let evaluation = evaluation.as_ref().ok_or_else(|| {
                    Error::Config(format!(
                        "quantum pipeline is desk-scale: {} points exceed the {QLSA_POINT_LIMIT} limit",
                        points.n_total()
                    ))
                })?;
                attach_quantum_columns(
                    &mut row,
                    &points,
                    config.eps,
                    &mut system,
                    evaluation,
                    &classical,
                )?;
            }
            Ok(row)
        };
        inner().unwrap_or_else(|e| failed_row(level, &e))
    });

    let good: Vec<&StudyRow> = rows.iter().filter(|r| r.failed.is_none()).collect();
    let hs: Vec<f64> = good.iter().map(|r| r.h).collect();
    let es: Vec<f64> = good.iter().filter_map(|r| r.l2_error).collect();
    let fitted_slope = if hs.len() >= 2 && hs.len() == es.len() {
        fit_loglog_slope(&hs, &es).ok()
    } else {
        None
    };
    Ok(StudyReport {
        study: "convergence".into(),
        config: config.clone(),
        rows,
        fitted_slope,
        fitted_constants: Vec::new(),
    })
}

fn geometric_stats(name: &str, values: &[f64]) -> Option<FittedConstant> {
    if values.is_empty() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    Some(FittedConstant {
        name: name.into(),
        geometric_mean: log_mean.exp(),
        spread: max / min,
    })
}

pub fn run_conditioning_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let n_interior = config.n_interior.ok_or_else(|| {
        Error::Config("conditioning study needs n_interior for the fixed point set".into())
    })?;
    let deltas = config
        .delta_ladder
        .clone()
        .unwrap_or_else(|| vec![0.3, 0.45, 0.675, 1.0]);
    let kernel = WendlandKernel::new(config.d, config.k)?;
    let tau = kernel.tau();
    let domain = Domain::unit_cube(config.d)?;
    let interior = generate_halton(n_interior, &domain, config.seed_skip)?;
    let boundary = generate_boundary(&domain, matched_per_face(n_interior, config.d))?;
    let points = PointSet::new(interior, boundary, &domain, DEFAULT_PROBE_COUNT)?;
    if points.n_total() > DENSE_EIGEN_LIMIT {
        return Err(Error::Config(format!(
            "conditioning study needs dense eigensolves: {} points exceed {DENSE_EIGEN_LIMIT}",
            points.n_total()
        )));
    }

    let d_exp = config.d as f64;
    let rows = parallel_rows(deltas.len(), |level| {
        let delta = deltas[level];
        let inner = || -> Result<StudyRow> {
            let start = std::time::Instant::now();
            let system = assemble_collocation(&kernel, &points, delta)?;
            let kappa = condition_number(&system.a)?;
            let evaluation = assemble_evaluation(&kernel, &points, delta)?;
            let (smax_m, smin_m) = singular_value_extremes(&dense_from_csc(&evaluation.m));
            let cond_m = smax_m / smin_m;
            let dq = delta / points.q;
            let growth = dq.powf(2.0 * tau - d_exp);
            let s = system.sparsity as f64;
            Ok(StudyRow {
                level,
                n_total: points.n_total(),
                n_interior: points.n_interior(),
                h: points.h,
                q: points.q,
                delta,
                sparsity: Some(system.sparsity),
                kappa: Some(kappa),
                cond_m: Some(cond_m),
                smin_m: Some(smin_m),
                runtime_ns: Some(start.elapsed().as_nanos() as u64),
                kappa_ratio: Some(kappa / ((1.0 + dq).powf(d_exp) * growth)),
                s_ratio: Some(s / (1.0 + dq).powf(d_exp)),
                cond_m_ratio: Some(cond_m / (s * growth)),
                smin_m_ratio: Some(
                    smin_m / (points.q.powf(-d_exp) * (points.q / delta).powf(2.0 * tau)),
                ),
                ..StudyRow::default()
            })
        };
        inner().unwrap_or_else(|e| failed_row(level, &e))
    });

    let collect = |f: fn(&StudyRow) -> Option<f64>| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.failed.is_none())
            .filter_map(f)
            .collect()
    };
    let fitted_constants = [
        geometric_stats("kappa_over_bound", &collect(|r| r.kappa_ratio)),
        geometric_stats("s_over_bound", &collect(|r| r.s_ratio)),
        geometric_stats("cond_m_over_bound", &collect(|r| r.cond_m_ratio)),
        geometric_stats("smin_m_over_bound", &collect(|r| r.smin_m_ratio)),
    ]
    .into_iter()
    .flatten()
    .collect();

    Ok(StudyReport {
        study: "conditioning".into(),
        config: config.clone(),
        rows,
        fitted_slope: None,
        fitted_constants,
    })
}

pub fn run_qlsa_comparison(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    if !config.solver.wants_quantum() {
        return Err(Error::Config(
            "qlsa comparison needs the quantum-sim (or both) solver".into(),
        ));
    }
    let counts = config
        .n_ladder
        .clone()
        .or_else(|| config.n_interior.map(|n| vec![n]))
        .unwrap_or_else(|| vec![4]);
    let delta = match config.delta_rule {
        DeltaRule::Fixed { delta } => delta,
        DeltaRule::Scaled => {
            return Err(Error::Config(
                "qlsa comparison holds the support radius fixed".into(),
            ))
        }
    };
    let kernel = WendlandKernel::new(config.d, config.k)?;
    let domain = Domain::unit_cube(config.d)?;

    let rows = parallel_rows(counts.len(), |level| {
        let n_i = counts[level];
        let inner = || -> Result<StudyRow> {
            let interior = generate_halton(n_i, &domain, config.seed_skip)?;
            let boundary = generate_boundary(&domain, matched_per_face(n_i, config.d))?;
            let points = PointSet::new(interior, boundary, &domain, DEFAULT_PROBE_COUNT)?;
            let (classical, mut system, evaluation) =
                classical_solve(&kernel, &points, delta, true)?;
            let evaluation = evaluation.expect("evaluation matrices were requested");
            // CG on the same system for the iteration column.
            let (_, iterations, _) =
                conjugate_gradient(&system.a, &system.b, 1e-6, 100_000)?;
            let mut row = StudyRow {
                level,
                n_total: points.n_total(),
                n_interior: points.n_interior(),
                h: points.h,
                q: points.q,
                delta,
                sparsity: Some(classical.sparsity),
                kappa: classical.kappa,
                l2_error: Some(classical.l2_error),
                cg_iterations: Some(iterations),
                runtime_ns: Some(classical.runtime_ns),
                ..StudyRow::default()
            };
            attach_quantum_columns(
                &mut row,
                &points,
                config.eps,
                &mut system,
                &evaluation,
                &classical,
            )?;
            Ok(row)
        };
        inner().unwrap_or_else(|e| failed_row(level, &e))
    });

    Ok(StudyReport {
        study: "qlsa".into(),
        config: config.clone(),
        rows,
        fitted_slope: None,
        fitted_constants: Vec::new(),
    })
}

/// Epsilon exponents of the two cost models and the dimension threshold at
/// which the quantum one wins.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexityModel {
    pub d: usize,
    pub tau: f64,
    pub beta: f64,
    pub classical_exponent: f64,
    pub quantum_exponent: f64,
    pub q_advantage: bool,
}

pub fn complexity_exponents(d: usize, tau: f64, beta: f64) -> Result<ComplexityModel> {
    if beta <= 2.0 {
        return Err(Error::Parameter(format!(
            "beta = {beta} makes the cost prefactor beta/(beta-2) divergent"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!(
            "smoothness exponent tau = {tau} must be positive"
        )));
    }
    let d_f = d as f64;
    let prefactor = beta / (beta - 2.0);
    Ok(ComplexityModel {
        d,
        tau,
        beta,
        classical_exponent: prefactor * (1.0 + d_f / tau + d_f / beta),
        quantum_exponent: prefactor * (4.0 + d_f / tau),
        q_advantage: d_f > 3.0 * beta,
    })
}
