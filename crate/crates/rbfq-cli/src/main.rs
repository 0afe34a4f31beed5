//! Command-line front end: point generation, assembly, classical and
//! simulated-quantum solves, studies, and the complexity model, with JSON or
//! CSV artifacts and machine-readable errors.
//!
//! Exit codes: 0 success, 2 usage, 3 malformed config or parameters,
//! 4 I/O, 5 compute (indefinite system, diverged iteration, simulation
//! failure). Errors go to stderr as `{"error":{"kind":...,"message":...}}`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbfq::assembly::{
    assemble_collocation, assemble_evaluation, assemble_rhs, normalize_for_encoding,
};
use rbfq::io::{save_matrix_market, write_vector_csv};
use rbfq::points::{generate_boundary, generate_halton, matched_per_face, DEFAULT_PROBE_COUNT};
use rbfq::quantum::pipeline::{prepare_solution_state, qlsa_solve};
use rbfq::solve::{
    dense_solve, l2_relative_error, manufactured_f, manufactured_g, manufactured_u, solve_system,
};
use rbfq::study::{
    complexity_exponents, load_config, run_conditioning_study, run_convergence_study,
    run_qlsa_comparison, StudyReport,
};
use rbfq::{Domain, Error, PointSet, Result, SolveMethod, WendlandKernel};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "rbfq",
    version,
    about = "Meshfree Poisson collocation with a simulated quantum linear-system solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print kernel polynomial data as JSON
    Kernel {
        #[command(subcommand)]
        command: KernelCommand,
    },
    /// Generate collocation point sets
    Points {
        #[command(subcommand)]
        command: PointsCommand,
    },
    /// Assemble the collocation system and evaluation matrices
    Assemble(AssembleArgs),
    /// Solve the assembled system classically
    Solve(SolveArgs),
    /// Run the simulated quantum pipeline on one system
    Qsolve(QsolveArgs),
    /// Run a study from a JSON config
    Study {
        #[command(subcommand)]
        command: StudyCommand,
    },
    /// Evaluate the cost-model exponents
    Complexity(ComplexityArgs),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Dump the polynomial pieces of one kernel
    Dump {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PointsCommand {
    /// Generate interior Halton points with matched boundary coverage
    Gen {
        #[arg(long)]
        d: usize,
        /// Interior point count
        #[arg(long)]
        n: usize,
        /// Boundary points per face (default: matched to n)
        #[arg(long)]
        per_face: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed_skip: usize,
        /// Probe budget for the fill-distance estimate
        #[arg(long, default_value_t = DEFAULT_PROBE_COUNT)]
        probes: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// Point-set CSV produced by `points gen`
    #[arg(long)]
    points: PathBuf,
    /// Kernel smoothness order
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Support radius in (0, 1]
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_PROBE_COUNT)]
    probes: usize,
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Also write the spectrally normalized matrix and its eta
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Cg,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    /// CG relative-residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct QsolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Filter suppression target
    #[arg(long, default_value_t = 1e-3)]
    eps_l: f64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StudyCommand {
    Convergence(StudyArgs),
    Conditioning(StudyArgs),
    Qlsa(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// JSON study config (schema 1)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    d: usize,
    /// Kernel smoothness order; tau is then d/2 + k + 1/2
    #[arg(long)]
    k: Option<usize>,
    /// Native-space smoothness, overrides --k
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            emit_error("usage", &e.to_string());
            std::process::exit(2);
        }
    };
    if let Err(e) = run(cli.command) {
        let (code, kind) = classify(&e);
        emit_error(kind, &e.to_string());
        std::process::exit(code);
    }
}

fn emit_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        json!({ "error": { "kind": kind, "message": message } })
    );
}

fn classify(e: &Error) -> (i32, &'static str) {
    match e {
        Error::Config(_)
        | Error::Serde(_)
        | Error::Parameter(_)
        | Error::KernelOrder { .. }
        | Error::KernelSmoothness { .. }
        | Error::SupportRadius(_)
        | Error::Dimension(_) => (3, "config"),
        Error::Io(_) => (4, "io"),
        _ => (5, "compute"),
    }
}

/// Environment beats the flag, which beats the config, which beats the
/// current directory.
fn resolve_out_dir(flag: Option<PathBuf>, from_config: Option<PathBuf>) -> Result<PathBuf> {
    let dir = std::env::var_os("RBFQ_OUT_DIR")
        .map(PathBuf::from)
        .or(flag)
        .or(from_config)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            use std::io::Write;
            // A closed pipe (e.g. piping into `head`) is a normal way for the
            // reader to stop; everything else is a real I/O failure.
            if let Err(e) = writeln!(std::io::stdout(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(Error::Io(e));
                }
            }
        }
    }
    Ok(())
}

/// Reads a point-set CSV, inferring the dimension from the x-columns of the
/// header.
fn load_points(path: &Path, probes: usize) -> Result<(PointSet, Domain)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let header = text
        .lines()
        .next()
        .ok_or_else(|| Error::Serde(format!("{}: empty point file", path.display())))?;
    let d = header
        .split(',')
        .filter(|c| c.trim().starts_with('x'))
        .count();
    let domain = Domain::unit_cube(d)?;
    let set = PointSet::read_csv(path, &domain, probes)?;
    Ok((set, domain))
}

fn write_study_report(report: &StudyReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let json_path = dir.join(format!("{}_report.json", report.study));
    let csv_path = dir.join(format!("{}_rows.csv", report.study));
    report.write_json(&json_path)?;
    report.write_csv(&csv_path)?;
    Ok((json_path, csv_path))
}

fn study_summary(report: &StudyReport, json_path: &Path, csv_path: &Path) -> serde_json::Value {
    json!({
        "study": report.study,
        "rows": report.rows.len(),
        "failed_rows": report.rows.iter().filter(|r| r.failed.is_some()).count(),
        "fitted_slope": report.fitted_slope,
        "fitted_constants": report.fitted_constants,
        "report": json_path.display().to_string(),
        "rows_csv": csv_path.display().to_string(),
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Kernel {
            command: KernelCommand::Dump { d, k, out },
        } => {
            let kernel = WendlandKernel::new(d, k)?;
            let value = json!({
                "d": d,
                "k": k,
                "ell": kernel.ell(),
                "tau": kernel.tau(),
                "phi": kernel.phi_coefficients(),
                "laplacian": (k >= 1).then(|| kernel.laplacian_coefficients()),
                "bilaplacian": (k >= 2).then(|| kernel.bilaplacian_coefficients()),
            });
            print_json(&value, out.as_deref())
        }
        Command::Points {
            command:
                PointsCommand::Gen {
                    d,
                    n,
                    per_face,
                    seed_skip,
                    probes,
                    out,
                },
        } => {
            let domain = Domain::unit_cube(d)?;
            let interior = generate_halton(n, &domain, seed_skip)?;
            let per_face = per_face.unwrap_or_else(|| matched_per_face(n, d));
            let boundary = generate_boundary(&domain, per_face)?;
            let set = PointSet::new(interior, boundary, &domain, probes)?;
            set.write_csv(&out)?;
            print_json(
                &json!({
                    "n_interior": set.n_interior(),
                    "n_boundary": set.boundary.len(),
                    "h": set.h,
                    "q": set.q,
                    "c_qu": set.c_qu,
                    "out": out.display().to_string(),
                }),
                None,
            )
        }
        Command::Assemble(args) => {
            let dir = resolve_out_dir(args.out_dir, None)?;
            let (points, _) = load_points(&args.system.points, args.system.probes)?;
            let kernel = WendlandKernel::new(points.interior[0].len(), args.system.k)?;
            let mut system = assemble_collocation(&kernel, &points, args.system.delta)?;
            system.b = assemble_rhs(manufactured_f, manufactured_g, &points, args.system.delta)?;
            let evaluation = assemble_evaluation(&kernel, &points, args.system.delta)?;
            save_matrix_market(&system.a, &dir.join("system.mtx"))?;
            save_matrix_market(&system.a_raw, &dir.join("system_raw.mtx"))?;
            write_vector_csv(&system.b, &dir.join("rhs.csv"))?;
            save_matrix_market(&evaluation.m, &dir.join("evaluation.mtx"))?;
            save_matrix_market(&evaluation.m_hat, &dir.join("evaluation_hat.mtx"))?;
            save_matrix_market(&evaluation.dilation, &dir.join("dilation.mtx"))?;
            let eta = if args.normalize {
                let (a_hat, eta) = normalize_for_encoding(&mut system)?;
                save_matrix_market(&a_hat, &dir.join("system_hat.mtx"))?;
                Some(eta)
            } else {
                None
            };
            print_json(
                &json!({
                    "n": system.n(),
                    "n_interior": system.n_interior,
                    "sparsity": system.sparsity,
                    "evaluation_sparsity": evaluation.sparsity,
                    "delta": system.delta,
                    "eta": eta,
                    "out_dir": dir.display().to_string(),
                }),
                None,
            )
        }
        Command::Solve(args) => {
            let dir = resolve_out_dir(args.out_dir, None)?;
            let (points, _) = load_points(&args.system.points, args.system.probes)?;
            let kernel = WendlandKernel::new(points.interior[0].len(), args.system.k)?;
            let mut system = assemble_collocation(&kernel, &points, args.system.delta)?;
            system.b = assemble_rhs(manufactured_f, manufactured_g, &points, args.system.delta)?;
            let evaluation = assemble_evaluation(&kernel, &points, args.system.delta)?;
            let method = match args.method {
                MethodArg::Direct => SolveMethod::Direct,
                MethodArg::Cg => SolveMethod::ConjugateGradient {
                    tol: args.tol,
                    max_iter: args.max_iter,
                },
            };
            let result = solve_system(&mut system, &evaluation, method)?;
            let u_exact = nalgebra::DVector::from_vec(
                points
                    .interior
                    .iter()
                    .chain(&points.boundary)
                    .map(|p| manufactured_u(p))
                    .collect::<Vec<_>>(),
            );
            let l2 = l2_relative_error(&result.u_bar_at_points, &u_exact)?;
            write_vector_csv(&result.c, &dir.join("coefficients.csv"))?;
            write_vector_csv(&result.u_bar_at_points, &dir.join("u_bar.csv"))?;
            let file = std::fs::File::create(dir.join("solve.json"))?;
            serde_json::to_writer_pretty(file, &result)
                .map_err(|e| Error::Serde(e.to_string()))?;
            print_json(
                &json!({
                    "iterations": result.iterations,
                    "residual": result.residual,
                    "kappa": result.kappa,
                    "l2_error": l2,
                    "runtime_ns": result.runtime_ns as u64,
                    "out_dir": dir.display().to_string(),
                }),
                None,
            )
        }
        Command::Qsolve(args) => {
            let dir = resolve_out_dir(args.out_dir, None)?;
            let (points, _) = load_points(&args.system.points, args.system.probes)?;
            let kernel = WendlandKernel::new(points.interior[0].len(), args.system.k)?;
            let mut system = assemble_collocation(&kernel, &points, args.system.delta)?;
            system.b = assemble_rhs(manufactured_f, manufactured_g, &points, args.system.delta)?;
            let evaluation = assemble_evaluation(&kernel, &points, args.system.delta)?;
            let c_classical = dense_solve(&system.a, &system.b)?;
            let (a_hat, _eta) = normalize_for_encoding(&mut system)?;
            let b_state = &system.b / system.b.norm();
            let outcome = qlsa_solve(&a_hat, &b_state, args.eps_l)?;

            let n = system.n();
            let c_dir = c_classical.normalize();
            let fidelity_c = outcome
                .c_state
                .amplitudes
                .rows(0, n)
                .iter()
                .zip(c_dir.iter())
                .map(|(a, &x)| a.conj() * x)
                .sum::<num_complex::Complex64>()
                .norm();

            let mut c_trunc = outcome.c_state.amplitudes.rows(0, n).clone_owned();
            c_trunc /= num_complex::Complex64::new(c_trunc.norm(), 0.0);
            let s_m = evaluation.sparsity.next_power_of_two();
            let (u_state, prob_prepare) =
                prepare_solution_state(&evaluation.dilation, s_m, &c_trunc, None)?;

            outcome
                .c_state
                .write_amplitudes_csv(&dir.join("coefficient_state.csv"))?;
            u_state.write_amplitudes_csv(&dir.join("solution_state.csv"))?;
            let file = std::fs::File::create(dir.join("ledger.json"))?;
            serde_json::to_writer_pretty(file, &outcome.resources)
                .map_err(|e| Error::Serde(e.to_string()))?;
            print_json(
                &json!({
                    "kappa": outcome.resources.kappa,
                    "filter_degree": outcome.resources.filter_degree,
                    "aqc_steps": outcome.resources.aqc_steps,
                    "success_solve": outcome.success_probability,
                    "success_prepare": prob_prepare,
                    "fidelity_vs_classical": fidelity_c,
                    "out_dir": dir.display().to_string(),
                }),
                None,
            )
        }
        Command::Study { command } => {
            let (args, runner): (&StudyArgs, fn(&rbfq::StudyConfig) -> Result<StudyReport>) =
                match &command {
                    StudyCommand::Convergence(a) => (a, run_convergence_study),
                    StudyCommand::Conditioning(a) => (a, run_conditioning_study),
                    StudyCommand::Qlsa(a) => (a, run_qlsa_comparison),
                };
            let config = load_config(&args.config)?;
            let dir = resolve_out_dir(args.out_dir.clone(), config.output_dir.clone())?;
            let report = runner(&config)?;
            let (json_path, csv_path) = write_study_report(&report, &dir)?;
            print_json(&study_summary(&report, &json_path, &csv_path), None)
        }
        Command::Complexity(args) => {
            let tau = match (args.tau, args.k) {
                (Some(tau), _) => tau,
                (None, Some(k)) => args.d as f64 / 2.0 + k as f64 + 0.5,
                (None, None) => {
                    return Err(Error::Parameter(
                        "complexity needs either --tau or --k".into(),
                    ))
                }
            };
            let model = complexity_exponents(args.d, tau, args.beta)?;
            print_json(
                &json!({
                    "d": model.d,
                    "tau": model.tau,
                    "beta": model.beta,
                    "classical": model.classical_exponent,
                    "quantum": model.quantum_exponent,
                    "advantage": model.q_advantage,
                }),
                args.out.as_deref(),
            )
        }
    }
}
