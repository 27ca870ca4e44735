use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use stabcert::compare::compare_bounds;
use stabcert::experiment::{evaluate_trial, run_experiment, Execution, ExperimentConfig, Query, Setup};
use stabcert::report::{render, Format};
use stabcert_core::certify::{davis_kahan_bound, projector_bound_for, projector_difference, select_k, Outcome};
use stabcert_core::contour::{
    build_contour, contour_diagnostics_verified, contour_projector_with, ContourOptions, QuadratureRule,
};
use stabcert_core::eigen::{operator_norm, spectral_decompose};
use stabcert_core::randmat::{wigner_law_check, NoiseDistribution, NoiseModel};
use stabcert_core::region::region_stats;
use stabcert_core::{DenseMatrix, KStrategy, Region, Theorem};

/// Exit status for invalid arguments or configs.
const EXIT_INVALID: u8 = 2;
/// Exit status when a certified conclusion failed.
const EXIT_VIOLATION: u8 = 1;

#[derive(Parser)]
#[command(name = "stabcert", version, about = "Spectral stability certificates for noisy matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one certificate on A and E and check it against A + E.
    Certify(CertifyArgs),
    /// Projector perturbation bound, Davis–Kahan bound and the measured distance.
    ProjectBound(Common),
    /// Contour-integral projector against the eigenvector projector; with
    /// noise, also the contour estimates.
    ContourVerify(ContourArgs),
    /// Run a Monte Carlo experiment from a TOML config.
    MonteCarlo(MonteCarloArgs),
    /// One bound-comparison row.
    Compare(CompareArgs),
    /// Empirical operator norm and interaction sizes of Wigner noise.
    WignerCheck(WignerArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Matrix file: a `rows cols` header, then one row per line.
    #[arg(long)]
    matrix: PathBuf,
    /// Noise matrix file, or `dist:scale` sampled with --seed.
    #[arg(long, default_value = "gaussian:0")]
    noise: String,
    /// Comma-separated open intervals, e.g. "(0,2),(3,inf)".
    #[arg(long)]
    region: Option<String>,
    /// fixed:<v>, paper or grid.
    #[arg(long = "K", default_value = "fixed:100")]
    k: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat the matrix as rectangular.
    #[arg(long)]
    rect: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "regional_stability")]
    theorem: Theorem,
    /// 1-based eigenvalue index for the leading bounds.
    #[arg(long)]
    index: Option<usize>,
    /// Hole centre for localize.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct ContourArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    /// midpoint or gl8.
    #[arg(long, default_value = "gl8")]
    rule: String,
    #[arg(long, default_value_t = 1e-6)]
    target: f64,
    /// Highest series order for the contour estimates.
    #[arg(long, default_value_t = 8)]
    s_max: usize,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// `σ₁ ≤ n^{C₁}` in the smoothed-analysis baseline.
    #[arg(long, default_value_t = 3.0)]
    c1: f64,
    /// `‖E‖ ≤ n^{C₂}` in the smoothed-analysis baseline.
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
}

#[derive(Args)]
struct WignerArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// `dist:scale`.
    #[arg(long, default_value = "gaussian:1")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

fn read_matrix(path: &Path) -> anyhow::Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DenseMatrix::parse_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_noise_model(spec: &str, seed: u64) -> anyhow::Result<NoiseModel> {
    let (dist, scale) = spec.split_once(':').context("noise must be a file or dist:scale")?;
    let dist: NoiseDistribution = dist.parse()?;
    let scale: f64 = scale.parse().with_context(|| format!("bad noise scale '{scale}'"))?;
    if !(scale >= 0.0) || !scale.is_finite() {
        bail!("noise scale must be finite and non-negative");
    }
    Ok(NoiseModel::new(dist, scale, seed))
}

fn load_noise(common: &Common, setup: &Setup) -> anyhow::Result<DenseMatrix> {
    let path = Path::new(&common.noise);
    if path.exists() {
        let e = read_matrix(path)?;
        if e.rows() != setup.a.rows() || e.cols() != setup.a.cols() {
            bail!("noise is {}x{} but the matrix is {}x{}", e.rows(), e.cols(), setup.a.rows(), setup.a.cols());
        }
        return Ok(e);
    }
    let model = parse_noise_model(&common.noise, common.seed)?;
    Ok(setup.noise(&model, common.rect, 0))
}

fn setup_from(common: &Common) -> anyhow::Result<Setup> {
    let a = read_matrix(&common.matrix)?;
    let region = common.region.as_deref().map(str::parse::<Region>).transpose()?;
    let strategy: KStrategy = common.k.parse()?;
    Setup::from_matrix(a, common.rect, region, strategy)
}

/// Flattens nested JSON into dotted `(key, value)` pairs.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_value<T: Serialize>(value: &T, format: Format) -> anyhow::Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&v)? + "\n",
        Format::Text => {
            let mut pairs = Vec::new();
            flatten("", &v, &mut pairs);
            pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
        }
        Format::Csv => {
            let mut pairs = Vec::new();
            flatten("", &v, &mut pairs);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(pairs.iter().map(|p| p.0.as_str()))?;
            w.write_record(pairs.iter().map(|p| p.1.as_str()))?;
            String::from_utf8(w.into_inner()?)?
        }
    })
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn certify(args: &CertifyArgs) -> anyhow::Result<bool> {
    let setup = setup_from(&args.common)?;
    let e = load_noise(&args.common, &setup)?;
    let query = Query {
        theorem: args.theorem,
        index: args.index,
        lambda: args.lambda,
    };
    if query.is_rectangular() != args.common.rect {
        bail!("theorem {} needs --rect to match", args.theorem.as_str());
    }
    let (certificate, empirical, measured) = evaluate_trial(&query, &setup, &e)?;
    let outcome = Outcome::classify(certificate.certified, empirical);
    #[derive(Serialize)]
    struct Out<'a> {
        certificate: &'a stabcert_core::Certificate,
        empirical: bool,
        outcome: Outcome,
        measured: serde_json::Map<String, Value>,
    }
    let measured = measured
        .into_iter()
        .map(|(k, v)| (k, serde_json::json!(v)))
        .collect();
    let text = render_value(
        &Out {
            certificate: &certificate,
            empirical,
            outcome,
            measured,
        },
        args.common.format,
    )?;
    emit(&text, args.common.out.as_deref())?;
    Ok(outcome != Outcome::Violation)
}

fn project_bound(common: &Common) -> anyhow::Result<bool> {
    let setup = setup_from(common)?;
    let region = setup.region.clone().context("--region is required")?;
    let decomp = setup.decomp.as_ref().context("project-bound needs a symmetric matrix")?;
    let e = load_noise(common, &setup)?;
    let k = select_k(decomp, &e, &region, setup.strategy)?;
    let e_norm = operator_norm(&e)?;
    let stats = region_stats(decomp, &region, k, e_norm)?;
    let main = projector_bound_for(decomp, &e, &region, k)?;
    let dk = davis_kahan_bound(e_norm, stats.delta_d);
    let noisy = spectral_decompose(&setup.a.add(&e)?.symmetrized())?;
    let diff = projector_difference(decomp, &noisy, &region)?;
    let ok = [&main, &dk]
        .iter()
        .all(|c| !c.certified || diff.norm <= c.rhs + stabcert::experiment::MEASURE_TOL);
    let text = render_value(
        &serde_json::json!({ "projector_bound": main, "davis_kahan": dk, "measured": diff }),
        common.format,
    )?;
    emit(&text, common.out.as_deref())?;
    Ok(ok)
}

fn contour_verify(args: &ContourArgs) -> anyhow::Result<bool> {
    let setup = setup_from(&args.common)?;
    let region = setup.region.clone().context("--region is required")?;
    let decomp = setup.decomp.as_ref().context("contour-verify needs a symmetric matrix")?;
    let e = load_noise(&args.common, &setup)?;
    let e_norm = operator_norm(&e)?;
    let rule = match args.rule.as_str() {
        "midpoint" => QuadratureRule::Midpoint,
        "gl8" | "gauss_legendre8" => QuadratureRule::GaussLegendre8,
        other => bail!("rule must be midpoint or gl8, got '{other}'"),
    };
    let k = select_k(decomp, &e, &region, setup.strategy)?;
    let opts = ContourOptions {
        nodes_per_edge: args.nodes,
        rule,
        reach: k * e_norm,
        height: None,
    };
    let gamma = build_contour(decomp, &region, &opts)?;
    let proj = contour_projector_with(&setup.a, &gamma, args.target)?;
    let inside: Vec<usize> = (0..decomp.n()).filter(|&i| region.contains(decomp.eigenvalues()[i])).collect();
    let exact = decomp.projector(&inside)?;
    let error = operator_norm(&proj.projector.sub(&exact)?.symmetrized())?;
    let mut out = serde_json::json!({
        "nodes_per_edge": proj.nodes_per_edge,
        "refinement_change": proj.refinement_change,
        "imag_residue": proj.imag_residue,
        "error_vs_eigenprojector": error,
    });
    let mut ok = error <= args.target.max(1e-6);
    if e_norm > 0.0 {
        let diag = contour_diagnostics_verified(decomp, &e, &gamma, args.s_max, k)?;
        ok &= !diag.regime.holds() || diag.checks.all();
        out["diagnostics"] = serde_json::to_value(&diag)?;
    }
    emit(&render_value(&out, args.common.format)?, args.common.out.as_deref())?;
    Ok(ok)
}

fn monte_carlo(args: &MonteCarloArgs) -> anyhow::Result<bool> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    let execution = if args.serial { Execution::Serial } else { Execution::Parallel };
    let report = run_experiment(&config, execution)?;
    if let Some(path) = &config.output.report {
        fs::write(path, report.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &config.output.csv {
        fs::write(path, render(&report, Format::Csv)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut text = render(&report, args.format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(&text, args.out.as_deref())?;
    Ok(report.success())
}

fn compare(args: &CompareArgs) -> anyhow::Result<bool> {
    let setup = setup_from(&args.common)?;
    let region = setup.region.clone().context("--region is required")?;
    let decomp = setup.decomp.as_ref().context("compare needs a symmetric matrix")?;
    let e = load_noise(&args.common, &setup)?;
    let k = select_k(decomp, &e, &region, setup.strategy)?;
    let row = compare_bounds(decomp, &e, &region, k, args.c1, args.c2)?;
    let tol = stabcert::experiment::MEASURE_TOL;
    let ok = (!row.main_applicable || row.measured_delta_pi <= row.main_rhs + tol)
        && (!row.dk_applicable || row.measured_delta_pi <= row.dk_rhs + tol)
        && (!row.least_singular_certified || row.sigma_n_tilde >= row.certified_floor);
    emit(&render_value(&row, args.common.format)?, args.common.out.as_deref())?;
    Ok(ok)
}

fn wigner_check(args: &WignerArgs) -> anyhow::Result<bool> {
    let model = parse_noise_model(&args.noise, args.seed)?;
    let report = wigner_law_check(args.n, args.trials, &model)?;
    emit(&render_value(&report, args.format)?, args.out.as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Certify(a) => certify(a),
        Command::ProjectBound(a) => project_bound(a),
        Command::ContourVerify(a) => contour_verify(a),
        Command::MonteCarlo(a) => monte_carlo(a),
        Command::Compare(a) => compare(a),
        Command::WignerCheck(a) => wigner_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("implication violation detected");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
