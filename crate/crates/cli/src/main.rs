//! Command-line frontend: parses configuration, dispatches to the
//! spectrum / certificate / solver routines and emits CSV or JSON
//! artifacts with the resolved configuration embedded.
//!
//! Exit codes: 0 = computed (scientific verdicts are data, not status),
//! 2 = configuration or input error, 3 = internal numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use onsager_core::{
    angular_from_tag, best_critical_point, certify_with_spectrum, default_xi_grid, gauss_legendre,
    scan, spectrum_onsager_closed_form, spectrum_quadrature, spectrum_sinpow_exact,
    AngularPotential, Error as CoreError, ScanConfig, SolverConfig, SpatialKernel,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "onsager",
    about = "Mean-field analysis of Onsager-type liquid crystal functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Legendre spectrum of an angular potential
    Spectrum(Options),
    /// Emit the first-order transition certificate
    Certify(Options),
    /// Solve the self-consistency equation at a single density
    Solve(Options),
    /// Scan a density range and bracket the transition
    Scan(Options),
}

/// Flags; every field is optional so values from `--config` can fill the
/// gaps (flags override the file).
#[derive(Args, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Options {
    /// onsager | maier-saupe | sinpow:K | table:PATH
    #[arg(long)]
    potential: Option<String>,
    /// delta | gaussian:SIGMA | ball:R
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    rho_min: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long)]
    rho_steps: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    /// damping factor of the fixed-point iteration, in (0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with the same keys as the flags (kebab-case)
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// Fully resolved run configuration; embedded in every artifact.
#[derive(Serialize, Clone)]
struct Resolved {
    command: String,
    potential: String,
    kernel: String,
    beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_steps: Option<usize>,
    lmax: usize,
    nodes: usize,
    alpha: f64,
    tol: f64,
    format: String,
    threads: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::Config(_)
            | CoreError::Format(_)
            | CoreError::Validation(_)
            | CoreError::Index(_)
            | CoreError::Io(_) => EXIT_CONFIG,
            CoreError::Domain(_) | CoreError::State(_) => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = match &cli.command {
        Command::Spectrum(o) => ("spectrum", o),
        Command::Certify(o) => ("certify", o),
        Command::Solve(o) => ("solve", o),
        Command::Scan(o) => ("scan", o),
    };
    match run(name, opts.clone()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn merge(flags: Options, file: Options) -> Options {
    Options {
        potential: flags.potential.or(file.potential),
        kernel: flags.kernel.or(file.kernel),
        beta: flags.beta.or(file.beta),
        rho: flags.rho.or(file.rho),
        rho_min: flags.rho_min.or(file.rho_min),
        rho_max: flags.rho_max.or(file.rho_max),
        rho_steps: flags.rho_steps.or(file.rho_steps),
        lmax: flags.lmax.or(file.lmax),
        nodes: flags.nodes.or(file.nodes),
        alpha: flags.alpha.or(file.alpha),
        tol: flags.tol.or(file.tol),
        output: flags.output.or(file.output),
        format: flags.format.or(file.format),
        threads: flags.threads.or(file.threads),
        config: None,
    }
}

fn resolve(command: &str, mut opts: Options) -> Result<(Resolved, AngularPotential), Failure> {
    if let Some(path) = opts.config.take() {
        let text = fs::read_to_string(&path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let file: Options = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("malformed config {}: {e}", path.display())))?;
        opts = merge(opts, file);
    }

    let potential_tag = opts
        .potential
        .ok_or_else(|| Failure::config("--potential is required"))?;
    let potential = angular_from_tag(&potential_tag)?;
    let kernel_tag = opts.kernel.unwrap_or_else(|| "delta".to_string());
    SpatialKernel::from_tag(&kernel_tag)?;

    let beta = opts.beta.unwrap_or(1.0);
    if !(beta > 0.0) {
        return Err(Failure::config(format!("beta must be positive, got {beta}")));
    }
    let lmax = opts.lmax.unwrap_or(20);
    let nodes = opts.nodes.unwrap_or(128);
    if lmax > nodes {
        return Err(Failure::config(format!(
            "lmax = {lmax} must not exceed nodes = {nodes}"
        )));
    }
    let alpha = opts.alpha.unwrap_or(0.5);
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Failure::config(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let tol = opts.tol.unwrap_or(1e-10);
    if !(tol > 0.0) {
        return Err(Failure::config(format!("tol must be positive, got {tol}")));
    }
    let format = opts.format.unwrap_or_else(|| "csv".to_string());
    if format != "csv" && format != "json" {
        return Err(Failure::config(format!(
            "format must be csv or json, got {format}"
        )));
    }
    let threads = opts.threads.unwrap_or(1);
    if threads == 0 {
        return Err(Failure::config("threads must be positive"));
    }

    for (name, v) in [
        ("rho", opts.rho),
        ("rho-min", opts.rho_min),
        ("rho-max", opts.rho_max),
    ] {
        if let Some(v) = v {
            if !(v > 0.0) {
                return Err(Failure::config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (opts.rho_min, opts.rho_max) {
        if hi <= lo {
            return Err(Failure::config(format!(
                "rho-max = {hi} must exceed rho-min = {lo}"
            )));
        }
    }
    if let Some(steps) = opts.rho_steps {
        if steps < 2 {
            return Err(Failure::config("rho-steps must be at least 2"));
        }
    }

    let resolved = Resolved {
        command: command.to_string(),
        potential: potential_tag,
        kernel: kernel_tag,
        beta,
        rho: opts.rho,
        rho_min: opts.rho_min,
        rho_max: opts.rho_max,
        rho_steps: opts.rho_steps,
        lmax,
        nodes,
        alpha,
        tol,
        format,
        threads,
    };
    Ok((resolved, potential))
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn config_json(resolved: &Resolved) -> String {
    serde_json::to_string(resolved).expect("config serializes")
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<(), Failure> {
    for v in values {
        if !v.is_finite() {
            return Err(Failure::numeric("non-finite value in results"));
        }
    }
    Ok(())
}

fn run(command: &str, opts: Options) -> Result<(), Failure> {
    let output = opts.output.clone();
    let (resolved, potential) = resolve(command, opts)?;
    // ignored when a pool already exists (e.g. repeated calls in tests)
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved.threads)
        .build_global();
    match command {
        "spectrum" => run_spectrum(&resolved, &potential, &output),
        "certify" => run_certify(&resolved, &potential, &output),
        "solve" => run_solve(&resolved, &potential, &output),
        "scan" => run_scan(&resolved, &potential, &output),
        _ => unreachable!(),
    }
}

/// Closed-form lambda_l when the family admits one.
fn closed_form_column(
    resolved: &Resolved,
    potential: &AngularPotential,
) -> Result<Option<Vec<f64>>, Failure> {
    let tag = potential.family_tag();
    if tag == "onsager" {
        return Ok(Some(
            (0..=resolved.lmax).map(spectrum_onsager_closed_form).collect(),
        ));
    }
    let k = if tag == "maier-saupe" {
        Some(1)
    } else {
        tag.strip_prefix("sinpow:").and_then(|s| s.parse::<u32>().ok())
    };
    match k {
        Some(k) => {
            let exact = spectrum_sinpow_exact(k, resolved.lmax)?;
            Ok(Some(exact.lambdas().to_vec()))
        }
        None => Ok(None),
    }
}

fn run_spectrum(
    resolved: &Resolved,
    potential: &AngularPotential,
    output: &Option<PathBuf>,
) -> Result<(), Failure> {
    let spectrum = spectrum_quadrature(potential, resolved.lmax, resolved.nodes)?;
    check_finite(spectrum.lambdas().iter().copied())?;
    let closed = closed_form_column(resolved, potential)?;

    if resolved.format == "json" {
        #[derive(Serialize)]
        struct Row {
            ell: usize,
            lambda: f64,
            method: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            closed_form: Option<f64>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            config: &'a Resolved,
            rows: Vec<Row>,
        }
        let rows = spectrum
            .lambdas()
            .iter()
            .enumerate()
            .map(|(ell, &lambda)| Row {
                ell,
                lambda,
                method: "quadrature",
                closed_form: closed.as_ref().map(|c| c[ell]),
            })
            .collect();
        let text = serde_json::to_string_pretty(&Out {
            config: resolved,
            rows,
        })
        .expect("spectrum serializes");
        emit(output, &format!("{text}\n"))
    } else {
        let mut text = format!("# config: {}\n", config_json(resolved));
        text.push_str("ell,lambda,method,closed_form\n");
        for (ell, &lambda) in spectrum.lambdas().iter().enumerate() {
            let cf = match &closed {
                Some(c) => format!("{:.16e}", c[ell]),
                None => String::new(),
            };
            text.push_str(&format!("{ell},{lambda:.16e},quadrature,{cf}\n"));
        }
        emit(output, &text)
    }
}

fn run_certify(
    resolved: &Resolved,
    potential: &AngularPotential,
    output: &Option<PathBuf>,
) -> Result<(), Failure> {
    let kernel = SpatialKernel::from_tag(&resolved.kernel)?;
    let spectrum = spectrum_quadrature(potential, resolved.lmax, resolved.nodes)?;
    let xi_grid = default_xi_grid(&kernel);
    let certificate =
        certify_with_spectrum(potential, &spectrum, &kernel, resolved.beta, &xi_grid)?;
    check_finite([
        certificate.phi_hat_min,
        certificate.cubic_coefficient,
        certificate.rho_c_lower,
    ])?;

    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a Resolved,
        certificate: &'a onsager_core::StabilityCertificate,
    }
    let text = serde_json::to_string_pretty(&Out {
        config: resolved,
        certificate: &certificate,
    })
    .expect("certificate serializes");
    emit(output, &format!("{text}\n"))
}

fn run_solve(
    resolved: &Resolved,
    potential: &AngularPotential,
    output: &Option<PathBuf>,
) -> Result<(), Failure> {
    let rho = resolved
        .rho
        .ok_or_else(|| Failure::config("solve requires --rho"))?;
    let spectrum = spectrum_quadrature(potential, resolved.lmax, resolved.nodes)?;
    let rule = Arc::new(gauss_legendre(resolved.nodes)?);
    let config = SolverConfig {
        alpha: resolved.alpha,
        tol: resolved.tol,
        ..SolverConfig::default()
    };
    let point = best_critical_point(&rule, &spectrum, rho, resolved.beta, &config, &[])?;
    check_finite([point.free_energy.total, point.order_parameter, point.residual])?;

    if resolved.format == "json" {
        #[derive(Serialize)]
        struct Out<'a> {
            config: &'a Resolved,
            free_energy: onsager_core::FreeEnergyBreakdown,
            order_parameter: f64,
            residual: f64,
            iterations: usize,
            converged: bool,
        }
        let text = serde_json::to_string_pretty(&Out {
            config: resolved,
            free_energy: point.free_energy,
            order_parameter: point.order_parameter,
            residual: point.residual,
            iterations: point.iterations,
            converged: point.converged,
        })
        .expect("solution serializes");
        emit(output, &format!("{text}\n"))
    } else {
        let mut text = format!("# config: {}\n", config_json(resolved));
        text.push_str(&format!(
            "# free_energy: {:.16e} order_parameter: {:.16e} residual: {:.16e} converged: {}\n",
            point.free_energy.total, point.order_parameter, point.residual, point.converged
        ));
        text.push_str(&point.profile.to_csv());
        emit(output, &text)
    }
}

fn run_scan(
    resolved: &Resolved,
    potential: &AngularPotential,
    output: &Option<PathBuf>,
) -> Result<(), Failure> {
    let rho_min = resolved
        .rho_min
        .ok_or_else(|| Failure::config("scan requires --rho-min"))?;
    let rho_max = resolved
        .rho_max
        .ok_or_else(|| Failure::config("scan requires --rho-max"))?;
    let steps = resolved.rho_steps.unwrap_or(50);
    let spectrum = spectrum_quadrature(potential, resolved.lmax, resolved.nodes)?;
    let rule = Arc::new(gauss_legendre(resolved.nodes)?);
    let mut config = ScanConfig::new(rho_min, rho_max, steps, resolved.beta);
    config.solver.alpha = resolved.alpha;
    config.solver.tol = resolved.tol;
    let result = scan(&rule, &spectrum, &config)?;
    check_finite(result.rows.iter().map(|r| r.free_energy_best))?;

    match result.rho_c_bracket {
        Some((lo, hi)) => println!("rho_c_bracket: [{lo:.16e}, {hi:.16e}]"),
        None => println!("rho_c_bracket: none"),
    }
    match result.rho_star {
        Some(v) => println!("rho_star: {v:.16e}"),
        None => println!("rho_star: none"),
    }

    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a Resolved,
        scan: &'a onsager_core::BifurcationScan,
    }
    let summary = serde_json::to_string_pretty(&Out {
        config: resolved,
        scan: &result,
    })
    .expect("scan serializes");

    if resolved.format == "json" {
        emit(output, &format!("{summary}\n"))
    } else {
        let text = format!("# config: {}\n{}", config_json(resolved), result.to_csv());
        emit(output, &text)?;
        // JSON sidecar with the summary next to the CSV artifact
        if let Some(path) = output {
            let sidecar = path.with_extension("summary.json");
            fs::write(&sidecar, format!("{summary}\n")).map_err(|e| {
                Failure::config(format!("cannot write {}: {e}", sidecar.display()))
            })?;
        }
        Ok(())
    }
}
