//! Self-consistency solver for critical points of the homogeneous
//! free energy, and density scans that locate the first-order transition.
//!
//! Critical points satisfy the fixed-point equation
//! f = exp(-beta rho K f) / Z with (K f)(u) = sum_l (2l+1)/2 lambda_l
//! f_hat_l P_l(u); the solver iterates this map with damping.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{
    energy_spectral, entropy, order_parameter, FreeEnergyBreakdown, OrientationProfile,
};
use crate::legendre::{legendre_eval_all, QuadratureRule};
use crate::spectrum::LegendreSpectrum;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Tuning knobs for the damped fixed-point iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    /// damping factor in (0, 1]; 1 is the undamped map
    pub alpha: f64,
    /// sup-norm residual tolerance for convergence
    pub tol: f64,
    pub max_iter: usize,
    /// amplitude of the P_{l*} seed perturbations
    pub seed_amplitude: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
            seed_amplitude: 0.3,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// One application of the Euler-Lagrange map: f -> exp(-beta rho K f),
/// shifted by the max for overflow safety and renormalized.
pub fn el_map(
    f: &OrientationProfile,
    spectrum: &LegendreSpectrum,
    rho: f64,
    beta: f64,
) -> Result<OrientationProfile> {
    if rho <= 0.0 || beta <= 0.0 {
        return Err(Error::Domain(format!(
            "rho and beta must be positive, got rho = {rho}, beta = {beta}"
        )));
    }
    if f.node_values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite node value in profile".into()));
    }
    let rule = f.rule();
    let ell_max = spectrum.ell_max();
    let n = rule.order();

    // f_hat_l = 2 pi sum_i w_i f_i P_l(u_i)
    let mut coeffs = vec![0.0; ell_max + 1];
    let mut basis = Vec::with_capacity(n);
    for ((&u, &w), &fv) in rule.nodes().iter().zip(rule.weights()).zip(f.node_values()) {
        let p = legendre_eval_all(ell_max, u)?;
        for (c, pl) in coeffs.iter_mut().zip(&p) {
            *c += TWO_PI * w * fv * pl;
        }
        basis.push(p);
    }

    let mut exponent = Vec::with_capacity(n);
    for p in &basis {
        let kf: f64 = coeffs
            .iter()
            .zip(p)
            .enumerate()
            .map(|(l, (c, pl))| (2.0 * l as f64 + 1.0) / 2.0 * spectrum.lambdas()[l] * c * pl)
            .sum();
        exponent.push(-beta * rho * kf);
    }
    let shift = exponent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Domain("non-finite Euler-Lagrange exponent".into()));
    }
    let values: Vec<f64> = exponent.iter().map(|&e| (e - shift).exp()).collect();
    OrientationProfile::new(rule.clone(), values)
}

/// A converged (or flagged) critical point of the free energy.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub profile: OrientationProfile,
    pub free_energy: FreeEnergyBreakdown,
    pub order_parameter: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped fixed-point iteration from a given seed.
pub fn solve(
    seed: OrientationProfile,
    spectrum: &LegendreSpectrum,
    rho: f64,
    beta: f64,
    config: &SolverConfig,
) -> Result<CriticalPoint> {
    config.validate()?;
    let mut f = seed;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let mapped = el_map(&f, spectrum, rho, beta)?;
        residual = f
            .node_values()
            .iter()
            .zip(mapped.node_values())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        iterations += 1;
        if residual <= config.tol {
            f = mapped;
            converged = true;
            break;
        }
        let blended: Vec<f64> = f
            .node_values()
            .iter()
            .zip(mapped.node_values())
            .map(|(&a, &b)| (1.0 - config.alpha) * a + config.alpha * b)
            .collect();
        f = OrientationProfile::new(f.rule().clone(), blended)?;
    }
    let f = f.with_coefficients(spectrum.ell_max())?;
    let entropy_term = entropy(&f, rho, beta)?;
    let energy_term = energy_spectral(&f, spectrum, rho)?;
    let order = order_parameter(&f);
    Ok(CriticalPoint {
        profile: f,
        free_energy: FreeEnergyBreakdown {
            entropy_term,
            energy_term,
            total: entropy_term + energy_term,
            rho,
            beta,
        },
        order_parameter: order,
        residual,
        iterations,
        converged,
    })
}

/// Index of the most destabilizing Legendre mode (smallest lambda_l over
/// l >= 1).
pub fn destabilizing_mode(spectrum: &LegendreSpectrum) -> usize {
    let mut best = 1;
    for (l, &lam) in spectrum.lambdas().iter().enumerate().skip(1) {
        if lam < spectrum.lambdas()[best] {
            best = l;
        }
    }
    best
}

/// Standard seed set: uniform, +/- seed_amplitude * P_{l*} perturbations
/// (clipped at zero and renormalized), and deep ordered Boltzmann seeds
/// exp(+/- 5 P_{l*}). The gentle perturbations probe the local stability
/// of the uniform state; the deep seeds start inside the ordered basin,
/// which the gentle ones can miss between the transition density and the
/// spinodal.
pub fn seed_profiles(
    rule: &Arc<QuadratureRule>,
    spectrum: &LegendreSpectrum,
    amplitude: f64,
) -> Result<Vec<OrientationProfile>> {
    let ell_star = destabilizing_mode(spectrum);
    let p_star: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| legendre_eval_all(ell_star, u).unwrap()[ell_star])
        .collect();
    let mut seeds = vec![OrientationProfile::uniform(rule.clone())];
    for sign in [1.0, -1.0] {
        let values: Vec<f64> = p_star
            .iter()
            .map(|&p| ((1.0 + sign * amplitude * p) / FOUR_PI).max(0.0))
            .collect();
        seeds.push(OrientationProfile::new(rule.clone(), values)?);
    }
    for sign in [1.0, -1.0] {
        let values: Vec<f64> = p_star.iter().map(|&p| (sign * 5.0 * p).exp()).collect();
        seeds.push(OrientationProfile::new(rule.clone(), values)?);
    }
    Ok(seeds)
}

/// free-energy margin below which two candidates count as tied
const TIE_TOL: f64 = 1e-12;
/// order parameters below this magnitude count as the uniform branch
const UNIFORM_ORDER_TOL: f64 = 1e-8;

/// Run the solver from the standard seeds (plus optional extra seeds) and
/// return the converged critical point of lowest free energy. Ties within
/// 1e-12 resolve toward the uniform branch.
pub fn best_critical_point(
    rule: &Arc<QuadratureRule>,
    spectrum: &LegendreSpectrum,
    rho: f64,
    beta: f64,
    config: &SolverConfig,
    extra_seeds: &[OrientationProfile],
) -> Result<CriticalPoint> {
    let mut candidates = Vec::new();
    for seed in extra_seeds
        .iter()
        .cloned()
        .chain(seed_profiles(rule, spectrum, config.seed_amplitude)?)
    {
        let point = solve(seed, spectrum, rho, beta, config)?;
        if point.converged {
            candidates.push(point);
        }
    }
    if candidates.is_empty() {
        return Err(Error::State(format!(
            "no seed converged at rho = {rho}, beta = {beta}"
        )));
    }
    let mut best: Option<CriticalPoint> = None;
    for point in candidates {
        best = Some(match best {
            None => point,
            Some(current) => {
                let diff = point.free_energy.total - current.free_energy.total;
                if diff < -TIE_TOL {
                    point
                } else if diff.abs() <= TIE_TOL
                    && point.order_parameter.abs() < current.order_parameter.abs()
                {
                    // tie: prefer the branch closer to uniform
                    point
                } else {
                    current
                }
            }
        });
    }
    Ok(best.unwrap())
}

/// Eigenvalue of the second variation at the uniform profile along the
/// P_l direction: (4 pi^2 rho / beta) (2 + (beta rho / 2 pi) lambda_l).
/// l = 0 is excluded (mass perturbations are fixed by normalization).
pub fn second_variation_mode(
    spectrum: &LegendreSpectrum,
    ell: usize,
    rho: f64,
    beta: f64,
) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Domain(
            "l = 0 is not an admissible perturbation direction".into(),
        ));
    }
    if rho <= 0.0 || beta <= 0.0 {
        return Err(Error::Domain(format!(
            "rho and beta must be positive, got rho = {rho}, beta = {beta}"
        )));
    }
    let lambda = spectrum
        .lambda(ell)
        .ok_or_else(|| Error::Index(format!("l = {ell} beyond spectrum range")))?;
    let pi = std::f64::consts::PI;
    Ok(4.0 * pi * pi * rho / beta * (2.0 + beta * rho / (2.0 * pi) * lambda))
}

/// One density sample of a bifurcation scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub rho: f64,
    pub free_energy_uniform: f64,
    pub free_energy_best: f64,
    pub order_parameter: f64,
    pub branch: Branch,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "ordered")]
    Ordered,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Uniform => "uniform",
            Branch::Ordered => "ordered",
        })
    }
}

/// Scan configuration; echoed into exported artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub steps: usize,
    pub beta: f64,
    pub solver: SolverConfig,
    /// relative width at which the bisection for rho_c stops
    pub bisection_rel_tol: f64,
}

impl ScanConfig {
    pub fn new(rho_min: f64, rho_max: f64, steps: usize, beta: f64) -> Self {
        ScanConfig {
            rho_min,
            rho_max,
            steps,
            beta,
            solver: SolverConfig::default(),
            bisection_rel_tol: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho_min > 0.0) || !(self.rho_max > self.rho_min) {
            return Err(Error::Config(format!(
                "need 0 < rho_min < rho_max, got [{}, {}]",
                self.rho_min, self.rho_max
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config("scan needs at least 2 steps".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        self.solver.validate()
    }
}

/// Result of a density scan: per-density rows plus the located transition.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationScan {
    pub rows: Vec<ScanRow>,
    /// bracket [lo, hi] around the first-order transition density
    pub rho_c_bracket: Option<(f64, f64)>,
    /// linear-stability threshold 4 pi / (beta |lambda_{l*}|), if any mode
    /// is destabilizing
    pub rho_star: Option<f64>,
    /// order parameter on the ordered branch just above the transition
    pub order_parameter_jump: Option<f64>,
    pub config: ScanConfig,
    pub quadrature_order: usize,
    pub ell_max: usize,
}

fn uniform_free_energy(spectrum: &LegendreSpectrum, rho: f64, beta: f64) -> f64 {
    rho / beta * (1.0f64 / FOUR_PI).ln() + rho * rho / 4.0 * spectrum.lambdas()[0]
}

/// Ordered-branch solve seeded from a warm profile; returns the point if
/// it converged to a genuinely ordered state below the uniform energy.
fn ordered_from_warm(
    warm: &OrientationProfile,
    spectrum: &LegendreSpectrum,
    rho: f64,
    beta: f64,
    f_uniform: f64,
    config: &SolverConfig,
) -> Result<Option<CriticalPoint>> {
    let point = solve(warm.clone(), spectrum, rho, beta, config)?;
    let ordered = point.converged
        && point.order_parameter.abs() > UNIFORM_ORDER_TOL
        && point.free_energy.total < f_uniform - TIE_TOL;
    Ok(if ordered { Some(point) } else { None })
}

/// Sweep density upward, warm-starting from the previous ordered branch,
/// then walk the branch back down and bisect for the transition density.
pub fn scan(
    rule: &Arc<QuadratureRule>,
    spectrum: &LegendreSpectrum,
    config: &ScanConfig,
) -> Result<BifurcationScan> {
    config.validate()?;
    let beta = config.beta;
    let rhos: Vec<f64> = (0..config.steps)
        .map(|i| {
            config.rho_min
                + (config.rho_max - config.rho_min) * i as f64 / (config.steps - 1) as f64
        })
        .collect();

    let mut rows: Vec<ScanRow> = Vec::with_capacity(rhos.len());
    let mut warm: Option<OrientationProfile> = None;
    let mut ordered_profiles: Vec<Option<OrientationProfile>> = Vec::with_capacity(rhos.len());

    for &rho in &rhos {
        let f_uniform = uniform_free_energy(spectrum, rho, beta);
        let extra: Vec<OrientationProfile> = warm.iter().cloned().collect();
        let best = best_critical_point(rule, spectrum, rho, beta, &config.solver, &extra)?;
        let is_ordered = best.order_parameter.abs() > UNIFORM_ORDER_TOL
            && best.free_energy.total < f_uniform - TIE_TOL;
        if is_ordered {
            warm = Some(best.profile.clone());
        }
        ordered_profiles.push(if is_ordered {
            Some(best.profile.clone())
        } else {
            None
        });
        rows.push(ScanRow {
            rho,
            free_energy_uniform: f_uniform,
            free_energy_best: if is_ordered {
                best.free_energy.total
            } else {
                f_uniform
            },
            order_parameter: if is_ordered { best.order_parameter } else { 0.0 },
            branch: if is_ordered {
                Branch::Ordered
            } else {
                Branch::Uniform
            },
            converged: best.converged,
        });
    }

    // walk the ordered branch downward: cold seeds can miss its basin near
    // the transition, so revisit lower densities warm-started from above
    if let Some(first) = rows.iter().position(|r| r.branch == Branch::Ordered) {
        let mut walk = ordered_profiles[first].clone().unwrap();
        for i in (0..first).rev() {
            let rho = rhos[i];
            let f_uniform = rows[i].free_energy_uniform;
            match ordered_from_warm(&walk, spectrum, rho, beta, f_uniform, &config.solver)? {
                Some(point) => {
                    walk = point.profile.clone();
                    rows[i] = ScanRow {
                        rho,
                        free_energy_uniform: f_uniform,
                        free_energy_best: point.free_energy.total,
                        order_parameter: point.order_parameter,
                        branch: Branch::Ordered,
                        converged: point.converged,
                    };
                    ordered_profiles[i] = Some(point.profile);
                }
                None => break,
            }
        }
    }

    // bisect between the last uniform and first ordered densities
    let first_ordered = rows.iter().position(|r| r.branch == Branch::Ordered);
    let (rho_c_bracket, order_parameter_jump) = match first_ordered {
        None => (None, None),
        Some(0) => {
            // transition below the scanned range; report the edge sample
            let jump = rows[0].order_parameter;
            (Some((rhos[0], rhos[0])), Some(jump))
        }
        Some(k) => {
            let mut lo = rhos[k - 1];
            let mut hi = rhos[k];
            let mut warm = ordered_profiles[k].clone().unwrap();
            let mut jump = rows[k].order_parameter;
            while (hi - lo) > config.bisection_rel_tol * 0.5 * (hi + lo) {
                let mid = 0.5 * (lo + hi);
                let f_uniform = uniform_free_energy(spectrum, mid, beta);
                match ordered_from_warm(&warm, spectrum, mid, beta, f_uniform, &config.solver)? {
                    Some(point) => {
                        hi = mid;
                        jump = point.order_parameter;
                        warm = point.profile;
                    }
                    None => lo = mid,
                }
            }
            (Some((lo, hi)), Some(jump))
        }
    };

    let ell_star = destabilizing_mode(spectrum);
    let lambda_star = spectrum.lambdas()[ell_star];
    let rho_star = if lambda_star < 0.0 {
        Some(FOUR_PI / (beta * lambda_star.abs()))
    } else {
        None
    };

    Ok(BifurcationScan {
        rows,
        rho_c_bracket,
        rho_star,
        order_parameter_jump,
        config: config.clone(),
        quadrature_order: rule.order(),
        ell_max: spectrum.ell_max(),
    })
}

impl BifurcationScan {
    /// CSV rows with a fixed 17-significant-digit format; output is
    /// byte-for-byte reproducible for identical inputs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,F_uniform,F_best,order_param,branch,converged\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                r.rho,
                r.free_energy_uniform,
                r.free_energy_best,
                r.order_parameter,
                r.branch,
                r.converged
            ));
        }
        out
    }

    /// JSON summary (bracket, thresholds, configuration echo).
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("serialization failed: {e}")))
    }
}
