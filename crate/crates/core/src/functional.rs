//! Axially symmetric orientation profiles and the homogeneous free-energy
//! functional: entropy, interaction energy (direct quadrature and
//! spectral forms) and the nematic order parameter.
//!
//! Profiles live on Gauss-Legendre nodes in u = cos theta and are
//! normalized so that the azimuthally symmetric density integrates to 1
//! over the sphere: 2 pi sum_i w_i f(u_i) = 1.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendre::{legendre_eval_all, QuadratureRule};
use crate::potentials::AngularPotential;
use crate::spectrum::LegendreSpectrum;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Axially symmetric orientation density sampled at quadrature nodes.
#[derive(Debug, Clone)]
pub struct OrientationProfile {
    rule: Arc<QuadratureRule>,
    values: Vec<f64>,
    coefficients: Option<Vec<f64>>,
}

impl OrientationProfile {
    /// Build a normalized profile from non-negative node values; the
    /// values are rescaled so the spherical integral is exactly 1.
    pub fn new(rule: Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.order() {
            return Err(Error::Domain(format!(
                "expected {} node values, got {}",
                rule.order(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite node value".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("negative node value".into()));
        }
        let mass: f64 = TWO_PI
            * values
                .iter()
                .zip(rule.weights())
                .map(|(&f, &w)| w * f)
                .sum::<f64>();
        if mass <= 0.0 {
            return Err(Error::Domain("profile has zero mass".into()));
        }
        let values = values.iter().map(|&v| v / mass).collect();
        Ok(OrientationProfile {
            rule,
            values,
            coefficients: None,
        })
    }

    /// The uniform (isotropic) profile f_0 = 1/(4 pi).
    pub fn uniform(rule: Arc<QuadratureRule>) -> Self {
        let n = rule.order();
        OrientationProfile {
            rule,
            values: vec![1.0 / FOUR_PI; n],
            coefficients: None,
        }
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        self.coefficients.as_deref()
    }

    /// Compute and store f_hat_l = 2 pi sum_i w_i f_i P_l(u_i) for
    /// l = 0..ell_max.
    pub fn with_coefficients(mut self, ell_max: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; ell_max + 1];
        for ((&u, &w), &f) in self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
        {
            let p = legendre_eval_all(ell_max, u)?;
            for (c, pl) in coeffs.iter_mut().zip(&p) {
                *c += TWO_PI * w * f * pl;
            }
        }
        self.coefficients = Some(coeffs);
        Ok(self)
    }

    /// Spherical integral of the profile (1 for a normalized profile).
    pub fn mass(&self) -> f64 {
        TWO_PI
            * self
                .values
                .iter()
                .zip(self.rule.weights())
                .map(|(&f, &w)| w * f)
                .sum::<f64>()
    }

    /// Reconstruct f(u) from stored coefficients:
    /// f(u) = sum_l (2l+1)/(4 pi) f_hat_l P_l(u).
    pub fn value_from_coefficients(&self, u: f64) -> Result<f64> {
        let coeffs = self
            .coefficients
            .as_ref()
            .ok_or_else(|| Error::State("profile coefficients not computed".into()))?;
        let p = legendre_eval_all(coeffs.len() - 1, u)?;
        Ok(coeffs
            .iter()
            .zip(&p)
            .enumerate()
            .map(|(l, (c, pl))| (2.0 * l as f64 + 1.0) / FOUR_PI * c * pl)
            .sum())
    }

    /// Export as CSV (columns u, weight, f) with the quadrature order in
    /// the header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# gauss-legendre order {}\nu,weight,f\n", self.rule.order());
        for ((&u, &w), &f) in self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
        {
            out.push_str(&format!("{u:.16e},{w:.16e},{f:.16e}\n"));
        }
        out
    }
}

/// Nematic order parameter S = int P_2(cos theta) f dOmega, the l = 2
/// Legendre coefficient of the profile.
pub fn order_parameter(f: &OrientationProfile) -> f64 {
    f.rule()
        .nodes()
        .iter()
        .zip(f.rule().weights())
        .zip(f.node_values())
        .map(|((&u, &w), &fv)| TWO_PI * w * fv * (3.0 * u * u - 1.0) / 2.0)
        .sum()
}

/// Entropy term (rho/beta) int f log f dOmega with 0 log 0 = 0.
pub fn entropy(f: &OrientationProfile, rho: f64, beta: f64) -> Result<f64> {
    if rho <= 0.0 || beta <= 0.0 {
        return Err(Error::Domain(format!(
            "rho and beta must be positive, got rho = {rho}, beta = {beta}"
        )));
    }
    let mut sum = 0.0;
    for (&fv, &w) in f.node_values().iter().zip(f.rule().weights()) {
        if fv < 0.0 {
            return Err(Error::Domain("negative node value".into()));
        }
        if fv > 0.0 {
            sum += w * fv * fv.ln();
        }
    }
    Ok(rho / beta * TWO_PI * sum)
}

/// Azimuthally averaged angular kernel at node pairs:
/// k(u, u') = (1/2 pi) int_0^{2 pi} g(u u' + sqrt(1-u^2) sqrt(1-u'^2) cos psi) dpsi,
/// evaluated with an m-point periodic trapezoid rule.
#[derive(Debug, Clone)]
pub struct AzimuthalKernel {
    matrix: Vec<f64>,
    n: usize,
    azimuthal_points: usize,
}

impl AzimuthalKernel {
    pub fn new(rule: &QuadratureRule, g: &AngularPotential, azimuthal_points: usize) -> Self {
        let n = rule.order();
        let nodes = rule.nodes();
        let sines: Vec<f64> = nodes.iter().map(|&u| (1.0 - u * u).sqrt()).collect();
        let m = azimuthal_points;
        // cos is symmetric about psi = pi, so fold the trapezoid sum
        let half = m / 2;
        let cosines: Vec<f64> = (0..=half)
            .map(|j| (TWO_PI * j as f64 / m as f64).cos())
            .collect();
        let mut matrix = vec![0.0; n * n];
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                for j in i..n {
                    let a = nodes[i] * nodes[j];
                    let b = sines[i] * sines[j];
                    let mut sum = 0.0;
                    for (jj, &c) in cosines.iter().enumerate() {
                        let weight = if jj == 0 || (m % 2 == 0 && jj == half) {
                            1.0
                        } else {
                            2.0
                        };
                        sum += weight * g.eval(a + b * c);
                    }
                    row[j] = sum / m as f64;
                }
                row
            })
            .collect();
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                if j >= i {
                    matrix[i * n + j] = v;
                    matrix[j * n + i] = v;
                }
            }
        }
        AzimuthalKernel {
            matrix,
            n,
            azimuthal_points,
        }
    }

    pub fn azimuthal_points(&self) -> usize {
        self.azimuthal_points
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }
}

/// Interaction energy (rho^2/2) int int f f g(Omega . Omega') by direct
/// double quadrature with the default 64-point azimuthal rule.
pub fn energy_direct(f: &OrientationProfile, g: &AngularPotential, rho: f64) -> Result<f64> {
    let kernel = AzimuthalKernel::new(f.rule(), g, 64);
    energy_direct_with_kernel(f, &kernel, rho)
}

/// Same as [`energy_direct`] with a precomputed (and reusable) kernel.
pub fn energy_direct_with_kernel(
    f: &OrientationProfile,
    kernel: &AzimuthalKernel,
    rho: f64,
) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    if kernel.n != f.rule().order() {
        return Err(Error::State(
            "kernel was built for a different quadrature rule".into(),
        ));
    }
    let w = f.rule().weights();
    let vals = f.node_values();
    let n = kernel.n;
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += w[j] * vals[j] * kernel.get(i, j);
        }
        total += w[i] * vals[i] * row;
    }
    Ok(rho * rho / 2.0 * TWO_PI * TWO_PI * total)
}

/// Interaction energy in the Funk-Hecke diagonal form
/// (rho^2/2) sum_l (2l+1)/2 lambda_l f_hat_l^2.
pub fn energy_spectral(
    f: &OrientationProfile,
    spectrum: &LegendreSpectrum,
    rho: f64,
) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let coeffs = f
        .coefficients()
        .ok_or_else(|| Error::State("profile coefficients not computed".into()))?;
    if coeffs.len() < spectrum.ell_max() + 1 {
        return Err(Error::State(format!(
            "profile coefficients reach l = {}, spectrum needs l = {}",
            coeffs.len() - 1,
            spectrum.ell_max()
        )));
    }
    let sum: f64 = spectrum
        .lambdas()
        .iter()
        .enumerate()
        .map(|(l, &lam)| (2.0 * l as f64 + 1.0) / 2.0 * lam * coeffs[l] * coeffs[l])
        .sum();
    Ok(rho * rho / 2.0 * sum)
}

/// Which representation of the interaction drives the energy term.
pub enum EnergyMode<'a> {
    Direct(&'a AngularPotential),
    Spectral(&'a LegendreSpectrum),
}

/// Free-energy value split into its entropy and energy contributions.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FreeEnergyBreakdown {
    pub entropy_term: f64,
    pub energy_term: f64,
    pub total: f64,
    pub rho: f64,
    pub beta: f64,
}

/// Evaluate the homogeneous free energy of a profile.
pub fn free_energy(
    f: &OrientationProfile,
    mode: EnergyMode<'_>,
    rho: f64,
    beta: f64,
) -> Result<FreeEnergyBreakdown> {
    let entropy_term = entropy(f, rho, beta)?;
    let energy_term = match mode {
        EnergyMode::Direct(g) => energy_direct(f, g, rho)?,
        EnergyMode::Spectral(s) => energy_spectral(f, s, rho)?,
    };
    Ok(FreeEnergyBreakdown {
        entropy_term,
        energy_term,
        total: entropy_term + energy_term,
        rho,
        beta,
    })
}
