//! Separable interaction potentials phi(x, u) = phi(x) g(u): angular
//! families on [-1, 1] and spatial kernels with closed-form radial
//! Fourier transforms.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectrum::LegendreSpectrum;

/// Parity of the angular factor g on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone)]
enum AngularKind {
    /// g(u) = sqrt(1 - u^2)
    Onsager,
    /// g(u) = 1 - u^2
    MaierSaupe,
    /// g(u) = (1 - u^2)^k
    SinPow(u32),
    /// cubic-spline interpolant of tabulated samples, symmetrized to the
    /// declared parity
    Tabulated(Arc<CubicSpline>),
}

/// Angular factor g(u) with parity metadata.
#[derive(Debug, Clone)]
pub struct AngularPotential {
    kind: AngularKind,
    parity: Parity,
    lipschitz_hint: Option<f64>,
}

impl AngularPotential {
    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn family_tag(&self) -> String {
        match &self.kind {
            AngularKind::Onsager => "onsager".into(),
            AngularKind::MaierSaupe => "maier-saupe".into(),
            AngularKind::SinPow(k) => format!("sinpow:{k}"),
            AngularKind::Tabulated(_) => "tabulated".into(),
        }
    }

    /// Evaluate g(u). Arguments are clamped to [-1, 1] to absorb rounding
    /// from the azimuthal kernel average.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        match &self.kind {
            AngularKind::Onsager => ((1.0 - u) * (1.0 + u)).sqrt(),
            AngularKind::MaierSaupe => 1.0 - u * u,
            AngularKind::SinPow(k) => (1.0 - u * u).powi(*k as i32),
            AngularKind::Tabulated(spline) => match self.parity {
                Parity::Even => 0.5 * (spline.eval(u) + spline.eval(-u)),
                Parity::Odd => 0.5 * (spline.eval(u) - spline.eval(-u)),
                Parity::None => spline.eval(u),
            },
        }
    }
}

/// Built-in angular families.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularFamily {
    Onsager,
    MaierSaupe,
    SinPow(u32),
}

/// Construct a built-in angular potential. All built-ins are even.
pub fn make_angular(family: AngularFamily) -> Result<AngularPotential> {
    let (kind, hint) = match family {
        AngularFamily::Onsager => (AngularKind::Onsager, None),
        AngularFamily::MaierSaupe => (AngularKind::MaierSaupe, Some(2.0)),
        AngularFamily::SinPow(k) => {
            if k < 1 {
                return Err(Error::Config("sinpow exponent k must be >= 1".into()));
            }
            (AngularKind::SinPow(k), Some(2.0 * k as f64))
        }
    };
    Ok(AngularPotential {
        kind,
        parity: Parity::Even,
        lipschitz_hint: hint,
    })
}

/// Parse an angular family tag: `onsager`, `maier-saupe`, `sinpow:K` or
/// `table:PATH`.
pub fn angular_from_tag(tag: &str) -> Result<AngularPotential> {
    match tag {
        "onsager" => make_angular(AngularFamily::Onsager),
        "maier-saupe" => make_angular(AngularFamily::MaierSaupe),
        _ => {
            if let Some(k) = tag.strip_prefix("sinpow:") {
                let k: u32 = k
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid sinpow exponent in '{tag}'")))?;
                make_angular(AngularFamily::SinPow(k))
            } else if let Some(path) = tag.strip_prefix("table:") {
                load_tabulated_file(Path::new(path), Parity::None)
            } else {
                Err(Error::Config(format!("unknown potential tag '{tag}'")))
            }
        }
    }
}

/// Build a tabulated angular potential from (u, value) samples.
///
/// Requires at least 8 samples with strictly increasing u spanning both
/// endpoints of [-1, 1]. The declared parity is checked against the
/// samples within 1e-6 and then enforced exactly by symmetrizing the
/// interpolant.
pub fn load_tabulated(samples: &[(f64, f64)], parity: Parity) -> Result<AngularPotential> {
    if samples.len() < 8 {
        return Err(Error::Format(format!(
            "at least 8 samples required, got {}",
            samples.len()
        )));
    }
    for pair in samples.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::Format(format!(
                "sample abscissae must be strictly increasing ({} then {})",
                pair[0].0, pair[1].0
            )));
        }
    }
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if first != -1.0 || last != 1.0 {
        return Err(Error::Format(format!(
            "samples must span [-1, 1] endpoints inclusive, got [{first}, {last}]"
        )));
    }
    if samples.iter().any(|&(_, v)| !v.is_finite()) {
        return Err(Error::Format("non-finite sample value".into()));
    }

    let spline = CubicSpline::new(samples);
    if parity != Parity::None {
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        for &(u, v) in samples {
            let mirrored = spline.eval(-u);
            if (v - sign * mirrored).abs() > 1e-6 {
                return Err(Error::Validation(format!(
                    "declared parity violated at u = {u}: g(u) = {v}, g(-u) = {mirrored}"
                )));
            }
        }
    }

    Ok(AngularPotential {
        kind: AngularKind::Tabulated(Arc::new(spline)),
        parity,
        lipschitz_hint: None,
    })
}

/// Load a tabulated potential from a two-column whitespace-separated text
/// file ("u value" per line, '#' comments).
pub fn load_tabulated_file(path: &Path, parity: Parity) -> Result<AngularPotential> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read '{}': {e}", path.display())))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (u, v) = match (cols.next(), cols.next(), cols.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => {
                return Err(Error::Format(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("{}:{}: invalid number '{s}'", path.display(), lineno + 1)))
        };
        samples.push((parse(u)?, parse(v)?));
    }
    load_tabulated(&samples, parity)
}

/// Natural cubic spline on an increasing grid.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// second derivatives at the knots
    y2: Vec<f64>,
}

impl CubicSpline {
    fn new(samples: &[(f64, f64)]) -> Self {
        let n = samples.len();
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let mut y2 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            tmp[i] = (6.0 * d / (xs[i + 1] - xs[i - 1]) - sig * tmp[i - 1]) / p;
        }
        for i in (1..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + tmp[i];
        }
        CubicSpline { xs, ys, y2 }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let hi = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.max(1).min(n - 1),
            Err(i) => i.clamp(1, n - 1),
        };
        let lo = hi - 1;
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.y2[lo] + (b * b * b - b) * self.y2[hi]) * h * h / 6.0
    }
}

/// Spatial kernel families with closed-form radial transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// Dirac mass at the origin; transform identically 1.
    Delta,
    /// Normalized isotropic Gaussian of width sigma.
    Gaussian { sigma: f64 },
    /// Normalized indicator of the ball of radius r (d = 3 only).
    Ball { radius: f64 },
}

/// Spatial factor phi(x) with its analytic radial Fourier transform;
/// normalized so that the transform is 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialKernel {
    family: KernelFamily,
    dimension: u32,
}

impl SpatialKernel {
    pub fn new(family: KernelFamily, dimension: u32) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("spatial dimension must be >= 1".into()));
        }
        match family {
            KernelFamily::Gaussian { sigma } if sigma <= 0.0 => {
                Err(Error::Config("gaussian width must be positive".into()))
            }
            KernelFamily::Ball { radius } if radius <= 0.0 => {
                Err(Error::Config("ball radius must be positive".into()))
            }
            KernelFamily::Ball { .. } if dimension != 3 => Err(Error::Config(
                "ball kernel transform is implemented for d = 3 only".into(),
            )),
            _ => Ok(SpatialKernel { family, dimension }),
        }
    }

    pub fn delta() -> Self {
        SpatialKernel {
            family: KernelFamily::Delta,
            dimension: 3,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn family_tag(&self) -> String {
        match self.family {
            KernelFamily::Delta => "delta".into(),
            KernelFamily::Gaussian { sigma } => format!("gaussian:{sigma}"),
            KernelFamily::Ball { radius } => format!("ball:{radius}"),
        }
    }

    /// Characteristic length used to size the default xi grid.
    pub fn length_scale(&self) -> f64 {
        match self.family {
            KernelFamily::Delta => 1.0,
            KernelFamily::Gaussian { sigma } => sigma,
            KernelFamily::Ball { radius } => radius,
        }
    }

    /// Parse a kernel tag: `delta`, `gaussian:SIGMA` or `ball:R`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        if tag == "delta" {
            return Ok(SpatialKernel::delta());
        }
        if let Some(s) = tag.strip_prefix("gaussian:") {
            let sigma: f64 = s
                .parse()
                .map_err(|_| Error::Config(format!("invalid gaussian width in '{tag}'")))?;
            return SpatialKernel::new(KernelFamily::Gaussian { sigma }, 3);
        }
        if let Some(s) = tag.strip_prefix("ball:") {
            let radius: f64 = s
                .parse()
                .map_err(|_| Error::Config(format!("invalid ball radius in '{tag}'")))?;
            return SpatialKernel::new(KernelFamily::Ball { radius }, 3);
        }
        Err(Error::Config(format!("unknown kernel tag '{tag}'")))
    }
}

/// Radial Fourier transform phi_hat(|xi|) of the spatial factor.
pub fn phi_hat(kernel: &SpatialKernel, xi_radius: f64) -> f64 {
    debug_assert!(xi_radius >= 0.0);
    match kernel.family {
        KernelFamily::Delta => 1.0,
        KernelFamily::Gaussian { sigma } => (-0.5 * sigma * sigma * xi_radius * xi_radius).exp(),
        KernelFamily::Ball { radius } => {
            let x = xi_radius * radius;
            if x < 1e-2 {
                // series for the removable singularity at x = 0; the
                // closed form loses ~x^-3 digits to cancellation there
                let x2 = x * x;
                1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15_120.0
            } else {
                3.0 * (x.sin() - x * x.cos()) / (x * x * x)
            }
        }
    }
}

/// Joint transform Phi_hat_l(xi) = phi_hat(xi) * lambda_l; separability
/// factorizes the double integral into a bitwise product.
pub fn big_phi_hat(
    kernel: &SpatialKernel,
    spectrum: &LegendreSpectrum,
    ell: usize,
    xi_radius: f64,
) -> Result<f64> {
    let lambda = spectrum.lambda(ell).ok_or_else(|| {
        Error::Index(format!(
            "l = {ell} exceeds spectrum l_max = {}",
            spectrum.ell_max()
        ))
    })?;
    Ok(phi_hat(kernel, xi_radius) * lambda)
}
