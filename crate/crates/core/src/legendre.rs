//! Legendre polynomials, associated Legendre functions, Gauss-Legendre
//! quadrature and the Legendre triple-product integral.
//!
//! The Legendre polynomials P_l are orthogonal on [-1, 1]:
//! int P_l P_k du = 2/(2l+1) delta_{lk}, with P_l(1) = 1.

use crate::error::{Error, Result};

/// Gauss-Legendre quadrature rule on (-1, 1).
///
/// Nodes are strictly increasing and symmetric about 0; weights are
/// positive, symmetric and sum to 2. The rule integrates polynomials of
/// degree <= 2n-1 exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Quadrature of `f` over [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn check_argument(u: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("|u| <= 1 required, got u = {u}")));
    }
    Ok(())
}

/// Evaluate P_l(u) by the upward Bonnet recursion
/// (n+2) P_{n+2} = (2n+3) u P_{n+1} - (n+1) P_n.
pub fn legendre_eval(ell: usize, u: f64) -> Result<f64> {
    check_argument(u)?;
    Ok(legendre_eval_unchecked(ell, u))
}

fn legendre_eval_unchecked(ell: usize, u: f64) -> f64 {
    match ell {
        0 => 1.0,
        1 => u,
        _ => {
            let mut prev = 1.0;
            let mut cur = u;
            for n in 0..ell - 1 {
                let nf = n as f64;
                let next = ((2.0 * nf + 3.0) * u * cur - (nf + 1.0) * prev) / (nf + 2.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Evaluate [P_0(u), ..., P_{ell_max}(u)] in a single upward pass.
///
/// Entry l is bit-for-bit identical to `legendre_eval(l, u)`.
pub fn legendre_eval_all(ell_max: usize, u: f64) -> Result<Vec<f64>> {
    check_argument(u)?;
    let mut out = Vec::with_capacity(ell_max + 1);
    out.push(1.0);
    if ell_max == 0 {
        return Ok(out);
    }
    out.push(u);
    let mut prev = 1.0;
    let mut cur = u;
    for n in 0..ell_max.saturating_sub(1) {
        let nf = n as f64;
        let next = ((2.0 * nf + 3.0) * u * cur - (nf + 1.0) * prev) / (nf + 2.0);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    Ok(out)
}

/// Derivative P_l'(u) for |u| < 1.
fn legendre_derivative(ell: usize, u: f64) -> f64 {
    if ell == 0 {
        return 0.0;
    }
    let p = legendre_eval_unchecked(ell, u);
    let pm1 = legendre_eval_unchecked(ell - 1, u);
    (ell as f64) * (u * p - pm1) / (u * u - 1.0)
}

/// Associated Legendre function P_l^m(u), Condon-Shortley phase included:
/// P_l^m(u) = (-1)^m (1-u^2)^{m/2} d^m/du^m P_l(u), and for negative order
/// P_l^{-m}(u) = (-1)^m (l-m)!/(l+m)! P_l^m(u).
///
/// Computed by the stable order-upward recurrences rather than symbolic
/// differentiation.
pub fn assoc_legendre_eval(ell: usize, m: i64, u: f64) -> Result<f64> {
    let m_abs = m.unsigned_abs() as usize;
    if m_abs > ell {
        return Err(Error::Domain(format!("|m| <= l required, got l = {ell}, m = {m}")));
    }
    if m_abs == 0 {
        return legendre_eval(ell, u);
    }
    if u.abs() >= 1.0 {
        if u.abs() > 1.0 {
            return Err(Error::Domain(format!("|u| <= 1 required, got u = {u}")));
        }
        return Err(Error::Domain(format!(
            "|u| < 1 required for m != 0, got u = {u}"
        )));
    }

    // P_m^m = (-1)^m (2m-1)!! (1-u^2)^{m/2}, then raise the degree:
    // P_{m+1}^m = u (2m+1) P_m^m,
    // (l-m) P_l^m = u (2l-1) P_{l-1}^m - (l+m-1) P_{l-2}^m.
    let sin_theta = ((1.0 - u) * (1.0 + u)).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m_abs {
        pmm *= -((2 * k - 1) as f64) * sin_theta;
    }
    let value = if ell == m_abs {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = u * (2 * m_abs + 1) as f64 * pmm;
        for l in m_abs + 2..=ell {
            let lf = l as f64;
            let mf = m_abs as f64;
            let next = (u * (2.0 * lf - 1.0) * cur - (lf + mf - 1.0) * prev) / (lf - mf);
            prev = cur;
            cur = next;
        }
        cur
    };

    if m >= 0 {
        Ok(value)
    } else {
        // ratio (l-m)!/(l+m)! for the positive order m_abs
        let mut ratio = 1.0;
        for k in ell - m_abs + 1..=ell + m_abs {
            ratio /= k as f64;
        }
        let sign = if m_abs % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * ratio * value)
    }
}

/// Build the n-point Gauss-Legendre rule by Newton iteration on P_n with
/// asymptotic initial guesses.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Domain("quadrature order must be >= 1".into()));
    }
    if n == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        });
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        // i-th root counted from u = 1 downward
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let dx = legendre_eval_unchecked(n, x) / legendre_derivative(n, x);
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let dp = legendre_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let dp = legendre_derivative(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// ln k!
fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Lanczos approximation of ln Gamma(x), x > 0.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// int_{-1}^{1} P_l(u)^3 du.
///
/// For even l this is the closed form 2 (2s)!^3 / (6s+1)! * (3s)!^2 / s!^6
/// with s = l/2, strictly positive. For odd l the integral vanishes and 0
/// is returned (the magnetic-potential path consumes this value directly).
/// Factorials are combined in log space to avoid overflow for large l.
pub fn legendre_triple_integral(ell: usize) -> f64 {
    if ell % 2 == 1 {
        return 0.0;
    }
    if ell == 0 {
        return 2.0;
    }
    let s = (ell / 2) as u64;
    let log_value = (3.0 * ln_factorial(2 * s) - ln_factorial(6 * s + 1))
        + (2.0 * ln_factorial(3 * s) - 6.0 * ln_factorial(s));
    2.0 * log_value.exp()
}
