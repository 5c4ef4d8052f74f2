//! q-series special functions: q-Pochhammer symbols (finite and infinite,
//! real and complex argument), the q-Gamma function, and the q-digamma
//! function with its first two derivatives.
//!
//! Everything here is a plain series or product evaluation with relative-
//! tolerance truncation. The q-digamma family uses the series
//!
//! ```text
//! Psi_q(z)   = -log(1-q) + log(q)   * sum_{k>=0} q^{z+k} / (1 - q^{z+k})
//! Psi_q'(z)  =             log(q)^2 * sum_{k>=0} q^{z+k} / (1 - q^{z+k})^2
//! Psi_q''(z) =             log(q)^3 * sum_{k>=0} q^{z+k}(1 + q^{z+k}) / (1 - q^{z+k})^3
//! ```
//!
//! All functions are pure and safe to call from any number of threads.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Upper bound on `q`: the series truncation bounds assume `q` is not
/// arbitrarily close to 1, so that `max_terms = 10^6` always suffices.
pub const Q_MAX: f64 = 0.999;

/// The model parameter `q`, validated to lie in `(0, Q_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QParams {
    q: f64,
}

impl QParams {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("q must lie in (0,1), got {q}")));
        }
        if q > Q_MAX {
            return Err(Error::domain(format!("q must be <= {Q_MAX}, got {q}")));
        }
        Ok(QParams { q })
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn log_q(&self) -> f64 {
        self.q.ln()
    }

    /// `q^e`.
    #[inline]
    pub fn pow(&self, e: f64) -> f64 {
        self.q.powf(e)
    }

    /// `log_q(x) = ln(x) / ln(q)` for `x > 0`.
    #[inline]
    pub fn log_base_q(&self, x: f64) -> f64 {
        x.ln() / self.log_q()
    }
}

impl TryFrom<f64> for QParams {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        QParams::new(q)
    }
}

impl From<QParams> for f64 {
    fn from(p: QParams) -> f64 {
        p.q
    }
}

/// Truncation control for series and infinite products.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTolerance {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        SeriesTolerance {
            rel_tol: 1e-15,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesTolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::domain("rel_tol must be > 0 and max_terms >= 1"));
        }
        Ok(SeriesTolerance { rel_tol, max_terms })
    }
}

/// Finite q-Pochhammer `(z; q)_n = prod_{j=0}^{n-1} (1 - z q^j)`.
pub fn qpoch_finite(z: Complex64, q: QParams, n: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut qj = 1.0;
    for _ in 0..n {
        acc *= Complex64::new(1.0, 0.0) - z * qj;
        qj *= q.q();
    }
    acc
}

/// Infinite q-Pochhammer `(z; q)_inf`, truncated once `|z| q^k < rel_tol`.
pub fn qpoch_inf(z: Complex64, q: QParams, tol: &SeriesTolerance) -> Result<Complex64> {
    qpoch_inf_with(z, q, tol, false)
}

/// As [`qpoch_inf`], optionally applying the first-order tail factor
/// `exp(-z q^K / (1-q))` at the truncation point.
pub fn qpoch_inf_with(
    z: Complex64,
    q: QParams,
    tol: &SeriesTolerance,
    tail_correction: bool,
) -> Result<Complex64> {
    if z.norm() >= 10.0 {
        return Err(Error::domain(format!(
            "qpoch_inf requires |z| < 10 (overflow guard), got |z| = {}",
            z.norm()
        )));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut qk = 1.0;
    let zn = z.norm();
    for k in 0..tol.max_terms {
        acc *= Complex64::new(1.0, 0.0) - z * qk;
        qk *= q.q();
        if zn * qk < tol.rel_tol && qk < tol.rel_tol {
            if tail_correction {
                acc *= (-z * qk / (1.0 - q.q())).exp();
            }
            return Ok(acc);
        }
        let _ = k;
    }
    Err(Error::NonConvergence {
        max_terms: tol.max_terms,
    })
}

/// `log (z; q)_inf = sum_{k>=0} Log(1 - z q^k)` with the principal branch
/// taken per factor. Requires `|z| < 1`, which keeps every factor in the
/// right half plane so the per-factor branch is unambiguous.
pub fn log_qpoch_inf(z: Complex64, q: QParams, tol: &SeriesTolerance) -> Result<Complex64> {
    let zn = z.norm();
    if zn >= 1.0 {
        return Err(Error::domain(format!(
            "log_qpoch_inf requires |z| < 1, got |z| = {zn}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut qk = 1.0;
    for _ in 0..tol.max_terms {
        let term = (Complex64::new(1.0, 0.0) - z * qk).ln();
        acc += term;
        qk *= q.q();
        if zn * qk < tol.rel_tol * acc.norm().max(tol.rel_tol) && qk < tol.rel_tol {
            return Ok(acc);
        }
    }
    Err(Error::NonConvergence {
        max_terms: tol.max_terms,
    })
}

/// Real infinite Pochhammer `(x; q)_inf` for real `x < 1`.
fn qpoch_inf_real(x: f64, q: QParams, tol: &SeriesTolerance) -> Result<f64> {
    let mut acc = 1.0;
    let mut qk = 1.0;
    let xn = x.abs();
    for _ in 0..tol.max_terms {
        acc *= 1.0 - x * qk;
        qk *= q.q();
        if xn * qk < tol.rel_tol && qk < tol.rel_tol {
            return Ok(acc);
        }
    }
    Err(Error::NonConvergence {
        max_terms: tol.max_terms,
    })
}

/// q-Gamma function `Gamma_q(z) = (1-q)^{1-z} (q;q)_inf / (q^z;q)_inf` for `z > 0`.
pub fn qgamma(z: f64, q: QParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("qgamma requires z > 0, got {z}")));
    }
    let tol = SeriesTolerance::default();
    let num = qpoch_inf_real(q.q(), q, &tol)?;
    let den = qpoch_inf_real(q.pow(z), q, &tol)?;
    Ok((1.0 - q.q()).powf(1.0 - z) * num / den)
}

fn check_theta(theta: f64, name: &str) -> Result<()> {
    if !(theta > 0.0) {
        return Err(Error::domain(format!(
            "{name} requires theta > 0, got {theta}"
        )));
    }
    Ok(())
}

/// q-digamma `Psi_q(theta)`, strictly increasing in `theta`.
pub fn qdigamma(theta: f64, q: QParams) -> Result<f64> {
    qdigamma_with(theta, q, &SeriesTolerance::default())
}

pub fn qdigamma_with(theta: f64, q: QParams, tol: &SeriesTolerance) -> Result<f64> {
    check_theta(theta, "qdigamma")?;
    let s = digamma_series(theta, q, tol, |t| t / (1.0 - t))?;
    Ok(-(1.0 - q.q()).ln() + q.log_q() * s)
}

/// `Psi_q'(theta)`; strictly positive.
pub fn qdigamma_prime(theta: f64, q: QParams) -> Result<f64> {
    qdigamma_prime_with(theta, q, &SeriesTolerance::default())
}

pub fn qdigamma_prime_with(theta: f64, q: QParams, tol: &SeriesTolerance) -> Result<f64> {
    check_theta(theta, "qdigamma_prime")?;
    let s = digamma_series(theta, q, tol, |t| {
        let d = 1.0 - t;
        t / (d * d)
    })?;
    Ok(q.log_q() * q.log_q() * s)
}

/// `Psi_q''(theta)`, by term-wise differentiation of the `Psi_q'` series.
pub fn qdigamma_second(theta: f64, q: QParams) -> Result<f64> {
    qdigamma_second_with(theta, q, &SeriesTolerance::default())
}

pub fn qdigamma_second_with(theta: f64, q: QParams, tol: &SeriesTolerance) -> Result<f64> {
    check_theta(theta, "qdigamma_second")?;
    let s = digamma_series(theta, q, tol, |t| {
        let d = 1.0 - t;
        t * (1.0 + t) / (d * d * d)
    })?;
    let lq = q.log_q();
    Ok(lq * lq * lq * s)
}

/// Shared driver: `sum_{k>=0} term(q^{theta+k})`.
fn digamma_series(
    theta: f64,
    q: QParams,
    tol: &SeriesTolerance,
    term: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut t = q.pow(theta);
    let mut acc = 0.0;
    for _ in 0..tol.max_terms {
        let v = term(t);
        acc += v;
        t *= q.q();
        if v.abs() < tol.rel_tol * acc.abs().max(f64::MIN_POSITIVE) && t < tol.rel_tol {
            return Ok(acc);
        }
    }
    Err(Error::NonConvergence {
        max_terms: tol.max_terms,
    })
}
