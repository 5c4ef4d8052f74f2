//! Action functions of the steepest-descent analysis and numeric checks of
//! their critical-point identities.
//!
//! The kernel asymptotics are governed by
//!
//! ```text
//! f0(Z) = -f log(q) Z + kappa q^Z + log (q^Z; q)_inf      (GUE / critical)
//! g0(Z) = -g log(q) Z + kappa q^Z + log (q^Z; q)_inf      (shock)
//! ```
//!
//! together with the lower-order terms `f1`, `f2`, `g1` and the rate
//! perturbation factor `phi`. The checkable facts implemented here:
//!
//! - two independent representations of `f0'` agree;
//! - `f0'(theta) = f0''(theta) = 0` and `f0'''(theta) = 2 chi`;
//! - `g0'(A) = 0` and `g0''(A) = sigma` at `A = log_q(alpha)`;
//! - the contours `C_{theta,pi/4}` (resp. `C_{A,pi/4}`) are steep descent
//!   for `-Re f0` (resp. `-Re g0`);
//! - `Re f0` is `2 pi / |log q|`-periodic on vertical lines, decreasing on
//!   the first half period.
//!
//! Derivatives at the critical point are estimated by 4th-order central
//! differences with one Richardson step (h and h/2), applied to the
//! increment `f0(theta + d) - f0(theta)` evaluated in cancellation-free
//! form via `expm1`/`ln_1p`; this keeps the estimates accurate even where
//! `kappa q^theta` is large (small theta, q close to 1).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hydro::{self, RateProfile};
use crate::qfun::{self, QParams, SeriesTolerance};

const MAX_TERMS: usize = 1_000_000;

fn check_re_positive(z: Complex64) -> Result<()> {
    if !(z.re > 0.0) {
        return Err(Error::domain(format!("requires Re Z > 0, got Z = {z}")));
    }
    Ok(())
}

/// `q^Z = exp(Z log q)`.
#[inline]
fn q_pow(q: QParams, z: Complex64) -> Complex64 {
    (z * q.log_q()).exp()
}

/// q-digamma extended to complex argument with `Re Z > 0` by its series.
fn qdigamma_complex(z: Complex64, q: QParams) -> Result<Complex64> {
    check_re_positive(z)?;
    let one = Complex64::new(1.0, 0.0);
    let mut t = q_pow(q, z);
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..MAX_TERMS {
        let term = t / (one - t);
        acc += term;
        t *= q.q();
        if t.norm() < 1e-17 {
            return Ok(Complex64::new(-(1.0 - q.q()).ln(), 0.0) + acc * q.log_q());
        }
    }
    Err(Error::NonConvergence {
        max_terms: MAX_TERMS,
    })
}

/// `f0(Z) = -f log(q) Z + kappa q^Z + log (q^Z; q)_inf` for `Re Z > 0`.
pub fn f0(z: Complex64, q: QParams, theta: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let f = hydro::f_coeff(q, theta)?;
    let k = hydro::kappa(q, theta)?;
    let qz = q_pow(q, z);
    let lp = qfun::log_qpoch_inf(qz, q, &SeriesTolerance::default())?;
    Ok(-f * q.log_q() * z + k * qz + lp)
}

/// `f1(Z) = -c log(q) Z + c q^{Z - theta}`.
pub fn f1(z: Complex64, q: QParams, theta: f64, c: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    Ok(-c * q.log_q() * z + c * q_pow(q, z - theta))
}

/// `f2(Z) = c^2 (log q)^4 / (4 chi) Z - chi^{1/3} x Z`.
pub fn f2(z: Complex64, q: QParams, theta: f64, c: f64, x: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let chi = hydro::chi(q, theta)?;
    let lq = q.log_q();
    Ok(z * (c * c * lq.powi(4) / (4.0 * chi) - chi.cbrt() * x))
}

/// `f0'` via the q-digamma representation:
/// `Psi_q'(theta)/log(q) (q^{Z-theta} - 1) + Psi_q(theta) - Psi_q(Z)`.
pub fn f0_prime_psi(z: Complex64, q: QParams, theta: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let psi1 = qfun::qdigamma_prime(theta, q)?;
    let psi_theta = qfun::qdigamma(theta, q)?;
    let psi_z = qdigamma_complex(z, q)?;
    Ok((q_pow(q, z - theta) - 1.0) * (psi1 / q.log_q()) + psi_theta - psi_z)
}

/// `f0'` via the series representation
/// `-log(q) sum_k q^{2k} (q^theta - q^Z)^2 / ((1-q^{theta+k})^2 (1-q^{Z+k}))`,
/// which vanishes identically at `Z = theta`.
pub fn f0_prime_series(z: Complex64, q: QParams, theta: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let one = Complex64::new(1.0, 0.0);
    let num = {
        let d = Complex64::new(q.pow(theta), 0.0) - q_pow(q, z);
        d * d
    };
    let mut q2k = 1.0;
    let mut qtk = q.pow(theta);
    let mut qzk = q_pow(q, z);
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..MAX_TERMS {
        let den = (1.0 - qtk) * (1.0 - qtk);
        acc += num * q2k / (den * (one - qzk));
        q2k *= q.q() * q.q();
        qtk *= q.q();
        qzk *= q.q();
        if q2k < 1e-18 {
            return Ok(acc * (-q.log_q()));
        }
    }
    Err(Error::NonConvergence {
        max_terms: MAX_TERMS,
    })
}

/// `g0(Z) = -g log(q) Z + kappa q^Z + log (q^Z; q)_inf` for `Re Z > 0`.
pub fn g0(z: Complex64, q: QParams, theta: f64, alpha: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let g = hydro::g_coeff(q, theta, alpha)?;
    let k = hydro::kappa(q, theta)?;
    let qz = q_pow(q, z);
    let lp = qfun::log_qpoch_inf(qz, q, &SeriesTolerance::default())?;
    Ok(-g * q.log_q() * z + k * qz + lp)
}

/// `g1(Z) = -c log(q) Z - sigma^{1/2} x Z + (c/alpha) q^Z`.
pub fn g1(z: Complex64, q: QParams, theta: f64, alpha: f64, c: f64, x: f64) -> Result<Complex64> {
    check_re_positive(z)?;
    let s = hydro::sigma(q, theta, alpha)?;
    if s < 0.0 {
        return Err(Error::domain(format!("g1 requires sigma >= 0, got {s}")));
    }
    Ok(z * (-c * q.log_q() - s.sqrt() * x) + q_pow(q, z) * (c / alpha))
}

/// The rate-perturbation factor
/// `phi(Z) = prod_j (q^Z / a_j; q)_inf / ((q^Z; q)_inf)^m`.
///
/// `phi = 1` for the homogeneous profile. Errors if `Z` is within `1e-10`
/// of a zero of `(q^Z; q)_inf` (a pole of the factor).
pub fn phi(z: Complex64, q: QParams, profile: &RateProfile) -> Result<Complex64> {
    check_re_positive(z)?;
    if profile.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let qz = q_pow(q, z);
    // Pole guard: (q^Z; q)_inf vanishes iff q^{Z+k} = 1 for some k >= 0.
    let mut t = qz;
    for _ in 0..MAX_TERMS {
        if (t - 1.0).norm() <= 1e-10 * (-q.log_q()) {
            return Err(Error::Pole(format!(
                "Z = {z} is within 1e-10 of a zero of (q^Z; q)_inf"
            )));
        }
        t *= q.q();
        if t.norm() < 0.5 {
            break;
        }
    }
    let den = poch_product(qz, q)?;
    let mut out = Complex64::new(1.0, 0.0);
    for &(_, a) in profile.perturbations() {
        out *= poch_product(qz / a, q)? / den;
    }
    Ok(out)
}

/// `(w; q)_inf` without the small-argument guard of `qfun::qpoch_inf`;
/// the product is entire in `w`.
fn poch_product(w: Complex64, q: QParams) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    let mut t = w;
    for _ in 0..MAX_TERMS {
        acc *= one - t;
        t *= q.q();
        if t.norm() < 1e-17 {
            return Ok(acc);
        }
    }
    Err(Error::NonConvergence {
        max_terms: MAX_TERMS,
    })
}

// ---------------------------------------------------------------------------
// Critical-point ladders by cancellation-free finite differences.
// ---------------------------------------------------------------------------

/// `f0(v + d) - f0(v)` for real `v, d`, written so that the large terms
/// never cancel: uses `expm1` for `q^{v+d} - q^v` and `ln_1p` for the
/// log-Pochhammer increments.
fn action_increment(
    d: f64,
    q: QParams,
    v: f64,
    lin_coeff: f64, // -f log q  (or -g log q)
    kappa: f64,
) -> f64 {
    let em1 = f64::exp_m1(d * q.log_q()); // q^d - 1
    let mut acc = lin_coeff * d + kappa * q.pow(v) * em1;
    let mut qvk = q.pow(v);
    for _ in 0..MAX_TERMS {
        // log(1 - q^{v+d+k}) - log(1 - q^{v+k}) = ln_1p(-q^{v+k} em1 / (1 - q^{v+k}))
        acc += f64::ln_1p(-qvk * em1 / (1.0 - qvk));
        qvk *= q.q();
        if qvk < 1e-18 {
            break;
        }
    }
    acc
}

/// 4th-order central-difference stencils on an increment function
/// `inc(d) = F(v + d) - F(v)` (so `inc(0) = 0`).
struct Stencil<'a> {
    inc: &'a dyn Fn(f64) -> f64,
}

impl Stencil<'_> {
    fn d1(&self, h: f64) -> f64 {
        let i = |k: f64| (self.inc)(k * h);
        (-i(2.0) + 8.0 * i(1.0) - 8.0 * i(-1.0) + i(-2.0)) / (12.0 * h)
    }
    fn d2(&self, h: f64) -> f64 {
        let i = |k: f64| (self.inc)(k * h);
        (-i(2.0) + 16.0 * i(1.0) + 16.0 * i(-1.0) - i(-2.0)) / (12.0 * h * h)
    }
    fn d3(&self, h: f64) -> f64 {
        let i = |k: f64| (self.inc)(k * h);
        (i(-3.0) / 8.0 - i(-2.0) + 13.0 / 8.0 * i(-1.0) - 13.0 / 8.0 * i(1.0) + i(2.0)
            - i(3.0) / 8.0)
            / (h * h * h)
    }
    /// Richardson step for a 4th-order estimate: eliminates the `h^4` term.
    fn richardson(est: impl Fn(f64) -> f64, h: f64) -> f64 {
        (16.0 * est(h / 2.0) - est(h)) / 15.0
    }
}

/// Numerically estimated derivatives of `f0` at its critical point `theta`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalConstants {
    /// `f0'(theta)`; contract `|d1| <= 1e-9`.
    pub d1: f64,
    /// `f0''(theta)`; contract `|d2| <= 1e-8`.
    pub d2: f64,
    /// `f0'''(theta)`; contract `|d3 - 2 chi| <= 1e-6 |2 chi|`.
    pub d3: f64,
    /// Reference value `2 chi(q, theta)`.
    pub two_chi: f64,
}

/// Finite-difference derivatives of `f0` at `theta`, checked against the
/// Taylor contracts. A violated contract signals an upstream series bug and
/// is reported as a [`Error::Tolerance`].
pub fn critical_constants(q: QParams, theta: f64) -> Result<CriticalConstants> {
    let f = hydro::f_coeff(q, theta)?;
    let k = hydro::kappa(q, theta)?;
    let two_chi = 2.0 * hydro::chi(q, theta)?;
    let inc = |d: f64| action_increment(d, q, theta, -f * q.log_q(), k);
    let st = Stencil { inc: &inc };
    let h = 1e-2 * theta;
    let d1 = Stencil::richardson(|h| st.d1(h), h);
    let d2 = Stencil::richardson(|h| st.d2(h), h);
    let d3 = Stencil::richardson(|h| st.d3(h), h);
    if d1.abs() > 1e-9 {
        return Err(Error::Tolerance(format!(
            "f0'(theta) = {d1}, expected 0 within 1e-9"
        )));
    }
    if d2.abs() > 1e-8 {
        return Err(Error::Tolerance(format!(
            "f0''(theta) = {d2}, expected 0 within 1e-8"
        )));
    }
    if (d3 - two_chi).abs() > 1e-6 * two_chi.abs() {
        return Err(Error::Tolerance(format!(
            "f0'''(theta) = {d3}, expected 2 chi = {two_chi} within 1e-6 relative"
        )));
    }
    Ok(CriticalConstants {
        d1,
        d2,
        d3,
        two_chi,
    })
}

/// Numerically estimated derivatives of `g0` at `A = log_q(alpha)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShockConstants {
    /// `g0'(A)`; contract `|d1| <= 1e-9`.
    pub d1: f64,
    /// `g0''(A)`; contract `|d2 - sigma| <= 1e-8 |sigma|`.
    pub d2: f64,
    /// Reference value `sigma(q, theta, alpha)`.
    pub sigma: f64,
}

/// Finite-difference derivatives of `g0` at `A`, for `alpha < q^theta`.
pub fn shock_constants(q: QParams, theta: f64, alpha: f64) -> Result<ShockConstants> {
    if !(alpha < q.pow(theta)) {
        return Err(Error::domain(format!(
            "shock constants require alpha < q^theta, got alpha={alpha}, q^theta={}",
            q.pow(theta)
        )));
    }
    let g = hydro::g_coeff(q, theta, alpha)?;
    let k = hydro::kappa(q, theta)?;
    let sigma = hydro::sigma(q, theta, alpha)?;
    let big_a = q.log_base_q(alpha);
    let inc = |d: f64| action_increment(d, q, big_a, -g * q.log_q(), k);
    let st = Stencil { inc: &inc };
    let h = 1e-2 * big_a.min(theta);
    let d1 = Stencil::richardson(|h| st.d1(h), h);
    let d2 = Stencil::richardson(|h| st.d2(h), h);
    if d1.abs() > 1e-9 {
        return Err(Error::Tolerance(format!(
            "g0'(A) = {d1}, expected 0 within 1e-9"
        )));
    }
    if (d2 - sigma).abs() > 1e-8 * sigma.abs().max(1e-8) {
        return Err(Error::Tolerance(format!(
            "g0''(A) = {d2}, expected sigma = {sigma} within 1e-8 relative"
        )));
    }
    Ok(ShockConstants { d1, d2, sigma })
}

// ---------------------------------------------------------------------------
// Contours and monotonicity scans.
// ---------------------------------------------------------------------------

/// The wedge contour `C_{vertex, angle}`: image under `x -> log_q(x)` of the
/// q-plane rays `q^vertex + |s| e^{i sgn(s) angle}`.
#[derive(Debug, Clone, Copy)]
pub struct ContourRay {
    pub vertex: f64,
    pub angle: f64,
}

impl ContourRay {
    pub fn new(vertex: f64, angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Contour(format!(
                "contour angle must lie in (0, pi/2], got {angle}"
            )));
        }
        if !(vertex > 0.0) {
            return Err(Error::Contour(format!(
                "contour vertex must be > 0, got {vertex}"
            )));
        }
        Ok(ContourRay { vertex, angle })
    }

    /// The q-plane point `q^vertex + |s| e^{i sgn(s) angle}`.
    pub fn q_plane_point(&self, q: QParams, s: f64) -> Complex64 {
        let dir = Complex64::from_polar(s.abs(), self.angle * s.signum());
        Complex64::new(q.pow(self.vertex), 0.0) + dir
    }

    /// The log-plane point `W(s) = log_q(q^vertex + |s| e^{i sgn(s) angle})`.
    pub fn point(&self, q: QParams, s: f64) -> Complex64 {
        self.q_plane_point(q, s).ln() / q.log_q()
    }
}

/// Which action a scan evaluates.
#[derive(Debug, Clone, Copy)]
pub enum SteepDescentTarget {
    F0,
    G0 { alpha: f64 },
}

/// `Re f0` (or `Re g0`) evaluated directly from the q-plane point
/// `v = q^W`. Only real parts are needed along contours, and
/// `Re log(1 - v q^k) = ln |1 - v q^k|` is branch-free, so this works on
/// the whole contour including where `Re W <= 0` (i.e. `|v| >= 1`).
fn re_action_at_q_point(v: Complex64, q: QParams, lin_coeff: f64, kappa: f64) -> f64 {
    // Re W = ln|v| / ln q
    let mut acc = lin_coeff * v.norm().ln() / q.log_q() + kappa * v.re;
    let one = Complex64::new(1.0, 0.0);
    let mut t = v;
    for _ in 0..MAX_TERMS {
        acc += (one - t).norm().ln();
        t *= q.q();
        if t.norm() < 1e-17 {
            break;
        }
    }
    acc
}

/// A single monotonicity violation found by a scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanViolation {
    pub s: f64,
    pub drop: f64,
}

/// Result of a steep-descent or periodicity scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub points: usize,
    pub violations: Vec<ScanViolation>,
}

impl ScanReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scan `s -> Re[action(W(s))]` on `[0, s_max]` and report any decrease
/// (the contour is steep descent for `-Re` iff this is nondecreasing; the
/// `s < 0` half follows by conjugation symmetry).
pub fn steep_descent_scan(
    target: SteepDescentTarget,
    q: QParams,
    theta: f64,
    contour: &ContourRay,
    s_max: f64,
    step: f64,
) -> Result<ScanReport> {
    if !(step > 0.0 && s_max > 0.0) {
        return Err(Error::domain("scan requires step > 0 and s_max > 0"));
    }
    let (lin_coeff, kappa) = action_coeffs(target, q, theta)?;
    let n = (s_max / step).ceil() as usize;
    let mut prev = re_action_at_q_point(contour.q_plane_point(q, 0.0), q, lin_coeff, kappa);
    let mut violations = Vec::new();
    for i in 1..=n {
        let s = i as f64 * step;
        let cur = re_action_at_q_point(contour.q_plane_point(q, s), q, lin_coeff, kappa);
        let slack = 1e-12 * prev.abs().max(1.0);
        if cur < prev - slack {
            violations.push(ScanViolation {
                s,
                drop: prev - cur,
            });
        }
        prev = cur;
    }
    Ok(ScanReport {
        points: n + 1,
        violations,
    })
}

fn action_coeffs(target: SteepDescentTarget, q: QParams, theta: f64) -> Result<(f64, f64)> {
    let kappa = hydro::kappa(q, theta)?;
    let lin = match target {
        SteepDescentTarget::F0 => -hydro::f_coeff(q, theta)? * q.log_q(),
        SteepDescentTarget::G0 { alpha } => -hydro::g_coeff(q, theta, alpha)? * q.log_q(),
    };
    Ok((lin, kappa))
}

/// Periodicity and half-period monotonicity of `Re[action]` on the vertical
/// line `{x + i t}`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicityReport {
    /// Period `2 pi / |log q|`.
    pub period: f64,
    /// `max_t |Re F(x+it) - Re F(x+i(t+period))|`.
    pub max_period_defect: f64,
    /// Violations of monotone decrease on `[0, period/2]`.
    pub decrease_violations: Vec<ScanViolation>,
}

impl PeriodicityReport {
    pub fn ok(&self) -> bool {
        self.max_period_defect <= 1e-10 && self.decrease_violations.is_empty()
    }
}

/// Check that `t -> Re[action(x + it)]` is `2 pi/|log q|`-periodic and
/// decreasing on the first half period. `x` must be positive (it plays the
/// role of `vertex + offset`).
pub fn vertical_periodicity_check(
    target: SteepDescentTarget,
    q: QParams,
    theta: f64,
    x: f64,
    t_points: usize,
) -> Result<PeriodicityReport> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "vertical line must have x > 0, got {x}"
        )));
    }
    if t_points < 2 {
        return Err(Error::domain("need at least 2 scan points"));
    }
    let (lin_coeff, kappa) = action_coeffs(target, q, theta)?;
    let period = 2.0 * std::f64::consts::PI / q.log_q().abs();
    let eval = |t: f64| {
        let v = q_pow(q, Complex64::new(x, t));
        re_action_at_q_point(v, q, lin_coeff, kappa)
    };
    let mut max_defect: f64 = 0.0;
    for i in 0..t_points {
        let t = period * i as f64 / t_points as f64;
        max_defect = max_defect.max((eval(t) - eval(t + period)).abs());
    }
    // Monotone decrease on [0, period/2] (= [0, -pi/log q]).
    let mut decrease_violations = Vec::new();
    let half = period / 2.0;
    let mut prev = eval(0.0);
    for i in 1..=t_points {
        let t = half * i as f64 / t_points as f64;
        let cur = eval(t);
        let slack = 1e-12 * prev.abs().max(1.0);
        if cur > prev + slack {
            decrease_violations.push(ScanViolation {
                s: t,
                drop: cur - prev,
            });
        }
        prev = cur;
    }
    Ok(PeriodicityReport {
        period,
        max_period_defect: max_defect,
        decrease_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn q(v: f64) -> QParams {
        QParams::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn f0_real_on_real_axis_and_series_oracle() {
        let qq = q(0.6);
        let v = f0(c(1.0, 0.0), qq, 1.0).unwrap();
        assert_eq!(v.im, 0.0);

        // Term-wise oracle at a complex point.
        let z = c(1.0, 0.1);
        let f = hydro::f_coeff(qq, 1.0).unwrap();
        let k = hydro::kappa(qq, 1.0).unwrap();
        let qz = (z * qq.log_q()).exp();
        let mut lp = c(0.0, 0.0);
        for j in 0..300 {
            lp += (c(1.0, 0.0) - qz * 0.6f64.powi(j)).ln();
        }
        let oracle = -f * qq.log_q() * z + k * qz + lp;
        let got = f0(z, qq, 1.0).unwrap();
        assert!((got - oracle).norm() <= 1e-12 * oracle.norm());

        assert!(f0(c(-0.1, 0.0), qq, 1.0).is_err());
    }

    #[test]
    fn f1_critical_point() {
        let qq = q(0.6);
        let h = 1e-5;
        let d = (f1(c(1.0 + h, 0.0), qq, 1.0, 0.7).unwrap()
            - f1(c(1.0 - h, 0.0), qq, 1.0, 0.7).unwrap())
            / (2.0 * h);
        assert!(d.norm() <= 1e-10, "f1'(theta) = {d}");
    }

    #[test]
    fn f0_prime_representations_agree() {
        let qq = q(0.6);
        // Exactly zero at the critical point in the series form.
        let at_theta = f0_prime_series(c(1.0, 0.0), qq, 1.0).unwrap();
        assert_eq!(at_theta, c(0.0, 0.0));

        let z = c(1.3, 0.2);
        let a = f0_prime_psi(z, qq, 1.0).unwrap();
        let b = f0_prime_series(z, qq, 1.0).unwrap();
        assert!((a - b).norm() <= 1e-11, "{a} vs {b}");

        // Against a finite difference of f0.
        let h = 1e-5;
        let fd = (f0(z + h, qq, 1.0).unwrap() - f0(z - h, qq, 1.0).unwrap()) / (2.0 * h);
        assert!((a - fd).norm() <= 1e-8);
    }

    #[test]
    fn f0_prime_agreement_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &qv in &[0.3, 0.6, 0.9] {
            let qq = q(qv);
            let im_max = std::f64::consts::PI / qq.log_q().abs();
            for _ in 0..34 {
                let z = c(rng.gen_range(0.1..5.0), rng.gen_range(-im_max..im_max));
                let theta = rng.gen_range(0.3..2.0);
                let a = f0_prime_psi(z, qq, theta).unwrap();
                let b = f0_prime_series(z, qq, theta).unwrap();
                assert!(
                    (a - b).norm() <= 1e-11 * a.norm().max(1.0),
                    "q={qv} z={z} theta={theta}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn critical_ladder_on_grid() {
        for &qv in &[0.3, 0.6, 0.9] {
            for &theta in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let cc = critical_constants(q(qv), theta)
                    .unwrap_or_else(|e| panic!("ladder failed at q={qv}, theta={theta}: {e}"));
                assert!(cc.d1.abs() <= 1e-9);
                assert!(cc.d2.abs() <= 1e-8);
                assert!((cc.d3 - cc.two_chi).abs() <= 1e-6 * cc.two_chi.abs());
            }
        }
    }

    #[test]
    fn shock_ladder() {
        let qq = q(0.6);
        let sc = shock_constants(qq, 1.0, 0.4).unwrap();
        assert!(sc.d1.abs() <= 1e-9);
        assert!((sc.d2 - sc.sigma).abs() <= 1e-8 * sc.sigma.abs());
        // Same ladder across the hydro grid with A = theta + 1/2.
        for &qv in &[0.3, 0.6, 0.9] {
            for &theta in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let qq = q(qv);
                let alpha = qq.pow(theta + 0.5);
                let sc = shock_constants(qq, theta, alpha)
                    .unwrap_or_else(|e| panic!("shock ladder at q={qv}, theta={theta}: {e}"));
                assert!(sc.sigma > 0.0);
            }
        }
        // Not defined on the GUE side.
        assert!(shock_constants(qq, 1.0, 0.9).is_err());
    }

    #[test]
    fn g0_matches_f0_at_boundary() {
        let qq = q(0.6);
        let alpha = qq.pow(1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let z = c(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0));
            let a = g0(z, qq, 1.0, alpha).unwrap();
            let b = f0(z, qq, 1.0).unwrap();
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn phi_empty_profile_is_one() {
        let qq = q(0.6);
        assert_eq!(
            phi(c(1.7, 0.3), qq, &RateProfile::homogeneous()).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn phi_critical_ratio_tends_to_z_over_w() {
        let qq = q(0.6);
        let theta = 1.0;
        let profile = RateProfile::new(vec![(1, qq.pow(theta))]).unwrap();
        let eps = 1e-6;
        let (zs, ws) = (c(1.3, 0.4), c(0.7, -0.2));
        let ratio = phi(c(theta, 0.0) + zs * eps, qq, &profile).unwrap()
            / phi(c(theta, 0.0) + ws * eps, qq, &profile).unwrap();
        let limit = zs / ws;
        assert!((ratio - limit).norm() <= 1e-4, "{ratio} vs {limit}");
    }

    #[test]
    fn phi_gue_ratio_tends_to_one() {
        let qq = q(0.6);
        let theta = 1.0;
        // alpha = 0.9 > q^theta = 0.6: slow particles irrelevant.
        let profile = RateProfile::new(vec![(1, 0.9)]).unwrap();
        let eps = 1e-6;
        let (zs, ws) = (c(1.3, 0.4), c(0.7, -0.2));
        let ratio = phi(c(theta, 0.0) + zs * eps, qq, &profile).unwrap()
            / phi(c(theta, 0.0) + ws * eps, qq, &profile).unwrap();
        assert!((ratio - c(1.0, 0.0)).norm() <= 1e-4, "{ratio}");
    }

    #[test]
    fn steep_descent_scans() {
        let pi4 = std::f64::consts::FRAC_PI_4;
        // f0 on C_{theta, pi/4}.
        for (qv, theta) in [(0.6, 1.0), (0.9, 2.0), (0.3, 0.5)] {
            let qq = q(qv);
            let contour = ContourRay::new(theta, pi4).unwrap();
            let report =
                steep_descent_scan(SteepDescentTarget::F0, qq, theta, &contour, 5.0, 0.01).unwrap();
            assert!(
                report.ok(),
                "violations at q={qv}, theta={theta}: {:?}",
                report.violations
            );
        }
        // g0 on C_{A, pi/4} with alpha = 0.4 < q^theta.
        let qq = q(0.6);
        let big_a = qq.log_base_q(0.4);
        let contour = ContourRay::new(big_a, pi4).unwrap();
        let report = steep_descent_scan(
            SteepDescentTarget::G0 { alpha: 0.4 },
            qq,
            1.0,
            &contour,
            5.0,
            0.01,
        )
        .unwrap();
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn vertical_periodicity() {
        let qq = q(0.6);
        let report = vertical_periodicity_check(SteepDescentTarget::F0, qq, 1.0, 1.1, 200).unwrap();
        assert!(
            report.max_period_defect <= 1e-10,
            "{}",
            report.max_period_defect
        );
        assert!(report.decrease_violations.is_empty());

        let report = vertical_periodicity_check(
            SteepDescentTarget::G0 { alpha: 0.4 },
            qq,
            1.0,
            qq.log_base_q(0.4) + 0.1,
            200,
        )
        .unwrap();
        assert!(report.ok());

        // t = 0 is the maximum over one period.
        let (lin, k) = action_coeffs(SteepDescentTarget::F0, qq, 1.0).unwrap();
        let eval = |t: f64| re_action_at_q_point(q_pow(qq, c(1.1, t)), qq, lin, k);
        let at0 = eval(0.0);
        for i in 1..100 {
            let t = report.period * i as f64 / 100.0;
            assert!(eval(t) <= at0 + 1e-12);
        }
    }

    #[test]
    fn contour_ray_validation() {
        assert!(ContourRay::new(1.0, 0.0).is_err());
        assert!(ContourRay::new(1.0, 2.0).is_err());
        assert!(ContourRay::new(-1.0, 0.5).is_err());
        let r = ContourRay::new(1.0, std::f64::consts::FRAC_PI_4).unwrap();
        let qq = q(0.6);
        // s = 0 maps back to the vertex.
        assert!((r.point(qq, 0.0) - c(1.0, 0.0)).norm() < 1e-12);
        // The log-plane point is the exact image of the q-plane point.
        let s = 0.7;
        let v = r.q_plane_point(qq, s);
        let w = r.point(qq, s);
        assert!(((w * qq.log_q()).exp() - v).norm() <= 1e-12 * v.norm());
    }
}
