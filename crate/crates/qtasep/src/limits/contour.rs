//! Contour discretization and separable kernel assembly for the
//! double-contour kernel representations
//!
//! ```text
//! K(u,v) = 1/(2 pi i)^2  int dw int dz  e^{E(z) - z u} / e^{E(w) - w v}
//!                                       * P(z)/P(w) * 1/(z - w)
//! ```
//!
//! with `E(z) = z^3/3` (Airy / BBP, `P(z) = prod (z - b_i)`) or
//! `E(z) = z^2/2` (Hermite, `P(z) = z^k`).
//!
//! Discretizing both contours with Gauss-Legendre nodes `{z_i}`, `{w_j}`
//! makes the whole Nystrom matrix a product `A^T C B` where only the
//! Cauchy matrix `C_ij = 1/(z_i - w_j)` couples the two contours; assembly
//! is therefore O(n_z n_w m) instead of O(n_z n_w m^2).
//!
//! Numerical conditioning:
//!
//! - Every kernel value is computed conjugated by `exp(eta (u - v))` with
//!   `eta` = the w-vertex. This is a diagonal similarity, so Fredholm
//!   determinants are unchanged, but it removes the `e^{eta v}` growth of
//!   the raw integrand for large positive `v`. Single kernel values undo
//!   the factor at the end.
//! - For evaluation points with `min(u) < 0` the V contours are widened
//!   into a vertical segment of half-height `h ~ sqrt(-min u)` joining the
//!   rays. The stationary points of `z^3/3 - zu` for `u < 0` sit at
//!   `+/- i sqrt(-u)`; passing near them keeps the integrand magnitude at
//!   `exp(O(|u|^{1/2}))` instead of `exp(O(|u|^{3/2}))`, which is the
//!   difference between ~1e-12 and ~1e-5 absolute error at u = -8.

use num_complex::Complex64;

use crate::quad::gauss_legendre;

/// Nodes `z_i` with complex quadrature coefficients `c_i` such that
/// `int f(z) dz ~= sum c_i f(z_i)` along the directed contour.
pub(crate) struct ContourNodes {
    pub points: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
}

impl ContourNodes {
    fn new() -> Self {
        ContourNodes {
            points: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    /// Append Gauss-Legendre nodes on the straight segment `a -> b`.
    fn push_segment(&mut self, a: Complex64, b: Complex64, n: usize) {
        let (ts, ws) = gauss_legendre(n);
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        for (t, w) in ts.iter().zip(&ws) {
            self.points.push(mid + half * *t);
            self.coeffs.push(half * *w);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Rounded-V contour through `vertex`: incoming ray at angle `-ray_angle`,
/// a vertical segment `vertex - i h -> vertex + i h` (skipped when `h = 0`),
/// outgoing ray at `+ray_angle`; oriented bottom to top.
///
/// Each ray can be split at distance `split_ray_at` from its base: Cauchy
/// factors like `1/w` can pass close to the contour mid-ray, and the
/// Gauss-Legendre nodes of a long segment are coarsest exactly there. The
/// vertical segment is always halved for the same reason (the oscillation
/// from `e^{-zu}` peaks around the real axis).
pub(crate) fn rounded_v(
    vertex: f64,
    ray_angle: f64,
    h: f64,
    l_ray: f64,
    m_ray: usize,
    split_ray_at: Option<f64>,
) -> ContourNodes {
    let mut nodes = ContourNodes::new();
    let lo = Complex64::new(vertex, -h);
    let hi = Complex64::new(vertex, h);
    let dir_lo = Complex64::from_polar(1.0, -ray_angle);
    let dir_hi = Complex64::from_polar(1.0, ray_angle);
    match split_ray_at {
        Some(s) if s < l_ray => {
            nodes.push_segment(lo + dir_lo * l_ray, lo + dir_lo * s, m_ray);
            nodes.push_segment(lo + dir_lo * s, lo, m_ray);
        }
        _ => nodes.push_segment(lo + dir_lo * l_ray, lo, m_ray),
    }
    if h > 0.0 {
        let mid = Complex64::new(vertex, 0.0);
        nodes.push_segment(lo, mid, m_ray);
        nodes.push_segment(mid, hi, m_ray);
    }
    match split_ray_at {
        Some(s) if s < l_ray => {
            nodes.push_segment(hi, hi + dir_hi * s, m_ray);
            nodes.push_segment(hi + dir_hi * s, hi + dir_hi * l_ray, m_ray);
        }
        _ => nodes.push_segment(hi, hi + dir_hi * l_ray, m_ray),
    }
    nodes
}

/// `1/(2 pi i)`.
pub(crate) fn inv_two_pi_i() -> Complex64 {
    Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI))
}

/// Assemble the real matrix
/// `M[p][q] = e^{eta(u_p - v_q)} K(u_p, v_q)`
/// for the separable double-contour kernel with exponent `exp_fn` and
/// perturbation polynomial `poly` (`poly = 1` for the Airy kernel).
pub(crate) fn kernel_matrix(
    z_nodes: &ContourNodes,
    w_nodes: &ContourNodes,
    us: &[f64],
    vs: &[f64],
    eta: f64,
    exp_fn: impl Fn(Complex64) -> Complex64,
    poly: impl Fn(Complex64) -> Complex64,
) -> Vec<f64> {
    let (nz, nw) = (z_nodes.len(), w_nodes.len());
    let (mu, mv) = (us.len(), vs.len());
    let norm = inv_two_pi_i();

    // A[i][p] = c_i P(z_i) exp(E(z_i) - (z_i - eta) u_p) / (2 pi i)
    let mut a = vec![Complex64::new(0.0, 0.0); nz * mu];
    for i in 0..nz {
        let z = z_nodes.points[i];
        let base = z_nodes.coeffs[i] * poly(z) * norm;
        let e = exp_fn(z);
        for (p, &u) in us.iter().enumerate() {
            a[i * mu + p] = base * (e - (z - eta) * u).exp();
        }
    }
    // B[j][q] = c_j exp(-E(w_j) + (w_j - eta) v_q) / (P(w_j) 2 pi i)
    let mut b = vec![Complex64::new(0.0, 0.0); nw * mv];
    for j in 0..nw {
        let w = w_nodes.points[j];
        let base = w_nodes.coeffs[j] * norm / poly(w);
        let e = exp_fn(w);
        for (q, &v) in vs.iter().enumerate() {
            b[j * mv + q] = base * (-e + (w - eta) * v).exp();
        }
    }
    // T = C B with C[i][j] = 1/(z_i - w_j).
    let mut t = vec![Complex64::new(0.0, 0.0); nz * mv];
    for i in 0..nz {
        let z = z_nodes.points[i];
        for j in 0..nw {
            let c = (z - w_nodes.points[j]).inv();
            let brow = &b[j * mv..(j + 1) * mv];
            let trow = &mut t[i * mv..(i + 1) * mv];
            for q in 0..mv {
                trow[q] += c * brow[q];
            }
        }
    }
    // M = Re(A^T T).
    let mut m = vec![0.0; mu * mv];
    for p in 0..mu {
        for i in 0..nz {
            let aip = a[i * mu + p];
            let trow = &t[i * mv..(i + 1) * mv];
            let mrow = &mut m[p * mv..(p + 1) * mv];
            for q in 0..mv {
                let prod = aip * trow[q];
                mrow[q] += prod.re;
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounded_v_node_counts() {
        let c = rounded_v(0.5, std::f64::consts::FRAC_PI_3, 0.0, 10.0, 16, None);
        assert_eq!(c.len(), 32);
        let c = rounded_v(0.5, std::f64::consts::FRAC_PI_3, 0.0, 10.0, 16, Some(1.0));
        assert_eq!(c.len(), 64);
        let c = rounded_v(0.5, std::f64::consts::FRAC_PI_3, 2.0, 10.0, 16, None);
        assert_eq!(c.len(), 64);
        // Quadrature coefficients sum to the total directed displacement.
        let total: Complex64 = c.coeffs.iter().sum();
        let expected = Complex64::from_polar(10.0, std::f64::consts::FRAC_PI_3)
            - Complex64::from_polar(10.0, -std::f64::consts::FRAC_PI_3)
            + Complex64::new(0.0, 4.0);
        assert!((total - expected).norm() < 1e-12);
    }
}
