//! The Hermite kernel in Christoffel-Darboux form.
//!
//! `(p_n)` are the polynomials orthonormal for the weight `e^{-t^2/2}`:
//! `p_n = He_n / ((2 pi)^{1/4} sqrt(n!))` with the probabilists' Hermite
//! polynomials `He_{n+1}(t) = t He_n(t) - n He_{n-1}(t)`.

/// `p_0(t), ..., p_k(t)`.
fn orthonormal_values(t: f64, k: usize) -> Vec<f64> {
    let norm0 = (2.0 * std::f64::consts::PI).powf(-0.25);
    let mut he = vec![0.0; k + 1];
    he[0] = 1.0;
    if k >= 1 {
        he[1] = t;
    }
    for n in 1..k {
        he[n + 1] = t * he[n] - n as f64 * he[n - 1];
    }
    let mut fact = 1.0;
    (0..=k)
        .map(|n| {
            if n > 0 {
                fact *= n as f64;
            }
            norm0 * he[n] / fact.sqrt()
        })
        .collect()
}

/// Orthonormal Hermite function `p_n(t)` (exposed for tests).
pub fn orthonormal_hermite(n: usize, t: f64) -> f64 {
    orthonormal_values(t, n)[n]
}

/// Hermite kernel
/// `H_k(u,v) = sqrt(k) (p_k(u) p_{k-1}(v) - p_{k-1}(u) p_k(v)) / (u - v) * e^{-(u^2+v^2)/4}`,
/// with the `u = v` diagonal taken as the derivative limit of the
/// Christoffel-Darboux quotient (`He_n' = n He_{n-1}`).
pub fn hermite_kernel(u: f64, v: f64, k: usize) -> f64 {
    assert!(k >= 1, "Hermite kernel needs k >= 1");
    let gauss = (-(u * u + v * v) / 4.0).exp();
    // c_{k-1}/c_k = sqrt(k!)/sqrt((k-1)!) = sqrt(k).
    let ck = (k as f64).sqrt();
    if (u - v).abs() > 1e-6 {
        let pu = orthonormal_values(u, k);
        let pv = orthonormal_values(v, k);
        ck * (pu[k] * pv[k - 1] - pu[k - 1] * pv[k]) / (u - v) * gauss
    } else {
        // Derivative form at the midpoint: p_n' = n p_{n-1} sqrt(...) via
        // He_n' = n He_{n-1}; in orthonormal terms p_k' = sqrt(k) p_{k-1}
        // + (lower-degree cancellation handled by the explicit formula).
        let t = 0.5 * (u + v);
        let p = orthonormal_values(t, k);
        // d/dt p_k = k c_k He_{k-1} = sqrt(k) p_{k-1}
        let dpk = ck * p[k - 1];
        let dpk1 = if k >= 2 {
            ((k - 1) as f64).sqrt() * p[k - 2]
        } else {
            0.0
        };
        ck * (dpk * p[k - 1] - dpk1 * p[k]) * gauss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre_on;

    #[test]
    fn rank_one_kernel_is_gaussian() {
        // H_1(u,v) = (2 pi)^{-1/2} e^{-(u^2+v^2)/4}.
        let c = (2.0 * std::f64::consts::PI).powf(-0.5);
        assert!((hermite_kernel(0.0, 0.0, 1) - c).abs() < 1e-14);
        let v = hermite_kernel(0.7, -0.3, 1);
        let expect = c * (-(0.49 + 0.09) / 4.0f64).exp();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn orthonormality_by_quadrature() {
        // int p_m p_n e^{-t^2/2} dt = delta_mn, checked with Gauss-Legendre
        // on [-12, 12] (the weight is below 1e-31 outside).
        let (xs, ws) = gauss_legendre_on(200, -12.0, 12.0);
        for m in 0..4 {
            for n in 0..4 {
                let integral: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&t, &w)| {
                        w * orthonormal_hermite(m, t)
                            * orthonormal_hermite(n, t)
                            * (-t * t / 2.0).exp()
                    })
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (integral - expect).abs() < 1e-10,
                    "orthonormality ({m},{n}): {integral}"
                );
            }
        }
    }

    #[test]
    fn diagonal_matches_christoffel_darboux_sum() {
        // H_k(u,v) = e^{-(u^2+v^2)/4} sum_{n<k} p_n(u) p_n(v): compare the
        // quotient/derivative implementation against the plain sum.
        for k in 1..=5usize {
            for &(u, v) in &[(0.3, 0.3), (0.3, 0.3 + 1e-9), (1.2, -0.7), (-2.0, 3.0)] {
                let pu = orthonormal_values(u, k);
                let pv = orthonormal_values(v, k);
                let s: f64 = (0..k).map(|n| pu[n] * pv[n]).sum();
                let expect = s * (-(u * u + v * v) / 4.0f64).exp();
                let got = hermite_kernel(u, v, k);
                assert!(
                    (got - expect).abs() < 1e-12 * expect.abs().max(1.0),
                    "k={k} u={u} v={v}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn kernel_symmetry() {
        for k in 1..=4usize {
            let a = hermite_kernel(0.4, 1.9, k);
            let b = hermite_kernel(1.9, 0.4, k);
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }
}
