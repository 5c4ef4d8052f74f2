//! Monte-Carlo oracle for `G_k`: sampling the largest eigenvalue of a
//! k x k GUE matrix with weight `e^{-t^2/2}` per eigenvalue.
//!
//! The ensemble: Hermitian with iid `N(0,1)` diagonal and off-diagonal
//! entries `(X + iY)/sqrt(2)`, `X, Y ~ N(0,1)`; its eigenvalue density is
//! proportional to `prod_{i<j} (l_i - l_j)^2 prod_i e^{-l_i^2/2}`, matching
//! the Hermite-kernel normalization.

use num_complex::Complex64;
use rand::Rng;

/// Standard normal draw (Box-Muller; two uniforms per call).
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Largest eigenvalue of one GUE sample. Closed form for k <= 2, cyclic
/// Jacobi for 3 <= k <= 8.
pub fn gue_largest_eig_sample(k: usize, rng: &mut impl Rng) -> f64 {
    assert!((1..=8).contains(&k), "GUE oracle supports 1 <= k <= 8");
    match k {
        1 => standard_normal(rng),
        2 => {
            let a = standard_normal(rng);
            let d = standard_normal(rng);
            let b = Complex64::new(standard_normal(rng), standard_normal(rng))
                / std::f64::consts::SQRT_2;
            let mid = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            mid + r
        }
        _ => {
            let mut m = sample_gue_matrix(k, rng);
            let eigs = hermitian_eigenvalues(&mut m, k);
            eigs.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// All eigenvalues of one GUE sample (k <= 8).
pub fn gue_eigenvalues_sample(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!((1..=8).contains(&k));
    let mut m = sample_gue_matrix(k, rng);
    hermitian_eigenvalues(&mut m, k)
}

fn sample_gue_matrix(k: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        m[i * k + i] = Complex64::new(standard_normal(rng), 0.0);
        for j in i + 1..k {
            let e = Complex64::new(standard_normal(rng), standard_normal(rng))
                / std::f64::consts::SQRT_2;
            m[i * k + j] = e;
            m[j * k + i] = e.conj();
        }
    }
    m
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi with complex
/// rotations; the matrix is destroyed.
pub(crate) fn hermitian_eigenvalues(a: &mut [Complex64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[q * n + q].re - a[p * n + p].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- U^H A U with U_pp = c, U_pq = s*phase,
                // U_qp = -s*conj(phase), U_qq = c.
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * c - aiq * s * phase.conj();
                    a[i * n + q] = aip * s * phase + aiq * c;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = apj * c - aqj * s * phase;
                    a[q * n + j] = apj * s * phase.conj() + aqj * c;
                }
                // Keep Hermitian structure exact on the pivot pair.
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn k1_is_standard_normal() {
        let mut r = rng(1);
        let n = 200_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let x = gue_largest_eig_sample(1, &mut r);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt() * 1.0, "{mean}");
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn k2_trace_identity() {
        // lambda_max + lambda_min = trace for k = 2.
        let mut r = rng(2);
        for _ in 0..100 {
            let a = standard_normal(&mut r);
            let d = standard_normal(&mut r);
            let b = Complex64::new(standard_normal(&mut r), standard_normal(&mut r))
                / std::f64::consts::SQRT_2;
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            let (lmax, lmin) = (mid + rad, mid - rad);
            assert!((lmax + lmin - (a + d)).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobi_matches_closed_form_k2() {
        let mut r = rng(3);
        for _ in 0..200 {
            let mut m = sample_gue_matrix(2, &mut r);
            let trace = m[0].re + m[3].re;
            let mid = 0.5 * trace;
            let rad = (0.25 * (m[0].re - m[3].re).powi(2) + m[1].norm_sqr()).sqrt();
            let mut eigs = hermitian_eigenvalues(&mut m, 2);
            eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!((eigs[0] - (mid - rad)).abs() < 1e-12);
            assert!((eigs[1] - (mid + rad)).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_invariants_k3_to_k5() {
        let mut r = rng(4);
        for k in 3..=5usize {
            for _ in 0..50 {
                let m = sample_gue_matrix(k, &mut r);
                let trace: f64 = (0..k).map(|i| m[i * k + i].re).sum();
                let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
                let mut mm = m.clone();
                let eigs = hermitian_eigenvalues(&mut mm, k);
                let sum: f64 = eigs.iter().sum();
                let sumsq: f64 = eigs.iter().map(|l| l * l).sum();
                assert!((sum - trace).abs() < 1e-10, "trace k={k}");
                assert!((sumsq - frob).abs() < 1e-9, "frobenius k={k}");
            }
        }
    }
}
