//! Nystrom discretization of Fredholm determinants.

use crate::quad::gauss_legendre_on;

/// `det(I - D K D)` where `K[p][q] = kernel(u_p, u_q)` on Gauss-Legendre
/// nodes for `[x, x + l_dom]` and `D = diag(sqrt(weights))`.
///
/// The kernel closure receives the full node list and returns the dense
/// row-major matrix (some kernels are much cheaper to assemble in bulk).
pub(crate) fn nystrom_det(
    x: f64,
    l_dom: f64,
    m: usize,
    kernel_matrix: impl FnOnce(&[f64]) -> Vec<f64>,
) -> f64 {
    let (nodes, weights) = gauss_legendre_on(m, x, x + l_dom);
    let k = kernel_matrix(&nodes);
    debug_assert_eq!(k.len(), m * m);
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut a = vec![0.0; m * m];
    for p in 0..m {
        for q in 0..m {
            let delta = if p == q { 1.0 } else { 0.0 };
            a[p * m + q] = delta - sw[p] * k[p * m + q] * sw[q];
        }
    }
    det_full_pivot(&mut a, m)
}

/// Determinant by LU with full pivoting.
pub(crate) fn det_full_pivot(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        // Largest remaining entry.
        let (mut pi, mut pj, mut best) = (k, k, 0.0f64);
        for i in k..n {
            for j in k..n {
                let v = a[i * n + j].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pi != k {
            for j in 0..n {
                a.swap(k * n + j, pi * n + j);
            }
            det = -det;
        }
        if pj != k {
            for i in 0..n {
                a.swap(i * n + k, i * n + pj);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
    }
    det
}
