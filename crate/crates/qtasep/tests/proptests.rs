//! Property tests over the public surface.

use num_complex::Complex64;
use proptest::prelude::*;

use qtasep::hydro::{self, RateProfile};
use qtasep::qfun::{self, QParams, SeriesTolerance};
use qtasep::stats::EmpiricalDistribution;

fn q_strategy() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// (z; q)_{n+1} = (z; q)_n (1 - z q^n).
    #[test]
    fn qpoch_recurrence(re in -2.0f64..2.0, im in -2.0f64..2.0, qv in q_strategy(), n in 0u32..20) {
        let q = QParams::new(qv).unwrap();
        let z = Complex64::new(re, im);
        let lhs = qfun::qpoch_finite(z, q, n + 1);
        let rhs = qfun::qpoch_finite(z, q, n) * (Complex64::new(1.0, 0.0) - z * qv.powi(n as i32));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    /// Finite products converge to the infinite one as n grows.
    #[test]
    fn qpoch_finite_approaches_infinite(re in -0.9f64..0.9, qv in q_strategy()) {
        let q = QParams::new(qv).unwrap();
        let z = Complex64::new(re, 0.0);
        let tol = SeriesTolerance::default();
        let inf = qfun::qpoch_inf(z, q, &tol).unwrap();
        let fin = qfun::qpoch_finite(z, q, 2000);
        prop_assert!((fin - inf).norm() <= 1e-11 * inf.norm().max(1e-10));
    }

    /// Phase classification is total and consistent with the sign of
    /// alpha - q^theta.
    #[test]
    fn phase_classification_total(qv in 0.1f64..0.95, theta in 0.1f64..4.0, alpha in 0.05f64..1.0) {
        let q = QParams::new(qv).unwrap();
        let profile = if alpha < 1.0 {
            RateProfile::new(vec![(1, alpha)]).unwrap()
        } else {
            RateProfile::homogeneous()
        };
        let phase = hydro::classify_phase(q, theta, &profile, hydro::DEFAULT_BOUNDARY_TOL).unwrap();
        let qt = q.pow(theta);
        match phase {
            hydro::Phase::Gue => prop_assert!(alpha >= qt),
            hydro::Phase::Gaussian => prop_assert!(alpha <= qt),
            hydro::Phase::Critical => prop_assert!((alpha - qt).abs() <= 1e-10),
        }
    }

    /// xi <-> position round trip is the identity.
    #[test]
    fn scaling_roundtrip(qv in 0.2f64..0.9, theta in 0.3f64..2.0, c in -1.5f64..1.5, xi in -5.0f64..5.0) {
        let q = QParams::new(qv).unwrap();
        let plan = hydro::scaling_plan(q, theta, c, 512, &RateProfile::homogeneous()).unwrap();
        let back = plan.xi_of_position(plan.position_of_xi(xi));
        prop_assert!((back - xi).abs() <= 1e-9);
    }

    /// q-Geometric pmf is a probability distribution.
    #[test]
    fn qgeom_normalized(r in 0.0f64..0.95, qv in q_strategy()) {
        let q = QParams::new(qv).unwrap();
        let total: f64 = (0..400).map(|k| hydro::qgeom_pmf(r, q, k).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        prop_assert!(hydro::qgeom_pmf(r, q, 3).unwrap() >= 0.0);
    }

    /// ECDF is a CDF and the KS statistic is within [0, 1].
    #[test]
    fn ecdf_and_ks_bounds(mut samples in prop::collection::vec(-50.0f64..50.0, 1..200)) {
        samples.iter_mut().for_each(|x| *x = x.round() / 7.0); // force ties sometimes
        let d = EmpiricalDistribution::new(samples).unwrap();
        let mut prev = 0.0;
        for i in -20..=20 {
            let v = d.ecdf(i as f64);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev);
            prev = v;
        }
        let ks = d.ks_statistic(qtasep::stats::normal_cdf);
        prop_assert!((0.0..=1.0).contains(&ks));
    }
}
