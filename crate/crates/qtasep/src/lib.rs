//! q-TASEP with a finite number of slower particles: exact event-driven
//! simulation, hydrodynamic constants and phase classification, and numerical
//! evaluation of the three fluctuation limit laws (GUE Tracy-Widom, BBP,
//! largest eigenvalue of a k×k GUE) as Fredholm determinants.
//!
//! In the q-TASEP, particle `k` jumps one site to the right at rate
//! `a_k (1 - q^gap)` where `gap` is the number of empty sites ahead. Started
//! from the step initial condition `x_i(0) = -i` with a few particles slower
//! than the rest, the rescaled position of the `N`-th particle undergoes a
//! BBP-type phase transition in the rate `alpha` of the slowest particle:
//! GUE Tracy-Widom fluctuations when `alpha > q^theta`, a rank-k BBP law at
//! `alpha = q^theta`, and the law of the largest eigenvalue of a k×k GUE
//! (Gaussian for k = 1) when `alpha < q^theta`.
//!
//! Module map:
//! - [`qfun`]: q-Pochhammer, q-Gamma, q-digamma and its derivatives.
//! - [`hydro`]: hydrodynamic constants, phase classification, scaling plans,
//!   limit shape, stationary q-Geometric gap law.
//! - [`saddle`]: the steepest-descent action functions and numeric checks of
//!   their critical-point identities.
//! - [`simulate`]: event-driven simulation and fluctuation sampling.
//! - [`limits`]: limit-law CDFs as Nyström-discretized Fredholm determinants.
//! - [`stats`]: ECDF and Kolmogorov-Smirnov machinery.
//! - [`harness`]: experiment presets, manifests, and reports.

// Guards written as `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod hydro;
pub mod limits;
pub mod qfun;
pub mod quad;
pub mod saddle;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use qfun::QParams;
