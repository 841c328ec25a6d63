//! Multivariate neural network approximation operators activated by
//! sigmoidal functions.
//!
//! The crate builds the density kernel `rho` of a sigmoidal activation and
//! uses it to approximate a target `h` from its samples `h(k / n)` with four
//! operators: the classical (normalized sum) operator, the max-product
//! operator, the max-min operator and the max-min quasi-interpolation
//! operator on `Z^r`. The [`analysis`] module measures sup-norm errors,
//! moduli of continuity, Jackson-type bounds and empirical convergence
//! orders.
//!
//! ```
//! use maxmin::{max_min_nn, Activation, BoxDomain, KernelProfile, TargetFunction};
//!
//! let profile = KernelProfile::new(Activation::Logistic, 2)?;
//! let h = TargetFunction::table1();
//! let value = max_min_nn(&h, 100, &BoxDomain::unit(2), &profile, &[0.5, 0.5])?;
//! assert!((value - h.eval(&[0.5, 0.5])).abs() < 0.02);
//! # Ok::<(), maxmin::Error>(())
//! ```

pub mod activation;
pub mod analysis;
pub mod domain;
pub mod error;
mod fit;
pub mod grid;
pub mod kernel;
pub mod operators;
pub mod target;
pub mod verify;
mod window;

pub use activation::{
    check_conditions, Activation, ConditionFlags, ConditionReport, DecayExponent, DecayFit,
    SamplingGrid,
};
pub use analysis::{
    bound_sweep, compare_operators, empirical_order, jackson_bound, lipschitz_rate,
    modulus_of_continuity, modulus_resolution, sup_norm_error, BoundReport, BoundSettings,
    ErrorRow, ErrorTable, ModulusEstimate, RateExponents, TableMetadata, MOMENT_SAFETY_FACTOR,
};
pub use domain::{build_lattice, BoxDomain, GridSpec, LatticeIndexSet};
pub use error::{Error, Result};
pub use grid::{evaluate_on_grid, FieldMetadata, GridField, TruncationReport};
pub use kernel::{
    absolute_moment, default_tail_epsilon, lattice_max_rho, lattice_max_rho_unbounded, phi,
    truncation_radius, KernelProfile, MomentEstimate, DEFAULT_TAIL_EPSILON,
};
pub use operators::{
    classical_nn, extended_max_min, max_min_nn, max_product_nn, quasi_interpolation_max_min,
    Evaluation, Evaluator, LatticeMode, OperatorKind, PointStats, Regime,
};
pub use target::{RangeClass, Support, TargetFunction};
pub use verify::{
    run_properties, run_suite, Outcome, PropertyResult, SuiteConfig, SuiteReport, PROPERTIES,
};

// The guide's code listings run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/activations.md")]
    mod activations {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/quasi_interpolation.md")]
    mod quasi_interpolation {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/properties.md")]
    mod properties {}
}
