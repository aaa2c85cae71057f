//! Verification and experimentation toolkit for constrained de Finetti
//! reductions and the multiplicative behaviour of separability support
//! functions.
//!
//! Every inequality handled here is turned into something that can be checked
//! exactly on a computer: a positive-semidefiniteness test on a dense operator,
//! an entropy comparison, or a scalar inequality. Where the quantity of
//! interest is an optimum over a nonconvex set (the separable states), the
//! crate computes certified lower bounds (seesaw, Frank-Wolfe) and upper
//! bounds (symmetric extensions) and reports both.
//!
//! Module map:
//!
//! * [`operator`] dense operator algebra with tensor-factor bookkeeping.
//! * [`info`] fidelities, distances, entropies and measured distances.
//! * [`reduction`] exact checks of the de Finetti operator inequalities.
//! * [`separability`] support functions and distances to the separable set.
//! * [`repetition`] parallel-repetition operators, bounds and the
//!   measurement-conditioning machinery.

// Range checks are written as `!(lo < x && x < hi)` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod info;
pub mod operator;
pub mod reduction;
pub mod repetition;
pub mod rng;
pub mod separability;

pub use error::{Error, Result};
pub use operator::{
    CMatrix, CVector, DensityMatrix, DimCap, Dims, HermitianOperator, KrausChannel,
    PermutationSpec,
};
