//! Fixed-point iterations boosted by exponentiation and averaging.
//!
//! - [`linops`]: matrices, truncated exponential series, Padé [3/3], Google matrix.
//! - [`power`]: simple, exponentiated and truncated power iterations.
//! - [`games`]: strategies, relative entropy, Hedge (naive and log-domain), Euler steps.
//! - [`zerosum`]: averaged-Hedge solvers with certified error for antisymmetric games.
//! - [`replicator`]: RK4 replicator orbits, time averages, Hedge-as-integrator errors.
//! - [`clairvoyant`]: weighted clairvoyant averaging for general symmetric games.
//! - [`eignash`]: the `Δ(X) C X = λ X` eigenvector iteration.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clairvoyant;
pub mod eignash;
pub mod error;
pub mod games;
pub mod io;
pub mod linops;
pub mod power;
pub mod replicator;
pub mod rng;
pub mod zerosum;

pub use error::{Error, Result};
pub use games::{HedgeMode, HedgeParams, Strategy, SymmetricGame};
pub use linops::Matrix;
