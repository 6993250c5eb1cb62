//! Direct numerical solver for fractional variational problems.
//!
//! Minimizes functionals of the form
//! J[x] = ∫ₐᵇ L(t, x(t), ₐDₜᵅx(t), ẋ(t)) dt
//! over trajectories with fixed endpoints, where ₐDₜᵅ is a left
//! Riemann–Liouville derivative of order α ∈ (0, 1). The derivative is
//! discretized by the shifted Grünwald–Letnikov expansion on a uniform
//! mesh, the integral by a rectangle rule, and the resulting stationarity
//! system is solved either as a linear system (detected automatically) or
//! by a damped Newton iteration.

// Validation guards negate float comparisons so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fracnum;
pub mod model;
pub mod solve;
pub mod special;

pub use assemble::{DiscretizedProblem, Mesh};
pub use error::{Error, Result};
pub use model::{Lagrangian, Trajectory, VariationalProblem};
pub use solve::{solve, ForcePath, SolveOptions, SolvePath, SolveReport};
pub use special::GlWeights;
