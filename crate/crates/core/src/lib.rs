//! Computation of the correct-decoding exponent `E_c(R, alpha)` of a discrete
//! memoryless channel by convergent iterative minimization over joint
//! input/output distributions.
//!
//! * [`prob`]: distributions, channels and divergences.
//! * [`objectives`]: the fixed-rate and fixed-gradient objectives, Gallager's `E0`.
//! * [`updates`]: closed-form minimizers of the fixed-gradient objective.
//! * [`solvers`]: the four iteration schemes and the supporting-plane sweep.
//! * [`oracle`]: brute-force and generic-descent reference minimizers.

pub mod error;
pub mod objectives;
pub mod oracle;
pub mod prob;
pub mod solvers;
pub mod updates;

pub use error::{Error, Result};
pub use objectives::{GradientPoint, RateConstraintPoint};
pub use prob::{Channel, Conditional, DivergenceWeights, JointDistribution};
pub use solvers::{RunReport, Scheme, SolverConfig, SolverOptions};
pub use updates::{Family, FamilyAParams, FamilyBParams};
