//! Sum-of-squares optimality certificates for unweighted minimum knapsack
//! `min |x|  s.t. |x| >= q` over the Boolean hypercube.

pub mod analysis;
pub mod certlib;
pub mod model;
pub mod numerics;
pub mod oracle;

pub use model::{KnapsackInstance, OptValue};
pub use numerics::{HpFloat, NumericsError, UniPoly};
