//! Sample-based optimal-transport distances between finite Markov chains.
//!
//! The distance is the value of a linear program over occupancy couplings,
//! solved by a stochastic primal-dual method that only sees sampled
//! transitions of each chain. An exact dynamic-programming oracle and a
//! rounding procedure onto the feasible set are included for validation.

pub mod chain;
pub mod cost;
pub mod coupling;
pub mod error;
pub mod harness;
mod linalg;
pub mod oracle;
pub mod rounding;
pub mod sampler;
pub mod solver;
pub mod transport;

pub use chain::{exact_occupancy, make_block_lift, make_random_walk, MarkovChain, OccupancyTable};
pub use cost::CostMatrix;
pub use coupling::{
    ConditionalKernel, ConstraintResiduals, Dims, DualVariables, JointInitial, OccupancyCoupling,
};
pub use error::{Error, Result};
pub use sampler::{TransitionPair, TransitionSampler};
