//! Generalized directional derivatives of piecewise-polynomial maps over
//! hyperplane arrangements, together with numerical verifiers for the
//! first-order approximation conditions used by semismooth Newton and
//! subgradient methods.

pub mod conditions;
pub mod corpus;
pub mod geometry;
pub mod oracles;
pub mod piecewise;
pub mod report;
pub mod rng;
pub mod selftest;
pub mod solvers;
#[doc(hidden)]
pub mod testing;
pub mod verdict;
