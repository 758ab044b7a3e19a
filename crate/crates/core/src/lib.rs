//! Controllability and observability analysis for linear networked systems
//! with finite symmetry groups.
//!
//! The pipeline is:
//!
//! 1. describe a network ([`network::NetworkSpec`]) and the permutation group
//!    acting on its nodes ([`permgroup::PermutationGroup`]);
//! 2. attach real irreducible representations of that group
//!    ([`representations`]);
//! 3. split the state space into isotypic components and symmetry adapted
//!    blocks ([`isotypic::decompose`]);
//! 4. bound and construct sparse input/output matrices ([`control`]).

pub mod control;
pub mod error;
pub mod io;
pub mod isotypic;
pub mod linalg;
pub mod network;
pub mod permgroup;
pub mod representations;

pub use error::{Error, Result};
pub use linalg::Tolerance;
