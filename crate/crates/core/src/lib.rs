//! Weight-parameterized Boolean constraint satisfaction.
//!
//! The crate models instances over the symmetric weight languages `W^A`, the
//! conditional weight languages `CW^A` and explicitly listed relations, and
//! provides:
//!
//! * [`fpt`]: occurrence-profile solvers for `W^E` instances parameterized by
//!   weight plus number of constraints (or total occurrences);
//! * [`machine`]: compilers from instances to bounded-step guess-and-check
//!   machines, a simulator with step accounting, and the completion
//!   reduction that rewrites bounded-member-size languages into `W` and `CW`;
//! * [`partials`]: completions and partial sets of a relation;
//! * [`instances`]: the instance model, a brute-force oracle, seeded
//!   generators and the two instance-level reductions;
//! * [`format`]: JSON documents for instances and machines.

pub mod cli;
pub mod error;
pub mod format;
pub mod fpt;
pub mod instances;
pub mod machine;
pub mod partials;
pub mod relations;
pub mod subset;

pub use error::{Error, Result};
