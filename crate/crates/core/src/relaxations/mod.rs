//! Solver-free decision procedures over the continuous and integer relaxations.

pub mod boundedness;
pub mod creach;
pub mod maxfs;
pub mod redundancy;
pub mod scaling;

pub use boundedness::{check_integer_boundedness, is_unboundedness_witness, Boundedness};
pub use creach::{decide_creach, verify_creach_certificate, CreachCertificate, CreachResult};
pub use maxfs::{is_valid_layering, max_fireable_set, FireableSet};
pub use redundancy::{is_nonredundant, remove_redundant_places, PruneFailure, Pruned};
pub use scaling::{rescale_run, to_continuous, to_discrete, ContinuousRun, Direction, Run, ScalingError};
