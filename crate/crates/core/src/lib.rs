//! Workflow nets, their continuous and integer relaxations, an explicit-state
//! oracle, reduction rules and net generators.

pub mod error;
pub mod generators;
pub mod io;
pub mod lp;
pub mod marking;
pub mod net;
pub mod oracle;
pub mod rational;
pub mod reductions;
pub mod relaxations;
pub mod workflow;

pub use error::NetError;
pub use marking::{Marking, ParikhVector, RationalMarking};
pub use net::{Net, NetSpec, PlaceId, TransitionId, TransitionSpec, Weights};
pub use rational::Rational;
