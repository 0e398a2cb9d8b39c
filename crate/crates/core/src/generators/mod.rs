//! Net families and transformations.

pub mod chain;
pub mod dnf;
pub mod expand;
pub mod families;
pub mod random;

pub use chain::chain;
pub use dnf::{gen_dnf_net, gen_random_dnf, DnfFormula};
pub use expand::{expand_weights, expand_weights_detailed, Expansion, Gadget, Side};
pub use families::{fork_join, gen_family, redistribution, Family};
