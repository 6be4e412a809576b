pub mod asdim;
pub mod cert;
pub mod chains;
pub mod cli;
pub mod covers;
pub mod group;
pub mod lattice;
pub mod oracle;
#[cfg(test)]
mod proptests;
pub mod systems;

pub use group::{Coord, GroupError};

pub type Element = group::GroupElement<i64>;
pub type Subset = group::FiniteSubset<i64>;
