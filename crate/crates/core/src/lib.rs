//! A laboratory for the priority branching-tree (BT) model on Simple
//! Knapsack: BT algorithm execution with width accounting, the
//! solver–adversary game with its hard-instance construction, and exhaustive
//! oracles that certify the resulting width lower bounds at small `n`.

pub mod adversary;
pub mod analysis;
pub mod btmodel;
pub mod error;
pub mod knapsack;
pub mod rational;
pub mod record;
pub mod weight;

pub use error::{Error, Result};
pub use knapsack::{Instance, OptResult};
pub use weight::Weight;
