pub mod bifurcation;
pub mod ctnn;
pub mod entropy;
pub mod error;
pub mod lp;
pub mod separation;
pub mod snre;
pub mod spectral;
pub mod treeshift;

pub use error::{Error, Result};
