pub mod catalog;
pub mod convergence;
pub mod critical;
pub mod disc_grid;
pub mod error;
pub mod geometry;
pub mod vekua;
pub mod verify;

pub use disc_grid::{ComplexField, DiscGrid, Direction, Field, ScalarField, Vec4Field};
pub use error::{Error, Result};
