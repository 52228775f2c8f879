pub mod bem;
pub mod coupled;
pub mod cvec;
pub mod dg;
pub mod error;
pub mod manufactured;
pub mod material;
pub mod mesh;
pub mod quadrature;
pub mod spaces;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use material::{MaterialConfig, RegionMaterial};
pub use mesh::{TetMesh, Vec3};
