//! Shared fixtures for the assembly benchmarks.

use eddykit_core::mesh::{icosphere, kuhn_cube};
use eddykit_core::quadrature::QuadConfig;
use eddykit_core::spaces::{build_spaces, SpaceSet};
use eddykit_core::{MaterialConfig, TetMesh};

/// Unit coefficients with the default penalty.
pub fn unit_materials() -> MaterialConfig {
    MaterialConfig::uniform(1.0, 1.0, 1.0, 1.0, 10.0)
}

pub struct Fixture {
    pub name: &'static str,
    pub mesh: TetMesh,
    pub spaces: SpaceSet,
    pub quad: QuadConfig,
}

impl Fixture {
    fn new(name: &'static str, mesh: TetMesh) -> Self {
        let spaces = build_spaces(&mesh, 1).expect("lowest-order spaces");
        Fixture {
            name,
            mesh,
            spaces,
            quad: QuadConfig::for_order(1),
        }
    }
}

/// The unit cube split into 6 tets and the coarsest icosphere.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture::new("cube1", kuhn_cube(1)),
        Fixture::new("sphere0", icosphere(0)),
    ]
}
