//! Atomic decompositions and measure-based synthesis of holomorphic functions
//! on the unit disk, with a Gaussian analogue in the plane.

pub mod error;
pub mod experiments;
pub mod fock;
pub mod geometry;
pub mod lattice;
pub mod measure;
pub mod membership;
mod par;
pub mod quadrature;
pub mod report;
pub mod synthesis;

pub use error::{Error, Result};
pub use geometry::{
    boundary_weight, check_in_disk, hyperbolic_from_pseudo, mobius_map, pseudo_disk, pseudo_disk_area,
    pseudo_distance, ComplexPoint, EuclideanDisk, BOUNDARY_EPS,
};
pub use lattice::{verify_lattice, Lattice, LatticeReport, Ring};
pub use quadrature::{QuadratureScheme, Weight};
pub use report::{default_rho_schedule, SeminormReport, TrendRule, Verdict};
pub use measure::{Atom, Density, Measure};
