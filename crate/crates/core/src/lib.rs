//! Medial axes, three-side disks, internal distances and modulus estimates
//! for polygonal quadrilaterals.

pub mod error;
pub mod geometry;
pub mod medial_axis;
pub mod tridisk;
pub mod geodesic;
pub mod modulus;
pub mod bounds;
pub mod approximation;
pub mod corpus;
pub mod io;
pub mod render;
pub mod report;

pub use error::*;
pub use geometry::{BoundaryFeature, Point, PolygonalQuadrilateral, SideLabel, SideSet};
pub use medial_axis::{compute_medial_axis, maximal_disk, MedialAxisGraph};
pub use tridisk::{brute_force_three_side_disk, classify_contacts, find_three_side_disk, ContactDisk};
