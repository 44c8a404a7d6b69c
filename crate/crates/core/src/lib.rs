//! Constant-curvature model geometries and their discrete quotients.
//!
//! The crate provides:
//!
//! - the spherical, flat and hyperbolic model spaces as quadrics in
//!   R^{n+1}, with metric, geodesics, volumes and triangle trigonometry
//!   ([`model`]);
//! - form-preserving isometries, quaternion twists of the 3-sphere, and
//!   finitely generated discrete groups with word enumeration
//!   ([`isometry`], [`group`]);
//! - verified quotients: free and discontinuous actions, Dirichlet
//!   canonical forms, covering projections, path lifting and deck
//!   transformations ([`quotient`]);
//! - the flat torus swept by twist parallels inside the 3-sphere, the
//!   fibration of the 3-sphere over the 2-sphere, and fibre linking
//!   numbers ([`clifford`], [`hopf`]);
//! - observational signatures of a multiply connected space: ghost-image
//!   catalogs, volume bounds, parallax curvature bounds, and image-sum
//!   gravity ([`cosmos`]).

pub mod clifford;
pub mod cosmos;
pub mod error;
pub mod files;
pub mod group;
pub mod hopf;
pub mod isometry;
pub mod model;
pub mod quat;
pub mod quotient;

pub use nalgebra;

pub use error::{Error, Result};
pub use group::{finite_spherical_group, DiscreteGroup, GroupKind, SphericalGroupKind};
pub use isometry::{left_twist, right_twist, Isometry};
pub use model::{AmbientPoint, Curvature, ModelSpace, TangentVector};
pub use quat::Quaternion;
pub use quotient::{verify_space_form, QuotientPoint, SpaceForm, VerifyOutcome};
