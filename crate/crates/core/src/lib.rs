//! Lie sphere geometry of channel surfaces.
//!
//! Channel surfaces are built as envelopes of sphere curves, carried as
//! discrete Legendre maps (grids of contact elements in R^{4,2}) and equipped
//! with their closed 1-form `eta`. On top of that sit the Lie-Darboux and
//! Calapso transforms, Ribaucour pair checks, Ribaucour cyclide congruences
//! and the reduction of everything to curves in conformal 3-space.

pub mod channel;
pub mod conformal;
pub mod curve;
pub mod error;
pub mod grid;
pub mod legendre;
pub mod lie;
pub mod mesh;
pub mod ode;
pub mod subspace;
pub mod surfaces;
pub mod transforms;

pub use conformal::ConformalCurve;
pub use curve::{CenterCurve, RadiusProfile, SphereCurve};
pub use error::{Error, Result};
pub use grid::{Axis, LegendreGrid, StencilOrder};
pub use lie::{
    inner, plane_lift, project_to_euclidean, sphere_lift, wedge, EuclideanSphere, LiePoint, LieVec,
    SkewMap, Vec3,
};
pub use mesh::MeshOutput;
pub use subspace::{Signature, Subspace};
pub use transforms::DupinCyclide;
