//! Verification engine for 3-dimensional electrostatic systems.
//!
//! The crate evaluates the curvature stack of a metric given in closed form
//! on a coordinate chart (Christoffel symbols through the Bach tensor and its
//! divergences), the residuals of the electrostatic field equations with a
//! cosmological constant, and the identities relating the Cotton tensor to
//! the lapse and electric field. Derivatives come from truncated Taylor
//! arithmetic up to order six, with a finite-difference fallback.

pub mod catalog;
pub mod curvature;
pub mod electrostatic;
pub mod error;
pub mod fd;
pub mod geom;
pub mod jet;
pub mod kv;
pub mod quadrature;
pub mod roots;
pub mod tensor;
pub mod warped;

pub use catalog::{
    build_solution, verify_solution, ResidualReport, SolutionKind, SolutionSpec, ToleranceProfile,
    VerifyOptions,
};
pub use curvature::{
    bach, bach_divergences, christoffel, cotton, covariant_derivative, curvature_stack,
    BachDivergences, CottonPack, CurvaturePack, TensorField,
};
pub use electrostatic::{
    fc_equals_v_check, ld_profile, ld_v_tensor_check, residual_suite, v_tensor,
    ElectrostaticSystem, LDProfile, ResidualBundle,
};
pub use error::{Error, Result};
pub use geom::{
    derive_scalar, eval_metric, exterior_derivative_oneform, Chart, DiffConfig, DiffStrategy,
    MetricChart, MetricField, Point, ScalarField, VectorField,
};
pub use jet::Jet;
pub use roots::{rnds_lapse_roots, HorizonRoot};
pub use tensor::{MetricValues, TensorComponents, Variance};
pub use warped::{
    level_set_data, rho_squared_reconstruct, ricci_eigenframe, warp_build, warped_curvature_check,
    Fiber, LapseProfile, LevelSetData, WarpedProduct, WarpedSpec,
};
