//! Equilibrium solver for nonlinear variational systems.
//!
//! The toolkit finds equilibria `∇U(u) = 0` of polynomial potentials by
//! following the gradient flow `du/dt = -∇U(u)`, embedding the polynomial
//! flow into a truncated linear system over tensor powers of the state
//! (Carleman lifting, optionally with a pivot-based closure of the dropped
//! powers), and validating the lifted results against exact classical
//! solvers. A companion module estimates the quantum resources a
//! block-encoded simulation of the lifted system would need.
//!
//! All numerics are generic over the floating-point [`scalar::Scalar`]
//! (`f32` or `f64`); the aliases below fix the common `f64` instantiation.

pub mod carleman;
pub mod dense;
pub mod integrate;
pub mod models;
pub mod oracle;
pub mod polysys;
pub mod psc;
pub mod scalar;
pub mod spectral;

/// `f64` multivariate polynomial.
pub type Polynomial = polysys::Polynomial<f64>;
/// `f64` polynomial vector field.
pub type PolyField = polysys::PolyField<f64>;
/// `f64` truncated lifted system.
pub type LiftedSystem = carleman::LiftedSystem<f64>;
/// `f64` integrator configuration.
pub type IntegratorConfig = integrate::IntegratorConfig<f64>;
/// `f64` trajectory.
pub type Trajectory = integrate::Trajectory<f64>;
/// `f64` spring parameters.
pub type SpringParams = models::SpringParams<f64>;
/// `f64` chain model.
pub type ChainModel = models::ChainModel<f64>;
/// `f64` truss model.
pub type TrussModel = models::TrussModel<f64>;
/// `f64` oracle result.
pub type OracleResult = oracle::OracleResult<f64>;

/// Single-precision aliases for the core lifted types.
pub mod f32_types {
    pub type Polynomial = crate::polysys::Polynomial<f32>;
    pub type PolyField = crate::polysys::PolyField<f32>;
    pub type LiftedSystem = crate::carleman::LiftedSystem<f32>;
    pub type IntegratorConfig = crate::integrate::IntegratorConfig<f32>;
}
