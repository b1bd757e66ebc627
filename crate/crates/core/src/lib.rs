//! Leading-order semiclassical asymptotics of the Green kernel of a Dirac
//! operator `α·(−ih∇) + α₀ + V` with a smooth scalar potential.
//!
//! The pipeline is:
//!
//! 1. [`clifford`]: Dirac matrices and the projections `Λ±(ζ)`.
//! 2. [`potential`]: smooth potential families with closed-form derivatives.
//! 3. [`geoflow`]: Hamiltonian flow on `{H = 0}`, Jacobi fields, geodesic
//!    shooting, the Agmon distance and the exponential-map determinant.
//! 4. [`transport`]: the unitary spinor transport `U(t)` and the matrix
//!    factor `M(x, y)`.
//! 5. [`kernel`]: the leading-order kernel and the exact constant-potential
//!    kernel built from modified Bessel functions.
//! 6. [`oracle1d`]: an essentially exact one-dimensional Green kernel from
//!    matched decaying solutions.
//! 7. [`bmt`]: the three-dimensional spin-transport (BMT) picture.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the tolerances in
//! the documentation and tests refer to.

pub mod bessel;
pub mod bmt;
pub mod clifford;
pub mod error;
pub mod geoflow;
pub mod kernel;
pub mod linalg;
pub mod ode;
pub mod oracle1d;
pub mod potential;
pub mod quad;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type DiracRep64 = clifford::DiracRep<f64>;
pub type Projector64 = clifford::Projector<f64>;
pub type PotentialModel64 = potential::PotentialModel<f64>;
pub type Trajectory64 = geoflow::Trajectory<f64>;
pub type GeodesicSolution64 = geoflow::GeodesicSolution<f64>;
pub type TransportResult64 = transport::TransportResult<f64>;
pub type KernelEstimate64 = kernel::KernelEstimate<f64>;
pub type JostSolution64 = oracle1d::JostSolution<f64>;
pub type SpinTransportResult64 = bmt::SpinTransportResult<f64>;

pub type DiracRep32 = clifford::DiracRep<f32>;
pub type PotentialModel32 = potential::PotentialModel<f32>;
pub type GeodesicSolution32 = geoflow::GeodesicSolution<f32>;
