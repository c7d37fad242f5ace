//! Feedback-induced criticality in a driven spin coupled to a measured cavity mode.
//!
//! Numerical core is generic over [`Real`] (`f32`/`f64`); the aliases below fix `f64`.

pub mod bath;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod numerics;
pub mod scalar;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Kernel = kernels::FeedbackKernel<f64>;
pub type Params = spectral::ModelParams<f64>;
pub type Bath = bath::BathSpec<f64>;
pub type TrajConfig = trajectory::TrajectoryConfig<f64>;
pub type Record = trajectory::TrajectoryRecord<f64>;
