//! Quantization and entropy coding of piecewise-constant jump processes on
//! `[0, 1)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaces`]: state spaces with a distortion measure, ε-nets and covering
//!   numbers;
//! * [`paths`]: the [`JumpPath`](paths::JumpPath) data model and the exact
//!   `L¹`-type path distortion;
//! * [`sim`]: seeded samplers for Poisson-driven jump processes;
//! * [`quantizer`]: fixed-size codebooks for jump positions and values and
//!   the composite path codebook;
//! * [`entropycoder`]: a bit-exact variable-rate path coder;
//! * [`bounds`]: analytic rate envelopes and lower-bound constants;
//! * [`harness`]: Monte Carlo rate–distortion experiments and brute-force
//!   oracles.
//!
//! Geometry is generic over the [`Scalar`] type (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! harness and the command-line tool use.

pub mod bounds;
pub mod entropycoder;
pub mod error;
pub mod harness;
pub mod paths;
pub mod quantizer;
pub mod scalar;
pub mod sim;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = spaces::Point<f64>;
pub type DistortionSpace = spaces::DistortionSpace<f64>;
pub type JumpPath = paths::JumpPath<f64>;
pub type Reconstruction = paths::Reconstruction<f64>;
pub type ProcessSpec = sim::ProcessSpec<f64>;
pub type IncrementLaw = sim::IncrementLaw<f64>;
pub type ValueCodebook = quantizer::ValueCodebook<f64>;
pub type CompositePathCodebook = quantizer::CompositePathCodebook<f64>;
pub type CoderConfig = entropycoder::CoderConfig<f64>;

pub type JumpPath32 = paths::JumpPath<f32>;
pub type DistortionSpace32 = spaces::DistortionSpace<f32>;
