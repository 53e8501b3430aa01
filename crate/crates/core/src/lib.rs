//! Joint transmit-power and fronthaul-rate spectrum allocation for an oblivious
//! relay over a frequency-selective Gaussian channel.
//!
//! The relay compresses what it receives without knowing the user's codebook, so
//! the end-to-end rate in each frequency band is the scalar Gaussian information
//! bottleneck value for that band's SNR and fronthaul rate. The modules build up
//! from that scalar function:
//!
//! - [`gib`]: the information-rate function `I(C)` and its per-Hz density.
//! - [`branch`]: per-frequency stationary points, concave-branch selection and the
//!   concavity/sign dividing curve.
//! - [`spectral`]: the continuous-frequency solver over a sampled channel.
//! - [`baselines`]: water-pouring, uniform and limited-rate water-pouring, plus
//!   the flat-channel bandwidth sweep.
//! - [`mm`]: the finite-processing-time problem over Karhunen–Loève eigenvalues,
//!   solved by majorization-minimization.
//! - [`quantizer`]: stochastic versus sign quantizer mutual information.
//! - [`oracle`]: brute-force grid optimizers used to check both solvers.
//!
//! All rates are in nats; the noise spectral density is normalized to one.

pub mod baselines;
pub mod branch;
pub mod channel;
pub mod error;
pub mod gib;
pub mod mm;
mod numeric;
pub mod oracle;
pub mod quantizer;
pub mod spectral;

pub use channel::{Allocation, ChannelGrid};
pub use error::{Error, Result};
