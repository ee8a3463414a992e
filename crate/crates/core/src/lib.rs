//! Capacity analysis for cyclic-prefix direct-sequence spread spectrum
//! (CP-DSSS).
//!
//! Symbols are spread by cyclic shifts of a Zadoff-Chu sequence and protected
//! by a cyclic prefix, so after despreading the link is `y = H s + v` with a
//! circulant channel `H`. Every capacity in this crate is evaluated in the
//! spectral domain of that circulant:
//!
//! - [`spectral`]: DFT, circulant algebra and a small dense representation
//!   used to cross-check the spectral fast paths.
//! - [`waveform`]: Zadoff-Chu spreading, cyclic prefix handling and the
//!   sample-level link.
//! - [`channel`]: seeded draws of exponential power-delay-profile channels.
//! - [`precoder`]: equal power, water-filling and time-reversal precoders.
//! - [`capacity`]: single-antenna, rate-reduced and multi-antenna capacity.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod capacity;
pub mod channel;
mod error;
pub mod precoder;
pub mod spectral;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use capacity::{CapacityResult, Direction, ExpanderSpec, LinkConfig};
pub use channel::{ChannelParams, ChannelRealization, RolloffKind};
pub use precoder::{PrecoderKind, PrecoderSpec};
pub use spectral::{CirculantMatrix, DenseMatrix};
pub use waveform::{CpBlock, ZcMatrix};
