//! Compression-forensics toolkit for learned image codecs.
//!
//! Detects traces left by lossy compression pipelines through three
//! complementary cues:
//!
//! * [`cue_color`]: correlations among highpass-residual differences of the
//!   R, G, B channels, induced by color conversion and chroma subsampling.
//! * [`cue_rd`]: a 17-dimensional rate-distortion feature built from three
//!   recompressions of the image under test.
//! * [`cue_quant`]: per-channel correlation between latent coefficients and
//!   their nearest-integer rounding, probing for prior quantization.
//!
//! [`codecs`] provides the codec abstraction with three implementations
//! (a DCT block codec, a simulated latent codec, and a subprocess adapter
//! for external codecs), [`classify`] a self-contained random forest, and
//! [`harness`] a manifest-driven experiment runner behind the CLI.

pub mod classify;
pub mod codecs;
pub mod cue_color;
pub mod cue_quant;
pub mod cue_rd;
pub mod error;
pub mod harness;
pub mod imagecore;
pub mod parallel;

pub use error::{Error, ErrorCategory, Result};
