//! Satisfied-user-ratio (SUR) modeling of just-noticeable-difference (JND)
//! data for compressed video.
//!
//! The crate is organised bottom-up:
//!
//! - [`stats`]: JND sample sets, normal fitting, Jarque-Bera testing,
//!   empirical and Q-function SUR curves, JND-point extraction and ΔSUR.
//! - [`bisection`]: the six-round bisection measurement protocol, its
//!   closed-form decomposition and Monte-Carlo campaigns.
//! - [`features`]: spatial-temporal segmentation, PSNR fallback scoring,
//!   significant-segment selection, masking statistics and feature vectors.
//! - [`svr`]: an SMO epsilon-SVR solver and the two-head (μ, log σ) SUR
//!   predictor.
//! - [`eval`]: k-fold cross-validation over the three reference settings.
//! - [`io`]: delimited-text and JSON file formats, manifests and configs.
//! - [`synth`]: synthetic corpora for desk-scale validation.

pub mod bisection;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod rng;
pub mod stats;
pub mod svr;
pub mod synth;

pub use error::{Error, Result};

/// Largest QP on the H.264 ladder.
pub const MAX_QP: u8 = 51;
