//! Generative LUT color grading toolkit.
//!
//! The crate covers the full non-VLM stack of a token-based grading system:
//!
//! - [`lut`]: the 3D-LUT data model, trilinear application, resampling,
//!   composition, and the color perturbation family used for augmentation.
//! - [`io`]: `.cube` parsing/serialization, PNG/PPM images, token files,
//!   and LUT-library manifests.
//! - [`metrics`]: sRGB→CIELAB, CIEDE2000, PSNR, and the color/aesthetic
//!   reward functions.
//! - [`nn`]: a minimal reverse-mode differentiation core (3D convolutions,
//!   activations, Adam) backing the tokenizer and the policy.
//! - [`tokenizer`]: a VQ-VAE that compresses a 32³ LUT into 64 discrete
//!   tokens with an EMA-updated codebook.
//! - [`curation`]: PCA + k-means LUT-library fusion and dataset-pair
//!   construction with disjoint train/eval splits.
//! - [`policy`]: a small conditional autoregressive model over LUT tokens.
//! - [`grpo`]: group-relative policy optimization over sampled token
//!   sequences with composite color/aesthetic rewards.



pub mod error;
pub mod io;


pub mod lut;
pub mod metrics;
pub mod nn;



pub use error::{Error, Result};
