//! Classical image classification: deterministic preprocessing, PCA, multi-class
//! Fisher LDA, seeded affine augmentation and confusion-matrix statistics.
//!
//! The numerical work is done in 64-bit floating point throughout, and every
//! stage that touches a full dataset reads rows in bounded chunks through
//! [`numlin::RowSource`] so resident memory stays proportional to the chunk
//! size rather than to the number of images.

pub mod augment;
pub mod dataset;
pub mod error;
pub mod evalstats;
pub mod imageproc;
pub mod lda;
pub mod numlin;
pub mod pca;
pub mod realfmt;

pub use error::{Error, Result};
