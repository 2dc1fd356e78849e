//! Change-point detection for two-state video scene sequences.
//!
//! The crate starts at the classifier boundary: it consumes per-frame
//! classifier scores, binary labels, or bag-of-visual-words histograms and
//! reports the times (in seconds) where the underlying scene state switches.
//!
//! - [`series`]: containers, timestamps, median and Savitzky-Golay smoothing.
//! - [`bovw`]: per-state k-means codebooks, hard/soft vector quantization,
//!   spatial pyramids and the pyramid match kernel.
//! - [`condense`]: centroid-linkage agglomeration and inconsistency cuts.
//! - [`detect`]: univariate detectors (MSE split, forecasting, MLE, HMM).
//! - [`multi`]: histogram-sequence detectors (chi-squared, match distance,
//!   multivariate MSE).
//! - [`eval`]: windowed precision/recall.
//! - [`synth`]: seeded ground-truth generators.
//! - [`io`]: text file formats shared with the command-line front end.

pub mod bovw;
pub mod condense;
pub mod detect;
pub mod error;
pub mod eval;
pub mod io;
pub mod multi;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use series::{ChangePoint, ChangePointSet, LabelSeries, ScoreSeries};
