//! Scores automatic video summaries against user (ground-truth) summaries.
//!
//! Keyframes are compared on two features: a joint HSV color histogram and a
//! Haar wavelet texture descriptor. Both are treated as discrete distributions
//! and compared with the Bhattacharyya coefficient. Automatic frames are paired
//! greedily with user frames, and each pair of summaries gets precision, recall
//! and F-measure.
//!
//! ```no_run
//! use sumeval_core::{load_manifest, evaluate, RunOptions};
//!
//! let job = load_manifest("manifest.json".as_ref())?;
//! let run = evaluate(&job, &RunOptions::default())?;
//! println!("mean F = {}", run.report.overall_mean_f);
//! # Ok::<(), sumeval_core::Error>(())
//! ```

pub mod cache;
pub mod color;
pub mod dataset_io;
pub mod error;
pub mod fixture;
pub mod matching;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod similarity;
pub mod texture;

pub use color::{color_histogram, quantize_hsv, ColorHistogram};
pub use dataset_io::{
    decode_frame, load_manifest, rgb_to_hsv, EvaluationJob, FrameImage, HsvImage,
};
pub use error::{Error, Result};
pub use matching::{match_summaries, FrameFeatures, MatchOutcome, SummaryKind, SummarySet};
pub use metrics::{aggregate, pair_scores, Aggregation, EvaluationReport, PairScores};
pub use pipeline::{evaluate, RunArtifacts, RunOptions};
pub use similarity::{
    bhattacharyya, is_color_matched, is_texture_matched, EvalConfig, MatchMode, SimilarityScore,
};
pub use texture::{haar_approx, resize_to_64, texture_descriptor, TextureDescriptor};
