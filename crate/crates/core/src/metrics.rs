//! Precision, recall and F-measure per evaluation pair, and their means.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matching::MatchOutcome;
use crate::similarity::EvalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Mean per video, then mean of the per-video means.
    #[default]
    PerVideo,
    /// Mean over all pairs.
    Flat,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::PerVideo => "per-video",
            Aggregation::Flat => "flat",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-video" => Ok(Aggregation::PerVideo),
            "flat" => Ok(Aggregation::Flat),
            _ => Err(format!("unknown aggregation {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub video_id: String,
    pub auto_label: String,
    pub user_label: String,
    pub n_auto: usize,
    pub n_user: usize,
    pub n_matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn scores_from_counts(
    n_matched: usize,
    n_auto: usize,
    n_user: usize,
) -> Result<(f64, f64, f64)> {
    if n_auto == 0 || n_user == 0 {
        return Err(Error::EmptySummary(format!(
            "n_auto={n_auto}, n_user={n_user}"
        )));
    }
    let precision = n_matched as f64 / n_auto as f64;
    let recall = n_matched as f64 / n_user as f64;
    Ok((precision, recall, f_measure(precision, recall)))
}

pub fn pair_scores(
    outcome: &MatchOutcome,
    video_id: &str,
    auto_label: &str,
    user_label: &str,
) -> Result<PairScores> {
    let (precision, recall, f_measure) =
        scores_from_counts(outcome.n_matched, outcome.n_auto, outcome.n_user)?;
    Ok(PairScores {
        video_id: video_id.to_owned(),
        auto_label: auto_label.to_owned(),
        user_label: user_label.to_owned(),
        n_auto: outcome.n_auto,
        n_user: outcome.n_user,
        n_matched: outcome.n_matched,
        precision,
        recall,
        f_measure,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub pairs: Vec<PairScores>,
    pub per_video_mean_f: BTreeMap<String, f64>,
    pub overall_mean_f: f64,
    pub config: EvalConfig,
    pub aggregation: Aggregation,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub fn aggregate(
    pairs: Vec<PairScores>,
    config: EvalConfig,
    aggregation: Aggregation,
) -> Result<EvaluationReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let mut by_video: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for p in &pairs {
        by_video
            .entry(p.video_id.clone())
            .or_default()
            .push(p.f_measure);
    }
    let per_video_mean_f: BTreeMap<String, f64> =
        by_video.into_iter().map(|(v, fs)| (v, mean(fs))).collect();
    let overall_mean_f = match aggregation {
        Aggregation::PerVideo => mean(per_video_mean_f.values().copied()),
        Aggregation::Flat => mean(pairs.iter().map(|p| p.f_measure)),
    };
    Ok(EvaluationReport {
        pairs,
        per_video_mean_f,
        overall_mean_f,
        config,
        aggregation,
    })
}
