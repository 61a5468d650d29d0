//! Greedy first-match pairing of automatic keyframes against a user summary.
//!
//! Automatic frames are visited in frame-id order. Each one takes the first
//! remaining user frame (also in frame-id order) that satisfies the configured
//! match predicate, and that user frame is removed from the list. The scan stops
//! once every user frame has been consumed.

use std::collections::HashSet;

use crate::color::ColorHistogram;
use crate::error::{Error, Result};
use crate::similarity::{color_similarity, texture_similarity, EvalConfig, SimilarityScore};
use crate::texture::TextureDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SummaryKind {
    Automatic,
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub frame_id: u64,
    pub color: ColorHistogram,
    pub texture: TextureDescriptor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummarySet {
    pub video_id: String,
    pub kind: SummaryKind,
    pub label: String,
    frames: Vec<FrameFeatures>,
}

impl SummarySet {
    /// Sorts frames by id. Duplicate ids are rejected.
    pub fn new(
        video_id: impl Into<String>,
        kind: SummaryKind,
        label: impl Into<String>,
        mut frames: Vec<FrameFeatures>,
    ) -> Result<Self> {
        let label = label.into();
        frames.sort_by_key(|f| f.frame_id);
        if let Some(w) = frames.windows(2).find(|w| w[0].frame_id == w[1].frame_id) {
            return Err(Error::DuplicateFrameId {
                dir: label.clone().into(),
                frame_id: w[0].frame_id,
            });
        }
        Ok(SummarySet {
            video_id: video_id.into(),
            kind,
            label,
            frames,
        })
    }

    pub fn frames(&self) -> &[FrameFeatures] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub auto_frame_id: u64,
    pub user_frame_id: u64,
    pub color_score: SimilarityScore,
    pub texture_score: SimilarityScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub pairs: Vec<MatchedPair>,
    pub n_auto: usize,
    pub n_user: usize,
    pub n_matched: usize,
}

pub fn match_summaries(
    auto: &SummarySet,
    user: &SummarySet,
    cfg: &EvalConfig,
) -> Result<MatchOutcome> {
    for set in [auto, user] {
        if set.is_empty() {
            return Err(Error::EmptySummary(format!(
                "{}/{}",
                set.video_id, set.label
            )));
        }
    }

    let mut remaining: Vec<&FrameFeatures> = user.frames.iter().collect();
    let mut pairs = Vec::new();
    for a in &auto.frames {
        if remaining.is_empty() {
            break;
        }
        let mut hit = None;
        for (i, u) in remaining.iter().enumerate() {
            let color_score = color_similarity(&a.color, &u.color)?;
            let texture_score = texture_similarity(&a.texture, &u.texture)?;
            let color_ok = color_score.value() > cfg.color_threshold;
            let texture_ok = texture_score.value() > cfg.texture_threshold;
            if cfg.match_mode.combine(color_ok, texture_ok) {
                hit = Some((i, color_score, texture_score));
                break;
            }
        }
        if let Some((i, color_score, texture_score)) = hit {
            let u = remaining.remove(i);
            pairs.push(MatchedPair {
                auto_frame_id: a.frame_id,
                user_frame_id: u.frame_id,
                color_score,
                texture_score,
            });
        }
    }

    debug_assert_eq!(
        pairs
            .iter()
            .map(|p| p.user_frame_id)
            .collect::<HashSet<_>>()
            .len(),
        pairs.len()
    );
    Ok(MatchOutcome {
        n_matched: pairs.len(),
        pairs,
        n_auto: auto.len(),
        n_user: user.len(),
    })
}
