//! Bhattacharyya coefficient and the color/texture match decisions.
//!
//! The coefficient `sum_i sqrt(p_i * q_i)` is a similarity: 1 for identical
//! distributions, 0 for disjoint supports. Frames match on a channel when the
//! coefficient is strictly greater than the configured threshold.

use std::fmt;
use std::str::FromStr;

use crate::color::ColorHistogram;
use crate::error::{Error, Result};
use crate::texture::TextureDescriptor;

pub const DEFAULT_THRESHOLD: f64 = 0.97;

/// Tolerance on `sum(p) == 1` accepted by [`bhattacharyya`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How color and texture decisions combine into a frame match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MatchMode {
    #[default]
    ColorAndTexture,
    ColorOnly,
    TextureOnly,
    ColorOrTexture,
}

impl MatchMode {
    pub const ALL: [MatchMode; 4] = [
        MatchMode::ColorAndTexture,
        MatchMode::ColorOnly,
        MatchMode::TextureOnly,
        MatchMode::ColorOrTexture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::ColorAndTexture => "color_and_texture",
            MatchMode::ColorOnly => "color_only",
            MatchMode::TextureOnly => "texture_only",
            MatchMode::ColorOrTexture => "color_or_texture",
        }
    }

    pub fn combine(self, color: bool, texture: bool) -> bool {
        match self {
            MatchMode::ColorAndTexture => color && texture,
            MatchMode::ColorOnly => color,
            MatchMode::TextureOnly => texture,
            MatchMode::ColorOrTexture => color || texture,
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MatchMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown match mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub color_threshold: f64,
    pub texture_threshold: f64,
    pub match_mode: MatchMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            color_threshold: DEFAULT_THRESHOLD,
            texture_threshold: DEFAULT_THRESHOLD,
            match_mode: MatchMode::ColorAndTexture,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        for t in [self.color_threshold, self.texture_threshold] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidThreshold(t));
            }
        }
        Ok(())
    }

    pub fn with_mode(self, match_mode: MatchMode) -> Self {
        EvalConfig { match_mode, ..self }
    }
}

fn check_distribution(p: &[f64]) -> Result<f64> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NonNormalized { sum });
    }
    Ok(sum)
}

/// Bhattacharyya coefficient of two normalized distributions.
///
/// The raw sum is divided by `sqrt(sum(p) * sum(q))`, which removes the rounding
/// left over from normalization: identical inputs score exactly 1.0. The result
/// is clamped to `[0, 1]`.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> Result<SimilarityScore> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    if p.is_empty() {
        return Err(Error::NonNormalized { sum: 0.0 });
    }
    let sp = check_distribution(p)?;
    let sq = check_distribution(q)?;
    let raw: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(SimilarityScore((raw / (sp * sq).sqrt()).clamp(0.0, 1.0)))
}

pub fn color_similarity(a: &ColorHistogram, b: &ColorHistogram) -> Result<SimilarityScore> {
    bhattacharyya(a.bins(), b.bins())
}

pub fn texture_similarity(a: &TextureDescriptor, b: &TextureDescriptor) -> Result<SimilarityScore> {
    bhattacharyya(a.values(), b.values())
}

pub fn is_color_matched(a: &ColorHistogram, b: &ColorHistogram, cfg: &EvalConfig) -> Result<bool> {
    Ok(color_similarity(a, b)?.value() > cfg.color_threshold)
}

pub fn is_texture_matched(
    a: &TextureDescriptor,
    b: &TextureDescriptor,
    cfg: &EvalConfig,
) -> Result<bool> {
    Ok(texture_similarity(a, b)?.value() > cfg.texture_threshold)
}
