//! End-to-end evaluation: features for every summary directory, matching for
//! every (automatic, user) pair, then aggregation.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;

use crate::cache::{file_name, fingerprint_dir, CachedFrame, FeatureCache};
use crate::color::color_histogram;
use crate::dataset_io::{
    decode_frame_bytes, list_summary_frames, rgb_to_hsv, EvaluationJob, FrameImage,
};
use crate::error::{Error, Result};
use crate::matching::{match_summaries, FrameFeatures, SummaryKind, SummarySet};
use crate::metrics::{aggregate, pair_scores, Aggregation, EvaluationReport};
use crate::texture::frame_texture;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub aggregation: Aggregation,
    /// Worker threads; `None` uses every available processor.
    pub jobs: Option<usize>,
    /// Feature cache file, read if present and rewritten after the run.
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: EvaluationReport,
    pub feature_cache_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn frame_features(frame: &FrameImage) -> Result<FrameFeatures> {
    let hsv = rgb_to_hsv(frame);
    Ok(FrameFeatures {
        frame_id: frame.frame_id,
        color: color_histogram(&hsv)?,
        texture: frame_texture(&hsv)?,
    })
}

/// Decodes and describes every keyframe in `dir`, in frame order. Runs on the
/// current rayon pool.
pub fn extract_dir(dir: &Path) -> Result<Vec<CachedFrame>> {
    let files = list_summary_frames(dir)?;
    files
        .par_iter()
        .map(|f| {
            let bytes = fs::read(&f.path)
                .map_err(|e| Error::io(format!("reading {}", f.path.display()), e))?;
            let mut frame = decode_frame_bytes(&bytes, &f.path)?;
            frame.frame_id = f.frame_id;
            let features = frame_features(&frame)?;
            Ok(CachedFrame {
                frame_id: f.frame_id,
                file_name: file_name(&f.path),
                color: features.color,
                texture: features.texture,
            })
        })
        .collect()
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::io("starting worker pool", std::io::Error::other(e)))
}

/// Cache holding the features of a single directory.
pub fn build_feature_cache(dir: &Path, jobs: Option<usize>) -> Result<FeatureCache> {
    let pool = thread_pool(jobs)?;
    let fingerprint = fingerprint_dir(dir)?;
    let frames = pool.install(|| extract_dir(dir))?;
    let mut cache = FeatureCache::new();
    cache.insert(fingerprint, frames);
    Ok(cache)
}

fn black_frame_warnings(dir: &Path, frames: &[CachedFrame]) -> Vec<String> {
    frames
        .iter()
        .filter(|f| f.texture.is_uniform_fallback())
        .map(|f| {
            format!(
                "{}: all-black frame, uniform texture descriptor substituted",
                dir.join(&f.file_name).display()
            )
        })
        .collect()
}

pub fn evaluate(job: &EvaluationJob, opts: &RunOptions) -> Result<RunArtifacts> {
    job.config.validate()?;
    let pool = thread_pool(opts.jobs)?;

    let mut cache = match &opts.cache {
        Some(path) => Some(FeatureCache::load_or_empty(path)?),
        None => None,
    };

    let mut features: HashMap<PathBuf, Vec<CachedFrame>> = HashMap::new();
    let mut warnings = Vec::new();
    for dir in job.summary_dirs() {
        let frames = match cache.as_mut() {
            Some(cache) => {
                let fp = fingerprint_dir(&dir)?;
                match cache.get(&fp) {
                    Some(hit) => {
                        debug!("cache hit for {}", dir.display());
                        hit.to_vec()
                    }
                    None => {
                        debug!("cache miss for {}", dir.display());
                        let frames = pool.install(|| extract_dir(&dir))?;
                        cache.insert(fp, frames.clone());
                        frames
                    }
                }
            }
            None => pool.install(|| extract_dir(&dir))?,
        };
        for w in black_frame_warnings(&dir, &frames) {
            warn!("{w}");
            warnings.push(w);
        }
        features.insert(dir, frames);
    }

    if let (Some(cache), Some(path)) = (&cache, &opts.cache) {
        cache.save(path)?;
    }

    let summary_set = |video: &str, kind: SummaryKind, label: &str, dir: &Path| {
        let frames = features[dir]
            .iter()
            .map(|f| FrameFeatures {
                frame_id: f.frame_id,
                color: f.color.clone(),
                texture: f.texture.clone(),
            })
            .collect();
        SummarySet::new(video, kind, label, frames)
    };

    let mut sets = Vec::with_capacity(job.videos.len());
    for video in &job.videos {
        let auto = video
            .automatic
            .iter()
            .map(|s| summary_set(&video.id, SummaryKind::Automatic, &s.label, &s.dir))
            .collect::<Result<Vec<_>>>()?;
        let user = video
            .user
            .iter()
            .map(|s| summary_set(&video.id, SummaryKind::User, &s.label, &s.dir))
            .collect::<Result<Vec<_>>>()?;
        sets.push((auto, user));
    }

    let cfg = job.config;
    let pairs = job.pairs();
    let scores = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| {
                let (auto_sets, user_sets) = &sets[p.video];
                let (auto, user) = (&auto_sets[p.automatic], &user_sets[p.user]);
                let outcome = match_summaries(auto, user, &cfg)?;
                pair_scores(&outcome, &job.videos[p.video].id, &auto.label, &user.label)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(RunArtifacts {
        report: aggregate(scores, cfg, opts.aggregation)?,
        feature_cache_path: opts.cache.clone(),
        warnings,
    })
}
