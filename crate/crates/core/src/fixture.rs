//! Synthetic keyframe datasets.
//!
//! `shuffle_collision` writes an image and a seeded pixel permutation of it: the two
//! share a color histogram exactly but differ in spatial layout, so color-only
//! matching pairs them while the texture check does not.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{Rgb, RgbImage};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::dataset_io::{hsv_pixel_to_rgb, FrameImage, Hsv};
use crate::error::{Error, Result};
use crate::pipeline::frame_features;
use crate::similarity::{color_similarity, texture_similarity, DEFAULT_THRESHOLD};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Seeds tried after the requested one before giving up on a collision pair.
const MAX_SEED_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    ShuffleCollision,
    Identical,
    Disjoint,
}

impl FixtureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::ShuffleCollision => "shuffle_collision",
            FixtureKind::Identical => "identical",
            FixtureKind::Disjoint => "disjoint",
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            FixtureKind::ShuffleCollision,
            FixtureKind::Identical,
            FixtureKind::Disjoint,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown fixture kind {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub manifest: PathBuf,
    /// Seed actually used for the permutation (collision fixtures only).
    pub seed: Option<u64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(format!("writing {}", path.display()), e)
}

fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(format!("writing {}", path.display()), io),
            other => Error::io(
                format!("writing {}", path.display()),
                std::io::Error::other(other),
            ),
        })
}

fn to_frame(img: &RgbImage) -> FrameImage {
    FrameImage::new(
        0,
        img.width() as usize,
        img.height() as usize,
        img.as_raw().clone(),
    )
    .expect("fixture images are nonempty")
}

/// Image with one hue throughout (S = 1) and a diagonal value ramp kept inside the
/// upper value bin, so its color histogram has a single occupied bin.
pub fn hue_frame(hue: f64, width: u32, height: u32) -> RgbImage {
    let span = f64::from(width + height - 2).max(1.0);
    RgbImage::from_fn(width, height, |x, y| {
        let v = 0.6 + 0.4 * f64::from(x + y) / span;
        Rgb(hsv_pixel_to_rgb(Hsv { h: hue, s: 1.0, v }))
    })
}

/// Four flat quadrants: red, white, dark gray, blue.
pub fn quadrant_image(width: u32, height: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |x, y| {
        let right = x >= width / 2;
        let bottom = y >= height / 2;
        Rgb(match (right, bottom) {
            (false, false) => [230, 20, 20],
            (true, false) => [245, 245, 245],
            (false, true) => [40, 40, 40],
            (true, true) => [20, 40, 220],
        })
    })
}

pub fn shuffle_pixels(img: &RgbImage, seed: u64) -> RgbImage {
    let mut px: Vec<[u8; 3]> = img.pixels().map(|p| p.0).collect();
    px.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let raw = px.into_iter().flatten().collect();
    RgbImage::from_raw(img.width(), img.height(), raw).expect("same dimensions")
}

/// Color and texture similarity of two in-memory images.
pub fn pair_similarity(a: &RgbImage, b: &RgbImage) -> Result<(f64, f64)> {
    let fa = frame_features(&to_frame(a))?;
    let fb = frame_features(&to_frame(b))?;
    Ok((
        color_similarity(&fa.color, &fb.color)?.value(),
        texture_similarity(&fa.texture, &fb.texture)?.value(),
    ))
}

/// A base image and a shuffled copy whose color similarity is exactly 1 and whose
/// texture similarity is below the default threshold. Starts at `seed` and moves
/// to the next seed until both hold.
pub fn collision_pair(seed: u64) -> Result<(RgbImage, RgbImage, u64)> {
    let base = quadrant_image(96, 80);
    for s in seed..seed.saturating_add(MAX_SEED_ATTEMPTS) {
        let shuffled = shuffle_pixels(&base, s);
        let (color, texture) = pair_similarity(&base, &shuffled)?;
        if color == 1.0 && texture < DEFAULT_THRESHOLD {
            return Ok((base, shuffled, s));
        }
    }
    Err(Error::io(
        "generating collision fixture",
        std::io::Error::other(format!(
            "no usable permutation in {MAX_SEED_ATTEMPTS} seeds from {seed}"
        )),
    ))
}

fn write_frames(dir: &Path, frames: &[(u64, RgbImage)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (id, img) in frames {
        save_png(img, &dir.join(format!("frame{id:04}.png")))?;
    }
    Ok(())
}

fn write_manifest(out_dir: &Path, video: &str) -> Result<PathBuf> {
    let manifest = json!({
        "videos": [{
            "id": video,
            "automatic": [{ "label": "auto", "dir": "automatic" }],
            "user": [{ "label": "user", "dir": "user" }],
        }]
    });
    let path = out_dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest).expect("static JSON") + "\n";
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Hues spaced far enough apart that any two land in different hue bins.
fn distinct_hue(i: usize) -> f64 {
    (i as f64 * 40.0) % 360.0
}

pub fn make_fixture(kind: FixtureKind, out_dir: &Path, seed: u64) -> Result<Fixture> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut used_seed = None;
    match kind {
        FixtureKind::ShuffleCollision => {
            let (base, shuffled, s) = collision_pair(seed)?;
            used_seed = Some(s);
            write_frames(&out_dir.join("automatic"), &[(1, base)])?;
            write_frames(&out_dir.join("user"), &[(1, shuffled)])?;
        }
        FixtureKind::Identical => {
            let frames: Vec<(u64, RgbImage)> = (0..5)
                .map(|i| (10 * (i as u64 + 1), hue_frame(distinct_hue(i), 64, 48)))
                .collect();
            write_frames(&out_dir.join("automatic"), &frames)?;
            write_frames(&out_dir.join("user"), &frames)?;
        }
        FixtureKind::Disjoint => {
            let shades = [255u8, 200, 150];
            let red: Vec<(u64, RgbImage)> = shades
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u64 + 1, RgbImage::from_pixel(64, 48, Rgb([v, 0, 0]))))
                .collect();
            let blue: Vec<(u64, RgbImage)> = shades
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u64 + 1, RgbImage::from_pixel(64, 48, Rgb([0, 0, v]))))
                .collect();
            write_frames(&out_dir.join("automatic"), &red)?;
            write_frames(&out_dir.join("user"), &blue)?;
        }
    }
    Ok(Fixture {
        manifest: write_manifest(out_dir, kind.as_str())?,
        seed: used_seed,
    })
}

/// Eight automatic frames against seven user frames, six of which show the same
/// content as an automatic frame; the remaining frames share nothing.
pub fn write_worked_example(out_dir: &Path) -> Result<PathBuf> {
    let auto: Vec<(u64, RgbImage)> = (0..8)
        .map(|i| (1000 + 60 * i as u64, hue_frame(distinct_hue(i), 80, 60)))
        .collect();
    let mut user: Vec<(u64, RgbImage)> = (0..6)
        .map(|i| (1010 + 60 * i as u64, hue_frame(distinct_hue(i), 80, 60)))
        .collect();
    user.push((1900, hue_frame(distinct_hue(8), 80, 60)));
    write_frames(&out_dir.join("automatic"), &auto)?;
    write_frames(&out_dir.join("user"), &user)?;
    write_manifest(out_dir, "worked_example")
}
