//! Manifest loading, keyframe decoding and RGB to HSV conversion.
//!
//! A manifest pairs automatic summaries with user summaries per video:
//!
//! ```json
//! { "videos": [ { "id": "v21",
//!                 "automatic": [ { "label": "vsumm", "dir": "auto/v21" } ],
//!                 "user":      [ { "label": "user1", "dir": "users/1/v21" } ] } ] }
//! ```
//!
//! Relative `dir` values are resolved against the directory holding the manifest.

use std::collections::HashSet;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::similarity::EvalConfig;

/// File extensions accepted as keyframes (compared case-insensitively).
pub const SUPPORTED_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "ppm"];

/// A decoded keyframe: 8-bit RGB, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameImage {
    pub frame_id: u64,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub source_path: PathBuf,
}

impl FrameImage {
    pub fn new(frame_id: u64, width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        assert_eq!(
            pixels.len(),
            width * height * 3,
            "pixel buffer does not match dimensions"
        );
        Ok(FrameImage {
            frame_id,
            width,
            height,
            pixels,
            source_path: PathBuf::new(),
        })
    }

    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// One HSV pixel: `h` in degrees `[0, 360)`, `s` and `v` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Hsv>,
}

impl HsvImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Hsv>) -> Self {
        assert_eq!(
            pixels.len(),
            width * height,
            "pixel buffer does not match dimensions"
        );
        HsvImage {
            width,
            height,
            pixels,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Hsv {
        self.pixels[y * self.width + x]
    }
}

/// Hexcone RGB to HSV for a single 8-bit pixel. Achromatic pixels get `h = 0`.
pub fn rgb_pixel_to_hsv(rgb: [u8; 3]) -> Hsv {
    let r = f64::from(rgb[0]) / 255.0;
    let g = f64::from(rgb[1]) / 255.0;
    let b = f64::from(rgb[2]) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let v = max;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    if delta == 0.0 {
        return Hsv { h: 0.0, s, v };
    }

    let mut h = if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsv { h, s, v }
}

/// Inverse hexcone conversion, rounding each channel to the nearest 8-bit value.
pub fn hsv_pixel_to_rgb(px: Hsv) -> [u8; 3] {
    let c = px.v * px.s;
    let hp = (px.h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = px.v - c;
    let to_u8 = |f: f64| ((f + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r1), to_u8(g1), to_u8(b1)]
}

pub fn rgb_to_hsv(img: &FrameImage) -> HsvImage {
    let pixels = img
        .pixels
        .chunks_exact(3)
        .map(|c| rgb_pixel_to_hsv([c[0], c[1], c[2]]))
        .collect();
    HsvImage::new(img.width, img.height, pixels)
}

pub fn is_supported_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            SUPPORTED_EXTENSIONS
                .iter()
                .any(|s| e.eq_ignore_ascii_case(s))
        })
        .unwrap_or(false)
}

/// Parses the run of ASCII digits at the end of a file stem, e.g. `frame1921` -> 1921.
pub fn trailing_frame_number(stem: &str) -> Option<u64> {
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    stem[stem.len() - digits..].parse().ok()
}

/// Supported image files in `dir`, sorted by file name.
fn sorted_image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::SummaryDirectoryNotFound(dir.to_path_buf()),
        _ => Error::io(format!("reading directory {}", dir.display()), e),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| Error::io(format!("reading directory {}", dir.display()), e))?;
        let path = entry.path();
        if path.is_file() && is_supported_image(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Frame id for `path`: trailing digits of the stem, or the file's position among
/// the supported images of its directory when the stem has none.
pub fn frame_id_for(path: &Path) -> Result<u64> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    if let Some(id) = trailing_frame_number(stem) {
        return Ok(id);
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let files = sorted_image_files(&parent)?;
    let pos = files
        .iter()
        .position(|f| f.file_name() == path.file_name())
        .unwrap_or(0);
    Ok(pos as u64)
}

/// Decodes a keyframe from disk into 8-bit RGB.
pub fn decode_frame(path: &Path) -> Result<FrameImage> {
    if !is_supported_image(path) {
        return Err(Error::UnsupportedFormat(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut frame = decode_frame_bytes(&bytes, path)?;
    frame.frame_id = frame_id_for(path)?;
    Ok(frame)
}

/// Decodes in-memory image bytes; `path` is used for format detection fallback and
/// error attribution. The returned frame id is 0.
pub fn decode_frame_bytes(bytes: &[u8], path: &Path) -> Result<FrameImage> {
    let format = image::guess_format(bytes)
        .ok()
        .or_else(|| image::ImageFormat::from_path(path).ok())
        .ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    if !matches!(
        format,
        image::ImageFormat::Png
            | image::ImageFormat::Jpeg
            | image::ImageFormat::Bmp
            | image::ImageFormat::Pnm
    ) {
        return Err(Error::UnsupportedFormat(path.to_path_buf()));
    }
    let decoded = image::load_from_memory_with_format(bytes, format).map_err(|e| match e {
        image::ImageError::Unsupported(_) => Error::UnsupportedFormat(path.to_path_buf()),
        other => Error::CorruptImage {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let mut frame = FrameImage::new(0, w as usize, h as usize, rgb.into_raw())?;
    frame.source_path = path.to_path_buf();
    Ok(frame)
}

/// A keyframe file of a summary with its resolved frame id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFile {
    pub frame_id: u64,
    pub path: PathBuf,
}

/// Lists the keyframes of a summary directory ordered by frame id, ties by file name.
pub fn list_summary_frames(dir: &Path) -> Result<Vec<FrameFile>> {
    let files = sorted_image_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptySummaryDirectory(dir.to_path_buf()));
    }
    let mut frames: Vec<FrameFile> = files
        .into_iter()
        .enumerate()
        .map(|(pos, path)| {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
            let frame_id = trailing_frame_number(stem).unwrap_or(pos as u64);
            FrameFile { frame_id, path }
        })
        .collect();
    frames.sort_by(|a, b| {
        a.frame_id
            .cmp(&b.frame_id)
            .then_with(|| a.path.file_name().cmp(&b.path.file_name()))
    });
    if let Some(w) = frames.windows(2).find(|w| w[0].frame_id == w[1].frame_id) {
        return Err(Error::DuplicateFrameId {
            dir: dir.to_path_buf(),
            frame_id: w[0].frame_id,
        });
    }
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRef {
    pub label: String,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoEntry {
    pub id: String,
    pub automatic: Vec<SummaryRef>,
    pub user: Vec<SummaryRef>,
}

/// One (automatic, user) comparison, as indices into an [`EvaluationJob`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRef {
    pub video: usize,
    pub automatic: usize,
    pub user: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationJob {
    pub videos: Vec<VideoEntry>,
    pub config: EvalConfig,
}

impl EvaluationJob {
    /// Every automatic summary against every user summary of the same video, in
    /// manifest order.
    pub fn pairs(&self) -> Vec<PairRef> {
        let mut out = Vec::with_capacity(self.pair_count());
        for (vi, video) in self.videos.iter().enumerate() {
            for ai in 0..video.automatic.len() {
                for ui in 0..video.user.len() {
                    out.push(PairRef {
                        video: vi,
                        automatic: ai,
                        user: ui,
                    });
                }
            }
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.videos
            .iter()
            .map(|v| v.automatic.len() * v.user.len())
            .sum()
    }

    /// Distinct summary directories referenced by the job, in first-seen order.
    pub fn summary_dirs(&self) -> Vec<PathBuf> {
        let mut seen = HashSet::new();
        let mut dirs = Vec::new();
        for video in &self.videos {
            for s in video.automatic.iter().chain(&video.user) {
                if seen.insert(s.dir.clone()) {
                    dirs.push(s.dir.clone());
                }
            }
        }
        dirs
    }
}

pub fn load_manifest(path: &Path) -> Result<EvaluationJob> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::ManifestNotFound(path.to_path_buf()),
        _ => Error::io(format!("reading manifest {}", path.display()), e),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, path, &base)
}

/// Parses and validates manifest text; `base` resolves relative summary directories.
pub fn parse_manifest(text: &str, path: &Path, base: &Path) -> Result<EvaluationJob> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::schema(path, "<document>", e.to_string()))?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::schema(path, "<document>", "expected an object"))?;
    if let Some(key) = root.keys().find(|k| k.as_str() != "videos") {
        return Err(Error::schema(path, key.as_str(), "unknown field"));
    }
    let videos = root
        .get("videos")
        .ok_or_else(|| Error::schema(path, "videos", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::schema(path, "videos", "expected an array"))?;
    if videos.is_empty() {
        return Err(Error::schema(
            path,
            "videos",
            "must list at least one video",
        ));
    }

    let mut seen_videos = HashSet::new();
    let mut entries = Vec::with_capacity(videos.len());
    for (vi, video) in videos.iter().enumerate() {
        let at = format!("videos[{vi}]");
        let obj = video
            .as_object()
            .ok_or_else(|| Error::schema(path, &at, "expected an object"))?;
        if let Some(key) = obj
            .keys()
            .find(|k| !matches!(k.as_str(), "id" | "automatic" | "user"))
        {
            return Err(Error::schema(path, format!("{at}.{key}"), "unknown field"));
        }
        let id = string_field(obj, "id", &at, path)?;
        if !seen_videos.insert(id.clone()) {
            return Err(Error::schema(
                path,
                format!("{at}.id"),
                format!("duplicate video id {id:?}"),
            ));
        }
        let mut labels = HashSet::new();
        let automatic = summary_list(obj, "automatic", &at, path, base, &mut labels)?;
        let user = summary_list(obj, "user", &at, path, base, &mut labels)?;
        entries.push(VideoEntry {
            id,
            automatic,
            user,
        });
    }

    Ok(EvaluationJob {
        videos: entries,
        config: EvalConfig::default(),
    })
}

fn string_field(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    at: &str,
    path: &Path,
) -> Result<String> {
    match obj.get(key) {
        None => Err(Error::schema(path, format!("{at}.{key}"), "missing field")),
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(Error::schema(
            path,
            format!("{at}.{key}"),
            "must not be empty",
        )),
        Some(_) => Err(Error::schema(
            path,
            format!("{at}.{key}"),
            "expected a string",
        )),
    }
}

fn summary_list(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    at: &str,
    path: &Path,
    base: &Path,
    labels: &mut HashSet<String>,
) -> Result<Vec<SummaryRef>> {
    let list_at = format!("{at}.{key}");
    let items = obj
        .get(key)
        .ok_or_else(|| Error::schema(path, &list_at, "missing field"))?
        .as_array()
        .ok_or_else(|| Error::schema(path, &list_at, "expected an array"))?;
    if items.is_empty() {
        return Err(Error::schema(
            path,
            &list_at,
            "must list at least one summary",
        ));
    }
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let item_at = format!("{list_at}[{i}]");
        let entry = item
            .as_object()
            .ok_or_else(|| Error::schema(path, &item_at, "expected an object"))?;
        if let Some(k) = entry
            .keys()
            .find(|k| !matches!(k.as_str(), "label" | "dir"))
        {
            return Err(Error::schema(
                path,
                format!("{item_at}.{k}"),
                "unknown field",
            ));
        }
        let label = string_field(entry, "label", &item_at, path)?;
        if !labels.insert(label.clone()) {
            return Err(Error::schema(
                path,
                format!("{item_at}.label"),
                format!("duplicate summary label {label:?} for this video"),
            ));
        }
        let raw_dir = PathBuf::from(string_field(entry, "dir", &item_at, path)?);
        let dir = if raw_dir.is_absolute() {
            raw_dir
        } else {
            base.join(raw_dir)
        };
        if !dir.is_dir() {
            return Err(Error::SummaryDirectoryNotFound(dir));
        }
        if sorted_image_files(&dir)?.is_empty() {
            return Err(Error::EmptySummaryDirectory(dir));
        }
        out.push(SummaryRef { label, dir });
    }
    Ok(out)
}
