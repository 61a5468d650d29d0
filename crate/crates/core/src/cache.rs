//! Binary feature cache.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes   "SUMEVFC\0"
//! version    u32       FORMAT_VERSION
//! sections   u32
//! per section:
//!   fingerprint  32 bytes  SHA-256 over the summary directory's image files
//!   records      u32
//!   per record:
//!     frame_id   u64
//!     flags      u32       bit 0: texture is the all-black uniform fallback
//!     name_len   u32
//!     name       name_len bytes of UTF-8 (file name within the directory)
//!     histogram  256 x f64
//!     texture    192 x f64
//! ```
//!
//! Sections are written sorted by fingerprint so a cache is byte-identical for
//! identical contents. A section is only used when the directory's current
//! fingerprint equals the stored one.

use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::color::{ColorHistogram, HISTOGRAM_BINS};
use crate::dataset_io::list_summary_frames;
use crate::error::{Error, Result};
use crate::texture::{TextureDescriptor, DESCRIPTOR_LEN};

pub const MAGIC: &[u8; 8] = b"SUMEVFC\0";
pub const FORMAT_VERSION: u32 = 1;

/// Mixed into every fingerprint so a change to the feature definitions invalidates
/// old caches.
const FEATURE_TAG: &[u8] = b"hsv-joint-32x4x2;haar-avg-64-l3;v1";

const FLAG_UNIFORM_TEXTURE: u32 = 1;

pub type Fingerprint = [u8; 32];

#[derive(Debug, Clone, PartialEq)]
pub struct CachedFrame {
    pub frame_id: u64,
    pub file_name: String,
    pub color: ColorHistogram,
    pub texture: TextureDescriptor,
}

/// Content fingerprint of a summary directory: file names, sizes and SHA-256 of
/// every supported image, in frame order. Modification times play no part.
pub fn fingerprint_dir(dir: &Path) -> Result<Fingerprint> {
    let mut hasher = Sha256::new();
    hasher.update(FEATURE_TAG);
    for frame in list_summary_frames(dir)? {
        let bytes = fs::read(&frame.path)
            .map_err(|e| Error::io(format!("reading {}", frame.path.display()), e))?;
        let name = file_name(&frame.path);
        hasher.update((name.len() as u64).to_le_bytes());
        hasher.update(name.as_bytes());
        hasher.update(frame.frame_id.to_le_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(Sha256::digest(&bytes));
    }
    Ok(hasher.finalize().into())
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureCache {
    sections: BTreeMap<Fingerprint, Vec<CachedFrame>>,
}

impl FeatureCache {
    pub fn new() -> Self {
        FeatureCache::default()
    }

    pub fn get(&self, fingerprint: &Fingerprint) -> Option<&[CachedFrame]> {
        self.sections.get(fingerprint).map(Vec::as_slice)
    }

    pub fn insert(&mut self, fingerprint: Fingerprint, frames: Vec<CachedFrame>) {
        self.sections.insert(fingerprint, frames);
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn record_count(&self) -> usize {
        self.sections.values().map(Vec::len).sum()
    }

    /// Loads a cache file; a missing file yields an empty cache.
    pub fn load_or_empty(path: &Path) -> Result<Self> {
        match fs::read(path) {
            Ok(bytes) => FeatureCache::decode(&bytes).map_err(|message| Error::Cache {
                path: path.to_path_buf(),
                message,
            }),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(FeatureCache::new()),
            Err(e) => Err(Error::io(format!("reading cache {}", path.display()), e)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .map_err(|e| Error::io(format!("reading cache {}", path.display()), e))?;
        FeatureCache::decode(&bytes).map_err(|message| Error::Cache {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp: PathBuf = path.with_extension("tmp");
        fs::write(&tmp, self.encode())
            .map_err(|e| Error::io(format!("writing cache {}", tmp.display()), e))?;
        fs::rename(&tmp, path)
            .map_err(|e| Error::io(format!("writing cache {}", path.display()), e))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for (fp, frames) in &self.sections {
            out.extend_from_slice(fp);
            out.extend_from_slice(&(frames.len() as u32).to_le_bytes());
            for f in frames {
                out.extend_from_slice(&f.frame_id.to_le_bytes());
                let flags = if f.texture.is_uniform_fallback() {
                    FLAG_UNIFORM_TEXTURE
                } else {
                    0
                };
                out.extend_from_slice(&flags.to_le_bytes());
                out.extend_from_slice(&(f.file_name.len() as u32).to_le_bytes());
                out.extend_from_slice(f.file_name.as_bytes());
                for v in f.color.bins().iter().chain(f.texture.values()) {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, String> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err("not a feature cache (bad magic)".into());
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(format!("unsupported cache version {version}"));
        }
        let mut cache = FeatureCache::new();
        for _ in 0..r.u32()? {
            let fp: Fingerprint = r.take(32)?.try_into().expect("32 bytes");
            let n = r.u32()? as usize;
            let mut frames = Vec::with_capacity(n.min(1 << 16));
            for _ in 0..n {
                let frame_id = r.u64()?;
                let flags = r.u32()?;
                let name_len = r.u32()? as usize;
                let file_name =
                    String::from_utf8(r.take(name_len)?.to_vec()).map_err(|e| e.to_string())?;
                let color = r.f64s(HISTOGRAM_BINS)?;
                let texture = r.f64s(DESCRIPTOR_LEN)?;
                frames.push(CachedFrame {
                    frame_id,
                    file_name,
                    color: ColorHistogram::from_bins(color).map_err(|e| e.to_string())?,
                    texture: TextureDescriptor::from_values(texture)
                        .map_err(|e| e.to_string())?
                        .with_uniform_fallback(flags & FLAG_UNIFORM_TEXTURE != 0),
                });
            }
            cache.insert(fp, frames);
        }
        if r.pos != bytes.len() {
            return Err(format!("{} trailing bytes", bytes.len() - r.pos));
        }
        Ok(cache)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated at byte {}", self.pos)),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
