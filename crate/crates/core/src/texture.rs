//! Haar wavelet texture descriptor.
//!
//! Frames are reduced to 64x64 in HSV, each channel goes through three levels of
//! the 2-D Haar analysis, and the 8x8 approximation subbands of H/360, S and V are
//! concatenated and L1-normalized into a 192-value distribution.
//!
//! The Haar filters use the averaging convention: approximation `(a + b) / 2`,
//! detail `(a - b) / 2`. Under that convention the level-n approximation of a grid
//! is exactly the grid of its `2^n x 2^n` block means, and it stays nonnegative
//! for nonnegative input.

use crate::dataset_io::{Hsv, HsvImage};
use crate::error::{Error, Result};

pub const TEXTURE_SIDE: usize = 64;
pub const HAAR_LEVELS: u32 = 3;
/// Side of the approximation subband after [`HAAR_LEVELS`] levels.
pub const APPROX_SIDE: usize = TEXTURE_SIDE >> HAAR_LEVELS;
pub const DESCRIPTOR_LEN: usize = 3 * APPROX_SIDE * APPROX_SIDE;

/// Row-major real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            width * height,
            "grid buffer does not match dimensions"
        );
        Grid {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Grid::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid::new(width, height, data)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Subbands of one analysis level.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarLevel {
    pub approx: Grid,
    /// Row lowpass, column highpass.
    pub horizontal: Grid,
    /// Row highpass, column lowpass.
    pub vertical: Grid,
    pub diagonal: Grid,
}

/// One level of the averaging 2-D Haar analysis. Both sides must be even.
pub fn haar_step(grid: &Grid) -> Result<HaarLevel> {
    if !grid.width.is_multiple_of(2) || !grid.height.is_multiple_of(2) || grid.data.is_empty() {
        return Err(Error::WrongDimensions {
            expected: 2 * (grid.width / 2).max(1),
            width: grid.width,
            height: grid.height,
        });
    }
    let (w, h) = (grid.width / 2, grid.height / 2);
    let mut approx = Vec::with_capacity(w * h);
    let mut horizontal = Vec::with_capacity(w * h);
    let mut vertical = Vec::with_capacity(w * h);
    let mut diagonal = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let a = grid.at(2 * x, 2 * y);
            let b = grid.at(2 * x + 1, 2 * y);
            let c = grid.at(2 * x, 2 * y + 1);
            let d = grid.at(2 * x + 1, 2 * y + 1);
            // rows first, then columns
            let top_lo = (a + b) / 2.0;
            let top_hi = (a - b) / 2.0;
            let bot_lo = (c + d) / 2.0;
            let bot_hi = (c - d) / 2.0;
            approx.push((top_lo + bot_lo) / 2.0);
            horizontal.push((top_lo - bot_lo) / 2.0);
            vertical.push((top_hi + bot_hi) / 2.0);
            diagonal.push((top_hi - bot_hi) / 2.0);
        }
    }
    Ok(HaarLevel {
        approx: Grid::new(w, h, approx),
        horizontal: Grid::new(w, h, horizontal),
        vertical: Grid::new(w, h, vertical),
        diagonal: Grid::new(w, h, diagonal),
    })
}

/// Full multi-level decomposition, finest level first.
pub fn haar_decompose(grid: &Grid, levels: u32) -> Result<Vec<HaarLevel>> {
    let mut out: Vec<HaarLevel> = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let next = haar_step(out.last().map(|l| &l.approx).unwrap_or(grid))?;
        out.push(next);
    }
    Ok(out)
}

/// Level-`levels` approximation subband of a 64x64 grid; detail subbands are discarded.
pub fn haar_approx(channel: &Grid, levels: u32) -> Result<Grid> {
    if channel.width != TEXTURE_SIDE || channel.height != TEXTURE_SIDE {
        return Err(Error::WrongDimensions {
            expected: TEXTURE_SIDE,
            width: channel.width,
            height: channel.height,
        });
    }
    let mut approx = channel.clone();
    for _ in 0..levels {
        approx = haar_step(&approx)?.approx;
    }
    Ok(approx)
}

/// Area-weighted contributions of source samples to each output sample along one axis.
/// Weights are exact integer overlaps divided by the source length.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    (0..dst)
        .map(|i| {
            // output i spans [i*src, (i+1)*src) and source j spans [j*dst, (j+1)*dst),
            // both in units of 1/dst source pixels
            let lo = i * src;
            let hi = (i + 1) * src;
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .map(|j| {
                    let overlap = hi.min((j + 1) * dst) - lo.max(j * dst);
                    (j, overlap as f64 / src as f64)
                })
                .collect()
        })
        .collect()
}

/// Box-filter resize of an HSV image. Each channel (hue included) is averaged as a
/// plain scalar.
pub fn resize_box(img: &HsvImage, width: usize, height: usize) -> Result<HsvImage> {
    if img.pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    if img.width == width && img.height == height {
        return Ok(img.clone());
    }
    let wx = box_weights(img.width, width);
    let wy = box_weights(img.height, height);

    let mut rows = Vec::with_capacity(width * img.height);
    for y in 0..img.height {
        for taps in &wx {
            let mut acc = [0.0f64; 3];
            for &(x, w) in taps {
                let p = img.get(x, y);
                acc[0] += w * p.h;
                acc[1] += w * p.s;
                acc[2] += w * p.v;
            }
            rows.push(acc);
        }
    }

    let mut pixels = Vec::with_capacity(width * height);
    for taps in &wy {
        for x in 0..width {
            let mut acc = [0.0f64; 3];
            for &(y, w) in taps {
                let p = rows[y * width + x];
                acc[0] += w * p[0];
                acc[1] += w * p[1];
                acc[2] += w * p[2];
            }
            pixels.push(Hsv {
                h: acc[0].clamp(0.0, 360.0_f64.next_down()),
                s: acc[1].clamp(0.0, 1.0),
                v: acc[2].clamp(0.0, 1.0),
            });
        }
    }
    Ok(HsvImage::new(width, height, pixels))
}

pub fn resize_to_64(img: &HsvImage) -> Result<HsvImage> {
    resize_box(img, TEXTURE_SIDE, TEXTURE_SIDE)
}

/// Normalized approximation-coefficient vector, H then S then V, each 8x8 row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureDescriptor {
    values: Vec<f64>,
    uniform_fallback: bool,
}

impl TextureDescriptor {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != DESCRIPTOR_LEN {
            return Err(Error::LengthMismatch(values.len(), DESCRIPTOR_LEN));
        }
        Ok(TextureDescriptor {
            values,
            uniform_fallback: false,
        })
    }

    pub(crate) fn with_uniform_fallback(mut self, flag: bool) -> Self {
        self.uniform_fallback = flag;
        self
    }

    fn uniform() -> Self {
        TextureDescriptor {
            values: vec![1.0 / DESCRIPTOR_LEN as f64; DESCRIPTOR_LEN],
            uniform_fallback: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when the frame was identically zero (black) and the uniform vector was
    /// substituted.
    pub fn is_uniform_fallback(&self) -> bool {
        self.uniform_fallback
    }
}

fn channel_grid(img: &HsvImage, f: impl Fn(Hsv) -> f64) -> Grid {
    Grid::new(
        img.width,
        img.height,
        img.pixels.iter().map(|&p| f(p)).collect(),
    )
}

/// Descriptor of a 64x64 HSV image. An all-black frame yields the uniform vector.
pub fn texture_descriptor(img64: &HsvImage) -> Result<TextureDescriptor> {
    if img64.width != TEXTURE_SIDE || img64.height != TEXTURE_SIDE {
        return Err(Error::WrongDimensions {
            expected: TEXTURE_SIDE,
            width: img64.width,
            height: img64.height,
        });
    }
    let mut values = Vec::with_capacity(DESCRIPTOR_LEN);
    for grid in [
        channel_grid(img64, |p| p.h / 360.0),
        channel_grid(img64, |p| p.s),
        channel_grid(img64, |p| p.v),
    ] {
        values.extend(haar_approx(&grid, HAAR_LEVELS)?.data);
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Ok(TextureDescriptor::uniform());
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(TextureDescriptor {
        values,
        uniform_fallback: false,
    })
}

/// Resize then describe: the texture path for a full-resolution frame.
pub fn frame_texture(img: &HsvImage) -> Result<TextureDescriptor> {
    texture_descriptor(&resize_to_64(img)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Independent oracle: mean of each 8x8 block, computed by direct summation.
    fn block_means(grid: &Grid, block: usize) -> Grid {
        let side = grid.width / block;
        Grid::from_fn(side, side, |bx, by| {
            let mut sum = 0.0;
            for y in by * block..(by + 1) * block {
                for x in bx * block..(bx + 1) * block {
                    sum += grid.data[y * grid.width + x];
                }
            }
            sum / (block * block) as f64
        })
    }

    fn hsv_image(w: usize, h: usize, f: impl Fn(usize, usize) -> Hsv) -> HsvImage {
        let mut px = Vec::new();
        for y in 0..h {
            for x in 0..w {
                px.push(f(x, y));
            }
        }
        HsvImage::new(w, h, px)
    }

    #[test]
    fn constant_grid() {
        let out = haar_approx(&Grid::filled(64, 64, 0.37), 3).unwrap();
        assert_eq!((out.width, out.height), (8, 8));
        assert!(out.data.iter().all(|&v| v == 0.37));
    }

    #[test]
    fn left_half_ones() {
        let g = Grid::from_fn(64, 64, |x, _| if x < 32 { 1.0 } else { 0.0 });
        let out = haar_approx(&g, 3).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(out.at(x, y), if x < 4 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn random_grids_match_block_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = Grid::from_fn(64, 64, |_, _| rng.gen::<f64>());
            let got = haar_approx(&g, 3).unwrap();
            let want = block_means(&g, 8);
            for (a, b) in got.data.iter().zip(&want.data) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn wrong_dimensions() {
        assert!(matches!(
            haar_approx(&Grid::filled(32, 64, 0.0), 3),
            Err(Error::WrongDimensions {
                width: 32,
                height: 64,
                ..
            })
        ));
        assert!(haar_step(&Grid::filled(3, 4, 0.0)).is_err());
    }

    #[test]
    fn step_is_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let l = haar_step(&g).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let (a, h, v, d) = (
                    l.approx.at(x, y),
                    l.horizontal.at(x, y),
                    l.vertical.at(x, y),
                    l.diagonal.at(x, y),
                );
                let close = |p: f64, q: f64| (p - q).abs() < 1e-12;
                assert!(close(a + h + v + d, g.at(2 * x, 2 * y)));
                assert!(close(a + h - v - d, g.at(2 * x + 1, 2 * y)));
                assert!(close(a - h + v - d, g.at(2 * x, 2 * y + 1)));
                assert!(close(a - h - v + d, g.at(2 * x + 1, 2 * y + 1)));
            }
        }
    }

    #[test]
    fn decompose_levels_shrink() {
        let levels = haar_decompose(&Grid::filled(64, 64, 1.0), 3).unwrap();
        let sides: Vec<usize> = levels.iter().map(|l| l.approx.width).collect();
        assert_eq!(sides, vec![32, 16, 8]);
        assert!(levels
            .iter()
            .all(|l| l.diagonal.data.iter().all(|&d| d == 0.0)));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy = HsvImage::new(
            64,
            64,
            (0..64 * 64)
                .map(|_| Hsv {
                    h: rng.gen_range(0.0..360.0),
                    s: rng.gen(),
                    v: rng.gen(),
                })
                .collect(),
        );
        assert_eq!(resize_to_64(&noisy).unwrap(), noisy);
    }

    #[test]
    fn resize_constant() {
        let c = Hsv {
            h: 200.0,
            s: 0.25,
            v: 0.75,
        };
        let out = resize_to_64(&hsv_image(128, 128, |_, _| c)).unwrap();
        for p in &out.pixels {
            assert!(
                (p.h - c.h).abs() < 1e-12 && (p.s - c.s).abs() < 1e-12 && (p.v - c.v).abs() < 1e-12
            );
        }
        let out = resize_to_64(&hsv_image(97, 41, |_, _| c)).unwrap();
        for p in &out.pixels {
            assert!(
                (p.h - c.h).abs() < 1e-9 && (p.s - c.s).abs() < 1e-12 && (p.v - c.v).abs() < 1e-12
            );
        }
    }

    #[test]
    fn resize_tiled_blocks() {
        let vals = [[0.1, 0.4], [0.7, 0.2]];
        let img = hsv_image(128, 128, |x, y| {
            let v = vals[y % 2][x % 2];
            Hsv {
                h: v * 300.0,
                s: v,
                v,
            }
        });
        let want = (0.1 + 0.4 + 0.7 + 0.2) / 4.0;
        let out = resize_to_64(&img).unwrap();
        assert_eq!((out.width, out.height), (64, 64));
        for p in &out.pixels {
            assert!((p.s - want).abs() < 1e-12);
            assert!((p.v - want).abs() < 1e-12);
            assert!((p.h - want * 300.0).abs() < 1e-10);
        }
    }

    #[test]
    fn resize_upscale_replicates() {
        let img = hsv_image(2, 1, |x, _| Hsv {
            h: 0.0,
            s: 0.0,
            v: x as f64,
        });
        let out = resize_to_64(&img).unwrap();
        assert_eq!(out.get(0, 10).v, 0.0);
        assert_eq!(out.get(63, 10).v, 1.0);
    }

    #[test]
    fn mid_gray_descriptor() {
        let img = hsv_image(64, 64, |_, _| Hsv {
            h: 0.0,
            s: 0.0,
            v: 0.5,
        });
        let d = texture_descriptor(&img).unwrap();
        assert_eq!(d.values().len(), 192);
        assert!(d.values()[..128].iter().all(|&v| v == 0.0));
        assert!(d.values()[128..].iter().all(|&v| v == 1.0 / 64.0));
        assert!(!d.is_uniform_fallback());
    }

    #[test]
    fn black_frame_falls_back_to_uniform() {
        let img = hsv_image(64, 64, |_, _| Hsv {
            h: 0.0,
            s: 0.0,
            v: 0.0,
        });
        let d = texture_descriptor(&img).unwrap();
        assert!(d.is_uniform_fallback());
        assert!(d.values().iter().all(|&v| v == 1.0 / 192.0));
    }

    #[test]
    fn descriptor_requires_64() {
        let img = hsv_image(32, 32, |_, _| Hsv {
            h: 0.0,
            s: 0.0,
            v: 0.5,
        });
        assert!(matches!(
            texture_descriptor(&img),
            Err(Error::WrongDimensions { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn descriptor_is_a_distribution(seed in any::<u64>(), w in 1usize..150, h in 1usize..150) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let img = HsvImage::new(w, h, (0..w * h).map(|_| Hsv {
                    h: rng.gen_range(0.0..360.0), s: rng.gen(), v: rng.gen_range(0.01..1.0),
                }).collect());
                let d = frame_texture(&img).unwrap();
                prop_assert!(d.values().iter().all(|&v| v >= 0.0));
                prop_assert!((d.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }

            #[test]
            fn unit_input_stays_in_unit_range(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = Grid::from_fn(64, 64, |_, _| rng.gen::<f64>());
                let a = haar_approx(&g, 3).unwrap();
                prop_assert!(a.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
    }
}
