//! Joint HSV color histogram: 32 hue x 4 saturation x 2 value bins.

use crate::dataset_io::HsvImage;
use crate::error::{Error, Result};

pub const HUE_BINS: usize = 32;
pub const SATURATION_BINS: usize = 4;
pub const VALUE_BINS: usize = 2;
pub const HISTOGRAM_BINS: usize = HUE_BINS * SATURATION_BINS * VALUE_BINS;

/// Normalized color distribution of a frame. Bin layout is hue-major:
/// `hue * 8 + saturation * 2 + value`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram {
    bins: Vec<f64>,
}

impl ColorHistogram {
    /// Wraps precomputed bins, e.g. read back from a feature cache.
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        if bins.len() != HISTOGRAM_BINS {
            return Err(Error::LengthMismatch(bins.len(), HISTOGRAM_BINS));
        }
        Ok(ColorHistogram { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }
}

/// Maps an HSV coordinate to its histogram bin. Upper edges clamp into the top bin.
pub fn quantize_hsv(h: f64, s: f64, v: f64) -> Result<usize> {
    let in_range =
        (0.0..360.0).contains(&h) && (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&v);
    if !in_range {
        return Err(Error::HsvOutOfRange { h, s, v });
    }
    let hi = ((h / 360.0 * HUE_BINS as f64).floor() as usize).min(HUE_BINS - 1);
    let si = ((s * SATURATION_BINS as f64).floor() as usize).min(SATURATION_BINS - 1);
    let vi = ((v * VALUE_BINS as f64).floor() as usize).min(VALUE_BINS - 1);
    Ok(hi * SATURATION_BINS * VALUE_BINS + si * VALUE_BINS + vi)
}

pub fn color_histogram(img: &HsvImage) -> Result<ColorHistogram> {
    if img.pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for px in &img.pixels {
        counts[quantize_hsv(px.h, px.s, px.v)?] += 1;
    }
    let total = img.pixels.len() as f64;
    let bins = counts.into_iter().map(|c| c as f64 / total).collect();
    Ok(ColorHistogram { bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::rgb_pixel_to_hsv;

    fn image_of(rgb: &[[u8; 3]]) -> HsvImage {
        HsvImage::new(
            rgb.len(),
            1,
            rgb.iter().map(|&p| rgb_pixel_to_hsv(p)).collect(),
        )
    }

    #[test]
    fn quantization_corners() {
        assert_eq!(quantize_hsv(0.0, 0.0, 0.0).unwrap(), 0);
        assert_eq!(quantize_hsv(359.999, 1.0, 1.0).unwrap(), 255);
        assert_eq!(quantize_hsv(180.0, 0.5, 0.9).unwrap(), 133);
        assert_eq!(quantize_hsv(0.0, 1.0, 1.0).unwrap(), 7);
        assert_eq!(quantize_hsv(120.0, 1.0, 1.0).unwrap(), 87);
    }

    #[test]
    fn quantization_rejects_out_of_range() {
        assert!(quantize_hsv(360.0, 0.0, 0.0).is_err());
        assert!(quantize_hsv(-0.1, 0.0, 0.0).is_err());
        assert!(quantize_hsv(0.0, 1.01, 0.0).is_err());
        assert!(quantize_hsv(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn uniform_red() {
        let h = color_histogram(&image_of(&[[255, 0, 0]; 9])).unwrap();
        assert_eq!(h.bins()[7], 1.0);
        assert_eq!(h.bins().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn red_and_green() {
        let h = color_histogram(&image_of(&[[255, 0, 0], [0, 255, 0]])).unwrap();
        assert_eq!(h.bins()[7], 0.5);
        assert_eq!(h.bins()[87], 0.5);
        assert_eq!(h.bins().iter().filter(|&&b| b > 0.0).count(), 2);
    }

    #[test]
    fn empty_image() {
        assert!(matches!(
            color_histogram(&HsvImage::new(0, 0, vec![])),
            Err(Error::EmptyImage)
        ));
    }

    #[test]
    fn from_bins_checks_length() {
        assert!(ColorHistogram::from_bins(vec![0.0; 38]).is_err());
        assert!(ColorHistogram::from_bins(vec![1.0 / 256.0; 256]).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pixels() -> impl Strategy<Value = Vec<[u8; 3]>> {
            prop::collection::vec(any::<[u8; 3]>(), 1..200)
        }

        proptest! {
            #[test]
            fn mass_is_conserved(px in pixels()) {
                let h = color_histogram(&image_of(&px)).unwrap();
                prop_assert!((h.bins().iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(h.bins().iter().all(|&b| b >= 0.0));
            }

            #[test]
            fn permutation_invariant(px in pixels(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut shuffled = px.clone();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert_eq!(
                    color_histogram(&image_of(&px)).unwrap(),
                    color_histogram(&image_of(&shuffled)).unwrap()
                );
            }

            #[test]
            fn one_pixel_change_touches_at_most_two_bins(
                px in pixels(), idx in any::<prop::sample::Index>(), new in any::<[u8; 3]>()
            ) {
                let before = color_histogram(&image_of(&px)).unwrap();
                let mut changed = px.clone();
                changed[idx.index(px.len())] = new;
                let after = color_histogram(&image_of(&changed)).unwrap();
                let step = 1.0 / px.len() as f64;
                let diffs: Vec<f64> = before.bins().iter().zip(after.bins())
                    .map(|(a, b)| (a - b).abs())
                    .filter(|d| *d > 0.0)
                    .collect();
                prop_assert!(diffs.is_empty() || diffs.len() == 2);
                for d in diffs {
                    prop_assert!((d - step).abs() < 1e-12);
                }
            }

            #[test]
            fn every_valid_coordinate_has_a_bin(h in 0.0f64..360.0, s in 0.0f64..=1.0, v in 0.0f64..=1.0) {
                prop_assert!(quantize_hsv(h, s, v).unwrap() < HISTOGRAM_BINS);
            }
        }
    }
}
