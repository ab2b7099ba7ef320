//! Color-channel correlation cue: compression pipelines that convert to
//! YUV and subsample chroma leave the R, G, B highpass residuals more
//! similar to each other than in untouched images. Per image row, the
//! correlation between the absolute residual differences around a center
//! channel yields one value; a centrally cropped patch gives one feature
//! vector per center channel.

use crate::error::{Error, Result};
use crate::imagecore::{
    center_crop, chroma_downsample_420, chroma_upsample_420, highpass_residual, rgb_to_yuv,
    yuv_to_rgb, FilterId, ImageBuffer,
};

/// Which channel sits in the middle of the two residual differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CenterChannel {
    R,
    G,
    B,
}

impl CenterChannel {
    pub const ALL: [CenterChannel; 3] = [CenterChannel::R, CenterChannel::G, CenterChannel::B];

    pub fn as_str(self) -> &'static str {
        match self {
            CenterChannel::R => "r",
            CenterChannel::G => "g",
            CenterChannel::B => "b",
        }
    }

    /// Plane indices (center, outer1, outer2) into an RGB image.
    fn ordering(self) -> (usize, usize, usize) {
        match self {
            CenterChannel::R => (0, 1, 2),
            CenterChannel::G => (1, 0, 2),
            CenterChannel::B => (2, 0, 1),
        }
    }
}

impl std::str::FromStr for CenterChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(CenterChannel::R),
            "g" => Ok(CenterChannel::G),
            "b" => Ok(CenterChannel::B),
            other => Err(Error::InvalidCodecSettings(format!(
                "unknown center channel `{other}`"
            ))),
        }
    }
}

/// Patch geometry and filter selection for the color cue.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColorCueConfig {
    pub patch_width: usize,
    pub patch_height: usize,
    pub filter_id: FilterId,
}

impl Default for ColorCueConfig {
    fn default() -> Self {
        ColorCueConfig {
            patch_width: 512,
            patch_height: 512,
            filter_id: FilterId::default(),
        }
    }
}

/// Per-row correlations for one center channel; length equals the patch
/// height. Values lie in [0,1], with 0 doubling as the flat-row sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorCorrFeature {
    pub center_channel: CenterChannel,
    pub values: Vec<f64>,
    pub filter_id: FilterId,
}

impl ColorCorrFeature {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Normalized cross-correlation between the two absolute residual
/// differences |center-outer1| and |center-outer2|. Returns the sentinel 0
/// when either difference vector has zero norm.
pub fn row_color_correlation(
    r_row: &[f64],
    g_row: &[f64],
    b_row: &[f64],
    center: CenterChannel,
) -> Result<f64> {
    if r_row.len() != g_row.len() || g_row.len() != b_row.len() {
        return Err(Error::LengthMismatch {
            left: r_row.len(),
            right: if r_row.len() != g_row.len() {
                g_row.len()
            } else {
                b_row.len()
            },
        });
    }
    if r_row.is_empty() {
        return Err(Error::EmptyVector);
    }
    let rows = [r_row, g_row, b_row];
    let (c, o1, o2) = center.ordering();
    let mut dot = 0.0f64;
    let mut n1 = 0.0f64;
    let mut n2 = 0.0f64;
    for i in 0..r_row.len() {
        let d1 = (rows[o1][i] - rows[c][i]).abs();
        let d2 = (rows[c][i] - rows[o2][i]).abs();
        dot += d1 * d2;
        n1 += d1 * d1;
        n2 += d2 * d2;
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (n1.sqrt() * n2.sqrt()))
}

/// Extract the three per-row correlation vectors (centers R, G, B) from a
/// centrally cropped patch of an RGB image.
pub fn extract_color_features(
    img: &ImageBuffer,
    config: &ColorCueConfig,
) -> Result<[ColorCorrFeature; 3]> {
    let patch = center_crop(img, config.patch_width, config.patch_height)?;
    let residuals = [
        highpass_residual(patch.plane(0), config.filter_id)?,
        highpass_residual(patch.plane(1), config.filter_id)?,
        highpass_residual(patch.plane(2), config.filter_id)?,
    ];
    let mut features = Vec::with_capacity(3);
    for center in CenterChannel::ALL {
        let mut values = Vec::with_capacity(config.patch_height);
        for y in 0..config.patch_height {
            values.push(row_color_correlation(
                residuals[0].row(y),
                residuals[1].row(y),
                residuals[2].row(y),
                center,
            )?);
        }
        features.push(ColorCorrFeature {
            center_channel: center,
            values,
            filter_id: config.filter_id,
        });
    }
    Ok(features.try_into().expect("three centers"))
}

/// The compression color pipeline with no quantization: RGB -> YUV ->
/// 4:2:0 down -> up -> RGB. Raises residual correlations on textured
/// images without touching image content otherwise.
pub fn preprocess_only(img: &ImageBuffer) -> Result<ImageBuffer> {
    yuv_to_rgb(&chroma_upsample_420(&chroma_downsample_420(&rgb_to_yuv(
        img,
    )?)?)?)
}
