//! Latent quantization cue: probe an image with a codec's analysis
//! transform and measure, per latent channel, the normalized correlation
//! between the coefficients and their nearest-integer rounding. Previously
//! compressed images re-analyze onto (multiples of) the integer grid, so
//! active channels correlate strongly; never-quantized images do not.

use crate::codecs::{build_codec, CodecSettings};
use crate::error::{Error, Result};
use crate::imagecore::{center_crop, ImageBuffer};

/// Full mode correlates against the rounded vector; truncated mode first
/// maps its nonzero entries to their signs, isolating the zero/nonzero
/// pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuantMode {
    Full,
    Truncated,
}

impl QuantMode {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantMode::Full => "full",
            QuantMode::Truncated => "truncated",
        }
    }
}

impl std::str::FromStr for QuantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(QuantMode::Full),
            "truncated" => Ok(QuantMode::Truncated),
            other => Err(Error::InvalidCodecSettings(format!(
                "unknown quant mode `{other}` (use full or truncated)"
            ))),
        }
    }
}

/// Which latents the probe inspects: the analysis-transform output before
/// quantization (default), or the coded latents after quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum ProbeSource {
    #[default]
    Analysis,
    Coded,
}

/// Probe geometry: a fixed center crop keeps the latent dimensions equal
/// across images.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuantCueConfig {
    pub patch: usize,
    pub mode: QuantMode,
    pub probe_source: ProbeSource,
}

impl Default for QuantCueConfig {
    fn default() -> Self {
        QuantCueConfig {
            patch: 256,
            mode: QuantMode::Full,
            probe_source: ProbeSource::Analysis,
        }
    }
}

/// Per-channel correlations phi(y_c); length equals the probing codec's
/// channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantFeature {
    pub mode: QuantMode,
    pub values: Vec<f64>,
    pub channel_count: usize,
}

/// Arithmetic mean over channels.
pub fn mean_phi(feature: &QuantFeature) -> f64 {
    if feature.values.is_empty() {
        return 0.0;
    }
    feature.values.iter().sum::<f64>() / feature.values.len() as f64
}

/// Correlation of one channel with its rounding (ties away from zero).
/// Returns the sentinel 0 if either vector has zero norm.
pub fn channel_phi(y_c: &[f64], mode: QuantMode) -> Result<f64> {
    if y_c.is_empty() {
        return Err(Error::EmptyVector);
    }
    if y_c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGeometry(
            "non-finite latent value in phi input".into(),
        ));
    }
    let mut dot = 0.0f64;
    let mut ny = 0.0f64;
    let mut nr = 0.0f64;
    for &v in y_c {
        let mut r = v.round();
        if mode == QuantMode::Truncated {
            r = r.signum() * f64::from(r != 0.0);
        }
        dot += v * r;
        ny += v * v;
        nr += r * r;
    }
    if ny == 0.0 || nr == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (ny.sqrt() * nr.sqrt()))
}

/// Probe an image: center-crop, run the codec's analysis transform, and
/// compute phi for every latent channel over the spatial coordinates.
pub fn extract_quant_features(
    img: &ImageBuffer,
    settings: &CodecSettings,
    config: &QuantCueConfig,
) -> Result<QuantFeature> {
    let codec = build_codec(settings)?;
    let patch = center_crop(img, config.patch, config.patch)?;
    let latent = match config.probe_source {
        ProbeSource::Analysis => codec.analysis(&patch)?,
        ProbeSource::Coded => codec
            .encode_decode(&patch)?
            .latent
            .ok_or_else(|| Error::LatentUnavailable {
                codec: codec.id().to_string(),
            })?,
    };
    let values: Result<Vec<f64>> = (0..latent.channels())
        .map(|c| channel_phi(latent.channel(c), config.mode))
        .collect();
    Ok(QuantFeature {
        mode: config.mode,
        values: values?,
        channel_count: latent.channels(),
    })
}
