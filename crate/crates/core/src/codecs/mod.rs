//! Pluggable lossy-codec abstraction: decoded images, latent tensors, and
//! rate accounting, with three implementations (DCT block codec, simulated
//! latent codec, external subprocess adapter) plus a lossless identity
//! codec for tests.

mod baseline_dct;
mod blocks;
mod dct;
mod entropy;
mod external;
mod identity;
mod sim_latent;

pub use baseline_dct::BaselineDctCodec;
pub use dct::{zigzag_order, Dct2d};
pub use external::{read_latent_file, write_latent_file, ExternalCodec};
pub use identity::IdentityCodec;
pub use sim_latent::{SimLatentCodec, C320_CHANNELS, REAL_CHANNELS};

use crate::error::{Error, Result};
use crate::imagecore::ImageBuffer;

/// Codec selection plus one strength scalar. The meaning of `strength`
/// depends on the codec: quality 1..=100 for `baseline_dct`, quantizer step
/// (> 0) for `sim_latent`, target bpp for `external`, ignored by `identity`.
/// `seed` is reserved for stochastic codecs; every in-repo codec is
/// deterministic and ignores it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CodecSettings {
    pub codec_id: String,
    pub strength: f64,
    #[serde(default)]
    pub seed: u64,
    /// Command invoked by the `external` codec adapter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_command: Option<String>,
}

impl CodecSettings {
    pub fn identity() -> Self {
        CodecSettings {
            codec_id: "identity".into(),
            strength: 0.0,
            seed: 0,
            external_command: None,
        }
    }

    pub fn baseline_dct(quality: u32) -> Self {
        CodecSettings {
            codec_id: "baseline_dct".into(),
            strength: quality as f64,
            seed: 0,
            external_command: None,
        }
    }

    pub fn sim_latent(step: f64) -> Self {
        CodecSettings {
            codec_id: "sim_latent".into(),
            strength: step,
            seed: 0,
            external_command: None,
        }
    }

    pub fn sim_latent_c320(step: f64) -> Self {
        CodecSettings {
            codec_id: "sim_latent_c320".into(),
            strength: step,
            seed: 0,
            external_command: None,
        }
    }

    pub fn external(command: impl Into<String>, bpp: f64) -> Self {
        CodecSettings {
            codec_id: "external".into(),
            strength: bpp,
            seed: 0,
            external_command: Some(command.into()),
        }
    }
}

/// Parses `codec_id:strength`, e.g. `sim_latent:8` or `baseline_dct:50`;
/// bare `identity` is accepted. The `external` codec cannot be expressed
/// this way because it also needs a command line.
impl std::str::FromStr for CodecSettings {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(CodecSettings::identity());
        }
        let (id, strength) = s.split_once(':').ok_or_else(|| {
            Error::InvalidCodecSettings(format!("expected `codec_id:strength`, got `{s}`"))
        })?;
        let strength: f64 = strength.parse().map_err(|_| {
            Error::InvalidCodecSettings(format!("strength `{strength}` is not a number"))
        })?;
        let settings = match id {
            "identity" => CodecSettings::identity(),
            "baseline_dct" => CodecSettings {
                codec_id: id.into(),
                strength,
                seed: 0,
                external_command: None,
            },
            "sim_latent" => CodecSettings::sim_latent(strength),
            "sim_latent_c320" => CodecSettings::sim_latent_c320(strength),
            other => {
                return Err(Error::InvalidCodecSettings(format!(
                    "unknown codec id `{other}`"
                )))
            }
        };
        build_codec(&settings)?;
        Ok(settings)
    }
}

/// Latent representation: C channels over an H' x W' spatial grid,
/// channel-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl LatentTensor {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidGeometry(format!(
                "latent dims must be nonzero, got {channels}x{height}x{width}"
            )));
        }
        if values.len() != channels * height * width {
            return Err(Error::InvalidGeometry(format!(
                "latent value count {} does not match {channels}x{height}x{width}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "latent contains non-finite value {bad}"
            )));
        }
        Ok(LatentTensor {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn spatial_len(&self) -> usize {
        self.height * self.width
    }

    /// All samples of channel `c`, row-major.
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.spatial_len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Full round trip of one codec at fixed settings.
#[derive(Debug, Clone)]
pub struct CodecResult {
    pub decoded: ImageBuffer,
    /// Idealized coded size of the latent (or transform) coefficients.
    pub bits_y: u64,
    /// Idealized coded size of the side information; zero for codecs
    /// without one.
    pub bits_z: u64,
    /// Coded (quantized) latents, for codecs that expose them.
    pub latent: Option<LatentTensor>,
    pub source_width: usize,
    pub source_height: usize,
}

/// A constructed codec. Implementations are immutable and deterministic:
/// equal inputs and settings produce identical results.
pub trait Codec: Send + Sync {
    fn id(&self) -> &str;

    /// Encode then decode; reports rates and source dimensions.
    fn encode_decode(&self, img: &ImageBuffer) -> Result<CodecResult>;

    /// Analysis-transform output BEFORE quantization, for probing codecs.
    fn analysis(&self, img: &ImageBuffer) -> Result<LatentTensor> {
        let _ = img;
        Err(Error::LatentUnavailable {
            codec: self.id().to_string(),
        })
    }

    /// Whether bits_y/bits_z carry real rate information.
    fn reports_rates(&self) -> bool {
        true
    }
}

/// Instantiate the codec described by `settings`.
pub fn build_codec(settings: &CodecSettings) -> Result<Box<dyn Codec>> {
    match settings.codec_id.as_str() {
        "identity" => Ok(Box::new(IdentityCodec)),
        "baseline_dct" => {
            let q = settings.strength;
            if q < 1.0 || q > 100.0 || q.fract() != 0.0 {
                return Err(Error::InvalidCodecSettings(format!(
                    "baseline_dct quality must be an integer in 1..=100, got {q}"
                )));
            }
            Ok(Box::new(BaselineDctCodec::new(q as u32)))
        }
        "sim_latent" => Ok(Box::new(SimLatentCodec::new(settings.strength)?)),
        "sim_latent_c320" => Ok(Box::new(SimLatentCodec::with_c320_preset(settings.strength)?)),
        "external" => {
            let cmd = settings.external_command.as_deref().ok_or_else(|| {
                Error::InvalidCodecSettings(
                    "external codec requires `external_command`".into(),
                )
            })?;
            Ok(Box::new(ExternalCodec::new(cmd, settings.strength)?))
        }
        other => Err(Error::InvalidCodecSettings(format!(
            "unknown codec id `{other}`"
        ))),
    }
}

/// Convenience wrapper: build the codec and run one round trip.
pub fn encode_decode(img: &ImageBuffer, settings: &CodecSettings) -> Result<CodecResult> {
    build_codec(settings)?.encode_decode(img)
}

/// Recompress `k` times with the same settings; element `i` is the round
/// trip of element `i-1`'s decoded image. Errors identify the failing step
/// (1-based).
pub fn recompress_chain(
    img: &ImageBuffer,
    settings: &CodecSettings,
    k: usize,
) -> Result<Vec<CodecResult>> {
    recompress_chain_with(img, build_codec(settings)?.as_ref(), k)
}

/// [`recompress_chain`] with an existing codec instance.
pub fn recompress_chain_with(
    img: &ImageBuffer,
    codec: &dyn Codec,
    k: usize,
) -> Result<Vec<CodecResult>> {
    if k == 0 {
        return Err(Error::InvalidCodecSettings(
            "recompress_chain requires k >= 1".into(),
        ));
    }
    let mut results: Vec<CodecResult> = Vec::with_capacity(k);
    for step in 1..=k {
        let input = match results.last() {
            Some(prev) => &prev.decoded,
            None => img,
        };
        let r = codec.encode_decode(input).map_err(|e| Error::RecompressStep {
            step,
            source: Box::new(e),
        })?;
        results.push(r);
    }
    Ok(results)
}
