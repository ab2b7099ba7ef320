//! Simulated latent codec: an exactly invertible block-transform analysis
//! whose output is organized as latent channels, with uniform scalar
//! quantization in the latent domain and a small side-information rate.
//!
//! Analysis maps each YUV 4:4:4 plane through a non-overlapping 8x8 DCT and
//! regroups coefficients so one (plane, frequency) pair forms one latent
//! channel; channels are ordered luma-then-chroma, low-to-high frequency
//! (zigzag). Latent values are pre-divided by the channel's quantizer step
//! (global step x per-channel weight), so quantization is plain rounding
//! to integers and decoded images re-analyze onto the integer grid.

use super::baseline_dct::{CHROMA_TABLE, LUMA_TABLE};
use super::blocks::{extract_block, pad_to_multiple, store_block, unpad};
use super::dct::{zigzag_order, Dct2d};
use super::entropy::{stream_bits, total_bits};
use super::{Codec, CodecResult, LatentTensor};
use crate::error::{Error, Result};
use crate::imagecore::{rgb_to_yuv, yuv_to_rgb, Colorspace, ImageBuffer, Plane, SampleFormat};

const BLOCK: usize = 8;
/// Independent channels: 3 planes x 64 frequencies.
pub const REAL_CHANNELS: usize = 3 * BLOCK * BLOCK;
/// Channel count of the wide preset.
pub const C320_CHANNELS: usize = 320;
/// Chroma quantizes coarser than luma by this factor.
const CHROMA_WEIGHT_FACTOR: f64 = 2.0;
const LEVEL_SHIFT: f64 = 128.0;
/// Side-information quantizer step (log-variance units).
const Z_STEP: f64 = 0.5;
/// Side-information pooling factor over the latent grid.
const Z_POOL: usize = 4;

/// Per-channel quantizer weights, normalized so the luma DC weight is 1.
fn channel_weights() -> Vec<f64> {
    let zz = zigzag_order(BLOCK);
    let mut weights = Vec::with_capacity(REAL_CHANNELS);
    for plane in 0..3 {
        for &(u, v) in &zz {
            let (table, factor): (&[u16; 64], f64) = if plane == 0 {
                (&LUMA_TABLE, 1.0)
            } else {
                (&CHROMA_TABLE, CHROMA_WEIGHT_FACTOR)
            };
            weights.push(factor * table[u * BLOCK + v] as f64 / 16.0);
        }
    }
    weights
}

pub struct SimLatentCodec {
    step: f64,
    wide: bool,
    dct: Dct2d,
    weights: Vec<f64>,
    zigzag: Vec<(usize, usize)>,
}

impl SimLatentCodec {
    /// Default configuration: C = 192 independent channels.
    pub fn new(step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidCodecSettings(format!(
                "sim_latent step must be positive and finite, got {step}"
            )));
        }
        Ok(SimLatentCodec {
            step,
            wide: false,
            dct: Dct2d::new(BLOCK),
            weights: channel_weights(),
            zigzag: zigzag_order(BLOCK),
        })
    }

    /// Wide preset with C = 320 channels: the 192 independent channels
    /// plus 128 grouped duplicates of the lowest channels. Synthesis reads
    /// only the independent channels, so invertibility is unchanged; rate
    /// accounting also covers only the independent channels.
    pub fn with_c320_preset(step: f64) -> Result<Self> {
        let mut codec = SimLatentCodec::new(step)?;
        codec.wide = true;
        Ok(codec)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn channel_count(&self) -> usize {
        if self.wide {
            C320_CHANNELS
        } else {
            REAL_CHANNELS
        }
    }

    /// Latent grid dimensions for a source of size `w`x`h`.
    pub fn latent_dims(&self, w: usize, h: usize) -> (usize, usize) {
        (h.div_ceil(BLOCK), w.div_ceil(BLOCK))
    }

    fn check_input(&self, img: &ImageBuffer) -> Result<()> {
        img.expect_colorspace(Colorspace::Rgb)?;
        if img.format() != SampleFormat::U8 {
            return Err(Error::InvalidGeometry(
                "sim_latent requires 8-bit samples".into(),
            ));
        }
        Ok(())
    }

    /// Unquantized latents of the padded YUV planes, channel-major,
    /// independent channels only.
    fn analysis_planes(&self, yuv: &[Plane]) -> (Vec<f64>, usize, usize) {
        let padded: Vec<Plane> = yuv.iter().map(|p| pad_to_multiple(p, BLOCK)).collect();
        let (gh, gw) = (padded[0].height() / BLOCK, padded[0].width() / BLOCK);
        let spatial = gh * gw;
        let mut latent = vec![0.0f64; REAL_CHANNELS * spatial];
        let mut block = vec![0.0f64; BLOCK * BLOCK];
        let mut freq = vec![0.0f64; BLOCK * BLOCK];
        for (plane_idx, plane) in padded.iter().enumerate() {
            for by in 0..gh {
                for bx in 0..gw {
                    extract_block(plane, bx, by, BLOCK, -LEVEL_SHIFT, &mut block);
                    self.dct.forward(&block, &mut freq);
                    for (zz, &(u, v)) in self.zigzag.iter().enumerate() {
                        let c = plane_idx * BLOCK * BLOCK + zz;
                        latent[c * spatial + by * gw + bx] =
                            freq[u * BLOCK + v] / (self.step * self.weights[c]);
                    }
                }
            }
        }
        (latent, gh, gw)
    }

    /// Inverse of [`Self::analysis_planes`]: padded YUV planes from
    /// independent-channel latents, without clamping.
    fn synthesis_planes(&self, latent: &[f64], gh: usize, gw: usize) -> Vec<Plane> {
        let spatial = gh * gw;
        debug_assert_eq!(latent.len(), REAL_CHANNELS * spatial);
        let (ph, pw) = (gh * BLOCK, gw * BLOCK);
        let mut planes = Vec::with_capacity(3);
        let mut freq = vec![0.0f64; BLOCK * BLOCK];
        let mut block = vec![0.0f64; BLOCK * BLOCK];
        for plane_idx in 0..3 {
            let mut plane = Plane::new(pw, ph).expect("nonzero dims");
            for by in 0..gh {
                for bx in 0..gw {
                    for (zz, &(u, v)) in self.zigzag.iter().enumerate() {
                        let c = plane_idx * BLOCK * BLOCK + zz;
                        freq[u * BLOCK + v] =
                            latent[c * spatial + by * gw + bx] * (self.step * self.weights[c]);
                    }
                    self.dct.inverse(&freq, &mut block);
                    store_block(&mut plane, bx, by, BLOCK, LEVEL_SHIFT, &block);
                }
            }
            planes.push(plane);
        }
        planes
    }

    /// Append grouped duplicate channels for the wide preset.
    fn widen(&self, mut latent: Vec<f64>, spatial: usize) -> Vec<f64> {
        if self.wide {
            let dup = (C320_CHANNELS - REAL_CHANNELS) * spatial;
            latent.extend_from_within(..dup);
        }
        latent
    }

    /// Side-information rate: per-site log-variance of the latents, mean
    /// pooled, quantized, entropy-estimated.
    fn z_bits(&self, latent: &[f64], gh: usize, gw: usize) -> u64 {
        let spatial = gh * gw;
        let mut logvar = vec![0.0f64; spatial];
        for (site, lv) in logvar.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut sq = 0.0;
            for c in 0..REAL_CHANNELS {
                let v = latent[c * spatial + site];
                sum += v;
                sq += v * v;
            }
            let n = REAL_CHANNELS as f64;
            let var = (sq / n - (sum / n) * (sum / n)).max(0.0);
            *lv = (1.0 + var).ln();
        }
        let (zh, zw) = (gh.div_ceil(Z_POOL), gw.div_ceil(Z_POOL));
        let mut symbols = Vec::with_capacity(zh * zw);
        for zy in 0..zh {
            for zx in 0..zw {
                let mut sum = 0.0;
                let mut count = 0u32;
                for dy in 0..Z_POOL {
                    for dx in 0..Z_POOL {
                        let (y, x) = (zy * Z_POOL + dy, zx * Z_POOL + dx);
                        if y < gh && x < gw {
                            sum += logvar[y * gw + x];
                            count += 1;
                        }
                    }
                }
                symbols.push((sum / count as f64 / Z_STEP).round() as i64);
            }
        }
        stream_bits(&symbols).ceil() as u64
    }

    /// Decode an RGB image of size `out_w`x`out_h` from latents (in latent
    /// units, i.e. already divided by the channel quantizer step). Accepts
    /// tensors of either the independent or the wide channel count; only
    /// independent channels contribute.
    pub fn synthesize_from_latent(
        &self,
        latent: &LatentTensor,
        out_w: usize,
        out_h: usize,
    ) -> Result<ImageBuffer> {
        let c = latent.channels();
        if c != REAL_CHANNELS && c != C320_CHANNELS {
            return Err(Error::InvalidGeometry(format!(
                "latent has {c} channels; expected {REAL_CHANNELS} or {C320_CHANNELS}"
            )));
        }
        let (gh, gw) = (latent.height(), latent.width());
        if gh * BLOCK < out_h || gw * BLOCK < out_w {
            return Err(Error::InvalidGeometry(format!(
                "latent grid {gh}x{gw} cannot cover a {out_w}x{out_h} image"
            )));
        }
        let spatial = gh * gw;
        let planes = self.synthesis_planes(&latent.values()[..REAL_CHANNELS * spatial], gh, gw);
        let clamped: Vec<Plane> = planes
            .iter()
            .map(|p| unpad(&p.map(|v| v.clamp(0.0, 255.0)), out_w, out_h))
            .collect();
        let yuv = ImageBuffer::new(Colorspace::Yuv444, SampleFormat::U8, clamped)?;
        yuv_to_rgb(&yuv)
    }
}

impl Codec for SimLatentCodec {
    fn id(&self) -> &str {
        if self.wide {
            "sim_latent_c320"
        } else {
            "sim_latent"
        }
    }

    fn encode_decode(&self, img: &ImageBuffer) -> Result<CodecResult> {
        self.check_input(img)?;
        let (w, h) = (img.width(), img.height());
        let yuv = rgb_to_yuv(img)?;
        let (raw, gh, gw) = self.analysis_planes(yuv.planes());
        let spatial = gh * gw;
        let quantized: Vec<f64> = raw.iter().map(|&v| v.round()).collect();
        let streams: Vec<Vec<i64>> = (0..REAL_CHANNELS)
            .map(|c| {
                quantized[c * spatial..(c + 1) * spatial]
                    .iter()
                    .map(|&v| v as i64)
                    .collect()
            })
            .collect();
        let bits_y = total_bits(streams.iter().map(|s| s.as_slice()));
        let bits_z = self.z_bits(&raw, gh, gw);
        let tensor = LatentTensor::new(
            self.channel_count(),
            gh,
            gw,
            self.widen(quantized.clone(), spatial),
        )?;
        let decoded = self.synthesize_from_latent(
            &LatentTensor::new(REAL_CHANNELS, gh, gw, quantized)?,
            w,
            h,
        )?;
        Ok(CodecResult {
            decoded,
            bits_y,
            bits_z,
            latent: Some(tensor),
            source_width: w,
            source_height: h,
        })
    }

    fn analysis(&self, img: &ImageBuffer) -> Result<LatentTensor> {
        self.check_input(img)?;
        let yuv = rgb_to_yuv(img)?;
        let (raw, gh, gw) = self.analysis_planes(yuv.planes());
        let spatial = gh * gw;
        LatentTensor::new(self.channel_count(), gh, gw, self.widen(raw, spatial))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::psnr;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn textured_image(seed: u64, w: usize, h: usize) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bytes: Vec<u8> = (0..w * h * 3)
            .map(|i| {
                let x = (i / 3) % w;
                let y = (i / 3) / w;
                let smooth = 100.0 + 60.0 * ((x as f64 / 9.0).sin() * (y as f64 / 7.0).cos());
                (smooth + rng.random_range(-20.0..20.0)).clamp(0.0, 255.0) as u8
            })
            .collect();
        ImageBuffer::from_rgb8(w, h, &bytes).unwrap()
    }

    #[test]
    fn analysis_synthesis_is_identity_without_quantization() {
        let codec = SimLatentCodec::new(4.0).unwrap();
        let img = textured_image(1, 40, 24);
        let yuv = rgb_to_yuv(&img).unwrap();
        let (latent, gh, gw) = codec.analysis_planes(yuv.planes());
        let back = codec.synthesis_planes(&latent, gh, gw);
        for (orig, rec) in yuv.planes().iter().zip(&back) {
            for y in 0..orig.height() {
                for x in 0..orig.width() {
                    let d = (orig.get(x, y) as f64 - rec.get(x, y) as f64).abs();
                    assert!(d < 1e-6, "({x},{y}): {d}");
                }
            }
        }
    }

    #[test]
    fn channel_weights_are_positive_with_unit_luma_dc() {
        let w = channel_weights();
        assert_eq!(w.len(), REAL_CHANNELS);
        assert_eq!(w[0], 1.0);
        assert!(w.iter().all(|&v| v > 0.0));
        // Chroma DC coarser than luma DC.
        assert!(w[64] > w[0]);
    }

    #[test]
    fn decoded_latents_are_integers() {
        let codec = SimLatentCodec::new(4.0).unwrap();
        let img = textured_image(2, 32, 32);
        let r = codec.encode_decode(&img).unwrap();
        let latent = r.latent.unwrap();
        assert_eq!(latent.channels(), REAL_CHANNELS);
        assert!(latent.values().iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn reanalysis_of_decoded_lands_near_integer_grid() {
        let codec = SimLatentCodec::new(4.0).unwrap();
        let img = textured_image(3, 48, 48);
        let decoded = codec.encode_decode(&img).unwrap().decoded;
        let y = codec.analysis(&decoded).unwrap();
        let mean_dist: f64 = y
            .values()
            .iter()
            .map(|&v| (v - v.round()).abs())
            .sum::<f64>()
            / y.values().len() as f64;
        assert!(mean_dist < 0.05, "mean distance to grid {mean_dist}");
    }

    #[test]
    fn coarse_step_hurts_psnr_and_rate_tracks_step() {
        let img = textured_image(4, 64, 64);
        let fine = SimLatentCodec::new(1.0).unwrap().encode_decode(&img).unwrap();
        let coarse = SimLatentCodec::new(8.0).unwrap().encode_decode(&img).unwrap();
        assert!(
            psnr(&img, &fine.decoded).unwrap() > psnr(&img, &coarse.decoded).unwrap()
        );
        assert!(fine.bits_y > coarse.bits_y);
    }

    #[test]
    fn halving_the_step_never_decreases_rate() {
        for seed in 0..3 {
            let img = textured_image(10 + seed, 40, 40);
            let mut prev_bits = 0u64;
            for step in [16.0, 8.0, 4.0, 2.0, 1.0] {
                let r = SimLatentCodec::new(step).unwrap().encode_decode(&img).unwrap();
                assert!(
                    r.bits_y >= prev_bits,
                    "step {step}: {} < {prev_bits}",
                    r.bits_y
                );
                prev_bits = r.bits_y;
            }
        }
    }

    #[test]
    fn side_information_is_small_but_present() {
        let img = textured_image(5, 64, 64);
        let r = SimLatentCodec::new(2.0).unwrap().encode_decode(&img).unwrap();
        assert!(r.bits_z > 0);
        assert!(r.bits_z < r.bits_y / 4);
    }

    #[test]
    fn wide_preset_duplicates_low_channels() {
        let codec = SimLatentCodec::with_c320_preset(2.0).unwrap();
        let img = textured_image(6, 32, 24);
        let y = codec.analysis(&img).unwrap();
        assert_eq!(y.channels(), C320_CHANNELS);
        for c in 0..(C320_CHANNELS - REAL_CHANNELS) {
            assert_eq!(y.channel(REAL_CHANNELS + c), y.channel(c));
        }
    }

    #[test]
    fn wide_preset_decodes_identically_to_base() {
        let img = textured_image(7, 40, 32);
        let base = SimLatentCodec::new(3.0).unwrap().encode_decode(&img).unwrap();
        let wide = SimLatentCodec::with_c320_preset(3.0)
            .unwrap()
            .encode_decode(&img)
            .unwrap();
        assert_eq!(base.decoded, wide.decoded);
        assert_eq!(base.bits_y, wide.bits_y);
        assert_eq!(wide.latent.unwrap().channels(), C320_CHANNELS);
    }

    #[test]
    fn latent_dims_follow_block_grid() {
        let codec = SimLatentCodec::new(1.0).unwrap();
        assert_eq!(codec.latent_dims(256, 256), (32, 32));
        assert_eq!(codec.latent_dims(13, 9), (2, 2));
        let img = textured_image(8, 13, 9);
        let y = codec.analysis(&img).unwrap();
        assert_eq!((y.height(), y.width()), (2, 2));
        let r = codec.encode_decode(&img).unwrap();
        assert_eq!(r.decoded.width(), 13);
        assert_eq!(r.decoded.height(), 9);
    }

    #[test]
    fn rejects_invalid_steps() {
        assert!(SimLatentCodec::new(0.0).is_err());
        assert!(SimLatentCodec::new(-1.0).is_err());
        assert!(SimLatentCodec::new(f64::NAN).is_err());
    }

    #[test]
    fn synthesize_rejects_wrong_channel_count() {
        let codec = SimLatentCodec::new(1.0).unwrap();
        let t = LatentTensor::new(10, 4, 4, vec![0.0; 160]).unwrap();
        assert!(codec.synthesize_from_latent(&t, 32, 32).is_err());
        let ok = LatentTensor::new(REAL_CHANNELS, 4, 4, vec![0.0; REAL_CHANNELS * 16]).unwrap();
        assert!(codec.synthesize_from_latent(&ok, 32, 32).is_ok());
        assert!(codec.synthesize_from_latent(&ok, 64, 64).is_err());
    }
}
