//! Procedural image sources for desk-scale experiments: textured images
//! (multi-octave value noise + gradients + independent per-channel sensor
//! noise), plain noise fields, and decoder-style synthesis from continuous
//! random latents.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::codecs::{LatentTensor, SimLatentCodec, REAL_CHANNELS};
use crate::error::Result;
use crate::imagecore::ImageBuffer;

/// Standard normal sample via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Smooth value noise in [-1, 1]: a random lattice with `cell`-pixel spacing,
/// bilinearly interpolated to full resolution.
fn value_noise(width: usize, height: usize, cell: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gw = width / cell + 2;
    let gh = height / cell + 2;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        let fy = y as f64 / cell as f64;
        let y0 = fy as usize;
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = x as f64 / cell as f64;
            let x0 = fx as usize;
            let tx = fx - x0 as f64;
            let v00 = lattice[y0 * gw + x0];
            let v01 = lattice[y0 * gw + x0 + 1];
            let v10 = lattice[(y0 + 1) * gw + x0];
            let v11 = lattice[(y0 + 1) * gw + x0 + 1];
            let top = v00 + (v01 - v00) * tx;
            let bot = v10 + (v11 - v10) * tx;
            out[y * width + x] = top + (bot - top) * ty;
        }
    }
    out
}

/// Textured RGB test image: layered value noise plus a global gradient forms
/// shared luma structure; low-frequency fields tint the chroma, and a
/// piecewise-constant region field adds sharp chroma borders to the green
/// channel only, so no two channel-difference residuals share structure.
/// Sensor noise (sigma drawn from [0.1, 0.5]) stays small enough not to
/// swamp that layout.
pub fn synth_textured(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves: [(usize, f64); 4] = [(64, 36.0), (32, 20.0), (16, 10.0), (8, 5.0)];
    let mut luma = vec![128.0f64; width * height];
    let gx: f64 = rng.random_range(-40.0..40.0);
    let gy: f64 = rng.random_range(-40.0..40.0);
    for y in 0..height {
        for x in 0..width {
            let u = x as f64 / width as f64 - 0.5;
            let v = y as f64 / height as f64 - 0.5;
            luma[y * width + x] += gx * u + gy * v;
        }
    }
    for (cell, amp) in octaves {
        let n = value_noise(width, height, cell, &mut rng);
        for (l, v) in luma.iter_mut().zip(&n) {
            *l += amp * v;
        }
    }
    let tint1 = value_noise(width, height, 48, &mut rng);
    let tint2 = value_noise(width, height, 40, &mut rng);
    let region: Vec<f64> = value_noise(width, height, 20, &mut rng)
        .iter()
        .map(|&v| if v > 0.15 { 1.0 } else { 0.0 })
        .collect();
    let region_mean = region.iter().sum::<f64>() / region.len() as f64;
    let sigmas: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..0.5));
    let mut channels = vec![vec![0.0f64; width * height]; 3];
    for i in 0..width * height {
        let l = luma[i];
        channels[0][i] = l + 18.0 * tint1[i];
        channels[1][i] = l - 8.0 * tint1[i] + 9.0 * tint2[i] + 20.0 * (region[i] - region_mean);
        channels[2][i] = l + 20.0 * tint2[i];
    }
    for (c, sigma) in sigmas.iter().enumerate() {
        for v in channels[c].iter_mut() {
            *v += sigma * gaussian(&mut rng);
        }
    }
    let mut rgb = Vec::with_capacity(width * height * 3);
    for i in 0..width * height {
        for chan in &channels {
            rgb.push(chan[i].round().clamp(0.0, 255.0) as u8);
        }
    }
    ImageBuffer::from_rgb8(width, height, &rgb).expect("generated image is valid")
}

/// Mid-gray RGB image with independent Gaussian noise per sample.
pub fn synth_noise(width: usize, height: usize, seed: u64, sigma: f64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rgb: Vec<u8> = (0..width * height * 3)
        .map(|_| (128.0 + sigma * gaussian(&mut rng)).round().clamp(0.0, 255.0) as u8)
        .collect();
    ImageBuffer::from_rgb8(width, height, &rgb).expect("generated image is valid")
}

/// Decoder-style synthesis: continuous random latents (never quantized) run
/// through the synthesis transform. DC channels get a smooth spatial field so
/// blocks form coherent structure; AC amplitude decays with frequency index.
pub fn synth_decoder_like(width: usize, height: usize, seed: u64) -> Result<ImageBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_CAFE);
    let codec = SimLatentCodec::new(1.0)?;
    let (gh, gw) = codec.latent_dims(width, height);
    let sites = gh * gw;
    let mut values = Vec::with_capacity(REAL_CHANNELS * sites);
    for c in 0..REAL_CHANNELS {
        let plane = c / 64;
        let z = (c % 64) as f64;
        let base = if plane == 0 { 55.0 } else { 22.0 };
        if c % 64 == 0 {
            // Smooth DC field over the block grid.
            let field = value_noise(gw, gh, 4.max(gw / 8), &mut rng);
            values.extend(field.iter().map(|v| base * v));
        } else {
            let sigma = base / (1.0 + 0.6 * z);
            values.extend((0..sites).map(|_| sigma * gaussian(&mut rng)));
        }
    }
    let latent = LatentTensor::new(REAL_CHANNELS, gh, gw, values)?;
    codec.synthesize_from_latent(&latent, width, height)
}
