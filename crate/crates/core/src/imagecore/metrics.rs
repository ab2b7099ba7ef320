//! Distortion metrics.

use super::ImageBuffer;
use crate::error::{Error, Result};

/// PSNR value reported when the images are identical (zero MSE), keeping
/// feature vectors finite.
pub const PSNR_CAP_DB: f64 = 100.0;

fn check_compatible(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.colorspace() != b.colorspace()
        || a.format() != b.format()
        || a.width() != b.width()
        || a.height() != b.height()
    {
        return Err(Error::DimensionMismatch {
            left: format!("{:?} {}x{}", a.colorspace(), a.width(), a.height()),
            right: format!("{:?} {}x{}", b.colorspace(), b.width(), b.height()),
        });
    }
    Ok(())
}

/// Mean squared error over all samples of all planes.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check_compatible(a, b)?;
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for (pa, pb) in a.planes().iter().zip(b.planes()) {
        for (&va, &vb) in pa.data().iter().zip(pb.data()) {
            let d = va as f64 - vb as f64;
            acc += d * d;
        }
        count += pa.data().len();
    }
    Ok(acc / count as f64)
}

/// 10*log10(MAX^2 / MSE) in dB, capped at [`PSNR_CAP_DB`] for zero MSE.
/// MAX is the format peak (255 for 8-bit, 1 for unit floats).
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    let err = mse(a, b)?;
    if err == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let max = a.format().peak() as f64;
    Ok((10.0 * (max * max / err).log10()).min(PSNR_CAP_DB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn image_from_bytes(w: usize, h: usize, bytes: &[u8]) -> ImageBuffer {
        ImageBuffer::from_rgb8(w, h, bytes).unwrap()
    }

    #[test]
    fn identical_images_hit_the_cap() {
        let img = image_from_bytes(4, 4, &[9; 48]);
        assert_eq!(psnr(&img, &img).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn constant_offset_16_matches_formula() {
        let a = image_from_bytes(8, 8, &[100; 192]);
        let b = image_from_bytes(8, 8, &[116; 192]);
        let want = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
        assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((want - 24.05).abs() < 0.01);
    }

    #[test]
    fn psnr_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a: Vec<u8> = (0..48).map(|_| rng.random()).collect();
            let b: Vec<u8> = (0..48).map(|_| rng.random()).collect();
            let ia = image_from_bytes(4, 4, &a);
            let ib = image_from_bytes(4, 4, &b);
            assert_eq!(psnr(&ia, &ib).unwrap(), psnr(&ib, &ia).unwrap());
        }
    }

    #[test]
    fn psnr_decreases_as_mse_increases() {
        let a = image_from_bytes(4, 4, &[100; 48]);
        let near = image_from_bytes(4, 4, &[102; 48]);
        let far = image_from_bytes(4, 4, &[120; 48]);
        assert!(psnr(&a, &near).unwrap() > psnr(&a, &far).unwrap());
        assert!(psnr(&a, &far).unwrap() > 0.0);
    }

    #[test]
    fn mismatched_dims_are_rejected() {
        let a = image_from_bytes(4, 4, &[0; 48]);
        let b = image_from_bytes(4, 2, &[0; 24]);
        assert!(psnr(&a, &b).is_err());
    }

    #[test]
    fn unit_float_peak_is_one() {
        use crate::imagecore::{Colorspace, Plane, SampleFormat};
        let mk = |v: f32| {
            let p = Plane::from_vec(2, 2, vec![v; 4]).unwrap();
            ImageBuffer::new(
                Colorspace::Rgb,
                SampleFormat::UnitFloat,
                vec![p.clone(), p.clone(), p],
            )
            .unwrap()
        };
        let a = mk(0.5);
        let b = mk(0.25);
        // MSE = 1/16, peak 1 -> 10*log10(16).
        let want = 10.0 * 16.0f64.log10();
        assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-9);
    }
}
