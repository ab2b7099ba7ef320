//! RGB <-> YUV conversion, full-range, float-precision intermediates.

use super::{Colorspace, ImageBuffer, Plane, SampleFormat};
use crate::error::Result;

/// Luma coefficient set. Full-range in all cases; chroma is offset by the
/// format's neutral value and clamped to the valid range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum YuvMatrix {
    #[default]
    Bt601,
    Bt709,
}

impl YuvMatrix {
    /// (kr, kg, kb), the luma weights.
    fn weights(self) -> (f64, f64, f64) {
        match self {
            YuvMatrix::Bt601 => (0.299, 0.587, 0.114),
            YuvMatrix::Bt709 => (0.2126, 0.7152, 0.0722),
        }
    }
}

/// RGB to YUV 4:4:4 with the default BT.601 matrix.
pub fn rgb_to_yuv(img: &ImageBuffer) -> Result<ImageBuffer> {
    rgb_to_yuv_with(img, YuvMatrix::Bt601)
}

/// RGB to YUV 4:4:4. Outputs stay float: luma is exact, chroma is clamped
/// to the sample range (only saturated corner colors clip, by < 0.5 of an
/// 8-bit step), so a round trip stays within 1 per 8-bit sample.
pub fn rgb_to_yuv_with(img: &ImageBuffer, matrix: YuvMatrix) -> Result<ImageBuffer> {
    img.expect_colorspace(Colorspace::Rgb)?;
    let (kr, kg, kb) = matrix.weights();
    let offset = img.format().chroma_offset() as f64;
    let peak = img.format().peak() as f64;
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let (rp, gp, bp) = (img.plane(0), img.plane(1), img.plane(2));
    let mut yd = Vec::with_capacity(n);
    let mut ud = Vec::with_capacity(n);
    let mut vd = Vec::with_capacity(n);
    for i in 0..n {
        let r = rp.data()[i] as f64;
        let g = gp.data()[i] as f64;
        let b = bp.data()[i] as f64;
        let y = kr * r + kg * g + kb * b;
        let u = 0.5 * (b - y) / (1.0 - kb) + offset;
        let v = 0.5 * (r - y) / (1.0 - kr) + offset;
        yd.push(y.clamp(0.0, peak) as f32);
        ud.push(u.clamp(0.0, peak) as f32);
        vd.push(v.clamp(0.0, peak) as f32);
    }
    ImageBuffer::new(
        Colorspace::Yuv444,
        img.format(),
        vec![
            Plane::from_vec(w, h, yd)?,
            Plane::from_vec(w, h, ud)?,
            Plane::from_vec(w, h, vd)?,
        ],
    )
}

/// YUV 4:4:4 to RGB with the default BT.601 matrix.
pub fn yuv_to_rgb(img: &ImageBuffer) -> Result<ImageBuffer> {
    yuv_to_rgb_with(img, YuvMatrix::Bt601)
}

/// Inverse of [`rgb_to_yuv_with`]; output is clamped, and rounded to
/// integers for 8-bit images.
pub fn yuv_to_rgb_with(img: &ImageBuffer, matrix: YuvMatrix) -> Result<ImageBuffer> {
    img.expect_colorspace(Colorspace::Yuv444)?;
    let (kr, kg, kb) = matrix.weights();
    let offset = img.format().chroma_offset() as f64;
    let peak = img.format().peak() as f64;
    let quantize = img.format() == SampleFormat::U8;
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let (yp, up, vp) = (img.plane(0), img.plane(1), img.plane(2));
    let mut rd = Vec::with_capacity(n);
    let mut gd = Vec::with_capacity(n);
    let mut bd = Vec::with_capacity(n);
    for i in 0..n {
        let y = yp.data()[i] as f64;
        let u = up.data()[i] as f64 - offset;
        let v = vp.data()[i] as f64 - offset;
        let r = y + 2.0 * (1.0 - kr) * v;
        let b = y + 2.0 * (1.0 - kb) * u;
        let g = (y - kr * r - kb * b) / kg;
        let mut px = [r, g, b].map(|c| c.clamp(0.0, peak));
        if quantize {
            px = px.map(f64::round);
        }
        rd.push(px[0] as f32);
        gd.push(px[1] as f32);
        bd.push(px[2] as f32);
    }
    ImageBuffer::new(
        Colorspace::Rgb,
        img.format(),
        vec![
            Plane::from_vec(w, h, rd)?,
            Plane::from_vec(w, h, gd)?,
            Plane::from_vec(w, h, bd)?,
        ],
    )
}
