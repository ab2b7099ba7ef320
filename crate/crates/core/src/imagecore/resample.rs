//! Chroma 4:2:0 resampling, center cropping, and bilinear resizing.

use super::{chroma_dim, Colorspace, ImageBuffer, Plane, SampleFormat};
use crate::error::{Error, Result};

/// 2x2 mean downsampling of both chroma planes; partial edge blocks average
/// the available samples. Luma passes through.
pub fn chroma_downsample_420(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.expect_colorspace(Colorspace::Yuv444)?;
    let planes = vec![
        img.plane(0).clone(),
        downsample_2x2_mean(img.plane(1)),
        downsample_2x2_mean(img.plane(2)),
    ];
    ImageBuffer::new(Colorspace::Yuv420, img.format(), planes)
}

fn downsample_2x2_mean(p: &Plane) -> Plane {
    let (cw, ch) = (chroma_dim(p.width()), chroma_dim(p.height()));
    let mut out = Plane::new(cw, ch).expect("nonzero dims");
    for cy in 0..ch {
        for cx in 0..cw {
            let mut sum = 0.0f64;
            let mut count = 0u32;
            for dy in 0..2 {
                for dx in 0..2 {
                    let (x, y) = (2 * cx + dx, 2 * cy + dy);
                    if x < p.width() && y < p.height() {
                        sum += p.get(x, y) as f64;
                        count += 1;
                    }
                }
            }
            out.set(cx, cy, (sum / count as f64) as f32);
        }
    }
    out
}

/// Bilinear chroma upsampling back to luma resolution. Chroma sample (i,j)
/// is treated as co-sited with luma pixel (2i,2j); edges clamp.
pub fn chroma_upsample_420(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.expect_colorspace(Colorspace::Yuv420)?;
    let (w, h) = (img.width(), img.height());
    let planes = vec![
        img.plane(0).clone(),
        upsample_bilinear_cosited(img.plane(1), w, h),
        upsample_bilinear_cosited(img.plane(2), w, h),
    ];
    ImageBuffer::new(Colorspace::Yuv444, img.format(), planes)
}

fn upsample_bilinear_cosited(p: &Plane, out_w: usize, out_h: usize) -> Plane {
    let mut out = Plane::new(out_w, out_h).expect("nonzero dims");
    for y in 0..out_h {
        let sy = y as f64 / 2.0;
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(p.height() - 1);
        let fy = sy - y0 as f64;
        for x in 0..out_w {
            let sx = x as f64 / 2.0;
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(p.width() - 1);
            let fx = sx - x0 as f64;
            let top = p.get(x0, y0) as f64 * (1.0 - fx) + p.get(x1, y0) as f64 * fx;
            let bot = p.get(x0, y1) as f64 * (1.0 - fx) + p.get(x1, y1) as f64 * fx;
            out.set(x, y, (top * (1.0 - fy) + bot * fy) as f32);
        }
    }
    out
}

/// Crop of size `w`x`h` anchored at (floor((W-w)/2), floor((H-h)/2)).
/// Full-resolution colorspaces only; crop 4:2:0 images before subsampling.
pub fn center_crop(img: &ImageBuffer, w: usize, h: usize) -> Result<ImageBuffer> {
    if img.colorspace() == Colorspace::Yuv420 {
        return Err(Error::InvalidGeometry(
            "center_crop requires full-resolution planes; crop before 4:2:0 subsampling".into(),
        ));
    }
    if w == 0 || h == 0 {
        return Err(Error::InvalidGeometry("crop dimensions must be nonzero".into()));
    }
    let (iw, ih) = (img.width(), img.height());
    if iw < w || ih < h {
        return Err(Error::ImageTooSmall {
            width: iw,
            height: ih,
            need_w: w,
            need_h: h,
        });
    }
    let x0 = (iw - w) / 2;
    let y0 = (ih - h) / 2;
    let planes = img.planes().iter().map(|p| p.crop(x0, y0, w, h)).collect();
    ImageBuffer::new(img.colorspace(), img.format(), planes)
}

/// Bilinear resize of a full-resolution image; samples are center-aligned.
/// 8-bit images are rounded back to integers.
pub fn resize_bilinear(img: &ImageBuffer, out_w: usize, out_h: usize) -> Result<ImageBuffer> {
    if img.colorspace() == Colorspace::Yuv420 {
        return Err(Error::InvalidGeometry(
            "resize_bilinear requires full-resolution planes".into(),
        ));
    }
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidGeometry("resize dimensions must be nonzero".into()));
    }
    let quantize = img.format() == SampleFormat::U8;
    let planes = img
        .planes()
        .iter()
        .map(|p| resize_plane_bilinear(p, out_w, out_h, quantize))
        .collect();
    ImageBuffer::new(img.colorspace(), img.format(), planes)
}

fn resize_plane_bilinear(p: &Plane, out_w: usize, out_h: usize, quantize: bool) -> Plane {
    let mut out = Plane::new(out_w, out_h).expect("nonzero dims");
    let sx_scale = p.width() as f64 / out_w as f64;
    let sy_scale = p.height() as f64 / out_h as f64;
    for y in 0..out_h {
        let sy = ((y as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, (p.height() - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(p.height() - 1);
        let fy = sy - y0 as f64;
        for x in 0..out_w {
            let sx = ((x as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, (p.width() - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(p.width() - 1);
            let fx = sx - x0 as f64;
            let top = p.get(x0, y0) as f64 * (1.0 - fx) + p.get(x1, y0) as f64 * fx;
            let bot = p.get(x0, y1) as f64 * (1.0 - fx) + p.get(x1, y1) as f64 * fx;
            let mut v = top * (1.0 - fy) + bot * fy;
            if quantize {
                v = v.round();
            }
            out.set(x, y, v as f32);
        }
    }
    out
}
