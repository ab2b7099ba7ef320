//! Image representation and the shared numeric substrate: color pipeline,
//! chroma resampling, cropping, noise residuals, PSNR, and lossless I/O.

mod color;
mod io;
mod metrics;
mod resample;
mod residual;

pub use color::{rgb_to_yuv, rgb_to_yuv_with, yuv_to_rgb, yuv_to_rgb_with, YuvMatrix};
pub use io::{read_image, write_image};
pub use metrics::{mse, psnr, PSNR_CAP_DB};
pub use resample::{center_crop, chroma_downsample_420, chroma_upsample_420, resize_bilinear};
pub use residual::{highpass_residual, FilterId, ResidualPlane};

use crate::error::{Error, Result};

/// Pixel layout of an [`ImageBuffer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Colorspace {
    Rgb,
    Yuv444,
    /// Chroma planes at half resolution (ceiling division) in both axes.
    Yuv420,
}

/// Nominal sample encoding. Data is stored as `f32` either way; the format
/// fixes the valid range, the PSNR peak, and the neutral chroma offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SampleFormat {
    /// Integer-valued samples in [0, 255].
    U8,
    /// Samples in [0, 1].
    UnitFloat,
}

impl SampleFormat {
    pub fn peak(self) -> f32 {
        match self {
            SampleFormat::U8 => 255.0,
            SampleFormat::UnitFloat => 1.0,
        }
    }

    pub fn chroma_offset(self) -> f32 {
        match self {
            SampleFormat::U8 => 128.0,
            SampleFormat::UnitFloat => 0.5,
        }
    }
}

/// Single-channel 2-D sample array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Plane {
    /// Zero-filled plane.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry(format!(
                "plane dimensions must be nonzero, got {width}x{height}"
            )));
        }
        Ok(Plane {
            width,
            height,
            data: vec![0.0; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry(format!(
                "plane dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidGeometry(format!(
                "plane data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut p = Plane::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                p.data[y * width + x] = f(x, y);
            }
        }
        Ok(p)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rectangular sub-plane; caller guarantees bounds.
    pub(crate) fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Plane {
        debug_assert!(x0 + w <= self.width && y0 + h <= self.height);
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Plane {
            width: w,
            height: h,
            data,
        }
    }
}

/// Multi-plane image. Planes are indexed R,G,B or Y,U,V.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    colorspace: Colorspace,
    format: SampleFormat,
    planes: Vec<Plane>,
}

/// Half dimension under 4:2:0 subsampling.
pub(crate) fn chroma_dim(full: usize) -> usize {
    full.div_ceil(2)
}

impl ImageBuffer {
    /// Validates plane count, per-colorspace geometry, and sample range.
    pub fn new(colorspace: Colorspace, format: SampleFormat, planes: Vec<Plane>) -> Result<Self> {
        if planes.len() != 3 {
            return Err(Error::InvalidGeometry(format!(
                "expected 3 planes, got {}",
                planes.len()
            )));
        }
        let (w, h) = (planes[0].width, planes[0].height);
        match colorspace {
            Colorspace::Rgb | Colorspace::Yuv444 => {
                for p in &planes[1..] {
                    if p.width != w || p.height != h {
                        return Err(Error::InvalidGeometry(format!(
                            "plane size {}x{} differs from {w}x{h}",
                            p.width, p.height
                        )));
                    }
                }
            }
            Colorspace::Yuv420 => {
                let (cw, ch) = (chroma_dim(w), chroma_dim(h));
                for p in &planes[1..] {
                    if p.width != cw || p.height != ch {
                        return Err(Error::InvalidGeometry(format!(
                            "chroma plane {}x{} does not match expected {cw}x{ch}",
                            p.width, p.height
                        )));
                    }
                }
            }
        }
        let peak = format.peak();
        for p in &planes {
            for &v in &p.data {
                if !v.is_finite() || v < 0.0 || v > peak {
                    return Err(Error::InvalidGeometry(format!(
                        "sample {v} outside valid range [0, {peak}]"
                    )));
                }
            }
        }
        Ok(ImageBuffer {
            colorspace,
            format,
            planes,
        })
    }

    /// RGB image from interleaved 8-bit bytes.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::InvalidGeometry(format!(
                "byte length {} does not match {width}x{height}x3",
                rgb.len()
            )));
        }
        let mut planes = vec![
            Plane::new(width, height)?,
            Plane::new(width, height)?,
            Plane::new(width, height)?,
        ];
        for (i, px) in rgb.chunks_exact(3).enumerate() {
            planes[0].data[i] = px[0] as f32;
            planes[1].data[i] = px[1] as f32;
            planes[2].data[i] = px[2] as f32;
        }
        ImageBuffer::new(Colorspace::Rgb, SampleFormat::U8, planes)
    }

    /// Interleaved 8-bit bytes (rounded, clamped). RGB input only.
    pub fn to_rgb8(&self) -> Result<Vec<u8>> {
        self.expect_colorspace(Colorspace::Rgb)?;
        let scale = match self.format {
            SampleFormat::U8 => 1.0,
            SampleFormat::UnitFloat => 255.0,
        };
        let n = self.width() * self.height();
        let mut out = Vec::with_capacity(n * 3);
        for i in 0..n {
            for p in &self.planes {
                out.push((p.data[i] * scale).round().clamp(0.0, 255.0) as u8);
            }
        }
        Ok(out)
    }

    pub fn colorspace(&self) -> Colorspace {
        self.colorspace
    }

    pub fn format(&self) -> SampleFormat {
        self.format
    }

    /// Width of the full-resolution (first) plane.
    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    /// Height of the full-resolution (first) plane.
    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn plane(&self, idx: usize) -> &Plane {
        &self.planes[idx]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    pub(crate) fn expect_colorspace(&self, expected: Colorspace) -> Result<()> {
        if self.colorspace != expected {
            return Err(Error::ColorspaceMismatch {
                expected,
                actual: self.colorspace,
            });
        }
        Ok(())
    }
}
