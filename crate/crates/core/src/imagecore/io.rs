//! Lossless image I/O (PNG and binary PPM) for 8-bit RGB images.

use std::path::Path;

use super::ImageBuffer;
use crate::error::{Error, Result};

fn io_err(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::ImageIo {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Load a PNG or PPM file as an 8-bit RGB image.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let dynimg = image::open(path).map_err(|e| io_err(path, e))?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ImageBuffer::from_rgb8(w, h, rgb.as_raw())
}

/// Write an 8-bit RGB image; the format is chosen by extension
/// (`.png`, `.ppm`).
pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let format = match ext.as_str() {
        "png" => image::ImageFormat::Png,
        "ppm" => image::ImageFormat::Pnm,
        other => {
            return Err(io_err(
                path,
                format!("unsupported extension `{other}` (use png or ppm)"),
            ))
        }
    };
    let bytes = img.to_rgb8()?;
    image::save_buffer_with_format(
        path,
        &bytes,
        img.width() as u32,
        img.height() as u32,
        image::ColorType::Rgb8,
        format,
    )
    .map_err(|e| io_err(path, e))
}
