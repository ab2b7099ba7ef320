//! Lossless pass-through codec used as a test reference.

use super::{Codec, CodecResult};
use crate::error::Result;
use crate::imagecore::ImageBuffer;

/// Decodes to an exact copy; rate is the raw sample cost (24 bpp RGB),
/// with no side information.
pub struct IdentityCodec;

impl Codec for IdentityCodec {
    fn id(&self) -> &str {
        "identity"
    }

    fn encode_decode(&self, img: &ImageBuffer) -> Result<CodecResult> {
        let (w, h) = (img.width(), img.height());
        Ok(CodecResult {
            decoded: img.clone(),
            bits_y: 24 * (w as u64) * (h as u64),
            bits_z: 0,
            latent: None,
            source_width: w,
            source_height: h,
        })
    }
}
