//! 8x8 block-DCT codec with quality-scaled quantization tables and 4:2:0
//! chroma, standing in for a traditional JPEG-style codec. Coded size is
//! estimated as the Shannon entropy of the per-frequency symbol streams.

use super::blocks::{extract_block, pad_to_multiple, store_block, unpad};
use super::dct::Dct2d;
use super::entropy::total_bits;
use super::{Codec, CodecResult};
use crate::error::{Error, Result};
use crate::imagecore::{
    chroma_downsample_420, chroma_upsample_420, rgb_to_yuv, yuv_to_rgb, Colorspace, ImageBuffer,
    Plane, SampleFormat,
};

const BLOCK: usize = 8;

#[rustfmt::skip]
pub(crate) const LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
];

#[rustfmt::skip]
pub(crate) const CHROMA_TABLE: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Scale a base table by quality 1..=100 (50 = base tables, 100 = all-ones).
fn scaled_table(base: &[u16; 64], quality: u32) -> [u16; 64] {
    let scale: u32 = if quality < 50 {
        5000 / quality
    } else {
        200 - 2 * quality
    };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base.iter()) {
        *o = ((b as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

pub struct BaselineDctCodec {
    quality: u32,
    luma: [u16; 64],
    chroma: [u16; 64],
    dct: Dct2d,
}

impl BaselineDctCodec {
    pub fn new(quality: u32) -> Self {
        assert!((1..=100).contains(&quality));
        BaselineDctCodec {
            quality,
            luma: scaled_table(&LUMA_TABLE, quality),
            chroma: scaled_table(&CHROMA_TABLE, quality),
            dct: Dct2d::new(BLOCK),
        }
    }

    pub fn quality(&self) -> u32 {
        self.quality
    }

    /// Quantize, reconstruct, and collect the 64 per-frequency symbol
    /// streams of one plane.
    fn code_plane(&self, plane: &Plane, table: &[u16; 64]) -> (Plane, Vec<Vec<i64>>) {
        let (w, h) = (plane.width(), plane.height());
        let padded = pad_to_multiple(plane, BLOCK);
        let (bw, bh) = (padded.width() / BLOCK, padded.height() / BLOCK);
        let mut recon = Plane::new(padded.width(), padded.height()).expect("nonzero");
        let mut streams: Vec<Vec<i64>> = vec![Vec::with_capacity(bw * bh); BLOCK * BLOCK];
        let mut block = vec![0.0f64; BLOCK * BLOCK];
        let mut freq = vec![0.0f64; BLOCK * BLOCK];
        let mut back = vec![0.0f64; BLOCK * BLOCK];
        for by in 0..bh {
            for bx in 0..bw {
                extract_block(&padded, bx, by, BLOCK, -128.0, &mut block);
                self.dct.forward(&block, &mut freq);
                for i in 0..BLOCK * BLOCK {
                    let step = table[i] as f64;
                    let q = (freq[i] / step).round();
                    streams[i].push(q as i64);
                    freq[i] = q * step;
                }
                self.dct.inverse(&freq, &mut back);
                for v in back.iter_mut() {
                    *v = v.clamp(-128.0, 127.0);
                }
                store_block(&mut recon, bx, by, BLOCK, 128.0, &back);
            }
        }
        (unpad(&recon, w, h), streams)
    }
}

impl Codec for BaselineDctCodec {
    fn id(&self) -> &str {
        "baseline_dct"
    }

    fn encode_decode(&self, img: &ImageBuffer) -> Result<CodecResult> {
        img.expect_colorspace(Colorspace::Rgb)?;
        if img.format() != SampleFormat::U8 {
            return Err(Error::InvalidGeometry(
                "baseline_dct requires 8-bit samples".into(),
            ));
        }
        let (w, h) = (img.width(), img.height());
        let yuv420 = chroma_downsample_420(&rgb_to_yuv(img)?)?;
        let mut recon_planes = Vec::with_capacity(3);
        let mut all_streams: Vec<Vec<i64>> = Vec::with_capacity(3 * BLOCK * BLOCK);
        for (idx, plane) in yuv420.planes().iter().enumerate() {
            let table = if idx == 0 { &self.luma } else { &self.chroma };
            let (recon, streams) = self.code_plane(plane, table);
            recon_planes.push(recon);
            all_streams.extend(streams);
        }
        let bits_y = total_bits(all_streams.iter().map(|s| s.as_slice()));
        let recon420 = ImageBuffer::new(Colorspace::Yuv420, SampleFormat::U8, recon_planes)?;
        let decoded = yuv_to_rgb(&chroma_upsample_420(&recon420)?)?;
        Ok(CodecResult {
            decoded,
            bits_y,
            bits_z: 0,
            latent: None,
            source_width: w,
            source_height: h,
        })
    }
}
