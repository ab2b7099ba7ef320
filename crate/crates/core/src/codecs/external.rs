//! Subprocess adapter for external codecs, plus the latent-file format.
//!
//! Protocol: the adapter invokes the configured command twice,
//!
//! ```text
//! <cmd> encode --strength <s> --in <png> --out <bin> --meta <json>
//! <cmd> decode --in <bin> --out <png> [--latent <binary>]
//! ```
//!
//! The meta file is JSON with required integer keys `bits_y` and `bits_z`
//! and an optional `latent_file` path (resolved relative to the meta file).
//! Latent binary layout, little-endian: magic `LAT1`, u32 C, u32 H', u32 W',
//! then C*H'*W' 32-bit floats in channel-major order.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use super::{Codec, CodecResult, LatentTensor};
use crate::error::{Error, Result};
use crate::imagecore::{read_image, write_image, Colorspace, ImageBuffer, SampleFormat};

const LATENT_MAGIC: &[u8; 4] = b"LAT1";
/// Upper bound on latent element count accepted from external files.
const MAX_LATENT_ELEMENTS: u64 = 1 << 30;

/// Read a `LAT1` latent file.
pub fn read_latent_file(path: &Path) -> Result<LatentTensor> {
    let mut file = std::fs::File::open(path)?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header)
        .map_err(|_| Error::MalformedLatent("file shorter than header".into()))?;
    if &header[0..4] != LATENT_MAGIC {
        return Err(Error::MalformedLatent("bad magic (expected LAT1)".into()));
    }
    let c = u32::from_le_bytes(header[4..8].try_into().unwrap()) as u64;
    let h = u32::from_le_bytes(header[8..12].try_into().unwrap()) as u64;
    let w = u32::from_le_bytes(header[12..16].try_into().unwrap()) as u64;
    let count = c
        .checked_mul(h)
        .and_then(|v| v.checked_mul(w))
        .filter(|&v| v > 0 && v <= MAX_LATENT_ELEMENTS)
        .ok_or_else(|| Error::MalformedLatent(format!("implausible dims {c}x{h}x{w}")))?;
    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    if payload.len() as u64 != count * 4 {
        return Err(Error::MalformedLatent(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            count * 4
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    LatentTensor::new(c as usize, h as usize, w as usize, values)
        .map_err(|e| Error::MalformedLatent(e.to_string()))
}

/// Write a `LAT1` latent file (values narrowed to f32).
pub fn write_latent_file(path: &Path, latent: &LatentTensor) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(LATENT_MAGIC)?;
    file.write_all(&(latent.channels() as u32).to_le_bytes())?;
    file.write_all(&(latent.height() as u32).to_le_bytes())?;
    file.write_all(&(latent.width() as u32).to_le_bytes())?;
    let mut payload = Vec::with_capacity(latent.values().len() * 4);
    for &v in latent.values() {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    file.write_all(&payload)?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct MetaFile {
    bits_y: u64,
    bits_z: u64,
    #[serde(default)]
    latent_file: Option<String>,
}

/// Adapter driving a real codec through the subprocess protocol. Unlike
/// the in-repo codecs, determinism depends on the external tool; reports
/// flag results from this codec accordingly.
pub struct ExternalCodec {
    command: String,
    strength: f64,
}

impl ExternalCodec {
    pub fn new(command: impl Into<String>, strength: f64) -> Result<Self> {
        let command = command.into();
        if command.is_empty() {
            return Err(Error::InvalidCodecSettings(
                "external codec command is empty".into(),
            ));
        }
        if !strength.is_finite() || strength <= 0.0 {
            return Err(Error::InvalidCodecSettings(format!(
                "external codec strength must be positive, got {strength}"
            )));
        }
        Ok(ExternalCodec { command, strength })
    }

    fn run(&self, args: &[&str]) -> Result<()> {
        let output = Command::new(&self.command).args(args).output().map_err(|e| {
            Error::ExternalCodec {
                command: self.command.clone(),
                status: "spawn failed".into(),
                stderr: e.to_string(),
            }
        })?;
        if !output.status.success() {
            let mut stderr = String::from_utf8_lossy(&output.stderr).into_owned();
            stderr.truncate(500);
            return Err(Error::ExternalCodec {
                command: self.command.clone(),
                status: output.status.to_string(),
                stderr,
            });
        }
        Ok(())
    }
}

impl Codec for ExternalCodec {
    fn id(&self) -> &str {
        "external"
    }

    fn encode_decode(&self, img: &ImageBuffer) -> Result<CodecResult> {
        img.expect_colorspace(Colorspace::Rgb)?;
        if img.format() != SampleFormat::U8 {
            return Err(Error::InvalidGeometry(
                "external codec requires 8-bit samples".into(),
            ));
        }
        let dir = tempfile::tempdir()?;
        let in_png = dir.path().join("input.png");
        let code_bin = dir.path().join("code.bin");
        let meta_json = dir.path().join("meta.json");
        let out_png = dir.path().join("decoded.png");
        let latent_bin = dir.path().join("latent.bin");
        write_image(&in_png, img)?;

        let strength = format!("{}", self.strength);
        self.run(&[
            "encode",
            "--strength",
            &strength,
            "--in",
            in_png.to_str().unwrap(),
            "--out",
            code_bin.to_str().unwrap(),
            "--meta",
            meta_json.to_str().unwrap(),
        ])?;
        let meta: MetaFile = serde_json::from_reader(std::fs::File::open(&meta_json)?)?;

        self.run(&[
            "decode",
            "--in",
            code_bin.to_str().unwrap(),
            "--out",
            out_png.to_str().unwrap(),
            "--latent",
            latent_bin.to_str().unwrap(),
        ])?;
        let decoded = read_image(&out_png)?;
        if decoded.width() != img.width() || decoded.height() != img.height() {
            return Err(Error::DimensionMismatch {
                left: format!("source {}x{}", img.width(), img.height()),
                right: format!("decoded {}x{}", decoded.width(), decoded.height()),
            });
        }

        let latent_path: Option<PathBuf> = match &meta.latent_file {
            Some(rel) => Some(dir.path().join(rel)),
            None if latent_bin.exists() => Some(latent_bin.clone()),
            None => None,
        };
        let latent = latent_path.map(|p| read_latent_file(&p)).transpose()?;

        Ok(CodecResult {
            decoded,
            bits_y: meta.bits_y,
            bits_z: meta.bits_z,
            latent,
            source_width: img.width(),
            source_height: img.height(),
        })
    }
}
