//! Rate-distortion recompression cue: recompress an image three times with
//! fixed settings and describe the resulting rate and PSNR trajectory with
//! a 17-dimensional feature vector. Double-compressed inputs sit closer to
//! the codec's fixed point than pristine ones, which shows in the curve.

use crate::codecs::{build_codec, recompress_chain_with, Codec, CodecSettings};
use crate::error::{Error, Result};
use crate::imagecore::{psnr, ImageBuffer};

/// Number of recompression steps; fixed so the feature layout is stable.
pub const RD_STEPS: usize = 3;
/// Flattened feature dimension.
pub const RD_DIM: usize = 17;

/// Column names in flatten order.
pub const RD_FEATURE_NAMES: [&str; RD_DIM] = [
    "r_y_1", "r_y_2", "r_y_3", "r_z_1", "r_z_2", "r_z_3", "r_1", "r_2", "r_3", "p_inp_2",
    "p_inp_3", "p_inc_2", "p_inc_3", "d_r32", "d_r21", "d_pinp", "d_pinc",
];

/// The 17 rate-distortion fields. Indices into `r_y`/`r_z`/`r` are the
/// recompression step minus one; `p_inp`/`p_inc` hold steps 2 and 3.
#[derive(Debug, Clone, PartialEq)]
pub struct RdFeature {
    /// Coded latent bits after each step.
    pub r_y: [u64; RD_STEPS],
    /// Coded side-information bits after each step.
    pub r_z: [u64; RD_STEPS],
    /// Total rate in bits per pixel of the ORIGINAL dimensions.
    pub r: [f64; RD_STEPS],
    /// PSNR between the input and recompression k, k in {2,3}.
    pub p_inp: [f64; 2],
    /// PSNR between recompressions k-1 and k, k in {2,3}.
    pub p_inc: [f64; 2],
    pub d_r32: f64,
    pub d_r21: f64,
    pub d_pinp: f64,
    pub d_pinc: f64,
}

impl RdFeature {
    /// Fixed flatten order: r_y(1..3), r_z(1..3), r(1..3), p_inp(2..3),
    /// p_inc(2..3), d_r32, d_r21, d_pinp, d_pinc.
    pub fn flatten(&self) -> [f64; RD_DIM] {
        [
            self.r_y[0] as f64,
            self.r_y[1] as f64,
            self.r_y[2] as f64,
            self.r_z[0] as f64,
            self.r_z[1] as f64,
            self.r_z[2] as f64,
            self.r[0],
            self.r[1],
            self.r[2],
            self.p_inp[0],
            self.p_inp[1],
            self.p_inc[0],
            self.p_inc[1],
            self.d_r32,
            self.d_r21,
            self.d_pinp,
            self.d_pinc,
        ]
    }

    /// Inverse of [`Self::flatten`].
    pub fn unflatten(v: &[f64; RD_DIM]) -> RdFeature {
        RdFeature {
            r_y: [v[0] as u64, v[1] as u64, v[2] as u64],
            r_z: [v[3] as u64, v[4] as u64, v[5] as u64],
            r: [v[6], v[7], v[8]],
            p_inp: [v[9], v[10]],
            p_inc: [v[11], v[12]],
            d_r32: v[13],
            d_r21: v[14],
            d_pinp: v[15],
            d_pinc: v[16],
        }
    }

    /// Internal consistency: difference fields equal the differences of
    /// their sources and `r` is re-derivable from the bit fields.
    pub fn check_redundancy(&self, pixels: u64) -> Result<()> {
        let tol = 1e-12;
        let checks = [
            (self.d_r32, self.r[2] - self.r[1], "d_r32"),
            (self.d_r21, self.r[1] - self.r[0], "d_r21"),
            (self.d_pinp, self.p_inp[1] - self.p_inp[0], "d_pinp"),
            (self.d_pinc, self.p_inc[1] - self.p_inc[0], "d_pinc"),
        ];
        for (stored, derived, name) in checks {
            if (stored - derived).abs() > tol {
                return Err(Error::InvalidGeometry(format!(
                    "{name} = {stored} does not match derived {derived}"
                )));
            }
        }
        for k in 0..RD_STEPS {
            let derived = (self.r_y[k] + self.r_z[k]) as f64 / pixels as f64;
            if (self.r[k] - derived).abs() > tol {
                return Err(Error::InvalidGeometry(format!(
                    "r_{} = {} does not match derived {derived}",
                    k + 1,
                    self.r[k]
                )));
            }
        }
        Ok(())
    }
}

/// Extract the feature with a freshly built codec.
pub fn extract_rd_features(img: &ImageBuffer, settings: &CodecSettings) -> Result<RdFeature> {
    extract_rd_features_with(img, build_codec(settings)?.as_ref())
}

/// Extract the feature with an existing codec instance. The extractor never
/// inspects image provenance, so features stay valid classifier inputs for
/// images produced by any other codec.
pub fn extract_rd_features_with(img: &ImageBuffer, codec: &dyn Codec) -> Result<RdFeature> {
    if !codec.reports_rates() {
        return Err(Error::RatesUnavailable {
            codec: codec.id().to_string(),
        });
    }
    let chain = recompress_chain_with(img, codec, RD_STEPS)?;
    let pixels = (img.width() * img.height()) as f64;
    let mut r_y = [0u64; RD_STEPS];
    let mut r_z = [0u64; RD_STEPS];
    let mut r = [0f64; RD_STEPS];
    for k in 0..RD_STEPS {
        r_y[k] = chain[k].bits_y;
        r_z[k] = chain[k].bits_z;
        r[k] = (chain[k].bits_y + chain[k].bits_z) as f64 / pixels;
    }
    let p_inp = [
        psnr(img, &chain[1].decoded)?,
        psnr(img, &chain[2].decoded)?,
    ];
    let p_inc = [
        psnr(&chain[0].decoded, &chain[1].decoded)?,
        psnr(&chain[1].decoded, &chain[2].decoded)?,
    ];
    Ok(RdFeature {
        r_y,
        r_z,
        r,
        p_inp,
        p_inc,
        d_r32: r[2] - r[1],
        d_r21: r[1] - r[0],
        d_pinp: p_inp[1] - p_inp[0],
        d_pinc: p_inc[1] - p_inc[0],
    })
}
