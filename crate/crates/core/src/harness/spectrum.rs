//! Average Fourier spectrum diagnostic: block codecs leave a periodic peak
//! lattice in the residual spectrum that uncompressed content lacks.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::imagecore::{highpass_residual, rgb_to_yuv, FilterId, ImageBuffer};

/// Mean spectrum over a batch of images. `log_norm` is the display map
/// (log-scaled, normalized to [0, 1]); `linear` keeps raw mean magnitudes.
/// `energy` is the mean magnitude spectrum of the rectified residual
/// `|r|`: a symmetric quantizer leaves the residual zero-mean everywhere,
/// so grid periodicity shows up in where the energy sits, not in the raw
/// spectrum, and rectification is what makes the lattice measurable. All
/// three are row-major with DC shifted to the center bin (height/2, width/2).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    pub width: usize,
    pub height: usize,
    pub log_norm: Vec<f64>,
    pub linear: Vec<f64>,
    pub energy: Vec<f64>,
}

impl SpectrumMap {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.log_norm[row * self.width + col]
    }
}

/// 2-D DFT magnitude of `values`, DC shifted to (h/2, w/2).
fn dft_magnitude(values: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(width);
    let col_fft = planner.plan_fft_forward(height);
    let mut grid: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in grid.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = grid[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            grid[y * width + x] = *c;
        }
    }
    let mut out = vec![0.0f64; width * height];
    for u in 0..height {
        for v in 0..width {
            let cu = (u + height / 2) % height;
            let cv = (v + width / 2) % width;
            out[cu * width + cv] = grid[u * width + v].norm();
        }
    }
    out
}

/// Mean over images of `log(1 + |F|)` of the luma highpass residual,
/// normalized to [0, 1]; `linear` carries the mean raw magnitudes. All
/// images must share dimensions.
pub fn avg_fourier_spectrum(images: &[ImageBuffer], filter: FilterId) -> Result<SpectrumMap> {
    let first = images.first().ok_or(Error::EmptyVector)?;
    let (width, height) = (first.width(), first.height());
    let mut linear = vec![0.0f64; width * height];
    let mut log = vec![0.0f64; width * height];
    let mut energy = vec![0.0f64; width * height];
    for img in images {
        if img.width() != width || img.height() != height {
            return Err(Error::DimensionMismatch {
                left: format!("{width}x{height}"),
                right: format!("{}x{}", img.width(), img.height()),
            });
        }
        let yuv = rgb_to_yuv(img)?;
        let residual = highpass_residual(yuv.plane(0), filter)?;
        let mag = dft_magnitude(residual.values(), residual.width(), residual.height());
        let rect: Vec<f64> = residual.values().iter().map(|v| v.abs()).collect();
        let emag = dft_magnitude(&rect, residual.width(), residual.height());
        for ((acc, lacc), m) in linear.iter_mut().zip(log.iter_mut()).zip(&mag) {
            *acc += m;
            *lacc += (1.0 + m).ln();
        }
        for (eacc, m) in energy.iter_mut().zip(&emag) {
            *eacc += m;
        }
    }
    let n = images.len() as f64;
    for ((v, l), e) in linear.iter_mut().zip(log.iter_mut()).zip(energy.iter_mut()) {
        *v /= n;
        *l /= n;
        *e /= n;
    }
    let peak = log.iter().cloned().fold(0.0f64, f64::max);
    let log_norm = if peak > 0.0 {
        log.iter().map(|&v| v / peak).collect()
    } else {
        log
    };
    Ok(SpectrumMap {
        width,
        height,
        log_norm,
        linear,
        energy,
    })
}

/// Mean of the energy spectrum on the block-frequency lattice (multiples of
/// dim/block in both axes, DC excluded) divided by the mean off-lattice
/// value. Flat inputs score about 1; block-coded inputs score far higher.
pub fn block_peak_ratio(map: &SpectrumMap, block: usize) -> Result<f64> {
    if block < 2 || map.width % block != 0 || map.height % block != 0 {
        return Err(Error::InvalidGeometry(format!(
            "spectrum {}x{} not divisible by block {block}",
            map.width, map.height
        )));
    }
    let (sy, sx) = (map.height / block, map.width / block);
    let (cy, cx) = (map.height / 2, map.width / 2);
    let mut peak_sum = 0.0;
    let mut peak_n = 0usize;
    let mut bg_sum = 0.0;
    let mut bg_n = 0usize;
    for r in 0..map.height {
        for c in 0..map.width {
            let dy = r as isize - cy as isize;
            let dx = c as isize - cx as isize;
            if dy == 0 && dx == 0 {
                continue;
            }
            let value = map.energy[r * map.width + c];
            if dy.rem_euclid(sy as isize) == 0 && dx.rem_euclid(sx as isize) == 0 {
                peak_sum += value;
                peak_n += 1;
            } else {
                bg_sum += value;
                bg_n += 1;
            }
        }
    }
    let peak_mean = peak_sum / peak_n as f64;
    let bg_mean = bg_sum / bg_n as f64;
    if bg_mean == 0.0 {
        return Ok(if peak_mean == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(peak_mean / bg_mean)
}

/// Long-form CSV: row, col, normalized log magnitude.
pub fn write_spectrum_csv(map: &SpectrumMap, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row", "col", "value"])?;
    for r in 0..map.height {
        for c in 0..map.width {
            w.write_record([
                r.to_string(),
                c.to_string(),
                format!("{:.8}", map.at(r, c)),
            ])?;
        }
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}
