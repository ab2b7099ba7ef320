//! Highpass noise residuals. All arithmetic is f64 so residual-based
//! features hold to tight numeric tolerances.

use super::Plane;
use crate::error::{Error, Result};

/// Highpass kernel selector, recorded in every feature file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum FilterId {
    /// 4-neighbor Laplacian [[0,-1,0],[-1,4,-1],[0,-1,0]].
    #[default]
    Laplacian4,
    /// 8-neighbor Laplacian with center weight 8.
    Laplacian8,
}

impl FilterId {
    fn kernel(self) -> [[f64; 3]; 3] {
        match self {
            FilterId::Laplacian4 => [[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]],
            FilterId::Laplacian8 => [[-1.0, -1.0, -1.0], [-1.0, 8.0, -1.0], [-1.0, -1.0, -1.0]],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FilterId::Laplacian4 => "laplacian4",
            FilterId::Laplacian8 => "laplacian8",
        }
    }
}

impl std::str::FromStr for FilterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplacian4" => Ok(FilterId::Laplacian4),
            "laplacian8" => Ok(FilterId::Laplacian8),
            other => Err(Error::InvalidCodecSettings(format!(
                "unknown filter id `{other}`"
            ))),
        }
    }
}

/// Highpass response of a plane; same dimensions as the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPlane {
    width: usize,
    height: usize,
    values: Vec<f64>,
    filter_id: FilterId,
}

impl ResidualPlane {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn filter_id(&self) -> FilterId {
        self.filter_id
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.values[y * self.width..(y + 1) * self.width]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Symmetric (mirror-without-repeat) boundary index.
fn sym(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - 1 - i
    } else {
        i
    };
    j as usize
}

/// 2-D correlation of `plane` with the selected 3x3 kernel, symmetric
/// padding at the borders. A constant plane yields an all-zero residual.
pub fn highpass_residual(plane: &Plane, filter_id: FilterId) -> Result<ResidualPlane> {
    let (w, h) = (plane.width(), plane.height());
    if w < 3 || h < 3 {
        return Err(Error::PlaneTooSmall {
            width: w,
            height: h,
            kernel: 3,
        });
    }
    let k = filter_id.kernel();
    let mut values = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (j, krow) in k.iter().enumerate() {
                let sy = sym(y as isize + j as isize - 1, h);
                for (i, &kv) in krow.iter().enumerate() {
                    let sx = sym(x as isize + i as isize - 1, w);
                    acc += kv * plane.get(sx, sy) as f64;
                }
            }
            values[y * w + x] = acc;
        }
    }
    Ok(ResidualPlane {
        width: w,
        height: h,
        values,
        filter_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: materialize the symmetrically padded plane, then
    /// run the correlation sum with plain loops.
    fn naive_correlation(plane: &Plane, k: [[f64; 3]; 3]) -> Vec<f64> {
        let (w, h) = (plane.width(), plane.height());
        let (pw, ph) = (w + 2, h + 2);
        let mut padded = vec![0.0f64; pw * ph];
        for py in 0..ph {
            for px in 0..pw {
                let sx = (px as isize - 1).clamp(0, w as isize - 1).max(0) as usize;
                let sy = (py as isize - 1).clamp(0, h as isize - 1).max(0) as usize;
                // Depth-1 symmetric padding of a >=2 sized axis equals edge
                // clamping, which is what this oracle uses.
                padded[py * pw + px] = plane.get(sx, sy) as f64;
            }
        }
        let mut out = vec![0.0f64; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for j in 0..3 {
                    for i in 0..3 {
                        acc += k[j][i] * padded[(y + j) * pw + (x + i)];
                    }
                }
                out[y * w + x] = acc;
            }
        }
        out
    }

    #[test]
    fn constant_plane_gives_zero_residual() {
        for filter in [FilterId::Laplacian4, FilterId::Laplacian8] {
            let p = Plane::from_fn(7, 5, |_, _| 123.0).unwrap();
            let r = highpass_residual(&p, filter).unwrap();
            assert!(r.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn centered_impulse_reproduces_flipped_kernel() {
        let mut p = Plane::new(5, 5).unwrap();
        p.set(2, 2, 1.0);
        let r = highpass_residual(&p, FilterId::Laplacian4).unwrap();
        let k = FilterId::Laplacian4.kernel();
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let got = r.get((2 + dx) as usize, (2 + dy) as usize);
                // Correlation output at offset d equals kernel at -d.
                let want = k[(1 - dy) as usize][(1 - dx) as usize];
                assert_eq!(got, want, "offset ({dx},{dy})");
            }
        }
        assert_eq!(r.get(0, 0), 0.0);
    }

    #[test]
    fn random_planes_match_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for filter in [FilterId::Laplacian4, FilterId::Laplacian8] {
            for _ in 0..20 {
                let p = Plane::from_fn(5, 5, |_, _| rng.random_range(0.0..255.0f32)).unwrap();
                let got = highpass_residual(&p, filter).unwrap();
                let want = naive_correlation(&p, filter.kernel());
                for (g, w) in got.values().iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9, "{g} vs {w}");
                }
            }
        }
    }

    #[test]
    fn residual_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Plane::from_fn(9, 6, |_, _| rng.random_range(0..120) as f32).unwrap();
        let b = Plane::from_fn(9, 6, |_, _| rng.random_range(0..120) as f32).unwrap();
        let sum = Plane::from_fn(9, 6, |x, y| a.get(x, y) + b.get(x, y)).unwrap();
        let ra = highpass_residual(&a, FilterId::Laplacian4).unwrap();
        let rb = highpass_residual(&b, FilterId::Laplacian4).unwrap();
        let rsum = highpass_residual(&sum, FilterId::Laplacian4).unwrap();
        for i in 0..rsum.values().len() {
            // f32 inputs are exact in f64, so linearity holds to rounding.
            assert!((rsum.values()[i] - (ra.values()[i] + rb.values()[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small_plane_is_rejected() {
        let p = Plane::new(2, 5).unwrap();
        assert!(matches!(
            highpass_residual(&p, FilterId::Laplacian4),
            Err(Error::PlaneTooSmall { .. })
        ));
    }

    #[test]
    fn filter_id_round_trips_through_str() {
        for f in [FilterId::Laplacian4, FilterId::Laplacian8] {
            assert_eq!(f.as_str().parse::<FilterId>().unwrap(), f);
        }
        assert!("nope".parse::<FilterId>().is_err());
    }
}
