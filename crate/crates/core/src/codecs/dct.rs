//! Orthonormal 2-D DCT-II on square blocks, matrix form.

/// Precomputed DCT basis for `n`x`n` blocks. Forward is `C * X * C^T`,
/// inverse is `C^T * X * C`; the basis is orthonormal so the round trip
/// is the identity up to floating-point rounding.
#[derive(Debug, Clone)]
pub struct Dct2d {
    n: usize,
    basis: Vec<f64>,
}

impl Dct2d {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "block size must be nonzero");
        let mut basis = vec![0.0f64; n * n];
        for k in 0..n {
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            for j in 0..n {
                basis[k * n + j] =
                    scale * (std::f64::consts::PI * (2.0 * j as f64 + 1.0) * k as f64
                        / (2.0 * n as f64))
                        .cos();
            }
        }
        Dct2d { n, basis }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Forward 2-D transform of a row-major `n*n` block.
    pub fn forward(&self, block: &[f64], out: &mut [f64]) {
        self.apply(block, out, false);
    }

    /// Inverse 2-D transform of a row-major `n*n` block.
    pub fn inverse(&self, block: &[f64], out: &mut [f64]) {
        self.apply(block, out, true);
    }

    fn apply(&self, block: &[f64], out: &mut [f64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(block.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        // tmp = M * block, out = tmp * M^T, with M the basis (or its
        // transpose for the inverse).
        let m = |r: usize, c: usize| {
            if inverse {
                self.basis[c * n + r]
            } else {
                self.basis[r * n + c]
            }
        };
        let mut tmp = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += m(i, k) * block[k * n + j];
                }
                tmp[i * n + j] = acc;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += tmp[i * n + k] * m(j, k);
                }
                out[i * n + j] = acc;
            }
        }
    }
}

/// Row-major (u,v) visit order walking the standard 8x8 zigzag; used to give
/// latent channels a stable low-to-high frequency ordering.
pub fn zigzag_order(n: usize) -> Vec<(usize, usize)> {
    let mut coords: Vec<(usize, usize)> = (0..n * n).map(|i| (i / n, i % n)).collect();
    // Sort by anti-diagonal, alternating direction within each diagonal.
    coords.sort_by_key(|&(u, v)| {
        let d = u + v;
        let pos = if d % 2 == 0 { n - 1 - u } else { u };
        (d, pos)
    });
    coords
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Direct O(n^4) textbook evaluation.
    fn naive_forward(block: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; n * n];
        for u in 0..n {
            for v in 0..n {
                let au = if u == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                let av = if v == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                let mut acc = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        acc += block[x * n + y]
                            * (std::f64::consts::PI * (2.0 * x as f64 + 1.0) * u as f64
                                / (2.0 * n as f64))
                                .cos()
                            * (std::f64::consts::PI * (2.0 * y as f64 + 1.0) * v as f64
                                / (2.0 * n as f64))
                                .cos();
                    }
                }
                out[u * n + v] = au * av * acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dct = Dct2d::new(8);
        let block: Vec<f64> = (0..64).map(|_| rng.random_range(-128.0..128.0)).collect();
        let mut got = vec![0.0; 64];
        dct.forward(&block, &mut got);
        let want = naive_forward(&block, 8);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dct = Dct2d::new(8);
        let block: Vec<f64> = (0..64).map(|_| rng.random_range(-1000.0..1000.0)).collect();
        let mut freq = vec![0.0; 64];
        let mut back = vec![0.0; 64];
        dct.forward(&block, &mut freq);
        dct.inverse(&freq, &mut back);
        for (a, b) in block.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_block_is_pure_dc() {
        let dct = Dct2d::new(8);
        let block = vec![128.0f64; 64];
        let mut freq = vec![0.0; 64];
        dct.forward(&block, &mut freq);
        assert!((freq[0] - 128.0 * 8.0).abs() < 1e-9);
        for &c in &freq[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn transform_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dct = Dct2d::new(8);
        let block: Vec<f64> = (0..64).map(|_| rng.random_range(-50.0..50.0)).collect();
        let mut freq = vec![0.0; 64];
        dct.forward(&block, &mut freq);
        let e1: f64 = block.iter().map(|v| v * v).sum();
        let e2: f64 = freq.iter().map(|v| v * v).sum();
        assert!((e1 - e2).abs() < 1e-8);
    }

    #[test]
    fn zigzag_starts_at_dc_and_visits_all() {
        let order = zigzag_order(8);
        assert_eq!(order.len(), 64);
        assert_eq!(order[0], (0, 0));
        assert_eq!(order[1], (0, 1));
        assert_eq!(order[2], (1, 0));
        assert_eq!(order[3], (2, 0));
        let mut seen = vec![false; 64];
        for (u, v) in order {
            assert!(!seen[u * 8 + v]);
            seen[u * 8 + v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
