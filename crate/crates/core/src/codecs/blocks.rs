//! Block partitioning helpers shared by the block-transform codecs.

use crate::imagecore::Plane;

/// Edge-replicate `plane` so both dimensions are multiples of `m`.
pub(crate) fn pad_to_multiple(plane: &Plane, m: usize) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let pw = w.div_ceil(m) * m;
    let ph = h.div_ceil(m) * m;
    if pw == w && ph == h {
        return plane.clone();
    }
    Plane::from_fn(pw, ph, |x, y| plane.get(x.min(w - 1), y.min(h - 1)))
        .expect("padded dims nonzero")
}

/// Copy block (bx,by) of an `n`-aligned plane into `out` (row-major n*n),
/// applying `offset` to every sample.
pub(crate) fn extract_block(plane: &Plane, bx: usize, by: usize, n: usize, offset: f64, out: &mut [f64]) {
    for j in 0..n {
        let row = plane.row(by * n + j);
        for i in 0..n {
            out[j * n + i] = row[bx * n + i] as f64 + offset;
        }
    }
}

/// Write `block` (row-major n*n) into position (bx,by), applying `offset`.
pub(crate) fn store_block(plane: &mut Plane, bx: usize, by: usize, n: usize, offset: f64, block: &[f64]) {
    for j in 0..n {
        for i in 0..n {
            plane.set(bx * n + i, by * n + j, (block[j * n + i] + offset) as f32);
        }
    }
}

/// Crop the top-left `w`x`h` region (undo padding).
pub(crate) fn unpad(plane: &Plane, w: usize, h: usize) -> Plane {
    if plane.width() == w && plane.height() == h {
        return plane.clone();
    }
    Plane::from_fn(w, h, |x, y| plane.get(x, y)).expect("target dims nonzero")
}
