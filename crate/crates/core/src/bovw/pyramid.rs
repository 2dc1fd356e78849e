use super::{Codebook, DescriptorSet, VqMode};
use crate::error::{invalid_input, invalid_parameter, Error, Result};

pub const MAX_LEVEL: usize = 2;

/// Weighted per-cell histograms for levels `0..=L`, flattened level by
/// level, cells row-major, bins innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidDescriptor {
    bins: usize,
    max_level: usize,
    weights: Vec<f64>,
    flat: Vec<f64>,
}

impl PyramidDescriptor {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    /// Weighted cell histograms of one level (`4^l * bins` values).
    pub fn level(&self, l: usize) -> &[f64] {
        let start: usize = (0..l).map(|k| cells(k) * self.bins).sum();
        &self.flat[start..start + cells(l) * self.bins]
    }

    /// Weighted histogram of cell `cell` at level `l`.
    pub fn cell(&self, l: usize, cell: usize) -> &[f64] {
        &self.level(l)[cell * self.bins..(cell + 1) * self.bins]
    }
}

fn cells(level: usize) -> usize {
    1 << (2 * level)
}

/// Level weights: `1/2^L` at level 0 and `1/2^(L-l+1)` at level `l >= 1`.
pub fn level_weights(max_level: usize) -> Vec<f64> {
    (0..=max_level)
        .map(|l| {
            let exp = if l == 0 { max_level } else { max_level - l + 1 };
            0.5f64.powi(exp as i32)
        })
        .collect()
}

/// Grid cell at `level` for a position in the unit square. Cells are
/// half-open; coordinate 1.0 falls in the last cell.
fn cell_index(pos: [f64; 2], level: usize) -> usize {
    let side = 1usize << level;
    let coord = |v: f64| ((v * side as f64).floor() as usize).min(side - 1);
    coord(pos[1]) * side + coord(pos[0])
}

pub fn build_pyramid(
    d: &DescriptorSet,
    cb: &Codebook,
    max_level: usize,
    mode: VqMode,
) -> Result<PyramidDescriptor> {
    if max_level > MAX_LEVEL {
        return Err(invalid_parameter(format!(
            "pyramid level must be at most {MAX_LEVEL}, got {max_level}"
        )));
    }
    if d.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: d.dim(),
        });
    }
    mode.validate(cb.len())?;
    let positions = d
        .positions()
        .ok_or_else(|| invalid_input("spatial pyramid needs descriptor positions"))?;

    let bins = cb.len();
    let weights = level_weights(max_level);
    let total: usize = (0..=max_level).map(cells).sum::<usize>() * bins;
    let mut flat = vec![0.0; total];
    let mut row = vec![0.0; bins];
    for (v, &pos) in d.vectors().iter().zip(positions) {
        row.iter_mut().for_each(|x| *x = 0.0);
        mode.accumulate(v, cb.centroids(), &mut row);
        let mut offset = 0;
        for (l, w) in weights.iter().enumerate() {
            let start = offset + cell_index(pos, l) * bins;
            for (f, r) in flat[start..start + bins].iter_mut().zip(&row) {
                *f += w * r;
            }
            offset += cells(l) * bins;
        }
    }
    Ok(PyramidDescriptor {
        bins,
        max_level,
        weights,
        flat,
    })
}

/// Histogram intersection of two weighted pyramids.
pub fn pyramid_match_kernel(a: &PyramidDescriptor, b: &PyramidDescriptor) -> Result<f64> {
    if a.bins != b.bins || a.max_level != b.max_level || a.weights != b.weights {
        return Err(invalid_input(format!(
            "pyramid shapes differ: C={} L={} vs C={} L={}",
            a.bins, a.max_level, b.bins, b.max_level
        )));
    }
    Ok(a.flat.iter().zip(&b.flat).map(|(x, y)| x.min(*y)).sum())
}
