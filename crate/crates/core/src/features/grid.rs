//! Spatial-grid one-hot encoding of a word's position in the 2-D PCA plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::PcaModel;
use crate::resources::EmbeddingTable;
use crate::sparse::SparseVector;

/// Axis-aligned extent of the training projections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl GridBounds {
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateData(
                "no projected points for grid bounds".into(),
            ));
        }
        let mut b = GridBounds {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        };
        for &(x, y) in points {
            b.min[0] = b.min[0].min(x);
            b.min[1] = b.min[1].min(y);
            b.max[0] = b.max[0].max(x);
            b.max[1] = b.max[1].max(y);
        }
        Ok(b)
    }

    fn axis_bin(&self, axis: usize, value: f64, size: usize) -> usize {
        let span = self.max[axis] - self.min[axis];
        if span.is_nan() || span <= 0.0 || !value.is_finite() {
            return 0;
        }
        let t = (value - self.min[axis]) / span;
        ((t * size as f64).floor().max(0.0) as usize).min(size - 1)
    }

    /// Row-major cell index in `[0, size²)`; rows follow the second axis.
    /// Points outside the bounds fall in the nearest edge cell.
    pub fn cell(&self, point: (f64, f64), size: usize) -> usize {
        let col = self.axis_bin(0, point.0, size);
        let row = self.axis_bin(1, point.1, size);
        row * size + col
    }
}

pub fn grid_len(sizes: &[usize]) -> usize {
    sizes.iter().map(|s| s * s).sum()
}

/// One-hot cells of a projected point, one segment per grid size.
pub fn point_onehot(point: (f64, f64), bounds: &GridBounds, sizes: &[usize]) -> SparseVector {
    let mut offset = 0;
    let mut pairs = Vec::with_capacity(sizes.len());
    for &s in sizes {
        pairs.push(((offset + bounds.cell(point, s)) as u32, 1.0));
        offset += s * s;
    }
    SparseVector::from_pairs(pairs)
}

/// Grid block for `word`; all zeros when it has no grid embedding.
pub fn grid_onehot(
    word: &str,
    pca: &PcaModel,
    table: &EmbeddingTable,
    bounds: &GridBounds,
    sizes: &[usize],
) -> SparseVector {
    match table.embed(word).and_then(|v| pca.project(v).ok()) {
        Some(p) => point_onehot(p, bounds, sizes),
        None => SparseVector::new(),
    }
}
