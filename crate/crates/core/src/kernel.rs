//! Linear and RBF Gram matrices with cosine-style normalization.
//!
//! The RBF form is written over inner products, `exp(-r (1 - <x, z>))`, with
//! `r` standing in for `1 / (2 sigma^2)`. After normalization
//! `K[i][j] / sqrt(K[i][i] K[j][j])` it equals `exp(-r/2 |x - z|^2)`.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::InvalidArgument(format!("unknown kernel {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// RBF scale; ignored by the linear kernel.
    pub r: f64,
}

impl KernelConfig {
    pub fn linear() -> Self {
        KernelConfig {
            kind: KernelKind::Linear,
            r: 1.0,
        }
    }

    pub fn rbf(r: f64) -> Self {
        KernelConfig {
            kind: KernelKind::Rbf,
            r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf && !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "RBF r must be positive, got {}",
                self.r
            )));
        }
        Ok(())
    }

    /// Kernel value from an inner product.
    pub fn eval(&self, ip: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => ip,
            KernelKind::Rbf => (-self.r * (1.0 - ip)).exp(),
        }
    }

    /// Normalized kernel value from `<x, z>`, `|x|^2` and `|z|^2`, computed
    /// without forming the unnormalized RBF values.
    pub fn eval_normalized(&self, ip: f64, xx: f64, zz: f64) -> f64 {
        match self.kind {
            KernelKind::Linear => ip / (xx * zz).sqrt(),
            KernelKind::Rbf => (-self.r * (0.5 * xx + 0.5 * zz - ip)).exp(),
        }
    }
}

/// Row-major set of sparse samples sharing a declared dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub dim: usize,
    pub rows: Vec<SparseVector>,
}

impl Samples {
    pub fn new(dim: usize, rows: Vec<SparseVector>) -> Result<Self> {
        for r in &rows {
            if r.extent() > dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: r.extent(),
                });
            }
            if r.values().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite feature value".into()));
            }
        }
        Ok(Samples { dim, rows })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.len(),
            });
        }
        Samples::new(
            dim,
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn squared_norms(&self) -> Vec<f64> {
        self.rows.iter().map(SparseVector::squared_norm).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Samples {
        Samples {
            dim: self.dim,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub values: Vec<f64>,
    pub row_self: Vec<f64>,
    pub col_self: Vec<f64>,
    pub normalized: bool,
    pub config: KernelConfig,
}

pub const DEFAULT_BLOCK_ROWS: usize = 256;

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Builds a (possibly normalized) kernel matrix from raw inner products.
    pub fn from_inner_products(
        ip: &InnerProducts,
        config: KernelConfig,
        normalized: bool,
    ) -> Result<Self> {
        config.validate()?;
        let (rows, cols) = (ip.rows, ip.cols);
        if normalized {
            if config.kind == KernelKind::Linear {
                check_positive(&ip.row_sq)?;
                check_positive(&ip.col_sq)?;
            }
            let values = map_blocks(rows, cols, |i, j| {
                config.eval_normalized(ip.values[i * cols + j], ip.row_sq[i], ip.col_sq[j])
            });
            return Ok(KernelMatrix {
                rows,
                cols,
                values,
                row_self: vec![1.0; rows],
                col_self: vec![1.0; cols],
                normalized: true,
                config,
            });
        }
        let values: Vec<f64> = ip.values.iter().map(|&v| config.eval(v)).collect();
        let row_self: Vec<f64> = ip.row_sq.iter().map(|&v| config.eval(v)).collect();
        let col_self: Vec<f64> = ip.col_sq.iter().map(|&v| config.eval(v)).collect();
        if values
            .iter()
            .chain(&row_self)
            .chain(&col_self)
            .any(|v| !v.is_finite())
        {
            return Err(Error::DegenerateData(
                "kernel value overflow; use the normalized Gram".into(),
            ));
        }
        Ok(KernelMatrix {
            rows,
            cols,
            values,
            row_self,
            col_self,
            normalized: false,
            config,
        })
    }

    /// Writes the matrix as `CWIGRAM1` little-endian binary, tagged with a
    /// caller-supplied config/data hash.
    pub fn write_cache(&self, path: &Path, tag: &[u8; 32]) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 8 * (self.values.len() + self.rows + self.cols));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&(self.rows as u64).to_le_bytes());
        buf.extend_from_slice(&(self.cols as u64).to_le_bytes());
        buf.push(match self.config.kind {
            KernelKind::Linear => 0,
            KernelKind::Rbf => 1,
        });
        buf.extend_from_slice(&self.config.r.to_le_bytes());
        buf.push(u8::from(self.normalized));
        buf.extend_from_slice(tag);
        for v in self
            .values
            .iter()
            .chain(&self.row_self)
            .chain(&self.col_self)
        {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a cache file; `None` when the tag does not match.
    pub fn read_cache(path: &Path, tag: &[u8; 32]) -> Result<Option<Self>> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        let bad = || Error::Format(format!("{}: corrupt Gram cache", path.display()));
        let header = CACHE_MAGIC.len() + 8 + 8 + 1 + 8 + 1 + 32;
        if buf.len() < header || &buf[..8] != CACHE_MAGIC {
            return Err(bad());
        }
        let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let rows = u64_at(8) as usize;
        let cols = u64_at(16) as usize;
        let kind = match buf[24] {
            0 => KernelKind::Linear,
            1 => KernelKind::Rbf,
            _ => return Err(bad()),
        };
        let r = f64::from_bits(u64_at(25));
        let normalized = buf[33] == 1;
        if &buf[34..66] != tag {
            return Ok(None);
        }
        let count = rows * cols + rows + cols;
        if buf.len() != header + 8 * count {
            return Err(bad());
        }
        let mut floats = buf[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let values: Vec<f64> = floats.by_ref().take(rows * cols).collect();
        let row_self: Vec<f64> = floats.by_ref().take(rows).collect();
        let col_self: Vec<f64> = floats.collect();
        Ok(Some(KernelMatrix {
            rows,
            cols,
            values,
            row_self,
            col_self,
            normalized,
            config: KernelConfig { kind, r },
        }))
    }
}

const CACHE_MAGIC: &[u8; 8] = b"CWIGRAM1";

fn check_positive(selfs: &[f64]) -> Result<()> {
    match selfs.iter().position(|&v| v.is_nan() || v <= 0.0) {
        Some(index) => Err(Error::DegenerateSample {
            index,
            value: selfs[index],
        }),
        None => Ok(()),
    }
}

fn map_blocks<F>(rows: usize, cols: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut out = vec![0.0; rows * cols];
    if cols == 0 {
        return out;
    }
    let fill = |(b, chunk): (usize, &mut [f64])| {
        let start = b * DEFAULT_BLOCK_ROWS;
        for (k, row) in chunk.chunks_mut(cols).enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = f(start + k, j);
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(DEFAULT_BLOCK_ROWS * cols)
            .enumerate()
            .for_each(fill);
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(DEFAULT_BLOCK_ROWS * cols)
            .enumerate()
            .for_each(fill);
    }
    out
}

/// Raw inner products `<x_i, z_j>` with squared norms of both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProducts {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub row_sq: Vec<f64>,
    pub col_sq: Vec<f64>,
}

impl InnerProducts {
    pub fn compute(x: &Samples, z: &Samples) -> Result<Self> {
        if x.dim != z.dim {
            return Err(Error::Dimension {
                expected: x.dim,
                got: z.dim,
            });
        }
        let values = map_blocks(x.len(), z.len(), |i, j| x.rows[i].dot(&z.rows[j]));
        Ok(InnerProducts {
            rows: x.len(),
            cols: z.len(),
            values,
            row_sq: x.squared_norms(),
            col_sq: z.squared_norms(),
        })
    }
}

/// Unnormalized Gram matrix between `x` and `z`.
pub fn gram(x: &Samples, z: &Samples, config: KernelConfig) -> Result<KernelMatrix> {
    KernelMatrix::from_inner_products(&InnerProducts::compute(x, z)?, config, false)
}

/// Normalized Gram computed in one pass (no overflow for large RBF inputs).
pub fn normalized_gram(x: &Samples, z: &Samples, config: KernelConfig) -> Result<KernelMatrix> {
    KernelMatrix::from_inner_products(&InnerProducts::compute(x, z)?, config, true)
}

/// `K[i][j] / sqrt(row_self[i] * col_self[j])`.
pub fn normalize(k: &KernelMatrix) -> Result<KernelMatrix> {
    check_positive(&k.row_self)?;
    check_positive(&k.col_self)?;
    let values = map_blocks(k.rows, k.cols, |i, j| {
        k.values[i * k.cols + j] / (k.row_self[i] * k.col_self[j]).sqrt()
    });
    Ok(KernelMatrix {
        rows: k.rows,
        cols: k.cols,
        values,
        row_self: vec![1.0; k.rows],
        col_self: vec![1.0; k.cols],
        normalized: true,
        config: k.config,
    })
}
