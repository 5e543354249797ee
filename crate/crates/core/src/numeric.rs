//! Cosine similarity, componentwise median and a two-component PCA.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Per-coordinate median; even counts average the two middle values.
pub fn componentwise_median<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::NoVectors)?.as_ref();
    let d = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.as_ref().len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: bad.as_ref().len(),
        });
    }
    let n = vectors.len();
    let mut column = vec![0.0; n];
    Ok((0..d)
        .map(|j| {
            for (slot, v) in column.iter_mut().zip(vectors) {
                *slot = v.as_ref()[j];
            }
            column.sort_by(f64::total_cmp);
            if n % 2 == 1 {
                column[n / 2]
            } else {
                0.5 * (column[n / 2 - 1] + column[n / 2])
            }
        })
        .collect())
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 10_000;

/// Eigen-decomposition of a symmetric matrix (row-major, `d × d`) by cyclic
/// Jacobi rotations. Returns eigenvalues and eigenvectors (as rows), unsorted.
pub fn symmetric_eigen(matrix: &[f64], d: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if matrix.len() != d * d {
        return Err(Error::Dimension {
            expected: d * d,
            got: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    // v[k*d + i]: component i of eigenvector k
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok((
            vec![0.0; d],
            (0..d).map(|k| v[k * d..(k + 1) * d].to_vec()).collect(),
        ));
    }

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                s += 2.0 * a[p * d + q] * a[p * d + q];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > JACOBI_TOL * total {
        sweeps += 1;
        if sweeps > JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vp = v[p * d + k];
                    let vq = v[q * d + k];
                    v[p * d + k] = c * vp - s * vq;
                    v[q * d + k] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..d).map(|i| a[i * d + i]).collect();
    let vectors = (0..d).map(|k| v[k * d..(k + 1) * d].to_vec()).collect();
    Ok((values, vectors))
}

/// Flips `v` so that its largest-magnitude coordinate (first on ties) is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Two orthonormal directions, decreasing explained variance.
    pub components: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn project(&self, v: &[f64]) -> Result<(f64, f64)> {
        if v.len() != self.mean.len() {
            return Err(Error::Dimension {
                expected: self.mean.len(),
                got: v.len(),
            });
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok((
            dot(&centered, &self.components[0]),
            dot(&centered, &self.components[1]),
        ))
    }
}

/// Fits the top two principal directions of the sample covariance.
pub fn pca_fit<V: AsRef<[f64]>>(rows: &[V]) -> Result<PcaModel> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::DegenerateData(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    let d = rows[0].as_ref().len();
    if d < 2 {
        return Err(Error::DegenerateData(format!(
            "PCA needs at least 2 columns, got {d}"
        )));
    }
    if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: bad.as_ref().len(),
        });
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for r in rows {
        for (c, (x, m)) in centered.iter_mut().zip(r.as_ref().iter().zip(&mean)) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i * d + j] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    if cov.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateData("all rows are equal".into()));
    }

    let (values, mut vectors) = symmetric_eigen(&cov, d)?;
    vectors.iter_mut().for_each(|v| canonical_sign(v));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let (i0, i1) = (order[0], order[1]);
    let tie = (values[i0] - values[i1]).abs() <= JACOBI_TOL * values[i0].abs().max(1.0);
    let (first, second) = if tie && lexicographic(&vectors[i1], &vectors[i0]).is_gt() {
        (i1, i0)
    } else {
        (i0, i1)
    };
    Ok(PcaModel {
        mean,
        components: [vectors[first].clone(), vectors[second].clone()],
        explained_variance: [values[first], values[second].max(0.0)],
    })
}
