//! C-SVC and ν-SVR on normalized precomputed kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelConfig, KernelMatrix, Samples};
use crate::learn::solver::{solve, SolverParams, Variant};
use crate::sparse::SparseVector;

/// Coefficients below this magnitude are dropped from the support set.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

fn check_training_kernel(k: &KernelMatrix, n: usize) -> Result<()> {
    if !k.normalized {
        return Err(Error::InvalidArgument(
            "training kernel must be normalized".into(),
        ));
    }
    if !k.is_square() || k.rows != n {
        return Err(Error::Dimension {
            expected: n,
            got: k.rows,
        });
    }
    Ok(())
}

/// Dual solution of the soft-margin SVM.
#[derive(Clone, Debug, PartialEq)]
pub struct SvcSolution {
    /// `alpha_i` in `[0, C]` for every training point.
    pub alpha: Vec<f64>,
    pub labels: Vec<f64>,
    pub bias: f64,
    /// `1/2 a'Qa - e'a` at the returned point.
    pub objective: f64,
    pub iterations: usize,
    pub violation: f64,
}

impl SvcSolution {
    /// Decision values on rows of a normalized `test × train` kernel.
    pub fn decision(&self, k: &KernelMatrix) -> Vec<f64> {
        (0..k.rows)
            .map(|i| {
                let row = k.row(i);
                self.alpha
                    .iter()
                    .zip(&self.labels)
                    .zip(row)
                    .filter(|((a, _), _)| **a > SUPPORT_THRESHOLD)
                    .map(|((a, y), kv)| a * y * kv)
                    .sum::<f64>()
                    + self.bias
            })
            .collect()
    }
}

pub fn svc_fit(k: &KernelMatrix, y: &[f64], c: f64, params: &SolverParams) -> Result<SvcSolution> {
    check_training_kernel(k, y.len())?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive, got {c}"
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::InvalidArgument(
            "training labels contain a single class".into(),
        ));
    }
    let p = vec![-1.0; y.len()];
    let sol = solve(k, y, &p, c, vec![0.0; y.len()], Variant::Standard, params)?;
    Ok(SvcSolution {
        alpha: sol.beta,
        labels: y.to_vec(),
        bias: -sol.rho,
        objective: sol.objective,
        iterations: sol.iterations,
        violation: sol.violation,
    })
}

/// Dual solution of ν-SVR.
#[derive(Clone, Debug, PartialEq)]
pub struct SvrSolution {
    /// `alpha_i - alpha*_i` per training point.
    pub coef: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    /// Tube half-width found by the solver.
    pub epsilon: f64,
    pub objective: f64,
    pub iterations: usize,
    pub violation: f64,
}

impl SvrSolution {
    pub fn predict(&self, k: &KernelMatrix) -> Vec<f64> {
        (0..k.rows)
            .map(|i| {
                self.coef
                    .iter()
                    .zip(k.row(i))
                    .filter(|(c, _)| c.abs() > SUPPORT_THRESHOLD)
                    .map(|(c, kv)| c * kv)
                    .sum::<f64>()
                    + self.bias
            })
            .collect()
    }

    pub fn support_count(&self) -> usize {
        self.coef
            .iter()
            .filter(|c| c.abs() > SUPPORT_THRESHOLD)
            .count()
    }
}

/// ν-SVR with box `[0, C]` and `sum(alpha + alpha*) = C nu l`.
pub fn nusvr_fit(
    k: &KernelMatrix,
    t: &[f64],
    c: f64,
    nu: f64,
    params: &SolverParams,
) -> Result<SvrSolution> {
    let l = t.len();
    check_training_kernel(k, l)?;
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "nu must be in (0, 1], got {nu}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive, got {c}"
        )));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "regression targets must be finite".into(),
        ));
    }
    let mut beta = vec![0.0; 2 * l];
    let mut p = vec![0.0; 2 * l];
    let mut y = vec![0.0; 2 * l];
    let mut remaining = c * nu * l as f64 / 2.0;
    for i in 0..l {
        let a = remaining.min(c);
        beta[i] = a;
        beta[i + l] = a;
        remaining -= a;
        p[i] = -t[i];
        y[i] = 1.0;
        p[i + l] = t[i];
        y[i + l] = -1.0;
    }
    let sol = solve(k, &y, &p, c, beta, Variant::Nu, params)?;
    let alpha = sol.beta[..l].to_vec();
    let alpha_star = sol.beta[l..].to_vec();
    Ok(SvrSolution {
        coef: alpha.iter().zip(&alpha_star).map(|(a, b)| a - b).collect(),
        alpha,
        alpha_star,
        bias: -sol.rho,
        epsilon: -sol.r,
        objective: sol.objective,
        iterations: sol.iterations,
        violation: sol.violation,
    })
}

/// Support vectors with their coefficients and the kernel used at fit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub kernel: KernelConfig,
    pub dim: usize,
    pub vectors: Vec<SparseVector>,
    /// `|sv|^2`, i.e. the raw inner-product self-similarity of each vector.
    pub squared_norms: Vec<f64>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
}

impl SupportSet {
    fn from_coefs(train: &Samples, coefs: &[f64], bias: f64, kernel: KernelConfig) -> Self {
        let keep: Vec<usize> = (0..coefs.len())
            .filter(|&i| coefs[i].abs() > SUPPORT_THRESHOLD)
            .collect();
        let vectors: Vec<SparseVector> = keep.iter().map(|&i| train.rows[i].clone()).collect();
        SupportSet {
            kernel,
            dim: train.dim,
            squared_norms: vectors.iter().map(SparseVector::squared_norm).collect(),
            dual_coefs: keep.iter().map(|&i| coefs[i]).collect(),
            vectors,
            bias,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `sum coef_i k^(sv_i, x) + b` with the normalized kernel.
    pub fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        if x.dim != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.dim,
            });
        }
        x.rows
            .iter()
            .enumerate()
            .map(|(row, v)| {
                let xx = v.squared_norm();
                if self.kernel.kind == crate::kernel::KernelKind::Linear
                    && (xx.is_nan() || xx <= 0.0)
                {
                    return Err(Error::DegenerateSample {
                        index: row,
                        value: xx,
                    });
                }
                Ok(self
                    .vectors
                    .iter()
                    .zip(&self.squared_norms)
                    .zip(&self.dual_coefs)
                    .map(|((sv, &ss), &c)| c * self.kernel.eval_normalized(sv.dot(v), ss, xx))
                    .sum::<f64>()
                    + self.bias)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support: SupportSet,
    pub c: f64,
}

impl SvmModel {
    pub fn from_solution(train: &Samples, sol: &SvcSolution, c: f64, kernel: KernelConfig) -> Self {
        let coefs: Vec<f64> = sol
            .alpha
            .iter()
            .zip(&sol.labels)
            .map(|(a, y)| a * y)
            .collect();
        SvmModel {
            support: SupportSet::from_coefs(train, &coefs, sol.bias, kernel),
            c,
        }
    }

    /// Labels (`sign`, with `sign(0) = +1`) and raw decision values.
    pub fn predict(&self, x: &Samples) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.support.decision(x)?;
        Ok((d.iter().map(|&v| sign(v)).collect(), d))
    }
}

pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support: SupportSet,
    pub c: f64,
    pub nu: f64,
    pub epsilon: f64,
}

impl SvrModel {
    pub fn from_solution(
        train: &Samples,
        sol: &SvrSolution,
        c: f64,
        nu: f64,
        kernel: KernelConfig,
    ) -> Self {
        SvrModel {
            support: SupportSet::from_coefs(train, &sol.coef, sol.bias, kernel),
            c,
            nu,
            epsilon: sol.epsilon,
        }
    }

    pub fn predict(&self, x: &Samples, clamp: bool) -> Result<Vec<f64>> {
        let mut out = self.support.decision(x)?;
        if clamp {
            out.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        Ok(out)
    }
}
