//! Grid search over `(C, r)` on a held-out split.

use serde::{Deserialize, Serialize};

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::kernel::{InnerProducts, KernelConfig, KernelKind, KernelMatrix, Samples};
use crate::learn::solver::SolverParams;
use crate::learn::svm::{nusvr_fit, sign, svc_fit};
use crate::metrics::{f1, mae, F1Mode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub c_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub nu: f64,
}

impl Default for TuneGrid {
    fn default() -> Self {
        TuneGrid {
            c_values: vec![0.1, 1.0, 10.0, 100.0],
            r_values: vec![0.5, 1.0, 1.5, 2.0],
            nu: 0.5,
        }
    }
}

impl TuneGrid {
    pub fn validate(&self, kind: KernelKind) -> Result<()> {
        if self.c_values.is_empty() || (kind == KernelKind::Rbf && self.r_values.is_empty()) {
            return Err(Error::InvalidArgument("tuning grid is empty".into()));
        }
        Ok(())
    }
}

/// One grid cell. `r` is `None` for the linear kernel, which has no
/// scale parameter and is swept over `C` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub c: f64,
    pub r: Option<f64>,
    /// Macro (or positive-class) F1 for classification, `-MAE` for
    /// regression. `None` when the fit failed.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: CellScore,
    /// All cells, `r` major then `C`, in grid order.
    pub table: Vec<CellScore>,
}

impl TuneResult {
    pub fn best_kernel(&self, kind: KernelKind) -> KernelConfig {
        match self.best.r {
            Some(r) if kind == KernelKind::Rbf => KernelConfig::rbf(r),
            _ => KernelConfig::linear(),
        }
    }
}

/// Everything `grid_search` needs, with features already extracted.
pub struct TuneInput<'a> {
    pub train: &'a Samples,
    pub train_targets: &'a [f64],
    pub valid: &'a Samples,
    pub valid_targets: &'a [f64],
    pub task: Task,
    pub kind: KernelKind,
    pub f1_mode: F1Mode,
}

fn score_cell(
    input: &TuneInput<'_>,
    k_train: &KernelMatrix,
    k_valid: &KernelMatrix,
    c: f64,
    nu: f64,
    params: &SolverParams,
) -> Result<f64> {
    match input.task {
        Task::Classify => {
            let sol = svc_fit(k_train, input.train_targets, c, params)?;
            let pred: Vec<f64> = sol.decision(k_valid).into_iter().map(sign).collect();
            f1(&pred, input.valid_targets, input.f1_mode)
        }
        Task::Regress => {
            let sol = nusvr_fit(k_train, input.train_targets, c, nu, params)?;
            Ok(-mae(&sol.predict(k_valid), input.valid_targets)?)
        }
    }
}

fn sweep_c(
    input: &TuneInput<'_>,
    k_train: &KernelMatrix,
    k_valid: &KernelMatrix,
    grid: &TuneGrid,
    r: Option<f64>,
    params: &SolverParams,
) -> Vec<CellScore> {
    let run = |&c: &f64| {
        let (score, error) = match score_cell(input, k_train, k_valid, c, grid.nu, params) {
            Ok(s) if s.is_finite() => (Some(s), None),
            Ok(s) => (None, Some(format!("non-finite score {s}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        CellScore { c, r, score, error }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.c_values.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.c_values.iter().map(run).collect()
    }
}

/// Picks the highest score; ties go to the smaller `C`, then the smaller `r`.
pub fn select_best(table: &[CellScore]) -> Option<&CellScore> {
    table
        .iter()
        .filter(|cell| cell.score.is_some())
        .min_by(|a, b| {
            let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
            sb.total_cmp(&sa)
                .then(a.c.total_cmp(&b.c))
                .then(a.r.unwrap_or(0.0).total_cmp(&b.r.unwrap_or(0.0)))
        })
}

pub fn grid_search(
    input: &TuneInput<'_>,
    grid: &TuneGrid,
    params: &SolverParams,
) -> Result<TuneResult> {
    grid.validate(input.kind)?;
    if input.train.len() != input.train_targets.len()
        || input.valid.len() != input.valid_targets.len()
    {
        return Err(Error::InvalidArgument(
            "sample and target counts differ".into(),
        ));
    }
    if input.valid.is_empty() {
        return Err(Error::InvalidArgument("validation split is empty".into()));
    }
    let train_ip = InnerProducts::compute(input.train, input.train)?;
    let valid_ip = InnerProducts::compute(input.valid, input.train)?;

    let configs: Vec<(Option<f64>, KernelConfig)> = match input.kind {
        KernelKind::Linear => vec![(None, KernelConfig::linear())],
        KernelKind::Rbf => grid
            .r_values
            .iter()
            .map(|&r| (Some(r), KernelConfig::rbf(r)))
            .collect(),
    };
    let mut table = Vec::with_capacity(configs.len() * grid.c_values.len());
    for (r, config) in configs {
        let kernels = KernelMatrix::from_inner_products(&train_ip, config, true).and_then(|kt| {
            Ok((
                kt,
                KernelMatrix::from_inner_products(&valid_ip, config, true)?,
            ))
        });
        match kernels {
            Ok((kt, kv)) => table.extend(sweep_c(input, &kt, &kv, grid, r, params)),
            Err(e) => table.extend(grid.c_values.iter().map(|&c| CellScore {
                c,
                r,
                score: None,
                error: Some(e.to_string()),
            })),
        }
    }
    let best = select_best(&table).cloned().ok_or_else(|| {
        let first = table
            .iter()
            .find_map(|c| c.error.clone())
            .unwrap_or_default();
        Error::InvalidArgument(format!("every grid cell failed; first error: {first}"))
    })?;
    Ok(TuneResult { best, table })
}
