//! SVM classification and ν-SVR regression over normalized precomputed kernels.

pub mod model;
pub mod solver;
pub mod svm;
pub mod tune;

pub use model::{fit_scaling, sha256_hex, vectorize, ModelFile, Predictor, Provenance};
pub use solver::{Solution, SolverParams, Variant};
pub use svm::{nusvr_fit, sign, svc_fit, SupportSet, SvcSolution, SvmModel, SvrModel, SvrSolution};
pub use tune::{grid_search, select_best, CellScore, TuneGrid, TuneInput, TuneResult};

use crate::corpus::Task;
use crate::error::Result;
use crate::kernel::{normalized_gram, KernelConfig, Samples};

/// Fits the task's model on `train` with the given hyperparameters.
pub fn fit_predictor(
    train: &Samples,
    targets: &[f64],
    task: Task,
    kernel: KernelConfig,
    c: f64,
    nu: f64,
    params: &SolverParams,
) -> Result<Predictor> {
    let k = normalized_gram(train, train, kernel)?;
    Ok(match task {
        Task::Classify => {
            let sol = svc_fit(&k, targets, c, params)?;
            Predictor::Svm(SvmModel::from_solution(train, &sol, c, kernel))
        }
        Task::Regress => {
            let sol = nusvr_fit(&k, targets, c, nu, params)?;
            Predictor::Svr(SvrModel::from_solution(train, &sol, c, nu, kernel))
        }
    })
}

#[cfg(test)]
#[path = "../../tests/support/qp.rs"]
mod qp;
