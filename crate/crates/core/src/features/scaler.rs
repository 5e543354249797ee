use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, DENSE_LEN};

/// Per-coordinate min/max of the dense block on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler(train: &[FeatureVector]) -> Result<ScalerState> {
    if train.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit a scaler on zero vectors".into(),
        ));
    }
    let mut state = ScalerState {
        min: vec![f64::INFINITY; DENSE_LEN],
        max: vec![f64::NEG_INFINITY; DENSE_LEN],
    };
    for v in train {
        for (j, &x) in v.dense.iter().enumerate() {
            state.min[j] = state.min[j].min(x);
            state.max[j] = state.max[j].max(x);
        }
    }
    Ok(state)
}

/// Maps each dense coordinate to `(x - min) / (max - min)` without clamping;
/// constant training columns map to 0. Sparse blocks pass through.
pub fn apply_scaler(state: &ScalerState, v: &FeatureVector) -> FeatureVector {
    let mut out = v.clone();
    for (j, x) in out.dense.iter_mut().enumerate() {
        let span = state.max[j] - state.min[j];
        *x = if span > 0.0 {
            (*x - state.min[j]) / span
        } else {
            0.0
        };
    }
    out
}
