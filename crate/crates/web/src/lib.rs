//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export is a thin wrapper over a plain-Rust function so the logic can
//! be unit-tested natively.

use cwi_core::features::grid::{point_onehot, GridBounds};
use cwi_core::features::lexical::{char_stats, fnv1a, ngrams};
use cwi_core::features::FeatureConfig;
use cwi_core::kernel::{normalized_gram, KernelConfig, KernelKind, Samples};
use cwi_core::learn::{svc_fit, SolverParams, SvmModel};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Points live in the unit square; a constant third coordinate keeps the
/// normalized kernels sensitive to position rather than only to angle.
fn lift(x: f64, y: f64) -> Vec<f64> {
    vec![x, y, 1.0]
}

/// Trains an SVM on labeled 2-D points and evaluates it on a
/// `resolution × resolution` grid over the unit square (row-major, rows
/// follow y).
pub fn svm_surface(
    xs: &[f64],
    ys: &[f64],
    labels: &[f64],
    kernel: &str,
    c: f64,
    r: f64,
    resolution: usize,
) -> Result<serde_json::Value, String> {
    if xs.len() != ys.len() || xs.len() != labels.len() {
        return Err("xs, ys and labels must have the same length".into());
    }
    if resolution == 0 || resolution > 400 {
        return Err("resolution must be in 1..=400".into());
    }
    let config = match kernel.parse::<KernelKind>().map_err(|e| e.to_string())? {
        KernelKind::Linear => KernelConfig::linear(),
        KernelKind::Rbf => KernelConfig::rbf(r),
    };
    let rows: Vec<Vec<f64>> = xs.iter().zip(ys).map(|(&x, &y)| lift(x, y)).collect();
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l > 0.0 { 1.0 } else { -1.0 })
        .collect();
    let train = Samples::from_dense(&rows).map_err(|e| e.to_string())?;
    let k = normalized_gram(&train, &train, config).map_err(|e| e.to_string())?;
    let sol = svc_fit(&k, &y, c, &SolverParams::default()).map_err(|e| e.to_string())?;
    let model = SvmModel::from_solution(&train, &sol, c, config);

    let step = 1.0 / resolution as f64;
    let grid: Vec<Vec<f64>> = (0..resolution * resolution)
        .map(|i| {
            lift(
                (i % resolution) as f64 * step + step / 2.0,
                (i / resolution) as f64 * step + step / 2.0,
            )
        })
        .collect();
    let probe = Samples::from_dense(&grid).map_err(|e| e.to_string())?;
    let (_, values) = model.predict(&probe).map_err(|e| e.to_string())?;
    let (train_labels, _) = model.predict(&train).map_err(|e| e.to_string())?;
    let correct = train_labels.iter().zip(&y).filter(|(a, b)| a == b).count();
    let support: Vec<usize> = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 1e-12)
        .map(|(i, _)| i)
        .collect();
    Ok(json!({
        "values": values,
        "support": support,
        "train_accuracy": correct as f64 / y.len() as f64,
        "iterations": sol.iterations,
    }))
}

/// Character statistics and hashed n-grams of a word under the default
/// feature layout.
pub fn word_report(word: &str) -> serde_json::Value {
    let cfg = FeatureConfig::default();
    let stats = char_stats(word);
    let grams: Vec<_> = cfg
        .ngram_orders
        .iter()
        .enumerate()
        .flat_map(|(slot, &n)| {
            ngrams(word, n, cfg.ngram_boundary_markers)
                .into_iter()
                .map(move |g| (slot, n, g))
        })
        .map(|(slot, n, g)| {
            let bucket = fnv1a(g.as_bytes()) % cfg.ngram_buckets_per_order as u64;
            json!({
                "gram": g,
                "order": n,
                "index": slot * cfg.ngram_buckets_per_order + bucket as usize,
            })
        })
        .collect();
    json!({
        "char_count": stats.char_count,
        "vowel_count": stats.vowel_count,
        "consonant_count": stats.consonant_count,
        "vowel_pct": stats.vowel_pct,
        "consonant_pct": stats.consonant_pct,
        "repeat_runs": stats.repeat_runs,
        "ngrams": grams,
    })
}

/// Cell index within each grid size for a point of the unit square.
pub fn cells_of(x: f64, y: f64) -> Vec<u32> {
    let sizes = FeatureConfig::default().grid_sizes;
    let bounds = GridBounds {
        min: [0.0, 0.0],
        max: [1.0, 1.0],
    };
    let mut offset = 0;
    point_onehot((x, y), &bounds, &sizes)
        .entries()
        .iter()
        .zip(&sizes)
        .map(|(&(global, _), &s)| {
            let local = global - offset;
            offset += (s * s) as u32;
            local
        })
        .collect()
}

/// JSON `{values, support, train_accuracy, iterations}`; see [`svm_surface`].
#[wasm_bindgen(js_name = trainSurface)]
#[allow(clippy::too_many_arguments)]
pub fn train_surface(
    xs: &[f64],
    ys: &[f64],
    labels: &[f64],
    kernel: &str,
    c: f64,
    r: f64,
    resolution: usize,
) -> Result<String, JsError> {
    svm_surface(xs, ys, labels, kernel, c, r, resolution)
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wordFeatures)]
pub fn word_features(word: &str) -> String {
    word_report(word).to_string()
}

#[wasm_bindgen(js_name = gridCells)]
pub fn grid_cells(x: f64, y: f64) -> Vec<u32> {
    cells_of(x, y)
}
