//! Accuracy, F1 and mean absolute error.
//!
//! Classification labels are `±1` (complex is `+1`). F1 values are formed as
//! a single integer ratio, so they are the correctly rounded value of the
//! exact fraction.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Task;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    /// Complex predicted complex.
    pub tp: u64,
    /// Simple predicted complex.
    pub fp: u64,
    /// Complex predicted simple.
    pub fn_: u64,
    /// Simple predicted simple.
    pub tn: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `(2 tp, 2 tp + fp + fn)` for the complex class.
    fn positive_ratio(&self) -> (u128, u128) {
        let a = 2 * self.tp as u128;
        (a, a + self.fp as u128 + self.fn_ as u128)
    }

    fn negative_ratio(&self) -> (u128, u128) {
        let a = 2 * self.tn as u128;
        (a, a + self.fn_ as u128 + self.fp as u128)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension {
            expected: b,
            got: a,
        });
    }
    if a == 0 {
        return Err(Error::InvalidArgument(
            "metrics need at least one prediction".into(),
        ));
    }
    Ok(())
}

pub fn confusion(pred: &[f64], gold: &[f64]) -> Result<Confusion> {
    check_lengths(pred.len(), gold.len())?;
    let mut c = Confusion::default();
    for (&p, &g) in pred.iter().zip(gold) {
        match (p > 0.0, g > 0.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u128, den: u128) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mean of the two per-class F1 scores. A class absent from both
/// predictions and gold contributes 0.
pub fn f1_macro(pred: &[f64], gold: &[f64]) -> Result<f64> {
    let c = confusion(pred, gold)?;
    let (a1, d1) = c.positive_ratio();
    let (a2, d2) = c.negative_ratio();
    Ok(match (d1, d2) {
        (0, 0) => 0.0,
        (0, _) => ratio(a2, 2 * d2),
        (_, 0) => ratio(a1, 2 * d1),
        _ => ratio(a1 * d2 + a2 * d1, 2 * d1 * d2),
    })
}

/// F1 of the complex class only.
pub fn f1_positive(pred: &[f64], gold: &[f64]) -> Result<f64> {
    let (a, d) = confusion(pred, gold)?.positive_ratio();
    Ok(ratio(a, d))
}

pub fn accuracy(pred: &[f64], gold: &[f64]) -> Result<f64> {
    let c = confusion(pred, gold)?;
    Ok(ratio((c.tp + c.tn) as u128, c.total() as u128))
}

pub fn mae(pred: &[f64], gold: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), gold.len())?;
    Ok(pred
        .iter()
        .zip(gold)
        .map(|(p, g)| (p - g).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Mode {
    Macro,
    Positive,
}

impl std::str::FromStr for F1Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro" => Ok(F1Mode::Macro),
            "positive" => Ok(F1Mode::Positive),
            other => Err(Error::InvalidArgument(format!("unknown F1 mode {other:?}"))),
        }
    }
}

pub fn f1(pred: &[f64], gold: &[f64], mode: F1Mode) -> Result<f64> {
    match mode {
        F1Mode::Macro => f1_macro(pred, gold),
        F1Mode::Positive => f1_positive(pred, gold),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub n: usize,
    /// Metric name and value, in report order.
    pub metrics: Vec<(String, f64)>,
    pub confusion: Option<Confusion>,
}

impl EvalReport {
    pub fn classification(pred: &[f64], gold: &[f64]) -> Result<Self> {
        let c = confusion(pred, gold)?;
        Ok(EvalReport {
            task: Task::Classify,
            n: pred.len(),
            metrics: vec![
                ("accuracy".into(), accuracy(pred, gold)?),
                ("f1_macro".into(), f1_macro(pred, gold)?),
                ("f1_positive".into(), f1_positive(pred, gold)?),
            ],
            confusion: Some(c),
        })
    }

    pub fn regression(pred: &[f64], gold: &[f64]) -> Result<Self> {
        Ok(EvalReport {
            task: Task::Regress,
            n: pred.len(),
            metrics: vec![("mae".into(), mae(pred, gold)?)],
            confusion: None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.0 == name).map(|m| m.1)
    }

    /// Human-readable aligned table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let task = match self.task {
            Task::Classify => "classify",
            Task::Regress => "regress",
        };
        let _ = writeln!(out, "{:<12} {task}", "task");
        let _ = writeln!(out, "{:<12} {}", "n", self.n);
        for (name, v) in &self.metrics {
            let _ = writeln!(out, "{name:<12} {v:.4}");
        }
        if let Some(c) = &self.confusion {
            let _ = writeln!(out, "{:<12} {:>8} {:>8}", "gold\\pred", "complex", "simple");
            let _ = writeln!(out, "{:<12} {:>8} {:>8}", "complex", c.tp, c.fn_);
            let _ = writeln!(out, "{:<12} {:>8} {:>8}", "simple", c.fp, c.tn);
        }
        out
    }

    /// `key=value` lines for machine diffing.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let task = match self.task {
            Task::Classify => "classify",
            Task::Regress => "regress",
        };
        let _ = writeln!(out, "task={task}");
        let _ = writeln!(out, "n={}", self.n);
        for (name, v) in &self.metrics {
            let _ = writeln!(out, "{name}={v}");
        }
        if let Some(c) = &self.confusion {
            let _ = writeln!(out, "tp={}\nfp={}\nfn={}\ntn={}", c.tp, c.fp, c.fn_, c.tn);
        }
        out
    }
}
