//! Two-variable SMO over a precomputed kernel.
//!
//! Solves
//!
//! ```text
//! min  1/2 b'Qb + p'b    s.t.  0 <= b_t <= C,  y'b = const
//! ```
//!
//! with `Q[s][t] = y_s y_t K[s mod l][t mod l]`, choosing the maximal
//! violating pair each iteration. The `Nu` variant keeps the sums over
//! `y = +1` and `y = -1` separately fixed, which is the ν-SVR dual.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    /// Stop when the maximal KKT violation `m - M` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Budget for cached Q rows, in MiB.
    pub cache_mb: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tolerance: 1e-3,
            max_iterations: 10_000_000,
            cache_mb: 100.0,
        }
    }
}

/// LRU cache of signed kernel rows.
struct QRows<'a> {
    kernel: &'a KernelMatrix,
    y: &'a [f64],
    len: usize,
    capacity: usize,
    rows: HashMap<usize, (Rc<Vec<f64>>, u64)>,
    clock: u64,
}

impl<'a> QRows<'a> {
    fn new(kernel: &'a KernelMatrix, y: &'a [f64], cache_mb: f64) -> Self {
        let len = y.len();
        let bytes = (cache_mb.max(0.0) * 1024.0 * 1024.0) as usize;
        let capacity = (bytes / (8 * len.max(1))).max(2);
        QRows {
            kernel,
            y,
            len,
            capacity,
            rows: HashMap::new(),
            clock: 0,
        }
    }

    fn k(&self, s: usize, t: usize) -> f64 {
        let l = self.kernel.rows;
        self.kernel.get(s % l, t % l)
    }

    fn diag(&self, s: usize) -> f64 {
        self.k(s, s)
    }

    fn row(&mut self, s: usize) -> Rc<Vec<f64>> {
        self.clock += 1;
        if let Some(entry) = self.rows.get_mut(&s) {
            entry.1 = self.clock;
            return entry.0.clone();
        }
        if self.rows.len() >= self.capacity {
            if let Some(&oldest) = self.rows.iter().min_by_key(|(_, v)| v.1).map(|(k, _)| k) {
                self.rows.remove(&oldest);
            }
        }
        let ys = self.y[s];
        let row: Vec<f64> = (0..self.len)
            .map(|t| ys * self.y[t] * self.k(s, t))
            .collect();
        let row = Rc::new(row);
        self.rows.insert(s, (row.clone(), self.clock));
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Single equality constraint `y'b = const` (C-SVC).
    Standard,
    /// Separate constraints per label sign (ν-SVR).
    Nu,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub beta: Vec<f64>,
    pub gradient: Vec<f64>,
    pub rho: f64,
    /// Nu variant only: `(r1 + r2) / 2`; for ν-SVR `epsilon = -r`.
    pub r: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub violation: f64,
}

struct Problem<'a> {
    q: QRows<'a>,
    y: &'a [f64],
    p: &'a [f64],
    c: f64,
    beta: Vec<f64>,
    g: Vec<f64>,
}

impl Problem<'_> {
    fn is_upper(&self, t: usize) -> bool {
        self.beta[t] >= self.c
    }

    fn is_lower(&self, t: usize) -> bool {
        self.beta[t] <= 0.0
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            !self.is_upper(t)
        } else {
            !self.is_lower(t)
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            !self.is_lower(t)
        } else {
            !self.is_upper(t)
        }
    }

    /// Maximal violating pair, optionally restricted to one label sign.
    fn select(&self, sign: Option<f64>) -> Option<(usize, usize, f64)> {
        let mut best_up = (f64::NEG_INFINITY, usize::MAX);
        let mut best_low = (f64::INFINITY, usize::MAX);
        for t in 0..self.beta.len() {
            if sign.is_some_and(|s| s != self.y[t]) {
                continue;
            }
            let v = -self.y[t] * self.g[t];
            if self.in_up(t) && v > best_up.0 {
                best_up = (v, t);
            }
            if self.in_low(t) && v < best_low.0 {
                best_low = (v, t);
            }
        }
        if best_up.1 == usize::MAX || best_low.1 == usize::MAX {
            return None;
        }
        Some((best_up.1, best_low.1, best_up.0 - best_low.0))
    }

    fn select_pair(&self, variant: Variant) -> Option<(usize, usize, f64)> {
        match variant {
            Variant::Standard => self.select(None),
            Variant::Nu => {
                let pos = self.select(Some(1.0));
                let neg = self.select(Some(-1.0));
                match (pos, neg) {
                    (Some(a), Some(b)) => Some(if a.2 >= b.2 { a } else { b }),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    fn update(&mut self, i: usize, j: usize) {
        let qi = self.q.row(i);
        let qj = self.q.row(j);
        let c = self.c;
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let qii = self.q.diag(i);
        let qjj = self.q.diag(j);
        let (mut ai, mut aj) = (old_i, old_j);

        if self.y[i] != self.y[j] {
            let quad = (qii + qjj + 2.0 * qi[j]).max(TAU);
            let delta = (-self.g[i] - self.g[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qi[j]).max(TAU);
            let delta = (self.g[i] - self.g[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }

        self.beta[i] = ai;
        self.beta[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (t, g) in self.g.iter_mut().enumerate() {
            *g += qi[t] * di + qj[t] * dj;
        }
    }

    fn rho_standard(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..self.beta.len() {
            let yg = self.y[t] * self.g[t];
            if self.is_upper(t) {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.is_lower(t) {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            0.5 * (ub + lb)
        }
    }

    /// Returns `(rho, r)` for the Nu variant.
    fn rho_nu(&self) -> (f64, f64) {
        let mut acc = [(f64::INFINITY, f64::NEG_INFINITY, 0usize, 0.0); 2];
        for t in 0..self.beta.len() {
            let slot = &mut acc[usize::from(self.y[t] < 0.0)];
            let g = self.g[t];
            if self.is_upper(t) {
                slot.1 = slot.1.max(g);
            } else if self.is_lower(t) {
                slot.0 = slot.0.min(g);
            } else {
                slot.2 += 1;
                slot.3 += g;
            }
        }
        let value = |(ub, lb, free, sum): (f64, f64, usize, f64)| {
            if free > 0 {
                sum / free as f64
            } else {
                0.5 * (ub + lb)
            }
        };
        let r1 = value(acc[0]);
        let r2 = value(acc[1]);
        ((r1 - r2) / 2.0, (r1 + r2) / 2.0)
    }
}

/// Runs SMO from a feasible starting point `beta0`.
pub fn solve(
    kernel: &KernelMatrix,
    y: &[f64],
    p: &[f64],
    c: f64,
    beta0: Vec<f64>,
    variant: Variant,
    params: &SolverParams,
) -> Result<Solution> {
    let n = y.len();
    debug_assert_eq!(p.len(), n);
    debug_assert_eq!(beta0.len(), n);
    let mut prob = Problem {
        q: QRows::new(kernel, y, params.cache_mb),
        y,
        p,
        c,
        beta: beta0,
        g: p.to_vec(),
    };
    for t in 0..n {
        if prob.beta[t] != 0.0 {
            let row = prob.q.row(t);
            let bt = prob.beta[t];
            for (g, q) in prob.g.iter_mut().zip(row.iter()) {
                *g += q * bt;
            }
        }
    }

    let mut iterations = 0;
    let violation = loop {
        let Some((i, j, gap)) = prob.select_pair(variant) else {
            break 0.0;
        };
        if gap < params.tolerance {
            break gap.max(0.0);
        }
        if iterations >= params.max_iterations {
            return Err(Error::NoConvergence(iterations));
        }
        prob.update(i, j);
        iterations += 1;
    };

    let (rho, r) = match variant {
        Variant::Standard => (prob.rho_standard(), 0.0),
        Variant::Nu => prob.rho_nu(),
    };
    let objective = prob
        .beta
        .iter()
        .zip(prob.g.iter().zip(prob.p))
        .map(|(b, (g, p))| b * (g + p))
        .sum::<f64>()
        / 2.0;
    Ok(Solution {
        beta: prob.beta,
        gradient: prob.g,
        rho,
        r,
        objective,
        iterations,
        violation,
    })
}
