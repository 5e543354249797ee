//! Dense reference solver for the two SVM duals, independent of the SMO code.
//!
//! Accelerated projected gradient (with adaptive restart) on the exact
//! feasible set, followed by an active-set polish that solves the KKT system
//! on the free variables with an SVD. Every iterate is scored with the
//! Frank-Wolfe gap `g'x - min_{z feasible} g'z`, which upper-bounds the
//! distance to the optimal objective, computed exactly by LP duality.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct QpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Certified bound on `objective - optimum`.
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
enum Feasible {
    /// `0 <= x <= c`, `y'x = 0`.
    Svc { y: Vec<f64>, c: f64 },
    /// `0 <= x <= c`, each half of `x` sums to `s`.
    Nu { half: usize, c: f64, s: f64 },
}

/// Root of a nondecreasing or nonincreasing piecewise-linear function given
/// its breakpoints.
fn piecewise_root(mut points: Vec<f64>, h: impl Fn(f64) -> f64) -> f64 {
    points.sort_by(f64::total_cmp);
    points.dedup();
    let lo = points[0] - 1.0;
    let hi = points[points.len() - 1] + 1.0;
    let mut xs = vec![lo];
    xs.extend(points);
    xs.push(hi);
    let vals: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    for k in 0..xs.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            return xs[k];
        }
        if (a < 0.0) != (b < 0.0) || b == 0.0 {
            return xs[k] + (xs[k + 1] - xs[k]) * a / (a - b);
        }
    }
    xs[xs.len() - 1]
}

fn project_sum(w: &[f64], c: f64, s: f64) -> Vec<f64> {
    let mut bps = Vec::with_capacity(2 * w.len());
    for &v in w {
        bps.push(v);
        bps.push(v - c);
    }
    let tau = piecewise_root(bps, |t| {
        w.iter().map(|&v| (v - t).clamp(0.0, c)).sum::<f64>() - s
    });
    w.iter().map(|&v| (v - tau).clamp(0.0, c)).collect()
}

impl Feasible {
    fn project(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Feasible::Svc { y, c } => {
                let mut bps = Vec::with_capacity(2 * w.len());
                for (v, yi) in w.iter().zip(y) {
                    bps.push(v * yi);
                    bps.push((v - c) * yi);
                }
                let h = |l: f64| -> f64 {
                    w.iter()
                        .zip(y)
                        .map(|(v, yi)| yi * (v - l * yi).clamp(0.0, *c))
                        .sum()
                };
                let lam = piecewise_root(bps, h);
                w.iter()
                    .zip(y)
                    .map(|(v, yi)| (v - lam * yi).clamp(0.0, *c))
                    .collect()
            }
            Feasible::Nu { half, c, s } => {
                let mut out = project_sum(&w[..*half], *c, *s);
                out.extend(project_sum(&w[*half..], *c, *s));
                out
            }
        }
    }

    /// `min_{z feasible} g'z`.
    fn linear_min(&self, g: &[f64]) -> f64 {
        match self {
            Feasible::Svc { y, c } => {
                // max over lambda of sum_i c * min(0, g_i + lambda y_i)
                let dual = |l: f64| -> f64 {
                    g.iter()
                        .zip(y)
                        .map(|(gi, yi)| c * (gi + l * yi).min(0.0))
                        .sum()
                };
                let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max) * 4.0;
                g.iter()
                    .zip(y)
                    .map(|(gi, yi)| -gi * yi)
                    .chain([scale, -scale])
                    .map(dual)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Feasible::Nu { half, c, s } => {
                let greedy = |part: &[f64]| -> f64 {
                    let mut sorted = part.to_vec();
                    sorted.sort_by(f64::total_cmp);
                    let mut left = *s;
                    let mut total = 0.0;
                    for v in sorted {
                        let take = left.min(*c);
                        total += take * v;
                        left -= take;
                    }
                    total
                };
                greedy(&g[..*half]) + greedy(&g[*half..])
            }
        }
    }

    /// Equality constraints as rows of `A` with right-hand side `b`.
    fn equalities(&self, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        match self {
            Feasible::Svc { y, .. } => (vec![y.clone()], vec![0.0]),
            Feasible::Nu { half, s, .. } => {
                let mut a1 = vec![0.0; n];
                let mut a2 = vec![0.0; n];
                a1[..*half].iter_mut().for_each(|v| *v = 1.0);
                a2[*half..].iter_mut().for_each(|v| *v = 1.0);
                (vec![a1, a2], vec![*s, *s])
            }
        }
    }

    fn upper(&self) -> f64 {
        match self {
            Feasible::Svc { c, .. } | Feasible::Nu { c, .. } => *c,
        }
    }
}

struct Qp<'a> {
    h: &'a [Vec<f64>],
    f: &'a [f64],
    set: Feasible,
}

impl Qp<'_> {
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.h
            .iter()
            .zip(self.f)
            .map(|(row, fi)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + fi)
            .collect()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let g = self.grad(x);
        // 1/2 x'Hx + f'x = 1/2 x'(g + f)
        0.5 * x
            .iter()
            .zip(g.iter().zip(self.f))
            .map(|(xi, (gi, fi))| xi * (gi + fi))
            .sum::<f64>()
    }

    fn gap(&self, x: &[f64]) -> f64 {
        let g = self.grad(x);
        let gx: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        (gx - self.set.linear_min(&g)).max(0.0)
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        let c = self.set.upper();
        let (a, b) = self.set.equalities(x.len());
        x.iter().all(|&v| v >= -tol && v <= c + tol)
            && a.iter().zip(&b).all(|(row, bi)| {
                (row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - bi).abs()
                    <= tol * (1.0 + bi.abs())
            })
    }

    /// Fixes variables within `tol` of a bound and solves the equality-
    /// constrained problem on the rest.
    fn polish(&self, x: &[f64], tol: f64) -> Option<Vec<f64>> {
        let n = x.len();
        let c = self.set.upper();
        let mut fixed = x.to_vec();
        let free: Vec<usize> = (0..n)
            .filter(|&i| {
                if x[i] <= tol {
                    fixed[i] = 0.0;
                    false
                } else if x[i] >= c - tol {
                    fixed[i] = c;
                    false
                } else {
                    true
                }
            })
            .collect();
        if free.is_empty() {
            return self.feasible(&fixed, 1e-12).then_some(fixed);
        }
        let (a, b) = self.set.equalities(n);
        let m = a.len();
        let nf = free.len();
        let dim = nf + m;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (p, &i) in free.iter().enumerate() {
            for (q, &j) in free.iter().enumerate() {
                kkt[(p, q)] = self.h[i][j];
            }
            for (r, row) in a.iter().enumerate() {
                kkt[(p, nf + r)] = row[i];
                kkt[(nf + r, p)] = row[i];
            }
            let bound_part: f64 = (0..n)
                .filter(|j| !free.contains(j))
                .map(|j| self.h[i][j] * fixed[j])
                .sum();
            rhs[p] = -self.f[i] - bound_part;
        }
        for (r, row) in a.iter().enumerate() {
            let bound_part: f64 = (0..n)
                .filter(|j| !free.contains(j))
                .map(|j| row[j] * fixed[j])
                .sum();
            rhs[nf + r] = b[r] - bound_part;
        }
        let sol = kkt.svd(true, true).solve(&rhs, 1e-12).ok()?;
        let mut out = fixed;
        for (p, &i) in free.iter().enumerate() {
            out[i] = sol[p];
        }
        if !self.feasible(&out, 1e-12) {
            return None;
        }
        out.iter_mut().for_each(|v| *v = v.clamp(0.0, c));
        Some(out)
    }

    fn solve(&self, max_iter: usize, target_gap: f64) -> QpResult {
        let n = self.f.len();
        let lipschitz = self
            .h
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(1e-12, f64::max);
        let step = 1.0 / lipschitz;
        let mut x = self.set.project(&vec![0.0; n]);
        let mut yv = x.clone();
        let mut t = 1.0f64;
        let mut best = (self.gap(&x), x.clone());
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let g = self.grad(&yv);
            let w: Vec<f64> = yv.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let xn = self.set.project(&w);
            let restart: f64 = yv
                .iter()
                .zip(&xn)
                .zip(&x)
                .map(|((y, a), b)| (y - a) * (a - b))
                .sum();
            if restart > 0.0 {
                t = 1.0;
                yv = xn.clone();
            } else {
                let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let mom = (t - 1.0) / tn;
                yv = xn.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
                t = tn;
            }
            x = xn;
            if iterations % 25 == 0 {
                let gap = self.gap(&x);
                if gap < best.0 {
                    best = (gap, x.clone());
                }
                if gap < 1e-4 {
                    for tol in [1e-9, 1e-7, 1e-5] {
                        if let Some(p) = self.polish(&x, tol) {
                            let pg = self.gap(&p);
                            if pg < best.0 {
                                best = (pg, p);
                            }
                        }
                    }
                }
                if best.0 <= target_gap {
                    break;
                }
            }
        }
        let (gap, x) = best;
        QpResult {
            objective: self.objective(&x),
            x,
            gap,
            iterations,
        }
    }
}

/// `min 1/2 a'Qa - e'a` with `Q_ij = y_i y_j K_ij`, `0 <= a <= c`, `y'a = 0`.
pub fn svc_dual(k: &[Vec<f64>], y: &[f64], c: f64) -> QpResult {
    let n = y.len();
    let h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
        .collect();
    let f = vec![-1.0; n];
    let qp = Qp {
        h: &h,
        f: &f,
        set: Feasible::Svc { y: y.to_vec(), c },
    };
    qp.solve(400_000, 1e-11)
}

/// ν-SVR dual over `(alpha, alpha*)`:
/// `min 1/2 (a - a*)'K(a - a*) - t'(a - a*)` with `0 <= a, a* <= c`,
/// `sum a = sum a* = c nu l / 2`.
pub fn nusvr_dual(k: &[Vec<f64>], t: &[f64], c: f64, nu: f64) -> QpResult {
    let l = t.len();
    let sign = |i: usize| if i < l { 1.0 } else { -1.0 };
    let h: Vec<Vec<f64>> = (0..2 * l)
        .map(|i| {
            (0..2 * l)
                .map(|j| sign(i) * sign(j) * k[i % l][j % l])
                .collect()
        })
        .collect();
    let f: Vec<f64> = (0..2 * l).map(|i| -sign(i) * t[i % l]).collect();
    let qp = Qp {
        h: &h,
        f: &f,
        set: Feasible::Nu {
            half: l,
            c,
            s: c * nu * l as f64 / 2.0,
        },
    };
    qp.solve(400_000, 1e-11)
}

/// Offset from the KKT conditions: the average of `y_i - sum_j a_j y_j K_ij`
/// over free variables, else the midpoint of the feasible interval.
pub fn svc_bias(k: &[Vec<f64>], y: &[f64], a: &[f64], c: f64) -> f64 {
    let n = y.len();
    let tol = 1e-8 * c.max(1.0);
    let f: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| a[j] * y[j] * k[i][j]).sum())
        .collect();
    let free: Vec<f64> = (0..n)
        .filter(|&i| a[i] > tol && a[i] < c - tol)
        .map(|i| y[i] - f[i])
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    // a_i = 0 needs y_i (f_i + b) >= 1; a_i = c needs y_i (f_i + b) <= 1.
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let v = y[i] - f[i];
        let at_zero = a[i] <= tol;
        if (y[i] > 0.0) == at_zero {
            lo = lo.max(v);
        } else {
            hi = hi.min(v);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => 0.0,
    }
}
