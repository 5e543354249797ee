//! Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//!
//! Run with `cargo test -p cwi-core --test acceptance`. Criteria 7 and 8 need
//! the official shared-task files and are skipped unless these variables are
//! set:
//!
//! * `CWI_DATA_DIR`: directory holding `News_Train.tsv`, `News_Dev.tsv`,
//!   `News_Test.tsv` and the same for `WikiNews` and `Wikipedia`.
//! * `CWI_WORDNET_DIR`: WordNet 3.0 `dict/` directory.
//! * `CWI_WORD2VEC`: word2vec vectors in text format (context features).
//! * `CWI_GLOVE`: 300-d GloVe vectors in text format (grid features).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cwi_core::corpus::{detect_labels, load_dataset, parse_str, Dataset};
use cwi_core::features::grid::{point_onehot, GridBounds};
use cwi_core::features::lexical::char_stats;
use cwi_core::features::{FeatureConfig, Featurizer};
use cwi_core::kernel::{gram, normalize, normalized_gram, KernelConfig, KernelMatrix, Samples};
use cwi_core::learn::{fit_scaling, nusvr_fit, svc_fit, vectorize, SolverParams, SvmModel};
use cwi_core::metrics::{accuracy, f1_macro, f1_positive, mae};
use cwi_core::numeric::pca_fit;
use cwi_core::resources::Resources;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "support/qp.rs"]
mod qp;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn synthetic() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic")
}

fn dense_kernel(k: &KernelMatrix) -> Vec<Vec<f64>> {
    (0..k.rows).map(|i| k.row(i).to_vec()).collect()
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Vec<Vec<f64>> {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| scale * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        if rows.iter().all(|r| r.iter().any(|v| *v != 0.0)) {
            return rows;
        }
    }
}

// 1 ---------------------------------------------------------------------

struct OracleRun {
    solves: usize,
    worst: f64,
    failures: Vec<String>,
}

/// The default 1e-3 KKT stopping rule bounds the violation, not the
/// objective, so the oracle comparison is decided at `tolerance`; the
/// default-tolerance figures are reported alongside.
fn solver_vs_oracle() -> Outcome {
    let start = Instant::now();
    let strict = oracle_run(1e-6);
    let elapsed = start.elapsed();
    let default = oracle_run(SolverParams::default().tolerance);
    let detail = format!(
        "tolerance 1e-6: {} solves, worst objective diff {:.1e}, {} failures, {:.1}s{}; \
         default tolerance: worst diff {:.1e}, {} failures",
        strict.solves,
        strict.worst,
        strict.failures.len(),
        elapsed.as_secs_f64(),
        strict
            .failures
            .first()
            .map(|f| format!(" (first: {f})"))
            .unwrap_or_default(),
        default.worst,
        default.failures.len(),
    );
    check(
        strict.failures.is_empty() && elapsed < Duration::from_secs(60),
        detail,
    )
}

fn oracle_run(tolerance: f64) -> OracleRun {
    let mut rng = ChaCha8Rng::seed_from_u64(2018);
    let params = SolverParams {
        tolerance,
        ..SolverParams::default()
    };
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut solves = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(2..=5);
        let (rows, y) = loop {
            let rows = random_rows(&mut rng, n, d, 1.0);
            let y: Vec<f64> = rows
                .iter()
                .map(|r| {
                    if r[0] - 0.5 * r[1] + rng.random_range(-0.5..0.5) > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            if y.contains(&1.0) && y.contains(&-1.0) {
                break (rows, y);
            }
        };
        let x = Samples::from_dense(&rows).unwrap();
        let probe = Samples::from_dense(&random_rows(&mut rng, 25, d, 1.2)).unwrap();
        let c = [0.1, 1.0, 10.0, 100.0][rng.random_range(0..4)];
        let r = [0.5, 1.0, 1.5, 2.0][rng.random_range(0..4)];
        for cfg in [KernelConfig::linear(), KernelConfig::rbf(r)] {
            solves += 1;
            let k = normalized_gram(&x, &x, cfg).unwrap();
            let kd = dense_kernel(&k);
            let oracle = qp::svc_dual(&kd, &y, c);
            if oracle.gap > 1e-9 {
                failures.push(format!("case {case}: oracle gap {:.1e}", oracle.gap));
                continue;
            }
            let sol = match svc_fit(&k, &y, c, &params) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("case {case}: {e}"));
                    continue;
                }
            };
            let diff = (sol.objective - oracle.objective).abs();
            worst = worst.max(diff);
            if diff > 1e-5 {
                failures.push(format!(
                    "case {case} {:?}: objective off by {diff:.2e}",
                    cfg.kind
                ));
            }
            let model = SvmModel::from_solution(&x, &sol, c, cfg);
            let (labels, _) = model.predict(&probe).unwrap();
            let b = qp::svc_bias(&kd, &y, &oracle.x, c);
            let kp = normalized_gram(&probe, &x, cfg).unwrap();
            for (p, label) in labels.iter().enumerate() {
                let f: f64 = (0..n)
                    .map(|j| oracle.x[j] * y[j] * kp.get(p, j))
                    .sum::<f64>()
                    + b;
                let expected = if f >= 0.0 { 1.0 } else { -1.0 };
                if *label != expected {
                    failures.push(format!(
                        "case {case} {:?}: probe {p} label differs (oracle f = {f:.2e})",
                        cfg.kind
                    ));
                }
            }
        }
    }
    OracleRun {
        solves,
        worst,
        failures,
    }
}

// 2 ---------------------------------------------------------------------

fn nu_property() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(434);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            vec![
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                1.0,
            ]
        })
        .collect();
    let t: Vec<f64> = rows
        .iter()
        .map(|r| 0.5 + 0.3 * (2.0 * r[0]).sin() * r[1] + rng.random_range(-0.05..0.05))
        .collect();
    let x = Samples::from_dense(&rows).unwrap();
    let k = normalized_gram(&x, &x, KernelConfig::rbf(1.0)).unwrap();
    let n = t.len() as f64;
    let mut ok = true;
    let mut parts = Vec::new();
    for nu in [0.25, 0.5, 0.75] {
        let sol = match nusvr_fit(&k, &t, 1.0, nu, &SolverParams::default()) {
            Ok(s) => s,
            Err(e) => return Fail(format!("nu {nu}: {e}")),
        };
        let pred = sol.predict(&k);
        let sv = sol.support_count() as f64 / n;
        // float slack only: points sitting on the tube edge are not violations
        let outside = pred
            .iter()
            .zip(&t)
            .filter(|(p, g)| (*p - *g).abs() > sol.epsilon + 1e-9)
            .count() as f64
            / n;
        ok &= sv >= nu - 0.05 && outside <= nu + 0.05;
        parts.push(format!("nu {nu}: sv {sv:.3} outside {outside:.3}"));
    }
    let elapsed = start.elapsed();
    check(
        ok && elapsed < Duration::from_secs(30),
        format!("{}; {:.2}s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

// 3 ---------------------------------------------------------------------

fn kernel_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(358);
    let mut problems = Vec::new();
    let mut count = 0;
    for case in 0..300 {
        let n = rng.random_range(1..=30);
        let d = rng.random_range(1..=40);
        let scale = [1e-3, 1.0, 30.0][case % 3];
        let mut rows = random_rows(&mut rng, n, d, scale);
        if n > 2 && case % 5 == 0 {
            rows[1] = rows[0].clone();
        }
        let x = Samples::from_dense(&rows).unwrap();
        let r = [0.5, 1.0, 1.5, 2.0][rng.random_range(0..4)];
        for cfg in [KernelConfig::linear(), KernelConfig::rbf(r)] {
            count += 1;
            let k = normalized_gram(&x, &x, cfg).unwrap();
            for i in 0..n {
                if (k.get(i, i) - 1.0).abs() > 1e-12 {
                    problems.push(format!("case {case}: diagonal {}", k.get(i, i)));
                }
                for j in 0..n {
                    let v = k.get(i, j);
                    if v.is_nan() || v.abs() > 1.0 + 1e-12 {
                        problems.push(format!("case {case}: entry {v}"));
                    }
                }
            }
            let jittered =
                DMatrix::from_fn(n, n, |i, j| k.get(i, j) + if i == j { 1e-10 } else { 0.0 });
            if nalgebra::Cholesky::new(jittered).is_none() {
                problems.push(format!("case {case} {:?}: Cholesky failed", cfg.kind));
            }
            let again = normalize(&k).unwrap();
            if again
                .values
                .iter()
                .zip(&k.values)
                .any(|(a, b)| (a - b).abs() > 1e-12)
            {
                problems.push(format!("case {case}: normalize not idempotent"));
            }
            // the one-pass normalized form equals normalizing the raw Gram
            if scale <= 1.0 {
                let two_pass = normalize(&gram(&x, &x, cfg).unwrap()).unwrap();
                if two_pass
                    .values
                    .iter()
                    .zip(&k.values)
                    .any(|(a, b)| (a - b).abs() > 1e-12)
                {
                    problems.push(format!(
                        "case {case}: one-pass and two-pass normalization differ"
                    ));
                }
            }
        }
    }
    check(
        problems.is_empty(),
        format!(
            "{count} Gram matrices, {} problems{}",
            problems.len(),
            problems
                .first()
                .map(|p| format!("; first: {p}"))
                .unwrap_or_default()
        ),
    )
}

// 4 ---------------------------------------------------------------------

fn pca() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(195);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5));
                (0..5)
                    .map(|j| {
                        a * (j as f64 + 1.0) * 0.3
                            + b * (j as f64 - 2.0)
                            + rng.random_range(-0.3..0.3)
                    })
                    .collect()
            })
            .collect();
        let model = pca_fit(&rows).unwrap();
        let m = DMatrix::from_fn(50, 5, |i, j| rows[i][j]);
        let mean = m.row_mean();
        let centered = DMatrix::from_fn(50, 5, |i, j| m[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / 49.0;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for (slot, &k) in order[..2].iter().enumerate() {
            let axis = eig.eigenvectors.column(k);
            let ours: Vec<f64> = rows
                .iter()
                .map(|r| {
                    let p = model.project(r).unwrap();
                    if slot == 0 {
                        p.0
                    } else {
                        p.1
                    }
                })
                .collect();
            let oracle: Vec<f64> = (0..50)
                .map(|i| centered.row(i).dot(&axis.transpose()))
                .collect();
            let same: f64 = ours
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let flipped: f64 = ours
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(same.min(flipped));
        }
    }
    let line: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            let t = i as f64 * 0.37 - 5.0;
            vec![1.0 + 2.0 * t, -0.5 + t, 3.0 - 0.25 * t, 0.1 * t, 7.0]
        })
        .collect();
    let second = pca_fit(&line).unwrap().explained_variance[1];
    check(
        worst <= 1e-8 && second <= 1e-12,
        format!("50 matrices, max projection diff {worst:.1e}; line second variance {second:.1e}"),
    )
}

// 5 ---------------------------------------------------------------------

fn load_synthetic() -> cwi_core::Result<(Resources, Dataset)> {
    let d = synthetic();
    let emb = d.join("embeddings.txt");
    let resources = Resources::load(&d.join("wordnet"), &emb, &emb)?;
    Ok((resources, load_dataset(&d.join("train.tsv"), true)?))
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[char] = &[
        'a', 'e', 'i', 'o', 'u', 'y', 'n', 'N', 'z', 'Q', 'x', '0', '7', '-', '\'', '.', ',', '"',
        '#', ' ', '\t', '\n', '\u{0}', 'é', 'ß', 'İ', 'ﬁ', '中', 'ж', '\u{301}', '\u{200b}',
        '\u{fffd}', '😀', '^', '$',
    ];
    let len = rng.random_range(0..24);
    (0..len)
        .map(|_| POOL[rng.random_range(0..POOL.len())])
        .collect()
}

fn feature_contracts() -> Outcome {
    let (resources, train) = match load_synthetic() {
        Ok(v) => v,
        Err(e) => return Fail(format!("synthetic resources: {e}")),
    };
    let config = FeatureConfig::default();
    let featurizer = match Featurizer::fit(&resources, config.clone(), &train) {
        Ok(f) => f,
        Err(e) => return Fail(format!("featurizer: {e}")),
    };
    let mut problems = Vec::new();
    if config.grid_len() != 1364 {
        problems.push(format!("grid block length {}", config.grid_len()));
    }
    let segments = [(0, 4), (4, 20), (20, 84), (84, 340), (340, 1364)];
    let one_per_segment = |v: &cwi_core::sparse::SparseVector| {
        v.nnz() == 5
            && v.values().all(|x| x == 1.0)
            && segments.iter().all(|&(lo, hi)| {
                v.entries()
                    .iter()
                    .filter(|(i, _)| (lo..hi).contains(&(*i as usize)))
                    .count()
                    == 1
            })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(246);
    let bounds = GridBounds {
        min: [-1.0, -2.0],
        max: [3.0, 0.5],
    };
    for _ in 0..2000 {
        let p = (rng.random_range(-3.0..5.0), rng.random_range(-4.0..2.0));
        if !one_per_segment(&point_onehot(p, &bounds, &config.grid_sizes)) {
            problems.push(format!("point {p:?} does not hit one cell per grid"));
            break;
        }
    }
    let mut words = 0;
    for inst in &train.instances {
        for w in cwi_core::features::target_words(&inst.target) {
            if resources.grid.embed(&w).is_some() {
                words += 1;
                if !one_per_segment(&featurizer.word_vector(&w, &[]).grid) {
                    problems.push(format!("word {w:?}: grid block is not 5 one-hot segments"));
                }
            }
        }
    }

    // multi-word targets equal the sum of their words, bit for bit
    let line = "X1\tThe credit crunch will obfuscate the big paradigm today.\t4\t17\tcredit crunch\t10\t10\t1\t0\t1\t0.05\n\
                X2\tThe perspicacious dog will see the cat today.\t4\t21\tperspicacious dog\t10\t10\t1\t0\t1\t0.05\n";
    let extra = parse_str(line, true).unwrap();
    for inst in extra.instances.iter().chain(&train.instances) {
        let words = cwi_core::features::target_words(&inst.target);
        if words.len() < 2 {
            continue;
        }
        let ctx = cwi_core::features::context_tokens(inst);
        let ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
        let parts: Vec<_> = words
            .iter()
            .map(|w| featurizer.word_vector(w, &ctx))
            .collect();
        let sum = parts[1..]
            .iter()
            .fold(parts[0].clone(), |acc, v| acc.add(v));
        if featurizer.featurize(inst) != sum {
            problems.push(format!(
                "{}: multi-word vector is not the sum of its words",
                inst.id
            ));
        }
    }
    if featurizer.featurize(&extra.instances[0]).dense[0] != 12.0 {
        problems.push("credit crunch char count is not 12".into());
    }

    let stats = char_stats("innovation").to_array();
    if stats != [10.0, 5.0, 5.0, 0.5, 0.5, 1.0] {
        problems.push(format!("char_stats(innovation) = {stats:?}"));
    }

    let mut fuzzed = Vec::with_capacity(10_000);
    for case in 0..10_000 {
        let word = random_string(&mut rng);
        let ctx: Vec<String> = (0..rng.random_range(0..4))
            .map(|_| random_string(&mut rng))
            .collect();
        let mut ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
        if case % 2 == 0 {
            ctx.extend(["cat", "paradigm", "will"]);
        }
        let v = featurizer.word_vector(&word, &ctx);
        if !v.is_finite() {
            problems.push(format!("non-finite features for {word:?}"));
            break;
        }
        fuzzed.push(v);
    }
    match fit_scaling(&fuzzed, &config).and_then(|s| vectorize(&fuzzed, s.as_ref(), &config)) {
        Ok(samples) => {
            if samples
                .rows
                .iter()
                .any(|r| r.values().any(|v| !v.is_finite()))
            {
                problems.push("non-finite scaled features".into());
            }
        }
        Err(e) => problems.push(format!("scaling fuzz vectors: {e}")),
    }
    check(
        problems.is_empty(),
        format!(
            "{words} grid words, 10000 fuzz strings, {} problems{}",
            problems.len(),
            problems
                .first()
                .map(|p| format!("; first: {p}"))
                .unwrap_or_default()
        ),
    )
}

// 6 ---------------------------------------------------------------------

/// (tp, fp, fn, tn, accuracy, positive-class F1, macro F1), worked by hand.
const METRIC_FIXTURES: [(usize, usize, usize, usize, f64, f64, f64); 20] = [
    (2, 0, 0, 2, 1.0, 1.0, 1.0),
    (1, 0, 1, 2, 3.0 / 4.0, 2.0 / 3.0, 11.0 / 15.0),
    (0, 0, 2, 2, 1.0 / 2.0, 0.0, 1.0 / 3.0),
    (0, 0, 0, 3, 1.0, 0.0, 1.0 / 2.0),
    (3, 0, 0, 0, 1.0, 1.0, 1.0 / 2.0),
    (0, 2, 2, 0, 0.0, 0.0, 0.0),
    (5, 1, 2, 4, 3.0 / 4.0, 10.0 / 13.0, 107.0 / 143.0),
    (1, 3, 0, 0, 1.0 / 4.0, 2.0 / 5.0, 1.0 / 5.0),
    (4, 4, 4, 4, 1.0 / 2.0, 1.0 / 2.0, 1.0 / 2.0),
    (10, 0, 5, 5, 3.0 / 4.0, 4.0 / 5.0, 11.0 / 15.0),
    (7, 2, 1, 10, 17.0 / 20.0, 14.0 / 17.0, 331.0 / 391.0),
    (1, 1, 1, 1, 1.0 / 2.0, 1.0 / 2.0, 1.0 / 2.0),
    (0, 1, 0, 0, 0.0, 0.0, 0.0),
    (2, 1, 0, 0, 2.0 / 3.0, 4.0 / 5.0, 2.0 / 5.0),
    (3, 2, 1, 4, 7.0 / 10.0, 2.0 / 3.0, 23.0 / 33.0),
    (6, 0, 3, 1, 7.0 / 10.0, 4.0 / 5.0, 3.0 / 5.0),
    (0, 5, 0, 5, 1.0 / 2.0, 0.0, 1.0 / 3.0),
    (9, 1, 1, 9, 9.0 / 10.0, 9.0 / 10.0, 9.0 / 10.0),
    (2, 3, 4, 1, 3.0 / 10.0, 4.0 / 11.0, 29.0 / 99.0),
    (50, 25, 25, 100, 3.0 / 4.0, 2.0 / 3.0, 11.0 / 15.0),
];

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(561);
    let mut mismatches = Vec::new();
    for (i, &(tp, fp, fneg, tn, acc, f1p, f1m)) in METRIC_FIXTURES.iter().enumerate() {
        let mut pairs: Vec<(f64, f64)> = std::iter::repeat_n((1.0, 1.0), tp)
            .chain(std::iter::repeat_n((1.0, 0.0), fp))
            .chain(std::iter::repeat_n((0.0, 1.0), fneg))
            .chain(std::iter::repeat_n((0.0, 0.0), tn))
            .collect();
        // order must not matter
        for k in (1..pairs.len()).rev() {
            pairs.swap(k, rng.random_range(0..=k));
        }
        let (pred, gold): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let n = (tp + fp + fneg + tn) as f64;
        let expected_mae = (fp + fneg) as f64 / n;
        let got = (
            accuracy(&pred, &gold).unwrap(),
            f1_positive(&pred, &gold).unwrap(),
            f1_macro(&pred, &gold).unwrap(),
            mae(&pred, &gold).unwrap(),
        );
        if got != (acc, f1p, f1m, expected_mae) {
            mismatches.push(format!("fixture {i}: got {got:?}"));
        }
    }
    // dyadic regression values keep MAE exact
    let reg: [(&[f64], &[f64], f64); 3] = [
        (&[0.5, 0.25], &[0.0, 0.5], 0.375),
        (&[0.125, 0.75, 1.0, 0.0], &[0.125, 0.25, 0.5, 0.5], 0.375),
        (&[0.0], &[0.0], 0.0),
    ];
    for (p, g, want) in reg {
        let got = mae(p, g).unwrap();
        if got != want {
            mismatches.push(format!("mae {p:?} vs {g:?}: {got}"));
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "20 confusion fixtures and 3 MAE fixtures, {} mismatches{}",
            mismatches.len(),
            mismatches
                .first()
                .map(|m| format!("; first: {m}"))
                .unwrap_or_default()
        ),
    )
}

// 7 and 8 ---------------------------------------------------------------

const GENRES: [&str; 3] = ["News", "WikiNews", "Wikipedia"];

fn official_file(dir: &Path, genre: &str, split: &str) -> PathBuf {
    dir.join(format!("{genre}_{split}.tsv"))
}

fn dataset_fidelity() -> Outcome {
    let Some(dir) = std::env::var_os("CWI_DATA_DIR").map(PathBuf::from) else {
        return Skip("CWI_DATA_DIR not set".into());
    };
    let expected: BTreeMap<&str, [usize; 3]> = [
        ("News", [14002, 1764, 2095]),
        ("WikiNews", [7746, 870, 1287]),
        ("Wikipedia", [5551, 694, 870]),
    ]
    .into();
    let mut wrong = Vec::new();
    let mut seen = Vec::new();
    for genre in GENRES {
        for (k, split) in ["Train", "Dev", "Test"].iter().enumerate() {
            let path = official_file(&dir, genre, split);
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => return Fail(format!("{}: {e}", path.display())),
            };
            let n = match parse_str(&text, detect_labels(&text)) {
                Ok(d) => d.len(),
                Err(e) => return Fail(format!("{}: {e}", path.display())),
            };
            seen.push(format!("{genre}/{split} {n}"));
            if n != expected[genre][k] {
                wrong.push(format!("{genre}/{split}: {n} != {}", expected[genre][k]));
            }
        }
    }
    check(
        wrong.is_empty(),
        if wrong.is_empty() {
            seen.join(", ")
        } else {
            wrong.join(", ")
        },
    )
}

fn cwi(args: &[String]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cwi"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "cwi {}: {}",
            args[0],
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn report_value(text: &str, key: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}="))?.parse().ok())
}

fn paper_reproduction() -> Outcome {
    let vars = [
        "CWI_DATA_DIR",
        "CWI_WORDNET_DIR",
        "CWI_WORD2VEC",
        "CWI_GLOVE",
    ];
    let values: Vec<Option<String>> = vars.iter().map(|v| std::env::var(v).ok()).collect();
    if values.iter().any(Option::is_none) {
        let missing: Vec<&str> = vars
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
            .collect();
        return Skip(format!("{} not set", missing.join(", ")));
    }
    let [data, wordnet, w2v, glove] = [0, 1, 2, 3].map(|i| values[i].clone().unwrap());
    let work = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Fail(e.to_string()),
    };
    let f1_target = [0.8594, 0.8201, 0.7919];
    let mae_target = [0.0492, 0.0667, 0.0805];
    let mut within = true;
    let mut ordered = true;
    let mut lines = Vec::new();
    for (g, genre) in GENRES.iter().enumerate() {
        let split = |s: &str| {
            official_file(Path::new(&data), genre, s)
                .display()
                .to_string()
        };
        let mut scores = BTreeMap::new();
        for task in ["classify", "regress"] {
            for kernel in ["rbf", "linear"] {
                let stem = work.path().join(format!("{genre}-{task}-{kernel}"));
                let model = format!("{}.json", stem.display());
                let pred = format!("{}.pred.tsv", stem.display());
                let report = format!("{}.eval.txt", stem.display());
                let res = vec![
                    "--wordnet".to_string(),
                    wordnet.clone(),
                    "--context-emb".into(),
                    w2v.clone(),
                    "--grid-emb".into(),
                    glove.clone(),
                ];
                let mut tune: Vec<String> = ["tune", "--task", task, "--kernel", kernel, "--train"]
                    .map(String::from)
                    .to_vec();
                tune.extend([
                    split("Train"),
                    "--valid".into(),
                    split("Dev"),
                    "--out".into(),
                    model.clone(),
                ]);
                tune.extend(res.clone());
                let mut predict: Vec<String> =
                    vec!["predict".into(), "--model".into(), model.clone()];
                predict.extend(["--test".into(), split("Test"), "--out".into(), pred.clone()]);
                predict.extend(res);
                let evaluate: Vec<String> =
                    ["evaluate", "--task", task, "--predictions", &pred, "--gold"]
                        .map(String::from)
                        .into_iter()
                        .chain([split("Test"), "--out".into(), report.clone()])
                        .collect();
                for args in [&tune, &predict, &evaluate] {
                    if let Err(e) = cwi(args) {
                        return Fail(e);
                    }
                }
                let eval_text = std::fs::read_to_string(&report).unwrap_or_default();
                let tune_text =
                    std::fs::read_to_string(format!("{model}.tune.txt")).unwrap_or_default();
                let key = if task == "classify" {
                    "f1_macro"
                } else {
                    "mae"
                };
                let score = report_value(&eval_text, key).unwrap_or(f64::NAN);
                let c = report_value(&tune_text, "best.C").unwrap_or(f64::NAN);
                let r = report_value(&tune_text, "best.r").unwrap_or(f64::NAN);
                lines.push(format!(
                    "{genre} {task} {kernel}: {key} {score:.4} (C {c}, r {r})"
                ));
                if kernel == "rbf" {
                    if task == "classify" {
                        within &= (score - f1_target[g]).abs() <= 0.02 && c == 10.0 && r == 1.0;
                    } else {
                        within &= (score - mae_target[g]).abs() <= 0.005 && r == 1.5;
                    }
                }
                scores.insert((task, kernel), score);
            }
        }
        ordered &= scores[&("classify", "rbf")] >= scores[&("classify", "linear")];
        ordered &= scores[&("regress", "rbf")] <= scores[&("regress", "linear")];
    }
    let summary = lines.join("; ");
    if within {
        Pass(summary)
    } else if ordered {
        Fail(format!(
            "outside tolerance, kernel ordering holds; {summary}"
        ))
    } else {
        Fail(format!(
            "outside tolerance and kernel ordering broken; {summary}"
        ))
    }
}

// 9 ---------------------------------------------------------------------

fn pipeline_pass(out: &Path) -> Result<(), String> {
    let d = synthetic();
    let p = |name: &str| d.join(name).display().to_string();
    let o = |name: &str| out.join(name).display().to_string();
    let res = vec![
        "--wordnet".to_string(),
        p("wordnet"),
        "--context-emb".into(),
        p("embeddings.txt"),
    ];
    let with_res = |mut args: Vec<String>| {
        args.extend(res.clone());
        args
    };
    let s = |items: &[&str]| items.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let steps = vec![
        with_res(s(&[
            "train",
            "--train",
            &p("train.tsv"),
            "--out",
            &o("train-model.json"),
        ])),
        with_res(s(&[
            "tune",
            "--train",
            &p("train.tsv"),
            "--valid",
            &p("valid.tsv"),
            "--out",
            &o("tuned.json"),
        ])),
        with_res(s(&[
            "predict",
            "--model",
            &o("tuned.json"),
            "--test",
            &p("test.tsv"),
            "--out",
            &o("pred.tsv"),
        ])),
        s(&[
            "evaluate",
            "--predictions",
            &o("pred.tsv"),
            "--gold",
            &p("test.tsv"),
            "--out",
            &o("eval.txt"),
        ]),
        with_res(s(&[
            "tune",
            "--task",
            "regress",
            "--train",
            &p("train.tsv"),
            "--valid",
            &p("valid.tsv"),
            "--out",
            &o("tuned-reg.json"),
        ])),
        with_res(s(&[
            "predict",
            "--model",
            &o("tuned-reg.json"),
            "--test",
            &p("test.tsv"),
            "--out",
            &o("pred-reg.tsv"),
        ])),
        s(&[
            "evaluate",
            "--task",
            "regress",
            "--predictions",
            &o("pred-reg.tsv"),
            "--gold",
            &p("test.tsv"),
            "--out",
            &o("eval-reg.txt"),
        ]),
    ];
    for args in &steps {
        cwi(args)?;
    }
    Ok(())
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap().flatten() {
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    files
}

fn synthetic_pipeline() -> Outcome {
    let start = Instant::now();
    let work = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Fail(e.to_string()),
    };
    if let Err(e) = pipeline_pass(work.path()) {
        return Fail(e);
    }
    let first = snapshot(work.path());
    if let Err(e) = pipeline_pass(work.path()) {
        return Fail(e);
    }
    let second = snapshot(work.path());
    let elapsed = start.elapsed();
    let cells = std::fs::read_to_string(work.path().join("tuned.json.tune.txt"))
        .map(|t| t.lines().filter(|l| l.starts_with("cell ")).count())
        .unwrap_or(0);
    let differing: Vec<&String> = first
        .keys()
        .filter(|k| second.get(*k) != first.get(*k))
        .collect();
    let f1 = first
        .get("eval.txt")
        .and_then(|b| report_value(&String::from_utf8_lossy(b), "f1_macro"))
        .unwrap_or(f64::NAN);
    check(
        differing.is_empty()
            && first.len() == second.len()
            && cells == 16
            && elapsed < Duration::from_secs(120),
        format!(
            "{} output files, {} differ, {cells} tuning cells, test macro F1 {f1:.4}, {:.1}s",
            first.len(),
            differing.len(),
            elapsed.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("solver matches QP oracle", solver_vs_oracle),
        ("nu-SVR nu-property", nu_property),
        ("kernel algebra", kernel_algebra),
        ("PCA vs eigendecomposition", pca),
        ("feature contracts", feature_contracts),
        ("metric fixtures", metrics_oracle),
        ("official dataset sizes", dataset_fidelity),
        ("published scores", paper_reproduction),
        ("synthetic end-to-end pipeline", synthetic_pipeline),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag} {}: {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
