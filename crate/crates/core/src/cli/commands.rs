use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::io::{hash_path, hash_str, write_atomic, FeatureCache};
use super::{suffixed, RunConfig};
use crate::corpus::{self, Dataset, Task};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Featurizer, GridMap, DENSE_LEN};
use crate::kernel::{KernelConfig, KernelKind};
use crate::learn::{
    fit_predictor, fit_scaling, grid_search, sha256_hex, vectorize, ModelFile, Provenance,
    SolverParams, TuneGrid, TuneInput,
};
use crate::metrics::{EvalReport, F1Mode};
use crate::resources::Resources;

struct Split {
    data: Dataset,
    hash: String,
}

fn load_split(path: &Path, need_labels: bool) -> Result<Split> {
    let bytes = std::fs::read(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Data(format!("{}: not valid UTF-8", path.display())))?;
    let labeled = corpus::detect_labels(&text);
    let mut data = corpus::parse_str(&text, labeled)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    if need_labels && !labeled {
        return Err(Error::Data(format!("{}: labels required", path.display())));
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    (data.genre, data.split) = corpus::infer_meta(name);
    Ok(Split {
        hash: sha256_hex(text.as_bytes()),
        data,
    })
}

struct Env {
    resources: Resources,
    hashes: BTreeMap<String, String>,
    key: String,
}

fn load_resources(cfg: &RunConfig) -> Result<Env> {
    let need = |p: &Option<std::path::PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| Error::InvalidArgument(format!("{flag} is required")))
    };
    let wordnet = need(&cfg.wordnet_dir, "--wordnet")?;
    let context = need(&cfg.context_embeddings, "--context-emb")?;
    let grid = cfg
        .grid_embeddings
        .clone()
        .unwrap_or_else(|| context.clone());
    for p in [&wordnet, &context, &grid] {
        if !p.exists() {
            return Err(Error::Resource(format!("{} does not exist", p.display())));
        }
    }
    let mut hashes = BTreeMap::new();
    hashes.insert("wordnet".to_string(), hash_path(&wordnet)?);
    let context_hash = hash_path(&context)?;
    let grid_hash = if grid == context {
        context_hash.clone()
    } else {
        hash_path(&grid)?
    };
    hashes.insert("context_embeddings".to_string(), context_hash);
    hashes.insert("grid_embeddings".to_string(), grid_hash);
    let key = hash_str(&hashes.values().map(String::as_str).collect::<Vec<_>>());
    let resources = Resources::load(&wordnet, &context, &grid)?;
    Ok(Env {
        resources,
        hashes,
        key,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Format(e.to_string()))
}

fn features_for(
    cfg: &RunConfig,
    env: &Env,
    featurizer: &Featurizer<'_>,
    split: &Split,
) -> Result<Vec<FeatureVector>> {
    let cache = FeatureCache::new(cfg.cache_dir.clone());
    let key = hash_str(&[
        &split.hash,
        &to_json(featurizer.config())?,
        &env.key,
        &to_json(&featurizer.grid_map())?,
    ]);
    cache.get_or_compute(&key, || featurizer.featurize_all(&split.data.instances))
}

fn kernel_config(kind: KernelKind, r: f64) -> KernelConfig {
    match kind {
        KernelKind::Linear => KernelConfig::linear(),
        KernelKind::Rbf => KernelConfig::rbf(r),
    }
}

/// Featurizes `fit_on`, fits the scaler and the model, and returns the model file.
fn fit_model_file(
    cfg: &RunConfig,
    env: &Env,
    fit_on: &Split,
    kernel: KernelConfig,
    c: f64,
    inputs: BTreeMap<String, String>,
) -> Result<ModelFile> {
    let featurizer = Featurizer::fit(&env.resources, cfg.features.clone(), &fit_on.data)?;
    let vectors = features_for(cfg, env, &featurizer, fit_on)?;
    let scaler = fit_scaling(&vectors, &cfg.features)?;
    let samples = vectorize(&vectors, scaler.as_ref(), &cfg.features)?;
    let targets = corpus::targets(&fit_on.data, cfg.task)?;
    let predictor = fit_predictor(
        &samples,
        &targets,
        cfg.task,
        kernel,
        c,
        cfg.nu,
        &SolverParams::default(),
    )?;
    let mut resolved = cfg.clone();
    resolved.c = c;
    resolved.r = kernel.r;
    let provenance = Provenance {
        dataset_hash: fit_on.hash.clone(),
        c,
        r: (kernel.kind == KernelKind::Rbf).then_some(kernel.r),
        nu: (cfg.task == Task::Regress).then_some(cfg.nu),
        inputs,
        config: resolved.to_json(),
    };
    Ok(ModelFile::new(
        cfg.features.clone(),
        scaler,
        featurizer.grid_map().cloned(),
        predictor,
        provenance,
    ))
}

fn merged(a: &Split, b: &Split) -> Split {
    Split {
        data: a.data.concat(&b.data),
        hash: hash_str(&[&a.hash, &b.hash]),
    }
}

fn path_of(p: &Option<std::path::PathBuf>) -> Result<&Path> {
    p.as_deref()
        .ok_or_else(|| Error::InvalidArgument("missing path argument".into()))
}

fn support_count(model: &ModelFile) -> usize {
    match &model.predictor {
        crate::learn::Predictor::Svm(m) => m.support.len(),
        crate::learn::Predictor::Svr(m) => m.support.len(),
    }
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let train = load_split(path_of(&cfg.train)?, true)?;
    let env = load_resources(cfg)?;
    let mut inputs = env.hashes.clone();
    inputs.insert("train".into(), train.hash.clone());
    let fit_on = if cfg.refit_with_validation {
        let valid = load_split(path_of(&cfg.valid)?, true)?;
        inputs.insert("valid".into(), valid.hash.clone());
        merged(&train, &valid)
    } else {
        train
    };
    let kernel = kernel_config(cfg.kernel, cfg.r);
    let model = fit_model_file(cfg, &env, &fit_on, kernel, cfg.c, inputs)?;
    write_atomic(path_of(&cfg.out)?, model.to_json()?.as_bytes())?;
    println!(
        "trained on {} instances, {} support vectors",
        fit_on.data.len(),
        support_count(&model)
    );
    Ok(())
}

pub fn tune(cfg: &RunConfig, report_path: &Path) -> Result<()> {
    let train = load_split(path_of(&cfg.train)?, true)?;
    let valid = load_split(path_of(&cfg.valid)?, true)?;
    let env = load_resources(cfg)?;
    let mut inputs = env.hashes.clone();
    inputs.insert("train".into(), train.hash.clone());
    inputs.insert("valid".into(), valid.hash.clone());

    let featurizer = Featurizer::fit(&env.resources, cfg.features.clone(), &train.data)?;
    let tv = features_for(cfg, &env, &featurizer, &train)?;
    let vv = features_for(cfg, &env, &featurizer, &valid)?;
    let scaler = fit_scaling(&tv, &cfg.features)?;
    let xs = vectorize(&tv, scaler.as_ref(), &cfg.features)?;
    let vs = vectorize(&vv, scaler.as_ref(), &cfg.features)?;
    let yt = corpus::targets(&train.data, cfg.task)?;
    let yv = corpus::targets(&valid.data, cfg.task)?;
    let grid = TuneGrid {
        nu: cfg.nu,
        ..TuneGrid::default()
    };
    let input = TuneInput {
        train: &xs,
        train_targets: &yt,
        valid: &vs,
        valid_targets: &yv,
        task: cfg.task,
        kind: cfg.kernel,
        f1_mode: cfg.f1,
    };
    let result = grid_search(&input, &grid, &SolverParams::default())?;

    let metric = match (cfg.task, cfg.f1) {
        (Task::Classify, F1Mode::Macro) => "f1_macro",
        (Task::Classify, F1Mode::Positive) => "f1_positive",
        (Task::Regress, _) => "neg_mae",
    };
    let mut table = format!("{:>8} {:>6} {:>10}\n", "C", "r", metric);
    let mut report = String::new();
    let _ = writeln!(report, "task={}", task_name(cfg.task));
    let _ = writeln!(report, "kernel={}", kernel_name(cfg.kernel));
    let _ = writeln!(report, "metric={metric}");
    for cell in &result.table {
        let r = cell.r.map_or("-".to_string(), |r| r.to_string());
        let score = cell.score.map_or("failed".to_string(), |s| s.to_string());
        let _ = writeln!(
            table,
            "{:>8} {:>6} {:>10}",
            cell.c,
            r,
            cell.score.map_or("failed".into(), |s| format!("{s:.4}"))
        );
        let _ = write!(report, "cell C={} r={r} score={score}", cell.c);
        if let Some(e) = &cell.error {
            let _ = write!(report, " error={e:?}");
        }
        report.push('\n');
    }
    let best_r = result.best.r.map_or("-".to_string(), |r| r.to_string());
    let _ = writeln!(report, "best.C={}", result.best.c);
    let _ = writeln!(report, "best.r={best_r}");
    let _ = writeln!(
        report,
        "best.score={}",
        result.best.score.unwrap_or(f64::NAN)
    );
    let _ = writeln!(report, "config={}", to_json(&cfg.to_json())?);
    for (name, h) in &inputs {
        let _ = writeln!(report, "sha256.{name}={h}");
    }
    write_atomic(report_path, report.as_bytes())?;
    print!("{table}");
    println!("best C={} r={best_r}", result.best.c);

    let kernel = result.best_kernel(cfg.kernel);
    let fit_on = if cfg.refit_with_validation {
        merged(&train, &valid)
    } else {
        train
    };
    let model = fit_model_file(cfg, &env, &fit_on, kernel, result.best.c, inputs)?;
    write_atomic(path_of(&cfg.out)?, model.to_json()?.as_bytes())?;
    Ok(())
}

pub fn featurize(cfg: &RunConfig) -> Result<()> {
    let train = load_split(path_of(&cfg.train)?, false)?;
    let env = load_resources(cfg)?;
    let featurizer = Featurizer::fit(&env.resources, cfg.features.clone(), &train.data)?;
    let mut inputs = env.hashes.clone();
    let mut splits = Vec::new();
    let mut loaded = vec![("train", train)];
    for (name, path) in [("valid", &cfg.valid), ("test", &cfg.test)] {
        if let Some(p) = path {
            loaded.push((name, load_split(p, false)?));
        }
    }
    for (name, split) in loaded {
        inputs.insert(name.to_string(), split.hash.clone());
        let vectors = features_for(cfg, &env, &featurizer, &split)?;
        splits.push(FeatureSplit {
            name: name.to_string(),
            ids: split.data.instances.iter().map(|i| i.id.clone()).collect(),
            vectors,
        });
    }
    let dims = Dims {
        dense: DENSE_LEN,
        ngram: cfg.features.ngram_len(),
        grid: cfg.features.grid_len(),
        total: cfg.features.dim(),
    };
    let file = FeatureFile {
        format: "cwi-features",
        version: "1.0",
        config: cfg.to_json(),
        inputs,
        dims,
        grid_map: featurizer.grid_map(),
        splits,
    };
    let mut text = serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_atomic(path_of(&cfg.out)?, text.as_bytes())?;
    println!(
        "dense\t{}\nngram\t{}\ngrid\t{}\ntotal\t{}",
        dims.dense, dims.ngram, dims.grid, dims.total
    );
    Ok(())
}

#[derive(Serialize, Clone, Copy)]
struct Dims {
    dense: usize,
    ngram: usize,
    grid: usize,
    total: usize,
}

#[derive(Serialize)]
struct FeatureSplit {
    name: String,
    ids: Vec<String>,
    vectors: Vec<FeatureVector>,
}

#[derive(Serialize)]
struct FeatureFile<'a> {
    format: &'static str,
    version: &'static str,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    dims: Dims,
    grid_map: Option<&'a GridMap>,
    splits: Vec<FeatureSplit>,
}

pub fn predict(cfg: &RunConfig) -> Result<()> {
    let model_path = path_of(&cfg.model)?;
    let model = ModelFile::load(model_path)?;
    let test = load_split(path_of(&cfg.test)?, false)?;
    let env = load_resources(cfg)?;
    let featurizer = Featurizer::with_grid(
        &env.resources,
        model.features.clone(),
        model.grid_map.clone(),
    );
    let vectors = features_for(cfg, &env, &featurizer, &test)?;
    let samples = model.samples(&vectors)?;
    let values = model.predictor.predict(&samples, cfg.clamp)?;
    let mut tsv = String::new();
    for (inst, v) in test.data.instances.iter().zip(&values) {
        match model.task {
            Task::Classify => {
                let _ = writeln!(tsv, "{}\t{}", inst.id, u8::from(*v > 0.0));
            }
            Task::Regress => {
                let _ = writeln!(tsv, "{}\t{v}", inst.id);
            }
        }
    }
    let out = path_of(&cfg.out)?;
    write_atomic(out, tsv.as_bytes())?;

    let mut inputs = env.hashes.clone();
    inputs.insert("model".into(), hash_path(model_path)?);
    inputs.insert("test".into(), test.hash.clone());
    let mut resolved = cfg.clone();
    resolved.task = model.task;
    resolved.kernel = model.predictor.kernel().kind;
    resolved.c = model.provenance.c;
    resolved.r = model.predictor.kernel().r;
    resolved.features = model.features.clone();
    let meta = serde_json::json!({
        "config": resolved.to_json(),
        "inputs": inputs,
        "predictions_sha256": sha256_hex(tsv.as_bytes()),
    });
    let mut meta_text =
        serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
    meta_text.push('\n');
    write_atomic(&suffixed(out, ".meta.json"), meta_text.as_bytes())?;
    println!("{} predictions", values.len());
    Ok(())
}

/// Reads `id<TAB>value` lines.
pub(crate) fn read_predictions(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let (id, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(idx + 1, "expected id<TAB>value"))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad value {value:?}")))?;
        if !v.is_finite() {
            return Err(Error::parse(idx + 1, "non-finite value"));
        }
        out.push((id.to_string(), v));
    }
    Ok(out)
}

pub fn evaluate(cfg: &RunConfig, predictions: &Path) -> Result<()> {
    let gold = load_split(path_of(&cfg.test)?, true)?;
    let text = std::fs::read_to_string(predictions)
        .map_err(|e| Error::Data(format!("{}: {e}", predictions.display())))?;
    let rows = read_predictions(&text)?;
    let mut by_id: HashMap<&str, f64> = HashMap::with_capacity(rows.len());
    for (id, v) in &rows {
        if by_id.insert(id.as_str(), *v).is_some() {
            return Err(Error::Data(format!("duplicate prediction for {id:?}")));
        }
    }
    if rows.len() != gold.data.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} gold instances",
            rows.len(),
            gold.data.len()
        )));
    }
    let pred = gold
        .data
        .instances
        .iter()
        .map(|inst| {
            by_id
                .get(inst.id.as_str())
                .copied()
                .ok_or_else(|| Error::Data(format!("no prediction for {:?}", inst.id)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let truth = corpus::targets(&gold.data, cfg.task)?;
    if truth.is_empty() {
        return Err(Error::Data("gold file is empty".into()));
    }
    let report = match cfg.task {
        Task::Classify => {
            let labels: Vec<f64> = pred
                .iter()
                .map(|&v| if v > 0.0 { 1.0 } else { -1.0 })
                .collect();
            EvalReport::classification(&labels, &truth)?
        }
        Task::Regress => EvalReport::regression(&pred, &truth)?,
    };
    print!("{}", report.to_text());
    if let Some(out) = &cfg.out {
        let mut kv = report.to_key_values();
        let _ = writeln!(kv, "config={}", to_json(&cfg.to_json())?);
        let _ = writeln!(kv, "sha256.gold={}", gold.hash);
        let _ = writeln!(kv, "sha256.predictions={}", sha256_hex(text.as_bytes()));
        write_atomic(out, kv.as_bytes())?;
    }
    Ok(())
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Classify => "classify",
        Task::Regress => "regress",
    }
}

fn kernel_name(k: KernelKind) -> &'static str {
    match k {
        KernelKind::Linear => "linear",
        KernelKind::Rbf => "rbf",
    }
}
