//! Feature extraction for a target word (or multi-word expression) in context.
//!
//! Every instance maps to a fixed-layout [`FeatureVector`]:
//!
//! | block  | size                    | content                                   |
//! |--------|-------------------------|-------------------------------------------|
//! | dense  | 18                      | char stats, WordNet, similarity stats     |
//! | ngrams | orders × buckets        | hashed character n-gram counts            |
//! | grid   | Σ s² over grid sizes    | one-hot PCA-plane cell per grid size      |
//!
//! Multi-word targets are featurized word by word and summed over all blocks.

pub mod grid;
pub mod lexical;
pub mod scaler;
pub mod semantic;
pub mod stopwords;

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::numeric::{pca_fit, PcaModel};
use crate::resources::{RelationPolicy, Resources};
use crate::sparse::SparseVector;

pub use grid::{grid_len, grid_onehot, GridBounds};
pub use lexical::{char_ngrams, char_stats, tokenize, CharStats, Token};
pub use scaler::{apply_scaler, fit_scaler, ScalerState};
pub use semantic::{
    context_sense_stats, context_word_stats, sense_bag, sense_embedding, wordnet_features,
    SenseCache,
};

pub const DENSE_LEN: usize = 18;

/// Names of the dense coordinates, in layout order.
pub const DENSE_NAMES: [&str; DENSE_LEN] = [
    "char_count",
    "vowel_count",
    "consonant_count",
    "vowel_pct",
    "consonant_pct",
    "repeat_runs",
    "sense_count",
    "pos_noun",
    "pos_verb",
    "pos_adj",
    "pos_adv",
    "pos_other",
    "word_sim_min",
    "word_sim_max",
    "word_sim_mean",
    "sense_sim_min",
    "sense_sim_max",
    "sense_sim_mean",
];

const CHAR_SLOT: usize = 0;
const SENSE_COUNT_SLOT: usize = 6;
const POS_SLOT: usize = 7;
const WORD_SIM_SLOT: usize = 12;
const SENSE_SIM_SLOT: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    Char,
    Ngram,
    Wordnet,
    Context,
    Sense,
    Grid,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 6] = [
        FeatureFamily::Char,
        FeatureFamily::Ngram,
        FeatureFamily::Wordnet,
        FeatureFamily::Context,
        FeatureFamily::Sense,
        FeatureFamily::Grid,
    ];

    /// Parses a comma-separated list such as `char,ngram,grid` (or `all`).
    pub fn parse_list(list: &str) -> Result<Vec<FeatureFamily>> {
        if list.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<FeatureFamily> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(FeatureFamily::from_str)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for FeatureFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "char" => FeatureFamily::Char,
            "ngram" => FeatureFamily::Ngram,
            "wordnet" => FeatureFamily::Wordnet,
            "context" => FeatureFamily::Context,
            "sense" => FeatureFamily::Sense,
            "grid" => FeatureFamily::Grid,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown feature family {other:?}"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Minmax,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub ngram_orders: Vec<usize>,
    pub ngram_buckets_per_order: usize,
    /// Surround words with `^`/`$` before taking n-grams.
    pub ngram_boundary_markers: bool,
    pub grid_sizes: Vec<usize>,
    pub scaling: Scaling,
    pub families: Vec<FeatureFamily>,
    pub relations: RelationPolicy,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            ngram_orders: vec![1, 2, 3, 4],
            ngram_buckets_per_order: 4096,
            ngram_boundary_markers: true,
            grid_sizes: vec![2, 4, 8, 16, 32],
            scaling: Scaling::Minmax,
            families: FeatureFamily::ALL.to_vec(),
            relations: RelationPolicy::default(),
        }
    }
}

impl FeatureConfig {
    pub fn enabled(&self, family: FeatureFamily) -> bool {
        self.families.contains(&family)
    }

    pub fn ngram_len(&self) -> usize {
        self.ngram_orders.len() * self.ngram_buckets_per_order
    }

    pub fn grid_len(&self) -> usize {
        grid_len(&self.grid_sizes)
    }

    /// Total flattened dimension.
    pub fn dim(&self) -> usize {
        DENSE_LEN + self.ngram_len() + self.grid_len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_buckets_per_order == 0 {
            return Err(Error::InvalidArgument(
                "ngram buckets must be positive".into(),
            ));
        }
        if self.ngram_orders.contains(&0) || self.grid_sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "n-gram orders and grid sizes must be positive".into(),
            ));
        }
        if self.dim() > u32::MAX as usize {
            return Err(Error::InvalidArgument("feature layout too large".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dense: Vec<f64>,
    /// Local indices in `[0, orders × buckets)`.
    pub ngrams: SparseVector,
    /// Local indices in `[0, Σ s²)`.
    pub grid: SparseVector,
}

impl FeatureVector {
    pub fn zeros() -> Self {
        FeatureVector {
            dense: vec![0.0; DENSE_LEN],
            ngrams: SparseVector::new(),
            grid: SparseVector::new(),
        }
    }

    /// Elementwise sum over all three blocks.
    pub fn add(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector {
            dense: self
                .dense
                .iter()
                .zip(&other.dense)
                .map(|(a, b)| a + b)
                .collect(),
            ngrams: self.ngrams.add(&other.ngrams),
            grid: self.grid.add(&other.grid),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dense.iter().all(|x| x.is_finite())
            && self.ngrams.values().all(f64::is_finite)
            && self.grid.values().all(f64::is_finite)
    }

    /// Flattens to the global layout `dense | ngrams | grid`.
    pub fn to_sparse(&self, config: &FeatureConfig) -> SparseVector {
        let ngram_off = DENSE_LEN as u32;
        let grid_off = (DENSE_LEN + config.ngram_len()) as u32;
        let mut pairs: Vec<(u32, f64)> = self
            .dense
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32, v))
            .collect();
        pairs.extend(self.ngrams.shifted(ngram_off));
        pairs.extend(self.grid.shifted(grid_off));
        SparseVector::from_pairs(pairs)
    }
}

/// PCA map of grid embeddings plus the extent of the training projections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub pca: PcaModel,
    pub bounds: GridBounds,
}

impl GridMap {
    /// Fits on the grid embeddings of every distinct target-constituent word
    /// of the training split.
    pub fn fit(train: &Dataset, resources: &Resources) -> Result<Self> {
        let vocab: BTreeSet<String> = train
            .instances
            .iter()
            .flat_map(|inst| target_words(&inst.target))
            .collect();
        let rows: Vec<&[f64]> = vocab
            .iter()
            .filter_map(|w| resources.grid.embed(w))
            .collect();
        if rows.len() < 2 {
            return Err(Error::DegenerateData(format!(
                "grid features need at least 2 training words with grid embeddings, found {}",
                rows.len()
            )));
        }
        let pca = pca_fit(&rows)?;
        let points = rows
            .iter()
            .map(|r| pca.project(r))
            .collect::<Result<Vec<_>>>()?;
        let bounds = GridBounds::fit(&points)?;
        Ok(GridMap { pca, bounds })
    }
}

/// Constituent words of a target; a target with no word tokens is used whole.
pub fn target_words(target: &str) -> Vec<String> {
    let words: Vec<String> = tokenize(target).into_iter().map(|t| t.text).collect();
    if words.is_empty() {
        vec![target.to_lowercase()]
    } else {
        words
    }
}

/// Sentence tokens that do not overlap the target span.
pub fn context_tokens(inst: &Instance) -> Vec<String> {
    tokenize(&inst.sentence)
        .into_iter()
        .filter(|t| t.end <= inst.target_start || t.start >= inst.target_end)
        .map(|t| t.text)
        .collect()
}

pub struct Featurizer<'r> {
    resources: &'r Resources,
    config: FeatureConfig,
    grid: Option<GridMap>,
    senses: SenseCache,
}

impl<'r> Featurizer<'r> {
    /// Prepares a featurizer, fitting the grid map on `train` when the grid
    /// family is enabled.
    pub fn fit(resources: &'r Resources, config: FeatureConfig, train: &Dataset) -> Result<Self> {
        config.validate()?;
        let grid = if config.enabled(FeatureFamily::Grid) {
            Some(GridMap::fit(train, resources)?)
        } else {
            None
        };
        Ok(Self::with_grid(resources, config, grid))
    }

    pub fn with_grid(
        resources: &'r Resources,
        config: FeatureConfig,
        grid: Option<GridMap>,
    ) -> Self {
        Featurizer {
            resources,
            config,
            grid,
            senses: SenseCache::new(),
        }
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn grid_map(&self) -> Option<&GridMap> {
        self.grid.as_ref()
    }

    /// Features of one word given its context words.
    pub fn word_vector(&self, word: &str, context: &[&str]) -> FeatureVector {
        let cfg = &self.config;
        let res = self.resources;
        let mut v = FeatureVector::zeros();
        if cfg.enabled(FeatureFamily::Char) {
            v.dense[CHAR_SLOT..CHAR_SLOT + 6].copy_from_slice(&char_stats(word).to_array());
        }
        if cfg.enabled(FeatureFamily::Wordnet) {
            let (count, pos) = wordnet_features(&res.wordnet, word);
            v.dense[SENSE_COUNT_SLOT] = count as f64;
            v.dense[POS_SLOT + pos] = 1.0;
        }
        if cfg.enabled(FeatureFamily::Context) {
            let (lo, hi, mean) = context_word_stats(word, context, &res.context);
            v.dense[WORD_SIM_SLOT..WORD_SIM_SLOT + 3].copy_from_slice(&[lo, hi, mean]);
        }
        if cfg.enabled(FeatureFamily::Sense) {
            let (lo, hi, mean) = context_sense_stats(
                word,
                context,
                &res.wordnet,
                &res.context,
                &cfg.relations,
                &self.senses,
            );
            v.dense[SENSE_SIM_SLOT..SENSE_SIM_SLOT + 3].copy_from_slice(&[lo, hi, mean]);
        }
        if cfg.enabled(FeatureFamily::Ngram) {
            v.ngrams = char_ngrams(
                word,
                &cfg.ngram_orders,
                cfg.ngram_buckets_per_order,
                cfg.ngram_boundary_markers,
            );
        }
        if let (true, Some(map)) = (cfg.enabled(FeatureFamily::Grid), &self.grid) {
            v.grid = grid_onehot(word, &map.pca, &res.grid, &map.bounds, &cfg.grid_sizes);
        }
        v
    }

    pub fn featurize(&self, inst: &Instance) -> FeatureVector {
        let context = context_tokens(inst);
        let context: Vec<&str> = context.iter().map(String::as_str).collect();
        let words = target_words(&inst.target);
        let mut iter = words.iter().map(|w| self.word_vector(w, &context));
        let first = iter.next().unwrap_or_else(FeatureVector::zeros);
        iter.fold(first, |acc, v| acc.add(&v))
    }

    /// Featurizes a batch, preserving instance order.
    pub fn featurize_all(&self, instances: &[Instance]) -> Vec<FeatureVector> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            instances.par_iter().map(|i| self.featurize(i)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            instances.iter().map(|i| self.featurize(i)).collect()
        }
    }
}
