//! WordNet and embedding-space features of a word in its sentence.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::features::stopwords::is_stopword;
use crate::numeric::{componentwise_median, cosine};
use crate::resources::{EmbeddingTable, Pos, RelationPolicy, Synset, SynsetId, WordNetDb};

/// Index into the five-way POS one-hot: noun, verb, adj, adv, other.
pub const POS_OTHER: usize = 4;

/// Sense count and the POS slot with the most synsets (ties: noun > verb >
/// adj > adv; no synsets: other).
pub fn wordnet_features(db: &WordNetDb, word: &str) -> (usize, usize) {
    let count = db.sense_count(word);
    let mut best = POS_OTHER;
    let mut best_n = 0;
    for pos in Pos::ALL {
        let n = db.synsets_for(word, pos).len();
        if n > best_n {
            best = pos.index();
            best_n = n;
        }
    }
    (count, best)
}

/// `(min, max, mean)` of a list of similarities; zeros when empty.
pub fn min_max_mean(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    (lo, hi, sum / values.len() as f64)
}

/// Cosine statistics between `target` and each in-vocabulary context word.
pub fn context_word_stats(
    target: &str,
    context: &[&str],
    table: &EmbeddingTable,
) -> (f64, f64, f64) {
    let Some(t) = table.embed(target) else {
        return (0.0, 0.0, 0.0);
    };
    let sims: Vec<f64> = context
        .iter()
        .filter_map(|w| table.embed(w))
        .map(|v| cosine(t, v).unwrap_or(0.0))
        .collect();
    min_max_mean(&sims)
}

fn gloss_words(gloss: &str) -> impl Iterator<Item = String> + '_ {
    gloss
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| !is_stopword(w))
}

/// Gloss words of the synset and of its POS-appropriate neighbours.
pub fn sense_bag(db: &WordNetDb, synset: &Synset, policy: &RelationPolicy) -> Vec<String> {
    let mut bag: Vec<String> = gloss_words(&synset.gloss).collect();
    for rel in db.related_synsets(synset, policy) {
        bag.extend(gloss_words(&rel.gloss));
    }
    bag
}

/// Componentwise median of the bag's in-vocabulary word vectors.
pub fn sense_embedding<S: AsRef<str>>(bag: &[S], table: &EmbeddingTable) -> Option<Vec<f64>> {
    let vectors: Vec<&[f64]> = bag.iter().filter_map(|w| table.embed(w.as_ref())).collect();
    componentwise_median(&vectors).ok()
}

/// Memoized sense embeddings, shared across featurization workers.
#[derive(Debug, Default)]
pub struct SenseCache {
    map: RwLock<HashMap<SynsetId, Option<Arc<Vec<f64>>>>>,
}

impl SenseCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &self,
        db: &WordNetDb,
        synset: &Synset,
        table: &EmbeddingTable,
        policy: &RelationPolicy,
    ) -> Option<Arc<Vec<f64>>> {
        if let Some(hit) = self
            .map
            .read()
            .expect("sense cache poisoned")
            .get(&synset.id)
        {
            return hit.clone();
        }
        let emb = sense_embedding(&sense_bag(db, synset, policy), table).map(Arc::new);
        self.map
            .write()
            .expect("sense cache poisoned")
            .entry(synset.id)
            .or_insert(emb)
            .clone()
    }

    /// Sense embeddings for every synset of `word` (missing ones skipped).
    pub fn word_senses(
        &self,
        db: &WordNetDb,
        word: &str,
        table: &EmbeddingTable,
        policy: &RelationPolicy,
    ) -> Vec<Arc<Vec<f64>>> {
        db.senses(word)
            .into_iter()
            .filter_map(|s| self.get(db, s, table, policy))
            .collect()
    }
}

/// Cosine statistics over all (target sense, context-word sense) pairs.
pub fn context_sense_stats(
    target: &str,
    context: &[&str],
    db: &WordNetDb,
    table: &EmbeddingTable,
    policy: &RelationPolicy,
    cache: &SenseCache,
) -> (f64, f64, f64) {
    let target_senses = cache.word_senses(db, target, table, policy);
    if target_senses.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut sims = Vec::new();
    for w in context {
        for cs in cache.word_senses(db, w, table, policy) {
            for ts in &target_senses {
                sims.push(cosine(ts, &cs).unwrap_or(0.0));
            }
        }
    }
    min_max_mean(&sims)
}
