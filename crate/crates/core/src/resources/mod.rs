//! Immutable lexical resources: WordNet and word embeddings.

mod embeddings;
mod wordnet;

use std::path::Path;

pub use embeddings::{load_embeddings, load_embeddings_file, EmbeddingTable};
pub use wordnet::{load_wordnet, Pos, Relation, RelationPolicy, Synset, SynsetId, WordNetDb};

#[cfg(test)]
pub(crate) use wordnet::tests::write_fixture as write_wordnet_fixture;

use crate::error::Result;

/// The resources used by feature extraction. `context` backs similarity and
/// sense features, `grid` backs the PCA grid; they may be the same table.
#[derive(Clone, Debug)]
pub struct Resources {
    pub wordnet: WordNetDb,
    pub context: std::sync::Arc<EmbeddingTable>,
    pub grid: std::sync::Arc<EmbeddingTable>,
}

impl Resources {
    pub fn load(wordnet_dir: &Path, context_emb: &Path, grid_emb: &Path) -> Result<Self> {
        let wordnet = load_wordnet(wordnet_dir)?;
        let context = std::sync::Arc::new(load_embeddings_file(context_emb)?);
        let grid = if grid_emb == context_emb {
            context.clone()
        } else {
            std::sync::Arc::new(load_embeddings_file(grid_emb)?)
        };
        Ok(Resources {
            wordnet,
            context,
            grid,
        })
    }
}
