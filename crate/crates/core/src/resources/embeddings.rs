//! Plain-text word vectors (GloVe / word2vec text format).

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs; first occurrence wins.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, (word, v)) in pairs.into_iter().enumerate() {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d || d == 0 {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {d} components, found {}", v.len()),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::parse(i + 1, "non-finite component"));
            }
            vectors.entry(word.into()).or_insert(v);
        }
        Ok(EmbeddingTable {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact lookup of the lowercased word.
    pub fn embed(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }
}

/// Reads `word v1 ... vd` lines. A leading `count dim` header is accepted.
pub fn load_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut dim: Option<usize> = None;
    let mut vectors = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split(' ').filter(|t| !t.is_empty());
        let Some(word) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();

        if lineno == 1 && rest.len() == 1 {
            if let (Ok(_), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if d == 0 {
                    return Err(Error::parse(lineno, "header declares dimension 0"));
                }
                dim = Some(d);
                continue;
            }
        }

        let v = rest
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad component {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(lineno, "non-finite component"));
        }
        let d = *dim.get_or_insert(v.len());
        if v.len() != d || d == 0 {
            return Err(Error::parse(
                lineno,
                format!("expected {d} components, found {}", v.len()),
            ));
        }
        vectors.entry(word.to_string()).or_insert(v);
    }
    Ok(EmbeddingTable {
        dim: dim.unwrap_or(0),
        vectors,
    })
}

pub fn load_embeddings_file(path: &Path) -> Result<EmbeddingTable> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Resource(format!("{}: {e}", path.display())))?;
    load_embeddings(std::io::BufReader::new(file))
}
