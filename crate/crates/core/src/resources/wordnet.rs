//! Reader for the WordNet 3.0 database files (`index.{pos}` / `data.{pos}`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    fn file_suffix(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    fn from_code(code: &str) -> Option<Pos> {
        match code {
            "n" => Some(Pos::Noun),
            "v" => Some(Pos::Verb),
            "a" | "s" => Some(Pos::Adj),
            "r" => Some(Pos::Adv),
            _ => None,
        }
    }

    fn code(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 'a',
            Pos::Adv => 'r',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A synset is identified by its data file and byte offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SynsetId {
    pub pos: Pos,
    pub offset: u32,
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:08}", self.pos.code(), self.offset)
    }
}

/// Relation kinds kept from the pointer lists. Declaration order is the
/// order in which related synsets are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Hypernym,
    Hyponym,
    Meronym,
    Holonym,
    Entailment,
    SimilarTo,
    Antonym,
    Attribute,
    AlsoSee,
    DerivationallyRelated,
}

impl Relation {
    fn from_symbol(sym: &str) -> Option<Relation> {
        Some(match sym {
            "@" | "@i" => Relation::Hypernym,
            "~" | "~i" => Relation::Hyponym,
            "%m" | "%s" | "%p" => Relation::Meronym,
            "#m" | "#s" | "#p" => Relation::Holonym,
            "*" => Relation::Entailment,
            "&" => Relation::SimilarTo,
            "!" => Relation::Antonym,
            "=" => Relation::Attribute,
            "^" => Relation::AlsoSee,
            "+" => Relation::DerivationallyRelated,
            _ => return None,
        })
    }
}

/// Which relations are followed when building a sense bag, per part of speech.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationPolicy {
    pub noun: Vec<Relation>,
    pub verb: Vec<Relation>,
    pub adj: Vec<Relation>,
    pub adv: Vec<Relation>,
}

impl Default for RelationPolicy {
    fn default() -> Self {
        use Relation::*;
        RelationPolicy {
            noun: vec![Hypernym, Hyponym, Meronym, Holonym],
            verb: vec![Hypernym, Hyponym, Entailment, AlsoSee],
            adj: vec![SimilarTo, Antonym, Attribute, AlsoSee],
            adv: vec![Antonym, DerivationallyRelated],
        }
    }
}

impl RelationPolicy {
    pub fn for_pos(&self, pos: Pos) -> &[Relation] {
        match pos {
            Pos::Noun => &self.noun,
            Pos::Verb => &self.verb,
            Pos::Adj => &self.adj,
            Pos::Adv => &self.adv,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synset {
    pub id: SynsetId,
    pub pos: Pos,
    pub lemmas: Vec<String>,
    /// Definition plus example sentences, as stored after the `|`.
    pub gloss: String,
    pub relations: BTreeMap<Relation, Vec<SynsetId>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordNetDb {
    index: HashMap<String, [Vec<SynsetId>; 4]>,
    synsets: HashMap<SynsetId, Synset>,
}

fn index_key(lemma: &str) -> String {
    lemma.trim().to_lowercase().replace(' ', "_")
}

impl WordNetDb {
    /// Builds a database from in-memory parts, checking every reference.
    pub fn from_parts(
        index: impl IntoIterator<Item = (String, Pos, Vec<SynsetId>)>,
        synsets: impl IntoIterator<Item = Synset>,
    ) -> Result<Self> {
        let mut db = WordNetDb::default();
        for s in synsets {
            db.synsets.insert(s.id, s);
        }
        for (lemma, pos, ids) in index {
            db.index.entry(index_key(&lemma)).or_default()[pos.index()].extend(ids);
        }
        db.validate()?;
        Ok(db)
    }

    fn validate(&self) -> Result<()> {
        for s in self.synsets.values() {
            if s.gloss.trim().is_empty() {
                return Err(Error::Resource(format!(
                    "synset {} has an empty gloss",
                    s.id
                )));
            }
            for targets in s.relations.values() {
                if let Some(t) = targets.iter().find(|t| !self.synsets.contains_key(t)) {
                    return Err(Error::Resource(format!(
                        "dangling pointer from {} to offset {}",
                        s.id, t
                    )));
                }
            }
        }
        for (lemma, per_pos) in &self.index {
            for id in per_pos.iter().flatten() {
                if !self.synsets.contains_key(id) {
                    return Err(Error::Resource(format!(
                        "index entry {lemma:?} references missing offset {id}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn lemma_count(&self) -> usize {
        self.index.len()
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    /// Synset ids of `lemma` for one part of speech, in index (sense) order.
    pub fn synsets_for(&self, lemma: &str, pos: Pos) -> &[SynsetId] {
        self.index
            .get(&index_key(lemma))
            .map(|p| p[pos.index()].as_slice())
            .unwrap_or(&[])
    }

    /// All synsets of `lemma`, nouns first, then verbs, adjectives, adverbs.
    pub fn senses(&self, lemma: &str) -> Vec<&Synset> {
        Pos::ALL
            .iter()
            .flat_map(|&p| self.synsets_for(lemma, p))
            .filter_map(|id| self.synsets.get(id))
            .collect()
    }

    pub fn sense_count(&self, lemma: &str) -> usize {
        self.index
            .get(&index_key(lemma))
            .map(|p| p.iter().map(Vec::len).sum())
            .unwrap_or(0)
    }

    /// One-hop neighbours along the relations the policy allows for the
    /// synset's part of speech, in relation-kind order then id order.
    pub fn related_synsets(&self, synset: &Synset, policy: &RelationPolicy) -> Vec<&Synset> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut kinds = policy.for_pos(synset.pos).to_vec();
        kinds.sort();
        kinds.dedup();
        for kind in kinds {
            let Some(targets) = synset.relations.get(&kind) else {
                continue;
            };
            let mut targets = targets.clone();
            targets.sort();
            for t in targets {
                if seen.insert(t) {
                    if let Some(s) = self.synsets.get(&t) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))
}

fn is_license_line(line: &str) -> bool {
    line.starts_with("  ") || line.trim().is_empty()
}

fn parse_data_line(line: &str, pos: Pos, file: &str, lineno: usize) -> Result<Synset> {
    let bad = |msg: &str| Error::Resource(format!("{file}:{lineno}: {msg}"));
    let (head, gloss) = line.split_once(" | ").map_or_else(
        || (line.strip_suffix(" |").unwrap_or(line), ""),
        |(h, g)| (h, g),
    );
    let mut tok = head.split_ascii_whitespace();
    let mut next = |what: &str| tok.next().ok_or_else(|| bad(&format!("missing {what}")));

    let offset: u32 = next("offset")?.parse().map_err(|_| bad("bad offset"))?;
    next("lex_filenum")?;
    let ss_type = next("ss_type")?;
    if Pos::from_code(ss_type) != Some(pos) {
        return Err(bad(&format!(
            "ss_type {ss_type:?} in {} file",
            pos.file_suffix()
        )));
    }
    let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| bad("bad w_cnt"))?;
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        let word = next("word")?;
        next("lex_id")?;
        // adjective markers such as "(p)" are not part of the lemma
        let word = word.split('(').next().unwrap_or(word);
        lemmas.push(word.to_string());
    }
    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| bad("bad p_cnt"))?;
    let mut relations: BTreeMap<Relation, Vec<SynsetId>> = BTreeMap::new();
    for _ in 0..p_cnt {
        let sym = next("pointer symbol")?;
        let target: u32 = next("pointer offset")?
            .parse()
            .map_err(|_| bad("bad pointer offset"))?;
        let tpos = Pos::from_code(next("pointer pos")?).ok_or_else(|| bad("bad pointer pos"))?;
        next("source/target")?;
        if let Some(rel) = Relation::from_symbol(sym) {
            relations.entry(rel).or_default().push(SynsetId {
                pos: tpos,
                offset: target,
            });
        }
    }
    Ok(Synset {
        id: SynsetId { pos, offset },
        pos,
        lemmas,
        gloss: gloss.trim().to_string(),
        relations,
    })
}

fn parse_index_line(
    line: &str,
    pos: Pos,
    file: &str,
    lineno: usize,
) -> Result<(String, Vec<SynsetId>)> {
    let bad = |msg: &str| Error::Resource(format!("{file}:{lineno}: {msg}"));
    let mut tok = line.split_ascii_whitespace();
    let lemma = tok.next().ok_or_else(|| bad("missing lemma"))?.to_string();
    tok.next().ok_or_else(|| bad("missing pos"))?;
    let synset_cnt: usize = tok
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad synset_cnt"))?;
    let p_cnt: usize = tok
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad p_cnt"))?;
    // pointer symbols, sense_cnt, tagsense_cnt
    for _ in 0..p_cnt + 2 {
        tok.next().ok_or_else(|| bad("truncated entry"))?;
    }
    let ids = tok
        .map(|t| {
            t.parse()
                .map(|offset| SynsetId { pos, offset })
                .map_err(|_| bad("bad synset offset"))
        })
        .collect::<Result<Vec<_>>>()?;
    if ids.len() != synset_cnt {
        return Err(bad(&format!(
            "expected {synset_cnt} offsets, found {}",
            ids.len()
        )));
    }
    Ok((lemma, ids))
}

/// Loads `index.{noun,verb,adj,adv}` and `data.{noun,verb,adj,adv}` from `dir`.
pub fn load_wordnet(dir: &Path) -> Result<WordNetDb> {
    let mut db = WordNetDb::default();
    for pos in Pos::ALL {
        let name = format!("data.{}", pos.file_suffix());
        let text = read_file(&dir.join(&name))?;
        for (i, line) in text.lines().enumerate() {
            if is_license_line(line) {
                continue;
            }
            let s = parse_data_line(line, pos, &name, i + 1)?;
            db.synsets.insert(s.id, s);
        }
    }
    for pos in Pos::ALL {
        let name = format!("index.{}", pos.file_suffix());
        let text = read_file(&dir.join(&name))?;
        for (i, line) in text.lines().enumerate() {
            if is_license_line(line) {
                continue;
            }
            let (lemma, ids) = parse_index_line(line, pos, &name, i + 1)?;
            db.index.entry(index_key(&lemma)).or_default()[pos.index()].extend(ids);
        }
    }
    db.validate()?;
    Ok(db)
}
