//! Regenerates the synthetic corpus under `tests/data/synthetic`.
//!
//! ```text
//! cargo run -p cwi-core --example make_synthetic [OUT_DIR]
//! ```
//!
//! Output: `train.tsv` (120), `valid.tsv` (40), `test.tsv` (40), a toy
//! WordNet database in `wordnet/` and 12-dimensional `embeddings.txt`.
//! Everything is derived from a fixed seed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIMPLE_NOUNS: &[&str] = &[
    "cat", "dog", "house", "tree", "car", "book", "road", "water", "food", "door", "city", "child",
];
const COMPLEX_NOUNS: &[&str] = &[
    "juxtaposition",
    "conundrum",
    "sycophant",
    "paradigm",
    "ephemera",
    "quagmire",
    "dichotomy",
    "panacea",
];
const SIMPLE_VERBS: &[&str] = &["see", "take", "find", "give", "make", "keep"];
const COMPLEX_VERBS: &[&str] = &[
    "ameliorate",
    "obfuscate",
    "exacerbate",
    "promulgate",
    "extrapolate",
];
const SIMPLE_ADJS: &[&str] = &["big", "small", "good", "new", "old", "red", "hot"];
const COMPLEX_ADJS: &[&str] = &[
    "perspicacious",
    "recalcitrant",
    "ineffable",
    "pernicious",
    "ubiquitous",
];
const GLOSS_WORDS: &[&str] = &[
    "thing", "part", "kind", "place", "person", "animal", "move", "large", "little", "state",
    "made", "act", "quality", "form", "idea", "group",
];
const DIM: usize = 12;

#[derive(Clone, Copy, PartialEq)]
enum P {
    Noun,
    Verb,
    Adj,
}

impl P {
    fn code(self) -> &'static str {
        match self {
            P::Noun => "n",
            P::Verb => "v",
            P::Adj => "a",
        }
    }
    fn suffix(self) -> &'static str {
        match self {
            P::Noun => "noun",
            P::Verb => "verb",
            P::Adj => "adj",
        }
    }
}

struct SynsetSpec {
    lemma: String,
    gloss: String,
    /// (symbol, index of the target synset in the same POS list)
    pointers: Vec<(&'static str, usize)>,
}

const LICENSE: &str = "  1 Toy lexical database for tests; not WordNet content\n";

/// Renders a data file with real byte offsets; returns text and offsets.
fn render_data(p: P, specs: &[SynsetSpec]) -> (String, Vec<usize>) {
    let line = |offsets: &[usize], s: &SynsetSpec, own: usize| -> String {
        let mut l = format!(
            "{own:08} 03 {} 01 {} 0 {:03}",
            p.code(),
            s.lemma,
            s.pointers.len()
        );
        for &(sym, target) in &s.pointers {
            let _ = write!(l, " {sym} {:08} {} 0000", offsets[target], p.code());
        }
        let _ = writeln!(l, " | {}", s.gloss);
        l
    };
    // all fields are fixed width, so one pass with zero offsets gives lengths
    let zeros = vec![0; specs.len()];
    let mut offsets = Vec::with_capacity(specs.len());
    let mut pos = LICENSE.len();
    for s in specs {
        offsets.push(pos);
        pos += line(&zeros, s, 0).len();
    }
    let mut text = LICENSE.to_string();
    for (i, s) in specs.iter().enumerate() {
        text.push_str(&line(&offsets, s, offsets[i]));
    }
    (text, offsets)
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic"));
    let wn_dir = out.join("wordnet");
    std::fs::create_dir_all(&wn_dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2018);

    // WordNet: simple words get several senses, complex words one.
    let groups = [
        (P::Noun, SIMPLE_NOUNS, COMPLEX_NOUNS),
        (P::Verb, SIMPLE_VERBS, COMPLEX_VERBS),
        (P::Adj, SIMPLE_ADJS, COMPLEX_ADJS),
    ];
    let relation_symbols: [&[&str]; 3] = [&["@", "%p"], &["*", "^"], &["&", "!"]];
    for (gi, (p, simple, complex)) in groups.iter().enumerate() {
        let mut specs = Vec::new();
        let mut senses: Vec<(String, Vec<usize>)> = Vec::new();
        for (words, lo, hi) in [(*simple, 2, 5), (*complex, 1, 1)] {
            for w in words {
                let k = rng.random_range(lo..=hi);
                let mut ids = Vec::new();
                for _ in 0..k {
                    let n = rng.random_range(3..=6);
                    let gloss: Vec<&str> = (0..n)
                        .map(|_| *GLOSS_WORDS.choose(&mut rng).unwrap())
                        .collect();
                    ids.push(specs.len());
                    specs.push(SynsetSpec {
                        lemma: w.to_string(),
                        gloss: gloss.join(" "),
                        pointers: Vec::new(),
                    });
                }
                senses.push((w.to_string(), ids));
            }
        }
        let count = specs.len();
        for (i, spec) in specs.iter_mut().enumerate() {
            if rng.random_bool(0.6) {
                let target = (i + rng.random_range(1..count)) % count;
                let sym = *relation_symbols[gi].choose(&mut rng).unwrap();
                spec.pointers.push((sym, target));
            }
        }
        let (data, offsets) = render_data(*p, &specs);
        std::fs::write(wn_dir.join(format!("data.{}", p.suffix())), data).unwrap();
        let mut index = LICENSE.to_string();
        senses.sort();
        for (lemma, ids) in &senses {
            let _ = write!(
                index,
                "{lemma} {} {} 0 {} 0",
                p.code(),
                ids.len(),
                ids.len()
            );
            for &i in ids {
                let _ = write!(index, " {:08}", offsets[i]);
            }
            index.push('\n');
        }
        std::fs::write(wn_dir.join(format!("index.{}", p.suffix())), index).unwrap();
    }
    std::fs::write(wn_dir.join("data.adv"), LICENSE).unwrap();
    std::fs::write(wn_dir.join("index.adv"), LICENSE).unwrap();

    // Sentences "The ADJ NOUN will VERB the NOUN today." with one target each.
    let pick = |rng: &mut ChaCha8Rng,
                simple: &[&'static str],
                complex: &[&'static str]|
     -> (&'static str, bool) {
        if rng.random_bool(0.4) {
            (*complex.choose(rng).unwrap(), true)
        } else {
            (*simple.choose(rng).unwrap(), false)
        }
    };
    let mut rows = Vec::new();
    let mut vocab: BTreeSet<String> = GLOSS_WORDS.iter().map(|s| s.to_string()).collect();
    for i in 0..200 {
        let adj = pick(&mut rng, SIMPLE_ADJS, COMPLEX_ADJS);
        let noun = pick(&mut rng, SIMPLE_NOUNS, COMPLEX_NOUNS);
        let verb = pick(&mut rng, SIMPLE_VERBS, COMPLEX_VERBS);
        let obj = pick(&mut rng, SIMPLE_NOUNS, COMPLEX_NOUNS);
        let words = ["The", adj.0, noun.0, "will", verb.0, "the", obj.0, "today."];
        for w in words {
            vocab.insert(w.trim_end_matches('.').to_lowercase());
        }
        let sentence = words.join(" ");
        let mut starts = Vec::new();
        let mut p = 0;
        for w in words {
            starts.push(p);
            p += w.len() + 1;
        }
        // slot indices: 1 adj, 2 noun, 4 verb, 6 obj; sometimes "adj noun"
        let choice = rng.random_range(0..10);
        let (start, end, complex) = match choice {
            0 => (starts[1], starts[2] + noun.0.len(), adj.1 || noun.1),
            1 | 2 => (starts[1], starts[1] + adj.0.len(), adj.1),
            3..=5 => (starts[2], starts[2] + noun.0.len(), noun.1),
            6 | 7 => (starts[4], starts[4] + verb.0.len(), verb.1),
            _ => (starts[6], starts[6] + obj.0.len(), obj.1),
        };
        let target = &sentence[start..end];
        let (p_native, p_non) = if complex { (0.3, 0.45) } else { (0.01, 0.03) };
        let k_native = (0..10).filter(|_| rng.random_bool(p_native)).count() as u32;
        let k_non = (0..10).filter(|_| rng.random_bool(p_non)).count() as u32;
        let marks = k_native + k_non;
        rows.push(format!(
            "SYN{i:03}\t{sentence}\t{start}\t{end}\t{target}\t10\t10\t{k_native}\t{k_non}\t{}\t{}\n",
            u8::from(marks > 0),
            f64::from(marks) / 20.0
        ));
    }
    for (name, range) in [
        ("train.tsv", 0..120),
        ("valid.tsv", 120..160),
        ("test.tsv", 160..200),
    ] {
        std::fs::write(out.join(name), rows[range].concat()).unwrap();
    }

    // Embeddings: simple and complex words sit in different regions.
    let simple: BTreeSet<&str> = [SIMPLE_NOUNS, SIMPLE_VERBS, SIMPLE_ADJS]
        .concat()
        .into_iter()
        .collect();
    let complex: BTreeSet<&str> = [COMPLEX_NOUNS, COMPLEX_VERBS, COMPLEX_ADJS]
        .concat()
        .into_iter()
        .collect();
    let mut emb = format!("{} {DIM}\n", vocab.len());
    for w in &vocab {
        let center = if complex.contains(w.as_str()) {
            -0.6
        } else if simple.contains(w.as_str()) {
            0.6
        } else {
            0.0
        };
        let _ = write!(emb, "{w}");
        for d in 0..DIM {
            let base = if d < 3 { center } else { 0.0 };
            let v: f64 = base + rng.random_range(-0.5..0.5);
            let _ = write!(emb, " {v:.5}");
        }
        emb.push('\n');
    }
    std::fs::write(out.join("embeddings.txt"), emb).unwrap();
    println!("wrote synthetic corpus to {}", out.display());
}
