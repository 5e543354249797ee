//! Character-level features and tokenization.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::sparse::SparseVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// Lowercased, punctuation-stripped text.
    pub text: String,
    /// Byte span of the stripped token in the source text.
    pub start: usize,
    pub end: usize,
}

/// Whitespace split, strip leading/trailing non-alphanumerics, lowercase.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for piece in text.split_whitespace() {
        let offset = piece.as_ptr() as usize - text.as_ptr() as usize;
        let trimmed_start = piece.trim_start_matches(|c: char| !c.is_alphanumeric());
        let lead = piece.len() - trimmed_start.len();
        let trimmed = trimmed_start.trim_end_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            continue;
        }
        out.push(Token {
            text: trimmed.to_lowercase(),
            start: offset + lead,
            end: offset + lead + trimmed.len(),
        });
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CharStats {
    pub char_count: f64,
    pub vowel_count: f64,
    pub consonant_count: f64,
    pub vowel_pct: f64,
    pub consonant_pct: f64,
    pub repeat_runs: f64,
}

impl CharStats {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.char_count,
            self.vowel_count,
            self.consonant_count,
            self.vowel_pct,
            self.consonant_pct,
            self.repeat_runs,
        ]
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Letter counts, vowel/consonant shares and the number of maximal runs of
/// a repeated character (the "nn" in "innovation").
pub fn char_stats(word: &str) -> CharStats {
    let lower: Vec<char> = word.to_lowercase().chars().collect();
    let letters = lower.iter().filter(|c| c.is_alphabetic()).count();
    let vowels = lower.iter().filter(|c| is_vowel(**c)).count();
    let consonants = letters - vowels;

    let mut runs = 0;
    let mut i = 0;
    while i < lower.len() {
        let mut j = i + 1;
        while j < lower.len() && lower[j] == lower[i] {
            j += 1;
        }
        if j - i >= 2 {
            runs += 1;
        }
        i = j;
    }

    let (vowel_pct, consonant_pct) = if letters > 0 {
        (
            vowels as f64 / letters as f64,
            consonants as f64 / letters as f64,
        )
    } else {
        (0.0, 0.0)
    };
    CharStats {
        char_count: letters as f64,
        vowel_count: vowels as f64,
        consonant_count: consonants as f64,
        vowel_pct,
        consonant_pct,
        repeat_runs: runs as f64,
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// The character n-grams of the lowercased word, optionally padded with `^`/`$`.
pub fn ngrams(word: &str, order: usize, pad: bool) -> Vec<String> {
    if word.is_empty() || order == 0 {
        return Vec::new();
    }
    let mut chars: Vec<char> = Vec::new();
    if pad {
        chars.push('^');
    }
    chars.extend(word.to_lowercase().chars());
    if pad {
        chars.push('$');
    }
    chars.windows(order).map(|w| w.iter().collect()).collect()
}

/// Hashed n-gram counts. Order `orders[k]` owns the bucket range
/// `k*buckets .. (k+1)*buckets`.
pub fn char_ngrams(word: &str, orders: &[usize], buckets: usize, pad: bool) -> SparseVector {
    let mut pairs = Vec::new();
    for (slot, &n) in orders.iter().enumerate() {
        for g in ngrams(word, n, pad) {
            let bucket = (fnv1a(g.as_bytes()) % buckets as u64) as usize;
            pairs.push(((slot * buckets + bucket) as u32, 1.0));
        }
    }
    SparseVector::from_pairs(pairs)
}
