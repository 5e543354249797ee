//! Shared-task TSV datasets.
//!
//! One instance per line, tab separated, no header:
//!
//! ```text
//! id  sentence  start  end  target  n_native  n_nonnative  k_native  k_nonnative  binary  prob
//! ```
//!
//! `start`/`end` are **byte** offsets into `sentence` (half-open). Unlabeled
//! files may stop after the `target` column. LF and CRLF endings are accepted.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LABELED_COLUMNS: usize = 11;
const UNLABELED_COLUMNS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Genre {
    News,
    WikiNews,
    Wikipedia,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Regress,
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classify" => Ok(Task::Classify),
            "regress" => Ok(Task::Regress),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

/// Annotator counts and derived labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub n_native: u32,
    pub n_nonnative: u32,
    pub k_native: u32,
    pub k_nonnative: u32,
    pub binary_label: u8,
    pub prob_label: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub sentence: String,
    pub target_start: usize,
    pub target_end: usize,
    pub target: String,
    pub annotation: Option<Annotation>,
}

impl Instance {
    pub fn is_complex(&self) -> Option<bool> {
        self.annotation.as_ref().map(|a| a.binary_label == 1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub genre: Option<Genre>,
    pub split: Option<Split>,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.instances.iter().all(|i| i.annotation.is_some())
    }

    /// Concatenates two datasets (used when refitting on train + validation).
    pub fn concat(&self, other: &Dataset) -> Dataset {
        let mut instances = self.instances.clone();
        instances.extend(other.instances.iter().cloned());
        Dataset {
            genre: self.genre,
            split: self.split,
            instances,
        }
    }
}

/// Guesses genre and split from official file names such as `News_Dev.tsv`.
pub fn infer_meta(file_name: &str) -> (Option<Genre>, Option<Split>) {
    let lower = file_name.to_ascii_lowercase();
    let genre = if lower.contains("wikinews") {
        Some(Genre::WikiNews)
    } else if lower.contains("wikipedia") {
        Some(Genre::Wikipedia)
    } else if lower.contains("news") {
        Some(Genre::News)
    } else {
        None
    };
    let split = if lower.contains("train") {
        Some(Split::Train)
    } else if lower.contains("dev") || lower.contains("valid") {
        Some(Split::Validation)
    } else if lower.contains("test") {
        Some(Split::Test)
    } else {
        None
    };
    (genre, split)
}

fn field<T: FromStr>(value: &str, name: &str, line: usize) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: cannot parse {value:?}")))
}

fn parse_line(line: &str, lineno: usize, has_labels: bool) -> Result<Instance> {
    let cols: Vec<&str> = line.split('\t').collect();
    let labeled = match cols.len() {
        LABELED_COLUMNS => true,
        UNLABELED_COLUMNS if !has_labels => false,
        n => {
            let expected = if has_labels {
                format!("{LABELED_COLUMNS}")
            } else {
                format!("{UNLABELED_COLUMNS} or {LABELED_COLUMNS}")
            };
            return Err(Error::parse(
                lineno,
                format!("expected {expected} columns, found {n}"),
            ));
        }
    };

    let sentence = cols[1];
    let start: usize = field(cols[2], "start", lineno)?;
    let end: usize = field(cols[3], "end", lineno)?;
    let target = cols[4];
    if start >= end || end > sentence.len() {
        return Err(Error::parse(
            lineno,
            format!(
                "offsets {start}..{end} out of range for sentence of {} bytes",
                sentence.len()
            ),
        ));
    }
    match sentence.get(start..end) {
        Some(span) if span == target => {}
        Some(span) => {
            return Err(Error::parse(
                lineno,
                format!("offset mismatch: span {span:?} != target {target:?}"),
            ))
        }
        None => {
            return Err(Error::parse(
                lineno,
                format!("offsets {start}..{end} split a UTF-8 character"),
            ))
        }
    }

    let annotation = if labeled {
        let a = Annotation {
            n_native: field(cols[5], "n_native", lineno)?,
            n_nonnative: field(cols[6], "n_nonnative", lineno)?,
            k_native: field(cols[7], "k_native", lineno)?,
            k_nonnative: field(cols[8], "k_nonnative", lineno)?,
            binary_label: field(cols[9], "binary", lineno)?,
            prob_label: field(cols[10], "prob", lineno)?,
        };
        validate_annotation(&a).map_err(|msg| Error::parse(lineno, msg))?;
        Some(a)
    } else {
        None
    };

    Ok(Instance {
        id: cols[0].to_string(),
        sentence: sentence.to_string(),
        target_start: start,
        target_end: end,
        target: target.to_string(),
        annotation,
    })
}

fn validate_annotation(a: &Annotation) -> std::result::Result<(), String> {
    if a.k_native > a.n_native || a.k_nonnative > a.n_nonnative {
        return Err("complex-mark count exceeds annotator count".into());
    }
    let marks = a.k_native + a.k_nonnative;
    if a.binary_label > 1 || (a.binary_label == 1) != (marks >= 1) {
        return Err(format!(
            "binary label {} inconsistent with {marks} complex marks",
            a.binary_label
        ));
    }
    if !(0.0..=1.0).contains(&a.prob_label) {
        return Err(format!("prob label {} outside [0, 1]", a.prob_label));
    }
    let total = a.n_native + a.n_nonnative;
    if total > 0 {
        // accepts fractions printed to four or more decimals
        let expected = f64::from(marks) / f64::from(total);
        if (expected - a.prob_label).abs() > 1e-4 {
            return Err(format!("prob label {} != {marks}/{total}", a.prob_label));
        }
    }
    Ok(())
}

/// Parses a dataset from a line stream. Empty input yields an empty dataset.
pub fn parse_dataset<R: BufRead>(reader: R, has_labels: bool) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let inst = parse_line(line, lineno, has_labels)?;
        if !seen.insert(inst.id.clone()) {
            return Err(Error::parse(lineno, format!("duplicate id {:?}", inst.id)));
        }
        instances.push(inst);
    }
    Ok(Dataset {
        genre: None,
        split: None,
        instances,
    })
}

pub fn parse_str(text: &str, has_labels: bool) -> Result<Dataset> {
    parse_dataset(text.as_bytes(), has_labels)
}

/// Whether a dataset text carries the six annotation columns, judged from its
/// first non-empty line. Empty text counts as unlabeled.
pub fn detect_labels(text: &str) -> bool {
    text.lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.split('\t').count() >= 11)
}

pub fn load_dataset(path: &std::path::Path, has_labels: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ds = parse_dataset(std::io::BufReader::new(file), has_labels)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    (ds.genre, ds.split) = infer_meta(name);
    Ok(ds)
}

/// Writes the dataset back in the same TSV layout (LF endings).
pub fn serialize(dataset: &Dataset) -> String {
    let mut out = String::new();
    for inst in &dataset.instances {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            inst.id, inst.sentence, inst.target_start, inst.target_end, inst.target
        );
        if let Some(a) = &inst.annotation {
            let _ = write!(
                out,
                "\t{}\t{}\t{}\t{}\t{}\t{}",
                a.n_native, a.n_nonnative, a.k_native, a.k_nonnative, a.binary_label, a.prob_label
            );
        }
        out.push('\n');
    }
    out
}

/// Learning targets: `±1` for classification (complex is `+1`), the
/// complex-annotator fraction for regression.
pub fn targets(dataset: &Dataset, task: Task) -> Result<Vec<f64>> {
    dataset
        .instances
        .iter()
        .map(|inst| {
            let a = inst.annotation.as_ref().ok_or(Error::Unlabeled)?;
            Ok(match task {
                Task::Classify => {
                    if a.binary_label == 1 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Task::Regress => a.prob_label,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIXTURE: &str = "\
3A1\tThe credit crunch hit banks hard.\t4\t17\tcredit crunch\t10\t10\t3\t2\t1\t0.25
3A2\tThe credit crunch hit banks hard.\t22\t27\tbanks\t10\t10\t0\t0\t0\t0
3A3\tThe credit crunch hit banks hard.\t28\t32\thard\t10\t10\t1\t0\t1\t0.05
";

    #[test]
    fn label_detection() {
        assert!(detect_labels(FIXTURE));
        assert!(!detect_labels("a\tb c\t0\t1\tb\n"));
        assert!(!detect_labels("\n\n"));
    }

    #[test]
    fn fixture_round_trips_field_by_field() {
        let ds = parse_str(FIXTURE, true).unwrap();
        assert_eq!(ds.len(), 3);
        let first = &ds.instances[0];
        assert_eq!(first.id, "3A1");
        assert_eq!(first.target, "credit crunch");
        assert!(first.target.contains(' '));
        assert_eq!((first.target_start, first.target_end), (4, 17));
        let a = first.annotation.as_ref().unwrap();
        assert_eq!(
            (
                a.n_native,
                a.n_nonnative,
                a.k_native,
                a.k_nonnative,
                a.binary_label
            ),
            (10, 10, 3, 2, 1)
        );
        assert_eq!(a.prob_label, 0.25);
        assert_eq!(ds.instances[1].target, "banks");
        assert_eq!(
            ds.instances[2].annotation.as_ref().unwrap().prob_label,
            0.05
        );
        assert_eq!(serialize(&ds), FIXTURE);
    }

    #[test]
    fn empty_stream_gives_empty_dataset() {
        let ds = parse_str("", true).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn crlf_accepted() {
        let crlf = FIXTURE.replace('\n', "\r\n");
        assert_eq!(
            parse_str(&crlf, true).unwrap(),
            parse_str(FIXTURE, true).unwrap()
        );
    }

    #[test]
    fn unlabeled_rows_accepted_without_labels() {
        let ds = parse_str("x\tA cat sat.\t2\t5\tcat\n", false).unwrap();
        assert_eq!(ds.instances[0].annotation, None);
        assert!(matches!(
            parse_str("x\tA cat sat.\t2\t5\tcat\n", true),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            targets(&ds, Task::Classify),
            Err(Error::Unlabeled)
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_cols = format!("{FIXTURE}z\tshort\n");
        assert!(matches!(
            parse_str(&bad_cols, true),
            Err(Error::Parse { line: 4, .. })
        ));

        let bad_num = "a\tA cat sat.\t2\t5\tcat\tten\t10\t0\t0\t0\t0\n";
        assert!(matches!(
            parse_str(bad_num, true),
            Err(Error::Parse { line: 1, .. })
        ));

        let mismatch = "a\tA cat sat.\t2\t5\tdog\t10\t10\t0\t0\t0\t0\n";
        let err = parse_str(mismatch, true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("mismatch"));

        let inconsistent = "a\tA cat sat.\t2\t5\tcat\t10\t10\t1\t0\t0\t0.05\n";
        assert!(parse_str(inconsistent, true).is_err());

        let dup = "a\tA cat sat.\t2\t5\tcat\n\na\tA cat sat.\t2\t5\tcat\n";
        assert!(matches!(
            parse_str(dup, false),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn offsets_are_bytes() {
        // "café" occupies 5 bytes
        let line = "u\tUn café noir\t3\t8\tcafé\n";
        let ds = parse_str(line, false).unwrap();
        assert_eq!(ds.instances[0].target, "café");
        assert!(parse_str("u\tUn café noir\t3\t7\tcaf\u{e9}\n", false).is_err());
    }

    #[test]
    fn target_vectors() {
        let ds = parse_str(FIXTURE, true).unwrap();
        assert_eq!(targets(&ds, Task::Classify).unwrap(), vec![1.0, -1.0, 1.0]);
        assert_eq!(targets(&ds, Task::Regress).unwrap(), vec![0.25, 0.0, 0.05]);

        let all = "a\tA cat sat.\t2\t5\tcat\t2\t3\t2\t3\t1\t1\nb\tA cat sat.\t6\t9\tsat\t1\t1\t1\t1\t1\t1.0\n";
        let ds = parse_str(all, true).unwrap();
        assert_eq!(targets(&ds, Task::Classify).unwrap(), vec![1.0, 1.0]);
        assert_eq!(targets(&ds, Task::Regress).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn meta_from_file_names() {
        assert_eq!(
            infer_meta("News_Train.tsv"),
            (Some(Genre::News), Some(Split::Train))
        );
        assert_eq!(
            infer_meta("WikiNews_Dev.tsv"),
            (Some(Genre::WikiNews), Some(Split::Validation))
        );
        assert_eq!(
            infer_meta("Wikipedia_Test.tsv"),
            (Some(Genre::Wikipedia), Some(Split::Test))
        );
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (
            "[a-z]{1,8}",
            "[a-z]{0,6} ",
            "[a-zé]{1,8}",
            " [a-z .]{0,10}",
            (1u32..12, 0u32..12),
            (0u32..12, 0u32..12),
        )
            .prop_map(|(id, pre, target, post, (nn, nnn), (kn, knn))| {
                let kn = kn.min(nn);
                let knn = knn.min(nnn);
                let sentence = format!("{pre}{target}{post}");
                let marks = kn + knn;
                Instance {
                    id,
                    target_start: pre.len(),
                    target_end: pre.len() + target.len(),
                    target,
                    sentence,
                    annotation: Some(Annotation {
                        n_native: nn,
                        n_nonnative: nnn,
                        k_native: kn,
                        k_nonnative: knn,
                        binary_label: u8::from(marks > 0),
                        prob_label: f64::from(marks) / f64::from(nn + nnn),
                    }),
                }
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(mut insts in proptest::collection::vec(arb_instance(), 0..8)) {
            for (i, inst) in insts.iter_mut().enumerate() {
                inst.id = format!("{}{i}", inst.id);
            }
            let ds = Dataset { genre: None, split: None, instances: insts };
            let text = serialize(&ds);
            let parsed = parse_str(&text, true).unwrap();
            prop_assert_eq!(&parsed, &ds);
            prop_assert_eq!(serialize(&parsed), text);
        }
    }
}
