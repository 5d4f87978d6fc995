//! Text file formats: posterior matrices, HMM documents, transcripts and class
//! priors. Synthetic corpus generation lives in [`synth`].

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoder::HmmModel;
use crate::error::{Error, FormatIssue, Result};
use crate::posterior::{PosteriorMatrix, ROW_SUM_TOLERANCE};

pub mod synth;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// scientific notation outside `1e-4 <= |x| < 1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }

    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let mut out = String::with_capacity(24);
    if negative {
        out.push('-');
    }
    if (-4..17).contains(&exp) {
        if exp < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(digits.trim_end_matches('0'));
        } else {
            let split = exp as usize + 1;
            out.push_str(&digits[..split]);
            let frac = digits[split..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push(if exp < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exp.abs()));
    }
    out
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn format_error(path: &Path, line: usize, issue: FormatIssue) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        issue,
    }
}

/// Serializes a posterior matrix: a `frames classes` header, then one
/// space-separated row per line.
pub fn posteriors_to_string(matrix: &PosteriorMatrix) -> String {
    let mut out = format!("{} {}\n", matrix.frames(), matrix.classes());
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the posterior text format; `path` only labels errors.
pub fn parse_posteriors(text: &str, path: &Path) -> Result<PosteriorMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (frames, classes) = match lines.next() {
        None => return Err(format_error(path, 1, FormatIssue::MalformedHeader(String::new()))),
        Some((_, header)) => {
            let fields: Vec<&str> = header.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [f, c] => f.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((f, c)) if f >= 1 && c >= 2 => (f, c),
                _ => return Err(format_error(path, 1, FormatIssue::MalformedHeader(header.to_string()))),
            }
        }
    };

    let mut values = Vec::with_capacity(frames * classes);
    let mut rows = 0;
    let mut last_line = 1;
    for (number, line) in lines {
        last_line = number;
        if rows == frames {
            if line.trim().is_empty() {
                continue;
            }
            return Err(format_error(path, number, FormatIssue::TrailingData));
        }
        let tokens: Vec<&str> = line.split(' ').filter(|t| !t.is_empty()).collect();
        if tokens.len() != classes {
            return Err(format_error(
                path,
                number,
                FormatIssue::RowLength {
                    expected: classes,
                    found: tokens.len(),
                },
            ));
        }
        let mut sum = 0.0;
        for token in tokens {
            let v: f64 = token
                .parse()
                .map_err(|_| format_error(path, number, FormatIssue::NonNumeric(token.to_string())))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(format_error(path, number, FormatIssue::OutOfRange(v)));
            }
            sum += v;
            values.push(v);
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(format_error(path, number, FormatIssue::RowSum(sum)));
        }
        rows += 1;
    }
    if rows < frames {
        return Err(format_error(
            path,
            last_line + 1,
            FormatIssue::MissingRows {
                expected: frames,
                found: rows,
            },
        ));
    }
    PosteriorMatrix::new(frames, classes, values)
}

pub fn load_posteriors(path: &Path) -> Result<PosteriorMatrix> {
    parse_posteriors(&read_text(path)?, path)
}

pub fn save_posteriors(matrix: &PosteriorMatrix, path: &Path) -> Result<()> {
    write_text(path, &posteriors_to_string(matrix))
}

/// On-disk HMM: linear probabilities, converted to logs on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmDocument {
    pub num_states: usize,
    pub initial: Vec<f64>,
    pub transitions: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub state_to_class: Vec<usize>,
}

impl HmmDocument {
    pub fn into_model(self) -> Result<HmmModel> {
        if self.initial.len() != self.num_states {
            return Err(Error::InvalidHmm(format!(
                "num_states is {} but initial has {} entries",
                self.num_states,
                self.initial.len()
            )));
        }
        HmmModel::from_probabilities(&self.initial, &self.transitions, self.labels, self.state_to_class)
    }

    pub fn from_model(hmm: &HmmModel) -> Self {
        HmmDocument {
            num_states: hmm.num_states(),
            initial: hmm.initial_probabilities(),
            transitions: hmm.transition_probabilities(),
            labels: hmm.state_labels().to_vec(),
            state_to_class: hmm.state_to_class().to_vec(),
        }
    }
}

pub fn parse_hmm(text: &str, path: &Path) -> Result<HmmModel> {
    let doc: HmmDocument = serde_json::from_str(text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    doc.into_model()
}

pub fn hmm_to_string(hmm: &HmmModel) -> String {
    let mut s = serde_json::to_string_pretty(&HmmDocument::from_model(hmm)).expect("HMM serializes");
    s.push('\n');
    s
}

pub fn load_hmm(path: &Path) -> Result<HmmModel> {
    parse_hmm(&read_text(path)?, path)
}

pub fn save_hmm(hmm: &HmmModel, path: &Path) -> Result<()> {
    write_text(path, &hmm_to_string(hmm))
}

/// One token per line; blank lines are skipped.
pub fn parse_transcript(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn transcript_to_string<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(t.as_ref());
        out.push('\n');
    }
    out
}

pub fn load_transcript(path: &Path) -> Result<Vec<String>> {
    Ok(parse_transcript(&read_text(path)?))
}

pub fn save_transcript<S: AsRef<str>>(tokens: &[S], path: &Path) -> Result<()> {
    write_text(path, &transcript_to_string(tokens))
}

/// Class priors: whitespace-separated decimals.
pub fn load_priors(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let mut priors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for token in line.split_whitespace() {
            let v = token
                .parse()
                .map_err(|_| format_error(path, i + 1, FormatIssue::NonNumeric(token.to_string())))?;
            priors.push(v);
        }
    }
    Ok(priors)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    read_text(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1.5e-4), "0.00014999999999999999");
        assert_eq!(fmt_g17(-1e30), "-1e+30");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn loads_simple_matrix() {
        let m = parse_posteriors("1 2\n0.5 0.5\n", p()).unwrap();
        assert_eq!((m.frames(), m.classes()), (1, 2));
        assert_eq!(m.values(), &[0.5, 0.5]);
    }

    fn issue(text: &str) -> (usize, FormatIssue) {
        match parse_posteriors(text, p()) {
            Err(Error::Format { line, issue, .. }) => (line, issue),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn distinct_format_errors() {
        let (line, i) = issue("1 2\n0.7 0.2\n");
        assert_eq!(line, 2);
        assert!(matches!(i, FormatIssue::RowSum(s) if (s - 0.9).abs() < 1e-12));

        assert!(matches!(issue("x 2\n0.5 0.5\n"), (1, FormatIssue::MalformedHeader(_))));
        assert!(matches!(issue("1\n"), (1, FormatIssue::MalformedHeader(_))));
        assert!(matches!(issue(""), (1, FormatIssue::MalformedHeader(_))));
        assert!(matches!(
            issue("1 2\n0.5\n"),
            (2, FormatIssue::RowLength { expected: 2, found: 1 })
        ));
        assert!(matches!(
            issue("2 2\n0.5 0.5\n0.5 abc\n"),
            (3, FormatIssue::NonNumeric(_))
        ));
        assert!(matches!(issue("1 2\n1.5 -0.5\n"), (2, FormatIssue::OutOfRange(_))));
        assert!(matches!(
            issue("2 2\n0.5 0.5\n"),
            (3, FormatIssue::MissingRows { expected: 2, found: 1 })
        ));
        assert!(matches!(
            issue("1 2\n0.5 0.5\n0.5 0.5\n"),
            (3, FormatIssue::TrailingData)
        ));
    }

    #[test]
    fn error_message_names_file_and_line() {
        let err = parse_posteriors("1 2\n0.7 0.2\n", Path::new("post.txt")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("post.txt: line 2:"), "{msg}");
    }

    #[test]
    fn uniform_hmm_document() {
        let doc = r#"{"num_states": 2, "initial": [0.5, 0.5],
            "transitions": [[0.5, 0.5], [0.5, 0.5]],
            "labels": ["a", "b"], "state_to_class": [0, 1]}"#;
        let hmm = parse_hmm(doc, p()).unwrap();
        for from in 0..2 {
            for to in 0..2 {
                assert_eq!(hmm.log_transition(from, to), 0.5f64.ln());
            }
        }
    }

    #[test]
    fn hmm_document_errors() {
        let bad_row = r#"{"num_states": 2, "initial": [0.5, 0.5],
            "transitions": [[0.5, 0.5], [0.5, 0.3]],
            "labels": ["a", "b"], "state_to_class": [0, 1]}"#;
        let msg = parse_hmm(bad_row, p()).unwrap_err().to_string();
        assert!(msg.contains("transition row 1"), "{msg}");

        let unknown = r#"{"num_states": 1, "initial": [1.0], "transitions": [[1.0]],
            "labels": ["a"], "state_to_class": [0], "extra": 1}"#;
        assert!(matches!(parse_hmm(unknown, p()), Err(Error::Json { .. })));

        let mismatch = r#"{"num_states": 3, "initial": [1.0], "transitions": [[1.0]],
            "labels": ["a"], "state_to_class": [0]}"#;
        assert!(matches!(parse_hmm(mismatch, p()), Err(Error::InvalidHmm(_))));
    }

    #[test]
    fn transcript_format() {
        assert_eq!(parse_transcript("a\nb\n\n c \n"), vec!["a", "b", "c"]);
        assert_eq!(transcript_to_string(&["x", "y"]), "x\ny\n");
    }

    fn stochastic_row(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n).prop_map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
    }

    proptest! {
        #[test]
        fn posterior_round_trip(rows in prop::collection::vec(stochastic_row(10), 50)) {
            let m = PosteriorMatrix::from_rows(&rows).unwrap();
            let back = parse_posteriors(&posteriors_to_string(&m), p()).unwrap();
            for (a, b) in m.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
        }

        #[test]
        fn hmm_round_trip(n in 1usize..5, seed_rows in prop::collection::vec(stochastic_row(4), 5)) {
            let rows: Vec<Vec<f64>> = seed_rows.iter().take(n).map(|r| {
                let s: f64 = r[..n].iter().sum();
                r[..n].iter().map(|v| v / s).collect()
            }).collect();
            let labels: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
            let hmm = HmmModel::from_probabilities(&rows[0], &rows, labels, (0..n).collect()).unwrap();
            let back = parse_hmm(&hmm_to_string(&hmm), p()).unwrap();
            for (a, b) in hmm.transition_probabilities().iter().flatten()
                .zip(back.transition_probabilities().iter().flatten()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert_eq!(back.state_labels(), hmm.state_labels());
        }
    }
}
