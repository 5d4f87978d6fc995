//! Seeded synthetic corpora: HMM state paths with simulated classifier
//! posteriors, and the manifest format that ties the files together.
//!
//! Each utterance draws from its own ChaCha8 stream seeded with
//! `seed + utterance_index`, so utterances can be generated in any order.
//!
//! Posterior rows are built around a center class, normally the class of the
//! true state. With probability `confusion_rate` the center moves to a
//! uniformly chosen wrong class. The center gets weight 1 and every other
//! class `exp(-concentration * d)` with `d` uniform on `[0.5, 1)`; the row is
//! then normalized. Concentrations of about 1500 or more underflow the
//! off-center weights to exactly zero.

use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{load_posteriors, load_transcript, posteriors_to_string, read_file, transcript_to_string, write_file};
use crate::decoder::HmmModel;
use crate::error::{Error, Result};
use crate::posterior::PosteriorMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub concentration: f64,
    pub confusion_rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.concentration.is_nan() || self.concentration <= 0.0 {
            return Err(Error::InvalidNoise("concentration must be positive"));
        }
        if !(0.0..=1.0).contains(&self.confusion_rate) {
            return Err(Error::InvalidNoise("confusion_rate must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Generation parameters echoed into manifests and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub noise: NoiseSpec,
    pub frames_min: usize,
    pub frames_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub reference: Vec<String>,
    pub posteriors: PosteriorMatrix,
    /// Only known for generated utterances.
    pub state_path: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub utterances: Vec<Utterance>,
    pub generator: Option<GeneratorInfo>,
}

pub fn utterance_id(index: usize) -> String {
    format!("utt{index:04}")
}

fn sample_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn posterior_row(rng: &mut ChaCha8Rng, true_class: usize, classes: usize, noise: &NoiseSpec) -> Vec<f64> {
    let confused = rng.gen::<f64>() < noise.confusion_rate;
    let wrong = rng.gen_range(0..classes - 1);
    let center = if confused {
        if wrong >= true_class {
            wrong + 1
        } else {
            wrong
        }
    } else {
        true_class
    };

    let mut row: Vec<f64> = (0..classes)
        .map(|j| {
            let d = 0.5 + 0.5 * rng.gen::<f64>();
            if j == center {
                1.0
            } else {
                (-noise.concentration * d).exp()
            }
        })
        .collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

/// Generates one utterance from its own seeded stream.
pub fn generate_utterance(
    hmm: &HmmModel,
    index: usize,
    frames: &RangeInclusive<usize>,
    noise: &NoiseSpec,
) -> Result<Utterance> {
    let classes = hmm.num_classes();
    if classes < 2 {
        return Err(Error::InvalidHmm(
            "synthesis needs states mapped to at least 2 classes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed.wrapping_add(index as u64));
    let length = rng.gen_range(frames.clone());

    let initial = hmm.initial_probabilities();
    let transitions = hmm.transition_probabilities();
    let mut state_path = Vec::with_capacity(length);
    let mut state = sample_categorical(&mut rng, &initial);
    state_path.push(state);
    for _ in 1..length {
        state = sample_categorical(&mut rng, &transitions[state]);
        state_path.push(state);
    }

    let mut values = Vec::with_capacity(length * classes);
    for &s in &state_path {
        values.extend(posterior_row(&mut rng, hmm.state_to_class()[s], classes, noise));
    }
    Ok(Utterance {
        id: utterance_id(index),
        reference: hmm.collapse_labels(&state_path),
        posteriors: PosteriorMatrix::new(length, classes, values)?,
        state_path: Some(state_path),
    })
}

pub fn generate_corpus(
    hmm: &HmmModel,
    num_utterances: usize,
    frames: RangeInclusive<usize>,
    noise: &NoiseSpec,
) -> Result<Corpus> {
    noise.validate()?;
    if num_utterances == 0 {
        return Err(Error::EmptyCorpus);
    }
    if *frames.start() == 0 || frames.start() > frames.end() {
        return Err(Error::InvalidCorpus(format!(
            "frame range {}..={} is empty or starts at zero",
            frames.start(),
            frames.end()
        )));
    }
    let utterances = (0..num_utterances)
        .map(|i| generate_utterance(hmm, i, &frames, noise))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus {
        utterances,
        generator: Some(GeneratorInfo {
            noise: *noise,
            frames_min: *frames.start(),
            frames_max: *frames.end(),
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    /// Relative paths resolve against the manifest's directory.
    pub posteriors: PathBuf,
    pub reference: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub utterances: Vec<ManifestEntry>,
    #[serde(default)]
    pub generator: Option<GeneratorInfo>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `<id>.post`, `<id>.ref` and `manifest.json` into `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<CorpusManifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut utterances = Vec::with_capacity(corpus.utterances.len());
    for utt in &corpus.utterances {
        let entry = ManifestEntry {
            id: utt.id.clone(),
            posteriors: PathBuf::from(format!("{}.post", utt.id)),
            reference: PathBuf::from(format!("{}.ref", utt.id)),
        };
        write_file(&dir.join(&entry.posteriors), &posteriors_to_string(&utt.posteriors))?;
        write_file(&dir.join(&entry.reference), &transcript_to_string(&utt.reference))?;
        utterances.push(entry);
    }
    let manifest = CorpusManifest {
        utterances,
        generator: corpus.generator,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&dir.join(MANIFEST_FILE), &text)?;
    Ok(manifest)
}

fn manifest_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

/// Reads a manifest and checks that ids are unique and every file exists.
pub fn load_manifest(path: &Path) -> Result<CorpusManifest> {
    let manifest: CorpusManifest = serde_json::from_str(&read_file(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if manifest.utterances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let base = manifest_dir(path);
    let mut seen = HashSet::new();
    for entry in &manifest.utterances {
        if !seen.insert(entry.id.as_str()) {
            return Err(Error::InvalidCorpus(format!("duplicate utterance id {:?}", entry.id)));
        }
        for file in [&entry.posteriors, &entry.reference] {
            let full = base.join(file);
            if !full.is_file() {
                return Err(Error::InvalidCorpus(format!(
                    "utterance {:?} references missing file {}",
                    entry.id,
                    full.display()
                )));
            }
        }
    }
    Ok(manifest)
}

/// Loads every utterance a manifest lists.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let manifest = load_manifest(path)?;
    let base = manifest_dir(path);
    let mut utterances = Vec::with_capacity(manifest.utterances.len());
    for entry in &manifest.utterances {
        let reference = load_transcript(&base.join(&entry.reference))?;
        if reference.is_empty() {
            return Err(Error::InvalidCorpus(format!(
                "utterance {:?} has an empty reference",
                entry.id
            )));
        }
        utterances.push(Utterance {
            id: entry.id.clone(),
            reference,
            posteriors: load_posteriors(&base.join(&entry.posteriors))?,
            state_path: None,
        });
    }
    Ok(Corpus {
        utterances,
        generator: manifest.generator,
    })
}
