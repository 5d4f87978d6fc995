//! Decode one corpus at several loss orders and compare pooled WER against
//! the order-2 baseline. The posteriors are shared across orders so the
//! transform is the only thing that varies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataio::synth::{generate_corpus, load_corpus, Corpus, GeneratorInfo, NoiseSpec};
use crate::dataio::{load_hmm, load_priors, read_file};
use crate::decoder::HmmModel;
use crate::error::{Error, Result};
use crate::mink::LossOrder;
use crate::pipeline::{decode_posteriors, DecodeOptions};
use crate::scoring::{corpus_wer, relative_reduction, WerReport};

fn default_orders() -> Vec<u32> {
    vec![2, 4, 6]
}

fn default_true() -> bool {
    true
}

/// Experiment document. Either `corpus` names a manifest to load, or
/// `utterances`, `frames_min`, `frames_max` and `noise` describe a corpus to
/// generate. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hmm: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    #[serde(default = "default_true")]
    pub renormalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_file(path)?).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    fn validated_orders(&self) -> Result<Vec<LossOrder>> {
        let orders = self
            .orders
            .iter()
            .map(|&o| LossOrder::new(o))
            .collect::<Result<Vec<_>>>()?;
        if !orders.contains(&LossOrder::SQUARED) {
            return Err(Error::InvalidConfig("orders must include the order-2 baseline"));
        }
        Ok(orders)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderResult {
    pub order: u32,
    #[serde(flatten)]
    pub wer: WerReport,
    /// `None` for the order-2 baseline itself.
    pub relative_reduction: Option<f64>,
    /// Wall-clock time; excluded from the serialized report so reports stay
    /// byte-reproducible.
    #[serde(skip)]
    pub decode_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
    pub num_utterances: usize,
    pub results: Vec<OrderResult>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn required<T>(value: Option<T>, what: &'static str) -> Result<T> {
    value.ok_or(Error::InvalidConfig(what))
}

/// Loads or generates the corpus a config describes.
pub fn prepare_corpus(config: &ExperimentConfig, hmm: &HmmModel, base_dir: &Path) -> Result<Corpus> {
    match &config.corpus {
        Some(manifest) => load_corpus(&resolve(base_dir, manifest)),
        None => {
            let n = required(config.utterances, "utterances is required without a corpus manifest")?;
            let lo = required(config.frames_min, "frames_min is required without a corpus manifest")?;
            let hi = required(config.frames_max, "frames_max is required without a corpus manifest")?;
            let noise = required(config.noise, "noise is required without a corpus manifest")?;
            generate_corpus(hmm, n, lo..=hi, &noise)
        }
    }
}

/// Runs a config; `base_dir` anchors its relative paths.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentReport> {
    let orders = config.validated_orders()?;
    let hmm = load_hmm(&resolve(base_dir, &config.hmm))?;
    let priors = config
        .priors
        .as_ref()
        .map(|p| load_priors(&resolve(base_dir, p)))
        .transpose()?;
    let corpus = prepare_corpus(config, &hmm, base_dir)?;
    run_on_corpus(config.clone(), &orders, &hmm, priors, &corpus)
}

pub fn run_on_corpus(
    config: ExperimentConfig,
    orders: &[LossOrder],
    hmm: &HmmModel,
    priors: Option<Vec<f64>>,
    corpus: &Corpus,
) -> Result<ExperimentReport> {
    if corpus.utterances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut results = Vec::with_capacity(orders.len());
    for &order in orders {
        let options = DecodeOptions {
            order,
            renormalize: config.renormalize,
            priors: priors.clone(),
        };
        let start = Instant::now();
        let hypotheses = corpus
            .utterances
            .iter()
            .map(|u| decode_posteriors(&u.posteriors, hmm, &options).map(|d| d.token_sequence))
            .collect::<Result<Vec<_>>>()?;
        let decode_time = start.elapsed();
        let wer = corpus_wer(
            corpus
                .utterances
                .iter()
                .zip(&hypotheses)
                .map(|(u, h)| (&u.reference[..], &h[..])),
        )?;
        results.push(OrderResult {
            order: order.value(),
            wer,
            relative_reduction: None,
            decode_time,
        });
    }

    if let Some(baseline) = results.iter().find(|r| r.order == 2).map(|r| r.wer.wer) {
        for r in results.iter_mut().filter(|r| r.order != 2) {
            r.relative_reduction = Some(relative_reduction(baseline, r.wer.wer));
        }
    }

    Ok(ExperimentReport {
        config,
        generator: corpus.generator,
        num_utterances: corpus.utterances.len(),
        results,
    })
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "utterances: {}", self.num_utterances).unwrap();
        if let Some(g) = &self.generator {
            writeln!(
                out,
                "synthetic: seed={} concentration={} confusion_rate={} frames={}..={}",
                g.noise.seed, g.noise.concentration, g.noise.confusion_rate, g.frames_min, g.frames_max
            )
            .unwrap();
        }
        writeln!(
            out,
            "{:>5} {:>10} {:>6} {:>6} {:>6} {:>8} {:>14}",
            "order", "WER(%)", "sub", "del", "ins", "ref", "rel.reduction"
        )
        .unwrap();
        for r in &self.results {
            let rel = match r.relative_reduction {
                Some(v) => format!("{:.2}%", 100.0 * v),
                None => "-".into(),
            };
            writeln!(
                out,
                "{:>5} {:>10.4} {:>6} {:>6} {:>6} {:>8} {:>14}",
                r.order,
                100.0 * r.wer.wer,
                r.wer.substitutions,
                r.wer.deletions,
                r.wer.insertions,
                r.wer.ref_length,
                rel
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"hmm": "h.json"}"#).unwrap();
        assert_eq!(cfg.orders, vec![2, 4, 6]);
        assert!(cfg.renormalize);
        assert_eq!(cfg.validated_orders().unwrap().len(), 3);

        let cfg: ExperimentConfig = serde_json::from_str(r#"{"hmm": "h.json", "orders": [4, 6]}"#).unwrap();
        assert!(cfg.validated_orders().is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"hmm": "h.json", "orders": [2, 3]}"#).unwrap();
        assert!(matches!(cfg.validated_orders(), Err(Error::OddOrder(3))));

        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"hmm": "h", "bogus": 1}"#).is_err());
    }

    #[test]
    fn missing_generation_fields() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"hmm": "h.json"}"#).unwrap();
        let hmm = HmmModel::from_probabilities(
            &[0.5, 0.5],
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            vec!["a".into(), "b".into()],
            vec![0, 1],
        )
        .unwrap();
        assert!(matches!(
            prepare_corpus(&cfg, &hmm, Path::new(".")),
            Err(Error::InvalidConfig(_))
        ));
    }
}
