use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use minkloss::curves::correspondence_curves;
use minkloss::dataio::synth::{generate_corpus, load_corpus, NoiseSpec};
use minkloss::dataio::{
    load_hmm, load_posteriors, load_priors, load_transcript, posteriors_to_string, save_transcript,
};
use minkloss::experiment::{run_experiment, ExperimentConfig};
use minkloss::pipeline::{decode_posteriors, DecodeOptions};
use minkloss::posterior::transform_matrix;
use minkloss::scoring::{align_and_score, corpus_wer, WerReport};
use minkloss::{Error, ErrorKind, LossOrder};

const EXIT_VALIDATION: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_SOLVER: u8 = 5;

#[derive(Parser)]
#[command(
    name = "minkloss",
    version,
    about = "Higher-order Minkowski loss posterior transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the order-N transform to a posterior matrix file.
    Transform {
        input: PathBuf,
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value = "on")]
        renormalize: Switch,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate transform(mu) over a uniform grid of mu.
    Curves {
        /// Repeat for several orders.
        #[arg(long = "order", default_values_t = [4u32, 6])]
        orders: Vec<u32>,
        #[arg(long, default_value_t = 101)]
        grid_points: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG chart here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Transform, then Viterbi-decode, one posterior file.
    Decode {
        posteriors: PathBuf,
        hmm: PathBuf,
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value = "on")]
        renormalize: Switch,
        #[arg(long)]
        priors: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Word error rate of a hypothesis transcript, or pooled over a corpus.
    Score {
        /// Reference transcript (omit with --manifest).
        reference: Option<PathBuf>,
        hypothesis: Option<PathBuf>,
        /// Corpus manifest; hypotheses are read from <hyp-dir>/<id>.hyp.
        #[arg(long, requires = "hyp_dir", conflicts_with_all = ["reference", "hypothesis"])]
        manifest: Option<PathBuf>,
        #[arg(long)]
        hyp_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded synthetic corpus from an HMM.
    Synth {
        hmm: PathBuf,
        #[arg(long)]
        utterances: usize,
        #[arg(long, default_value_t = 10)]
        frames_min: usize,
        #[arg(long, default_value_t = 30)]
        frames_max: usize,
        #[arg(long)]
        concentration: f64,
        #[arg(long, default_value_t = 0.0)]
        confusion_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a corpus at every configured order and compare WERs.
    Experiment {
        config: PathBuf,
        /// Overrides the noise seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn wer_text(report: &WerReport, format: Format) -> String {
    match format {
        Format::Table => format!(
            "WER {:.3}% [ {} / {}, {} ins, {} del, {} sub ]\n",
            100.0 * report.wer,
            report.errors(),
            report.ref_length,
            report.insertions,
            report.deletions,
            report.substitutions
        ),
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Transform {
            input,
            order,
            renormalize,
            out,
        } => {
            let order = LossOrder::new(order)?;
            let matrix = load_posteriors(&input)?;
            let transformed = transform_matrix(&matrix, order, renormalize.into())?;
            write_file(&out, &posteriors_to_string(&transformed))
        }
        Command::Curves {
            orders,
            grid_points,
            format,
            out,
            svg,
        } => {
            let orders = orders.into_iter().map(LossOrder::new).collect::<Result<Vec<_>, _>>()?;
            let table = correspondence_curves(&orders, grid_points)?;
            if let Some(svg) = svg {
                write_file(&svg, &table.to_svg())?;
            }
            let text = match format {
                Format::Table => table.to_table(),
                Format::Machine => table.to_json(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Decode {
            posteriors,
            hmm,
            order,
            renormalize,
            priors,
            out,
        } => {
            let options = DecodeOptions {
                order: LossOrder::new(order)?,
                renormalize: renormalize.into(),
                priors: priors.as_deref().map(load_priors).transpose()?,
            };
            let hmm = load_hmm(&hmm)?;
            let matrix = load_posteriors(&posteriors)?;
            let result = decode_posteriors(&matrix, &hmm, &options)?;
            save_transcript(&result.token_sequence, &out)
        }
        Command::Score {
            reference,
            hypothesis,
            manifest,
            hyp_dir,
            format,
            out,
        } => {
            let report = match (manifest, hyp_dir, reference, hypothesis) {
                (Some(manifest), Some(hyp_dir), _, _) => {
                    let corpus = load_corpus(&manifest)?;
                    let hyps = corpus
                        .utterances
                        .iter()
                        .map(|u| load_transcript(&hyp_dir.join(format!("{}.hyp", u.id))))
                        .collect::<Result<Vec<_>, _>>()?;
                    corpus_wer(
                        corpus
                            .utterances
                            .iter()
                            .zip(&hyps)
                            .map(|(u, h)| (&u.reference[..], &h[..])),
                    )?
                }
                (None, _, Some(reference), Some(hypothesis)) => {
                    align_and_score(&load_transcript(&reference)?, &load_transcript(&hypothesis)?)?
                }
                _ => {
                    return Err(Error::InvalidConfig(
                        "score needs REFERENCE and HYPOTHESIS, or --manifest with --hyp-dir",
                    ))
                }
            };
            emit(out.as_deref(), &wer_text(&report, format))
        }
        Command::Synth {
            hmm,
            utterances,
            frames_min,
            frames_max,
            concentration,
            confusion_rate,
            seed,
            out,
        } => {
            let noise = NoiseSpec {
                concentration,
                confusion_rate,
                seed,
            };
            let model = load_hmm(&hmm)?;
            let corpus = generate_corpus(&model, utterances, frames_min..=frames_max, &noise)?;
            minkloss::dataio::synth::write_corpus(&corpus, &out)?;
            Ok(())
        }
        Command::Experiment {
            config,
            seed,
            format,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let (Some(seed), Some(noise)) = (seed, cfg.noise.as_mut()) {
                noise.seed = seed;
            }
            let base = config.parent().unwrap_or_else(|| Path::new("."));
            let report = run_experiment(&cfg, base)?;
            for r in &report.results {
                eprintln!("order {} decoded in {:.3?}", r.order, r.decode_time);
            }
            let text = match format {
                Format::Table => report.to_table(),
                Format::Machine => report.to_json(),
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.kind() {
                ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Solver => EXIT_SOLVER,
            })
        }
    }
}
