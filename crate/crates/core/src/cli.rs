//! The `gazeconf` command line. Every stage reads and writes files, and
//! every output depends only on the inputs, the config and the seed.
//!
//! Exit codes: 0 success, 1 usage, 2 data or validation error, 3 solver did
//! not converge.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::eval::{self, pearson_correlations, EvalReport};
use crate::features::{feature_name, DESCRIPTIONS};
use crate::gaze::{load_session, load_sessions, save_sessions};
use crate::learn::{fit, FeatureMode, Label, SvmModel};
use crate::pipeline::{
    detect_all, extract_dataset, labeled_dataset, read_feature_csv, write_feature_csv, AoiMode, EvalMode,
    FeatureRow, PipelineConfig,
};
use crate::report::{render_report, Claim, ClaimStore, EstimatedAnswer, EvalSummary};
use crate::synth::{generate_population, generate_session, BehaviorProfile};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gazeconf", version, about = "Estimate answer confidence from eye gaze")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    aoi_mode: Option<AoiModeArg>,
    /// Layout JSON for absolute AOI mode.
    #[arg(long, global = true)]
    layout: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    eval: Option<EvalModeArg>,
    #[arg(long, global = true, value_enum)]
    features: Option<FeaturesArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AoiModeArg {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalModeArg {
    Pooled,
    Lopo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FeaturesArg {
    All,
    Stepwise,
    ReadingTimeOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LabelArg {
    Confident,
    Unconfident,
}

impl From<LabelArg> for Label {
    fn from(l: LabelArg) -> Label {
        match l {
            LabelArg::Confident => Label::Confident,
            LabelArg::Unconfident => Label::Unconfident,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic gaze log.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Behavior profile (TOML); the built-in default when absent.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        participants: usize,
        #[arg(long, default_value_t = 170)]
        questions: usize,
    },
    /// Write the built-in behavior profile as TOML.
    Profile {
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect fixations and saccades for every question.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the feature CSV from a gaze log.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep unlabeled answers (label column left empty).
        #[arg(long)]
        all_answers: bool,
    },
    /// Train a model on the labeled rows of a feature CSV.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate on a gaze log (or a feature CSV).
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write both 11-point curves as CSV.
        #[arg(long)]
        pr_csv: Option<PathBuf>,
    },
    /// Build the review report for one participant's session.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Markdown rendering of the report.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Evaluation report whose APs are shown in the summary.
        #[arg(long)]
        eval_report: Option<PathBuf>,
    },
    /// Record a learner's correction of an estimate.
    Claim {
        /// Session the claim refers to.
        #[arg(long)]
        input: PathBuf,
        /// Claim log (JSONL), appended to.
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long, value_enum)]
        estimated: LabelArg,
        #[arg(long, value_enum)]
        corrected: LabelArg,
        /// Seconds since the Unix epoch; the current time when absent.
        #[arg(long)]
        timestamp: Option<u64>,
    },
    /// Learning curve over random training subsets of a feature CSV.
    Curve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 200, 400])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Pearson correlation of every feature with the confidence label.
    Correlate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } => EXIT_CONVERGENCE,
        _ => EXIT_DATA,
    }
}

fn config(common: &Common) -> Result<PipelineConfig> {
    let mut c = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        c.seed = seed;
    }
    if let Some(mode) = common.aoi_mode {
        c.aoi.mode = match mode {
            AoiModeArg::Absolute => AoiMode::Absolute,
            AoiModeArg::Relative => AoiMode::Relative,
        };
    }
    if let Some(layout) = &common.layout {
        c.aoi.layout = Some(layout.clone());
    }
    if let Some(e) = common.eval {
        c.eval = match e {
            EvalModeArg::Pooled => EvalMode::Pooled,
            EvalModeArg::Lopo => EvalMode::Lopo,
        };
    }
    if let Some(f) = common.features {
        c.features = match f {
            FeaturesArg::All => FeatureMode::All,
            FeaturesArg::Stepwise => FeatureMode::Stepwise,
            FeaturesArg::ReadingTimeOnly => FeatureMode::ReadingTimeOnly,
        };
    }
    c.validate()?;
    Ok(c)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn feature_rows(path: &Path) -> Result<Vec<FeatureRow>> {
    read_feature_csv(fs::File::open(path)?)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = config(&cli.common)?;
    match cli.command {
        Command::Synth { out, profile, participants, questions } => {
            let profile = match profile {
                Some(p) => BehaviorProfile::load(p)?,
                None => BehaviorProfile::default(),
            };
            let sessions = if participants == 1 {
                vec![generate_session(&profile, "p01", questions, cfg.seed)?]
            } else {
                generate_population(&profile, participants, questions, cfg.seed)?
            };
            save_sessions(&sessions, &out)?;
            eprintln!("wrote {participants} sessions x {questions} questions to {}", out.display());
        }
        Command::Profile { out } => write_file(&out, &BehaviorProfile::default().to_toml())?,
        Command::Detect { input, out } => {
            let events = detect_all(&load_sessions(&input)?, &cfg.detector)?;
            write_file(&out, &serde_json::to_string_pretty(&events)?)?;
        }
        Command::Extract { input, out, all_answers } => {
            let mut cfg = cfg;
            if all_answers {
                cfg.labeled_only = false;
            }
            let extraction = extract_dataset(&load_sessions(&input)?, &cfg)?;
            for s in &extraction.skipped {
                eprintln!("skipped {}/{}: {}", s.participant, s.question, s.reason);
            }
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_feature_csv(&extraction.rows, &mut w)?;
            w.flush()?;
            eprintln!("wrote {} rows to {}", extraction.rows.len(), out.display());
        }
        Command::Train { input, out } => {
            let d = labeled_dataset(&feature_rows(&input)?)?;
            let model = fit(&d, &cfg.svm, cfg.features, cfg.seed)?;
            write_file(&out, &model.to_json()?)?;
            let names: Vec<String> = model.selected_features.iter().map(|&f| feature_name(f)).collect();
            eprintln!("trained on {} rows; features [{}]; {} support vectors", d.len(), names.join(", "), model.support_vectors.len());
        }
        Command::Eval { input, out, pr_csv } => {
            let d = if is_csv(&input) {
                labeled_dataset(&feature_rows(&input)?)?
            } else {
                extract_dataset(&load_sessions(&input)?, &cfg)?.labeled_dataset()?
            };
            let report = eval::cv::evaluate_dataset(&d, &cfg)?;
            write_file(&out, &report.to_json()?)?;
            if let Some(path) = pr_csv {
                write_file(&path, &report.pr_csv())?;
            }
            print!("{}", report.summary_table());
        }
        Command::Report { model, input, out, markdown, eval_report } => {
            let model = SvmModel::from_json(&fs::read_to_string(&model)?)?;
            let session = load_session(&input)?;
            let mut cfg = cfg;
            cfg.labeled_only = false;
            let extraction = extract_dataset(std::slice::from_ref(&session), &cfg)?;
            for s in &extraction.skipped {
                eprintln!("skipped {}: {}", s.question, s.reason);
            }
            let answers: Vec<EstimatedAnswer> = extraction
                .rows
                .iter()
                .map(|row| {
                    let record = session
                        .records
                        .iter()
                        .find(|r| r.answer.question_id == row.question)
                        .expect("row comes from this session");
                    let score = model.decision(&row.features);
                    EstimatedAnswer { answer: record.answer.clone(), predicted_confident: score > 0.0, score }
                })
                .collect();
            let evaluation = match eval_report {
                Some(path) => {
                    let r = EvalReport::from_json(&fs::read_to_string(path)?)?;
                    Some(EvalSummary {
                        confidence_ap: r.confidence.average_precision,
                        unconfidence_ap: r.unconfidence.average_precision,
                    })
                }
                None => None,
            };
            let report = render_report(Some(&session.participant_id), &answers, evaluation);
            write_file(&out, &report.to_json()?)?;
            if let Some(path) = markdown {
                write_file(&path, &report.to_markdown())?;
            }
            eprintln!("{} of {} answers to review", report.items.len(), answers.len());
        }
        Command::Claim { input, log, question, estimated, corrected, timestamp } => {
            let session = load_session(&input)?;
            let timestamp = timestamp.unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
            let claim = Claim::new(question, estimated.into(), corrected.into(), timestamp)?;
            let mut store = ClaimStore::open(log, session.records.iter().map(|r| r.answer.question_id.clone()));
            store.record(&claim)?;
            eprintln!("{} claims recorded", store.len()?);
        }
        Command::Curve { input, out, sizes, repeats } => {
            let d = labeled_dataset(&feature_rows(&input)?)?;
            let points = eval::learning_curve(&d, &sizes, repeats, &cfg.svm, cfg.features, cfg.seed)?;
            write_file(&out, &serde_json::to_string_pretty(&points)?)?;
            println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "size", "conf AP", "conf std", "unconf AP", "unconf std");
            for p in &points {
                println!(
                    "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                    p.size, p.confidence_mean, p.confidence_std, p.unconfidence_mean, p.unconfidence_std
                );
            }
        }
        Command::Correlate { input, out } => {
            let d = labeled_dataset(&feature_rows(&input)?)?;
            let r = pearson_correlations(&d)?;
            let mut text = String::from("feature,description,r\n");
            for (i, v) in r.iter().enumerate() {
                text.push_str(&format!("{},{},{v}\n", feature_name(i), DESCRIPTIONS[i]));
            }
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
