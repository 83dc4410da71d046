use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use udstab::conllu::{FunctionWordConfig, LabelPolicy};
use udstab::metrics::{
    aggregate_runs, pair_treebanks, per_category_scores, without_punctuation, AggregateScores, CategoryScores,
};
use udstab::report::{category_score_table, distribution_table, ReportMeta};
use udstab::stability::{
    category_distribution, classify_treebank, read_alignment_json, read_pharaoh, ClassifyConfig, IndexBase,
    SentenceAlignment,
};

use crate::io::{conllu_files, read_text, read_treebank, stem, write_file, write_report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentFormat {
    /// One line of `i-j` pairs per sentence pair, in treebank order.
    Pharaoh,
    /// JSON lines (or one array) of `{src_sent_id, tgt_sent_id, links}`.
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    /// Source-language treebank.
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    /// Gold treebank of the translations.
    #[arg(long, value_name = "FILE")]
    target: PathBuf,
    /// Word alignments from source to target tokens.
    #[arg(long, value_name = "FILE")]
    alignments: PathBuf,
    /// Alignment file format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    alignment_format: Option<AlignmentFormat>,
    /// Pharaoh indices start at 0.
    #[arg(long)]
    zero_based: bool,
    /// Parser output on the target sentences: files or directories of
    /// `.conllu` files, one file per run.
    #[arg(long, value_name = "PATH")]
    predicted: Vec<PathBuf>,
    /// Compare full labels including subtypes.
    #[arg(long)]
    exact_labels: bool,
    /// UPOS tags of function words (comma-separated).
    #[arg(long, value_delimiter = ',', value_name = "TAGS")]
    function_words: Vec<String>,
    /// Skip malformed sentences instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Leave PUNCT tokens out of attachment scores.
    #[arg(long)]
    exclude_punct: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn alignment_format(args: &StabilityArgs) -> AlignmentFormat {
    args.alignment_format
        .unwrap_or_else(|| match args.alignments.extension().and_then(|e| e.to_str()) {
            Some("json" | "jsonl") => AlignmentFormat::Json,
            _ => AlignmentFormat::Pharaoh,
        })
}

#[derive(Serialize)]
struct RunScores {
    file: String,
    scores: CategoryScores,
}

#[derive(Serialize)]
struct ScoreReport {
    runs: Vec<RunScores>,
    aggregate: AggregateScores,
}

pub fn run(args: &StabilityArgs) -> Result<()> {
    let src = read_treebank(&args.source, args.lenient)?;
    let tgt = read_treebank(&args.target, args.lenient)?;
    let alignments: Vec<SentenceAlignment> = match alignment_format(args) {
        AlignmentFormat::Json => read_alignment_json(&read_text(&args.alignments)?)?,
        AlignmentFormat::Pharaoh => {
            let base = if args.zero_based {
                IndexBase::Zero
            } else {
                IndexBase::One
            };
            read_pharaoh(read_text(&args.alignments)?.as_bytes(), &src, &tgt, base)?
        }
    };
    let policy = if args.exact_labels {
        LabelPolicy::Exact
    } else {
        LabelPolicy::Universal
    };
    let config = ClassifyConfig {
        function_words: if args.function_words.is_empty() {
            FunctionWordConfig::default()
        } else {
            FunctionWordConfig::new(args.function_words.iter().cloned())
        },
        labels: policy,
    };
    let classification = classify_treebank(&src, &tgt, &alignments, &config).context("classifying edges")?;
    let meta = ReportMeta::new(args, None);

    write_file(&args.out.join("classification.jsonl"), &classification.to_jsonl())?;
    let dist = category_distribution(&classification)?;
    print!(
        "{}",
        write_report(&args.out, "distribution", &meta, &dist, &distribution_table(&dist))?
    );

    if args.predicted.is_empty() {
        return Ok(());
    }
    let filter = args
        .exclude_punct
        .then_some(&without_punctuation as udstab::metrics::EdgeFilter<'_>);
    let mut runs = Vec::new();
    for file in conllu_files(&args.predicted)? {
        let predicted = read_treebank(&file, args.lenient)?;
        let pairs = pair_treebanks(&tgt, &predicted).with_context(|| format!("pairing {}", file.display()))?;
        let scores = per_category_scores(&pairs, &classification, filter, policy)?;
        runs.push(RunScores {
            file: stem(&file),
            scores,
        });
    }
    let aggregate = aggregate_runs(&runs.iter().map(|r| r.scores.clone()).collect::<Vec<_>>())?;
    let table = category_score_table(&aggregate);
    print!(
        "{}",
        write_report(
            &args.out,
            "category_scores",
            &meta,
            &ScoreReport { runs, aggregate },
            &table
        )?
    );
    Ok(())
}
