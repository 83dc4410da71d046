use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;
use udstab::conllu::LabelPolicy;
use udstab::metrics::{
    pair_treebanks, paired_bootstrap, sentence_counts, without_punctuation, Alternative, BootstrapConfig,
    BootstrapMetric, EdgeFilter,
};
use udstab::report::{format_p, ReportMeta, Table};

use crate::io::{read_treebank, write_report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Uas,
    Las,
}

#[derive(Debug, Args, Serialize)]
pub struct BootstrapArgs {
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    /// Baseline parser output.
    #[arg(long, value_name = "FILE")]
    system_a: PathBuf,
    /// Parser output tested for improving on the baseline.
    #[arg(long, value_name = "FILE")]
    system_b: PathBuf,
    #[arg(long, value_enum, default_value = "las")]
    metric: Metric,
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    two_sided: bool,
    #[arg(long)]
    exact_labels: bool,
    #[arg(long)]
    exclude_punct: bool,
    #[arg(long)]
    lenient: bool,
    /// Write JSON, CSV and text reports here as well.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

pub fn run(args: &BootstrapArgs) -> Result<()> {
    let gold = read_treebank(&args.gold, args.lenient)?;
    let policy = if args.exact_labels {
        LabelPolicy::Exact
    } else {
        LabelPolicy::Universal
    };
    let filter = args.exclude_punct.then_some(&without_punctuation as EdgeFilter<'_>);
    let units = |path: &PathBuf| -> Result<Vec<_>> {
        let pairs = pair_treebanks(&gold, &read_treebank(path, args.lenient)?)?;
        Ok(pairs.iter().map(|p| sentence_counts(p, filter, policy)).collect())
    };
    let (a, b) = (units(&args.system_a)?, units(&args.system_b)?);
    let metric = match args.metric {
        Metric::Uas => BootstrapMetric::Uas,
        Metric::Las => BootstrapMetric::Las,
    };
    let config = BootstrapConfig {
        n_resamples: args.resamples,
        seed: args.seed,
        alternative: if args.two_sided {
            Alternative::TwoSided
        } else {
            Alternative::Greater
        },
    };
    let result = paired_bootstrap(&a, &b, metric, config)?;

    let mut table = Table::new(["Metric", "A", "B", "Delta", "p"]);
    table.push([
        metric.to_string(),
        format!("{:.2}", 100.0 * result.score_a),
        format!("{:.2}", 100.0 * result.score_b),
        format!("{:+.2}", 100.0 * result.observed_delta),
        format_p(result.p_value),
    ]);
    let meta = ReportMeta::new(args, Some(args.seed));
    match &args.out {
        Some(dir) => print!("{}", write_report(dir, "bootstrap", &meta, &result, &table)?),
        None => print!("{}", table.to_text(&meta)),
    }
    Ok(())
}
