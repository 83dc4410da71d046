use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use udstab::conllu::serialize_conllu;
use udstab::report::{render_json, ReportMeta};
use udstab::transforms::{
    read_process_sidecar, read_snacs_sidecar, transform_treebank, AdverbialTagSet, Harmonization, ProcessAnnotation,
    SnacsAnnotation, Transform, TransformReport,
};

use crate::io::{read_text, read_treebank, write_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Nominal,
    Predicate,
    Oblique,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarmonizationArg {
    Global,
    ProcessSentencesOnly,
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    /// Process-evoking heads per sentence (JSON lines), for `predicate`.
    #[arg(long, value_name = "FILE")]
    processes: Option<PathBuf>,
    /// Supersense per token (JSON lines), for `oblique`.
    #[arg(long, value_name = "FILE")]
    supersenses: Option<PathBuf>,
    /// Where participants are folded into `A`.
    #[arg(long, value_enum, default_value = "global")]
    harmonization: HarmonizationArg,
    /// Supersenses whose obliques become `advmod` (comma-separated).
    #[arg(long, value_delimiter = ',', value_name = "TAGS")]
    adverbial_tags: Vec<String>,
    /// Run without the sidecar, treating every sentence as unannotated.
    #[arg(long)]
    allow_missing: bool,
    #[arg(long)]
    lenient: bool,
    /// Where to write relabel counts; defaults to `<output>.diagnostics.json`.
    #[arg(long, value_name = "FILE")]
    diagnostics: Option<PathBuf>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    kind: Kind,
    sidecar: Option<&'a PathBuf>,
    report: &'a TransformReport,
}

fn load<T: Default>(
    path: Option<&PathBuf>,
    allow_missing: bool,
    what: &str,
    read: impl Fn(&str) -> Result<T>,
) -> Result<T> {
    match path {
        Some(p) => read(&read_text(p)?),
        None if allow_missing => {
            eprintln!("warning: no {what} given; every sentence is treated as unannotated");
            Ok(T::default())
        }
        None => bail!("this transformation needs --{what} (or --allow-missing)"),
    }
}

pub fn run(args: &TransformArgs) -> Result<()> {
    let sentences = read_treebank(&args.input, args.lenient)?;
    let processes: ProcessAnnotation;
    let supersenses: SnacsAnnotation;
    let adverbial = if args.adverbial_tags.is_empty() {
        AdverbialTagSet::default()
    } else {
        AdverbialTagSet::new(args.adverbial_tags.iter().cloned())?
    };
    let (transform, sidecar) = match args.kind {
        Kind::Nominal => (Transform::Nominal, None),
        Kind::Predicate => {
            processes = load(args.processes.as_ref(), args.allow_missing, "processes", |s| {
                Ok(read_process_sidecar(s)?)
            })?;
            let harmonization = match args.harmonization {
                HarmonizationArg::Global => Harmonization::Global,
                HarmonizationArg::ProcessSentencesOnly => Harmonization::ProcessSentencesOnly,
            };
            (
                Transform::Predicate {
                    processes: &processes,
                    harmonization,
                },
                args.processes.as_ref(),
            )
        }
        Kind::Oblique => {
            supersenses = load(args.supersenses.as_ref(), args.allow_missing, "supersenses", |s| {
                Ok(read_snacs_sidecar(s)?)
            })?;
            (
                Transform::Oblique {
                    supersenses: &supersenses,
                    adverbial: &adverbial,
                },
                args.supersenses.as_ref(),
            )
        }
    };
    let (out, report) = transform_treebank(&sentences, transform)?;
    write_file(&args.output, &serialize_conllu(&out))?;

    let diagnostics = args.diagnostics.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".diagnostics.json");
        PathBuf::from(p)
    });
    let meta = ReportMeta::new(args, None);
    let data = Diagnostics {
        kind: args.kind,
        sidecar,
        report: &report,
    };
    write_file(&diagnostics, &render_json(&meta, &data))?;
    eprintln!(
        "{} sentences, {} edges relabeled, {} without annotation, {} obliques without supersense",
        report.sentences,
        report.total_relabeled(),
        report.missing_annotation,
        report.missing_supersense
    );
    Ok(())
}
