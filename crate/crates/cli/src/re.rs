use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use udstab::metrics::{Alternative, BootstrapConfig};
use udstab::repattern::{
    compare_predictions, evaluate_setting, predict, predict_ensemble, read_instances, read_predictions, score, train,
    write_predictions, PatternDictionary, ReConfig, ReScores, RelationInstance, SchemeCorpus, Setting, TriggerLexicon,
};
use udstab::report::{comparison_table, pvalue_table, ReportMeta, Table};

use crate::io::{read_text, read_treebank, stem, write_file, write_report};

#[derive(Debug, Subcommand)]
pub enum ReCommand {
    /// Build a pattern dictionary from labeled instances.
    Train(TrainArgs),
    /// Label instances with a trained dictionary.
    Predict(PredictArgs),
    /// Score predictions against gold relations.
    Score(ScoreArgs),
    /// Compare systems against a baseline with paired bootstrap tests.
    Compare(CompareArgs),
    /// Train, predict and score in one go under a chosen setting.
    Run(RunArgs),
}

#[derive(Debug, Args, Serialize)]
struct Extraction {
    /// Trigger lexicon (`trigger_type<TAB>surface` lines).
    #[arg(long, value_name = "FILE")]
    lexicon: PathBuf,
    /// Ignore `no_relation` training instances.
    #[arg(long)]
    no_negatives: bool,
    /// Also use the trigger-free pattern of instances that have a trigger.
    #[arg(long)]
    also_untriggered: bool,
}

impl Extraction {
    fn config(&self) -> ReConfig {
        ReConfig {
            negatives: !self.no_negatives,
            also_untriggered: self.also_untriggered,
        }
    }

    fn lexicon(&self) -> Result<TriggerLexicon> {
        Ok(TriggerLexicon::from_tsv(&read_text(&self.lexicon)?)?)
    }
}

/// Instance files, one per parse variant, with optional CoNLL-U files
/// holding the parses of records that do not embed one.
#[derive(Debug, Args, Serialize)]
struct Variants {
    /// Instance file (JSON lines); repeat for further parse variants.
    #[arg(long = "instances", value_name = "FILE", required = true)]
    instances: Vec<PathBuf>,
    /// CoNLL-U parses matched to records by `sent_id`; one per `--instances`.
    #[arg(long = "parses", value_name = "FILE")]
    parses: Vec<PathBuf>,
}

fn load_variant(instances: &Path, parses: Option<&PathBuf>) -> Result<Vec<RelationInstance>> {
    let trees = parses.map(|p| read_treebank(p, false)).transpose()?;
    read_instances(&read_text(instances)?, trees.as_deref()).with_context(|| format!("in {}", instances.display()))
}

fn load_variants(files: &[PathBuf], parses: &[PathBuf]) -> Result<Vec<(String, Vec<RelationInstance>)>> {
    ensure!(
        parses.is_empty() || parses.len() == files.len(),
        "give one parse file per instance file ({} vs {})",
        parses.len(),
        files.len()
    );
    files
        .iter()
        .enumerate()
        .map(|(i, f)| Ok((stem(f), load_variant(f, parses.get(i))?)))
        .collect()
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    data: Variants,
    #[command(flatten)]
    extraction: Extraction,
    /// Annotation scheme recorded in the dictionary.
    #[arg(long, default_value = "vanilla")]
    scheme: String,
    /// Dictionary output (JSON).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    data: Variants,
    #[command(flatten)]
    extraction: Extraction,
    /// Pattern dictionary; give one per `--instances` to look each variant
    /// up in its own dictionary, or one shared dictionary.
    #[arg(long, value_name = "FILE", required = true)]
    dictionary: Vec<PathBuf>,
    /// Predictions output (JSON lines).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,
    /// JSON lines with `id` and `relation` (instance or prediction files).
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct Resampling {
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Two-sided instead of one-sided p-values.
    #[arg(long)]
    two_sided: bool,
}

impl Resampling {
    fn config(&self) -> BootstrapConfig {
        BootstrapConfig {
            n_resamples: self.resamples,
            seed: self.seed,
            alternative: if self.two_sided {
                Alternative::TwoSided
            } else {
                Alternative::Greater
            },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    baseline: PathBuf,
    /// `NAME=FILE` predictions of a system to compare; repeatable.
    #[arg(long, value_name = "NAME=FILE", required = true)]
    system: Vec<String>,
    #[command(flatten)]
    resampling: Resampling,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingArg {
    /// Drop training instances derived from the test sentences.
    Standard,
    /// Train on everything.
    Parallel,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    /// Training instances; repeat per parse variant.
    #[arg(long, value_name = "FILE", required = true)]
    train: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    train_parses: Vec<PathBuf>,
    /// Test instances; repeat per parse variant, in the same order.
    #[arg(long, value_name = "FILE", required = true)]
    test: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    test_parses: Vec<PathBuf>,
    #[command(flatten)]
    extraction: Extraction,
    #[arg(long, value_enum, default_value = "standard")]
    setting: SettingArg,
    /// Decode every test instance from all of its parse variants.
    #[arg(long)]
    ensemble: bool,
    /// Source ids to exclude under the standard setting, one per line;
    /// defaults to the source ids of the test instances.
    #[arg(long, value_name = "FILE")]
    exclude: Option<PathBuf>,
    /// Baseline predictions to test the new ones against.
    #[arg(long, value_name = "FILE")]
    baseline: Option<PathBuf>,
    #[command(flatten)]
    resampling: Resampling,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

pub fn run(cmd: &ReCommand) -> Result<()> {
    match cmd {
        ReCommand::Train(a) => run_train(a),
        ReCommand::Predict(a) => run_predict(a),
        ReCommand::Score(a) => run_score(a),
        ReCommand::Compare(a) => run_compare(a),
        ReCommand::Run(a) => run_pipeline(a),
    }
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let lexicon = args.extraction.lexicon()?;
    let variants = load_variants(&args.data.instances, &args.data.parses)?;
    let mut dicts = Vec::new();
    for (_, instances) in &variants {
        dicts.push(train(instances, &lexicon, &args.scheme, args.extraction.config())?);
    }
    let mut dict = PatternDictionary::union(&dicts.iter().collect::<Vec<_>>());
    if dicts.len() == 1 {
        dict = dicts.remove(0);
    }
    write_file(&args.out, &dict.to_json())?;
    eprintln!("{} patterns", dict.len());
    Ok(())
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let lexicon = args.extraction.lexicon()?;
    let config = args.extraction.config();
    let variants = load_variants(&args.data.instances, &args.data.parses)?;
    ensure!(
        args.dictionary.len() == 1 || args.dictionary.len() == variants.len(),
        "give one dictionary, or one per instance file"
    );
    let dicts = args
        .dictionary
        .iter()
        .map(|p| PatternDictionary::from_json(&read_text(p)?).with_context(|| format!("in {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let corpus = SchemeCorpus { schemes: variants };
    corpus.validate()?;
    let n = corpus.schemes[0].1.len();
    let mut predictions = BTreeMap::new();
    for i in 0..n {
        let lead = &corpus.schemes[0].1[i];
        let relation = if corpus.schemes.len() == 1 {
            predict(lead, &dicts[0], &lexicon, config)
        } else {
            let pairs: Vec<_> = corpus
                .schemes
                .iter()
                .enumerate()
                .map(|(k, (_, insts))| (&insts[i], dicts.get(k).unwrap_or(&dicts[0])))
                .collect();
            predict_ensemble(&pairs, &lexicon, config)
        };
        predictions.insert(lead.id().to_owned(), relation);
    }
    write_file(&args.out, &write_predictions(&predictions))
}

/// `id` → `relation` from any JSON-lines file whose records carry both.
fn read_gold(path: &Path) -> Result<BTreeMap<String, String>> {
    #[derive(serde::Deserialize)]
    struct Labeled {
        id: String,
        relation: String,
    }
    let mut out = BTreeMap::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Labeled = serde_json::from_str(line)
            .with_context(|| format!("{} line {}: need `id` and `relation`", path.display(), i + 1))?;
        if out.insert(rec.id.clone(), rec.relation).is_some() {
            bail!("{}: duplicate id {}", path.display(), rec.id);
        }
    }
    Ok(out)
}

fn score_table(rows: &[(&str, &ReScores)]) -> Table {
    let mut t = Table::new(["System", "P", "R", "F1", "Predicted", "Gold", "Correct"]);
    for (name, s) in rows {
        t.push([
            name.to_string(),
            format!("{:.1}", 100.0 * s.precision),
            format!("{:.1}", 100.0 * s.recall),
            format!("{:.1}", 100.0 * s.f1),
            s.counts.predicted_positive.to_string(),
            s.counts.gold_positive.to_string(),
            s.counts.correct.to_string(),
        ]);
    }
    t
}

fn run_score(args: &ScoreArgs) -> Result<()> {
    let gold = read_gold(&args.gold)?;
    let predictions = read_predictions(&read_text(&args.predictions)?)?;
    let scores = score(&predictions, &gold)?;
    let meta = ReportMeta::new(args, None);
    let name = stem(&args.predictions);
    print!(
        "{}",
        write_report(&args.out, "scores", &meta, &scores, &score_table(&[(&name, &scores)]))?
    );
    Ok(())
}

fn write_comparison(out: &Path, meta: &ReportMeta, cmp: &udstab::repattern::Comparison) -> Result<()> {
    print!(
        "{}",
        write_report(out, "comparison", meta, cmp, &comparison_table(cmp))?
    );
    print!("{}", write_report(out, "pvalues", meta, cmp, &pvalue_table(cmp))?);
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let gold = read_gold(&args.gold)?;
    let baseline = read_predictions(&read_text(&args.baseline)?)?;
    let systems = args
        .system
        .iter()
        .map(|s| {
            let (name, file) = s.split_once('=').with_context(|| format!("`{s}` is not NAME=FILE"))?;
            Ok((name.to_owned(), read_predictions(&read_text(Path::new(file))?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let config = args.resampling.config();
    let cmp = compare_predictions(&gold, (&stem(&args.baseline), &baseline), &systems, config)?;
    write_comparison(&args.out, &ReportMeta::new(args, Some(config.seed)), &cmp)
}

fn run_pipeline(args: &RunArgs) -> Result<()> {
    let lexicon = args.extraction.lexicon()?;
    let train_set = SchemeCorpus {
        schemes: load_variants(&args.train, &args.train_parses)?,
    };
    let test_set = SchemeCorpus {
        schemes: load_variants(&args.test, &args.test_parses)?,
    };
    let setting = match (args.setting, &args.exclude) {
        (SettingArg::Parallel, _) => Setting::Parallel,
        (SettingArg::Standard, Some(file)) => Setting::Standard {
            excluded_sources: read_text(file)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect::<BTreeSet<_>>(),
        },
        (SettingArg::Standard, None) => {
            let first = test_set.schemes.first().map(|(_, v)| v.as_slice()).unwrap_or_default();
            Setting::standard_for(first)
        }
    };
    let eval = evaluate_setting(
        &train_set,
        &test_set,
        &setting,
        args.ensemble,
        &lexicon,
        args.extraction.config(),
    )?;

    let meta = ReportMeta::new(args, Some(args.resampling.seed));
    write_file(&args.out.join("dictionary.json"), &eval.dictionary.to_json())?;
    write_file(
        &args.out.join("predictions.jsonl"),
        &write_predictions(&eval.predictions),
    )?;
    print!(
        "{}",
        write_report(
            &args.out,
            "scores",
            &meta,
            &eval.scores,
            &score_table(&[("system", &eval.scores)])
        )?
    );

    if let Some(path) = &args.baseline {
        let baseline = read_predictions(&read_text(path)?)?;
        let gold = udstab::repattern::gold_labels(&test_set.schemes[0].1)?;
        let cmp = compare_predictions(
            &gold,
            (&stem(path), &baseline),
            &[("system".to_owned(), eval.predictions)],
            args.resampling.config(),
        )?;
        write_comparison(&args.out, &meta, &cmp)?;
    }
    Ok(())
}
