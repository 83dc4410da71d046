//! Deterministic report rendering: canonical JSON, CSV and aligned text.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::metrics::AggregateScores;
use crate::repattern::Comparison;
use crate::stability::{CategoryDistribution, EdgeCategory};

pub const TOOL: &str = "udstab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped on every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the canonical JSON encoding of the effective configuration.
    pub config_hash: String,
    pub seed: Option<u64>,
}

pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl ReportMeta {
    pub fn new<C: Serialize>(config: &C, seed: Option<u64>) -> Self {
        ReportMeta {
            tool: TOOL,
            version: VERSION,
            config_hash: config_hash(config),
            seed,
        }
    }

    fn banner(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_owned(), |s| s.to_string());
        format!(
            "# {} {} config_sha256={} seed={}",
            self.tool, self.version, self.config_hash, seed
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    meta: &'a ReportMeta,
    data: &'a T,
}

/// Pretty JSON with the metadata under `meta` and the payload under `data`.
pub fn render_json<T: Serialize>(meta: &ReportMeta, data: &T) -> String {
    let mut out = serde_json::to_string_pretty(&Envelope { meta, data }).expect("report serializes");
    out.push('\n');
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// First column left-aligned, the rest right-aligned.
    pub fn to_text(&self, meta: &ReportMeta) -> String {
        let cols = self.header.len();
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |row: &[String]| {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            cells.join("  ").trim_end().to_owned()
        };
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1));
        let mut out = meta.banner();
        out.push('\n');
        out.push_str(&line(&self.header));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    /// CSV preceded by a `#` metadata line.
    pub fn to_csv(&self, meta: &ReportMeta) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        format!("{}\n{body}", meta.banner())
    }
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn signed_points(x: f64) -> String {
    let v = 100.0 * x;
    // avoid printing "-0.0"
    if v.abs() < 0.05 {
        "+0.0".to_owned()
    } else {
        format!("{v:+.1}")
    }
}

/// Three significant digits, scientific below 0.001.
pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        "0".to_owned()
    } else if p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.3}")
    }
}

/// Edge count and share per stability category.
pub fn distribution_table(dist: &CategoryDistribution) -> Table {
    let mut t = Table::new(["Edge Type", "Edges", "%"]);
    for c in EdgeCategory::ALL {
        t.push([
            c.display_name().to_owned(),
            dist.count(c).to_string(),
            format!("{:.1}", dist.percent(c)),
        ]);
    }
    t.push(["Total".to_owned(), dist.total.to_string(), "100.0".to_owned()]);
    t
}

/// UAS and LAS per stability category in percent, with the standard
/// deviation across runs when there is more than one.
pub fn category_score_table(scores: &AggregateScores) -> Table {
    let mut t = Table::new(["Edge Type", "UAS", "LAS", "Edges"]);
    for c in EdgeCategory::ALL {
        let agg = &scores.per_category[&c];
        let cell = |m: Option<crate::metrics::MeanStd>| match m {
            None => "-".to_owned(),
            Some(m) if scores.runs > 1 => format!("{} ± {}", pct(m.mean), pct(m.std)),
            Some(m) => pct(m.mean),
        };
        t.push([
            c.display_name().to_owned(),
            cell(agg.uas),
            cell(agg.las),
            format!("{}", agg.n_edges),
        ]);
    }
    t
}

/// Scores per system with the difference to the baseline underneath.
pub fn comparison_table(cmp: &Comparison) -> Table {
    let mut t = Table::new(["System", "P", "R", "F1"]);
    let b = &cmp.baseline;
    t.push([cmp.baseline_name.clone(), pct(b.precision), pct(b.recall), pct(b.f1)]);
    for s in &cmp.systems {
        t.push([
            s.name.clone(),
            pct(s.scores.precision),
            pct(s.scores.recall),
            pct(s.scores.f1),
        ]);
        t.push([
            String::new(),
            signed_points(s.delta[0]),
            signed_points(s.delta[1]),
            signed_points(s.delta[2]),
        ]);
    }
    t
}

/// Bootstrap p-values for the P, R and F1 differences of each system.
pub fn pvalue_table(cmp: &Comparison) -> Table {
    let mut t = Table::new(["System", "P", "R", "F1"]);
    for s in &cmp.systems {
        t.push([
            s.name.clone(),
            format_p(s.p_values[0]),
            format_p(s.p_values[1]),
            format_p(s.p_values[2]),
        ]);
    }
    t
}
