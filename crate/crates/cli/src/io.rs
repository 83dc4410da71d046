use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use udstab::conllu::{parse_str, ParseMode, Sentence};
use udstab::report::{render_json, ReportMeta, Table};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parse a CoNLL-U file. In lenient mode bad sentences are skipped and
/// reported on stderr.
pub fn read_treebank(path: &Path, lenient: bool) -> Result<Vec<Sentence>> {
    let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let bank = parse_str(&read_text(path)?, mode).with_context(|| format!("in {}", path.display()))?;
    for d in &bank.diagnostics {
        eprintln!("warning: {}: skipped {d}", path.display());
    }
    Ok(bank.sentences)
}

/// Files as given, with directories replaced by their `*.conllu` files in
/// name order.
pub fn conllu_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "conllu"))
                .collect();
            if found.is_empty() {
                bail!("{} contains no .conllu files", p.display());
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Write `<stem>.json`, `<stem>.csv` and `<stem>.txt` into `dir`, returning
/// the text rendering.
pub fn write_report<T: Serialize>(
    dir: &Path,
    stem: &str,
    meta: &ReportMeta,
    data: &T,
    table: &Table,
) -> Result<String> {
    let text = table.to_text(meta);
    write_file(&dir.join(format!("{stem}.json")), &render_json(meta, data))?;
    write_file(&dir.join(format!("{stem}.csv")), &table.to_csv(meta))?;
    write_file(&dir.join(format!("{stem}.txt")), &text)?;
    Ok(text)
}

/// File name without directory or extension, for labeling runs.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
