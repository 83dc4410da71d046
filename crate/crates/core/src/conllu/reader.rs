use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{is_valid_upos, DepLabel, InertLine, LabelError, Sentence, Token, TreeError};

/// What to do with a sentence that fails to parse or validate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Abort on the first bad sentence.
    #[default]
    Strict,
    /// Skip the sentence and record a diagnostic.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("expected 10 tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("invalid token id `{0}`")]
    InvalidId(String),
    #[error("non-integer head `{0}`")]
    InvalidHead(String),
    #[error("invalid UPOS `{0}`")]
    InvalidUpos(String),
    #[error("malformed FEATS `{0}`")]
    InvalidFeats(String),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("duplicate token id {0}")]
    DuplicateId(usize),
    #[error("gap in token ids: expected {expected}, found {found}")]
    GappedId { expected: usize, found: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence {sentence}, line {line}: {kind}")]
pub struct ParseError {
    /// 1-based ordinal of the sentence block.
    pub sentence: usize,
    /// 1-based line number in the input.
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// A sentence skipped in lenient mode.
pub type Diagnostic = ParseError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Treebank {
    pub sentences: Vec<Sentence>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_str(input: &str, mode: ParseMode) -> Result<Treebank, ParseError> {
    parse_conllu(input.as_bytes(), mode)
}

pub fn parse_conllu<R: BufRead>(input: R, mode: ParseMode) -> Result<Treebank, ParseError> {
    let mut treebank = Treebank::default();
    let mut block: Vec<(usize, String)> = Vec::new();
    let mut ordinal = 0;

    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ParseError {
            sentence: ordinal + 1,
            line: idx + 1,
            kind: ParseErrorKind::Io(e.to_string()),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            flush(&mut block, &mut ordinal, mode, &mut treebank)?;
        } else {
            block.push((idx + 1, line.to_owned()));
        }
    }
    flush(&mut block, &mut ordinal, mode, &mut treebank)?;
    Ok(treebank)
}

fn flush(
    block: &mut Vec<(usize, String)>,
    ordinal: &mut usize,
    mode: ParseMode,
    treebank: &mut Treebank,
) -> Result<(), ParseError> {
    let lines = std::mem::take(block);
    // Comment-only blocks (e.g. a trailing `# newdoc`) carry no sentence.
    if lines.iter().all(|(_, l)| l.starts_with('#')) {
        return Ok(());
    }
    *ordinal += 1;
    match parse_block(*ordinal, &lines) {
        Ok(sentence) => treebank.sentences.push(sentence),
        Err(err) => match mode {
            ParseMode::Strict => return Err(err),
            ParseMode::Lenient => treebank.diagnostics.push(err),
        },
    }
    Ok(())
}

enum LineId {
    Word(usize),
    Inert,
}

fn parse_id(field: &str) -> Option<LineId> {
    let num = |s: &str| -> Option<usize> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    if let Some((a, b)) = field.split_once('-') {
        let (a, b) = (num(a)?, num(b)?);
        (a >= 1 && a < b).then_some(LineId::Inert)
    } else if let Some((a, b)) = field.split_once('.') {
        num(a)?;
        (num(b)? >= 1).then_some(LineId::Inert)
    } else {
        let id = num(field)?;
        (id >= 1).then_some(LineId::Word(id))
    }
}

fn comment_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let rest = comment.trim_start().strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix('=')?;
    Some(rest.strip_prefix(' ').unwrap_or(rest))
}

fn parse_block(ordinal: usize, lines: &[(usize, String)]) -> Result<Sentence, ParseError> {
    let err = |line: usize, kind: ParseErrorKind| ParseError {
        sentence: ordinal,
        line,
        kind,
    };

    let mut sent_id = None;
    let mut text = None;
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    let mut token_lines = Vec::new();
    let mut inert = Vec::new();

    for (lineno, line) in lines {
        let lineno = *lineno;
        if let Some(comment) = line.strip_prefix('#') {
            if let (None, Some(id)) = (&sent_id, comment_value(comment, "sent_id")) {
                sent_id = Some(id.to_owned());
            } else if let (None, Some(t)) = (&text, comment_value(comment, "text")) {
                text = Some(t.to_owned());
            } else {
                comments.push(comment.to_owned());
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(lineno, ParseErrorKind::ColumnCount(cols.len())));
        }
        let id = match parse_id(cols[0]) {
            Some(LineId::Word(id)) => id,
            Some(LineId::Inert) => {
                inert.push(InertLine {
                    position: tokens.len(),
                    line: line.clone(),
                });
                continue;
            }
            None => return Err(err(lineno, ParseErrorKind::InvalidId(cols[0].to_owned()))),
        };
        let expected = tokens.len() + 1;
        if id < expected {
            return Err(err(lineno, ParseErrorKind::DuplicateId(id)));
        } else if id > expected {
            return Err(err(lineno, ParseErrorKind::GappedId { expected, found: id }));
        }

        let upos = cols[3];
        if !is_valid_upos(upos) {
            return Err(err(lineno, ParseErrorKind::InvalidUpos(upos.to_owned())));
        }
        let feats = if cols[5] == "_" {
            Vec::new()
        } else {
            cols[5]
                .split('|')
                .map(|kv| match kv.split_once('=') {
                    Some((k, v)) if !k.is_empty() && !v.is_empty() => Some((k.to_owned(), v.to_owned())),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(lineno, ParseErrorKind::InvalidFeats(cols[5].to_owned())))?
        };
        let head = cols[6]
            .bytes()
            .all(|b| b.is_ascii_digit())
            .then(|| cols[6].parse::<usize>().ok())
            .flatten()
            .ok_or_else(|| err(lineno, ParseErrorKind::InvalidHead(cols[6].to_owned())))?;
        let deprel: DepLabel = cols[7].parse().map_err(|e| err(lineno, ParseErrorKind::Label(e)))?;

        tokens.push(Token {
            id,
            form: cols[1].to_owned(),
            lemma: cols[2].to_owned(),
            upos: upos.to_owned(),
            xpos: (cols[4] != "_").then(|| cols[4].to_owned()),
            feats,
            head,
            deprel,
            deps: cols[8].to_owned(),
            misc: cols[9].to_owned(),
        });
        token_lines.push(lineno);
    }

    let first_line = lines.first().map_or(0, |(l, _)| *l);
    let sentence = Sentence::new(sent_id.unwrap_or_else(|| ordinal.to_string()), tokens).map_err(|e| {
        let line = match &e {
            TreeError::SelfLoop(id)
            | TreeError::HeadOutOfRange { id, .. }
            | TreeError::RootLabel { id, .. }
            | TreeError::Cycle(id)
            | TreeError::Upos { id, .. }
            | TreeError::MultipleRoots(_, id) => token_lines.get(id - 1).copied().unwrap_or(first_line),
            _ => first_line,
        };
        err(line, ParseErrorKind::Tree(e))
    })?;
    Ok(sentence.with_text(text).with_annotations(comments, inert))
}

fn write_sentence(out: &mut String, sentence: &Sentence) {
    let _ = writeln!(out, "# sent_id = {}", sentence.sent_id());
    if let Some(text) = sentence.text() {
        let _ = writeln!(out, "# text = {text}");
    }
    for comment in sentence.comments() {
        let _ = writeln!(out, "#{comment}");
    }
    let mut inert = sentence.inert_lines().iter().peekable();
    for (i, tok) in sentence.tokens().iter().enumerate() {
        while let Some(line) = inert.next_if(|l| l.position <= i) {
            out.push_str(&line.line);
            out.push('\n');
        }
        let feats = if tok.feats.is_empty() {
            "_".to_owned()
        } else {
            tok.feats
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("|")
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            tok.id,
            tok.form,
            tok.lemma,
            tok.upos,
            tok.xpos.as_deref().unwrap_or("_"),
            feats,
            tok.head,
            tok.deprel,
            tok.deps,
            tok.misc
        );
    }
    for line in inert {
        out.push_str(&line.line);
        out.push('\n');
    }
    out.push('\n');
}

/// Canonical CoNLL-U text: `sent_id`, then `text`, then remaining comments,
/// LF line endings, one blank line after every sentence.
pub fn serialize_conllu(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        write_sentence(&mut out, sentence);
    }
    out
}

pub fn write_conllu<W: Write>(mut writer: W, sentences: &[Sentence]) -> io::Result<()> {
    let mut buf = String::new();
    for sentence in sentences {
        buf.clear();
        write_sentence(&mut buf, sentence);
        writer.write_all(buf.as_bytes())?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const JAPANESE_COMPANY: &str = "# sent_id = fig1-en\n# text = Japanese company\n\
        1\tJapanese\tJapanese\tADJ\tJJ\tDegree=Pos\t2\tamod\t_\t_\n\
        2\tcompany\tcompany\tNOUN\tNN\tNumber=Sing\t0\troot\t_\tSpaceAfter=No\n\n";

    #[test]
    fn japanese_company_round_trips_bytewise() {
        let tb = parse_str(JAPANESE_COMPANY, ParseMode::Strict).unwrap();
        assert_eq!(tb.sentences.len(), 1);
        let s = &tb.sentences[0];
        assert_eq!(s.sent_id(), "fig1-en");
        assert_eq!(s.text(), Some("Japanese company"));
        assert!(s.has_edge(2, 1));
        assert!(s.has_edge(0, 2));
        assert_eq!(s.token(1).unwrap().deprel.to_string(), "amod");
        assert_eq!(serialize_conllu(&tb.sentences), JAPANESE_COMPANY);
    }

    #[test]
    fn empty_input() {
        assert!(parse_str("", ParseMode::Strict).unwrap().sentences.is_empty());
        assert!(parse_str("\n\n\r\n", ParseMode::Strict).unwrap().sentences.is_empty());
        assert_eq!(serialize_conllu(&[]), "");
    }

    #[test]
    fn crlf_accepted_lf_emitted() {
        let crlf = JAPANESE_COMPANY.replace('\n', "\r\n");
        let tb = parse_str(&crlf, ParseMode::Strict).unwrap();
        assert_eq!(serialize_conllu(&tb.sentences), JAPANESE_COMPANY);
    }

    #[test]
    fn multiword_and_empty_nodes_are_inert() {
        let src = "# sent_id = mw\n\
            1-2\tvámonos\t_\t_\t_\t_\t_\t_\t_\t_\n\
            1\tvamos\tir\tVERB\t_\t_\t0\troot\t_\t_\n\
            2\tnos\tnosotros\tPRON\t_\t_\t1\tobj\t_\t_\n\
            2.1\tgone\tgo\tVERB\t_\t_\t_\t_\t1:conj\t_\n\
            3\t!\t!\tPUNCT\t_\t_\t1\tpunct\t_\t_\n\n";
        let tb = parse_str(src, ParseMode::Strict).unwrap();
        let s = &tb.sentences[0];
        assert_eq!(s.len(), 3);
        assert_eq!(s.inert_lines().len(), 2);
        assert_eq!(s.inert_lines()[0].position, 0);
        assert_eq!(s.inert_lines()[1].position, 2);
        assert_eq!(serialize_conllu(&tb.sentences), src);
    }

    #[test]
    fn subtype_and_feats_preserved() {
        let src = "# sent_id = poss\n\
            1\this\the\tPRON\tPRP$\tGender=Masc|Poss=Yes\t2\tnmod:poss\t_\t_\n\
            2\tplans\tplan\tNOUN\tNNS\tNumber=Plur\t0\troot\t_\t_\n\n";
        let tb = parse_str(src, ParseMode::Strict).unwrap();
        let out = serialize_conllu(&tb.sentences);
        assert!(out.contains("\tnmod:poss\t"));
        assert_eq!(out, src);
    }

    #[test]
    fn missing_sent_id_uses_ordinal() {
        let src = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\t_\t_\t0\troot\t_\t_\n";
        let tb = parse_str(src, ParseMode::Strict).unwrap();
        let ids: Vec<_> = tb.sentences.iter().map(Sentence::sent_id).collect();
        assert_eq!(ids, ["1", "2"]);
        let again = parse_str(&serialize_conllu(&tb.sentences), ParseMode::Strict).unwrap();
        assert_eq!(again.sentences, tb.sentences);
    }

    fn kind(src: &str) -> (usize, usize, ParseErrorKind) {
        let e = parse_str(src, ParseMode::Strict).unwrap_err();
        (e.sentence, e.line, e.kind)
    }

    #[test]
    fn error_kinds_with_positions() {
        let ok = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n";
        assert_eq!(
            kind(&format!("{ok}1\ta\ta\tX\t_\t_\t0\n")),
            (2, 3, ParseErrorKind::ColumnCount(7))
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\tzero\troot\t_\t_\n"),
            (1, 1, ParseErrorKind::InvalidHead("zero".into()))
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\t-1\troot\t_\t_\n"),
            (1, 1, ParseErrorKind::InvalidHead("-1".into()))
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n1\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n"),
            (1, 2, ParseErrorKind::DuplicateId(1))
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n"),
            (1, 2, ParseErrorKind::GappedId { expected: 2, found: 3 })
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n"),
            (1, 1, ParseErrorKind::Tree(TreeError::NoRoot))
        );
        assert_eq!(
            kind("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n"),
            (1, 2, ParseErrorKind::Tree(TreeError::MultipleRoots(1, 2)))
        );
        assert_eq!(
            kind("1\ta\ta\tX\tx\tNoEquals\t0\troot\t_\t_\n"),
            (1, 1, ParseErrorKind::InvalidFeats("NoEquals".into()))
        );
        assert!(matches!(
            kind("x\ta\ta\tX\t_\t_\t0\troot\t_\t_\n").2,
            ParseErrorKind::InvalidId(_)
        ));
        assert!(matches!(
            kind("1\ta\ta\tNOPE\t_\t_\t0\troot\t_\t_\n").2,
            ParseErrorKind::InvalidUpos(_)
        ));
    }

    #[test]
    fn lenient_mode_skips_bad_sentences() {
        let good = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n";
        let cyclic =
            "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t3\tdep\t_\t_\n3\tc\tc\tX\t_\t_\t2\tdep\t_\t_\n\n";
        let src = format!("{good}{good}{cyclic}{good}");
        let tb = parse_str(&src, ParseMode::Lenient).unwrap();
        assert_eq!(tb.sentences.len(), 3);
        assert_eq!(tb.diagnostics.len(), 1);
        assert_eq!(tb.diagnostics[0].sentence, 3);
        assert!(matches!(
            tb.diagnostics[0].kind,
            ParseErrorKind::Tree(TreeError::Cycle(_))
        ));
        assert!(parse_str(&src, ParseMode::Strict).is_err());
    }

    #[test]
    fn invalid_utf8_is_io_error() {
        let bytes: &[u8] = b"1\t\xff\ta\tX\t_\t_\t0\troot\t_\t_\n";
        let e = parse_conllu(bytes, ParseMode::Lenient).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Io(_)));
    }
}
