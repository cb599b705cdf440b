//! Text formats: the line-oriented network format, partition specs, weighted
//! edge lists and the CSV files for schedules and trajectories.
//!
//! Network format, one statement per line, `#` to end of line is a comment:
//!
//! ```text
//! species B A00 A01 A10 A11
//! bind1: A00 + B -> A10 , [1.5 : 2.5]
//! A10 -> A00 + B , 0.5
//! 2 X -> 0 , 1e-3
//! init A00 = 1, B = 2
//! partition {B} {A00} {A01 A10}
//! ```
//!
//! Species used in reactions but never declared are registered in order of first
//! appearance. Species missing from every `partition` brace form one extra block.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Ccrn, ModelError, Multiset, Partition, RateInterval};
use crate::ode::{ControlSchedule, Trajectory};
use crate::scalar::Scalar;

const KEYWORDS: [&str; 3] = ["species", "init", "partition"];

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("negative rate {0}")]
    NegativeRate(String),
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    InvertedInterval { lo: String, hi: String },
    #[error("duplicate species declaration `{0}`")]
    DuplicateSpecies(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("{0}")]
    Invalid(String),
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

/// A parsed network together with its optional initial partition.
#[derive(Clone, Debug)]
pub struct ModelDocument<S> {
    pub ccrn: Ccrn<S>,
    pub initial_partition: Option<Partition>,
    pub source: Option<PathBuf>,
    /// Source line of each reaction, by reaction id (empty for generated models).
    pub reaction_lines: Vec<usize>,
}

impl<S: Scalar> ModelDocument<S> {
    pub fn new(ccrn: Ccrn<S>, initial_partition: Option<Partition>) -> Self {
        Self { ccrn, initial_partition, source: None, reaction_lines: Vec::new() }
    }

    /// The declared initial partition, or the single block of all species.
    pub fn initial_partition_or_trivial(&self) -> Partition {
        self.initial_partition.clone().unwrap_or_else(|| Partition::trivial(self.ccrn.num_species()))
    }
}

/// Structural equality: metadata is ignored.
impl<S: Scalar> PartialEq for ModelDocument<S> {
    fn eq(&self, other: &Self) -> bool {
        self.ccrn == other.ccrn && self.initial_partition == other.initial_partition
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Num(&'a str),
    Arrow,
    Plus,
    Comma,
    Colon,
    Eq,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
}

/// Token with its 1-based column.
type Spanned<'a> = (Tok<'a>, usize);

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Spanned<'_>>, ParseError> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = line[..i].chars().count() + 1;
        match c {
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => break,
            b'+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            b':' => {
                out.push((Tok::Colon, col));
                i += 1;
            }
            b'=' => {
                out.push((Tok::Eq, col));
                i += 1;
            }
            b'[' => {
                out.push((Tok::LBracket, col));
                i += 1;
            }
            b']' => {
                out.push((Tok::RBracket, col));
                i += 1;
            }
            b'{' => {
                out.push((Tok::LBrace, col));
                i += 1;
            }
            b'}' => {
                out.push((Tok::RBrace, col));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Arrow, col));
                i += 2;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(&line[start..i]), col));
            }
            b'0'..=b'9' | b'.' | b'-' => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let d = bytes[i];
                    let exp_sign = (d == b'+' || d == b'-')
                        && matches!(bytes[i - 1], b'e' | b'E')
                        && !line[start..i - 1].contains(['e', 'E']);
                    if d.is_ascii_alphanumeric() || d == b'.' || d == b'_' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Num(&line[start..i]), col));
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or('?');
                return Err(err(lineno, col, ParseErrorKind::Syntax(format!("unexpected character `{ch}`"))));
            }
        }
    }
    Ok(out)
}

struct Cursor<'t, 'a> {
    toks: &'t [Spanned<'a>],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'t, 'a> Cursor<'t, 'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn next(&mut self) -> Option<Spanned<'a>> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        err(self.line, self.col(), ParseErrorKind::Syntax(msg.into()))
    }

    fn expect(&mut self, tok: Tok<'a>, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<(&'a str, usize), ParseError> {
        match self.next() {
            Some((Tok::Ident(name), col)) => {
                if KEYWORDS.contains(&name) {
                    Err(err(self.line, col, ParseErrorKind::Reserved(name.to_string())))
                } else {
                    Ok((name, col))
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected species name"))
            }
        }
    }

    fn number<S: Scalar>(&mut self) -> Result<(S, &'a str, usize), ParseError> {
        match self.next() {
            Some((Tok::Num(text), col)) => {
                let value = text
                    .parse::<S>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(self.line, col, ParseErrorKind::BadNumber(text.to_string())))?;
                Ok((value, text, col))
            }
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected number"))
            }
        }
    }
}

/// Where a name was seen, for resolving after all lines are read.
struct NameRef<'a> {
    name: &'a str,
    line: usize,
    col: usize,
}

/// Parses a network document.
pub fn parse_model<S: Scalar>(text: &str) -> Result<ModelDocument<S>, ParseError> {
    let mut builder = Ccrn::<S>::builder();
    let mut declared: HashMap<&str, ()> = HashMap::new();
    let mut reaction_lines = Vec::new();
    let mut inits: Vec<(NameRef<'_>, S)> = Vec::new();
    let mut partition: Option<Vec<Vec<NameRef<'_>>>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks: &toks, pos: 0, line: lineno, end_col: raw.trim_end().chars().count() + 1 };
        match cur.peek() {
            Some(Tok::Ident("species")) => {
                cur.next();
                while !cur.at_end() {
                    let (name, col) = cur.ident()?;
                    if declared.insert(name, ()).is_some() {
                        return Err(err(lineno, col, ParseErrorKind::DuplicateSpecies(name.to_string())));
                    }
                    builder.intern(name);
                }
            }
            Some(Tok::Ident("init")) => {
                cur.next();
                loop {
                    let (name, col) = cur.ident()?;
                    cur.expect(Tok::Eq, "`=`")?;
                    let (value, text, vcol) = cur.number::<S>()?;
                    if value < S::zero() {
                        return Err(err(
                            lineno,
                            vcol,
                            ParseErrorKind::Invalid(format!("negative initial value {text}")),
                        ));
                    }
                    inits.push((NameRef { name, line: lineno, col }, value));
                    if cur.at_end() {
                        break;
                    }
                    cur.expect(Tok::Comma, "`,` or end of line")?;
                }
            }
            Some(Tok::Ident("partition")) => {
                cur.next();
                let blocks = partition.get_or_insert_with(Vec::new);
                if cur.at_end() {
                    return Err(cur.syntax("expected `{`"));
                }
                while !cur.at_end() {
                    cur.expect(Tok::LBrace, "`{`")?;
                    let mut block = Vec::new();
                    while cur.peek() != Some(&Tok::RBrace) {
                        if cur.at_end() {
                            return Err(cur.syntax("expected `}`"));
                        }
                        let (name, col) = cur.ident()?;
                        block.push(NameRef { name, line: lineno, col });
                    }
                    cur.next();
                    if block.is_empty() {
                        return Err(cur.syntax("empty partition block"));
                    }
                    blocks.push(block);
                }
            }
            _ => {
                parse_reaction(&mut cur, &mut builder)?;
                reaction_lines.push(lineno);
            }
        }
    }

    for (r, value) in &inits {
        let s = builder
            .lookup(r.name)
            .ok_or_else(|| err(r.line, r.col, ParseErrorKind::UnknownSpecies(r.name.to_string())))?;
        builder.set_initial(s, *value).map_err(|e| err(r.line, r.col, ParseErrorKind::Invalid(e.to_string())))?;
    }

    let n = builder.num_species();
    let initial_partition = match partition {
        None => None,
        Some(blocks) => {
            let mut seen = vec![false; n];
            let mut resolved = Vec::with_capacity(blocks.len() + 1);
            for block in &blocks {
                let mut ids = Vec::with_capacity(block.len());
                for r in block {
                    let s = builder
                        .lookup(r.name)
                        .ok_or_else(|| err(r.line, r.col, ParseErrorKind::UnknownSpecies(r.name.to_string())))?;
                    if std::mem::replace(&mut seen[s], true) {
                        return Err(err(
                            r.line,
                            r.col,
                            ParseErrorKind::Invalid(format!("species `{}` in two partition blocks", r.name)),
                        ));
                    }
                    ids.push(s);
                }
                resolved.push(ids);
            }
            let rest: Vec<usize> = (0..n).filter(|&s| !seen[s]).collect();
            if !rest.is_empty() {
                resolved.push(rest);
            }
            let line = blocks[0][0].line;
            Some(
                Partition::from_blocks(n, resolved)
                    .map_err(|e| err(line, 1, ParseErrorKind::Invalid(e.to_string())))?,
            )
        }
    };

    let ccrn = builder.build().map_err(|e| err(0, 0, ParseErrorKind::Invalid(e.to_string())))?;
    Ok(ModelDocument { ccrn, initial_partition, source: None, reaction_lines })
}

fn parse_reaction<S: Scalar>(
    cur: &mut Cursor<'_, '_>,
    builder: &mut crate::model::CcrnBuilder<S>,
) -> Result<(), ParseError> {
    let label = match (cur.toks.first(), cur.toks.get(1)) {
        (Some((Tok::Ident(name), col)), Some((Tok::Colon, _))) => {
            if KEYWORDS.contains(name) {
                return Err(err(cur.line, *col, ParseErrorKind::Reserved(name.to_string())));
            }
            cur.pos = 2;
            Some(name.to_string())
        }
        _ => None,
    };
    let reactant = parse_multiset(cur, builder)?;
    cur.expect(Tok::Arrow, "`->`")?;
    let product = parse_multiset(cur, builder)?;
    cur.expect(Tok::Comma, "`,` before the rate")?;
    let rate = parse_rate::<S>(cur)?;
    if !cur.at_end() {
        return Err(cur.syntax("unexpected text after rate"));
    }
    builder.add_reaction(label, reactant, product, rate);
    Ok(())
}

fn parse_multiset<S: Scalar>(
    cur: &mut Cursor<'_, '_>,
    builder: &mut crate::model::CcrnBuilder<S>,
) -> Result<Multiset, ParseError> {
    if let Some(Tok::Num(text)) = cur.peek() {
        if *text == "0" && !matches!(cur.toks.get(cur.pos + 1).map(|t| &t.0), Some(Tok::Ident(_))) {
            cur.next();
            return Ok(Multiset::empty());
        }
    }
    let mut pairs = Vec::new();
    loop {
        let count = match cur.peek() {
            Some(Tok::Num(text)) => {
                let col = cur.col();
                let text = *text;
                cur.next();
                match text.parse::<u32>() {
                    Ok(c) if c > 0 => c,
                    _ => {
                        return Err(err(
                            cur.line,
                            col,
                            ParseErrorKind::Syntax(format!("stoichiometry `{text}` must be a positive integer")),
                        ))
                    }
                }
            }
            _ => 1,
        };
        let (name, _) = cur.ident()?;
        pairs.push((builder.intern(name), count));
        if cur.peek() == Some(&Tok::Plus) {
            cur.next();
        } else {
            break;
        }
    }
    Ok(Multiset::from_counts(pairs))
}

fn parse_rate<S: Scalar>(cur: &mut Cursor<'_, '_>) -> Result<RateInterval<S>, ParseError> {
    let line = cur.line;
    let check = |(v, text, col): (S, &str, usize)| -> Result<S, ParseError> {
        if v < S::zero() {
            Err(err(line, col, ParseErrorKind::NegativeRate(text.to_string())))
        } else {
            Ok(v)
        }
    };
    if cur.peek() == Some(&Tok::LBracket) {
        let open = cur.col();
        cur.next();
        let lo_tok = cur.number::<S>()?;
        let lo_text = lo_tok.1.to_string();
        let lo = check(lo_tok)?;
        cur.expect(Tok::Colon, "`:` inside interval")?;
        let hi_tok = cur.number::<S>()?;
        let hi_text = hi_tok.1.to_string();
        let hi = check(hi_tok)?;
        cur.expect(Tok::RBracket, "`]`")?;
        RateInterval::new(lo, hi)
            .map_err(|_| err(line, open, ParseErrorKind::InvertedInterval { lo: lo_text, hi: hi_text }))
    } else {
        let k = check(cur.number::<S>()?)?;
        Ok(RateInterval::point(k).expect("nonnegative finite rate"))
    }
}

/// Serializes a document; the output reparses to a structurally equal document.
pub fn serialize_model<S: Scalar>(doc: &ModelDocument<S>) -> String {
    let ccrn = &doc.ccrn;
    let names = ccrn.species();
    let mut out = String::from("species");
    for s in names {
        out.push(' ');
        out.push_str(&s.name);
    }
    out.push('\n');
    for r in ccrn.reactions() {
        if let Some(label) = &r.label {
            let _ = write!(out, "{label}: ");
        }
        let _ = write!(out, "{} -> {} , ", r.reactant.display(names), r.product.display(names));
        if r.rate.is_degenerate() {
            let _ = writeln!(out, "{}", r.rate.lo());
        } else {
            let _ = writeln!(out, "[{} : {}]", r.rate.lo(), r.rate.hi());
        }
    }
    if let Some(init) = ccrn.initial() {
        out.push_str("init ");
        let terms: Vec<String> = init.iter().enumerate().map(|(s, v)| format!("{} = {}", names[s].name, v)).collect();
        out.push_str(&terms.join(", "));
        out.push('\n');
    }
    if let Some(part) = &doc.initial_partition {
        out.push_str(&serialize_partition(part, ccrn));
    }
    out
}

/// `partition {..} {..}` line listing every block explicitly.
pub fn serialize_partition<S: Scalar>(part: &Partition, ccrn: &Ccrn<S>) -> String {
    let mut out = String::from("partition");
    for block in part.blocks() {
        out.push_str(" {");
        let names: Vec<&str> = block.iter().map(|&s| ccrn.species_name(s)).collect();
        out.push_str(&names.join(" "));
        out.push('}');
    }
    out.push('\n');
    out
}

/// Reads a partition file: `{A B} {C}` groups, optionally prefixed by the
/// `partition` keyword and spread over several lines. Omitted species form an
/// extra block.
pub fn parse_partition<S: Scalar>(text: &str, ccrn: &Ccrn<S>) -> Result<Partition, ParseError> {
    let n = ccrn.num_species();
    let mut seen = vec![false; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokenize(raw, lineno)?;
        let mut cur = Cursor { toks: &toks, pos: 0, line: lineno, end_col: raw.chars().count() + 1 };
        if cur.peek() == Some(&Tok::Ident("partition")) {
            cur.next();
        }
        while !cur.at_end() {
            cur.expect(Tok::LBrace, "`{`")?;
            let mut block = Vec::new();
            while cur.peek() != Some(&Tok::RBrace) {
                if cur.at_end() {
                    return Err(cur.syntax("expected `}`"));
                }
                let (name, col) = cur.ident()?;
                let s = ccrn
                    .species_index(name)
                    .ok_or_else(|| err(lineno, col, ParseErrorKind::UnknownSpecies(name.to_string())))?;
                if std::mem::replace(&mut seen[s], true) {
                    return Err(err(
                        lineno,
                        col,
                        ParseErrorKind::Invalid(format!("species `{name}` in two partition blocks")),
                    ));
                }
                block.push(s);
            }
            cur.next();
            if block.is_empty() {
                return Err(cur.syntax("empty partition block"));
            }
            blocks.push(block);
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&s| !seen[s]).collect();
    if !rest.is_empty() {
        blocks.push(rest);
    }
    Partition::from_blocks(n, blocks).map_err(|e: ModelError| err(0, 0, ParseErrorKind::Invalid(e.to_string())))
}

/// Weighted directed graph with interned node labels.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph<S> {
    pub labels: Vec<String>,
    /// `(source, destination, weight)` by node index.
    pub edges: Vec<(usize, usize, S)>,
}

impl<S: Scalar> WeightedGraph<S> {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }
}

/// Parses whitespace-separated `src dst weight` lines.
///
/// With `undirected` set every line yields both directions at the same weight.
pub fn parse_edge_list<S: Scalar>(text: &str, undirected: bool) -> Result<WeightedGraph<S>, ParseError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |name: &str| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        labels.push(name.to_string());
        index.insert(name.to_string(), labels.len() - 1);
        labels.len() - 1
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<(usize, &str)> =
            content.split_whitespace().map(|f| (f.as_ptr() as usize - content.as_ptr() as usize + 1, f)).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(err(
                lineno,
                1,
                ParseErrorKind::Syntax(format!("expected `src dst weight`, found {} fields", fields.len())),
            ));
        }
        let (wcol, wtext) = fields[2];
        let w: S = wtext
            .parse::<S>()
            .ok()
            .filter(|w| w.is_finite())
            .ok_or_else(|| err(lineno, wcol, ParseErrorKind::BadNumber(wtext.to_string())))?;
        if w < S::zero() {
            return Err(err(lineno, wcol, ParseErrorKind::NegativeWeight(wtext.to_string())));
        }
        let a = intern(fields[0].1);
        let b = intern(fields[1].1);
        edges.push((a, b, w));
        if undirected {
            edges.push((b, a, w));
        }
    }
    Ok(WeightedGraph { labels, edges })
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {msg}")]
    Content { row: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Schedule(#[from] crate::ode::OdeError),
}

/// Column name of a reaction: its label, or `r<id>`.
pub fn reaction_column<S: Scalar>(ccrn: &Ccrn<S>, id: usize) -> String {
    ccrn.reactions()[id].label.clone().unwrap_or_else(|| format!("r{id}"))
}

/// `t_start,<reaction columns>` with one row per segment.
pub fn write_schedule_csv<S: Scalar, W: std::io::Write>(
    sched: &ControlSchedule<S>,
    ccrn: &Ccrn<S>,
    out: W,
) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_start".to_string()];
    header.extend((0..ccrn.num_reactions()).map(|r| reaction_column(ccrn, r)));
    w.write_record(&header)?;
    for (t, values) in sched.breakpoints().iter().zip(sched.values()) {
        let mut row = vec![t.to_string()];
        row.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a schedule written by [`write_schedule_csv`]; columns are matched to
/// reactions by position and checked against each reaction's interval.
pub fn parse_schedule_csv<S: Scalar, R: std::io::Read>(
    input: R,
    ccrn: &Ccrn<S>,
) -> Result<ControlSchedule<S>, CsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let width = rd.headers()?.len();
    if width != ccrn.num_reactions() + 1 {
        return Err(CsvError::Content {
            row: 0,
            msg: format!("expected {} columns, found {width}", ccrn.num_reactions() + 1),
        });
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let parse = |f: &str| -> Result<S, CsvError> {
            f.trim().parse::<S>().map_err(|_| CsvError::Content { row, msg: format!("invalid number `{f}`") })
        };
        breakpoints.push(parse(&rec[0])?);
        values.push(rec.iter().skip(1).map(parse).collect::<Result<Vec<S>, _>>()?);
    }
    Ok(ControlSchedule::new(ccrn, breakpoints, values)?)
}

/// `t,<species names>` with one row per time point.
pub fn write_trajectory_csv<S: Scalar, W: std::io::Write>(
    traj: &Trajectory<S>,
    names: &[String],
    out: W,
) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![t.to_string()];
        row.extend(state.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Column names, times and state rows of a trajectory file.
pub type TrajectoryColumns<S> = (Vec<String>, Vec<S>, Vec<Vec<S>>);

/// Reads `t,<values...>` rows into times and states.
pub fn parse_trajectory_csv<S: Scalar, R: std::io::Read>(input: R) -> Result<TrajectoryColumns<S>, CsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let names: Vec<String> = rd.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let mut vals = rec.iter().map(|f| {
            f.trim().parse::<S>().map_err(|_| CsvError::Content { row, msg: format!("invalid number `{f}`") })
        });
        times.push(vals.next().ok_or(CsvError::Content { row, msg: "empty row".into() })??);
        states.push(vals.collect::<Result<Vec<S>, _>>()?);
    }
    Ok((names, times, states))
}

/// Two-column `t,residual` log.
pub fn write_residual_csv<S: Scalar, W: std::io::Write>(rows: &[(S, S)], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "residual"])?;
    for (t, r) in rows {
        w.write_record([t.to_string(), r.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
