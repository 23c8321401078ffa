//! Precedence-bounded grammars: sorts, leveled form regexes, tiles and molds.
//!
//! A grammar maps each `(sort, level)` pair to a regex over symbols. Literal
//! terminals and token-class references both become tiles; a tile's mold is
//! its one-hole context `(sort, level, position)`, where `position` counts
//! symbol occurrences left to right within the level's combined regex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

pub type SortId = usize;
pub type TileId = usize;

/// Forms longer than this are not materialized into productions.
pub const FORM_CAP: usize = 12;

/// Precedence values. `Zero` is the grout level: looser than every declared
/// level of every sort, tighter than `Bottom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precedence {
    Bottom,
    Zero,
    Level(u32),
    Top,
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precedence::Bottom => write!(f, "⊥"),
            Precedence::Zero => write!(f, "0"),
            Precedence::Level(n) => write!(f, "L{n}"),
            Precedence::Top => write!(f, "⊤"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assoc {
    Left,
    Right,
}

/// Regular expressions over an arbitrary symbol type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regex<S> {
    Empty,
    Sym(S),
    Alt(Box<Regex<S>>, Box<Regex<S>>),
    Seq(Box<Regex<S>>, Box<Regex<S>>),
    Star(Box<Regex<S>>),
}

impl<S> Regex<S> {
    pub fn alt(a: Regex<S>, b: Regex<S>) -> Self {
        Regex::Alt(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Regex<S>, b: Regex<S>) -> Self {
        Regex::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(a: Regex<S>) -> Self {
        Regex::Star(Box::new(a))
    }

    /// Left-nested sequence; `Empty` for no items.
    pub fn seq_all(items: Vec<Regex<S>>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Regex::Empty,
            Some(first) => it.fold(first, Regex::seq),
        }
    }

    /// Left-nested alternation; `Empty` for no items.
    pub fn alt_all(items: Vec<Regex<S>>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Regex::Empty,
            Some(first) => it.fold(first, Regex::alt),
        }
    }

    /// Symbol occurrences in left-to-right order.
    pub fn symbols(&self) -> Vec<&S> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a S>) {
        match self {
            Regex::Empty => {}
            Regex::Sym(s) => out.push(s),
            Regex::Alt(a, b) | Regex::Seq(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Regex::Star(a) => a.collect(out),
        }
    }

    pub fn map<T>(&self, f: &mut impl FnMut(&S) -> T) -> Regex<T> {
        match self {
            Regex::Empty => Regex::Empty,
            Regex::Sym(s) => Regex::Sym(f(s)),
            Regex::Alt(a, b) => Regex::alt(a.map(f), b.map(f)),
            Regex::Seq(a, b) => Regex::seq(a.map(f), b.map(f)),
            Regex::Star(a) => Regex::star(a.map(f)),
        }
    }
}

impl<S: Clone + Ord> Regex<S> {
    /// Every string of the regex's language with length at most `max_len`.
    pub fn language(&self, max_len: usize) -> BTreeSet<Vec<S>> {
        match self {
            Regex::Empty => BTreeSet::from([Vec::new()]),
            Regex::Sym(s) => {
                if max_len >= 1 {
                    BTreeSet::from([vec![s.clone()]])
                } else {
                    BTreeSet::new()
                }
            }
            Regex::Alt(a, b) => {
                let mut out = a.language(max_len);
                out.extend(b.language(max_len));
                out
            }
            Regex::Seq(a, b) => concat(&a.language(max_len), &b.language(max_len), max_len),
            Regex::Star(a) => {
                let body = a.language(max_len);
                let mut out = BTreeSet::from([Vec::new()]);
                let mut frontier = out.clone();
                while !frontier.is_empty() {
                    let next = concat(&frontier, &body, max_len);
                    frontier = next.into_iter().filter(|w| !out.contains(w)).collect();
                    out.extend(frontier.iter().cloned());
                }
                out
            }
        }
    }
}

fn concat<S: Clone + Ord>(xs: &BTreeSet<Vec<S>>, ys: &BTreeSet<Vec<S>>, max_len: usize) -> BTreeSet<Vec<S>> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() <= max_len {
                let mut w = x.clone();
                w.extend(y.iter().cloned());
                out.insert(w);
            }
        }
    }
    out
}

/// A grammar symbol after mold inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Tile(TileId),
    Sort(SortId),
}

pub type FormRegex = Regex<Symbol>;

/// A tile's one-hole context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mold {
    pub sort: SortId,
    pub prec: u32,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Lit(String),
    /// Index into `Pbg::token_classes`.
    Class(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileDef {
    pub label: Label,
    pub mold: Mold,
}

/// A named lexical class; `regex` is anchored at both ends.
#[derive(Clone, Debug)]
pub struct TokenClass {
    pub name: String,
    pub pattern: String,
    pub regex: regex::Regex,
}

impl TokenClass {
    pub fn new(name: &str, pattern: &str) -> Result<Self, GrammarError> {
        let regex = regex::Regex::new(&format!("^(?:{pattern})$")).map_err(|e| GrammarError::BadPattern {
            class: name.to_string(),
            msg: e.to_string(),
        })?;
        Ok(TokenClass { name: name.to_string(), pattern: pattern.to_string(), regex })
    }

    pub fn matches(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub assoc: Option<Assoc>,
    pub regex: FormRegex,
}

/// A precedence-bounded grammar. Immutable once built.
#[derive(Clone, Debug)]
pub struct Pbg {
    pub root: SortId,
    pub sorts: Vec<String>,
    pub token_classes: Vec<TokenClass>,
    pub tiles: Vec<TileDef>,
    pub rules: BTreeMap<(SortId, u32), Rule>,
}

impl Pbg {
    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.sorts[s]
    }

    pub fn levels(&self, s: SortId) -> Vec<u32> {
        self.rules.keys().filter(|(so, _)| *so == s).map(|(_, l)| *l).collect()
    }

    pub fn assoc(&self, s: SortId, level: u32) -> Option<Assoc> {
        self.rules.get(&(s, level)).and_then(|r| r.assoc)
    }

    /// Display text of a tile: its literal, or `$class`.
    pub fn tile_text(&self, t: TileId) -> String {
        match &self.tiles[t].label {
            Label::Lit(s) => s.clone(),
            Label::Class(c) => format!("${}", self.token_classes[*c].name),
        }
    }

    /// Whether `text` can stand for tile `t`.
    pub fn tile_accepts(&self, t: TileId, text: &str) -> bool {
        match &self.tiles[t].label {
            Label::Lit(s) => s == text,
            Label::Class(c) => self.token_classes[*c].matches(text),
        }
    }

    pub fn tiles_with_label(&self, label: &Label) -> Vec<TileId> {
        (0..self.tiles.len()).filter(|&t| &self.tiles[t].label == label).collect()
    }

    pub fn symbol_text(&self, sym: Symbol) -> String {
        match sym {
            Symbol::Tile(t) => match &self.tiles[t].label {
                Label::Lit(s) => format!("'{s}'"),
                Label::Class(c) => format!("${}", self.token_classes[*c].name),
            },
            Symbol::Sort(s) => self.sorts[s].clone(),
        }
    }

    pub fn form_text(&self, form: &[Symbol]) -> String {
        form.iter().map(|s| self.symbol_text(*s)).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("grammar file syntax error at line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error("form syntax error in sort {sort} level {prec}, form {form:?} at column {column}: {msg}")]
    FormSyntax { sort: String, prec: u32, form: String, column: usize, msg: String },
    #[error("unknown sort {name:?} referenced from sort {from}")]
    UnknownSort { name: String, from: String },
    #[error("unknown token class ${name} referenced from sort {from}")]
    UnknownClass { name: String, from: String },
    #[error("duplicate entry for sort {sort} level {prec}")]
    DuplicateLevel { sort: String, prec: u32 },
    #[error("no root sort")]
    NoRootSort,
    #[error("bad pattern for token class {class}: {msg}")]
    BadPattern { class: String, msg: String },
}

// ───────────────────────────── raw grammars ─────────────────────────────

/// Symbols of a grammar whose terminals are still bare strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RawSym {
    Lit(String),
    Sort(String),
    Class(String),
}

#[derive(Clone, Debug)]
pub struct RawLevel {
    pub prec: u32,
    pub assoc: Option<Assoc>,
    pub forms: Vec<Regex<RawSym>>,
}

#[derive(Clone, Debug)]
pub struct RawSort {
    pub name: String,
    pub levels: Vec<RawLevel>,
}

#[derive(Clone, Debug)]
pub struct RawGrammar {
    pub root: String,
    pub token_classes: Vec<(String, String)>,
    pub sorts: Vec<RawSort>,
}

/// Turns bare terminals into tiles molded by their occurrence.
pub fn infer_molds(raw: &RawGrammar) -> Result<Pbg, GrammarError> {
    if raw.sorts.is_empty() {
        return Err(GrammarError::NoRootSort);
    }
    let sorts: Vec<String> = raw.sorts.iter().map(|s| s.name.clone()).collect();
    let root = sorts.iter().position(|s| *s == raw.root).ok_or(GrammarError::NoRootSort)?;
    let token_classes = raw
        .token_classes
        .iter()
        .map(|(n, p)| TokenClass::new(n, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tiles = Vec::new();
    let mut rules = BTreeMap::new();
    for (sid, rs) in raw.sorts.iter().enumerate() {
        for lvl in &rs.levels {
            if rules.contains_key(&(sid, lvl.prec)) {
                return Err(GrammarError::DuplicateLevel { sort: rs.name.clone(), prec: lvl.prec });
            }
            let combined = Regex::alt_all(lvl.forms.clone());
            let mut position = 0usize;
            let mut err = None;
            let regex = combined.map(&mut |sym: &RawSym| {
                let here = position;
                position += 1;
                match sym {
                    RawSym::Sort(name) => match sorts.iter().position(|s| s == name) {
                        Some(s) => Symbol::Sort(s),
                        None => {
                            err.get_or_insert(GrammarError::UnknownSort { name: name.clone(), from: rs.name.clone() });
                            Symbol::Sort(0)
                        }
                    },
                    RawSym::Lit(text) => {
                        tiles.push(TileDef {
                            label: Label::Lit(text.clone()),
                            mold: Mold { sort: sid, prec: lvl.prec, position: here },
                        });
                        Symbol::Tile(tiles.len() - 1)
                    }
                    RawSym::Class(name) => match token_classes.iter().position(|c| &c.name == name) {
                        Some(c) => {
                            tiles.push(TileDef {
                                label: Label::Class(c),
                                mold: Mold { sort: sid, prec: lvl.prec, position: here },
                            });
                            Symbol::Tile(tiles.len() - 1)
                        }
                        None => {
                            err.get_or_insert(GrammarError::UnknownClass { name: name.clone(), from: rs.name.clone() });
                            Symbol::Sort(0)
                        }
                    },
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            rules.insert((sid, lvl.prec), Rule { assoc: lvl.assoc, regex });
        }
    }
    Ok(Pbg { root, sorts, token_classes, tiles, rules })
}

// ─────────────────────────── grammar file format ───────────────────────────

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrammar {
    root: String,
    #[serde(default)]
    token_classes: BTreeMap<String, String>,
    sorts: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLevel {
    prec: u32,
    #[serde(default)]
    assoc: Option<String>,
    forms: Vec<String>,
}

/// Loads a grammar from its JSON file format.
pub fn load_grammar(text: &str) -> Result<Pbg, GrammarError> {
    let json_err = |e: serde_json::Error| GrammarError::Json { line: e.line(), column: e.column(), msg: e.to_string() };
    let file: FileGrammar = serde_json::from_str(text).map_err(json_err)?;
    if file.sorts.is_empty() {
        return Err(GrammarError::NoRootSort);
    }
    let mut sorts = Vec::new();
    for (name, levels) in &file.sorts {
        let levels: Vec<FileLevel> = serde_json::from_value(levels.clone()).map_err(|e| GrammarError::Json {
            line: 0,
            column: 0,
            msg: format!("sort {name}: {e}"),
        })?;
        let mut raw_levels = Vec::new();
        for lvl in levels {
            let assoc = match lvl.assoc.as_deref() {
                None => None,
                Some("left") => Some(Assoc::Left),
                Some("right") => Some(Assoc::Right),
                Some(other) => {
                    return Err(GrammarError::Json {
                        line: 0,
                        column: 0,
                        msg: format!("sort {name}: assoc must be \"left\", \"right\" or null, not {other:?}"),
                    })
                }
            };
            let forms = lvl
                .forms
                .iter()
                .map(|f| {
                    parse_form(f).map_err(|(column, msg)| GrammarError::FormSyntax {
                        sort: name.clone(),
                        prec: lvl.prec,
                        form: f.clone(),
                        column,
                        msg,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            raw_levels.push(RawLevel { prec: lvl.prec, assoc, forms });
        }
        sorts.push(RawSort { name: name.clone(), levels: raw_levels });
    }
    if !sorts.iter().any(|s| s.name == file.root) {
        return Err(GrammarError::UnknownSort { name: file.root.clone(), from: "root".into() });
    }
    let raw = RawGrammar { root: file.root, token_classes: file.token_classes.into_iter().collect(), sorts };
    infer_molds(&raw)
}

/// Parses the form micro-syntax. Errors carry a 1-based column.
pub fn parse_form(src: &str) -> Result<Regex<RawSym>, (usize, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut p = FormParser { chars, pos: 0 };
    let r = p.alt()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err((p.pos + 1, format!("unexpected {:?}", p.chars[p.pos])));
    }
    Ok(r)
}

struct FormParser {
    chars: Vec<char>,
    pos: usize,
}

impl FormParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex<RawSym>, (usize, String)> {
        let mut r = self.seq()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.seq()?;
            r = Regex::alt(r, rhs);
        }
        Ok(r)
    }

    fn seq(&mut self) -> Result<Regex<RawSym>, (usize, String)> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.postfix()?);
        }
        Ok(Regex::seq_all(items))
    }

    fn postfix(&mut self) -> Result<Regex<RawSym>, (usize, String)> {
        let mut r = self.atom()?;
        loop {
            match self.chars.get(self.pos) {
                Some('*') => {
                    self.pos += 1;
                    r = Regex::star(r);
                }
                Some('?') => {
                    self.pos += 1;
                    r = Regex::alt(r, Regex::Empty);
                }
                _ => return Ok(r),
            }
        }
    }

    fn atom(&mut self) -> Result<Regex<RawSym>, (usize, String)> {
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return Err((self.pos + 1, "expected ')'".into()));
                }
                self.pos += 1;
                Ok(r)
            }
            Some('\'') => {
                self.pos += 1;
                let from = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos] != '\'' {
                    self.pos += 1;
                }
                if self.pos >= self.chars.len() {
                    return Err((start + 1, "unterminated literal".into()));
                }
                let text: String = self.chars[from..self.pos].iter().collect();
                self.pos += 1;
                if text.is_empty() || text.chars().any(char::is_whitespace) {
                    return Err((start + 1, "literal must be nonempty and contain no whitespace".into()));
                }
                Ok(Regex::Sym(RawSym::Lit(text)))
            }
            Some('$') => {
                self.pos += 1;
                let name = self.ident();
                if name.is_empty() {
                    return Err((self.pos + 1, "expected token class name after '$'".into()));
                }
                Ok(Regex::Sym(RawSym::Class(name)))
            }
            Some(c) if c.is_ascii_uppercase() => Ok(Regex::Sym(RawSym::Sort(self.ident()))),
            Some(c) => Err((self.pos + 1, format!("unexpected {c:?}"))),
            None => Err((self.pos + 1, "unexpected end of form".into())),
        }
    }

    fn ident(&mut self) -> String {
        let from = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_') {
            self.pos += 1;
        }
        self.chars[from..self.pos].iter().collect()
    }
}

// ─────────────────────────────── validation ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A derivable form places two sorts side by side.
    OperatorForm { sort: String, prec: u32, witness: String },
    /// Two tile definitions share label and mold.
    UniqueTiles { label: String, sort: String, prec: u32, position: usize },
    /// A form with no tile at all, such as `E` alone or the empty string.
    TilelessForm { sort: String, prec: u32, witness: String },
    /// A symbol refers to a sort, tile or class that does not exist.
    SymbolClosure { sort: String, prec: u32, detail: String },
    RootMissing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OperatorForm { sort, prec, witness } => {
                write!(f, "OperatorFormViolation in {sort} level {prec}: {witness}")
            }
            Violation::UniqueTiles { label, sort, prec, position } => {
                write!(f, "UniqueTilesViolation: {label:?} molded ({sort}, {prec}, {position}) more than once")
            }
            Violation::TilelessForm { sort, prec, witness } => {
                write!(f, "TilelessFormViolation in {sort} level {prec}: {witness:?}")
            }
            Violation::SymbolClosure { sort, prec, detail } => {
                write!(f, "SymbolClosureViolation in {sort} level {prec}: {detail}")
            }
            Violation::RootMissing => write!(f, "RootMissingViolation"),
        }
    }
}

/// Checks operator form, unique tiles, root presence and symbol closure.
pub fn validate(g: &Pbg) -> Vec<Violation> {
    let mut out = Vec::new();
    if g.root >= g.sorts.len() {
        out.push(Violation::RootMissing);
    }
    let mut seen: BTreeMap<(Label, Mold), usize> = BTreeMap::new();
    for t in &g.tiles {
        *seen.entry((t.label.clone(), t.mold)).or_default() += 1;
    }
    for ((label, mold), n) in &seen {
        if *n > 1 {
            out.push(Violation::UniqueTiles {
                label: match label {
                    Label::Lit(s) => s.clone(),
                    Label::Class(c) => format!("${}", g.token_classes.get(*c).map(|c| c.name.as_str()).unwrap_or("?")),
                },
                sort: g.sorts.get(mold.sort).cloned().unwrap_or_default(),
                prec: mold.prec,
                position: mold.position,
            });
        }
    }
    for (&(s, prec), rule) in &g.rules {
        let sort = g.sorts.get(s).cloned().unwrap_or_else(|| format!("#{s}"));
        let mut closed = true;
        for sym in rule.regex.symbols() {
            let bad = match *sym {
                Symbol::Sort(r) => (r >= g.sorts.len()).then(|| format!("sort #{r}")),
                Symbol::Tile(t) => match g.tiles.get(t) {
                    None => Some(format!("tile #{t}")),
                    Some(TileDef { label: Label::Class(c), .. }) if *c >= g.token_classes.len() => {
                        Some(format!("token class #{c}"))
                    }
                    Some(td) if td.mold.sort != s || td.mold.prec != prec => {
                        Some(format!("tile #{t} is molded for another rule"))
                    }
                    _ => None,
                },
            };
            if let Some(detail) = bad {
                closed = false;
                out.push(Violation::SymbolClosure { sort: sort.clone(), prec, detail });
            }
        }
        if !closed {
            continue;
        }
        for form in rule.regex.language(FORM_CAP) {
            let witness = g.form_text(&form);
            if form.windows(2).any(|w| matches!((w[0], w[1]), (Symbol::Sort(_), Symbol::Sort(_)))) {
                out.push(Violation::OperatorForm { sort: sort.clone(), prec, witness });
            } else if !form.iter().any(|x| matches!(x, Symbol::Tile(_))) {
                out.push(Violation::TilelessForm { sort: sort.clone(), prec, witness });
            }
        }
    }
    out
}

/// Forms of rule `(s, p)` with at most `max_len` symbols.
pub fn enumerate_forms(g: &Pbg, s: SortId, p: Precedence, max_len: usize) -> Result<BTreeSet<Vec<Symbol>>, String> {
    let level = match p {
        Precedence::Level(n) => n,
        other => return Err(format!("{other} is not a declared level")),
    };
    let rule = g
        .rules
        .get(&(s, level))
        .ok_or_else(|| format!("no rule for sort {} level {level}", g.sorts.get(s).map(String::as_str).unwrap_or("?")))?;
    Ok(rule.regex.language(max_len))
}

// ─────────────────────────────── Hazel ───────────────────────────────

/// The bundled Hazel-like grammar in file format.
pub const HAZEL_JSON: &str = r#"{
  "root": "E",
  "token_classes": {"num": "[0-9]+", "id": "[a-z][a-zA-Z0-9_]*"},
  "sorts": {
    "E": [
      {"prec": 0, "assoc": null, "forms": ["'let' P '=' E 'in' E", "'fun' P '=>' E", "'if' E 'then' E 'else' E", "E ',' E"]},
      {"prec": 1, "assoc": "left", "forms": ["E '+' E", "E '-' E"]},
      {"prec": 2, "assoc": "left", "forms": ["E '*' E"]},
      {"prec": 3, "assoc": null, "forms": ["'-' E"]},
      {"prec": 4, "assoc": null, "forms": ["'(' E ')'", "$num", "$id"]}
    ],
    "P": [
      {"prec": 0, "assoc": null, "forms": ["P ',' P"]},
      {"prec": 1, "assoc": null, "forms": ["P ':' T"]},
      {"prec": 2, "assoc": null, "forms": ["'(' P ')'", "$id"]}
    ],
    "T": [
      {"prec": 0, "assoc": "right", "forms": ["T '->' T"]},
      {"prec": 1, "assoc": null, "forms": ["'(' T ')'", "$id"]}
    ]
  }
}"#;

pub fn builtin_hazel() -> Pbg {
    load_grammar(HAZEL_JSON).expect("bundled grammar loads")
}
