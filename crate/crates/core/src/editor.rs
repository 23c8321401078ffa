//! Keystroke-level editing over a token buffer.
//!
//! The buffer holds what the user typed (solid tokens, spaces, newlines) plus
//! ghosts, which persist at fixed positions until typed over or made
//! redundant. Grout is never stored: after every structural change the whole
//! buffer is reparsed, each solid token remolded against its left context.
//! Reparsing the buffer from the start is equivalent to keeping a prefix
//! stack and reparsing the suffix, since prefix molds depend only on the
//! tokens before them.
//!
//! Ghost maintenance:
//! - a buffer ghost is pushed as if solid and kept only if that push is a
//!   plain `≐` step onto an existing token; otherwise it is dropped;
//! - a solid tile matching a ghost in the stack consumes it;
//! - ghosts that a reparse newly requires are placed at the first newline
//!   after the insertion point (end of buffer if none); any the parse then
//!   still requires elsewhere stay virtual, recomputed by every parse until
//!   typed over or accepted with Tab.

use std::collections::HashSet;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::elab::{ProdKind, Terminal};
use crate::grammar::{Pbg, TileId};
use crate::molder::{choose, Lexer};
use crate::parser::{Child, Obligations, Parser, PlanKind, Stack, Term, Token};
use crate::relations::Op;

/// Protocol version announced in hello messages.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Solid(String),
    Ghost(TileId, String),
    /// `auto` spaces were inserted by the editor and are consumed by a typed space.
    Space { auto: bool },
    Newline,
}

impl Item {
    fn is_space(&self) -> bool {
        matches!(self, Item::Space { .. })
    }

    fn is_token(&self) -> bool {
        matches!(self, Item::Solid(_) | Item::Ghost(..))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    Insert { text: String },
    Backspace,
    Move { dir: Dir },
    Tab,
    Newline,
}

#[derive(Clone, Debug)]
pub struct EditState {
    pub items: Vec<Item>,
    /// Caret sits before `items[caret]`.
    pub caret: usize,
    term: Rc<Term>,
    /// Chosen tile per buffer item; `None` for trivia, ghosts and unmolded text.
    molds: Vec<Option<TileId>>,
}

impl EditState {
    pub fn term(&self) -> &Rc<Term> {
        &self.term
    }

    /// Texts of the user's solid tokens, in order.
    pub fn solid_texts(&self) -> Vec<String> {
        self.items
            .iter()
            .filter_map(|i| match i {
                Item::Solid(t) => Some(t.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn ghost_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Ghost(..))).count()
    }
}

struct Parsed {
    term: Rc<Term>,
    molds: Vec<Option<TileId>>,
}

// ─────────────────────────────── render model ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisplayToken {
    pub text: String,
    /// `tile`, `grout`, `space` or `unmolded`.
    pub kind: &'static str,
    pub sort: Option<String>,
    pub left_tip: Option<&'static str>,
    pub right_tip: Option<&'static str>,
    pub ghost: bool,
    pub grout_kind: Option<&'static str>,
    pub unmolded: bool,
    pub caret_here: bool,
    pub underline_group: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Line {
    pub indent: usize,
    pub tokens: Vec<DisplayToken>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caret {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RenderModel {
    pub lines: Vec<Line>,
    pub caret: Caret,
    /// Plain projection: ghosts bracketed, grout as glyphs.
    pub text: String,
    pub obligations: Obligations,
}

impl RenderModel {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("render models serialize")
    }

    /// Texts of solid tiles and unmolded tokens, in display order.
    pub fn typed_texts(&self) -> Vec<String> {
        self.lines
            .iter()
            .flat_map(|l| &l.tokens)
            .filter(|t| (t.kind == "tile" && !t.ghost) || t.kind == "unmolded")
            .map(|t| t.text.clone())
            .collect()
    }
}

// ─────────────────────────────── editor ───────────────────────────────

/// Grammar-level editing context shared by all sessions.
#[derive(Debug)]
pub struct Editor {
    pub parser: Parser,
    pub lexer: Lexer,
}

impl Editor {
    pub fn new(g: &Pbg) -> Self {
        Editor { parser: Parser::new(g), lexer: Lexer::new(g) }
    }

    pub fn g(&self) -> &Pbg {
        self.parser.g()
    }

    pub fn initial(&self) -> EditState {
        self.state_from(Vec::new(), 0)
    }

    /// A state over the given buffer, with ghosts maintained.
    pub fn state_from(&self, items: Vec<Item>, caret: usize) -> EditState {
        let caret = caret.min(items.len());
        let p = self.parse_items(&items);
        let mut st = EditState { items, caret, term: p.term, molds: p.molds };
        self.sync(&mut st, None);
        st
    }

    /// Parses the whole buffer, remolding solids and filtering ghosts.
    fn parse_items(&self, items: &[Item]) -> Parsed {
        let (k, molds) = self.push_items(items, items.len());
        Parsed { term: self.parser.finish(&k), molds }
    }

    fn push_items(&self, items: &[Item], upto: usize) -> (Stack, Vec<Option<TileId>>) {
        let p = &self.parser;
        let mut k = Stack::new();
        let mut molds = vec![None; items.len()];
        for (i, it) in items.iter().enumerate().take(upto) {
            match it {
                Item::Solid(text) => {
                    let choice = choose(p, &k, &[], text);
                    if let (Some(t), Some(mut plan)) = (choice.tile, choice.plan) {
                        plan.new_links.last_mut().expect("a shifted token").token.origin = Some(i);
                        p.apply_mut(&mut k, &plan);
                        molds[i] = Some(t);
                    }
                }
                Item::Ghost(t, text) => {
                    let mut tok = Token::tile(*t, text.clone());
                    tok.origin = Some(i);
                    let mut plan = p.best_plan(&k, &[], &tok);
                    let matched = plan.kind == PlanKind::Shift && plan.new_links.len() == 1 && plan.new_links[0].op == Op::Eq;
                    if matched {
                        plan.new_links[0].token.ghost = true;
                        p.apply_mut(&mut k, &plan);
                    }
                }
                Item::Space { .. } | Item::Newline => {}
            }
        }
        (k, molds)
    }

    /// The prefix stack: everything left of the caret pushed.
    pub fn prefix_stack(&self, st: &EditState) -> Stack {
        self.push_items(&st.items, st.caret).0
    }

    /// Reparses and reconciles buffer ghosts with the parse.
    fn sync(&self, st: &mut EditState, insertion: Option<usize>) {
        let mut parsed = self.parse_items(&st.items);
        if let Some(at) = insertion {
            let fresh: Vec<(TileId, String)> = parsed
                .term
                .tokens()
                .into_iter()
                .filter(|t| t.ghost && t.origin.is_none())
                .map(|t| (tile_of(t), t.text.clone()))
                .collect();
            if !fresh.is_empty() {
                let at = at.min(st.items.len());
                let pos = st.items[at..].iter().position(|i| *i == Item::Newline).map_or(st.items.len(), |j| at + j);
                if pos < st.caret {
                    st.caret += fresh.len();
                }
                st.items.splice(pos..pos, fresh.into_iter().map(|(t, s)| Item::Ghost(t, s)));
                parsed = self.parse_items(&st.items);
            }
        }
        for _ in 0..4 {
            let present: HashSet<usize> = parsed.term.tokens().iter().filter_map(|t| t.origin).collect();
            let dead: Vec<usize> = (0..st.items.len())
                .filter(|i| matches!(st.items[*i], Item::Ghost(..)) && !present.contains(i))
                .collect();
            if dead.is_empty() {
                break;
            }
            for &i in dead.iter().rev() {
                st.items.remove(i);
                if i < st.caret {
                    st.caret -= 1;
                }
            }
            parsed = self.parse_items(&st.items);
        }
        st.term = parsed.term;
        st.molds = parsed.molds;
    }

    /// Whether buffer item `i` parsed as a tile with a child on its right.
    fn right_concave(&self, st: &EditState, i: usize) -> bool {
        fn find(t: &Term, i: usize) -> Option<bool> {
            for (j, c) in t.children.iter().enumerate() {
                match c {
                    Child::Tok(x) if x.origin == Some(i) => return Some(matches!(t.children.get(j + 1), Some(Child::Term(_)))),
                    Child::Term(x) => {
                        if let Some(r) = find(x, i) {
                            return Some(r);
                        }
                    }
                    Child::Tok(_) => {}
                }
            }
            None
        }
        find(&st.term, i).unwrap_or(false)
    }

    /// Whether deleting buffer item `i` should leave a ghost: it is a tile
    /// of a form that keeps another solid tile.
    fn requisite(&self, st: &EditState, i: usize) -> bool {
        fn find(t: &Term, i: usize) -> Option<bool> {
            let own = t.children.iter().any(|c| matches!(c, Child::Tok(x) if x.origin == Some(i)));
            if own {
                let others = t
                    .children
                    .iter()
                    .filter(|c| matches!(c, Child::Tok(x) if x.is_solid_tile() && x.origin != Some(i)))
                    .count();
                return Some(matches!(t.kind, ProdKind::Form(_)) && others > 0);
            }
            t.child_terms().find_map(|x| find(x, i))
        }
        find(&st.term, i).unwrap_or(false)
    }

    pub fn apply(&self, st: &EditState, e: &Event) -> EditState {
        let mut st = st.clone();
        match e {
            Event::Insert { text } => {
                for c in text.chars() {
                    if c == '\n' {
                        self.newline(&mut st);
                    } else {
                        self.insert_char(&mut st, c);
                    }
                }
            }
            Event::Newline => self.newline(&mut st),
            Event::Backspace => self.backspace(&mut st),
            Event::Move { dir: Dir::Left } => st.caret = st.caret.saturating_sub(1),
            Event::Move { dir: Dir::Right } => st.caret = (st.caret + 1).min(st.items.len()),
            Event::Tab => self.tab(&mut st),
        }
        st
    }

    fn insert_char(&self, st: &mut EditState, c: char) {
        if c.is_whitespace() {
            match st.items.get(st.caret) {
                Some(Item::Space { auto: true }) => st.items[st.caret] = Item::Space { auto: false },
                _ => st.items.insert(st.caret, Item::Space { auto: false }),
            }
            st.caret += 1;
            self.sync(st, None);
            return;
        }
        let extended = match st.caret.checked_sub(1).map(|i| &st.items[i]) {
            Some(Item::Solid(t)) if self.lexer.is_token(&format!("{t}{c}")) => {
                st.items[st.caret - 1] = Item::Solid(format!("{t}{c}"));
                true
            }
            _ => false,
        };
        if !extended {
            st.items.insert(st.caret, Item::Solid(c.to_string()));
            st.caret += 1;
        }
        self.sync(st, Some(st.caret));
        self.adjust_auto_space(st);
    }

    /// Keeps a single editor-inserted space right of a token that expects
    /// something after it.
    fn adjust_auto_space(&self, st: &mut EditState) {
        let Some(left) = st.caret.checked_sub(1) else { return };
        if !matches!(st.items[left], Item::Solid(_)) {
            return;
        }
        let next = st.items.get(st.caret);
        let wants = self.right_concave(st, left) || next.is_some_and(Item::is_token);
        match next {
            Some(Item::Space { auto: true }) if !wants => {
                st.items.remove(st.caret);
                self.sync(st, None);
            }
            Some(Item::Space { .. }) | Some(Item::Newline) => {}
            _ if wants => {
                st.items.insert(st.caret, Item::Space { auto: true });
                self.sync(st, None);
            }
            _ => {}
        }
    }

    fn newline(&self, st: &mut EditState) {
        if st.items.get(st.caret) == Some(&Item::Space { auto: true }) {
            st.items.remove(st.caret);
        }
        st.items.insert(st.caret, Item::Newline);
        st.caret += 1;
        self.sync(st, Some(st.caret));
    }

    fn backspace(&self, st: &mut EditState) {
        let Some(i) = st.caret.checked_sub(1) else { return };
        match st.items[i].clone() {
            Item::Ghost(..) => return,
            Item::Space { .. } | Item::Newline => {
                st.items.remove(i);
                st.caret -= 1;
            }
            Item::Solid(text) if text.chars().count() > 1 => {
                let mut t = text;
                t.pop();
                st.items[i] = Item::Solid(t);
            }
            Item::Solid(_) => {
                let ghost = match (self.requisite(st, i), st.molds[i]) {
                    (true, Some(t)) => Some(Item::Ghost(t, self.g().tile_text(t))),
                    _ => None,
                };
                st.caret -= 1;
                match ghost {
                    Some(g) => st.items[i] = g,
                    None => {
                        st.items.remove(i);
                        if i > 0 && i < st.items.len() && st.items[i - 1].is_space() && st.items[i].is_space() {
                            st.items.remove(i);
                        }
                    }
                }
            }
        }
        self.sync(st, None);
    }

    /// Solidifies the ghost right of the caret (spaces skipped), whether
    /// stored in the buffer or still virtual.
    fn tab(&self, st: &mut EditState) {
        let mut j = st.caret;
        while st.items.get(j).is_some_and(Item::is_space) {
            j += 1;
        }
        let mut anchor = 0;
        let mut target = None;
        for t in st.term.tokens() {
            match t.origin {
                Some(o) if o >= st.caret => {
                    if o == j && t.ghost {
                        target = Some((j, false, t.text.clone()));
                    }
                    break;
                }
                Some(o) => anchor = o + 1,
                None if t.ghost && st.items[anchor..st.caret].iter().all(Item::is_space) => {
                    target = Some((st.caret, true, t.text.clone()));
                    break;
                }
                None => {}
            }
        }
        let Some((at, insert, text)) = target else { return };
        if insert {
            st.items.insert(at, Item::Solid(text));
        } else {
            st.items[at] = Item::Solid(text);
        }
        st.caret = at + 1;
        self.sync(st, Some(st.caret));
        self.adjust_auto_space(st);
    }

    pub fn run_script(&self, script: &[Event]) -> Vec<RenderModel> {
        let mut st = self.initial();
        let mut out = vec![self.render(&st)];
        for e in script {
            st = self.apply(&st, e);
            out.push(self.render(&st));
        }
        out
    }

    /// Final state after a script.
    pub fn run(&self, script: &[Event]) -> EditState {
        self.run_from(self.initial(), script)
    }

    pub fn run_from(&self, st: EditState, script: &[Event]) -> EditState {
        script.iter().fold(st, |st, e| self.apply(&st, e))
    }

    // ── rendering ──

    pub fn render(&self, st: &EditState) -> RenderModel {
        let g = self.g();
        let tokens = st.term.tokens();
        // Per term token: openers of enclosing mixfix forms it sits strictly inside.
        let mut facts = TokenFacts::default();
        annotate(&st.term, &mut Vec::new(), &mut Vec::new(), &mut facts, &mut 0);

        // Display sequence: (display token, term token index, buffer index).
        struct Slot {
            tok: DisplayToken,
            term_ix: Option<usize>,
            newline: bool,
        }
        let mut seq: Vec<Slot> = Vec::new();
        let mut caret_pos: Option<usize> = if st.caret == 0 { Some(0) } else { None };
        let mut emitted = 0;
        let next_origin: Vec<Option<usize>> = {
            let mut v = vec![None; tokens.len() + 1];
            for j in (0..tokens.len()).rev() {
                v[j] = tokens[j].origin.or(v[j + 1]);
            }
            v
        };
        let emit_items = |upto: usize, seq: &mut Vec<Slot>, caret_pos: &mut Option<usize>, emitted: &mut usize| {
            while *emitted < upto {
                let i = *emitted;
                match &st.items[i] {
                    Item::Space { .. } => seq.push(Slot { tok: space_token(), term_ix: None, newline: false }),
                    Item::Newline => seq.push(Slot { tok: space_token(), term_ix: None, newline: true }),
                    Item::Solid(t) => seq.push(Slot { tok: unmolded_token(t), term_ix: None, newline: false }),
                    Item::Ghost(_, t) => seq.push(Slot { tok: unmolded_token(t), term_ix: None, newline: false }),
                }
                *emitted += 1;
                if *emitted == st.caret {
                    *caret_pos = Some(seq.len());
                }
            }
        };
        for (j, t) in tokens.iter().enumerate() {
            match t.origin {
                Some(o) => {
                    emit_items(o, &mut seq, &mut caret_pos, &mut emitted);
                    seq.push(Slot { tok: term_token(g, t), term_ix: Some(j), newline: false });
                    emitted = o + 1;
                    if emitted == st.caret {
                        caret_pos = Some(seq.len());
                    }
                }
                None => {
                    let upto = next_origin[j].unwrap_or(st.items.len());
                    emit_items(upto, &mut seq, &mut caret_pos, &mut emitted);
                    seq.push(Slot { tok: term_token(g, t), term_ix: Some(j), newline: false });
                }
            }
        }
        emit_items(st.items.len(), &mut seq, &mut caret_pos, &mut emitted);
        let caret_pos = caret_pos.unwrap_or(seq.len());

        // Caret term decorations.
        let is_solid = |s: &Slot| s.tok.kind != "space";
        let on = if caret_pos > 0 && is_solid(&seq[caret_pos - 1]) && !seq[caret_pos - 1].newline {
            Some(caret_pos - 1)
        } else if caret_pos < seq.len() && is_solid(&seq[caret_pos]) {
            Some(caret_pos)
        } else {
            None
        };
        if let Some(on) = on {
            seq[on].tok.caret_here = true;
            if let Some(j) = seq[on].term_ix {
                let (term, _) = *facts.ancestry[j].last().expect("every token has a parent");
                for s in seq.iter_mut() {
                    let Some(x) = s.term_ix else { continue };
                    match facts.ancestry[x].iter().find(|(p, _)| *p == term) {
                        Some((_, Some(child))) => s.tok.underline_group = Some(*child),
                        Some((_, None)) => {
                            s.tok.left_tip = Some(facts.tips[x].0);
                            s.tok.right_tip = Some(facts.tips[x].1);
                        }
                        None => {}
                    }
                }
            }
        }

        // Lines and indentation.
        let mut lines: Vec<(Vec<Slot>, bool)> = vec![(Vec::new(), false)];
        let mut caret = Caret { line: 0, column: 0 };
        let mut caret_line_ix = 0;
        for (n, s) in seq.into_iter().enumerate() {
            if n == caret_pos {
                caret.line = lines.len() - 1;
                caret_line_ix = lines.last().expect("one line").0.len();
            }
            if s.newline {
                lines.push((Vec::new(), false));
            } else {
                lines.last_mut().expect("one line").0.push(s);
            }
        }
        if caret_pos >= n_slots(&lines) {
            caret.line = lines.len() - 1;
            caret_line_ix = lines.last().expect("one line").0.len();
        }
        let mut line_of_token = vec![0usize; tokens.len()];
        for (ln, (slots, _)) in lines.iter().enumerate() {
            for s in slots {
                if let Some(x) = s.term_ix {
                    line_of_token[x] = ln;
                }
            }
        }
        let mut out_lines = Vec::new();
        let mut text_lines = Vec::new();
        for (ln, (slots, _)) in lines.into_iter().enumerate() {
            let indent = slots
                .iter()
                .find_map(|s| s.term_ix)
                .map(|x| 2 * facts.enclosing[x].iter().filter(|&&o| line_of_token[o] < ln).count())
                .unwrap_or(0);
            let mut text = " ".repeat(indent);
            let mut prev: Option<&DisplayToken> = None;
            for (n, s) in slots.iter().enumerate() {
                if ln == caret.line && n == caret_line_ix {
                    caret.column = text.chars().count();
                }
                if let Some(p) = prev {
                    if p.kind != "space" && s.tok.kind != "space" && (separated(p) || separated(&s.tok)) {
                        text.push(' ');
                    }
                }
                text.push_str(&shown(&s.tok));
                prev = Some(&s.tok);
            }
            if ln == caret.line && caret_line_ix >= slots.len() {
                caret.column = text.chars().count();
            }
            text_lines.push(text);
            out_lines.push(Line { indent, tokens: slots.into_iter().map(|s| s.tok).collect() });
        }
        RenderModel { lines: out_lines, caret, text: text_lines.join("\n"), obligations: st.term.obligations() }
    }
}

fn n_slots<T>(lines: &[(Vec<T>, bool)]) -> usize {
    lines.iter().map(|(v, _)| v.len()).sum::<usize>() + lines.len() - 1
}

fn tile_of(t: &Token) -> TileId {
    match t.terminal {
        Terminal::Tile(x) => x,
        _ => unreachable!("ghosts are tiles"),
    }
}

fn separated(t: &DisplayToken) -> bool {
    t.ghost || t.kind == "grout"
}

fn shown(t: &DisplayToken) -> String {
    if t.ghost {
        format!("[{}]", t.text)
    } else {
        t.text.clone()
    }
}

fn space_token() -> DisplayToken {
    DisplayToken {
        text: " ".into(),
        kind: "space",
        sort: None,
        left_tip: None,
        right_tip: None,
        ghost: false,
        grout_kind: None,
        unmolded: false,
        caret_here: false,
        underline_group: None,
    }
}

fn unmolded_token(text: &str) -> DisplayToken {
    DisplayToken { text: text.into(), kind: "unmolded", unmolded: true, ..space_token() }
}

fn term_token(g: &Pbg, t: &Token) -> DisplayToken {
    let sort = t.sort(g).map(|s| g.sort_name(s).to_string());
    match t.terminal {
        Terminal::Grout(shape, _) => DisplayToken {
            text: shape.glyph(false).into(),
            kind: "grout",
            sort,
            grout_kind: Some(shape.name()),
            ..space_token()
        },
        _ => DisplayToken { text: t.text.clone(), kind: "tile", sort, ghost: t.ghost, ..space_token() },
    }
}

/// Per-token facts gathered in one traversal.
#[derive(Default)]
struct TokenFacts {
    /// Openers (token indices) of mixfix forms the token sits strictly inside.
    enclosing: Vec<Vec<usize>>,
    /// Ancestor terms by pre-order id, outermost first, with the child index
    /// taken below each; the last entry is the token's own parent with `None`.
    ancestry: Vec<Vec<(usize, Option<usize>)>>,
    /// Left and right tip of each token within its parent.
    tips: Vec<(&'static str, &'static str)>,
}

fn annotate(t: &Term, openers: &mut Vec<usize>, path: &mut Vec<(usize, Option<usize>)>, facts: &mut TokenFacts, ids: &mut usize) {
    let id = *ids;
    *ids += 1;
    let mixfix = matches!(t.kind, ProdKind::Form(_)) && t.children.iter().filter(|c| matches!(c, Child::Tok(_))).count() >= 2;
    let opener = facts.tips.len();
    let mut child_ix = 0;
    let is_term = |c: Option<&Child>| matches!(c, Some(Child::Term(_)));
    for (j, c) in t.children.iter().enumerate() {
        match c {
            Child::Tok(_) => {
                let mut p = path.clone();
                p.push((id, None));
                facts.ancestry.push(p);
                facts.enclosing.push(openers.clone());
                let left = if j > 0 && is_term(t.children.get(j - 1)) { "concave" } else { "convex" };
                let right = if is_term(t.children.get(j + 1)) { "concave" } else { "convex" };
                facts.tips.push((left, right));
            }
            Child::Term(x) => {
                let interior = mixfix && j > 0 && !is_term(t.children.get(j - 1)) && t.children.get(j + 1).is_some();
                if interior {
                    openers.push(opener);
                }
                path.push((id, Some(child_ix)));
                annotate(x, openers, path, facts, ids);
                path.pop();
                if interior {
                    openers.pop();
                }
                child_ix += 1;
            }
        }
    }
}

// ─────────────────────────────── session protocol ───────────────────────────────

/// One interactive session speaking the line protocol.
pub struct Session<'a> {
    pub editor: &'a Editor,
    pub state: EditState,
}

impl<'a> Session<'a> {
    pub fn new(editor: &'a Editor) -> Self {
        Session { editor, state: editor.initial() }
    }

    pub fn hello(&self) -> Value {
        json!({"type": "hello", "v": PROTOCOL_VERSION, "root": self.editor.g().sort_name(self.editor.g().root)})
    }

    pub fn render_message(&self) -> Value {
        json!({"type": "render", "model": self.editor.render(&self.state).to_json()})
    }

    /// Handles one request line; returns the reply.
    pub fn handle_line(&mut self, line: &str) -> Value {
        let msg: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return json!({"type": "error", "message": format!("malformed JSON: {e}")}),
        };
        match msg.get("type").and_then(Value::as_str) {
            Some("hello") => self.hello(),
            Some("render") => self.render_message(),
            Some("event") => match msg.get("event").map(Event::deserialize) {
                Some(Ok(e)) => {
                    self.state = self.editor.apply(&self.state, &e);
                    self.render_message()
                }
                Some(Err(e)) => json!({"type": "error", "message": format!("bad event: {e}")}),
                None => json!({"type": "error", "message": "missing event"}),
            },
            _ => json!({"type": "error", "message": "unknown message type"}),
        }
    }
}

/// Parses one script line: a bare event or a wrapped event message.
pub fn parse_event_line(line: &str) -> Result<Event, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let ev = if v.get("type").and_then(Value::as_str) == Some("event") {
        v.get("event").cloned().ok_or("missing event")?
    } else {
        v
    };
    Event::deserialize(ev).map_err(|e| e.to_string())
}

/// Events typing `text` character by character, `\n` as newline events.
pub fn type_text(text: &str) -> Vec<Event> {
    text.chars()
        .map(|c| if c == '\n' { Event::Newline } else { Event::Insert { text: c.to_string() } })
        .collect()
}
