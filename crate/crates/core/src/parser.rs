//! The total push machine: terms, stacks, `fill`, Shift/Reduce/Degrout, and
//! independent well-formedness checkers.
//!
//! A stack is a sequence of links `op_slot cell token` above the start
//! delimiter `⧏`. Pushing a token searches every plan obtained by reducing or
//! degrouting the stack top some number of times and then shifting the token
//! along a grammar walk (or consuming a matching ghost). The plan with the
//! lexicographically least obligation delta wins; fewer reductions, lower and
//! shorter walks break ties.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::rc::Rc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::elab::{BoundedSort, Elab, GroutShape, Item, ProdKind, Terminal};
use crate::grammar::{Assoc, Pbg, Precedence, SortId, Symbol, TileId};
use crate::relations::{Op, RelStep, RelationTable, Slot, Walk};

// ─────────────────────────────── obligations ───────────────────────────────

/// Obligation counts, or differences of them. Ordered lexicographically from
/// the heaviest weight class: infix grout, sort grout, ghosts, operand grout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Obligations {
    pub operand_grout: i64,
    pub ghosts: i64,
    pub sort_grout: i64,
    pub infix_grout: i64,
}

pub type ObligationCount = Obligations;
pub type ObligationDelta = Obligations;

impl Obligations {
    pub fn key(&self) -> [i64; 4] {
        [self.infix_grout, self.sort_grout, self.ghosts, self.operand_grout]
    }

    pub fn is_zero(&self) -> bool {
        *self == Obligations::default()
    }

    pub fn of_token(t: &Token) -> Self {
        let mut o = Obligations::default();
        match t.terminal {
            Terminal::Grout(GroutShape::Operand, _) => o.operand_grout = 1,
            Terminal::Grout(GroutShape::Infix, _) => o.infix_grout = 1,
            Terminal::Grout(_, _) => o.sort_grout = 1,
            Terminal::Tile(_) if t.ghost => o.ghosts = 1,
            _ => {}
        }
        o
    }
}

impl Ord for Obligations {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Obligations {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Obligations {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Obligations {
            operand_grout: self.operand_grout + o.operand_grout,
            ghosts: self.ghosts + o.ghosts,
            sort_grout: self.sort_grout + o.sort_grout,
            infix_grout: self.infix_grout + o.infix_grout,
        }
    }
}

impl AddAssign for Obligations {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Neg for Obligations {
    type Output = Self;
    fn neg(self) -> Self {
        Obligations::default() - self
    }
}

impl Sub for Obligations {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Obligations {
            operand_grout: self.operand_grout - o.operand_grout,
            ghosts: self.ghosts - o.ghosts,
            sort_grout: self.sort_grout - o.sort_grout,
            infix_grout: self.infix_grout - o.infix_grout,
        }
    }
}

impl fmt::Display for Obligations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{infix:{}, sort:{}, ghost:{}, operand:{}}}",
            self.infix_grout, self.sort_grout, self.ghosts, self.operand_grout
        )
    }
}

// ─────────────────────────────── tokens and terms ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub terminal: Terminal,
    pub text: String,
    pub ghost: bool,
    /// Index of the editor buffer item this token was read from, if any.
    pub origin: Option<usize>,
}

impl Token {
    pub fn tile(t: TileId, text: impl Into<String>) -> Self {
        Token { terminal: Terminal::Tile(t), text: text.into(), ghost: false, origin: None }
    }

    pub fn ghost(g: &Pbg, t: TileId) -> Self {
        Token { terminal: Terminal::Tile(t), text: g.tile_text(t), ghost: true, origin: None }
    }

    pub fn grout(shape: GroutShape, s: SortId) -> Self {
        Token { terminal: Terminal::Grout(shape, s), text: shape.glyph(false).into(), ghost: false, origin: None }
    }

    pub fn end() -> Self {
        Token { terminal: Terminal::End, text: String::new(), ghost: false, origin: None }
    }

    pub fn sort(&self, g: &Pbg) -> Option<SortId> {
        match self.terminal {
            Terminal::Tile(t) => Some(g.tiles[t].mold.sort),
            Terminal::Grout(_, s) => Some(s),
            _ => None,
        }
    }

    pub fn is_solid_tile(&self) -> bool {
        self.terminal.is_tile() && !self.ghost
    }

    pub fn to_json(&self, g: &Pbg) -> Value {
        match self.terminal {
            Terminal::Grout(shape, s) => json!({"kind": "grout", "shape": shape.name(), "sort": g.sort_name(s)}),
            _ => json!({
                "kind": "token",
                "text": self.text,
                "sort": self.sort(g).map(|s| g.sort_name(s).to_string()),
                "ghost": self.ghost,
            }),
        }
    }
}

/// Precedence exposure along one side of a term: every level on the spine
/// of same-sort operands reaching that side, summarized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Spine {
    /// Loosest declared level on the spine.
    pub min: Option<u32>,
    /// Some node on the spine is closed on this side (needs a bound below ⊤).
    pub closed: bool,
    /// The spine ends in an infix grout chain (needs a ⊥ bound).
    pub chain: bool,
}

impl Spine {
    fn level(l: u32) -> Self {
        Spine { min: Some(l), closed: false, chain: false }
    }

    fn closed() -> Self {
        Spine { min: None, closed: true, chain: false }
    }

    fn chain() -> Self {
        Spine { min: None, closed: false, chain: true }
    }

    fn join(self, o: Spine) -> Spine {
        Spine {
            min: match (self.min, o.min) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            closed: self.closed || o.closed,
            chain: self.chain || o.chain,
        }
    }

    fn is_free(&self) -> bool {
        self.min.is_none() && !self.closed && !self.chain
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Child {
    Tok(Token),
    Term(Rc<Term>),
}

/// A production instance. Children follow the production's product exactly:
/// tokens at terminal positions and terms at nonterminal positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub children: Vec<Child>,
    pub sort: SortId,
    pub kind: ProdKind,
    pub left: Spine,
    pub right: Spine,
    obligations: Obligations,
    size: usize,
}

impl Term {
    pub fn obligations(&self) -> Obligations {
        self.obligations
    }

    /// Number of tokens, grout included.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Every token left to right.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::with_capacity(self.size);
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        for c in &self.children {
            match c {
                Child::Tok(t) => out.push(t),
                Child::Term(t) => t.collect_tokens(out),
            }
        }
    }

    /// Solid (user-supplied) tiles, left to right.
    pub fn solid_tokens(&self) -> Vec<&Token> {
        self.tokens().into_iter().filter(|t| t.is_solid_tile()).collect()
    }

    pub fn child_terms(&self) -> impl Iterator<Item = &Rc<Term>> {
        self.children.iter().filter_map(|c| match c {
            Child::Term(t) => Some(t),
            Child::Tok(_) => None,
        })
    }

    pub fn is_hole(&self) -> bool {
        self.kind == ProdKind::Operand
    }

    pub fn to_json(&self, g: &Pbg) -> Value {
        let children: Vec<Value> = self
            .children
            .iter()
            .map(|c| match c {
                Child::Tok(t) => t.to_json(g),
                Child::Term(t) => t.to_json(g),
            })
            .collect();
        json!({"kind": "term", "children": children})
    }

    /// Source-like text: ghosts bracketed, grout as glyphs.
    pub fn to_text(&self, ascii: bool) -> String {
        self.tokens().iter().map(|t| token_text(t, ascii)).collect::<Vec<_>>().join(" ")
    }

    /// Parenthesized structure, for debugging and tests.
    pub fn to_sexp(&self) -> String {
        let parts: Vec<String> = self
            .children
            .iter()
            .map(|c| match c {
                Child::Tok(t) => token_text(t, false),
                Child::Term(t) if t.children.len() == 1 => t.to_sexp(),
                Child::Term(t) => format!("({})", t.to_sexp()),
            })
            .collect();
        parts.join(" ")
    }

    /// Structural equality ignoring ghost flags and token text of grout.
    pub fn same_shape(&self, o: &Term) -> bool {
        self.kind == o.kind
            && self.children.len() == o.children.len()
            && self.children.iter().zip(&o.children).all(|(a, b)| match (a, b) {
                (Child::Tok(x), Child::Tok(y)) => x.terminal == y.terminal && (x.terminal.is_grout() || x.text == y.text),
                (Child::Term(x), Child::Term(y)) => x.same_shape(y),
                _ => false,
            })
    }
}

pub fn token_text(t: &Token, ascii: bool) -> String {
    match t.terminal {
        Terminal::Grout(shape, _) => shape.glyph(ascii).to_string(),
        _ if t.ghost => format!("[{}]", t.text),
        _ => t.text.clone(),
    }
}

// ─────────────────────────────── stacks ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub op: Op,
    pub slot: Slot,
    pub cell: Option<Rc<Term>>,
    pub token: Token,
}

/// Links above the implicit start delimiter, bottom first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stack {
    pub links: Vec<Link>,
}

impl Stack {
    pub fn new() -> Self {
        Stack::default()
    }

    pub fn head(&self) -> Terminal {
        self.links.last().map(|l| l.token.terminal).unwrap_or(Terminal::Start)
    }

    pub fn height(&self) -> usize {
        self.links.iter().filter(|l| l.op == Op::Lt).count()
    }

    pub fn obligations(&self) -> Obligations {
        self.links.iter().fold(Obligations::default(), |acc, l| {
            acc + Obligations::of_token(&l.token) + l.cell.as_ref().map(|c| c.obligations()).unwrap_or_default()
        })
    }

    /// The completed term once `⧐` has been pushed.
    pub fn result(&self) -> Option<Rc<Term>> {
        match self.links.as_slice() {
            [Link { op: Op::Eq, cell: Some(t), token, .. }] if token.terminal == Terminal::End => Some(t.clone()),
            _ => None,
        }
    }

    pub fn show(&self) -> String {
        let mut out = String::from("⧏");
        for l in &self.links {
            let op = match l.op {
                Op::Lt => "⋖",
                Op::Eq => "≐",
                Op::Gt => "⋗",
            };
            out.push_str(&format!(" {op}"));
            if let Some(c) = &l.cell {
                out.push_str(&format!("{{{}}}", c.to_text(false)));
            }
            out.push(' ');
            out.push_str(&if l.token.terminal == Terminal::End { "⧐".to_string() } else { token_text(&l.token, false) });
        }
        out
    }
}

// ─────────────────────────────── plans ───────────────────────────────

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanKind {
    Shift,
    Consume,
}

/// One way of pushing a token: keep `links[..keep]`, then append `new_links`.
#[derive(Clone, Debug)]
pub struct Plan {
    pub kind: PlanKind,
    pub delta: Obligations,
    pub reductions: usize,
    pub height: usize,
    pub length: usize,
    pub key: Vec<(Terminal, Slot)>,
    pub keep: usize,
    pub new_links: Vec<Link>,
}

impl Plan {
    pub fn rank(&self) -> ([i64; 4], usize, usize, usize, &[(Terminal, Slot)]) {
        (self.delta.key(), self.reductions, self.height, self.length, &self.key)
    }
}

// ─────────────────────────────── parser ───────────────────────────────

/// Grammar tables plus the push machine.
#[derive(Debug)]
pub struct Parser {
    pub table: RelationTable,
    by_first_tile: HashMap<TileId, Vec<usize>>,
}

impl Parser {
    pub fn new(g: &Pbg) -> Self {
        Self::from_table(RelationTable::new(g))
    }

    pub fn from_table(table: RelationTable) -> Self {
        let mut by_first_tile: HashMap<TileId, Vec<usize>> = HashMap::new();
        for (i, t) in table.elab.templates.iter().enumerate() {
            if let Some(first) = t.form.iter().find_map(|s| match s {
                Symbol::Tile(x) => Some(*x),
                Symbol::Sort(_) => None,
            }) {
                by_first_tile.entry(first).or_default().push(i);
            }
        }
        for v in by_first_tile.values_mut() {
            v.sort_by_key(|&i| (table.elab.templates[i].form.len(), i));
        }
        Parser { table, by_first_tile }
    }

    pub fn g(&self) -> &Pbg {
        &self.table.elab.g
    }

    pub fn elab(&self) -> &Elab {
        &self.table.elab
    }

    // ── term construction ──

    pub fn hole(&self, s: SortId) -> Rc<Term> {
        Rc::new(Term {
            children: vec![Child::Tok(Token::grout(GroutShape::Operand, s))],
            sort: s,
            kind: ProdKind::Operand,
            left: Spine::default(),
            right: Spine::default(),
            obligations: Obligations { operand_grout: 1, ..Default::default() },
            size: 1,
        })
    }

    /// `⦊ˢ t` for a term `t` of another sort.
    pub fn wrap_prefix(&self, s: SortId, t: Rc<Term>) -> Rc<Term> {
        let r = t.sort;
        let obligations = t.obligations() + Obligations { sort_grout: 1, ..Default::default() };
        let size = t.size + 1;
        Rc::new(Term {
            children: vec![Child::Tok(Token::grout(GroutShape::Prefix, s)), Child::Term(t)],
            sort: s,
            kind: ProdKind::Prefix(r),
            left: Spine::closed(),
            right: Spine::closed(),
            obligations,
            size,
        })
    }

    /// `t₀ ⟐ t₁ ⟐ … tₖ`, k ≥ 1.
    pub fn chain(&self, s: SortId, ts: Vec<Rc<Term>>) -> Rc<Term> {
        let n = ts.len();
        let mut children = Vec::with_capacity(2 * n - 1);
        let mut obligations = Obligations { infix_grout: n as i64 - 1, ..Default::default() };
        let mut size = n - 1;
        for (i, t) in ts.into_iter().enumerate() {
            if i > 0 {
                children.push(Child::Tok(Token::grout(GroutShape::Infix, s)));
            }
            obligations += t.obligations();
            size += t.size;
            children.push(Child::Term(t));
        }
        Rc::new(Term { children, sort: s, kind: ProdKind::Chain(n - 1), left: Spine::chain(), right: Spine::chain(), obligations, size })
    }

    /// A term of template `tpl`; children must line up with its form.
    pub fn form_term(&self, tpl: usize, children: Vec<Child>) -> Rc<Term> {
        let t = &self.elab().templates[tpl];
        let mut obligations = Obligations::default();
        let mut size = 0;
        for c in &children {
            match c {
                Child::Tok(tok) => {
                    obligations += Obligations::of_token(tok);
                    size += 1;
                }
                Child::Term(x) => {
                    obligations += x.obligations();
                    size += x.size;
                }
            }
        }
        let child_spine = |c: Option<&Child>, left: bool| match c {
            Some(Child::Term(x)) => {
                if left {
                    x.left
                } else {
                    x.right
                }
            }
            _ => Spine::default(),
        };
        let left = if t.left_exposed { Spine::level(t.level).join(child_spine(children.first(), true)) } else { Spine::closed() };
        let right = if t.right_exposed { Spine::level(t.level).join(child_spine(children.last(), false)) } else { Spine::closed() };
        Rc::new(Term { children, sort: t.sort, kind: ProdKind::Form(tpl), left, right, obligations, size })
    }

    fn left_ok(&self, s: SortId, sp: &Spine, p: Precedence) -> bool {
        match p {
            Precedence::Bottom => true,
            Precedence::Top => sp.is_free(),
            Precedence::Zero => !sp.chain,
            Precedence::Level(m) => {
                !sp.chain
                    && sp.min.is_none_or(|l| l > m || (l == m && self.g().assoc(s, l) == Some(Assoc::Right)))
            }
        }
    }

    fn right_ok(&self, s: SortId, sp: &Spine, q: Precedence) -> bool {
        match q {
            Precedence::Bottom => true,
            Precedence::Top => sp.is_free(),
            Precedence::Zero => !sp.chain,
            Precedence::Level(m) => {
                !sp.chain
                    && sp.min.is_none_or(|l| l > m || (l == m && self.g().assoc(s, l) == Some(Assoc::Left)))
            }
        }
    }

    /// Whether `n` produces `t`, given that `t` is internally well formed.
    pub fn fits(&self, t: &Term, n: BoundedSort) -> bool {
        t.sort == n.sort && self.left_ok(t.sort, &t.left, n.left) && self.right_ok(t.sort, &t.right, n.right)
    }

    pub fn natural(&self, t: &Term) -> bool {
        self.fits(t, BoundedSort::zero(t.sort))
    }

    // ── fill ──

    fn block_cost(&self, slot: Slot, block: &[Rc<Term>]) -> Option<Obligations> {
        let Some(n) = slot else { return block.is_empty().then(Obligations::default) };
        let transit = n.left != Precedence::Top && n.right != Precedence::Top;
        let sort1 = Obligations { sort_grout: 1, ..Default::default() };
        match block {
            [] => Some(Obligations { operand_grout: 1, ..Default::default() }),
            [t] if self.fits(t, n) => Some(Obligations::default()),
            [t] if t.sort != n.sort && transit => Some(sort1),
            [_] => None,
            ts => {
                let chain_sort = if n.left == Precedence::Bottom && n.right == Precedence::Bottom {
                    n.sort
                } else if transit && ts[0].sort != n.sort {
                    ts[0].sort
                } else {
                    return None;
                };
                let mut c = Obligations { infix_grout: ts.len() as i64 - 1, ..Default::default() };
                if chain_sort != n.sort {
                    c += sort1;
                }
                for t in ts {
                    if t.sort != chain_sort {
                        c += sort1;
                    } else if !self.fits(t, BoundedSort::zero(chain_sort)) {
                        return None;
                    }
                }
                Some(c)
            }
        }
    }

    fn block_build(&self, slot: Slot, block: &[Rc<Term>]) -> Option<Rc<Term>> {
        let n = slot?;
        Some(match block {
            [] => self.hole(n.sort),
            [t] if self.fits(t, n) => t.clone(),
            [t] => self.wrap_prefix(n.sort, t.clone()),
            ts => {
                let chain_sort = if n.left == Precedence::Bottom && n.right == Precedence::Bottom { n.sort } else { ts[0].sort };
                let elems = ts
                    .iter()
                    .map(|t| if t.sort == chain_sort { t.clone() } else { self.wrap_prefix(chain_sort, t.clone()) })
                    .collect();
                let c = self.chain(chain_sort, elems);
                if chain_sort == n.sort {
                    c
                } else {
                    self.wrap_prefix(n.sort, c)
                }
            }
        })
    }

    /// Distributes reductions over slots in order, minimizing obligations;
    /// on ties earlier slots take more. `None` if no partition is feasible.
    pub fn fill(&self, rs: &[Rc<Term>], slots: &[Slot]) -> Option<(Vec<Option<Rc<Term>>>, Obligations)> {
        let (m, k) = (slots.len(), rs.len());
        if m == 0 {
            return rs.is_empty().then(|| (Vec::new(), Obligations::default()));
        }
        // best[i][j]: placing rs[j..] into slots[i..].
        let mut best: Vec<Vec<Option<(Obligations, usize)>>> = vec![vec![None; k + 1]; m + 1];
        best[m][k] = Some((Obligations::default(), k));
        for i in (0..m).rev() {
            for j in 0..=k {
                let mut here: Option<(Obligations, usize)> = None;
                let hi = if slots[i].is_some() { k } else { j };
                for j2 in (j..=hi).rev() {
                    let Some((rest, _)) = best[i + 1][j2] else { continue };
                    let Some(c) = self.block_cost(slots[i], &rs[j..j2]) else { continue };
                    let total = c + rest;
                    if here.is_none_or(|(b, _)| total < b) {
                        here = Some((total, j2));
                    }
                }
                best[i][j] = here;
            }
        }
        let (cost, _) = best[0][0]?;
        let mut cells = Vec::with_capacity(m);
        let mut j = 0;
        for (i, slot) in slots.iter().enumerate() {
            let (_, j2) = best[i][j].expect("reachable state");
            cells.push(self.block_build(*slot, &rs[j..j2]));
            j = j2;
        }
        Some((cells, cost))
    }

    // ── push ──

    fn walk_token(&self, t: Terminal) -> Token {
        match t {
            Terminal::Tile(x) => Token::ghost(self.g(), x),
            Terminal::Grout(shape, s) => Token::grout(shape, s),
            _ => unreachable!("delimiters are never walk intermediates"),
        }
    }

    fn walk_cost(&self, w: &[RelStep]) -> Obligations {
        w[..w.len() - 1].iter().fold(Obligations::default(), |acc, s| acc + Obligations::of_token(&self.walk_token(s.right)))
    }

    fn shift_plan(&self, keep: usize, steps: &[RelStep], rs: &[Rc<Term>], tok: &Token, acc: Obligations, d: usize) -> Option<Plan> {
        let slots: Vec<Slot> = steps.iter().map(|s| s.slot).collect();
        let (cells, cost) = self.fill(rs, &slots)?;
        let n = steps.len();
        let new_links = steps
            .iter()
            .zip(cells)
            .enumerate()
            .map(|(i, (s, cell))| Link {
                op: s.op,
                slot: s.slot,
                cell,
                token: if i + 1 == n { tok.clone() } else { self.walk_token(s.right) },
            })
            .collect();
        Some(Plan {
            kind: PlanKind::Shift,
            delta: acc + cost + self.walk_cost(steps),
            reductions: d,
            height: steps.iter().filter(|s| s.op == Op::Lt).count(),
            length: n,
            key: steps.iter().map(|s| (s.right, s.slot)).collect(),
            keep,
            new_links,
        })
    }

    /// Shift candidates at stack height `keep` with head `head`.
    fn shift_plans(&self, keep: usize, head: Terminal, rs: &[Rc<Term>], tok: &Token, acc: Obligations, d: usize, out: &mut Vec<Plan>) {
        for w in self.table.walks(head, tok.terminal).iter() {
            if let Some(p) = self.shift_plan(keep, &w.steps, rs, tok, acc, d) {
                out.push(p);
            }
        }
        if rs.is_empty() {
            return;
        }
        // Absorbers: extra infix grout to hold reductions no slot can take.
        for s in 0..self.g().sorts.len() {
            let infix = Terminal::Grout(GroutShape::Infix, s);
            let z = Some(BoundedSort::zero(s));
            let tails = self.table.walks(infix, tok.terminal);
            if tails.is_empty() {
                continue;
            }
            for op in [Op::Lt, Op::Eq] {
                let first = RelStep { left: head, op, right: infix, slot: z };
                if !self.table.has_step(&first) {
                    continue;
                }
                let mut steps = vec![first];
                for _ in 0..rs.len() {
                    for tail in tails.iter() {
                        let mut all = steps.clone();
                        all.extend(tail.steps.iter().copied());
                        if let Some(p) = self.shift_plan(keep, &all, rs, tok, acc, d) {
                            out.push(p);
                        }
                    }
                    steps.push(RelStep { left: infix, op: Op::Eq, right: infix, slot: z });
                }
            }
        }
    }

    /// Consuming a ghost of the same tile in the top segment.
    fn consume_plans(&self, links: &[Link], seg: usize, rs: &[Rc<Term>], tok: &Token, acc: Obligations, d: usize, out: &mut Vec<Plan>) {
        if !tok.is_solid_tile() {
            return;
        }
        let k = links.len();
        for gi in seg + 1..k {
            if !(links[gi].token.ghost && links[gi].token.terminal == tok.terminal) {
                continue;
            }
            if !links[gi + 1..k].iter().all(|l| l.token.ghost) {
                continue;
            }
            let mut removed = Obligations::default();
            let mut rs2 = Vec::new();
            for l in &links[gi..k] {
                removed += Obligations::of_token(&l.token);
                match &l.cell {
                    Some(c) if c.is_hole() => removed += c.obligations(),
                    Some(c) => rs2.push(c.clone()),
                    None => {}
                }
            }
            rs2.extend(rs.iter().cloned());
            let head = links[gi - 1].token.terminal;
            for slot in self.table.slots_between(head, Op::Eq, tok.terminal) {
                let Some((cells, cost)) = self.fill(&rs2, &[slot]) else { continue };
                out.push(Plan {
                    kind: PlanKind::Consume,
                    delta: acc - removed + cost,
                    reductions: d,
                    height: 0,
                    length: 1,
                    key: vec![(tok.terminal, slot)],
                    keep: gi,
                    new_links: vec![Link { op: Op::Eq, slot, cell: cells.into_iter().next().flatten(), token: tok.clone() }],
                });
            }
        }
    }

    /// Completes a tile segment into a natural term. Returns the term, the
    /// reductions left over, and the obligations added.
    fn reduce_segment(&self, seg: &[Link], rs: &[Rc<Term>]) -> Option<(Rc<Term>, Vec<Rc<Term>>, Obligations)> {
        let Terminal::Tile(first) = seg[0].token.terminal else { return None };
        let mut best: Option<(bool, Obligations, usize, Vec<Child>, Vec<Rc<Term>>)> = None;
        for &ti in self.by_first_tile.get(&first).map(Vec::as_slice).unwrap_or(&[]) {
            let tpl = &self.elab().templates[ti];
            let n0 = BoundedSort::zero(tpl.sort);
            let mut children = Vec::with_capacity(tpl.form.len());
            let mut pos = 0;
            let mut ok = true;
            for l in seg {
                if let Some(cell) = &l.cell {
                    match (tpl.form.get(pos), tpl.child_bound(n0, pos)) {
                        (Some(Symbol::Sort(_)), Some(b)) if self.fits(cell, b) => children.push(Child::Term(cell.clone())),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                    pos += 1;
                } else if l.slot.is_some() || matches!(tpl.form.get(pos), Some(Symbol::Sort(_))) {
                    ok = false;
                    break;
                }
                if tpl.form.get(pos) != Some(&Symbol::Tile(match l.token.terminal {
                    Terminal::Tile(x) => x,
                    _ => usize::MAX,
                })) {
                    ok = false;
                    break;
                }
                children.push(Child::Tok(l.token.clone()));
                pos += 1;
            }
            if !ok {
                continue;
            }
            let rest: Vec<usize> = (pos..tpl.form.len()).collect();
            let slots: Vec<Slot> = rest
                .iter()
                .filter(|&&i| matches!(tpl.form[i], Symbol::Sort(_)))
                .map(|&i| tpl.child_bound(n0, i))
                .collect();
            let ghosts = rest.iter().filter(|&&i| matches!(tpl.form[i], Symbol::Tile(_))).count() as i64;
            let (consumed, (cells, cost), left) = match self.fill(rs, &slots) {
                Some(f) => (true, f, Vec::new()),
                None => (false, self.fill(&[], &slots).expect("defaults always fit"), rs.to_vec()),
            };
            let cost = cost + Obligations { ghosts, ..Default::default() };
            let better = match &best {
                None => true,
                Some((bc, bcost, _, _, _)) => (consumed, std::cmp::Reverse(cost)) > (*bc, std::cmp::Reverse(*bcost)),
            };
            if !better {
                continue;
            }
            let mut cells = cells.into_iter();
            let mut full = children;
            for &i in &rest {
                match tpl.form[i] {
                    Symbol::Sort(_) => full.push(Child::Term(cells.next().flatten().expect("some slot"))),
                    Symbol::Tile(t) => full.push(Child::Tok(Token::ghost(self.g(), t))),
                }
            }
            best = Some((consumed, cost, ti, full, left));
        }
        let (_, cost, ti, children, left) = best?;
        Some((self.form_term(ti, children), left, cost))
    }

    /// Start of the top segment of `links` (the last `⋖` link).
    fn segment_start(links: &[Link]) -> usize {
        links.iter().rposition(|l| l.op == Op::Lt).unwrap_or(0)
    }

    /// Upper bound on the obligations that pushing `tok` can remove from
    /// `links[..i]`, for every `i`: grout tokens (dropped when degrouting)
    /// and, from each ghost of `tok`'s tile to the end of its segment, the
    /// ghosts and holes a consume drops.
    fn removable_prefix(links: &[Link], tok: &Token) -> Vec<Obligations> {
        let mut out = Vec::with_capacity(links.len() + 1);
        let mut acc = Obligations::default();
        let mut consuming = false;
        out.push(acc);
        for l in links {
            if l.op == Op::Lt {
                consuming = false;
            }
            if tok.is_solid_tile() && l.token.ghost && l.token.terminal == tok.terminal {
                consuming = true;
            }
            if l.token.terminal.is_grout() || consuming {
                acc += Obligations::of_token(&l.token);
            }
            if consuming {
                if let Some(c) = l.cell.as_ref().filter(|c| c.is_hole()) {
                    acc += c.obligations();
                }
            }
            out.push(acc);
        }
        out
    }

    /// Every candidate plan for pushing `tok`. Unless `exhaustive`, descent
    /// stops once no deeper plan can beat the best found so far.
    pub fn plans(&self, k: &Stack, rs: &[Rc<Term>], tok: &Token, exhaustive: bool) -> Vec<Plan> {
        let links = &k.links;
        let removable = Self::removable_prefix(links, tok);
        let mut out: Vec<Plan> = Vec::new();
        let mut top = links.len();
        let mut rs: Vec<Rc<Term>> = rs.to_vec();
        let mut acc = Obligations::default();
        let mut d = 0;
        loop {
            let head = if top == 0 { Terminal::Start } else { links[top - 1].token.terminal };
            self.shift_plans(top, head, &rs, tok, acc, d, &mut out);
            if top == 0 {
                break;
            }
            let seg = Self::segment_start(&links[..top]);
            self.consume_plans(&links[..top], seg, &rs, tok, acc, d, &mut out);
            // Descend one level.
            if links[seg].token.terminal.is_grout() {
                let mut rs2: Vec<Rc<Term>> = links[seg..top].iter().filter_map(|l| l.cell.clone()).collect();
                for l in &links[seg..top] {
                    acc = acc - Obligations::of_token(&l.token);
                }
                rs2.extend(rs);
                rs = rs2;
            } else {
                let Some((s, left, cost)) = self.reduce_segment(&links[seg..top], &rs) else { break };
                acc += cost;
                let mut rs2 = vec![s];
                rs2.extend(left);
                rs = rs2;
            }
            top = seg;
            d += 1;
            if !exhaustive {
                if let Some(best) = out.iter().min_by(|a, b| a.rank().cmp(&b.rank())) {
                    let bound = acc - removable[top];
                    if (best.delta.key(), best.reductions) < (bound.key(), d) {
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn best_plan(&self, k: &Stack, rs: &[Rc<Term>], tok: &Token) -> Plan {
        self.plans(k, rs, tok, false)
            .into_iter()
            .min_by(|a, b| a.rank().cmp(&b.rank()))
            .expect("push is total: some plan always exists")
    }

    pub fn apply(&self, k: &Stack, plan: &Plan) -> Stack {
        let mut links = k.links[..plan.keep].to_vec();
        links.extend(plan.new_links.iter().cloned());
        Stack { links }
    }

    pub fn apply_mut(&self, k: &mut Stack, plan: &Plan) {
        k.links.truncate(plan.keep);
        k.links.extend(plan.new_links.iter().cloned());
    }

    /// Applies the best plan in place.
    pub fn push_mut(&self, k: &mut Stack, rs: &[Rc<Term>], tok: &Token) -> Plan {
        let plan = self.best_plan(k, rs, tok);
        self.apply_mut(k, &plan);
        plan
    }

    pub fn push(&self, k: &Stack, rs: Vec<Rc<Term>>, tok: &Token) -> Stack {
        let plan = self.best_plan(k, &rs, tok);
        self.apply(k, &plan)
    }

    /// Pushes `⧐` and extracts the completed term.
    pub fn finish(&self, k: &Stack) -> Rc<Term> {
        let mut k = k.clone();
        self.push_mut(&mut k, &[], &Token::end());
        k.result().expect("pushing the end delimiter collapses the stack")
    }

    pub fn parse(&self, toks: &[Token]) -> Rc<Term> {
        let mut k = Stack::new();
        for t in toks {
            self.push_mut(&mut k, &[], t);
        }
        self.push_mut(&mut k, &[], &Token::end());
        k.result().expect("pushing the end delimiter collapses the stack")
    }

    /// Parses and records the stack after every push, `⧐` included.
    pub fn parse_trace(&self, toks: &[Token]) -> (Rc<Term>, Vec<Stack>) {
        let mut k = Stack::new();
        let mut trace = Vec::with_capacity(toks.len() + 1);
        for t in toks.iter().chain(std::iter::once(&Token::end())) {
            self.push_mut(&mut k, &[], t);
            trace.push(k.clone());
        }
        (k.result().expect("pushing the end delimiter collapses the stack"), trace)
    }

    // ── independent well-formedness ──

    /// Whether `n` (or `⟨⊥ s ⊥⟩` for the term's sort when absent) produces
    /// `t`, by matching productions of the grout-injected grammar.
    pub fn well_formed_term(&self, n: Option<BoundedSort>, t: &Term) -> bool {
        let Some(n) = n else {
            return (0..self.g().sorts.len()).any(|s| self.well_formed_term(Some(BoundedSort::unbounded(s)), t));
        };
        // Chains of any length.
        let infix = Terminal::Grout(GroutShape::Infix, n.sort);
        let is_chain = t.children.len() >= 3
            && t.children.iter().enumerate().all(|(i, c)| match c {
                Child::Tok(x) => i % 2 == 1 && x.terminal == infix,
                Child::Term(_) => i % 2 == 0,
            });
        if is_chain {
            return n.left == Precedence::Bottom
                && n.right == Precedence::Bottom
                && t.child_terms().all(|c| self.well_formed_term(Some(BoundedSort::zero(n.sort)), c));
        }
        self.elab().productions(n).iter().any(|p| {
            p.product.len() == t.children.len()
                && p.product.iter().zip(&t.children).all(|(it, c)| match (it, c) {
                    (Item::T(tau), Child::Tok(x)) => *tau == x.terminal,
                    (Item::N(m), Child::Term(x)) => self.well_formed_term(Some(*m), x),
                    _ => false,
                })
        })
    }

    /// Every link is backed by a table step whose slot produces its cell.
    pub fn well_formed_stack(&self, k: &Stack) -> bool {
        let mut left = Terminal::Start;
        for l in &k.links {
            let step = RelStep { left, op: l.op, right: l.token.terminal, slot: l.slot };
            if l.op == Op::Gt || !self.table.has_step(&step) {
                return false;
            }
            let cell_ok = match (&l.slot, &l.cell) {
                (None, None) => true,
                (Some(n), Some(c)) => self.well_formed_term(Some(*n), c),
                _ => false,
            };
            if !cell_ok {
                return false;
            }
            left = l.token.terminal;
        }
        true
    }

    /// Recomputes a term's obligations by a fresh scan.
    pub fn count_obligations(t: &Term) -> Obligations {
        t.tokens().iter().fold(Obligations::default(), |acc, x| acc + Obligations::of_token(x))
    }

    /// A walk as the plan it would be with no reductions.
    pub fn walk_plan(&self, w: &Walk, tok: &Token) -> Option<Plan> {
        self.shift_plan(0, &w.steps, &[], tok, Obligations::default(), 0)
    }
}

/// Counts `{operand, ghost, sort, infix}` obligations in a term.
pub fn obligations(t: &Term) -> Obligations {
    Parser::count_obligations(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin_hazel, Label};

    fn lit(p: &Parser, text: &str, sort: &str) -> Token {
        let g = p.g();
        let s = g.sort_id(sort).unwrap();
        let t = g.tiles_with_label(&Label::Lit(text.into())).into_iter().find(|t| g.tiles[*t].mold.sort == s).unwrap();
        Token::tile(t, text)
    }

    fn class(p: &Parser, text: &str, class: &str, sort: &str) -> Token {
        let g = p.g();
        let s = g.sort_id(sort).unwrap();
        let c = g.token_classes.iter().position(|c| c.name == class).unwrap();
        let t = g.tiles_with_label(&Label::Class(c)).into_iter().find(|t| g.tiles[*t].mold.sort == s).unwrap();
        Token::tile(t, text)
    }

    fn num(p: &Parser, n: &str) -> Token {
        class(p, n, "num", "E")
    }

    #[test]
    fn empty_input_is_one_hole() {
        let p = Parser::new(&builtin_hazel());
        let t = p.parse(&[]);
        assert_eq!(t.to_text(false), "⬚");
        assert_eq!(obligations(&t), Obligations { operand_grout: 1, ..Default::default() });
    }

    #[test]
    fn two_plus_gets_hole() {
        let p = Parser::new(&builtin_hazel());
        let t = p.parse(&[num(&p, "2"), lit(&p, "+", "E")]);
        assert_eq!(t.to_text(false), "2 + ⬚");
        assert!(p.well_formed_term(None, &t));
    }

    #[test]
    fn precedence_nests_star_under_plus() {
        let p = Parser::new(&builtin_hazel());
        let toks = [num(&p, "1"), lit(&p, "+", "E"), num(&p, "2"), lit(&p, "*", "E"), num(&p, "3")];
        let t = p.parse(&toks);
        assert_eq!(t.to_sexp(), "1 + (2 * 3)");
        assert!(obligations(&t).is_zero());
        let toks = [num(&p, "1"), lit(&p, "*", "E"), num(&p, "2"), lit(&p, "+", "E"), num(&p, "3")];
        assert_eq!(p.parse(&toks).to_sexp(), "(1 * 2) + 3");
        let toks = [num(&p, "1"), lit(&p, "-", "E"), num(&p, "2"), lit(&p, "-", "E"), num(&p, "3")];
        let mut toks = toks.to_vec();
        let infix = p.g().tiles.iter().position(|t| t.label == Label::Lit("-".into()) && t.mold.prec == 1).unwrap();
        toks[1] = Token::tile(infix, "-");
        toks[3] = Token::tile(infix, "-");
        assert_eq!(p.parse(&toks).to_sexp(), "(1 - 2) - 3");
    }

    #[test]
    fn adjacent_operands_get_infix_grout() {
        let p = Parser::new(&builtin_hazel());
        let t = p.parse(&[num(&p, "2"), num(&p, "3")]);
        assert_eq!(t.to_text(false), "2 ⟐ 3");
        assert_eq!(obligations(&t), Obligations { infix_grout: 1, ..Default::default() });
        let t = p.parse(&[num(&p, "1"), num(&p, "2"), num(&p, "3")]);
        assert_eq!(t.to_text(false), "1 ⟐ 2 ⟐ 3");
    }

    #[test]
    fn let_without_in_gets_ghost() {
        let p = Parser::new(&builtin_hazel());
        let toks = [lit(&p, "let", "E"), class(&p, "x", "id", "P"), lit(&p, "=", "E"), num(&p, "4")];
        let t = p.parse(&toks);
        assert_eq!(t.to_text(false), "let x = 4 [in] ⬚");
        assert!(p.well_formed_term(None, &t));
    }

    #[test]
    fn lone_let_gets_ghosts_and_holes() {
        let p = Parser::new(&builtin_hazel());
        let t = p.parse(&[lit(&p, "let", "E")]);
        assert_eq!(t.to_text(false), "let ⬚ [=] ⬚ [in] ⬚");
        assert_eq!(obligations(&t), Obligations { operand_grout: 3, ghosts: 2, ..Default::default() });
    }

    #[test]
    fn arrow_in_pattern_transitions_sort() {
        let p = Parser::new(&builtin_hazel());
        let toks = [lit(&p, "let", "E"), class(&p, "x", "id", "P"), lit(&p, "->", "T")];
        let t = p.parse(&toks);
        // `x` stays a pattern, so the type needs grout on both sides of it.
        assert_eq!(obligations(&t).sort_grout, 2);
        assert!(t.to_text(false).starts_with("let ⦊"), "{}", t.to_text(false));
        assert!(p.well_formed_term(None, &t));
    }

    #[test]
    fn fill_examples() {
        let p = Parser::new(&builtin_hazel());
        let g = p.g().clone();
        let [es, ps, ts] = ["E", "P", "T"].map(|s| g.sort_id(s).unwrap());
        let u = |s| Some(BoundedSort::unbounded(s));
        let (cells, cost) = p.fill(&[], &[u(es)]).unwrap();
        assert_eq!(cells[0].as_ref().unwrap().to_text(false), "⬚");
        assert_eq!(cost, Obligations { operand_grout: 1, ..Default::default() });
        let two = p.parse(&[num(&p, "2")]);
        let three = p.parse(&[num(&p, "3")]);
        let (cells, _) = p.fill(&[two.clone(), three], &[u(es)]).unwrap();
        assert_eq!(cells[0].as_ref().unwrap().to_text(false), "2 ⟐ 3");
        let pat = p.form_term(
            p.elab().templates.iter().position(|t| t.sort == ps && t.form.len() == 1).unwrap(),
            vec![Child::Tok(class(&p, "x", "id", "P"))],
        );
        let (cells, cost) = p.fill(&[pat], &[u(ts)]).unwrap();
        assert_eq!(cells[0].as_ref().unwrap().to_text(false), "⦊ x");
        assert_eq!(cost, Obligations { sort_grout: 1, ..Default::default() });
        assert_eq!(p.fill(&[], &[]).unwrap().0, vec![]);
        assert!(p.fill(&[two], &[None]).is_none());
    }

    #[test]
    fn plan_delta_matches_recount() {
        let p = Parser::new(&builtin_hazel());
        let toks = [lit(&p, "let", "E"), num(&p, "2"), lit(&p, "(", "E"), lit(&p, "in", "E"), num(&p, "3"), num(&p, "4")];
        let mut k = Stack::new();
        for t in toks.iter().chain(std::iter::once(&Token::end())) {
            for plan in p.plans(&k, &[], t, true) {
                let after = p.apply(&k, &plan);
                assert_eq!(after.obligations() - k.obligations(), plan.delta);
            }
            p.push_mut(&mut k, &[], t);
            assert!(p.well_formed_stack(&k), "{}", k.show());
        }
    }

    #[test]
    fn json_shape() {
        let p = Parser::new(&builtin_hazel());
        let t = p.parse(&[num(&p, "2"), lit(&p, "+", "E")]);
        let s = serde_json::to_string(&t.to_json(p.g())).unwrap();
        assert_eq!(
            s,
            r#"{"children":[{"children":[{"ghost":false,"kind":"token","sort":"E","text":"2"}],"kind":"term"},{"ghost":false,"kind":"token","sort":"E","text":"+"},{"children":[{"kind":"grout","shape":"operand","sort":"E"}],"kind":"term"}],"kind":"term"}"#
        );
    }
}
