//! Random inputs for fuzzing, oracles and benchmarks: derivations drawn
//! straight from a grammar's levels, raw token texts, and small grammars.
//!
//! Derivations use their own precedence bookkeeping over [`Pbg`] rules, not
//! the elaborated grammar, so a parse of their tokens can be checked against
//! the tree that produced them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::elab::{Elab, ProdKind, Terminal};
use crate::grammar::{enumerate_forms, Assoc, Label, Pbg, Precedence, SortId, Symbol, TileId, FORM_CAP};
use crate::molder::candidates;
use crate::parser::{Child, Term, Token};

const ID_POOL: [&str; 12] = ["x", "y", "z", "a", "b", "f", "g", "n", "foo", "bar", "acc", "k"];
const NUM_POOL: [&str; 8] = ["0", "1", "2", "3", "7", "42", "100", "9"];

/// A derivation tree: one grammar form with its tokens and subtrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub sort: SortId,
    pub level: u32,
    pub form: Vec<Symbol>,
    /// One entry per form symbol.
    pub children: Vec<TreeChild>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeChild {
    Tok(TileId, String),
    Sub(Tree),
}

impl Tree {
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Token>) {
        for c in &self.children {
            match c {
                TreeChild::Tok(t, text) => out.push(Token::tile(*t, text.clone())),
                TreeChild::Sub(s) => s.collect(out),
            }
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| match c {
                TreeChild::Sub(s) => s.depth(),
                TreeChild::Tok(..) => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn text(&self) -> String {
        self.tokens().iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// Reads a parsed term back as a derivation tree; `None` if it contains
/// grout or ghosts.
pub fn tree_of_term(elab: &Elab, t: &Term) -> Option<Tree> {
    let ProdKind::Form(i) = t.kind else { return None };
    let tpl = &elab.templates[i];
    let children = t
        .children
        .iter()
        .map(|c| match c {
            Child::Tok(x) => match x.terminal {
                Terminal::Tile(id) if !x.ghost => Some(TreeChild::Tok(id, x.text.clone())),
                _ => None,
            },
            Child::Term(s) => tree_of_term(elab, s).map(TreeChild::Sub),
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Tree { sort: tpl.sort, level: tpl.level, form: tpl.form.clone(), children })
}

/// Side bound of a derivation context: unbounded, or the level of the
/// operator the subtree sits against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Free,
    Against(u32),
}

/// Random derivations of one grammar.
pub struct Deriver<'g> {
    g: &'g Pbg,
    /// Every form per sort, with its level.
    forms: Vec<Vec<(u32, Vec<Symbol>)>>,
    /// Sample texts per class tile.
    samples: BTreeMap<TileId, Vec<String>>,
    /// Minimal height of a complete derivation per context, where one exists.
    min_height: BTreeMap<(Side, SortId, Side), usize>,
}

impl<'g> Deriver<'g> {
    pub fn new(g: &'g Pbg) -> Self {
        let mut samples = BTreeMap::new();
        for (t, def) in g.tiles.iter().enumerate() {
            if let Label::Class(_) = def.label {
                let ok: Vec<String> = ID_POOL
                    .iter()
                    .chain(NUM_POOL.iter())
                    .filter(|s| g.tile_accepts(t, s) && candidates(g, s).contains(&t))
                    .map(|s| s.to_string())
                    .collect();
                samples.insert(t, ok);
            }
        }
        let mut forms = vec![Vec::new(); g.sorts.len()];
        for &(s, level) in g.rules.keys() {
            let lang = enumerate_forms(g, s, Precedence::Level(level), FORM_CAP).unwrap_or_default();
            for form in lang {
                let sampleable = form.iter().all(|sym| match sym {
                    Symbol::Tile(t) => samples.get(t).is_none_or(|v| !v.is_empty()),
                    Symbol::Sort(_) => true,
                });
                if sampleable {
                    forms[s].push((level, form));
                }
            }
        }
        let mut d = Deriver { g, forms, samples, min_height: BTreeMap::new() };
        d.compute_heights();
        d
    }

    fn contexts(&self) -> Vec<(Side, SortId, Side)> {
        let mut out = Vec::new();
        for s in 0..self.g.sorts.len() {
            let mut sides = vec![Side::Free];
            sides.extend(self.g.levels(s).into_iter().map(Side::Against));
            for &l in &sides {
                for &r in &sides {
                    out.push((l, s, r));
                }
            }
        }
        out
    }

    /// Whether a form of `level` may appear in the context.
    pub fn admits(&self, ctx: (Side, SortId, Side), level: u32, form: &[Symbol]) -> bool {
        let (left, s, right) = ctx;
        let assoc = self.g.assoc(s, level);
        let left_ok = form.first() != Some(&Symbol::Sort(s))
            || match left {
                Side::Free => true,
                Side::Against(m) => level > m || (level == m && assoc == Some(Assoc::Right)),
            };
        let right_ok = form.last() != Some(&Symbol::Sort(s))
            || match right {
                Side::Free => true,
                Side::Against(m) => level > m || (level == m && assoc == Some(Assoc::Left)),
            };
        left_ok && right_ok
    }

    /// Context of the operand at symbol `i` of a form placed in `ctx`.
    pub fn child_context(&self, ctx: (Side, SortId, Side), level: u32, form: &[Symbol], i: usize) -> Option<(Side, SortId, Side)> {
        let Symbol::Sort(r) = form[i] else { return None };
        let (left, s, right) = ctx;
        Some(if r == s && i == 0 {
            (left, r, Side::Against(level))
        } else if r == s && i + 1 == form.len() {
            (Side::Against(level), r, right)
        } else {
            (Side::Free, r, Side::Free)
        })
    }

    fn compute_heights(&mut self) {
        let ctxs = self.contexts();
        loop {
            let mut changed = false;
            for &c in &ctxs {
                let mut best = self.min_height.get(&c).copied();
                for (level, form) in &self.forms[c.1] {
                    if !self.admits(c, *level, form) {
                        continue;
                    }
                    let mut h = 1;
                    let mut ok = true;
                    for i in 0..form.len() {
                        if let Some(cc) = self.child_context(c, *level, form, i) {
                            match self.min_height.get(&cc) {
                                Some(x) => h = h.max(1 + x),
                                None => ok = false,
                            }
                        }
                    }
                    if ok && best.is_none_or(|b| h < b) {
                        best = Some(h);
                    }
                }
                if best != self.min_height.get(&c).copied() {
                    self.min_height.insert(c, best.expect("only ever improves"));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn g(&self) -> &Pbg {
        self.g
    }

    /// Forms of a sort with their levels.
    pub fn forms(&self, s: SortId) -> &[(u32, Vec<Symbol>)] {
        &self.forms[s]
    }

    pub fn min_height(&self, ctx: (Side, SortId, Side)) -> Option<usize> {
        self.min_height.get(&ctx).copied()
    }

    /// Forms usable at `ctx` by a subtree of height at most `budget`.
    pub fn options(&self, ctx: (Side, SortId, Side), budget: usize) -> Vec<(u32, &[Symbol])> {
        self.forms[ctx.1]
            .iter()
            .filter(|(level, form)| {
                self.admits(ctx, *level, form)
                    && (0..form.len()).all(|i| match self.child_context(ctx, *level, form, i) {
                        Some(cc) => self.min_height(cc).is_some_and(|h| h < budget),
                        None => true,
                    })
                    && budget >= 1
            })
            .map(|(l, f)| (*l, f.as_slice()))
            .collect()
    }

    /// A random derivation of the root sort of height at most `depth`.
    pub fn derive(&self, rng: &mut impl Rng, depth: usize) -> Option<Tree> {
        self.derive_at(rng, (Side::Free, self.g.root, Side::Free), depth)
    }

    pub fn derive_at(&self, rng: &mut impl Rng, ctx: (Side, SortId, Side), depth: usize) -> Option<Tree> {
        let opts = self.options(ctx, depth);
        let &(level, form) = opts.choose(rng)?;
        let children = (0..form.len())
            .map(|i| match form[i] {
                Symbol::Tile(t) => Some(TreeChild::Tok(t, self.sample_text(rng, t))),
                Symbol::Sort(_) => {
                    let cc = self.child_context(ctx, level, form, i).expect("sort symbol");
                    self.derive_at(rng, cc, depth - 1).map(TreeChild::Sub)
                }
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Tree { sort: ctx.1, level, form: form.to_vec(), children })
    }

    pub fn sample_text(&self, rng: &mut impl Rng, t: TileId) -> String {
        match &self.g.tiles[t].label {
            Label::Lit(s) => s.clone(),
            Label::Class(_) => self.samples[&t].choose(rng).expect("sampleable").clone(),
        }
    }

    /// Every text a token of this grammar may have, for raw fuzzing.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .g
            .tiles
            .iter()
            .enumerate()
            .flat_map(|(t, def)| match &def.label {
                Label::Lit(s) => vec![s.clone()],
                Label::Class(_) => self.samples[&t].clone(),
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Random token texts drawn from the grammar's vocabulary.
pub fn random_texts(d: &Deriver, rng: &mut impl Rng, len: usize) -> Vec<String> {
    let vocab = d.vocabulary();
    (0..len).map(|_| vocab.choose(rng).expect("nonempty vocabulary").clone()).collect()
}

/// A grammatical program of at least `tokens` tokens: random derivations,
/// each wrapped in the root sort's bracket form when it has one, joined by
/// its loosest left-associative infix operator.
pub fn program_text(d: &Deriver, rng: &mut impl Rng, tokens: usize) -> String {
    let g = d.g();
    let root = Symbol::Sort(g.root);
    let text = |sym: &Symbol| match sym {
        Symbol::Tile(t) => Some(g.tile_text(*t)),
        Symbol::Sort(_) => None,
    };
    let bracket = d
        .forms(g.root)
        .iter()
        .find(|(_, f)| f.len() == 3 && f[1] == root && f[0] != root && f[2] != root)
        .and_then(|(_, f)| Some((text(&f[0])?, text(&f[2])?)));
    let joiner = d
        .forms(g.root)
        .iter()
        .filter(|(l, f)| f.len() == 3 && f[0] == root && f[2] == root && g.assoc(g.root, *l) == Some(Assoc::Left))
        .filter_map(|(l, f)| Some((*l, text(&f[1])?)))
        .min_by_key(|(l, _)| *l);
    let mut parts: Vec<String> = Vec::new();
    let mut n = 0;
    while tokens > 0 && n <= tokens {
        let Some(t) = d.derive(rng, 4) else { break };
        let body = t.text();
        n += t.tokens().len() + 1;
        parts.push(match &bracket {
            Some((open, close)) => {
                n += 2;
                format!("{open} {body} {close}")
            }
            None => body,
        });
    }
    let sep = joiner.map(|(_, t)| format!(" {t} ")).unwrap_or_else(|| " ".into());
    parts.join(&sep)
}

// ─────────────────────────────── mini grammars ───────────────────────────────

/// A random small grammar as grammar-file JSON: up to three sorts with up to
/// four levels each. Every sort gets an atom on its tightest level, so every
/// sort derives something, and each sort's tightest level brackets the next
/// sort, so every sort is reachable from the root.
pub fn mini_grammar_json(rng: &mut impl Rng) -> String {
    let nsorts = rng.gen_range(1..=3);
    let names: Vec<String> = ["A", "B", "C"][..nsorts].iter().map(|s| s.to_string()).collect();
    let mut counter = 0;
    let mut fresh = |prefix: &str| {
        counter += 1;
        format!("{prefix}{counter}")
    };
    let mut sorts = serde_json::Map::new();
    for (si, s) in names.iter().enumerate() {
        let nlevels = rng.gen_range(1..=4u32);
        let mut levels = Vec::new();
        for l in 0..nlevels {
            let mut forms: Vec<String> = Vec::new();
            let mut assoc = serde_json::Value::Null;
            if l + 1 == nlevels {
                forms.push(format!("'{}'", ["a", "b", "c"][si]));
                if rng.gen_bool(0.5) {
                    forms.push(format!("'(' {s} ')'"));
                }
                if si == 0 && rng.gen_bool(0.3) {
                    forms.push("$id".into());
                }
                // Keeps every sort reachable from the root.
                if let Some(next) = names.get(si + 1) {
                    forms.push(format!("'{}' {next} '{}'", fresh("w"), fresh("v")));
                }
            } else {
                let count = rng.gen_range(1..=2);
                for _ in 0..count {
                    let other = names.choose(rng).expect("nonempty").clone();
                    let form = match rng.gen_range(0..6) {
                        0 => {
                            assoc = ["left", "right"].choose(rng).map(|a| serde_json::json!(a)).expect("nonempty");
                            format!("{s} '{}' {s}", fresh("o"))
                        }
                        1 => format!("{s} '{}' {s}", fresh("n")),
                        2 => format!("'{}' {s}", fresh("p")),
                        3 => format!("{s} '{}'", fresh("q")),
                        4 => format!("'{}' {other} '{}' {s}", fresh("k"), fresh("m")),
                        _ => format!("{s} '{}' {other}", fresh("c")),
                    };
                    forms.push(form);
                }
            }
            levels.push(serde_json::json!({"prec": l, "assoc": assoc, "forms": forms}));
        }
        // Shuffled so level declaration order is not load-bearing.
        levels.shuffle(rng);
        sorts.insert(s.clone(), serde_json::Value::Array(levels));
    }
    serde_json::json!({
        "root": "A",
        "token_classes": {"id": "[xyz]"},
        "sorts": sorts,
    })
    .to_string()
}
