//! Elaboration of a precedence-bounded grammar into bounded-sort productions,
//! plus grout injection.
//!
//! A bounded sort `⟨p s q⟩` produces the forms of `s` that win precedence
//! comparisons against `p` on the left and `q` on the right. Bounds are drawn
//! from `{⊥, 0, ⊤}` plus the declared levels of `s`, so every closure below is
//! finite.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::grammar::{Assoc, Pbg, Precedence, SortId, Symbol, TileId, FORM_CAP};

/// A nonterminal `⟨left sort right⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundedSort {
    pub left: Precedence,
    pub sort: SortId,
    pub right: Precedence,
}

impl BoundedSort {
    pub fn new(left: Precedence, sort: SortId, right: Precedence) -> Self {
        BoundedSort { left, sort, right }
    }

    /// `⟨⊥ s ⊥⟩`
    pub fn unbounded(sort: SortId) -> Self {
        Self::new(Precedence::Bottom, sort, Precedence::Bottom)
    }

    /// `⟨0 s 0⟩`
    pub fn zero(sort: SortId) -> Self {
        Self::new(Precedence::Zero, sort, Precedence::Zero)
    }

    pub fn show(&self, g: &Pbg) -> String {
        format!("⟨{} {} {}⟩", self.left, g.sort_name(self.sort), self.right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tip {
    Convex,
    Concave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroutShape {
    Operand,
    Infix,
    Prefix,
    Postfix,
}

impl GroutShape {
    pub fn tips(self) -> (Tip, Tip) {
        match self {
            GroutShape::Operand => (Tip::Convex, Tip::Convex),
            GroutShape::Infix => (Tip::Concave, Tip::Concave),
            GroutShape::Prefix => (Tip::Convex, Tip::Concave),
            GroutShape::Postfix => (Tip::Concave, Tip::Convex),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroutShape::Operand => "operand",
            GroutShape::Infix => "infix",
            GroutShape::Prefix => "prefix",
            GroutShape::Postfix => "postfix",
        }
    }

    pub fn glyph(self, ascii: bool) -> &'static str {
        match (self, ascii) {
            (GroutShape::Operand, false) => "⬚",
            (GroutShape::Infix, false) => "⟐",
            (GroutShape::Prefix, false) => "⦊",
            (GroutShape::Postfix, false) => "⦉",
            (GroutShape::Operand, true) => "_",
            (GroutShape::Infix, true) => "<>",
            (GroutShape::Prefix, true) => ">>",
            (GroutShape::Postfix, true) => "<<",
        }
    }
}

/// Terminals of the grout-injected grammar. `Start`/`End` are the root
/// delimiters `⧏`/`⧐`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    Start,
    End,
    Tile(TileId),
    Grout(GroutShape, SortId),
}

impl Terminal {
    pub fn is_tile(self) -> bool {
        matches!(self, Terminal::Tile(_))
    }

    pub fn is_grout(self) -> bool {
        matches!(self, Terminal::Grout(..))
    }

    pub fn show(self, g: &Pbg) -> String {
        match self {
            Terminal::Start => "⧏".into(),
            Terminal::End => "⧐".into(),
            Terminal::Tile(t) => {
                let m = g.tiles[t].mold;
                format!("{}/{}{}.{}", g.tile_text(t), g.sort_name(m.sort), m.prec, m.position)
            }
            Terminal::Grout(shape, s) => {
                let tag = match shape {
                    GroutShape::Operand => "HOLE",
                    GroutShape::Infix => "INFIX",
                    GroutShape::Prefix => "PRE",
                    GroutShape::Postfix => "POST",
                };
                format!("{tag}:{}", g.sort_name(s))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    T(Terminal),
    N(BoundedSort),
}

/// Where a production came from; the parser uses this to rebuild terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProdKind {
    /// Index into `Elab::templates`.
    Form(usize),
    Operand,
    /// Infix grout chain with this many `⟐`.
    Chain(usize),
    /// `⦊ˢ ⟨⊥ r ⊥⟩`
    Prefix(SortId),
    /// `⟨⊥ r ⊥⟩ ⦉ˢ`
    Postfix(SortId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub producer: BoundedSort,
    pub product: Vec<Item>,
    pub kind: ProdKind,
}

impl Production {
    pub fn show(&self, g: &Pbg) -> String {
        let mut out = format!("{} ->", self.producer.show(g));
        for it in &self.product {
            out.push(' ');
            match it {
                Item::T(t) => out.push_str(&t.show(g)),
                Item::N(n) => out.push_str(&n.show(g)),
            }
        }
        out
    }
}

/// `p ≺_s l` extended to the bottom, zero and top bounds: does a left
/// context of precedence `p` admit a form of level `l` as its right operand?
pub fn prec_lt(g: &Pbg, s: SortId, p: Precedence, l: Precedence) -> bool {
    match (p, l) {
        (Precedence::Top, _) => false,
        (Precedence::Bottom, _) => true,
        (Precedence::Zero, Precedence::Zero) => false,
        (Precedence::Zero, _) => true,
        (Precedence::Level(m), Precedence::Level(n)) => {
            m < n || (m == n && g.assoc(s, n) == Some(Assoc::Right))
        }
        (Precedence::Level(_), Precedence::Top) => true,
        (Precedence::Level(_), _) => false,
    }
}

/// `l ≻_s q`: does a right context of precedence `q` admit a form of level
/// `l` as its left operand?
pub fn prec_gt(g: &Pbg, s: SortId, l: Precedence, q: Precedence) -> bool {
    match (l, q) {
        (_, Precedence::Top) => false,
        (_, Precedence::Bottom) => true,
        (Precedence::Zero, Precedence::Zero) => false,
        (_, Precedence::Zero) => true,
        (Precedence::Level(n), Precedence::Level(m)) => {
            n > m || (n == m && g.assoc(s, n) == Some(Assoc::Left))
        }
        (Precedence::Top, Precedence::Level(_)) => true,
        (_, Precedence::Level(_)) => false,
    }
}

/// The reduction of one form: its level and which sides expose a
/// self-sort operand to outside comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub sort: SortId,
    pub level: u32,
    pub form: Vec<Symbol>,
    pub left_exposed: bool,
    pub right_exposed: bool,
}

impl Template {
    fn new(sort: SortId, level: u32, form: Vec<Symbol>) -> Self {
        let left_exposed = form.first() == Some(&Symbol::Sort(sort));
        let right_exposed = form.last() == Some(&Symbol::Sort(sort));
        Template { sort, level, form, left_exposed, right_exposed }
    }

    /// The tightest producer for this form: the form's level on exposed
    /// sides and `⊤` on closed ones.
    pub fn reduced_producer(&self) -> BoundedSort {
        let lv = Precedence::Level(self.level);
        BoundedSort::new(
            if self.left_exposed { lv } else { Precedence::Top },
            self.sort,
            if self.right_exposed { lv } else { Precedence::Top },
        )
    }

    /// Produce-Bound: whether `n` may produce this form.
    pub fn admits(&self, g: &Pbg, n: BoundedSort) -> bool {
        if n.sort != self.sort {
            return false;
        }
        let lv = Precedence::Level(self.level);
        let left_ok = if self.left_exposed { prec_lt(g, n.sort, n.left, lv) } else { n.left != Precedence::Top };
        let right_ok = if self.right_exposed { prec_gt(g, n.sort, lv, n.right) } else { n.right != Precedence::Top };
        left_ok && right_ok
    }

    /// Child bound for symbol index `i` when produced under `n`.
    pub fn child_bound(&self, n: BoundedSort, i: usize) -> Option<BoundedSort> {
        let Symbol::Sort(r) = self.form[i] else { return None };
        let lv = Precedence::Level(self.level);
        Some(if r == self.sort && i == 0 {
            BoundedSort::new(n.left, r, lv)
        } else if r == self.sort && i + 1 == self.form.len() {
            BoundedSort::new(lv, r, n.right)
        } else {
            BoundedSort::unbounded(r)
        })
    }

    pub fn instantiate(&self, g: &Pbg, n: BoundedSort, index: usize) -> Option<Production> {
        if !self.admits(g, n) {
            return None;
        }
        let product = (0..self.form.len())
            .map(|i| match self.form[i] {
                Symbol::Tile(t) => Item::T(Terminal::Tile(t)),
                Symbol::Sort(_) => Item::N(self.child_bound(n, i).expect("sort symbol")),
            })
            .collect();
        Some(Production { producer: n, product, kind: ProdKind::Form(index) })
    }

    pub fn tiles(&self) -> Vec<TileId> {
        self.form
            .iter()
            .filter_map(|s| match s {
                Symbol::Tile(t) => Some(*t),
                Symbol::Sort(_) => None,
            })
            .collect()
    }
}

/// Reduction judgment for a single form: fails if the form is not in the
/// rule's language.
pub fn reduce_form(g: &Pbg, s: SortId, p: Precedence, form: &[Symbol]) -> Result<Template, String> {
    let Precedence::Level(level) = p else { return Err(format!("{p} is not a declared level")) };
    let rule = g.rules.get(&(s, level)).ok_or_else(|| format!("no rule for {} level {level}", g.sort_name(s)))?;
    if !rule.regex.language(form.len()).contains(form) {
        return Err(format!("{} is not a form of {} level {level}", g.form_text(form), g.sort_name(s)));
    }
    Ok(Template::new(s, level, form.to_vec()))
}

/// The bounded-sort view of a grammar with all lookups precomputed.
#[derive(Clone, Debug)]
pub struct Elab {
    pub g: Pbg,
    /// False for the plain elaborated grammar without grout productions.
    pub grout: bool,
    pub templates: Vec<Template>,
    /// Template indices by sort.
    by_sort: Vec<Vec<usize>>,
    /// `(σ, sort r)` such that `⟨0 s 0⟩ ◁* ⟨⊥ r ⊥⟩`, keyed by `s`.
    postfix_children: Vec<Vec<SortId>>,
    /// Every bounded sort reachable from `⟨⊥ ŝ ⊥⟩`.
    pub reachable: BTreeSet<BoundedSort>,
    prods: BTreeMap<BoundedSort, Vec<Production>>,
    leftmost: BTreeMap<BoundedSort, BTreeSet<BoundedSort>>,
    rightmost: BTreeMap<BoundedSort, BTreeSet<BoundedSort>>,
}

impl Elab {
    pub fn new(g: &Pbg) -> Self {
        Self::build(g, true)
    }

    /// The elaborated grammar before grout injection.
    pub fn without_grout(g: &Pbg) -> Self {
        Self::build(g, false)
    }

    fn build(g: &Pbg, grout: bool) -> Self {
        let mut templates = Vec::new();
        for (&(s, level), rule) in &g.rules {
            for form in rule.regex.language(FORM_CAP) {
                templates.push(Template::new(s, level, form));
            }
        }
        let mut by_sort = vec![Vec::new(); g.sorts.len()];
        for (i, t) in templates.iter().enumerate() {
            by_sort[t.sort].push(i);
        }
        let mut e = Elab {
            g: g.clone(),
            grout,
            templates,
            by_sort,
            postfix_children: vec![Vec::new(); g.sorts.len()],
            reachable: BTreeSet::new(),
            prods: BTreeMap::new(),
            leftmost: BTreeMap::new(),
            rightmost: BTreeMap::new(),
        };
        // First pass without postfix grout decides where postfix is harmless.
        e.close();
        let mut post = vec![Vec::new(); g.sorts.len()];
        for s in 0..g.sorts.len() {
            let z = BoundedSort::zero(s);
            for r in 0..g.sorts.len() {
                if r != s && e.leftmost_closure(z).contains(&BoundedSort::unbounded(r)) {
                    post[s].push(r);
                }
            }
        }
        if grout && post.iter().any(|v| !v.is_empty()) {
            e.postfix_children = post;
            e.prods.clear();
            e.leftmost.clear();
            e.rightmost.clear();
            e.close();
        }
        e
    }

    fn all_bounds(&self, s: SortId) -> Vec<Precedence> {
        let mut v = vec![Precedence::Bottom, Precedence::Zero];
        v.extend(self.g.levels(s).into_iter().map(Precedence::Level));
        v.push(Precedence::Top);
        v
    }

    /// Every bounded sort over the finite bound abstraction.
    pub fn all_bounded_sorts(&self) -> Vec<BoundedSort> {
        let mut out = Vec::new();
        for s in 0..self.g.sorts.len() {
            for &p in &self.all_bounds(s) {
                for &q in &self.all_bounds(s) {
                    out.push(BoundedSort::new(p, s, q));
                }
            }
        }
        out
    }

    /// Materializes productions for every bounded sort and computes the
    /// reachable set and leftmost/rightmost closures.
    fn close(&mut self) {
        for n in self.all_bounded_sorts() {
            let ps = self.compute_productions(n);
            self.prods.insert(n, ps);
        }
        let root = BoundedSort::unbounded(self.g.root);
        let mut reach = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(n) = queue.pop_front() {
            for p in &self.prods[&n] {
                for it in &p.product {
                    if let Item::N(m) = it {
                        if reach.insert(*m) {
                            queue.push_back(*m);
                        }
                    }
                }
            }
        }
        self.reachable = reach;
        let keys: Vec<BoundedSort> = self.prods.keys().copied().collect();
        for n in keys {
            let l = self.closure(n, |p| match p.product.first() {
                Some(Item::N(m)) => Some(*m),
                _ => None,
            });
            let r = self.closure(n, |p| match p.product.last() {
                Some(Item::N(m)) => Some(*m),
                _ => None,
            });
            self.leftmost.insert(n, l);
            self.rightmost.insert(n, r);
        }
    }

    fn closure(&self, n: BoundedSort, step: impl Fn(&Production) -> Option<BoundedSort>) -> BTreeSet<BoundedSort> {
        let mut seen = BTreeSet::from([n]);
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            for p in &self.prods[&m] {
                if let Some(k) = step(p) {
                    if seen.insert(k) {
                        stack.push(k);
                    }
                }
            }
        }
        seen
    }

    fn compute_productions(&self, n: BoundedSort) -> Vec<Production> {
        let mut out = self.tile_productions(n);
        if !self.grout {
            return out;
        }
        let s = n.sort;
        out.push(Production { producer: n, product: vec![Item::T(Terminal::Grout(GroutShape::Operand, s))], kind: ProdKind::Operand });
        if n.left == Precedence::Bottom && n.right == Precedence::Bottom {
            for k in 1..=2 {
                let mut product = vec![Item::N(BoundedSort::zero(s))];
                for _ in 0..k {
                    product.push(Item::T(Terminal::Grout(GroutShape::Infix, s)));
                    product.push(Item::N(BoundedSort::zero(s)));
                }
                out.push(Production { producer: n, product, kind: ProdKind::Chain(k) });
            }
        }
        if n.left != Precedence::Top && n.right != Precedence::Top {
            for r in 0..self.g.sorts.len() {
                if r != s {
                    out.push(Production {
                        producer: n,
                        product: vec![Item::T(Terminal::Grout(GroutShape::Prefix, s)), Item::N(BoundedSort::unbounded(r))],
                        kind: ProdKind::Prefix(r),
                    });
                }
            }
            for &r in &self.postfix_children[s] {
                out.push(Production {
                    producer: n,
                    product: vec![Item::N(BoundedSort::unbounded(r)), Item::T(Terminal::Grout(GroutShape::Postfix, s))],
                    kind: ProdKind::Postfix(r),
                });
            }
        }
        out
    }

    /// Tile productions of `n` (Produce-Bound over all templates).
    pub fn tile_productions(&self, n: BoundedSort) -> Vec<Production> {
        self.by_sort
            .get(n.sort)
            .map(|ix| ix.iter().filter_map(|&i| self.templates[i].instantiate(&self.g, n, i)).collect())
            .unwrap_or_default()
    }

    /// Every production of `n` in the grout-injected grammar.
    pub fn productions(&self, n: BoundedSort) -> &[Production] {
        self.prods.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `a ◁* b`
    pub fn derives_leftmost(&self, a: BoundedSort, b: BoundedSort) -> bool {
        self.leftmost.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// `a ▷* b`
    pub fn derives_rightmost(&self, a: BoundedSort, b: BoundedSort) -> bool {
        self.rightmost.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn leftmost_closure(&self, a: BoundedSort) -> &BTreeSet<BoundedSort> {
        &self.leftmost[&a]
    }

    pub fn rightmost_closure(&self, a: BoundedSort) -> &BTreeSet<BoundedSort> {
        &self.rightmost[&a]
    }

    /// Whether the grammar has any postfix grout at all.
    pub fn has_postfix(&self) -> bool {
        self.postfix_children.iter().any(|v| !v.is_empty())
    }

    /// Productions of every reachable bounded sort, one per line.
    pub fn dump_cfg(&self) -> String {
        let mut out = String::new();
        for n in &self.reachable {
            for p in self.productions(*n) {
                out.push_str(&p.show(&self.g));
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for Tip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tip::Convex => "convex",
            Tip::Concave => "concave",
        })
    }
}

/// Tile productions of `n`.
pub fn produces(g: &Pbg, n: BoundedSort) -> Vec<Production> {
    Elab::new(g).tile_productions(n)
}

/// Every production of `n` after grout injection.
pub fn inject_grout(g: &Pbg, n: BoundedSort) -> Vec<Production> {
    Elab::new(g).productions(n).to_vec()
}

pub fn derives_leftmost(g: &Pbg, a: BoundedSort, b: BoundedSort) -> bool {
    Elab::new(g).derives_leftmost(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin_hazel, load_grammar, Label};

    fn tile(g: &Pbg, text: &str, sort: &str) -> TileId {
        let s = g.sort_id(sort).unwrap();
        g.tiles_with_label(&Label::Lit(text.into())).into_iter().find(|t| g.tiles[*t].mold.sort == s).unwrap()
    }

    fn has_tile_form(ps: &[Production], t: TileId) -> bool {
        ps.iter().any(|p| p.product.contains(&Item::T(Terminal::Tile(t))))
    }

    #[test]
    fn bounds_filter_forms() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let es = g.sort_id("E").unwrap();
        let plus = tile(&g, "+", "E");
        let let_ = tile(&g, "let", "E");
        let star = tile(&g, "*", "E");
        let ps = e.productions(BoundedSort::unbounded(es));
        assert!(has_tile_form(ps, plus) && has_tile_form(ps, let_));
        let b23 = BoundedSort::new(Precedence::Level(2), es, Precedence::Level(3));
        let ps = e.productions(b23);
        assert!(!has_tile_form(ps, plus));
        assert!(!has_tile_form(ps, let_));
        assert!(!has_tile_form(ps, star));
        assert!(ps.iter().any(|p| p.kind == ProdKind::Operand));
        let top = BoundedSort::new(Precedence::Top, es, Precedence::Top);
        let kinds: Vec<ProdKind> = e.productions(top).iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![ProdKind::Operand]);
    }

    #[test]
    fn plus_children_follow_left_assoc() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let es = g.sort_id("E").unwrap();
        let plus = tile(&g, "+", "E");
        let p = e
            .productions(BoundedSort::unbounded(es))
            .iter()
            .find(|p| p.product.get(1) == Some(&Item::T(Terminal::Tile(plus))))
            .unwrap()
            .clone();
        let (Item::N(l), Item::N(r)) = (p.product[0], p.product[2]) else { panic!() };
        let one_tpl = e.templates.iter().position(|t| t.form.contains(&Symbol::Tile(plus))).unwrap();
        assert!(e.templates[one_tpl].admits(&g, l));
        assert!(!e.templates[one_tpl].admits(&g, r));
    }

    #[test]
    fn let_children() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let es = g.sort_id("E").unwrap();
        let ps = g.sort_id("P").unwrap();
        let let_ = tile(&g, "let", "E");
        let p = e
            .productions(BoundedSort::unbounded(es))
            .iter()
            .find(|p| p.product[0] == Item::T(Terminal::Tile(let_)))
            .unwrap()
            .clone();
        assert_eq!(p.product[1], Item::N(BoundedSort::unbounded(ps)));
        assert_eq!(p.product[3], Item::N(BoundedSort::unbounded(es)));
        assert_eq!(p.product[5], Item::N(BoundedSort::new(Precedence::Level(0), es, Precedence::Bottom)));
    }

    #[test]
    fn grout_injection_shapes() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let es = g.sort_id("E").unwrap();
        let ps = g.sort_id("P").unwrap();
        let ts = g.sort_id("T").unwrap();
        let b23 = BoundedSort::new(Precedence::Level(2), es, Precedence::Level(3));
        assert!(e.productions(b23).iter().any(|p| p.kind == ProdKind::Operand));
        assert!(!e.productions(b23).iter().any(|p| matches!(p.kind, ProdKind::Chain(_))));
        let chain = e.productions(BoundedSort::unbounded(es)).iter().find(|p| p.kind == ProdKind::Chain(1)).unwrap();
        assert_eq!(
            chain.product,
            vec![
                Item::N(BoundedSort::zero(es)),
                Item::T(Terminal::Grout(GroutShape::Infix, es)),
                Item::N(BoundedSort::zero(es))
            ]
        );
        assert!(e.productions(BoundedSort::unbounded(ps)).iter().any(|p| p.kind == ProdKind::Prefix(ts)));
        assert!(!e.has_postfix());
    }

    #[test]
    fn leftmost_facts() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let [es, ps, ts] = ["E", "P", "T"].map(|s| g.sort_id(s).unwrap());
        let u = BoundedSort::unbounded;
        assert!(e.derives_leftmost(u(es), u(es)));
        assert!(!e.derives_leftmost(u(ps), u(ts)));
        assert!(!e.derives_leftmost(u(es), u(ps)));
        assert!(e.derives_leftmost(u(es), BoundedSort::zero(es)));
    }

    #[test]
    fn postfix_only_when_leftmost_already() {
        let g = load_grammar(
            r#"{"root":"P","token_classes":{"id":"[a-z]+"},"sorts":{
                "P":[{"prec":0,"forms":["P ':' T"]},{"prec":1,"forms":["$id"]}],
                "T":[{"prec":0,"forms":["$id"]}]}}"#,
        )
        .unwrap();
        let e = Elab::new(&g);
        assert!(!e.has_postfix());
        let g = load_grammar(
            r#"{"root":"P","token_classes":{"id":"[a-z]+"},"sorts":{
                "P":[{"prec":0,"forms":["T ':' P"]},{"prec":1,"forms":["$id"]}],
                "T":[{"prec":0,"forms":["$id"]}]}}"#,
        )
        .unwrap();
        let e = Elab::new(&g);
        assert!(e.has_postfix());
        let (ps, ts) = (g.sort_id("P").unwrap(), g.sort_id("T").unwrap());
        assert!(e.productions(BoundedSort::unbounded(ps)).iter().any(|p| p.kind == ProdKind::Postfix(ts)));
    }

    #[test]
    fn reduce_form_rejects_foreign_form() {
        let g = builtin_hazel();
        let es = g.sort_id("E").unwrap();
        let plus = tile(&g, "+", "E");
        let t = reduce_form(&g, es, Precedence::Level(1), &[Symbol::Sort(es), Symbol::Tile(plus), Symbol::Sort(es)]).unwrap();
        assert_eq!(t.reduced_producer(), BoundedSort::new(Precedence::Level(1), es, Precedence::Level(1)));
        assert!(reduce_form(&g, es, Precedence::Level(2), &[Symbol::Sort(es), Symbol::Tile(plus), Symbol::Sort(es)]).is_err());
    }

    #[test]
    fn reachable_set_is_finite_and_contains_zero() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        let es = g.sort_id("E").unwrap();
        assert!(e.reachable.contains(&BoundedSort::zero(es)));
        assert!(e.reachable.len() <= e.all_bounded_sorts().len());
        assert!(e.dump_cfg().lines().any(|l| l.contains("INFIX:E")));
    }

    #[test]
    fn operator_form_preserved() {
        let g = builtin_hazel();
        let e = Elab::new(&g);
        for n in e.all_bounded_sorts() {
            for p in e.productions(n) {
                assert!(!p.product.windows(2).any(|w| matches!(w, [Item::N(_), Item::N(_)])), "{}", p.show(&g));
            }
        }
    }
}
