//! Slot-annotated precedence relations over the terminals of the
//! grout-injected grammar, and grammar walks between terminals.
//!
//! `τ ⋖_σ τ'` holds when the nonterminal right of `τ` in some production
//! leftmost-derives a production beginning `σ τ'` (or just `τ'` when the slot
//! is empty). `≐` comes from consecutive terminals within one production and
//! `⋗` mirrors `⋖` through rightmost derivation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::elab::{prec_gt, prec_lt, BoundedSort, Elab, GroutShape, Item, Production, Terminal, Tip};
use crate::grammar::{Pbg, Precedence, Symbol, TileId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Lt,
    Eq,
    Gt,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Lt => "<",
            Op::Eq => "=",
            Op::Gt => ">",
        })
    }
}

pub type Slot = Option<BoundedSort>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelStep {
    pub left: Terminal,
    pub op: Op,
    pub right: Terminal,
    pub slot: Slot,
}

/// A chain of `⋖`/`≐` steps; consecutive steps share their junction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    pub steps: Vec<RelStep>,
}

impl Walk {
    pub fn height(&self) -> usize {
        self.steps.iter().filter(|s| s.op == Op::Lt).count()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn src(&self) -> Terminal {
        self.steps[0].left
    }

    pub fn dst(&self) -> Terminal {
        self.steps[self.steps.len() - 1].right
    }

    /// Terminals strictly between `src` and `dst`.
    pub fn intermediates(&self) -> Vec<Terminal> {
        self.steps[..self.steps.len() - 1].iter().map(|s| s.right).collect()
    }

    pub fn slots(&self) -> Vec<Slot> {
        self.steps.iter().map(|s| s.slot).collect()
    }

    /// Deterministic tie-break key: intermediate terminals, then slots.
    pub fn key(&self) -> (Vec<Terminal>, Vec<Slot>) {
        (self.intermediates(), self.slots())
    }
}

/// The full relation table of one grammar, with walk memoization.
#[derive(Debug)]
pub struct RelationTable {
    pub elab: Elab,
    pub steps: BTreeSet<RelStep>,
    /// `⋖`/`≐` steps by left terminal.
    out: HashMap<Terminal, Vec<RelStep>>,
    /// `⋖`/`≐` steps by right terminal.
    into: HashMap<Terminal, Vec<RelStep>>,
    walk_cache: Mutex<HashMap<(Terminal, Terminal), Arc<Vec<Walk>>>>,
}

impl Clone for RelationTable {
    fn clone(&self) -> Self {
        RelationTable::from_steps(self.elab.clone(), self.steps.clone())
    }
}

/// The start production `⧏ ⟨⊥ ŝ ⊥⟩ ⧐`.
pub fn start_product(g: &Pbg) -> Vec<Item> {
    vec![Item::T(Terminal::Start), Item::N(BoundedSort::unbounded(g.root)), Item::T(Terminal::End)]
}

fn steps_of(elab: &Elab, product: &[Item], out: &mut BTreeSet<RelStep>) {
    for (i, it) in product.iter().enumerate() {
        let Item::T(left) = *it else { continue };
        match (product.get(i + 1), product.get(i + 2)) {
            (Some(Item::T(right)), _) => {
                out.insert(RelStep { left, op: Op::Eq, slot: None, right: *right });
            }
            (Some(Item::N(n)), Some(Item::T(right))) => {
                out.insert(RelStep { left, op: Op::Eq, slot: Some(*n), right: *right });
            }
            _ => {}
        }
        if let Some(Item::N(n)) = product.get(i + 1) {
            for rho in elab.leftmost_closure(*n) {
                for p in elab.productions(*rho) {
                    match (p.product.first(), p.product.get(1)) {
                        (Some(Item::T(right)), _) => {
                            out.insert(RelStep { left, op: Op::Lt, slot: None, right: *right });
                        }
                        (Some(Item::N(sigma)), Some(Item::T(right))) => {
                            out.insert(RelStep { left, op: Op::Lt, slot: Some(*sigma), right: *right });
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    for (i, it) in product.iter().enumerate() {
        let Item::T(right) = *it else { continue };
        if i == 0 {
            continue;
        }
        let Item::N(n) = product[i - 1] else { continue };
        for rho in elab.rightmost_closure(n) {
            for p in elab.productions(*rho) {
                let k = p.product.len();
                match (p.product.get(k.wrapping_sub(1)), k.checked_sub(2).and_then(|j| p.product.get(j))) {
                    (Some(Item::T(left)), _) => {
                        out.insert(RelStep { left: *left, op: Op::Gt, slot: None, right });
                    }
                    (Some(Item::N(sigma)), Some(Item::T(left))) => {
                        out.insert(RelStep { left: *left, op: Op::Gt, slot: Some(*sigma), right });
                    }
                    _ => {}
                }
            }
        }
    }
}

impl RelationTable {
    pub fn new(g: &Pbg) -> Self {
        Self::over(Elab::new(g))
    }

    /// Relations of an arbitrary elaboration, e.g. one without grout.
    pub fn over(elab: Elab) -> Self {
        let g = &elab.g;
        let mut steps = BTreeSet::new();
        steps_of(&elab, &start_product(g), &mut steps);
        for n in &elab.reachable {
            for p in elab.productions(*n) {
                steps_of(&elab, &p.product, &mut steps);
            }
        }
        RelationTable::from_steps(elab, steps)
    }

    /// Wraps an explicit step set; used by tests that corrupt a table.
    pub fn from_steps(elab: Elab, steps: BTreeSet<RelStep>) -> Self {
        let mut out: HashMap<Terminal, Vec<RelStep>> = HashMap::new();
        let mut into: HashMap<Terminal, Vec<RelStep>> = HashMap::new();
        for s in &steps {
            if s.op != Op::Gt {
                out.entry(s.left).or_default().push(*s);
                into.entry(s.right).or_default().push(*s);
            }
        }
        RelationTable { elab, steps, out, into, walk_cache: Mutex::new(HashMap::new()) }
    }

    pub fn g(&self) -> &Pbg {
        &self.elab.g
    }

    pub fn has(&self, left: Terminal, op: Op, right: Terminal) -> bool {
        self.steps.range(RelStep { left, op, slot: None, right }..).next().is_some_and(|s| s.left == left && s.op == op && s.right == right)
    }

    pub fn has_step(&self, step: &RelStep) -> bool {
        self.steps.contains(step)
    }

    /// Every step `left op _ right`, any slot.
    pub fn slots_between(&self, left: Terminal, op: Op, right: Terminal) -> Vec<Slot> {
        self.steps
            .range(RelStep { left, op, slot: None, right }..)
            .take_while(|s| s.left == left && s.op == op && s.right == right)
            .map(|s| s.slot)
            .collect()
    }

    /// `⋖`/`≐` steps out of `left`.
    pub fn out_steps(&self, left: Terminal) -> &[RelStep] {
        self.out.get(&left).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every terminal that occurs in the table.
    pub fn terminals(&self) -> BTreeSet<Terminal> {
        self.steps.iter().flat_map(|s| [s.left, s.right]).collect()
    }

    /// Minimal-length walks from `src` to `dst`, filtered and ranked.
    pub fn walks(&self, src: Terminal, dst: Terminal) -> Arc<Vec<Walk>> {
        if let Some(w) = self.walk_cache.lock().expect("walk cache").get(&(src, dst)) {
            return w.clone();
        }
        let w = Arc::new(self.compute_walks(src, dst));
        self.walk_cache.lock().expect("walk cache").insert((src, dst), w.clone());
        w
    }

    fn compute_walks(&self, src: Terminal, dst: Terminal) -> Vec<Walk> {
        // Reverse breadth-first distances to `dst`.
        let mut dist: HashMap<Terminal, usize> = HashMap::from([(dst, 0)]);
        let mut queue = VecDeque::from([dst]);
        while let Some(t) = queue.pop_front() {
            let d = dist[&t];
            for s in self.into.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(s.left) {
                    e.insert(d + 1);
                    queue.push_back(s.left);
                }
            }
        }
        // `src == dst` still needs at least one step.
        let base = if src == dst {
            self.out_steps(src).iter().filter_map(|s| dist.get(&s.right).map(|d| d + 1)).min()
        } else {
            dist.get(&src).copied()
        };
        let Some(base) = base else { return Vec::new() };
        for len in base..=base + 2 {
            let mut found = Vec::new();
            let mut path = Vec::new();
            self.paths(src, dst, len, &dist, &mut path, &mut found);
            let mut kept: Vec<Walk> = found.into_iter().filter(|w| !has_sunken_tiles(w)).collect();
            if !kept.is_empty() {
                kept.sort_by(|a, b| (a.height(), a.len(), a.key()).cmp(&(b.height(), b.len(), b.key())));
                kept.dedup();
                return kept;
            }
        }
        Vec::new()
    }

    fn paths(
        &self,
        at: Terminal,
        dst: Terminal,
        left: usize,
        dist: &HashMap<Terminal, usize>,
        path: &mut Vec<RelStep>,
        found: &mut Vec<Walk>,
    ) {
        if left == 0 {
            if at == dst && !path.is_empty() {
                found.push(Walk { steps: path.clone() });
            }
            return;
        }
        for s in self.out_steps(at) {
            let Some(&d) = dist.get(&s.right) else { continue };
            if d > left - 1 {
                continue;
            }
            // Only `dst` itself may be the last terminal; it may recur earlier.
            path.push(*s);
            self.paths(s.right, dst, left - 1, dist, path, found);
            path.pop();
        }
    }
}

/// Whether some intermediate maximal `≐`-run of tiles is both entered and
/// exited by `⋖`.
pub fn has_sunken_tiles(w: &Walk) -> bool {
    let n = w.steps.len();
    // Intermediate terminal k sits between steps k-1 and k.
    let mid = |k: usize| w.steps[k - 1].right;
    let mut k = 1;
    while k < n {
        if !mid(k).is_tile() {
            k += 1;
            continue;
        }
        let mut b = k;
        while b + 1 < n && w.steps[b].op == Op::Eq && mid(b + 1).is_tile() {
            b += 1;
        }
        if w.steps[k - 1].op == Op::Lt && w.steps[b].op == Op::Lt {
            return true;
        }
        k = b + 1;
    }
    false
}

// ─────────────────────────────── coherence ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceFailure {
    pub left: TileId,
    pub right: TileId,
    pub op: Op,
    pub expected: bool,
    pub found: bool,
}

impl CoherenceFailure {
    pub fn show(&self, g: &Pbg) -> String {
        format!(
            "{} {} {}: expected {}, table says {}",
            Terminal::Tile(self.left).show(g),
            self.op,
            Terminal::Tile(self.right).show(g),
            self.expected,
            self.found
        )
    }
}

/// Tiles immediately left of a trailing self-sort operand, and tiles
/// immediately right of a leading one, each with their level.
fn edge_tiles(elab: &Elab) -> (BTreeSet<(TileId, u32)>, BTreeSet<(TileId, u32)>) {
    let mut lefts = BTreeSet::new();
    let mut rights = BTreeSet::new();
    for t in &elab.templates {
        let k = t.form.len();
        if t.right_exposed && k >= 2 {
            if let Symbol::Tile(x) = t.form[k - 2] {
                lefts.insert((x, t.level));
            }
        }
        if t.left_exposed && k >= 2 {
            if let Symbol::Tile(x) = t.form[1] {
                rights.insert((x, t.level));
            }
        }
    }
    (lefts, rights)
}

/// Checks that tile relations agree with the declared precedences.
pub fn coherence_failures(table: &RelationTable) -> Vec<CoherenceFailure> {
    let g = table.g();
    let (lefts, rights) = edge_tiles(&table.elab);
    let mut out = Vec::new();
    for &(tl, pl) in &lefts {
        for &(tr, pr) in &rights {
            let s = g.tiles[tl].mold.sort;
            if g.tiles[tr].mold.sort != s {
                continue;
            }
            let (l, r) = (Precedence::Level(pl), Precedence::Level(pr));
            for (op, expected) in [(Op::Lt, prec_lt(g, s, l, r)), (Op::Gt, prec_gt(g, s, l, r))] {
                let found = table.has(Terminal::Tile(tl), op, Terminal::Tile(tr));
                if found != expected {
                    out.push(CoherenceFailure { left: tl, right: tr, op, expected, found });
                }
            }
        }
    }
    out
}

/// Coherence is a property of the elaborated grammar before grout
/// injection: sort-transition grout lets a rightmost derivation leave a sort
/// and re-enter it unbounded, which adds `⋗` steps between arbitrary tiles.
pub fn check_coherence(g: &Pbg) -> Vec<CoherenceFailure> {
    coherence_failures(&RelationTable::over(Elab::without_grout(g)))
}

// ─────────────────────────────── lemma scans ───────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaViolation {
    pub lemma: &'static str,
    pub step: RelStep,
}

fn left_tip(t: Terminal) -> Option<Tip> {
    match t {
        Terminal::Grout(shape, _) => Some(shape.tips().0),
        _ => None,
    }
}

fn right_tip(t: Terminal) -> Option<Tip> {
    match t {
        Terminal::Grout(shape, _) => Some(shape.tips().1),
        _ => None,
    }
}

fn grout_sort(t: Terminal) -> Option<usize> {
    match t {
        Terminal::Grout(_, s) => Some(s),
        _ => None,
    }
}

/// Scans every step for the structural lemmas: homogeneity, grout
/// precedence, start-matches-end, no escaping and no trespassing.
pub fn lemma_violations(table: &RelationTable) -> Vec<LemmaViolation> {
    let g = table.g();
    let mut out = Vec::new();
    let mut flag = |lemma: &'static str, step: &RelStep| out.push(LemmaViolation { lemma, step: *step });
    for s in &table.steps {
        if s.op == Op::Eq {
            let ok = matches!((s.left, s.right), (Terminal::Start, Terminal::End) | (Terminal::Tile(_), Terminal::Tile(_)))
                || matches!((grout_sort(s.left), grout_sort(s.right)), (Some(a), Some(b)) if a == b);
            if !ok {
                flag("Homogeneity", s);
            }
        }
        if left_tip(s.right) == Some(Tip::Convex) && !(s.slot.is_none() && s.op == Op::Lt) {
            flag("GroutPrecedence", s);
        }
        if right_tip(s.left) == Some(Tip::Convex) && !(s.slot.is_none() && s.op == Op::Gt) {
            flag("GroutPrecedence", s);
        }
        if left_tip(s.right) == Some(Tip::Concave) && s.op == Op::Eq {
            let ok = s.slot == grout_sort(s.right).map(BoundedSort::zero) && right_tip(s.left) == Some(Tip::Concave);
            if !ok {
                flag("GroutPrecedence", s);
            }
        }
        if right_tip(s.left) == Some(Tip::Concave) && s.op == Op::Eq {
            let ok = s.slot == grout_sort(s.left).map(BoundedSort::zero) && left_tip(s.right) == Some(Tip::Concave);
            if !ok {
                flag("GroutPrecedence", s);
            }
        }
        if s.left == Terminal::Start && s.op == Op::Eq && !(s.right == Terminal::End && s.slot == Some(BoundedSort::unbounded(g.root))) {
            flag("StartMatchesEnd", s);
        }
        if (s.op == Op::Lt && s.right == Terminal::End) || (s.op == Op::Gt && s.left == Terminal::Start) {
            flag("NoEscaping", s);
        }
        if s.right == Terminal::Start || s.left == Terminal::End {
            flag("NoTrespassing", s);
        }
    }
    if !table.has(Terminal::Start, Op::Eq, Terminal::End) {
        out.push(LemmaViolation {
            lemma: "StartMatchesEnd",
            step: RelStep { left: Terminal::Start, op: Op::Eq, slot: None, right: Terminal::End },
        });
    }
    out
}

// ─────────────────────────────── output ───────────────────────────────

fn slot_text(g: &Pbg, slot: Slot) -> String {
    slot.map(|n| n.show(g)).unwrap_or_else(|| "-".into())
}

/// One `left<TAB>op<TAB>slot<TAB>right` line per step.
pub fn dump_tsv(table: &RelationTable) -> String {
    let g = table.g();
    let mut out = String::from("left\top\tslot\tright\n");
    for s in &table.steps {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", s.left.show(g), s.op, slot_text(g, s.slot), s.right.show(g)));
    }
    out
}

/// Graphviz description with one edge per step.
pub fn dump_dot(table: &RelationTable) -> String {
    let g = table.g();
    let mut ids: BTreeMap<Terminal, usize> = BTreeMap::new();
    for t in table.terminals() {
        let n = ids.len();
        ids.insert(t, n);
    }
    let mut out = String::from("digraph relations {\n");
    for (t, i) in &ids {
        out.push_str(&format!("  n{i} [label={:?}];\n", t.show(g)));
    }
    for s in &table.steps {
        let style = match s.op {
            Op::Lt => "solid",
            Op::Eq => "bold",
            Op::Gt => "dashed",
        };
        out.push_str(&format!(
            "  n{} -> n{} [label={:?}, style={style}];\n",
            ids[&s.left],
            ids[&s.right],
            format!("{} {}", s.op, slot_text(g, s.slot))
        ));
    }
    out.push_str("}\n");
    out
}

/// Whether `t` is a grout terminal of shape `shape`.
pub fn is_grout(t: Terminal, shape: GroutShape) -> bool {
    matches!(t, Terminal::Grout(s, _) if s == shape)
}

/// Productions whose product contains `t`; handy when explaining a step.
pub fn productions_with(elab: &Elab, t: Terminal) -> Vec<Production> {
    elab.reachable
        .iter()
        .flat_map(|n| elab.productions(*n).iter().filter(|p| p.product.contains(&Item::T(t))).cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin_hazel, load_grammar, Label};

    fn tile(g: &Pbg, text: &str, sort: &str) -> Terminal {
        let s = g.sort_id(sort).unwrap();
        let t = g.tiles_with_label(&Label::Lit(text.into())).into_iter().find(|t| g.tiles[*t].mold.sort == s).unwrap();
        Terminal::Tile(t)
    }

    #[test]
    fn hazel_examples() {
        let g = builtin_hazel();
        let tb = RelationTable::new(&g);
        let (es, ps) = (g.sort_id("E").unwrap(), g.sort_id("P").unwrap());
        let [let_, eq, in_, plus, star] = ["let", "=", "in", "+", "*"].map(|t| tile(&g, t, "E"));
        assert_eq!(tb.slots_between(let_, Op::Eq, eq), vec![Some(BoundedSort::unbounded(ps))]);
        assert_eq!(tb.slots_between(eq, Op::Eq, in_), vec![Some(BoundedSort::unbounded(es))]);
        assert!(tb.has(plus, Op::Lt, star));
        assert!(tb.has(star, Op::Gt, plus));
        assert!(tb.has(plus, Op::Gt, plus));
        assert!(!tb.has(plus, Op::Lt, plus));
        assert_eq!(check_coherence(&g), vec![]);
        assert_eq!(lemma_violations(&tb), vec![]);
        // transitions through prefix grout re-enter E unbounded
        assert!(tb.has(in_, Op::Gt, plus));
    }

    #[test]
    fn start_to_end_is_one_eq_step() {
        let g = builtin_hazel();
        let tb = RelationTable::new(&g);
        let w = tb.walks(Terminal::Start, Terminal::End);
        assert_eq!(w.len(), 1);
        assert_eq!(
            w[0].steps,
            vec![RelStep { left: Terminal::Start, op: Op::Eq, right: Terminal::End, slot: Some(BoundedSort::unbounded(g.root)) }]
        );
    }

    #[test]
    fn let_walks_through_ghosts() {
        let g = builtin_hazel();
        let tb = RelationTable::new(&g);
        let let_ = tile(&g, "let", "E");
        // nothing walks into the end delimiter except the start delimiter
        assert!(tb.walks(let_, Terminal::End).is_empty());
        let w = tb.walks(let_, tile(&g, "in", "E"));
        assert_eq!(w[0].intermediates(), vec![tile(&g, "=", "E")]);
        assert_eq!(w[0].height(), 0);
    }

    #[test]
    fn paren_to_comma_is_minimal() {
        let g = builtin_hazel();
        let tb = RelationTable::new(&g);
        let w = tb.walks(tile(&g, "(", "E"), tile(&g, ",", "E"));
        let shortest = w.iter().map(Walk::len).min().unwrap();
        assert!(w.iter().all(|x| x.len() == shortest));
        assert_eq!(shortest, 1);
    }

    #[test]
    fn sunken_tiles_detected() {
        let g = builtin_hazel();
        let [lp, let_, eq, comma] = [("(", "E"), ("let", "E"), ("=", "E"), (",", "E")].map(|(t, s)| tile(&g, t, s));
        let es = g.sort_id("E").unwrap();
        let lp2 = lp;
        let st = |left, op, right, slot| RelStep { left, op, right, slot };
        let sunken = Walk {
            steps: vec![
                st(lp, Op::Lt, let_, None),
                st(let_, Op::Eq, eq, Some(BoundedSort::unbounded(g.sort_id("P").unwrap()))),
                st(eq, Op::Lt, lp2, None),
                st(lp2, Op::Eq, comma, Some(BoundedSort::unbounded(es))),
            ],
        };
        assert!(has_sunken_tiles(&sunken));
        let fine = Walk { steps: vec![st(lp, Op::Lt, lp2, None), st(lp2, Op::Eq, comma, Some(BoundedSort::unbounded(es)))] };
        assert!(!has_sunken_tiles(&fine));
    }

    #[test]
    fn corrupted_table_fails_coherence() {
        let g = builtin_hazel();
        let [plus, star] = ["+", "*"].map(|t| tile(&g, t, "E"));
        let tb = RelationTable::over(Elab::without_grout(&g));
        let steps: BTreeSet<RelStep> =
            tb.steps.iter().filter(|s| !(s.left == plus && s.op == Op::Lt && s.right == star)).copied().collect();
        let bad = RelationTable::from_steps(tb.elab.clone(), steps);
        assert_eq!(coherence_failures(&bad).len(), 1);
    }

    #[test]
    fn single_level_left_assoc() {
        let g = load_grammar(r#"{"root":"E","token_classes":{"n":"[0-9]+"},"sorts":{"E":[{"prec":1,"assoc":"left","forms":["E '+' E"]},{"prec":2,"forms":["$n"]}]}}"#).unwrap();
        let tb = RelationTable::new(&g);
        let plus = tile(&g, "+", "E");
        assert!(tb.has(plus, Op::Gt, plus));
        assert!(!tb.has(plus, Op::Lt, plus));
        assert_eq!(coherence_failures(&tb), vec![]);
    }

    #[test]
    fn grout_and_start_reach_every_tile() {
        let g = builtin_hazel();
        let tb = RelationTable::new(&g);
        let mut srcs = vec![Terminal::Start];
        for s in 0..g.sorts.len() {
            srcs.push(Terminal::Grout(GroutShape::Infix, s));
            srcs.push(Terminal::Grout(GroutShape::Prefix, s));
        }
        for src in srcs {
            for t in 0..g.tiles.len() {
                assert!(!tb.walks(src, Terminal::Tile(t)).is_empty(), "{} -> {}", src.show(&g), Terminal::Tile(t).show(&g));
            }
        }
    }
}
