//! Brute-force relation oracle: precedence relations read off derivation
//! trees of bounded height, enumerated by node position.
//!
//! A node's context (its sort and the operators on either side) fixes which
//! forms it may take, independent of its siblings, so the set of reachable
//! `(context, depth)` pairs covers every tree of height at most `max_height`
//! whose nodes can all be completed within the bound.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use tylr_core::elab::{BoundedSort, Terminal};
use tylr_core::gen::{Deriver, Side};
use tylr_core::grammar::{Precedence, Symbol};
use tylr_core::relations::{Op, RelStep, Slot};

type Ctx = (Side, usize, Side);

fn bound(c: Ctx) -> BoundedSort {
    let p = |s: Side| match s {
        Side::Free => Precedence::Bottom,
        Side::Against(l) => Precedence::Level(l),
    };
    BoundedSort::new(p(c.0), c.1, p(c.2))
}

fn tile(sym: &Symbol) -> Option<Terminal> {
    match sym {
        Symbol::Tile(t) => Some(Terminal::Tile(*t)),
        Symbol::Sort(_) => None,
    }
}

pub struct Oracle<'a> {
    d: &'a Deriver<'a>,
    max_height: usize,
    firsts: BTreeMap<(Ctx, usize), BTreeSet<(Slot, Terminal)>>,
    lasts: BTreeMap<(Ctx, usize), BTreeSet<(Slot, Terminal)>>,
}

impl<'a> Oracle<'a> {
    pub fn new(d: &'a Deriver<'a>, max_height: usize) -> Self {
        Oracle { d, max_height, firsts: BTreeMap::new(), lasts: BTreeMap::new() }
    }

    /// Forms a node at `depth` (root at 1) may take in `c` while every child
    /// still completes within the height bound.
    fn forms(&self, c: Ctx, depth: usize) -> Vec<(u32, Vec<Symbol>)> {
        if depth > self.max_height {
            return Vec::new();
        }
        let room = self.max_height - depth;
        self.d
            .forms(c.1)
            .iter()
            .filter(|(level, form)| {
                self.d.admits(c, *level, form)
                    && (0..form.len()).all(|i| match self.d.child_context(c, *level, form, i) {
                        Some(cc) => self.d.min_height(cc).is_some_and(|h| h <= room),
                        None => true,
                    })
            })
            .cloned()
            .collect()
    }

    /// `(slot, terminal)` pairs that begin some derivation from `c` at `depth`.
    fn firsts(&mut self, c: Ctx, depth: usize) -> BTreeSet<(Slot, Terminal)> {
        if let Some(v) = self.firsts.get(&(c, depth)) {
            return v.clone();
        }
        let mut out = BTreeSet::new();
        for (level, form) in self.forms(c, depth) {
            match tile(&form[0]) {
                Some(t) => {
                    out.insert((None, t));
                }
                None => {
                    let cc = self.d.child_context(c, level, &form, 0).expect("sort");
                    if let Some(t) = form.get(1).and_then(tile) {
                        out.insert((Some(bound(cc)), t));
                    }
                    out.extend(self.firsts(cc, depth + 1));
                }
            }
        }
        self.firsts.insert((c, depth), out.clone());
        out
    }

    fn lasts(&mut self, c: Ctx, depth: usize) -> BTreeSet<(Slot, Terminal)> {
        if let Some(v) = self.lasts.get(&(c, depth)) {
            return v.clone();
        }
        let mut out = BTreeSet::new();
        for (level, form) in self.forms(c, depth) {
            let n = form.len();
            match tile(&form[n - 1]) {
                Some(t) => {
                    out.insert((None, t));
                }
                None => {
                    let cc = self.d.child_context(c, level, &form, n - 1).expect("sort");
                    if let Some(t) = n.checked_sub(2).and_then(|i| tile(&form[i])) {
                        out.insert((Some(bound(cc)), t));
                    }
                    out.extend(self.lasts(cc, depth + 1));
                }
            }
        }
        self.lasts.insert((c, depth), out.clone());
        out
    }

    /// Every relation step witnessed by some derivation within the bound,
    /// including those against the start and end delimiters.
    pub fn steps(&mut self) -> BTreeSet<RelStep> {
        let g = self.d.g();
        let root: Ctx = (Side::Free, g.root, Side::Free);
        let mut out = BTreeSet::new();
        // The start product `⧏ root ⧐`, as a node at depth 0.
        out.insert(RelStep { left: Terminal::Start, op: Op::Eq, right: Terminal::End, slot: Some(bound(root)) });
        for (slot, t) in self.firsts(root, 1) {
            out.insert(RelStep { left: Terminal::Start, op: Op::Lt, right: t, slot });
        }
        for (slot, t) in self.lasts(root, 1) {
            out.insert(RelStep { left: t, op: Op::Gt, right: Terminal::End, slot });
        }
        let mut seen = BTreeSet::new();
        let mut todo = vec![(root, 1usize)];
        while let Some((c, depth)) = todo.pop() {
            if !seen.insert((c, depth)) {
                continue;
            }
            for (level, form) in self.forms(c, depth) {
                let child = |i: usize| self.d.child_context(c, level, &form, i);
                for i in 0..form.len() {
                    if let Some(cc) = child(i) {
                        todo.push((cc, depth + 1));
                    }
                    let Some(left) = tile(&form[i]) else { continue };
                    match form.get(i + 1) {
                        Some(Symbol::Tile(_)) => {
                            out.insert(RelStep { left, op: Op::Eq, right: tile(&form[i + 1]).unwrap(), slot: None });
                        }
                        Some(Symbol::Sort(_)) => {
                            let cc = child(i + 1).expect("sort");
                            if let Some(right) = form.get(i + 2).and_then(tile) {
                                out.insert(RelStep { left, op: Op::Eq, right, slot: Some(bound(cc)) });
                            }
                            for (slot, right) in self.firsts(cc, depth + 1) {
                                out.insert(RelStep { left, op: Op::Lt, right, slot });
                            }
                        }
                        None => {}
                    }
                    if i >= 1 {
                        if let Some(cc) = child(i - 1) {
                            for (slot, l) in self.lasts(cc, depth + 1) {
                                out.insert(RelStep { left: l, op: Op::Gt, right: left, slot });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
