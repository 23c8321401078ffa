//! Lexing and mold selection.
//!
//! A token's candidate tiles are the literal tiles sharing its text, or, when
//! no literal matches, the token-class tiles whose pattern accepts it. Among
//! candidates, the one whose best push plan inserts the fewest obligations
//! wins; remaining ties go to the lower walk, then the tile id.

use std::rc::Rc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::grammar::{Label, Pbg, TileId};
use crate::parser::{Obligations, Parser, Plan, Stack, Term, Token};

/// Maximal-munch lexer over a grammar's literal labels and token classes.
#[derive(Debug, Clone)]
pub struct Lexer {
    literals: Vec<String>,
    classes: Vec<regex::Regex>,
}

impl Lexer {
    pub fn new(g: &Pbg) -> Self {
        let mut literals: Vec<String> = g
            .tiles
            .iter()
            .filter_map(|t| match &t.label {
                Label::Lit(s) => Some(s.clone()),
                Label::Class(_) => None,
            })
            .collect();
        literals.sort();
        literals.dedup();
        let classes = g
            .token_classes
            .iter()
            .map(|c| regex::Regex::new(&format!("^(?:{})", c.pattern)).expect("validated when the grammar loaded"))
            .collect();
        Lexer { literals, classes }
    }

    /// Length in bytes of the longest token at the start of `s`; 0 if none.
    pub fn munch(&self, s: &str) -> usize {
        let lit = self.literals.iter().filter(|l| s.starts_with(l.as_str())).map(|l| l.len()).max().unwrap_or(0);
        let class = self.classes.iter().filter_map(|r| r.find(s).map(|m| m.end())).max().unwrap_or(0);
        lit.max(class)
    }

    /// Whether `s` lexes as exactly one token.
    pub fn is_token(&self, s: &str) -> bool {
        !s.is_empty() && self.munch(s) == s.len()
    }

    /// Splits source text into tokens with their byte offsets. Whitespace
    /// separates; a character no token can start becomes its own token.
    pub fn lex(&self, src: &str) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < src.len() {
            let rest = &src[i..];
            let c = rest.chars().next().expect("nonempty");
            if c.is_whitespace() {
                i += c.len_utf8();
                continue;
            }
            let n = match self.munch(rest) {
                0 => c.len_utf8(),
                n => n,
            };
            out.push((i, rest[..n].to_string()));
            i += n;
        }
        out
    }
}

/// Tiles a lexed token may take. Literal labels are reserved: a token that
/// equals some literal never molds as a token-class tile.
pub fn candidates(g: &Pbg, text: &str) -> Vec<TileId> {
    let lits = g.tiles_with_label(&Label::Lit(text.to_string()));
    if !lits.is_empty() {
        return lits;
    }
    (0..g.tiles.len())
        .filter(|&t| matches!(g.tiles[t].label, Label::Class(_)) && g.tile_accepts(t, text))
        .collect()
}

/// The chosen mold for a token. `tile == None` means unmolded: the token is
/// trivia and the stack is unchanged.
#[derive(Clone, Debug)]
pub struct MoldChoice {
    pub tile: Option<TileId>,
    pub plan: Option<Plan>,
    pub delta: Obligations,
}

impl MoldChoice {
    pub fn token(&self, text: &str) -> Option<Token> {
        self.tile.map(|t| Token::tile(t, text))
    }
}

/// One candidate's best outcome, as reported by `--trace`.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateOutcome {
    pub tile: TileId,
    pub delta: Obligations,
    pub reductions: usize,
    pub height: usize,
    pub length: usize,
}

fn choice_rank(tile: TileId, p: &Plan) -> impl Ord + '_ {
    (p.rank(), tile)
}

/// Evaluates every candidate against the stack and keeps the least costly.
pub fn choose_traced(p: &Parser, k: &Stack, rs: &[Rc<Term>], text: &str) -> (MoldChoice, Vec<CandidateOutcome>) {
    let mut best: Option<(TileId, Plan)> = None;
    let mut trace = Vec::new();
    for t in candidates(p.g(), text) {
        let plan = p.best_plan(k, rs, &Token::tile(t, text));
        trace.push(CandidateOutcome {
            tile: t,
            delta: plan.delta,
            reductions: plan.reductions,
            height: plan.height,
            length: plan.length,
        });
        if best.as_ref().is_none_or(|(bt, bp)| choice_rank(t, &plan) < choice_rank(*bt, bp)) {
            best = Some((t, plan));
        }
    }
    let choice = match best {
        Some((t, plan)) => MoldChoice { tile: Some(t), delta: plan.delta, plan: Some(plan) },
        None => MoldChoice { tile: None, plan: None, delta: Obligations::default() },
    };
    (choice, trace)
}

pub fn choose(p: &Parser, k: &Stack, rs: &[Rc<Term>], text: &str) -> MoldChoice {
    choose_traced(p, k, rs, text).0
}

/// JSON line describing one molding decision.
pub fn trace_json(g: &Pbg, text: &str, choice: &MoldChoice, outcomes: &[CandidateOutcome]) -> Value {
    let tile_json = |t: TileId| {
        let m = &g.tiles[t].mold;
        json!({"sort": g.sort_name(m.sort), "prec": m.prec, "position": m.position, "label": g.tile_text(t)})
    };
    json!({
        "text": text,
        "chosen": choice.tile.map(tile_json),
        "delta": choice.delta,
        "candidates": outcomes.iter().map(|o| json!({
            "tile": tile_json(o.tile),
            "delta": o.delta,
            "reductions": o.reductions,
            "height": o.height,
            "length": o.length,
        })).collect::<Vec<_>>(),
    })
}

/// Result of molding and parsing source text in one pass.
#[derive(Debug)]
pub struct MoldedParse {
    pub term: Rc<Term>,
    /// Molded tokens in input order.
    pub tokens: Vec<Token>,
    /// Unmolded token texts with their byte offsets.
    pub unmolded: Vec<(usize, String)>,
    /// One JSON record per molding decision.
    pub trace: Vec<Value>,
}

/// Lexes, molds and parses `src`.
pub fn parse_source(p: &Parser, lexer: &Lexer, src: &str, want_trace: bool) -> MoldedParse {
    let mut k = Stack::new();
    let mut tokens = Vec::new();
    let mut unmolded = Vec::new();
    let mut trace = Vec::new();
    for (at, text) in lexer.lex(src) {
        let (choice, outcomes) = choose_traced(p, &k, &[], &text);
        if want_trace {
            trace.push(trace_json(p.g(), &text, &choice, &outcomes));
        }
        match (&choice.tile, &choice.plan) {
            (Some(t), Some(plan)) => {
                p.apply_mut(&mut k, plan);
                tokens.push(Token::tile(*t, text));
            }
            _ => unmolded.push((at, text)),
        }
    }
    let term = p.finish(&k);
    MoldedParse { term, tokens, unmolded, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::builtin_hazel;

    fn hazel() -> (Parser, Lexer) {
        let g = builtin_hazel();
        (Parser::new(&g), Lexer::new(&g))
    }

    #[test]
    fn lexing_is_maximal_munch() {
        let (_, lx) = hazel();
        let toks: Vec<String> = lx.lex("let f=fun x->x+1in f(2)!").into_iter().map(|(_, t)| t).collect();
        assert_eq!(toks, ["let", "f", "=", "fun", "x", "->", "x", "+", "1", "in", "f", "(", "2", ")", "!"]);
        assert!(lx.is_token("->"));
        assert!(!lx.is_token("x-"));
    }

    #[test]
    fn candidate_lists() {
        let g = builtin_hazel();
        assert_eq!(candidates(&g, "(").len(), 3);
        assert!(candidates(&g, "!").is_empty());
        let num = candidates(&g, "42");
        assert_eq!(num.len(), 1);
        assert_eq!(g.tile_text(num[0]), "$num");
        assert_eq!(candidates(&g, "let").len(), 1);
        assert_eq!(candidates(&g, "x").len(), 3);
    }

    #[test]
    fn let_paren_table() {
        let (p, _) = hazel();
        let g = p.g().clone();
        let let_tile = candidates(&g, "let")[0];
        let mut k = Stack::new();
        p.push_mut(&mut k, &[], &Token::tile(let_tile, "let"));
        let (choice, outcomes) = choose_traced(&p, &k, &[], "(");
        let sort_of = |t: TileId| g.sort_name(g.tiles[t].mold.sort).to_string();
        assert_eq!(sort_of(choice.tile.unwrap()), "P");
        assert!(choice.delta.is_zero());
        for o in &outcomes {
            match sort_of(o.tile).as_str() {
                "E" => assert_eq!(o.delta, Obligations { ghosts: 1, operand_grout: 1, ..Default::default() }),
                "T" => assert_eq!(o.delta, Obligations { sort_grout: 1, ..Default::default() }),
                _ => assert!(o.delta.is_zero()),
            }
        }
    }

    #[test]
    fn minus_remolds_by_context() {
        let (p, lx) = hazel();
        let prefix = parse_source(&p, &lx, "- y", false);
        assert!(obligations_zero(&prefix.term));
        let infix = parse_source(&p, &lx, "x - y", false);
        assert!(obligations_zero(&infix.term));
        assert_ne!(prefix.tokens[0].terminal, infix.tokens[1].terminal);
    }

    fn obligations_zero(t: &Term) -> bool {
        t.obligations().is_zero()
    }

    #[test]
    fn unmolded_tokens_are_ignored() {
        let (p, lx) = hazel();
        let r = parse_source(&p, &lx, "!", false);
        assert_eq!(r.term.to_text(false), "⬚");
        assert_eq!(r.unmolded, vec![(0, "!".to_string())]);
        let a = parse_source(&p, &lx, "1 + ! 2", false);
        let b = parse_source(&p, &lx, "1 + 2", false);
        assert!(a.term.same_shape(&b.term));
    }

    #[test]
    fn source_examples() {
        let (p, lx) = hazel();
        let text = |s: &str| parse_source(&p, &lx, s, false).term.to_text(false);
        assert_eq!(text("let x = 4"), "let x = 4 [in] ⬚");
        assert_eq!(text(""), "⬚");
        assert_eq!(text("2 +"), "2 + ⬚");
        assert_eq!(text("2 3"), "2 ⟐ 3");
        assert_eq!(text("( 2 + 3 )"), "( 2 + 3 )");
        assert_eq!(parse_source(&p, &lx, "2 + 3 * 4", false).term.to_sexp(), "2 + (3 * 4)");
    }
}
