//! The relation table against brute-force derivation enumeration, plus
//! coherence and the structural lemmas over random small grammars.

mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tylr_core::elab::Elab;
use tylr_core::gen::{mini_grammar_json, Deriver};
use tylr_core::relations::{check_coherence, lemma_violations, RelationTable};
use tylr_core::{builtin_hazel, load_grammar, Pbg};

/// Steps in the table but unwitnessed, and witnessed but missing.
fn table_vs_oracle(g: &Pbg) -> (Vec<String>, Vec<String>) {
    let table = RelationTable::over(Elab::without_grout(g));
    let d = Deriver::new(g);
    let witnessed = support::Oracle::new(&d, 6).steps();
    let show = |s: &tylr_core::relations::RelStep| {
        format!("{} {} {} @ {}", s.left.show(g), s.op, s.right.show(g), s.slot.map(|n| n.show(g)).unwrap_or_default())
    };
    let extra = table.steps.difference(&witnessed).map(show).collect();
    let missing = witnessed.difference(&table.steps).map(show).collect();
    (extra, missing)
}

#[test]
fn hazel_table_matches_derivations() {
    let g = builtin_hazel();
    let (extra, missing) = table_vs_oracle(&g);
    assert!(extra.is_empty(), "unwitnessed: {extra:#?}");
    assert!(missing.is_empty(), "missing: {missing:#?}");
}

#[test]
fn mini_grammar_tables_match_derivations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let json = mini_grammar_json(&mut rng);
        let g = load_grammar(&json).unwrap();
        let (extra, missing) = table_vs_oracle(&g);
        assert!(extra.is_empty() && missing.is_empty(), "{json}\nunwitnessed: {extra:#?}\nmissing: {missing:#?}");
    }
}

#[test]
fn hazel_is_coherent() {
    let g = builtin_hazel();
    let failures: Vec<String> = check_coherence(&g).iter().map(|f| f.show(&g)).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

/// Random grammars need not be coherent: a form ending in another sort, like
/// `A 'c' C`, leaves its right side unbounded, so `C` may end in any `A`.
#[test]
fn lemmas_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut grammars = vec![("hazel".to_string(), builtin_hazel())];
    for _ in 0..20 {
        let json = mini_grammar_json(&mut rng);
        let g = load_grammar(&json).unwrap();
        grammars.push((json, g));
    }
    for (name, g) in &grammars {
        let violations = lemma_violations(&RelationTable::new(g));
        assert!(violations.is_empty(), "{name}\n{violations:?}");
    }
}
