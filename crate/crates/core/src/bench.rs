//! Scaling measurements: batch parse time and per-keystroke edit time over
//! generated programs of growing size, with a fitted power-law exponent.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::editor::{Editor, Event, Item};
use crate::gen::{program_text, Deriver};
use crate::grammar::Pbg;
use crate::molder::parse_source;

/// Sizes measured when none are given.
pub const DEFAULT_SIZES: [usize; 4] = [250, 500, 1000, 2000];

/// Each timing is the minimum over this many runs.
const RUNS: usize = 3;

/// Keystrokes timed per size.
const EDITS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub parse_ms: f64,
    /// Mean time per keystroke at a random position.
    pub edit_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log parse time against log size, over the
    /// nonzero sizes; NaN with fewer than two of them.
    pub exponent: f64,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,parse_ms,edit_ms\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.3},{:.3}\n", r.size, r.parse_ms, r.edit_ms));
        }
        if self.exponent.is_finite() {
            out.push_str(&format!("# fitted exponent: {:.3}\n", self.exponent));
        }
        out
    }
}

fn min_time(mut f: impl FnMut()) -> Duration {
    (0..RUNS)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .expect("at least one run")
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.max(1e-6).ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A buffer holding `text` token by token, single-spaced.
pub fn items_of(ed: &Editor, text: &str) -> Vec<Item> {
    let mut items = Vec::new();
    for (_, tok) in ed.lexer.lex(text) {
        if !items.is_empty() {
            items.push(Item::Space { auto: false });
        }
        items.push(Item::Solid(tok));
    }
    items
}

pub fn run_bench(g: &Pbg, sizes: &[usize], seed: u64) -> BenchReport {
    let d = Deriver::new(g);
    let ed = Editor::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &size in sizes {
        let text = program_text(&d, &mut rng, size);
        let parse = min_time(|| {
            parse_source(&ed.parser, &ed.lexer, &text, false);
        });
        let items = items_of(&ed, &text);
        let mut edit = Duration::ZERO;
        for _ in 0..EDITS {
            let st = ed.state_from(items.clone(), rng.gen_range(0..=items.len()));
            let key = Event::Insert { text: "1".into() };
            edit += min_time(|| {
                ed.apply(&st, &key);
            });
        }
        rows.push(BenchRow { size, parse_ms: ms(parse), edit_ms: ms(edit) / EDITS as f64 });
    }
    let points: Vec<(f64, f64)> = rows.iter().filter(|r| r.size > 0).map(|r| (r.size as f64, r.parse_ms)).collect();
    let exponent = fit_exponent(&points);
    BenchReport { rows, exponent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::builtin_hazel;

    #[test]
    fn exponent_of_exact_power_laws() {
        let quad: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((fit_exponent(&quad) - 2.0).abs() < 1e-9);
        let lin: Vec<(f64, f64)> = [10.0, 100.0].iter().map(|&x| (x, x / 7.0)).collect();
        assert!((fit_exponent(&lin) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_bench_reports_every_size() {
        let g = builtin_hazel();
        let r = run_bench(&g, &[20, 40], 1);
        assert_eq!(r.rows.len(), 2);
        assert!(r.exponent.is_finite());
        let csv = r.to_csv();
        assert!(csv.starts_with("size,parse_ms,edit_ms\n20,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
