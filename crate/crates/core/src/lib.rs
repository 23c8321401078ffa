//! Error-correcting tile-based operator-precedence parsing.
//!
//! A [`grammar::Pbg`] is elaborated into bounded-sort productions with grout
//! injected ([`elab`]), from which slot-annotated precedence relations are
//! derived ([`relations`]). The [`parser`] completes any tile sequence into a
//! well-formed term by inserting obligations; the [`molder`] turns raw text
//! into tiles by minimizing those obligations, and the [`editor`] drives it
//! all keystroke by keystroke.

pub mod bench;
pub mod editor;
pub mod elab;
pub mod gen;
pub mod grammar;
pub mod molder;
pub mod parser;
pub mod relations;

pub use elab::{BoundedSort, Elab, GroutShape, Item, ProdKind, Production, Terminal, Tip};
pub use grammar::{builtin_hazel, load_grammar, validate, Pbg, Precedence};
