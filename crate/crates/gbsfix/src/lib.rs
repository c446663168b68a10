//! Fixed subgroups of generalised Baumslag-Solitar group automorphisms.
//!
//! Given a GBS system as a ℤ-labelled graph, this crate decides whether all
//! tree-compatible automorphisms have finitely generated fixed subgroups,
//! computes the applicable rank bounds, constructs explicit twist
//! automorphisms witnessing non-finite generation or unbounded rank, and
//! verifies those constructions by exact word computation in the group.
//!
//! The main entry points are [`classify::classify`] for the decision
//! procedure, [`witness`] for the explicit constructions, and
//! [`cli`]/[`dsl`] for the `.gbs` file format and command-line surface.

pub mod autos;
pub mod classify;
pub mod cli;
pub mod dsl;
pub mod graph;
pub mod modulus;
pub mod report;
pub mod witness;
pub mod words;

pub use graph::{ElementaryKind, GraphError, LabelledGraph, Presentation, RawEdge};
pub use modulus::{modulus_of_system, FactoredRational, ModulusSubgroup, Rational};
pub use words::{parse_word, word_equal, GroupWord, TreeBall};
