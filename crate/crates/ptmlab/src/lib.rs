//! Constructive machinery for arithmetizing bounded computation:
//! Gödel numbering, step-bounded Turing machines, Hilbert-style proof
//! checking, the machine-to-circuit-to-CNF-to-formula compiler, and the
//! self-reference constructions built on top of them.

pub mod arith;
pub mod config;
pub mod corpus;
pub mod godel;
pub mod kernel;
pub mod pa;
pub mod sat;
pub mod tm;
