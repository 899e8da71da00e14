//! An executable model of a small structured intermediate language: two
//! semantics, a behavior layer with refinement checks, three loop
//! transformations and a differential tester for them.

pub mod analysis;
pub mod cli;
pub mod behavior;
pub mod bigstep;
pub mod oracle;
pub mod smallstep;
pub mod state;
pub mod syntax;
pub mod transform;
pub mod difftest;
