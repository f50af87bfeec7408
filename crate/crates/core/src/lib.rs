//! Desk-scale logical induction.
//!
//! Builds markets over propositional sentences that a configured pool of
//! continuous, budgeted traders cannot exploit, certifies every posted day,
//! and measures how the resulting prices behave on provability, halting,
//! self-reference and self-trust experiments.

pub mod deduction;
pub mod harness;
pub mod inductor;
pub mod logic;
pub mod pricing;
pub mod rational;
pub mod template;
pub mod trading;
