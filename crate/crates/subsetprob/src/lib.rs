//! A probability calculus whose values are subsets of [0, 1].
//!
//! Classical probability assigns one number to an experiment outcome. This
//! crate works with a coarser description: each yes/no experiment on a system
//! in a given state gets a whole set of numbers, understood as the relative
//! frequencies that could be observed depending on hidden context the
//! description does not fix. A singleton set recovers the classical picture,
//! the empty set marks an experiment that cannot be performed at all, and
//! `{1}` marks certainty.
//!
//! The crate provides:
//!
//! - exact set algebra over finite unions of closed rational intervals
//!   ([`interval`]);
//! - a term algebra of yes/no experiments with product and inverse
//!   ([`term`]);
//! - state-experiment-probability systems binding terms to values, with
//!   certainty predicates and a validator ([`sep`]);
//! - weighted-choice diagnostics and attainability of product values
//!   ([`choice`]);
//! - a stochastic simulator realizing a subset as the set of limits of
//!   relative-frequency sequences ([`sim`]);
//! - derivation of the complete property lattice and state ordering carried
//!   by a system ([`property`]);
//! - structure-preserving maps between systems and between their derived
//!   property systems ([`morphism`]);
//! - random instance generators backing the test suites ([`random`]) and a
//!   small command line front end ([`cli`]).

pub mod choice;
pub mod cli;
mod error;
pub mod interval;
pub mod morphism;
pub mod property;
pub mod random;
pub mod rational;
mod scan;
pub mod sep;
pub mod sim;
pub mod term;

pub use error::Error;
pub use interval::{ClosedInterval, UnitIntervalSet};
pub use morphism::{
    derive_sp_morphism, validate_sep_morphism, validate_sp_morphism,
    MorphismViolation, SepMorphism, SpMorphism, SpMorphismViolation,
};
pub use property::{
    derive_property_system, derive_property_system_with, PropertyLattice,
    SpViolation, StatePropertySystem,
};
pub use rational::Rational;
pub use sep::{SepSystem, SepViolation, StateId};
pub use sim::{recover_subset, RecoveryReport, SimulationPolicy};
pub use term::{ExperimentSymbol, ExperimentTerm};
