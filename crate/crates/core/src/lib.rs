//! Integer assignment messages as a bidding language.
//!
//! A message describes a valuation through a linear program over variables
//! tagged with goods and a laminar family of bounded sums per good plus one
//! over all variables. This crate evaluates such messages through their
//! circulation network ([`engine`]), provides the circulation kernel itself
//! ([`flows`]), and checks the substitutes and strong exchangeability
//! properties of valuations ([`properties`]). The [`cli`] module holds the
//! message file format, graph export, instance generation and the randomized
//! and exhaustive searches driven by the `am` binary.

pub mod cli;
pub mod engine;
pub mod flows;
pub mod model;
pub mod properties;
pub mod rational;

pub use engine::{
    build_network, demand_set, feasible_bundles, indirect_utility, to_valuation_table, value,
    value_oracle, CompiledMessage, DemandResult, EngineError,
};
pub use flows::{Circulation, CycleFlow, FlowNetwork};
pub use model::{
    normalize_trees, support_plus, validate_message, AssignmentMessage, Bundle, PriceVector,
    TreeConstraint, ValidationReport, ValuationTable, Variable, Violation,
};
pub use rational::Rational;
