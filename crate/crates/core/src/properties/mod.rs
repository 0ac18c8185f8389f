//! Substitutes and strong-exchangeability checkers.
//!
//! Every checker returns a [`PropertyReport`]. A failing report always
//! carries a [`Witness`] that the matching `verify_*` function re-checks by a
//! separate, slower route.

mod exchange;
mod hypercube;
mod substitutes;

pub use exchange::{
    bijection_failure_in, check_single_unit_exchangeability, check_strong_exchangeability,
    construct_sigma_from_flows, exchange_failure_in, exchange_pairs_in, find_correspondence,
    min_size_demand, valid_swap_pairs, verify_exchange_witness, verify_sigma_construction,
    DemandOracle, ExchangeCorrespondence, ExchangeFailure, ExchangeWitness, SigmaConstruction,
    SigmaDefect,
};
pub use hypercube::HypercubeValuation;
pub(crate) use substitutes::gross_substitutes_hypercube;
pub use substitutes::{
    binary_expansion, check_binary_substitutes, check_binary_substitutes_pairs,
    check_gross_substitutes_exact, check_strong_substitutes, default_item_grid,
    verify_local_exchange_witness, verify_substitutes_witness, BinaryValuation,
    LocalExchangeWitness, PriceGrid, SubstitutesWitness, DEFAULT_MAX_POINTS, MAX_ITEMS,
};

use crate::engine::EngineError;
use crate::model::ModelError;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PropertyError {
    #[error("substitutes checks need a nonnegative domain; bundle {0} has a negative entry")]
    NegativeDomain(String),
    #[error("the exact gross substitutes check needs the full hypercube domain")]
    NotHypercube,
    #[error("binary representation would have {0} items; at most {max} are supported", max = substitutes::MAX_ITEMS)]
    TooManyItems(usize),
    #[error("values or prices are too large for exact scaled arithmetic")]
    ScaleOverflow,
    #[error("bundle {0} is not in the demand set")]
    NotDemanded(String),
    #[error("bundle {0} is not of minimum size in the demand set")]
    NotMinimal(String),
    #[error("single-unit check needs 0/1 bundles; {0} is not")]
    NotSingleUnit(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Counterexample data for a failed check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Substitutes(SubstitutesWitness),
    LocalExchange(LocalExchangeWitness),
    Exchange(ExchangeWitness),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Substitutes(w) => w.fmt(f),
            Witness::LocalExchange(w) => w.fmt(f),
            Witness::Exchange(w) => w.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub verdict: Verdict,
    /// Number of elementary cases examined (price points, bundle pairs, ...).
    pub cases: u64,
}

impl PropertyReport {
    pub fn holds(cases: u64) -> Self {
        PropertyReport {
            verdict: Verdict::Holds,
            cases,
        }
    }

    pub fn fails(witness: Witness, cases: u64) -> Self {
        PropertyReport {
            verdict: Verdict::Fails(witness),
            cases,
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Holds => write!(f, "holds ({} cases)", self.cases),
            Verdict::Fails(w) => write!(f, "fails after {} cases: {w}", self.cases),
        }
    }
}
