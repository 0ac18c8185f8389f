//! Deterministic search for a gross substitutes valuation on `{0,1}^n` that
//! is not strongly exchangeable.

use crate::model::{Bundle, PriceVector, ValuationTable};
use crate::properties::gross_substitutes_hypercube;
use crate::properties::{
    bijection_failure_in, check_gross_substitutes_exact, check_strong_exchangeability,
    exchange_failure_in, verify_exchange_witness, DemandOracle, ExchangeWitness,
    HypercubeValuation, PropertyError, Verdict, Witness,
};
use crate::rational::{int, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub const MAX_SEARCH_GOODS: usize = 6;

/// Which tables are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchFamily {
    /// All tables with `v(empty) = 0` and values in `0..=value_cap`,
    /// lexicographic in `(v({1}), v({2}), v({1,2}), ...)` by bit mask.
    Exhaustive,
    /// Rank functions of matroids of rank at most `value_cap`, by rank and
    /// then by the bit mask of the base family over r-subsets in mask order.
    MatroidRank,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub num_goods: usize,
    pub value_cap: u32,
    /// Maximum number of tables examined.
    pub budget: u64,
    pub family: SearchFamily,
    /// Cap on grid prices per table; larger grids are sampled with `seed`.
    pub max_grid_points: usize,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(num_goods: usize, value_cap: u32, budget: u64) -> Self {
        SearchConfig {
            num_goods,
            value_cap,
            budget,
            family: SearchFamily::Exhaustive,
            max_grid_points: 4096,
            seed: 0,
        }
    }

    pub fn with_family(mut self, family: SearchFamily) -> Self {
        self.family = family;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search supports 2..={MAX_SEARCH_GOODS} goods, got {0}")]
    Goods(usize),
    #[error("budget must be positive")]
    Budget,
    #[error(transparent)]
    Property(#[from] PropertyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchWitness {
    /// Position of the table in the enumeration order (0-based).
    pub index: u64,
    pub table: ValuationTable,
    pub failure: ExchangeWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(SearchWitness),
    /// `complete` tells whether the whole family was enumerated.
    NotFound {
        complete: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub examined: u64,
    pub gross_substitutes: u64,
    pub prices_tried: u64,
    pub demand_families: usize,
    pub outcome: SearchOutcome,
}

impl SearchReport {
    pub fn witness(&self) -> Option<&SearchWitness> {
        match &self.outcome {
            SearchOutcome::Found(w) => Some(w),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "examined {} tables ({} gross substitutes), {} prices, {} distinct demand sets: ",
            self.examined, self.gross_substitutes, self.prices_tried, self.demand_families
        )?;
        match &self.outcome {
            SearchOutcome::Found(w) => write!(f, "witness #{}: {}", w.index, w.failure),
            SearchOutcome::NotFound { complete: true } => write!(f, "not found; family exhausted"),
            SearchOutcome::NotFound { complete: false } => write!(f, "not found; budget exhausted"),
        }
    }
}

/// Independent re-checks of a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCheck {
    pub gross_substitutes: bool,
    /// Demand recomputed by scanning; no subset of swaps meets both properties.
    pub correspondence_absent: bool,
    /// The bijection search also fails on the recomputed demand set.
    pub bijection_absent: bool,
}

impl WitnessCheck {
    pub fn all(&self) -> bool {
        self.gross_substitutes && self.correspondence_absent && self.bijection_absent
    }
}

pub fn verify_search_witness(w: &SearchWitness) -> Result<WitnessCheck, PropertyError> {
    let gross_substitutes = check_gross_substitutes_exact(&w.table)?.is_holds();
    let correspondence_absent = verify_exchange_witness(&w.table, &w.failure);
    let demand = w.table.demand(&w.failure.price)?;
    let bijection_absent = bijection_failure_in(&demand)?.is_some();
    Ok(WitnessCheck {
        gross_substitutes,
        correspondence_absent,
        bijection_absent,
    })
}

/// Candidate prices for one table in the table's internal scale: uniform
/// prices, products of per-item marginal values (where demand ties), then
/// the half-integer grid on `[-1, cap + 1]`. Each list is deterministic.
fn candidate_prices(h: &HypercubeValuation, cap: u32, max_grid: usize, seed: u64) -> Vec<Vec<i64>> {
    let n = h.num_goods();
    let half = (h.scale() / 2i32).to_i64().expect("scale fits");
    let v = h.scaled_values();
    let halves: Vec<i64> = (-2..=2 * (cap as i64 + 1)).map(|k| k * half).collect();
    let mut out: Vec<Vec<i64>> = halves.iter().map(|&c| vec![c; n]).collect();
    let marginals: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let set: BTreeSet<i64> = (0..1usize << n)
                .filter(|s| s >> i & 1 == 0)
                .map(|s| v[s | 1 << i] - v[s])
                .collect();
            set.into_iter().collect()
        })
        .collect();
    product_points(&marginals, max_grid, seed, &mut out);
    product_points(&vec![halves; n], max_grid, seed.wrapping_add(1), &mut out);
    out
}

fn product_points(axes: &[Vec<i64>], max: usize, seed: u64, out: &mut Vec<Vec<i64>>) {
    let total = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
    match total {
        Some(t) if t <= max => {
            for mut k in 0..t {
                let mut p = vec![0; axes.len()];
                for (slot, a) in p.iter_mut().zip(axes).rev() {
                    *slot = a[k % a.len()];
                    k /= a.len();
                }
                out.push(p);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..max {
                out.push(
                    axes.iter()
                        .map(|a| a[rng.random_range(0..a.len())])
                        .collect(),
                );
            }
        }
    }
}

fn mask_bundle(n: usize, mask: usize) -> Bundle {
    Bundle::new((0..n).map(|k| (mask >> k & 1) as i64).collect())
}

fn family_key(masks: &[usize]) -> u64 {
    masks.iter().fold(0u64, |acc, &m| acc | 1 << m)
}

struct Searcher<'a> {
    cfg: &'a SearchConfig,
    memo: HashMap<u64, bool>,
    examined: u64,
    gross_substitutes: u64,
    prices_tried: u64,
}

impl Searcher<'_> {
    /// Examines one table; `Some` on a witness.
    fn examine(&mut self, values: &[Rational]) -> Result<Option<SearchWitness>, SearchError> {
        let index = self.examined;
        self.examined += 1;
        let n = self.cfg.num_goods;
        let h = HypercubeValuation::from_values(n, values.to_vec(), 2)?;
        if !gross_substitutes_hypercube(&h).is_holds() {
            return Ok(None);
        }
        self.gross_substitutes += 1;
        for scaled in candidate_prices(
            &h,
            self.cfg.value_cap,
            self.cfg.max_grid_points,
            self.cfg.seed,
        ) {
            self.prices_tried += 1;
            let masks = h.demand_masks(&scaled);
            let key = family_key(&masks);
            let fails = match self.memo.get(&key) {
                Some(&f) => f,
                None => {
                    let demand = masks.iter().map(|&m| mask_bundle(n, m)).collect();
                    let f = exchange_failure_in(&demand)?.is_some();
                    self.memo.insert(key, f);
                    f
                }
            };
            if fails {
                let table = h.to_table();
                let price = PriceVector::new(
                    scaled
                        .iter()
                        .map(|&k| Rational::new(BigInt::from(k), h.scale().clone()))
                        .collect(),
                );
                let report = check_strong_exchangeability(&table, &price)?;
                let Verdict::Fails(Witness::Exchange(failure)) = report.verdict else {
                    unreachable!("the verdict depends only on the demand set");
                };
                return Ok(Some(SearchWitness {
                    index,
                    table,
                    failure,
                }));
            }
        }
        Ok(None)
    }
}

fn exhaustive(s: &mut Searcher<'_>) -> Result<Option<SearchWitness>, SearchError> {
    let n = s.cfg.num_goods;
    let size = 1usize << n;
    let cap = s.cfg.value_cap as i64;
    let mut digits = vec![0i64; size];
    loop {
        if s.examined >= s.cfg.budget {
            return Ok(None);
        }
        let values: Vec<Rational> = digits.iter().map(|&d| int(d)).collect();
        if let Some(w) = s.examine(&values)? {
            return Ok(Some(w));
        }
        let mut k = size - 1;
        loop {
            if k == 0 {
                return Ok(None);
            }
            if digits[k] < cap {
                digits[k] += 1;
                break;
            }
            digits[k] = 0;
            k -= 1;
        }
    }
}

fn is_base_family(bases: &[usize]) -> bool {
    let set: BTreeSet<usize> = bases.iter().copied().collect();
    bases.iter().all(|&b1| {
        bases.iter().all(|&b2| {
            let (only1, only2) = (b1 & !b2, b2 & !b1);
            (0..usize::BITS).filter(|x| only1 >> x & 1 == 1).all(|x| {
                (0..usize::BITS)
                    .filter(|y| only2 >> y & 1 == 1)
                    .any(|y| set.contains(&(b1 & !(1 << x) | 1 << y)))
            })
        })
    })
}

fn matroids(s: &mut Searcher<'_>) -> Result<(Option<SearchWitness>, bool), SearchError> {
    let n = s.cfg.num_goods;
    let size = 1usize << n;
    for rank in 0..=n.min(s.cfg.value_cap as usize) {
        let layer: Vec<usize> = (0..size)
            .filter(|m| m.count_ones() as usize == rank)
            .collect();
        for family in 1u64..1 << layer.len() {
            let bases: Vec<usize> = (0..layer.len())
                .filter(|k| family >> k & 1 == 1)
                .map(|k| layer[k])
                .collect();
            if !is_base_family(&bases) {
                continue;
            }
            if s.examined >= s.cfg.budget {
                return Ok((None, false));
            }
            let values: Vec<Rational> = (0..size)
                .map(|m| {
                    int(bases
                        .iter()
                        .map(|b| (b & m).count_ones())
                        .max()
                        .unwrap_or(0) as i64)
                })
                .collect();
            if let Some(w) = s.examine(&values)? {
                return Ok((Some(w), false));
            }
        }
    }
    Ok((None, true))
}

/// Runs the configured enumeration until a witness is found or the budget
/// or family runs out.
pub fn search_counterexample(cfg: &SearchConfig) -> Result<SearchReport, SearchError> {
    if !(2..=MAX_SEARCH_GOODS).contains(&cfg.num_goods) {
        return Err(SearchError::Goods(cfg.num_goods));
    }
    if cfg.budget == 0 {
        return Err(SearchError::Budget);
    }
    let mut s = Searcher {
        cfg,
        memo: HashMap::new(),
        examined: 0,
        gross_substitutes: 0,
        prices_tried: 0,
    };
    let outcome = match cfg.family {
        SearchFamily::Exhaustive => {
            let found = exhaustive(&mut s)?;
            let complete = (cfg.value_cap as u64 + 1)
                .checked_pow((1u32 << cfg.num_goods) - 1)
                .is_some_and(|total| s.examined >= total);
            match found {
                Some(w) => SearchOutcome::Found(w),
                None => SearchOutcome::NotFound { complete },
            }
        }
        SearchFamily::MatroidRank => match matroids(&mut s)? {
            (Some(w), _) => SearchOutcome::Found(w),
            (None, complete) => SearchOutcome::NotFound { complete },
        },
    };
    Ok(SearchReport {
        config: cfg.clone(),
        examined: s.examined,
        gross_substitutes: s.gross_substitutes,
        prices_tried: s.prices_tried,
        demand_families: s.memo.len(),
        outcome,
    })
}
