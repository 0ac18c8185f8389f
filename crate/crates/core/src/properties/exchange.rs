use super::hypercube::HypercubeValuation;
use super::{PropertyError, PropertyReport, Witness};
use crate::engine::{compile, compiled_demand, optimal_circulation_for, CompiledMessage};
use crate::flows::{self, Circulation, CycleFlow, FlowNetwork};
use crate::model::{
    support_plus, AssignmentMessage, Bundle, ModelError, PriceVector, ValuationTable,
};
use crate::rational::{Exact, Rational};
use std::collections::BTreeSet;
use std::fmt;

/// Anything that can report its demand set at a price vector.
pub trait DemandOracle {
    fn num_goods(&self) -> usize;
    fn demand(&self, p: &PriceVector) -> Result<BTreeSet<Bundle>, PropertyError>;
}

fn check_len(expected: usize, p: &PriceVector) -> Result<(), PropertyError> {
    if p.num_goods() != expected {
        return Err(ModelError::LengthMismatch {
            expected,
            actual: p.num_goods(),
        }
        .into());
    }
    Ok(())
}

/// Demand of a table by scanning every entry in exact arithmetic.
fn table_demand(
    table: &ValuationTable,
    p: &PriceVector,
) -> Result<BTreeSet<Bundle>, PropertyError> {
    check_len(table.num_goods(), p)?;
    let mut best: Option<Rational> = None;
    let mut demand = BTreeSet::new();
    for (q, v) in table.iter() {
        let u = v - p.cost(q)?;
        match &best {
            Some(b) if &u < b => continue,
            Some(b) if &u == b => {}
            _ => {
                demand.clear();
                best = Some(u);
            }
        }
        demand.insert(q.clone());
    }
    Ok(demand)
}

impl DemandOracle for ValuationTable {
    fn num_goods(&self) -> usize {
        ValuationTable::num_goods(self)
    }

    fn demand(&self, p: &PriceVector) -> Result<BTreeSet<Bundle>, PropertyError> {
        table_demand(self, p)
    }
}

impl DemandOracle for HypercubeValuation {
    fn num_goods(&self) -> usize {
        HypercubeValuation::num_goods(self)
    }

    fn demand(&self, p: &PriceVector) -> Result<BTreeSet<Bundle>, PropertyError> {
        check_len(self.num_goods(), p)?;
        match self.demand_bundles(p) {
            Some(d) => Ok(d),
            None => table_demand(&self.to_table(), p),
        }
    }
}

impl DemandOracle for CompiledMessage {
    fn num_goods(&self) -> usize {
        CompiledMessage::num_goods(self)
    }

    fn demand(&self, p: &PriceVector) -> Result<BTreeSet<Bundle>, PropertyError> {
        Ok(compiled_demand(self, p)?.demand)
    }
}

impl DemandOracle for AssignmentMessage {
    fn num_goods(&self) -> usize {
        self.num_goods
    }

    fn demand(&self, p: &PriceVector) -> Result<BTreeSet<Bundle>, PropertyError> {
        check_len(self.num_goods, p)?;
        compile(self)?.demand(p)
    }
}

/// Demanded bundles with the fewest items.
pub fn min_size_demand(demand: &BTreeSet<Bundle>) -> BTreeSet<Bundle> {
    let Some(min) = demand.iter().map(Bundle::size).min() else {
        return BTreeSet::new();
    };
    demand.iter().filter(|b| b.size() == min).cloned().collect()
}

/// All `(i, j)` in `supp+(q - r) x supp+(r - q)` with both `q - e_i + e_j`
/// and `r + e_i - e_j` in `demand`.
pub fn exchange_pairs_in(
    demand: &BTreeSet<Bundle>,
    q: &Bundle,
    r: &Bundle,
) -> Result<BTreeSet<(usize, usize)>, PropertyError> {
    for b in [q, r] {
        if !demand.contains(b) {
            return Err(PropertyError::NotDemanded(b.to_string()));
        }
    }
    let gives = support_plus(q, r)?;
    let takes = support_plus(r, q)?;
    let mut pairs = BTreeSet::new();
    for &i in &gives {
        for &j in &takes {
            if demand.contains(&q.swapped(i, j)) && demand.contains(&r.swapped(j, i)) {
                pairs.insert((i, j));
            }
        }
    }
    Ok(pairs)
}

/// [`exchange_pairs_in`] against the demand set of `val` at `p`.
pub fn valid_swap_pairs<V: DemandOracle + ?Sized>(
    val: &V,
    p: &PriceVector,
    q: &Bundle,
    r: &Bundle,
) -> Result<BTreeSet<(usize, usize)>, PropertyError> {
    exchange_pairs_in(&val.demand(p)?, q, r)
}

/// A swap relation between the surplus goods of two demanded bundles.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExchangeCorrespondence {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl ExchangeCorrespondence {
    pub fn out_degree(&self, i: usize) -> usize {
        self.pairs.iter().filter(|&&(a, _)| a == i).count()
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.pairs.iter().filter(|&&(_, b)| b == j).count()
    }

    /// Both swap bundles of every pair are demanded.
    pub fn swaps_demanded(&self, demand: &BTreeSet<Bundle>, q: &Bundle, r: &Bundle) -> bool {
        self.pairs
            .iter()
            .all(|&(i, j)| demand.contains(&q.swapped(i, j)) && demand.contains(&r.swapped(j, i)))
    }

    /// Pairs stay in the two supports and every surplus good has degree
    /// between one and its surplus.
    pub fn degrees_ok(&self, q: &Bundle, r: &Bundle) -> bool {
        let (Ok(gives), Ok(takes)) = (support_plus(q, r), support_plus(r, q)) else {
            return false;
        };
        self.pairs
            .iter()
            .all(|(i, j)| gives.contains(i) && takes.contains(j))
            && gives.iter().all(|&i| {
                let d = self.out_degree(i) as i64;
                d >= 1 && d <= q.quantity(i) - r.quantity(i)
            })
            && takes.iter().all(|&j| {
                let d = self.in_degree(j) as i64;
                d >= 1 && d <= r.quantity(j) - q.quantity(j)
            })
    }

    pub fn is_valid_for(&self, demand: &BTreeSet<Bundle>, q: &Bundle, r: &Bundle) -> bool {
        self.degrees_ok(q, r) && self.swaps_demanded(demand, q, r)
    }
}

impl fmt::Display for ExchangeCorrespondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|(i, j)| format!("({i},{j})"))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Chooses a sub-relation of `pairs` meeting the degree windows, or `None`.
///
/// Circulation on `s -> i [1, q_i - r_i]`, `i -> j [0, 1]` for each pair,
/// `j -> t [1, r_j - q_j]` and `t -> s`; integral feasible circulations are
/// exactly the admissible relations.
pub fn find_correspondence(
    pairs: &BTreeSet<(usize, usize)>,
    q: &Bundle,
    r: &Bundle,
) -> Result<Option<ExchangeCorrespondence>, PropertyError> {
    let gives = support_plus(q, r)?;
    let takes = support_plus(r, q)?;
    if gives.is_empty() && takes.is_empty() {
        return Ok(Some(ExchangeCorrespondence::default()));
    }
    let mut net = FlowNetwork::new();
    let s = net.add_vertex("s");
    let t = net.add_vertex("t");
    let give_v: Vec<(usize, usize)> = gives
        .iter()
        .map(|&i| (i, net.add_vertex(format!("give {i}"))))
        .collect();
    let take_v: Vec<(usize, usize)> = takes
        .iter()
        .map(|&j| (j, net.add_vertex(format!("take {j}"))))
        .collect();
    let vertex =
        |list: &[(usize, usize)], g: usize| list.iter().find(|(x, _)| *x == g).map(|&(_, v)| v);
    let mut total = 0;
    for &(i, v) in &give_v {
        let surplus = q.quantity(i) - r.quantity(i);
        total += surplus;
        net.add_arc(s, v, 1, surplus, Rational::default())
            .expect("surplus is positive");
    }
    for &(j, v) in &take_v {
        net.add_arc(v, t, 1, r.quantity(j) - q.quantity(j), Rational::default())
            .expect("surplus is positive");
    }
    let mut pair_arcs = Vec::new();
    for &(i, j) in pairs {
        if let (Some(a), Some(b)) = (vertex(&give_v, i), vertex(&take_v, j)) {
            pair_arcs.push((
                (i, j),
                net.add_arc(a, b, 0, 1, Rational::default())
                    .expect("unit arc"),
            ));
        }
    }
    net.add_arc(t, s, 0, total, Rational::default())
        .expect("return arc");
    Ok(flows::feasible_circulation(&net)
        .ok()
        .map(|f| ExchangeCorrespondence {
            pairs: pair_arcs
                .iter()
                .filter(|&&(_, arc)| f.get(arc) == 1)
                .map(|&(pair, _)| pair)
                .collect(),
        }))
}

/// Two minimum-size demanded bundles without an admissible correspondence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeWitness {
    pub price: PriceVector,
    pub demand: BTreeSet<Bundle>,
    pub q: Bundle,
    pub r: Bundle,
    /// Swaps that satisfy the demand condition; no sub-relation of these
    /// meets the degree windows.
    pub valid_pairs: BTreeSet<(usize, usize)>,
}

impl fmt::Display for ExchangeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prices: Vec<String> = self
            .price
            .prices()
            .iter()
            .map(|x| Exact(x).to_string())
            .collect();
        let demand: Vec<String> = self.demand.iter().map(Bundle::to_string).collect();
        let pairs = ExchangeCorrespondence {
            pairs: self.valid_pairs.clone(),
        };
        write!(
            f,
            "at p=({}) with D(p)={{{}}}, q={} and r={} admit no exchange correspondence (valid swaps {})",
            prices.join(","),
            demand.join(", "),
            self.q,
            self.r,
            pairs
        )
    }
}

/// An ordered pair of minimum-size demanded bundles without a correspondence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeFailure {
    pub q: Bundle,
    pub r: Bundle,
    pub valid_pairs: BTreeSet<(usize, usize)>,
}

/// Multi-unit test of one demand set: every ordered pair of distinct
/// minimum-size bundles needs a correspondence.
pub fn exchange_failure_in(
    demand: &BTreeSet<Bundle>,
) -> Result<Option<ExchangeFailure>, PropertyError> {
    let mins = min_size_demand(demand);
    for q in &mins {
        for r in &mins {
            if q == r {
                continue;
            }
            let pairs = exchange_pairs_in(demand, q, r)?;
            if find_correspondence(&pairs, q, r)?.is_none() {
                return Ok(Some(ExchangeFailure {
                    q: q.clone(),
                    r: r.clone(),
                    valid_pairs: pairs,
                }));
            }
        }
    }
    Ok(None)
}

/// Single-unit test of one demand set by backtracking over bijections.
pub fn bijection_failure_in(
    demand: &BTreeSet<Bundle>,
) -> Result<Option<ExchangeFailure>, PropertyError> {
    if let Some(b) = demand
        .iter()
        .find(|b| b.quantities().iter().any(|&x| x != 0 && x != 1))
    {
        return Err(PropertyError::NotSingleUnit(b.to_string()));
    }
    let mins = min_size_demand(demand);
    for q in &mins {
        for r in &mins {
            if q == r {
                continue;
            }
            let gives: Vec<usize> = support_plus(q, r)?.into_iter().collect();
            let takes: Vec<usize> = support_plus(r, q)?.into_iter().collect();
            let ok = |i: usize, j: usize| {
                demand.contains(&q.swapped(i, j)) && demand.contains(&r.swapped(j, i))
            };
            let mut used = vec![false; takes.len()];
            if gives.len() != takes.len() || !extend_bijection(&gives, &takes, &ok, &mut used, 0) {
                let valid = gives
                    .iter()
                    .flat_map(|&i| takes.iter().map(move |&j| (i, j)))
                    .filter(|&(i, j)| ok(i, j))
                    .collect();
                return Ok(Some(ExchangeFailure {
                    q: q.clone(),
                    r: r.clone(),
                    valid_pairs: valid,
                }));
            }
        }
    }
    Ok(None)
}

fn extend_bijection(
    gives: &[usize],
    takes: &[usize],
    ok: &impl Fn(usize, usize) -> bool,
    used: &mut [bool],
    at: usize,
) -> bool {
    if at == gives.len() {
        return true;
    }
    for k in 0..takes.len() {
        if !used[k] && ok(gives[at], takes[k]) {
            used[k] = true;
            if extend_bijection(gives, takes, ok, used, at + 1) {
                return true;
            }
            used[k] = false;
        }
    }
    false
}

fn report(
    p: &PriceVector,
    demand: BTreeSet<Bundle>,
    failure: Option<ExchangeFailure>,
) -> PropertyReport {
    let m = min_size_demand(&demand).len() as u64;
    let cases = m * m.saturating_sub(1);
    match failure {
        None => PropertyReport::holds(cases),
        Some(ExchangeFailure { q, r, valid_pairs }) => PropertyReport::fails(
            Witness::Exchange(ExchangeWitness {
                price: p.clone(),
                demand,
                q,
                r,
                valid_pairs,
            }),
            cases,
        ),
    }
}

/// Multi-unit strong exchangeability at `p`, over ordered pairs of
/// minimum-size demanded bundles.
pub fn check_strong_exchangeability<V: DemandOracle + ?Sized>(
    val: &V,
    p: &PriceVector,
) -> Result<PropertyReport, PropertyError> {
    let demand = val.demand(p)?;
    let failure = exchange_failure_in(&demand)?;
    Ok(report(p, demand, failure))
}

/// Single-unit strong exchangeability at `p` by direct bijection search.
/// Every demanded bundle must be a 0/1 vector.
pub fn check_single_unit_exchangeability<V: DemandOracle + ?Sized>(
    val: &V,
    p: &PriceVector,
) -> Result<PropertyReport, PropertyError> {
    let demand = val.demand(p)?;
    let failure = bijection_failure_in(&demand)?;
    Ok(report(p, demand, failure))
}

/// Re-checks an exchange witness against a table: recomputes the demand set
/// by scanning, confirms `q` and `r` are distinct minimum-size members, and
/// tries every subset of swap pairs against both properties.
pub fn verify_exchange_witness(table: &ValuationTable, w: &ExchangeWitness) -> bool {
    let Ok(demand) = table_demand(table, &w.price) else {
        return false;
    };
    let mins = min_size_demand(&demand);
    if demand != w.demand || w.q == w.r || !mins.contains(&w.q) || !mins.contains(&w.r) {
        return false;
    }
    let (Ok(gives), Ok(takes)) = (support_plus(&w.q, &w.r), support_plus(&w.r, &w.q)) else {
        return false;
    };
    let all: Vec<(usize, usize)> = gives
        .iter()
        .flat_map(|&i| takes.iter().map(move |&j| (i, j)))
        .collect();
    if all.len() > 20 {
        return false;
    }
    !(0u32..1 << all.len()).any(|mask| {
        let sigma = ExchangeCorrespondence {
            pairs: (0..all.len())
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| all[k])
                .collect(),
        };
        sigma.is_valid_for(&demand, &w.q, &w.r)
    })
}

/// Output of the flow-based correspondence construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaConstruction {
    pub correspondence: ExchangeCorrespondence,
    /// The priced network both circulations live in.
    pub network: FlowNetwork,
    pub y_q: Circulation,
    pub y_r: Circulation,
    /// Conformal unit cycles of `y_q - y_r`.
    pub cycles: Vec<CycleFlow>,
}

/// Builds `sigma` from optimal circulations `y_q` and `y_r`: decompose
/// `y_q - y_r` into conformal unit cycles and relate `i` to `j` whenever a
/// cycle uses `R_i` forward and `R_j` backward.
pub fn construct_sigma_from_flows(
    compiled: &CompiledMessage,
    p: &PriceVector,
    q: &Bundle,
    r: &Bundle,
) -> Result<SigmaConstruction, PropertyError> {
    let demand = compiled_demand(compiled, p)?.demand;
    let mins = min_size_demand(&demand);
    for b in [q, r] {
        if !demand.contains(b) {
            return Err(PropertyError::NotDemanded(b.to_string()));
        }
        if !mins.contains(b) {
            return Err(PropertyError::NotMinimal(b.to_string()));
        }
    }
    let optimal = |b: &Bundle| {
        optimal_circulation_for(compiled, p, b)
            .map_err(PropertyError::from)?
            .ok_or_else(|| PropertyError::NotDemanded(b.to_string()))
    };
    let y_q = optimal(q)?;
    let y_r = optimal(r)?;
    let network = compiled.priced_network(p)?;
    let cycles = flows::decompose_conformal(&network, &y_q.sub(&y_r))
        .expect("difference of circulations is balanced");
    let mut pairs = BTreeSet::new();
    for c in &cycles {
        for (gi, &ai) in compiled.root_arc_of_good.iter().enumerate() {
            if c.on(ai) != 1 {
                continue;
            }
            for (gj, &aj) in compiled.root_arc_of_good.iter().enumerate() {
                if c.on(aj) == -1 {
                    pairs.insert((gi + 1, gj + 1));
                }
            }
        }
    }
    Ok(SigmaConstruction {
        correspondence: ExchangeCorrespondence { pairs },
        network,
        y_q,
        y_r,
        cycles,
    })
}

/// Ways a constructed correspondence can fall short.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SigmaDefect {
    #[error("y_q or y_r does not read off the requested bundles")]
    WrongReadout,
    #[error("cycles do not sum to y_q - y_r")]
    BadDecomposition,
    #[error("cycle {0} has nonzero cost")]
    CycleCost(usize),
    #[error("shifting by cycle {0} leaves the optimal set")]
    NotOptimal(usize),
    #[error("cycle {0} has more than one forward or backward good root arc, or unequal counts")]
    RootPairs(usize),
    #[error("cycle {0} uses the grand root arc although the bundles have equal size")]
    GrandRoot(usize),
    #[error("correspondence violates the swap or degree conditions")]
    Definition,
}

/// Checks every property the construction promises: zero-cost cycles, each
/// shift `y_r + c` and `y_q - c` optimal, at most one forward and one
/// backward good root arc per cycle, no flow on the grand root arc, and the
/// correspondence itself.
pub fn verify_sigma_construction(
    compiled: &CompiledMessage,
    p: &PriceVector,
    q: &Bundle,
    r: &Bundle,
    sc: &SigmaConstruction,
) -> Result<(), SigmaDefect> {
    let net = &sc.network;
    if compiled.bundle_of(&sc.y_q) != *q || compiled.bundle_of(&sc.y_r) != *r {
        return Err(SigmaDefect::WrongReadout);
    }
    let m = net.num_arcs();
    let total = sc
        .cycles
        .iter()
        .fold(Circulation::zero(m), |acc, c| acc.add(&c.to_circulation(m)));
    if total != sc.y_q.sub(&sc.y_r) || !sc.cycles.iter().all(|c| c.is_well_formed(net)) {
        return Err(SigmaDefect::BadDecomposition);
    }
    let best = flows::solve_min_cost(net)
        .expect("zero circulation is feasible")
        .objective;
    let optimal = |f: &Circulation| net.is_feasible(f).unwrap_or(false) && net.objective(f) == best;
    if !optimal(&sc.y_q) || !optimal(&sc.y_r) {
        return Err(SigmaDefect::WrongReadout);
    }
    for (k, c) in sc.cycles.iter().enumerate() {
        if c.cost(net) != Rational::default() {
            return Err(SigmaDefect::CycleCost(k));
        }
        let cf = c.to_circulation(m);
        if !optimal(&sc.y_r.add(&cf)) || !optimal(&sc.y_q.sub(&cf)) {
            return Err(SigmaDefect::NotOptimal(k));
        }
        let forward = compiled
            .root_arc_of_good
            .iter()
            .filter(|&&a| c.on(a) == 1)
            .count();
        let backward = compiled
            .root_arc_of_good
            .iter()
            .filter(|&&a| c.on(a) == -1)
            .count();
        if forward != backward || forward > 1 {
            return Err(SigmaDefect::RootPairs(k));
        }
        if q.size() == r.size() && c.on(compiled.grand_root_arc) != 0 {
            return Err(SigmaDefect::GrandRoot(k));
        }
    }
    let demand = compiled_demand(compiled, p)
        .map_err(|_| SigmaDefect::Definition)?
        .demand;
    if !sc.correspondence.is_valid_for(&demand, q, r) {
        return Err(SigmaDefect::Definition);
    }
    Ok(())
}
