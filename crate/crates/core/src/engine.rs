//! Evaluation of assignment messages through their circulation network.
//!
//! Each member set `I` of the (normalized) message becomes one arc carrying
//! `y_I = sum_{j in I} x_j`; each non-terminal tree node and the equation
//! tying the good roots to the grand root become vertices. Values, indirect
//! utilities and demand sets are then min-cost and feasibility questions on
//! that network.

use crate::flows::{self, ArcId, Circulation, FlowNetwork, MinCostSolution, VertexId};
use crate::model::{
    is_normalized, normalize_trees, validate_message, AssignmentMessage, Bundle, ModelError,
    PriceVector, TreeNodes, ValidationReport, ValuationTable,
};
use crate::rational::Rational;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid assignment message:\n{0}")]
    Invalid(ValidationReport),
    #[error("message is not normalized; call normalize_trees first")]
    NotNormalized,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("enumeration needs {needed} points, above the limit of {limit}")]
    TooLarge { needed: u128, limit: u128 },
}

/// Largest box the brute-force oracles will walk.
pub const ORACLE_LIMIT: u128 = 2_000_000;

/// Indirect utility and demand set at one price vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandResult {
    pub indirect_utility: Rational,
    pub demand: BTreeSet<Bundle>,
}

/// A message compiled to its circulation network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledMessage {
    pub network: FlowNetwork,
    /// `root_arc_of_good[i - 1]` carries `y_{R_i}`.
    pub root_arc_of_good: Vec<ArcId>,
    /// `terminal_arc_of_variable[j - 1]` carries `y_{{j}} = x_j`.
    pub terminal_arc_of_variable: Vec<ArcId>,
    pub grand_root_arc: ArcId,
    /// Vertex of the equation `sum_i y_{R_i} - y_{R_0} = 0`.
    pub roots_vertex: VertexId,
    /// Member set of every arc.
    pub arc_sets: Vec<BTreeSet<usize>>,
    goods: Vec<usize>,
    values: Vec<Rational>,
}

fn set_label(set: &BTreeSet<usize>) -> String {
    let items: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

/// Builds the network of a valid, normalized message.
pub fn build_network(msg: &AssignmentMessage) -> Result<CompiledMessage, EngineError> {
    let report = validate_message(msg);
    if !report.is_valid() {
        return Err(EngineError::Invalid(report));
    }
    if !is_normalized(msg) {
        return Err(EngineError::NotNormalized);
    }
    let n = msg.num_goods;
    let m = msg.num_variables();
    let trees: Vec<TreeNodes> = (0..=n).map(|t| TreeNodes::of(msg, t)).collect();

    let mut net = FlowNetwork::new();
    // vertex_of[t][k]: vertex for non-terminal node k of tree t.
    let mut vertex_of: Vec<Vec<Option<VertexId>>> = Vec::with_capacity(n + 1);
    for (t, tree) in trees.iter().enumerate() {
        let ids = tree
            .sets
            .iter()
            .map(|(set, _, _)| {
                (set.len() > 1).then(|| {
                    net.add_vertex(if t == 0 {
                        format!("(2) I={}", set_label(set))
                    } else {
                        format!("(3) i={t}, I={}", set_label(set))
                    })
                })
            })
            .collect();
        vertex_of.push(ids);
    }
    let roots_vertex = net.add_vertex("(5) roots");

    // Coefficient +1 side of y_I within tree t (`None` if I is not in t).
    let upper_end = |t: usize, set: &BTreeSet<usize>| -> Option<VertexId> {
        let tree = &trees[t];
        let k = tree.position(set)?;
        Some(match tree.parent[k] {
            Some(p) => vertex_of[t][p].expect("parents are non-terminal"),
            None => roots_vertex,
        })
    };

    let good_of: BTreeMap<usize, usize> = msg.variables.iter().map(|v| (v.id, v.good)).collect();
    let mut arc_of_set: BTreeMap<BTreeSet<usize>, ArcId> = BTreeMap::new();
    let mut arc_sets = Vec::new();
    for (set, (lower, upper)) in msg.merged_bounds() {
        let (tail, head) = if set.len() == 1 {
            let j = *set.iter().next().unwrap();
            let head = upper_end(good_of[&j], &set).expect("singleton in its good tree");
            let tail = upper_end(0, &set).expect("singleton in tree 0");
            (tail, head)
        } else {
            let t = (0..=n)
                .find(|&t| trees[t].position(&set).is_some())
                .expect("every set sits in a tree");
            let own = vertex_of[t][trees[t].position(&set).unwrap()].unwrap();
            let other = upper_end(t, &set).unwrap();
            if t == 0 {
                // +1 in its own row (2), -1 in its parent's row (or in (5)).
                (other, own)
            } else {
                // -1 in its own row (3), +1 in its parent's row (or in (5)).
                (own, other)
            }
        };
        let label = format!("I={} [{lower},{upper}]", set_label(&set));
        let id = net
            .add_labeled_arc(tail, head, lower, upper, Rational::zero(), label)
            .expect("endpoints exist and lower <= 0 <= upper");
        arc_of_set.insert(set.clone(), id);
        arc_sets.push(set);
    }

    let root_arc_of_good = (1..=n)
        .map(|g| arc_of_set[&msg.good_variables(g)])
        .collect();
    let grand_root_arc = arc_of_set[&msg.good_variables(0)];
    let mut variables = msg.variables.clone();
    variables.sort_by_key(|v| v.id);
    let terminal_arc_of_variable = (1..=m).map(|j| arc_of_set[&BTreeSet::from([j])]).collect();
    Ok(CompiledMessage {
        network: net,
        root_arc_of_good,
        terminal_arc_of_variable,
        grand_root_arc,
        roots_vertex,
        arc_sets,
        goods: variables.iter().map(|v| v.good).collect(),
        values: variables.iter().map(|v| v.value.clone()).collect(),
    })
}

impl CompiledMessage {
    pub fn num_goods(&self) -> usize {
        self.root_arc_of_good.len()
    }

    /// Network with terminal costs `-v_j`, the objective of the value problem.
    pub fn value_network(&self) -> FlowNetwork {
        let mut net = self.network.clone();
        for (j, &arc) in self.terminal_arc_of_variable.iter().enumerate() {
            net.set_cost(arc, -self.values[j].clone());
        }
        net
    }

    /// Network with terminal costs `p_{k_j} - v_j`.
    pub fn priced_network(&self, p: &PriceVector) -> Result<FlowNetwork, ModelError> {
        if p.num_goods() != self.num_goods() {
            return Err(ModelError::LengthMismatch {
                expected: self.num_goods(),
                actual: p.num_goods(),
            });
        }
        let mut net = self.network.clone();
        for (j, &arc) in self.terminal_arc_of_variable.iter().enumerate() {
            net.set_cost(arc, p.price(self.goods[j]) - &self.values[j]);
        }
        Ok(net)
    }

    /// Intersects every root arc `R_i` with `[q_i, q_i]`; `None` when some
    /// intersection is empty.
    pub fn clamp_roots(&self, net: &FlowNetwork, q: &Bundle) -> Option<FlowNetwork> {
        let mut clamped = net.clone();
        for (k, &arc) in self.root_arc_of_good.iter().enumerate() {
            let qk = q.quantities()[k];
            if !clamped.clamp(arc, qk, qk) {
                return None;
            }
        }
        Some(clamped)
    }

    /// The bundle `(y_{R_1}, ..., y_{R_n})` read off a circulation.
    pub fn bundle_of(&self, f: &Circulation) -> Bundle {
        Bundle::new(self.root_arc_of_good.iter().map(|&a| f.get(a)).collect())
    }

    /// The box `prod_i [lower(R_i), upper(R_i)]` in lexicographic order.
    pub fn root_box(&self) -> Vec<Bundle> {
        let ranges: Vec<(i64, i64)> = self
            .root_arc_of_good
            .iter()
            .map(|&a| (self.network.arc(a).lower, self.network.arc(a).upper))
            .collect();
        lattice_box(&ranges)
    }

    pub fn variable_value(&self, j: usize) -> &Rational {
        &self.values[j - 1]
    }

    pub fn variable_good(&self, j: usize) -> usize {
        self.goods[j - 1]
    }
}

pub(crate) fn lattice_box(ranges: &[(i64, i64)]) -> Vec<Bundle> {
    let mut out = vec![Vec::with_capacity(ranges.len())];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..=hi).map(move |x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(Bundle::new).collect()
}

/// Validates, normalizes and compiles.
pub fn compile(msg: &AssignmentMessage) -> Result<CompiledMessage, EngineError> {
    let report = validate_message(msg);
    if !report.is_valid() {
        return Err(EngineError::Invalid(report));
    }
    build_network(&normalize_trees(msg))
}

fn check_goods(msg: &AssignmentMessage, actual: usize) -> Result<(), EngineError> {
    if msg.num_goods != actual {
        return Err(ModelError::LengthMismatch {
            expected: msg.num_goods,
            actual,
        }
        .into());
    }
    Ok(())
}

/// `v(q)`, or `None` when `q` is not a feasible bundle.
pub fn value(msg: &AssignmentMessage, q: &Bundle) -> Result<Option<Rational>, EngineError> {
    check_goods(msg, q.num_goods())?;
    let compiled = compile(msg)?;
    Ok(compiled_value(&compiled, &compiled.value_network(), q))
}

fn compiled_value(
    compiled: &CompiledMessage,
    value_net: &FlowNetwork,
    q: &Bundle,
) -> Option<Rational> {
    let clamped = compiled.clamp_roots(value_net, q)?;
    flows::solve_min_cost(&clamped).ok().map(|s| -s.objective)
}

/// `u(p) = max_q v(q) - <p, q>`.
pub fn indirect_utility(msg: &AssignmentMessage, p: &PriceVector) -> Result<Rational, EngineError> {
    check_goods(msg, p.num_goods())?;
    let compiled = compile(msg)?;
    let sol = solve_priced(&compiled, p)?;
    Ok(-sol.objective)
}

fn solve_priced(
    compiled: &CompiledMessage,
    p: &PriceVector,
) -> Result<MinCostSolution, EngineError> {
    let net = compiled.priced_network(p)?;
    Ok(flows::solve_min_cost(&net).expect("zero circulation is feasible"))
}

/// The finite set `Q` of bundles for which the value problem is feasible.
pub fn feasible_bundles(msg: &AssignmentMessage) -> Result<BTreeSet<Bundle>, EngineError> {
    let compiled = compile(msg)?;
    Ok(compiled
        .root_box()
        .into_iter()
        .filter(|q| {
            compiled
                .clamp_roots(&compiled.network, q)
                .is_some_and(|net| flows::feasible_circulation(&net).is_ok())
        })
        .collect())
}

/// Indirect utility and the full demand set at `p`.
///
/// A bundle is demanded iff some optimal circulation reads it off the root
/// arcs; the optimal circulations are exactly the feasible circulations of
/// the optimal face, so each box point costs one feasibility check.
pub fn demand_set(msg: &AssignmentMessage, p: &PriceVector) -> Result<DemandResult, EngineError> {
    check_goods(msg, p.num_goods())?;
    let compiled = compile(msg)?;
    compiled_demand(&compiled, p)
}

pub fn compiled_demand(
    compiled: &CompiledMessage,
    p: &PriceVector,
) -> Result<DemandResult, EngineError> {
    let net = compiled.priced_network(p)?;
    let sol = flows::solve_min_cost(&net).expect("zero circulation is feasible");
    let face = sol.optimal_face(&net);
    let demand = compiled
        .root_box()
        .into_iter()
        .filter(|q| {
            compiled
                .clamp_roots(&face, q)
                .is_some_and(|net| flows::feasible_circulation(&net).is_ok())
        })
        .collect();
    Ok(DemandResult {
        indirect_utility: -sol.objective,
        demand,
    })
}

/// An optimal circulation of the priced network whose root readout is `q`,
/// or `None` when `q` is not demanded at `p`.
pub fn optimal_circulation_for(
    compiled: &CompiledMessage,
    p: &PriceVector,
    q: &Bundle,
) -> Result<Option<Circulation>, EngineError> {
    let net = compiled.priced_network(p)?;
    let sol = flows::solve_min_cost(&net).expect("zero circulation is feasible");
    let face = sol.optimal_face(&net);
    Ok(compiled
        .clamp_roots(&face, q)
        .and_then(|clamped| flows::feasible_circulation(&clamped).ok()))
}

/// Materializes the valuation induced by a message over its feasible bundles.
pub fn to_valuation_table(msg: &AssignmentMessage) -> Result<ValuationTable, EngineError> {
    let compiled = compile(msg)?;
    let value_net = compiled.value_network();
    let entries: Vec<(Bundle, Rational)> = compiled
        .root_box()
        .into_iter()
        .filter_map(|q| compiled_value(&compiled, &value_net, &q).map(|v| (q, v)))
        .collect();
    Ok(ValuationTable::new(msg.num_goods, entries)?)
}

/// Brute-force oracles that never touch the flow code. They enumerate the
/// integer box of the singleton bounds and test every listed constraint.
pub mod oracle {
    use super::*;

    /// Every integer `x` satisfying all constraints of `msg`, in
    /// lexicographic order over variable ids.
    pub fn feasible_assignments(msg: &AssignmentMessage) -> Result<Vec<Vec<i64>>, EngineError> {
        let report = validate_message(msg);
        if !report.is_valid() {
            return Err(EngineError::Invalid(report));
        }
        let m = msg.num_variables();
        let mut ranges = vec![(i64::MIN, i64::MAX); m];
        for c in msg.constraints.iter().filter(|c| c.is_singleton()) {
            let j = *c.members.iter().next().unwrap();
            let r = &mut ranges[j - 1];
            *r = (r.0.max(c.lower), r.1.min(c.upper));
        }
        let needed = ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1).max(0) as u128)
            .try_fold(1u128, |acc, k| acc.checked_mul(k))
            .unwrap_or(u128::MAX);
        if needed > ORACLE_LIMIT {
            return Err(EngineError::TooLarge {
                needed,
                limit: ORACLE_LIMIT,
            });
        }
        Ok(lattice_box(&ranges)
            .into_iter()
            .map(|b| b.quantities().to_vec())
            .filter(|x| {
                msg.constraints.iter().all(|c| {
                    let s: i64 = c.members.iter().map(|&j| x[j - 1]).sum();
                    c.lower <= s && s <= c.upper
                })
            })
            .collect())
    }

    fn bundle_of(msg: &AssignmentMessage, x: &[i64]) -> Bundle {
        let mut q = vec![0; msg.num_goods];
        for v in &msg.variables {
            q[v.good - 1] += x[v.id - 1];
        }
        Bundle::new(q)
    }

    fn weight(msg: &AssignmentMessage, x: &[i64], p: Option<&PriceVector>) -> Rational {
        msg.variables.iter().fold(Rational::zero(), |acc, v| {
            let coeff = match p {
                Some(p) => &v.value - p.price(v.good),
                None => v.value.clone(),
            };
            acc + coeff * Rational::from_integer(x[v.id - 1].into())
        })
    }

    /// `max sum_j v_j x_j` over feasible `x` with root sums equal to `q`.
    pub fn value_oracle(
        msg: &AssignmentMessage,
        q: &Bundle,
    ) -> Result<Option<Rational>, EngineError> {
        check_goods(msg, q.num_goods())?;
        Ok(feasible_assignments(msg)?
            .iter()
            .filter(|x| &bundle_of(msg, x) == q)
            .map(|x| weight(msg, x, None))
            .max())
    }

    /// `Q` by projection of every feasible assignment.
    pub fn feasible_bundles_oracle(
        msg: &AssignmentMessage,
    ) -> Result<BTreeSet<Bundle>, EngineError> {
        Ok(feasible_assignments(msg)?
            .iter()
            .map(|x| bundle_of(msg, x))
            .collect())
    }

    /// Indirect utility and the root readouts of every maximizing assignment.
    pub fn demand_oracle(
        msg: &AssignmentMessage,
        p: &PriceVector,
    ) -> Result<DemandResult, EngineError> {
        check_goods(msg, p.num_goods())?;
        let xs = feasible_assignments(msg)?;
        let scored: Vec<(Rational, Bundle)> = xs
            .iter()
            .map(|x| (weight(msg, x, Some(p)), bundle_of(msg, x)))
            .collect();
        let best = scored
            .iter()
            .map(|(w, _)| w.clone())
            .max()
            .expect("x = 0 is always feasible");
        let demand = scored
            .into_iter()
            .filter(|(w, _)| *w == best)
            .map(|(_, q)| q)
            .collect();
        Ok(DemandResult {
            indirect_utility: best,
            demand,
        })
    }
}

pub use oracle::value_oracle;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{example_one, single_good_five};
    use crate::model::{TreeConstraint, Variable};
    use crate::rational::{int, ratio};

    fn b(q: &[i64]) -> Bundle {
        Bundle::new(q.to_vec())
    }

    fn prices(p: &[i64]) -> PriceVector {
        PriceVector::new(p.iter().map(|&x| int(x)).collect())
    }

    fn assert_incidence(compiled: &CompiledMessage) {
        let net = &compiled.network;
        for a in net.arcs() {
            assert!(a.tail < net.num_vertices() && a.head < net.num_vertices());
        }
        // Every vertex row of the incidence matrix is an equality constraint:
        // the zero circulation balances, and each arc contributes +1 once and
        // -1 once.
        let mut plus = vec![0; net.num_arcs()];
        let mut minus = vec![0; net.num_arcs()];
        for (id, a) in net.arcs().iter().enumerate() {
            plus[id] += usize::from(a.head < net.num_vertices());
            minus[id] += usize::from(a.tail < net.num_vertices());
        }
        assert!(plus.iter().chain(&minus).all(|&k| k == 1));
    }

    #[test]
    fn example_one_network_shape() {
        let compiled = build_network(&example_one([1, 1, 1, 1], 1)).unwrap();
        let net = &compiled.network;
        assert_eq!(net.num_vertices(), 5);
        assert_eq!(net.num_arcs(), 8);
        let label = |v: VertexId| net.vertex_label(v).to_string();
        let by_set = |set: &[usize]| {
            let set: BTreeSet<usize> = set.iter().copied().collect();
            let id = compiled.arc_sets.iter().position(|s| *s == set).unwrap();
            let a = net.arc(id);
            (label(a.tail), label(a.head))
        };
        let r0 = "(2) I={1,2,3,4}";
        let t0 = "(2) I={2,3,4}";
        let r1 = "(3) i=1, I={1,2,3}";
        let t1 = "(3) i=1, I={1,2}";
        let roots = "(5) roots";
        let expect = |tail: &str, head: &str| (tail.to_string(), head.to_string());
        assert_eq!(by_set(&[1, 2, 3, 4]), expect(roots, r0));
        assert_eq!(by_set(&[2, 3, 4]), expect(r0, t0));
        assert_eq!(by_set(&[1, 2, 3]), expect(r1, roots));
        assert_eq!(by_set(&[1, 2]), expect(t1, r1));
        assert_eq!(by_set(&[1]), expect(r0, t1));
        assert_eq!(by_set(&[2]), expect(t0, t1));
        assert_eq!(by_set(&[3]), expect(t0, r1));
        assert_eq!(by_set(&[4]), expect(t0, roots));
        assert_incidence(&compiled);
        assert_eq!(
            compiled.root_arc_of_good[1],
            compiled.terminal_arc_of_variable[3]
        );
    }

    #[test]
    fn minimal_message_network() {
        // Rows of the flow problem: (2) for R_0 = {1,2}, (5) for the roots.
        // Columns: y_{R_0}, y_{1} (= y_{R_1}), y_{2} (= y_{R_2}).
        let msg = AssignmentMessage {
            num_goods: 2,
            variables: vec![
                Variable {
                    id: 1,
                    good: 1,
                    value: int(1),
                },
                Variable {
                    id: 2,
                    good: 2,
                    value: int(1),
                },
            ],
            constraints: vec![
                TreeConstraint::new(0, [1, 2], -1, 2),
                TreeConstraint::new(0, [1], 0, 1),
                TreeConstraint::new(0, [2], 0, 1),
                TreeConstraint::new(1, [1], 0, 1),
                TreeConstraint::new(2, [2], 0, 1),
            ],
        };
        let compiled = build_network(&normalize_trees(&msg)).unwrap();
        assert_eq!(compiled.network.num_vertices(), 2);
        assert_eq!(compiled.network.num_arcs(), 3);
        let r0 = compiled.network.arc(compiled.grand_root_arc);
        assert_eq!((r0.tail, r0.head), (compiled.roots_vertex, 0));
        for j in 1..=2 {
            let a = compiled
                .network
                .arc(compiled.terminal_arc_of_variable[j - 1]);
            assert_eq!((a.tail, a.head), (0, compiled.roots_vertex));
        }
        assert_incidence(&compiled);
    }

    #[test]
    fn unnormalized_message_is_rejected() {
        let mut msg = example_one([1, 1, 1, 1], 1);
        msg.constraints.push(TreeConstraint::new(1, [1], 0, 0));
        assert_eq!(build_network(&msg).unwrap_err(), EngineError::NotNormalized);
        assert!(compile(&msg).is_ok());
    }

    #[test]
    fn single_good_values() {
        let msg = single_good_five();
        assert_eq!(value(&msg, &b(&[2, 0])).unwrap(), Some(int(10)));
        assert_eq!(value(&msg, &b(&[4, 0])).unwrap(), None);
        assert_eq!(value(&msg, &b(&[0, 1])).unwrap(), None);
        for q in 0..=3 {
            assert_eq!(
                value(&msg, &b(&[q, 0])).unwrap(),
                value_oracle(&msg, &b(&[q, 0])).unwrap()
            );
        }
    }

    #[test]
    fn zero_bundle_value_with_one_variable_per_good() {
        let msg = example_one([3, 0, 0, 2], 1);
        let mut msg1 = msg.clone();
        // Keep one variable per good by fixing variables 2 and 3 to zero.
        for c in &mut msg1.constraints {
            if c.members == BTreeSet::from([2]) || c.members == BTreeSet::from([3]) {
                c.upper = 0;
            }
        }
        assert_eq!(value(&msg1, &b(&[0, 0])).unwrap(), Some(int(0)));
        assert!(value(&msg, &b(&[0, 0])).unwrap().unwrap() >= int(0));
    }

    #[test]
    fn single_good_indirect_utility_and_demand() {
        let msg = single_good_five();
        assert_eq!(indirect_utility(&msg, &prices(&[4, 0])).unwrap(), int(3));
        assert_eq!(indirect_utility(&msg, &prices(&[6, 0])).unwrap(), int(0));
        let at5 = demand_set(&msg, &prices(&[5, 0])).unwrap();
        assert_eq!(at5.indirect_utility, int(0));
        assert_eq!(
            at5.demand,
            [0, 1, 2, 3].iter().map(|&q| b(&[q, 0])).collect()
        );
        let at4 = demand_set(&msg, &prices(&[4, 0])).unwrap();
        assert_eq!(at4.demand, BTreeSet::from([b(&[3, 0])]));
    }

    #[test]
    fn single_good_feasible_bundles_and_table() {
        let msg = single_good_five();
        let q = feasible_bundles(&msg).unwrap();
        assert_eq!(q, [0, 1, 2, 3].iter().map(|&x| b(&[x, 0])).collect());
        let table = to_valuation_table(&msg).unwrap();
        let entries: Vec<(Bundle, Rational)> =
            table.iter().map(|(b, v)| (b.clone(), v.clone())).collect();
        assert_eq!(
            entries,
            vec![
                (b(&[0, 0]), int(0)),
                (b(&[1, 0]), int(5)),
                (b(&[2, 0]), int(10)),
                (b(&[3, 0]), int(15)),
            ]
        );
    }

    #[test]
    fn signed_variables_reach_negative_bundles() {
        // Oracle: x_1 in {0,1}, x_2 in {-1,0}; x_1 + x_2 ranges over {-1,0,1}.
        let msg = AssignmentMessage {
            num_goods: 2,
            variables: vec![
                Variable {
                    id: 1,
                    good: 1,
                    value: int(2),
                },
                Variable {
                    id: 2,
                    good: 1,
                    value: int(1),
                },
            ],
            constraints: vec![
                TreeConstraint::new(0, [1, 2], -1, 1),
                TreeConstraint::new(0, [1], 0, 1),
                TreeConstraint::new(0, [2], -1, 0),
                TreeConstraint::new(1, [1, 2], -1, 1),
                TreeConstraint::new(1, [1], 0, 1),
                TreeConstraint::new(1, [2], -1, 0),
            ],
        }
        .with_dummy_goods();
        assert!(
            validate_message(&msg).is_valid(),
            "{}",
            validate_message(&msg)
        );
        let q = feasible_bundles(&msg).unwrap();
        assert_eq!(q, [-1, 0, 1].iter().map(|&x| b(&[x, 0])).collect());
        assert_eq!(q, oracle::feasible_bundles_oracle(&msg).unwrap());
        // v(0) = max(0, 2 - 1) = 1.
        assert_eq!(value(&msg, &b(&[0, 0])).unwrap(), Some(int(1)));
    }

    #[test]
    fn example_one_matches_oracles() {
        let msg = example_one([3, 1, 2, 2], 1);
        let p = PriceVector::new(vec![ratio(3, 2), ratio(5, 2)]);
        let flow = demand_set(&msg, &p).unwrap();
        let brute = oracle::demand_oracle(&msg, &p).unwrap();
        assert_eq!(flow, brute);
        let table = to_valuation_table(&msg).unwrap();
        let best = table
            .iter()
            .map(|(q, v)| v - p.cost(q).unwrap())
            .max()
            .unwrap();
        assert_eq!(best, indirect_utility(&msg, &p).unwrap());
    }

    #[test]
    fn example_one_unit_value_at_zero_prices() {
        // With unit singleton bounds and unit values all four variables are
        // used: the optimum is 4.
        let msg = example_one([1, 1, 1, 1], 1);
        assert_eq!(indirect_utility(&msg, &prices(&[0, 0])).unwrap(), int(4));
        let table = to_valuation_table(&msg).unwrap();
        assert_eq!(table.value(&b(&[0, 0])), Some(&int(0)));
    }

    #[test]
    fn oracle_refuses_huge_boxes() {
        let mut msg = example_one([1, 1, 1, 1], 1);
        for c in &mut msg.constraints {
            if c.is_singleton() {
                c.lower = -500;
                c.upper = 500;
            }
        }
        assert!(matches!(
            value_oracle(&msg, &b(&[0, 0])),
            Err(EngineError::TooLarge { .. })
        ));
    }

    #[test]
    fn optimal_circulation_reads_back_demanded_bundle() {
        let msg = single_good_five();
        let compiled = compile(&msg).unwrap();
        let p = prices(&[5, 0]);
        let f = optimal_circulation_for(&compiled, &p, &b(&[2, 0]))
            .unwrap()
            .unwrap();
        assert_eq!(compiled.bundle_of(&f), b(&[2, 0]));
        assert!(
            optimal_circulation_for(&compiled, &prices(&[4, 0]), &b(&[2, 0]))
                .unwrap()
                .is_none()
        );
    }
}
