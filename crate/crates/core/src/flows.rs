//! Integral circulations on directed multigraphs with signed lower/upper
//! bounds and exact rational costs.
//!
//! Flows may be negative wherever an arc's lower bound allows it. The solver
//! works on the signed flow directly: the residual graph has a forward copy of
//! arc `a` while `f_a < upper_a` and a backward copy while `f_a > lower_a`.

use crate::rational::{common_denominator, from_scaled, scaled_i128, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

pub type VertexId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("circulation has {actual} arc values, network has {expected} arcs")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("flow is not balanced at vertex {vertex} (net inflow {excess})")]
    Unbalanced { vertex: VertexId, excess: i64 },
    #[error("flow {flow} on arc {arc} violates bounds [{lower},{upper}]")]
    OutOfBounds {
        arc: ArcId,
        flow: i64,
        lower: i64,
        upper: i64,
    },
    #[error("arc endpoint {0} is not a vertex")]
    UnknownVertex(VertexId),
    #[error("arc bounds [{lower},{upper}] are empty")]
    EmptyBounds { lower: i64, upper: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
    pub lower: i64,
    pub upper: i64,
    pub cost: Rational,
    pub label: String,
}

/// Directed multigraph; arc ids are positions in [`FlowNetwork::arcs`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    vertex_labels: Vec<String>,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> VertexId {
        self.vertex_labels.push(label.into());
        self.vertex_labels.len() - 1
    }

    pub fn add_arc(
        &mut self,
        tail: VertexId,
        head: VertexId,
        lower: i64,
        upper: i64,
        cost: Rational,
    ) -> Result<ArcId, FlowError> {
        self.add_labeled_arc(tail, head, lower, upper, cost, String::new())
    }

    pub fn add_labeled_arc(
        &mut self,
        tail: VertexId,
        head: VertexId,
        lower: i64,
        upper: i64,
        cost: Rational,
        label: impl Into<String>,
    ) -> Result<ArcId, FlowError> {
        for v in [tail, head] {
            if v >= self.vertex_labels.len() {
                return Err(FlowError::UnknownVertex(v));
            }
        }
        if lower > upper {
            return Err(FlowError::EmptyBounds { lower, upper });
        }
        self.arcs.push(Arc {
            tail,
            head,
            lower,
            upper,
            cost,
            label: label.into(),
        });
        Ok(self.arcs.len() - 1)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn vertex_label(&self, v: VertexId) -> &str {
        &self.vertex_labels[v]
    }

    pub fn set_cost(&mut self, id: ArcId, cost: Rational) {
        self.arcs[id].cost = cost;
    }

    /// Intersects the bounds of `id` with `[lower, upper]`. Returns `false`
    /// (leaving the arc untouched) when the intersection is empty.
    pub fn clamp(&mut self, id: ArcId, lower: i64, upper: i64) -> bool {
        let arc = &mut self.arcs[id];
        let (lo, hi) = (arc.lower.max(lower), arc.upper.min(upper));
        if lo > hi {
            return false;
        }
        arc.lower = lo;
        arc.upper = hi;
        true
    }

    /// `sum_a cost_a * f_a`.
    pub fn objective(&self, f: &Circulation) -> Rational {
        self.arcs
            .iter()
            .zip(&f.flow)
            .filter(|(_, &x)| x != 0)
            .fold(Rational::zero(), |acc, (a, &x)| {
                acc + &a.cost * Rational::from_integer(BigInt::from(x))
            })
    }

    /// Net inflow (in minus out) of `f` at every vertex.
    pub fn excess(&self, f: &Circulation) -> Result<Vec<i64>, FlowError> {
        self.check_len(f)?;
        let mut excess = vec![0i64; self.num_vertices()];
        for (a, &x) in self.arcs.iter().zip(&f.flow) {
            excess[a.head] += x;
            excess[a.tail] -= x;
        }
        Ok(excess)
    }

    /// Balanced and within every arc's bounds.
    pub fn is_feasible(&self, f: &Circulation) -> Result<bool, FlowError> {
        Ok(check_balanced(self, f)? && self.first_bound_violation(f).is_none())
    }

    fn first_bound_violation(&self, f: &Circulation) -> Option<FlowError> {
        self.arcs
            .iter()
            .zip(&f.flow)
            .enumerate()
            .find(|(_, (a, &x))| x < a.lower || x > a.upper)
            .map(|(arc, (a, &flow))| FlowError::OutOfBounds {
                arc,
                flow,
                lower: a.lower,
                upper: a.upper,
            })
    }

    fn check_len(&self, f: &Circulation) -> Result<(), FlowError> {
        if f.flow.len() == self.arcs.len() {
            Ok(())
        } else {
            Err(FlowError::LengthMismatch {
                expected: self.arcs.len(),
                actual: f.flow.len(),
            })
        }
    }
}

/// Integral flow value per arc id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circulation {
    pub flow: Vec<i64>,
}

impl Circulation {
    pub fn zero(num_arcs: usize) -> Self {
        Circulation {
            flow: vec![0; num_arcs],
        }
    }

    pub fn get(&self, arc: ArcId) -> i64 {
        self.flow[arc]
    }

    pub fn add(&self, other: &Circulation) -> Circulation {
        Circulation {
            flow: self
                .flow
                .iter()
                .zip(&other.flow)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Circulation) -> Circulation {
        Circulation {
            flow: self
                .flow
                .iter()
                .zip(&other.flow)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.flow.iter().all(|&x| x == 0)
    }
}

/// A unit flow around an undirected cycle: `+1` on arcs traversed
/// tail-to-head, `-1` on arcs traversed head-to-tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleFlow {
    pub arcs: Vec<(ArcId, i8)>,
}

impl CycleFlow {
    pub fn on(&self, arc: ArcId) -> i64 {
        self.arcs
            .iter()
            .find(|(a, _)| *a == arc)
            .map_or(0, |&(_, o)| o as i64)
    }

    pub fn to_circulation(&self, num_arcs: usize) -> Circulation {
        let mut c = Circulation::zero(num_arcs);
        for &(a, o) in &self.arcs {
            c.flow[a] += o as i64;
        }
        c
    }

    pub fn cost(&self, net: &FlowNetwork) -> Rational {
        self.arcs.iter().fold(Rational::zero(), |acc, &(a, o)| {
            if o > 0 {
                acc + &net.arc(a).cost
            } else {
                acc - &net.arc(a).cost
            }
        })
    }

    /// Consecutive arcs share a vertex, the walk closes, no arc repeats.
    pub fn is_well_formed(&self, net: &FlowNetwork) -> bool {
        if self.arcs.is_empty() {
            return false;
        }
        let ids: BTreeSet<ArcId> = self.arcs.iter().map(|&(a, _)| a).collect();
        if ids.len() != self.arcs.len() || ids.iter().any(|&a| a >= net.num_arcs()) {
            return false;
        }
        let ends = |(a, o): (ArcId, i8)| {
            let arc = net.arc(a);
            if o > 0 {
                (arc.tail, arc.head)
            } else {
                (arc.head, arc.tail)
            }
        };
        let start = ends(self.arcs[0]).0;
        let mut at = start;
        for &step in &self.arcs {
            let (from, to) = ends(step);
            if from != at {
                return false;
            }
            at = to;
        }
        at == start
    }
}

impl fmt::Display for CycleFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (a, o)) in self.arcs.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{a}", if *o > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Infeasibility certificate: a vertex set `X` whose incoming arcs must carry
/// more (by their lower bounds) than its outgoing arcs can carry (by their
/// upper bounds).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no feasible circulation: {lower_in} units are forced into {vertices:?} but at most {upper_out} can leave")]
pub struct HoffmanCut {
    pub vertices: BTreeSet<VertexId>,
    pub lower_in: i64,
    pub upper_out: i64,
}

impl HoffmanCut {
    fn measure(net: &FlowNetwork, vertices: BTreeSet<VertexId>) -> HoffmanCut {
        let (mut lower_in, mut upper_out) = (0, 0);
        for a in net.arcs() {
            match (vertices.contains(&a.tail), vertices.contains(&a.head)) {
                (false, true) => lower_in += a.lower,
                (true, false) => upper_out += a.upper,
                _ => {}
            }
        }
        HoffmanCut {
            vertices,
            lower_in,
            upper_out,
        }
    }

    /// Re-derives the two sums on `net` and confirms the set is violated.
    pub fn certifies(&self, net: &FlowNetwork) -> bool {
        let again = HoffmanCut::measure(net, self.vertices.clone());
        again == *self && self.lower_in > self.upper_out
    }
}

pub fn check_balanced(net: &FlowNetwork, f: &Circulation) -> Result<bool, FlowError> {
    Ok(net.excess(f)?.iter().all(|&e| e == 0))
}

/// Splits a balanced flow into unit cycles conformal to it.
///
/// Cycles are traced from the lowest-id arc still carrying flow, leaving each
/// vertex by its lowest-id arc that can continue in the flow's direction.
pub fn decompose_conformal(
    net: &FlowNetwork,
    f: &Circulation,
) -> Result<Vec<CycleFlow>, FlowError> {
    let excess = net.excess(f)?;
    if let Some((vertex, &e)) = excess.iter().enumerate().find(|(_, &e)| e != 0) {
        return Err(FlowError::Unbalanced { vertex, excess: e });
    }
    let arcs = net.arcs();
    let mut remaining = f.flow.clone();
    let mut cycles = Vec::new();
    let mut position = vec![usize::MAX; net.num_vertices()];
    while let Some(start) = remaining.iter().position(|&x| x != 0) {
        let mut path_vertices: Vec<VertexId> = Vec::new();
        let mut path_arcs: Vec<(ArcId, i8)> = Vec::new();
        let leave = |a: ArcId, x: i64| {
            if x > 0 {
                (arcs[a].tail, arcs[a].head, 1i8)
            } else {
                (arcs[a].head, arcs[a].tail, -1i8)
            }
        };
        let (from, mut current, o) = leave(start, remaining[start]);
        position[from] = 0;
        path_vertices.push(from);
        path_arcs.push((start, o));
        while position[current] == usize::MAX {
            position[current] = path_vertices.len();
            path_vertices.push(current);
            let next = (0..arcs.len())
                .find(|&b| {
                    (remaining[b] > 0 && arcs[b].tail == current)
                        || (remaining[b] < 0 && arcs[b].head == current)
                })
                .expect("balanced flow always continues");
            let (_, to, o) = leave(next, remaining[next]);
            path_arcs.push((next, o));
            current = to;
        }
        let cycle = path_arcs.split_off(position[current]);
        for &(a, o) in &cycle {
            remaining[a] -= o as i64;
        }
        for v in path_vertices {
            position[v] = usize::MAX;
        }
        cycles.push(CycleFlow { arcs: cycle });
    }
    Ok(cycles)
}

/// Any circulation within bounds, or a violated Hoffman cut.
pub fn feasible_circulation(net: &FlowNetwork) -> Result<Circulation, HoffmanCut> {
    let nv = net.num_vertices();
    let (source, sink) = (nv, nv + 1);
    let mut graph = MaxFlowGraph::new(nv + 2);
    let mut balance = vec![0i64; nv];
    let mut handles = Vec::with_capacity(net.num_arcs());
    for a in net.arcs() {
        balance[a.head] += a.lower;
        balance[a.tail] -= a.lower;
        handles.push(if a.tail == a.head {
            None
        } else {
            Some(graph.add_edge(a.tail, a.head, a.upper - a.lower))
        });
    }
    let mut required = 0;
    for (v, &b) in balance.iter().enumerate() {
        if b > 0 {
            graph.add_edge(source, v, b);
            required += b;
        } else if b < 0 {
            graph.add_edge(v, sink, -b);
        }
    }
    let pushed = graph.max_flow(source, sink);
    if pushed < required {
        let reach = graph.reachable_from(source);
        let cut: BTreeSet<VertexId> = (0..nv).filter(|&v| reach[v]).collect();
        let witness = HoffmanCut::measure(net, cut);
        debug_assert!(witness.lower_in > witness.upper_out);
        return Err(witness);
    }
    let flow = net
        .arcs()
        .iter()
        .zip(handles)
        .map(|(a, h)| a.lower + h.map_or(0, |e| graph.flow_on(e)))
        .collect();
    Ok(Circulation { flow })
}

/// An optimal circulation together with node potentials certifying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCostSolution {
    pub flow: Circulation,
    pub objective: Rational,
    /// `cost_a + pi(tail) - pi(head) >= 0` wherever `f_a < upper_a`, and
    /// `<= 0` wherever `f_a > lower_a`.
    pub potentials: Vec<Rational>,
}

impl MinCostSolution {
    /// Network whose feasible circulations are exactly the optimal
    /// circulations of `net`: arcs with positive reduced cost are pinned to
    /// their lower bound, arcs with negative reduced cost to their upper bound.
    pub fn optimal_face(&self, net: &FlowNetwork) -> FlowNetwork {
        let mut face = net.clone();
        for (id, a) in net.arcs().iter().enumerate() {
            let reduced = &a.cost + &self.potentials[a.tail] - &self.potentials[a.head];
            if reduced.is_positive() {
                face.arcs[id].upper = a.lower;
            } else if reduced.is_negative() {
                face.arcs[id].lower = a.upper;
            }
        }
        face
    }
}

/// Minimum-cost circulation by negative-cycle canceling from a feasible start.
pub fn solve_min_cost(net: &FlowNetwork) -> Result<MinCostSolution, HoffmanCut> {
    let mut flow = feasible_circulation(net)?;
    let scale = common_denominator(net.arcs().iter().map(|a| &a.cost));
    let limit = 1i128 << 96;
    let scaled: Option<Vec<i128>> = net
        .arcs()
        .iter()
        .map(|a| scaled_i128(&a.cost, &scale).filter(|c| c.abs() < limit))
        .collect();
    let potentials = match scaled {
        Some(costs) => cancel_all(net, &costs, &mut flow)
            .into_iter()
            .map(|d| from_scaled(d, &scale))
            .collect(),
        None => {
            let costs: Vec<Rational> = net.arcs().iter().map(|a| a.cost.clone()).collect();
            cancel_all(net, &costs, &mut flow)
        }
    };
    let objective = net.objective(&flow);
    Ok(MinCostSolution {
        flow,
        objective,
        potentials,
    })
}

pub fn min_cost_circulation(net: &FlowNetwork) -> Result<Circulation, HoffmanCut> {
    solve_min_cost(net).map(|s| s.flow)
}

/// A unit cycle `c` with `f + c` feasible and negative cost, if one exists.
pub fn improving_cycle(net: &FlowNetwork, f: &Circulation) -> Result<Option<CycleFlow>, FlowError> {
    net.check_len(f)?;
    let costs: Vec<Rational> = net.arcs().iter().map(|a| a.cost.clone()).collect();
    match find_negative_cycle(net, &costs, &f.flow) {
        Ok(_) => Ok(None),
        Err(cycle) => Ok(Some(CycleFlow { arcs: cycle })),
    }
}

trait CostValue:
    Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
}
impl<T> CostValue for T where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T> + Neg<Output = T>
{
}

/// Cancels negative cycles until none is left; returns the final potentials.
fn cancel_all<C: CostValue>(net: &FlowNetwork, costs: &[C], flow: &mut Circulation) -> Vec<C> {
    loop {
        match find_negative_cycle(net, costs, &flow.flow) {
            Ok(potentials) => return potentials,
            Err(cycle) => {
                let arcs = net.arcs();
                let delta = cycle
                    .iter()
                    .map(|&(a, o)| {
                        let x = flow.flow[a];
                        if o > 0 {
                            arcs[a].upper - x
                        } else {
                            x - arcs[a].lower
                        }
                    })
                    .min()
                    .expect("cycles are nonempty");
                debug_assert!(delta > 0);
                for (a, o) in cycle {
                    flow.flow[a] += o as i64 * delta;
                }
            }
        }
    }
}

/// Bellman-Ford on the residual graph from a virtual source joined to every
/// vertex. `Ok` carries shortest-path potentials; `Err` a negative cycle.
fn find_negative_cycle<C: CostValue>(
    net: &FlowNetwork,
    costs: &[C],
    flow: &[i64],
) -> Result<Vec<C>, Vec<(ArcId, i8)>> {
    let nv = net.num_vertices();
    let arcs = net.arcs();
    let mut dist = vec![C::zero(); nv];
    let mut pred: Vec<Option<(ArcId, i8)>> = vec![None; nv];
    let from_of = |(a, o): (ArcId, i8)| if o > 0 { arcs[a].tail } else { arcs[a].head };
    for _ in 0..=nv {
        let mut relaxed = false;
        for (a, arc) in arcs.iter().enumerate() {
            if flow[a] < arc.upper {
                let cand = dist[arc.tail].clone() + costs[a].clone();
                if cand < dist[arc.head] {
                    dist[arc.head] = cand;
                    pred[arc.head] = Some((a, 1));
                    relaxed = true;
                }
            }
            if flow[a] > arc.lower {
                let cand = dist[arc.head].clone() - costs[a].clone();
                if cand < dist[arc.tail] {
                    dist[arc.tail] = cand;
                    pred[arc.tail] = Some((a, -1));
                    relaxed = true;
                }
            }
        }
        if !relaxed {
            return Ok(dist);
        }
        if let Some(cycle) = predecessor_cycle(&pred, from_of) {
            return Err(cycle);
        }
    }
    unreachable!("relaxations past |V| passes leave a predecessor cycle")
}

/// A cycle of the predecessor graph, in traversal order. Every such cycle
/// has negative cost under strict relaxation.
fn predecessor_cycle(
    pred: &[Option<(ArcId, i8)>],
    from_of: impl Fn((ArcId, i8)) -> VertexId,
) -> Option<Vec<(ArcId, i8)>> {
    let n = pred.len();
    // 0 = unseen, 1 = on current walk, 2 = finished
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            match pred[v] {
                Some(step) => v = from_of(step),
                None => break,
            }
        }
        if state[v] == 1 && pred[v].is_some() && walk.contains(&v) {
            let mut cycle = Vec::new();
            let mut u = v;
            loop {
                let step = pred[u].expect("on cycle");
                cycle.push(step);
                u = from_of(step);
                if u == v {
                    break;
                }
            }
            cycle.reverse();
            return Some(cycle);
        }
        for w in walk {
            state[w] = 2;
        }
    }
    None
}

/// Dinic max-flow on integer capacities.
struct MaxFlowGraph {
    head: Vec<usize>,
    cap: Vec<i64>,
    original: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlowGraph {
    fn new(n: usize) -> Self {
        MaxFlowGraph {
            head: Vec::new(),
            cap: Vec::new(),
            original: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.head.len();
        self.head.push(to);
        self.cap.push(cap);
        self.original.push(cap);
        self.adj[from].push(id);
        self.head.push(from);
        self.cap.push(0);
        self.original.push(0);
        self.adj[to].push(id + 1);
        id
    }

    fn flow_on(&self, edge: usize) -> i64 {
        self.original[edge] - self.cap[edge]
    }

    fn levels(&self, s: usize) -> Vec<i32> {
        let mut level = vec![-1; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if self.cap[e] > 0 && level[w] < 0 {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l >= 0).collect()
    }

    fn augment(
        &mut self,
        v: usize,
        t: usize,
        limit: i64,
        level: &[i32],
        next: &mut [usize],
    ) -> i64 {
        if v == t {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let e = self.adj[v][next[v]];
            let w = self.head[e];
            if self.cap[e] > 0 && level[w] == level[v] + 1 {
                let pushed = self.augment(w, t, limit.min(self.cap[e]), level, next);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[v] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] < 0 {
                return total;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let pushed = self.augment(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn network(nv: usize, arcs: &[(usize, usize, i64, i64, i64)]) -> FlowNetwork {
        let mut net = FlowNetwork::new();
        for v in 0..nv {
            net.add_vertex(format!("v{v}"));
        }
        for &(t, h, lo, hi, c) in arcs {
            net.add_arc(t, h, lo, hi, int(c)).unwrap();
        }
        net
    }

    fn triangle() -> FlowNetwork {
        network(3, &[(0, 1, -5, 5, 0), (1, 2, -5, 5, 0), (2, 0, -5, 5, 0)])
    }

    #[test]
    fn balance_examples() {
        let net = triangle();
        assert!(check_balanced(&net, &Circulation::zero(3)).unwrap());
        assert!(check_balanced(
            &net,
            &Circulation {
                flow: vec![1, 1, 1]
            }
        )
        .unwrap());
        assert!(!check_balanced(
            &net,
            &Circulation {
                flow: vec![1, 0, 0]
            }
        )
        .unwrap());
        assert!(check_balanced(&net, &Circulation { flow: vec![1, 0] }).is_err());
    }

    #[test]
    fn unit_cycle_decomposes_to_itself() {
        let net = triangle();
        let cycles = decompose_conformal(
            &net,
            &Circulation {
                flow: vec![1, 1, 1],
            },
        )
        .unwrap();
        assert_eq!(
            cycles,
            vec![CycleFlow {
                arcs: vec![(0, 1), (1, 1), (2, 1)]
            }]
        );
    }

    #[test]
    fn doubled_cycle_gives_two_copies() {
        let net = triangle();
        let cycles = decompose_conformal(
            &net,
            &Circulation {
                flow: vec![2, 2, 2],
            },
        )
        .unwrap();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0], cycles[1]);
    }

    #[test]
    fn negative_flow_cycles_run_backwards() {
        let net = triangle();
        let cycles = decompose_conformal(
            &net,
            &Circulation {
                flow: vec![-1, -1, -1],
            },
        )
        .unwrap();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].arcs.iter().all(|&(_, o)| o == -1));
        assert!(cycles[0].is_well_formed(&net));
    }

    #[test]
    fn triangles_sharing_an_arc() {
        // a=0, b=1, c=2, d=3: a->b shared; b->c->a and b->d->a close the loops.
        let net = network(
            4,
            &[
                (0, 1, 0, 2, 0),
                (1, 2, 0, 1, 0),
                (2, 0, 0, 1, 0),
                (1, 3, 0, 1, 0),
                (3, 0, 0, 1, 0),
            ],
        );
        let f = Circulation {
            flow: vec![2, 1, 1, 1, 1],
        };
        let cycles = decompose_conformal(&net, &f).unwrap();
        assert_eq!(
            cycles,
            vec![
                CycleFlow {
                    arcs: vec![(0, 1), (1, 1), (2, 1)]
                },
                CycleFlow {
                    arcs: vec![(0, 1), (3, 1), (4, 1)]
                },
            ]
        );
        let sum = cycles
            .iter()
            .fold(Circulation::zero(5), |acc, c| acc.add(&c.to_circulation(5)));
        assert_eq!(sum, f);
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let err = decompose_conformal(
            &triangle(),
            &Circulation {
                flow: vec![1, 0, 0],
            },
        )
        .unwrap_err();
        assert!(matches!(err, FlowError::Unbalanced { .. }));
    }

    #[test]
    fn zero_circulation_is_feasible_when_bounds_straddle_zero() {
        let f = feasible_circulation(&triangle()).unwrap();
        assert!(triangle().is_feasible(&f).unwrap());
    }

    #[test]
    fn forced_two_cycle() {
        let net = network(2, &[(0, 1, 1, 1, 0), (1, 0, 0, 2, 0)]);
        assert_eq!(feasible_circulation(&net).unwrap().flow, vec![1, 1]);
    }

    #[test]
    fn lonely_forced_arc_is_infeasible() {
        let net = network(2, &[(0, 1, 1, 1, 0)]);
        let cut = feasible_circulation(&net).unwrap_err();
        assert!(cut.certifies(&net));
        assert_eq!(cut.vertices, BTreeSet::from([1]));
    }

    #[test]
    fn positive_costs_give_zero_flow() {
        let net = network(3, &[(0, 1, -2, 2, 1), (1, 2, -2, 2, 2), (2, 0, -2, 2, 3)]);
        let sol = solve_min_cost(&net).unwrap();
        // A backward traversal of the triangle has cost -6 and is allowed by
        // the signed bounds, so the optimum pushes two units backwards.
        assert_eq!(sol.objective, int(-12));
        let net = network(3, &[(0, 1, 0, 2, 1), (1, 2, 0, 2, 2), (2, 0, 0, 2, 3)]);
        let sol = solve_min_cost(&net).unwrap();
        assert_eq!(sol.flow, Circulation::zero(3));
        assert_eq!(sol.objective, int(0));
    }

    #[test]
    fn two_cycle_with_a_profitable_arc() {
        // Oracle: the only circulations are (t,t), t in 0..=2, with cost -t.
        let net = network(2, &[(0, 1, 0, 2, -1), (1, 0, 0, 2, 0)]);
        let sol = solve_min_cost(&net).unwrap();
        assert_eq!(sol.flow.flow, vec![2, 2]);
        assert_eq!(sol.objective, int(-2));
        assert_eq!(improving_cycle(&net, &sol.flow).unwrap(), None);
    }

    #[test]
    fn improving_cycle_from_zero() {
        let net = network(2, &[(0, 1, 0, 2, -1), (1, 0, 0, 2, 0)]);
        let c = improving_cycle(&net, &Circulation::zero(2))
            .unwrap()
            .unwrap();
        assert_eq!(c.cost(&net), int(-1));
        assert!(c.is_well_formed(&net));
        let next = Circulation::zero(2).add(&c.to_circulation(2));
        assert!(net.is_feasible(&next).unwrap());
    }

    #[test]
    fn no_improving_cycle_without_costs() {
        let net = triangle();
        assert_eq!(improving_cycle(&net, &Circulation::zero(3)).unwrap(), None);
    }

    #[test]
    fn infeasible_min_cost_reports_cut() {
        let net = network(2, &[(0, 1, 1, 2, 0), (1, 0, -3, 0, 0)]);
        assert!(min_cost_circulation(&net).unwrap_err().certifies(&net));
    }

    #[test]
    fn optimal_face_pins_strict_arcs() {
        let net = network(2, &[(0, 1, 0, 2, -1), (1, 0, 0, 2, 0), (0, 1, 0, 3, 1)]);
        let sol = solve_min_cost(&net).unwrap();
        let face = sol.optimal_face(&net);
        let f = feasible_circulation(&face).unwrap();
        assert_eq!(net.objective(&f), sol.objective);
    }

    #[test]
    fn self_loops_are_their_own_cycles() {
        let net = network(1, &[(0, 0, -2, 2, -1)]);
        let sol = solve_min_cost(&net).unwrap();
        assert_eq!(sol.flow.flow, vec![2]);
        let cycles = decompose_conformal(&net, &sol.flow).unwrap();
        assert_eq!(cycles, vec![CycleFlow { arcs: vec![(0, 1)] }; 2]);
    }

    #[test]
    fn rational_costs_stay_exact() {
        let mut net = network(2, &[(0, 1, 0, 3, 0), (1, 0, 0, 3, 0)]);
        net.set_cost(0, crate::rational::ratio(-1, 3));
        net.set_cost(1, crate::rational::ratio(1, 7));
        let sol = solve_min_cost(&net).unwrap();
        assert_eq!(sol.objective, crate::rational::ratio(-3 * 4, 21));
    }
}
