//! Independent oracles shared by the integration tests. Nothing here calls
//! the flow solver or the engine.
#![allow(dead_code)]

use assignment_messages::cli::parse_message;
use assignment_messages::flows::FlowNetwork;
use assignment_messages::model::{AssignmentMessage, Bundle, ValuationTable};
use assignment_messages::rational::{int, ratio, Rational};
use std::collections::{BTreeMap, BTreeSet};

pub const EXAMPLE_ONE: &str = include_str!("../../examples/data/example_one.json");

pub fn example_one() -> AssignmentMessage {
    parse_message(EXAMPLE_ONE).expect("example data is valid")
}

/// Spanning forest of `net` as (tree arcs in BFS order with the vertex they
/// hang from, non-tree arcs).
struct Forest {
    /// `(arc, child vertex)` in BFS order from each component root.
    tree: Vec<(usize, usize)>,
    cotree: Vec<usize>,
}

fn forest(net: &FlowNetwork) -> Forest {
    let nv = net.num_vertices();
    let mut seen = vec![false; nv];
    let mut used = vec![false; net.num_arcs()];
    let mut tree = Vec::new();
    for root in 0..nv {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (id, a) in net.arcs().iter().enumerate() {
                if used[id] || a.tail == a.head {
                    continue;
                }
                let other = if a.tail == v {
                    a.head
                } else if a.head == v {
                    a.tail
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    used[id] = true;
                    tree.push((id, other));
                    queue.push_back(other);
                }
            }
        }
    }
    let cotree = (0..net.num_arcs()).filter(|&a| !used[a]).collect();
    Forest { tree, cotree }
}

/// Completes the cotree values to the unique balanced flow, peeling tree arcs
/// from the leaves.
fn complete(net: &FlowNetwork, forest: &Forest, flow: &mut [i64]) {
    let mut excess = vec![0i64; net.num_vertices()];
    for &a in &forest.cotree {
        let arc = &net.arcs()[a];
        excess[arc.head] += flow[a];
        excess[arc.tail] -= flow[a];
    }
    for &(a, child) in forest.tree.iter().rev() {
        let arc = &net.arcs()[a];
        let x = if arc.head == child {
            -excess[child]
        } else {
            excess[child]
        };
        flow[a] = x;
        excess[arc.head] += x;
        excess[arc.tail] -= x;
    }
}

/// Every integral circulation within bounds, by enumerating the cotree box.
pub fn all_circulations(net: &FlowNetwork) -> Vec<Vec<i64>> {
    let f = forest(net);
    let arcs = net.arcs();
    let mut out = Vec::new();
    let mut flow = vec![0i64; arcs.len()];
    for &a in &f.cotree {
        flow[a] = arcs[a].lower;
    }
    loop {
        complete(net, &f, &mut flow);
        if f.tree
            .iter()
            .all(|&(a, _)| arcs[a].lower <= flow[a] && flow[a] <= arcs[a].upper)
        {
            out.push(flow.clone());
        }
        let mut k = 0;
        loop {
            if k == f.cotree.len() {
                return out;
            }
            let a = f.cotree[k];
            if flow[a] < arcs[a].upper {
                flow[a] += 1;
                break;
            }
            flow[a] = arcs[a].lower;
            k += 1;
        }
    }
}

/// A random balanced flow: random cotree values completed along the forest.
pub fn balanced_flow(net: &FlowNetwork, cotree_values: impl FnMut() -> i64) -> Vec<i64> {
    let f = forest(net);
    let mut next = cotree_values;
    let mut flow = vec![0i64; net.num_arcs()];
    for &a in &f.cotree {
        flow[a] = next();
    }
    complete(net, &f, &mut flow);
    flow
}

pub fn objective(net: &FlowNetwork, flow: &[i64]) -> Rational {
    net.arcs()
        .iter()
        .zip(flow)
        .map(|(a, &x)| &a.cost * int(x))
        .sum()
}

/// Minimum objective over all circulations, or `None` when there is none.
pub fn brute_min_cost(net: &FlowNetwork) -> Option<Rational> {
    all_circulations(net)
        .iter()
        .map(|f| objective(net, f))
        .min()
}

/// Bellman-Ford over the residual graph of `flow`: true iff some residual
/// cycle has negative total cost.
pub fn residual_has_negative_cycle(net: &FlowNetwork, flow: &[i64]) -> bool {
    let mut edges: Vec<(usize, usize, Rational)> = Vec::new();
    for (a, arc) in net.arcs().iter().enumerate() {
        if flow[a] < arc.upper {
            edges.push((arc.tail, arc.head, arc.cost.clone()));
        }
        if flow[a] > arc.lower {
            edges.push((arc.head, arc.tail, -arc.cost.clone()));
        }
    }
    let n = net.num_vertices();
    let mut dist = vec![int(0); n];
    for _ in 0..n {
        let mut changed = false;
        for (u, v, c) in &edges {
            let cand = &dist[*u] + c;
            if cand < dist[*v] {
                dist[*v] = cand;
                changed = true;
            }
        }
        if !changed {
            return false;
        }
    }
    true
}

/// All feasible assignments of a message, by exhaustive search over the
/// singleton-bound box.
pub fn message_assignments(msg: &AssignmentMessage) -> Vec<Vec<i64>> {
    let m = msg.variables.len();
    let mut lo = vec![i64::MIN; m];
    let mut hi = vec![i64::MAX; m];
    for c in msg.constraints.iter().filter(|c| c.members.len() == 1) {
        let j = *c.members.iter().next().unwrap() - 1;
        lo[j] = lo[j].max(c.lower);
        hi[j] = hi[j].min(c.upper);
    }
    let mut out = Vec::new();
    if (0..m).any(|j| lo[j] > hi[j]) {
        return out;
    }
    let mut x = lo.clone();
    loop {
        if msg.constraints.iter().all(|c| {
            let s: i64 = c.members.iter().map(|&j| x[j - 1]).sum();
            c.lower <= s && s <= c.upper
        }) {
            out.push(x.clone());
        }
        let mut k = 0;
        loop {
            if k == m {
                return out;
            }
            if x[k] < hi[k] {
                x[k] += 1;
                break;
            }
            x[k] = lo[k];
            k += 1;
        }
    }
}

/// Brute-force valuation of a message: the best assignment value for every
/// reachable bundle.
pub struct BruteValuation {
    pub num_goods: usize,
    pub best: BTreeMap<Vec<i64>, Rational>,
}

impl BruteValuation {
    pub fn of(msg: &AssignmentMessage) -> Self {
        let mut best: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for x in message_assignments(msg) {
            let mut q = vec![0i64; msg.num_goods];
            let mut v = int(0);
            for var in &msg.variables {
                q[var.good - 1] += x[var.id - 1];
                v += &var.value * int(x[var.id - 1]);
            }
            best.entry(q)
                .and_modify(|b| {
                    if v > *b {
                        *b = v.clone()
                    }
                })
                .or_insert(v);
        }
        BruteValuation {
            num_goods: msg.num_goods,
            best,
        }
    }

    pub fn value(&self, q: &Bundle) -> Option<&Rational> {
        self.best.get(q.quantities())
    }

    /// `(u(p), D(p))` by scanning every reachable bundle.
    pub fn demand(&self, p: &[Rational]) -> (Rational, BTreeSet<Bundle>) {
        let surplus = |q: &[i64], v: &Rational| -> Rational {
            v - q
                .iter()
                .zip(p)
                .map(|(&k, pi)| pi * int(k))
                .sum::<Rational>()
        };
        let u = self
            .best
            .iter()
            .map(|(q, v)| surplus(q, v))
            .max()
            .expect("zero assignment is feasible");
        let d = self
            .best
            .iter()
            .filter(|(q, v)| surplus(q, v) == u)
            .map(|(q, _)| Bundle::new(q.clone()))
            .collect();
        (u, d)
    }

    pub fn table(&self) -> ValuationTable {
        ValuationTable::new(
            self.num_goods,
            self.best
                .iter()
                .map(|(q, v)| (Bundle::new(q.clone()), v.clone())),
        )
        .expect("brute-force table is well formed")
    }
}

/// Demand family of a 0/1 table at a price, by scanning all subsets.
pub fn hypercube_demand(n: usize, values: &[i64], twice_prices: &[i64]) -> Vec<usize> {
    let surplus = |mask: usize| -> i64 {
        2 * values[mask]
            - (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| twice_prices[i])
                .sum::<i64>()
    };
    let best = (0..1usize << n).map(surplus).max().unwrap();
    (0..1usize << n).filter(|&m| surplus(m) == best).collect()
}

pub fn mask_bundle(n: usize, mask: usize) -> Bundle {
    Bundle::new((0..n).map(|i| (mask >> i & 1) as i64).collect())
}

/// Half-integer price from a doubled integer.
pub fn half(twice: i64) -> Rational {
    ratio(twice, 2)
}
