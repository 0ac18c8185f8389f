//! Bundles, prices, valuation tables and assignment messages.
//!
//! Goods are numbered `1..=n` and variables `1..=m` throughout the public
//! API. Tree index `0` is the tree over all variables; tree `i >= 1` only
//! constrains variables of good `i`. A [`Bundle`] stores the quantity of good
//! `k` at position `k - 1`.

use crate::rational::{Exact, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("length mismatch: expected {expected} goods, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("valuation table must contain the zero bundle")]
    MissingZeroBundle,
    #[error("bundle {0} listed twice in valuation table")]
    DuplicateBundle(Bundle),
    #[error("a market needs at least two goods, got {0}")]
    TooFewGoods(usize),
}

/// Integer quantities per good; negative entries mean selling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(Vec<i64>);

impl Bundle {
    pub fn new(quantities: Vec<i64>) -> Self {
        Bundle(quantities)
    }

    pub fn zero(num_goods: usize) -> Self {
        Bundle(vec![0; num_goods])
    }

    /// The unit vector `e_good`.
    pub fn unit(num_goods: usize, good: usize) -> Self {
        let mut q = vec![0; num_goods];
        q[good - 1] = 1;
        Bundle(q)
    }

    pub fn num_goods(&self) -> usize {
        self.0.len()
    }

    pub fn quantity(&self, good: usize) -> i64 {
        self.0[good - 1]
    }

    pub fn quantities(&self) -> &[i64] {
        &self.0
    }

    /// Total number of units, `sum_i q_i`.
    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&q| q >= 0)
    }

    /// `self - e_take + e_give`.
    pub fn swapped(&self, take: usize, give: usize) -> Bundle {
        let mut q = self.0.clone();
        q[take - 1] -= 1;
        q[give - 1] += 1;
        Bundle(q)
    }

    pub fn checked_sub(&self, other: &Bundle) -> Result<Vec<i64>, ModelError> {
        check_len(self.num_goods(), other.num_goods())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<i64>> for Bundle {
    fn from(q: Vec<i64>) -> Self {
        Bundle(q)
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, q) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// Per-unit prices, one exact rational per good.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriceVector(Vec<Rational>);

impl PriceVector {
    pub fn new(prices: Vec<Rational>) -> Self {
        PriceVector(prices)
    }

    pub fn num_goods(&self) -> usize {
        self.0.len()
    }

    pub fn price(&self, good: usize) -> &Rational {
        &self.0[good - 1]
    }

    pub fn prices(&self) -> &[Rational] {
        &self.0
    }

    /// `<p, q>`.
    pub fn cost(&self, bundle: &Bundle) -> Result<Rational, ModelError> {
        check_len(self.num_goods(), bundle.num_goods())?;
        Ok(self
            .0
            .iter()
            .zip(bundle.quantities())
            .filter(|(_, &q)| q != 0)
            .fold(Rational::zero(), |acc, (p, &q)| {
                acc + p * Rational::from_integer(q.into())
            }))
    }
}

impl fmt::Display for PriceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", Exact(p))?;
        }
        write!(f, ")")
    }
}

/// Explicit valuation `v: Q -> R` on a finite domain containing zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationTable {
    num_goods: usize,
    values: BTreeMap<Bundle, Rational>,
}

impl ValuationTable {
    pub fn new(
        num_goods: usize,
        entries: impl IntoIterator<Item = (Bundle, Rational)>,
    ) -> Result<Self, ModelError> {
        let mut values = BTreeMap::new();
        for (bundle, value) in entries {
            check_len(num_goods, bundle.num_goods())?;
            if values.contains_key(&bundle) {
                return Err(ModelError::DuplicateBundle(bundle));
            }
            values.insert(bundle, value);
        }
        if !values.contains_key(&Bundle::zero(num_goods)) {
            return Err(ModelError::MissingZeroBundle);
        }
        Ok(ValuationTable { num_goods, values })
    }

    /// Table on the full hypercube `{0,1}^n`; `values[mask]` is the value of
    /// the bundle whose good `k` is present iff bit `k - 1` of `mask` is set.
    pub fn from_hypercube(num_goods: usize, values: &[Rational]) -> Result<Self, ModelError> {
        check_len(1 << num_goods, values.len())?;
        let entries = values.iter().enumerate().map(|(mask, v)| {
            let q = (0..num_goods).map(|k| ((mask >> k) & 1) as i64).collect();
            (Bundle(q), v.clone())
        });
        ValuationTable::new(num_goods, entries)
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    pub fn value(&self, bundle: &Bundle) -> Option<&Rational> {
        self.values.get(bundle)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Bundle> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bundle, &Rational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_nonnegative_domain(&self) -> bool {
        self.values.keys().all(Bundle::is_nonnegative)
    }

    /// True iff the domain is exactly `{0,1}^n`.
    pub fn is_hypercube(&self) -> bool {
        self.values.len() == 1 << self.num_goods
            && self
                .values
                .keys()
                .all(|b| b.quantities().iter().all(|&q| q == 0 || q == 1))
    }

    /// Restriction of the table to bundles with no negative entry.
    pub fn restrict_nonnegative(&self) -> ValuationTable {
        ValuationTable {
            num_goods: self.num_goods,
            values: self
                .values
                .iter()
                .filter(|(b, _)| b.is_nonnegative())
                .map(|(b, v)| (b.clone(), v.clone()))
                .collect(),
        }
    }
}

/// `supp_+(q - r) = { i : q_i - r_i > 0 }`, as 1-based goods.
pub fn support_plus(q: &Bundle, r: &Bundle) -> Result<BTreeSet<usize>, ModelError> {
    Ok(q.checked_sub(r)?
        .into_iter()
        .enumerate()
        .filter(|(_, d)| *d > 0)
        .map(|(k, _)| k + 1)
        .collect())
}

fn check_len(expected: usize, actual: usize) -> Result<(), ModelError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ModelError::LengthMismatch { expected, actual })
    }
}

/// A variable `x_j` tied to one good and carrying a value `v_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: usize,
    pub good: usize,
    pub value: Rational,
}

/// `lower <= sum_{j in members} x_j <= upper`, filed under one tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeConstraint {
    pub tree: usize,
    pub members: BTreeSet<usize>,
    pub lower: i64,
    pub upper: i64,
}

impl TreeConstraint {
    pub fn new(
        tree: usize,
        members: impl IntoIterator<Item = usize>,
        lower: i64,
        upper: i64,
    ) -> Self {
        TreeConstraint {
            tree,
            members: members.into_iter().collect(),
            lower,
            upper,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMessage {
    pub num_goods: usize,
    pub variables: Vec<Variable>,
    pub constraints: Vec<TreeConstraint>,
}

/// One violated structural condition.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("market has {0} goods; at least 2 are required")]
    TooFewGoods(usize),
    #[error("message has no variables")]
    NoVariables,
    #[error("variable ids must be exactly 1..={expected_max}; found id {id}")]
    BadVariableId { id: usize, expected_max: usize },
    #[error("variable id {0} is used more than once")]
    DuplicateVariableId(usize),
    #[error("variable {variable} refers to good {good}, outside 1..={num_goods}")]
    UnknownGood {
        variable: usize,
        good: usize,
        num_goods: usize,
    },
    #[error("good {0} has no variable")]
    GoodWithoutVariable(usize),
    #[error("constraint #{index} names tree {tree}, outside 0..={num_goods}")]
    UnknownTree {
        index: usize,
        tree: usize,
        num_goods: usize,
    },
    #[error("constraint #{index} has an empty member set")]
    EmptyConstraint { index: usize },
    #[error("constraint #{index} refers to unknown variable {variable}")]
    UnknownVariable { index: usize, variable: usize },
    #[error("constraint #{index} has bounds [{lower},{upper}]; need lower <= 0 <= upper")]
    BoundSign {
        index: usize,
        lower: i64,
        upper: i64,
    },
    #[error("constraint #{index} in tree {tree} contains variable {variable} of good {good}")]
    ForeignMember {
        index: usize,
        tree: usize,
        variable: usize,
        good: usize,
    },
    #[error("tree {tree} is not laminar: constraints #{first} and #{second} cross")]
    NotLaminar {
        tree: usize,
        first: usize,
        second: usize,
    },
    #[error("tree {tree} is missing its root set")]
    MissingRoot { tree: usize },
    #[error("tree {tree} is missing the singleton {{{variable}}}")]
    MissingSingleton { tree: usize, variable: usize },
}

/// All violations found by [`validate_message`]; empty iff the message is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid assignment message");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl AssignmentMessage {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable(&self, id: usize) -> Option<&Variable> {
        self.variables.iter().find(|v| v.id == id)
    }

    /// `R_i`: ids of the variables of good `i`; `R_0` is every id.
    pub fn good_variables(&self, good: usize) -> BTreeSet<usize> {
        self.variables
            .iter()
            .filter(|v| good == 0 || v.good == good)
            .map(|v| v.id)
            .collect()
    }

    /// Adds a zero-valued variable fixed to `[0,0]` for every good that has
    /// none, extending `R_0` accordingly. The set of feasible bundles and
    /// their values are unchanged.
    pub fn with_dummy_goods(mut self) -> Self {
        let all_before: BTreeSet<usize> = self.good_variables(0);
        let missing: Vec<usize> = (1..=self.num_goods)
            .filter(|&g| !self.variables.iter().any(|v| v.good == g))
            .collect();
        if missing.is_empty() {
            return self;
        }
        let mut next_id = self.variables.iter().map(|v| v.id).max().unwrap_or(0);
        let mut added = Vec::new();
        for good in missing {
            next_id += 1;
            self.variables.push(Variable {
                id: next_id,
                good,
                value: Rational::zero(),
            });
            self.constraints
                .push(TreeConstraint::new(0, [next_id], 0, 0));
            self.constraints
                .push(TreeConstraint::new(good, [next_id], 0, 0));
            added.push(next_id);
        }
        let mut extra = Vec::new();
        for c in &mut self.constraints {
            if c.tree == 0 && c.members == all_before {
                if c.members.len() == 1 {
                    // The old root doubles as a singleton; keep it and add the
                    // new root with the same bounds.
                    let mut root = c.clone();
                    root.members.extend(added.iter().copied());
                    extra.push(root);
                } else {
                    c.members.extend(added.iter().copied());
                }
            }
        }
        self.constraints.extend(extra);
        self
    }

    /// Merged bounds of every distinct member set, intersected over all
    /// entries that name it (in any tree).
    pub(crate) fn merged_bounds(&self) -> BTreeMap<BTreeSet<usize>, (i64, i64)> {
        let mut merged: BTreeMap<BTreeSet<usize>, (i64, i64)> = BTreeMap::new();
        for c in &self.constraints {
            merged
                .entry(c.members.clone())
                .and_modify(|(lo, hi)| {
                    *lo = (*lo).max(c.lower);
                    *hi = (*hi).min(c.upper);
                })
                .or_insert((c.lower, c.upper));
        }
        merged
    }
}

/// Checks every structural condition of an assignment message.
pub fn validate_message(msg: &AssignmentMessage) -> ValidationReport {
    let mut violations = Vec::new();
    let n = msg.num_goods;
    let m = msg.variables.len();
    if n < 2 {
        violations.push(Violation::TooFewGoods(n));
    }
    if m == 0 {
        violations.push(Violation::NoVariables);
    }

    let mut good_of: BTreeMap<usize, usize> = BTreeMap::new();
    for v in &msg.variables {
        if v.id == 0 || v.id > m {
            violations.push(Violation::BadVariableId {
                id: v.id,
                expected_max: m,
            });
        }
        if good_of.insert(v.id, v.good).is_some() {
            violations.push(Violation::DuplicateVariableId(v.id));
        }
        if v.good == 0 || v.good > n {
            violations.push(Violation::UnknownGood {
                variable: v.id,
                good: v.good,
                num_goods: n,
            });
        }
    }
    for good in 1..=n {
        if !msg.variables.iter().any(|v| v.good == good) {
            violations.push(Violation::GoodWithoutVariable(good));
        }
    }

    // Per-constraint checks; remember which constraints are usable per tree.
    let mut per_tree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (index, c) in msg.constraints.iter().enumerate() {
        let mut usable = true;
        if c.tree > n {
            violations.push(Violation::UnknownTree {
                index,
                tree: c.tree,
                num_goods: n,
            });
            usable = false;
        }
        if c.members.is_empty() {
            violations.push(Violation::EmptyConstraint { index });
            usable = false;
        }
        if c.lower > 0 || c.upper < 0 {
            violations.push(Violation::BoundSign {
                index,
                lower: c.lower,
                upper: c.upper,
            });
        }
        for &j in &c.members {
            match good_of.get(&j) {
                None => {
                    violations.push(Violation::UnknownVariable { index, variable: j });
                    usable = false;
                }
                Some(&good) if c.tree >= 1 && good != c.tree => {
                    violations.push(Violation::ForeignMember {
                        index,
                        tree: c.tree,
                        variable: j,
                        good,
                    });
                }
                Some(_) => {}
            }
        }
        if usable {
            per_tree.entry(c.tree).or_default().push(index);
        }
    }

    if n >= 1 {
        for tree in 0..=n {
            let indices = per_tree.get(&tree).map(Vec::as_slice).unwrap_or(&[]);
            'pairs: for (a, &first) in indices.iter().enumerate() {
                for &second in &indices[a + 1..] {
                    let x = &msg.constraints[first].members;
                    let y = &msg.constraints[second].members;
                    if crosses(x, y) {
                        violations.push(Violation::NotLaminar {
                            tree,
                            first,
                            second,
                        });
                        break 'pairs;
                    }
                }
            }
            let root = msg.good_variables(tree);
            if root.is_empty() {
                continue;
            }
            let has =
                |set: &BTreeSet<usize>| indices.iter().any(|&k| &msg.constraints[k].members == set);
            if !has(&root) {
                violations.push(Violation::MissingRoot { tree });
            }
            for &j in &root {
                if !has(&BTreeSet::from([j])) {
                    violations.push(Violation::MissingSingleton { tree, variable: j });
                }
            }
        }
    }

    ValidationReport { violations }
}

fn crosses(x: &BTreeSet<usize>, y: &BTreeSet<usize>) -> bool {
    !x.is_disjoint(y) && !x.is_subset(y) && !y.is_subset(x)
}

/// Rewrites a valid message into the form where trees meet only in terminal
/// nodes.
///
/// Every distinct member set keeps one bound pair, the intersection of all
/// pairs it was listed with. A non-singleton set that lies in some tree
/// `i >= 1` is kept only there; singletons `{j}` are listed once in tree 0
/// and once in the tree of their good. Output constraints are sorted.
pub fn normalize_trees(msg: &AssignmentMessage) -> AssignmentMessage {
    let good_of: BTreeMap<usize, usize> = msg.variables.iter().map(|v| (v.id, v.good)).collect();
    let mut in_good_tree: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for c in &msg.constraints {
        if c.tree >= 1 {
            in_good_tree.insert(c.members.clone());
        }
    }
    let mut constraints = Vec::new();
    for (members, (lower, upper)) in msg.merged_bounds() {
        if members.len() == 1 {
            let j = *members.iter().next().unwrap();
            let good = good_of.get(&j).copied().unwrap_or(0);
            constraints.push(TreeConstraint {
                tree: 0,
                members: members.clone(),
                lower,
                upper,
            });
            if good != 0 {
                constraints.push(TreeConstraint {
                    tree: good,
                    members,
                    lower,
                    upper,
                });
            }
        } else {
            let tree = if in_good_tree.contains(&members) {
                good_of
                    .get(members.iter().next().unwrap())
                    .copied()
                    .unwrap_or(0)
            } else {
                0
            };
            constraints.push(TreeConstraint {
                tree,
                members,
                lower,
                upper,
            });
        }
    }
    constraints.sort();
    let mut variables = msg.variables.clone();
    variables.sort_by_key(|v| v.id);
    AssignmentMessage {
        num_goods: msg.num_goods,
        variables,
        constraints,
    }
}

/// True iff `msg` already has the shape produced by [`normalize_trees`]
/// (ignoring the order of its lists).
pub fn is_normalized(msg: &AssignmentMessage) -> bool {
    let mut own = msg.constraints.clone();
    own.sort();
    let mut vars = msg.variables.clone();
    vars.sort_by_key(|v| v.id);
    let canonical = normalize_trees(msg);
    canonical.constraints == own && canonical.variables == vars
}

/// One tree of a message as a laminar family with parent links.
#[derive(Debug, Clone)]
pub(crate) struct TreeNodes {
    pub sets: Vec<(BTreeSet<usize>, i64, i64)>,
    /// `parent[k]` is the inclusion-minimal strict superset of `sets[k]`.
    pub parent: Vec<Option<usize>>,
}

impl TreeNodes {
    pub fn of(msg: &AssignmentMessage, tree: usize) -> TreeNodes {
        let mut sets: Vec<(BTreeSet<usize>, i64, i64)> = msg
            .constraints
            .iter()
            .filter(|c| c.tree == tree)
            .map(|c| (c.members.clone(), c.lower, c.upper))
            .collect();
        // Larger sets first, so a node's parent always precedes it.
        sets.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        let parent = (0..sets.len())
            .map(|k| {
                (0..sets.len())
                    .filter(|&l| {
                        sets[l].0.len() > sets[k].0.len() && sets[k].0.is_subset(&sets[l].0)
                    })
                    .min_by_key(|&l| sets[l].0.len())
            })
            .collect();
        TreeNodes { sets, parent }
    }

    pub fn position(&self, members: &BTreeSet<usize>) -> Option<usize> {
        self.sets.iter().position(|(s, _, _)| s == members)
    }
}
