use super::hypercube::HypercubeValuation;
use super::{PropertyError, PropertyReport, Witness};
use crate::model::{Bundle, ModelError, ValuationTable};
use crate::rational::{common_denominator, scaled_i64, Exact, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// Upper limit on the number of items of a binary representation.
pub const MAX_ITEMS: usize = 20;
/// Default cap on the base points a grid visits before it switches to a
/// seeded sample of the lattice.
pub const DEFAULT_MAX_POINTS: usize = 20_000;

const SCALED_LIMIT: i64 = 1 << 50;

/// A valuation on subsets of items in which every unit of every good is its
/// own item. Only subsets whose per-good counts lie in the original domain
/// carry a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryValuation {
    num_items: usize,
    copy_of: Vec<(usize, usize)>,
    values: BTreeMap<u64, Rational>,
}

impl BinaryValuation {
    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// `(good, copy)` of item `item` (both 1-based).
    pub fn copy_of(&self, item: usize) -> (usize, usize) {
        self.copy_of[item - 1]
    }

    /// Value of the subset with bit `k - 1` set for each item `k`.
    pub fn value(&self, subset: u64) -> Option<&Rational> {
        self.values.get(&subset)
    }

    pub fn subsets(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.values.iter().map(|(&m, v)| (m, v))
    }

    /// Builds a binary valuation directly from subset values.
    pub fn from_subsets(num_items: usize, values: BTreeMap<u64, Rational>) -> Self {
        BinaryValuation {
            num_items,
            copy_of: (1..=num_items).map(|i| (i, 1)).collect(),
            values,
        }
    }
}

fn items_of(mask: u64) -> Vec<usize> {
    (0..64)
        .filter(|k| mask >> k & 1 == 1)
        .map(|k| k + 1)
        .collect()
}

fn fmt_items(items: &[usize]) -> String {
    let parts: Vec<String> = items.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

fn fmt_prices(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| Exact(x).to_string()).collect();
    format!("({})", parts.join(","))
}

/// Splits every unit into its own item: good `g` with at most `k` units in
/// the domain contributes items `(g,1)..(g,k)`, numbered good by good.
pub fn binary_expansion(table: &ValuationTable) -> Result<BinaryValuation, PropertyError> {
    if let Some(b) = table.domain().find(|b| !b.is_nonnegative()) {
        return Err(PropertyError::NegativeDomain(b.to_string()));
    }
    let n = table.num_goods();
    let max_units: Vec<usize> = (0..n)
        .map(|k| {
            table
                .domain()
                .map(|b| b.quantities()[k] as usize)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let num_items: usize = max_units.iter().sum();
    if num_items > MAX_ITEMS {
        return Err(PropertyError::TooManyItems(num_items));
    }
    let mut copy_of = Vec::with_capacity(num_items);
    let mut good_bits = Vec::with_capacity(n);
    for (k, &units) in max_units.iter().enumerate() {
        let first = copy_of.len();
        good_bits.push(((1u64 << units) - 1) << first);
        copy_of.extend((1..=units).map(|c| (k + 1, c)));
    }
    let mut values = BTreeMap::new();
    for subset in 0..(1u64 << num_items) {
        let counts: Vec<i64> = good_bits
            .iter()
            .map(|&g| (subset & g).count_ones() as i64)
            .collect();
        if let Some(v) = table.value(&Bundle::new(counts)) {
            values.insert(subset, v.clone());
        }
    }
    Ok(BinaryValuation {
        num_items,
        copy_of,
        values,
    })
}

/// A product grid of candidate prices, one axis per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceGrid {
    pub axes: Vec<Vec<Rational>>,
    /// Above this many points, a seeded sample of this size is visited.
    pub max_points: usize,
    pub seed: u64,
}

impl PriceGrid {
    pub fn new(axes: Vec<Vec<Rational>>) -> Self {
        PriceGrid {
            axes,
            max_points: DEFAULT_MAX_POINTS,
            seed: 0,
        }
    }

    /// Every axis holds the multiples of `1 / (2 * denom)` in `[lo, hi]`.
    pub fn half_steps(dim: usize, lo: &Rational, hi: &Rational, denom: &BigInt) -> Self {
        let step_den = denom * BigInt::from(2);
        let first = (lo * Rational::from_integer(step_den.clone()))
            .ceil()
            .to_integer();
        let last = (hi * Rational::from_integer(step_den.clone()))
            .floor()
            .to_integer();
        let mut axis = Vec::new();
        let mut k = first;
        while k <= last {
            axis.push(Rational::new(k.clone(), step_den.clone()));
            k += 1;
        }
        PriceGrid::new(vec![axis; dim])
    }

    pub fn with_max_points(mut self, max_points: usize) -> Self {
        self.max_points = max_points;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn full_size(&self) -> u128 {
        self.axes
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn is_exhaustive(&self) -> bool {
        self.full_size() <= self.max_points as u128
    }

    /// Calls `visit` with axis indices of every base point: the whole grid in
    /// lexicographic order, or a seeded sample when the grid is too large.
    /// Stops early when `visit` returns `false`.
    pub fn for_each_point(&self, mut visit: impl FnMut(&[usize]) -> bool) {
        let dim = self.axes.len();
        if self.axes.iter().any(Vec::is_empty) {
            return;
        }
        let mut idx = vec![0usize; dim];
        if self.is_exhaustive() {
            loop {
                if !visit(&idx) {
                    return;
                }
                let mut k = dim;
                loop {
                    if k == 0 {
                        return;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < self.axes[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for _ in 0..self.max_points {
                for (k, slot) in idx.iter_mut().enumerate() {
                    *slot = rng.random_range(0..self.axes[k].len());
                }
                if !visit(&idx) {
                    return;
                }
            }
        }
    }

    pub fn point(&self, idx: &[usize]) -> Vec<Rational> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.axes[k][i].clone())
            .collect()
    }
}

/// Half-integer grid (finer when values are fractional) spanning one unit
/// beyond the range of the valuation's values and marginal values.
pub fn default_item_grid(bv: &BinaryValuation) -> PriceGrid {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let mut widen = |x: Rational| {
        if lo.as_ref().is_none_or(|l| &x < l) {
            lo = Some(x.clone());
        }
        if hi.as_ref().is_none_or(|h| &x > h) {
            hi = Some(x);
        }
    };
    for (mask, v) in bv.subsets() {
        widen(v.clone());
        for item in 0..bv.num_items {
            if mask >> item & 1 == 0 {
                if let Some(w) = bv.value(mask | 1 << item) {
                    widen(w - v);
                }
            }
        }
    }
    let one = Rational::from_integer(1.into());
    let lo = lo.unwrap_or_else(Rational::zero) - &one;
    let hi = hi.unwrap_or_else(Rational::zero) + &one;
    let denom = common_denominator(bv.values.values());
    PriceGrid::half_steps(bv.num_items, &lo, &hi, &denom)
}

/// A base price, a single-item price increase, and a demanded bundle for
/// which no bundle demanded after the increase keeps every item whose price
/// did not change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutesWitness {
    pub price: Vec<Rational>,
    pub raised: Vec<Rational>,
    /// The item whose price went up (1-based).
    pub item: usize,
    /// Items of the demanded bundle at `price` (1-based).
    pub bundle: Vec<usize>,
}

impl fmt::Display for SubstitutesWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at prices {} the bundle {} is demanded; after raising item {} to get {} no demanded bundle keeps its other items",
            fmt_prices(&self.price),
            fmt_items(&self.bundle),
            self.item,
            fmt_prices(&self.raised)
        )
    }
}

struct ScaledBinary {
    scale: BigInt,
    entries: Vec<(u64, i64)>,
    axes: Vec<Vec<i64>>,
}

fn scale_binary(bv: &BinaryValuation, grid: &PriceGrid) -> Result<ScaledBinary, PropertyError> {
    let scale = common_denominator(bv.values.values().chain(grid.axes.iter().flatten()));
    let entries = bv
        .values
        .iter()
        .map(|(&m, v)| scaled_i64(v, &scale, SCALED_LIMIT).map(|s| (m, s)))
        .collect::<Option<Vec<_>>>()
        .ok_or(PropertyError::ScaleOverflow)?;
    let axes = grid
        .axes
        .iter()
        .map(|axis| {
            axis.iter()
                .map(|x| scaled_i64(x, &scale, SCALED_LIMIT >> 8))
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()
        .ok_or(PropertyError::ScaleOverflow)?;
    Ok(ScaledBinary {
        scale,
        entries,
        axes,
    })
}

/// Binary substitutes on a price grid.
///
/// For each base point and each item, every increase of that item's price
/// alone is covered exactly (not only the grid steps): raising item `i` by
/// `t > 0` leaves demanded either the best bundles containing `i` or the best
/// bundles without it, so one comparison per demanded bundle settles all `t`.
/// Single-coordinate increases between grid points compose to every ordered
/// pair `p <= p'` of the grid, so on an exhaustive grid this is the full
/// condition restricted to the grid.
pub fn check_binary_substitutes(
    bv: &BinaryValuation,
    grid: &PriceGrid,
) -> Result<PropertyReport, PropertyError> {
    if grid.axes.len() != bv.num_items {
        return Err(ModelError::LengthMismatch {
            expected: bv.num_items,
            actual: grid.axes.len(),
        }
        .into());
    }
    let sb = scale_binary(bv, grid)?;
    let n = bv.num_items;
    let mut utilities = vec![0i64; sb.entries.len()];
    let mut prices = vec![0i64; n];
    let mut cases = 0u64;
    let mut witness = None;
    grid.for_each_point(|idx| {
        cases += 1;
        for (k, &i) in idx.iter().enumerate() {
            prices[k] = sb.axes[k][i];
        }
        let mut best = i64::MIN;
        let mut best_without = vec![i64::MIN; n];
        for (slot, &(mask, v)) in utilities.iter_mut().zip(&sb.entries) {
            let mut u = v;
            let mut rest = mask;
            while rest != 0 {
                u -= prices[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            *slot = u;
            best = best.max(u);
            for (item, bw) in best_without.iter_mut().enumerate() {
                if mask >> item & 1 == 0 && u > *bw {
                    *bw = u;
                }
            }
        }
        for (x, &(mask, _)) in sb.entries.iter().enumerate() {
            if utilities[x] != best {
                continue;
            }
            for item in 0..n {
                let bit = 1u64 << item;
                if mask & bit == 0 || best_without[item] == i64::MIN {
                    continue;
                }
                let keep = mask & !bit;
                let ok = sb.entries.iter().zip(&utilities).any(|(&(m, _), &u)| {
                    m & bit == 0 && u == best_without[item] && m & keep == keep
                });
                if !ok {
                    let price = grid.point(idx);
                    let mut raised = price.clone();
                    let t = best - best_without[item] + 1;
                    raised[item] += Rational::new(BigInt::from(t), sb.scale.clone());
                    witness = Some(SubstitutesWitness {
                        price,
                        raised,
                        item: item + 1,
                        bundle: items_of(mask),
                    });
                    return false;
                }
            }
        }
        true
    });
    Ok(match witness {
        Some(w) => PropertyReport::fails(Witness::Substitutes(w), cases),
        None => PropertyReport::holds(cases),
    })
}

fn demand_rational(bv: &BinaryValuation, p: &[Rational]) -> Vec<u64> {
    let scored: Vec<(u64, Rational)> = bv
        .values
        .iter()
        .map(|(&m, v)| {
            let cost = items_of(m)
                .iter()
                .fold(Rational::zero(), |acc, &i| acc + &p[i - 1]);
            (m, v - cost)
        })
        .collect();
    let best = scored
        .iter()
        .map(|(_, u)| u.clone())
        .max()
        .expect("nonempty domain");
    scored
        .into_iter()
        .filter(|(_, u)| *u == best)
        .map(|(m, _)| m)
        .collect()
}

fn retains(p: &[Rational], p2: &[Rational], x: u64, x2: u64) -> bool {
    (0..p.len()).all(|k| p[k] != p2[k] || x >> k & 1 == 0 || x2 >> k & 1 == 1)
}

/// Literal binary substitutes over all ordered pairs of the given points,
/// in exact rational arithmetic. Quadratic in the number of points.
pub fn check_binary_substitutes_pairs(
    bv: &BinaryValuation,
    points: &[Vec<Rational>],
) -> PropertyReport {
    let demands: Vec<Vec<u64>> = points.iter().map(|p| demand_rational(bv, p)).collect();
    let mut cases = 0;
    for (a, p) in points.iter().enumerate() {
        for (b, p2) in points.iter().enumerate() {
            if !p.iter().zip(p2).all(|(x, y)| x <= y) {
                continue;
            }
            cases += 1;
            for &x in &demands[a] {
                if !demands[b].iter().any(|&x2| retains(p, p2, x, x2)) {
                    let item = (0..p.len()).find(|&k| p[k] != p2[k]).map_or(0, |k| k + 1);
                    return PropertyReport::fails(
                        Witness::Substitutes(SubstitutesWitness {
                            price: p.clone(),
                            raised: p2.clone(),
                            item,
                            bundle: items_of(x),
                        }),
                        cases,
                    );
                }
            }
        }
    }
    PropertyReport::holds(cases)
}

/// Re-checks a substitutes witness by direct enumeration of both demand sets.
pub fn verify_substitutes_witness(bv: &BinaryValuation, w: &SubstitutesWitness) -> bool {
    let n = bv.num_items;
    if w.price.len() != n
        || w.raised.len() != n
        || w.price.iter().zip(&w.raised).any(|(a, b)| a > b)
    {
        return false;
    }
    let x = w.bundle.iter().fold(0u64, |acc, &i| acc | 1 << (i - 1));
    let before = demand_rational(bv, &w.price);
    let after = demand_rational(bv, &w.raised);
    before.contains(&x) && !after.iter().any(|&x2| retains(&w.price, &w.raised, x, x2))
}

/// A violated local exchange inequality on `{0,1}^n`: with `S = base`,
/// either `v(S+i+j) + v(S) > v(S+i) + v(S+j)` (`k` absent) or
/// `v(S+i+j) + v(S+k) > max(v(S+i+k) + v(S+j), v(S+j+k) + v(S+i))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalExchangeWitness {
    pub base: Vec<usize>,
    pub i: usize,
    pub j: usize,
    pub k: Option<usize>,
}

impl fmt::Display for LocalExchangeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            None => write!(
                f,
                "complementarity at S={}: v(S+{i}+{j}) + v(S) > v(S+{i}) + v(S+{j})",
                fmt_items(&self.base),
                i = self.i,
                j = self.j
            ),
            Some(k) => write!(
                f,
                "exchange fails at S={}: v(S+{i}+{j}) + v(S+{k}) exceeds both v(S+{i}+{k}) + v(S+{j}) and v(S+{j}+{k}) + v(S+{i})",
                fmt_items(&self.base),
                i = self.i,
                j = self.j
            ),
        }
    }
}

fn local_violation(v: &[i64], n: usize) -> Option<LocalExchangeWitness> {
    let bit = |g: usize| 1usize << g;
    for s in 0..(1usize << n) {
        let outside: Vec<usize> = (0..n).filter(|&g| s & bit(g) == 0).collect();
        for (a, &i) in outside.iter().enumerate() {
            for &j in &outside[a + 1..] {
                let sij = v[s | bit(i) | bit(j)];
                if sij + v[s] > v[s | bit(i)] + v[s | bit(j)] {
                    return Some(LocalExchangeWitness {
                        base: items_of(s as u64),
                        i: i + 1,
                        j: j + 1,
                        k: None,
                    });
                }
                for &k in &outside {
                    if k == i || k == j {
                        continue;
                    }
                    let lhs = sij + v[s | bit(k)];
                    let r1 = v[s | bit(i) | bit(k)] + v[s | bit(j)];
                    let r2 = v[s | bit(j) | bit(k)] + v[s | bit(i)];
                    if lhs > r1.max(r2) {
                        return Some(LocalExchangeWitness {
                            base: items_of(s as u64),
                            i: i + 1,
                            j: j + 1,
                            k: Some(k + 1),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Exact gross substitutes test on `{0,1}^n` via the local exchange
/// characterization of valuated matroids: supermodularity never holds
/// strictly on a pair, and among three items the best split of two pairs is
/// always attained by a pair containing the third item.
pub fn check_gross_substitutes_exact(
    table: &ValuationTable,
) -> Result<PropertyReport, PropertyError> {
    let h = HypercubeValuation::new(table, 1)?;
    Ok(gross_substitutes_hypercube(&h))
}

pub(crate) fn gross_substitutes_hypercube(h: &HypercubeValuation) -> PropertyReport {
    let n = h.num_goods();
    let cases = 1u64 << n;
    match local_violation(h.scaled_values(), n) {
        Some(w) => PropertyReport::fails(Witness::LocalExchange(w), cases),
        None => PropertyReport::holds(cases),
    }
}

/// Re-evaluates the violated inequality in exact arithmetic.
pub fn verify_local_exchange_witness(table: &ValuationTable, w: &LocalExchangeWitness) -> bool {
    let n = table.num_goods();
    let base: Vec<usize> = w.base.clone();
    let at = |extra: &[usize]| -> Option<Rational> {
        let mut q = vec![0i64; n];
        for &g in base.iter().chain(extra) {
            if g == 0 || g > n || q[g - 1] == 1 {
                return None;
            }
            q[g - 1] = 1;
        }
        table.value(&Bundle::new(q)).cloned()
    };
    let eval = || -> Option<bool> {
        let sij = at(&[w.i, w.j])?;
        Some(match w.k {
            None => sij + at(&[])? > at(&[w.i])? + at(&[w.j])?,
            Some(k) => {
                let lhs = sij + at(&[k])?;
                let r1 = at(&[w.i, k])? + at(&[w.j])?;
                let r2 = at(&[w.j, k])? + at(&[w.i])?;
                lhs > r1.max(r2)
            }
        })
    };
    eval().unwrap_or(false)
}

/// Strong substitutes: binary substitutes of the unit-split representation
/// on the given item-level grid (default: [`default_item_grid`]).
pub fn check_strong_substitutes(
    table: &ValuationTable,
    grid: Option<&PriceGrid>,
) -> Result<PropertyReport, PropertyError> {
    let bv = binary_expansion(table)?;
    match grid {
        Some(g) => check_binary_substitutes(&bv, g),
        None => check_binary_substitutes(&bv, &default_item_grid(&bv)),
    }
}
