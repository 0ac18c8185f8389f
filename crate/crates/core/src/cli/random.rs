use crate::model::{AssignmentMessage, TreeConstraint, Variable};
use crate::rational::int;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub const MAX_RANDOM_GOODS: usize = 8;
pub const MAX_RANDOM_VARIABLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomParams {
    pub num_goods: usize,
    pub num_variables: usize,
    /// Lower bounds are drawn from `[lower_min, 0]`.
    pub lower_min: i64,
    /// Upper bounds are drawn from `[0, upper_max]`.
    pub upper_max: i64,
    pub value_min: i64,
    pub value_max: i64,
}

impl RandomParams {
    /// Bounds in `[-2, 3]`, integer values in `[-5, 5]`.
    pub fn new(num_goods: usize, num_variables: usize) -> Self {
        RandomParams {
            num_goods,
            num_variables,
            lower_min: -2,
            upper_max: 3,
            value_min: -5,
            value_max: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RandomError {
    #[error("a market needs at least 2 goods, got {0}")]
    TooFewGoods(usize),
    #[error("{vars} variables cannot cover {goods} goods")]
    TooFewVariables { goods: usize, vars: usize },
    #[error("at most {MAX_RANDOM_GOODS} goods and {MAX_RANDOM_VARIABLES} variables are supported")]
    TooLarge,
    #[error("need lower_min <= 0 <= upper_max and value_min <= value_max")]
    BadRanges,
}

/// Splits `set` into at least two random blocks and appends every block
/// with two or more members, recursing into each.
fn partition_tree(rng: &mut ChaCha8Rng, set: &[usize], out: &mut Vec<BTreeSet<usize>>) {
    if set.len() < 2 {
        return;
    }
    let mut items = set.to_vec();
    items.shuffle(rng);
    let blocks = rng.random_range(2..=items.len());
    let mut cuts: Vec<usize> = (1..items.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts[..blocks - 1].to_vec();
    cuts.sort_unstable();
    let mut start = 0;
    for end in cuts.into_iter().chain([items.len()]) {
        let block = &items[start..end];
        if block.len() > 1 {
            out.push(block.iter().copied().collect());
            partition_tree(rng, block, out);
        }
        start = end;
    }
}

/// A random valid message, deterministic in `seed`. Every good gets at least
/// one variable; each tree is grown top-down by random partition of its root.
pub fn random_message(seed: u64, params: &RandomParams) -> Result<AssignmentMessage, RandomError> {
    let (n, m) = (params.num_goods, params.num_variables);
    if n < 2 {
        return Err(RandomError::TooFewGoods(n));
    }
    if m < n {
        return Err(RandomError::TooFewVariables { goods: n, vars: m });
    }
    if n > MAX_RANDOM_GOODS || m > MAX_RANDOM_VARIABLES {
        return Err(RandomError::TooLarge);
    }
    if params.lower_min > 0 || params.upper_max < 0 || params.value_min > params.value_max {
        return Err(RandomError::BadRanges);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut goods: Vec<usize> = (1..=n)
        .chain((n..m).map(|_| rng.random_range(1..=n)))
        .collect();
    goods.shuffle(&mut rng);
    let variables: Vec<Variable> = goods
        .iter()
        .enumerate()
        .map(|(k, &good)| Variable {
            id: k + 1,
            good,
            value: int(rng.random_range(params.value_min..=params.value_max)),
        })
        .collect();

    let bounds = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(params.lower_min..=0),
            rng.random_range(0..=params.upper_max),
        )
    };
    let mut constraints = Vec::new();
    for j in 1..=m {
        let (lo, hi) = bounds(&mut rng);
        constraints.push(TreeConstraint::new(0, [j], lo, hi));
        constraints.push(TreeConstraint::new(goods[j - 1], [j], lo, hi));
    }
    for tree in 0..=n {
        let root: Vec<usize> = (1..=m)
            .filter(|&j| tree == 0 || goods[j - 1] == tree)
            .collect();
        if root.len() < 2 {
            continue;
        }
        let mut sets = vec![root.iter().copied().collect()];
        partition_tree(&mut rng, &root, &mut sets);
        for members in sets {
            let (lo, hi) = bounds(&mut rng);
            constraints.push(TreeConstraint {
                tree,
                members,
                lower: lo,
                upper: hi,
            });
        }
    }
    Ok(AssignmentMessage {
        num_goods: n,
        variables,
        constraints,
    })
}
