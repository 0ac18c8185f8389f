use super::PropertyError;
use crate::model::{Bundle, PriceVector, ValuationTable};
use crate::rational::{common_denominator, scaled_i64, Rational};
use num_bigint::BigInt;
use std::collections::BTreeSet;

const SCALED_LIMIT: i64 = 1 << 52;

/// A table on `{0,1}^n` indexed by bit mask (good `k` is bit `k - 1`), with
/// values rescaled to machine integers so demand queries are cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypercubeValuation {
    num_goods: usize,
    values: Vec<Rational>,
    scale: BigInt,
    scaled: Vec<i64>,
}

impl HypercubeValuation {
    /// `price_denominator` is folded into the scale so that prices with that
    /// denominator (e.g. 2 for half-integers) can be queried.
    pub fn new(table: &ValuationTable, price_denominator: u64) -> Result<Self, PropertyError> {
        if !table.is_hypercube() {
            return Err(PropertyError::NotHypercube);
        }
        let n = table.num_goods();
        let mut values = vec![Rational::default(); 1 << n];
        for (bundle, v) in table.iter() {
            values[mask_of(bundle)] = v.clone();
        }
        Self::from_values(n, values, price_denominator)
    }

    pub fn from_values(
        num_goods: usize,
        values: Vec<Rational>,
        price_denominator: u64,
    ) -> Result<Self, PropertyError> {
        if values.len() != 1 << num_goods {
            return Err(PropertyError::NotHypercube);
        }
        let scale = common_denominator(values.iter()) * BigInt::from(price_denominator.max(1));
        let scaled = values
            .iter()
            .map(|v| scaled_i64(v, &scale, SCALED_LIMIT))
            .collect::<Option<Vec<i64>>>()
            .ok_or(PropertyError::ScaleOverflow)?;
        Ok(HypercubeValuation {
            num_goods,
            values,
            scale,
            scaled,
        })
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    pub fn value(&self, mask: usize) -> &Rational {
        &self.values[mask]
    }

    /// Common denominator of values and the queried prices.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn scaled_values(&self) -> &[i64] {
        &self.scaled
    }

    pub fn to_table(&self) -> ValuationTable {
        ValuationTable::from_hypercube(self.num_goods, &self.values).expect("hypercube table")
    }

    /// Prices in the internal scale, or `None` when not representable.
    pub fn scale_prices(&self, p: &PriceVector) -> Option<Vec<i64>> {
        if p.num_goods() != self.num_goods {
            return None;
        }
        p.prices()
            .iter()
            .map(|x| scaled_i64(x, &self.scale, SCALED_LIMIT >> 8))
            .collect()
    }

    /// Demanded masks in increasing order, for prices in the internal scale.
    pub fn demand_masks(&self, scaled_prices: &[i64]) -> Vec<usize> {
        let mut best = i64::MIN;
        let mut demand = Vec::new();
        let mut cost = vec![0i64; self.scaled.len()];
        for mask in 0..self.scaled.len() {
            if mask > 0 {
                let low = mask.trailing_zeros() as usize;
                cost[mask] = cost[mask & (mask - 1)] + scaled_prices[low];
            }
            let u = self.scaled[mask] - cost[mask];
            if u > best {
                best = u;
                demand.clear();
            }
            if u == best {
                demand.push(mask);
            }
        }
        demand
    }

    pub fn demand_bundles(&self, p: &PriceVector) -> Option<BTreeSet<Bundle>> {
        let scaled = self.scale_prices(p)?;
        Some(
            self.demand_masks(&scaled)
                .into_iter()
                .map(|m| bundle_of(self.num_goods, m))
                .collect(),
        )
    }
}

pub(crate) fn mask_of(bundle: &Bundle) -> usize {
    bundle
        .quantities()
        .iter()
        .enumerate()
        .filter(|(_, &q)| q != 0)
        .fold(0, |acc, (k, _)| acc | 1 << k)
}

pub(crate) fn bundle_of(num_goods: usize, mask: usize) -> Bundle {
    Bundle::new((0..num_goods).map(|k| ((mask >> k) & 1) as i64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn demand_of_unit_demand_table() {
        let t = ValuationTable::from_hypercube(2, &[int(0), int(1), int(1), int(1)]).unwrap();
        let h = HypercubeValuation::new(&t, 2).unwrap();
        let p = PriceVector::new(vec![ratio(1, 2), ratio(1, 2)]);
        let d = h.demand_bundles(&p).unwrap();
        assert_eq!(
            d,
            BTreeSet::from([Bundle::new(vec![1, 0]), Bundle::new(vec![0, 1])])
        );
        assert!(h
            .scale_prices(&PriceVector::new(vec![ratio(1, 3), int(0)]))
            .is_none());
    }

    #[test]
    fn rejects_non_hypercube() {
        let t = ValuationTable::new(
            2,
            [
                (Bundle::new(vec![0, 0]), int(0)),
                (Bundle::new(vec![2, 0]), int(1)),
            ],
        )
        .unwrap();
        assert_eq!(
            HypercubeValuation::new(&t, 1).unwrap_err(),
            PropertyError::NotHypercube
        );
    }
}
