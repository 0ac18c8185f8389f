use super::random::{random_message, RandomParams};
use crate::engine::{compile, compiled_demand, CompiledMessage};
use crate::model::{AssignmentMessage, Bundle, PriceVector};
use crate::properties::{
    construct_sigma_from_flows, exchange_failure_in, min_size_demand, verify_sigma_construction,
    ExchangeFailure, PropertyError, SigmaDefect,
};
use crate::rational::{ratio, Exact};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

/// Keeps the price stream independent of the message stream.
const PRICE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOptions {
    pub count: usize,
    pub prices_per_message: usize,
    pub max_goods: usize,
    pub max_variables: usize,
    /// Prices are multiples of 1/2 in `[-price_span, price_span]`.
    pub price_span: i64,
    /// Self-test hook: plants a bogus bundle in the first demand set so the
    /// harness must report a failure.
    pub inject_bug: bool,
}

impl SuiteOptions {
    pub fn new(count: usize) -> Self {
        SuiteOptions {
            count,
            prices_per_message: 10,
            max_goods: 3,
            max_variables: 6,
            price_span: 6,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    Exchange(ExchangeFailure),
    Sigma {
        q: Bundle,
        r: Bundle,
        defect: SigmaDefect,
    },
}

/// Everything needed to replay one failing case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteFailure {
    pub case: usize,
    pub message_seed: u64,
    pub message: AssignmentMessage,
    pub price: PriceVector,
    pub demand: BTreeSet<Bundle>,
    pub kind: FailureKind,
}

impl fmt::Display for SuiteFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self
            .price
            .prices()
            .iter()
            .map(|x| Exact(x).to_string())
            .collect();
        write!(
            f,
            "case {} (message seed {}) at p=({}): ",
            self.case,
            self.message_seed,
            p.join(",")
        )?;
        match &self.kind {
            FailureKind::Exchange(e) => write!(f, "no correspondence between {} and {}", e.q, e.r),
            FailureKind::Sigma { q, r, defect } => write!(f, "construction for {q}, {r}: {defect}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuiteReport {
    pub messages: usize,
    pub price_cases: usize,
    pub passed_cases: usize,
    /// Ordered pairs of distinct minimum-size bundles examined.
    pub bundle_pairs: usize,
    /// Decomposition cycles checked.
    pub cycles: usize,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} messages, {}/{} price cases passed, {} bundle pairs, {} cycles, {} failures",
            self.messages,
            self.passed_cases,
            self.price_cases,
            self.bundle_pairs,
            self.cycles,
            self.failures.len()
        )
    }
}

/// Message seed and shape of case `k`, fixed by the suite seed alone.
pub fn suite_case(
    seed: u64,
    options: &SuiteOptions,
) -> impl Iterator<Item = (u64, RandomParams)> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..options.count).map(move |_| {
        let n = rng.random_range(2..=options.max_goods.max(2));
        let m = rng.random_range(n..=options.max_variables.max(n));
        (rng.random(), RandomParams::new(n, m))
    })
}

fn check_case(
    compiled: &CompiledMessage,
    p: &PriceVector,
    corrupt: bool,
    report: &mut SuiteReport,
) -> Result<Option<(BTreeSet<Bundle>, FailureKind)>, PropertyError> {
    let mut demand = compiled_demand(compiled, p)?.demand;
    if corrupt {
        let q = min_size_demand(&demand)
            .into_iter()
            .next()
            .expect("demand is nonempty");
        let mut far = q.quantities().to_vec();
        far[0] += 1000;
        far[1] -= 1000;
        demand.insert(Bundle::new(far));
    }
    if let Some(failure) = exchange_failure_in(&demand)? {
        return Ok(Some((demand, FailureKind::Exchange(failure))));
    }
    let mins = min_size_demand(&demand);
    for q in &mins {
        for r in &mins {
            if q == r {
                continue;
            }
            report.bundle_pairs += 1;
            let sc = construct_sigma_from_flows(compiled, p, q, r)?;
            report.cycles += sc.cycles.len();
            if let Err(defect) = verify_sigma_construction(compiled, p, q, r, &sc) {
                let kind = FailureKind::Sigma {
                    q: q.clone(),
                    r: r.clone(),
                    defect,
                };
                return Ok(Some((demand, kind)));
            }
        }
    }
    Ok(None)
}

/// Random messages times random half-integer prices: strong exchangeability
/// must hold and the flow construction must yield a valid correspondence.
pub fn run_theorem1_suite(seed: u64, options: &SuiteOptions) -> Result<SuiteReport, PropertyError> {
    let mut report = SuiteReport::default();
    let mut price_rng = ChaCha8Rng::seed_from_u64(seed ^ PRICE_STREAM);
    for (case, (message_seed, params)) in suite_case(seed, options).enumerate() {
        let msg = random_message(message_seed, &params).expect("suite parameters are in range");
        let compiled = compile(&msg)?;
        report.messages += 1;
        for k in 0..options.prices_per_message {
            let span = 2 * options.price_span;
            let p = PriceVector::new(
                (0..params.num_goods)
                    .map(|_| ratio(price_rng.random_range(-span..=span), 2))
                    .collect(),
            );
            report.price_cases += 1;
            let corrupt = options.inject_bug && case == 0 && k == 0;
            match check_case(&compiled, &p, corrupt, &mut report)? {
                None => report.passed_cases += 1,
                Some((demand, kind)) => report.failures.push(SuiteFailure {
                    case,
                    message_seed,
                    message: msg.clone(),
                    price: p,
                    demand,
                    kind,
                }),
            }
        }
    }
    Ok(report)
}
