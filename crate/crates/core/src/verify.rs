//! Oracles for the theory behind the selector.
//!
//! Facility location `f(S) = sum_x max_{s in S} sim(x, s)` is the monotone
//! submodular surrogate for diversity coverage. This module checks
//! diminishing returns by random chains `A ⊆ B, v ∉ B`, checks that
//! nonnegative weighted sums stay submodular, and compares greedy
//! maximization against exhaustive search under a cardinality budget.

use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embedding::euclidean;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, derive_seed, rng_from_seed};

/// Absolute slack allowed in diminishing-returns comparisons.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Largest ground set accepted by the chain sampler.
pub const MAX_CHAIN_GROUND: usize = 16;
/// Upper bound on subsets enumerated by [`brute_force_optimum`].
pub const MAX_BRUTE_FORCE_SUBSETS: u64 = 1_000_000;

/// `1 - 1/e`
pub const GREEDY_BOUND: f64 = 1.0 - 1.0 / std::f64::consts::E;

pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;

    fn evaluate(&self, subset: &[usize]) -> f64;

    fn marginal(&self, subset: &[usize], v: usize) -> f64 {
        let mut with = subset.to_vec();
        with.push(v);
        self.evaluate(&with) - self.evaluate(subset)
    }
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        (**self).evaluate(subset)
    }
    fn marginal(&self, subset: &[usize], v: usize) -> f64 {
        (**self).marginal(subset, v)
    }
}

impl<F: SetFunction + ?Sized + Send> SetFunction for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        (**self).evaluate(subset)
    }
    fn marginal(&self, subset: &[usize], v: usize) -> f64 {
        (**self).marginal(subset, v)
    }
}

/// Facility location over a symmetric similarity matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct FacilityLocation {
    n: usize,
    sim: Vec<f64>,
}

impl FacilityLocation {
    pub fn new(n: usize, sim: Vec<f64>) -> Result<Self> {
        if sim.len() != n * n {
            return Err(Error::InvalidArgument(format!("similarity matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if (sim[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("sim({i},{i}) must be 1")));
            }
            for j in 0..n {
                let v = sim[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("sim({i},{j}) = {v} outside [0, 1]")));
                }
                if (v - sim[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("sim is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, sim })
    }

    /// RBF similarity `exp(-|a-b|^2 / (2 sigma^2))`, sigma the median
    /// pairwise distance.
    pub fn rbf(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let mut dists = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in i + 1..n {
                dists.push(euclidean(&points[i], &points[j]));
            }
        }
        let sigma = median(&mut dists).filter(|s| *s > 0.0).unwrap_or(1.0);
        let mut sim = vec![0.0; n * n];
        for i in 0..n {
            sim[i * n + i] = 1.0;
            for j in i + 1..n {
                let d = euclidean(&points[i], &points[j]);
                let v = (-(d * d) / (2.0 * sigma * sigma)).exp();
                sim[i * n + j] = v;
                sim[j * n + i] = v;
            }
        }
        Self::new(n, sim)
    }

    /// RBF instance over `n` points drawn uniformly from the unit cube.
    pub fn random(n: usize, dim: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        Self::rbf(&points).expect("rbf similarities are valid by construction")
    }

    pub fn sim(&self, i: usize, j: usize) -> f64 {
        self.sim[i * self.n + j]
    }

    pub fn fl_value(&self, subset: &[usize]) -> f64 {
        if subset.is_empty() {
            return 0.0;
        }
        (0..self.n)
            .map(|x| subset.iter().map(|&s| self.sim(x, s)).fold(0.0, f64::max))
            .sum()
    }
}

impl SetFunction for FacilityLocation {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        self.fl_value(subset)
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}

/// `f(S) = sum_{s in S} w_s`; submodular with equality.
#[derive(Clone, Debug)]
pub struct Modular {
    pub weights: Vec<f64>,
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| self.weights[i]).sum()
    }
}

/// `f(S) = |S|^2`; strictly supermodular, used as a negative control.
#[derive(Clone, Debug)]
pub struct SquaredCardinality {
    pub n: usize,
}

impl SetFunction for SquaredCardinality {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        (subset.len() * subset.len()) as f64
    }
}

/// `F(S) = sum_i w_i f_i(S)`.
pub struct WeightedSum<'a> {
    pub parts: Vec<&'a dyn SetFunction>,
    pub weights: Vec<f64>,
}

impl SetFunction for WeightedSum<'_> {
    fn ground_size(&self) -> usize {
        self.parts.first().map_or(0, |f| f.ground_size())
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        self.parts
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| if *w == 0.0 { 0.0 } else { w * f.evaluate(subset) })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiminishingReturnsReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `gain(v | B) - gain(v | A)` observed (positive means violation).
    pub max_gap: f64,
}

/// Samples `trials` random chains `A ⊆ B ⊆ V \ {v}` and counts those where
/// `f(A ∪ {v}) - f(A) < f(B ∪ {v}) - f(B) - 1e-9`.
pub fn check_diminishing_returns<F: SetFunction + ?Sized>(f: &F, trials: usize, seed: u64) -> Result<DiminishingReturnsReport> {
    let n = f.ground_size();
    if n > MAX_CHAIN_GROUND {
        return Err(Error::InvalidArgument(format!(
            "ground set of {n} exceeds the chain-check limit of {MAX_CHAIN_GROUND}"
        )));
    }
    if n == 0 {
        return Ok(DiminishingReturnsReport {
            trials: 0,
            violations: 0,
            max_gap: f64::NEG_INFINITY,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut violations = 0;
    let mut max_gap = f64::NEG_INFINITY;
    for _ in 0..trials {
        let v = rng.random_range(0..n);
        let p_outer: f64 = rng.random();
        let big: Vec<usize> = (0..n).filter(|&i| i != v && rng.random::<f64>() < p_outer).collect();
        let p_inner: f64 = rng.random();
        let small: Vec<usize> = big.iter().copied().filter(|_| rng.random::<f64>() < p_inner).collect();
        let gap = f.marginal(&big, v) - f.marginal(&small, v);
        max_gap = max_gap.max(gap);
        if gap > VIOLATION_TOL {
            violations += 1;
        }
    }
    Ok(DiminishingReturnsReport {
        trials,
        violations,
        max_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCombinationReport {
    pub components: Vec<DiminishingReturnsReport>,
    pub combined: DiminishingReturnsReport,
}

impl WeightedCombinationReport {
    pub fn components_submodular(&self) -> bool {
        self.components.iter().all(|r| r.violations == 0)
    }
}

/// Checks each component and their nonnegative weighted sum with the same
/// chain seed.
pub fn check_weighted_combination(
    fs: &[&dyn SetFunction],
    weights: &[f64],
    trials: usize,
    seed: u64,
) -> Result<WeightedCombinationReport> {
    if fs.is_empty() || fs.len() != weights.len() {
        return Err(Error::InvalidArgument("need one weight per function".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be nonnegative".into()));
    }
    let n = fs[0].ground_size();
    if fs.iter().any(|f| f.ground_size() != n) {
        return Err(Error::InvalidArgument("functions have different ground sets".into()));
    }
    let components = fs
        .iter()
        .map(|f| check_diminishing_returns(*f, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let sum = WeightedSum {
        parts: fs.to_vec(),
        weights: weights.to_vec(),
    };
    let combined = check_diminishing_returns(&sum, trials, seed)?;
    Ok(WeightedCombinationReport { components, combined })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    /// In pick order.
    pub subset: Vec<usize>,
    pub value: f64,
    /// Marginal gain of each pick.
    pub gains: Vec<f64>,
}

/// `budget` rounds of arg-max marginal gain, lowest id on ties.
pub fn greedy_maximize<F: SetFunction + ?Sized>(f: &F, budget: usize) -> Result<GreedyResult> {
    let n = f.ground_size();
    if budget > n {
        return Err(Error::NotEnoughSamples {
            requested: budget,
            available: n,
        });
    }
    let mut chosen = Vec::with_capacity(budget);
    let mut taken = vec![false; n];
    let mut gains = Vec::with_capacity(budget);
    let mut current = f.evaluate(&chosen);
    for _ in 0..budget {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| !taken[v]) {
            chosen.push(v);
            let gain = f.evaluate(&chosen) - current;
            chosen.pop();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((v, gain));
            }
        }
        let (v, gain) = best.expect("budget <= n leaves a candidate");
        taken[v] = true;
        chosen.push(v);
        current = f.evaluate(&chosen);
        gains.push(gain);
    }
    Ok(GreedyResult {
        value: current,
        subset: chosen,
        gains,
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exhaustive maximum over all subsets of size exactly `budget`; the first
/// subset in lexicographic order wins ties.
pub fn brute_force_optimum<F: SetFunction + ?Sized>(f: &F, budget: usize) -> Result<(Vec<usize>, f64)> {
    let n = f.ground_size();
    if budget > n {
        return Err(Error::NotEnoughSamples {
            requested: budget,
            available: n,
        });
    }
    let count = binomial(n, budget);
    if count > MAX_BRUTE_FORCE_SUBSETS {
        return Err(Error::SearchSpaceTooLarge {
            n,
            k: budget,
            limit: MAX_BRUTE_FORCE_SUBSETS,
        });
    }
    let mut comb: Vec<usize> = (0..budget).collect();
    let mut best = (comb.clone(), f.evaluate(&comb));
    loop {
        // advance to next combination
        let mut i = budget;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if comb[i] < n - budget + i {
                break;
            }
            if i == 0 {
                return Ok(best);
            }
        }
        comb[i] += 1;
        for j in i + 1..budget {
            comb[j] = comb[j - 1] + 1;
        }
        let v = f.evaluate(&comb);
        if v > best.1 {
            best = (comb.clone(), v);
        }
    }
}

/// Exhaustive check that `f(A) <= f(A ∪ {v})` for every `A` and `v`.
pub fn check_monotone_exhaustive<F: SetFunction + ?Sized>(f: &F) -> Result<bool> {
    let n = f.ground_size();
    if n > 12 {
        return Err(Error::InvalidArgument("exhaustive monotonicity check is limited to n <= 12".into()));
    }
    for mask in 0u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let base = f.evaluate(&set);
        for v in (0..n).filter(|&i| mask & (1 << i) == 0) {
            let mut with = set.clone();
            with.push(v);
            if f.evaluate(&with) < base - VIOLATION_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub budget: usize,
    pub instances: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
}

/// Greedy / optimum ratio per budget over `instances` random facility
/// location problems of size `n`.
pub fn approximation_curve(n: usize, budgets: &[usize], instances: usize, seed: u64) -> Result<Vec<CurveRow>> {
    budgets
        .iter()
        .map(|&b| {
            let mut ratios = Vec::with_capacity(instances);
            for t in 0..instances {
                let f = FacilityLocation::random(n, 2, derive_seed(seed, "curve", (b * 1_000_003 + t) as u64));
                ratios.push(greedy_ratio(&f, b)?);
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(CurveRow {
                budget: b,
                instances,
                mean_ratio: mean,
                min_ratio: min,
            })
        })
        .collect()
}

/// Greedy value over brute-force optimum (1 when the optimum is 0).
pub fn greedy_ratio<F: SetFunction + ?Sized>(f: &F, budget: usize) -> Result<f64> {
    let g = greedy_maximize(f, budget)?;
    let (_, opt) = brute_force_optimum(f, budget)?;
    Ok(if opt > 0.0 { g.value / opt } else { 1.0 })
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush().map_err(|e| Error::io("<curve csv>", e))?;
    Ok(())
}

/// Knobs for [`run_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Ground-set size for chain checks and greedy instances.
    pub size: usize,
    /// Random chains per diminishing-returns check.
    pub trials: usize,
    /// Random instances for the greedy-vs-optimum check.
    pub instances: usize,
    pub seed: u64,
    /// Adds a supermodular function to the set of functions expected to be
    /// submodular, which must make the suite fail.
    pub inject_supermodular: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            size: 12,
            trials: 10_000,
            instances: 200,
            seed: 0,
            inject_supermodular: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckOutcome>,
    pub curve: Vec<CurveRow>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Runs every theory check at desk scale.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let n = opts.size.clamp(2, 14);
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if opts.trials == 0 {
        warnings.push("no trials: diminishing-returns checks were skipped".to_string());
    }

    let fl = FacilityLocation::random(n, 2, derive_seed(opts.seed, "suite-fl", 0));
    let fl2 = FacilityLocation::random(n, 3, derive_seed(opts.seed, "suite-fl", 1));
    let mut rng = derive_rng(opts.seed, "suite-modular", 0);
    let modular = Modular {
        weights: (0..n).map(|_| rng.random::<f64>()).collect(),
    };
    let squared = SquaredCardinality { n };

    if opts.trials > 0 {
        let r = check_diminishing_returns(&fl, opts.trials, derive_seed(opts.seed, "chains", 0))?;
        checks.push(outcome(
            "facility location diminishing returns",
            r.violations == 0,
            format!("{} violations in {} chains (max gap {:.3e})", r.violations, r.trials, r.max_gap),
        ));

        let w = check_weighted_combination(
            &[&fl, &fl2, &modular],
            &[0.3, 0.5, 0.2],
            opts.trials,
            derive_seed(opts.seed, "chains", 1),
        )?;
        checks.push(outcome(
            "weighted combination diminishing returns",
            w.components_submodular() && w.combined.violations == 0,
            format!("{} violations in {} chains", w.combined.violations, w.combined.trials),
        ));

        let r = check_diminishing_returns(&squared, opts.trials, derive_seed(opts.seed, "chains", 2))?;
        checks.push(outcome(
            "supermodular control is detected",
            r.violations > 0,
            format!("{} violations in {} chains", r.violations, r.trials),
        ));

        if opts.inject_supermodular {
            let r = check_diminishing_returns(&squared, opts.trials, derive_seed(opts.seed, "chains", 3))?;
            checks.push(outcome(
                "injected function diminishing returns",
                r.violations == 0,
                format!("{} violations in {} chains", r.violations, r.trials),
            ));
        }
    }

    let small = FacilityLocation::random(n.min(10), 2, derive_seed(opts.seed, "suite-fl", 2));
    let mono = check_monotone_exhaustive(&small)?;
    checks.push(outcome("facility location monotone", mono, format!("exhaustive over n = {}", n.min(10))));

    let g = greedy_maximize(&fl, n / 2)?;
    let non_increasing = g.gains.windows(2).all(|w| w[1] <= w[0] + VIOLATION_TOL);
    checks.push(outcome(
        "greedy marginal gains non-increasing",
        non_increasing,
        format!("{} picks", g.gains.len()),
    ));

    let mut worst = f64::INFINITY;
    let mut total = 0.0;
    for t in 0..opts.instances {
        let budget = 2 + t % 3;
        let f = FacilityLocation::random(n, 2, derive_seed(opts.seed, "suite-greedy", t as u64));
        let ratio = greedy_ratio(&f, budget)?;
        worst = worst.min(ratio);
        total += ratio;
    }
    if opts.instances > 0 {
        checks.push(outcome(
            "greedy within 1-1/e of optimum",
            worst >= GREEDY_BOUND,
            format!(
                "min ratio {:.4}, mean {:.4} over {} instances",
                worst,
                total / opts.instances as f64,
                opts.instances
            ),
        ));
    }

    let curve_instances = opts.instances.min(20);
    let curve = if curve_instances > 0 {
        let budgets: Vec<usize> = (1..=n.min(6)).chain(std::iter::once(n)).collect();
        approximation_curve(n, &budgets, curve_instances, opts.seed)?
    } else {
        Vec::new()
    };
    Ok(SuiteReport { checks, curve, warnings })
}
