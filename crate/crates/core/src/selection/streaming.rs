//! Single-pass threshold ("sieve") streaming for monotone submodular
//! objectives under a cardinality budget.
//!
//! Thresholds live on the grid `(1 + eps)^i` restricted to `[m, 2 k m]`,
//! where `m` is the best singleton value seen so far; levels are created
//! lazily as `m` grows and dropped once they fall below it. Each level keeps
//! its own candidate set and admits an element when its marginal gain is at
//! least `(v / 2 - f(S_v)) / (k - |S_v|)`. The best level is returned. This
//! yields at least `(1/2 - eps)` of the optimum.

use std::collections::BTreeMap;

use crate::embedding::Embeddings;
use crate::verify::SetFunction;

/// Incremental objective for streaming maximization.
pub trait StreamObjective {
    type State: Clone;
    /// Per-element data shared by all threshold levels.
    type Prepared;

    fn empty(&self) -> Self::State;
    fn prepare(&self, e: usize) -> Self::Prepared;
    fn gain(&self, state: &Self::State, e: usize, prep: &Self::Prepared) -> f64;
    fn add(&self, state: &mut Self::State, e: usize, prep: &Self::Prepared);
    fn value(&self, state: &Self::State) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamResult {
    /// In admission order.
    pub selected: Vec<usize>,
    pub value: f64,
    /// Most threshold levels alive at once.
    pub peak_levels: usize,
}

struct Level<S> {
    threshold: f64,
    state: S,
    members: Vec<usize>,
}

/// Runs the sieve over `stream` in order.
pub fn sieve_stream<O: StreamObjective>(obj: &O, stream: &[usize], budget: usize, epsilon: f64) -> StreamResult {
    if budget >= stream.len() {
        let mut state = obj.empty();
        for &e in stream {
            let prep = obj.prepare(e);
            obj.add(&mut state, e, &prep);
        }
        return StreamResult {
            selected: stream.to_vec(),
            value: obj.value(&state),
            peak_levels: 0,
        };
    }
    if budget == 0 {
        return StreamResult {
            selected: Vec::new(),
            value: obj.value(&obj.empty()),
            peak_levels: 0,
        };
    }
    let base = 1.0 + epsilon.max(1e-6);
    let empty = obj.empty();
    let mut best_single = 0.0f64;
    let mut levels: BTreeMap<i64, Level<O::State>> = BTreeMap::new();
    let mut peak = 0;

    for &e in stream {
        let prep = obj.prepare(e);
        best_single = best_single.max(obj.gain(&empty, e, &prep));
        if best_single <= 0.0 {
            continue;
        }
        let lo = best_single.log(base).ceil() as i64;
        let hi = (2.0 * budget as f64 * best_single).log(base).floor() as i64;
        levels.retain(|&i, _| i >= lo);
        for i in lo..=hi {
            levels.entry(i).or_insert_with(|| Level {
                threshold: base.powi(i as i32),
                state: obj.empty(),
                members: Vec::new(),
            });
        }
        peak = peak.max(levels.len());

        for level in levels.values_mut() {
            let size = level.members.len();
            if size >= budget {
                continue;
            }
            let need = (level.threshold / 2.0 - obj.value(&level.state)) / (budget - size) as f64;
            if obj.gain(&level.state, e, &prep) >= need {
                obj.add(&mut level.state, e, &prep);
                level.members.push(e);
            }
        }
    }

    let best = levels
        .into_values()
        .map(|l| (obj.value(&l.state), l.members))
        .fold(None::<(f64, Vec<usize>)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        });
    match best {
        Some((value, selected)) => StreamResult {
            selected,
            value,
            peak_levels: peak,
        },
        None => StreamResult {
            selected: Vec::new(),
            value: obj.value(&empty),
            peak_levels: peak,
        },
    }
}

/// Streams any [`SetFunction`] by re-evaluating it.
pub struct SetFunctionObjective<'a, F: SetFunction + ?Sized>(pub &'a F);

impl<F: SetFunction + ?Sized> StreamObjective for SetFunctionObjective<'_, F> {
    type State = (Vec<usize>, f64);
    type Prepared = ();

    fn empty(&self) -> Self::State {
        (Vec::new(), self.0.evaluate(&[]))
    }
    fn prepare(&self, _e: usize) {}
    fn gain(&self, state: &Self::State, e: usize, _: &()) -> f64 {
        self.0.marginal(&state.0, e)
    }
    fn add(&self, state: &mut Self::State, e: usize, _: &()) {
        state.0.push(e);
        state.1 = self.0.evaluate(&state.0);
    }
    fn value(&self, state: &Self::State) -> f64 {
        state.1 - self.0.evaluate(&[])
    }
}

/// Facility-location coverage of a ground set plus a modular score term:
///
/// `F(S) = coverage_weight * sum_x max_{s in S} sim(x, s) + sum_{s in S} modular(s)`
///
/// with RBF similarity over embeddings (sigma = median pairwise distance).
/// Elements are positions into `ground`.
pub struct WeightedCoverage<'a> {
    emb: &'a Embeddings,
    ground: Vec<usize>,
    modular: Vec<f64>,
    coverage_weight: f64,
    inv_two_sigma_sq: f64,
}

impl<'a> WeightedCoverage<'a> {
    pub fn new(emb: &'a Embeddings, ground: Vec<usize>, modular: Vec<f64>, coverage_weight: f64) -> Self {
        assert_eq!(ground.len(), modular.len(), "one modular score per ground element");
        let sigma = median_pairwise(emb, &ground).filter(|s| *s > 0.0).unwrap_or(1.0);
        Self {
            emb,
            ground,
            modular,
            coverage_weight,
            inv_two_sigma_sq: 1.0 / (2.0 * sigma * sigma),
        }
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    fn sim_row(&self, e: usize) -> Vec<f64> {
        let a = self.ground[e];
        self.ground
            .iter()
            .map(|&b| {
                let d = self.emb.distance(a, b);
                (-(d * d) * self.inv_two_sigma_sq).exp()
            })
            .collect()
    }

    /// Direct evaluation of `F` on a set of positions.
    pub fn evaluate(&self, subset: &[usize]) -> f64 {
        let mut state = self.empty();
        for &e in subset {
            let prep = self.prepare(e);
            self.add(&mut state, e, &prep);
        }
        self.value(&state)
    }
}

fn median_pairwise(emb: &Embeddings, ids: &[usize]) -> Option<f64> {
    // subsample large grounds to keep this quadratic step bounded
    let step = (ids.len() / 400).max(1);
    let sample: Vec<usize> = ids.iter().step_by(step).copied().collect();
    let mut d = Vec::with_capacity(sample.len() * sample.len() / 2);
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            d.push(emb.distance(i, j));
        }
    }
    if d.is_empty() {
        return None;
    }
    let m = d.len() / 2;
    let (_, mid, _) = d.select_nth_unstable_by(m, f64::total_cmp);
    Some(*mid)
}

#[derive(Clone, Debug)]
pub struct CoverageState {
    cover: Vec<f64>,
    coverage: f64,
    modular: f64,
}

impl StreamObjective for WeightedCoverage<'_> {
    type State = CoverageState;
    type Prepared = Vec<f64>;

    fn empty(&self) -> CoverageState {
        CoverageState {
            cover: vec![0.0; self.ground.len()],
            coverage: 0.0,
            modular: 0.0,
        }
    }

    fn prepare(&self, e: usize) -> Vec<f64> {
        self.sim_row(e)
    }

    fn gain(&self, st: &CoverageState, e: usize, row: &Vec<f64>) -> f64 {
        let cov: f64 = row.iter().zip(&st.cover).map(|(s, c)| (s - c).max(0.0)).sum();
        self.coverage_weight * cov + self.modular[e]
    }

    fn add(&self, st: &mut CoverageState, e: usize, row: &Vec<f64>) {
        for (c, &s) in st.cover.iter_mut().zip(row) {
            if s > *c {
                st.coverage += s - *c;
                *c = s;
            }
        }
        st.modular += self.modular[e];
    }

    fn value(&self, st: &CoverageState) -> f64 {
        self.coverage_weight * st.coverage + st.modular
    }
}

/// Adapter so the oracles in [`crate::verify`] can run on a coverage objective.
impl SetFunction for WeightedCoverage<'_> {
    fn ground_size(&self) -> usize {
        self.ground.len()
    }
    fn evaluate(&self, subset: &[usize]) -> f64 {
        WeightedCoverage::evaluate(self, subset)
    }
}
