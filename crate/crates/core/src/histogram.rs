//! Degree-histogram backend.
//!
//! Both attachment rules give every degree-k vertex the same inclusion
//! probability, and per-vertex draws are independent, so the number of
//! selected vertices in each degree class is exactly binomial. Stepping the
//! histogram therefore costs one binomial draw per occupied class instead of
//! one Bernoulli draw per vertex.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelKind, ModelParams};
use crate::rng::{sample_binomial, SimRng};

/// Exact degree-class state of the graph at step `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeHistogram {
    /// Step index; the graph has `t + 1` vertices.
    pub t: u64,
    /// Sparse map degree -> vertex count. Empty classes are removed eagerly,
    /// except degree 0 which is kept while isolated vertices exist.
    pub counts: BTreeMap<u64, u64>,
    /// Number of edges `e_t`.
    pub edge_count: u64,
    /// Edges added by the most recent step (`a_t`).
    pub last_increment: u64,
}

/// Which attachment rule fired on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Manner {
    Preferential,
    Classical,
}

/// Record of a single step: the new vertex's degree and which pre-step
/// classes contributed.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub a: u64,
    pub per_class_selections: Vec<(u64, u64)>,
    pub manner: Manner,
}

impl DegreeHistogram {
    /// The two-vertex, one-edge starting graph.
    pub fn initial() -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(1, 2);
        Self {
            t: 1,
            counts,
            edge_count: 1,
            last_increment: 0,
        }
    }

    pub fn vertex_count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max_degree(&self) -> u64 {
        self.counts
            .iter()
            .rev()
            .find(|(_, &n)| n > 0)
            .map(|(&k, _)| k)
            .unwrap_or(0)
    }

    pub fn isolated(&self) -> u64 {
        self.counts.get(&0).copied().unwrap_or(0)
    }

    /// Validates the vertex-count and handshake identities.
    pub fn check(&self) -> Result<()> {
        let vertices = self.vertex_count();
        if vertices != self.t + 1 {
            return Err(Error::CorruptedState(format!(
                "vertex count {} != t+1 = {}",
                vertices,
                self.t + 1
            )));
        }
        let degree_sum: u64 = self.counts.iter().map(|(&k, &n)| k * n).sum();
        if degree_sum != 2 * self.edge_count {
            return Err(Error::CorruptedState(format!(
                "degree sum {} != 2e = {}",
                degree_sum,
                2 * self.edge_count
            )));
        }
        if self.max_degree() > self.t {
            return Err(Error::CorruptedState(format!(
                "max degree {} exceeds t = {}",
                self.max_degree(),
                self.t
            )));
        }
        Ok(())
    }

    fn apply_selections(&mut self, selections: &[(u64, u64)]) {
        // Selections were drawn from the pre-step snapshot; classes are
        // updated afterwards, in ascending order. Moving m vertices from k to
        // k+1 before drawing on k+1 is safe because all draws happened first.
        for &(k, m) in selections {
            if m == 0 {
                continue;
            }
            let n = self.counts.get_mut(&k).expect("selected class exists");
            *n -= m;
            if *n == 0 && k > 0 {
                self.counts.remove(&k);
            }
            *self.counts.entry(k + 1).or_insert(0) += m;
        }
    }

    fn finish_step(&mut self, a: u64) {
        *self.counts.entry(a).or_insert(0) += 1; // the new vertex, even if isolated
        if self.isolated() == 0 {
            self.counts.remove(&0);
        }
        self.edge_count += a;
        self.t += 1;
        self.last_increment = a;
    }

    /// One preferential-attachment step. Per pre-step class k, the selected
    /// count is binomial with probability `min(mu*k/(2e), 1)`.
    pub fn step_ba(&mut self, params: &ModelParams, rng: &mut SimRng) -> Result<StepOutcome> {
        self.check()?;
        let two_e = 2.0 * self.edge_count as f64;
        let mut selections = Vec::new();
        let mut a = 0;
        for (&k, &n) in &self.counts {
            if k == 0 {
                continue; // isolated vertices have selection probability 0
            }
            let p = (params.mu * k as f64 / two_e).min(1.0);
            let m = sample_binomial(rng, n, p);
            if m > 0 {
                selections.push((k, m));
                a += m;
            }
        }
        self.apply_selections(&selections);
        self.finish_step(a);
        Ok(StepOutcome {
            a,
            per_class_selections: selections,
            manner: Manner::Preferential,
        })
    }

    /// One classical step with edge-rate `rate`: every one of the
    /// `time_step = t + 1` pre-step vertices (including isolated ones)
    /// connects to the newcomer with probability `min(rate/time_step, 1)`.
    pub fn step_classical_rate(&mut self, rate: f64, rng: &mut SimRng) -> Result<StepOutcome> {
        self.check()?;
        let time_step = self.t + 1;
        let p = (rate / time_step as f64).min(1.0);
        let mut selections = Vec::new();
        let mut a = 0;
        for (&k, &n) in &self.counts {
            let m = sample_binomial(rng, n, p);
            if m > 0 {
                selections.push((k, m));
                a += m;
            }
        }
        self.apply_selections(&selections);
        self.finish_step(a);
        Ok(StepOutcome {
            a,
            per_class_selections: selections,
            manner: Manner::Classical,
        })
    }

    pub fn step_classical(&mut self, params: &ModelParams, rng: &mut SimRng) -> Result<StepOutcome> {
        self.step_classical_rate(params.zeta, rng)
    }

    /// One mixed step: preferential with probability `alpha`, classical
    /// otherwise.
    pub fn step_mixed(&mut self, params: &ModelParams, rng: &mut SimRng) -> Result<StepOutcome> {
        if rng.random::<f64>() < params.alpha {
            self.step_ba(params, rng)
        } else {
            self.step_classical(params, rng)
        }
    }

    pub fn step(
        &mut self,
        kind: ModelKind,
        params: &ModelParams,
        rng: &mut SimRng,
    ) -> Result<StepOutcome> {
        match kind {
            ModelKind::Ba => self.step_ba(params, rng),
            ModelKind::Classical => self.step_classical(params, rng),
            ModelKind::Mixed => self.step_mixed(params, rng),
            ModelKind::HardCopy => Err(Error::Unsupported(
                "hard copying needs neighbor identities; use the vertex backend".into(),
            )),
        }
    }
}

use rand::Rng;

/// What a trajectory records along the way.
#[derive(Debug, Clone, Serialize)]
pub struct ObservationPlan {
    /// Step indices at which `e_t`, `D_0(t)` and the max degree are sampled.
    pub checkpoints: Vec<u64>,
    /// Half-open window `[lo, hi)` of steps whose increments `a_t` are
    /// histogrammed.
    pub increment_window: (u64, u64),
}

impl ObservationPlan {
    /// Geometric checkpoint grid {T/16, T/8, T/4, T/2, T} and increment
    /// window [T/2, T).
    pub fn default_for(steps: u64) -> Self {
        let mut checkpoints: Vec<u64> = [16, 8, 4, 2, 1]
            .iter()
            .map(|d| (steps / d).max(1))
            .collect();
        checkpoints.dedup();
        Self {
            checkpoints,
            increment_window: (steps / 2, steps),
        }
    }
}

/// Per-checkpoint observables.
#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub t: u64,
    pub edge_count: u64,
    pub isolated: u64,
    pub max_degree: u64,
}

/// Everything a single trajectory reports back.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub t: u64,
    pub edge_count: u64,
    pub max_degree: u64,
    pub isolated: u64,
    /// Final degree counts as sorted (degree, count) pairs.
    pub final_counts: Vec<(u64, u64)>,
    pub checkpoints: Vec<Checkpoint>,
    /// Histogram of increment values `a_t` over the observation window,
    /// indexed by a.
    pub increment_counts: Vec<u64>,
    pub increment_samples: u64,
    /// Fraction of vertices in the largest component, when the backend
    /// tracks components.
    pub giant_fraction: Option<f64>,
}

pub(crate) struct ObservationRecorder {
    plan: ObservationPlan,
    pub checkpoints: Vec<Checkpoint>,
    pub increment_counts: Vec<u64>,
    pub increment_samples: u64,
    next_checkpoint: usize,
}

impl ObservationRecorder {
    pub fn new(plan: ObservationPlan) -> Self {
        Self {
            plan,
            checkpoints: Vec::new(),
            increment_counts: Vec::new(),
            increment_samples: 0,
            next_checkpoint: 0,
        }
    }

    /// Next checkpoint not yet recorded, if any. Backends whose observables
    /// are expensive to compute can skip them on non-checkpoint steps.
    pub fn peek_checkpoint(&self) -> Option<u64> {
        self.plan.checkpoints.get(self.next_checkpoint).copied()
    }

    /// Called after the step that produced state `t` with increment `a`.
    pub fn record(&mut self, t: u64, a: u64, edge_count: u64, isolated: u64, max_degree: u64) {
        let (lo, hi) = self.plan.increment_window;
        if t > lo && t <= hi {
            let idx = a as usize;
            if self.increment_counts.len() <= idx {
                self.increment_counts.resize(idx + 1, 0);
            }
            self.increment_counts[idx] += 1;
            self.increment_samples += 1;
        }
        while self.next_checkpoint < self.plan.checkpoints.len()
            && self.plan.checkpoints[self.next_checkpoint] <= t
        {
            if self.plan.checkpoints[self.next_checkpoint] == t {
                self.checkpoints.push(Checkpoint {
                    t,
                    edge_count,
                    isolated,
                    max_degree,
                });
            }
            self.next_checkpoint += 1;
        }
    }
}

/// Runs one trajectory of `steps` steps from the initial graph.
/// Deterministic for fixed (seed, params, kind, plan).
pub fn run_process(
    params: &ModelParams,
    kind: ModelKind,
    steps: u64,
    seed: u64,
    plan: &ObservationPlan,
) -> Result<TrajectorySummary> {
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut state = DegreeHistogram::initial();
    let mut rec = ObservationRecorder::new(plan.clone());
    while state.t < steps {
        let out = state.step(kind, params, &mut rng)?;
        rec.record(
            state.t,
            out.a,
            state.edge_count,
            state.isolated(),
            state.max_degree(),
        );
    }
    Ok(TrajectorySummary {
        t: state.t,
        edge_count: state.edge_count,
        max_degree: state.max_degree(),
        isolated: state.isolated(),
        final_counts: state.counts.iter().map(|(&k, &n)| (k, n)).collect(),
        checkpoints: rec.checkpoints,
        increment_counts: rec.increment_counts,
        increment_samples: rec.increment_samples,
        giant_fraction: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn initial_graph_is_one_edge() {
        let g = DegreeHistogram::initial();
        assert_eq!(g.t, 1);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count, 1);
        assert_eq!(g.max_degree(), 1);
        g.check().unwrap();
    }

    #[test]
    fn forced_triangle_at_mu_two() {
        // With mu = 2 and one edge, both probabilities are min(2*1/2, 1) = 1.
        let params = ModelParams::ba(2.0).unwrap();
        let mut g = DegreeHistogram::initial();
        let mut rng = rng_from_seed(4);
        let out = g.step_ba(&params, &mut rng).unwrap();
        assert_eq!(out.a, 2);
        assert_eq!(g.counts.get(&2), Some(&3));
        assert_eq!(g.edge_count, 3);
        g.check().unwrap();
    }

    #[test]
    fn ba_first_step_matches_enumeration() {
        // From the single edge at mu = 1 each endpoint is selected with
        // probability 1/2, so a is Binomial(2, 1/2).
        let params = ModelParams::ba(1.0).unwrap();
        let reps = 100_000u64;
        let mut hits = [0u64; 3];
        for i in 0..reps {
            let mut g = DegreeHistogram::initial();
            let mut rng = rng_from_seed(i);
            let out = g.step_ba(&params, &mut rng).unwrap();
            hits[out.a as usize] += 1;
        }
        for (a, expected) in [(0usize, 0.25), (1, 0.5), (2, 0.25)] {
            let freq = hits[a] as f64 / reps as f64;
            let se = (expected * (1.0 - expected) / reps as f64).sqrt();
            assert!(
                (freq - expected).abs() < 4.0 * se,
                "a={a}: {freq} vs {expected}"
            );
        }
    }

    #[test]
    fn classical_with_large_rate_keeps_graph_complete() {
        // min(zeta/time_step, 1) = 1 while time_step <= zeta.
        let params = ModelParams::classical(3.0).unwrap();
        let mut g = DegreeHistogram::initial();
        let mut rng = rng_from_seed(8);
        g.step_classical(&params, &mut rng).unwrap();
        assert_eq!(g.counts.get(&2), Some(&3));
        g.step_classical(&params, &mut rng).unwrap();
        assert_eq!(g.counts.get(&3), Some(&4));
        assert_eq!(g.edge_count, 6);
    }

    #[test]
    fn classical_increment_mean_approaches_rate() {
        let params = ModelParams::classical(1.0).unwrap();
        let plan = ObservationPlan::default_for(2000);
        let s = run_process(&params, ModelKind::Classical, 2000, 77, &plan).unwrap();
        let mean: f64 = s
            .increment_counts
            .iter()
            .enumerate()
            .map(|(a, &c)| a as f64 * c as f64)
            .sum::<f64>()
            / s.increment_samples as f64;
        // E[a_t] = zeta * t/(t+1) in the window; spread is ~ sqrt(zeta/n).
        assert!((mean - 1.0).abs() < 0.12, "mean increment {mean}");
    }

    #[test]
    fn hardcopy_is_rejected() {
        let params = ModelParams::new(0.5, 1.0, 1.0, 0.1).unwrap();
        let mut g = DegreeHistogram::initial();
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            g.step(ModelKind::HardCopy, &params, &mut rng),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn run_process_is_deterministic() {
        let params = ModelParams::mixed(0.5, 1.0, 1.0).unwrap();
        let plan = ObservationPlan::default_for(1000);
        let a = run_process(&params, ModelKind::Mixed, 1000, 42, &plan).unwrap();
        let b = run_process(&params, ModelKind::Mixed, 1000, 42, &plan).unwrap();
        assert_eq!(a.final_counts, b.final_counts);
        assert_eq!(a.edge_count, b.edge_count);
        assert_eq!(a.increment_counts, b.increment_counts);
        let c = run_process(&params, ModelKind::Mixed, 1000, 43, &plan).unwrap();
        assert_ne!(a.final_counts, c.final_counts);
    }

    #[test]
    fn default_plan_covers_window_and_final_step() {
        let plan = ObservationPlan::default_for(1600);
        assert_eq!(plan.checkpoints, vec![100, 200, 400, 800, 1600]);
        assert_eq!(plan.increment_window, (800, 1600));
        let tiny = ObservationPlan::default_for(2);
        assert_eq!(tiny.checkpoints, vec![1, 2]);
    }

    proptest::proptest! {
        #[test]
        fn invariants_hold_along_any_trajectory(
            seed in 0u64..200,
            steps in 2u64..60,
            kind_idx in 0usize..3,
        ) {
            let kind = [ModelKind::Ba, ModelKind::Classical, ModelKind::Mixed][kind_idx];
            let params = ModelParams::mixed(0.5, 1.5, 1.5).unwrap();
            let mut g = DegreeHistogram::initial();
            let mut rng = rng_from_seed(seed);
            for _ in 1..steps {
                let out = g.step(kind, &params, &mut rng).unwrap();
                proptest::prop_assert_eq!(out.a, g.last_increment);
                g.check().unwrap();
            }
            proptest::prop_assert_eq!(g.t, steps);
        }
    }
}
