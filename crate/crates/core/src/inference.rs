// SPDX-License-Identifier: Apache-2.0

//! Projected stochastic-gradient inference of transmission rates.
//!
//! The dynamic solver runs, for every time step, a fixed number of projected
//! SG iterations over cascades sampled from a trailing window, warm-started
//! from the previous step's estimate. Rates of nodes that never show up in
//! the sampled cascades decay geometrically by the aging factor.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cascade, Edge, NodeId, RateSnapshot, TransmissionModel};
use crate::synth::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSchedule {
    Constant,
    InvSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Uniform over the cascades in the window.
    Uniform,
    /// Probability proportional to `exp(-age / tau)`; `tau` defaults to a
    /// third of the sampling window.
    Exponential { tau: Option<f64> },
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub model: TransmissionModel,
    /// Lower bound of every feasible rate; rates at the bound are dropped from output.
    pub epsilon: f64,
    /// Aging factor applied once per time step to rates of inactive sources.
    pub rho: f64,
    pub gamma0: f64,
    pub schedule: StepSchedule,
    /// SG iterations per time step; `None` means `min(5000, 10 * window cascades)`.
    pub iterations: Option<usize>,
    /// Length `T` of the trailing sampling window `(t - T, t]`.
    pub sample_window: f64,
    pub sampling: Sampling,
    pub time_resolution: f64,
    /// Starting rate of newly feasible edges.
    pub init_rate: f64,
    pub seed: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            model: TransmissionModel::exponential(),
            epsilon: 1e-6,
            rho: 0.95,
            gamma0: 0.1,
            schedule: StepSchedule::Constant,
            iterations: None,
            sample_window: 10.0,
            sampling: Sampling::Uniform,
            time_resolution: 1.0,
            init_rate: 1e-2,
            seed: 0,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("gamma0", self.gamma0)?;
        positive("sample_window", self.sample_window)?;
        positive("time_resolution", self.time_resolution)?;
        positive("init_rate", self.init_rate)?;
        if !(self.epsilon < self.init_rate) {
            return Err(Error::Domain(format!(
                "epsilon ({}) must be below init_rate ({})",
                self.epsilon, self.init_rate
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if let Sampling::Exponential { tau: Some(tau) } = self.sampling {
            positive("tau", tau)?;
        }
        Ok(())
    }

    /// Step size of iteration `k` (1-based).
    pub fn step_size(&self, k: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.gamma0,
            StepSchedule::InvSqrt => self.gamma0 / (k.max(1) as f64).sqrt(),
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self.sampling {
            Sampling::Uniform => None,
            Sampling::Exponential { tau } => Some(tau.unwrap_or(self.sample_window / 3.0)),
        }
    }

    fn iterations_for(&self, window_cascades: usize) -> usize {
        self.iterations.unwrap_or_else(|| 5000.min(10 * window_cascades))
    }
}

/// Cascades ordered by start time, with a lazily built feasibility index.
#[derive(Debug, Default)]
pub struct CascadeStore {
    cascades: Vec<Cascade>,
    nodes: usize,
    feasible: OnceLock<HashSet<Edge>>,
}

impl CascadeStore {
    pub fn new(mut cascades: Vec<Cascade>) -> Self {
        cascades.sort_by(|a, b| a.start_time.total_cmp(&b.start_time));
        let nodes = cascades.iter().filter_map(Cascade::max_node).max().map_or(0, |m| m as usize + 1);
        Self { cascades, nodes, feasible: OnceLock::new() }
    }

    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    /// One past the largest node id seen in any cascade.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Cascades with `start_time` in `(lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> &[Cascade] {
        let begin = self.cascades.partition_point(|c| c.start_time <= lo);
        let end = self.cascades.partition_point(|c| c.start_time <= hi);
        &self.cascades[begin..end.max(begin)]
    }

    /// Whether `src` precedes `dst` in at least one stored cascade.
    pub fn is_feasible(&self, src: NodeId, dst: NodeId) -> bool {
        self.feasible_index().contains(&(src, dst))
    }

    pub fn feasible_index(&self) -> &HashSet<Edge> {
        self.feasible.get_or_init(|| {
            let mut set = HashSet::new();
            for c in &self.cascades {
                for_each_ordered_pair(c, |e| {
                    set.insert(e);
                });
            }
            set
        })
    }
}

fn for_each_ordered_pair(cascade: &Cascade, mut f: impl FnMut(Edge)) {
    let events = cascade.events();
    let mut earlier = 0;
    for ev in events {
        while events[earlier].time < ev.time {
            earlier += 1;
        }
        // events[..earlier] are strictly earlier than ev
        for p in &events[..earlier] {
            f((p.node, ev.node));
        }
    }
}

/// Ordered pairs `(j, i)` with `t_j < t_i` in some cascade starting in `(lo, hi]`.
pub fn feasible_edges(store: &CascadeStore, (lo, hi): (f64, f64)) -> BTreeSet<Edge> {
    let mut set = BTreeSet::new();
    for c in store.window(lo, hi) {
        for_each_ordered_pair(c, |e| {
            set.insert(e);
        });
    }
    set
}

/// Draws cascades from the sampling window ending at `t`.
pub struct WindowSampler<'a> {
    cascades: &'a [Cascade],
    weights: Option<WeightedIndex<f64>>,
}

impl<'a> WindowSampler<'a> {
    pub fn new(store: &'a CascadeStore, t: f64, config: &InferenceConfig) -> Result<Self> {
        let cascades = store.window(t - config.sample_window, t);
        if cascades.is_empty() {
            return Err(Error::NoData { t });
        }
        let weights = match config.tau() {
            None => None,
            Some(tau) => {
                let w = cascades.iter().map(|c| (-(t - c.start_time) / tau).exp());
                Some(WeightedIndex::new(w).map_err(|e| Error::Domain(format!("sampling weights: {e}")))?)
            }
        };
        Ok(Self { cascades, weights })
    }

    pub fn cascades(&self) -> &'a [Cascade] {
        self.cascades
    }

    pub fn sample(&self, rng: &mut impl Rng) -> &'a Cascade {
        let idx = match &self.weights {
            None => rng.gen_range(0..self.cascades.len()),
            Some(w) => w.sample(rng),
        };
        &self.cascades[idx]
    }
}

/// Samples one cascade (with replacement) from the window ending at `t`.
pub fn sample_cascade<'a>(
    store: &'a CascadeStore,
    t: f64,
    config: &InferenceConfig,
    rng: &mut impl Rng,
) -> Result<&'a Cascade> {
    Ok(WindowSampler::new(store, t, config)?.sample(rng))
}

/// Counters of one or more SG iterations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    /// Rates written by the update.
    pub updates: usize,
    /// Infected nodes whose hazard term was skipped for lack of a parent with positive hazard.
    pub skips: usize,
    /// Squared Euclidean norm of the applied rate change.
    pub norm_sq: f64,
}

/// Dense working copy of a sparse rate map, indexed by source and target.
#[derive(Debug, Clone)]
pub(crate) struct EdgeTable {
    edges: Vec<Edge>,
    rates: Vec<f64>,
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
    time_of: Vec<f64>,
    denom: Vec<f64>,
}

impl EdgeTable {
    pub(crate) fn new(nodes: usize, entries: impl IntoIterator<Item = (Edge, f64)>) -> Self {
        let (edges, rates): (Vec<Edge>, Vec<f64>) = entries.into_iter().unzip();
        let nodes = edges.iter().map(|&(s, d)| s.max(d) as usize + 1).max().unwrap_or(0).max(nodes);
        let mut out = vec![Vec::new(); nodes];
        let mut inn = vec![Vec::new(); nodes];
        for (idx, &(s, d)) in edges.iter().enumerate() {
            out[s as usize].push(idx as u32);
            inn[d as usize].push(idx as u32);
        }
        Self { edges, rates, out, inn, time_of: vec![f64::NAN; nodes], denom: vec![f64::NAN; nodes] }
    }

    fn nodes(&self) -> usize {
        self.out.len()
    }

    fn load(&mut self, cascade: &Cascade) {
        for e in cascade.events() {
            if (e.node as usize) < self.nodes() {
                self.time_of[e.node as usize] = e.time;
            }
        }
    }

    fn unload(&mut self, cascade: &Cascade) {
        for e in cascade.events() {
            if (e.node as usize) < self.nodes() {
                self.time_of[e.node as usize] = f64::NAN;
                self.denom[e.node as usize] = f64::NAN;
            }
        }
    }

    /// Fills `denom` with each non-root infected node's total hazard and
    /// returns the number of nodes left unexplained (total hazard 0).
    fn fill_hazards(&mut self, cascade: &Cascade, model: &TransmissionModel) -> usize {
        let root_time = cascade.events()[0].time;
        let mut unexplained = 0;
        for ev in cascade.events() {
            let i = ev.node as usize;
            if ev.time <= root_time || i >= self.nodes() {
                continue;
            }
            let mut total = 0.0;
            for &e in &self.inn[i] {
                let src = self.edges[e as usize].0 as usize;
                let dt = ev.time - self.time_of[src];
                // NaN (uninfected source) fails the comparison
                if dt > 0.0 {
                    if let Some(h) = model.hazard_covariate(dt) {
                        total += self.rates[e as usize] * h;
                    }
                }
            }
            if total > 0.0 {
                self.denom[i] = total;
            } else {
                unexplained += 1;
            }
        }
        unexplained
    }

    /// One projected SG update on `cascade`.
    fn step(&mut self, cascade: &Cascade, model: &TransmissionModel, gamma: f64, epsilon: f64) -> StepStats {
        let mut stats = StepStats::default();
        if cascade.is_empty() {
            return stats;
        }
        self.load(cascade);
        stats.skips = self.fill_hazards(cascade, model);
        let horizon = cascade.horizon();
        for ev in cascade.events() {
            let j = ev.node as usize;
            if j >= self.nodes() {
                continue;
            }
            for &e in &self.out[j] {
                let e = e as usize;
                let dst = self.edges[e].1 as usize;
                let t_dst = self.time_of[dst];
                let grad = if t_dst.is_nan() {
                    model.survival_covariate(horizon - ev.time).unwrap_or(0.0)
                } else if t_dst > ev.time {
                    let dt = t_dst - ev.time;
                    let survival = model.survival_covariate(dt).unwrap_or(0.0);
                    let total = self.denom[dst];
                    match model.hazard_covariate(dt) {
                        Some(h) if total > 0.0 => survival - h / total,
                        _ => survival,
                    }
                } else {
                    continue;
                };
                let old = self.rates[e];
                let new = (old - gamma * grad).max(epsilon);
                self.rates[e] = new;
                stats.updates += 1;
                stats.norm_sq += (new - old) * (new - old);
            }
        }
        self.unload(cascade);
        stats
    }

    /// Cascade negative log-likelihood, skipping unexplained hazard terms.
    fn neg_log_likelihood(&mut self, cascade: &Cascade, model: &TransmissionModel) -> (f64, usize) {
        if cascade.is_empty() {
            return (0.0, 0);
        }
        self.load(cascade);
        let skips = self.fill_hazards(cascade, model);
        let horizon = cascade.horizon();
        let mut nll = 0.0;
        for ev in cascade.events() {
            let j = ev.node as usize;
            if j >= self.nodes() {
                continue;
            }
            let total = self.denom[j];
            if total > 0.0 {
                nll -= total.ln();
            }
            for &e in &self.out[j] {
                let e = e as usize;
                let t_dst = self.time_of[self.edges[e].1 as usize];
                let dt = if t_dst.is_nan() { horizon - ev.time } else { t_dst - ev.time };
                if let Some(s) = model.survival_covariate(dt) {
                    nll += self.rates[e] * s;
                }
            }
        }
        self.unload(cascade);
        (nll, skips)
    }

    fn age(&mut self, active: &[bool], rho: f64) {
        for (e, &(src, _)) in self.edges.iter().enumerate() {
            if !active.get(src as usize).copied().unwrap_or(false) {
                self.rates[e] *= rho;
            }
        }
    }

    /// Sparse snapshot of every rate strictly above `floor`.
    fn snapshot(&self, time_step: i64, time: f64, floor: f64) -> RateSnapshot {
        let mut snap = RateSnapshot::new(time_step, time);
        for (&edge, &rate) in self.edges.iter().zip(&self.rates) {
            if rate > floor {
                snap.insert_unchecked(edge, rate);
            }
        }
        snap
    }
}

/// One projected SG iteration; returns the updated rates.
pub fn sg_step(rates: &RateSnapshot, cascade: &Cascade, config: &InferenceConfig, k: usize) -> RateSnapshot {
    sg_step_with_stats(rates, cascade, config, k).0
}

pub fn sg_step_with_stats(
    rates: &RateSnapshot,
    cascade: &Cascade,
    config: &InferenceConfig,
    k: usize,
) -> (RateSnapshot, StepStats) {
    let nodes = cascade.max_node().map_or(0, |m| m as usize + 1);
    let mut table = EdgeTable::new(nodes, rates.iter());
    let stats = table.step(cascade, &config.model, config.step_size(k), config.epsilon);
    (table.snapshot(rates.time_step, rates.time, 0.0), stats)
}

/// Multiplies every rate whose source is not in `active_sources` by `rho`.
pub fn age_unused_edges(rates: &RateSnapshot, active_sources: &HashSet<NodeId>, rho: f64) -> RateSnapshot {
    let mut aged = rates.clone();
    for (&(src, _), rate) in aged.rates_mut() {
        if !active_sources.contains(&src) {
            *rate *= rho;
        }
    }
    aged
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: i64,
    pub t: f64,
    /// Cascades in the sampling window.
    pub n_cascades: usize,
    /// Edges in the emitted snapshot.
    pub n_edges: usize,
    pub skips: usize,
    /// Mean Euclidean norm of the per-iteration rate change.
    pub step_norm: f64,
    pub iterations: usize,
    pub updates: usize,
}

fn carry_forward(prev: &RateSnapshot, step: i64, t: f64, config: &InferenceConfig) -> RateSnapshot {
    let mut next = age_unused_edges(prev, &HashSet::new(), config.rho);
    next.time_step = step;
    next.time = t;
    next.retain(|_, r| r > config.epsilon);
    next
}

/// Solves one time step: warm start from `prev`, `K` SG iterations over
/// cascades sampled from the window ending at `t`, one aging pass, then the
/// epsilon drop. An empty window carries `prev` forward with every source aged.
pub fn infer_at_time(
    store: &CascadeStore,
    step: i64,
    t: f64,
    prev: &RateSnapshot,
    config: &InferenceConfig,
) -> Result<(RateSnapshot, StepDiagnostics)> {
    config.validate()?;
    let mut diag =
        StepDiagnostics { step, t, n_cascades: 0, n_edges: 0, skips: 0, step_norm: 0.0, iterations: 0, updates: 0 };
    let sampler = match WindowSampler::new(store, t, config) {
        Ok(s) => s,
        Err(Error::NoData { .. }) => {
            let next = carry_forward(prev, step, t, config);
            diag.n_edges = next.len();
            return Ok((next, diag));
        }
        Err(e) => return Err(e),
    };
    diag.n_cascades = sampler.cascades().len();

    let feasible = feasible_edges(store, (t - config.sample_window, t));
    let mut table = EdgeTable::new(
        store.nodes(),
        feasible.into_iter().map(|e| {
            let warm = prev.rate(e.0, e.1);
            (e, if warm > 0.0 { warm.max(config.epsilon) } else { config.init_rate })
        }),
    );
    let mut active = vec![false; table.nodes()];
    let mut rng = substream(config.seed, step as u64, 0);
    let iterations = config.iterations_for(diag.n_cascades);
    let mut norm_total = 0.0;
    for k in 1..=iterations {
        let cascade = sampler.sample(&mut rng);
        for ev in cascade.events() {
            active[ev.node as usize] = true;
        }
        let stats = table.step(cascade, &config.model, config.step_size(k), config.epsilon);
        diag.skips += stats.skips;
        diag.updates += stats.updates;
        norm_total += stats.norm_sq.sqrt();
    }
    table.age(&active, config.rho);
    let next = table.snapshot(step, t, config.epsilon);
    diag.iterations = iterations;
    diag.step_norm = if iterations > 0 { norm_total / iterations as f64 } else { 0.0 };
    diag.n_edges = next.len();
    Ok((next, diag))
}

/// Output of [`infer_dynamic`].
#[derive(Debug, Clone, Default)]
pub struct DynamicResult {
    pub snapshots: Vec<RateSnapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Number of snapshots emitted for `(t_start, t_end)` at the configured resolution.
pub fn step_count(t_start: f64, t_end: f64, resolution: f64) -> usize {
    (((t_end - t_start) / resolution) - 1e-9).ceil().max(0.0) as usize
}

/// Runs [`infer_at_time`] at `t_start, t_start + res, ...` up to (excluding) `t_end`.
pub fn infer_dynamic(
    store: &CascadeStore,
    (t_start, t_end): (f64, f64),
    config: &InferenceConfig,
) -> Result<DynamicResult> {
    config.validate()?;
    if !(t_end > t_start) {
        return Err(Error::Domain(format!("empty time range ({t_start}, {t_end})")));
    }
    let steps = step_count(t_start, t_end, config.time_resolution);
    let mut out = DynamicResult::default();
    let mut prev = RateSnapshot::new(-1, t_start);
    for s in 0..steps {
        let t = t_start + s as f64 * config.time_resolution;
        let (next, diag) = infer_at_time(store, s as i64, t, &prev, config)?;
        out.diagnostics.push(diag);
        out.snapshots.push(next.clone());
        prev = next;
    }
    Ok(out)
}

/// Output of [`infer_static`].
#[derive(Debug, Clone, Default)]
pub struct StaticResult {
    pub snapshot: RateSnapshot,
    pub epochs: usize,
    pub iterations: usize,
    /// Full-data negative log-likelihood after each epoch.
    pub nll: Vec<f64>,
    pub skips: usize,
}

/// Batch inference over every stored cascade, processed in a freshly
/// shuffled order each epoch. Stops when the relative improvement of the
/// full-data likelihood falls below `tol`, or after `max_epochs`.
pub fn infer_static(
    store: &CascadeStore,
    config: &InferenceConfig,
    max_epochs: usize,
    tol: f64,
) -> Result<StaticResult> {
    infer_static_observed(store, config, max_epochs, tol, 0, |_, _| {})
}

/// [`infer_static`] that also hands the epsilon-dropped estimate to
/// `observer` every `every` iterations (never when `every` is 0).
pub fn infer_static_observed(
    store: &CascadeStore,
    config: &InferenceConfig,
    max_epochs: usize,
    tol: f64,
    every: usize,
    mut observer: impl FnMut(usize, &RateSnapshot),
) -> Result<StaticResult> {
    config.validate()?;
    if store.is_empty() {
        return Err(Error::Domain("static inference needs at least one cascade".into()));
    }
    let mut feasible: Vec<Edge> = store.feasible_index().iter().copied().collect();
    feasible.sort_unstable();
    let mut table = EdgeTable::new(store.nodes(), feasible.into_iter().map(|e| (e, config.init_rate)));
    let mut rng = substream(config.seed, u32::MAX as u64, 0);
    let mut order: Vec<usize> = (0..store.len()).collect();
    let mut result = StaticResult::default();
    let mut k = 0;
    let mut last_nll = full_nll(&mut table, store, &config.model).0;
    for _ in 0..max_epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            k += 1;
            let stats = table.step(&store.cascades()[idx], &config.model, config.step_size(k), config.epsilon);
            result.skips += stats.skips;
            if every > 0 && k % every == 0 {
                observer(k, &table.snapshot(0, 0.0, config.epsilon));
            }
        }
        result.epochs += 1;
        let nll = full_nll(&mut table, store, &config.model).0;
        result.nll.push(nll);
        let improvement = (last_nll - nll) / last_nll.abs().max(f64::MIN_POSITIVE);
        last_nll = nll;
        if improvement < tol {
            break;
        }
    }
    result.iterations = k;
    result.snapshot = table.snapshot(0, 0.0, config.epsilon);
    Ok(result)
}

fn full_nll(table: &mut EdgeTable, store: &CascadeStore, model: &TransmissionModel) -> (f64, usize) {
    store.cascades().iter().fold((0.0, 0), |(acc, skips), c| {
        let (nll, s) = table.neg_log_likelihood(c, model);
        (acc + nll, skips + s)
    })
}

/// Sum of cascade negative log-likelihoods over the store; unexplained
/// hazard terms are skipped and counted.
pub fn store_neg_log_likelihood(store: &CascadeStore, rates: &RateSnapshot, model: &TransmissionModel) -> (f64, usize) {
    let mut table = EdgeTable::new(store.nodes(), rates.iter());
    full_nll(&mut table, store, model)
}
