// SPDX-License-Identifier: Apache-2.0

//! Synthetic ground truth: Kronecker networks, time-varying edge rates and
//! continuous-time cascades simulated over them.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cascade, Edge, Event, Family, NodeId, RateSnapshot, TransmissionModel};

/// Deterministic generator for the substream `(a, b)` of `seed`.
pub(crate) fn substream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((a << 32) ^ b);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSpec {
    pub seed: [[f64; 2]; 2],
    pub iterations: u32,
    pub target_edges: usize,
}

impl KroneckerSpec {
    pub const CORE_PERIPHERY: [[f64; 2]; 2] = [[0.9, 0.5], [0.5, 0.3]];
    pub const HIERARCHICAL: [[f64; 2]; 2] = [[0.9, 0.1], [0.1, 0.9]];

    pub fn nodes(&self) -> usize {
        1usize << self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.iterations > 30 {
            return Err(Error::Domain(format!("kronecker iterations must be in 1..=30, got {}", self.iterations)));
        }
        if self.seed.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("kronecker seed entries must lie in [0, 1]".into()));
        }
        if self.seed.iter().flatten().sum::<f64>() <= 0.0 {
            return Err(Error::Domain("kronecker seed has no mass".into()));
        }
        let n = self.nodes();
        if self.target_edges == 0 || self.target_edges > n * (n - 1) {
            return Err(Error::Domain(format!(
                "target_edges must be in 1..={} for {n} nodes, got {}",
                n * (n - 1),
                self.target_edges
            )));
        }
        Ok(())
    }
}

/// Samples `target_edges` distinct non-loop edges by recursive quadrant
/// descent through the seed matrix.
pub fn generate_kronecker(spec: &KroneckerSpec, rng_seed: u64) -> Result<Vec<Edge>> {
    spec.validate()?;
    let total: f64 = spec.seed.iter().flatten().sum();
    let cumulative = [
        spec.seed[0][0] / total,
        (spec.seed[0][0] + spec.seed[0][1]) / total,
        (spec.seed[0][0] + spec.seed[0][1] + spec.seed[1][0]) / total,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let budget = 100 * spec.target_edges;
    let mut seen = HashSet::with_capacity(spec.target_edges);
    let mut edges = Vec::with_capacity(spec.target_edges);
    let mut attempts = 0;
    while edges.len() < spec.target_edges {
        if attempts == budget {
            return Err(Error::ResampleBudget { target: spec.target_edges, attempts });
        }
        attempts += 1;
        let (mut row, mut col) = (0u32, 0u32);
        for _ in 0..spec.iterations {
            let u: f64 = rng.gen();
            let quadrant = cumulative.iter().take_while(|&&c| u >= c).count();
            row = (row << 1) | (quadrant as u32 >> 1);
            col = (col << 1) | (quadrant as u32 & 1);
        }
        if row != col && seen.insert((row, col)) {
            edges.push((row, col));
        }
    }
    Ok(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Slab,
    Square,
    Chainsaw,
    Hump,
    Constant,
}

impl PatternKind {
    pub const ALL: [PatternKind; 5] =
        [PatternKind::Slab, PatternKind::Square, PatternKind::Chainsaw, PatternKind::Hump, PatternKind::Constant];

    /// Continuous patterns; the others jump at their boundaries.
    pub fn is_continuous(self) -> bool {
        matches!(self, PatternKind::Chainsaw | PatternKind::Hump | PatternKind::Constant)
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Slab => "slab",
            PatternKind::Square => "square",
            PatternKind::Chainsaw => "chainsaw",
            PatternKind::Hump => "hump",
            PatternKind::Constant => "constant",
        })
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "slab" => PatternKind::Slab,
            "square" => PatternKind::Square,
            "chainsaw" => PatternKind::Chainsaw,
            "hump" => PatternKind::Hump,
            "constant" => PatternKind::Constant,
            other => return Err(Error::Domain(format!("unknown pattern kind '{other}'"))),
        })
    }
}

/// Rate evolution of one edge over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPattern {
    pub kind: PatternKind,
    pub peak: f64,
    pub onset: f64,
    pub duration: f64,
    pub period: f64,
}

impl EvolutionPattern {
    pub fn constant(peak: f64) -> Self {
        Self { kind: PatternKind::Constant, peak, onset: 0.0, duration: 1.0, period: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.peak > 0.0
            && self.peak.is_finite()
            && self.onset.is_finite()
            && self.duration > 0.0
            && self.period > 0.0
            && self.duration.is_finite()
            && self.period.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid evolution pattern {self:?}")))
        }
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        let since = t - self.onset;
        match self.kind {
            PatternKind::Constant => self.peak,
            _ if since < 0.0 => 0.0,
            PatternKind::Slab => {
                if since < self.duration {
                    self.peak
                } else {
                    0.0
                }
            }
            PatternKind::Square => {
                if since.rem_euclid(self.period) < 0.5 * self.period {
                    self.peak
                } else {
                    0.0
                }
            }
            PatternKind::Chainsaw => {
                let phase = since.rem_euclid(self.period) / self.period;
                if phase < 0.5 {
                    self.peak * 2.0 * phase
                } else {
                    self.peak * 2.0 * (1.0 - phase)
                }
            }
            PatternKind::Hump => {
                if since < self.duration {
                    self.peak * 0.5 * (1.0 - (2.0 * PI * since / self.duration).cos())
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn pattern_rate(pattern: &EvolutionPattern, t: f64) -> f64 {
    pattern.rate_at(t)
}

/// Sampling ranges used when assigning evolution patterns to edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternConfig {
    pub peak: (f64, f64),
    /// Onsets are drawn uniformly from `[0, horizon)`.
    pub horizon: f64,
    pub duration: (f64, f64),
    pub period: (f64, f64),
    pub kinds: Vec<PatternKind>,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            peak: (0.5, 2.0),
            horizon: 200.0,
            duration: (20.0, 60.0),
            period: (20.0, 50.0),
            kinds: PatternKind::ALL.to_vec(),
        }
    }
}

impl PatternConfig {
    fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
        if !range_ok(self.peak) {
            return Err(Error::Domain(format!("invalid peak range {:?}", self.peak)));
        }
        if !range_ok(self.duration) {
            return Err(Error::Domain(format!("invalid duration range {:?}", self.duration)));
        }
        if !range_ok(self.period) {
            return Err(Error::Domain(format!("invalid period range {:?}", self.period)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::Domain(format!("invalid onset horizon {}", self.horizon)));
        }
        if self.kinds.is_empty() {
            return Err(Error::Domain("no pattern kinds to choose from".into()));
        }
        Ok(())
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Directed network whose edge rates follow evolution patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthNetwork {
    nodes: usize,
    edges: Vec<(NodeId, NodeId, EvolutionPattern)>,
}

impl GroundTruthNetwork {
    pub fn new(nodes: usize, edges: Vec<(NodeId, NodeId, EvolutionPattern)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(src, dst, ref pattern) in &edges {
            if src == dst {
                return Err(Error::Domain(format!("self-loop on node {src}")));
            }
            if src as usize >= nodes || dst as usize >= nodes {
                return Err(Error::Domain(format!("edge ({src},{dst}) outside node range 0..{nodes}")));
            }
            if !seen.insert((src, dst)) {
                return Err(Error::Domain(format!("duplicate edge ({src},{dst})")));
            }
            pattern.validate()?;
        }
        Ok(Self { nodes, edges })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(NodeId, NodeId, EvolutionPattern)] {
        &self.edges
    }

    pub fn pattern(&self, src: NodeId, dst: NodeId) -> Option<&EvolutionPattern> {
        self.edges.iter().find(|e| e.0 == src && e.1 == dst).map(|e| &e.2)
    }

    /// True rates at time `t`; edges whose rate is zero at `t` are absent.
    pub fn rates_at(&self, time_step: i64, t: f64) -> RateSnapshot {
        let mut snap = RateSnapshot::new(time_step, t);
        for &(src, dst, ref p) in &self.edges {
            let r = p.rate_at(t);
            if r > 0.0 {
                snap.insert_unchecked((src, dst), r);
            }
        }
        snap
    }

    fn adjacency_at(&self, t: f64) -> Vec<Vec<(NodeId, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(src, dst, ref p) in &self.edges {
            let r = p.rate_at(t);
            if r > 0.0 {
                adj[src as usize].push((dst, r));
            }
        }
        adj
    }
}

/// Gives every edge a pattern drawn uniformly from `config.kinds`.
pub fn assign_patterns(
    nodes: usize,
    edges: &[Edge],
    config: &PatternConfig,
    rng_seed: u64,
) -> Result<GroundTruthNetwork> {
    if edges.is_empty() {
        return Err(Error::Domain("cannot assign patterns to an empty edge list".into()));
    }
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let assigned = edges
        .iter()
        .map(|&(src, dst)| {
            let kind = config.kinds[rng.gen_range(0..config.kinds.len())];
            let peak = uniform(&mut rng, config.peak);
            let onset = uniform(&mut rng, (0.0, config.horizon));
            let duration = uniform(&mut rng, config.duration);
            let period = uniform(&mut rng, config.period);
            (src, dst, EvolutionPattern { kind, peak, onset, duration, period })
        })
        .collect();
    GroundTruthNetwork::new(nodes, assigned)
}

/// Draws a transmission delay from the model's density with rate `alpha`.
pub fn sample_delay(model: &TransmissionModel, alpha: f64, rng: &mut impl Rng) -> f64 {
    // u in (0, 1]
    let u = 1.0 - rng.gen::<f64>();
    match model.family {
        Family::Exp => -u.ln() / alpha,
        Family::Ray => (-2.0 * u.ln() / alpha).sqrt(),
        Family::Pow => model.delta * u.powf(-1.0 / alpha),
    }
}

/// Analytic mean delay of one edge; `None` when it diverges.
pub fn mean_delay(model: &TransmissionModel, alpha: f64) -> Option<f64> {
    match model.family {
        Family::Exp => Some(1.0 / alpha),
        Family::Ray => Some((PI / (2.0 * alpha)).sqrt()),
        Family::Pow if alpha > 1.0 => Some(model.delta * alpha / (alpha - 1.0)),
        Family::Pow => None,
    }
}

/// A tentative infection time proposed by `parent` for `child`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tentative {
    pub parent: NodeId,
    pub child: NodeId,
    pub time: f64,
}

#[derive(PartialEq)]
struct Pending(f64, NodeId);

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn run_cascade(
    adj: &[Vec<(NodeId, f64)>],
    model: &TransmissionModel,
    root: NodeId,
    window: f64,
    rng: &mut impl Rng,
    mut trace: Option<&mut Vec<Tentative>>,
) -> Vec<Event> {
    let mut infected = vec![false; adj.len()];
    let mut events = Vec::new();
    let mut queue = BinaryHeap::new();
    queue.push(Reverse(Pending(0.0, root)));
    while let Some(Reverse(Pending(t, node))) = queue.pop() {
        if std::mem::replace(&mut infected[node as usize], true) {
            continue;
        }
        events.push(Event { node, time: t });
        for &(child, alpha) in &adj[node as usize] {
            if infected[child as usize] {
                continue;
            }
            let at = t + sample_delay(model, alpha, rng);
            if let Some(log) = trace.as_deref_mut() {
                log.push(Tentative { parent: node, child, time: at });
            }
            if at <= window {
                queue.push(Reverse(Pending(at, child)));
            }
        }
    }
    events
}

fn check_root(net: &GroundTruthNetwork, root: NodeId, window: f64) -> Result<()> {
    if root as usize >= net.nodes {
        return Err(Error::Domain(format!("root {root} outside node range 0..{}", net.nodes)));
    }
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::Domain(format!("window must be positive, got {window}")));
    }
    Ok(())
}

/// Simulates one cascade with rates frozen at their values at `t_step`.
/// Times are relative to the root, which is infected at 0.
pub fn simulate_cascade(
    net: &GroundTruthNetwork,
    model: &TransmissionModel,
    t_step: f64,
    root: NodeId,
    window: f64,
    rng_seed: u64,
) -> Result<Cascade> {
    check_root(net, root, window)?;
    let adj = net.adjacency_at(t_step);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let events = run_cascade(&adj, model, root, window, &mut rng, None);
    Cascade::new(format!("sim{rng_seed}"), 0.0, window, events)
}

/// Like [`simulate_cascade`], also returning every tentative infection drawn.
pub fn simulate_cascade_traced(
    net: &GroundTruthNetwork,
    model: &TransmissionModel,
    t_step: f64,
    root: NodeId,
    window: f64,
    rng_seed: u64,
) -> Result<(Cascade, Vec<Tentative>)> {
    check_root(net, root, window)?;
    let adj = net.adjacency_at(t_step);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut trace = Vec::new();
    let events = run_cascade(&adj, model, root, window, &mut rng, Some(&mut trace));
    Ok((Cascade::new(format!("sim{rng_seed}"), 0.0, window, events)?, trace))
}

/// Generates `per_step` cascades for each integer time step in `0..horizon`,
/// each rooted at a uniformly random node and starting at its step.
pub fn generate_cascade_set(
    net: &GroundTruthNetwork,
    model: &TransmissionModel,
    horizon: usize,
    per_step: usize,
    window: f64,
    rng_seed: u64,
) -> Result<Vec<Cascade>> {
    if per_step == 0 {
        return Err(Error::Domain("per_step must be at least 1".into()));
    }
    if net.nodes == 0 {
        return Err(Error::Domain("network has no nodes".into()));
    }
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::Domain(format!("window must be positive, got {window}")));
    }
    let n = net.nodes as NodeId;
    let per_step_sets: Vec<Result<Vec<Cascade>>> = (0..horizon)
        .into_par_iter()
        .map(|step| {
            let t = step as f64;
            let adj = net.adjacency_at(t);
            (0..per_step)
                .map(|idx| {
                    let mut rng = substream(rng_seed, step as u64, idx as u64);
                    let root = rng.gen_range(0..n);
                    let mut events = run_cascade(&adj, model, root, window, &mut rng, None);
                    for e in &mut events {
                        e.time += t;
                    }
                    Cascade::new(format!("s{step}c{idx}"), t, window, events)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(horizon * per_step);
    for set in per_step_sets {
        out.extend(set?);
    }
    Ok(out)
}
