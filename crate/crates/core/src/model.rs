// SPDX-License-Identifier: Apache-2.0

//! Pairwise transmission likelihoods and cascade log-likelihoods.
//!
//! Every supported family has the multiplicative form
//!
//! ```text
//! log S(t_i | t_j; a) = -a * s(dt)      H(t_i | t_j; a) = a * h(dt)
//! ```
//!
//! where `s` and `h` are the survival and hazard covariates of the pair. The
//! negative log-likelihood of a cascade is therefore linear in the rates plus
//! a sum of `-log` terms of linear forms, which is what makes it convex and
//! what gives the gradient its closed form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier. Node universes are `0..n`.
pub type NodeId = u32;

/// Directed edge `(src, dst)`.
pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exp,
    Pow,
    Ray,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Exp => "exp",
            Family::Pow => "pow",
            Family::Ray => "ray",
        };
        f.write_str(name)
    }
}

/// Parametric family of the edge transmission likelihood.
///
/// `delta` is the minimum transmission delay of the power-law family and is
/// ignored for the other two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionModel {
    pub family: Family,
    pub delta: f64,
}

impl TransmissionModel {
    pub fn exponential() -> Self {
        Self { family: Family::Exp, delta: 1.0 }
    }

    pub fn rayleigh() -> Self {
        Self { family: Family::Ray, delta: 1.0 }
    }

    pub fn power_law(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("power-law delta must be positive, got {delta}")));
        }
        Ok(Self { family: Family::Pow, delta })
    }

    pub fn new(family: Family, delta: Option<f64>) -> Result<Self> {
        match family {
            Family::Exp => Ok(Self::exponential()),
            Family::Ray => Ok(Self::rayleigh()),
            Family::Pow => match delta {
                Some(d) => Self::power_law(d),
                None => Err(Error::Domain("power-law model requires delta".into())),
            },
        }
    }

    /// Whether a pair separated by `dt` can transmit at all.
    #[inline]
    pub fn admits(&self, dt: f64) -> bool {
        match self.family {
            Family::Pow => dt > self.delta,
            _ => dt > 0.0,
        }
    }

    /// `-log S / alpha` for a pair separated by `dt`; `None` outside the support.
    #[inline]
    pub fn survival_covariate(&self, dt: f64) -> Option<f64> {
        if !self.admits(dt) {
            return None;
        }
        Some(match self.family {
            Family::Exp => dt,
            Family::Pow => (dt / self.delta).ln(),
            Family::Ray => 0.5 * dt * dt,
        })
    }

    /// `H / alpha` for a pair separated by `dt`; `None` outside the support.
    #[inline]
    pub fn hazard_covariate(&self, dt: f64) -> Option<f64> {
        if !self.admits(dt) {
            return None;
        }
        Some(match self.family {
            Family::Exp => 1.0,
            Family::Pow => 1.0 / dt,
            Family::Ray => dt,
        })
    }

    fn check_pair(&self, t_src: f64, t_dst: f64, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("rate must be non-negative, got {alpha}")));
        }
        let dt = t_dst - t_src;
        if !self.admits(dt) {
            return Err(Error::Domain(match self.family {
                Family::Pow => {
                    format!("power-law pair needs t_dst > t_src + delta ({t_dst} <= {t_src} + {})", self.delta)
                }
                _ => format!("pair needs t_dst > t_src ({t_dst} <= {t_src})"),
            }));
        }
        Ok(dt)
    }

    pub fn log_survival(&self, t_src: f64, t_dst: f64, alpha: f64) -> Result<f64> {
        let dt = self.check_pair(t_src, t_dst, alpha)?;
        Ok(-alpha * self.survival_covariate(dt).unwrap_or(0.0))
    }

    pub fn hazard(&self, t_src: f64, t_dst: f64, alpha: f64) -> Result<f64> {
        let dt = self.check_pair(t_src, t_dst, alpha)?;
        Ok(alpha * self.hazard_covariate(dt).unwrap_or(0.0))
    }

    /// Transmission density `f(t_dst | t_src; alpha)`, zero outside the support.
    pub fn transmission_density(&self, t_src: f64, t_dst: f64, alpha: f64) -> f64 {
        let dt = t_dst - t_src;
        if !self.admits(dt) {
            return 0.0;
        }
        match self.family {
            Family::Exp => alpha * (-alpha * dt).exp(),
            Family::Pow => alpha / self.delta * (dt / self.delta).powf(-1.0 - alpha),
            Family::Ray => alpha * dt * (-0.5 * alpha * dt * dt).exp(),
        }
    }

    /// Gradient of the cascade negative log-likelihood with respect to an
    /// edge whose target stayed uninfected until `horizon`. Independent of
    /// the rate.
    pub fn grad_edge_uninfected(&self, t_src: f64, horizon: f64) -> Result<f64> {
        let dt = horizon - t_src;
        match self.family {
            Family::Pow if dt <= self.delta => Err(Error::Domain(format!(
                "power-law horizon must exceed t_src + delta ({horizon} <= {t_src} + {})",
                self.delta
            ))),
            _ if dt < 0.0 => Err(Error::Domain(format!("horizon {horizon} precedes source time {t_src}"))),
            _ => Ok(self.survival_covariate(dt).unwrap_or(0.0)),
        }
    }
}

/// One infection event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub node: NodeId,
    pub time: f64,
}

/// Infection record of one contagion over the observation window
/// `[start_time, start_time + window]`. Nodes without an event are uninfected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub id: String,
    pub start_time: f64,
    pub window: f64,
    events: Vec<Event>,
}

impl Cascade {
    /// Validates ordering, uniqueness and the window bounds.
    pub fn new(id: impl Into<String>, start_time: f64, window: f64, events: Vec<Event>) -> Result<Self> {
        let id = id.into();
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::Domain(format!("cascade {id}: window must be positive, got {window}")));
        }
        if !start_time.is_finite() {
            return Err(Error::Domain(format!("cascade {id}: start time must be finite")));
        }
        let horizon = start_time + window;
        let mut seen = std::collections::HashSet::with_capacity(events.len());
        let mut prev = f64::NEG_INFINITY;
        for e in &events {
            if !(e.time >= prev) {
                return Err(Error::Domain(format!("cascade {id}: event times must be non-decreasing")));
            }
            if e.time < start_time || e.time > horizon {
                return Err(Error::Domain(format!(
                    "cascade {id}: event time {} outside [{start_time}, {horizon}]",
                    e.time
                )));
            }
            if !seen.insert(e.node) {
                return Err(Error::Domain(format!("cascade {id}: node {} infected twice", e.node)));
            }
            prev = e.time;
        }
        Ok(Self { id, start_time, window, events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// End of the observation window.
    pub fn horizon(&self) -> f64 {
        self.start_time + self.window
    }

    pub fn infection_time(&self, node: NodeId) -> Option<f64> {
        self.events.iter().find(|e| e.node == node).map(|e| e.time)
    }

    /// Time of the earliest event; nodes infected at this time are roots.
    pub fn root_time(&self) -> Option<f64> {
        self.events.first().map(|e| e.time)
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.events.iter().map(|e| e.node).max()
    }
}

/// Sparse transmission rates at one time step. A missing key means rate 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateSnapshot {
    pub time_step: i64,
    pub time: f64,
    rates: BTreeMap<Edge, f64>,
}

impl RateSnapshot {
    pub fn new(time_step: i64, time: f64) -> Self {
        Self { time_step, time, rates: BTreeMap::new() }
    }

    /// Builds a snapshot, dropping zero rates and rejecting negatives and self-loops.
    pub fn from_rates(time_step: i64, time: f64, rates: impl IntoIterator<Item = (Edge, f64)>) -> Result<Self> {
        let mut snap = Self::new(time_step, time);
        for (edge, rate) in rates {
            snap.set(edge, rate)?;
        }
        Ok(snap)
    }

    pub fn set(&mut self, (src, dst): Edge, rate: f64) -> Result<()> {
        if src == dst {
            return Err(Error::Domain(format!("self-loop on node {src}")));
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!("rate of ({src},{dst}) must be non-negative, got {rate}")));
        }
        if rate == 0.0 {
            self.rates.remove(&(src, dst));
        } else {
            self.rates.insert((src, dst), rate);
        }
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, edge: Edge, rate: f64) {
        debug_assert!(edge.0 != edge.1 && rate > 0.0);
        self.rates.insert(edge, rate);
    }

    pub fn rate(&self, src: NodeId, dst: NodeId) -> f64 {
        self.rates.get(&(src, dst)).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.rates.contains_key(edge)
    }

    /// Edges in `(src, dst)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.rates.iter().map(|(&e, &r)| (e, r))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.rates.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.rates.keys().map(|&(s, d)| s.max(d)).max()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(Edge, f64) -> bool) {
        self.rates.retain(|&e, &mut r| keep(e, r));
    }

    pub(crate) fn rates_mut(&mut self) -> impl Iterator<Item = (&Edge, &mut f64)> {
        self.rates.iter_mut()
    }
}

pub fn log_survival(model: &TransmissionModel, t_src: f64, t_dst: f64, alpha: f64) -> Result<f64> {
    model.log_survival(t_src, t_dst, alpha)
}

pub fn hazard(model: &TransmissionModel, t_src: f64, t_dst: f64, alpha: f64) -> Result<f64> {
    model.hazard(t_src, t_dst, alpha)
}

pub fn transmission_density(model: &TransmissionModel, t_src: f64, t_dst: f64, alpha: f64) -> f64 {
    model.transmission_density(t_src, t_dst, alpha)
}

pub fn grad_edge_uninfected(model: &TransmissionModel, t_src: f64, horizon: f64) -> Result<f64> {
    model.grad_edge_uninfected(t_src, horizon)
}

/// Total hazard of `dst` at time `t`: the sum of pairwise hazards over all
/// nodes infected strictly before `t` that hold a rate into `dst`.
pub fn node_total_hazard(
    cascade: &Cascade,
    dst: NodeId,
    t: f64,
    rates: &RateSnapshot,
    model: &TransmissionModel,
) -> f64 {
    cascade
        .events()
        .iter()
        .take_while(|e| e.time < t)
        .filter(|e| e.node != dst)
        .filter_map(|e| {
            let alpha = rates.rate(e.node, dst);
            if alpha == 0.0 {
                return None;
            }
            model.hazard_covariate(t - e.time).map(|h| alpha * h)
        })
        .sum()
}

/// Negative log-likelihood of a cascade under `rates`.
///
/// Only stored rates contribute. An infected node that has earlier-infected
/// nodes but zero total hazard makes the likelihood zero; that case is
/// reported as [`Error::UnexplainedInfection`].
pub fn cascade_neg_log_likelihood(cascade: &Cascade, rates: &RateSnapshot, model: &TransmissionModel) -> Result<f64> {
    if cascade.is_empty() {
        return Err(Error::Domain(format!("cascade {} has no events", cascade.id)));
    }
    let events = cascade.events();
    let root_time = events[0].time;
    let horizon = cascade.horizon();
    let infected: std::collections::HashSet<NodeId> = events.iter().map(|e| e.node).collect();
    let mut nll = 0.0;

    for (idx, ev) in events.iter().enumerate() {
        if ev.time > root_time {
            let mut total_hazard = 0.0;
            for parent in events[..idx].iter().take_while(|p| p.time < ev.time) {
                let alpha = rates.rate(parent.node, ev.node);
                if alpha == 0.0 {
                    continue;
                }
                let dt = ev.time - parent.time;
                if let (Some(s), Some(h)) = (model.survival_covariate(dt), model.hazard_covariate(dt)) {
                    nll += alpha * s;
                    total_hazard += alpha * h;
                }
            }
            if total_hazard <= 0.0 {
                return Err(Error::UnexplainedInfection { cascade: cascade.id.clone(), node: ev.node });
            }
            nll -= total_hazard.ln();
        }
        // survival of every rated uninfected target up to the horizon
        for ((_, dst), alpha) in rates.rates.range((ev.node, 0)..=(ev.node, NodeId::MAX)) {
            if infected.contains(dst) {
                continue;
            }
            if let Some(s) = model.survival_covariate(horizon - ev.time) {
                nll += alpha * s;
            }
        }
    }
    Ok(nll)
}

/// Gradient of the cascade negative log-likelihood with respect to the rate
/// of an edge whose endpoints are both infected, `src` strictly first.
pub fn grad_edge_infected(
    model: &TransmissionModel,
    cascade: &Cascade,
    src: NodeId,
    dst: NodeId,
    rates: &RateSnapshot,
) -> Result<f64> {
    let t_src = cascade
        .infection_time(src)
        .ok_or_else(|| Error::Domain(format!("node {src} not infected in cascade {}", cascade.id)))?;
    let t_dst = cascade
        .infection_time(dst)
        .ok_or_else(|| Error::Domain(format!("node {dst} not infected in cascade {}", cascade.id)))?;
    if !(t_src < t_dst) {
        return Err(Error::Domain(format!("node {src} must be infected before node {dst}")));
    }
    let dt = t_dst - t_src;
    let (Some(s), Some(h)) = (model.survival_covariate(dt), model.hazard_covariate(dt)) else {
        return Ok(0.0);
    };
    let total = node_total_hazard(cascade, dst, t_dst, rates, model);
    if total <= 0.0 {
        return Err(Error::UnexplainedInfection { cascade: cascade.id.clone(), node: dst });
    }
    Ok(s - h / total)
}

/// Full gradient of the cascade negative log-likelihood over the stored
/// edges of `rates`, assembled from the infected and uninfected columns.
/// Edges with zero gradient are omitted.
pub fn cascade_gradient(
    cascade: &Cascade,
    rates: &RateSnapshot,
    model: &TransmissionModel,
) -> Result<BTreeMap<Edge, f64>> {
    let horizon = cascade.horizon();
    let mut grad = BTreeMap::new();
    for ((src, dst), _) in rates.iter() {
        let Some(t_src) = cascade.infection_time(src) else {
            continue;
        };
        let g = match cascade.infection_time(dst) {
            None => model.survival_covariate(horizon - t_src).unwrap_or(0.0),
            Some(t_dst) if t_dst > t_src => grad_edge_infected(model, cascade, src, dst, rates)?,
            Some(_) => 0.0,
        };
        if g != 0.0 {
            grad.insert((src, dst), g);
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn cascade(events: &[(NodeId, f64)], window: f64) -> Cascade {
        let events = events.iter().map(|&(node, time)| Event { node, time }).collect();
        Cascade::new("c", 0.0, window, events).unwrap()
    }

    #[test]
    fn log_survival_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        let pow = TransmissionModel::power_law(1.0).unwrap();
        assert_relative_eq!(exp.log_survival(1.0, 3.0, 0.5).unwrap(), -1.0);
        assert_relative_eq!(ray.log_survival(0.0, 3.0, 2.0).unwrap(), -9.0);
        assert_relative_eq!(pow.log_survival(0.0, E, 2.0).unwrap(), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn log_survival_rejects_bad_order() {
        let exp = TransmissionModel::exponential();
        assert!(exp.log_survival(3.0, 1.0, 0.5).is_err());
        assert!(exp.log_survival(1.0, 1.0, 0.5).is_err());
        let pow = TransmissionModel::power_law(1.0).unwrap();
        assert!(pow.log_survival(0.0, 0.5, 1.0).is_err());
        assert!(exp.log_survival(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn hazard_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        let pow = TransmissionModel::power_law(1.0).unwrap();
        assert_eq!(exp.hazard(0.0, 5.0, 0.7).unwrap(), 0.7);
        assert_eq!(exp.hazard(2.0, 2.5, 0.7).unwrap(), 0.7);
        assert_relative_eq!(ray.hazard(0.0, 3.0, 2.0).unwrap(), 6.0);
        assert_relative_eq!(pow.hazard(0.0, 4.0, 2.0).unwrap(), 0.5);
        assert_eq!(ray.hazard(0.0, 3.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn density_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        assert_relative_eq!(exp.transmission_density(0.0, 1.0, 1.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(exp.transmission_density(2.0, 1.0, 1.0), 0.0);
        assert_relative_eq!(ray.transmission_density(0.0, 1.0, 1.0), (-0.5f64).exp(), epsilon = 1e-15);
        let pow = TransmissionModel::power_law(1.0).unwrap();
        assert_eq!(pow.transmission_density(0.0, 0.5, 1.0), 0.0);
    }

    #[test]
    fn uninfected_gradient_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        let pow = TransmissionModel::power_law(1.0).unwrap();
        assert_relative_eq!(exp.grad_edge_uninfected(0.5, 2.0).unwrap(), 1.5);
        assert_relative_eq!(ray.grad_edge_uninfected(0.0, 2.0).unwrap(), 2.0);
        assert_relative_eq!(pow.grad_edge_uninfected(0.0, E).unwrap(), 1.0, epsilon = 1e-12);
        assert!(exp.grad_edge_uninfected(3.0, 2.0).is_err());
        assert!(pow.grad_edge_uninfected(0.0, 0.5).is_err());
    }

    #[test]
    fn pow_requires_delta() {
        assert!(TransmissionModel::new(Family::Pow, None).is_err());
        assert!(TransmissionModel::power_law(0.0).is_err());
        assert!(TransmissionModel::new(Family::Exp, None).is_ok());
    }

    #[test]
    fn nll_two_nodes() {
        let exp = TransmissionModel::exponential();
        let c = cascade(&[(0, 0.0), (1, 1.0)], 2.0);
        let rates = RateSnapshot::from_rates(0, 0.0, [((0, 1), 1.0)]).unwrap();
        assert_relative_eq!(cascade_neg_log_likelihood(&c, &rates, &exp).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nll_with_uninfected_node() {
        let exp = TransmissionModel::exponential();
        let c = cascade(&[(0, 0.0), (1, 1.0)], 2.0);
        let rates = RateSnapshot::from_rates(0, 0.0, [((0, 1), 1.0), ((1, 2), 1.0), ((0, 2), 1.0)]).unwrap();
        assert_relative_eq!(cascade_neg_log_likelihood(&c, &rates, &exp).unwrap(), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn nll_root_only() {
        let exp = TransmissionModel::exponential();
        let c = cascade(&[(3, 0.0)], 2.0);
        assert_eq!(cascade_neg_log_likelihood(&c, &RateSnapshot::default(), &exp).unwrap(), 0.0);
    }

    #[test]
    fn nll_unexplained_infection() {
        let exp = TransmissionModel::exponential();
        let c = cascade(&[(0, 0.0), (1, 1.0)], 2.0);
        let err = cascade_neg_log_likelihood(&c, &RateSnapshot::default(), &exp).unwrap_err();
        assert!(matches!(err, Error::UnexplainedInfection { node: 1, .. }));
    }

    #[test]
    fn infected_gradient_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        let one = RateSnapshot::from_rates(0, 0.0, [((0, 1), 1.0)]).unwrap();
        let c1 = cascade(&[(0, 0.0), (1, 1.0)], 5.0);
        let c2 = cascade(&[(0, 0.0), (1, 2.0)], 5.0);
        assert_eq!(grad_edge_infected(&exp, &c1, 0, 1, &one).unwrap(), 0.0);
        assert_relative_eq!(grad_edge_infected(&exp, &c2, 0, 1, &one).unwrap(), 1.0);
        let quarter = RateSnapshot::from_rates(0, 0.0, [((0, 1), 0.25)]).unwrap();
        assert_relative_eq!(grad_edge_infected(&ray, &c2, 0, 1, &quarter).unwrap(), -2.0);
        let err = grad_edge_infected(&exp, &c2, 0, 1, &RateSnapshot::default()).unwrap_err();
        assert!(matches!(err, Error::UnexplainedInfection { .. }));
        assert!(grad_edge_infected(&exp, &c2, 1, 0, &one).is_err());
    }

    #[test]
    fn total_hazard_values() {
        let exp = TransmissionModel::exponential();
        let ray = TransmissionModel::rayleigh();
        let c = cascade(&[(0, 0.0), (1, 1.0), (2, 2.0)], 5.0);
        assert_eq!(node_total_hazard(&c, 0, 0.0, &RateSnapshot::default(), &exp), 0.0);
        let r = RateSnapshot::from_rates(0, 0.0, [((0, 2), 0.3), ((1, 2), 0.7)]).unwrap();
        assert_relative_eq!(node_total_hazard(&c, 2, 2.0, &r, &exp), 1.0);
        let r = RateSnapshot::from_rates(0, 0.0, [((0, 2), 1.0), ((1, 2), 1.0)]).unwrap();
        assert_relative_eq!(node_total_hazard(&c, 2, 2.0, &r, &ray), 3.0);
    }

    #[test]
    fn snapshot_rejects_self_loops_and_drops_zeros() {
        let mut s = RateSnapshot::default();
        assert!(s.set((1, 1), 1.0).is_err());
        assert!(s.set((1, 2), -1.0).is_err());
        s.set((1, 2), 1.0).unwrap();
        s.set((1, 2), 0.0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn cascade_validation() {
        let ev = |n, t| Event { node: n, time: t };
        assert!(Cascade::new("a", 0.0, 1.0, vec![ev(0, 0.5), ev(1, 0.2)]).is_err());
        assert!(Cascade::new("a", 0.0, 1.0, vec![ev(0, 0.0), ev(0, 0.2)]).is_err());
        assert!(Cascade::new("a", 0.0, 1.0, vec![ev(0, 0.0), ev(1, 1.5)]).is_err());
        assert!(Cascade::new("a", 0.0, 0.0, vec![ev(0, 0.0)]).is_err());
        assert!(Cascade::new("a", 1.0, 1.0, vec![ev(0, 1.0), ev(1, 2.0)]).is_ok());
    }
}
