// SPDX-License-Identifier: Apache-2.0

//! Scoring of inferred snapshots against ground truth, plus the network
//! analytics computed on inferred snapshots (centrality, edge-type counts).

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Edge, NodeId, RateSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotScore {
    pub time_step: i64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub mse: f64,
}

pub fn edge_set(snapshot: &RateSnapshot) -> BTreeSet<Edge> {
    snapshot.edges().collect()
}

/// `(precision, recall)` of the inferred edges; each is 1 when its
/// denominator set is empty.
pub fn precision_recall(inferred: &RateSnapshot, truth: &BTreeSet<Edge>) -> (f64, f64) {
    let hits = inferred.edges().filter(|e| truth.contains(e)).count() as f64;
    let precision = if inferred.is_empty() { 1.0 } else { hits / inferred.len() as f64 };
    let recall = if truth.is_empty() { 1.0 } else { hits / truth.len() as f64 };
    (precision, recall)
}

/// One minus the normalized symmetric difference of the two edge sets.
/// Zero when no inferred edge is a true edge.
pub fn accuracy(inferred: &RateSnapshot, truth: &RateSnapshot) -> f64 {
    let hits = inferred.edges().filter(|e| truth.contains(e)).count();
    let total = inferred.len() + truth.len();
    if hits == 0 || total == 0 {
        return 0.0;
    }
    let mismatched = total - 2 * hits;
    1.0 - mismatched as f64 / total as f64
}

/// Mean squared rate error over `support`, or over the union of both edge
/// sets when `support` is `None`. Absent rates read as 0.
pub fn mse(inferred: &RateSnapshot, truth: &RateSnapshot, support: Option<&BTreeSet<Edge>>) -> Result<f64> {
    let union;
    let support = match support {
        Some(s) => s,
        None => {
            union = inferred.edges().chain(truth.edges()).collect::<BTreeSet<_>>();
            &union
        }
    };
    if support.is_empty() {
        return Err(Error::Domain("mse support is empty".into()));
    }
    let sum: f64 = support
        .iter()
        .map(|&(s, d)| {
            let diff = truth.rate(s, d) - inferred.rate(s, d);
            diff * diff
        })
        .sum();
    Ok(sum / support.len() as f64)
}

/// All four scores for one step. MSE is 0 when both snapshots are empty.
pub fn score_snapshot(inferred: &RateSnapshot, truth: &RateSnapshot) -> SnapshotScore {
    let (precision, recall) = precision_recall(inferred, &edge_set(truth));
    SnapshotScore {
        time_step: inferred.time_step,
        precision,
        recall,
        accuracy: accuracy(inferred, truth),
        mse: mse(inferred, truth, None).unwrap_or(0.0),
    }
}

/// Path length used by centrality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Distance {
    /// Unweighted hop count.
    #[default]
    Hops,
    /// Sum of `1 / rate` along the path (expected exponential delays).
    InverseRate,
}

fn adjacency(snapshot: &RateSnapshot, nodes: usize) -> Vec<Vec<(NodeId, f64)>> {
    let mut adj = vec![Vec::new(); nodes];
    for ((s, d), r) in snapshot.iter() {
        if (s as usize) < nodes && (d as usize) < nodes {
            adj[s as usize].push((d, r));
        }
    }
    adj
}

fn harmonic_from(adj: &[Vec<(NodeId, f64)>], src: NodeId, distance: Distance) -> f64 {
    match distance {
        Distance::Hops => {
            let mut dist = vec![usize::MAX; adj.len()];
            let mut queue = VecDeque::from([src]);
            dist[src as usize] = 0;
            let mut score = 0.0;
            while let Some(u) = queue.pop_front() {
                let du = dist[u as usize];
                if du > 0 {
                    score += 1.0 / du as f64;
                }
                for &(v, _) in &adj[u as usize] {
                    if dist[v as usize] == usize::MAX {
                        dist[v as usize] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
            score
        }
        Distance::InverseRate => {
            #[derive(PartialEq)]
            struct Item(f64, NodeId);
            impl Eq for Item {}
            impl PartialOrd for Item {
                fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                    Some(self.cmp(o))
                }
            }
            impl Ord for Item {
                fn cmp(&self, o: &Self) -> Ordering {
                    self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
                }
            }
            let mut dist = vec![f64::INFINITY; adj.len()];
            let mut heap = BinaryHeap::from([Reverse(Item(0.0, src))]);
            dist[src as usize] = 0.0;
            let mut score = 0.0;
            while let Some(Reverse(Item(d, u))) = heap.pop() {
                if d > dist[u as usize] {
                    continue;
                }
                if u != src {
                    score += 1.0 / d;
                }
                for &(v, r) in &adj[u as usize] {
                    let nd = d + 1.0 / r;
                    if nd < dist[v as usize] {
                        dist[v as usize] = nd;
                        heap.push(Reverse(Item(nd, v)));
                    }
                }
            }
            score
        }
    }
}

/// Harmonic centrality of `src` over the node universe `0..nodes`:
/// the sum of `1 / d(src, r)` over every other node, unreachable ones adding 0.
pub fn harmonic_centrality(snapshot: &RateSnapshot, nodes: usize, src: NodeId, distance: Distance) -> Result<f64> {
    if src as usize >= nodes {
        return Err(Error::Domain(format!("node {src} outside node range 0..{nodes}")));
    }
    Ok(harmonic_from(&adjacency(snapshot, nodes), src, distance))
}

/// Harmonic centrality of every node in `0..nodes`.
pub fn all_harmonic_centrality(snapshot: &RateSnapshot, nodes: usize, distance: Distance) -> Vec<f64> {
    let adj = adjacency(snapshot, nodes);
    (0..nodes as NodeId).map(|s| harmonic_from(&adj, s, distance)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Media,
    Blog,
    #[default]
    Unknown,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Media => "media",
            Label::Blog => "blog",
            Label::Unknown => "unknown",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "media" => Ok(Label::Media),
            "blog" => Ok(Label::Blog),
            "unknown" | "" => Ok(Label::Unknown),
            other => Err(Error::Domain(format!("unknown node label '{other}'"))),
        }
    }
}

/// Node labels; missing nodes are [`Label::Unknown`].
pub type Labels = BTreeMap<NodeId, Label>;

fn label_of(labels: &Labels, node: NodeId) -> Label {
    labels.get(&node).copied().unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelShare {
    pub media: f64,
    pub blog: f64,
    pub unknown: f64,
}

/// The `k` most central nodes (ties by ascending id), most central first.
pub fn top_k_central(snapshot: &RateSnapshot, nodes: usize, k: usize, distance: Distance) -> Vec<(NodeId, f64)> {
    let mut scored: Vec<(NodeId, f64)> = all_harmonic_centrality(snapshot, nodes, distance)
        .into_iter()
        .enumerate()
        .map(|(n, c)| (n as NodeId, c))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Fraction of each label among the `k` most central nodes; all nodes when
/// fewer than `k` exist.
pub fn top_k_label_share(snapshot: &RateSnapshot, nodes: usize, labels: &Labels, k: usize) -> Result<LabelShare> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let top = top_k_central(snapshot, nodes, k, Distance::Hops);
    let mut share = LabelShare::default();
    if top.is_empty() {
        return Ok(share);
    }
    let unit = 1.0 / top.len() as f64;
    for (node, _) in top {
        match label_of(labels, node) {
            Label::Media => share.media += unit,
            Label::Blog => share.blog += unit,
            Label::Unknown => share.unknown += unit,
        }
    }
    Ok(share)
}

/// Edge counts by endpoint labels; any edge touching an unlabeled node
/// lands in `unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeTypeCounts {
    pub media_media: usize,
    pub media_blog: usize,
    pub blog_media: usize,
    pub blog_blog: usize,
    pub unknown: usize,
}

pub fn edge_type_counts(snapshot: &RateSnapshot, labels: &Labels) -> EdgeTypeCounts {
    let mut counts = EdgeTypeCounts::default();
    for (s, d) in snapshot.edges() {
        match (label_of(labels, s), label_of(labels, d)) {
            (Label::Media, Label::Media) => counts.media_media += 1,
            (Label::Media, Label::Blog) => counts.media_blog += 1,
            (Label::Blog, Label::Media) => counts.blog_media += 1,
            (Label::Blog, Label::Blog) => counts.blog_blog += 1,
            _ => counts.unknown += 1,
        }
    }
    counts
}

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    // The mean of a constant series need not equal its values exactly.
    if a.iter().all(|&x| x == a[0]) || b.iter().all(|&y| y == b[0]) {
        return None;
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// A switch of the true rate between zero and positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Onset(usize),
    Offset(usize),
}

/// Steps where `truth` switches between zero and positive.
pub fn transitions(truth: &[f64]) -> Vec<Transition> {
    truth
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| match (w[0] > 0.0, w[1] > 0.0) {
            (false, true) => Some(Transition::Onset(i + 1)),
            (true, false) => Some(Transition::Offset(i + 1)),
            _ => None,
        })
        .collect()
}

/// Lag, in steps, until `inferred` crosses `threshold` in the direction of
/// the transition; `None` if it never does before the series ends.
pub fn detection_lag(inferred: &[f64], transition: Transition, threshold: f64) -> Option<usize> {
    match transition {
        Transition::Onset(s) => inferred[s..].iter().position(|&r| r >= threshold),
        Transition::Offset(s) => inferred[s..].iter().position(|&r| r < threshold),
    }
}
