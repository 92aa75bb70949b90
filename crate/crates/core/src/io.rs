// SPDX-License-Identifier: Apache-2.0

//! Plain-text file formats: cascades, ground truth, snapshot series and the
//! CSV outputs of evaluation and analysis.
//!
//! Cascade file:
//!
//! ```text
//! 0,nytimes.com,media
//! 1,someblog.net,blog
//!
//! c1;0;0,0,1,1.5
//! c2;3;10;1,3,0,4.25
//! ```
//!
//! Node lines are `id,name[,label]`, then one blank line, then one record per
//! cascade: `id;start_time[;window];node,time,node,time,...`. Records without
//! a window use the reader's default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{EdgeTypeCounts, Label, Labels, SnapshotScore};
use crate::inference::{InferenceConfig, StepDiagnostics};
use crate::model::{Cascade, Event, NodeId, RateSnapshot};
use crate::synth::{EvolutionPattern, GroundTruthNetwork};

/// Rates are written with 9 significant digits.
pub fn format_rate(rate: f64) -> String {
    format!("{rate:.8e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn number<T: std::str::FromStr>(field: &str, what: &str, origin: &str, line: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::parse(origin, line, format!("invalid {what} '{field}'")))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeTable {
    pub names: BTreeMap<NodeId, String>,
    pub labels: Labels,
}

impl NodeTable {
    /// Nodes named `n<id>` for `0..n`, unlabeled.
    pub fn anonymous(n: usize) -> Self {
        Self { names: (0..n as NodeId).map(|i| (i, format!("n{i}"))).collect(), labels: Labels::new() }
    }

    /// Size of the node universe `0..=max id`.
    pub fn universe(&self) -> usize {
        self.names.keys().next_back().map_or(0, |&m| m as usize + 1)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CascadeFile {
    pub nodes: NodeTable,
    pub cascades: Vec<Cascade>,
    pub warnings: Vec<String>,
}

pub fn parse_cascade_file(path: &Path, default_window: f64) -> Result<CascadeFile> {
    parse_cascades(&read(path)?, &path.display().to_string(), default_window)
}

/// Parses cascade-file text; `origin` names the source in errors.
pub fn parse_cascades(text: &str, origin: &str, default_window: f64) -> Result<CascadeFile> {
    let mut out = CascadeFile::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    for (ln, line) in lines.by_ref() {
        if line.trim().is_empty() {
            break;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(origin, ln, "node line must be 'id,name[,label]'"));
        }
        let id: NodeId = number(fields[0], "node id", origin, ln)?;
        if out.nodes.names.insert(id, fields[1].trim().to_string()).is_some() {
            return Err(Error::parse(origin, ln, format!("node {id} declared twice")));
        }
        if let Some(label) = fields.get(2) {
            let label: Label = label.trim().parse().map_err(|e: Error| Error::parse(origin, ln, e.to_string()))?;
            out.nodes.labels.insert(id, label);
        }
    }

    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        let (id, start, window, body) = match parts.as_slice() {
            [id, start, body] => (id, number::<f64>(start, "start time", origin, ln)?, default_window, body),
            [id, start, window, body] => (
                id,
                number::<f64>(start, "start time", origin, ln)?,
                number::<f64>(window, "window", origin, ln)?,
                body,
            ),
            _ => return Err(Error::parse(origin, ln, "cascade line must be 'id;start[;window];events'")),
        };
        let fields: Vec<&str> = body.split(',').collect();
        if !fields.len().is_multiple_of(2) || body.trim().is_empty() {
            return Err(Error::parse(origin, ln, "events must be node,time pairs"));
        }
        let mut events = Vec::with_capacity(fields.len() / 2);
        let mut last = f64::NEG_INFINITY;
        for pair in fields.chunks(2) {
            let node: NodeId = number(pair[0], "node id", origin, ln)?;
            let time: f64 = number(pair[1], "time", origin, ln)?;
            if !out.nodes.names.contains_key(&node) {
                return Err(Error::parse(origin, ln, format!("undeclared node {node}")));
            }
            if time < last {
                return Err(Error::parse(origin, ln, format!("time {time} of node {node} decreases")));
            }
            last = time;
            if events.iter().any(|e: &Event| e.node == node) {
                out.warnings.push(format!("{origin}:{ln}: node {node} repeated in cascade {id}, keeping first"));
                continue;
            }
            events.push(Event { node, time });
        }
        let cascade =
            Cascade::new(id.trim(), start, window, events).map_err(|e| Error::parse(origin, ln, e.to_string()))?;
        out.cascades.push(cascade);
    }
    Ok(out)
}

/// Serializes cascades with explicit windows; times use the shortest
/// round-trip decimal.
pub fn format_cascades(nodes: &NodeTable, cascades: &[Cascade]) -> String {
    let mut s = String::new();
    for (id, name) in &nodes.names {
        match nodes.labels.get(id) {
            Some(label) if *label != Label::Unknown => writeln!(s, "{id},{name},{label}").unwrap(),
            _ => writeln!(s, "{id},{name}").unwrap(),
        }
    }
    s.push('\n');
    for c in cascades {
        write!(s, "{};{};{};", c.id, c.start_time, c.window).unwrap();
        for (i, e) in c.events().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{},{}", e.node, e.time).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_cascade_file(path: &Path, nodes: &NodeTable, cascades: &[Cascade]) -> Result<()> {
    write_text(path, &format_cascades(nodes, cascades))
}

pub fn write_ground_truth(path: &Path, net: &GroundTruthNetwork) -> Result<()> {
    let mut s = format!("N,{}\n", net.nodes());
    for (src, dst, p) in net.edges() {
        writeln!(s, "{src},{dst},{},{},{},{},{}", p.kind, p.peak, p.onset, p.period, p.duration).unwrap();
    }
    write_text(path, &s)
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruthNetwork> {
    let origin = path.display().to_string();
    let text = read(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let nodes: usize = match lines.next() {
        Some((ln, header)) => match header.split_once(',') {
            Some(("N", n)) => number(n, "node count", &origin, ln)?,
            _ => return Err(Error::parse(&origin, ln, "header must be 'N,<node_count>'")),
        },
        None => return Err(Error::parse(&origin, 1, "empty ground-truth file")),
    };
    let mut edges = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::parse(&origin, ln, "edge line must be 'src,dst,kind,peak,onset,period,duration'"));
        }
        let pattern = EvolutionPattern {
            kind: f[2].trim().parse().map_err(|e: Error| Error::parse(&origin, ln, e.to_string()))?,
            peak: number(f[3], "peak", &origin, ln)?,
            onset: number(f[4], "onset", &origin, ln)?,
            period: number(f[5], "period", &origin, ln)?,
            duration: number(f[6], "duration", &origin, ln)?,
        };
        edges.push((number(f[0], "src", &origin, ln)?, number(f[1], "dst", &origin, ln)?, pattern));
    }
    GroundTruthNetwork::new(nodes, edges).map_err(|e| Error::parse(&origin, 0, e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn snapshot_path(dir: &Path, step: i64) -> PathBuf {
    dir.join(format!("net_{step}.txt"))
}

/// Writes `net_<step>.txt` per snapshot, `index.csv` and `edges.csv`.
pub fn write_snapshot_series(dir: &Path, snapshots: &[RateSnapshot]) -> Result<()> {
    ensure_dir(dir)?;
    let mut index = String::from("step,t,edges\n");
    let mut series = String::from("src,dst,t,rate\n");
    for snap in snapshots {
        let mut net = format!("t,{}\n", snap.time_step);
        for ((s, d), r) in snap.iter() {
            let rate = format_rate(r);
            writeln!(net, "{s},{d},{rate}").unwrap();
            writeln!(series, "{s},{d},{},{rate}", snap.time).unwrap();
        }
        write(&snapshot_path(dir, snap.time_step), &net)?;
        writeln!(index, "{},{},{}", snap.time_step, snap.time, snap.len()).unwrap();
    }
    write(&dir.join("index.csv"), &index)?;
    write(&dir.join("edges.csv"), &series)
}

pub fn read_snapshot(path: &Path, time: f64) -> Result<RateSnapshot> {
    let origin = path.display().to_string();
    let text = read(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let step: i64 = match lines.next().and_then(|(_, h)| h.strip_prefix("t,")) {
        Some(step) => number(step, "step", &origin, 1)?,
        None => return Err(Error::parse(&origin, 1, "header must be 't,<step>'")),
    };
    let mut snap = RateSnapshot::new(step, time);
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::parse(&origin, ln, "edge line must be 'src,dst,rate'"));
        }
        let edge = (number(f[0], "src", &origin, ln)?, number(f[1], "dst", &origin, ln)?);
        snap.set(edge, number(f[2], "rate", &origin, ln)?).map_err(|e| Error::parse(&origin, ln, e.to_string()))?;
    }
    Ok(snap)
}

/// Reads a series written by [`write_snapshot_series`], in index order.
pub fn read_snapshot_series(dir: &Path) -> Result<Vec<RateSnapshot>> {
    let index_path = dir.join("index.csv");
    let origin = index_path.display().to_string();
    let text = read(&index_path)?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate().skip(1).map(|(i, l)| (i + 1, l)) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::parse(&origin, ln, "index line must be 'step,t,edges'"));
        }
        let step: i64 = number(f[0], "step", &origin, ln)?;
        let time: f64 = number(f[1], "time", &origin, ln)?;
        let edges: usize = number(f[2], "edge count", &origin, ln)?;
        let snap = read_snapshot(&snapshot_path(dir, step), time)?;
        if snap.len() != edges {
            return Err(Error::parse(&origin, ln, format!("index lists {edges} edges, file has {}", snap.len())));
        }
        out.push(snap);
    }
    Ok(out)
}

pub fn format_diagnostics(diags: &[StepDiagnostics]) -> String {
    let mut s = String::from("step,t,n_cascades,n_edges,skips,step_norm\n");
    for d in diags {
        writeln!(s, "{},{},{},{},{},{}", d.step, d.t, d.n_cascades, d.n_edges, d.skips, d.step_norm).unwrap();
    }
    s
}

pub fn format_scores(scores: &[(f64, SnapshotScore)]) -> String {
    let mut s = String::from("t,precision,recall,accuracy,mse\n");
    for (t, sc) in scores {
        writeln!(s, "{t},{},{},{},{}", sc.precision, sc.recall, sc.accuracy, sc.mse).unwrap();
    }
    s
}

pub fn format_centrality(rows: &[(f64, NodeId, Label, f64)]) -> String {
    let mut s = String::from("t,node,label,centrality\n");
    for (t, node, label, c) in rows {
        writeln!(s, "{t},{node},{label},{c}").unwrap();
    }
    s
}

pub fn format_edge_types(rows: &[(f64, EdgeTypeCounts)]) -> String {
    let mut s = String::from("t,mm,mb,bm,bb,unknown\n");
    for (t, c) in rows {
        writeln!(s, "{t},{},{},{},{},{}", c.media_media, c.media_blog, c.blog_media, c.blog_blog, c.unknown).unwrap();
    }
    s
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write(path, contents)
}

/// Everything needed to reproduce a run, stored next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<InferenceConfig>,
    pub inputs: Vec<String>,
    pub output: String,
    pub rng_seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: Option<InferenceConfig>,
        inputs: Vec<String>,
        output: String,
        rng_seed: u64,
    ) -> Self {
        Self {
            command: command.to_string(),
            config,
            inputs,
            output,
            rng_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))?;
        write_text(path, &(json + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_str(&read(path)?).map_err(|e| Error::parse(path.display(), 0, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let f = parse_cascades("0,a\n1,b\n\nc1;0;0,0,1,1.5", "mem", 10.0).unwrap();
        assert_eq!(f.cascades.len(), 1);
        assert_eq!(f.cascades[0].len(), 2);
        assert_eq!(f.cascades[0].window, 10.0);
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn parse_duplicate_node_warns() {
        let f = parse_cascades("0,a\n1,b\n\nc2;0;0,0,0,2", "mem", 10.0).unwrap();
        assert_eq!(f.cascades[0].len(), 1);
        assert_eq!(f.warnings.len(), 1);
    }

    #[test]
    fn parse_undeclared_node_names_line() {
        let err = parse_cascades("0,a\n1,b\n\nc1;0;0,0,1,1\nc3;0;0,0,7,1", "mem", 10.0).unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 5);
                assert!(msg.contains('7'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_decreasing_and_malformed() {
        assert!(matches!(parse_cascades("0,a\n1,b\n\nc;0;0,2,1,1", "mem", 10.0), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_cascades("0,a\n\nc;0;0", "mem", 10.0), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_cascades("zero,a\n\n", "mem", 10.0), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_cascades("0,a,tabloid\n\n", "mem", 10.0), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn parse_labels_and_explicit_window() {
        let f = parse_cascades("0,nyt,media\n1,b,blog\n2,x\n\nc;1;2.5;1,1,0,3.5", "mem", 10.0).unwrap();
        assert_eq!(f.nodes.labels.get(&0), Some(&Label::Media));
        assert_eq!(f.nodes.labels.get(&1), Some(&Label::Blog));
        assert_eq!(f.nodes.labels.get(&2), None);
        assert_eq!(f.cascades[0].window, 2.5);
        assert_eq!(f.nodes.universe(), 3);
    }

    #[test]
    fn rate_format_has_nine_digits() {
        assert_eq!(format_rate(0.5), "5.00000000e-1");
        assert_eq!(format_rate(1.0 / 3.0), "3.33333333e-1");
        assert_eq!("3.33333333e-1".parse::<f64>().unwrap(), 0.333333333);
    }
}
