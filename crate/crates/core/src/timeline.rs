//! Growth sequences: a network grown in discrete time-steps.
//!
//! A sequence is stored as flat arrays with per-step offsets. Node ids are
//! dense and assigned in order of addition, so the nodes of step `t` are a
//! contiguous id range. Step 1 is the initial network; it has no cross edges
//! and its internal edges are intra edges.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::ops::Range;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::ingest::{CitationCorpus, DateWindow};
use crate::{Error, Result};

pub type NodeId = u32;

/// A directed edge `(source, target)`; for citations, `(citing, cited)`.
pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Resolution {
    Maximal,
    Daily,
    Monthly,
    Yearly,
    BiEpochal { t1: DateWindow, t2: DateWindow },
    /// Generated by a model rather than derived from timestamps.
    Synthetic,
    /// Consecutive steps merged into groups of a fixed number of nodes.
    Coarsened { nodes_per_step: usize },
}

impl Resolution {
    pub fn bi_epochal(t1: DateWindow, t2: DateWindow) -> Result<Self> {
        if t1.end >= t2.start {
            return Err(Error::Config(format!(
                "bi-epochal intervals must be disjoint with T1 first: T1 ends {}, T2 starts {}",
                t1.end, t2.start
            )));
        }
        Ok(Resolution::BiEpochal { t1, t2 })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Resolution::Maximal => "maximal",
            Resolution::Daily => "daily",
            Resolution::Monthly => "monthly",
            Resolution::Yearly => "yearly",
            Resolution::BiEpochal { .. } => "bi_epochal",
            Resolution::Synthetic => "synthetic",
            Resolution::Coarsened { .. } => "coarsened",
        }
    }
}

/// Borrowed view of one time-step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDelta<'a> {
    pub t: usize,
    pub new_nodes: Range<NodeId>,
    pub cross_edges: &'a [Edge],
    pub intra_edges: &'a [Edge],
}

impl StepDelta<'_> {
    pub fn n(&self) -> usize {
        self.new_nodes.len()
    }

    pub fn m(&self) -> usize {
        self.cross_edges.len()
    }

    pub fn m_intra(&self) -> usize {
        self.intra_edges.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSequence {
    resolution: Resolution,
    node_offsets: Vec<NodeId>,
    cross_offsets: Vec<usize>,
    intra_offsets: Vec<usize>,
    cross: Vec<Edge>,
    intra: Vec<Edge>,
    labels: Option<Vec<String>>,
    step_dates: Option<Vec<NaiveDate>>,
    /// Citations dropped because they point forward in time.
    pub chronology_excluded: u64,
    /// Citations dropped because an endpoint lies outside both epochs.
    pub epoch_excluded: u64,
}

/// Incremental constructor that checks the step invariants as steps arrive.
#[derive(Debug, Clone)]
pub struct SequenceBuilder {
    seq: GrowthSequence,
}

impl SequenceBuilder {
    pub fn new(resolution: Resolution) -> Self {
        Self {
            seq: GrowthSequence {
                resolution,
                node_offsets: vec![0],
                cross_offsets: vec![0],
                intra_offsets: vec![0],
                cross: Vec::new(),
                intra: Vec::new(),
                labels: None,
                step_dates: None,
                chronology_excluded: 0,
                epoch_excluded: 0,
            },
        }
    }

    pub fn with_capacity(resolution: Resolution, steps: usize, edges: usize) -> Self {
        let mut b = Self::new(resolution);
        b.seq.node_offsets.reserve(steps);
        b.seq.cross_offsets.reserve(steps);
        b.seq.intra_offsets.reserve(steps);
        b.seq.cross.reserve(edges);
        b
    }

    pub fn steps(&self) -> usize {
        self.seq.steps()
    }

    pub fn node_count(&self) -> NodeId {
        *self.seq.node_offsets.last().unwrap()
    }

    /// Appends a step that adds `n_new` nodes; returns the id range they get.
    pub fn push_step(&mut self, n_new: usize, cross: &[Edge], intra: &[Edge]) -> Result<Range<NodeId>> {
        let before = self.node_count();
        let after = before
            .checked_add(NodeId::try_from(n_new).map_err(|_| Error::Config("too many nodes".into()))?)
            .ok_or_else(|| Error::Config("node id space exhausted".into()))?;
        let new = before..after;
        if self.steps() == 0 && !cross.is_empty() {
            return Err(Error::Shape("the initial step cannot have cross edges".into()));
        }
        for &(src, dst) in cross {
            if !new.contains(&src) || dst >= before {
                return Err(Error::Shape(format!(
                    "cross edge ({src}, {dst}) at step {} must run from a new node to an earlier node",
                    self.steps() + 1
                )));
            }
        }
        for &(src, dst) in intra {
            if !new.contains(&src) || !new.contains(&dst) {
                return Err(Error::Shape(format!(
                    "intra edge ({src}, {dst}) at step {} must join two new nodes",
                    self.steps() + 1
                )));
            }
        }
        self.push_step_unchecked(n_new, cross.iter().copied(), intra.iter().copied());
        Ok(new)
    }

    pub(crate) fn push_step_unchecked(
        &mut self,
        n_new: usize,
        cross: impl IntoIterator<Item = Edge>,
        intra: impl IntoIterator<Item = Edge>,
    ) {
        let s = &mut self.seq;
        s.cross.extend(cross);
        s.intra.extend(intra);
        s.node_offsets.push(s.node_offsets.last().unwrap() + n_new as NodeId);
        s.cross_offsets.push(s.cross.len());
        s.intra_offsets.push(s.intra.len());
    }

    pub fn finish(self) -> Result<GrowthSequence> {
        if self.seq.steps() == 0 {
            return Err(Error::Shape("a growth sequence needs at least one step".into()));
        }
        Ok(self.seq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegreeHistogram {
    /// `counts[k]` is the number of nodes with in-degree `k`.
    pub counts: Vec<u64>,
    pub total_nodes: u64,
}

impl DegreeHistogram {
    pub fn from_degrees<I: IntoIterator<Item = u64>>(degrees: I) -> Self {
        let mut h = Self::default();
        for k in degrees {
            h.add(k, 1);
        }
        h
    }

    pub fn from_counts(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut h = Self::default();
        for (k, n) in pairs {
            h.add(k, n);
        }
        h
    }

    pub fn add(&mut self, k: u64, n: u64) {
        let k = k as usize;
        if self.counts.len() <= k {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += n;
        self.total_nodes += n;
    }

    pub fn get(&self, k: u64) -> u64 {
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    /// Non-zero `(k, n(k))` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(k, &n)| (k as u64, n))
    }

    pub fn is_empty(&self) -> bool {
        self.total_nodes == 0
    }

    pub fn max_degree(&self) -> Option<u64> {
        self.counts.iter().rposition(|&n| n > 0).map(|k| k as u64)
    }

    pub fn total_degree(&self) -> u64 {
        self.iter().map(|(k, n)| k * n).sum()
    }
}

impl GrowthSequence {
    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn node_count(&self) -> usize {
        *self.node_offsets.last().unwrap() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.cross.len() + self.intra.len()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn step_dates(&self) -> Option<&[NaiveDate]> {
        self.step_dates.as_deref()
    }

    /// Step `t`, 1-based.
    pub fn step(&self, t: usize) -> StepDelta<'_> {
        assert!(t >= 1 && t <= self.steps(), "step {t} out of range 1..={}", self.steps());
        let i = t - 1;
        StepDelta {
            t,
            new_nodes: self.node_offsets[i]..self.node_offsets[i + 1],
            cross_edges: &self.cross[self.cross_offsets[i]..self.cross_offsets[i + 1]],
            intra_edges: &self.intra[self.intra_offsets[i]..self.intra_offsets[i + 1]],
        }
    }

    pub fn iter_steps(&self) -> impl Iterator<Item = StepDelta<'_>> + '_ {
        (1..=self.steps()).map(move |t| self.step(t))
    }

    /// Every edge, cross and intra, grouped by step.
    pub fn flat_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.iter_steps()
            .flat_map(|s| s.cross_edges.iter().chain(s.intra_edges).copied())
    }

    /// In-degree of every node in `G_t`.
    pub fn in_degrees_at(&self, t: usize) -> Result<Vec<u64>> {
        if t == 0 || t > self.steps() {
            return Err(Error::OutOfRange(format!(
                "step {t} outside 1..={}",
                self.steps()
            )));
        }
        let n = self.node_offsets[t] as usize;
        let mut deg = vec![0u64; n];
        for step in (1..=t).map(|s| self.step(s)) {
            for &(_, dst) in step.cross_edges.iter().chain(step.intra_edges) {
                deg[dst as usize] += 1;
            }
        }
        Ok(deg)
    }

    /// Steps whose date falls in `window`, as a 1-based inclusive-exclusive range.
    pub fn steps_in_window(&self, window: &DateWindow) -> Option<Range<usize>> {
        let dates = self.step_dates.as_ref()?;
        let first = dates.iter().position(|d| window.contains(*d))?;
        let last = dates.iter().rposition(|d| window.contains(*d))?;
        Some(first + 1..last + 2)
    }

    pub fn final_histogram(&self) -> DegreeHistogram {
        degree_histogram_at(self, self.steps()).expect("final step is in range")
    }

    /// Writes one JSON object per step:
    /// `{"t":…,"nodes":[…],"cross":[[src,dst],…],"intra":[[src,dst],…]}`.
    /// Labelled sequences use their string labels as node ids.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for step in self.iter_steps() {
            match &self.labels {
                None => {
                    let line = StepLine {
                        t: step.t,
                        nodes: step.new_nodes.clone().collect(),
                        cross: step.cross_edges.iter().map(|&(a, b)| [a, b]).collect(),
                        intra: step.intra_edges.iter().map(|&(a, b)| [a, b]).collect(),
                    };
                    serde_json::to_writer(&mut out, &line)?;
                }
                Some(labels) => {
                    let l = |id: NodeId| labels[id as usize].as_str();
                    let line = StepLine {
                        t: step.t,
                        nodes: step.new_nodes.clone().map(l).collect(),
                        cross: step.cross_edges.iter().map(|&(a, b)| [l(a), l(b)]).collect(),
                        intra: step.intra_edges.iter().map(|&(a, b)| [l(a), l(b)]).collect(),
                    };
                    serde_json::to_writer(&mut out, &line)?;
                }
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads the JSON-lines format written by [`write_jsonl`](Self::write_jsonl).
    /// External ids may be integers or strings; they are remapped to dense
    /// ids in order of appearance.
    pub fn read_jsonl<R: BufRead>(input: R, resolution: Resolution) -> Result<Self> {
        let mut builder = SequenceBuilder::new(resolution);
        let mut ids: HashMap<String, NodeId> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let mut kind: Option<bool> = None; // Some(true) = string ids
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = lineno as u64 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let raw: StepLine<serde_json::Value> = serde_json::from_str(&line)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
            if raw.t != builder.steps() + 1 {
                return Err(Error::parse(
                    lineno,
                    format!("expected step {}, found {}", builder.steps() + 1, raw.t),
                ));
            }
            let mut key = |v: &serde_json::Value| -> Result<String> {
                let (s, is_str) = match v {
                    serde_json::Value::String(s) => (s.clone(), true),
                    serde_json::Value::Number(n) if n.is_u64() => (n.to_string(), false),
                    other => return Err(Error::parse(lineno, format!("invalid node id {other}"))),
                };
                match kind {
                    None => kind = Some(is_str),
                    Some(k) if k != is_str => {
                        return Err(Error::parse(lineno, "mixed string and integer node ids"))
                    }
                    _ => {}
                }
                Ok(s)
            };
            let base = builder.node_count();
            for (i, v) in raw.nodes.iter().enumerate() {
                let k = key(v)?;
                if ids.insert(k.clone(), base + i as NodeId).is_some() {
                    return Err(Error::parse(lineno, format!("node {k} added twice")));
                }
                labels.push(k);
            }
            let resolve = |pairs: &[[serde_json::Value; 2]]| -> Result<Vec<Edge>> {
                pairs
                    .iter()
                    .map(|[a, b]| {
                        let lookup = |v: &serde_json::Value| -> Result<NodeId> {
                            let k = match v {
                                serde_json::Value::String(s) => s.clone(),
                                other => other.to_string(),
                            };
                            ids.get(&k)
                                .copied()
                                .ok_or_else(|| Error::parse(lineno, format!("unknown node {k}")))
                        };
                        Ok((lookup(a)?, lookup(b)?))
                    })
                    .collect()
            };
            let cross = resolve(&raw.cross)?;
            let intra = resolve(&raw.intra)?;
            builder
                .push_step(raw.nodes.len(), &cross, &intra)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        let mut seq = builder.finish()?;
        if kind == Some(true) {
            seq.labels = Some(labels);
        }
        Ok(seq)
    }
}

#[derive(Serialize, Deserialize)]
struct StepLine<N> {
    t: usize,
    nodes: Vec<N>,
    cross: Vec<[N; 2]>,
    intra: Vec<[N; 2]>,
}

fn bucket_key(resolution: &Resolution, position: usize, date: NaiveDate) -> Option<i64> {
    match resolution {
        Resolution::Maximal => Some(position as i64),
        Resolution::Daily => Some(date.num_days_from_ce() as i64),
        Resolution::Monthly => Some(date.year() as i64 * 12 + date.month0() as i64),
        Resolution::Yearly => Some(date.year() as i64),
        Resolution::BiEpochal { t1, t2 } => {
            if t1.contains(date) {
                Some(1)
            } else if t2.contains(date) {
                Some(2)
            } else {
                None
            }
        }
        Resolution::Synthetic | Resolution::Coarsened { .. } => None,
    }
}

/// Maps a cleaned corpus onto a growth sequence at the given resolution.
///
/// Citations whose target does not lie in a strictly earlier step are
/// excluded and counted in `chronology_excluded`; same-step citations become
/// intra edges. For bi-epochal resolution, articles outside both intervals
/// are ignored together with their citations (`epoch_excluded`).
pub fn build_sequence(corpus: &CitationCorpus, resolution: Resolution) -> Result<GrowthSequence> {
    if let Resolution::BiEpochal { t1, t2 } = resolution {
        Resolution::bi_epochal(t1, t2)?;
    }
    if matches!(resolution, Resolution::Synthetic | Resolution::Coarsened { .. }) {
        return Err(Error::Config(format!(
            "{} resolution cannot be built from a corpus",
            resolution.name()
        )));
    }

    // Step index per record (0-based), in record order.
    let mut step_of: Vec<Option<usize>> = Vec::with_capacity(corpus.len());
    let mut step_sizes: Vec<usize> = Vec::new();
    let mut step_dates: Vec<NaiveDate> = Vec::new();
    let mut last_key: Option<i64> = None;
    for (i, r) in corpus.records.iter().enumerate() {
        let key = bucket_key(&resolution, i, r.timestamp);
        match key {
            None => step_of.push(None),
            Some(k) => {
                if last_key != Some(k) {
                    step_sizes.push(0);
                    step_dates.push(r.timestamp);
                    last_key = Some(k);
                }
                *step_sizes.last_mut().unwrap() += 1;
                step_of.push(Some(step_sizes.len() - 1));
            }
        }
    }
    if let Resolution::BiEpochal { .. } = resolution {
        if step_sizes.len() != 2 {
            return Err(Error::Config(
                "bi-epochal resolution needs articles in both T1 and T2".into(),
            ));
        }
    }
    if step_sizes.is_empty() {
        return Err(Error::Config("corpus has no articles".into()));
    }

    // Dense node ids in record order among retained records.
    let mut node_of: Vec<Option<NodeId>> = Vec::with_capacity(corpus.len());
    let mut labels = Vec::new();
    for (r, s) in corpus.records.iter().zip(&step_of) {
        if s.is_some() {
            node_of.push(Some(labels.len() as NodeId));
            labels.push(r.article_id.clone());
        } else {
            node_of.push(None);
        }
    }

    let position = corpus.position_index();
    let mut cross: Vec<Vec<Edge>> = vec![Vec::new(); step_sizes.len()];
    let mut intra: Vec<Vec<Edge>> = vec![Vec::new(); step_sizes.len()];
    let mut chronology = 0u64;
    let mut epoch = 0u64;
    for (i, r) in corpus.records.iter().enumerate() {
        for cited in &r.references {
            let j = position[cited.as_str()];
            let (Some(sc), Some(sd)) = (step_of[i], step_of[j]) else {
                epoch += 1;
                continue;
            };
            let edge = (node_of[i].unwrap(), node_of[j].unwrap());
            match sd.cmp(&sc) {
                std::cmp::Ordering::Less => cross[sc].push(edge),
                std::cmp::Ordering::Equal => intra[sc].push(edge),
                std::cmp::Ordering::Greater => chronology += 1,
            }
        }
    }
    if chronology > 0 {
        log::info!(
            "{} resolution: excluded {chronology} chronology-violating citations",
            resolution.name()
        );
    }

    let edges = cross.iter().map(Vec::len).sum();
    let mut b = SequenceBuilder::with_capacity(resolution, step_sizes.len(), edges);
    for ((n, c), a) in step_sizes.iter().zip(cross).zip(intra) {
        b.push_step_unchecked(*n, c, a);
    }
    let mut seq = b.finish()?;
    seq.labels = Some(labels);
    seq.step_dates = Some(step_dates);
    seq.chronology_excluded = chronology;
    seq.epoch_excluded = epoch;
    Ok(seq)
}

/// Number of citations that do not point strictly backwards in time under
/// `resolution`.
pub fn chronology_violations(corpus: &CitationCorpus, resolution: Resolution) -> Result<u64> {
    Ok(build_sequence(corpus, resolution)?.chronology_excluded)
}

/// In-degree histogram of `G_t`, counting cross and intra edges of steps `1..=t`.
pub fn degree_histogram_at(seq: &GrowthSequence, t: usize) -> Result<DegreeHistogram> {
    Ok(DegreeHistogram::from_degrees(seq.in_degrees_at(t)?))
}

/// Merges consecutive steps so that each new step holds `nodes_per_step`
/// nodes (the last one may hold fewer). Edges between nodes of the same
/// merged step become intra edges.
pub fn coarsen(seq: &GrowthSequence, nodes_per_step: usize) -> Result<GrowthSequence> {
    if nodes_per_step == 0 {
        return Err(Error::Config("nodes_per_step must be positive".into()));
    }
    // Group boundaries fall on original step boundaries.
    let mut groups: Vec<Range<usize>> = Vec::new();
    let mut start = 1;
    let mut count = 0;
    for step in seq.iter_steps() {
        count += step.n();
        if count >= nodes_per_step {
            groups.push(start..step.t + 1);
            start = step.t + 1;
            count = 0;
        }
    }
    if start <= seq.steps() {
        groups.push(start..seq.steps() + 1);
    }

    let mut b = SequenceBuilder::with_capacity(
        Resolution::Coarsened { nodes_per_step },
        groups.len(),
        seq.cross.len(),
    );
    for g in groups {
        let first = seq.node_offsets[g.start - 1];
        let mut cross = Vec::new();
        let mut intra = Vec::new();
        for t in g.clone() {
            let s = seq.step(t);
            for &(src, dst) in s.cross_edges.iter().chain(s.intra_edges) {
                if dst >= first {
                    intra.push((src, dst));
                } else {
                    cross.push((src, dst));
                }
            }
        }
        let n = (seq.node_offsets[g.end - 1] - first) as usize;
        b.push_step_unchecked(n, cross, intra);
    }
    let mut out = b.finish()?;
    out.labels = seq.labels.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_corpus;

    fn corpus(nodes: &str, edges: &str) -> CitationCorpus {
        parse_corpus(nodes.as_bytes(), edges.as_bytes(), None).unwrap()
    }

    fn abc() -> CitationCorpus {
        corpus(
            "id,date\nA,2000-01-01\nB,2000-01-01\nC,2001-05-05\n",
            "citing_id,cited_id\nC,A\nC,B\n",
        )
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn maximal_resolution_three_articles() {
        let seq = build_sequence(&abc(), Resolution::Maximal).unwrap();
        assert_eq!(seq.steps(), 3);
        assert!(seq.iter_steps().all(|s| s.n() == 1 && s.m_intra() == 0));
        assert_eq!(seq.step(3).m(), 2);
        let h = degree_histogram_at(&seq, 3).unwrap();
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn yearly_resolution_three_articles() {
        let seq = build_sequence(&abc(), Resolution::Yearly).unwrap();
        assert_eq!(seq.steps(), 2);
        let (s1, s2) = (seq.step(1), seq.step(2));
        assert_eq!((s1.n(), s1.m_intra()), (2, 0));
        assert_eq!((s2.n(), s2.m(), s2.m_intra()), (1, 2, 0));
    }

    #[test]
    fn initial_histogram_without_edges() {
        let seq = build_sequence(&abc(), Resolution::Yearly).unwrap();
        let h = degree_histogram_at(&seq, 1).unwrap();
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(0, 2)]);
        assert!(degree_histogram_at(&seq, 3).is_err());
        assert!(degree_histogram_at(&seq, 0).is_err());
    }

    #[test]
    fn same_day_forward_citation() {
        let c = corpus("id,date\nA,2000-01-01\nB,2000-01-01\n", "citing_id,cited_id\nA,B\n");
        assert_eq!(chronology_violations(&c, Resolution::Maximal).unwrap(), 1);
        assert_eq!(chronology_violations(&c, Resolution::Daily).unwrap(), 0);
        let daily = build_sequence(&c, Resolution::Daily).unwrap();
        assert_eq!(daily.step(1).m_intra(), 1);
    }

    #[test]
    fn bi_epochal_construction() {
        let c = corpus(
            "id,date\nA,1990-03-01\nB,1995-01-01\nC,2000-02-01\nD,2000-03-01\nE,1980-01-01\n",
            "citing_id,cited_id\nC,A\nC,B\nD,C\nD,E\nB,A\n",
        );
        let t1 = DateWindow::new(date("1990-01-01"), date("1999-12-31")).unwrap();
        let t2 = DateWindow::new(date("2000-01-01"), date("2000-12-31")).unwrap();
        let seq = build_sequence(&c, Resolution::bi_epochal(t1, t2).unwrap()).unwrap();
        assert_eq!(seq.steps(), 2);
        assert_eq!(seq.step(1).n(), 2);
        assert_eq!(seq.step(1).m_intra(), 1);
        assert_eq!(seq.step(2).m(), 2);
        assert_eq!(seq.step(2).m_intra(), 1);
        assert_eq!(seq.epoch_excluded, 1);
    }

    #[test]
    fn bi_epochal_rejects_overlap_and_empty() {
        let t1 = DateWindow::new(date("1990-01-01"), date("2000-06-30")).unwrap();
        let t2 = DateWindow::new(date("2000-01-01"), date("2000-12-31")).unwrap();
        assert!(matches!(Resolution::bi_epochal(t1, t2), Err(Error::Config(_))));
        let t1 = DateWindow::new(date("1950-01-01"), date("1960-12-31")).unwrap();
        let res = Resolution::bi_epochal(t1, t2).unwrap();
        assert!(matches!(build_sequence(&abc(), res), Err(Error::Config(_))));
    }

    #[test]
    fn jsonl_roundtrip_with_labels() {
        let seq = build_sequence(&abc(), Resolution::Yearly).unwrap();
        let mut buf = Vec::new();
        seq.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            r#"{"t":2,"nodes":["C"],"cross":[["C","A"],["C","B"]],"intra":[]}"#
        );
        let back = GrowthSequence::read_jsonl(buf.as_slice(), Resolution::Yearly).unwrap();
        assert_eq!(back.step(2).cross_edges, seq.step(2).cross_edges);
        assert_eq!(back.labels(), seq.labels());
    }

    #[test]
    fn jsonl_rejects_future_targets() {
        let text = "{\"t\":1,\"nodes\":[0],\"cross\":[],\"intra\":[]}\n{\"t\":2,\"nodes\":[1],\"cross\":[[1,1]],\"intra\":[]}\n";
        assert!(matches!(
            GrowthSequence::read_jsonl(text.as_bytes(), Resolution::Synthetic),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn coarsen_groups_nodes() {
        let mut b = SequenceBuilder::new(Resolution::Synthetic);
        b.push_step(1, &[], &[]).unwrap();
        for t in 1..6u32 {
            b.push_step(1, &[(t, t - 1)], &[]).unwrap();
        }
        let seq = b.finish().unwrap();
        let c = coarsen(&seq, 2).unwrap();
        assert_eq!(c.steps(), 3);
        assert_eq!(c.step(1).m_intra(), 1);
        assert_eq!(c.step(2).m(), 1);
        assert_eq!(c.step(2).m_intra(), 1);
        assert_eq!(c.edge_count(), seq.edge_count());
        assert_eq!(c.final_histogram(), seq.final_histogram());
    }
}
