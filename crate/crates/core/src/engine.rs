//! Training loops: synchronous and asynchronous gossip online EM, and the
//! centralized online EM baseline.
//!
//! A synchronous iteration averages the two endpoints of one uniformly drawn
//! edge and then lets every node take a local online EM step on its own
//! shard. An asynchronous iteration only updates the two endpoints, each
//! advancing its own step-size clock. No degree correction is applied, so on
//! irregular graphs the asynchronous fixed point is biased towards
//! high-degree nodes' data.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lda::{self, DirichletParams, Document, EStep, SufficientStats, TopicMatrix};
use crate::network::{self, Graph};
use crate::rng::{RngState, StreamRng};
use crate::text;

/// Step sizes `ρ_t`, indexed from `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `ρ_t = (t + t0)^(-kappa)` with `t0 > 0`, `kappa ∈ (0.5, 1]`.
    Polynomial { t0: f64, kappa: f64 },
    /// Fixed `ρ ∈ [0, 1]`. A zero step disables local updates (pure gossip).
    Constant(f64),
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Polynomial { t0: 10.0, kappa: 0.6 }
    }
}

impl StepSchedule {
    pub fn polynomial(t0: f64, kappa: f64) -> Result<Self> {
        let s = StepSchedule::Polynomial { t0, kappa };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(rho: f64) -> Result<Self> {
        let s = StepSchedule::Constant(rho);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Polynomial { t0, kappa } => {
                if !(t0.is_finite() && t0 > 0.0) {
                    return Err(Error::Config(format!("schedule t0 must be positive, got {t0}")));
                }
                if !(kappa > 0.5 && kappa <= 1.0) {
                    return Err(Error::Config(format!(
                        "schedule kappa must lie in (0.5, 1], got {kappa}"
                    )));
                }
            }
            StepSchedule::Constant(rho) => {
                if !(0.0..=1.0).contains(&rho) {
                    return Err(Error::Config(format!("constant step must lie in [0, 1], got {rho}")));
                }
            }
        }
        Ok(())
    }

    pub fn rho(&self, t: u64) -> f64 {
        match *self {
            StepSchedule::Polynomial { t0, kappa } => (t as f64 + t0).powf(-kappa),
            StepSchedule::Constant(rho) => rho,
        }
    }
}

/// Which documents a local update uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchPolicy {
    /// The node's whole shard.
    FullShard,
    /// A uniform sample without replacement of this many documents.
    Sample(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateConfig {
    pub schedule: StepSchedule,
    pub estep: EStep,
    pub batch: BatchPolicy,
    /// M-step additive smoothing.
    pub smoothing: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        UpdateConfig {
            schedule: StepSchedule::default(),
            estep: EStep::default(),
            batch: BatchPolicy::FullShard,
            smoothing: 1e-8,
        }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.estep.validate()?;
        if !(self.smoothing.is_finite() && self.smoothing >= 0.0) {
            return Err(Error::Config(format!(
                "smoothing must be nonnegative, got {}",
                self.smoothing
            )));
        }
        if self.batch == BatchPolicy::Sample(0) {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sync,
    Async,
    Centralized,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sync => "sync",
            Mode::Async => "async",
            Mode::Centralized => "centralized",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sync" => Ok(Mode::Sync),
            "async" => Ok(Mode::Async),
            "centralized" => Ok(Mode::Centralized),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Random initial statistics: entries uniform in `[0, 1/(KV)]`, rescaled so
/// the total mass equals `mean_doc_length`.
pub fn initial_stats<R: Rng + ?Sized>(
    topics: usize,
    vocab: usize,
    mean_doc_length: f64,
    rng: &mut R,
) -> Result<SufficientStats> {
    if !(mean_doc_length.is_finite() && mean_doc_length > 0.0) {
        return Err(Error::Config(format!(
            "mean document length must be positive, got {mean_doc_length}"
        )));
    }
    let cell = 1.0 / (topics * vocab) as f64;
    let mut counts: Vec<f64> = (0..topics * vocab).map(|_| rng.random::<f64>() * cell).collect();
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c *= mean_doc_length / total);
    }
    SufficientStats::from_vec(topics, vocab, counts)
}

pub fn mean_length(docs: &[Document]) -> f64 {
    docs.iter().map(Document::len).sum::<usize>() as f64 / docs.len().max(1) as f64
}

/// One agent: a private shard, its current statistics and its own RNG stream.
///
/// The shard is never handed out; other nodes only ever see `stats`.
#[derive(Debug, Clone)]
pub struct NodeState {
    node_id: usize,
    corpus: Vec<Document>,
    stats: SufficientStats,
    rng: StreamRng,
    updates: u64,
}

impl NodeState {
    pub fn new(node_id: usize, corpus: Vec<Document>, stats: SufficientStats, rng: StreamRng) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Config(format!("node {node_id} has an empty corpus")));
        }
        if let Some(doc) = corpus.iter().find(|d| d.words().iter().any(|&w| w >= stats.vocab())) {
            doc.check_vocab(stats.vocab())?;
        }
        Ok(NodeState {
            node_id,
            corpus,
            stats,
            rng,
            updates: 0,
        })
    }

    /// Initializes statistics with [`initial_stats`] scaled to the shard's mean length.
    pub fn with_random_stats(
        node_id: usize,
        corpus: Vec<Document>,
        topics: usize,
        vocab: usize,
        mut rng: StreamRng,
    ) -> Result<Self> {
        let stats = initial_stats(topics, vocab, mean_length(&corpus), &mut rng)?;
        Self::new(node_id, corpus, stats, rng)
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn shard_len(&self) -> usize {
        self.corpus.len()
    }

    /// Number of local updates performed so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn topic_matrix(&self, smoothing: f64) -> Result<TopicMatrix> {
        lda::m_step(&self.stats, smoothing)
    }

    /// Online EM step on the local shard. Returns the number of documents used.
    fn local_update(&mut self, prior: &DirichletParams, rho: f64, config: &UpdateConfig) -> Result<usize> {
        self.updates += 1;
        if rho == 0.0 {
            return Ok(0);
        }
        let beta = lda::m_step(&self.stats, config.smoothing)?;
        let batch: Vec<&Document> = match config.batch {
            BatchPolicy::FullShard => self.corpus.iter().collect(),
            BatchPolicy::Sample(b) => index::sample(&mut self.rng, self.corpus.len(), b)
                .iter()
                .map(|i| &self.corpus[i])
                .collect(),
        };
        let used = batch.len();
        self.stats = lda::goem_update(&self.stats, &batch, &beta, prior, rho, &config.estep, &mut self.rng)?;
        Ok(used)
    }
}

/// Frobenius norm of the stacked deviations from the network mean.
pub fn consensus_gap(stats: &[SufficientStats]) -> f64 {
    let Some(first) = stats.first() else {
        return 0.0;
    };
    let n = stats.len() as f64;
    let mut mean = vec![0.0; first.as_slice().len()];
    for s in stats {
        mean.iter_mut().zip(s.as_slice()).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    stats
        .iter()
        .flat_map(|s| s.as_slice().iter().zip(&mean).map(|(x, m)| (x - m).powi(2)))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub iteration: u64,
    pub docs_processed: u64,
    pub consensus_gap: f64,
    /// Per-node statistics (a single entry for the centralized baseline).
    pub stats: Vec<SufficientStats>,
}

/// Gossip training state for [`Mode::Sync`] or [`Mode::Async`].
#[derive(Debug, Clone)]
pub struct Decentralized {
    graph: Graph,
    nodes: Vec<NodeState>,
    prior: DirichletParams,
    mode: Mode,
    config: UpdateConfig,
    edge_rng: StreamRng,
    iteration: u64,
    docs_processed: u64,
}

impl Decentralized {
    pub fn new(
        graph: Graph,
        nodes: Vec<NodeState>,
        prior: DirichletParams,
        mode: Mode,
        config: UpdateConfig,
        edge_rng: StreamRng,
    ) -> Result<Self> {
        if mode == Mode::Centralized {
            return Err(Error::Config("use Centralized for the baseline".into()));
        }
        config.validate()?;
        graph.require_connected()?;
        if nodes.len() != graph.node_count() {
            return Err(Error::Precondition(format!(
                "{} nodes supplied for a graph of {}",
                nodes.len(),
                graph.node_count()
            )));
        }
        let shape = nodes[0].stats();
        if let Some(bad) = nodes.iter().find(|n| !n.stats().same_shape(shape)) {
            return Err(Error::Config(format!(
                "node {} has mismatched stats shape",
                bad.node_id()
            )));
        }
        if shape.topics() != prior.topics() {
            return Err(Error::Config("prior and stats disagree on K".into()));
        }
        if let BatchPolicy::Sample(b) = config.batch {
            if let Some(small) = nodes.iter().find(|n| n.shard_len() < b) {
                return Err(Error::Config(format!(
                    "node {} holds {} documents, fewer than the batch size {b}",
                    small.node_id(),
                    small.shard_len()
                )));
            }
        }
        Ok(Decentralized {
            graph,
            nodes,
            prior,
            mode,
            config,
            edge_rng,
            iteration: 0,
            docs_processed: 0,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn docs_processed(&self) -> u64 {
        self.docs_processed
    }

    pub fn config(&self) -> &UpdateConfig {
        &self.config
    }

    pub fn stats(&self) -> Vec<SufficientStats> {
        self.nodes.iter().map(|n| n.stats.clone()).collect()
    }

    pub fn mean_stats(&self) -> SufficientStats {
        SufficientStats::mean(&self.stats()).expect("network has at least one node")
    }

    pub fn consensus_gap(&self) -> f64 {
        consensus_gap(&self.stats())
    }

    pub fn topic_matrices(&self) -> Result<Vec<TopicMatrix>> {
        self.nodes
            .iter()
            .map(|n| n.topic_matrix(self.config.smoothing))
            .collect()
    }

    /// Runs one iteration and returns the averaged edge.
    pub fn step(&mut self) -> Result<(usize, usize)> {
        let (i, j) = self.graph.sample_edge(&mut self.edge_rng);
        let (head, tail) = self.nodes.split_at_mut(j);
        network::average_pair(&mut head[i].stats, &mut tail[0].stats)?;
        self.iteration += 1;
        let mut used = 0;
        match self.mode {
            Mode::Sync => {
                let rho = self.config.schedule.rho(self.iteration);
                for node in &mut self.nodes {
                    used += node.local_update(&self.prior, rho, &self.config)?;
                }
            }
            Mode::Async => {
                for k in [i, j] {
                    let node = &mut self.nodes[k];
                    let rho = self.config.schedule.rho(node.updates + 1);
                    used += node.local_update(&self.prior, rho, &self.config)?;
                }
            }
            Mode::Centralized => unreachable!("rejected at construction"),
        }
        self.docs_processed += used as u64;
        Ok((i, j))
    }

    pub fn record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            iteration: self.iteration,
            docs_processed: self.docs_processed,
            consensus_gap: self.consensus_gap(),
            stats: self.stats(),
        }
    }

    /// Advances `iterations` steps, recording the current state first and
    /// then every `cadence` iterations and at the end.
    pub fn run(&mut self, iterations: u64, cadence: u64) -> Result<Vec<TrajectoryRecord>> {
        let mut out = vec![self.record()];
        self.run_with(iterations, cadence, |sim| {
            out.push(sim.record());
            Ok(())
        })?;
        Ok(out)
    }

    /// Like [`run`](Self::run) but hands the state to `observe` at each
    /// recording point after the start.
    pub fn run_with(
        &mut self,
        iterations: u64,
        cadence: u64,
        mut observe: impl FnMut(&Self) -> Result<()>,
    ) -> Result<()> {
        let end = self.iteration + iterations;
        while self.iteration < end {
            self.step()?;
            if is_checkpoint(self.iteration, cadence, end) {
                observe(self)?;
            }
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            mode: self.mode,
            iteration: self.iteration,
            docs_processed: self.docs_processed,
            engine_rng: Some(RngState::capture(&self.edge_rng)),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeCheckpoint {
                    updates: n.updates,
                    rng: RngState::capture(&n.rng),
                    stats: n.stats.clone(),
                })
                .collect(),
        }
    }

    /// Overwrites the mutable state with a checkpoint of the same run.
    pub fn restore(&mut self, cp: &Checkpoint) -> Result<()> {
        if cp.mode != self.mode || cp.nodes.len() != self.nodes.len() {
            return Err(Error::Input(format!(
                "checkpoint for {} with {} nodes does not match {} with {} nodes",
                cp.mode,
                cp.nodes.len(),
                self.mode,
                self.nodes.len()
            )));
        }
        let engine = cp
            .engine_rng
            .as_ref()
            .ok_or_else(|| Error::Input("checkpoint lacks the edge sampler state".into()))?;
        for (node, saved) in self.nodes.iter().zip(&cp.nodes) {
            if !node.stats.same_shape(&saved.stats) {
                return Err(Error::Input("checkpoint stats shape mismatch".into()));
            }
        }
        for (node, saved) in self.nodes.iter_mut().zip(&cp.nodes) {
            node.stats = saved.stats.clone();
            node.rng = saved.rng.restore();
            node.updates = saved.updates;
        }
        self.edge_rng = engine.restore();
        self.iteration = cp.iteration;
        self.docs_processed = cp.docs_processed;
        Ok(())
    }
}

fn is_checkpoint(iteration: u64, cadence: u64, end: u64) -> bool {
    iteration == end || (cadence > 0 && iteration.is_multiple_of(cadence))
}

/// Algorithm: synchronous gossip online EM for `iterations` steps.
pub fn run_sync(
    graph: Graph,
    nodes: Vec<NodeState>,
    prior: DirichletParams,
    iterations: u64,
    config: UpdateConfig,
    edge_rng: StreamRng,
    cadence: u64,
) -> Result<Vec<TrajectoryRecord>> {
    Decentralized::new(graph, nodes, prior, Mode::Sync, config, edge_rng)?.run(iterations, cadence)
}

/// Asynchronous gossip online EM: only the two active nodes update.
pub fn run_async(
    graph: Graph,
    nodes: Vec<NodeState>,
    prior: DirichletParams,
    iterations: u64,
    config: UpdateConfig,
    edge_rng: StreamRng,
    cadence: u64,
) -> Result<Vec<TrajectoryRecord>> {
    Decentralized::new(graph, nodes, prior, Mode::Async, config, edge_rng)?.run(iterations, cadence)
}

/// Plain online EM on the pooled corpus with uniformly sampled batches.
#[derive(Debug, Clone)]
pub struct Centralized {
    corpus: Vec<Document>,
    stats: SufficientStats,
    prior: DirichletParams,
    config: UpdateConfig,
    batch_size: usize,
    rng: StreamRng,
    iteration: u64,
    docs_processed: u64,
}

impl Centralized {
    pub fn new(
        corpus: Vec<Document>,
        initial: SufficientStats,
        prior: DirichletParams,
        batch_size: usize,
        config: UpdateConfig,
        rng: StreamRng,
    ) -> Result<Self> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::Config("centralized corpus is empty".into()));
        }
        if batch_size == 0 || batch_size > corpus.len() {
            return Err(Error::Precondition(format!(
                "batch size {batch_size} must lie in 1..={}",
                corpus.len()
            )));
        }
        if initial.topics() != prior.topics() {
            return Err(Error::Config("prior and stats disagree on K".into()));
        }
        for doc in &corpus {
            doc.check_vocab(initial.vocab())?;
        }
        Ok(Centralized {
            corpus,
            stats: initial,
            prior,
            config,
            batch_size,
            rng,
            iteration: 0,
            docs_processed: 0,
        })
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn docs_processed(&self) -> u64 {
        self.docs_processed
    }

    pub fn config(&self) -> &UpdateConfig {
        &self.config
    }

    pub fn topic_matrix(&self) -> Result<TopicMatrix> {
        lda::m_step(&self.stats, self.config.smoothing)
    }

    pub fn step(&mut self) -> Result<()> {
        self.iteration += 1;
        let rho = self.config.schedule.rho(self.iteration);
        if rho == 0.0 {
            return Ok(());
        }
        let beta = lda::m_step(&self.stats, self.config.smoothing)?;
        let batch: Vec<&Document> = index::sample(&mut self.rng, self.corpus.len(), self.batch_size)
            .iter()
            .map(|i| &self.corpus[i])
            .collect();
        self.stats = lda::goem_update(
            &self.stats,
            &batch,
            &beta,
            &self.prior,
            rho,
            &self.config.estep,
            &mut self.rng,
        )?;
        self.docs_processed += self.batch_size as u64;
        Ok(())
    }

    pub fn record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            iteration: self.iteration,
            docs_processed: self.docs_processed,
            consensus_gap: 0.0,
            stats: vec![self.stats.clone()],
        }
    }

    pub fn run(&mut self, iterations: u64, cadence: u64) -> Result<Vec<TrajectoryRecord>> {
        let mut out = vec![self.record()];
        self.run_with(iterations, cadence, |c| {
            out.push(c.record());
            Ok(())
        })?;
        Ok(out)
    }

    pub fn run_with(
        &mut self,
        iterations: u64,
        cadence: u64,
        mut observe: impl FnMut(&Self) -> Result<()>,
    ) -> Result<()> {
        let end = self.iteration + iterations;
        while self.iteration < end {
            self.step()?;
            if is_checkpoint(self.iteration, cadence, end) {
                observe(self)?;
            }
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            mode: Mode::Centralized,
            iteration: self.iteration,
            docs_processed: self.docs_processed,
            engine_rng: None,
            nodes: vec![NodeCheckpoint {
                updates: self.iteration,
                rng: RngState::capture(&self.rng),
                stats: self.stats.clone(),
            }],
        }
    }

    pub fn restore(&mut self, cp: &Checkpoint) -> Result<()> {
        if cp.mode != Mode::Centralized || cp.nodes.len() != 1 {
            return Err(Error::Input("checkpoint is not a centralized run".into()));
        }
        let saved = &cp.nodes[0];
        if !saved.stats.same_shape(&self.stats) {
            return Err(Error::Input("checkpoint stats shape mismatch".into()));
        }
        self.stats = saved.stats.clone();
        self.rng = saved.rng.restore();
        self.iteration = cp.iteration;
        self.docs_processed = cp.docs_processed;
        Ok(())
    }
}

/// Online EM on the pooled corpus for `iterations` steps.
#[allow(clippy::too_many_arguments)]
pub fn run_centralized(
    corpus: Vec<Document>,
    initial: SufficientStats,
    prior: DirichletParams,
    iterations: u64,
    batch_size: usize,
    config: UpdateConfig,
    rng: StreamRng,
    cadence: u64,
) -> Result<Vec<TrajectoryRecord>> {
    Centralized::new(corpus, initial, prior, batch_size, config, rng)?.run(iterations, cadence)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCheckpoint {
    pub updates: u64,
    pub rng: RngState,
    pub stats: SufficientStats,
}

/// Resumable engine state. Corpora are not stored; they are regenerated from
/// the experiment seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub mode: Mode,
    pub iteration: u64,
    pub docs_processed: u64,
    pub engine_rng: Option<RngState>,
    pub nodes: Vec<NodeCheckpoint>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let (k, v) = self
            .nodes
            .first()
            .map_or((0, 0), |n| (n.stats.topics(), n.stats.vocab()));
        let mut out = format!(
            "checkpoint mode={} iter={} docs={} nodes={} K={k} V={v}\n",
            self.mode,
            self.iteration,
            self.docs_processed,
            self.nodes.len()
        );
        match &self.engine_rng {
            Some(state) => out.push_str(&format!("engine_rng {}\n", state.to_text())),
            None => out.push_str("engine_rng none\n"),
        }
        for (i, node) in self.nodes.iter().enumerate() {
            out.push_str(&format!(
                "node {i} updates={} rng {}\n",
                node.updates,
                node.rng.to_text()
            ));
            out.push_str(&node.stats.to_text());
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty checkpoint".into()))?;
        if !header.starts_with("checkpoint ") {
            return Err(Error::Parse("missing checkpoint header".into()));
        }
        let mode: Mode = header
            .split_whitespace()
            .find_map(|t| t.strip_prefix("mode="))
            .ok_or_else(|| Error::Parse("checkpoint header lacks mode".into()))?
            .parse()?;
        let iteration = text::header_value(header, "iter")? as u64;
        let docs_processed = text::header_value(header, "docs")? as u64;
        let n_nodes = text::header_value(header, "nodes")?;
        let topics = text::header_value(header, "K")?;

        let engine_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing engine_rng line".into()))?;
        let engine_rng = match engine_line.strip_prefix("engine_rng ") {
            Some("none") => None,
            Some(rest) => Some(RngState::from_text(rest)?),
            None => return Err(Error::Parse("missing engine_rng line".into())),
        };

        let mut nodes = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("checkpoint truncated before node {i}")))?;
            let rest = line
                .strip_prefix(&format!("node {i} "))
                .ok_or_else(|| Error::Parse(format!("expected node {i} header, got `{line}`")))?;
            let updates = text::header_value(rest, "updates")? as u64;
            let rng_text = rest
                .split_once(" rng ")
                .map(|(_, r)| r)
                .ok_or_else(|| Error::Parse(format!("node {i} lacks rng state")))?;
            let rng = RngState::from_text(rng_text)?;
            let rows: Vec<&str> = lines.by_ref().take(topics).collect();
            let (r, cols, data) = text::parse_rows(rows)?;
            if r != topics {
                return Err(Error::Parse(format!("node {i} has {r} stat rows, expected {topics}")));
            }
            nodes.push(NodeCheckpoint {
                updates,
                rng,
                stats: SufficientStats::from_vec(topics, cols, data)?,
            });
        }
        Ok(Checkpoint {
            mode,
            iteration,
            docs_processed,
            engine_rng,
            nodes,
        })
    }
}
