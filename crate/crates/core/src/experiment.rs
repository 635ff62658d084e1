//! End-to-end experiment runner: synthetic data, training, evaluation at a
//! fixed cadence, CSV trajectories, and run comparison.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine;
use crate::engine::{BatchPolicy, Centralized, Checkpoint, Decentralized, Mode, NodeState, StepSchedule, UpdateConfig};
use crate::error::{Error, Result};
use crate::evaluation::{EvalReport, Evaluator};
use crate::lda::{self, DirichletParams, Document, EStep, GibbsConfig, TopicMatrix};
use crate::network::{self, Graph};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Complete,
    WattsStrogatz { k: usize, p: f64 },
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Complete => "complete",
            Topology::WattsStrogatz { .. } => "watts_strogatz",
        }
    }

    pub fn build(&self, n: usize, master_seed: u64) -> Result<Graph> {
        match *self {
            Topology::Complete => network::complete_graph(n),
            Topology::WattsStrogatz { k, p } => {
                network::watts_strogatz(n, k, p, &mut rng::stream(master_seed, streams::GRAPH))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_nodes: usize,
    pub docs_per_node: usize,
    pub vocab: usize,
    pub topics: usize,
    pub mean_doc_length: f64,
    pub topology: Topology,
    pub mode: Mode,
    pub iterations: u64,
    pub schedule: StepSchedule,
    pub gibbs: GibbsConfig,
    /// Documents per local update; 0 means the whole shard.
    pub local_batch: usize,
    pub central_batch: usize,
    pub smoothing: f64,
    pub n_test_docs: usize,
    pub particles: usize,
    pub cadence: u64,
    /// Concentration of the symmetric Dirichlet each true topic is drawn from.
    pub beta_concentration: f64,
    /// Symmetric true α; `None` means `1/K`.
    pub alpha: Option<f64>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_nodes: 50,
            docs_per_node: 20,
            vocab: 100,
            topics: 5,
            mean_doc_length: 10.0,
            topology: Topology::Complete,
            mode: Mode::Sync,
            iterations: 1000,
            schedule: StepSchedule::default(),
            gibbs: GibbsConfig::default(),
            local_batch: 0,
            central_batch: 20,
            smoothing: 1e-8,
            n_test_docs: 200,
            particles: 20,
            cadence: 10,
            beta_concentration: 0.1,
            alpha: None,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("`{key} = {value}`: {e}")))
}

impl ExperimentConfig {
    pub fn alpha_value(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.topics as f64)
    }

    pub fn total_docs(&self) -> usize {
        self.n_nodes * self.docs_per_node
    }

    pub fn update_config(&self) -> UpdateConfig {
        UpdateConfig {
            schedule: self.schedule,
            estep: EStep::Gibbs(self.gibbs),
            batch: match self.local_batch {
                0 => BatchPolicy::FullShard,
                b => BatchPolicy::Sample(b),
            },
            smoothing: self.smoothing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_nodes", self.n_nodes),
            ("docs_per_node", self.docs_per_node),
            ("vocab", self.vocab),
            ("topics", self.topics),
            ("central_batch", self.central_batch),
            ("eval.n_test_docs", self.n_test_docs),
            ("eval.particles", self.particles),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.n_nodes < 2 && self.mode != Mode::Centralized {
            return Err(Error::Config("decentralized runs need at least two nodes".into()));
        }
        if !(self.mean_doc_length.is_finite() && self.mean_doc_length > 0.0) {
            return Err(Error::Config("mean_doc_length must be positive".into()));
        }
        if self.local_batch > self.docs_per_node {
            return Err(Error::Config("batch.local exceeds docs_per_node".into()));
        }
        if self.central_batch > self.total_docs() {
            return Err(Error::Config("batch.centralized exceeds the corpus size".into()));
        }
        if let Topology::WattsStrogatz { k, p } = self.topology {
            if k < 2 || k % 2 == 1 || self.n_nodes <= k || !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "watts_strogatz needs even k ≥ 2, n > k and p in [0, 1]; got k={k} p={p} n={}",
                    self.n_nodes
                )));
            }
        }
        if !(self.beta_concentration.is_finite() && self.beta_concentration > 0.0) {
            return Err(Error::Config("truth.beta_concentration must be positive".into()));
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config("truth.alpha must be positive".into()));
            }
        }
        self.update_config().validate()
    }

    /// Flat `key = value` text, one entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            writeln!(out, "{k} = {v}").expect("writing to a String cannot fail");
        };
        put("n_nodes", self.n_nodes.to_string());
        put("docs_per_node", self.docs_per_node.to_string());
        put("vocab", self.vocab.to_string());
        put("topics", self.topics.to_string());
        put("mean_doc_length", self.mean_doc_length.to_string());
        put("topology", self.topology.name().to_string());
        if let Topology::WattsStrogatz { k, p } = self.topology {
            put("topology.k", k.to_string());
            put("topology.p", p.to_string());
        }
        put("mode", self.mode.to_string());
        put("iterations", self.iterations.to_string());
        match self.schedule {
            StepSchedule::Polynomial { t0, kappa } => {
                put("schedule.t0", t0.to_string());
                put("schedule.kappa", kappa.to_string());
            }
            StepSchedule::Constant(rho) => put("schedule.constant", rho.to_string()),
        }
        put("estep.sweeps", self.gibbs.sweeps.to_string());
        put("estep.burn_in", self.gibbs.burn_in.to_string());
        put("batch.local", self.local_batch.to_string());
        put("batch.centralized", self.central_batch.to_string());
        put("smoothing", self.smoothing.to_string());
        put("eval.n_test_docs", self.n_test_docs.to_string());
        put("eval.particles", self.particles.to_string());
        put("eval.cadence", self.cadence.to_string());
        put("truth.beta_concentration", self.beta_concentration.to_string());
        if let Some(a) = self.alpha {
            put("truth.alpha", a.to_string());
        }
        put("master_seed", self.master_seed.to_string());
        put("output.dir", self.output_dir.display().to_string());
        out
    }

    /// Parses the `to_text` format. Missing keys keep their defaults; `#`
    /// starts a comment.
    pub fn from_text(s: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{}`", k.trim())));
            }
        }

        let mut cfg = ExperimentConfig::default();
        let mut take = |key: &str| entries.remove(key);
        macro_rules! field {
            ($key:literal => $target:expr) => {
                if let Some(v) = take($key) {
                    $target = parse_value($key, &v)?;
                }
            };
        }
        field!("n_nodes" => cfg.n_nodes);
        field!("docs_per_node" => cfg.docs_per_node);
        field!("vocab" => cfg.vocab);
        field!("topics" => cfg.topics);
        field!("mean_doc_length" => cfg.mean_doc_length);
        field!("mode" => cfg.mode);
        field!("iterations" => cfg.iterations);
        field!("estep.sweeps" => cfg.gibbs.sweeps);
        field!("estep.burn_in" => cfg.gibbs.burn_in);
        field!("batch.local" => cfg.local_batch);
        field!("batch.centralized" => cfg.central_batch);
        field!("smoothing" => cfg.smoothing);
        field!("eval.n_test_docs" => cfg.n_test_docs);
        field!("eval.particles" => cfg.particles);
        field!("eval.cadence" => cfg.cadence);
        field!("truth.beta_concentration" => cfg.beta_concentration);
        field!("master_seed" => cfg.master_seed);
        if let Some(a) = take("truth.alpha") {
            cfg.alpha = Some(parse_value("truth.alpha", &a)?);
        }
        if let Some(d) = take("output.dir") {
            cfg.output_dir = PathBuf::from(d);
        }

        let wk = take("topology.k");
        let wp = take("topology.p");
        match take("topology").as_deref() {
            None | Some("complete") => {
                if wk.is_some() || wp.is_some() {
                    return Err(Error::Config("topology.k/p only apply to watts_strogatz".into()));
                }
                cfg.topology = Topology::Complete;
            }
            Some("watts_strogatz") => {
                cfg.topology = Topology::WattsStrogatz {
                    k: wk.map_or(Ok(4), |v| parse_value("topology.k", &v))?,
                    p: wp.map_or(Ok(0.3), |v| parse_value("topology.p", &v))?,
                };
            }
            Some(other) => return Err(Error::Config(format!("unknown topology `{other}`"))),
        }

        let t0 = take("schedule.t0");
        let kappa = take("schedule.kappa");
        match take("schedule.constant") {
            Some(rho) => {
                if t0.is_some() || kappa.is_some() {
                    return Err(Error::Config("schedule.constant excludes schedule.t0/kappa".into()));
                }
                cfg.schedule = StepSchedule::Constant(parse_value("schedule.constant", &rho)?);
            }
            None => {
                let (d0, dk) = match StepSchedule::default() {
                    StepSchedule::Polynomial { t0, kappa } => (t0, kappa),
                    StepSchedule::Constant(_) => unreachable!(),
                };
                cfg.schedule = StepSchedule::Polynomial {
                    t0: t0.map_or(Ok(d0), |v| parse_value("schedule.t0", &v))?,
                    kappa: kappa.map_or(Ok(dk), |v| parse_value("schedule.kappa", &v))?,
                };
            }
        }

        if let Some(key) = entries.keys().next() {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Ground truth, shards and held-out documents of one experiment seed.
///
/// Generated from dedicated streams, so every mode and topology run with the
/// same seed sees identical data.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub beta_star: TopicMatrix,
    pub alpha_star: DirichletParams,
    pub shards: Vec<Vec<Document>>,
    pub test_docs: Vec<Document>,
}

impl ExperimentData {
    pub fn generate(cfg: &ExperimentConfig) -> Result<Self> {
        let seed = cfg.master_seed;
        let beta_star = TopicMatrix::sample_dirichlet_rows(
            cfg.topics,
            cfg.vocab,
            cfg.beta_concentration,
            &mut rng::stream(seed, streams::GROUND_TRUTH),
        )?;
        let alpha_star = DirichletParams::symmetric(cfg.topics, cfg.alpha_value())?;
        let train = lda::generate_corpus(
            cfg.total_docs(),
            &beta_star,
            &alpha_star,
            cfg.mean_doc_length,
            &mut rng::stream(seed, streams::CORPUS),
        )?;
        let docs: Vec<Document> = train.into_iter().map(|(d, _)| d).collect();
        let shards = docs.chunks(cfg.docs_per_node).map(<[Document]>::to_vec).collect();
        let test_docs = lda::generate_corpus(
            cfg.n_test_docs,
            &beta_star,
            &alpha_star,
            cfg.mean_doc_length,
            &mut rng::stream(seed, streams::TEST_CORPUS),
        )?
        .into_iter()
        .map(|(d, _)| d)
        .collect();
        Ok(ExperimentData {
            beta_star,
            alpha_star,
            shards,
            test_docs,
        })
    }

    pub fn pooled(&self) -> Vec<Document> {
        self.shards.concat()
    }

    /// Writes ground truth, per-node shards and the test set into `dir`.
    pub fn write(&self, dir: &Path, graph: Option<&Graph>) -> Result<()> {
        fs::create_dir_all(dir)?;
        let k = self.beta_star.topics();
        let v = self.beta_star.vocab();
        fs::write(dir.join("beta_star.txt"), self.beta_star.to_text())?;
        fs::write(dir.join("alpha_star.txt"), self.alpha_star.to_text())?;
        fs::write(dir.join("test.txt"), lda::write_corpus(&self.test_docs, v, k))?;
        for (i, shard) in self.shards.iter().enumerate() {
            fs::write(dir.join(format!("node_{i:03}.txt")), lda::write_corpus(shard, v, k))?;
        }
        if let Some(g) = graph {
            fs::write(dir.join("graph.txt"), g.to_text())?;
        }
        Ok(())
    }
}

/// One CSV line of a training trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iter: u64,
    pub mode: String,
    pub graph: String,
    pub seed: u64,
    pub consensus_gap: f64,
    pub lp_rel_error: f64,
    pub beta_distance: f64,
    pub lp_abs_gap: f64,
    pub lp: f64,
    pub docs_processed: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "iter",
    "mode",
    "graph",
    "seed",
    "consensus_gap",
    "lp_rel_error",
    "beta_distance",
    "lp_abs_gap",
    "lp",
    "docs_processed",
];

pub fn write_csv(rows: &[TrajectoryRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Input(format!(
            "trajectory schema mismatch: expected `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.join(",")
        )));
    }
    let rows: Vec<TrajectoryRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.windows(2).any(|w| w[1].iter <= w[0].iter) {
        return Err(Error::Input("iteration column is not increasing".into()));
    }
    Ok(rows)
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<TrajectoryRow>,
    pub final_report: EvalReport,
    pub checkpoint: Checkpoint,
}

impl ExperimentOutput {
    pub fn csv(&self) -> Result<String> {
        write_csv(&self.rows)
    }

    /// Writes `trajectory.csv`, `checkpoint.txt` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("trajectory.csv"), self.csv()?)?;
        fs::write(dir.join("checkpoint.txt"), self.checkpoint.to_text())?;
        fs::write(dir.join("report.txt"), format_report(&self.final_report))?;
        Ok(())
    }
}

pub fn format_report(r: &EvalReport) -> String {
    format!(
        "lp = {}\nlp_star = {}\nrel_error = {}\nabs_gap = {}\nbeta_distance = {}\n",
        r.lp, r.lp_star, r.rel_error, r.abs_gap, r.beta_distance
    )
}

enum Runner {
    Gossip(Decentralized),
    Central(Centralized),
}

impl Runner {
    fn build(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<Self> {
        let seed = cfg.master_seed;
        let update = cfg.update_config();
        match cfg.mode {
            Mode::Centralized => {
                let pooled = data.pooled();
                let mut r = rng::stream(seed, streams::CENTRAL_ESTEP);
                let init = engine::initial_stats(cfg.topics, cfg.vocab, engine::mean_length(&pooled), &mut r)?;
                Ok(Runner::Central(Centralized::new(
                    pooled,
                    init,
                    data.alpha_star.clone(),
                    cfg.central_batch,
                    update,
                    r,
                )?))
            }
            mode => {
                let graph = cfg.topology.build(cfg.n_nodes, seed)?;
                let nodes = data
                    .shards
                    .iter()
                    .enumerate()
                    .map(|(i, shard)| {
                        NodeState::with_random_stats(
                            i,
                            shard.clone(),
                            cfg.topics,
                            cfg.vocab,
                            rng::stream(seed, streams::NODE_BASE + i as u64),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Runner::Gossip(Decentralized::new(
                    graph,
                    nodes,
                    data.alpha_star.clone(),
                    mode,
                    update,
                    rng::stream(seed, streams::EDGES),
                )?))
            }
        }
    }

    fn iteration(&self) -> u64 {
        match self {
            Runner::Gossip(s) => s.iteration(),
            Runner::Central(c) => c.iteration(),
        }
    }

    fn restore(&mut self, cp: &Checkpoint) -> Result<()> {
        match self {
            Runner::Gossip(s) => s.restore(cp),
            Runner::Central(c) => c.restore(cp),
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        match self {
            Runner::Gossip(s) => s.checkpoint(),
            Runner::Central(c) => c.checkpoint(),
        }
    }
}

struct RowMaker<'a> {
    cfg: &'a ExperimentConfig,
    evaluator: &'a Evaluator,
    graph_name: &'static str,
}

impl RowMaker<'_> {
    fn row(&self, iter: u64, docs: u64, gap: f64, betas: &[TopicMatrix]) -> Result<(TrajectoryRow, EvalReport)> {
        let report = self.evaluator.evaluate(betas)?;
        Ok((
            TrajectoryRow {
                iter,
                mode: self.cfg.mode.to_string(),
                graph: self.graph_name.to_string(),
                seed: self.cfg.master_seed,
                consensus_gap: gap,
                lp_rel_error: report.rel_error,
                beta_distance: report.beta_distance,
                lp_abs_gap: report.abs_gap,
                lp: report.lp,
                docs_processed: docs,
            },
            report,
        ))
    }

    fn gossip(&self, s: &Decentralized) -> Result<(TrajectoryRow, EvalReport)> {
        self.row(
            s.iteration(),
            s.docs_processed(),
            s.consensus_gap(),
            &s.topic_matrices()?,
        )
    }

    fn central(&self, c: &Centralized) -> Result<(TrajectoryRow, EvalReport)> {
        self.row(c.iteration(), c.docs_processed(), 0.0, &[c.topic_matrix()?])
    }
}

/// Generates data, trains, and evaluates every `cadence` iterations.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_from(cfg, None)
}

/// Like [`run_experiment`], but continues from `resume` up to
/// `cfg.iterations`. Rows are only produced after the checkpoint.
pub fn run_experiment_from(cfg: &ExperimentConfig, resume: Option<&Checkpoint>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let data = ExperimentData::generate(cfg)?;
    let evaluator = Evaluator::new(
        data.test_docs.clone(),
        data.beta_star.clone(),
        data.alpha_star.clone(),
        cfg.particles,
        cfg.master_seed,
    )?;
    let mut runner = Runner::build(cfg, &data)?;
    let maker = RowMaker {
        cfg,
        evaluator: &evaluator,
        graph_name: match cfg.mode {
            Mode::Centralized => "none",
            _ => cfg.topology.name(),
        },
    };

    let mut rows = Vec::new();
    let mut last = None;
    if let Some(cp) = resume {
        runner.restore(cp)?;
    }
    if runner.iteration() > cfg.iterations {
        return Err(Error::Input(format!(
            "checkpoint at iteration {} is past the configured {} iterations",
            runner.iteration(),
            cfg.iterations
        )));
    }
    let remaining = cfg.iterations - runner.iteration();
    let mut push = |(row, report): (TrajectoryRow, EvalReport)| {
        rows.push(row);
        last = Some(report);
    };
    match &mut runner {
        Runner::Gossip(s) => {
            if resume.is_none() {
                push(maker.gossip(s)?);
            }
            s.run_with(remaining, cfg.cadence, |s| {
                push(maker.gossip(s)?);
                Ok(())
            })?;
        }
        Runner::Central(c) => {
            if resume.is_none() {
                push(maker.central(c)?);
            }
            c.run_with(remaining, cfg.cadence, |c| {
                push(maker.central(c)?);
                Ok(())
            })?;
        }
    }
    let final_report = match last {
        Some(r) => r,
        None => match &runner {
            Runner::Gossip(s) => maker.gossip(s)?.1,
            Runner::Central(c) => maker.central(c)?.1,
        },
    };
    Ok(ExperimentOutput {
        rows,
        final_report,
        checkpoint: runner.checkpoint(),
    })
}

/// First evaluated iteration with `lp_rel_error ≤ threshold`.
pub fn iterations_to_threshold(rows: &[TrajectoryRow], threshold: f64) -> Option<u64> {
    rows.iter().find(|r| r.lp_rel_error <= threshold).map(|r| r.iter)
}

/// Mean `lp_rel_error` over the last `tail` rows.
pub fn asymptote(rows: &[TrajectoryRow], tail: usize) -> f64 {
    let tail = &rows[rows.len().saturating_sub(tail.max(1))..];
    tail.iter().map(|r| r.lp_rel_error).sum::<f64>() / tail.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub mode: String,
    pub graph: String,
    pub final_iter: u64,
    pub final_docs: u64,
    pub final_rel_error: f64,
    pub final_beta_distance: f64,
    /// Trapezoidal area of `lp_rel_error` over iterations.
    pub auc_iter: f64,
    /// Trapezoidal area of `lp_rel_error` over documents processed.
    pub auc_docs: f64,
    /// Largest `|Δ lp_rel_error|` against the first run at shared iterations.
    pub max_diff_iter: f64,
    /// Largest `|Δ lp_rel_error|` against the first run along the documents
    /// axis, interpolating this run linearly.
    pub max_diff_docs: f64,
}

fn trapezoid(xs: impl Iterator<Item = f64>, ys: &[f64]) -> f64 {
    let xs: Vec<f64> = xs.collect();
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * 0.5 * (y[0] + y[1]))
        .sum()
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let i = xs.partition_point(|&v| v < x);
    if i < xs.len() && xs[i] == x {
        return Some(ys[i]);
    }
    if i == 0 || i == xs.len() {
        return None;
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Some(ys[i - 1] + t * (ys[i] - ys[i - 1]))
}

/// Summarizes runs, aligning each against the first on both axes.
pub fn compare_runs(runs: &[(String, Vec<TrajectoryRow>)]) -> Result<Vec<RunSummary>> {
    let (_, reference) = runs.first().ok_or_else(|| Error::Input("nothing to compare".into()))?;
    let ref_iters: BTreeMap<u64, f64> = reference.iter().map(|r| (r.iter, r.lp_rel_error)).collect();
    let mut out = Vec::with_capacity(runs.len());
    for (name, rows) in runs {
        let last = rows
            .last()
            .ok_or_else(|| Error::Input(format!("run `{name}` has no rows")))?;
        let errs: Vec<f64> = rows.iter().map(|r| r.lp_rel_error).collect();
        let docs: Vec<f64> = rows.iter().map(|r| r.docs_processed as f64).collect();
        let max_diff_iter = rows
            .iter()
            .filter_map(|r| ref_iters.get(&r.iter).map(|e| (e - r.lp_rel_error).abs()))
            .fold(0.0, f64::max);
        let docs_monotone = docs.windows(2).all(|w| w[0] < w[1]);
        let max_diff_docs = if docs_monotone {
            reference
                .iter()
                .filter_map(|r| interpolate(&docs, &errs, r.docs_processed as f64).map(|e| (e - r.lp_rel_error).abs()))
                .fold(0.0, f64::max)
        } else {
            f64::NAN
        };
        out.push(RunSummary {
            name: name.clone(),
            mode: last.mode.clone(),
            graph: last.graph.clone(),
            final_iter: last.iter,
            final_docs: last.docs_processed,
            final_rel_error: last.lp_rel_error,
            final_beta_distance: last.beta_distance,
            auc_iter: trapezoid(rows.iter().map(|r| r.iter as f64), &errs),
            auc_docs: trapezoid(docs.iter().copied(), &errs),
            max_diff_iter,
            max_diff_docs,
        });
    }
    Ok(out)
}

pub fn format_summary(summaries: &[RunSummary]) -> String {
    let mut out = String::from(
        "run\tmode\tgraph\tfinal_iter\tfinal_docs\tfinal_rel_error\tfinal_beta_distance\tauc_iter\tauc_docs\tmax_diff_iter\tmax_diff_docs\n",
    );
    for s in summaries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            s.name,
            s.mode,
            s.graph,
            s.final_iter,
            s.final_docs,
            s.final_rel_error,
            s.final_beta_distance,
            s.auc_iter,
            s.auc_docs,
            s.max_diff_iter,
            s.max_diff_docs
        )
        .expect("writing to a String cannot fail");
    }
    out
}
