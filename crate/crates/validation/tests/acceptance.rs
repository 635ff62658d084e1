//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any of them fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::Instant;

use deleda::engine::{BatchPolicy, Centralized, Decentralized, Mode, NodeState, StepSchedule, UpdateConfig};
use deleda::evaluation;
use deleda::experiment::{self, ExperimentConfig, Topology, TrajectoryRow};
use deleda::lda::{self, DirichletParams, Document, EStep, GibbsConfig, SufficientStats, TopicMatrix};
use deleda::network;
use deleda::rng::{self, streams};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn estep_oracle() -> Outcome {
    let mut r = common::rng(0xE57E);
    let cfg = GibbsConfig {
        sweeps: 2000,
        burn_in: 100,
    };
    let mut good = 0;
    let mut errs = Vec::new();
    for i in 0..20u64 {
        let k = if r.random_bool(0.5) { 2 } else { 3 };
        let v = if r.random_bool(0.5) { 3 } else { 5 };
        let (beta, alpha, doc) = common::tiny_instance(&mut r, k, v, 6);
        let exact = lda::exact_estep(&doc, &beta, &alpha).unwrap();
        let oracle = common::exact_expected_counts(&doc, &beta, &alpha);
        assert!(
            common::max_abs(exact.as_slice(), &oracle) < 1e-12,
            "exact E-step disagrees with enumeration"
        );
        let gibbs = lda::gibbs_estep(&doc, &beta, &alpha, &cfg, &mut rng::stream(1, i)).unwrap();
        let err = exact.max_abs_diff(&gibbs);
        if err <= 0.02 {
            good += 1;
        }
        errs.push(err);
    }
    Outcome {
        pass: good >= 18,
        detail: format!(
            "{good}/20 instances within 0.02 (median error {:.4}, worst {:.4})",
            median(errs.clone()),
            errs.iter().cloned().fold(0.0, f64::max)
        ),
    }
}

fn left_to_right() -> Outcome {
    let mut r = common::rng(0x12B);
    let mut good = 0;
    let mut worst = 0.0f64;
    for d in 0..10u64 {
        let (beta, alpha, doc) = common::tiny_instance(&mut r, 3, 5, 6);
        let exact = common::exact_log_likelihood(&doc, &beta, &alpha);
        let est = evaluation::left_to_right_likelihood(&doc, &beta, &alpha, 200, &mut rng::stream(2, d)).unwrap();
        let err = (est - exact).abs();
        worst = worst.max(err);
        if err <= 0.05 {
            good += 1;
        }
    }
    let mut single_worst = 0.0f64;
    for d in 0..20u64 {
        let (beta, alpha, doc) = common::tiny_instance(&mut r, 3, 5, 1);
        let exact = common::exact_log_likelihood(&doc, &beta, &alpha);
        let est = evaluation::left_to_right_likelihood(&doc, &beta, &alpha, 200, &mut rng::stream(3, d)).unwrap();
        single_worst = single_worst.max((est - exact).abs());
    }
    Outcome {
        pass: good >= 9 && single_worst <= 1e-12,
        detail: format!("{good}/10 within 0.05 nats (worst {worst:.4}); single-word worst {single_worst:.1e}"),
    }
}

fn mass_and_consensus() -> Outcome {
    let mut r = common::rng(0x3A55);
    let graph = network::watts_strogatz(20, 4, 0.3, &mut r).unwrap();
    let mut states: Vec<SufficientStats> = (0..20)
        .map(|_| SufficientStats::from_vec(3, 8, (0..24).map(|_| r.random_range(0.0..10.0)).collect()).unwrap())
        .collect();
    let total0: f64 = states.iter().map(|s| s.total()).sum();
    let mut prev = total0;
    let mut drift = 0.0f64;
    for _ in 0..10_000 {
        let (i, j) = graph.sample_edge(&mut r);
        network::apply_pairwise_average(&mut states, i, j).unwrap();
        let total: f64 = states.iter().map(|s| s.total()).sum();
        drift = drift.max((total - prev).abs() / total0);
        prev = total;
    }

    let nodes = (0..10)
        .map(|i| {
            NodeState::with_random_stats(
                i,
                vec![Document::new(vec![0], 4).unwrap()],
                2,
                4,
                rng::stream(4, i as u64),
            )
            .unwrap()
        })
        .collect();
    let mut sim = Decentralized::new(
        network::complete_graph(10).unwrap(),
        nodes,
        DirichletParams::symmetric(2, 0.5).unwrap(),
        Mode::Sync,
        UpdateConfig {
            schedule: StepSchedule::Constant(0.0),
            ..UpdateConfig::default()
        },
        rng::stream(4, streams::EDGES),
    )
    .unwrap();
    let gap0 = sim.consensus_gap();
    let mut reached = None;
    while sim.iteration() < 2000 {
        sim.step().unwrap();
        if reached.is_none() && sim.consensus_gap() < 1e-6 * gap0 {
            reached = Some(sim.iteration());
        }
    }
    Outcome {
        pass: drift <= 1e-12 && reached.is_some(),
        detail: format!(
            "max relative drift per step {drift:.1e}; gap below 1e-6 of start at iteration {}",
            reached.map_or("never".to_string(), |t| t.to_string())
        ),
    }
}

fn mean_trajectory() -> Outcome {
    let beta0 = TopicMatrix::from_rows(&[vec![0.5, 0.3, 0.1, 0.1], vec![0.1, 0.1, 0.2, 0.6]]).unwrap();
    let alpha = DirichletParams::new(vec![0.7, 1.2]).unwrap();
    let docs: Vec<Document> = lda::generate_corpus(12, &beta0, &alpha, 3.0, &mut rng::stream(5, streams::CORPUS))
        .unwrap()
        .into_iter()
        .map(|(d, _)| Document::new(d.words()[..d.len().min(5)].to_vec(), 4).unwrap())
        .collect();
    let shards: Vec<Vec<Document>> = docs.chunks(3).map(<[Document]>::to_vec).collect();
    let config = UpdateConfig {
        schedule: StepSchedule::default(),
        estep: EStep::Exact,
        batch: BatchPolicy::FullShard,
        smoothing: 1e-8,
    };
    let nodes: Vec<NodeState> = shards
        .iter()
        .enumerate()
        .map(|(i, s)| {
            NodeState::with_random_stats(i, s.clone(), 2, 4, rng::stream(5, streams::NODE_BASE + i as u64)).unwrap()
        })
        .collect();
    let mut sim = Decentralized::new(
        network::complete_graph(4).unwrap(),
        nodes,
        alpha.clone(),
        Mode::Sync,
        config.clone(),
        rng::stream(5, streams::EDGES),
    )
    .unwrap();
    let mut central = Centralized::new(
        docs.clone(),
        sim.mean_stats(),
        alpha.clone(),
        docs.len(),
        config.clone(),
        rng::stream(5, streams::CENTRAL_BATCH),
    )
    .unwrap();

    let mut vs_central = 0.0f64;
    let mut vs_local_mean = 0.0f64;
    for _ in 0..50 {
        let mut pre = sim.stats();
        let (i, j) = sim.step().unwrap();
        central.step().unwrap();
        network::apply_pairwise_average(&mut pre, i, j).unwrap();
        let rho = config.schedule.rho(sim.iteration());
        let local: Vec<SufficientStats> = pre
            .iter()
            .zip(&shards)
            .map(|(s, shard)| {
                let batch: Vec<&Document> = shard.iter().collect();
                lda::batch_estep(
                    &batch,
                    &lda::m_step(s, 1e-8).unwrap(),
                    &alpha,
                    &EStep::Exact,
                    &mut common::rng(0),
                )
                .unwrap()
            })
            .collect();
        let g = SufficientStats::mean(&local).unwrap();
        let m = SufficientStats::mean(&pre).unwrap();
        let predicted: Vec<f64> = m
            .as_slice()
            .iter()
            .zip(g.as_slice())
            .map(|(s, e)| (1.0 - rho) * s + rho * e)
            .collect();
        let mean = sim.mean_stats();
        vs_local_mean = vs_local_mean.max(common::max_abs(&predicted, mean.as_slice()));
        vs_central = vs_central.max(mean.max_abs_diff(central.stats()));
    }
    Outcome {
        pass: vs_central <= 1e-9,
        detail: format!(
            "max |s̄ - centralized| over 50 iterations {vs_central:.2e}; \
             max |s̄ - (1-ρ)s̄ - ρ·mean of node E-steps| {vs_local_mean:.2e}"
        ),
    }
}

fn spectral() -> Outcome {
    let mut worst = 0.0f64;
    for n in [3, 10, 50] {
        let sg = network::spectral_gap(&network::complete_graph(n).unwrap()).unwrap();
        worst = worst.max((sg.gap - 1.0 / (n as f64 - 1.0)).abs());
    }
    let ring = network::spectral_gap(&network::ring_lattice(50, 4).unwrap())
        .unwrap()
        .gap;
    let complete = network::spectral_gap(&network::complete_graph(50).unwrap())
        .unwrap()
        .gap;
    Outcome {
        pass: worst <= 1e-9 && ring < complete,
        detail: format!(
            "complete-graph gap error {worst:.1e}; ring(50,4) gap {ring:.5} < complete(50) gap {complete:.5}"
        ),
    }
}

fn desk_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n_nodes: 10,
        docs_per_node: 20,
        vocab: 50,
        topics: 5,
        mean_doc_length: 10.0,
        master_seed: seed,
        ..ExperimentConfig::default()
    }
}

/// 100 passes over the 200 training documents for both modes.
fn convergence_configs(seed: u64) -> [ExperimentConfig; 2] {
    let base = desk_config(seed);
    [
        ExperimentConfig {
            mode: Mode::Async,
            iterations: 500,
            cadence: 500,
            ..base.clone()
        },
        ExperimentConfig {
            mode: Mode::Centralized,
            iterations: 1000,
            cadence: 1000,
            ..base
        },
    ]
}

fn convergence(csvs: &mut Vec<(ExperimentConfig, String)>) -> Outcome {
    let mut lp = [Vec::new(), Vec::new()];
    let mut dist = [Vec::new(), Vec::new()];
    for seed in 0..3 {
        for (m, cfg) in convergence_configs(seed).into_iter().enumerate() {
            let out = experiment::run_experiment(&cfg).unwrap();
            lp[m].push(out.final_report.lp);
            dist[m].push(out.final_report.beta_distance);
            if seed == 0 {
                csvs.push((cfg, out.csv().unwrap()));
            }
        }
    }
    let [lp_a, lp_c] = lp.map(median);
    let [d_a, d_c] = dist.map(median);
    let rel = (lp_a - lp_c).abs() / lp_c;
    Outcome {
        pass: rel <= 0.05 && (d_a - d_c).abs() <= 0.05,
        detail: format!(
            "median final LP async {lp_a:.4} vs centralized {lp_c:.4} (relative {rel:.4}); \
             beta_distance {d_a:.4} vs {d_c:.4}"
        ),
    }
}

fn topology_config(seed: u64, topology: Topology) -> ExperimentConfig {
    ExperimentConfig {
        mode: Mode::Sync,
        topology,
        iterations: 1000,
        cadence: 10,
        ..desk_config(seed)
    }
}

fn topology_ordering(csvs: &mut Vec<(ExperimentConfig, String)>) -> Outcome {
    let ws = Topology::WattsStrogatz { k: 4, p: 0.3 };
    let mut complete_t = Vec::new();
    let mut ws_t = Vec::new();
    let mut notes = Vec::new();
    for seed in 0..3 {
        let run = |t| -> (ExperimentConfig, Vec<TrajectoryRow>, String) {
            let cfg = topology_config(seed, t);
            let out = experiment::run_experiment(&cfg).unwrap();
            let csv = out.csv().unwrap();
            (cfg, out.rows, csv)
        };
        let (cfg, complete, csv) = run(Topology::Complete);
        if seed == 0 {
            csvs.push((cfg, csv));
        }
        let (_, small_world, _) = run(ws);
        let threshold = 2.0 * experiment::asymptote(&complete, 10);
        let tc = experiment::iterations_to_threshold(&complete, threshold).map_or(f64::INFINITY, |t| t as f64);
        let tw = experiment::iterations_to_threshold(&small_world, threshold).map_or(f64::INFINITY, |t| t as f64);
        notes.push(format!("seed {seed}: {tc} vs {tw}"));
        complete_t.push(tc);
        ws_t.push(tw);
    }
    let (mc, mw) = (median(complete_t), median(ws_t));
    Outcome {
        pass: mc < mw,
        detail: format!(
            "median iterations to 2x asymptote complete {mc} vs watts_strogatz {mw} ({})",
            notes.join(", ")
        ),
    }
}

fn distance_properties() -> Outcome {
    let mut r = common::rng(0xD157);
    let mut zero = 0.0f64;
    let mut invariance = 0.0f64;
    let mut oracle = 0.0f64;
    for _ in 0..10 {
        let k = r.random_range(2..=5);
        let v = r.random_range(k + 2..=15);
        let beta = TopicMatrix::sample_dirichlet_rows(k, v, 1.0, &mut r).unwrap();
        let star = TopicMatrix::sample_dirichlet_rows(k, v, 0.3, &mut r).unwrap();

        let mut order: Vec<usize> = (0..k).collect();
        order.rotate_left(r.random_range(0..k));
        let perm = TopicMatrix::from_rows(&order.iter().map(|&i| star.row(i).to_vec()).collect::<Vec<_>>()).unwrap();
        zero = zero
            .max(evaluation::topic_distance(&star, &star).unwrap())
            .max(evaluation::topic_distance(&perm, &star).unwrap());

        // A positive mixing matrix followed by row normalization is an
        // invertible left multiplication that stays on the simplex.
        let a: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| r.random_range(0.1..1.0)).collect())
            .collect();
        let mixed: Vec<Vec<f64>> = a
            .iter()
            .map(|ai| {
                let row: Vec<f64> = (0..v).map(|w| (0..k).map(|l| ai[l] * beta.get(l, w)).sum()).collect();
                let s: f64 = row.iter().sum();
                row.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let mixed = TopicMatrix::from_rows(&mixed).unwrap();
        let d = evaluation::topic_distance(&beta, &star).unwrap();
        invariance = invariance.max((evaluation::topic_distance(&mixed, &star).unwrap() - d).abs());
        oracle = oracle.max((d - common::least_squares_distance(&beta, &star, 100_000)).abs());
    }
    Outcome {
        pass: zero <= 1e-10 && invariance <= 1e-8 && oracle <= 1e-6,
        detail: format!(
            "identity/permutation {zero:.1e}; mixing invariance {invariance:.1e}; least-squares oracle {oracle:.1e}"
        ),
    }
}

fn determinism(csvs: &[(ExperimentConfig, String)]) -> Outcome {
    let mut same = 0;
    for (cfg, csv) in csvs {
        if experiment::run_experiment(cfg).unwrap().csv().unwrap() == *csv {
            same += 1;
        }
    }
    Outcome {
        pass: same == csvs.len() && !csvs.is_empty(),
        detail: format!(
            "{same}/{} acceptance configs reproduced byte-identical CSVs",
            csvs.len()
        ),
    }
}

fn main() -> ExitCode {
    let mut csvs = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} [{name}]: {status} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "gibbs vs exact E-step", &mut estep_oracle);
    report(2, "left-to-right estimator", &mut left_to_right);
    report(3, "mass conservation and consensus", &mut mass_and_consensus);
    report(4, "mean trajectory vs centralized", &mut mean_trajectory);
    report(5, "spectral gap", &mut spectral);
    report(6, "desk-scale convergence", &mut || convergence(&mut csvs));
    report(7, "topology ordering", &mut || topology_ordering(&mut csvs));
    report(8, "topic distance properties", &mut distance_properties);
    report(9, "determinism", &mut || determinism(&csvs));
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
