use rand::Rng;

use super::model::{DirichletParams, Document, SufficientStats, TopicMatrix};
use crate::error::{Error, Result};

/// Upper bound on `K^L` for exhaustive enumeration of topic assignments.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Collapsed Gibbs chain length. Statistics average the post-burn-in sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    pub sweeps: usize,
    pub burn_in: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            sweeps: 50,
            burn_in: 25,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::Config(format!(
                "gibbs sweeps ({}) must exceed burn-in ({})",
                self.sweeps, self.burn_in
            )));
        }
        Ok(())
    }
}

/// How the per-document expectation of the sufficient statistics is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EStep {
    Gibbs(GibbsConfig),
    /// Exhaustive enumeration; only feasible for tiny documents.
    Exact,
}

impl Default for EStep {
    fn default() -> Self {
        EStep::Gibbs(GibbsConfig::default())
    }
}

impl EStep {
    pub fn validate(&self) -> Result<()> {
        match self {
            EStep::Gibbs(cfg) => cfg.validate(),
            EStep::Exact => Ok(()),
        }
    }

    pub(crate) fn accumulate<R: Rng + ?Sized>(
        &self,
        doc: &Document,
        topic_matrix: &TopicMatrix,
        prior: &DirichletParams,
        rng: &mut R,
        out: &mut SufficientStats,
    ) -> Result<()> {
        match self {
            EStep::Gibbs(cfg) => gibbs_accumulate(doc, topic_matrix, prior, cfg, rng, out),
            EStep::Exact => exact_accumulate(doc, topic_matrix, prior, out),
        }
    }
}

fn check_inputs(doc: &Document, topic_matrix: &TopicMatrix, prior: &DirichletParams) -> Result<()> {
    if prior.topics() != topic_matrix.topics() {
        return Err(Error::Config(format!(
            "prior has {} topics but topic matrix has {}",
            prior.topics(),
            topic_matrix.topics()
        )));
    }
    doc.check_vocab(topic_matrix.vocab())
}

/// Draws an index with probability proportional to `weights`, or `None` when
/// every weight is zero.
#[inline]
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return Some(i);
            }
            u -= w;
            last = Some(i);
        }
    }
    last
}

/// Collapsed-Gibbs estimate of the expected topic-word counts of one document.
///
/// θ is integrated out. Position `n` is resampled with weight
/// `β[k][x_n] * (c_{-n,k} + α_k)`. The chain starts from `z_n ∝ α_k β[k][x_n]`.
/// The returned counts average, over the post-burn-in sweeps, the conditional
/// topic distribution of every position at the moment it is resampled, so
/// they sum to the document length.
pub fn gibbs_estep<R: Rng + ?Sized>(
    doc: &Document,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    config: &GibbsConfig,
    rng: &mut R,
) -> Result<SufficientStats> {
    let mut out = SufficientStats::zeros(topic_matrix.topics(), topic_matrix.vocab());
    gibbs_accumulate(doc, topic_matrix, prior, config, rng, &mut out)?;
    Ok(out)
}

fn gibbs_accumulate<R: Rng + ?Sized>(
    doc: &Document,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    config: &GibbsConfig,
    rng: &mut R,
    out: &mut SufficientStats,
) -> Result<()> {
    config.validate()?;
    check_inputs(doc, topic_matrix, prior)?;
    let topics = topic_matrix.topics();
    let alpha = prior.as_slice();
    let words = doc.words();

    let mut weights = vec![0.0; topics];
    let mut z = Vec::with_capacity(words.len());
    let mut topic_counts = vec![0.0f64; topics];
    for (n, &x) in words.iter().enumerate() {
        for (k, w) in weights.iter_mut().enumerate() {
            *w = alpha[k] * topic_matrix.get(k, x);
        }
        let k = sample_categorical(&weights, rng).ok_or(Error::ZeroProbability { position: n })?;
        z.push(k);
        topic_counts[k] += 1.0;
    }

    // Post-burn-in sweeps accumulate the full conditional of each position
    // rather than the sampled indicator.
    let mut tally = vec![0.0f64; words.len() * topics];
    for sweep in 0..config.sweeps {
        let keep = sweep >= config.burn_in;
        for (n, &x) in words.iter().enumerate() {
            topic_counts[z[n]] -= 1.0;
            for (k, w) in weights.iter_mut().enumerate() {
                *w = topic_matrix.get(k, x) * (topic_counts[k] + alpha[k]);
            }
            let k = sample_categorical(&weights, rng).ok_or(Error::ZeroProbability { position: n })?;
            if keep {
                let total: f64 = weights.iter().sum();
                for (t, w) in tally[n * topics..(n + 1) * topics].iter_mut().zip(&weights) {
                    *t += w / total;
                }
            }
            z[n] = k;
            topic_counts[k] += 1.0;
        }
    }

    let kept = (config.sweeps - config.burn_in) as f64;
    for (n, &x) in words.iter().enumerate() {
        for k in 0..topics {
            let c = tally[n * topics + k];
            if c > 0.0 {
                out.add(k, x, c / kept);
            }
        }
    }
    Ok(())
}

/// Exact posterior expectation of the topic-word counts of one document.
///
/// Enumerates all `K^L` assignments weighted by
/// `∏_n β[z_n][x_n] · ∏_k Γ(α_k + m_k)/Γ(α_k)`. Fails when `K^L` exceeds
/// [`ENUMERATION_LIMIT`].
pub fn exact_estep(doc: &Document, topic_matrix: &TopicMatrix, prior: &DirichletParams) -> Result<SufficientStats> {
    let mut out = SufficientStats::zeros(topic_matrix.topics(), topic_matrix.vocab());
    exact_accumulate(doc, topic_matrix, prior, &mut out)?;
    Ok(out)
}

/// Log of the unnormalized joint weight of every assignment vector, in
/// odometer order (position 0 varies fastest).
pub(crate) fn enumerate_log_weights(
    doc: &Document,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
) -> Result<Vec<f64>> {
    check_inputs(doc, topic_matrix, prior)?;
    let topics = topic_matrix.topics();
    let len = doc.len();
    let total = (topics as u64)
        .checked_pow(len as u32)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or(Error::Infeasible {
            topics,
            length: len,
            limit: ENUMERATION_LIMIT,
        })?;
    if let Some(pos) = doc
        .words()
        .iter()
        .position(|&x| (0..topics).all(|k| topic_matrix.get(k, x) == 0.0))
    {
        return Err(Error::ZeroProbability { position: pos });
    }

    let alpha = prior.as_slice();
    let words = doc.words();
    let mut z = vec![0usize; len];
    let mut m = vec![0usize; topics];
    let mut out = Vec::with_capacity(total as usize);
    for _ in 0..total {
        m.iter_mut().for_each(|c| *c = 0);
        let mut lw = 0.0;
        for (n, &k) in z.iter().enumerate() {
            lw += topic_matrix.get(k, words[n]).ln();
            m[k] += 1;
        }
        for (k, &mk) in m.iter().enumerate() {
            for j in 0..mk {
                lw += (alpha[k] + j as f64).ln();
            }
        }
        out.push(lw);
        for zn in z.iter_mut() {
            *zn += 1;
            if *zn < topics {
                break;
            }
            *zn = 0;
        }
    }
    Ok(out)
}

fn exact_accumulate(
    doc: &Document,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    out: &mut SufficientStats,
) -> Result<()> {
    let log_weights = enumerate_log_weights(doc, topic_matrix, prior)?;
    let topics = topic_matrix.topics();
    let len = doc.len();
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut marginals = vec![0.0; len * topics];
    let mut norm = 0.0;
    let mut z = vec![0usize; len];
    for &lw in &log_weights {
        let w = (lw - max).exp();
        norm += w;
        for (n, &k) in z.iter().enumerate() {
            marginals[n * topics + k] += w;
        }
        for zn in z.iter_mut() {
            *zn += 1;
            if *zn < topics {
                break;
            }
            *zn = 0;
        }
    }
    for (n, &x) in doc.words().iter().enumerate() {
        for k in 0..topics {
            out.add(k, x, marginals[n * topics + k] / norm);
        }
    }
    Ok(())
}

/// Closed-form maximizer: row-normalizes `counts + smoothing`.
pub fn m_step(stats: &SufficientStats, smoothing: f64) -> Result<TopicMatrix> {
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::Config(format!("smoothing must be nonnegative, got {smoothing}")));
    }
    let vocab = stats.vocab();
    let mut data = Vec::with_capacity(stats.topics() * vocab);
    for k in 0..stats.topics() {
        let row = stats.row(k);
        let total: f64 = row.iter().map(|c| c + smoothing).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::DegenerateRow { row: k });
        }
        data.extend(row.iter().map(|c| (c + smoothing) / total));
    }
    TopicMatrix::new(stats.topics(), vocab, data)
}

/// Mean over `batch` of the per-document expected statistics.
pub fn batch_estep<R: Rng + ?Sized>(
    batch: &[&Document],
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    estep: &EStep,
    rng: &mut R,
) -> Result<SufficientStats> {
    if batch.is_empty() {
        return Err(Error::Precondition("E-step batch is empty".into()));
    }
    let mut sum = SufficientStats::zeros(topic_matrix.topics(), topic_matrix.vocab());
    for doc in batch {
        estep.accumulate(doc, topic_matrix, prior, rng, &mut sum)?;
    }
    let n = batch.len() as f64;
    sum.as_mut_slice().iter_mut().for_each(|x| *x /= n);
    Ok(sum)
}

/// One online EM step: `(1 - rho) * current + rho * batch_estep(batch)`.
pub fn goem_update<R: Rng + ?Sized>(
    current: &SufficientStats,
    batch: &[&Document],
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    rho: f64,
    estep: &EStep,
    rng: &mut R,
) -> Result<SufficientStats> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Precondition(format!("step size must lie in (0, 1], got {rho}")));
    }
    if current.topics() != topic_matrix.topics() || current.vocab() != topic_matrix.vocab() {
        return Err(Error::Config("stats and topic matrix shapes differ".into()));
    }
    let mut next = batch_estep(batch, topic_matrix, prior, estep, rng)?;
    blend(current, &mut next, rho);
    Ok(next)
}

/// Overwrites `target` (holding the E-step mean) with the convex combination.
pub(crate) fn blend(current: &SufficientStats, target: &mut SufficientStats, rho: f64) {
    let keep = 1.0 - rho;
    target
        .as_mut_slice()
        .iter_mut()
        .zip(current.as_slice())
        .for_each(|(e, c)| *e = keep * c + rho * *e);
}
