//! Held-out evaluation: left-to-right likelihood estimates, log-perplexity
//! and the permutation-invariant topic distance.

use log::warn;
use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lda::{sample_categorical, DirichletParams, Document, TopicMatrix};
use crate::rng::{self, streams};

/// Ridge added to `ββᵀ` when its rows are numerically dependent.
pub const RIDGE: f64 = 1e-10;

/// Relative pivot size below which `β` is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Sequential particle estimate of `log p(doc | β, α)`.
///
/// Each of the `particles` chains holds assignments for the words already
/// seen. Before predicting word `n`, every particle takes one collapsed Gibbs
/// pass over its prefix; the prediction is
/// `Σ_k (c_k + α_k) / (n + Σα) · β[k][x_n]`, averaged over particles, and
/// then each particle samples an assignment for word `n`.
pub fn left_to_right_likelihood<R: Rng + ?Sized>(
    doc: &Document,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    particles: usize,
    rng: &mut R,
) -> Result<f64> {
    if particles == 0 {
        return Err(Error::Config("left-to-right needs at least one particle".into()));
    }
    if prior.topics() != topic_matrix.topics() {
        return Err(Error::Config("prior and topic matrix disagree on K".into()));
    }
    doc.check_vocab(topic_matrix.vocab())?;

    let topics = topic_matrix.topics();
    let alpha = prior.as_slice();
    let alpha_sum = prior.sum();
    let words = doc.words();
    let mut z = vec![0usize; particles * words.len()];
    let mut counts = vec![0.0f64; particles * topics];
    let mut weights = vec![0.0; topics];
    let mut log_lik = 0.0;

    for (n, &x) in words.iter().enumerate() {
        let mut predictive = 0.0;
        for r in 0..particles {
            let zr = &mut z[r * words.len()..(r + 1) * words.len()];
            let cr = &mut counts[r * topics..(r + 1) * topics];
            for (m, &xm) in words[..n].iter().enumerate() {
                cr[zr[m]] -= 1.0;
                for (k, w) in weights.iter_mut().enumerate() {
                    *w = (cr[k] + alpha[k]) * topic_matrix.get(k, xm);
                }
                let k = sample_categorical(&weights, rng).ok_or(Error::ZeroProbability { position: m })?;
                zr[m] = k;
                cr[k] += 1.0;
            }
            for (k, w) in weights.iter_mut().enumerate() {
                *w = (cr[k] + alpha[k]) * topic_matrix.get(k, x);
            }
            predictive += weights.iter().sum::<f64>() / (n as f64 + alpha_sum);
            match sample_categorical(&weights, rng) {
                Some(k) => {
                    zr[n] = k;
                    cr[k] += 1.0;
                }
                None => return Ok(f64::NEG_INFINITY),
            }
        }
        log_lik += (predictive / particles as f64).ln();
    }
    Ok(log_lik)
}

/// Mean of `-log p(doc)` over the test set. Document `d` uses its own RNG
/// stream derived from `(seed, d)`, so results do not depend on evaluation
/// order and repeated evaluations share random numbers.
pub fn log_perplexity(
    test_docs: &[Document],
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    particles: usize,
    seed: u64,
) -> Result<f64> {
    if test_docs.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let mut total = 0.0;
    for (d, doc) in test_docs.iter().enumerate() {
        let mut r = rng::stream(seed, streams::EVAL_BASE + d as u64);
        total -= left_to_right_likelihood(doc, topic_matrix, prior, particles, &mut r)?;
    }
    Ok(total / test_docs.len() as f64)
}

/// `lp / lp_star - 1`.
pub fn relative_error(lp: f64, lp_star: f64) -> Result<f64> {
    if lp_star.is_nan() || lp_star <= 0.0 {
        return Err(Error::Config(format!(
            "reference log-perplexity must be positive, got {lp_star}"
        )));
    }
    Ok(lp / lp_star - 1.0)
}

fn to_dmatrix(beta: &TopicMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(beta.topics(), beta.vocab(), beta.as_slice())
}

fn check_shapes(beta: &TopicMatrix, beta_star: &TopicMatrix) -> Result<()> {
    if beta.topics() != beta_star.topics() || beta.vocab() != beta_star.vocab() {
        return Err(Error::Config(format!(
            "topic matrices differ in shape: {}x{} vs {}x{}",
            beta.topics(),
            beta.vocab(),
            beta_star.topics(),
            beta_star.vocab()
        )));
    }
    Ok(())
}

/// `min_M ‖Mβ - β*‖_F / ‖β*‖_F`: the relative residual of projecting the
/// rows of `β*` onto the row space of `β`.
///
/// Computed through a thin QR factorization of `βᵀ`, which equals the normal
/// equations form `β*βᵀ(ββᵀ)⁻¹β` without squaring the condition number.
/// Returns [`Error::Singular`] when the rows of `β` are linearly dependent.
pub fn topic_distance(beta: &TopicMatrix, beta_star: &TopicMatrix) -> Result<f64> {
    check_shapes(beta, beta_star)?;
    let b = to_dmatrix(beta);
    let target = to_dmatrix(beta_star);
    let qr = b.transpose().qr();
    let r = qr.r();
    let pivots: Vec<f64> = r.diagonal().iter().map(|x| x.abs()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    if pivots.iter().any(|&p| p <= RANK_TOL * largest) {
        return Err(Error::Singular);
    }
    let q = qr.q();
    let projected = (&target * &q) * q.transpose();
    Ok((projected - &target).norm() / target.norm())
}

/// The normal-equations form with `RIDGE · I` added to `ββᵀ`.
pub fn topic_distance_ridge(beta: &TopicMatrix, beta_star: &TopicMatrix) -> Result<f64> {
    check_shapes(beta, beta_star)?;
    let b = to_dmatrix(beta);
    let target = to_dmatrix(beta_star);
    let k = beta.topics();
    let gram = &b * b.transpose() + DMatrix::identity(k, k) * RIDGE;
    let inv = gram.try_inverse().ok_or(Error::Singular)?;
    let m = &target * b.transpose() * inv;
    Ok((m * &b - &target).norm() / target.norm())
}

/// [`topic_distance`], falling back to the ridge form with a warning.
pub fn beta_distance(beta: &TopicMatrix, beta_star: &TopicMatrix) -> Result<f64> {
    match topic_distance(beta, beta_star) {
        Err(Error::Singular) => {
            warn!("topic matrix rows are nearly dependent; using ridge {RIDGE:e} for the distance");
            topic_distance_ridge(beta, beta_star)
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    /// Average held-out log-perplexity.
    pub lp: f64,
    /// The same under the generating parameters.
    pub lp_star: f64,
    /// `lp / lp_star - 1`.
    pub rel_error: f64,
    /// `lp - lp_star`.
    pub abs_gap: f64,
    pub beta_distance: f64,
}

/// Held-out test set and ground truth, with `LP*` computed once.
#[derive(Debug, Clone)]
pub struct Evaluator {
    test_docs: Vec<Document>,
    beta_star: TopicMatrix,
    alpha_star: DirichletParams,
    particles: usize,
    seed: u64,
    lp_star: f64,
}

impl Evaluator {
    pub fn new(
        test_docs: Vec<Document>,
        beta_star: TopicMatrix,
        alpha_star: DirichletParams,
        particles: usize,
        seed: u64,
    ) -> Result<Self> {
        let lp_star = log_perplexity(&test_docs, &beta_star, &alpha_star, particles, seed)?;
        Ok(Evaluator {
            test_docs,
            beta_star,
            alpha_star,
            particles,
            seed,
            lp_star,
        })
    }

    pub fn lp_star(&self) -> f64 {
        self.lp_star
    }

    pub fn log_perplexity(&self, beta: &TopicMatrix) -> Result<f64> {
        log_perplexity(&self.test_docs, beta, &self.alpha_star, self.particles, self.seed)
    }

    /// Averages log-perplexity and topic distance over the given estimates
    /// (one per node for decentralized runs).
    pub fn evaluate(&self, betas: &[TopicMatrix]) -> Result<EvalReport> {
        if betas.is_empty() {
            return Err(Error::Precondition("nothing to evaluate".into()));
        }
        let n = betas.len() as f64;
        let mut lp = 0.0;
        let mut dist = 0.0;
        for beta in betas {
            lp += self.log_perplexity(beta)?;
            dist += beta_distance(beta, &self.beta_star)?;
        }
        lp /= n;
        Ok(EvalReport {
            lp,
            lp_star: self.lp_star,
            rel_error: relative_error(lp, self.lp_star)?,
            abs_gap: lp - self.lp_star,
            beta_distance: dist / n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::generate_corpus;

    fn tiny_beta() -> TopicMatrix {
        TopicMatrix::from_rows(&[vec![0.6, 0.3, 0.1], vec![0.1, 0.2, 0.7]]).unwrap()
    }

    #[test]
    fn single_word_is_exact() {
        let beta = tiny_beta();
        let alpha = DirichletParams::new(vec![0.4, 1.1]).unwrap();
        for x in 0..3 {
            let d = Document::new(vec![x], 3).unwrap();
            let want = ((0.4 * beta.get(0, x) + 1.1 * beta.get(1, x)) / 1.5).ln();
            for particles in [1, 7] {
                let mut r = rng::stream(x as u64, 0);
                let got = left_to_right_likelihood(&d, &beta, &alpha, particles, &mut r).unwrap();
                assert!((got - want).abs() < 1e-14, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn single_topic_is_exact() {
        let beta = TopicMatrix::from_rows(&[vec![0.25, 0.5, 0.25]]).unwrap();
        let alpha = DirichletParams::symmetric(1, 0.3).unwrap();
        let d = Document::new(vec![1, 0, 1, 2, 1], 3).unwrap();
        let want: f64 = d.words().iter().map(|&w| beta.get(0, w).ln()).sum();
        let mut r = rng::stream(0, 0);
        let got = left_to_right_likelihood(&d, &beta, &alpha, 3, &mut r).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn zero_particles_rejected() {
        let d = Document::new(vec![0], 3).unwrap();
        let alpha = DirichletParams::symmetric(2, 1.0).unwrap();
        let mut r = rng::stream(0, 0);
        assert!(left_to_right_likelihood(&d, &tiny_beta(), &alpha, 0, &mut r).is_err());
        assert!(log_perplexity(&[], &tiny_beta(), &alpha, 5, 0).is_err());
    }

    #[test]
    fn identical_docs_average_to_single_value() {
        // Every document gets its own stream, so compare against the first.
        let d = Document::new(vec![0, 2, 2, 1], 3).unwrap();
        let alpha = DirichletParams::symmetric(2, 0.5).unwrap();
        let one = log_perplexity(std::slice::from_ref(&d), &tiny_beta(), &alpha, 50, 3).unwrap();
        let beta = tiny_beta();
        let many: Vec<f64> = (0..4)
            .map(|i| {
                let mut r = rng::stream(3, streams::EVAL_BASE + i);
                -left_to_right_likelihood(&d, &beta, &alpha, 50, &mut r).unwrap()
            })
            .collect();
        assert_eq!(many[0], one);
        let avg = log_perplexity(&vec![d; 4], &beta, &alpha, 50, 3).unwrap();
        assert!((avg - many.iter().sum::<f64>() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn true_parameters_beat_random_ones() {
        let mut wins = 0;
        for seed in 0..5 {
            let mut r = rng::stream(seed, 0);
            let truth = TopicMatrix::sample_dirichlet_rows(4, 30, 0.1, &mut r).unwrap();
            let other = TopicMatrix::sample_dirichlet_rows(4, 30, 1.0, &mut r).unwrap();
            let alpha = DirichletParams::symmetric(4, 0.25).unwrap();
            let docs: Vec<Document> = generate_corpus(40, &truth, &alpha, 10.0, &mut r)
                .unwrap()
                .into_iter()
                .map(|(d, _)| d)
                .collect();
            let lp_true = log_perplexity(&docs, &truth, &alpha, 10, seed).unwrap();
            let lp_other = log_perplexity(&docs, &other, &alpha, 10, seed).unwrap();
            if lp_true < lp_other {
                wins += 1;
            }
        }
        assert!(wins >= 3);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(12.5, 12.5).unwrap(), 0.0);
        assert!((relative_error(11.0, 10.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(relative_error(1.0, 0.0).is_err());
        assert!(relative_error(1.0, -2.0).is_err());
    }

    #[test]
    fn distance_identity_and_permutation() {
        let mut r = rng::stream(1, 0);
        let beta = TopicMatrix::sample_dirichlet_rows(5, 100, 0.1, &mut r).unwrap();
        assert!(topic_distance(&beta, &beta).unwrap() <= 1e-10);
        let rows: Vec<Vec<f64>> = [3, 0, 4, 1, 2].iter().map(|&k| beta.row(k).to_vec()).collect();
        let permuted = TopicMatrix::from_rows(&rows).unwrap();
        assert!(topic_distance(&permuted, &beta).unwrap() <= 1e-10);
    }

    #[test]
    fn distance_singular_and_ridge() {
        let star = tiny_beta();
        let collapsed = TopicMatrix::from_rows(&[vec![0.6, 0.3, 0.1], vec![0.6, 0.3, 0.1]]).unwrap();
        assert!(matches!(topic_distance(&collapsed, &star), Err(Error::Singular)));
        let d = beta_distance(&collapsed, &star).unwrap();
        assert!(d.is_finite() && d > 0.0);
        let ridge = topic_distance_ridge(&star, &star).unwrap();
        assert!(ridge < 1e-8);
    }

    #[test]
    fn distance_shape_mismatch() {
        let a = tiny_beta();
        let b = TopicMatrix::from_rows(&[vec![0.5, 0.5, 0.0]]).unwrap();
        assert!(matches!(topic_distance(&a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn evaluator_reports_zero_error_at_truth() {
        let mut r = rng::stream(6, 0);
        let truth = TopicMatrix::sample_dirichlet_rows(3, 20, 0.2, &mut r).unwrap();
        let alpha = DirichletParams::symmetric(3, 1.0 / 3.0).unwrap();
        let docs: Vec<Document> = generate_corpus(20, &truth, &alpha, 8.0, &mut r)
            .unwrap()
            .into_iter()
            .map(|(d, _)| d)
            .collect();
        let eval = Evaluator::new(docs, truth.clone(), alpha, 10, 6).unwrap();
        let report = eval.evaluate(&[truth.clone(), truth]).unwrap();
        assert_eq!(report.rel_error, 0.0);
        assert_eq!(report.abs_gap, 0.0);
        assert!(report.beta_distance < 1e-10);
        assert!(report.lp_star > 0.0);
    }
}
