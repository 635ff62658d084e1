//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use deleda::lda::{DirichletParams, Document, TopicMatrix};
use deleda::network::Graph;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Calls `f` on every assignment in `{0..k}^len`.
fn for_each_assignment(k: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut z = vec![0usize; len];
    loop {
        f(&z);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            z[i] += 1;
            if z[i] < k {
                break;
            }
            z[i] = 0;
            i += 1;
        }
    }
}

/// `p(z | α)` with θ integrated out, as a product of rising factorials.
fn assignment_prior(z: &[usize], alpha: &[f64]) -> f64 {
    let total: f64 = alpha.iter().sum();
    let mut counts = vec![0usize; alpha.len()];
    let mut p = 1.0;
    for (n, &k) in z.iter().enumerate() {
        p *= (alpha[k] + counts[k] as f64) / (total + n as f64);
        counts[k] += 1;
    }
    p
}

/// `log p(doc | β, α)` by summing over all `K^L` assignments.
pub fn exact_log_likelihood(doc: &Document, beta: &TopicMatrix, alpha: &DirichletParams) -> f64 {
    let words = doc.words();
    let mut total = 0.0;
    for_each_assignment(beta.topics(), words.len(), |z| {
        let emission: f64 = z.iter().zip(words).map(|(&k, &x)| beta.get(k, x)).product();
        total += emission * assignment_prior(z, alpha.as_slice());
    });
    total.ln()
}

/// Posterior expected topic/word counts `E[Σ_n 1{z_n=k, x_n=v}]`, row-major `K×V`.
pub fn exact_expected_counts(doc: &Document, beta: &TopicMatrix, alpha: &DirichletParams) -> Vec<f64> {
    let (k, v) = (beta.topics(), beta.vocab());
    let words = doc.words();
    let mut acc = vec![0.0; k * v];
    let mut norm = 0.0;
    for_each_assignment(k, words.len(), |z| {
        let w =
            z.iter().zip(words).map(|(&t, &x)| beta.get(t, x)).product::<f64>() * assignment_prior(z, alpha.as_slice());
        norm += w;
        for (&t, &x) in z.iter().zip(words) {
            acc[t * v + x] += w;
        }
    });
    acc.iter().map(|a| a / norm).collect()
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|ra| b.iter().map(|rb| ra.iter().zip(rb).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

fn rows(m: &TopicMatrix) -> Vec<Vec<f64>> {
    (0..m.topics()).map(|k| m.row(k).to_vec()).collect()
}

/// `min_M ‖Mβ − β*‖_F / ‖β*‖_F` by plain gradient descent on `M`.
pub fn least_squares_distance(beta: &TopicMatrix, beta_star: &TopicMatrix, iterations: usize) -> f64 {
    let b = rows(beta);
    let t = rows(beta_star);
    let g = gram(&b, &b);
    let c = gram(&t, &b);
    let k = b.len();
    let trace: f64 = (0..k).map(|i| g[i][i]).sum();
    // Power iteration for the largest eigenvalue of G sets the step size.
    let mut x = vec![1.0; k];
    let mut lambda = trace;
    for _ in 0..500 {
        let y: Vec<f64> = g.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        lambda = norm / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / norm).collect();
    }
    let step = 1.0 / lambda.max(1e-300);
    let mut m = vec![vec![0.0; k]; t.len()];
    for _ in 0..iterations {
        for (mi, ci) in m.iter_mut().zip(&c) {
            let grad: Vec<f64> = (0..k)
                .map(|j| (0..k).map(|l| mi[l] * g[l][j]).sum::<f64>() - ci[j])
                .collect();
            for (v, d) in mi.iter_mut().zip(grad) {
                *v -= step * d;
            }
        }
    }
    let mut resid = 0.0;
    let mut base = 0.0;
    for (mi, ti) in m.iter().zip(&t) {
        for w in 0..ti.len() {
            let fit: f64 = (0..k).map(|l| mi[l] * b[l][w]).sum();
            resid += (fit - ti[w]).powi(2);
            base += ti[w] * ti[w];
        }
    }
    (resid / base).sqrt()
}

/// `E[W]` for uniform edge sampling, built entry by entry.
pub fn expected_averaging(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let e = graph.edge_count() as f64;
    let mut w = vec![vec![0.0; n]; n];
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(i, j) in graph.edges() {
        w[i][i] -= 0.5 / e;
        w[j][j] -= 0.5 / e;
        w[i][j] += 0.5 / e;
        w[j][i] += 0.5 / e;
    }
    w
}

/// Largest eigenvalue of a symmetric PSD matrix on the complement of `1`,
/// by deflated power iteration.
pub fn power_lambda2(w: &[Vec<f64>], iterations: usize) -> f64 {
    let n = w.len();
    let mut x: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 - 50.0).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y: Vec<f64> = w.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        x = y;
    }
    lambda
}

/// Spearman rank correlation (no tie correction).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// A random tiny instance: `β` rows ~ Dirichlet(1), `α_k ~ U(0.5, 1.5)`,
/// and a uniformly drawn document of length `1..=max_len`.
pub fn tiny_instance<R: Rng>(
    r: &mut R,
    k: usize,
    v: usize,
    max_len: usize,
) -> (TopicMatrix, DirichletParams, Document) {
    let beta = TopicMatrix::sample_dirichlet_rows(k, v, 1.0, r).unwrap();
    let alpha = DirichletParams::new((0..k).map(|_| r.random_range(0.5..1.5)).collect()).unwrap();
    let len = r.random_range(1..=max_len);
    let doc = Document::new((0..len).map(|_| r.random_range(0..v)).collect(), v).unwrap();
    (beta, alpha, doc)
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
