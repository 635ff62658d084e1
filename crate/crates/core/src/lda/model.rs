use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::text;

const ROW_SUM_TOL: f64 = 1e-9;

/// Dirichlet concentration over the K topics. Held fixed during training.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Config("Dirichlet parameter must be nonempty".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Config(format!(
                "Dirichlet components must be positive and finite, got {a}"
            )));
        }
        Ok(DirichletParams { alpha })
    }

    pub fn symmetric(topics: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; topics])
    }

    pub fn topics(&self) -> usize {
        self.alpha.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Draws a point on the simplex.
    ///
    /// Uses `G = Gamma(a + 1) * U^(1/a)` in log space so tiny concentrations do
    /// not underflow every component to zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        sample_dirichlet(&self.alpha, rng)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        text::write_rows(&mut out, self.alpha.len(), &self.alpha);
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let (rows, _, data) = text::parse_rows(s.lines())?;
        if rows != 1 {
            return Err(Error::Parse(format!("expected one row of alpha, found {rows}")));
        }
        Self::new(data)
    }
}

pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            let g: f64 = Gamma::new(a + 1.0, 1.0).expect("shape is positive").sample(rng);
            let u: f64 = 1.0 - rng.random::<f64>();
            g.ln() + u.ln() / a
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}

/// The K×V topic-word matrix: row `k` is topic k's distribution over words.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicMatrix {
    topics: usize,
    vocab: usize,
    data: Vec<f64>,
}

impl TopicMatrix {
    pub fn new(topics: usize, vocab: usize, data: Vec<f64>) -> Result<Self> {
        if topics == 0 || vocab == 0 {
            return Err(Error::Config("topic matrix needs K ≥ 1 and V ≥ 1".into()));
        }
        if data.len() != topics * vocab {
            return Err(Error::Config(format!(
                "topic matrix data has {} entries, expected {}",
                data.len(),
                topics * vocab
            )));
        }
        for (k, row) in data.chunks(vocab).enumerate() {
            if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Data(format!("topic {k} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Data(format!("topic {k} sums to {sum}, not 1")));
            }
        }
        Ok(TopicMatrix { topics, vocab, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let vocab = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != vocab) {
            return Err(Error::Config("topic rows have different lengths".into()));
        }
        Self::new(rows.len(), vocab, rows.concat())
    }

    /// Each row drawn independently from a symmetric Dirichlet over the vocabulary.
    pub fn sample_dirichlet_rows<R: Rng + ?Sized>(
        topics: usize,
        vocab: usize,
        concentration: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let prior = DirichletParams::symmetric(vocab, concentration)?;
        let mut data = Vec::with_capacity(topics * vocab);
        for _ in 0..topics {
            data.extend(prior.sample(rng));
        }
        Self::new(topics, vocab, data)
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    #[inline]
    pub fn get(&self, topic: usize, word: usize) -> f64 {
        self.data[topic * self.vocab + word]
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.data[topic * self.vocab..(topic + 1) * self.vocab]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        text::write_rows(&mut out, self.vocab, &self.data);
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let (rows, cols, data) = text::parse_rows(s.lines())?;
        Self::new(rows, cols, data)
    }
}

/// A private observation: a nonempty sequence of word indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    words: Vec<usize>,
}

impl Document {
    pub fn new(words: Vec<usize>, vocab: usize) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Data("documents must be nonempty".into()));
        }
        if let Some(w) = words.iter().find(|&&w| w >= vocab) {
            return Err(Error::Data(format!("word index {w} out of range for V={vocab}")));
        }
        Ok(Document { words })
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub(crate) fn check_vocab(&self, vocab: usize) -> Result<()> {
        match self.words.iter().position(|&w| w >= vocab) {
            Some(pos) => Err(Error::Data(format!(
                "word index {} at position {pos} out of range for V={vocab}",
                self.words[pos]
            ))),
            None => Ok(()),
        }
    }
}

/// Ground-truth latent variables of a generated document.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub z: Vec<usize>,
    pub theta: Vec<f64>,
}

/// K×V matrix of expected topic-word assignment counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    topics: usize,
    vocab: usize,
    counts: Vec<f64>,
}

impl SufficientStats {
    pub fn zeros(topics: usize, vocab: usize) -> Self {
        SufficientStats {
            topics,
            vocab,
            counts: vec![0.0; topics * vocab],
        }
    }

    pub fn from_vec(topics: usize, vocab: usize, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != topics * vocab {
            return Err(Error::Config(format!(
                "stats have {} entries, expected {}",
                counts.len(),
                topics * vocab
            )));
        }
        if counts.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Data(
                "sufficient statistics must be finite and nonnegative".into(),
            ));
        }
        Ok(SufficientStats { topics, vocab, counts })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.topics == other.topics && self.vocab == other.vocab
    }

    #[inline]
    pub fn get(&self, topic: usize, word: usize) -> f64 {
        self.counts[topic * self.vocab + word]
    }

    #[inline]
    pub(crate) fn add(&mut self, topic: usize, word: usize, amount: f64) {
        self.counts[topic * self.vocab + word] += amount;
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.counts[topic * self.vocab..(topic + 1) * self.vocab]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.counts
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Entrywise mean of a nonempty list of equally shaped statistics.
    pub fn mean(items: &[SufficientStats]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Precondition("mean of an empty list".into()))?;
        let mut out = SufficientStats::zeros(first.topics, first.vocab);
        for s in items {
            if !s.same_shape(first) {
                return Err(Error::Config("stats shapes differ".into()));
            }
            out.counts.iter_mut().zip(&s.counts).for_each(|(o, x)| *o += x);
        }
        let n = items.len() as f64;
        out.counts.iter_mut().for_each(|o| *o /= n);
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        text::write_rows(&mut out, self.vocab, &self.counts);
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let (rows, cols, data) = text::parse_rows(s.lines())?;
        Self::from_vec(rows, cols, data)
    }
}
