use std::fmt::Write;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::model::{DirichletParams, Document, HiddenState, TopicMatrix};
use crate::error::{Error, Result};
use crate::text;

/// Samples documents from the LDA generative process.
///
/// Lengths are Poisson(`mean_length`), with zero draws resampled. The returned
/// hidden state carries the true θ and the per-word topic assignments.
pub fn generate_corpus<R: Rng + ?Sized>(
    n_docs: usize,
    topic_matrix: &TopicMatrix,
    prior: &DirichletParams,
    mean_length: f64,
    rng: &mut R,
) -> Result<Vec<(Document, HiddenState)>> {
    if prior.topics() != topic_matrix.topics() {
        return Err(Error::Config(format!(
            "prior has {} topics but topic matrix has {}",
            prior.topics(),
            topic_matrix.topics()
        )));
    }
    if !(mean_length.is_finite() && mean_length > 0.0) {
        return Err(Error::Config(format!(
            "mean document length must be positive, got {mean_length}"
        )));
    }
    let lengths = Poisson::new(mean_length).map_err(|e| Error::Config(format!("poisson: {e}")))?;
    let word_dists = (0..topic_matrix.topics())
        .map(|k| WeightedIndex::new(topic_matrix.row(k)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Data(format!("topic row cannot be sampled: {e}")))?;

    let vocab = topic_matrix.vocab();
    let mut corpus = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let theta = prior.sample(rng);
        let topic_dist =
            WeightedIndex::new(&theta).map_err(|e| Error::Data(format!("topic proportions cannot be sampled: {e}")))?;
        let len = loop {
            let l: f64 = lengths.sample(rng);
            if l >= 1.0 {
                break l as usize;
            }
        };
        let mut z = Vec::with_capacity(len);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let k = topic_dist.sample(rng);
            z.push(k);
            words.push(word_dists[k].sample(rng));
        }
        corpus.push((Document::new(words, vocab)?, HiddenState { z, theta }));
    }
    Ok(corpus)
}

/// Serializes documents as a `V=<int> K=<int>` header followed by one
/// space-separated document per line.
pub fn write_corpus<'a>(docs: impl IntoIterator<Item = &'a Document>, vocab: usize, topics: usize) -> String {
    let mut out = format!("V={vocab} K={topics}\n");
    for doc in docs {
        for (i, w) in doc.words().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{w}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Parsed corpus file.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFile {
    pub vocab: usize,
    pub topics: usize,
    pub docs: Vec<Document>,
}

pub fn parse_corpus(s: &str) -> Result<CorpusFile> {
    let mut lines = s.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty corpus file".into()))?;
    let vocab = text::header_value(header, "V")?;
    let topics = text::header_value(header, "K")?;
    let mut docs = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let words = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("document {i}: bad word `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        docs.push(Document::new(words, vocab)?);
    }
    Ok(CorpusFile { vocab, topics, docs })
}
