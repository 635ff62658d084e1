//! The LDA model: generative process, sufficient statistics, E-steps,
//! the closed-form M-step, and the online EM update.

mod corpus;
mod estep;
mod model;

pub use corpus::{generate_corpus, parse_corpus, write_corpus, CorpusFile};
pub(crate) use estep::sample_categorical;
pub use estep::{batch_estep, exact_estep, gibbs_estep, goem_update, m_step, EStep, GibbsConfig, ENUMERATION_LIMIT};
pub use model::{DirichletParams, Document, HiddenState, SufficientStats, TopicMatrix};
