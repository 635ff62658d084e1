//! Decentralized latent Dirichlet allocation.
//!
//! Agents on an undirected graph each hold a private shard of documents and a
//! local copy of the K×V sufficient statistics. Training alternates pairwise
//! gossip averaging of those statistics with local Gibbs online EM steps, so
//! every agent converges towards the topic matrix of the whole network without
//! seeing anyone else's documents.
//!
//! - [`lda`]: generative model, E-steps, M-step, online EM update.
//! - [`network`]: topologies, averaging operators, spectral gap.
//! - [`engine`]: synchronous, asynchronous and centralized training loops.
//! - [`evaluation`]: left-to-right held-out likelihood and topic distance.
//! - [`experiment`]: end-to-end runner, config files, CSV trajectories.

pub mod engine;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod lda;
pub mod network;
pub mod rng;
mod text;

pub use error::{Error, Result};
