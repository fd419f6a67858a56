//! Weakly-labeled NER dataset generation from phrase-retrieval output.
//!
//! Pipeline: type questions ([`querygen`]) → retrieved phrases and evidence
//! sentences ([`retrieval`]) → normalized pseudo-dictionary ([`normalizer`])
//! → dictionary matching and BIO labels ([`annotator`]) → teacher/student
//! refinement ([`selftrain`]), scored with [`metrics`].

pub mod annotator;
pub mod cli;
pub mod error;
pub mod fsutil;
pub mod metrics;
pub mod normalizer;
pub mod querygen;
pub mod retrieval;
pub mod selftrain;
pub mod text;

pub use error::{Error, Result};
