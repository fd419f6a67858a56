//! Ranked (phrase, evidence sentence) results: replay files, the toy
//! retriever, the remote client and unique-sentence budgeting.

mod budget;
mod corpus;
pub mod remote;
mod results;
mod toy;

pub use budget::{collect_training_sentences, SentenceBudgetResult};
pub use corpus::{Corpus, CorpusSentence, Token};
pub use remote::{fetch_remote, fetch_to_replay, RemoteOptions};
pub use results::{
    ingest_records, ingest_results, load_results, serialize_results, validate_against, ResultSet,
    RetrievedPhrase,
};
pub use toy::{content_tokens, toy_retrieve};
