//! Rules 1–8: turning retrieved phrases into dictionary candidates.
//!
//! Rules run in a fixed order regardless of which are enabled:
//! 1 split on "and", 2 strip edge punctuation, 3 drop all-lowercase,
//! 4 strip a leading "the", 5 drop short, 6 drop stopwords, 7 drop the type
//! term itself, 8 attach a detected abbreviation. Rules 9 and 10 are carried
//! in the same toggle set but act during dictionary matching.

mod abbreviation;
mod rules;
mod stopwords;
mod toggles;

pub use abbreviation::detect_abbreviation;
pub use rules::{apply_rule, normalize, normalize_surface, NormalizedPhrase, RuleContext, RuleSet};
pub use stopwords::{bundled_stopwords, load_stopwords, parse_stopwords};
pub use toggles::{RuleToggles, COMMON_RULES};
