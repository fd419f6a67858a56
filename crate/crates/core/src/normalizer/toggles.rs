use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rules that are on unless a configuration turns them off: edge
/// punctuation, minimum length, stopwords, type echo, abbreviations and
/// boundary refinement.
pub const COMMON_RULES: [u8; 6] = [2, 5, 6, 7, 8, 10];

/// Per-rule on/off switches for rules 1 through 10.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<u8>", try_from = "Vec<u8>")]
pub struct RuleToggles([bool; 10]);

impl RuleToggles {
    pub fn none() -> Self {
        RuleToggles([false; 10])
    }

    pub fn all() -> Self {
        RuleToggles([true; 10])
    }

    pub fn common() -> Self {
        Self::from_ids(&COMMON_RULES).expect("common rule ids are valid")
    }

    pub fn from_ids(ids: &[u8]) -> Result<Self> {
        let mut t = Self::none();
        for &id in ids {
            t.set(id, true)?;
        }
        Ok(t)
    }

    pub fn is_enabled(&self, rule: u8) -> bool {
        (1..=10).contains(&rule) && self.0[rule as usize - 1]
    }

    pub fn set(&mut self, rule: u8, on: bool) -> Result<()> {
        if !(1..=10).contains(&rule) {
            return Err(Error::Config(format!("rule id {rule} is outside 1..=10")));
        }
        self.0[rule as usize - 1] = on;
        Ok(())
    }

    pub fn with(mut self, enable: &[u8], disable: &[u8]) -> Result<Self> {
        for &r in enable {
            self.set(r, true)?;
        }
        for &r in disable {
            self.set(r, false)?;
        }
        Ok(self)
    }

    pub fn enabled(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=10u8).filter(|r| self.is_enabled(*r))
    }
}

impl Default for RuleToggles {
    fn default() -> Self {
        Self::common()
    }
}

impl fmt::Debug for RuleToggles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.enabled()).finish()
    }
}

impl From<RuleToggles> for Vec<u8> {
    fn from(t: RuleToggles) -> Self {
        t.enabled().collect()
    }
}

impl TryFrom<Vec<u8>> for RuleToggles {
    type Error = Error;

    fn try_from(ids: Vec<u8>) -> Result<Self> {
        Self::from_ids(&ids)
    }
}
