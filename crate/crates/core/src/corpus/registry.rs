//! Language registry: the 45 languages the toolkit operates over.
//!
//! Canonical tags are the lowercase language names (e.g. `bengali`,
//! `chinese_simplified`). Common ISO 639-1 codes are accepted as aliases
//! and normalized to the canonical tag on parse.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Canonical language names, in the fixed registry order.
pub const LANGUAGE_NAMES: [&str; 45] = [
    "amharic",
    "arabic",
    "azerbaijani",
    "bengali",
    "burmese",
    "chinese_simplified",
    "chinese_traditional",
    "english",
    "french",
    "gujarati",
    "hausa",
    "hindi",
    "igbo",
    "indonesian",
    "japanese",
    "kirundi",
    "korean",
    "kyrgyz",
    "marathi",
    "nepali",
    "oromo",
    "pashto",
    "persian",
    "pidgin",
    "portuguese",
    "punjabi",
    "russian",
    "scottish_gaelic",
    "serbian_cyrillic",
    "serbian_latin",
    "sinhala",
    "somali",
    "spanish",
    "swahili",
    "tamil",
    "telugu",
    "thai",
    "tigrinya",
    "turkish",
    "ukrainian",
    "urdu",
    "uzbek",
    "vietnamese",
    "welsh",
    "yoruba",
];

/// ISO 639-1 aliases for registry languages with an unambiguous code.
/// Chinese and Serbian are intentionally absent: the registry splits them
/// by script, so the two-letter code does not pick one canonical tag.
const ALIASES: [(&str, &str); 41] = [
    ("am", "amharic"),
    ("ar", "arabic"),
    ("az", "azerbaijani"),
    ("bn", "bengali"),
    ("my", "burmese"),
    ("en", "english"),
    ("fr", "french"),
    ("gu", "gujarati"),
    ("ha", "hausa"),
    ("hi", "hindi"),
    ("ig", "igbo"),
    ("id", "indonesian"),
    ("ja", "japanese"),
    ("rn", "kirundi"),
    ("ko", "korean"),
    ("ky", "kyrgyz"),
    ("mr", "marathi"),
    ("ne", "nepali"),
    ("om", "oromo"),
    ("ps", "pashto"),
    ("fa", "persian"),
    ("pcm", "pidgin"),
    ("pt", "portuguese"),
    ("pa", "punjabi"),
    ("ru", "russian"),
    ("gd", "scottish_gaelic"),
    ("si", "sinhala"),
    ("so", "somali"),
    ("es", "spanish"),
    ("sw", "swahili"),
    ("ta", "tamil"),
    ("te", "telugu"),
    ("th", "thai"),
    ("ti", "tigrinya"),
    ("tr", "turkish"),
    ("uk", "ukrainian"),
    ("ur", "urdu"),
    ("uz", "uzbek"),
    ("vi", "vietnamese"),
    ("cy", "welsh"),
    ("yo", "yoruba"),
];

/// A validated language tag in canonical (lowercase-name) form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageTag(String);

impl LanguageTag {
    /// Parse a tag, accepting canonical names and ISO 639-1 aliases.
    pub fn parse(raw: &str) -> Result<Self, CorpusError> {
        canonicalize(raw)
            .map(|name| LanguageTag(name.to_string()))
            .ok_or_else(|| CorpusError::UnknownLanguage {
                line: 0,
                tag: raw.to_string(),
            })
    }

    /// Parse a tag, attributing failures to a source line.
    pub fn parse_at(raw: &str, line: usize) -> Result<Self, CorpusError> {
        Self::parse(raw).map_err(|_| CorpusError::UnknownLanguage {
            line,
            tag: raw.to_string(),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name as it appears in prompts and reports: first letter
    /// uppercased, e.g. `Chinese_simplified`.
    pub fn display_name(&self) -> String {
        let mut chars = self.0.chars();
        match chars.next() {
            Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
            None => String::new(),
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for LanguageTag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn canonicalize(raw: &str) -> Option<&'static str> {
    let lowered = raw.trim().to_ascii_lowercase();
    if let Some(name) = LANGUAGE_NAMES.iter().find(|n| **n == lowered) {
        return Some(name);
    }
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == lowered)
        .map(|(_, name)| *name)
}

/// True if `raw` names a registry language (canonically or via alias).
pub fn is_registered(raw: &str) -> bool {
    canonicalize(raw).is_some()
}

/// Display names of all 45 languages in registry order.
pub fn display_names() -> Vec<String> {
    LANGUAGE_NAMES
        .iter()
        .map(|name| LanguageTag(name.to_string()).display_name())
        .collect()
}
