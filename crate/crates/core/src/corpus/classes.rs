//! TIMIT phone symbols grouped into seven macro-classes.

use crate::error::{Error, Result};

pub const MACRO_CLASSES: [(&str, &[&str]); 7] = [
    ("affricates", &["jh", "ch"]),
    (
        "stops",
        &[
            "b", "d", "g", "p", "t", "k", "dx", "q", "bcl", "dcl", "gcl", "pcl", "tcl", "kcl",
        ],
    ),
    ("others", &["pau", "epi", "h#"]),
    ("nasals", &["m", "n", "ng", "em", "en", "eng", "nx"]),
    ("semi-vowels", &["l", "r", "w", "y", "hh", "hv", "el"]),
    ("fricatives", &["s", "sh", "z", "zh", "f", "th", "v", "dh"]),
    (
        "vowels",
        &[
            "iy", "ih", "eh", "ey", "ae", "aa", "aw", "ay", "ah", "ao", "oy", "ow", "uh", "uw",
            "ux", "er", "ax", "ix", "axr", "axh",
        ],
    ),
];

pub fn macro_class_names() -> impl Iterator<Item = &'static str> {
    MACRO_CLASSES.iter().map(|(name, _)| *name)
}

/// Macro-class of a phone symbol. TIMIT transcriptions spell `axh` as
/// `ax-h`; both are accepted.
pub fn macro_class(phone: &str) -> Result<&'static str> {
    let phone = if phone == "ax-h" { "axh" } else { phone };
    MACRO_CLASSES
        .iter()
        .find(|(_, phones)| phones.contains(&phone))
        .map(|(name, _)| *name)
        .ok_or_else(|| Error::UnknownPhone(phone.to_string()))
}
