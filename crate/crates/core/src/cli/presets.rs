//! Bundled benchmark setups: sub-questions, k_l and per-group rules.
//! The common rules are implied and not listed.

use crate::querygen::TypeGroup;

pub const DATASET_PRESETS: [&str; 10] = [
    "conll2003",
    "wikigold",
    "wnut16",
    "ncbi-disease",
    "bc5cdr",
    "chemdner",
    "crossner-enzyme",
    "crossner-astronomical-object",
    "crossner-award",
    "crossner-conference",
];

fn group(output: &str, labels: &[&str], k_l: i64, rules: &[u8]) -> TypeGroup {
    TypeGroup {
        output: output.to_string(),
        labels: labels.iter().map(|s| s.to_string()).collect(),
        ids: None,
        k_l: Some(k_l),
        enable: rules.to_vec(),
        disable: Vec::new(),
    }
}

pub fn dataset_preset(name: &str) -> Option<Vec<TypeGroup>> {
    const GENERAL: &[u8] = &[1, 3, 4];
    const BIO: &[u8] = &[4, 9];
    Some(match name {
        "conll2003" => vec![
            group("person", &["athlete", "politician", "actor"], 5000, GENERAL),
            group(
                "location",
                &["country", "city", "state in the USA"],
                5000,
                GENERAL,
            ),
            group(
                "organization",
                &["sports team", "company", "institution"],
                5000,
                GENERAL,
            ),
        ],
        "wikigold" => vec![
            group(
                "person",
                &["athlete", "politician", "actor", "director", "musician"],
                4000,
                GENERAL,
            ),
            group(
                "location",
                &["country", "city", "state in the USA", "road", "island"],
                4000,
                GENERAL,
            ),
            group(
                "organization",
                &[
                    "sports team",
                    "company",
                    "institution",
                    "association",
                    "band",
                ],
                4000,
                GENERAL,
            ),
        ],
        "wnut16" => vec![
            group(
                "person",
                &["athlete", "politician", "actor", "author"],
                1000,
                GENERAL,
            ),
            group(
                "location",
                &["country", "city", "state in the USA"],
                1000,
                GENERAL,
            ),
            group("product", &["mobile app"], 1000, &[3]),
            group(
                "product",
                &["software", "operating system", "car", "smart phone"],
                1000,
                GENERAL,
            ),
            group(
                "facility",
                &["facility", "cafe", "restaurant", "college", "music venue"],
                1000,
                &[3],
            ),
            group("facility", &["sports facility"], 1000, GENERAL),
            group("company", &["company", "technology company"], 1000, GENERAL),
            group("company", &["news agency", "magazine"], 1000, &[1, 3]),
            group("sportsteam", &["sports team"], 1000, GENERAL),
            group("tvshow", &["TV show"], 1000, &[3]),
            group("movie", &["movie"], 1000, &[3]),
            group(
                "musicartist",
                &["band", "rapper", "musician", "singer"],
                1000,
                &[3],
            ),
        ],
        "ncbi-disease" => vec![group("disease", &["disease"], 35000, BIO)],
        "bc5cdr" => vec![
            group("disease", &["disease"], 15000, BIO),
            group("chemical", &["chemical compound", "drug"], 15000, BIO),
        ],
        "chemdner" => vec![group(
            "chemical",
            &["chemical compound", "drug"],
            10000,
            BIO,
        )],
        "crossner-enzyme" => vec![group("enzyme", &["enzyme"], 5000, &[1, 4, 9])],
        "crossner-astronomical-object" => vec![group(
            "astronomicalobject",
            &["astronomical object"],
            5000,
            GENERAL,
        )],
        "crossner-award" => vec![group("award", &["award"], 10000, GENERAL)],
        "crossner-conference" => vec![group(
            "conference",
            &["conference on artificial intelligence"],
            5000,
            &[3],
        )],
        _ => return None,
    })
}
