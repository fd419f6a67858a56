//! Regenerates the bundled toy benchmark under `data/toy/`.
//!
//! Two entity types (person, location). Every corpus sentence carries one
//! "primary" entity that the planted retrieval results point at; secondary
//! slots are filled so that about 30% of gold mentions use names that are
//! never retrieved, in the same contexts as retrieved ones.
//!
//! Run with `cargo run --example make_toy`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use askner::annotator::{write_conll, LabeledSentence, Tag};
use askner::retrieval::CorpusSentence;

const SEED: u64 = 20221017;
const CORPUS_SIZE: usize = 200;
const VALIDATION_SIZE: usize = 60;
const ABSENT_SHARE: f64 = 0.30;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Pool {
    Athlete,
    Politician,
    City,
    Country,
}

impl Pool {
    fn entity_type(self) -> &'static str {
        match self {
            Pool::Athlete | Pool::Politician => "person",
            Pool::City | Pool::Country => "location",
        }
    }

    fn question(self) -> &'static str {
        match self {
            Pool::Athlete => "person/athlete",
            Pool::Politician => "person/politician",
            Pool::City => "location/city",
            Pool::Country => "location/country",
        }
    }
}

const ATHLETES: [&str; 12] = [
    "Serena Park",
    "Luka Moreno",
    "Ada Kowalski",
    "Tomas Berg",
    "Nina Okafor",
    "Ravi Menon",
    "Elena Sato",
    "Jonas Weber",
    "Mia Laurent",
    "Omar Haddad",
    "Kenji Ito",
    "Lucia Ferraro",
];
const POLITICIANS: [&str; 12] = [
    "Helen Brandt",
    "Victor Osei",
    "Clara Nunez",
    "Peter Lindqvist",
    "Amara Diallo",
    "Hugo Marchetti",
    "Irene Volkova",
    "Samuel Achebe",
    "Greta Holm",
    "Farid Karimi",
    "Ruth Abara",
    "Dmitri Petrov",
];
const CITIES: [&str; 12] = [
    "Lyon",
    "Porto",
    "Krakow",
    "Osaka",
    "Nairobi",
    "Quito",
    "Leeds",
    "Graz",
    "Tampere",
    "Cebu",
    "San Diego",
    "New Delhi",
];
const COUNTRIES: [&str; 12] = [
    "Chile",
    "Norway",
    "Kenya",
    "Vietnam",
    "Portugal",
    "Canada",
    "Ghana",
    "Peru",
    "Finland",
    "Morocco",
    "Iceland",
    "New Zealand",
];

// Never retrieved, never in the corpus: validation only.
const HELD_OUT_PEOPLE: [&str; 10] = [
    "Marta Silva",
    "Jin Hale",
    "Oscar Lund",
    "Priya Das",
    "Felix Adler",
    "Sara Quint",
    "Bruno Keller",
    "Leila Nasser",
    "Ivan Horvat",
    "Noor Rahman",
];
const HELD_OUT_PLACES: [&str; 10] = [
    "Bergen", "Tartu", "Lille", "Uruguay", "Nepal", "Latvia", "Cusco", "Mombasa", "Oman", "Perth",
];

/// `{P}` person slot, `{L}` location slot.
const TEMPLATES: [&str; 20] = [
    "{P} said on Monday that talks in {L} would continue .",
    "Minister {P} met {P} in {L} to discuss trade .",
    "{P} won the final against {P} on Sunday .",
    "Coach {P} praised {P} after the match in {L} .",
    "Heavy rain hit {L} and parts of {L} overnight .",
    "Flights from {L} to {L} were cancelled .",
    "{P} travelled to {L} last week .",
    "Officials in {L} confirmed the report on Friday .",
    "{P} , a former senator , criticised the plan .",
    "Fans in {L} cheered for {P} .",
    "The summit in {L} was hosted by {P} .",
    "{P} and {P} signed the agreement in {L} .",
    "Prices in {L} rose sharply , according to {P} .",
    "{P} told reporters in {L} that the bill would pass .",
    "Exports from {L} fell sharply last year .",
    "{P} beat {P} in straight sets .",
    "Voters in {L} backed {P} by a wide margin .",
    "The delegation from {L} arrived in {L} on Sunday .",
    "{P} scored twice as {L} beat {L} .",
    "Police in {L} said {P} was not injured .",
];

#[derive(Clone, Debug)]
struct Mention {
    name: String,
    entity_type: &'static str,
}

struct Built {
    sentence: CorpusSentence,
    labeled: LabeledSentence,
    /// Char spans of each mention, in slot order.
    spans: Vec<(usize, usize)>,
}

/// Replace each `{...}` placeholder of `template` with the next mention.
fn build(id: &str, template: &str, mentions: &[Mention]) -> Built {
    let mut text = String::new();
    let mut spans = Vec::new();
    let mut it = mentions.iter();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        text.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("closed placeholder");
        let m = it.next().expect("one mention per placeholder");
        let start = text.chars().count();
        text.push_str(&m.name);
        spans.push((start, text.chars().count()));
        rest = &rest[close + 1..];
    }
    text.push_str(rest);
    assert!(it.next().is_none(), "unused mentions for {template:?}");
    let sentence = CorpusSentence::tokenize(id, text);
    let mut tags = vec![Tag::O; sentence.tokens.len()];
    for (&(s, e), m) in spans.iter().zip(mentions) {
        let (a, b) = sentence
            .token_range(s, e)
            .expect("entity spans align with tokens");
        tags[a] = Tag::B(m.entity_type.to_string());
        for tag in &mut tags[a + 1..b] {
            *tag = Tag::I(m.entity_type.to_string());
        }
    }
    let labeled = LabeledSentence {
        sentence_id: id.to_string(),
        tokens: sentence.surfaces(),
        tags,
    };
    Built {
        sentence,
        labeled,
        spans,
    }
}

fn pool_names(p: Pool) -> &'static [&'static str] {
    match p {
        Pool::Athlete => &ATHLETES,
        Pool::Politician => &POLITICIANS,
        Pool::City => &CITIES,
        Pool::Country => &COUNTRIES,
    }
}

fn slot_kinds(template: &str) -> Vec<char> {
    template
        .split(' ')
        .filter_map(|w| match w {
            "{P}" => Some('P'),
            "{L}" => Some('L'),
            _ => None,
        })
        .collect()
}

struct Record {
    question: &'static str,
    phrase: String,
    sentence_id: String,
    span: (usize, usize),
    correct: bool,
}

fn main() {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy");
    std::fs::create_dir_all(&out).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // A third of every pool is never retrieved.
    let mut present: HashMap<Pool, Vec<&str>> = HashMap::new();
    let mut absent: HashMap<&str, Vec<&str>> = HashMap::new();
    for pool in [Pool::Athlete, Pool::Politician, Pool::City, Pool::Country] {
        let mut names = pool_names(pool).to_vec();
        names.shuffle(&mut rng);
        let (a, p) = names.split_at(4);
        present.insert(pool, p.to_vec());
        absent
            .entry(pool.entity_type())
            .or_default()
            .extend_from_slice(a);
    }
    let person_pools = [Pool::Athlete, Pool::Politician];
    let place_pools = [Pool::City, Pool::Country];

    // Hand-written sentences exercising the normalization rules, an
    // abbreviation and the ambiguous "Washington". Each lists its mentions
    // and the records planted for it as (question, phrase, judged correct).
    let loc = |n: &str| Mention {
        name: n.to_string(),
        entity_type: "location",
    };
    let per = |n: &str| Mention {
        name: n.to_string(),
        entity_type: "person",
    };
    let cities = &present[&Pool::City];
    let countries = &present[&Pool::Country];
    type Special = (String, Vec<Mention>, Vec<(&'static str, String, bool)>);
    let mut specials: Vec<Special> = vec![
        (
            "Heavy rain hit {} and {} overnight .".into(),
            vec![loc(countries[0]), loc(countries[1])],
            vec![(
                "location/country",
                format!("{} and {}", countries[0], countries[1]),
                false,
            )],
        ),
        (
            "Talks with the {} ended without a deal .".into(),
            vec![loc("Netherlands")],
            vec![("location/country", "the Netherlands".into(), true)],
        ),
        (
            "Officials in the {} said the plan was final .".into(),
            vec![loc("US")],
            vec![("location/country", "US".into(), true)],
        ),
        (
            "The city of {} hosted the final .".into(),
            vec![loc(cities[0])],
            vec![("location/city", "city".into(), false)],
        ),
        (
            "Record heat was reported in {} .".into(),
            vec![loc(cities[1])],
            vec![("location/city", "heat".into(), false)],
        ),
        (
            "Crowds in {}, {} and {} celebrated .".into(),
            vec![loc(cities[2]), loc(cities[3]), loc(cities[4])],
            vec![("location/city", format!("{},", cities[2]), true)],
        ),
        (
            "Trade with the {} ({}) grew last year .".into(),
            vec![loc("United Arab Emirates"), loc("UAE")],
            vec![("location/country", "United Arab Emirates".into(), true)],
        ),
        (
            "Flights from {} to the {} resumed on Monday .".into(),
            vec![loc(cities[5]), loc("UAE")],
            vec![("location/city", cities[5].to_string(), true)],
        ),
    ];
    // Washington: seven person readings, three place readings.
    let person_frames = [
        "President {} addressed the troops .",
        "President {} signed the letter .",
        "President {} left the camp .",
    ];
    for i in 0..10 {
        if i < 7 {
            specials.push((
                person_frames[i % 3].into(),
                vec![per("Washington")],
                vec![("person/politician", "Washington".into(), true)],
            ));
        } else {
            specials.push((
                "Protests in {} continued on Tuesday .".into(),
                vec![loc("Washington")],
                vec![("location/city", "Washington".into(), true)],
            ));
        }
    }
    // Mentions that never become dictionary entries: "US" is a stopword and
    // "UAE" is only an alias.
    let special_absent = 3;

    // Regular sentences: primary slot from the retrieved names, cycling so
    // every retrieved name is used; other slots filled below.
    let n_regular = CORPUS_SIZE - specials.len();
    let mut plans: Vec<(usize, Pool, Vec<char>)> = Vec::new();
    for i in 0..n_regular {
        let t = rng.gen_range(0..TEMPLATES.len());
        let kinds = slot_kinds(TEMPLATES[t]);
        let pool = if kinds[0] == 'P' {
            person_pools[i % 2]
        } else {
            place_pools[i % 2]
        };
        plans.push((t, pool, kinds));
    }
    let secondary: usize = plans.iter().map(|(_, _, k)| k.len() - 1).sum();
    let special_mentions: usize = specials.iter().map(|(_, m, _)| m.len()).sum();
    let total = n_regular + secondary + special_mentions;
    let target = (ABSENT_SHARE * total as f64).round() as usize - special_absent;
    assert!(target <= secondary, "not enough secondary slots");
    let mut picks: Vec<bool> = (0..secondary).map(|i| i < target).collect();
    picks.shuffle(&mut rng);
    let mut picks = picks.into_iter();

    let mut cyc: HashMap<Pool, usize> = HashMap::new();
    let mut regular = Vec::new();
    for (t, pool, kinds) in &plans {
        let names = &present[pool];
        let c = cyc.entry(*pool).or_default();
        let primary = names[*c % names.len()];
        *c += 1;
        let mut slots = vec![Mention {
            name: primary.to_string(),
            entity_type: pool.entity_type(),
        }];
        let mut used: BTreeSet<&str> = [primary].into();
        for &k in &kinds[1..] {
            let ty = if k == 'P' { "person" } else { "location" };
            let candidates: Vec<&str> = if picks.next().unwrap() {
                absent[ty].clone()
            } else if k == 'P' {
                person_pools
                    .iter()
                    .flat_map(|p| present[p].clone())
                    .collect()
            } else {
                place_pools
                    .iter()
                    .flat_map(|p| present[p].clone())
                    .collect()
            };
            let name = loop {
                let n = *candidates.choose(&mut rng).unwrap();
                if used.insert(n) {
                    break n;
                }
            };
            slots.push(Mention {
                name: name.to_string(),
                entity_type: ty,
            });
        }
        regular.push((TEMPLATES[*t], slots, *pool));
    }

    // Interleave specials among the regular sentences.
    let mut order: Vec<bool> = vec![true; regular.len()];
    order.extend(std::iter::repeat_n(false, specials.len()));
    order.shuffle(&mut rng);
    let mut specials = specials.into_iter();
    let mut regular = regular.into_iter();
    let mut sentences: Vec<Built> = Vec::new();
    let mut records: Vec<Record> = Vec::new();
    for (i, is_regular) in order.into_iter().enumerate() {
        let id = format!("t{i:03}");
        if is_regular {
            let (template, slots, pool) = regular.next().unwrap();
            let b = build(&id, template, &slots);
            records.push(Record {
                question: pool.question(),
                phrase: slots[0].name.clone(),
                sentence_id: id.clone(),
                span: b.spans[0],
                correct: true,
            });
            sentences.push(b);
        } else {
            let (template, mentions, planted) = specials.next().unwrap();
            let b = build(&id, &template, &mentions);
            for (question, phrase, correct) in planted {
                let text = &b.sentence.text;
                let byte = text
                    .find(&phrase)
                    .expect("planted phrase occurs in its sentence");
                let start = text[..byte].chars().count();
                records.push(Record {
                    question,
                    span: (start, start + phrase.chars().count()),
                    phrase,
                    sentence_id: id.clone(),
                    correct,
                });
            }
            sentences.push(b);
        }
    }

    // Validation: same templates, names never seen in the corpus.
    let mut validation = Vec::new();
    for i in 0..VALIDATION_SIZE {
        let t = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
        let mut used = BTreeSet::new();
        let slots: Vec<Mention> = slot_kinds(t)
            .into_iter()
            .map(|k| {
                let (pool, ty): (&[&str], _) = if k == 'P' {
                    (&HELD_OUT_PEOPLE, "person")
                } else {
                    (&HELD_OUT_PLACES, "location")
                };
                let name = loop {
                    let n = *pool.choose(&mut rng).unwrap();
                    if used.insert(n) {
                        break n;
                    }
                };
                Mention {
                    name: name.to_string(),
                    entity_type: ty,
                }
            })
            .collect();
        validation.push(build(&format!("v{i:03}"), t, &slots).labeled);
    }

    // Results: per question in rank order, scores strictly decreasing.
    let mut results = String::new();
    let mut judgments = String::new();
    for q in [
        "location/city",
        "location/country",
        "person/athlete",
        "person/politician",
    ] {
        let mut rank = 0u32;
        for r in records.iter().filter(|r| r.question == q) {
            rank += 1;
            let score = 100.0 - rank as f64 * 0.25;
            writeln!(
                results,
                "{}",
                json!({
                    "question_id": q,
                    "rank": rank,
                    "phrase": r.phrase,
                    "score": score,
                    "sentence_id": r.sentence_id,
                    "char_start": r.span.0,
                    "char_end": r.span.1,
                })
            )
            .unwrap();
            writeln!(
                judgments,
                "{}",
                json!({ "question_id": q, "rank": rank, "correct": r.correct })
            )
            .unwrap();
        }
    }

    let corpus: String = sentences
        .iter()
        .map(|b| serde_json::to_string(&b.sentence).unwrap() + "\n")
        .collect();
    let gold: Vec<LabeledSentence> = sentences.iter().map(|b| b.labeled.clone()).collect();
    std::fs::write(out.join("corpus.jsonl"), corpus).unwrap();
    std::fs::write(out.join("results.jsonl"), results).unwrap();
    std::fs::write(out.join("judgments.jsonl"), judgments).unwrap();
    std::fs::write(out.join("gold.conll"), write_conll(&gold).unwrap()).unwrap();
    std::fs::write(
        out.join("validation.conll"),
        write_conll(&validation).unwrap(),
    )
    .unwrap();
    println!(
        "{} corpus sentences, {} gold mentions, {} planted as never retrieved, {} validation sentences",
        sentences.len(),
        total,
        target + special_absent,
        validation.len()
    );
}
