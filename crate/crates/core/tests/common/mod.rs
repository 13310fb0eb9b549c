#![allow(dead_code)]

use std::path::Path;

use proxsearch::corpus::DocumentStore;
use proxsearch::index::{build_indexes, write_index_dir, BuiltIndexes, IndexBuilder, IndexKinds, IndexSet};
use proxsearch::lexicon::{LemmaDictionary, LemmaType, Lexicon, LexiconConfig};
use proxsearch::query::Composition;
use proxsearch::synth::{generate, SynthConfig};
use rand::Rng;

pub const SENTENCE: &str = "A friend of mine who has desired the honour of meeting with you";
pub const SENTENCE_DOC: u32 = 27;

/// FL-numbers as listed for the example sentence.
pub const FL_TABLE: &[(&str, u32)] = &[
    ("the", 10),
    ("a", 17),
    ("of", 24),
    ("with", 40),
    ("you", 47),
    ("have", 55),
    ("my", 264),
    ("who", 293),
    ("friend", 793),
    ("meet", 1008),
    ("desire", 2163),
    ("mine", 2482),
    ("honour", 3774),
    ("meeting", 4375),
];

pub fn sentence_dictionary() -> LemmaDictionary {
    let mut d = LemmaDictionary::new();
    d.insert("mine", &["mine", "my"]).unwrap();
    d.insert("has", &["have"]).unwrap();
    d.insert("desired", &["desire"]).unwrap();
    d.insert("meeting", &["meet", "meeting"]).unwrap();
    d
}

/// Lexicon with the listed FL-numbers; counts fall as FL-numbers rise.
pub fn sentence_lexicon() -> Lexicon {
    let entries: Vec<(&str, u32, u64)> = FL_TABLE
        .iter()
        .map(|&(l, fl)| (l, fl, 1_000_000 - fl as u64))
        .collect();
    Lexicon::with_fl_numbers(sentence_dictionary(), &entries, LexiconConfig::default()).unwrap()
}

/// The sentence as document 27 after 27 empty documents.
pub fn sentence_store() -> DocumentStore {
    let mut texts: Vec<(String, String)> = (0..SENTENCE_DOC)
        .map(|i| (format!("d{i:02}.txt"), String::new()))
        .collect();
    texts.push((format!("d{SENTENCE_DOC}.txt"), SENTENCE.to_owned()));
    DocumentStore::from_texts(texts)
}

pub fn sentence_indexes(md: u32) -> BuiltIndexes {
    let lex = sentence_lexicon();
    let mut b = IndexBuilder::new(&lex, md, IndexKinds::ALL).unwrap();
    sentence_store().for_each_text(|id, t| b.add_text(id, t)).unwrap();
    b.finish()
}

pub struct Built {
    pub store: DocumentStore,
    pub lexicon: Lexicon,
    pub index: IndexSet,
}

/// Builds and writes every index for `store` into `dir`, then opens it.
pub fn build_on_disk(store: DocumentStore, lexicon: Lexicon, md: u32, dir: &Path) -> Built {
    let built = build_indexes(&store, &lexicon, md, IndexKinds::ALL).unwrap();
    write_index_dir(dir, &built, &lexicon, &store).unwrap();
    let index = IndexSet::open(dir).unwrap();
    Built { store, lexicon, index }
}

pub fn build_text_corpus(texts: &[(&str, &str)], dict: LemmaDictionary, cfg: LexiconConfig, md: u32, dir: &Path) -> Built {
    let store = DocumentStore::from_texts(texts.iter().map(|&(p, t)| (p, t)));
    let lexicon = Lexicon::from_corpus(&store, dict, cfg).unwrap();
    build_on_disk(store, lexicon, md, dir)
}

pub fn build_synthetic(cfg: &SynthConfig, lex_cfg: LexiconConfig, md: u32, dir: &Path) -> Built {
    let corpus = generate(cfg).unwrap();
    let store = corpus.store();
    let lexicon = Lexicon::from_corpus(&store, corpus.dictionary, lex_cfg).unwrap();
    build_on_disk(store, lexicon, md, dir)
}

/// Lemma-type class of a token: `Some(t)` when all its lemmas share type `t`.
fn token_class(lex: &Lexicon, word: &str) -> Option<LemmaType> {
    let types: Vec<LemmaType> = lex.lemmatize(word).iter().map(|l| lex.info(l).lemma_type).collect();
    let t = types[0];
    types.iter().all(|&x| x == t).then_some(t)
}

fn fits(target: Composition, classes: &[LemmaType]) -> bool {
    let has = |t| classes.contains(&t);
    let (s, f, o) = (has(LemmaType::Stop), has(LemmaType::FrequentlyUsed), has(LemmaType::Ordinary));
    match target {
        Composition::AllOrdinary => o && !s && !f,
        Composition::AllFu => f && !s && !o,
        Composition::AllStop => s && !f && !o,
        Composition::MixedNonstop => f && o && !s,
        Composition::WithStop => s && (f || o),
    }
}

/// A query of `len` words taken from one window of a document whose
/// words make up the `target` composition, or `None` if none was found.
pub fn window_query(
    rng: &mut impl Rng,
    docs: &[Vec<String>],
    lex: &Lexicon,
    target: Composition,
    len: usize,
    md: u32,
) -> Option<String> {
    for _ in 0..400 {
        let d = &docs[rng.gen_range(0..docs.len())];
        if d.len() < len {
            continue;
        }
        let width = (md as usize + 1).min(d.len());
        let start = rng.gen_range(0..=d.len() - width);
        let mut idx: Vec<usize> = (start..start + width)
            .filter(|&i| token_class(lex, &d[i]).is_some_and(|t| fits(target, &[t])))
            .collect();
        if target == Composition::MixedNonstop || target == Composition::WithStop {
            idx = (start..start + width).filter(|&i| token_class(lex, &d[i]).is_some()).collect();
            idx.retain(|&i| {
                let t = token_class(lex, &d[i]).unwrap();
                target != Composition::MixedNonstop || t != LemmaType::Stop
            });
        }
        if idx.len() < len {
            continue;
        }
        for _ in 0..20 {
            let mut pick: Vec<usize> = Vec::with_capacity(len);
            while pick.len() < len {
                let i = idx[rng.gen_range(0..idx.len())];
                if !pick.contains(&i) {
                    pick.push(i);
                }
            }
            let classes: Vec<LemmaType> = pick.iter().map(|&i| token_class(lex, &d[i]).unwrap()).collect();
            if fits(target, &classes) {
                if rng.gen_bool(0.8) {
                    pick.sort_unstable();
                }
                return Some(pick.iter().map(|&i| d[i].as_str()).collect::<Vec<_>>().join(" "));
            }
        }
    }
    None
}

pub fn doc_words(store: &DocumentStore) -> Vec<Vec<String>> {
    (0..store.len() as u32)
        .map(|i| store.tokens(i).unwrap().into_iter().map(|t| t.surface).collect())
        .collect()
}

/// FL-numbers from the worked query examples.
pub const QUERY_FL_TABLE: &[(&str, u32)] = &[
    ("to", 7),
    ("a", 17),
    ("be", 21),
    ("you", 47),
    ("not", 156),
    ("my", 264),
    ("are", 268),
    ("who", 293),
    ("friend", 793),
    ("mine", 2482),
];

pub fn query_examples_lexicon() -> Lexicon {
    let mut d = LemmaDictionary::new();
    d.insert("mine", &["mine", "my"]).unwrap();
    d.insert("are", &["are", "be"]).unwrap();
    let entries: Vec<(&str, u32, u64)> = QUERY_FL_TABLE
        .iter()
        .map(|&(l, fl)| (l, fl, 1_000_000 - fl as u64))
        .collect();
    Lexicon::with_fl_numbers(d, &entries, LexiconConfig::default()).unwrap()
}
