//! Seeded synthetic corpora with a Zipf word distribution.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::lexicon::LemmaDictionary;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub docs: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub vocabulary: usize,
    /// Zipf exponent `s`.
    pub exponent: f64,
    /// Surface words given a second lemma in the generated dictionary.
    pub multi_lemma_words: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 100,
            min_words: 200,
            max_words: 2000,
            vocabulary: 5000,
            exponent: 1.1,
            multi_lemma_words: 50,
            seed: 1,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.vocabulary < 2 || self.min_words == 0 || self.min_words > self.max_words {
            return Err(Error::Config("synthetic corpus needs vocabulary ≥ 2 and 0 < min_words ≤ max_words".into()));
        }
        if self.exponent.is_nan() || self.exponent <= 0.0 {
            return Err(Error::Config("Zipf exponent must be positive".into()));
        }
        Ok(())
    }
}

/// Pronounceable, unique word for a frequency rank (0 = most frequent).
/// Frequent ranks get the shorter words.
pub fn word_for_rank(rank: usize) -> String {
    let syllables = CONSONANTS.len() * VOWELS.len();
    let mut len = 2;
    let mut base = 0usize;
    let mut block = syllables * syllables;
    while rank >= base + block {
        base += block;
        block *= syllables;
        len += 1;
    }
    let mut r = rank - base;
    let mut out = Vec::with_capacity(len * 2);
    for _ in 0..len {
        let s = r % syllables;
        r /= syllables;
        out.push(CONSONANTS[s / VOWELS.len()]);
        out.push(VOWELS[s % VOWELS.len()]);
    }
    String::from_utf8(out).expect("ascii")
}

pub struct SynthCorpus {
    /// `(relative path, text)` per document.
    pub texts: Vec<(String, String)>,
    pub dictionary: LemmaDictionary,
}

impl SynthCorpus {
    pub fn store(&self) -> DocumentStore {
        DocumentStore::from_texts(self.texts.iter().map(|(p, t)| (p.clone(), t.clone())))
    }

    pub fn total_bytes(&self) -> usize {
        self.texts.iter().map(|(_, t)| t.len()).sum()
    }

    /// Writes one file per document plus the dictionary to `dict_path`.
    pub fn write(&self, dir: &Path, dict_path: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (p, t) in &self.texts {
            let path = dir.join(p);
            fs::write(&path, t).map_err(|e| Error::io(&path, e))?;
        }
        fs::write(dict_path, self.dictionary.to_text()).map_err(|e| Error::io(dict_path, e))
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zipf = Zipf::new(cfg.vocabulary as u64, cfg.exponent).map_err(|e| Error::Config(e.to_string()))?;
    let words: Vec<String> = (0..cfg.vocabulary).map(word_for_rank).collect();

    // some surface words carry a second lemma, like "rose" → rose, rise
    let mut dictionary = LemmaDictionary::new();
    for _ in 0..cfg.multi_lemma_words.min(cfg.vocabulary) {
        let w = zipf.sample(&mut rng) as usize - 1;
        let other = rng.gen_range(0..cfg.vocabulary);
        if other != w {
            dictionary.insert(&words[w], &[&words[w], &words[other]])?;
        }
    }

    let width = cfg.docs.max(1).to_string().len();
    let mut texts = Vec::with_capacity(cfg.docs);
    for d in 0..cfg.docs {
        let n = rng.gen_range(cfg.min_words..=cfg.max_words);
        let mut text = String::with_capacity(n * 7);
        let mut sentence = 0;
        for i in 0..n {
            let w = &words[zipf.sample(&mut rng) as usize - 1];
            if i > 0 {
                text.push(' ');
            }
            if sentence == 0 {
                let mut c = w.chars();
                if let Some(f) = c.next() {
                    text.extend(f.to_uppercase());
                    text.push_str(c.as_str());
                }
            } else {
                text.push_str(w);
            }
            sentence += 1;
            if rng.gen_ratio(1, 12) {
                text.push(if rng.gen_bool(0.7) { '.' } else { ',' });
                if text.ends_with('.') {
                    sentence = 0;
                }
            }
        }
        text.push_str(".\n");
        texts.push((format!("doc{d:0width$}.txt"), text));
    }
    Ok(SynthCorpus { texts, dictionary })
}
