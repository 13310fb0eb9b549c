//! Lemmatization and lemma frequency bands.
//!
//! Lemmas are ranked by decreasing corpus frequency (the FL-list). The first
//! `sw_count` ranks are stop lemmas, the next `fu_count` frequently used
//! lemmas, everything else ordinary.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{for_each_word, DocumentStore};
use crate::error::{Error, Result};

/// Dense id of a lemma inside one [`Lexicon`].
pub type LemmaId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaType {
    Stop,
    FrequentlyUsed,
    Ordinary,
}

impl LemmaType {
    pub fn as_str(self) -> &'static str {
        match self {
            LemmaType::Stop => "stop",
            LemmaType::FrequentlyUsed => "frequently-used",
            LemmaType::Ordinary => "ordinary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconConfig {
    pub sw_count: u32,
    pub fu_count: u32,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            sw_count: 700,
            fu_count: 2100,
        }
    }
}

impl LexiconConfig {
    pub fn new(sw_count: u32, fu_count: u32) -> Result<Self> {
        let cfg = LexiconConfig { sw_count, fu_count };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sw_count < 1 || self.fu_count < 1 {
            return Err(Error::Config(
                "sw_count and fu_count must both be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Band of a lemma at FL rank `rank`.
    pub fn band(&self, rank: u32) -> LemmaType {
        let rank = rank as u64;
        if rank < self.sw_count as u64 {
            LemmaType::Stop
        } else if rank < self.sw_count as u64 + self.fu_count as u64 {
            LemmaType::FrequentlyUsed
        } else {
            LemmaType::Ordinary
        }
    }
}

/// Surface word → lemma list. Words missing from the dictionary are their
/// own single lemma.
#[derive(Debug, Clone, Default)]
pub struct LemmaDictionary {
    entries: HashMap<String, Vec<String>>,
}

fn valid_lemma(s: &str) -> bool {
    !s.is_empty() && !s.contains(['\t', '\n', '\r', '\u{1}', ','])
}

impl LemmaDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry. Duplicate lemmas are dropped, first
    /// occurrence wins.
    pub fn insert<S: AsRef<str>>(&mut self, word: &str, lemmas: &[S]) -> Result<()> {
        let mut list: Vec<String> = Vec::with_capacity(lemmas.len());
        for l in lemmas {
            let l = l.as_ref().trim().to_lowercase();
            if !valid_lemma(&l) {
                return Err(Error::Config(format!("invalid lemma {l:?} for {word:?}")));
            }
            if !list.contains(&l) {
                list.push(l);
            }
        }
        if list.is_empty() {
            return Err(Error::Config(format!("empty lemma list for {word:?}")));
        }
        self.entries.insert(word.to_lowercase(), list);
        Ok(())
    }

    /// Parses `<word>\t<lemma1>,<lemma2>,...` lines.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut dict = LemmaDictionary::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                message,
            };
            let (word, lemmas) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected <word>\\t<lemmas>".into()))?;
            let lemmas: Vec<&str> = lemmas.split(',').collect();
            dict.insert(word.trim(), &lemmas)
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Absent path means identity lemmatization for every word.
    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::new()),
        }
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serializes in the same line format as [`parse`](Self::parse), words sorted.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&String> = self.entries.keys().collect();
        words.sort();
        let mut out = String::new();
        for w in words {
            let _ = writeln!(out, "{}\t{}", w, self.entries[w].join(","));
        }
        out
    }
}

/// Lemmas of `word`: the dictionary's list in file order, or the word itself.
pub fn lemmatize(word: &str, dict: &LemmaDictionary) -> Vec<String> {
    match dict.get(word) {
        Some(lemmas) => lemmas.to_vec(),
        None => vec![word.to_owned()],
    }
}

/// Lemmas sorted by decreasing occurrence count; position is the FL-number.
#[derive(Debug, Clone, Default)]
pub struct FlList {
    entries: Vec<(String, u64)>,
    ranks: HashMap<String, u32>,
}

/// Equal counts are ordered by lemma bytes so FL-numbers are unique and
/// reproducible.
pub fn build_fl_list(lemma_counts: &HashMap<String, u64>) -> FlList {
    let mut entries: Vec<(String, u64)> = lemma_counts
        .iter()
        .map(|(l, &c)| (l.clone(), c))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    FlList::from_sorted(entries)
}

impl FlList {
    fn from_sorted(entries: Vec<(String, u64)>) -> Self {
        let ranks = entries
            .iter()
            .enumerate()
            .map(|(i, (l, _))| (l.clone(), i as u32))
            .collect();
        FlList { entries, ranks }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn rank(&self, lemma: &str) -> Option<u32> {
        self.ranks.get(lemma).copied()
    }

    pub fn count(&self, lemma: &str) -> u64 {
        self.rank(lemma)
            .map(|r| self.entries[r as usize].1)
            .unwrap_or(0)
    }
}

/// FL-number of a lemma; lemmas outside the FL-list are `Unlisted` and sort
/// after every ranked lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlNumber {
    Rank(u32),
    Unlisted,
}

impl FlNumber {
    pub fn rank(self) -> Option<u32> {
        match self {
            FlNumber::Rank(r) => Some(r),
            FlNumber::Unlisted => None,
        }
    }
}

impl std::fmt::Display for FlNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlNumber::Rank(r) => write!(f, "{r}"),
            FlNumber::Unlisted => f.write_str("~"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LemmaInfo {
    pub lemma: String,
    pub fl_number: FlNumber,
    pub occurrence_count: u64,
    pub lemma_type: LemmaType,
}

impl LemmaInfo {
    /// Ordering key: ordinary lemmas all share the "infinite" FL-number.
    fn order_rank(&self) -> Option<u32> {
        match self.lemma_type {
            LemmaType::Ordinary => None,
            _ => self.fl_number.rank(),
        }
    }

    pub fn is_stop(&self) -> bool {
        self.lemma_type == LemmaType::Stop
    }
}

pub fn classify(lemma: &str, fl: &FlList, cfg: &LexiconConfig) -> LemmaInfo {
    match fl.rank(lemma) {
        Some(rank) => LemmaInfo {
            lemma: lemma.to_owned(),
            fl_number: FlNumber::Rank(rank),
            occurrence_count: fl.entries[rank as usize].1,
            lemma_type: cfg.band(rank),
        },
        None => unlisted(lemma),
    }
}

fn unlisted(lemma: &str) -> LemmaInfo {
    LemmaInfo {
        lemma: lemma.to_owned(),
        fl_number: FlNumber::Unlisted,
        occurrence_count: 0,
        lemma_type: LemmaType::Ordinary,
    }
}

/// Total order on lemmas: stop and frequently used lemmas by FL-number,
/// then all ordinary lemmas by their string.
pub fn compare_lemmas(a: &LemmaInfo, b: &LemmaInfo) -> Ordering {
    match (a.order_rank(), b.order_rank()) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.lemma.cmp(&b.lemma)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.lemma.cmp(&b.lemma),
    }
}

/// Orders lemmas from least to most frequent: lower occurrence count first,
/// then the greater lemma under [`compare_lemmas`].
pub fn rarity_order(a: &LemmaInfo, b: &LemmaInfo) -> Ordering {
    a.occurrence_count
        .cmp(&b.occurrence_count)
        .then_with(|| compare_lemmas(b, a))
}

/// Dictionary plus classified lemma table for one corpus.
#[derive(Debug, Clone)]
pub struct Lexicon {
    cfg: LexiconConfig,
    dict: LemmaDictionary,
    infos: Vec<LemmaInfo>,
    ids: HashMap<String, LemmaId>,
}

/// Occurrences of every lemma of every token in the store.
pub fn count_lemmas(store: &DocumentStore, dict: &LemmaDictionary) -> Result<HashMap<String, u64>> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    store.for_each_text(|_, text| {
        for_each_word(text, |w| match dict.get(w) {
            Some(lemmas) => {
                for l in lemmas {
                    *counts.entry(l.clone()).or_default() += 1;
                }
            }
            None => {
                if let Some(c) = counts.get_mut(w) {
                    *c += 1;
                } else {
                    counts.insert(w.to_owned(), 1);
                }
            }
        });
        Ok(())
    })?;
    Ok(counts)
}

impl Lexicon {
    pub fn from_fl_list(dict: LemmaDictionary, fl: &FlList, cfg: LexiconConfig) -> Result<Self> {
        cfg.validate()?;
        let infos: Vec<LemmaInfo> = fl
            .entries()
            .iter()
            .map(|(l, _)| classify(l, fl, &cfg))
            .collect();
        Ok(Self::assemble(dict, infos, cfg))
    }

    /// Counts lemmas over the corpus and classifies them.
    pub fn from_corpus(store: &DocumentStore, dict: LemmaDictionary, cfg: LexiconConfig) -> Result<Self> {
        let counts = count_lemmas(store, &dict)?;
        Self::from_fl_list(dict, &build_fl_list(&counts), cfg)
    }

    /// Lexicon with explicitly assigned FL-numbers and counts, for
    /// reproducing hand-worked examples whose FL-numbers come from some
    /// other corpus. Entries: `(lemma, fl_number, occurrence_count)`.
    pub fn with_fl_numbers(
        dict: LemmaDictionary,
        entries: &[(&str, u32, u64)],
        cfg: LexiconConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut sorted: Vec<&(&str, u32, u64)> = entries.iter().collect();
        sorted.sort_by_key(|e| e.1);
        if sorted.windows(2).any(|w| w[0].1 == w[1].1) {
            return Err(Error::Config("FL-numbers must be unique".into()));
        }
        let infos = sorted
            .into_iter()
            .map(|&(lemma, fl, count)| LemmaInfo {
                lemma: lemma.to_owned(),
                fl_number: FlNumber::Rank(fl),
                occurrence_count: count,
                lemma_type: cfg.band(fl),
            })
            .collect();
        Ok(Self::assemble(dict, infos, cfg))
    }

    fn assemble(dict: LemmaDictionary, infos: Vec<LemmaInfo>, cfg: LexiconConfig) -> Self {
        let ids = infos
            .iter()
            .enumerate()
            .map(|(i, info)| (info.lemma.clone(), i as LemmaId))
            .collect();
        Lexicon {
            cfg,
            dict,
            infos,
            ids,
        }
    }

    pub fn config(&self) -> &LexiconConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &LemmaDictionary {
        &self.dict
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn id(&self, lemma: &str) -> Option<LemmaId> {
        self.ids.get(lemma).copied()
    }

    pub fn by_id(&self, id: LemmaId) -> &LemmaInfo {
        &self.infos[id as usize]
    }

    pub fn infos(&self) -> &[LemmaInfo] {
        &self.infos
    }

    /// Classification of any lemma; unknown lemmas are unlisted ordinary.
    pub fn info(&self, lemma: &str) -> LemmaInfo {
        match self.id(lemma) {
            Some(id) => self.infos[id as usize].clone(),
            None => unlisted(lemma),
        }
    }

    pub fn lemmatize(&self, word: &str) -> Vec<String> {
        lemmatize(word, &self.dict)
    }

    /// `<fl_number>\t<lemma>\t<count>` per listed lemma, FL ascending.
    pub fn fl_list_text(&self) -> String {
        let mut out = String::new();
        for info in &self.infos {
            if let FlNumber::Rank(r) = info.fl_number {
                let _ = writeln!(out, "{}\t{}\t{}", r, info.lemma, info.occurrence_count);
            }
        }
        out
    }

    /// Inverse of [`fl_list_text`](Self::fl_list_text).
    pub fn parse_fl_list(
        text: &str,
        path: &Path,
        dict: LemmaDictionary,
        cfg: LexiconConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut infos = Vec::new();
        let mut last: Option<u32> = None;
        for (i, line) in text.lines().enumerate() {
            let bad = |message: &str| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                message: message.to_owned(),
            };
            let mut parts = line.split('\t');
            let (Some(fl), Some(lemma), Some(count), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected 3 tab-separated fields"));
            };
            let fl: u32 = fl.parse().map_err(|_| bad("bad FL-number"))?;
            if last.is_some_and(|l| l >= fl) {
                return Err(bad("FL-numbers must be ascending"));
            }
            last = Some(fl);
            infos.push(LemmaInfo {
                lemma: lemma.to_owned(),
                fl_number: FlNumber::Rank(fl),
                occurrence_count: count.parse().map_err(|_| bad("bad count"))?,
                lemma_type: cfg.band(fl),
            });
        }
        Ok(Self::assemble(dict, infos, cfg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn info(lemma: &str, fl: Option<u32>, cfg: &LexiconConfig) -> LemmaInfo {
        match fl {
            Some(r) => LemmaInfo {
                lemma: lemma.into(),
                fl_number: FlNumber::Rank(r),
                occurrence_count: 0,
                lemma_type: cfg.band(r),
            },
            None => unlisted(lemma),
        }
    }

    #[test]
    fn lemmatize_uses_dictionary_order_or_identity() {
        let mut d = LemmaDictionary::new();
        d.insert("mine", &["mine", "my"]).unwrap();
        d.insert("meeting", &["meet", "meeting"]).unwrap();
        assert_eq!(lemmatize("mine", &d), ["mine", "my"]);
        assert_eq!(lemmatize("meeting", &d), ["meet", "meeting"]);
        assert_eq!(lemmatize("zzqx", &d), ["zzqx"]);
    }

    #[test]
    fn dictionary_file_format() {
        let text = "mine\tmine,my\n\nhas\thave\nrose\trose,rise,rose\n";
        let d = LemmaDictionary::parse(text, Path::new("dict")).unwrap();
        assert_eq!(d.get("rose").unwrap(), ["rose", "rise"]);
        assert_eq!(d.to_text(), "has\thave\nmine\tmine,my\nrose\trose,rise\n");
        let err = LemmaDictionary::parse("oops\n", Path::new("dict")).unwrap_err();
        assert!(err.to_string().contains("dict:1"), "{err}");
        assert!(LemmaDictionary::parse("w\ta,,b\n", Path::new("d")).is_err());
    }

    #[test]
    fn fl_list_sorts_by_count_then_lemma() {
        let counts: HashMap<String, u64> =
            [("the", 100), ("a", 90), ("friend", 5)].iter().map(|(l, c)| (l.to_string(), *c)).collect();
        let fl = build_fl_list(&counts);
        assert_eq!(fl.rank("the"), Some(0));
        assert_eq!(fl.rank("a"), Some(1));
        assert_eq!(fl.rank("friend"), Some(2));

        let ties: HashMap<String, u64> = [("y".to_string(), 7), ("x".to_string(), 7)].into();
        let fl = build_fl_list(&ties);
        assert_eq!(fl.rank("x"), Some(0));
        assert_eq!(fl.rank("y"), Some(1));

        assert!(build_fl_list(&HashMap::new()).is_empty());
    }

    #[test]
    fn classify_bands() {
        let cfg = LexiconConfig::default();
        assert_eq!(cfg.band(793), LemmaType::FrequentlyUsed);
        assert_eq!(cfg.band(3774), LemmaType::Ordinary);
        assert_eq!(cfg.band(47), LemmaType::Stop);
        assert_eq!(cfg.band(699), LemmaType::Stop);
        assert_eq!(cfg.band(700), LemmaType::FrequentlyUsed);
        assert_eq!(cfg.band(2799), LemmaType::FrequentlyUsed);
        assert_eq!(cfg.band(2800), LemmaType::Ordinary);

        let counts: HashMap<String, u64> = [("a".to_string(), 3), ("b".to_string(), 2)].into();
        let fl = build_fl_list(&counts);
        let small = LexiconConfig::new(1, 1).unwrap();
        assert_eq!(classify("a", &fl, &small).lemma_type, LemmaType::Stop);
        assert_eq!(classify("b", &fl, &small).lemma_type, LemmaType::FrequentlyUsed);
        let missing = classify("zz", &fl, &small);
        assert_eq!(missing.fl_number, FlNumber::Unlisted);
        assert_eq!(missing.lemma_type, LemmaType::Ordinary);
    }

    #[test]
    fn config_rejects_zero_bands() {
        assert!(LexiconConfig::new(0, 5).is_err());
        assert!(LexiconConfig::new(5, 0).is_err());
    }

    #[test]
    fn compare_by_fl_then_string() {
        let cfg = LexiconConfig::default();
        let my = info("my", Some(264), &cfg);
        let of = info("of", Some(24), &cfg);
        assert_eq!(compare_lemmas(&my, &of), Ordering::Greater);
        assert_eq!(compare_lemmas(&my, &my), Ordering::Equal);
        let glorious = info("glorious", None, &cfg);
        let promising = info("promising", None, &cfg);
        assert_eq!(compare_lemmas(&glorious, &promising), Ordering::Less);
        // an ordinary lemma with a real rank still compares as infinite
        let honour = info("honour", Some(3774), &cfg);
        let mine = info("mine", Some(2482), &cfg);
        assert_eq!(compare_lemmas(&mine, &honour), Ordering::Less);
        assert_eq!(compare_lemmas(&honour, &glorious), Ordering::Greater);
    }

    #[test]
    fn sentence_bands_match_worked_example() {
        let cfg = LexiconConfig::default();
        let table = [
            ("a", 17), ("friend", 793), ("of", 24), ("mine", 2482), ("my", 264),
            ("who", 293), ("have", 55), ("desire", 2163), ("the", 10),
            ("honour", 3774), ("meet", 1008), ("meeting", 4375), ("with", 40), ("you", 47),
        ];
        let entries: Vec<(&str, u32, u64)> = table.iter().map(|&(l, fl)| (l, fl, 1)).collect();
        let lex = Lexicon::with_fl_numbers(LemmaDictionary::new(), &entries, cfg).unwrap();
        let band = |t: LemmaType| {
            let mut v: Vec<&str> = table
                .iter()
                .filter(|(l, _)| lex.info(l).lemma_type == t)
                .map(|(l, _)| *l)
                .collect();
            v.sort();
            v
        };
        assert_eq!(band(LemmaType::Stop), ["a", "have", "my", "of", "the", "who", "with", "you"]);
        assert_eq!(band(LemmaType::FrequentlyUsed), ["desire", "friend", "meet", "mine"]);
        assert_eq!(band(LemmaType::Ordinary), ["honour", "meeting"]);
    }

    #[test]
    fn fl_list_text_round_trips() {
        let store = DocumentStore::from_texts([("a", "the cat saw the dog"), ("b", "the dog")]);
        let lex = Lexicon::from_corpus(&store, LemmaDictionary::new(), LexiconConfig::new(1, 1).unwrap()).unwrap();
        let text = lex.fl_list_text();
        assert_eq!(text, "0\tthe\t3\n1\tdog\t2\n2\tcat\t1\n3\tsaw\t1\n");
        let back = Lexicon::parse_fl_list(&text, Path::new("fl_list"), LemmaDictionary::new(), *lex.config()).unwrap();
        assert_eq!(back.infos(), lex.infos());
    }

    proptest! {
        #[test]
        fn compare_lemmas_is_a_total_order(
            specs in proptest::collection::vec(("[a-e]{1,2}", proptest::option::of(0u32..40)), 3..12)
        ) {
            let cfg = LexiconConfig::new(10, 10).unwrap();
            let infos: Vec<LemmaInfo> = specs.iter().map(|(l, fl)| info(l, *fl, &cfg)).collect();
            for a in &infos {
                for b in &infos {
                    let ab = compare_lemmas(a, b);
                    prop_assert_eq!(ab, compare_lemmas(b, a).reverse());
                    if ab == Ordering::Equal {
                        prop_assert_eq!(a.order_rank(), b.order_rank());
                        prop_assert_eq!(&a.lemma, &b.lemma);
                    }
                    for c in &infos {
                        if ab != Ordering::Greater && compare_lemmas(b, c) != Ordering::Greater {
                            prop_assert_ne!(compare_lemmas(a, c), Ordering::Greater);
                        }
                    }
                }
            }
        }
    }
}
