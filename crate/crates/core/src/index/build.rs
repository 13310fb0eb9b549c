//! Single-pass construction of all four indexes.
//!
//! Documents are fed in id order. For each document every posting is
//! appended to its key's encoder in `(position, distance)` order, so each
//! key's stream stays sorted without a final sort.

use rustc_hash::FxHashMap;

use super::codec::{
    write_nsw_record, NswEntry, OrdinaryPosting, PairPosting, PostingEncoder, TriplePosting,
};
use crate::corpus::{for_each_word, DocumentStore};
use crate::error::{Error, Result};
use crate::lexicon::{LemmaId, LemmaType, Lexicon};
use crate::{DocId, Position};

/// Which indexes a [`IndexBuilder`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexKinds {
    pub baseline: bool,
    pub ordinary: bool,
    pub pair: bool,
    pub triple: bool,
}

impl IndexKinds {
    pub const ALL: IndexKinds = IndexKinds {
        baseline: true,
        ordinary: true,
        pair: true,
        triple: true,
    };
    pub const NONE: IndexKinds = IndexKinds {
        baseline: false,
        ordinary: false,
        pair: false,
        triple: false,
    };
}

/// Ordinary-index stream for one lemma: `(ID, P)` records plus the aligned
/// NSW records.
#[derive(Debug, Clone, Default)]
pub struct OrdinaryStream {
    pub postings: PostingEncoder,
    pub nsw: Vec<u8>,
    last_doc: Option<DocId>,
}

/// In-memory result of a build, keyed by lemma ids of the lexicon used.
#[derive(Debug, Default)]
pub struct BuiltIndexes {
    pub max_distance: u32,
    pub doc_count: u32,
    pub baseline: Vec<PostingEncoder>,
    pub ordinary: Vec<OrdinaryStream>,
    pub pair: FxHashMap<(LemmaId, LemmaId), PostingEncoder>,
    pub triple: FxHashMap<(LemmaId, LemmaId, LemmaId), PostingEncoder>,
}

impl BuiltIndexes {
    pub fn baseline_postings(&self) -> u64 {
        self.baseline.iter().map(PostingEncoder::count).sum()
    }
    pub fn ordinary_postings(&self) -> u64 {
        self.ordinary.iter().map(|s| s.postings.count()).sum()
    }
    pub fn pair_postings(&self) -> u64 {
        self.pair.values().map(PostingEncoder::count).sum()
    }
    pub fn triple_postings(&self) -> u64 {
        self.triple.values().map(PostingEncoder::count).sum()
    }
}

pub struct IndexBuilder<'a> {
    lexicon: &'a Lexicon,
    max_distance: u32,
    kinds: IndexKinds,
    types: Vec<LemmaType>,
    fl: Vec<u32>,
    out: BuiltIndexes,
    next_doc: DocId,
    // per-document scratch
    slots: Vec<Vec<LemmaId>>,
    stops: Vec<Vec<LemmaId>>,
    neighbours: Vec<(LemmaId, Position)>,
    nsw: Vec<NswEntry>,
}

impl<'a> IndexBuilder<'a> {
    pub fn new(lexicon: &'a Lexicon, max_distance: u32, kinds: IndexKinds) -> Result<Self> {
        if max_distance < 1 {
            return Err(Error::Config("max_distance must be at least 1".into()));
        }
        let n = lexicon.len();
        let types = lexicon.infos().iter().map(|i| i.lemma_type).collect();
        let fl = lexicon
            .infos()
            .iter()
            .map(|i| i.fl_number.rank().unwrap_or(u32::MAX))
            .collect();
        let out = BuiltIndexes {
            max_distance,
            baseline: if kinds.baseline { vec![PostingEncoder::new(); n] } else { Vec::new() },
            ordinary: if kinds.ordinary { vec![OrdinaryStream::default(); n] } else { Vec::new() },
            ..Default::default()
        };
        Ok(IndexBuilder {
            lexicon,
            max_distance,
            kinds,
            types,
            fl,
            out,
            next_doc: 0,
            slots: Vec::new(),
            stops: Vec::new(),
            neighbours: Vec::new(),
            nsw: Vec::new(),
        })
    }

    /// Tokenizes and lemmatizes `text` as document `doc_id`. Documents must
    /// be added in id order without gaps.
    pub fn add_text(&mut self, doc_id: DocId, text: &str) -> Result<()> {
        let lexicon = self.lexicon;
        let mut slots = std::mem::take(&mut self.slots);
        let mut used = 0usize;
        for_each_word(text, |w| {
            if used == slots.len() {
                slots.push(Vec::new());
            }
            let slot = &mut slots[used];
            slot.clear();
            match lexicon.dictionary().get(w) {
                Some(lemmas) => slot.extend(lemmas.iter().filter_map(|l| lexicon.id(l))),
                None => slot.extend(lexicon.id(w)),
            }
            used += 1;
        });
        let res = self.add_slots(doc_id, &slots[..used]);
        self.slots = slots;
        res
    }

    /// Adds a document given as the lemma ids at each position.
    pub fn add_lemma_ids(&mut self, doc_id: DocId, positions: &[Vec<LemmaId>]) -> Result<()> {
        self.add_slots(doc_id, positions)
    }

    fn add_slots(&mut self, doc_id: DocId, slots: &[Vec<LemmaId>]) -> Result<()> {
        if doc_id != self.next_doc {
            return Err(Error::Config(format!(
                "documents must be added in id order: expected {}, got {doc_id}",
                self.next_doc
            )));
        }
        self.next_doc += 1;
        self.out.doc_count = self.next_doc;

        // stop lemmas per position, ascending id == ascending FL-number
        self.stops.resize_with(slots.len(), Vec::new);
        for (p, slot) in slots.iter().enumerate() {
            let s = &mut self.stops[p];
            s.clear();
            s.extend(slot.iter().copied().filter(|&id| self.types[id as usize] == LemmaType::Stop));
            s.sort_unstable();
        }

        let md = self.max_distance as usize;
        for (p, slot) in slots.iter().enumerate() {
            let lo = p.saturating_sub(md);
            let hi = (p + md).min(slots.len() - 1);
            let pos = p as Position;

            if self.kinds.baseline {
                for &id in slot {
                    self.out.baseline[id as usize]
                        .push(&OrdinaryPosting { doc_id, position: pos })
                        .map_err(corrupt)?;
                }
            }

            if self.kinds.ordinary {
                let mut nsw_ready = false;
                for &id in slot {
                    let stream = &mut self.out.ordinary[id as usize];
                    if self.types[id as usize] == LemmaType::Stop {
                        if stream.last_doc == Some(doc_id) {
                            continue;
                        }
                        stream.postings.push(&OrdinaryPosting { doc_id, position: pos }).map_err(corrupt)?;
                        write_nsw_record(&mut stream.nsw, &[]);
                    } else {
                        if !nsw_ready {
                            self.nsw.clear();
                            for q in lo..=hi {
                                if q == p {
                                    continue;
                                }
                                for &s in &self.stops[q] {
                                    self.nsw.push(NswEntry {
                                        stop_fl: self.fl[s as usize],
                                        offset: q as i32 - p as i32,
                                    });
                                }
                            }
                            self.nsw.sort_unstable_by_key(|e| (e.offset, e.stop_fl));
                            nsw_ready = true;
                        }
                        stream.postings.push(&OrdinaryPosting { doc_id, position: pos }).map_err(corrupt)?;
                        write_nsw_record(&mut stream.nsw, &self.nsw);
                    }
                    stream.last_doc = Some(doc_id);
                }
            }

            if self.kinds.pair {
                for &w in slot {
                    if self.types[w as usize] != LemmaType::FrequentlyUsed {
                        continue;
                    }
                    for q in lo..=hi {
                        if q == p {
                            continue;
                        }
                        for &v in &slots[q] {
                            let canonical = match self.types[v as usize] {
                                LemmaType::Stop => false,
                                LemmaType::Ordinary => true,
                                LemmaType::FrequentlyUsed => w < v || (w == v && q > p),
                            };
                            if canonical {
                                self.out
                                    .pair
                                    .entry((w, v))
                                    .or_default()
                                    .push(&PairPosting {
                                        doc_id,
                                        position: pos,
                                        distance: q as i32 - p as i32,
                                    })
                                    .map_err(corrupt)?;
                            }
                        }
                    }
                }
            }

            if self.kinds.triple {
                for fi in 0..self.stops[p].len() {
                    let f = self.stops[p][fi];
                    self.neighbours.clear();
                    for q in lo..=hi {
                        if q == p {
                            continue;
                        }
                        for &x in &self.stops[q] {
                            // canonically after (f, p): larger lemma, or same lemma later
                            if x > f || (x == f && q > p) {
                                self.neighbours.push((x, q as Position));
                            }
                        }
                    }
                    self.neighbours.sort_unstable();
                    let nb = &self.neighbours;
                    for i in 0..nb.len() {
                        for j in (i + 1)..nb.len() {
                            let ((s, qs), (t, qt)) = (nb[i], nb[j]);
                            if qs == qt {
                                continue;
                            }
                            self.out
                                .triple
                                .entry((f, s, t))
                                .or_default()
                                .push(&TriplePosting {
                                    doc_id,
                                    position: pos,
                                    d1: qs as i32 - p as i32,
                                    d2: qt as i32 - p as i32,
                                })
                                .map_err(corrupt)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> BuiltIndexes {
        self.out
    }
}

fn corrupt(e: super::codec::CodecError) -> Error {
    Error::Corrupt {
        file: "<build>".into(),
        message: e.to_string(),
    }
}

/// Builds the requested indexes over every document of `store`.
pub fn build_indexes(
    store: &DocumentStore,
    lexicon: &Lexicon,
    max_distance: u32,
    kinds: IndexKinds,
) -> Result<BuiltIndexes> {
    let mut b = IndexBuilder::new(lexicon, max_distance, kinds)?;
    store.for_each_text(|id, text| b.add_text(id, text))?;
    Ok(b.finish())
}

/// Plain positional index: every lemma of every token.
pub fn build_baseline(store: &DocumentStore, lexicon: &Lexicon) -> Result<BuiltIndexes> {
    // max_distance is irrelevant for the baseline
    build_indexes(store, lexicon, 1, IndexKinds { baseline: true, ..IndexKinds::NONE })
}

pub fn build_ordinary_nsw(store: &DocumentStore, lexicon: &Lexicon, max_distance: u32) -> Result<BuiltIndexes> {
    build_indexes(store, lexicon, max_distance, IndexKinds { ordinary: true, ..IndexKinds::NONE })
}

pub fn build_pair_index(store: &DocumentStore, lexicon: &Lexicon, max_distance: u32) -> Result<BuiltIndexes> {
    build_indexes(store, lexicon, max_distance, IndexKinds { pair: true, ..IndexKinds::NONE })
}

pub fn build_triple_index(store: &DocumentStore, lexicon: &Lexicon, max_distance: u32) -> Result<BuiltIndexes> {
    build_indexes(store, lexicon, max_distance, IndexKinds { triple: true, ..IndexKinds::NONE })
}
