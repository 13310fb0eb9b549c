//! Query preprocessing and planning.
//!
//! A query is lemmatized into cells, split into subqueries whose cells hold
//! lemmas of a single type, and each subquery gets a [`QueryPlan`] naming the
//! strategy and the exact index keys to read.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::corpus::for_each_word;
use crate::error::{Error, Result};
use crate::index::files::{pair_key, triple_key, Manifest};
use crate::lexicon::{compare_lemmas, rarity_order, LemmaInfo, LemmaType, Lexicon};
use crate::rank::RankConfig;

/// Cells are tracked in `u64` bitmasks during verification.
pub const MAX_CELLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryCell {
    pub surface: String,
    pub lemmas: Vec<LemmaInfo>,
}

impl QueryCell {
    pub fn lemma_type(&self) -> LemmaType {
        self.lemmas[0].lemma_type
    }

    pub fn has_lemma(&self, lemma: &str) -> bool {
        self.lemmas.iter().any(|l| l.lemma == lemma)
    }

    /// Lemmas joined with `|`, e.g. `rose|rise`.
    pub fn label(&self) -> String {
        self.lemmas.iter().map(|l| l.lemma.as_str()).collect::<Vec<_>>().join("|")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Composition {
    AllOrdinary,
    AllFu,
    MixedNonstop,
    AllStop,
    WithStop,
}

impl Composition {
    pub fn as_str(self) -> &'static str {
        match self {
            Composition::AllOrdinary => "ALL_ORDINARY",
            Composition::AllFu => "ALL_FU",
            Composition::MixedNonstop => "MIXED_NONSTOP",
            Composition::AllStop => "ALL_STOP",
            Composition::WithStop => "WITH_STOP",
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subquery {
    pub cells: Vec<QueryCell>,
    pub composition: Composition,
}

impl Subquery {
    pub fn new(cells: Vec<QueryCell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyQuery);
        }
        if cells.len() > MAX_CELLS {
            return Err(Error::Config(format!("query longer than {MAX_CELLS} words")));
        }
        for c in &cells {
            let t = c.lemmas.first().map(|l| l.lemma_type);
            if t.is_none() || c.lemmas.iter().any(|l| Some(l.lemma_type) != t) {
                return Err(Error::Config(format!("cell {:?} must hold lemmas of one type", c.surface)));
            }
        }
        let composition = classify_composition(&cells);
        Ok(Subquery { cells, composition })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl fmt::Display for Subquery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            write!(f, "[{}]", c.label())?;
        }
        Ok(())
    }
}

pub fn classify_composition(cells: &[QueryCell]) -> Composition {
    let types: BTreeSet<u8> = cells
        .iter()
        .flat_map(|c| c.lemmas.iter())
        .map(|l| l.lemma_type as u8)
        .collect();
    let has = |t: LemmaType| types.contains(&(t as u8));
    if types.len() == 1 {
        if has(LemmaType::Ordinary) {
            Composition::AllOrdinary
        } else if has(LemmaType::FrequentlyUsed) {
            Composition::AllFu
        } else {
            Composition::AllStop
        }
    } else if has(LemmaType::Stop) {
        Composition::WithStop
    } else {
        Composition::MixedNonstop
    }
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Lemmatizes `text` and splits it into single-type subqueries.
pub fn preprocess(text: &str, lexicon: &Lexicon) -> Result<Vec<Subquery>> {
    let mut per_cell: Vec<Vec<QueryCell>> = Vec::new();
    for_each_word(text, |w| {
        let mut groups: Vec<QueryCell> = Vec::new();
        for lemma in lexicon.lemmatize(w) {
            let info = lexicon.info(&lemma);
            match groups.iter_mut().find(|g| g.lemma_type() == info.lemma_type) {
                Some(g) => g.lemmas.push(info),
                None => groups.push(QueryCell {
                    surface: w.to_owned(),
                    lemmas: vec![info],
                }),
            }
        }
        per_cell.push(groups);
    });
    if per_cell.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut out = Vec::new();
    for combo in cartesian(&per_cell) {
        if combo.iter().all(|c| c.lemma_type() == LemmaType::Stop) {
            // a stop-only query needs exactly one lemma per cell
            let split: Vec<Vec<QueryCell>> = combo
                .iter()
                .map(|c| {
                    c.lemmas
                        .iter()
                        .map(|l| QueryCell {
                            surface: c.surface.clone(),
                            lemmas: vec![l.clone()],
                        })
                        .collect()
                })
                .collect();
            for cells in cartesian(&split) {
                out.push(Subquery::new(cells)?);
            }
        } else {
            out.push(Subquery::new(combo)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    AllOrdinary,
    AllFu,
    MixedNonstop,
    AllStop,
    WithStop,
    BaselineFallback,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::AllOrdinary => "ALL_ORDINARY",
            Strategy::AllFu => "ALL_FU",
            Strategy::MixedNonstop => "MIXED_NONSTOP",
            Strategy::AllStop => "ALL_STOP",
            Strategy::WithStop => "WITH_STOP",
            Strategy::BaselineFallback => "BASELINE_FALLBACK",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyKind {
    Ordinary,
    OrdinaryWithNsw,
    Pair,
    Triple,
    Baseline,
}

impl KeyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyKind::Ordinary => "ORDINARY",
            KeyKind::OrdinaryWithNsw => "ORDINARY_WITH_NSW",
            KeyKind::Pair => "PAIR",
            KeyKind::Triple => "TRIPLE",
            KeyKind::Baseline => "BASELINE",
        }
    }
}

/// How a stored pair key relates to the anchor lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Stored as `(anchor, other)`; postings are anchored already.
    Forward,
    /// Stored as `(other, anchor)`; postings are reversed on read.
    Reverse,
    /// `(anchor, anchor)`: both views are used.
    Both,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
            Direction::Both => "both",
        }
    }
}

/// One index key to read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanKey {
    pub kind: KeyKind,
    /// Stored key components, one to three lemmas.
    pub lemmas: Vec<String>,
    pub direction: Option<Direction>,
    /// Cells whose positions this key can supply, slot order for triples.
    pub cells: Vec<usize>,
}

impl PlanKey {
    /// Key string as written in the index dictionary.
    pub fn dict_key(&self) -> String {
        match self.lemmas.as_slice() {
            [a] => a.clone(),
            [a, b] => pair_key(a, b),
            [a, b, c] => triple_key(a, b, c),
            _ => String::new(),
        }
    }

    pub fn display_key(&self) -> String {
        format!("({})", self.lemmas.join(", "))
    }
}

/// Pair keys read for one cell, as indexes into [`QueryPlan::keys`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellKeys {
    pub cell: usize,
    pub keys: Vec<usize>,
}

/// Candidate generation driven by one lemma of the main cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorGroup {
    pub lemma: String,
    /// Ordinary-index key listing every anchor occurrence, when read.
    pub anchor_key: Option<usize>,
    /// Cells located through pair keys joined on the anchor position.
    pub pair_cells: Vec<CellKeys>,
    /// Cells located through ordinary keys within the anchor window.
    pub window_cells: Vec<CellKeys>,
    /// Stop cells checked against the anchor's NSW records.
    pub nsw_cells: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct QueryPlan {
    pub strategy: Strategy,
    pub subquery: Subquery,
    pub main_cell: Option<usize>,
    pub keys: Vec<PlanKey>,
    pub groups: Vec<AnchorGroup>,
    pub warnings: Vec<String>,
    pub max_distance: u32,
    pub sw_count: u32,
    pub fu_count: u32,
}

impl QueryPlan {
    /// Cells reachable through some key or NSW check.
    pub fn covered_cells(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.keys.iter().flat_map(|k| k.cells.iter().copied()).collect();
        for g in &self.groups {
            out.extend(g.nsw_cells.iter().copied());
        }
        out
    }

    /// Human-readable plan: strategy, main cell, one line per key.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subquery {}", self.subquery);
        let _ = writeln!(out, "strategy {}", self.strategy);
        if let Some(m) = self.main_cell {
            let role = if self.strategy == Strategy::WithStop { "anchor" } else { "main" };
            let _ = writeln!(out, "{role}={} (cell {m})", self.subquery.cells[m].label());
        }
        for k in &self.keys {
            let dir = k.direction.map(Direction::as_str).unwrap_or("-");
            let _ = writeln!(out, "key {} {} {}", k.kind.as_str(), k.display_key(), dir);
        }
        for g in &self.groups {
            for &c in &g.nsw_cells {
                let _ = writeln!(out, "nsw {} via anchor {}", self.subquery.cells[c].label(), g.lemma);
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

struct KeyTable {
    keys: Vec<PlanKey>,
}

impl KeyTable {
    /// Adds or reuses a key. An ordinary key and an ordinary-with-NSW key
    /// for the same lemma are merged into the latter.
    fn add(&mut self, kind: KeyKind, lemmas: Vec<String>, direction: Option<Direction>, cell: usize) -> usize {
        let same_stream = |k: &PlanKey| {
            k.lemmas == lemmas
                && (k.kind == kind
                    || matches!(
                        (k.kind, kind),
                        (KeyKind::Ordinary, KeyKind::OrdinaryWithNsw) | (KeyKind::OrdinaryWithNsw, KeyKind::Ordinary)
                    ))
        };
        if let Some(i) = self.keys.iter().position(same_stream) {
            let k = &mut self.keys[i];
            if kind == KeyKind::OrdinaryWithNsw {
                k.kind = kind;
            }
            if !k.cells.contains(&cell) {
                k.cells.push(cell);
            }
            return i;
        }
        self.keys.push(PlanKey {
            kind,
            lemmas,
            direction,
            cells: vec![cell],
        });
        self.keys.len() - 1
    }

    /// Pair key linking `anchor` (frequently used or ordinary) with a
    /// frequently used `other`, in the direction the index stores it.
    fn pair(&mut self, anchor: &LemmaInfo, other: &LemmaInfo, cell: usize) -> usize {
        let (lemmas, dir) = match pair_orientation(anchor, other) {
            Direction::Forward => (vec![anchor.lemma.clone(), other.lemma.clone()], Direction::Forward),
            Direction::Reverse => (vec![other.lemma.clone(), anchor.lemma.clone()], Direction::Reverse),
            Direction::Both => (vec![anchor.lemma.clone(), anchor.lemma.clone()], Direction::Both),
        };
        self.add(KeyKind::Pair, lemmas, Some(dir), cell)
    }
}

/// Where the pair index stores co-occurrences of `anchor` and `other`.
/// At least one of them is frequently used.
pub fn pair_orientation(anchor: &LemmaInfo, other: &LemmaInfo) -> Direction {
    if anchor.lemma == other.lemma {
        return Direction::Both;
    }
    match (anchor.lemma_type, other.lemma_type) {
        (LemmaType::FrequentlyUsed, LemmaType::Ordinary) => Direction::Forward,
        (LemmaType::Ordinary, LemmaType::FrequentlyUsed) => Direction::Reverse,
        _ => {
            if compare_lemmas(anchor, other) == Ordering::Less {
                Direction::Forward
            } else {
                Direction::Reverse
            }
        }
    }
}

/// Cell holding the least frequent lemma among `candidates`.
fn rarest_cell(cells: &[QueryCell], candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(usize, &LemmaInfo)> = None;
    for i in candidates {
        for l in &cells[i].lemmas {
            if best.is_none_or(|(_, b)| rarity_order(l, b) == Ordering::Less) {
                best = Some((i, l));
            }
        }
    }
    best.map(|(i, _)| i)
}

fn required_files(strategy: Strategy) -> &'static [&'static str] {
    match strategy {
        Strategy::AllOrdinary => &["ord.dict", "ord.post"],
        Strategy::AllFu | Strategy::MixedNonstop => &["ord.dict", "ord.post", "pair.dict", "pair.post"],
        Strategy::WithStop => &["ord.dict", "ord.post", "ord.nsw", "pair.dict", "pair.post"],
        Strategy::AllStop => &["tri.dict", "tri.post"],
        Strategy::BaselineFallback => &["base.dict", "base.post"],
    }
}

/// Chooses a strategy and the index keys for one subquery.
pub fn plan(subquery: &Subquery, manifest: &Manifest, rank: &RankConfig) -> Result<QueryPlan> {
    let cells = &subquery.cells;
    let n = cells.len();
    let mut warnings = Vec::new();
    if n > rank.n_max as usize {
        warnings.push(format!(
            "query has {n} words, more than n_max={}; results spanning more than MaxDistance={} are not found",
            rank.n_max, manifest.max_distance
        ));
    }
    let mut t = KeyTable { keys: Vec::new() };
    let mut groups = Vec::new();
    let mut main_cell = None;

    let strategy = match subquery.composition {
        Composition::AllStop if n < 3 => {
            warnings.push(format!(
                "{n}-word stop-lemma query cannot use the triple index; BASELINE_FALLBACK to the baseline index"
            ));
            for (i, c) in cells.iter().enumerate() {
                for l in &c.lemmas {
                    t.add(KeyKind::Baseline, vec![l.lemma.clone()], None, i);
                }
            }
            Strategy::BaselineFallback
        }
        Composition::AllStop => {
            for (lemmas, slots) in select_triple_cover(cells) {
                let idx = t.add(KeyKind::Triple, lemmas, None, slots[0]);
                for &c in &slots[1..] {
                    if !t.keys[idx].cells.contains(&c) {
                        t.keys[idx].cells.push(c);
                    }
                }
            }
            Strategy::AllStop
        }
        Composition::AllOrdinary => {
            for (i, c) in cells.iter().enumerate() {
                for l in &c.lemmas {
                    t.add(KeyKind::Ordinary, vec![l.lemma.clone()], None, i);
                }
            }
            Strategy::AllOrdinary
        }
        Composition::AllFu | Composition::MixedNonstop | Composition::WithStop => {
            let with_stop = subquery.composition == Composition::WithStop;
            let m = rarest_cell(cells, (0..n).filter(|&i| cells[i].lemma_type() != LemmaType::Stop))
                .expect("non-stop cell exists");
            main_cell = Some(m);
            for anchor in &cells[m].lemmas {
                let mut g = AnchorGroup {
                    lemma: anchor.lemma.clone(),
                    anchor_key: None,
                    pair_cells: Vec::new(),
                    window_cells: Vec::new(),
                    nsw_cells: Vec::new(),
                };
                for (i, c) in cells.iter().enumerate() {
                    if i == m {
                        continue;
                    }
                    match c.lemma_type() {
                        LemmaType::Stop => g.nsw_cells.push(i),
                        LemmaType::FrequentlyUsed => {
                            let keys = c.lemmas.iter().map(|v| t.pair(anchor, v, i)).collect();
                            g.pair_cells.push(CellKeys { cell: i, keys });
                        }
                        LemmaType::Ordinary if anchor.lemma_type == LemmaType::FrequentlyUsed => {
                            // only when the anchor ties an ordinary lemma on count
                            let keys = c.lemmas.iter().map(|v| t.pair(anchor, v, i)).collect();
                            g.pair_cells.push(CellKeys { cell: i, keys });
                        }
                        LemmaType::Ordinary => {
                            let keys = c
                                .lemmas
                                .iter()
                                .map(|v| t.add(KeyKind::Ordinary, vec![v.lemma.clone()], None, i))
                                .collect();
                            g.window_cells.push(CellKeys { cell: i, keys });
                        }
                    }
                }
                if with_stop {
                    g.anchor_key = Some(t.add(KeyKind::OrdinaryWithNsw, vec![anchor.lemma.clone()], None, m));
                } else if g.pair_cells.is_empty() {
                    g.anchor_key = Some(t.add(KeyKind::Ordinary, vec![anchor.lemma.clone()], None, m));
                } else {
                    // anchor positions come from the partner side of the pair keys
                    for ck in &g.pair_cells {
                        for &k in &ck.keys {
                            if !t.keys[k].cells.contains(&m) {
                                t.keys[k].cells.push(m);
                            }
                        }
                    }
                }
                groups.push(g);
            }
            match subquery.composition {
                Composition::AllFu => Strategy::AllFu,
                Composition::MixedNonstop => Strategy::MixedNonstop,
                _ => Strategy::WithStop,
            }
        }
    };

    for f in required_files(strategy) {
        if !manifest.files.contains_key(*f) {
            return Err(Error::MissingIndex(format!("{f} (needed by {strategy})")));
        }
    }

    Ok(QueryPlan {
        strategy,
        subquery: subquery.clone(),
        main_cell,
        keys: t.keys,
        groups,
        warnings,
        max_distance: manifest.max_distance,
        sw_count: manifest.sw_count,
        fu_count: manifest.fu_count,
    })
}

/// Covers every cell of a stop-only query with canonical triples.
///
/// Lemmas repeated in several cells are grouped first, in FL order, three
/// cells at a time; a leftover pair of them is padded with one other lemma.
/// The remaining cells are taken three at a time in query order. Short groups
/// are padded with distinct other lemmas in FL order, preferring cells not
/// yet covered. Returns `(sorted lemmas, cell per slot)` for each triple.
pub fn select_triple_cover(cells: &[QueryCell]) -> Vec<(Vec<String>, Vec<usize>)> {
    let n = cells.len();
    if n < 3 {
        return Vec::new();
    }
    let info = |i: usize| &cells[i].lemmas[0];
    let mut covered = vec![false; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();

    // distinct lemmas in FL order
    let mut distinct: Vec<usize> = Vec::new();
    for i in 0..n {
        if !distinct.iter().any(|&j| info(j).lemma == info(i).lemma) {
            distinct.push(i);
        }
    }
    distinct.sort_by(|&a, &b| compare_lemmas(info(a), info(b)));

    let pad = |group: &mut Vec<usize>, covered: &mut Vec<bool>| {
        let in_group = |g: &Vec<usize>, i: usize| g.iter().any(|&j| info(j).lemma == info(i).lemma);
        for prefer_uncovered in [true, false] {
            for &rep in &distinct {
                if group.len() == 3 {
                    return;
                }
                if in_group(group, rep) {
                    continue;
                }
                let pick = (0..n).find(|&i| info(i).lemma == info(rep).lemma && (!prefer_uncovered || !covered[i]));
                if let Some(i) = pick {
                    group.push(i);
                    covered[i] = true;
                }
            }
        }
        // too few distinct lemmas: reuse any other cell
        for i in 0..n {
            if group.len() == 3 {
                return;
            }
            if !group.contains(&i) {
                group.push(i);
                covered[i] = true;
            }
        }
    };

    for &rep in &distinct {
        let mut same: Vec<usize> = (0..n)
            .filter(|&i| !covered[i] && info(i).lemma == info(rep).lemma)
            .collect();
        while same.len() >= 3 {
            let g: Vec<usize> = same.drain(..3).collect();
            for &i in &g {
                covered[i] = true;
            }
            groups.push(g);
        }
        if same.len() == 2 {
            for &i in &same {
                covered[i] = true;
            }
            let mut g = same;
            pad(&mut g, &mut covered);
            groups.push(g);
        }
    }

    let rest: Vec<usize> = (0..n).filter(|&i| !covered[i]).collect();
    for chunk in rest.chunks(3) {
        let mut g = chunk.to_vec();
        for &i in &g {
            covered[i] = true;
        }
        pad(&mut g, &mut covered);
        groups.push(g);
    }

    let mut out: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    for mut g in groups {
        g.sort_by(|&a, &b| compare_lemmas(info(a), info(b)).then(a.cmp(&b)));
        let lemmas: Vec<String> = g.iter().map(|&i| info(i).lemma.clone()).collect();
        match out.iter_mut().find(|(l, _)| *l == lemmas) {
            Some(_) => {}
            None => out.push((lemmas, g)),
        }
    }
    out
}
