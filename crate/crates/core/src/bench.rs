//! Query generation from corpus documents, the two-engine benchmark, and an
//! index-free brute-force oracle.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::exec::{execute, execute_baseline, union_results, ReadStats, SearchResult};
use crate::index::files::IndexSet;
use crate::lexicon::{lemmatize, LemmaDictionary, Lexicon};
use crate::query::{plan, preprocess, Composition, Subquery};
use crate::rank::RankConfig;
use crate::{DocId, Position};

/// Documents shorter than this are not used as query sources.
pub const MIN_SOURCE_WORDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Seq,
    SkipAlternate,
    OmitSecond,
    OmitSecondThird,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::Seq,
        Pattern::SkipAlternate,
        Pattern::OmitSecond,
        Pattern::OmitSecondThird,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Seq => "SEQ",
            Pattern::SkipAlternate => "SKIP_ALTERNATE",
            Pattern::OmitSecond => "OMIT_SECOND",
            Pattern::OmitSecondThird => "OMIT_SECOND_THIRD",
        }
    }

    /// Token offsets from the start position, or `None` for a length the
    /// pattern does not produce.
    pub fn offsets(self, len: usize) -> Option<&'static [usize]> {
        match (self, len) {
            (Pattern::Seq, 3) => Some(&[0, 1, 2]),
            (Pattern::Seq, 4) => Some(&[0, 1, 2, 3]),
            (Pattern::Seq, 5) => Some(&[0, 1, 2, 3, 4]),
            (Pattern::SkipAlternate, 3) => Some(&[0, 2, 4]),
            (Pattern::OmitSecond, 3) => Some(&[0, 2, 3]),
            (Pattern::OmitSecond, 4) => Some(&[0, 2, 3, 4]),
            (Pattern::OmitSecondThird, 3) => Some(&[0, 3, 4]),
            _ => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every (pattern, length) combination, cycled through in this order.
pub const VARIANTS: [(Pattern, usize); 7] = [
    (Pattern::Seq, 3),
    (Pattern::Seq, 4),
    (Pattern::Seq, 5),
    (Pattern::SkipAlternate, 3),
    (Pattern::OmitSecond, 3),
    (Pattern::OmitSecond, 4),
    (Pattern::OmitSecondThird, 3),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedQuery {
    pub source_doc: DocId,
    pub start_position: Position,
    pub pattern: Pattern,
    pub words: Vec<String>,
}

impl GeneratedQuery {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

/// Words of `tokens` picked by `pattern` from `start`.
pub fn apply_pattern(tokens: &[String], start: usize, pattern: Pattern, len: usize) -> Option<Vec<String>> {
    let offs = pattern.offsets(len)?;
    offs.iter().map(|&o| tokens.get(start + o).cloned()).collect()
}

/// Picks `count` queries from random documents and start positions,
/// cycling through [`VARIANTS`].
pub fn generate_queries(store: &DocumentStore, count: usize, seed: u64) -> Result<Vec<GeneratedQuery>> {
    let eligible: Vec<DocId> = store
        .documents()
        .iter()
        .filter(|d| d.word_count as usize >= MIN_SOURCE_WORDS)
        .map(|d| d.id)
        .collect();
    if count == 0 {
        return Ok(Vec::new());
    }
    if eligible.is_empty() {
        return Err(Error::Bench(format!(
            "no document has at least {MIN_SOURCE_WORDS} words"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (pattern, len) = VARIANTS[i % VARIANTS.len()];
        let doc = eligible[rng.gen_range(0..eligible.len())];
        let tokens: Vec<String> = store.tokens(doc)?.into_iter().map(|t| t.surface).collect();
        // every pattern reaches at most 5 tokens
        let start = rng.gen_range(0..=tokens.len() - 5);
        let words = apply_pattern(&tokens, start, pattern, len).expect("window fits");
        out.push(GeneratedQuery {
            source_doc: doc,
            start_position: start as Position,
            pattern,
            words,
        });
    }
    Ok(out)
}

/// Measurements for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRun {
    pub query: GeneratedQuery,
    pub additional: ReadStats,
    pub baseline: ReadStats,
    pub results: usize,
    pub found_source: bool,
    /// Both engines returned the same `(doc, positions)` set.
    pub engines_agree: bool,
    pub stop_only: bool,
    /// Query words having at least one stop lemma.
    pub stop_words: usize,
    pub strategies: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternRow {
    pub queries: usize,
    pub additional_bytes: f64,
    pub baseline_bytes: f64,
    pub additional_time: Duration,
    pub baseline_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: Option<u64>,
    pub max_distance: u32,
    pub runs: Vec<QueryRun>,
}

fn mean_bytes<'a>(runs: impl Iterator<Item = &'a ReadStats>) -> f64 {
    let (mut sum, mut n) = (0u64, 0u64);
    for s in runs {
        sum += s.posting_bytes_read;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

fn mean_time<'a>(runs: impl Iterator<Item = &'a ReadStats>) -> Duration {
    let (mut sum, mut n) = (Duration::ZERO, 0u32);
    for s in runs {
        sum += s.wall_time;
        n += 1;
    }
    if n == 0 {
        Duration::ZERO
    } else {
        sum / n
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl BenchReport {
    pub fn query_count(&self) -> usize {
        self.runs.len()
    }

    pub fn misses(&self) -> usize {
        self.runs.iter().filter(|r| !r.found_source).count()
    }

    pub fn disagreements(&self) -> usize {
        self.runs.iter().filter(|r| !r.engines_agree).count()
    }

    pub fn is_correct(&self) -> bool {
        self.misses() == 0 && self.disagreements() == 0
    }

    pub fn stop_only_count(&self) -> usize {
        self.runs.iter().filter(|r| r.stop_only).count()
    }

    pub fn mean_bytes(&self, additional: bool) -> f64 {
        self.mean_bytes_where(additional, |_| true)
    }

    pub fn mean_bytes_where(&self, additional: bool, pred: impl Fn(&QueryRun) -> bool) -> f64 {
        mean_bytes(
            self.runs
                .iter()
                .filter(|r| pred(r))
                .map(|r| if additional { &r.additional } else { &r.baseline }),
        )
    }

    pub fn mean_time(&self, additional: bool) -> Duration {
        mean_time(self.runs.iter().map(|r| if additional { &r.additional } else { &r.baseline }))
    }

    /// baseline / additional mean bytes.
    pub fn bytes_ratio(&self) -> f64 {
        ratio(self.mean_bytes(false), self.mean_bytes(true))
    }

    pub fn time_ratio(&self) -> f64 {
        ratio(self.mean_time(false).as_secs_f64(), self.mean_time(true).as_secs_f64())
    }

    pub fn pattern_rows(&self) -> Vec<(Pattern, PatternRow)> {
        Pattern::ALL
            .iter()
            .map(|&p| {
                let runs: Vec<&QueryRun> = self.runs.iter().filter(|r| r.query.pattern == p).collect();
                let row = PatternRow {
                    queries: runs.len(),
                    additional_bytes: mean_bytes(runs.iter().map(|r| &r.additional)),
                    baseline_bytes: mean_bytes(runs.iter().map(|r| &r.baseline)),
                    additional_time: mean_time(runs.iter().map(|r| &r.additional)),
                    baseline_time: mean_time(runs.iter().map(|r| &r.baseline)),
                };
                (p, row)
            })
            .collect()
    }

    /// Per-query bytes read, `additional\tbaseline` per line. Exactly
    /// reproducible for a fixed corpus and seed.
    pub fn byte_columns(&self) -> String {
        let mut out = String::new();
        for r in &self.runs {
            let _ = writeln!(out, "{}\t{}", r.additional.posting_bytes_read, r.baseline.posting_bytes_read);
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>8} {:>14} {:>14} {:>8} {:>12} {:>12}",
            "pattern", "queries", "add_bytes", "base_bytes", "ratio", "add_ms", "base_ms"
        );
        let mut line = |name: &str, q: usize, ab: f64, bb: f64, at: Duration, bt: Duration| {
            let _ = writeln!(
                out,
                "{:<18} {:>8} {:>14.1} {:>14.1} {:>8.2} {:>12.3} {:>12.3}",
                name,
                q,
                ab,
                bb,
                ratio(bb, ab),
                at.as_secs_f64() * 1e3,
                bt.as_secs_f64() * 1e3
            );
        };
        for (p, row) in self.pattern_rows() {
            line(
                p.as_str(),
                row.queries,
                row.additional_bytes,
                row.baseline_bytes,
                row.additional_time,
                row.baseline_time,
            );
        }
        line(
            "all",
            self.query_count(),
            self.mean_bytes(true),
            self.mean_bytes(false),
            self.mean_time(true),
            self.mean_time(false),
        );
        out
    }

    pub fn metrics(&self) -> String {
        let multi = |r: &QueryRun| r.stop_words >= 2;
        let mut out = String::new();
        let mut m = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        m("seed", self.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into()));
        m("max_distance", self.max_distance.to_string());
        m("queries", self.query_count().to_string());
        m("stop_only_queries", self.stop_only_count().to_string());
        m(
            "multi_stop_queries",
            self.runs.iter().filter(|r| multi(r)).count().to_string(),
        );
        m("misses", self.misses().to_string());
        m("disagreements", self.disagreements().to_string());
        m("additional_mean_bytes", format!("{:.1}", self.mean_bytes(true)));
        m("baseline_mean_bytes", format!("{:.1}", self.mean_bytes(false)));
        m("bytes_ratio", format!("{:.3}", self.bytes_ratio()));
        m(
            "multi_stop_additional_mean_bytes",
            format!("{:.1}", self.mean_bytes_where(true, multi)),
        );
        m(
            "multi_stop_baseline_mean_bytes",
            format!("{:.1}", self.mean_bytes_where(false, multi)),
        );
        m(
            "multi_stop_bytes_ratio",
            format!(
                "{:.3}",
                ratio(self.mean_bytes_where(false, multi), self.mean_bytes_where(true, multi))
            ),
        );
        m("additional_mean_ms", format!("{:.3}", self.mean_time(true).as_secs_f64() * 1e3));
        m("baseline_mean_ms", format!("{:.3}", self.mean_time(false).as_secs_f64() * 1e3));
        m("time_ratio", format!("{:.3}", self.time_ratio()));
        out
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())?;
        f.write_str(&self.metrics())
    }
}

fn result_keys(results: &[SearchResult]) -> BTreeSet<(DocId, Vec<Position>)> {
    results.iter().map(|r| (r.doc_id, r.positions.clone())).collect()
}

/// Runs every query on both engines, one after the other. Only execution
/// is timed; preprocessing and planning are not.
pub fn run_benchmark(
    queries: &[GeneratedQuery],
    ix: &IndexSet,
    lexicon: &Lexicon,
    cfg: &RankConfig,
    seed: Option<u64>,
) -> Result<BenchReport> {
    let mut runs = Vec::with_capacity(queries.len());
    for q in queries {
        let subs = preprocess(&q.text(), lexicon)?;
        let plans = subs
            .iter()
            .map(|s| plan(s, ix.manifest(), cfg))
            .collect::<Result<Vec<_>>>()?;

        let mut add_stats = ReadStats::default();
        let mut add_lists = Vec::new();
        for p in &plans {
            let (r, s) = execute(p, ix, cfg)?;
            add_stats.merge(&s);
            add_lists.push(r);
        }
        let mut base_stats = ReadStats::default();
        let mut base_lists = Vec::new();
        for s in &subs {
            let (r, st) = execute_baseline(s, ix, cfg)?;
            base_stats.merge(&st);
            base_lists.push(r);
        }
        let add = union_results(add_lists);
        let base = union_results(base_lists);

        let stop_words = q
            .words
            .iter()
            .filter(|w| lexicon.lemmatize(w).iter().any(|l| lexicon.info(l).is_stop()))
            .count();
        runs.push(QueryRun {
            found_source: add.iter().any(|r| r.doc_id == q.source_doc),
            engines_agree: result_keys(&add) == result_keys(&base),
            results: add.len(),
            stop_only: subs.iter().all(|s| s.composition == Composition::AllStop),
            stop_words,
            strategies: plans.iter().map(|p| p.strategy.as_str().to_owned()).collect(),
            query: q.clone(),
            additional: add_stats,
            baseline: base_stats,
        });
    }
    Ok(BenchReport {
        seed,
        max_distance: ix.max_distance(),
        runs,
    })
}

/// Brute-force search: scans each document's tokens for every assignment of
/// cells to distinct positions with `max − min ≤ max_distance`.
pub fn oracle_search(
    sub: &Subquery,
    store: &DocumentStore,
    dict: &LemmaDictionary,
    max_distance: u32,
) -> Result<BTreeSet<(DocId, Vec<Position>)>> {
    let mut found = BTreeSet::new();
    store.for_each_text(|doc, text| {
        let tokens = crate::corpus::tokenize(text);
        // positions where each cell can match, ascending
        let lists: Vec<Vec<Position>> = sub
            .cells
            .iter()
            .map(|c| {
                tokens
                    .iter()
                    .filter(|t| lemmatize(&t.surface, dict).iter().any(|l| c.has_lemma(l)))
                    .map(|t| t.position)
                    .collect()
            })
            .collect();
        if lists.iter().any(Vec::is_empty) {
            return Ok(());
        }
        let mut chosen = Vec::with_capacity(lists.len());
        assign(&lists, 0, max_distance, &mut chosen, &mut |set| {
            let mut s = set.to_vec();
            s.sort_unstable();
            found.insert((doc, s));
        });
        Ok(())
    })?;
    Ok(found)
}

fn assign(lists: &[Vec<Position>], cell: usize, md: u32, chosen: &mut Vec<Position>, emit: &mut dyn FnMut(&[Position])) {
    if cell == lists.len() {
        emit(chosen);
        return;
    }
    let (lo, hi) = match (chosen.iter().min(), chosen.iter().max()) {
        (Some(&a), Some(&b)) => (b.saturating_sub(md), a.saturating_add(md)),
        _ => (0, Position::MAX),
    };
    let list = &lists[cell];
    let start = list.partition_point(|&p| p < lo);
    for &p in &list[start..] {
        if p > hi {
            break;
        }
        if chosen.contains(&p) {
            continue;
        }
        chosen.push(p);
        assign(lists, cell + 1, md, chosen, emit);
        chosen.pop();
    }
}
