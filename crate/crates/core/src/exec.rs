//! Plan execution over an [`IndexSet`] and the baseline engine.
//!
//! Every strategy only produces candidate positions per cell. The same
//! verifier then turns candidates into results, so all engines agree on what
//! a result is: a set of distinct positions, one per cell, with
//! `span = B − A ≤ MaxDistance`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::index::codec::{NswEntry, PairPosting};
use crate::index::files::IndexSet;
use crate::query::{Direction, KeyKind, PlanKey, QueryPlan, Strategy, Subquery, MAX_CELLS};
use crate::rank::{self, NoSignals, RankConfig, RelevanceSignals};
use crate::{DocId, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Additional,
    Baseline,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Additional => "ADDITIONAL",
            Engine::Baseline => "BASELINE",
        }
    }
}

/// A pair posting seen from one of its two lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalPosting {
    pub doc_id: DocId,
    pub anchor_position: Position,
    pub partner_position: Position,
    /// True when the anchor is the stored `v` side.
    pub reversed: bool,
}

impl LogicalPosting {
    pub fn distance(&self) -> i64 {
        self.partner_position as i64 - self.anchor_position as i64
    }
}

/// The stored view of a pair posting: anchored at `w`.
pub fn identity_pair(p: &PairPosting) -> LogicalPosting {
    LogicalPosting {
        doc_id: p.doc_id,
        anchor_position: p.position,
        partner_position: (p.position as i64 + p.distance as i64) as Position,
        reversed: false,
    }
}

/// `(ID, P, d)` under `(w, v)` seen from `v`: `(ID, P + d, −d)`.
pub fn reverse_pair(p: &PairPosting) -> LogicalPosting {
    LogicalPosting {
        doc_id: p.doc_id,
        anchor_position: (p.position as i64 + p.distance as i64) as Position,
        partner_position: p.position,
        reversed: true,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub doc_id: DocId,
    /// Matched positions in ascending order, one per cell.
    pub positions: Vec<Position>,
    pub span: u32,
    pub tp: f64,
    pub score: f64,
    pub engine: Engine,
}

impl SearchResult {
    /// `<doc_id>\t<score>\t<tp>\t<positions>`.
    pub fn line(&self) -> String {
        let pos: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        format!("{}\t{:.6}\t{:.6}\t{}", self.doc_id, self.score, self.tp, pos.join(","))
    }
}

/// One key read during execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyRead {
    pub kind: KeyKind,
    pub key: String,
    pub postings: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadStats {
    /// Posting and NSW bytes actually read.
    pub posting_bytes_read: u64,
    pub postings_decoded: u64,
    /// NSW bytes of read keys that were skipped.
    pub nsw_bytes_skipped: u64,
    pub wall_time: Duration,
    pub keys: Vec<KeyRead>,
    /// Anchors (or documents) handed to verification.
    pub candidates: u64,
    /// Candidates that yielded at least one result.
    pub survivors: u64,
}

impl ReadStats {
    pub fn merge(&mut self, other: &ReadStats) {
        self.posting_bytes_read += other.posting_bytes_read;
        self.postings_decoded += other.postings_decoded;
        self.nsw_bytes_skipped += other.nsw_bytes_skipped;
        self.wall_time += other.wall_time;
        self.keys.extend(other.keys.iter().cloned());
        self.candidates += other.candidates;
        self.survivors += other.survivors;
    }

    fn record(&mut self, kind: KeyKind, key: String, postings: u64, bytes: u64, skipped: u64) {
        self.posting_bytes_read += bytes;
        self.postings_decoded += postings;
        self.nsw_bytes_skipped += skipped;
        self.keys.push(KeyRead {
            kind,
            key,
            postings,
            bytes,
        });
    }

    /// Keys read with their postings and bytes, then totals.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for k in &self.keys {
            let _ = writeln!(
                out,
                "read {} {} postings={} bytes={}",
                k.kind.as_str(),
                k.key.replace('\u{1}', ","),
                k.postings,
                k.bytes
            );
        }
        let _ = writeln!(
            out,
            "candidates={} survivors={} postings_decoded={} bytes_read={} nsw_bytes_skipped={}",
            self.candidates, self.survivors, self.postings_decoded, self.posting_bytes_read, self.nsw_bytes_skipped
        );
        out
    }
}

fn docpos(doc: DocId, pos: Position) -> u64 {
    (doc as u64) << 32 | pos as u64
}

fn split(dp: u64) -> (DocId, Position) {
    ((dp >> 32) as DocId, dp as Position)
}

/// Every set of distinct positions, one per cell, with `B − A ≤ md`.
/// `cands[c]` lists the positions cell `c` may take. Output sets are sorted.
pub fn match_windows(cands: &[Vec<Position>], md: u32, out: &mut Vec<Vec<Position>>) {
    let n = cands.len();
    if n == 0 || n > MAX_CELLS || cands.iter().any(Vec::is_empty) {
        return;
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut u: Vec<(Position, u64)> = Vec::with_capacity(cands.iter().map(Vec::len).sum());
    for (c, list) in cands.iter().enumerate() {
        u.extend(list.iter().map(|&p| (p, 1u64 << c)));
    }
    u.sort_unstable_by_key(|e| e.0);
    let mut merged: Vec<(Position, u64)> = Vec::with_capacity(u.len());
    for (p, m) in u {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 |= m,
            _ => merged.push((p, m)),
        }
    }
    let mut chosen = Vec::with_capacity(n);
    for i in 0..merged.len() {
        let a = merged[i].0;
        let limit = a as u64 + md as u64;
        let end = i + merged[i..].partition_point(|e| e.0 as u64 <= limit);
        let window = &merged[i..end];
        if window.len() < n || window.iter().fold(0, |m, e| m | e.1) != full {
            continue;
        }
        chosen.clear();
        chosen.push(0usize);
        choose(window, 1, n, full, &mut chosen, out);
    }
}

fn choose(w: &[(Position, u64)], next: usize, n: usize, full: u64, chosen: &mut Vec<usize>, out: &mut Vec<Vec<Position>>) {
    if chosen.len() == n {
        let masks: Vec<u64> = chosen.iter().map(|&i| w[i].1).collect();
        if masks.iter().fold(0, |m, x| m | x) == full && perfect_matching(&masks) {
            out.push(chosen.iter().map(|&i| w[i].0).collect());
        }
        return;
    }
    let need = n - chosen.len();
    for i in next..w.len() {
        if w.len() - i < need {
            break;
        }
        chosen.push(i);
        choose(w, i + 1, n, full, chosen, out);
        chosen.pop();
    }
}

/// Kuhn's augmenting paths: can each position take a distinct cell?
fn perfect_matching(masks: &[u64]) -> bool {
    let n = masks.len();
    let mut owner = [usize::MAX; MAX_CELLS];
    fn augment(k: usize, masks: &[u64], seen: &mut u64, owner: &mut [usize; MAX_CELLS]) -> bool {
        let mut m = masks[k] & !*seen;
        while m != 0 {
            let c = m.trailing_zeros() as usize;
            m &= m - 1;
            *seen |= 1 << c;
            if owner[c] == usize::MAX || augment(owner[c], masks, seen, owner) {
                owner[c] = k;
                return true;
            }
        }
        false
    }
    (0..n).all(|k| {
        let mut seen = 0u64;
        augment(k, masks, &mut seen, &mut owner)
    })
}

/// Verifies every document present in all per-cell `(doc, pos)` lists.
fn verify_docs(per_cell: &[Vec<u64>], md: u32, stats: &mut ReadStats, out: &mut Vec<(DocId, Vec<Position>)>) {
    if per_cell.is_empty() || per_cell.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; per_cell.len()];
    let mut cands: Vec<Vec<Position>> = vec![Vec::new(); per_cell.len()];
    let mut found = Vec::new();
    'docs: loop {
        // leapfrog to the next document present in every list
        let mut doc = 0;
        for (c, list) in per_cell.iter().enumerate() {
            match list.get(idx[c]) {
                Some(&dp) => doc = doc.max(split(dp).0),
                None => break 'docs,
            }
        }
        let mut aligned = true;
        for (c, list) in per_cell.iter().enumerate() {
            let lo = docpos(doc, 0);
            idx[c] += list[idx[c]..].partition_point(|&dp| dp < lo);
            match list.get(idx[c]) {
                Some(&dp) if split(dp).0 == doc => {}
                Some(_) => aligned = false,
                None => break 'docs,
            }
        }
        if !aligned {
            continue;
        }
        let hi = docpos(doc, 0) + (1u64 << 32);
        for (c, list) in per_cell.iter().enumerate() {
            let end = idx[c] + list[idx[c]..].partition_point(|&dp| dp < hi);
            cands[c].clear();
            cands[c].extend(list[idx[c]..end].iter().map(|&dp| dp as Position));
            idx[c] = end;
        }
        stats.candidates += 1;
        found.clear();
        match_windows(&cands, md, &mut found);
        if !found.is_empty() {
            stats.survivors += 1;
        }
        out.extend(found.drain(..).map(|p| (doc, p)));
    }
}

enum Data {
    Positions(Vec<u64>),
    WithNsw(Vec<u64>, Vec<Vec<NswEntry>>),
    Pair(Vec<PairPosting>),
    Triple(Vec<crate::index::codec::TriplePosting>),
}

fn fetch(key: &PlanKey, ix: &IndexSet, stats: &mut ReadStats) -> Result<Data> {
    let l = &key.lemmas;
    Ok(match key.kind {
        KeyKind::Baseline => {
            let f = ix.baseline(&l[0])?;
            stats.record(key.kind, key.dict_key(), f.postings.len() as u64, f.bytes_read, 0);
            Data::Positions(f.postings.iter().map(|p| docpos(p.doc_id, p.position)).collect())
        }
        KeyKind::Ordinary | KeyKind::OrdinaryWithNsw => {
            let with_nsw = key.kind == KeyKind::OrdinaryWithNsw;
            let f = ix.ordinary(&l[0], with_nsw)?;
            stats.record(key.kind, key.dict_key(), f.postings.len() as u64, f.bytes_read, f.nsw_skipped);
            let pos = f.postings.iter().map(|p| docpos(p.doc_id, p.position)).collect();
            match f.nsw {
                Some(nsw) => Data::WithNsw(pos, nsw),
                None if with_nsw => {
                    let empty = vec![Vec::new(); f.postings.len()];
                    Data::WithNsw(pos, empty)
                }
                None => Data::Positions(pos),
            }
        }
        KeyKind::Pair => {
            let f = ix.pair(&l[0], &l[1])?;
            stats.record(key.kind, key.dict_key(), f.postings.len() as u64, f.bytes_read, 0);
            Data::Pair(f.postings)
        }
        KeyKind::Triple => {
            let f = ix.triple(&l[0], &l[1], &l[2])?;
            stats.record(key.kind, key.dict_key(), f.postings.len() as u64, f.bytes_read, 0);
            Data::Triple(f.postings)
        }
    })
}

fn positions_of(d: &Data) -> &[u64] {
    match d {
        Data::Positions(p) | Data::WithNsw(p, _) => p,
        _ => &[],
    }
}

fn union_sorted(lists: impl Iterator<Item = Vec<u64>>) -> Vec<u64> {
    let mut all: Vec<u64> = Vec::new();
    let mut parts = 0;
    for l in lists {
        if all.is_empty() {
            all = l;
        } else {
            all.extend(l);
        }
        parts += 1;
    }
    if parts > 1 {
        all.sort_unstable();
        all.dedup();
    }
    all
}

/// Anchored view of a pair key: `(anchor docpos, partner position)`.
fn anchored(postings: &[PairPosting], dir: Direction, out: &mut Vec<(u64, Position)>) {
    for p in postings {
        if matches!(dir, Direction::Forward | Direction::Both) {
            let l = identity_pair(p);
            out.push((docpos(l.doc_id, l.anchor_position), l.partner_position));
        }
        if matches!(dir, Direction::Reverse | Direction::Both) {
            let l = reverse_pair(p);
            out.push((docpos(l.doc_id, l.anchor_position), l.partner_position));
        }
    }
}

fn check_manifest(plan: &QueryPlan, ix: &IndexSet) -> Result<()> {
    let m = ix.manifest();
    if plan.max_distance != m.max_distance || plan.sw_count != m.sw_count || plan.fu_count != m.fu_count {
        return Err(Error::ManifestMismatch(format!(
            "plan built for max_distance={} sw_count={} fu_count={}, index has {} {} {}",
            plan.max_distance, plan.sw_count, plan.fu_count, m.max_distance, m.sw_count, m.fu_count
        )));
    }
    Ok(())
}

pub fn execute(plan: &QueryPlan, ix: &IndexSet, cfg: &RankConfig) -> Result<(Vec<SearchResult>, ReadStats)> {
    execute_with(plan, ix, cfg, &NoSignals)
}

/// Runs `plan` and ranks the verified results.
pub fn execute_with(
    plan: &QueryPlan,
    ix: &IndexSet,
    cfg: &RankConfig,
    signals: &dyn RelevanceSignals,
) -> Result<(Vec<SearchResult>, ReadStats)> {
    let start = Instant::now();
    check_manifest(plan, ix)?;
    let mut stats = ReadStats::default();
    let data: Vec<Data> = plan
        .keys
        .iter()
        .map(|k| fetch(k, ix, &mut stats))
        .collect::<Result<_>>()?;
    let md = plan.max_distance;
    let n = plan.subquery.len();
    let mut found: Vec<(DocId, Vec<Position>)> = Vec::new();

    match plan.strategy {
        Strategy::AllOrdinary | Strategy::BaselineFallback => {
            let per_cell = cell_lists(plan, |k| positions_of(&data[k]).to_vec());
            verify_docs(&per_cell, md, &mut stats, &mut found);
        }
        Strategy::AllStop => {
            let mut per_cell: Vec<Vec<u64>> = vec![Vec::new(); n];
            for (k, key) in plan.keys.iter().enumerate() {
                let Data::Triple(postings) = &data[k] else { continue };
                for (slot, lemma) in key.lemmas.iter().enumerate() {
                    let cells: Vec<usize> = key
                        .cells
                        .iter()
                        .copied()
                        .filter(|&c| plan.subquery.cells[c].has_lemma(lemma))
                        .collect();
                    for p in postings {
                        let d = [0, p.d1, p.d2][slot];
                        let pos = (p.position as i64 + d as i64) as Position;
                        for &c in &cells {
                            per_cell[c].push(docpos(p.doc_id, pos));
                        }
                    }
                }
            }
            for l in &mut per_cell {
                l.sort_unstable();
                l.dedup();
            }
            verify_docs(&per_cell, md, &mut stats, &mut found);
        }
        Strategy::AllFu | Strategy::MixedNonstop | Strategy::WithStop => {
            run_groups(plan, &data, &mut stats, &mut found);
        }
    }

    let engine = if plan.strategy == Strategy::BaselineFallback {
        Engine::Baseline
    } else {
        Engine::Additional
    };
    let results = finish(found, n, cfg, signals, engine)?;
    stats.wall_time = start.elapsed();
    Ok((results, stats))
}

/// Per-cell union of the positions of every key serving that cell.
fn cell_lists(plan: &QueryPlan, get: impl Fn(usize) -> Vec<u64>) -> Vec<Vec<u64>> {
    (0..plan.subquery.len())
        .map(|c| {
            union_sorted(
                plan.keys
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| k.cells.contains(&c))
                    .map(|(i, _)| get(i)),
            )
        })
        .collect()
}

fn run_groups(plan: &QueryPlan, data: &[Data], stats: &mut ReadStats, found: &mut Vec<(DocId, Vec<Position>)>) {
    let md = plan.max_distance;
    let n = plan.subquery.len();
    let main = plan.main_cell.expect("anchored strategy has a main cell");
    let mut cands: Vec<Vec<Position>> = vec![Vec::new(); n];
    let mut out = Vec::new();

    for g in &plan.groups {
        let pair_lists: Vec<(usize, Vec<(u64, Position)>)> = g
            .pair_cells
            .iter()
            .map(|ck| {
                let mut v = Vec::new();
                for &k in &ck.keys {
                    if let Data::Pair(p) = &data[k] {
                        anchored(p, plan.keys[k].direction.unwrap_or(Direction::Forward), &mut v);
                    }
                }
                v.sort_unstable();
                v.dedup();
                (ck.cell, v)
            })
            .collect();
        let window_lists: Vec<(usize, Vec<u64>)> = g
            .window_cells
            .iter()
            .map(|ck| (ck.cell, union_sorted(ck.keys.iter().map(|&k| positions_of(&data[k]).to_vec()))))
            .collect();
        let nsw_fls: Vec<(usize, Vec<u32>)> = g
            .nsw_cells
            .iter()
            .map(|&c| {
                let fls = plan.subquery.cells[c]
                    .lemmas
                    .iter()
                    .filter_map(|l| l.fl_number.rank())
                    .collect();
                (c, fls)
            })
            .collect();

        // anchor occurrences, with their NSW records when read
        let (anchors, nsw): (Vec<u64>, Option<&Vec<Vec<NswEntry>>>) = match g.anchor_key.map(|k| &data[k]) {
            Some(Data::WithNsw(p, r)) => (p.clone(), Some(r)),
            Some(Data::Positions(p)) => (p.clone(), None),
            _ => {
                let shortest = pair_lists.iter().min_by_key(|(_, v)| v.len()).map(|(_, v)| v);
                let mut a: Vec<u64> = shortest.map(|v| v.iter().map(|e| e.0).collect()).unwrap_or_default();
                a.dedup();
                (a, None)
            }
        };

        'anchor: for (i, &a) in anchors.iter().enumerate() {
            let (doc, pos) = split(a);
            for c in cands.iter_mut() {
                c.clear();
            }
            cands[main].push(pos);
            for (cell, list) in &pair_lists {
                let lo = list.partition_point(|e| e.0 < a);
                let hi = lo + list[lo..].partition_point(|e| e.0 == a);
                if lo == hi {
                    continue 'anchor;
                }
                cands[*cell].extend(list[lo..hi].iter().map(|e| e.1));
            }
            for (cell, list) in &window_lists {
                let lo = docpos(doc, pos.saturating_sub(md));
                let hi = docpos(doc, pos.saturating_add(md));
                let s = list.partition_point(|&dp| dp < lo);
                let e = s + list[s..].partition_point(|&dp| dp <= hi);
                if s == e {
                    continue 'anchor;
                }
                cands[*cell].extend(list[s..e].iter().map(|&dp| dp as Position));
            }
            if !nsw_fls.is_empty() {
                let Some(records) = nsw else { continue 'anchor };
                let record = &records[i];
                for (cell, fls) in &nsw_fls {
                    for e in record {
                        if fls.contains(&e.stop_fl) {
                            cands[*cell].push((pos as i64 + e.offset as i64) as Position);
                        }
                    }
                    if cands[*cell].is_empty() {
                        continue 'anchor;
                    }
                }
            }
            stats.candidates += 1;
            out.clear();
            match_windows(&cands, md, &mut out);
            if !out.is_empty() {
                stats.survivors += 1;
            }
            found.extend(out.drain(..).map(|p| (doc, p)));
        }
    }
}

fn finish(
    mut found: Vec<(DocId, Vec<Position>)>,
    n: usize,
    cfg: &RankConfig,
    signals: &dyn RelevanceSignals,
    engine: Engine,
) -> Result<Vec<SearchResult>> {
    found.sort_unstable();
    found.dedup();
    let mut results = Vec::with_capacity(found.len());
    for (doc, positions) in found {
        let span = positions[positions.len() - 1] - positions[0];
        let tp = if n == 1 { 1.0 } else { rank::tp_for(n, span as u64, cfg)? };
        let score = rank::score(signals.static_rank(doc), signals.ir_rank(doc), tp, cfg);
        results.push(SearchResult {
            doc_id: doc,
            positions,
            span,
            tp,
            score,
            engine,
        });
    }
    sort_results(&mut results);
    Ok(results)
}

/// Score descending, then document, then positions ascending.
pub fn sort_results(results: &mut [SearchResult]) {
    results.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.doc_id.cmp(&b.doc_id))
            .then_with(|| a.positions.cmp(&b.positions))
    });
}

pub fn execute_baseline(sub: &Subquery, ix: &IndexSet, cfg: &RankConfig) -> Result<(Vec<SearchResult>, ReadStats)> {
    execute_baseline_with(sub, ix, cfg, &NoSignals)
}

/// Reads the full baseline list of every lemma of every cell and verifies
/// each document that contains all cells.
pub fn execute_baseline_with(
    sub: &Subquery,
    ix: &IndexSet,
    cfg: &RankConfig,
    signals: &dyn RelevanceSignals,
) -> Result<(Vec<SearchResult>, ReadStats)> {
    let start = Instant::now();
    let mut stats = ReadStats::default();
    let mut lists: HashMap<&str, Vec<u64>> = HashMap::new();
    for cell in &sub.cells {
        for l in &cell.lemmas {
            if !lists.contains_key(l.lemma.as_str()) {
                let key = PlanKey {
                    kind: KeyKind::Baseline,
                    lemmas: vec![l.lemma.clone()],
                    direction: None,
                    cells: Vec::new(),
                };
                let Data::Positions(p) = fetch(&key, ix, &mut stats)? else { unreachable!() };
                lists.insert(&l.lemma, p);
            }
        }
    }
    let per_cell: Vec<Vec<u64>> = sub
        .cells
        .iter()
        .map(|c| union_sorted(c.lemmas.iter().map(|l| lists[l.lemma.as_str()].clone())))
        .collect();
    let mut found = Vec::new();
    verify_docs(&per_cell, ix.max_distance(), &mut stats, &mut found);
    let results = finish(found, sub.len(), cfg, signals, Engine::Baseline)?;
    stats.wall_time = start.elapsed();
    Ok((results, stats))
}

/// Merges the results of the subqueries of one query, keeping one result
/// per `(doc, positions)`.
pub fn union_results(lists: Vec<Vec<SearchResult>>) -> Vec<SearchResult> {
    let mut all: Vec<SearchResult> = lists.into_iter().flatten().collect();
    all.sort_by(|a, b| (a.doc_id, &a.positions).cmp(&(b.doc_id, &b.positions)));
    all.dedup_by(|a, b| a.doc_id == b.doc_id && a.positions == b.positions);
    sort_results(&mut all);
    all
}

/// Results of a whole query text.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub plans: Vec<QueryPlan>,
    pub results: Vec<SearchResult>,
    pub stats: ReadStats,
}

/// Preprocesses, plans and runs `text` on the chosen engine.
pub fn search(
    text: &str,
    lexicon: &crate::lexicon::Lexicon,
    ix: &IndexSet,
    cfg: &RankConfig,
    engine: Engine,
) -> Result<SearchOutcome> {
    if lexicon.config() != &ix.manifest().lexicon_config() {
        return Err(Error::ManifestMismatch("lexicon bands differ from the index".into()));
    }
    let subs = crate::query::preprocess(text, lexicon)?;
    let mut plans = Vec::new();
    let mut lists = Vec::new();
    let mut stats = ReadStats::default();
    for sub in &subs {
        let (res, st) = match engine {
            Engine::Additional => {
                let p = crate::query::plan(sub, ix.manifest(), cfg)?;
                let r = execute(&p, ix, cfg)?;
                plans.push(p);
                r
            }
            Engine::Baseline => execute_baseline(sub, ix, cfg)?,
        };
        stats.merge(&st);
        lists.push(res);
    }
    Ok(SearchOutcome {
        plans,
        results: union_results(lists),
        stats,
    })
}
