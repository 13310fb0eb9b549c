//! One test per acceptance criterion. Each prints a single
//! `criterion N PASS|FAIL` line to the real stdout, so the verdicts show up
//! even when output capture is on.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::*;
use proxsearch::bench::{generate_queries, oracle_search, run_benchmark, BenchReport};
use proxsearch::exec::{execute, execute_baseline};
use proxsearch::index::{build_indexes, write_index_dir, IndexKinds, IndexSet, NswEntry, PairPosting, TriplePosting};
use proxsearch::lexicon::{Lexicon, LexiconConfig};
use proxsearch::query::{plan, preprocess, select_triple_cover, Composition, Strategy};
use proxsearch::rank::{max_tp_distance, tp, tp_for, ExponentMode, RankConfig, ResultSpan};
use proxsearch::synth::{generate, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Large builds run one at a time to bound memory.
static HEAVY: Mutex<()> = Mutex::new(());

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.0.push((what.into(), ok));
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(format!("{what}: got {got:.6}, want {want} ± {tol:e}"), (got - want).abs() <= tol);
    }

    fn verdict(self, n: u32, title: &str, summary: &str) {
        let failed: Vec<&str> = self.0.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        let line = format!("criterion {n} {status}: {title} ({} checks; {summary})\n", self.0.len());
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        assert!(failed.is_empty(), "criterion {n} failed:\n  {}", failed.join("\n  "));
    }
}

fn generic() -> RankConfig {
    RankConfig {
        exponent_mode: ExponentMode::Generic,
        ..RankConfig::default()
    }
}

#[test]
fn criterion_1_formula_fidelity() {
    let q = RankConfig::default();
    let g = generic();
    let exact = 1e-9;
    let rounded = 5e-3;
    let mut c = Checks::new();
    let t = |n: usize, span: u64, cfg: &RankConfig| tp_for(n, span, cfg).unwrap();

    // pairs in "time and a word by yes"
    c.close("\"and word\" at 1 and 3", tp(&ResultSpan::new(vec![1, 3]).unwrap(), &q).unwrap(), 0.25, exact);
    c.close("\"time and\" at 0 and 1", tp(&ResultSpan::new(vec![0, 1]).unwrap(), &q).unwrap(), 1.0, exact);
    c.close("\"time word\" span 3", t(2, 3, &q), 1.0 / 9.0, exact);
    // five-word results
    c.close("five words span 4", tp(&ResultSpan::new(vec![0, 1, 2, 3, 4]).unwrap(), &q).unwrap(), 1.0, exact);
    c.close("five words span 5", tp(&ResultSpan::new(vec![0, 1, 2, 3, 5]).unwrap(), &q).unwrap(), 0.25, exact);
    // thresholds for three-word and two-word queries
    c.close("three words span 2", t(3, 2, &q), 1.0, exact);
    c.close("three words span 3", t(3, 3, &q), 0.25, exact);
    c.close("three words span 4 (≈)", t(3, 4, &q), 0.11, rounded);
    c.close("two words span 2", t(2, 2, &q), 0.25, exact);
    c.close("two words span 3 (≈)", t(2, 3, &q), 0.11, rounded);
    // generic exponent
    c.close("generic three words span 2", t(3, 2, &g), 1.0, exact);
    c.close("generic three words span 3 (≈)", t(3, 3, &g), 0.314, rounded);
    c.close("generic three words span 4 (≈)", t(3, 4, &g), 0.16, rounded);
    c.close("generic three words span 5 (≈)", t(3, 5, &g), 0.09, rounded);
    c.close("generic two words span 2", t(2, 2, &g), 0.25, exact);
    c.close("generic two words span 3 (≈)", t(2, 3, &g), 0.11, rounded);

    let summary = format!("generic n=3 span 5 gives {:.4}", t(3, 5, &g));
    c.verdict(1, "tp reproduces the worked values", &summary);
}

/// Widest important span over query lengths `2..=n`, found by scanning
/// spans with the proximity formula written out directly.
fn brute_max_tp_distance(n: u32, cfg: &RankConfig) -> u32 {
    let mut best = 0;
    for m in 2..=n {
        for span in (m - 1)..=20_000 {
            let gap = (span - (m - 2)) as f64;
            let tp = match cfg.exponent_mode {
                ExponentMode::Quadratic => 1.0 / (cfg.p * gap * cfg.p * gap),
                ExponentMode::Generic => gap.powf(-(1.0 + 2.0 / m as f64)),
            };
            if cfg.c * tp > cfg.tp_critical {
                best = best.max(span);
            }
        }
    }
    best
}

#[test]
fn criterion_2_max_tp_distance() {
    let mut c = Checks::new();
    let d3 = max_tp_distance(3, &RankConfig::default()).unwrap();
    let g3 = max_tp_distance(3, &generic()).unwrap();
    c.check(format!("defaults n=3: {d3}, want 3"), d3 == 3);
    c.check(format!("generic n=3: {g3}, want 4"), g3 == 4);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut agree = 0;
    for i in 0..200 {
        let mode = if rng.gen_bool(0.5) { ExponentMode::Generic } else { ExponentMode::Quadratic };
        let weight_c = rng.gen_range(0.2..=1.0);
        let a = rng.gen_range(0.0..=1.0 - weight_c);
        let n_max = rng.gen_range(2..=8);
        let cfg = RankConfig {
            a,
            b: 1.0 - weight_c - a,
            c: weight_c,
            tp_critical: rng.gen_range(0.02..0.6),
            p: if mode == ExponentMode::Generic { 1.0 } else { rng.gen_range(0.5..2.0) },
            exponent_mode: mode,
            n_max,
        };
        let n = rng.gen_range(2..=n_max);
        let got = max_tp_distance(n, &cfg).unwrap();
        let want = brute_max_tp_distance(n, &cfg);
        if got == want {
            agree += 1;
        } else {
            c.check(format!("config {i} {cfg:?} n={n}: {got} vs tabulated {want}"), false);
        }
    }
    c.check(format!("{agree}/200 random configs agree"), agree == 200);
    c.verdict(2, "MaxTPDistance", &format!("defaults 3, generic 4, {agree}/200 random configs"));
}

#[test]
fn criterion_3_index_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let built = sentence_indexes(5);
    write_index_dir(dir.path(), &built, &sentence_lexicon(), &sentence_store()).unwrap();
    let ix = IndexSet::open(dir.path()).unwrap();
    let mut c = Checks::new();
    let fl = |name: &str| FL_TABLE.iter().find(|e| e.0 == name).unwrap().1;
    let rec = |v: &[(&str, i32)]| -> Vec<NswEntry> {
        v.iter()
            .map(|&(l, offset)| NswEntry {
                stop_fl: fl(l),
                offset,
            })
            .collect()
    };

    let nsw_cases = [
        ("friend", 1, rec(&[("a", -1), ("of", 1), ("my", 2), ("who", 3), ("have", 4)])),
        ("mine", 3, rec(&[("a", -3), ("of", -1), ("who", 1), ("have", 2), ("the", 4)])),
        (
            "desire",
            6,
            rec(&[("of", -4), ("my", -3), ("who", -2), ("have", -1), ("the", 1), ("of", 3), ("with", 5)]),
        ),
    ];
    for (lemma, pos, want) in nsw_cases {
        let f = ix.ordinary(lemma, true).unwrap();
        let got: Vec<(u32, u32, Vec<NswEntry>)> = f
            .postings
            .iter()
            .zip(f.nsw.unwrap())
            .map(|(p, r)| (p.doc_id, p.position, r))
            .collect();
        c.check(format!("NSW record of {lemma}: {got:?}"), got == vec![(SENTENCE_DOC, pos, want)]);
    }

    let pairs = [
        ("friend", "mine", 1, 2),
        ("friend", "desire", 1, 5),
        ("desire", "mine", 6, -3),
        ("mine", "honour", 3, 5),
    ];
    for (w, v, position, distance) in pairs {
        let got = ix.pair(w, v).unwrap().postings;
        let want = PairPosting {
            doc_id: SENTENCE_DOC,
            position,
            distance,
        };
        c.check(format!("pair ({w}, {v}): {got:?}"), got == vec![want]);
    }

    let triples = [
        ("a", "of", "my", 0, 2, 3),
        ("a", "my", "who", 0, 3, 4),
        ("a", "of", "who", 0, 2, 4),
        ("a", "have", "my", 0, 5, 3),
        ("of", "my", "who", 2, 1, 2),
        ("of", "with", "who", 9, 2, -5),
    ];
    for (f, s, t, position, d1, d2) in triples {
        let got = ix.triple(f, s, t).unwrap().postings;
        let want = TriplePosting {
            doc_id: SENTENCE_DOC,
            position,
            d1,
            d2,
        };
        c.check(format!("triple ({f}, {s}, {t}) holds {want:?}: {got:?}"), got.contains(&want));
    }
    c.verdict(3, "index fixtures", "3 NSW records, 4 pair and 6 triple postings");
}

#[test]
fn criterion_4_query_preprocessing() {
    let lex = query_examples_lexicon();
    let mut c = Checks::new();
    let split = |text: &str| -> Vec<String> { preprocess(text, &lex).unwrap().iter().map(|s| s.to_string()).collect() };

    let got = split("friend mine who");
    c.check(format!("friend mine who: {got:?}"), got == ["[friend][mine][who]", "[friend][my][who]"]);
    let got = split("who are you who");
    c.check(format!("who are you who: {got:?}"), got == ["[who][are][you][who]", "[who][be][you][who]"]);

    let cover = |text: &str| -> BTreeSet<Vec<String>> {
        let sub = preprocess(text, &lex).unwrap().remove(0);
        select_triple_cover(&sub.cells).into_iter().map(|(l, _)| l).collect()
    };
    let keys = |v: &[[&str; 3]]| -> BTreeSet<Vec<String>> {
        v.iter().map(|k| k.iter().map(|s| s.to_string()).collect()).collect()
    };
    let got = cover("to be not to be");
    c.check(format!("to be not to be: {got:?}"), got == keys(&[["to", "be", "not"], ["to", "to", "be"]]));
    let got = cover("who are you who");
    c.check(format!("who are you who: {got:?}"), got == keys(&[["you", "are", "who"], ["you", "who", "who"]]));
    c.verdict(4, "query preprocessing and triple covers", "2 splits, 2 covers");
}

#[test]
fn criterion_5_oracle_equivalence() {
    let _heavy = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let started = Instant::now();
    let cfg = RankConfig::default();
    let comps = [
        Composition::AllOrdinary,
        Composition::AllFu,
        Composition::AllStop,
        Composition::MixedNonstop,
        Composition::WithStop,
    ];
    let mut c = Checks::new();
    let mut queries = 0;
    let mut subqueries = 0;
    let mut strategies = BTreeSet::new();
    for seed in 1..=20u64 {
        let synth = SynthConfig {
            docs: 80,
            min_words: 100,
            max_words: 1000,
            vocabulary: 5000,
            exponent: 1.1,
            multi_lemma_words: 60,
            seed,
        };
        let dir = tempfile::tempdir().unwrap();
        let b = build_synthetic(&synth, LexiconConfig::new(150, 500).unwrap(), 5, dir.path());
        let docs = doc_words(&b.store);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut made = 0;
        let mut attempt = 0;
        while made < 26 && attempt < 200 {
            let target = comps[attempt % comps.len()];
            attempt += 1;
            let len = rng.gen_range(2..=5);
            let Some(text) = window_query(&mut rng, &docs, &b.lexicon, target, len, 5) else { continue };
            made += 1;
            for sub in preprocess(&text, &b.lexicon).unwrap() {
                let p = plan(&sub, b.index.manifest(), &cfg).unwrap();
                strategies.insert(p.strategy);
                let (add, _) = execute(&p, &b.index, &cfg).unwrap();
                let (base, _) = execute_baseline(&sub, &b.index, &cfg).unwrap();
                let oracle = oracle_search(&sub, &b.store, b.lexicon.dictionary(), 5).unwrap();
                let add: BTreeSet<_> = add.into_iter().map(|r| (r.doc_id, r.positions)).collect();
                let base: BTreeSet<_> = base.into_iter().map(|r| (r.doc_id, r.positions)).collect();
                if add != oracle || base != oracle {
                    c.check(
                        format!(
                            "corpus {seed} {sub} ({}): additional {} baseline {} oracle {}",
                            p.strategy,
                            add.len(),
                            base.len(),
                            oracle.len()
                        ),
                        false,
                    );
                }
                subqueries += 1;
            }
        }
        queries += made;
    }
    let required = [
        Strategy::AllOrdinary,
        Strategy::AllFu,
        Strategy::AllStop,
        Strategy::MixedNonstop,
        Strategy::WithStop,
    ];
    c.check(format!("{queries} queries, want ≥ 500"), queries >= 500);
    c.check(
        format!("strategies seen {strategies:?}"),
        required.iter().all(|s| strategies.contains(s)),
    );
    let elapsed = started.elapsed();
    c.check(format!("runtime {elapsed:.1?}, want ≤ 5 min"), elapsed <= Duration::from_secs(300));
    c.verdict(
        5,
        "oracle equivalence",
        &format!("20 corpora, {queries} queries, {subqueries} subqueries, {} strategies, {elapsed:.0?}", strategies.len()),
    );
}

fn bench_on(dir: &Path, store: &proxsearch::corpus::DocumentStore, lexicon: &Lexicon, count: usize, seed: u64) -> BenchReport {
    let ix = IndexSet::open(dir).unwrap();
    let queries = generate_queries(store, count, seed).unwrap();
    run_benchmark(&queries, &ix, lexicon, &RankConfig::default(), Some(seed)).unwrap()
}

#[test]
fn criterion_6_benchmark_correctness() {
    let _heavy = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let synth = SynthConfig {
        docs: 200,
        seed: 6,
        ..SynthConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let b = build_synthetic(&synth, LexiconConfig::default(), 5, dir.path());
    let report = bench_on(dir.path(), &b.store, &b.lexicon, 500, 6);
    let mut c = Checks::new();
    c.check(format!("{} queries, want ≥ 500", report.query_count()), report.query_count() >= 500);
    c.check(format!("{} misses", report.misses()), report.misses() == 0);
    c.verdict(
        6,
        "every generated query finds its source document",
        &format!(
            "{} queries, {} misses, {} engine disagreements",
            report.query_count(),
            report.misses(),
            report.disagreements()
        ),
    );
}

/// Natural-language-like Zipf corpus: 50 000 lemmas, exponent 1.
fn large_synth(docs: usize, seed: u64) -> SynthConfig {
    SynthConfig {
        docs,
        min_words: 1000,
        max_words: 2500,
        vocabulary: 50_000,
        exponent: 1.0,
        multi_lemma_words: 500,
        seed,
    }
}

#[test]
fn criterion_7_data_read_reduction() {
    let _heavy = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let started = Instant::now();
    let corpus = generate(&large_synth(5600, 7)).unwrap();
    let bytes = corpus.total_bytes();
    let store = corpus.store();
    let lexicon = Lexicon::from_corpus(&store, corpus.dictionary, LexiconConfig::new(700, 2100).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    {
        let built = build_indexes(&store, &lexicon, 5, IndexKinds::ALL).unwrap();
        write_index_dir(dir.path(), &built, &lexicon, &store).unwrap();
    }
    let report = bench_on(dir.path(), &store, &lexicon, 500, 1);
    let elapsed = started.elapsed();

    let overall = report.mean_bytes(true) / report.mean_bytes(false);
    let multi = |add| report.mean_bytes_where(add, |r| r.stop_words >= 2);
    let multi_ratio = multi(true) / multi(false);
    let multi_count = report.runs.iter().filter(|r| r.stop_words >= 2).count();
    let mut c = Checks::new();
    c.check(format!("corpus {bytes} bytes, want ≥ 50 MiB"), bytes >= 50 << 20);
    c.check(format!("{} queries", report.query_count()), report.query_count() >= 500);
    c.check(format!("overall bytes ratio {overall:.4}, want ≤ 0.2"), overall <= 0.2);
    c.check(format!("≥2-stop subset {multi_count} queries"), multi_count > 0);
    c.check(format!("≥2-stop bytes ratio {multi_ratio:.4}, want ≤ 0.05"), multi_ratio <= 0.05);
    c.check(format!("runtime {elapsed:.1?}, want ≤ 15 min"), elapsed <= Duration::from_secs(900));
    c.verdict(
        7,
        "data-read reduction",
        &format!(
            "{:.1} MB corpus, additional/baseline bytes {overall:.4} overall (1/{:.1}), {multi_ratio:.4} over {multi_count} queries with ≥2 stop words (1/{:.1}), {elapsed:.0?}",
            bytes as f64 / 1e6,
            1.0 / overall,
            1.0 / multi_ratio
        ),
    );
}

fn kind_bytes(ix: &IndexSet, prefix: &str) -> u64 {
    ix.file_size(&format!("{prefix}.dict")) + ix.file_size(&format!("{prefix}.post"))
}

#[test]
fn criterion_8_max_distance_sweep() {
    let _heavy = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let corpus = generate(&large_synth(600, 8)).unwrap();
    let store = corpus.store();
    let lexicon = Lexicon::from_corpus(&store, corpus.dictionary, LexiconConfig::new(700, 2100).unwrap()).unwrap();
    let mut c = Checks::new();
    let mut rows = Vec::new();
    for md in [5, 7, 9] {
        let dir = tempfile::tempdir().unwrap();
        let written = build_indexes(&store, &lexicon, md, IndexKinds::ALL)
            .and_then(|built| write_index_dir(dir.path(), &built, &lexicon, &store));
        c.check(format!("build at MaxDistance {md}: {:?}", written.as_ref().err()), written.is_ok());
        if written.is_err() {
            continue;
        }
        let ix = IndexSet::open(dir.path()).unwrap();
        let (pair, tri) = (kind_bytes(&ix, "pair"), kind_bytes(&ix, "tri"));
        let report = bench_on(dir.path(), &store, &lexicon, 300, 8);
        c.check(format!("MaxDistance {md}: {} misses", report.misses()), report.misses() == 0);
        rows.push((md, pair, tri, report.mean_bytes(true)));
    }
    for w in rows.windows(2) {
        let (a, b) = (w[0], w[1]);
        c.check(format!("pair bytes {} at {} ≤ {} at {}", a.1, a.0, b.1, b.0), a.1 <= b.1);
        c.check(format!("triple bytes {} at {} ≤ {} at {}", a.2, a.0, b.2, b.0), a.2 <= b.2);
    }
    let means: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(0.0, f64::max);
    c.check(format!("mean additional bytes {means:?} vary by {:.3}×, want < 2", hi / lo), hi / lo < 2.0);
    let summary: Vec<String> = rows
        .iter()
        .map(|(md, p, t, m)| format!("md {md}: pair {p} B, triple {t} B, {m:.0} B/query"))
        .collect();
    c.verdict(8, "MaxDistance sweep", &summary.join("; "));
}

#[test]
fn criterion_9_determinism() {
    let _heavy = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let synth = SynthConfig {
        seed: 9,
        ..SynthConfig::default()
    };
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = build_synthetic(&synth, LexiconConfig::default(), 5, da.path());
    let b = build_synthetic(&synth, LexiconConfig::default(), 5, db.path());
    let mut c = Checks::new();
    let mut names: Vec<_> = fs::read_dir(da.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for n in &names {
        let same = fs::read(da.path().join(n)).unwrap() == fs::read(db.path().join(n)).unwrap();
        c.check(format!("{n:?} identical"), same);
    }
    let ra = bench_on(da.path(), &a.store, &a.lexicon, 200, 1);
    let rb = bench_on(db.path(), &b.store, &b.lexicon, 200, 1);
    c.check("bench byte columns identical", ra.byte_columns() == rb.byte_columns());
    c.verdict(
        9,
        "determinism",
        &format!("{} index files and 200 bench rows byte-identical", names.len()),
    );
}
