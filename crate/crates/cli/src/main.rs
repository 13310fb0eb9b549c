mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use proxsearch::bench::{generate_queries, run_benchmark};
use proxsearch::corpus::ingest_corpus;
use proxsearch::exec::{search, Engine};
use proxsearch::index::{build_indexes, write_index_dir_atomic, IndexKind, IndexKinds, IndexSet, Manifest};
use proxsearch::lexicon::{LemmaDictionary, Lexicon};
use proxsearch::rank::{derive_max_distance, max_tp_distance, threshold_table};
use proxsearch::synth::{generate, SynthConfig};

use config::CliConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(proxsearch::Error),
    Correctness(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Correctness(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Correctness(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<proxsearch::Error> for CliError {
    fn from(e: proxsearch::Error) -> Self {
        use proxsearch::Error as E;
        match e {
            E::Config(_) | E::Rank(_) | E::EmptyQuery => CliError::Usage(e.to_string()),
            e => CliError::Data(e),
        }
    }
}

#[derive(Parser)]
#[command(name = "proxsearch", version, about = "Proximity full-text search with additional indexes")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

/// Settings accepted by every subcommand; they override the config file.
#[derive(Args)]
struct Settings {
    /// File of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus_dir: Option<String>,
    #[arg(long, global = true)]
    index_dir: Option<String>,
    #[arg(long, global = true)]
    dictionary_path: Option<String>,
    #[arg(long, global = true)]
    sw_count: Option<String>,
    #[arg(long, global = true)]
    fu_count: Option<String>,
    #[arg(long, global = true)]
    max_distance: Option<String>,
    #[arg(long = "a", global = true)]
    a: Option<String>,
    #[arg(long = "b", global = true)]
    b: Option<String>,
    #[arg(long = "c", global = true)]
    c: Option<String>,
    #[arg(long, global = true)]
    tp_critical: Option<String>,
    #[arg(long = "p", global = true)]
    p: Option<String>,
    /// quadratic or generic
    #[arg(long, global = true)]
    exponent_mode: Option<String>,
    #[arg(long, global = true)]
    n_max: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<CliConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => CliConfig::load(p)?,
            None => CliConfig::default(),
        };
        let flags = [
            ("corpus_dir", &self.corpus_dir),
            ("index_dir", &self.index_dir),
            ("dictionary_path", &self.dictionary_path),
            ("sw_count", &self.sw_count),
            ("fu_count", &self.fu_count),
            ("max_distance", &self.max_distance),
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("tp_critical", &self.tp_critical),
            ("p", &self.p),
            ("exponent_mode", &self.exponent_mode),
            ("n_max", &self.n_max),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Additional,
    Baseline,
}

#[derive(Subcommand)]
enum Command {
    /// Build the lexicon and all indexes from corpus_dir into index_dir
    Build,
    /// Run a query against index_dir
    Search {
        query: String,
        #[arg(long, value_enum, default_value = "additional")]
        engine: EngineArg,
        /// Print the plan and read statistics
        #[arg(long)]
        explain: bool,
        /// Result lines to print; 0 prints the count only
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Generate queries from the corpus and compare both engines
    Bench {
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sizes, key and posting counts of index_dir
    Stats,
    /// Print MaxDistance for queries of up to n words
    DeriveMaxdistance {
        /// Defaults to n_max
        #[arg(long)]
        n: Option<u32>,
    },
    /// Write a synthetic Zipf corpus to corpus_dir and its dictionary to dictionary_path
    GenCorpus {
        #[arg(long, default_value_t = 100)]
        docs: usize,
        #[arg(long, default_value_t = 200)]
        min_words: usize,
        #[arg(long, default_value_t = 2000)]
        max_words: usize,
        #[arg(long, default_value_t = 5000)]
        vocabulary: usize,
        #[arg(long, default_value_t = 1.1)]
        exponent: f64,
        #[arg(long, default_value_t = 50)]
        multi_lemma_words: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.settings.resolve()?;
    match cli.command {
        Command::Build => cmd_build(&cfg),
        Command::Search {
            query,
            engine,
            explain,
            limit,
        } => {
            let engine = match engine {
                EngineArg::Additional => Engine::Additional,
                EngineArg::Baseline => Engine::Baseline,
            };
            cmd_search(&cfg, &query, engine, explain, limit)
        }
        Command::Bench { count, seed } => cmd_bench(&cfg, count, seed),
        Command::Stats => cmd_stats(&cfg),
        Command::DeriveMaxdistance { n } => cmd_derive_maxdistance(&cfg, n.unwrap_or(cfg.rank.n_max)),
        Command::GenCorpus {
            docs,
            min_words,
            max_words,
            vocabulary,
            exponent,
            multi_lemma_words,
            seed,
        } => cmd_gen_corpus(
            &cfg,
            &SynthConfig {
                docs,
                min_words,
                max_words,
                vocabulary,
                exponent,
                multi_lemma_words,
                seed,
            },
        ),
    }
}

fn cmd_build(cfg: &CliConfig) -> Result<(), CliError> {
    let lex_cfg = cfg.lexicon_config()?;
    let md = derive_max_distance(cfg.rank.n_max, &cfg.rank, cfg.max_distance)?;
    let corpus_dir = cfg.corpus_dir()?;
    let index_dir = cfg.index_dir()?;

    let t = Instant::now();
    let ingested = ingest_corpus(corpus_dir, "utf-8")?;
    let dict = LemmaDictionary::load_optional(cfg.dictionary_path.as_deref())?;
    let lexicon = Lexicon::from_corpus(&ingested.store, dict, lex_cfg)?;
    log::info!("lexicon of {} lemmas in {:.1?}", lexicon.len(), t.elapsed());
    let built = build_indexes(&ingested.store, &lexicon, md, IndexKinds::ALL)?;
    log::info!("indexes built in {:.1?}", t.elapsed());
    let manifest = write_index_dir_atomic(index_dir, &built, &lexicon, &ingested.store)?;

    println!(
        "documents={} words={} skipped={} lemmas={} max_distance={md}",
        ingested.store.len(),
        ingested.store.total_words(),
        ingested.skipped.len(),
        lexicon.len()
    );
    print_index_table(&manifest);
    Ok(())
}

fn kind_bytes(m: &Manifest, kind: IndexKind) -> u64 {
    let size = |n: String| m.files.get(&n).map(|f| f.0).unwrap_or(0);
    let mut total = size(format!("{}.dict", kind.prefix())) + size(format!("{}.post", kind.prefix()));
    if kind == IndexKind::Ordinary {
        total += size("ord.nsw".into());
    }
    total
}

fn print_index_table(m: &Manifest) {
    println!("{:<6} {:>12} {:>14} {:>14}", "index", "keys", "postings", "bytes");
    for kind in IndexKind::ALL {
        println!(
            "{:<6} {:>12} {:>14} {:>14}",
            kind.prefix(),
            m.keys.get(&kind).copied().unwrap_or(0),
            m.postings.get(&kind).copied().unwrap_or(0),
            kind_bytes(m, kind)
        );
    }
}

fn open_index(cfg: &CliConfig) -> Result<(IndexSet, Lexicon), CliError> {
    let ix = IndexSet::open(cfg.index_dir()?)?;
    let m = ix.manifest();
    let explicit = [
        ("sw_count", cfg.sw_count, m.sw_count),
        ("fu_count", cfg.fu_count, m.fu_count),
        ("max_distance", cfg.max_distance, m.max_distance),
    ];
    for (key, want, have) in explicit {
        if let Some(w) = want.filter(|&w| w != have) {
            return Err(CliError::Data(proxsearch::Error::ManifestMismatch(format!(
                "{key} is {w} but the index was built with {have}"
            ))));
        }
    }
    let lexicon = ix.load_lexicon()?;
    Ok((ix, lexicon))
}

fn cmd_search(cfg: &CliConfig, query: &str, engine: Engine, explain: bool, limit: usize) -> Result<(), CliError> {
    cfg.rank.validate()?;
    let (ix, lexicon) = open_index(cfg)?;
    let outcome = search(query, &lexicon, &ix, &cfg.rank, engine)?;
    for plan in &outcome.plans {
        if explain {
            print!("{}", plan.explain());
        } else {
            for w in &plan.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    if explain {
        print!("{}", outcome.stats.explain());
    }
    if limit == 0 {
        println!("{}", outcome.results.len());
        return Ok(());
    }
    for r in outcome.results.iter().take(limit) {
        println!("{}", r.line());
    }
    if outcome.results.len() > limit {
        eprintln!("{} of {} results shown", limit, outcome.results.len());
    }
    Ok(())
}

fn cmd_bench(cfg: &CliConfig, count: usize, seed: u64) -> Result<(), CliError> {
    cfg.rank.validate()?;
    let (ix, lexicon) = open_index(cfg)?;
    let store = ix.load_store(cfg.corpus_dir()?)?;
    let queries = generate_queries(&store, count, seed)?;
    let report = run_benchmark(&queries, &ix, &lexicon, &cfg.rank, Some(seed))?;
    print!("{report}");
    if !report.is_correct() {
        return Err(CliError::Correctness(format!(
            "{} queries missed their source document, {} engine disagreements",
            report.misses(),
            report.disagreements()
        )));
    }
    Ok(())
}

fn cmd_stats(cfg: &CliConfig) -> Result<(), CliError> {
    let ix = IndexSet::open(cfg.index_dir()?)?;
    let m = ix.manifest();
    println!(
        "documents={} sw_count={} fu_count={} max_distance={}",
        m.doc_count, m.sw_count, m.fu_count, m.max_distance
    );
    print_index_table(m);
    for (name, (size, _)) in &m.files {
        println!("size.{name}={size}");
    }
    let post = ix.file_size("ord.post");
    let nsw = ix.file_size("ord.nsw");
    let share = if post + nsw == 0 { 0.0 } else { nsw as f64 / (post + nsw) as f64 };
    println!("nsw_share={share:.4}");
    let largest = IndexKind::ALL.into_iter().max_by_key(|&k| kind_bytes(m, k)).unwrap();
    println!("largest={}", largest.prefix());
    Ok(())
}

fn cmd_derive_maxdistance(cfg: &CliConfig, n: u32) -> Result<(), CliError> {
    let table = threshold_table(n, &cfg.rank)?;
    let md = max_tp_distance(n, &cfg.rank)?;
    println!("max_distance={md}");
    println!("{:>3} {:>18}", "m", "max_important_span");
    for row in table {
        let span = row.max_important_span.map_or("-".to_owned(), |s| s.to_string());
        println!("{:>3} {:>18}", row.m, span);
    }
    Ok(())
}

fn cmd_gen_corpus(cfg: &CliConfig, synth: &SynthConfig) -> Result<(), CliError> {
    let dir = cfg.corpus_dir()?;
    let dict_path: PathBuf = match &cfg.dictionary_path {
        Some(p) => p.clone(),
        None => sibling(dir, "lemmas"),
    };
    if dict_path.starts_with(dir) {
        return Err(CliError::Usage("dictionary_path must lie outside corpus_dir".into()));
    }
    let corpus = generate(synth)?;
    corpus.write(dir, &dict_path)?;
    println!(
        "documents={} bytes={} dictionary={}",
        corpus.texts.len(),
        corpus.total_bytes(),
        dict_path.display()
    );
    Ok(())
}

fn sibling(dir: &Path, ext: &str) -> PathBuf {
    let mut s = dir.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
