//! Relevance scoring and the proximity threshold that sizes the indexes.
//!
//! `S = a·SR + b·IR + c·TP`, where TP decays with the extra words between
//! the matched positions. `MaxTPDistance(n)` is the widest span at which any
//! query of up to `n` words still has `c·TP` above `tp_critical`; the indexes
//! are built to reach exactly that far.

use crate::error::{Error, Result};
use crate::DocId;

/// Largest span examined by [`max_tp_distance`] before giving up.
pub const MAX_TP_SEARCH: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentMode {
    /// `1 / (p·(|A−B| − (n−2)))²`
    Quadratic,
    /// `1 / (|A−B| − (n−2))^(1 + 2/n)`
    Generic,
}

impl std::str::FromStr for ExponentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quadratic" => Ok(ExponentMode::Quadratic),
            "generic" => Ok(ExponentMode::Generic),
            _ => Err(Error::Config(format!("unknown exponent_mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub tp_critical: f64,
    pub p: f64,
    pub exponent_mode: ExponentMode,
    pub n_max: u32,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            tp_critical: 0.15,
            p: 1.0,
            exponent_mode: ExponentMode::Quadratic,
            n_max: 5,
        }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.a) && unit(self.b) && unit(self.c)) {
            return Err(Error::Config("weights a, b, c must lie in [0, 1]".into()));
        }
        if (self.a + self.b + self.c - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "weights must sum to 1, got {}",
                self.a + self.b + self.c
            )));
        }
        if !(self.tp_critical > 0.0 && self.tp_critical < 1.0) {
            return Err(Error::Config("tp_critical must lie in (0, 1)".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config("p must be positive".into()));
        }
        if self.exponent_mode == ExponentMode::Generic && self.p != 1.0 {
            return Err(Error::Config("p must be 1 in generic exponent mode".into()));
        }
        if self.n_max < 2 {
            return Err(Error::Config("n_max must be at least 2".into()));
        }
        Ok(())
    }
}

/// Proximity of `n` distinct positions spread over `span = B − A`.
pub fn tp_for(n: usize, span: u64, cfg: &RankConfig) -> Result<f64> {
    if n < 2 {
        return Err(Error::Rank(format!(
            "proximity is undefined for {n} matched word(s)"
        )));
    }
    let extra = n as u64 - 2;
    if span < n as u64 - 1 {
        return Err(Error::Rank(format!(
            "{n} distinct positions cannot span only {span}"
        )));
    }
    let gap = (span - extra) as f64;
    Ok(match cfg.exponent_mode {
        ExponentMode::Quadratic => 1.0 / (cfg.p * gap).powi(2),
        ExponentMode::Generic => 1.0 / gap.powf(1.0 + 2.0 / n as f64),
    })
}

/// Matched positions of one result, one per query cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSpan {
    positions: Vec<u32>,
}

impl ResultSpan {
    pub fn new(positions: Vec<u32>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Rank("empty result span".into()));
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Rank("result positions must be distinct".into()));
        }
        Ok(ResultSpan { positions })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn start(&self) -> u32 {
        *self.positions.iter().min().unwrap()
    }

    pub fn end(&self) -> u32 {
        *self.positions.iter().max().unwrap()
    }

    pub fn span(&self) -> u64 {
        (self.end() - self.start()) as u64
    }
}

pub fn tp(span: &ResultSpan, cfg: &RankConfig) -> Result<f64> {
    tp_for(span.n(), span.span(), cfg)
}

/// `a·sr + b·ir + c·tp`.
pub fn score(sr: f64, ir: f64, tp: f64, cfg: &RankConfig) -> f64 {
    cfg.a * sr + cfg.b * ir + cfg.c * tp
}

/// Smallest span for a query of length `n` beyond which proximity no longer
/// matters, maximized over every query length `2..=n`. Zero when no span of
/// any length is important.
pub fn max_tp_distance(n: u32, cfg: &RankConfig) -> Result<u32> {
    Ok(threshold_table(n, cfg)?
        .into_iter()
        .filter_map(|row| row.max_important_span)
        .max()
        .unwrap_or(0))
}

/// One row per query length `m`: the widest span whose `c·TP` still exceeds
/// `tp_critical`, `None` if even the exact phrase does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdRow {
    pub m: u32,
    pub max_important_span: Option<u32>,
}

pub fn threshold_table(n: u32, cfg: &RankConfig) -> Result<Vec<ThresholdRow>> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::Rank("query length must be at least 2".into()));
    }
    if n > cfg.n_max {
        return Err(Error::Rank(format!("query length {n} exceeds n_max {}", cfg.n_max)));
    }
    if cfg.c == 0.0 {
        return Err(Error::Rank(
            "c = 0: every span passes the threshold, MaxTPDistance is undefined".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n as usize - 1);
    for m in 2..=n {
        let shortest = m as u64 - 1;
        let mut span = shortest;
        loop {
            if cfg.c * tp_for(m as usize, span, cfg)? <= cfg.tp_critical {
                break;
            }
            span += 1;
            if span > MAX_TP_SEARCH {
                return Err(Error::Rank(format!(
                    "tp_critical {} needs spans beyond {MAX_TP_SEARCH}",
                    cfg.tp_critical
                )));
            }
        }
        rows.push(ThresholdRow {
            m,
            max_important_span: (span > shortest).then(|| (span - 1) as u32),
        });
    }
    Ok(rows)
}

/// MaxDistance for index construction: an explicit override, or
/// `MaxTPDistance(n)`.
pub fn derive_max_distance(n: u32, cfg: &RankConfig, override_value: Option<u32>) -> Result<u32> {
    match override_value {
        Some(v) if v >= 1 => Ok(v),
        Some(_) => Err(Error::Config("max_distance must be at least 1".into())),
        None => match max_tp_distance(n, cfg)? {
            0 => Err(Error::Config(
                "no span passes tp_critical, so MaxTPDistance is 0; set max_distance explicitly".into(),
            )),
            d => Ok(d),
        },
    }
}

/// Query-independent and query-dependent relevance inputs. Both default to
/// zero, leaving proximity as the only signal.
pub trait RelevanceSignals {
    fn static_rank(&self, _doc: DocId) -> f64 {
        0.0
    }
    fn ir_rank(&self, _doc: DocId) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoSignals;

impl RelevanceSignals for NoSignals {}
