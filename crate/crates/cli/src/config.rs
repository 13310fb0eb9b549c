//! Flat `key = value` configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use proxsearch::lexicon::LexiconConfig;
use proxsearch::rank::{ExponentMode, RankConfig};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliConfig {
    pub corpus_dir: Option<PathBuf>,
    pub index_dir: Option<PathBuf>,
    pub dictionary_path: Option<PathBuf>,
    pub sw_count: Option<u32>,
    pub fu_count: Option<u32>,
    /// `None` derives the value from `n_max` and the rank parameters.
    pub max_distance: Option<u32>,
    pub rank: RankConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value {value:?} for {key}: {e}")))
}

impl CliConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "corpus_dir" => self.corpus_dir = Some(value.into()),
            "index_dir" => self.index_dir = Some(value.into()),
            "dictionary_path" => self.dictionary_path = Some(value.into()),
            "sw_count" => self.sw_count = Some(parse(key, value)?),
            "fu_count" => self.fu_count = Some(parse(key, value)?),
            "max_distance" => self.max_distance = Some(parse(key, value)?),
            "a" => self.rank.a = parse(key, value)?,
            "b" => self.rank.b = parse(key, value)?,
            "c" => self.rank.c = parse(key, value)?,
            "tp_critical" => self.rank.tp_critical = parse(key, value)?,
            "p" => self.rank.p = parse(key, value)?,
            "exponent_mode" => self.rank.exponent_mode = parse::<ExponentMode>(key, value)?,
            "n_max" => self.rank.n_max = parse(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key = value", origin.display(), n + 1))
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| CliError::Usage(format!("{}:{}: {e}", origin.display(), n + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = CliConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn lexicon_config(&self) -> Result<LexiconConfig, CliError> {
        let d = LexiconConfig::default();
        Ok(LexiconConfig::new(self.sw_count.unwrap_or(d.sw_count), self.fu_count.unwrap_or(d.fu_count))?)
    }

    pub fn corpus_dir(&self) -> Result<&Path, CliError> {
        self.corpus_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("corpus_dir is not set".into()))
    }

    pub fn index_dir(&self) -> Result<&Path, CliError> {
        self.index_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("index_dir is not set".into()))
    }
}
