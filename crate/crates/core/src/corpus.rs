//! Document ingestion and tokenization.
//!
//! Documents are identified by their rank in sorted relative-path order, so
//! rebuilding from the same directory always yields the same ids. The store
//! keeps only paths and word counts; text is re-read on demand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::{DocId, Position};

/// A single word occurrence produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub position: Position,
}

/// Splits on every character that is neither a letter nor a digit and
/// lowercases what remains. Positions are the ordinals of emitted tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for_each_word(text, |surface| {
        let position = out.len() as Position;
        out.push(Token {
            surface: surface.to_owned(),
            position,
        });
    });
    out
}

/// Allocation-light variant of [`tokenize`]: calls `f` with each lowercased
/// word in text order.
pub fn for_each_word(text: &str, mut f: impl FnMut(&str)) {
    let mut buf = String::new();
    for word in text.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        if word.chars().any(|c| c.is_uppercase()) {
            buf.clear();
            for c in word.chars() {
                buf.extend(c.to_lowercase());
            }
            f(&buf);
        } else {
            f(word);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    /// Path relative to the corpus root, `/`-separated.
    pub path: String,
    pub word_count: u32,
}

#[derive(Debug, Clone)]
enum Source {
    Dir(PathBuf),
    Memory(Vec<String>),
}

/// Immutable id → document mapping.
#[derive(Debug, Clone)]
pub struct DocumentStore {
    docs: Vec<Document>,
    source: Source,
}

/// A file that could not be ingested. Ingestion continues without it.
#[derive(Debug, Clone)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct Ingested {
    pub store: DocumentStore,
    pub skipped: Vec<SkippedFile>,
}

fn check_encoding(encoding: &str) -> Result<()> {
    match encoding.to_ascii_lowercase().replace('_', "-").as_str() {
        "utf-8" | "utf8" => Ok(()),
        _ => Err(Error::UnsupportedEncoding(encoding.to_owned())),
    }
}

fn count_words(text: &str) -> u32 {
    let mut n = 0u32;
    for_each_word(text, |_| n += 1);
    n
}

/// Reads every regular file below `root`. Unreadable or non-UTF-8 files are
/// reported in [`Ingested::skipped`]; an empty result is an error.
pub fn ingest_corpus(root: &Path, encoding: &str) -> Result<Ingested> {
    check_encoding(encoding)?;
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found"),
        ));
    }

    let mut rel_paths = Vec::new();
    let mut skipped = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(true) {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e
                    .path()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default();
                skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under root");
        let rel: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        rel_paths.push(rel.join("/"));
    }
    rel_paths.sort();

    let mut docs = Vec::with_capacity(rel_paths.len());
    for rel in rel_paths {
        let full = root.join(&rel);
        match read_text(&full) {
            Ok(text) => docs.push(Document {
                id: docs.len() as DocId,
                path: rel,
                word_count: count_words(&text),
            }),
            Err(e) => skipped.push(SkippedFile {
                path: rel,
                reason: e.to_string(),
            }),
        }
    }
    for s in &skipped {
        log::warn!("skipping {}: {}", s.path, s.reason);
    }
    if docs.is_empty() {
        return Err(Error::NoDocuments);
    }
    Ok(Ingested {
        store: DocumentStore {
            docs,
            source: Source::Dir(root.to_owned()),
        },
        skipped,
    })
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, e.utf8_error()),
        )
    })
}

impl DocumentStore {
    /// Builds an in-memory store. Documents are ordered by path exactly as an
    /// on-disk corpus would be.
    pub fn from_texts<P, T>(texts: impl IntoIterator<Item = (P, T)>) -> Self
    where
        P: Into<String>,
        T: Into<String>,
    {
        let mut items: Vec<(String, String)> = texts
            .into_iter()
            .map(|(p, t)| (p.into(), t.into()))
            .collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        let mut docs = Vec::with_capacity(items.len());
        let mut bodies = Vec::with_capacity(items.len());
        for (i, (path, text)) in items.into_iter().enumerate() {
            docs.push(Document {
                id: i as DocId,
                path,
                word_count: count_words(&text),
            });
            bodies.push(text);
        }
        DocumentStore {
            docs,
            source: Source::Memory(bodies),
        }
    }

    /// Re-attaches a previously written `docs.map` to its corpus directory.
    pub fn from_map(root: &Path, map_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(map_path).map_err(|e| Error::io(map_path, e))?;
        let docs = parse_docs_map(&text, map_path)?;
        Ok(DocumentStore {
            docs,
            source: Source::Dir(root.to_owned()),
        })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, id: DocId) -> Option<&Document> {
        self.docs.get(id as usize)
    }

    pub fn total_words(&self) -> u64 {
        self.docs.iter().map(|d| d.word_count as u64).sum()
    }

    pub fn text(&self, id: DocId) -> Result<String> {
        let doc = self.docs.get(id as usize).ok_or_else(|| {
            Error::Config(format!("document id {id} out of range"))
        })?;
        match &self.source {
            Source::Dir(root) => read_text(&root.join(&doc.path)),
            Source::Memory(bodies) => Ok(bodies[id as usize].clone()),
        }
    }

    /// Calls `f` with the text of every document in id order without
    /// cloning in-memory bodies.
    pub fn for_each_text(&self, mut f: impl FnMut(DocId, &str) -> Result<()>) -> Result<()> {
        match &self.source {
            Source::Dir(root) => {
                for doc in &self.docs {
                    let text = read_text(&root.join(&doc.path))?;
                    f(doc.id, &text)?;
                }
            }
            Source::Memory(bodies) => {
                for (doc, text) in self.docs.iter().zip(bodies) {
                    f(doc.id, text)?;
                }
            }
        }
        Ok(())
    }

    pub fn tokens(&self, id: DocId) -> Result<Vec<Token>> {
        Ok(tokenize(&self.text(id)?))
    }

    /// `<id>\t<relative path>\t<word_count>\n` per document, ids ascending.
    pub fn docs_map(&self) -> String {
        let mut out = String::new();
        for d in &self.docs {
            let _ = writeln!(out, "{}\t{}\t{}", d.id, d.path, d.word_count);
        }
        out
    }

    pub fn write_docs_map(&self, path: &Path) -> Result<()> {
        fs::write(path, self.docs_map()).map_err(|e| Error::io(path, e))
    }
}

fn parse_docs_map(text: &str, path: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |message: &str| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: message.to_owned(),
        };
        let mut parts = line.split('\t');
        let (Some(id), Some(p), Some(wc), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad("expected 3 tab-separated fields"));
        };
        let id: DocId = id.parse().map_err(|_| bad("bad document id"))?;
        if id as usize != docs.len() {
            return Err(bad("document ids must be dense and ascending"));
        }
        docs.push(Document {
            id,
            path: p.to_owned(),
            word_count: wc.parse().map_err(|_| bad("bad word count"))?,
        });
    }
    Ok(docs)
}
