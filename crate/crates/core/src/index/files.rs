//! On-disk layout of an index directory and the reader over it.
//!
//! ```text
//! manifest                  key=value parameters, sizes and checksums
//! base.dict  base.post      baseline index
//! ord.dict   ord.post ord.nsw   ordinary index, NSW records in their own stream
//! pair.dict  pair.post      expanded (w, v) index, key `w\x01v`
//! tri.dict   tri.post       expanded (f, s, t) index, key `f\x01s\x01t`
//! fl_list  lemmas  docs.map lexicon, dictionary copy and document map
//! ```
//!
//! Dictionary rows are sorted by key bytes and looked up by binary search.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::build::BuiltIndexes;
use super::codec::{decode_postings, CodecError, NswEntry, NswReader, OrdinaryPosting, PostingRecord};
use crate::corpus::DocumentStore;
use crate::error::{Error, Result};
use crate::lexicon::{LemmaDictionary, Lexicon, LexiconConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Separator between lemmas of a composite key.
pub const KEY_SEP: char = '\u{1}';

pub const INDEX_FILES: [&str; 10] = [
    "manifest", "base.dict", "base.post", "ord.dict", "ord.post", "ord.nsw", "pair.dict",
    "pair.post", "tri.dict", "tri.post",
];

pub const FL_LIST_FILE: &str = "fl_list";
pub const LEMMAS_FILE: &str = "lemmas";
pub const DOCS_MAP_FILE: &str = "docs.map";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    Baseline,
    Ordinary,
    Pair,
    Triple,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] = [IndexKind::Baseline, IndexKind::Ordinary, IndexKind::Pair, IndexKind::Triple];

    pub fn prefix(self) -> &'static str {
        match self {
            IndexKind::Baseline => "base",
            IndexKind::Ordinary => "ord",
            IndexKind::Pair => "pair",
            IndexKind::Triple => "tri",
        }
    }
}

pub fn pair_key(w: &str, v: &str) -> String {
    format!("{w}{KEY_SEP}{v}")
}

pub fn triple_key(f: &str, s: &str, t: &str) -> String {
    format!("{f}{KEY_SEP}{s}{KEY_SEP}{t}")
}

/// Parameters and integrity data of an index directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub format_version: u32,
    pub sw_count: u32,
    pub fu_count: u32,
    pub max_distance: u32,
    pub doc_count: u32,
    pub keys: BTreeMap<IndexKind, u64>,
    pub postings: BTreeMap<IndexKind, u64>,
    /// file name → (byte size, sha256 hex)
    pub files: BTreeMap<String, (u64, String)>,
}

impl Manifest {
    pub fn lexicon_config(&self) -> LexiconConfig {
        LexiconConfig {
            sw_count: self.sw_count,
            fu_count: self.fu_count,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version={}", self.format_version);
        let _ = writeln!(out, "sw_count={}", self.sw_count);
        let _ = writeln!(out, "fu_count={}", self.fu_count);
        let _ = writeln!(out, "max_distance={}", self.max_distance);
        let _ = writeln!(out, "doc_count={}", self.doc_count);
        for kind in IndexKind::ALL {
            let _ = writeln!(out, "keys.{}={}", kind.prefix(), self.keys.get(&kind).copied().unwrap_or(0));
            let _ = writeln!(out, "postings.{}={}", kind.prefix(), self.postings.get(&kind).copied().unwrap_or(0));
        }
        for (name, (size, sum)) in &self.files {
            let _ = writeln!(out, "size.{name}={size}");
            let _ = writeln!(out, "checksum.{name}={sum}");
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                message: "expected key=value".into(),
            })?;
            kv.insert(k.to_owned(), v.to_owned());
        }
        let num = |k: &str| -> Result<u64> {
            kv.get(k)
                .ok_or_else(|| Error::Corrupt {
                    file: "manifest".into(),
                    message: format!("missing {k}"),
                })?
                .parse()
                .map_err(|_| Error::Corrupt {
                    file: "manifest".into(),
                    message: format!("bad value for {k}"),
                })
        };
        let format_version = num("format_version")? as u32;
        if format_version != FORMAT_VERSION {
            return Err(Error::ManifestMismatch(format!(
                "format_version {format_version}, expected {FORMAT_VERSION}"
            )));
        }
        let mut m = Manifest {
            format_version,
            sw_count: num("sw_count")? as u32,
            fu_count: num("fu_count")? as u32,
            max_distance: num("max_distance")? as u32,
            doc_count: num("doc_count")? as u32,
            keys: BTreeMap::new(),
            postings: BTreeMap::new(),
            files: BTreeMap::new(),
        };
        for kind in IndexKind::ALL {
            m.keys.insert(kind, num(&format!("keys.{}", kind.prefix()))?);
            m.postings.insert(kind, num(&format!("postings.{}", kind.prefix()))?);
        }
        for (k, v) in &kv {
            if let Some(name) = k.strip_prefix("checksum.") {
                let size = num(&format!("size.{name}"))?;
                m.files.insert(name.to_owned(), (size, v.clone()));
            }
        }
        Ok(m)
    }
}

struct HashingWriter {
    inner: BufWriter<File>,
    hasher: Sha256,
    written: u64,
}

impl HashingWriter {
    fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(HashingWriter {
            inner: BufWriter::with_capacity(1 << 20, f),
            hasher: Sha256::new(),
            written: 0,
        })
    }

    fn put(&mut self, bytes: &[u8], path: &Path) -> Result<()> {
        self.hasher.update(bytes);
        self.written += bytes.len() as u64;
        self.inner.write_all(bytes).map_err(|e| Error::io(path, e))
    }

    fn finish(mut self, path: &Path) -> Result<(u64, String)> {
        self.inner.flush().map_err(|e| Error::io(path, e))?;
        self.inner
            .get_ref()
            .sync_all()
            .map_err(|e| Error::io(path, e))?;
        Ok((self.written, hex::encode(self.hasher.finalize())))
    }
}

/// A dict file and one or two streams written together.
struct StreamSet {
    dir: PathBuf,
    names: Vec<String>,
    writers: Vec<HashingWriter>,
}

impl StreamSet {
    fn create(dir: &Path, names: &[&str]) -> Result<Self> {
        let writers = names
            .iter()
            .map(|n| HashingWriter::create(&dir.join(n)))
            .collect::<Result<_>>()?;
        Ok(StreamSet {
            dir: dir.to_owned(),
            names: names.iter().map(|s| s.to_string()).collect(),
            writers,
        })
    }

    fn offset(&self, i: usize) -> u64 {
        self.writers[i].written
    }

    fn put(&mut self, i: usize, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(&self.names[i]);
        self.writers[i].put(bytes, &path)
    }

    fn finish(self, files: &mut BTreeMap<String, (u64, String)>) -> Result<()> {
        for (name, w) in self.names.into_iter().zip(self.writers) {
            let entry = w.finish(&self.dir.join(&name))?;
            files.insert(name, entry);
        }
        Ok(())
    }
}

fn write_plain(dir: &Path, name: &str, contents: &str, files: &mut BTreeMap<String, (u64, String)>) -> Result<()> {
    let path = dir.join(name);
    let mut w = HashingWriter::create(&path)?;
    w.put(contents.as_bytes(), &path)?;
    files.insert(name.to_owned(), w.finish(&path)?);
    Ok(())
}

/// Writes a complete index directory. `dir` must be empty or absent.
pub fn write_index_dir(
    dir: &Path,
    built: &BuiltIndexes,
    lexicon: &Lexicon,
    store: &DocumentStore,
) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    let mut keys = BTreeMap::new();
    let mut postings = BTreeMap::new();
    let name = |id: u32| lexicon.by_id(id).lemma.as_str();
    let mut blob = Vec::new();

    // baseline
    {
        let mut order: Vec<u32> = (0..built.baseline.len() as u32)
            .filter(|&i| built.baseline[i as usize].count() > 0)
            .collect();
        order.sort_by(|&a, &b| name(a).cmp(name(b)));
        let mut s = StreamSet::create(dir, &["base.dict", "base.post"])?;
        let mut total = 0;
        for &id in &order {
            let enc = &built.baseline[id as usize];
            blob.clear();
            enc.write_to(&mut blob);
            let line = format!("{}\t{}\t{}\t{}\n", name(id), s.offset(1), blob.len(), enc.count());
            s.put(0, line.as_bytes())?;
            s.put(1, &blob)?;
            total += enc.count();
        }
        s.finish(&mut files)?;
        keys.insert(IndexKind::Baseline, order.len() as u64);
        postings.insert(IndexKind::Baseline, total);
    }

    // ordinary + NSW
    {
        let mut order: Vec<u32> = (0..built.ordinary.len() as u32)
            .filter(|&i| built.ordinary[i as usize].postings.count() > 0)
            .collect();
        order.sort_by(|&a, &b| name(a).cmp(name(b)));
        let mut s = StreamSet::create(dir, &["ord.dict", "ord.post", "ord.nsw"])?;
        let mut total = 0;
        for &id in &order {
            let stream = &built.ordinary[id as usize];
            blob.clear();
            stream.postings.write_to(&mut blob);
            let line = format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                name(id),
                s.offset(1),
                blob.len(),
                s.offset(2),
                stream.nsw.len(),
                stream.postings.count()
            );
            s.put(0, line.as_bytes())?;
            s.put(1, &blob)?;
            s.put(2, &stream.nsw)?;
            total += stream.postings.count();
        }
        s.finish(&mut files)?;
        keys.insert(IndexKind::Ordinary, order.len() as u64);
        postings.insert(IndexKind::Ordinary, total);
    }

    // pair
    {
        let mut order: Vec<(String, &super::codec::PostingEncoder)> = built
            .pair
            .iter()
            .map(|(&(w, v), enc)| (pair_key(name(w), name(v)), enc))
            .collect();
        order.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (n, total) = write_keyed(dir, "pair", &order, &mut files, &mut blob)?;
        keys.insert(IndexKind::Pair, n);
        postings.insert(IndexKind::Pair, total);
    }

    // triple
    {
        let mut order: Vec<(String, &super::codec::PostingEncoder)> = built
            .triple
            .iter()
            .map(|(&(f, s, t), enc)| (triple_key(name(f), name(s), name(t)), enc))
            .collect();
        order.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (n, total) = write_keyed(dir, "tri", &order, &mut files, &mut blob)?;
        keys.insert(IndexKind::Triple, n);
        postings.insert(IndexKind::Triple, total);
    }

    write_plain(dir, FL_LIST_FILE, &lexicon.fl_list_text(), &mut files)?;
    write_plain(dir, LEMMAS_FILE, &lexicon.dictionary().to_text(), &mut files)?;
    write_plain(dir, DOCS_MAP_FILE, &store.docs_map(), &mut files)?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        sw_count: lexicon.config().sw_count,
        fu_count: lexicon.config().fu_count,
        max_distance: built.max_distance,
        doc_count: built.doc_count,
        keys,
        postings,
        files,
    };
    let path = dir.join("manifest");
    fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn write_keyed(
    dir: &Path,
    prefix: &str,
    order: &[(String, &super::codec::PostingEncoder)],
    files: &mut BTreeMap<String, (u64, String)>,
    blob: &mut Vec<u8>,
) -> Result<(u64, u64)> {
    let dict = format!("{prefix}.dict");
    let post = format!("{prefix}.post");
    let mut s = StreamSet::create(dir, &[&dict, &post])?;
    let mut total = 0;
    let mut line = String::new();
    for (key, enc) in order {
        blob.clear();
        enc.write_to(blob);
        line.clear();
        let _ = writeln!(line, "{}\t{}\t{}\t{}", key, s.offset(1), blob.len(), enc.count());
        s.put(0, line.as_bytes())?;
        s.put(1, blob)?;
        total += enc.count();
    }
    s.finish(files)?;
    Ok((order.len() as u64, total))
}

/// Builds into a sibling temporary directory and renames it over `dir`, so
/// readers never observe a half-written index.
pub fn write_index_dir_atomic(
    dir: &Path,
    built: &BuiltIndexes,
    lexicon: &Lexicon,
    store: &DocumentStore,
) -> Result<Manifest> {
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let base = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "index".into());
    let tmp = parent.join(format!(".{base}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    let manifest = match write_index_dir(&tmp, built, lexicon, store) {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e);
        }
    };
    if dir.exists() {
        let old = parent.join(format!(".{base}.old-{}", std::process::id()));
        fs::rename(dir, &old).map_err(|e| Error::io(dir, e))?;
        fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))?;
        fs::remove_dir_all(&old).map_err(|e| Error::io(&old, e))?;
    } else {
        fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(manifest)
}

/// Location of one key's data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DictEntry {
    pub offset: u64,
    pub length: u64,
    pub nsw_offset: u64,
    pub nsw_length: u64,
    pub count: u64,
}

/// Sorted dictionary file kept in memory as raw bytes.
struct DictTable {
    name: String,
    data: Vec<u8>,
    lines: Vec<(u32, u32)>,
    with_nsw: bool,
}

impl DictTable {
    fn load(dir: &Path, name: &str, with_nsw: bool) -> Result<Self> {
        let path = dir.join(name);
        let data = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = Vec::new();
        let mut start = 0usize;
        for (i, &b) in data.iter().enumerate() {
            if b == b'\n' {
                lines.push((start as u32, i as u32));
                start = i + 1;
            }
        }
        if start != data.len() {
            return Err(Error::Corrupt {
                file: name.into(),
                message: "missing trailing newline".into(),
            });
        }
        Ok(DictTable {
            name: name.into(),
            data,
            lines,
            with_nsw,
        })
    }

    fn key_of(&self, line: (u32, u32)) -> &[u8] {
        let l = &self.data[line.0 as usize..line.1 as usize];
        let end = l.iter().position(|&b| b == b'\t').unwrap_or(l.len());
        &l[..end]
    }

    fn len(&self) -> usize {
        self.lines.len()
    }

    fn lookup(&self, key: &str) -> Result<Option<DictEntry>> {
        let key = key.as_bytes();
        let Ok(i) = self.lines.binary_search_by(|&line| self.key_of(line).cmp(key)) else {
            return Ok(None);
        };
        self.parse(i).map(Some)
    }

    fn parse(&self, i: usize) -> Result<DictEntry> {
        let (s, e) = self.lines[i];
        let line = std::str::from_utf8(&self.data[s as usize..e as usize]).map_err(|_| self.bad(i))?;
        let nums: Vec<u64> = line
            .split('\t')
            .skip(1)
            .map(|f| f.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.bad(i))?;
        match (self.with_nsw, nums.as_slice()) {
            (false, &[offset, length, count]) => Ok(DictEntry {
                offset,
                length,
                nsw_offset: 0,
                nsw_length: 0,
                count,
            }),
            (true, &[offset, length, nsw_offset, nsw_length, count]) => Ok(DictEntry {
                offset,
                length,
                nsw_offset,
                nsw_length,
                count,
            }),
            _ => Err(self.bad(i)),
        }
    }

    fn bad(&self, i: usize) -> Error {
        Error::Corrupt {
            file: self.name.clone(),
            message: format!("malformed row {}", i + 1),
        }
    }

    fn entries(&self) -> impl Iterator<Item = Result<(String, DictEntry)>> + '_ {
        (0..self.lines.len()).map(move |i| {
            let key = String::from_utf8_lossy(self.key_of(self.lines[i])).into_owned();
            self.parse(i).map(|e| (key, e))
        })
    }
}

struct BlobFile {
    name: String,
    file: File,
    size: u64,
}

impl BlobFile {
    fn open(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(name);
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let size = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        Ok(BlobFile {
            name: name.into(),
            file,
            size,
        })
    }

    fn read(&self, offset: u64, length: u64) -> Result<Vec<u8>> {
        if offset.checked_add(length).is_none_or(|end| end > self.size) {
            return Err(Error::Corrupt {
                file: self.name.clone(),
                message: format!("range {offset}+{length} beyond end of file"),
            });
        }
        let mut buf = vec![0u8; length as usize];
        read_at(&self.file, &mut buf, offset).map_err(|e| Error::io(&self.name, e))?;
        Ok(buf)
    }

    fn codec_err(&self, offset: u64, e: CodecError) -> Error {
        Error::Codec {
            file: self.name.clone(),
            source: e.shifted(offset as usize),
        }
    }
}

#[cfg(unix)]
fn read_at(file: &File, buf: &mut [u8], offset: u64) -> std::io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, offset)
}

#[cfg(windows)]
fn read_at(file: &File, mut buf: &mut [u8], mut offset: u64) -> std::io::Result<()> {
    use std::os::windows::fs::FileExt;
    while !buf.is_empty() {
        let n = file.seek_read(buf, offset)?;
        if n == 0 {
            return Err(std::io::ErrorKind::UnexpectedEof.into());
        }
        buf = &mut buf[n..];
        offset += n as u64;
    }
    Ok(())
}

/// Decoded postings of one key together with the bytes it cost to read them.
#[derive(Debug, Clone)]
pub struct Fetched<R> {
    pub postings: Vec<R>,
    pub bytes_read: u64,
    /// NSW bytes belonging to this key that were not read.
    pub nsw_skipped: u64,
}

impl<R> Fetched<R> {
    fn empty() -> Self {
        Fetched {
            postings: Vec::new(),
            bytes_read: 0,
            nsw_skipped: 0,
        }
    }
}

/// Ordinary-index postings with their NSW records, when requested.
#[derive(Debug, Clone)]
pub struct OrdinaryFetched {
    pub postings: Vec<OrdinaryPosting>,
    pub nsw: Option<Vec<Vec<NswEntry>>>,
    pub bytes_read: u64,
    pub nsw_skipped: u64,
}

struct KeyedIndex {
    dict: DictTable,
    post: BlobFile,
    nsw: Option<BlobFile>,
}

impl KeyedIndex {
    fn open(dir: &Path, kind: IndexKind) -> Result<Self> {
        let p = kind.prefix();
        let with_nsw = kind == IndexKind::Ordinary;
        Ok(KeyedIndex {
            dict: DictTable::load(dir, &format!("{p}.dict"), with_nsw)?,
            post: BlobFile::open(dir, &format!("{p}.post"))?,
            nsw: if with_nsw { Some(BlobFile::open(dir, &format!("{p}.nsw"))?) } else { None },
        })
    }

    fn fetch<R: PostingRecord>(&self, key: &str) -> Result<Fetched<R>> {
        let Some(e) = self.dict.lookup(key)? else {
            return Ok(Fetched::empty());
        };
        let bytes = self.post.read(e.offset, e.length)?;
        let postings = decode_postings::<R>(&bytes).map_err(|err| self.post.codec_err(e.offset, err))?;
        if postings.len() as u64 != e.count {
            return Err(Error::Corrupt {
                file: self.post.name.clone(),
                message: format!("key {key:?}: dictionary count {} but {} postings", e.count, postings.len()),
            });
        }
        Ok(Fetched {
            postings,
            bytes_read: e.length,
            nsw_skipped: e.nsw_length,
        })
    }
}

/// Read-only view of an index directory.
pub struct IndexSet {
    dir: PathBuf,
    manifest: Manifest,
    base: KeyedIndex,
    ord: KeyedIndex,
    pair: KeyedIndex,
    tri: KeyedIndex,
}

impl IndexSet {
    /// Opens `dir`, checking that every index file is present with the size
    /// recorded in the manifest.
    pub fn open(dir: &Path) -> Result<Self> {
        let mpath = dir.join("manifest");
        if !mpath.exists() {
            return Err(Error::MissingIndex(format!("{} (no manifest)", dir.display())));
        }
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest = Manifest::parse(&text, &mpath)?;
        let names: Vec<&str> = INDEX_FILES.iter().skip(1).chain(&[FL_LIST_FILE, LEMMAS_FILE, DOCS_MAP_FILE]).copied().collect();
        let metas = names
            .iter()
            .map(|name| fs::metadata(dir.join(name)).map_err(|_| Error::MissingIndex((*name).to_owned())))
            .collect::<Result<Vec<_>>>()?;
        for (name, meta) in names.iter().zip(metas) {
            match manifest.files.get(*name) {
                Some(&(size, _)) if size == meta.len() => {}
                Some(&(size, _)) => {
                    return Err(Error::ManifestMismatch(format!(
                        "{name} is {} bytes, manifest says {size}",
                        meta.len()
                    )))
                }
                None => return Err(Error::ManifestMismatch(format!("{name} not listed in manifest"))),
            }
        }
        Ok(IndexSet {
            dir: dir.to_owned(),
            base: KeyedIndex::open(dir, IndexKind::Baseline)?,
            ord: KeyedIndex::open(dir, IndexKind::Ordinary)?,
            pair: KeyedIndex::open(dir, IndexKind::Pair)?,
            tri: KeyedIndex::open(dir, IndexKind::Triple)?,
            manifest,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn max_distance(&self) -> u32 {
        self.manifest.max_distance
    }

    /// Recomputes every file checksum and compares it with the manifest.
    pub fn verify_checksums(&self) -> Result<()> {
        for (name, (_, want)) in &self.manifest.files {
            let path = self.dir.join(name);
            let mut f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            let mut h = Sha256::new();
            std::io::copy(&mut f, &mut h).map_err(|e| Error::io(&path, e))?;
            let got = hex::encode(h.finalize());
            if &got != want {
                return Err(Error::ManifestMismatch(format!("checksum of {name} differs")));
            }
        }
        Ok(())
    }

    /// Lexicon stored alongside the index.
    pub fn load_lexicon(&self) -> Result<Lexicon> {
        let dpath = self.dir.join(LEMMAS_FILE);
        let dict = LemmaDictionary::load(&dpath)?;
        let fpath = self.dir.join(FL_LIST_FILE);
        let text = fs::read_to_string(&fpath).map_err(|e| Error::io(&fpath, e))?;
        Lexicon::parse_fl_list(&text, &fpath, dict, self.manifest.lexicon_config())
    }

    /// Document store for the corpus at `root`, using the stored `docs.map`.
    pub fn load_store(&self, root: &Path) -> Result<DocumentStore> {
        DocumentStore::from_map(root, &self.dir.join(DOCS_MAP_FILE))
    }

    pub fn baseline(&self, lemma: &str) -> Result<Fetched<OrdinaryPosting>> {
        self.base.fetch(lemma)
    }

    pub fn ordinary(&self, lemma: &str, with_nsw: bool) -> Result<OrdinaryFetched> {
        let f = self.ord.fetch::<OrdinaryPosting>(lemma)?;
        if !with_nsw || f.postings.is_empty() {
            return Ok(OrdinaryFetched {
                postings: f.postings,
                nsw: None,
                bytes_read: f.bytes_read,
                nsw_skipped: f.nsw_skipped,
            });
        }
        let e = self.ord.dict.lookup(lemma)?.expect("key fetched above");
        let nsw_file = self.ord.nsw.as_ref().expect("ordinary index has an NSW stream");
        let bytes = nsw_file.read(e.nsw_offset, e.nsw_length)?;
        let mut reader = NswReader::new(&bytes);
        let mut records = Vec::with_capacity(f.postings.len());
        for _ in 0..f.postings.len() {
            records.push(
                reader
                    .next_record()
                    .map_err(|err| nsw_file.codec_err(e.nsw_offset, err))?,
            );
        }
        if !reader.is_done() {
            return Err(Error::Corrupt {
                file: nsw_file.name.clone(),
                message: format!("key {lemma:?}: NSW stream longer than its postings"),
            });
        }
        Ok(OrdinaryFetched {
            postings: f.postings,
            nsw: Some(records),
            bytes_read: f.bytes_read + e.nsw_length,
            nsw_skipped: 0,
        })
    }

    pub fn pair(&self, w: &str, v: &str) -> Result<Fetched<super::codec::PairPosting>> {
        self.pair.fetch(&pair_key(w, v))
    }

    pub fn triple(&self, f: &str, s: &str, t: &str) -> Result<Fetched<super::codec::TriplePosting>> {
        self.tri.fetch(&triple_key(f, s, t))
    }

    pub fn key_count(&self, kind: IndexKind) -> usize {
        self.keyed(kind).dict.len()
    }

    fn keyed(&self, kind: IndexKind) -> &KeyedIndex {
        match kind {
            IndexKind::Baseline => &self.base,
            IndexKind::Ordinary => &self.ord,
            IndexKind::Pair => &self.pair,
            IndexKind::Triple => &self.tri,
        }
    }

    /// Every `(key, entry)` of one index in dictionary order.
    pub fn dict_entries(&self, kind: IndexKind) -> Result<Vec<(String, DictEntry)>> {
        self.keyed(kind).dict.entries().collect()
    }

    /// Size of a file in the index directory as recorded in the manifest.
    pub fn file_size(&self, name: &str) -> u64 {
        self.manifest.files.get(name).map(|f| f.0).unwrap_or(0)
    }
}
