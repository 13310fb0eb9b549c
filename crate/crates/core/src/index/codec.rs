//! Posting list byte format.
//!
//! A posting blob is `varint(count)` followed by `count` records. Every
//! integer is a base-128 varint (low 7-bit group first, high bit set on all
//! but the last byte). Document ids are delta-coded against the previous
//! record; positions are delta-coded within a document and absolute on the
//! first record of each document. Signed distances are zigzag-coded.
//!
//! NSW streams hold one record per posting: `varint(byte_len)` followed by
//! `(varint(stop_fl), zigzag(offset))` pairs, so a reader can jump over a
//! record without decoding it.

use crate::{DocId, Position};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("truncated varint at byte {offset}")]
    Truncated { offset: usize },
    #[error("varint overflow at byte {offset}")]
    Overflow { offset: usize },
    #[error("{message} at byte {offset}")]
    Invalid { offset: usize, message: &'static str },
}

impl CodecError {
    pub fn offset(&self) -> usize {
        match self {
            CodecError::Truncated { offset }
            | CodecError::Overflow { offset }
            | CodecError::Invalid { offset, .. } => *offset,
        }
    }

    /// Same error with its offset moved by `base` bytes.
    pub fn shifted(self, base: usize) -> Self {
        match self {
            CodecError::Truncated { offset } => CodecError::Truncated { offset: offset + base },
            CodecError::Overflow { offset } => CodecError::Overflow { offset: offset + base },
            CodecError::Invalid { offset, message } => CodecError::Invalid {
                offset: offset + base,
                message,
            },
        }
    }
}

pub fn write_varint(buf: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        buf.push((v as u8) | 0x80);
        v >>= 7;
    }
    buf.push(v as u8);
}

pub fn read_varint(data: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let start = *pos;
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let Some(&byte) = data.get(*pos) else {
            return Err(CodecError::Truncated { offset: start });
        };
        *pos += 1;
        let payload = (byte & 0x7f) as u64;
        if shift == 63 && payload > 1 || shift > 63 {
            return Err(CodecError::Overflow { offset: start });
        }
        value |= payload << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

pub fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn read_u32(data: &[u8], pos: &mut usize, what: &'static str) -> Result<u32, CodecError> {
    let at = *pos;
    let v = read_varint(data, pos)?;
    u32::try_from(v).map_err(|_| CodecError::Invalid { offset: at, message: what })
}

fn read_i32(data: &[u8], pos: &mut usize, what: &'static str) -> Result<i32, CodecError> {
    let at = *pos;
    let v = unzigzag(read_varint(data, pos)?);
    i32::try_from(v).map_err(|_| CodecError::Invalid { offset: at, message: what })
}

/// A record type storable in a posting blob.
pub trait PostingRecord: Copy {
    fn doc_id(&self) -> DocId;
    fn position(&self) -> Position;
    fn write_extra(&self, buf: &mut Vec<u8>);
    fn read(doc_id: DocId, position: Position, data: &[u8], pos: &mut usize) -> Result<Self, CodecError>;
}

/// `(ID, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinaryPosting {
    pub doc_id: DocId,
    pub position: Position,
}

/// `(ID, P, d)` under key `(w, v)`: `P` is the position of `w` and
/// `d = position(v) − P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairPosting {
    pub doc_id: DocId,
    pub position: Position,
    pub distance: i32,
}

/// `(ID, P, d1, d2)` under key `(f, s, t)`: `P` is the position of `f`,
/// `d1 = position(s) − P`, `d2 = position(t) − P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePosting {
    pub doc_id: DocId,
    pub position: Position,
    pub d1: i32,
    pub d2: i32,
}

impl PostingRecord for OrdinaryPosting {
    fn doc_id(&self) -> DocId {
        self.doc_id
    }
    fn position(&self) -> Position {
        self.position
    }
    fn write_extra(&self, _buf: &mut Vec<u8>) {}
    fn read(doc_id: DocId, position: Position, _: &[u8], _: &mut usize) -> Result<Self, CodecError> {
        Ok(OrdinaryPosting { doc_id, position })
    }
}

impl PostingRecord for PairPosting {
    fn doc_id(&self) -> DocId {
        self.doc_id
    }
    fn position(&self) -> Position {
        self.position
    }
    fn write_extra(&self, buf: &mut Vec<u8>) {
        write_varint(buf, zigzag(self.distance as i64));
    }
    fn read(doc_id: DocId, position: Position, data: &[u8], pos: &mut usize) -> Result<Self, CodecError> {
        Ok(PairPosting {
            doc_id,
            position,
            distance: read_i32(data, pos, "distance out of range")?,
        })
    }
}

impl PostingRecord for TriplePosting {
    fn doc_id(&self) -> DocId {
        self.doc_id
    }
    fn position(&self) -> Position {
        self.position
    }
    fn write_extra(&self, buf: &mut Vec<u8>) {
        write_varint(buf, zigzag(self.d1 as i64));
        write_varint(buf, zigzag(self.d2 as i64));
    }
    fn read(doc_id: DocId, position: Position, data: &[u8], pos: &mut usize) -> Result<Self, CodecError> {
        Ok(TriplePosting {
            doc_id,
            position,
            d1: read_i32(data, pos, "distance out of range")?,
            d2: read_i32(data, pos, "distance out of range")?,
        })
    }
}

/// Incremental encoder for one key. Records must arrive in `(doc, position)`
/// order.
#[derive(Debug, Clone, Default)]
pub struct PostingEncoder {
    body: Vec<u8>,
    count: u64,
    last_doc: DocId,
    last_pos: Position,
}

impl PostingEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push<R: PostingRecord>(&mut self, rec: &R) -> Result<(), CodecError> {
        let (doc, pos) = (rec.doc_id(), rec.position());
        let offset = self.body.len();
        if self.count > 0 && (doc < self.last_doc || doc == self.last_doc && pos < self.last_pos) {
            return Err(CodecError::Invalid {
                offset,
                message: "records out of (doc, position) order",
            });
        }
        if self.count == 0 || doc != self.last_doc {
            let base = if self.count == 0 { 0 } else { self.last_doc };
            write_varint(&mut self.body, (doc - base) as u64);
            write_varint(&mut self.body, pos as u64);
        } else {
            write_varint(&mut self.body, 0);
            write_varint(&mut self.body, (pos - self.last_pos) as u64);
        }
        rec.write_extra(&mut self.body);
        self.last_doc = doc;
        self.last_pos = pos;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Size of the finished blob.
    pub fn encoded_len(&self) -> usize {
        let mut head = Vec::with_capacity(10);
        write_varint(&mut head, self.count);
        head.len() + self.body.len()
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        write_varint(out, self.count);
        out.extend_from_slice(&self.body);
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.body.len() + 10);
        self.write_to(&mut out);
        out
    }
}

pub fn encode_postings<R: PostingRecord>(records: &[R]) -> Result<Vec<u8>, CodecError> {
    let mut enc = PostingEncoder::new();
    for r in records {
        enc.push(r)?;
    }
    Ok(enc.finish())
}

pub fn decode_postings<R: PostingRecord>(data: &[u8]) -> Result<Vec<R>, CodecError> {
    let mut pos = 0usize;
    let count = read_varint(data, &mut pos)?;
    if count > data.len() as u64 {
        return Err(CodecError::Invalid {
            offset: 0,
            message: "posting count exceeds blob size",
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut doc: DocId = 0;
    let mut position: Position = 0;
    for i in 0..count {
        let at = pos;
        let doc_delta = read_u32(data, &mut pos, "document delta out of range")?;
        let p = read_u32(data, &mut pos, "position out of range")?;
        if i == 0 || doc_delta != 0 {
            doc = doc.checked_add(doc_delta).ok_or(CodecError::Invalid {
                offset: at,
                message: "document id overflow",
            })?;
            position = p;
        } else {
            position = position.checked_add(p).ok_or(CodecError::Invalid {
                offset: at,
                message: "position overflow",
            })?;
        }
        out.push(R::read(doc, position, data, &mut pos)?);
    }
    if pos != data.len() {
        return Err(CodecError::Invalid {
            offset: pos,
            message: "trailing bytes after last posting",
        });
    }
    Ok(out)
}

/// A stop lemma near an anchor: its FL-number and signed offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NswEntry {
    pub stop_fl: u32,
    pub offset: i32,
}

/// Appends one length-prefixed NSW record.
pub fn write_nsw_record(out: &mut Vec<u8>, entries: &[NswEntry]) {
    let mut body = Vec::with_capacity(entries.len() * 3);
    for e in entries {
        write_varint(&mut body, e.stop_fl as u64);
        write_varint(&mut body, zigzag(e.offset as i64));
    }
    write_varint(out, body.len() as u64);
    out.extend_from_slice(&body);
}

/// Sequential reader over the NSW records of one key.
pub struct NswReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> NswReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        NswReader { data, pos: 0 }
    }

    fn record_bounds(&mut self) -> Result<(usize, usize), CodecError> {
        let at = self.pos;
        let len = read_varint(self.data, &mut self.pos)? as usize;
        let end = self.pos.checked_add(len).filter(|&e| e <= self.data.len());
        match end {
            Some(end) => Ok((self.pos, end)),
            None => Err(CodecError::Invalid {
                offset: at,
                message: "NSW record overruns stream",
            }),
        }
    }

    /// Skips one record without decoding its entries.
    pub fn skip(&mut self) -> Result<(), CodecError> {
        let (_, end) = self.record_bounds()?;
        self.pos = end;
        Ok(())
    }

    pub fn read_into(&mut self, out: &mut Vec<NswEntry>) -> Result<(), CodecError> {
        out.clear();
        let (mut p, end) = self.record_bounds()?;
        let body = &self.data[..end];
        while p < end {
            let stop_fl = read_u32(body, &mut p, "stop FL-number out of range")?;
            let offset = read_i32(body, &mut p, "offset out of range")?;
            out.push(NswEntry { stop_fl, offset });
        }
        self.pos = end;
        Ok(())
    }

    pub fn next_record(&mut self) -> Result<Vec<NswEntry>, CodecError> {
        let mut v = Vec::new();
        self.read_into(&mut v)?;
        Ok(v)
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.data.len()
    }
}
