//! Binary checkpoint format for truncated graphs.
//!
//! Layout (integers are LEB128 unless noted):
//! magic `CGTG`, version (u32 LE), kind byte `G`/`H`, group id string,
//! covered radius, vertex count, then per vertex its witness length
//! and packed witness bytes, the last-letter byte per vertex (kind H only),
//! the identity vertex list as gaps, per vertex the out-degree followed by
//! `(label byte, zigzag target delta)` pairs, and the checkpoint list as
//! gaps.

use crate::error::{Error, Result};
use crate::groups::GroupId;
use crate::words::Word;

use super::{Csr, GraphKind, TruncatedGraph, WitnessStore, NO_SYMBOL};

const MAGIC: &[u8; 4] = b"CGTG";
pub const FORMAT_VERSION: u32 = 1;

fn put_uint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

pub(super) fn encode(graph: &TruncatedGraph) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(graph.kind.as_str().as_bytes()[0]);
    let group = graph.group.to_string();
    put_uint(&mut out, group.len() as u64);
    out.extend_from_slice(group.as_bytes());
    put_uint(&mut out, graph.covered as u64);
    let n = graph.vertices();
    put_uint(&mut out, n as u64);
    for v in 0..n {
        let w = graph.witness(v);
        put_uint(&mut out, w.len() as u64);
        out.extend_from_slice(&w.to_packed_bytes());
    }
    if graph.kind == GraphKind::H {
        out.extend_from_slice(&graph.last);
    }
    put_uint(&mut out, graph.identity_vertices.len() as u64);
    let mut prev = 0u64;
    for &v in &graph.identity_vertices {
        put_uint(&mut out, v as u64 - prev);
        prev = v as u64;
    }
    for v in 0..n {
        let row = graph.adjacency.row(v);
        put_uint(&mut out, row.len() as u64);
        let mut prev = v as i64;
        for (&t, &l) in row.iter().zip(graph.adjacency.row_labels(v)) {
            out.push(l);
            put_uint(&mut out, zigzag(t as i64 - prev));
            prev = t as i64;
        }
    }
    put_uint(&mut out, graph.checkpoints.len() as u64);
    let mut prev = 0u64;
    for &c in &graph.checkpoints {
        put_uint(&mut out, c as u64 - prev);
        prev = c as u64;
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("graph checkpoint: {what} at byte {}", self.pos)))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return self.fail("unexpected end of data");
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn uint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            let part = (b & 0x7f) as u64;
            if shift == 63 && part > 1 {
                return self.fail("integer overflow");
            }
            v |= part << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        self.fail("integer too long")
    }

    /// An integer that must be at most `max`.
    fn bounded(&mut self, max: u64, what: &str) -> Result<u64> {
        let v = self.uint()?;
        if v > max {
            return self.fail(&format!("{what} {v} exceeds {max}"));
        }
        Ok(v)
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<TruncatedGraph> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return r.fail("bad magic");
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("four bytes"));
    if version != FORMAT_VERSION {
        return r.fail(&format!("unsupported version {version}"));
    }
    let kind = match r.byte()? {
        b'G' => GraphKind::G,
        b'H' => GraphKind::H,
        _ => return r.fail("bad graph kind"),
    };
    let len = r.bounded(64, "group id length")? as usize;
    let group: GroupId = std::str::from_utf8(r.take(len)?)
        .map_err(|_| Error::Parse("graph checkpoint: group id is not UTF-8".into()))?
        .parse()?;
    let covered = r.uint()? as usize;
    let size = group.alphabet_size();
    let alphabet = group.alphabet();
    // every vertex needs at least two bytes (witness length and degree)
    let n = r.bounded((bytes.len() / 2) as u64, "vertex count")? as usize;
    if n == 0 || n > u32::MAX as usize {
        return r.fail("vertex count out of range");
    }
    let mut witnesses = WitnessStore::new(alphabet.bits_per_symbol());
    for _ in 0..n {
        let len = r.bounded(((bytes.len() - r.pos) * 8) as u64, "witness length")? as usize;
        let packed = r.take((len * alphabet.bits_per_symbol() as usize).div_ceil(8))?;
        let w = Word::from_packed_bytes(packed, len, size)?;
        for s in w.iter() {
            witnesses.push_symbol(s.index() as u8);
        }
        witnesses.finish_word();
    }
    // H states are ordered by the element search, so their witness lengths
    // may drop by one from state to state
    let monotone = match kind {
        GraphKind::G => (1..n).all(|v| witnesses.word_len(v - 1) <= witnesses.word_len(v)),
        GraphKind::H => (1..n).all(|v| witnesses.word_len(v - 1) <= witnesses.word_len(v) + 1),
    };
    let deepest = (0..n).map(|v| witnesses.word_len(v)).max().unwrap_or(0);
    if !monotone || covered > deepest {
        return r.fail("witness depths must be nondecreasing and cover the stated radius");
    }
    if witnesses.word_len(0) != 0 {
        return r.fail("vertex 0 must have the empty witness");
    }
    let mut last = Vec::new();
    if kind == GraphKind::H {
        last = r.take(n)?.to_vec();
        if last[0] != NO_SYMBOL || last[1..].iter().any(|&s| s as usize >= size) {
            return r.fail("bad last-letter table");
        }
        if (1..n).any(|v| witnesses.word_len(v) == 0 || witnesses.symbol_at(witnesses.starts[v + 1] - 1) != last[v]) {
            return r.fail("witness does not end in the state's last letter");
        }
    }
    let ids = r.bounded(n as u64, "identity vertex count")? as usize;
    let mut identity_vertices = Vec::with_capacity(ids);
    let mut prev = 0u64;
    for i in 0..ids {
        let gap = r.bounded(n as u64, "identity vertex gap")?;
        let v = prev + gap;
        if v >= n as u64 || (i > 0 && gap == 0) {
            return r.fail("identity vertex list is not strictly increasing in range");
        }
        identity_vertices.push(v as u32);
        prev = v;
    }
    if identity_vertices.first() != Some(&0) {
        return r.fail("vertex 0 must be an identity vertex");
    }
    let mut adjacency = Csr::empty();
    for v in 0..n {
        let degree = r.bounded(size as u64, "out-degree")?;
        let mut prev = v as i64;
        for _ in 0..degree {
            let label = r.byte()?;
            if label as usize >= size {
                return r.fail("edge label out of range");
            }
            let t = prev.checked_add(unzigzag(r.uint()?));
            match t {
                Some(t) if (0..n as i64).contains(&t) => {
                    adjacency.targets.push(t as u32);
                    adjacency.labels.push(label);
                    prev = t;
                }
                _ => return r.fail("edge target out of range"),
            }
        }
        adjacency.offsets.push(adjacency.targets.len() as u64);
    }
    let count = r.bounded(n as u64, "checkpoint count")? as usize;
    let mut checkpoints = Vec::with_capacity(count);
    let mut prev = 0u64;
    for _ in 0..count {
        let gap = r.bounded(n as u64, "checkpoint gap")?;
        let c = prev + gap;
        if gap == 0 || c > n as u64 {
            return r.fail("checkpoints must increase and stay within the graph");
        }
        checkpoints.push(c as usize);
        prev = c;
    }
    if r.pos != bytes.len() {
        return r.fail("trailing bytes");
    }
    Ok(TruncatedGraph {
        group,
        kind,
        witnesses,
        last,
        identity_vertices,
        adjacency,
        checkpoints,
        covered,
    })
}
