use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which signal a [`SlotSeq`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    /// Channel input: `1` is intensity `A`, `0` is intensity zero.
    Input,
    /// Channel state: `1` marks a stuck slot.
    State,
    /// Receiver front-end output: `1` means at least one count.
    Output,
}

impl Track {
    fn code(self) -> u8 {
        match self {
            Track::Input => 0,
            Track::State => 1,
            Track::Output => 2,
        }
    }

    fn from_code(c: u8) -> Result<Track> {
        match c {
            0 => Ok(Track::Input),
            1 => Ok(Track::State),
            2 => Ok(Track::Output),
            _ => Err(Error::Format(format!("unknown track code {c}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Track::Input => "input",
            Track::State => "state",
            Track::Output => "output",
        }
    }
}

impl std::str::FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Track> {
        match s {
            "input" => Ok(Track::Input),
            "state" => Ok(Track::State),
            "output" => Ok(Track::Output),
            other => Err(Error::Format(format!("unknown track `{other}`"))),
        }
    }
}

/// Packed binary sequence over the slots of a block.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SlotSeq {
    words: Vec<u64>,
    len: usize,
    track: Track,
}

impl fmt::Debug for SlotSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlotSeq({}, n={}, ones={})", self.track.name(), self.len, self.count_ones())
    }
}

impl SlotSeq {
    pub fn zeros(track: Track, len: usize) -> Self {
        SlotSeq {
            words: vec![0; len.div_ceil(64)],
            len,
            track,
        }
    }

    pub fn ones(track: Track, len: usize) -> Self {
        let mut s = SlotSeq {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
            track,
        };
        s.clear_tail();
        s
    }

    pub fn from_bools(track: Track, bits: &[bool]) -> Self {
        let mut s = SlotSeq::zeros(track, bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b {
                s.set(j, true);
            }
        }
        s
    }

    /// Sequence of length `len` with ones exactly at `positions`.
    pub fn from_positions(track: Track, len: usize, positions: &[usize]) -> Result<Self> {
        let mut s = SlotSeq::zeros(track, len);
        for &j in positions {
            if j >= len {
                return Err(Error::IndexOutOfRange {
                    what: "slot",
                    value: j as u64,
                    limit: len as u64,
                });
            }
            s.set(j, true);
        }
        Ok(s)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn track(&self) -> Track {
        self.track
    }

    pub fn with_track(mut self, track: Track) -> Self {
        self.track = track;
        self
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len, "slot {j} out of range {}", self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, bit: bool) {
        assert!(j < self.len, "slot {j} out of range {}", self.len);
        let mask = 1u64 << (j % 64);
        if bit {
            self.words[j / 64] |= mask;
        } else {
            self.words[j / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions of the ones, in increasing order.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    fn check_len(&self, other: &SlotSeq) -> Result<()> {
        if self.len != other.len {
            Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            })
        } else {
            Ok(())
        }
    }

    /// Number of slots where both sequences are one.
    pub fn and_count(&self, other: &SlotSeq) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Slot-wise OR, tagged with `track`.
    pub fn or(&self, other: &SlotSeq, track: Track) -> Result<SlotSeq> {
        self.check_len(other)?;
        Ok(SlotSeq {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            len: self.len,
            track,
        })
    }

    /// Copy of slots `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> SlotSeq {
        assert!(start <= end && end <= self.len);
        let mut out = SlotSeq::zeros(self.track, end - start);
        for j in start..end {
            if self.get(j) {
                out.set(j - start, true);
            }
        }
        out
    }

    /// `self` followed by `tail`.
    pub fn concat(&self, tail: &SlotSeq) -> SlotSeq {
        let mut out = SlotSeq::zeros(self.track, self.len + tail.len);
        for j in self.ones_positions() {
            out.set(j, true);
        }
        for j in tail.ones_positions() {
            out.set(self.len + j, true);
        }
        out
    }

    /// Writes the plain-text form: a `slotseq <track> <n>` header line, then
    /// the slots as `0`/`1` characters, 64 per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "slotseq {} {}", self.track.name(), self.len)?;
        let mut line = String::with_capacity(65);
        for j in 0..self.len {
            line.push(if self.get(j) { '1' } else { '0' });
            if line.len() == 64 || j + 1 == self.len {
                line.push('\n');
                w.write_all(line.as_bytes())?;
                line.clear();
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<SlotSeq> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing header".into()))??;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("slotseq") {
            return Err(Error::Format(format!("bad header `{header}`")));
        }
        let track: Track = parts
            .next()
            .ok_or_else(|| Error::Format("header lacks track".into()))?
            .parse()?;
        let len: usize = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Format("header lacks a slot count".into()))?;
        if len == 0 {
            return Err(Error::Format("slot count must be positive".into()));
        }
        let mut seq = SlotSeq::zeros(track, len);
        let mut j = 0;
        for line in lines {
            for c in line?.trim_end().chars() {
                if j >= len {
                    return Err(Error::Format(format!("more than {len} slots")));
                }
                match c {
                    '0' => {}
                    '1' => seq.set(j, true),
                    other => return Err(Error::Format(format!("unexpected character {other:?}"))),
                }
                j += 1;
            }
        }
        if j != len {
            return Err(Error::Format(format!("header says {len} slots, found {j}")));
        }
        Ok(seq)
    }

    /// Run-length encoded binary form.
    ///
    /// Layout: magic `SSRL`, version byte `1`, track byte, `n` as u64 LE,
    /// first-slot value byte, run count as u64 LE, then each run length as an
    /// unsigned LEB128 varint. Runs alternate starting from the first value.
    pub fn to_rle_bytes(&self) -> Vec<u8> {
        let mut runs: Vec<u64> = Vec::new();
        let first = self.len > 0 && self.get(0);
        let mut cur = first;
        let mut run = 0u64;
        for b in self.iter() {
            if b == cur {
                run += 1;
            } else {
                runs.push(run);
                cur = b;
                run = 1;
            }
        }
        if run > 0 {
            runs.push(run);
        }
        let mut out = Vec::with_capacity(23 + runs.len() * 2);
        out.extend_from_slice(RLE_MAGIC);
        out.push(RLE_VERSION);
        out.push(self.track.code());
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        out.push(first as u8);
        out.extend_from_slice(&(runs.len() as u64).to_le_bytes());
        for r in runs {
            let mut v = r;
            loop {
                let byte = (v & 0x7f) as u8;
                v >>= 7;
                if v == 0 {
                    out.push(byte);
                    break;
                }
                out.push(byte | 0x80);
            }
        }
        out
    }

    pub fn from_rle_bytes(bytes: &[u8]) -> Result<SlotSeq> {
        let err = |m: &str| Error::Format(m.to_string());
        if bytes.len() < 23 || &bytes[..4] != RLE_MAGIC {
            return Err(err("not an SSRL stream"));
        }
        if bytes[4] != RLE_VERSION {
            return Err(Error::Format(format!("unsupported version {}", bytes[4])));
        }
        let track = Track::from_code(bytes[5])?;
        let len = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
        if len == 0 {
            return Err(err("slot count must be positive"));
        }
        let mut cur = match bytes[14] {
            0 => false,
            1 => true,
            _ => return Err(err("bad first-slot byte")),
        };
        let nruns = u64::from_le_bytes(bytes[15..23].try_into().unwrap());
        let mut seq = SlotSeq::zeros(track, len);
        let mut pos = 23;
        let mut j = 0usize;
        for _ in 0..nruns {
            let mut v = 0u64;
            let mut shift = 0;
            loop {
                let byte = *bytes.get(pos).ok_or_else(|| err("truncated run"))?;
                pos += 1;
                if shift >= 64 {
                    return Err(err("run length overflow"));
                }
                v |= ((byte & 0x7f) as u64) << shift;
                shift += 7;
                if byte & 0x80 == 0 {
                    break;
                }
            }
            let end = j
                .checked_add(v as usize)
                .filter(|&e| e <= len)
                .ok_or_else(|| err("runs exceed the slot count"))?;
            if cur {
                for k in j..end {
                    seq.set(k, true);
                }
            }
            j = end;
            cur = !cur;
        }
        if j != len || pos != bytes.len() {
            return Err(err("runs do not cover the slot count exactly"));
        }
        Ok(seq)
    }
}

const RLE_MAGIC: &[u8; 4] = b"SSRL";
const RLE_VERSION: u8 = 1;
