//! Finite words over the alphabet `{1, …, d}`.
//!
//! Letters are stored as their 1-based index in a single byte, so a word is a
//! contiguous byte buffer. Level words routinely reach millions of letters.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A letter of the alphabet `{1, …, d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn new(index: u8) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidArgument("letters are numbered from 1".into()));
        }
        Ok(Letter(index))
    }

    /// 1-based index.
    pub fn index(self) -> u8 {
        self.0
    }

    /// 0-based position, for indexing matrices and tables.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_slot(slot: usize) -> Self {
        Letter(slot as u8 + 1)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word. The empty word is allowed.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from raw 1-based letter indices.
    pub fn from_indices(indices: Vec<u8>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidArgument("letters are numbered from 1".into()));
        }
        Ok(Word(indices))
    }

    pub(crate) fn from_raw(indices: Vec<u8>) -> Self {
        Word(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.0.iter().map(|&b| Letter(b))
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().map(|&b| Letter(b))
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().map(|&b| Letter(b))
    }

    /// Largest letter index used, 0 for the empty word.
    pub fn max_letter(&self) -> u8 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            if b < 10 {
                write!(f, "{}", b)?;
            } else {
                write!(f, "[{}]", b)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses an ASCII digit string such as `"1213113"`.
    fn from_str(s: &str) -> Result<Self> {
        let bytes = s
            .trim()
            .bytes()
            .map(|c| match c {
                b'1'..=b'9' => Ok(c - b'0'),
                _ => Err(Error::InvalidArgument(format!(
                    "invalid letter {:?} in word {:?}",
                    c as char, s
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word(bytes))
    }
}

/// Number of (possibly overlapping) occurrences of `u` in `v`.
///
/// The empty word occurs at every one of the `|v| + 1` positions.
pub fn count_occurrences(u: &Word, v: &Word) -> usize {
    count_in_slice(u.as_bytes(), v.as_bytes())
}

pub(crate) fn count_in_slice(u: &[u8], v: &[u8]) -> usize {
    if u.is_empty() {
        return v.len() + 1;
    }
    if u.len() > v.len() {
        return 0;
    }
    v.windows(u.len()).filter(|w| *w == u).count()
}

/// Distinct factors of a text, grouped by length `1..=max_len`.
#[derive(Clone, Debug)]
pub struct FactorSet {
    by_length: Vec<HashSet<Word>>,
    source_length: usize,
    max_len: usize,
}

impl FactorSet {
    /// Largest length the set was asked to hold.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    /// Factors of length `n`; empty when the text is shorter than `n`.
    pub fn of_length(&self, n: usize) -> Result<&HashSet<Word>> {
        if n == 0 || n > self.max_len {
            return Err(Error::InvalidArgument(format!(
                "factor length {} outside stored range 1..={}",
                n, self.max_len
            )));
        }
        Ok(&self.by_length[n - 1])
    }

    pub fn contains(&self, w: &Word) -> bool {
        let n = w.len();
        n >= 1 && n <= self.max_len && self.by_length[n - 1].contains(w)
    }

    /// Adds every factor of `text` up to the stored maximum length.
    pub fn extend_from(&mut self, text: &Word) {
        let bytes = text.as_bytes();
        for n in 1..=self.max_len.min(bytes.len()) {
            let set = &mut self.by_length[n - 1];
            let mut seen: HashSet<&[u8]> = HashSet::new();
            for w in bytes.windows(n) {
                if seen.insert(w) && !set.contains(w) {
                    set.insert(Word(w.to_vec()));
                }
            }
        }
        self.source_length += bytes.len();
    }
}

impl std::borrow::Borrow<[u8]> for Word {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

/// All distinct factors of `v` of lengths `1..=max_len`.
pub fn factors(v: &Word, max_len: usize) -> Result<FactorSet> {
    if max_len < 1 {
        return Err(Error::InvalidArgument("factor length bound must be at least 1".into()));
    }
    let mut fs = FactorSet {
        by_length: vec![HashSet::new(); max_len],
        source_length: 0,
        max_len,
    };
    fs.extend_from(v);
    Ok(fs)
}

/// Number of distinct length-`n` factors stored in `fs`.
///
/// For a finite text this is a lower bound for the complexity of the language.
pub fn complexity(fs: &FactorSet, n: usize) -> Result<usize> {
    fs.of_length(n).map(HashSet::len)
}

/// Complexity values `p(1), …, p(max_len)` of a single long text.
///
/// Packs each window into an integer key, using as many bits per letter as
/// the largest letter needs; windows too long to pack are hashed as slices.
pub fn complexity_profile(v: &Word, max_len: usize) -> Result<Vec<usize>> {
    if max_len < 1 {
        return Err(Error::InvalidArgument("factor length bound must be at least 1".into()));
    }
    let bytes = v.as_bytes();
    let bits = (u8::BITS - v.max_letter().leading_zeros()).max(1) as usize;
    let mut out = Vec::with_capacity(max_len);
    for n in 1..=max_len {
        if n > bytes.len() {
            out.push(0);
            continue;
        }
        if n * bits > 128 {
            let seen: HashSet<&[u8]> = bytes.windows(n).collect();
            out.push(seen.len());
            continue;
        }
        let mask: u128 = if n * bits == 128 { u128::MAX } else { (1u128 << (bits * n)) - 1 };
        let mut key: u128 = 0;
        let mut seen: HashSet<u128> = HashSet::with_capacity(4 * n + 16);
        for (i, &b) in bytes.iter().enumerate() {
            key = ((key << bits) | b as u128) & mask;
            if i + 1 >= n {
                seen.insert(key);
            }
        }
        out.push(seen.len());
    }
    Ok(out)
}
