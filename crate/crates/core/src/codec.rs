//! The prefix code carried by a cluster.
//!
//! Each leaf becomes a codeword spelling its root path, `0` for a left turn
//! and `1` for a right turn. Books are kept in lexicographic codeword order and
//! symbol `s{i+1}` names entry `i`.
//!
//! Text format (one entry per line):
//!
//! ```text
//! # comment lines and blank lines are ignored
//! 00	0.36363636363636365
//! 0100	0.09090909090909091
//! ```
//!
//! The first column is the codeword in ASCII `0`/`1`; the empty codeword is
//! written as `-`. An optional second column, separated by a tab, holds the
//! normalized symbol probability and is ignored when reading.

#![allow(clippy::tabs_in_doc_comments)] // the format example is tab-separated

use std::fmt;
use std::str::FromStr;

use crate::error::{DecodeError, Error, Result};
use crate::percolate::{Cluster, Side};

/// Token for the empty codeword in the text format.
pub const EMPTY_CODEWORD: &str = "-";

/// A sequence of bits with explicit length; leading zeros are significant.
///
/// Ordering is lexicographic with a proper prefix sorting first, the same
/// order as the ASCII rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl AsRef<[bool]> for BitString {
    fn as_ref(&self) -> &[bool] {
        &self.0
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Distinct codewords in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodeBook {
    entries: Vec<BitString>,
}

impl CodeBook {
    /// Sorts the codewords; duplicates are rejected. Prefix-freeness is not
    /// required here (see [`is_prefix_free`]).
    pub fn new(mut codewords: Vec<BitString>) -> Result<Self> {
        codewords.sort();
        if let Some(w) = codewords.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateCodeword(w[0].to_string()));
        }
        Ok(Self { entries: codewords })
    }

    pub fn entries(&self) -> &[BitString] {
        &self.entries
    }

    pub fn codeword(&self, index: usize) -> Option<&BitString> {
        self.entries.get(index)
    }

    /// Generation of the leaf behind entry `index`, i.e. its codeword length.
    pub fn generation(&self, index: usize) -> Option<u32> {
        self.entries.get(index).map(|c| c.len() as u32)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Presentation label of entry `index`: `s1`, `s2`, ...
    pub fn symbol_label(index: usize) -> String {
        format!("s{}", index + 1)
    }

    /// Renders the text format, with a probability column when given.
    pub fn to_text(&self, probabilities: Option<&[f64]>) -> String {
        let mut out = String::new();
        for (i, word) in self.entries.iter().enumerate() {
            if word.is_empty() {
                out.push_str(EMPTY_CODEWORD);
            } else {
                out.push_str(&word.to_string());
            }
            if let Some(probs) = probabilities {
                out.push('\t');
                out.push_str(&probs[i].to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut words = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let first = line.split_whitespace().next().unwrap_or_default();
            let word = if first == EMPTY_CODEWORD {
                BitString::new()
            } else {
                first.parse().map_err(|e: Error| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?
            };
            words.push(word);
        }
        Self::new(words)
    }
}

/// One entry per leaf of `cluster`, spelling its root path.
pub fn extract_codebook(cluster: &Cluster) -> CodeBook {
    let mut words = Vec::new();
    let mut stack = vec![(0u32, BitString::new())];
    while let Some((id, path)) = stack.pop() {
        let node = cluster.node(id);
        if cluster.is_leaf(node) {
            words.push(path);
            continue;
        }
        for side in Side::BOTH {
            if let Some(child) = node.child(side) {
                let mut p = path.clone();
                p.push(side.bit());
                stack.push((child, p));
            }
        }
    }
    words.sort();
    CodeBook { entries: words }
}

/// `Σ 2^(−len)` over the book.
pub fn kraft_sum(book: &CodeBook) -> f64 {
    book.entries
        .iter()
        .map(|w| 0.5f64.powi(w.len() as i32))
        .sum()
}

/// True iff no codeword is a proper prefix of another.
pub fn is_prefix_free(book: &CodeBook) -> bool {
    // sorted order puts any extension of a word directly after it
    book.entries.windows(2).all(|w| !w[0].is_prefix_of(&w[1]))
}

/// Binary trie over a prefix-free book.
struct Trie {
    // children per node, and the symbol ending there
    nodes: Vec<([Option<u32>; 2], Option<usize>)>,
}

impl Trie {
    fn build(book: &CodeBook) -> Self {
        let mut nodes = vec![([None, None], None)];
        for (symbol, word) in book.entries.iter().enumerate() {
            let mut at = 0usize;
            for &bit in word.bits() {
                let slot = bit as usize;
                at = match nodes[at].0[slot] {
                    Some(next) => next as usize,
                    None => {
                        nodes.push(([None, None], None));
                        let id = nodes.len() - 1;
                        nodes[at].0[slot] = Some(id as u32);
                        id
                    }
                };
            }
            nodes[at].1 = Some(symbol);
        }
        Self { nodes }
    }
}

/// Greedy left-to-right parse of `bits` into entry indices.
pub fn decode(book: &CodeBook, bits: &BitString) -> Result<Vec<usize>, DecodeError> {
    if bits.is_empty() {
        return Ok(Vec::new());
    }
    if book.is_empty() {
        return Err(DecodeError::EmptyBook);
    }
    if !is_prefix_free(book) {
        return Err(DecodeError::NotPrefixFree);
    }
    if book.entries[0].is_empty() {
        return Err(DecodeError::EmptyCodeword);
    }
    let trie = Trie::build(book);
    let mut out = Vec::new();
    let mut at = 0usize;
    let mut start = 0usize;
    for (i, &bit) in bits.bits().iter().enumerate() {
        at = match trie.nodes[at].0[bit as usize] {
            Some(next) => next as usize,
            None => return Err(DecodeError::NoMatch { start, position: i }),
        };
        if let Some(symbol) = trie.nodes[at].1 {
            out.push(symbol);
            at = 0;
            start = i + 1;
        }
    }
    if at != 0 {
        return Err(DecodeError::Truncated { start });
    }
    Ok(out)
}

/// Concatenates the codewords of `symbols`.
pub fn encode(book: &CodeBook, symbols: &[usize]) -> Result<BitString> {
    let mut out = BitString::new();
    for &index in symbols {
        let word = book.codeword(index).ok_or(Error::Index {
            index,
            len: book.len(),
        })?;
        out.extend_from(word);
    }
    Ok(out)
}
