//! One-sided symbol sequences, Bernoulli walks and the shift.
//!
//! Sampled streams draw from ChaCha8 keyed by `(seed, stream id)`. Symbol
//! `i` consumes exactly the two 32-bit words at position `2i` of the keystream,
//! so any symbol can be reached in O(1) by seeking, and shifting a stream is a
//! seek rather than a replay.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::maps::{Symbol, Word};

/// Domain tags keep the keystreams of different roles independent.
pub mod domain {
    pub const SYMBOLS: u64 = 0x5359_4d42;
    pub const POINTS: u64 = 0x504f_494e;
    pub const MIXTURE: u64 = 0x4d49_5854;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed counter-based generator for `(seed, stream, domain)`.
pub fn keyed_rng(seed: u64, stream: u64, domain: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix(seed ^ splitmix(domain));
    state = splitmix(state ^ stream);
    for chunk in key.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform double in `[0, 1)` from the top 53 bits.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli product law on `{1..p}^N` with weights `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliWalk {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BernoulliWalk {
    /// Every weight must lie in `(0,1)` and the sum within `1e-12` of 1; the one-symbol
    /// walk `(1)` is accepted as the degenerate shift.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LabError::InvalidWalk("empty weight vector".into()));
        }
        let sum: f64 = weights.iter().sum();
        if libm::fabs(sum - 1.0) > 1e-12 {
            return Err(LabError::InvalidWalk(format!("weights sum to {sum}")));
        }
        if weights.len() > 1 && weights.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
            return Err(LabError::InvalidWalk("every weight must lie in (0,1)".into()));
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(BernoulliWalk { weights, cumulative })
    }

    pub fn uniform(p: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / p as f64; p])
    }

    /// Parses `"0.25,0.75"`.
    pub fn parse(s: &str) -> Result<Self> {
        let weights = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| LabError::InvalidWalk(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights)
    }

    pub fn p(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `-Σ a_i log a_i`, natural log.
    pub fn entropy(&self) -> f64 {
        bernoulli_entropy(self)
    }

    fn symbol_for(&self, bits: u64) -> Symbol {
        let u = unit_f64(bits);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.weights.len() - 1)
            + 1
    }
}

pub fn bernoulli_entropy(walk: &BernoulliWalk) -> f64 {
    walk.weights
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| -a * libm::log(a))
        .sum()
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum Source {
    Sampled {
        walk: BernoulliWalk,
        rng: ChaCha8Rng,
    },
    Cyclic(Word),
    Explicit {
        prefix: Word,
        tail: Word,
    },
}

/// Cursor over an infinite symbol sequence. Cloning forks an independent
/// cursor over the same sequence.
#[derive(Debug, Clone)]
pub struct SymbolStream {
    source: Source,
    position: u64,
}

impl SymbolStream {
    pub fn sampled(walk: BernoulliWalk, seed: u64, stream_id: u64) -> Self {
        SymbolStream {
            source: Source::Sampled {
                walk,
                rng: keyed_rng(seed, stream_id, domain::SYMBOLS),
            },
            position: 0,
        }
    }

    pub fn cyclic(word: Word) -> Result<Self> {
        if word.is_empty() {
            return Err(LabError::ParseSymbols("empty cyclic word".into()));
        }
        Ok(SymbolStream {
            source: Source::Cyclic(word),
            position: 0,
        })
    }

    /// `prefix` followed by `tail` repeated forever.
    pub fn explicit(prefix: Word, tail: Word) -> Result<Self> {
        if tail.is_empty() {
            return Err(LabError::ParseSymbols("empty cyclic tail".into()));
        }
        Ok(SymbolStream {
            source: Source::Explicit { prefix, tail },
            position: 0,
        })
    }

    /// Index of the next symbol to be emitted.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// The repeating block when the stream is purely periodic from index 0.
    pub fn cycle(&self) -> Option<&Word> {
        match &self.source {
            Source::Cyclic(w) => Some(w),
            Source::Explicit { prefix, tail } if prefix.is_empty() => Some(tail),
            _ => None,
        }
    }

    /// Largest symbol the stream can emit.
    pub fn alphabet_bound(&self) -> usize {
        match &self.source {
            Source::Sampled { walk, .. } => walk.p(),
            Source::Cyclic(w) => w.symbols().iter().copied().max().unwrap_or(0),
            Source::Explicit { prefix, tail } => prefix
                .symbols()
                .iter()
                .chain(tail.symbols())
                .copied()
                .max()
                .unwrap_or(0),
        }
    }

    pub fn next_symbol(&mut self) -> Symbol {
        let i = self.position;
        self.position += 1;
        match &mut self.source {
            Source::Sampled { walk, rng } => walk.symbol_for(rng.next_u64()),
            Source::Cyclic(w) => w.symbols()[(i % w.len() as u64) as usize],
            Source::Explicit { prefix, tail } => periodic_tail(prefix, tail, i),
        }
    }

    /// Symbol at absolute index `i` (0-based), without moving the cursor.
    pub fn symbol_at(&self, i: u64) -> Symbol {
        match &self.source {
            Source::Sampled { walk, rng } => {
                let mut r = rng.clone();
                r.set_word_pos(2 * i as u128);
                walk.symbol_for(r.next_u64())
            }
            Source::Cyclic(w) => w.symbols()[(i % w.len() as u64) as usize],
            Source::Explicit { prefix, tail } => periodic_tail(prefix, tail, i),
        }
    }

    /// `σ^k`: a stream whose first symbol is this stream's symbol `position + k`.
    pub fn shift(&self, k: u64) -> SymbolStream {
        let mut s = self.clone();
        s.position += k;
        if let Source::Sampled { rng, .. } = &mut s.source {
            rng.set_word_pos(2 * s.position as u128);
        }
        s
    }

    /// The next `n` symbols as a word, without moving the cursor.
    pub fn peek_word(&self, n: usize) -> Word {
        let mut s = self.clone();
        Word::new((0..n).map(|_| s.next_symbol()).collect())
    }
}

fn periodic_tail(prefix: &Word, tail: &Word, i: u64) -> Symbol {
    let p = prefix.len() as u64;
    if i < p {
        prefix.symbols()[i as usize]
    } else {
        tail.symbols()[((i - p) % tail.len() as u64) as usize]
    }
}

/// Law used to draw the symbol sequence of a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkLaw {
    Bernoulli(BernoulliWalk),
    /// One fixed periodic sequence.
    Cyclic(Word),
    /// Convex combination of periodic sequences `w^∞` with the given weights,
    /// e.g. `(1/3)δ_{1̄} + (2/3)δ_{2̄}`.
    Mixture(Vec<(f64, Word)>),
}

impl WalkLaw {
    /// Parses `bernoulli:0.5,0.5`, `cyclic:1212` or `mixture:1/3@1,2/3@2`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let (kind, arg) = t
            .split_once(':')
            .ok_or_else(|| LabError::InvalidWalk(t.to_string()))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(WalkLaw::Bernoulli(BernoulliWalk::parse(arg)?)),
            "cyclic" => {
                let w = Word::parse(arg)?;
                if w.is_empty() {
                    return Err(LabError::ParseSymbols(arg.to_string()));
                }
                Ok(WalkLaw::Cyclic(w))
            }
            "mixture" => {
                let mut parts = Vec::new();
                for item in arg.split(',') {
                    let (wt, word) = item
                        .split_once('@')
                        .ok_or_else(|| LabError::InvalidWalk(item.to_string()))?;
                    let weight = parse_fraction(wt).ok_or_else(|| LabError::InvalidWalk(wt.to_string()))?;
                    parts.push((weight, Word::parse(word)?));
                }
                Self::mixture(parts)
            }
            _ => Err(LabError::InvalidWalk(t.to_string())),
        }
    }

    pub fn mixture(parts: Vec<(f64, Word)>) -> Result<Self> {
        let sum: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.is_empty()
            || libm::fabs(sum - 1.0) > 1e-9
            || parts.iter().any(|(w, word)| !(*w > 0.0) || word.is_empty())
        {
            return Err(LabError::InvalidWalk("mixture weights must be positive and sum to 1".into()));
        }
        Ok(WalkLaw::Mixture(parts))
    }

    /// Largest symbol the law can produce.
    pub fn alphabet_bound(&self) -> usize {
        match self {
            WalkLaw::Bernoulli(w) => w.p(),
            WalkLaw::Cyclic(w) => w.symbols().iter().copied().max().unwrap_or(0),
            WalkLaw::Mixture(parts) => parts
                .iter()
                .flat_map(|(_, w)| w.symbols().iter().copied())
                .max()
                .unwrap_or(0),
        }
    }

    /// Draws the symbol sequence for `stream_id`.
    pub fn sample_stream(&self, seed: u64, stream_id: u64) -> SymbolStream {
        match self {
            WalkLaw::Bernoulli(w) => SymbolStream::sampled(w.clone(), seed, stream_id),
            WalkLaw::Cyclic(w) => SymbolStream {
                source: Source::Cyclic(w.clone()),
                position: 0,
            },
            WalkLaw::Mixture(parts) => {
                let u = unit_f64(keyed_rng(seed, stream_id, domain::MIXTURE).next_u64());
                let mut acc = 0.0;
                let mut chosen = &parts[parts.len() - 1].1;
                for (w, word) in parts {
                    acc += w;
                    if u < acc {
                        chosen = word;
                        break;
                    }
                }
                SymbolStream {
                    source: Source::Cyclic(chosen.clone()),
                    position: 0,
                }
            }
        }
    }

    /// Stationary frequency of each symbol `1..=p`.
    pub fn symbol_frequencies(&self, p: usize) -> Vec<f64> {
        let mut freq = alloc::vec![0.0; p];
        let mut add_word = |weight: f64, w: &Word| {
            for &s in w.symbols() {
                if s >= 1 && s <= p {
                    freq[s - 1] += weight / w.len() as f64;
                }
            }
        };
        match self {
            WalkLaw::Bernoulli(b) => {
                for (i, a) in b.weights().iter().enumerate().take(p) {
                    freq[i] = *a;
                }
            }
            WalkLaw::Cyclic(w) => add_word(1.0, w),
            WalkLaw::Mixture(parts) => parts.iter().for_each(|(wt, w)| add_word(*wt, w)),
        }
        freq
    }
}

/// Parses `"0.25"` or `"1/3"`.
pub fn parse_fraction(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            (d != 0.0).then(|| n / d)
        }
        None => s.parse().ok(),
    }
}
