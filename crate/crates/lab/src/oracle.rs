//! Exact-rational spot checks exposed on the command line.

use num_rational::BigRational;

use semilab_core::hitting::label;
use semilab_core::recurrence::set_return_time;
use semilab_core::{ArcSet, LabError, SemigroupSystem, SymbolStream, Word};

pub fn parse_rational(s: &str) -> Result<BigRational, LabError> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|_| LabError::InvalidParameter(format!("`{s}` is not a rational like 3/8")))
}

/// Parses `"0..1/4"` or `"0..1/8;1/2..5/8"`.
pub fn parse_set(s: &str) -> Result<ArcSet<BigRational>, LabError> {
    let pieces = s
        .split(';')
        .map(|piece| {
            let (a, b) = piece
                .split_once("..")
                .ok_or_else(|| LabError::InvalidParameter(format!("`{piece}` is not an arc like 1/4..1/2")))?;
            Ok((parse_rational(a)?, parse_rational(b)?))
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    Ok(ArcSet::from_pieces(pieces))
}

pub fn word_eval(system: &str, word: &str, x: &str) -> Result<String, LabError> {
    let system = SemigroupSystem::parse(system)?;
    let w = Word::parse(word)?;
    Ok(system.word_eval(&w, &parse_rational(x)?)?.to_string())
}

pub fn periodic_points(system: &str, word: &str) -> Result<String, LabError> {
    let system = SemigroupSystem::parse(system)?;
    let w = Word::parse(word)?;
    let pts = system.periodic_points(&w)?;
    Ok(pts.iter().map(label).collect::<Vec<_>>().join("\n"))
}

/// `T^ω(A)` along the periodic sequence `omega^∞`.
pub fn set_return(system: &str, omega: &str, set: &str, n_max: u64) -> Result<String, LabError> {
    let system = SemigroupSystem::parse(system)?;
    let stream = SymbolStream::cyclic(Word::parse(omega)?)?;
    let t = set_return_time(&system, &stream, &parse_set(set)?, n_max)?;
    Ok(match t.value() {
        Some(k) => k.to_string(),
        None => format!("censored at {n_max}"),
    })
}
