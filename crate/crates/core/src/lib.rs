//! Simulation and estimation primitives for finitely generated free semigroup
//! actions on the circle.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs and a 64-bit seed: sampling uses a counter-based
//! generator keyed by `(seed, stream id)`, so callers may fan samples out over
//! any number of workers and fold the results back in stream-id order.
//!
//! Module map:
//!
//! - [`circle`]: metric, arcs and arc unions on `[0,1)`, over floats or exact rationals.
//! - [`maps`]: generator maps, semigroup systems, words, periodic points.
//! - [`symbols`]: Bernoulli walks, symbol streams, the shift.
//! - [`orbit`]: fibred orbits of the skew product and dynamical balls.
//! - [`recurrence`]: first return times, Kac averages, set and ball return times.
//! - [`entropy`]: partition joins, metric entropy, analytic entropies, Lyapunov exponents.
//! - [`hitting`]: hitting frequencies and periodic-orbit maximizing measures.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circle;
pub mod entropy;
pub mod error;
pub mod hitting;
pub mod maps;
pub mod orbit;
pub mod recurrence;
pub mod stats;
pub mod symbols;

pub use circle::{Arc, ArcSet, CirclePoint, Coord, RationalPoint};
pub use error::{LabError, Result};
pub use maps::{GeneratorMap, SemigroupSystem, Symbol, Word};
pub use orbit::FiberedOrbit;
pub use recurrence::ReturnTime;
pub use symbols::{BernoulliWalk, SymbolStream, WalkLaw};
