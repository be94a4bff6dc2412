//! Core operations against independent oracles: integer orbits of dyadic and
//! `q/b` points, and brute-force grids.

use num_rational::BigRational;
use proptest::prelude::*;

use semilab_core::recurrence::{
    action_ball_return_time, action_set_return_time, first_return_time, kac_integral_estimate, set_return_time,
    KacSetup, Semantics,
};
use semilab_core::{Arc, ArcSet, BernoulliWalk, FiberedOrbit, ReturnTime, SemigroupSystem, SymbolStream, WalkLaw, Word};

const GRID_BITS: u32 = 14;
const GRID: u64 = 1 << GRID_BITS;

fn q(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn degree_of(degrees: &[u32], word: &[usize], k: u64) -> u64 {
    degrees[word[(k as usize - 1) % word.len()] - 1] as u64
}

/// Closed arc `[start, start + len]` in units of `2^-14`.
fn on_arc(start: u64, len: u64, y: u64) -> bool {
    (y + GRID - start) % GRID <= len
}

fn grid_return(degrees: &[u32], word: &[usize], start: u64, len: u64, n_max: u64) -> ReturnTime {
    let mut best = n_max + 1;
    for y0 in (0..GRID).filter(|&y| on_arc(start, len, y)) {
        let mut y = y0;
        for k in 1..best {
            y = y * degree_of(degrees, word, k) % GRID;
            if on_arc(start, len, y) {
                best = k;
                break;
            }
        }
    }
    if best > n_max {
        ReturnTime::Censored(n_max)
    } else {
        ReturnTime::Returned(best)
    }
}

/// First `k` with `x_k ∈ [lo, hi)` for `x = a/b`, by integer arithmetic mod `b`.
fn integer_first_return(degrees: &[u32], word: &[usize], a: u64, b: u64, lo: (u64, u64), hi: (u64, u64), n_max: u64) -> ReturnTime {
    let inside = |r: u64| r * lo.1 >= lo.0 * b && r * hi.1 < hi.0 * b;
    let mut r = a;
    for k in 1..=n_max {
        r = r * degree_of(degrees, word, k) % b;
        if inside(r) {
            return ReturnTime::Returned(k);
        }
    }
    ReturnTime::Censored(n_max)
}

fn system_strategy() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(2u32..=3, 1..=2)
}

fn word_strategy(p: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=p, 1..=10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arc_images_agree_with_the_grid(
        (degrees, word) in system_strategy().prop_flat_map(|d| { let p = d.len(); (Just(d), word_strategy(p)) }),
        r in 1u32..=6,
        start in 0u64..64,
        len in 1u64..64,
    ) {
        let unit = GRID >> r;
        let (start, len) = ((start % (1 << r)) * unit, (len % (1 << r)).max(1) * unit);
        let sys = SemigroupSystem::linear(&degrees).unwrap();
        let stream = SymbolStream::cyclic(Word::new(word.clone())).unwrap();
        let set = ArcSet::from_arcs([Arc::new(q(start, GRID), q(len, GRID))]);
        let exact = set_return_time(&sys, &stream, &set, 16).unwrap();
        prop_assert_eq!(exact, grid_return(&degrees, &word, start, len, 16));
    }

    #[test]
    fn float_and_exact_first_returns_agree(
        (degrees, word) in system_strategy().prop_flat_map(|d| { let p = d.len(); (Just(d), word_strategy(p)) }),
        q0 in 0u64..200,
        lo in 0u64..64,
        len in 1u64..32,
    ) {
        let sys = SemigroupSystem::linear(&degrees).unwrap();
        let stream = SymbolStream::cyclic(Word::new(word.clone())).unwrap();
        let exact_set = ArcSet::from_pieces([(q(lo, 64), q(lo + len, 64))]);
        let float_set = ArcSet::from_pieces([(lo as f64 / 64.0, (lo + len) as f64 / 64.0)]);
        let exact = FiberedOrbit::new(sys.clone(), stream.clone(), q(q0, 65537));
        let float = FiberedOrbit::new(sys, stream, q0 as f64 / 65537.0);
        let a = first_return_time(&exact, &exact_set, 16, Semantics::Hitting).unwrap();
        let b = first_return_time(&float, &float_set, 16, Semantics::Hitting).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn single_map_returns_match_integer_orbits(d in 2u32..=5, a in 0u64..255, lo in 0u64..8, len in 1u64..8) {
        let hi = (lo + len).min(8);
        prop_assume!(lo < hi);
        let sys = SemigroupSystem::linear(&[d]).unwrap();
        let stream = SymbolStream::cyclic(Word::parse("1").unwrap()).unwrap();
        let set = ArcSet::from_pieces([(q(lo, 8), q(hi, 8))]);
        let o = FiberedOrbit::new(sys, stream, q(a, 255));
        let got = first_return_time(&o, &set, 64, Semantics::Hitting).unwrap();
        prop_assert_eq!(got, integer_first_return(&[d], &[1], a, 255, (lo, 8), (hi, 8), 64));
    }

    #[test]
    fn word_eval_is_multiplication_mod_one(
        (degrees, word) in system_strategy().prop_flat_map(|d| { let p = d.len(); (Just(d), word_strategy(p)) }),
        a in 0u64..1000,
        b in 1000u64..5000,
    ) {
        let sys = SemigroupSystem::linear(&degrees).unwrap();
        let k: u64 = word.iter().map(|&s| degrees[s - 1] as u64).product();
        let got = sys.word_eval(&Word::new(word), &q(a, b)).unwrap();
        prop_assert_eq!(got, q(a * (k % b) % b, b));
    }

    #[test]
    fn ball_return_is_the_minimum_over_words(x in 0u64..1024, r in 4u32..9) {
        let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
        let delta = q(1, 1 << r);
        let t = action_ball_return_time(&sys, &q(x, 1024), &delta, 12).unwrap();
        let ball = semilab_core::circle::ball(&q(x, 1024), &delta).unwrap().to_set();
        let mut best = ReturnTime::Censored(12);
        for len in 1..=6usize {
            for code in 0..(1u32 << len) {
                let w: Vec<usize> = (0..len).map(|i| ((code >> i) & 1) as usize + 1).collect();
                let s = SymbolStream::cyclic(Word::new(w)).unwrap();
                if let ReturnTime::Returned(k) = set_return_time(&sys, &s, &ball, 12).unwrap() {
                    if best.value().is_none_or(|b| k < b) {
                        best = ReturnTime::Returned(k);
                    }
                }
            }
        }
        // Words up to length 6 repeat cyclically, which covers every prefix of length <= 6.
        if let ReturnTime::Returned(b) = best {
            if b <= 6 {
                prop_assert_eq!(t, best);
            } else {
                prop_assert!(t.value().is_some_and(|k| k <= b));
            }
        }
    }
}

#[test]
fn action_return_of_sets_is_below_every_fibre() {
    let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
    let set = ArcSet::from_pieces([(q(5, 16), q(11, 32))]);
    let t_s = action_set_return_time(&sys, &set, 20, 1 << 12).unwrap().value().unwrap();
    for w in ["1", "2", "12", "21", "112", "1222"] {
        let s = SymbolStream::cyclic(Word::parse(w).unwrap()).unwrap();
        let t = set_return_time(&sys, &s, &set, 20).unwrap().value().unwrap();
        assert!(t_s <= t, "word {w}: {t_s} > {t}");
    }
}

#[test]
fn kac_mean_is_at_least_one() {
    let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
    let law = WalkLaw::Bernoulli(BernoulliWalk::uniform(2).unwrap());
    for (a, b) in [(0.0, 0.9), (0.1, 0.2), (0.4, 0.45)] {
        let setup = KacSetup::new(sys.clone(), law.clone(), ArcSet::from_pieces([(a, b)]), 1000, 3).unwrap();
        assert!(kac_integral_estimate(&setup, 2000).unwrap().mean >= 1.0);
    }
}
