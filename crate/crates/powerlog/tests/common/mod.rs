#![allow(dead_code)]

use powerlog::grid::{q, qi};
use powerlog::{Exponent, Rational, Region, Transseries};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

pub type R = Transseries<Rational>;
pub type F = Transseries<f64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn e(a: i64, k: i64) -> Exponent {
    Exponent::int(a, k)
}

pub fn eq(n: i64, d: i64, k: i64) -> Exponent {
    Exponent::new(q(n, d), k)
}

pub fn poly(ts: &[(i64, i64, i64)]) -> R {
    R::polynomial(ts.iter().map(|&(a, k, c)| (e(a, k), rat(c, 1))))
}

pub fn fpoly(ts: &[(i64, i64, f64)]) -> F {
    F::polynomial(ts.iter().map(|&(a, k, c)| (e(a, k), c)))
}

pub fn rect(a: i64, k: i64) -> Region {
    Region::new(qi(a), k)
}

/// Exponents with alpha in halves from `lo` halves to `hi` halves.
pub fn arb_exponent(lo: i64, hi: i64, kmin: i64, kmax: i64) -> impl Strategy<Value = Exponent> {
    (lo..=hi, kmin..=kmax).prop_map(|(h, k)| Exponent::new(q(h, 2), k))
}

pub fn arb_coef() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=3).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| rat(n, d))
}

/// Random exact series with terms of alpha in `[1/2, 3]`.
pub fn arb_series(max_terms: usize) -> impl Strategy<Value = R> {
    prop::collection::vec((arb_exponent(1, 6, -2, 3), arb_coef()), 1..=max_terms).prop_map(R::polynomial)
}

/// `a x^lam + tail` with tail strictly above the lead.
pub fn arb_lh(max_terms: usize) -> impl Strategy<Value = R> {
    (
        prop::sample::select(vec![q(1, 2), q(1, 1), q(1, 1), q(3, 2), q(2, 1)]),
        prop::sample::select(vec![rat(1, 1), rat(1, 1), rat(4, 1), rat(1, 4)]),
        prop::collection::vec((1i64..=4, -1i64..=3, arb_coef()), 0..=max_terms),
    )
        .prop_map(|(lam, a, tail)| {
            let mut ts = vec![(Exponent::new(lam, 0), a)];
            for (da, k, c) in tail {
                let ex = Exponent::new(lam + q(da, 2), k);
                ts.push((ex, c));
            }
            R::polynomial(ts)
        })
}

/// Parabolic `x + tail` with tail of order above x.
pub fn arb_parabolic(max_terms: usize) -> impl Strategy<Value = R> {
    prop::collection::vec((2i64..=6, 0i64..=3, arb_coef()), 1..=max_terms).prop_map(|tail| {
        let mut ts = vec![(e(1, 0), rat(1, 1))];
        for (h, k, c) in tail {
            let k = if h == 2 { k.max(1) } else { k };
            ts.push((Exponent::new(q(h, 2), k), c));
        }
        R::polynomial(ts)
    })
}

/// Seeded random parabolic series with at most `n` terms.
pub fn random_parabolic(rng: &mut StdRng, n: usize, with_logs: bool) -> R {
    let mut ts = vec![(e(1, 0), rat(1, 1))];
    let lead_alpha = rng.gen_range(2..=3);
    let lead_k = if with_logs { rng.gen_range(-1..=1) } else { 0 };
    ts.push((e(lead_alpha, lead_k), rat(rng.gen_range(1..=3), 1)));
    for _ in 0..n.saturating_sub(2) {
        let a = rng.gen_range(lead_alpha..=5);
        let k = if with_logs { rng.gen_range(lead_k.max(-1)..=2) } else { 0 };
        if (a, k) <= (lead_alpha, lead_k) {
            continue;
        }
        let c = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        ts.push((e(a, k), c));
    }
    R::polynomial(ts)
}
