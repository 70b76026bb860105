//! Exponents `x^alpha L^k`, their lexicographic order, and exactness regions.
//!
//! A [`Region`] is the set `{alpha <= A, k + s*alpha <= D}` for a slope
//! `s >= 0`. With `s = 0` it is the rectangle `{alpha <= A, k <= K}`; a
//! positive slope tilts the `k` bound so that it grows toward small `alpha`.
//! Products of a series with anything supported in the cone
//! `{alpha >= 0, k + s*alpha >= 0}` never leave such a region, which is what
//! keeps conjugations by `x + c*x^b*L^m` with negative `m` lossless.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational used for exponents, slopes and region bounds.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Render a rational as `n` or `n/d`.
pub fn q_str(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Q::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Q::from_integer),
    }
}

/// The monomial `x^alpha L^k` with `L = -1/log x`.
///
/// The derived order compares `alpha` first, then `k`: this is the
/// lexicographic order in which `L` is smaller than any constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent {
    pub alpha: Q,
    pub k: i64,
}

impl Exponent {
    pub fn new(alpha: Q, k: i64) -> Self {
        Exponent { alpha, k }
    }

    pub fn int(alpha: i64, k: i64) -> Self {
        Exponent { alpha: qi(alpha), k }
    }

    pub fn zero() -> Self {
        Exponent::int(0, 0)
    }

    /// Exponent of `x` itself.
    pub fn x() -> Self {
        Exponent::int(1, 0)
    }

    pub fn in_l(&self) -> bool {
        self.alpha > Q::zero()
    }

    pub fn checked_add(&self, o: &Exponent) -> Exponent {
        Exponent { alpha: self.alpha + o.alpha, k: self.k + o.k }
    }

    pub fn sub(&self, o: &Exponent) -> Exponent {
        Exponent { alpha: self.alpha - o.alpha, k: self.k - o.k }
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, o: Exponent) -> Exponent {
        self.checked_add(&o)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{{{}}} L^{{{}}}", q_str(&self.alpha), self.k)
    }
}

pub fn lex_cmp(e1: &Exponent, e2: &Exponent) -> Ordering {
    e1.cmp(e2)
}

/// All pairs from `a x b` summing to `target`.
pub fn decompositions(
    target: &Exponent,
    a: &BTreeSet<Exponent>,
    b: &BTreeSet<Exponent>,
) -> Vec<(Exponent, Exponent)> {
    a.iter()
        .filter_map(|e1| {
            let e2 = target.sub(e1);
            b.contains(&e2).then_some((*e1, e2))
        })
        .collect()
}

/// Finite sums of generators whose alpha stays within `bound`, sorted.
pub fn semigroup_elements_up_to(generators: &[Exponent], bound: Q) -> Result<Vec<Exponent>> {
    if let Some(g) = generators.iter().find(|g| !g.in_l()) {
        return Err(Error::InvalidGenerator(g.to_string()));
    }
    let mut seen: BTreeSet<Exponent> = BTreeSet::new();
    let mut frontier: Vec<Exponent> = generators.iter().copied().filter(|g| g.alpha <= bound).collect();
    while let Some(e) = frontier.pop() {
        if !seen.insert(e) {
            continue;
        }
        for g in generators {
            let s = e + *g;
            if s.alpha <= bound && !seen.contains(&s) {
                frontier.push(s);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Upper bound that may be infinite (`None`).
pub type Bound = Option<Q>;

pub(crate) fn bmin(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a.min(b)),
    }
}

pub(crate) fn badd(a: Bound, d: Q) -> Bound {
    a.map(|a| a + d)
}

pub(crate) fn bsum(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    }
}

/// Exactness region `{alpha <= alpha_max, k + slope*alpha <= depth}`.
///
/// Unbounded components are `None`. A bounded depth always comes with a
/// bounded `alpha_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    alpha_max: Bound,
    depth: Bound,
    slope: Q,
}

impl Region {
    /// The rectangle `{alpha <= alpha_max, k <= k_max}`.
    pub fn new(alpha_max: Q, k_max: i64) -> Region {
        Region { alpha_max: Some(alpha_max), depth: Some(qi(k_max)), slope: Q::zero() }
    }

    /// Slanted region whose inscribed rectangle is `(alpha_max, k_max)`.
    pub fn slanted(alpha_max: Q, k_max: i64, slope: Q) -> Region {
        assert!(!slope.is_negative(), "slope must be >= 0");
        Region { alpha_max: Some(alpha_max), depth: Some(qi(k_max) + slope * alpha_max), slope }
    }

    /// No truncation at all: the stored terms are the whole series.
    pub fn full() -> Region {
        Region { alpha_max: None, depth: None, slope: Q::zero() }
    }

    pub fn from_parts(alpha_max: Bound, depth: Bound, slope: Q) -> Region {
        assert!(!slope.is_negative(), "slope must be >= 0");
        assert!(depth.is_none() || alpha_max.is_some(), "bounded depth needs bounded alpha");
        Region { alpha_max, depth, slope }
    }

    pub fn alpha_max(&self) -> Bound {
        self.alpha_max
    }

    pub fn depth(&self) -> Bound {
        self.depth
    }

    pub fn slope(&self) -> Q {
        self.slope
    }

    /// Largest `K` with the rectangle `(alpha_max, K)` inside the region.
    pub fn k_max(&self) -> Option<i64> {
        let d = self.depth?;
        let a = self.alpha_max?;
        Some((d - self.slope * a).floor().to_integer())
    }

    pub fn is_full(&self) -> bool {
        self.alpha_max.is_none() && self.depth.is_none()
    }

    pub fn is_bounded(&self) -> bool {
        self.alpha_max.is_some() && self.depth.is_some()
    }

    /// `k + slope*alpha`.
    pub fn weight(&self, e: &Exponent) -> Q {
        qi(e.k) + self.slope * e.alpha
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.alpha_max.is_none_or(|a| e.alpha <= a) && self.depth.is_none_or(|d| self.weight(e) <= d)
    }

    /// True when the region has no point with `alpha >= floor`.
    pub fn is_empty_above(&self, floor: Q) -> bool {
        self.alpha_max.is_some_and(|a| a < floor)
    }

    /// Re-express with another slope, keeping only points that are certainly
    /// inside. `mu` is a lower bound on the alpha of every term of the series.
    pub fn with_slope(&self, slope: Q, mu: Q) -> Region {
        if slope == self.slope || self.depth.is_none() {
            return Region { slope, ..self.clone() };
        }
        let a = self.alpha_max.expect("bounded depth needs bounded alpha");
        let d = self.depth.unwrap();
        let depth = if slope < self.slope {
            d - (self.slope - slope) * a
        } else {
            d + (slope - self.slope) * mu.min(a)
        };
        Region { alpha_max: self.alpha_max, depth: Some(depth), slope }
    }

    /// Slope two regions can share without loss where possible: an
    /// unbounded depth adapts to any slope.
    pub fn common_slope(&self, other: &Region) -> Q {
        match (self.depth, other.depth) {
            (None, None) => self.slope.max(other.slope),
            (None, Some(_)) => other.slope,
            (Some(_), None) => self.slope,
            (Some(_), Some(_)) => self.slope.min(other.slope),
        }
    }

    /// Intersection, expressed with the common slope.
    pub fn meet(&self, other: &Region) -> Region {
        let s = self.common_slope(other);
        let a = self.with_slope(s, Q::zero());
        let b = other.with_slope(s, Q::zero());
        Region { alpha_max: bmin(a.alpha_max, b.alpha_max), depth: bmin(a.depth, b.depth), slope: s }
    }

    /// The region translated by a monomial.
    pub fn shift(&self, e: &Exponent) -> Region {
        Region {
            alpha_max: badd(self.alpha_max, e.alpha),
            depth: badd(self.depth, self.weight(e)),
            slope: self.slope,
        }
    }

    /// Whether `other` is a subset of `self` on `alpha >= 0`.
    pub fn covers(&self, other: &Region) -> bool {
        let a_ok = match (self.alpha_max, other.alpha_max) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        if !a_ok {
            return false;
        }
        match (self.depth, other.depth) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(d2)) => {
                // k <= d2 - s2*alpha must imply k <= d - s*alpha for alpha in [0, A2].
                let a2 = other.alpha_max.unwrap();
                let ds = self.slope - other.slope;
                let worst = if ds.is_positive() { a2.max(Q::zero()) } else { Q::zero() };
                d2 + ds * worst <= d
            }
        }
    }

    /// Same region with bounds grown by `da` in alpha and `dd` in depth.
    pub fn grow(&self, da: Q, dd: Q) -> Region {
        Region { alpha_max: badd(self.alpha_max, da), depth: badd(self.depth, dd), slope: self.slope }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.alpha_max.map_or("inf".to_string(), |a| q_str(&a));
        let k = self.k_max().map_or("inf".to_string(), |k| k.to_string());
        if self.slope.is_zero() {
            write!(f, "(alpha_max={a}, k_max={k})")
        } else {
            write!(f, "(alpha_max={a}, k_max={k}, slope={})", q_str(&self.slope))
        }
    }
}

/// Support bookkeeping: declared lower bound on alpha and the per-alpha
/// minimal `k` over stored terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportMeta {
    pub mu: Q,
    pub kmin: Option<i64>,
    pub per_alpha_kmin: BTreeMap<Q, i64>,
}

impl SupportMeta {
    pub fn from_support<'a>(mu: Q, support: impl IntoIterator<Item = &'a Exponent>) -> SupportMeta {
        let mut per_alpha_kmin: BTreeMap<Q, i64> = BTreeMap::new();
        for e in support {
            per_alpha_kmin.entry(e.alpha).and_modify(|k| *k = (*k).min(e.k)).or_insert(e.k);
        }
        let kmin = per_alpha_kmin.values().copied().min();
        SupportMeta { mu, kmin, per_alpha_kmin }
    }
}
