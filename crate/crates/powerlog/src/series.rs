//! Truncated transseries with an exactness region.
//!
//! A [`Transseries`] stores finitely many terms together with a [`Region`]
//! on which those terms are guaranteed to be the true coefficients, and a
//! lower bound `mu` on the alpha of every true term. Outside the region
//! nothing is claimed. Every operation here propagates the region by a rule
//! that is sound for any true series consistent with the inputs.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{badd, bmin, bsum, q_str, qi, Bound, Exponent, Region, SupportMeta, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct Transseries<C> {
    terms: BTreeMap<Exponent, C>,
    region: Region,
    mu: Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Parabolic,
    HyperbolicContraction,
    HyperbolicExpansion,
    StronglyHyperbolic,
    NotInLH,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Parabolic => "Parabolic",
            Classification::HyperbolicContraction => "HyperbolicContraction",
            Classification::HyperbolicExpansion => "HyperbolicExpansion",
            Classification::StronglyHyperbolic => "StronglyHyperbolic",
            Classification::NotInLH => "NotInLH",
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Classification::HyperbolicContraction | Classification::HyperbolicExpansion)
    }
}

impl<C: Coefficient> Transseries<C> {
    /// Series from terms; terms outside `region` are dropped and `mu` is the
    /// smallest stored alpha, i.e. the leading term is taken to be stored.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, C)>, region: Region) -> Self {
        let mut map: BTreeMap<Exponent, C> = BTreeMap::new();
        for (e, c) in terms {
            if !region.contains(&e) {
                continue;
            }
            let slot = map.entry(e).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        map.retain(|_, c| !c.is_zero());
        let mu = map.keys().next().map(|e| e.alpha).unwrap_or_else(|| region.alpha_max().unwrap_or(Q::zero()));
        Transseries { terms: map, region, mu }
    }

    /// Exact finite series.
    pub fn polynomial(terms: impl IntoIterator<Item = (Exponent, C)>) -> Self {
        Self::from_terms(terms, Region::full())
    }

    pub fn zero() -> Self {
        Transseries { terms: BTreeMap::new(), region: Region::full(), mu: Q::zero() }
    }

    pub fn monomial(e: Exponent, c: C) -> Self {
        Self::polynomial([(e, c)])
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Exponent::zero(), c)
    }

    /// The identity `x`.
    pub fn x() -> Self {
        Self::monomial(Exponent::x(), C::one())
    }

    /// The series `L = -1/log x`.
    pub fn ell() -> Self {
        Self::monomial(Exponent::int(0, 1), C::one())
    }

    pub(crate) fn raw(terms: BTreeMap<Exponent, C>, region: Region, mu: Q) -> Self {
        let mut s = Transseries { terms, region, mu };
        s.prune();
        s
    }

    fn prune(&mut self) {
        let region = self.region.clone();
        self.terms.retain(|e, c| !c.is_zero() && region.contains(e));
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, C> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn mu(&self) -> Q {
        self.mu
    }

    pub fn meta(&self) -> SupportMeta {
        SupportMeta::from_support(self.mu, self.terms.keys())
    }

    /// True when some stored exponent has `alpha <= 0`.
    pub fn is_ambient(&self) -> bool {
        self.terms.keys().any(|e| !e.in_l())
    }

    /// Stored and certainly zero everywhere.
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.region.is_full()
    }

    pub fn coeff(&self, e: &Exponent) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    /// Replace the declared lower bound on alpha.
    pub fn with_mu(mut self, mu: Q) -> Self {
        self.mu = mu;
        self
    }

    /// Declare a different region (no terms are added; terms outside are dropped).
    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self.prune();
        self
    }

    /// Forget everything outside `region`.
    pub fn truncate(&self, region: &Region) -> Self {
        let r = self.region.meet(region);
        let mut s = self.clone();
        s.region = r;
        s.prune();
        s
    }

    /// Express the region with another slope (sound, possibly smaller).
    pub fn with_slope(&self, slope: Q) -> Self {
        let mut s = self.clone();
        s.region = self.region.with_slope(slope, self.mu);
        s.prune();
        s
    }

    pub fn set_coeff(&mut self, e: Exponent, c: C) {
        if c.is_zero() {
            self.terms.remove(&e);
        } else if self.region.contains(&e) {
            self.terms.insert(e, c);
        }
    }

    /// `self - x` with the `x` slot dropped when only rounding noise is left.
    pub fn parabolic_tail(&self) -> Self {
        let mut h = self.sub(&Self::x());
        let ex = Exponent::x();
        if h.coeff(&ex).near(&C::zero(), C::DEFAULT_TOL) {
            h.terms.remove(&ex);
        }
        h
    }

    /// `self - 1` for a unit-led series; the constant slot is removed outright.
    pub(crate) fn minus_one(&self) -> Self {
        let mut u = self.sub(&Self::one_like());
        u.terms.remove(&Exponent::zero());
        u
    }

    /// Drop coefficients with absolute value at most `tol` (float mode noise).
    pub fn chop(&self, tol: f64) -> Self {
        let mut s = self.clone();
        s.terms.retain(|_, c| !c.negligible(tol));
        s
    }

    pub fn leading(&self) -> Result<(Exponent, C)> {
        self.terms.iter().next().map(|(e, c)| (*e, c.clone())).ok_or(Error::ZeroSeries)
    }

    pub fn order(&self) -> Result<Exponent> {
        self.leading().map(|(e, _)| e)
    }

    pub fn classify(&self) -> Result<Classification> {
        let (e, c) = self.leading()?;
        if e.k != 0 || !c.is_positive() || !e.in_l() {
            return Ok(Classification::NotInLH);
        }
        if e.alpha != qi(1) {
            return Ok(Classification::StronglyHyperbolic);
        }
        if c.near(&C::one(), C::DEFAULT_TOL) {
            Ok(Classification::Parabolic)
        } else if c.to_f64() < 1.0 {
            Ok(Classification::HyperbolicContraction)
        } else {
            Ok(Classification::HyperbolicExpansion)
        }
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect();
        Transseries { terms, region: self.region.clone(), mu: self.mu }
    }

    pub fn scalar_mul(&self, c: &C) -> Self {
        if c.is_zero() {
            return Transseries { terms: BTreeMap::new(), region: self.region.clone(), mu: self.mu };
        }
        let terms = self.terms.iter().map(|(e, a)| (*e, a.clone() * c.clone())).collect();
        Transseries::raw(terms, self.region.clone(), self.mu)
    }

    pub fn add(&self, g: &Self) -> Self {
        if g.is_exact_zero() {
            return self.clone();
        }
        if self.is_exact_zero() {
            return g.clone();
        }
        let region = self.region.meet(&g.region);
        let mut terms = self.terms.clone();
        for (e, c) in &g.terms {
            let slot = terms.entry(*e).or_insert_with(C::zero);
            *slot = slot.clone() + c.clone();
        }
        Transseries::raw(terms, region, self.mu.min(g.mu))
    }

    pub fn sub(&self, g: &Self) -> Self {
        self.add(&g.neg())
    }

    /// Multiply by `c * x^e`; the region moves with the monomial.
    pub fn mul_monomial(&self, e: &Exponent, c: &C) -> Self {
        let terms = self.terms.iter().map(|(t, a)| (*t + *e, a.clone() * c.clone())).collect();
        Transseries::raw(terms, self.region.shift(e), self.mu + e.alpha)
    }

    /// Smallest weight over stored terms with `alpha <= amax`.
    fn min_weight(&self, region: &Region, amax: Bound) -> Bound {
        self.terms
            .keys()
            .filter(|e| amax.is_none_or(|a| e.alpha <= a))
            .map(|e| region.weight(e))
            .min()
    }

    /// Region on which the product of `self` and `g` is exact.
    ///
    /// With `A` the alpha bound, `D` the depth, `mu` the alpha floor and
    /// `F_g` the smallest weight of `g` that can pair with a hidden term of
    /// `self` without leaving the output alpha bound:
    /// `A = min(A_f + mu_g, A_g + mu_f)`, `D = min(D_f + F_g, D_g + F_f)`.
    ///
    /// Both input slopes are tried; the one leaving more depth at the lowest
    /// alpha of the product wins.
    pub fn product_region(&self, g: &Self) -> Region {
        let mut best = self.product_region_at(g, self.region.common_slope(&g.region));
        for s in [self.region.slope(), g.region.slope()] {
            let cand = self.product_region_at(g, s);
            if region_score(&cand, self.mu + g.mu) > region_score(&best, self.mu + g.mu) {
                best = cand;
            }
        }
        best
    }

    fn product_region_at(&self, g: &Self, s: Q) -> Region {
        let rf = self.region.with_slope(s, self.mu);
        let rg = g.region.with_slope(s, g.mu);
        let a = bmin(badd(rf.alpha_max(), g.mu), badd(rg.alpha_max(), self.mu));
        let fg = bmin(g.min_weight(&rg, badd(a, -self.mu)), rg.depth());
        let ff = bmin(self.min_weight(&rf, badd(a, -g.mu)), rf.depth());
        let d = bmin(bsum(rf.depth(), fg), bsum(rg.depth(), ff));
        Region::from_parts(a, d, s)
    }

    pub fn mul(&self, g: &Self) -> Result<Self> {
        self.mul_within(g, &Region::full())
    }

    /// Product, additionally truncated to `cap`.
    pub fn mul_within(&self, g: &Self, cap: &Region) -> Result<Self> {
        if self.is_exact_zero() || g.is_exact_zero() {
            return Ok(Self::zero());
        }
        let region = self.product_region(g).meet(cap);
        let mu = self.mu + g.mu;
        let amax = region.alpha_max();
        let gt: Vec<(&Exponent, &C)> = g.terms.iter().collect();
        let mut out: BTreeMap<Exponent, C> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &gt {
                let e = *e1 + **e2;
                if amax.is_some_and(|a| e.alpha > a) {
                    break;
                }
                if !region.contains(&e) {
                    continue;
                }
                let p = c1.clone() * (*c2).clone();
                match out.get_mut(&e) {
                    Some(v) => *v = v.clone() + p,
                    None => {
                        out.insert(e, p);
                    }
                }
            }
        }
        Ok(Transseries::raw(out, region, mu))
    }

    /// `[1, u, u^2, ...]` for a small `u`, all exact on one region.
    ///
    /// `u` must have positive order and nonnegative alpha. The region is
    /// tilted if needed so that every stored term of `u` has nonnegative
    /// weight; then every power of `u` is exact on the region of `u`. The
    /// number of powers is bounded by counting how many factors fit below
    /// the alpha bound and the depth, and by `needed` when only finitely many
    /// are used.
    pub(crate) fn powers(u: &Self, cap: &Region, needed: Option<usize>) -> Result<Vec<Self>> {
        if u.is_exact_zero() {
            return Ok(vec![Self::constant(C::one())]);
        }
        if let Some((e, _)) = u.terms.iter().next() {
            if *e <= Exponent::zero() || e.alpha.is_negative() {
                return Err(Error::NotApplicable(format!("power series in a term of order {e}")));
            }
        }
        let u = u.clone().with_mu(u.mu.max(Q::zero()));
        let need = u
            .terms
            .keys()
            .filter(|e| e.alpha.is_positive() && e.k < 0)
            .map(|e| qi(-e.k) / e.alpha)
            .max()
            .unwrap_or(Q::zero());
        let u = if need > u.region.slope() { u.with_slope(need) } else { u };
        let u = u.truncate(cap);
        let region = u.region.clone();
        if region.depth().is_some_and(|d| d.is_negative()) {
            return Err(Error::EmptyRegion);
        }
        let mu_pos = u.terms.keys().filter(|e| e.alpha.is_positive()).map(|e| e.alpha).min();
        let has_flat = u.terms.keys().any(|e| e.alpha.is_zero());
        let p_max = match mu_pos {
            None => Some(0),
            Some(m) => region.alpha_max().map(|a| (a / m).floor().to_integer().max(0) as usize),
        };
        let q_max = if has_flat { region.depth().map(|d| d.floor().to_integer().max(0) as usize) } else { Some(0) };
        let bound = match (p_max, q_max) {
            (Some(p), Some(q)) => Some(p + q),
            _ => None,
        };
        let n = match (bound, needed) {
            (Some(b), Some(c)) => b.min(c),
            (Some(b), None) => b,
            (None, Some(c)) => c,
            (None, None) => return Err(Error::UnboundedRegion),
        };
        let one = Self::constant(C::one()).with_region(region.clone());
        let mut out = vec![one];
        if n == 0 {
            return Ok(out);
        }
        let mut power = u.clone();
        for j in 1..=n {
            if power.is_empty() {
                break;
            }
            if j < n {
                let next = power.mul_within(&u, &region)?;
                out.push(power);
                power = next;
            } else {
                out.push(power.clone());
            }
        }
        Ok(out)
    }

    /// `sum_j coeff(j) * u^j` for a small `u`; see [`Transseries::powers`].
    pub fn power_series(u: &Self, coeff: impl Fn(usize) -> C, needed: Option<usize>) -> Result<Self> {
        let pows = Self::powers(u, &Region::full(), needed)?;
        Ok(Self::combine(&pows, coeff))
    }

    /// `sum_j coeff(j) * pows[j]`.
    pub(crate) fn combine(pows: &[Self], coeff: impl Fn(usize) -> C) -> Self {
        let region = pows[0].region.clone();
        let mut acc: BTreeMap<Exponent, C> = BTreeMap::new();
        for (j, p) in pows.iter().enumerate() {
            let cj = coeff(j);
            if cj.is_zero() {
                continue;
            }
            for (e, c) in &p.terms {
                let v = c.clone() * cj.clone();
                match acc.get_mut(e) {
                    Some(slot) => *slot = slot.clone() + v,
                    None => {
                        acc.insert(*e, v);
                    }
                }
            }
        }
        Transseries::raw(acc, region, Q::zero())
    }

    /// `1/f`, ambient in general.
    pub fn geometric_inverse(&self) -> Result<Self> {
        let (e0, c0) = self.leading()?;
        let inv_c = C::one() / c0;
        let minus = Exponent::new(-e0.alpha, -e0.k);
        let u = self.mul_monomial(&minus, &inv_c).minus_one();
        let u = u.with_mu(self.mu - e0.alpha);
        let s = Self::power_series(&u, |j| if j % 2 == 0 { C::one() } else { -C::one() }, None)?;
        Ok(s.mul_monomial(&minus, &inv_c))
    }

    fn one_like() -> Self {
        Self::constant(C::one())
    }

    /// `self / g`.
    pub fn div(&self, g: &Self) -> Result<Self> {
        self.mul(&g.geometric_inverse()?)
    }

    /// Whether two series agree on `region` within `tol`.
    pub fn agrees_on(&self, g: &Self, region: &Region, tol: f64) -> bool {
        self.max_diff_on(g, region) <= tol
    }

    /// Largest coefficient difference over stored terms inside `region`.
    pub fn max_diff_on(&self, g: &Self, region: &Region) -> f64 {
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<&Exponent> = self.terms.keys().chain(g.terms.keys()).collect();
        for e in keys {
            if !region.contains(e) {
                continue;
            }
            let d = self.coeff(e) - g.coeff(e);
            let v = if C::EXACT {
                if d.is_zero() { 0.0 } else { d.to_f64().abs().max(f64::MIN_POSITIVE) }
            } else {
                d.to_f64().abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Per-monomial differences inside `region`, nonzero entries only.
    pub fn diff_table(&self, g: &Self, region: &Region) -> Vec<(Exponent, f64)> {
        let keys: std::collections::BTreeSet<&Exponent> = self.terms.keys().chain(g.terms.keys()).collect();
        keys.into_iter()
            .filter(|e| region.contains(e))
            .filter_map(|e| {
                let d = self.coeff(e) - g.coeff(e);
                (!d.is_zero()).then(|| (*e, d.to_f64().abs()))
            })
            .collect()
    }

    /// Convert coefficients to another field.
    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Transseries<D> {
        let terms = self.terms.iter().map(|(e, c)| (*e, f(c))).collect();
        Transseries::raw(terms, self.region.clone(), self.mu)
    }

    pub fn to_float(&self) -> Transseries<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Text form; `unicode` prints `ℓ` instead of `L`.
    pub fn to_text(&self, unicode: bool) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.to_f64() < 0.0 || format!("{c}").starts_with('-');
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term_text(e, &mag, unicode));
        }
        out
    }
}

fn term_text<C: Coefficient>(e: &Exponent, c: &C, unicode: bool) -> String {
    let mut parts: Vec<String> = vec![];
    let is_one = c == &C::one();
    if !is_one || (e.alpha.is_zero() && e.k == 0) {
        parts.push(format!("{c}"));
    }
    if !e.alpha.is_zero() {
        if e.alpha == qi(1) {
            parts.push("x".into());
        } else {
            parts.push(format!("x^{}", q_str(&e.alpha)));
        }
    }
    if e.k != 0 {
        let l = if unicode { "ℓ" } else { "L" };
        if e.k == 1 {
            parts.push(l.into());
        } else {
            parts.push(format!("{l}^{}", e.k));
        }
    }
    parts.join("*")
}

impl<C: Coefficient> fmt::Display for Transseries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(false))
    }
}

/// Depth left at alpha `mu` (in plain `k`), then the alpha bound.
/// Unbounded sorts above every bound.
fn region_score(r: &Region, mu: Q) -> ((bool, Q), (bool, Q)) {
    let key = |b: Bound| b.map_or((true, Q::zero()), |v| (false, v));
    (key(r.depth().map(|d| d - r.slope() * mu)), key(r.alpha_max()))
}
