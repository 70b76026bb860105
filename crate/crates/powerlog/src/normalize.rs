//! Formal normal forms.
//!
//! A series `f` in the log-free-lead class is conjugated by elementary changes
//! `cx` and `x + c x^beta L^m` until, on the target region, only the
//! normal-form slots remain:
//!
//! * parabolic `x + a x^alpha L^k + b x^(2alpha-1) L^(2k+1)`,
//! * hyperbolic `lambda x + a x L`,
//! * strongly hyperbolic `x^alpha`.
//!
//! Conjugation is always `phi^-1 o f o phi`. The constant `c` of each change
//! is found by conjugating a small model with `c = 1` and reading off the
//! coefficient produced at the target slot; the effect is linear in `c`
//! there, so `c = -d / K`.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::Coefficient;
use crate::compose::{compose, cone_slope, invert};
use crate::error::{Error, Result};
use crate::grid::{q_str, qi, Exponent, Region, Q};
use crate::series::{Classification, Transseries};

type T<C> = Transseries<C>;

#[derive(Clone, Debug, PartialEq)]
pub enum ElementaryChange<C> {
    /// `a x`.
    Linear { a: C },
    /// `x + c x^beta L^m`.
    Monomial { beta: Q, m: i64, c: C },
}

impl<C: Coefficient> ElementaryChange<C> {
    /// The change as an exact series.
    pub fn series(&self) -> T<C> {
        match self {
            ElementaryChange::Linear { a } => T::monomial(Exponent::x(), a.clone()),
            ElementaryChange::Monomial { beta, m, c } => {
                T::polynomial([(Exponent::x(), C::one()), (Exponent::new(*beta, *m), c.clone())])
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ElementaryChange::Linear { .. } => "Linear",
            ElementaryChange::Monomial { .. } => "Monomial",
        }
    }
}

impl<C: Coefficient> fmt::Display for ElementaryChange<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryChange::Linear { a } => write!(f, "{a}*x"),
            ElementaryChange::Monomial { .. } => write!(f, "{}", self.series()),
        }
    }
}

/// `(beta, m)` is an admissible order for a change: `beta > 1`, or `beta = 1`
/// and `m >= 1`.
pub fn admissible(beta: Q, m: i64) -> bool {
    beta > qi(1) || (beta == qi(1) && m >= 1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormalFormDescriptor<C> {
    ParabolicNF { alpha: Q, k: i64, a: C, b: C },
    HyperbolicNF { lambda: C, a: C },
    StronglyHyperbolicNF { alpha: Q },
}

impl<C: Coefficient> NormalFormDescriptor<C> {
    /// The normal form as an exact series.
    pub fn series(&self) -> T<C> {
        match self {
            NormalFormDescriptor::ParabolicNF { alpha, k, a, b } => T::polynomial([
                (Exponent::x(), C::one()),
                (Exponent::new(*alpha, *k), a.clone()),
                (residual_slot(*alpha, *k), b.clone()),
            ]),
            NormalFormDescriptor::HyperbolicNF { lambda, a } => {
                T::polynomial([(Exponent::x(), lambda.clone()), (Exponent::int(1, 1), a.clone())])
            }
            NormalFormDescriptor::StronglyHyperbolicNF { alpha } => T::monomial(Exponent::new(*alpha, 0), C::one()),
        }
    }

    /// Exponents allowed to carry a nonzero coefficient.
    pub fn slots(&self) -> Vec<Exponent> {
        match self {
            NormalFormDescriptor::ParabolicNF { alpha, k, .. } => {
                vec![Exponent::x(), Exponent::new(*alpha, *k), residual_slot(*alpha, *k)]
            }
            NormalFormDescriptor::HyperbolicNF { .. } => vec![Exponent::x(), Exponent::int(1, 1)],
            NormalFormDescriptor::StronglyHyperbolicNF { alpha } => vec![Exponent::new(*alpha, 0)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormalFormDescriptor::ParabolicNF { .. } => "ParabolicNF",
            NormalFormDescriptor::HyperbolicNF { .. } => "HyperbolicNF",
            NormalFormDescriptor::StronglyHyperbolicNF { .. } => "StronglyHyperbolicNF",
        }
    }
}

impl<C: Coefficient> fmt::Display for NormalFormDescriptor<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalFormDescriptor::ParabolicNF { alpha, k, a, b } => {
                write!(f, "ParabolicNF(alpha={}, k={k}, a={a}, b={b})", q_str(alpha))
            }
            NormalFormDescriptor::HyperbolicNF { lambda, a } => write!(f, "HyperbolicNF(lambda={lambda}, a={a})"),
            NormalFormDescriptor::StronglyHyperbolicNF { alpha } => {
                write!(f, "StronglyHyperbolicNF(alpha={})", q_str(alpha))
            }
        }
    }
}

fn residual_slot(alpha: Q, k: i64) -> Exponent {
    Exponent::new(alpha * qi(2) - qi(1), 2 * k + 1)
}

#[derive(Clone, Debug)]
pub struct NormalizationResult<C> {
    pub nf: NormalFormDescriptor<C>,
    pub nf_series: T<C>,
    /// `phi` with `phi^-1 o f o phi = nf_series` on `achieved_region`.
    pub phi: T<C>,
    pub steps: Vec<ElementaryChange<C>>,
    pub achieved_region: Region,
}

/// `phi^-1 o f o phi`, exact on `region` where the inputs allow it.
///
/// `phi` is an exact change (linear or `x + ...`); its inverse is computed
/// on a region large enough that the outer composition loses nothing.
pub fn conjugate<C: Coefficient>(f: &T<C>, phi: &T<C>, region: &Region) -> Result<T<C>> {
    if phi.len() == 1 && phi.order()? == Exponent::x() {
        // `f(cx)/c`: the substitution only raises powers of L.
        let c = phi.coeff(&Exponent::x());
        return Ok(compose(&f.truncate(region), phi)?.scalar_mul(&(C::one() / c)));
    }
    let (Some(a), Some(d)) = (region.alpha_max(), region.depth()) else {
        return Err(Error::UnboundedRegion);
    };
    let lam = f.order()?.alpha;
    let s = region.slope().max(cone_slope(&phi.parabolic_tail().mul_monomial(&Exponent::new(-qi(1), 0), &C::one())));
    let a0 = if lam < qi(1) { a / lam } else { a };
    // Smallest region with slope `s` containing `region` (up to alpha a0).
    let mut work = Region::from_parts(Some(a0), Some(d + (s - region.slope()) * a0), s);
    let mut best: Option<T<C>> = None;
    for _ in 0..6 {
        let inner = compose(&f.truncate(&work), &phi.truncate(&work))?;
        let pinv = invert(&phi.truncate(&work))?;
        let out = compose(&pinv, &inner)?;
        if out.region().covers(region) {
            return Ok(out.truncate(region));
        }
        best = Some(out);
        work = work.grow(qi(1), s + qi(1));
    }
    Ok(best.unwrap().truncate(region))
}

/// Coefficient produced at `target` by conjugating `model` with `change`,
/// computed on a small region just large enough to contain `target`.
fn probe<C: Coefficient>(model: &T<C>, change: &T<C>, target: &Exponent) -> Result<C> {
    let lead = model.order()?;
    let eps = model.mul_monomial(&Exponent::new(-lead.alpha, 0), &C::one()).sub(&T::constant(model.coeff(&lead)));
    let eps_phi = change.sub(&T::x()).mul_monomial(&Exponent::new(-qi(1), 0), &C::one());
    let mut s = cone_slope(&eps).max(cone_slope(&eps_phi)).max(Q::zero());
    for _ in 0..6 {
        let region = Region::from_parts(Some(target.alpha), Some(qi(target.k) + s * target.alpha), s);
        let out = conjugate(model, change, &region)?;
        if out.region().contains(target) {
            return Ok(out.coeff(target) - model.coeff(target));
        }
        s += qi(1);
    }
    Err(Error::RegionExhausted(format!("probe at {target} never became exact")))
}

fn solve_by_probe<C: Coefficient>(model: &T<C>, beta: Q, m: i64, target: &Exponent, d: &C) -> Result<Option<C>> {
    let unit = ElementaryChange::Monomial { beta, m, c: C::one() }.series();
    let k = probe(model, &unit, target)?;
    if k.negligible(C::DEFAULT_TOL) {
        return Ok(None);
    }
    Ok(Some(-d.clone() / k))
}

/// Change cancelling `d x^gamma L^r` against the parabolic lead
/// `x + a x^alpha L^k`. `None` at the residual slot `(2alpha-1, 2k+1)`.
pub fn solve_homological_parabolic<C: Coefficient>(
    lead: (Q, i64, C),
    target: (Q, i64, C),
) -> Result<Option<ElementaryChange<C>>> {
    let (alpha, k, a) = lead;
    let (gamma, r, d) = target;
    let lead_e = Exponent::new(alpha, k);
    let te = Exponent::new(gamma, r);
    if lead_e <= Exponent::x() || te <= lead_e || a.is_zero() {
        return Err(Error::NotApplicable(format!("target {te} against lead {lead_e}")));
    }
    let two_alpha = alpha * qi(2) - qi(1);
    let (beta, m) = if gamma != two_alpha {
        (gamma - alpha + qi(1), r - k)
    } else if r != 2 * k + 1 {
        (alpha, r - k - 1)
    } else {
        return Ok(None);
    };
    if !admissible(beta, m) {
        return Err(Error::InadmissibleChange { beta: q_str(&beta), m });
    }
    let model = T::polynomial([(Exponent::x(), C::one()), (lead_e, a)]);
    match solve_by_probe(&model, beta, m, &te, &d)? {
        Some(c) => Ok(Some(ElementaryChange::Monomial { beta, m, c })),
        None => Err(Error::NoSolution(format!("degenerate homological equation at {te}"))),
    }
}

/// Change cancelling `d x^gamma L^r` against `lambda x`. `None` at the slots
/// `(1,0)` and `(1,1)`.
pub fn solve_homological_hyperbolic<C: Coefficient>(lambda: &C, target: (Q, i64, C)) -> Result<Option<ElementaryChange<C>>> {
    let (gamma, r, d) = target;
    let te = Exponent::new(gamma, r);
    if te <= Exponent::x() {
        return if te == Exponent::x() { Ok(None) } else { Err(Error::NotApplicable(format!("target {te}"))) };
    }
    let (beta, m) = if gamma != qi(1) {
        (gamma, r)
    } else if r >= 2 {
        (qi(1), r - 1)
    } else {
        return Ok(None);
    };
    let model = T::monomial(Exponent::x(), lambda.clone());
    match solve_by_probe(&model, beta, m, &te, &d)? {
        Some(c) => Ok(Some(ElementaryChange::Monomial { beta, m, c })),
        None => Err(Error::NoSolution(format!("degenerate homological equation at {te}"))),
    }
}

/// Change cancelling `d x^gamma L^r` against `x^alpha`, `alpha != 1`.
pub fn solve_homological_strongly_hyperbolic<C: Coefficient>(
    alpha: Q,
    target: (Q, i64, C),
) -> Result<ElementaryChange<C>> {
    let (gamma, r, d) = target;
    let te = Exponent::new(gamma, r);
    if alpha == qi(1) || !alpha.is_positive() {
        return Err(Error::NotStronglyHyperbolic);
    }
    if te <= Exponent::new(alpha, 0) {
        return Err(Error::NotApplicable(format!("target {te} against lead x^{}", q_str(&alpha))));
    }
    let beta = if gamma == alpha {
        qi(1)
    } else if alpha > qi(1) {
        gamma - alpha + qi(1)
    } else {
        gamma / alpha
    };
    if !admissible(beta, r) {
        return Err(Error::NoSolution(format!("no admissible change reaches {te}")));
    }
    let model = T::monomial(Exponent::new(alpha, 0), C::one());
    match solve_by_probe(&model, beta, r, &te, &d)? {
        Some(c) => Ok(ElementaryChange::Monomial { beta, m: r, c }),
        None => Err(Error::NoSolution(format!("degenerate homological equation at {te}"))),
    }
}

/// Region for a one-off conjugation of `f`: its own region if bounded,
/// else one extending a little past the stored terms.
fn exact_region_for<C: Coefficient>(f: &T<C>) -> Region {
    if f.region().is_bounded() {
        return f.region().clone();
    }
    let amax = f.terms().keys().map(|e| e.alpha).max().unwrap_or(qi(1)) + qi(1);
    let kmax = f.terms().keys().map(|e| e.k).max().unwrap_or(0).max(0) + 2;
    let class = f.classify().unwrap_or(Classification::NotInLH);
    let slope = initial_slope(f, class).unwrap_or(Q::zero());
    Region::slanted(amax, kmax, slope)
}

/// Normalize the leading coefficient: `|a| x^alpha -> x^alpha` (parabolic,
/// `alpha > 1`) or `lambda x^alpha -> x^alpha` (strongly hyperbolic).
pub fn linear_change_leading<C: Coefficient>(f: &T<C>) -> Result<(ElementaryChange<C>, T<C>)> {
    let class = f.classify()?;
    let (lead, a) = match class {
        Classification::StronglyHyperbolic => f.leading()?,
        Classification::Parabolic => f.parabolic_tail().leading()?,
        Classification::NotInLH => return Err(Error::NotLH),
        _ => return Err(Error::NotApplicable("linear change of a hyperbolic series".into())),
    };
    if lead.alpha <= qi(1) && class == Classification::Parabolic {
        return Err(Error::NotApplicable("leading coefficient of x + a x L^k cannot be scaled".into()));
    }
    let c = a.abs().pow_q(&(-(lead.alpha - qi(1)).recip()))?;
    let change = ElementaryChange::Linear { a: c };
    if change_is_identity(&change) {
        return Ok((change, f.clone()));
    }
    let g = conjugate(f, &change.series(), &exact_region_for(f))?;
    Ok((change, g))
}

/// Remove the `(alpha, k+1)` coefficient of `x + a x^alpha L^k + a1 x^alpha L^(k+1) + ...`
/// with `c x`, `c = exp(-a1/(k a))`.
pub fn linear_change_second<C: Coefficient>(f: &T<C>) -> Result<(ElementaryChange<C>, T<C>)> {
    if f.classify()? != Classification::Parabolic {
        return Err(Error::NotParabolic);
    }
    let (lead, a) = f.parabolic_tail().leading()?;
    if lead.k == 0 {
        return Err(Error::NotApplicable("lead has k = 0; use a monomial change".into()));
    }
    let a1 = f.coeff(&Exponent::new(lead.alpha, lead.k + 1));
    let c = (-a1 / (C::from_i64(lead.k) * a)).exp()?;
    let change = ElementaryChange::Linear { a: c };
    if change_is_identity(&change) {
        return Ok((change, f.clone()));
    }
    let g = conjugate(f, &change.series(), &exact_region_for(f))?;
    Ok((change, g))
}

fn change_is_identity<C: Coefficient>(ch: &ElementaryChange<C>) -> bool {
    match ch {
        ElementaryChange::Linear { a } => a.near(&C::one(), C::DEFAULT_TOL),
        ElementaryChange::Monomial { c, .. } => c.negligible(0.0),
    }
}

/// Slope that keeps every change used on `f` inside the cone of the working
/// region, so that conjugations on it are exact.
fn initial_slope<C: Coefficient>(f: &T<C>, class: Classification) -> Result<Q> {
    let (e0, _) = f.leading()?;
    let mut s = Q::zero();
    let mut need = |v: Q| {
        if v > s {
            s = v;
        }
    };
    match class {
        Classification::Parabolic => {
            let h = f.parabolic_tail();
            let Ok((lead, _)) = h.leading() else { return Ok(s) };
            if lead.alpha > qi(1) {
                need(qi(1 - lead.k) / (lead.alpha - qi(1)));
            }
            for e in h.terms().keys() {
                if e.alpha > qi(1) && e.k < 0 {
                    need(qi(-e.k) / (e.alpha - qi(1)));
                }
                if e.alpha > lead.alpha {
                    need(qi(lead.k - e.k + 1) / (e.alpha - lead.alpha));
                }
            }
        }
        Classification::HyperbolicContraction | Classification::HyperbolicExpansion => {
            for e in f.terms().keys() {
                if e.alpha > qi(1) && e.k < 0 {
                    need(qi(-e.k) / (e.alpha - qi(1)));
                }
            }
        }
        Classification::StronglyHyperbolic => {
            for e in f.terms().keys() {
                if e.alpha > e0.alpha && e.k < 0 {
                    need(qi(-e.k) / (e.alpha - e0.alpha));
                }
            }
        }
        Classification::NotInLH => return Err(Error::NotLH),
    }
    Ok(s)
}

/// Whether `e` is a normal-form slot for the given lead.
fn is_nf_slot(class: Classification, lead: &Exponent, e: &Exponent) -> bool {
    match class {
        Classification::Parabolic => *e == Exponent::x() || e == lead || *e == residual_slot(lead.alpha, lead.k),
        Classification::HyperbolicContraction | Classification::HyperbolicExpansion => {
            *e == Exponent::x() || *e == Exponent::int(1, 1)
        }
        _ => e == lead,
    }
}

enum Outcome<C> {
    Done(NormalizationResult<C>),
    /// The working slope was too small for a change; retry with this one.
    Steeper(Q),
}

/// Normal form of `f` on `target` (a bounded region).
pub fn normal_form<C: Coefficient>(f: &T<C>, target: &Region) -> Result<NormalizationResult<C>> {
    let class = f.classify()?;
    if class == Classification::NotInLH {
        return Err(Error::NotLH);
    }
    let (Some(amax), Some(kmax)) = (target.alpha_max(), target.k_max()) else {
        return Err(Error::UnboundedRegion);
    };
    let mut slope = initial_slope(f, class)?;
    let mut margin = Q::zero();
    let mut last_err = None;
    for _ in 0..8 {
        let work = Region::slanted(amax, kmax, slope).grow(Q::zero(), margin);
        match run(f, class, target, &work)? {
            Outcome::Done(res) => {
                if res.achieved_region.covers(target) || f.region().meet(target) == res.achieved_region {
                    return Ok(res);
                }
                last_err = Some(format!(
                    "achieved {} instead of {target}",
                    res.achieved_region
                ));
                if res.nf_series.region().alpha_max().is_some_and(|a| a < amax) {
                    // Lost alpha range cannot be recovered by a deeper region.
                    return check_nonempty(res, target);
                }
                margin += qi(2);
            }
            Outcome::Steeper(s) => slope = s,
        }
    }
    Err(Error::RegionExhausted(last_err.unwrap_or_else(|| format!("no working region reaches {target}"))))
}

fn check_nonempty<C: Coefficient>(res: NormalizationResult<C>, target: &Region) -> Result<NormalizationResult<C>> {
    let lead = res.nf.slots()[0];
    if res.achieved_region.contains(&lead) {
        Ok(res)
    } else {
        Err(Error::RegionExhausted(format!("achieved {} of {target}", res.achieved_region)))
    }
}

fn run<C: Coefficient>(f: &T<C>, class: Classification, target: &Region, work: &Region) -> Result<Outcome<C>> {
    let tol = C::DEFAULT_TOL;
    let mut g = f.truncate(work);
    let mut steps: Vec<ElementaryChange<C>> = vec![];
    let mut phi: T<C> = T::x();

    let apply = |g: &T<C>, phi: &T<C>, ch: &ElementaryChange<C>| -> Result<(T<C>, T<C>)> {
        let s = ch.series();
        let g2 = conjugate(g, &s, work)?;
        let p2 = compose(&phi.truncate(work), &s)?;
        Ok((g2, p2))
    };

    // Leading normalization.
    let lead_of = |g: &T<C>| -> Result<(Exponent, C)> {
        match class {
            Classification::Parabolic => g.parabolic_tail().leading(),
            _ => g.leading(),
        }
    };
    let (lead, a) = lead_of(&g)?;
    let scale = match class {
        Classification::Parabolic if lead.alpha > qi(1) => Some(a.abs()),
        Classification::StronglyHyperbolic => Some(a.clone()),
        _ => None,
    };
    if let Some(s) = scale {
        let c = s.pow_q(&(-(lead.alpha - qi(1)).recip()))?;
        let ch = ElementaryChange::Linear { a: c };
        if !change_is_identity(&ch) {
            (g, phi) = apply(&g, &phi, &ch)?;
            steps.push(ch);
        }
    }
    let (lead, a) = lead_of(&g)?;
    let lambda = g.coeff(&Exponent::x());

    let mut cursor = lead;
    let mut last_order: Option<Exponent> = None;
    loop {
        let next = g
            .iter()
            .find(|(e, c)| **e > cursor && target.contains(e) && !is_nf_slot(class, &lead, e) && !c.negligible(tol))
            .map(|(e, c)| (*e, c.clone()));
        let Some((te, d)) = next else { break };
        cursor = te;
        let ch = match class {
            Classification::Parabolic => {
                if lead.alpha == qi(1) && te == Exponent::new(qi(1), lead.k + 1) {
                    let c = (-d.clone() / (C::from_i64(lead.k) * a.clone()))
                        .exp()
                        .map_err(|_| Error::NeedsFloatMode(format!("linear change at slot {te}")))?;
                    Some(ElementaryChange::Linear { a: c })
                } else {
                    solve_homological_parabolic((lead.alpha, lead.k, a.clone()), (te.alpha, te.k, d.clone()))
                        .map_err(|e| slot_context(e, &te))?
                }
            }
            Classification::HyperbolicContraction | Classification::HyperbolicExpansion => {
                solve_homological_hyperbolic(&lambda, (te.alpha, te.k, d.clone())).map_err(|e| slot_context(e, &te))?
            }
            _ => Some(
                solve_homological_strongly_hyperbolic(lead.alpha, (te.alpha, te.k, d.clone()))
                    .map_err(|e| slot_context(e, &te))?,
            ),
        };
        let Some(ch) = ch else { continue };
        if let ElementaryChange::Monomial { beta, m, .. } = &ch {
            if *beta > qi(1) && qi(*m) + work.slope() * (*beta - qi(1)) < Q::zero() {
                return Ok(Outcome::Steeper(qi(-*m) / (*beta - qi(1))));
            }
            let ord = Exponent::new(*beta, *m);
            debug_assert!(last_order.is_none_or(|o| o < ord), "steps must increase");
            last_order = Some(ord);
        }
        let (mut g2, p2) = apply(&g, &phi, &ch)?;
        // Keep what is already normalized; float conjugation adds rounding noise there.
        for (e, c) in g.iter() {
            if *e < te && g2.region().contains(e) {
                g2.set_coeff(*e, c.clone());
            }
        }
        let stale: Vec<Exponent> = g2.terms().keys().filter(|e| **e < te && g.coeff(e).is_zero()).copied().collect();
        for e in stale {
            g2.set_coeff(e, C::zero());
        }
        g2.set_coeff(te, C::zero());
        g = g2;
        phi = p2;
        steps.push(ch);
    }

    let achieved = g.region().meet(target);
    let nf_series = g.truncate(&achieved);
    let nf = match class {
        Classification::Parabolic => NormalFormDescriptor::ParabolicNF {
            alpha: lead.alpha,
            k: lead.k,
            a: nf_series.coeff(&lead),
            b: nf_series.coeff(&residual_slot(lead.alpha, lead.k)),
        },
        Classification::StronglyHyperbolic => NormalFormDescriptor::StronglyHyperbolicNF { alpha: lead.alpha },
        _ => NormalFormDescriptor::HyperbolicNF { lambda, a: nf_series.coeff(&Exponent::int(1, 1)) },
    };
    let phi = phi.truncate(work);
    Ok(Outcome::Done(NormalizationResult { nf, nf_series, phi, steps, achieved_region: achieved }))
}

fn slot_context(e: Error, slot: &Exponent) -> Error {
    match e {
        Error::NeedsFloatMode(m) => Error::NeedsFloatMode(format!("{m} (slot {slot})")),
        other => other,
    }
}
