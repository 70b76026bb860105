//! Vector fields, flows and embeddings.
//!
//! A field `X = xi d/dx` acts on series by `X g = xi g'`; its flow is the
//! Lie series `f^t = exp(tX) id = sum t^n/n! X^n id`. When `ord xi > (1,0)`
//! each `X^n id` has strictly larger order, so on a bounded region the sum is
//! finite. When `ord xi = (1,0)` every `X^n id` contributes to every monomial
//! and the sum converges per monomial only; it is summed numerically.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::coeff::{Coefficient, Rational};
use crate::compose::{compose, derivative, invert};
use crate::error::{Error, Result};
use crate::grid::{bmin, qi, Exponent, Region, Q};
use crate::normalize::{conjugate, normal_form, NormalFormDescriptor};
use crate::series::{Classification, Transseries};

type T<C> = Transseries<C>;

/// Consecutive small increments required before a weak sum is accepted.
const STALL_WINDOW: usize = 5;
/// Iteration cap for weak sums.
pub const N_MAX: usize = 500;

/// `xi d/dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<C> {
    pub xi: T<C>,
}

impl<C: Coefficient> VectorField<C> {
    pub fn new(xi: T<C>) -> Self {
        VectorField { xi }
    }

    /// `xi g'`.
    pub fn apply(&self, g: &T<C>) -> Result<T<C>> {
        self.xi.mul(&derivative(g))
    }

    /// Whether the field has a flow: `ord xi >= (1,0)`.
    pub fn check_flow(&self) -> Result<()> {
        match self.xi.order() {
            Ok(o) if o < Exponent::x() => Err(Error::NoFlow),
            _ => Ok(()),
        }
    }
}

/// Smallest slope putting `h/x` in the cone `{alpha >= 0, k + s alpha >= 0}`.
fn slope_for<C: Coefficient>(h: &T<C>) -> Q {
    h.terms()
        .keys()
        .filter(|e| e.alpha > qi(1) && e.k < 0)
        .map(|e| qi(-e.k) / (e.alpha - qi(1)))
        .max()
        .unwrap_or(Q::zero())
}

/// Working region containing `target` on which computations with `h` stay exact.
fn working_region<C: Coefficient>(target: &Region, h: &T<C>) -> Result<Region> {
    let (Some(a), Some(k)) = (target.alpha_max(), target.k_max()) else {
        return Err(Error::UnboundedRegion);
    };
    let s = slope_for(h).max(target.slope());
    Ok(Region::slanted(a, k, s))
}

/// `log F` for the composition operator `F g = g o f`, `f` parabolic:
/// `xi = sum (-1)^(j+1) H^j(id) / j` with `H g = g o f - g`.
pub fn log_iso_parabolic<C: Coefficient>(f: &T<C>, region: &Region) -> Result<VectorField<C>> {
    if f.classify()? != Classification::Parabolic {
        return Err(Error::NotParabolic);
    }
    let work = working_region(region, &f.parabolic_tail())?;
    let f = f.truncate(&work);
    let mut hj = f.parabolic_tail();
    let mu = hj.order()?.alpha;
    let mut xi = T::zero().with_region(work.clone()).with_mu(mu);
    let mut j = 1i64;
    while !hj.is_empty() {
        let c = if j % 2 == 1 { C::one() } else { -C::one() } / C::from_i64(j);
        xi = xi.add(&hj.scalar_mul(&c));
        hj = compose(&hj, &f)?.sub(&hj);
        j += 1;
        if j > 10_000 {
            return Err(Error::NonConvergence(10_000));
        }
    }
    Ok(VectorField::new(xi.with_mu(mu)))
}

/// The normal-form field of `x + a x^alpha L^k + b x^(2alpha-1) L^(2k+1)`:
/// `a x^alpha L^k / (1 + (a alpha/2) x^(alpha-1) L^k + c x^(alpha-1) L^(k+1))`
/// with `c = a k/2 - b/a`, less `a/12` when `alpha = 1, k = 1` (there `L^2k`
/// and `L^(k+1)` coincide). The time-one map of this field has residual `b`.
pub fn normal_field_parabolic<C: Coefficient>(
    alpha: Q,
    k: i64,
    a: &C,
    b: &C,
    region: &Region,
) -> Result<VectorField<C>> {
    let lead = Exponent::new(alpha, k);
    if lead <= Exponent::x() || a.is_zero() {
        return Err(Error::NotApplicable(format!("normal field with lead {lead}")));
    }
    let half = C::one() / C::from_i64(2);
    let c1 = a.clone() * C::from_q(&alpha) * half.clone();
    let mut c2 = a.clone() * C::from_i64(k) * half - b.clone() / a.clone();
    if alpha == qi(1) && k == 1 {
        c2 = c2 - a.clone() / C::from_i64(12);
    }
    let den = T::polynomial([
        (Exponent::zero(), C::one()),
        (Exponent::new(alpha - qi(1), k), c1),
        (Exponent::new(alpha - qi(1), k + 1), c2),
    ]);
    let num = T::monomial(lead, a.clone());
    let work = working_region(region, &num)?;
    // 1/den is needed up to alpha_max - alpha.
    let den = den.truncate(&work.shift(&Exponent::new(-alpha, -k)));
    let xi = num.mul(&den.geometric_inverse()?)?;
    Ok(VectorField::new(xi.truncate(&work)))
}

/// `log(lambda) x / (1 + a/(2(lambda-1)) L)`.
pub fn normal_field_hyperbolic<C: Coefficient>(lambda: &C, a: &C, region: &Region) -> Result<VectorField<C>> {
    if !lambda.is_positive() || lambda.near(&C::one(), C::DEFAULT_TOL) {
        return Err(Error::NotApplicable(format!("lambda = {lambda}")));
    }
    let lg = lambda.ln()?;
    let r = -a.clone() / (C::from_i64(2) * (lambda.clone() - C::one()));
    let (Some(_), Some(kmax)) = (region.alpha_max(), region.k_max()) else {
        return Err(Error::UnboundedRegion);
    };
    let mut terms = vec![];
    let mut c = lg;
    for j in 0..=kmax.max(0) {
        terms.push((Exponent::int(1, j), c.clone()));
        c = c * r.clone();
    }
    Ok(VectorField::new(T::from_terms(terms, region.clone())))
}

/// `phi_* X0`: the field whose flow is `phi o flow(X0) o phi^-1`,
/// `xi = (phi' xi0) o phi^-1`.
pub fn pushforward<C: Coefficient>(xi0: &VectorField<C>, phi: &T<C>, region: &Region) -> Result<VectorField<C>> {
    let (e0, c0) = phi.leading()?;
    if e0 != Exponent::x() || !c0.is_positive() {
        return Err(Error::NotL0);
    }
    if phi.len() == 1 {
        // Linear changes: (c xi0)(x/c).
        let inv = T::monomial(Exponent::x(), C::one() / c0.clone());
        let xi = compose(&xi0.xi.scalar_mul(&c0), &inv)?;
        return Ok(VectorField::new(xi));
    }
    let work = bmin_region(region, xi0.xi.region());
    let phi_w = phi.truncate(&work);
    let inv = invert(&phi_w)?;
    let g = derivative(&phi_w).mul(&xi0.xi)?;
    let xi = compose(&g, &inv)?;
    Ok(VectorField::new(xi))
}

fn bmin_region(a: &Region, b: &Region) -> Region {
    if b.is_full() {
        a.clone()
    } else {
        let m = a.meet(b);
        Region::from_parts(bmin(m.alpha_max(), a.alpha_max()), m.depth(), m.slope())
    }
}

/// Field whose time-one map is `f`, exact (or to float tolerance) on the
/// region it reports.
pub fn embed<C: Coefficient>(f: &T<C>, region: &Region) -> Result<VectorField<C>> {
    match f.classify()? {
        Classification::NotInLH => Err(Error::NotLH),
        Classification::StronglyHyperbolic => Err(Error::StronglyHyperbolicNotEmbeddable),
        Classification::Parabolic => log_iso_parabolic(f, region),
        _ => embed_via_normal_form(f, region),
    }
}

/// The field through normal forms: `f = phi_f o f0 o phi_f^-1` and
/// `exp(X0) = phi_g o f0 o phi_g^-1`, so `f = exp(psi_* X0)` with
/// `psi = phi_f o phi_g^-1`. `X0` is the normal-form field of `f0`; its
/// time-one map is conjugate to `f0` but not equal to it.
pub fn embed_via_normal_form<C: Coefficient>(f: &T<C>, region: &Region) -> Result<VectorField<C>> {
    // Changes with negative powers of L cost depth in the pushforward;
    // recompute on deeper regions until the request is covered.
    let mut target = region.clone();
    let mut last = None;
    for _ in 0..6 {
        let x = embed_nf_on(f, &target)?;
        if !region.is_bounded() || x.xi.region().covers(region) {
            return Ok(VectorField::new(x.xi.truncate(region)));
        }
        last = Some(x);
        target = target.grow(Q::zero(), qi(4));
    }
    let x = last.expect("at least one attempt");
    Ok(VectorField::new(x.xi.truncate(region)))
}

fn embed_nf_on<C: Coefficient>(f: &T<C>, region: &Region) -> Result<VectorField<C>> {
    let nf_f = normal_form(f, region)?;
    let x0 = match &nf_f.nf {
        NormalFormDescriptor::ParabolicNF { alpha, k, a, b } => normal_field_parabolic(*alpha, *k, a, b, region)?,
        NormalFormDescriptor::HyperbolicNF { lambda, a } => {
            // The time-one map of X_{lambda,a'} has normal form
            // lambda x - a' lambda log(lambda) / (2(lambda-1)) x L; pick a' to hit a.
            let lg = lambda.ln()?;
            let a_field = -C::from_i64(2) * (lambda.clone() - C::one()) * a.clone() / (lambda.clone() * lg);
            normal_field_hyperbolic(lambda, &a_field, region)?
        }
        NormalFormDescriptor::StronglyHyperbolicNF { .. } => return Err(Error::StronglyHyperbolicNotEmbeddable),
    };
    let g = flow(&x0, 1.0, region, C::DEFAULT_TOL)?;
    let nf_g = normal_form(&g, region)?;
    if !same_normal_form(&nf_f.nf, &nf_g.nf) {
        return Err(Error::NoSolution(format!("normal field reaches {}, wanted {}", nf_g.nf, nf_f.nf)));
    }
    let work = nf_f.achieved_region.meet(&nf_g.achieved_region);
    let psi = if nf_g.steps.is_empty() {
        nf_f.phi.clone()
    } else {
        compose(&nf_f.phi.truncate(&work), &invert(&nf_g.phi.truncate(&work))?)?
    };
    if psi.len() == 1 && psi.coeff(&Exponent::x()) == C::one() {
        return Ok(x0);
    }
    let xi = pushforward(&x0, &psi, &work)?;
    Ok(VectorField::new(xi.xi.truncate(&work)))
}

fn same_normal_form<C: Coefficient>(p: &NormalFormDescriptor<C>, q: &NormalFormDescriptor<C>) -> bool {
    let near = |a: &C, b: &C| a.near(b, 1e-8 * (1.0 + a.to_f64().abs()));
    match (p, q) {
        (
            NormalFormDescriptor::ParabolicNF { alpha, k, a, b },
            NormalFormDescriptor::ParabolicNF { alpha: alpha2, k: k2, a: a2, b: b2 },
        ) => alpha == alpha2 && k == k2 && near(a, a2) && near(b, b2),
        (NormalFormDescriptor::HyperbolicNF { lambda, a }, NormalFormDescriptor::HyperbolicNF { lambda: l2, a: a2 }) => {
            near(lambda, l2) && near(a, a2)
        }
        _ => false,
    }
}

/// `exp(tX) id` on `region`.
pub fn flow<C: Coefficient>(x: &VectorField<C>, t: f64, region: &Region, tol: f64) -> Result<T<C>> {
    x.check_flow()?;
    let t = C::from_f64(t)?;
    let xi = &x.xi;
    let id = T::x();
    if xi.is_empty() || t.is_zero() {
        return Ok(id.with_region(bmin_region(region, xi.region())));
    }
    let work = working_region(region, xi)?;
    let xi = xi.truncate(&work);
    let field = VectorField::new(xi.clone());
    let ord = xi.order()?;
    let start = id.with_region(work.clone());
    if ord > Exponent::x() {
        // Finite Lie series.
        let mut term = start.clone();
        let mut sum = start;
        let mut coef = C::one();
        let mut n = 0i64;
        loop {
            n += 1;
            term = field.apply(&term)?.truncate(&work);
            if term.is_empty() {
                return Ok(sum);
            }
            coef = coef * t.clone() / C::from_i64(n);
            sum = sum.add(&term.scalar_mul(&coef));
            if n as usize > 10 * N_MAX {
                return Err(Error::NonConvergence(n as usize));
            }
        }
    }
    if C::EXACT {
        return Err(Error::NeedsFloatMode("flow of a field with linear part".into()));
    }
    let mut term = start.clone();
    let mut sum = start;
    let mut coef = C::one();
    let mut quiet = 0;
    for n in 1..=N_MAX {
        term = field.apply(&term)?.truncate(&work);
        coef = coef * t.clone() / C::from_i64(n as i64);
        let inc = term.scalar_mul(&coef);
        let biggest = inc.iter().map(|(_, c)| c.to_f64().abs()).fold(0.0, f64::max);
        sum = sum.add(&inc);
        if !biggest.is_finite() {
            return Err(Error::NonConvergence(n));
        }
        if biggest < tol {
            quiet += 1;
            if quiet >= STALL_WINDOW {
                return Ok(sum.chop(0.0));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence(N_MAX))
}

/// `phi o x^(alpha^t) o phi^-1` for strongly hyperbolic `f = phi o x^alpha o phi^-1`.
pub fn flow_strongly_hyperbolic<C: Coefficient>(f: &T<C>, t: Q, region: &Region) -> Result<T<C>> {
    if f.classify()? != Classification::StronglyHyperbolic {
        return Err(Error::NotStronglyHyperbolic);
    }
    let alpha = f.order()?.alpha;
    let at = rational_power(alpha, t)?;
    let nf = normal_form(f, region)?;
    let power = T::monomial(Exponent::new(at, 0), C::one());
    if nf.steps.is_empty() {
        return Ok(power.with_region(nf.achieved_region.clone()));
    }
    let work = nf.achieved_region.clone();
    let mut phi = nf.phi.clone();
    // The inverse composition shrinks alpha ranges by alpha^t when it is < 1.
    if at < qi(1) {
        let grow = work.alpha_max().map(|a| a / at - a).unwrap_or(Q::zero());
        phi = phi.truncate(&work.grow(grow, work.slope() * grow));
    }
    let out = conjugate(&power, &invert(&phi)?, &work)?;
    Ok(out)
}

/// Maximal coefficient discrepancy and the per-monomial table.
#[derive(Clone, Debug)]
pub struct Discrepancy {
    pub max: f64,
    pub region: Region,
    pub table: Vec<(Exponent, f64)>,
}

fn discrepancy<C: Coefficient>(a: &T<C>, b: &T<C>, region: &Region) -> Discrepancy {
    let r = a.region().meet(b.region()).meet(region);
    let table = a.diff_table(b, &r);
    let max = table.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Discrepancy { max, region: r, table }
}

/// `|flow(X, 1) - f|` on `region`.
pub fn verify_embedding<C: Coefficient>(f: &T<C>, x: &VectorField<C>, region: &Region, tol: f64) -> Result<Discrepancy> {
    let g = flow(x, 1.0, region, tol)?;
    Ok(discrepancy(&g, f, region))
}

/// `|flow(X, s) o flow(X, t) - flow(X, s+t)|` on `region`.
pub fn verify_flow_group_law<C: Coefficient>(
    x: &VectorField<C>,
    s: f64,
    t: f64,
    region: &Region,
    tol: f64,
) -> Result<Discrepancy> {
    let fs = flow(x, s, region, tol)?;
    let ft = flow(x, t, region, tol)?;
    let fst = flow(x, s + t, region, tol)?;
    let lhs = compose(&fs, &ft)?;
    Ok(discrepancy(&lhs, &fst, region))
}

/// `alpha^t` when it is rational and fits the exponent type.
fn rational_power(alpha: Q, t: Q) -> Result<Q> {
    let irr = || Error::IrrationalExponent(format!("{}^{}", crate::grid::q_str(&alpha), crate::grid::q_str(&t)));
    let base = Rational::new(BigInt::from(*alpha.numer()), BigInt::from(*alpha.denom()));
    let p = base.pow_q(&t).map_err(|_| irr())?;
    match (p.numer().to_i64(), p.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Q::new(n, d)),
        _ => Err(irr()),
    }
}
