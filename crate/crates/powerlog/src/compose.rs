//! Composition, compositional inverse, derivative and Lie bracket.
//!
//! `g o f` is computed by monomial substitution. Writing
//! `f = a x^lam (1 + eps)`:
//!
//! ```text
//! x^alpha o f = a^alpha x^(lam*alpha) sum_j binom(alpha, j) eps^j
//! L o f       = (L/lam) (1 - u)^-1,   u = (L/lam) (log a + log(1 + eps))
//! ```
//!
//! so `L^k o f = (L/lam)^k (1 - u)^-k` for every integer `k`. For `k < 0`
//! the last factor is a polynomial in `u`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::coeff::{binom_q, Coefficient};
use crate::error::{Error, Result};
use crate::grid::{bmin, qi, Exponent, Region, Q};
use crate::series::{Classification, Transseries};

type T<C> = Transseries<C>;

/// Termwise `(x^a L^k)' = a x^(a-1) L^k + k x^(a-1) L^(k+1)`.
///
/// Hidden terms keep their `k` or raise it, so the image region is the
/// input region moved down by one in alpha with the same rectangle depth.
pub fn derivative<C: Coefficient>(f: &T<C>) -> T<C> {
    let mut out: BTreeMap<Exponent, C> = BTreeMap::new();
    let mut push = |e: Exponent, c: C| {
        if c.is_zero() {
            return;
        }
        match out.get_mut(&e) {
            Some(v) => *v = v.clone() + c,
            None => {
                out.insert(e, c);
            }
        }
    };
    for (e, c) in f.iter() {
        let down = Exponent::new(e.alpha - qi(1), e.k);
        push(down, c.clone() * C::from_q(&e.alpha));
        if e.k != 0 {
            push(Exponent::new(down.alpha, e.k + 1), c.clone() * C::from_i64(e.k));
        }
    }
    let region = f.region().shift(&Exponent::int(-1, 0));
    T::from_terms(out, Region::full()).with_region(region).with_mu(f.mu() - qi(1))
}

/// Lie bracket `{eta, eps} = eta eps' - eta' eps`.
pub fn lie_bracket<C: Coefficient>(eta: &T<C>, eps: &T<C>) -> Result<T<C>> {
    let a = eta.mul(&derivative(eps))?;
    let b = derivative(eta).mul(eps)?;
    Ok(a.sub(&b))
}

/// Smallest slope making every stored term of `u` have nonnegative weight.
pub(crate) fn cone_slope<C: Coefficient>(u: &T<C>) -> Q {
    u.iter()
        .filter(|(e, _)| e.alpha.is_positive() && e.k < 0)
        .map(|(e, _)| qi(-e.k) / e.alpha)
        .max()
        .unwrap_or(Q::zero())
}

/// `g o f` for `f` with a positive log-free leading term.
pub fn compose<C: Coefficient>(g: &T<C>, f: &T<C>) -> Result<T<C>> {
    if g.is_exact_zero() {
        return Ok(T::zero());
    }
    if f.classify()? == Classification::NotInLH {
        return Err(Error::NotLH);
    }
    let (e0, a) = f.leading()?;
    let lam = e0.alpha;
    let inv_a = C::one() / a.clone();
    let eps = f.mul_monomial(&Exponent::new(-lam, 0), &inv_a).minus_one().with_mu(Q::zero());
    let s = cone_slope(&eps).max(g.region().common_slope(eps.region()));
    let eps = eps.with_slope(s);
    let gr = g.region().with_slope(s, g.mu());

    // Hidden terms of g land beyond these bounds.
    let a_hidden = gr.alpha_max().map(|am| am * lam);
    let d_hidden = gr.depth().map(|d| {
        let at = if lam >= qi(1) { g.mu() } else { gr.alpha_max().unwrap() };
        d + s * (lam - qi(1)) * at
    });
    let re = eps.region().clone();
    // A hidden term of g times a hidden term of eps beyond its alpha bound.
    let a_cross = if g.region().is_full() { None } else { re.alpha_max().map(|ae| g.mu() * lam + ae) };
    let r_hidden = Region::from_parts(bmin(a_hidden, a_cross), d_hidden, s);

    let image = |e: &Exponent| Exponent::new(e.alpha * lam, e.k);
    let mut ro = r_hidden.clone();
    loop {
        let mut next = r_hidden.clone();
        for (e, _) in g.iter() {
            let m = image(e);
            if ro.contains(&m) {
                next = next.meet(&re.shift(&m));
            }
        }
        if next == ro {
            break;
        }
        ro = next;
    }
    let kept: Vec<(Exponent, C)> =
        g.iter().filter(|(e, _)| ro.contains(&image(e))).map(|(e, c)| (*e, c.clone())).collect();
    let mu_out = g.mu() * lam;
    if kept.is_empty() {
        return Ok(T::from_terms(std::iter::empty(), ro).with_mu(mu_out));
    }
    let c_alpha = kept.iter().map(|(e, _)| e.alpha * lam).min().unwrap();
    let c_w = kept.iter().map(|(e, _)| ro.weight(&image(e))).min().unwrap();
    let cap = re.meet(&ro.grow(-c_alpha, -c_w));

    let any_log = kept.iter().any(|(e, _)| e.k != 0);
    let finite_binom = kept.iter().all(|(e, _)| e.alpha.is_integer() && !e.alpha.is_negative());
    let eps_needed = if any_log && !eps.is_exact_zero() {
        None
    } else if finite_binom {
        Some(kept.iter().map(|(e, _)| e.alpha.to_integer() as usize).max().unwrap())
    } else {
        None
    };
    let epows = T::powers(&eps, &cap, eps_needed)?;

    // (1 - u)^-k pieces for the log part.
    let mut qk: BTreeMap<i64, T<C>> = BTreeMap::new();
    if any_log {
        let la = if a == C::one() { C::zero() } else { a.ln()? };
        let log1p = T::combine(&epows, |j| {
            if j == 0 {
                C::zero()
            } else {
                let v = C::one() / C::from_i64(j as i64);
                if j % 2 == 1 { v } else { -v }
            }
        });
        let inner = log1p.add(&T::constant(la).with_region(log1p.region().clone()));
        let u = inner.mul_monomial(&Exponent::int(0, 1), &(C::one() / C::from_q(&lam)));
        let ks: Vec<i64> = kept.iter().map(|(e, _)| e.k).filter(|k| *k != 0).collect();
        let kmax = ks.iter().copied().max().unwrap_or(0);
        let kmin = ks.iter().copied().min().unwrap_or(0);
        let u_needed = if u.is_empty() && u.region().is_full() {
            Some(0)
        } else if kmax > 0 {
            None
        } else {
            Some(kmin.unsigned_abs() as usize)
        };
        let upows = if u.is_empty() && u.region().is_full() {
            vec![T::constant(C::one())]
        } else {
            T::powers(&u, &cap, u_needed)?
        };
        let lam_c = C::from_q(&lam);
        for k in ks {
            if qk.contains_key(&k) {
                continue;
            }
            let series = if k > 0 {
                T::combine(&upows, |j| binom_q::<C>(&qi(k + j as i64 - 1), j))
            } else {
                let n = qi(-k);
                T::combine(&upows, |j| {
                    let b = binom_q::<C>(&n, j);
                    if j % 2 == 0 { b } else { -b }
                })
            };
            let scaled = series.mul_monomial(&Exponent::int(0, k), &lam_c.powi(-k));
            qk.insert(k, scaled);
        }
    }

    let mut groups: BTreeMap<Q, Vec<(i64, C)>> = BTreeMap::new();
    for (e, c) in &kept {
        groups.entry(e.alpha).or_default().push((e.k, c.clone()));
    }
    let mut total: Option<T<C>> = None;
    for (alpha, ks) in groups {
        let p = T::combine(&epows, |j| binom_q::<C>(&alpha, j));
        let mut tpart: Option<T<C>> = None;
        for (k, c) in ks {
            let piece = if k == 0 { T::constant(c) } else { qk[&k].scalar_mul(&c) };
            tpart = Some(match tpart {
                None => piece,
                Some(t) => t.add(&piece),
            });
        }
        let shift = Exponent::new(alpha * lam, 0);
        let local_cap = ro.grow(-shift.alpha, -ro.weight(&shift));
        let prod = p.mul_within(&tpart.unwrap(), &local_cap)?;
        let coef = a.pow_q(&alpha)?;
        let piece = prod.mul_monomial(&shift, &coef);
        total = Some(match total {
            None => piece,
            Some(t) => t.add(&piece),
        });
    }
    Ok(total.unwrap().truncate(&ro).with_mu(mu_out))
}

/// Compositional inverse of `f = a x^lam (1 + eps)`.
///
/// `f` factors as `(a x^lam) o f1` with `f1 = x (1 + eps)^(1/lam)` parabolic.
/// The inverse of `f1 = x + h` is the fixed point of `y = x - h o y`, found
/// by iterating on the region of `f1`; then `f^-1 = f1^-1 o (x/a)^(1/lam)`.
pub fn invert<C: Coefficient>(f: &T<C>) -> Result<T<C>> {
    if f.classify()? == Classification::NotInLH {
        return Err(Error::NotLH);
    }
    let (e0, a) = f.leading()?;
    let lam = e0.alpha;
    let inv_a = C::one() / a.clone();
    let eps = f.mul_monomial(&Exponent::new(-lam, 0), &inv_a).minus_one().with_mu(Q::zero());
    let f1 = if lam == qi(1) {
        eps.mul_monomial(&Exponent::x(), &C::one()).add(&T::x())
    } else {
        let eps = eps.with_slope(cone_slope(&eps).max(eps.region().slope()));
        let r = lam.recip();
        let needed = (r.is_integer() && r.is_positive()).then(|| r.to_integer() as usize);
        let pows = T::powers(&eps, &Region::full(), needed)?;
        T::combine(&pows, |j| binom_q::<C>(&r, j)).mul_monomial(&Exponent::x(), &C::one())
    }
    .with_mu(qi(1));
    let y = invert_parabolic(&f1)?;
    if lam == qi(1) && a == C::one() {
        return Ok(y);
    }
    let b = inv_a.pow_q(&lam.recip())?;
    let outer = T::monomial(Exponent::new(lam.recip(), 0), b);
    compose(&y, &outer)
}

fn invert_parabolic<C: Coefficient>(f1: &T<C>) -> Result<T<C>> {
    let h = f1.parabolic_tail();
    if h.is_empty() {
        return Ok(T::x().with_region(f1.region().clone()));
    }
    if f1.region().alpha_max().is_none() {
        return Err(Error::UnboundedRegion);
    }
    // Negative powers of L in h/x need a slanted region to stay finite.
    let cone = cone_slope(&h.mul_monomial(&Exponent::new(-qi(1), 0), &C::one()));
    let f1 = if cone > f1.region().slope() { f1.with_slope(cone) } else { f1.clone() };
    let h = f1.parabolic_tail();
    let mut region = f1.region().clone();
    let x = T::x();
    let mut y = x.clone().with_region(region.clone());
    let limit = 64 + 4 * h.len() + region.alpha_max().map_or(0, |a| a.to_integer() as usize * 8);
    let mut last_diff = f64::INFINITY;
    for _ in 0..limit {
        let hy = compose(&h, &y)?;
        if !hy.region().covers(&region) {
            region = region.meet(hy.region());
            if !region.contains(&Exponent::x()) {
                return Err(Error::RegionExhausted(format!("inverse is not exact anywhere on {}", f1.region())));
            }
        }
        let next = x.sub(&hy).truncate(&region).with_mu(qi(1));
        if next.terms() == y.truncate(&region).terms() {
            return Ok(next);
        }
        // Float iterates can stall a few ulps away from a fixed point.
        let diff = next.max_diff_on(&y, &region);
        if !C::EXACT && diff <= 1e-13 && diff >= last_diff {
            return Ok(next);
        }
        last_diff = diff;
        y = next.with_region(region.clone());
    }
    Err(Error::NonConvergence(limit))
}

/// The identity `x`, exact everywhere.
pub fn identity<C: Coefficient>() -> T<C> {
    T::x()
}

/// `x^alpha` as an exact series.
pub fn power_map<C: Coefficient>(alpha: Q) -> T<C> {
    T::monomial(Exponent::new(alpha, 0), C::one())
}

/// Whether `f` is `1*x` exactly.
pub fn is_identity<C: Coefficient>(f: &T<C>) -> bool {
    f.len() == 1 && f.coeff(&Exponent::x()) == C::one() && f.order().map(|e| e == Exponent::x()).unwrap_or(false)
}
