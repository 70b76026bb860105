//! Strongly hyperbolic germs: normal form x^alpha and integer iterates.

use powerlog::compose::compose;
use powerlog::embed::{embed, flow_strongly_hyperbolic};
use powerlog::grid::{q, qi};
use powerlog::normalize::normal_form;
use powerlog::{Exponent, Rational, Region, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let r = |n: i64| Rational::from_integer(n.into());
    let f = Transseries::polynomial([(Exponent::int(2, 0), r(1)), (Exponent::new(q(5, 2), 1), r(3))]);
    let region = Region::new(qi(6), 4);
    let res = normal_form(&f, &region)?;
    println!("nf(f) = {}", res.nf_series);
    println!("embed(f): {}", embed(&f, &region).unwrap_err());
    let f2 = flow_strongly_hyperbolic(&f, qi(2), &region)?;
    let ft = f.truncate(&region);
    let ff = compose(&ft, &ft)?;
    println!("f^2   = {}", f2);
    println!("f o f = {}", ff.truncate(f2.region()));
    Ok(())
}
