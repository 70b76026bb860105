//! Composition and compositional inverse, with exactness regions.

use powerlog::compose::{compose, invert};
use powerlog::grid::qi;
use powerlog::{Exponent, Rational, Region, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let r = |n: i64| Rational::from_integer(n.into());
    let region = Region::new(qi(5), 3);
    let f = Transseries::polynomial([(Exponent::int(1, 0), r(1)), (Exponent::int(2, 1), r(1)), (Exponent::int(3, 0), r(2))])
        .truncate(&region);
    let g = Transseries::polynomial([(Exponent::int(1, 0), r(2)), (Exponent::int(2, 0), r(-1))]).truncate(&region);

    let gf = compose(&g, &f)?;
    println!("g o f   = {gf}\n  exact on {}", gf.region());

    let fi = invert(&f)?;
    println!("f^-1    = {fi}\n  exact on {}", fi.region());
    let id = compose(&f, &fi)?;
    println!("f o f^-1 = {id}\n  exact on {}", id.region());
    Ok(())
}
