//! Embed a parabolic germ in a flow and check the time-one map.

use powerlog::embed::{embed, flow, verify_embedding};
use powerlog::grid::qi;
use powerlog::{Exponent, Rational, Region, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let f = Transseries::polynomial([
        (Exponent::int(1, 0), r(1, 1)),
        (Exponent::int(2, 1), r(1, 1)),
        (Exponent::int(3, 0), r(-1, 2)),
    ]);
    let region = Region::new(qi(5), 4);
    let x = embed(&f, &region)?;
    println!("f   = {f}");
    println!("xi  = {}", x.xi);
    let d = verify_embedding(&f, &x, &region, 0.0)?;
    println!("max |flow(X, 1) - f| = {} on {}", d.max, d.region);
    let half = flow(&x, 0.5, &region, 0.0)?;
    println!("f^(1/2) = {half}");
    Ok(())
}
