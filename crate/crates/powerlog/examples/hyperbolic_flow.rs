//! Hyperbolic germ in float mode: embedding, fractional iterates, group law.

use powerlog::embed::{embed, flow, verify_embedding, verify_flow_group_law};
use powerlog::grid::qi;
use powerlog::{Exponent, Region, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let f = Transseries::polynomial([(Exponent::int(1, 0), 2.0), (Exponent::int(1, 1), 1.0), (Exponent::int(2, 0), 1.0)]);
    let region = Region::new(qi(4), 3);
    let x = embed(&f, &region)?;
    println!("xi = {}", x.xi.chop(1e-14));
    println!("embedding error {:e}", verify_embedding(&f, &x, &region, 1e-16)?.max);
    println!("f^(1/2) = {}", flow(&x, 0.5, &region, 1e-16)?.chop(1e-14));
    let d = verify_flow_group_law(&x, 0.5, -1.0, &region, 1e-16)?;
    println!("f^(1/2) o f^(-1) vs f^(-1/2): {:e}", d.max);
    Ok(())
}
