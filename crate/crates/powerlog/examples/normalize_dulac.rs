//! Normal form of the Dulac germ x + x^2 L^-1 + x^2, with the steps taken.

use powerlog::grid::qi;
use powerlog::normalize::normal_form;
use powerlog::{Exponent, Rational, Region, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let one = Rational::from_integer(1.into());
    let f = Transseries::polynomial([
        (Exponent::int(1, 0), one.clone()),
        (Exponent::int(2, -1), one.clone()),
        (Exponent::int(2, 0), one),
    ]);
    let res = normal_form(&f, &Region::new(qi(4), 6))?;
    println!("f  = {f}");
    for (i, s) in res.steps.iter().enumerate() {
        println!("step {:>2}: {s}", i + 1);
    }
    println!("nf = {}   ({})", res.nf_series, res.nf);
    println!("exact on {}", res.achieved_region);
    Ok(())
}
