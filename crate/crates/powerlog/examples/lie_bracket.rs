//! Lie bracket of two monomial fields against the closed form.

use powerlog::compose::lie_bracket;
use powerlog::grid::q;
use powerlog::{Exponent, Rational, Transseries};

fn main() -> Result<(), powerlog::Error> {
    let r = |n: i64| Rational::from_integer(n.into());
    let eta = Transseries::monomial(Exponent::new(q(3, 2), 1), r(2));
    let eps = Transseries::monomial(Exponent::new(q(2, 1), -1), r(5));
    println!("[{eta}, {eps}] = {}", lie_bracket(&eta, &eps)?);
    // a c (beta - alpha) x^(alpha+beta-1) L^(k+m) + a c (m - k) x^(alpha+beta-1) L^(k+m+1)
    println!("closed form:  5*x^5/2 - 20*x^5/2*L");
    Ok(())
}
