//! Parse a series, print it in ASCII and Unicode, and dump its JSON form.

use powerlog::cli::{parse_series, series_json};
use powerlog::Rational;

fn main() -> Result<(), powerlog::Error> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "x + 2*x^2*L^-1 + 3/2*x^(5/2)*ℓ^3".into());
    let f = parse_series::<Rational>(&text, false)?;
    println!("ascii:   {}", f.to_text(false));
    println!("unicode: {}", f.to_text(true));
    println!("class:   {}", f.classify()?.name());
    println!("{}", serde_json::to_string_pretty(&series_json(&f)).unwrap());
    Ok(())
}
