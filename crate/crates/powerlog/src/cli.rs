//! Expression parser, command dispatch and reporting for the `powerlog` tool.
//!
//! Surface syntax: a sum of terms `[coef] [* x^RAT] [* L^INT]`, e.g.
//! `x + 2*x^2*L^-1 + x^2`. `L` stands for `-1/log x` (`ℓ` is accepted too);
//! coefficients are integers, fractions `p/q` or decimals. Region and
//! arithmetic mode come from flags, never from the expression.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coeff::{Coefficient, Rational};
use crate::compose::{compose, invert, lie_bracket};
use crate::embed::{embed, flow, verify_embedding, verify_flow_group_law, Discrepancy, VectorField};
use crate::error::{Error, Result};
use crate::grid::{parse_q, q_str, Exponent, Region, Q};
use crate::normalize::{normal_form, ElementaryChange, NormalFormDescriptor, NormalizationResult};
use crate::series::Transseries;

// ---------------------------------------------------------------- parsing

struct Lexer<'a> {
    chars: Vec<(usize, char)>,
    i: usize,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(), i: 0, src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.i).map_or(self.src.len(), |&(p, _)| p)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.i += 1;
        c
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), expected: expected.iter().map(|s| s.to_string()).collect() })
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.i += 1;
        }
        s
    }

    /// Unsigned decimal or fraction as an exact rational.
    fn number(&mut self) -> Result<Rational> {
        let int = self.digits();
        let mut frac = String::new();
        if self.eat('.') {
            frac = self.digits();
        }
        if int.is_empty() && frac.is_empty() {
            return self.fail(&["number"]);
        }
        let mut value = decimal(&int, &frac);
        if matches!(self.peek(), Some('e' | 'E')) {
            self.i += 1;
            let neg = if self.eat('-') {
                true
            } else {
                self.eat('+');
                false
            };
            let e = self.digits();
            let Ok(e) = e.parse::<i32>() else { return self.fail(&["exponent digits"]) };
            let p = Rational::from_integer(BigInt::from(10)).pow(if neg { -e } else { e });
            value *= p;
        }
        if frac.is_empty() && self.peek() == Some('/') {
            self.i += 1;
            let d = self.digits();
            if d.is_empty() {
                return self.fail(&["denominator"]);
            }
            let d: BigInt = d.parse().unwrap();
            if d.is_zero() {
                return self.fail(&["nonzero denominator"]);
            }
            value /= Rational::from_integer(d);
        }
        Ok(value)
    }

    /// Signed exponent `INT` or `p/q`, optionally in parentheses.
    fn exponent(&mut self, allow_fraction: bool) -> Result<Q> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let start = self.pos();
        let n = self.digits();
        if n.is_empty() {
            return self.fail(&["integer"]);
        }
        let mut text = n;
        if allow_fraction && self.peek() == Some('/') {
            self.i += 1;
            let d = self.digits();
            if d.is_empty() {
                return self.fail(&["denominator"]);
            }
            text = format!("{text}/{d}");
        }
        let Some(mut v) = parse_q(&text) else {
            return Err(Error::Parse { pos: start, expected: vec!["exponent that fits in 64 bits".into()] });
        };
        if neg {
            v = -v;
        }
        if paren && !self.eat(')') {
            return self.fail(&[")"]);
        }
        Ok(v)
    }
}

fn decimal(int: &str, frac: &str) -> Rational {
    let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_default();
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    Rational::new(digits, scale)
}

/// Terms of `text` with exact coefficients.
pub fn parse_terms(text: &str) -> Result<Vec<(Exponent, Rational)>> {
    let mut lx = Lexer::new(text);
    let mut out = vec![];
    let mut first = true;
    loop {
        let mut sign = <Rational as One>::one();
        if lx.eat('-') {
            sign = -sign;
        } else if !lx.eat('+') && !first {
            if lx.peek().is_none() {
                break;
            }
            return lx.fail(&["+", "-", "end of input"]);
        }
        first = false;
        let mut coef = sign;
        let mut alpha = Q::zero();
        let mut k = 0i64;
        let mut factors = 0;
        loop {
            match lx.peek() {
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    coef *= lx.number()?;
                }
                Some('x') => {
                    lx.bump();
                    alpha += if lx.eat('^') { lx.exponent(true)? } else { Q::one() };
                }
                Some('L' | 'ℓ') => {
                    lx.bump();
                    k += if lx.eat('^') { *lx.exponent(false)?.numer() } else { 1 };
                }
                _ => return lx.fail(&["number", "x", "L"]),
            }
            factors += 1;
            if !lx.eat('*') {
                break;
            }
        }
        debug_assert!(factors > 0);
        out.push((Exponent::new(alpha, k), coef));
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

/// Parse an exact (unbounded-region) series. Outside `ambient` mode every
/// term must have a positive power of `x`.
pub fn parse_series<C: Coefficient>(text: &str, ambient: bool) -> Result<Transseries<C>> {
    let terms = parse_terms(text)?;
    if !ambient {
        if let Some((e, _)) = terms.iter().find(|(e, c)| e.alpha <= Q::zero() && !Zero::is_zero(c)) {
            return Err(Error::NonPositiveAlpha(format!("x^{}", q_str(&e.alpha))));
        }
    }
    Ok(Transseries::polynomial(terms.into_iter().map(|(e, c)| (e, C::from_rational(&c)))))
}

// ---------------------------------------------------------------- JSON

fn coef_json<C: Coefficient>(c: &C) -> Value {
    if C::EXACT {
        Value::String(c.to_string())
    } else {
        json!(c.to_f64())
    }
}

pub fn region_json(r: &Region) -> Value {
    let mut v = json!({
        "alpha_max": r.alpha_max().map(|a| q_str(&a)),
        "k_max": r.k_max(),
    });
    if !r.slope().is_zero() && r.depth().is_some() {
        v["slope"] = json!(q_str(&r.slope()));
    }
    v
}

pub fn series_json<C: Coefficient>(f: &Transseries<C>) -> Value {
    let terms: Vec<Value> = f
        .iter()
        .map(|(e, c)| json!({"alpha": q_str(&e.alpha), "k": e.k, "coef": coef_json(c)}))
        .collect();
    json!({"terms": terms, "region": region_json(f.region())})
}

fn change_json<C: Coefficient>(ch: &ElementaryChange<C>) -> Value {
    match ch {
        ElementaryChange::Linear { a } => json!({"kind": "Linear", "beta": "1", "m": 0, "c": coef_json(a)}),
        ElementaryChange::Monomial { beta, m, c } => {
            json!({"kind": "Monomial", "beta": q_str(beta), "m": m, "c": coef_json(c)})
        }
    }
}

fn descriptor_json<C: Coefficient>(d: &NormalFormDescriptor<C>) -> Value {
    match d {
        NormalFormDescriptor::ParabolicNF { alpha, k, a, b } => {
            json!({"type": d.name(), "alpha": q_str(alpha), "k": k, "a": coef_json(a), "b": coef_json(b)})
        }
        NormalFormDescriptor::HyperbolicNF { lambda, a } => {
            json!({"type": d.name(), "lambda": coef_json(lambda), "a": coef_json(a)})
        }
        NormalFormDescriptor::StronglyHyperbolicNF { alpha } => json!({"type": d.name(), "alpha": q_str(alpha)}),
    }
}

pub fn normalization_json<C: Coefficient>(res: &NormalizationResult<C>) -> Value {
    json!({
        "descriptor": descriptor_json(&res.nf),
        "nf": series_json(&res.nf_series),
        "steps": res.steps.iter().map(change_json).collect::<Vec<_>>(),
        "phi": series_json(&res.phi),
        "achieved_region": region_json(&res.achieved_region),
    })
}

pub fn discrepancy_json(d: &Discrepancy) -> Value {
    json!({
        "max": d.max,
        "region": region_json(&d.region),
        "table": d.table.iter().map(|(e, v)| json!({"alpha": q_str(&e.alpha), "k": e.k, "diff": v})).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------- commands

#[derive(Parser, Debug)]
#[command(name = "powerlog", version, about = "Power-log transseries: normal forms, flows and embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Largest power of x kept (integer or p/q).
    #[arg(long, global = true, default_value = "4")]
    pub alpha_max: String,
    /// Largest power of L kept.
    #[arg(long, global = true, default_value_t = 4, allow_negative_numbers = true)]
    pub k_max: i64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Tolerance for weak summation and float comparisons.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Flow time.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Second flow time (group law check).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Print results (and errors) as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print `ℓ` instead of `L`.
    #[arg(long, global = true)]
    pub unicode: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Print the canonical form of a series.
    Parse {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Parabolic, hyperbolic or strongly hyperbolic.
    Classify {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Formal normal form and the conjugating change.
    Normalize {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Compositional inverse.
    Invert {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// g o f.
    Compose {
        #[arg(allow_hyphen_values = true)]
        g: String,
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Lie bracket of two vector fields.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Vector field whose time-one map is the series.
    Embed {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Time-t map of a vector field.
    Flow {
        #[arg(allow_hyphen_values = true)]
        xi_pos: Option<String>,
        #[arg(long = "xi", allow_hyphen_values = true)]
        xi: Option<String>,
    },
    /// Check an embedding (and, with --s, the flow group law).
    Verify {
        #[arg(allow_hyphen_values = true)]
        series: String,
        #[arg(long = "xi", allow_hyphen_values = true)]
        xi: Option<String>,
    },
}

/// Text and JSON renderings of a result.
struct Report {
    text: String,
    json: Value,
}

struct Inputs {
    stdin: Option<String>,
    reader: Box<dyn Read>,
}

impl Inputs {
    fn get(&mut self, arg: &str) -> Result<String> {
        if arg != "-" {
            return Ok(arg.to_string());
        }
        if self.stdin.is_none() {
            let mut s = String::new();
            self.reader
                .read_to_string(&mut s)
                .map_err(|e| Error::Parse { pos: 0, expected: vec![format!("readable stdin ({e})")] })?;
            self.stdin = Some(s);
        }
        Ok(self.stdin.clone().unwrap().trim().to_string())
    }
}

fn text_of<C: Coefficient>(f: &Transseries<C>, opts: &Opts) -> String {
    f.to_text(opts.unicode)
}

fn series_report<C: Coefficient>(f: &Transseries<C>, opts: &Opts) -> Report {
    Report { text: format!("{}\n", text_of(f, opts)), json: series_json(f) }
}

fn discrepancy_text(label: &str, d: &Discrepancy) -> String {
    let mut s = format!("{label}: max {:e} on {}\n", d.max, d.region);
    for (e, v) in d.table.iter().filter(|(_, v)| *v > 0.0) {
        s.push_str(&format!("  {e}: {v:e}\n"));
    }
    s
}

fn execute<C: Coefficient>(cmd: &Command, opts: &Opts, region: &Region, io: &mut Inputs) -> Result<Report> {
    let strict = |io: &mut Inputs, s: &str| -> Result<Transseries<C>> { parse_series(&io.get(s)?, false) };
    let ambient = |io: &mut Inputs, s: &str| -> Result<Transseries<C>> { parse_series(&io.get(s)?, true) };
    Ok(match cmd {
        Command::Parse { series } => series_report(&strict(io, series)?, opts),
        Command::Classify { series } => {
            let c = strict(io, series)?.classify()?;
            Report { text: format!("{}\n", c.name()), json: json!({"class": c.name()}) }
        }
        Command::Normalize { series } => {
            let res = normal_form(&strict(io, series)?, region)?;
            let mut text = format!("nf: {}\n{}\n", text_of(&res.nf_series, opts), res.nf);
            for st in &res.steps {
                text.push_str(&format!("step: {st}\n"));
            }
            text.push_str(&format!("phi: {}\nregion: {}\n", text_of(&res.phi, opts), res.achieved_region));
            Report { text, json: normalization_json(&res) }
        }
        Command::Invert { series } => series_report(&invert(&strict(io, series)?.truncate(region))?, opts),
        Command::Compose { g, f } => {
            let g = ambient(io, g)?.truncate(region);
            let f = strict(io, f)?.truncate(region);
            series_report(&compose(&g, &f)?, opts)
        }
        Command::Bracket { a, b } => {
            let a = ambient(io, a)?.truncate(region);
            let b = ambient(io, b)?.truncate(region);
            series_report(&lie_bracket(&a, &b)?, opts)
        }
        Command::Embed { series } => {
            let x = embed(&strict(io, series)?, region)?;
            Report { text: format!("{}\n", text_of(&x.xi, opts)), json: json!({"xi": series_json(&x.xi)}) }
        }
        Command::Flow { xi_pos, xi } => {
            let Some(src) = xi.as_ref().or(xi_pos.as_ref()) else {
                return Err(Error::Parse { pos: 0, expected: vec!["a field via --xi".into()] });
            };
            let x = VectorField::new(ambient(io, src)?.truncate(region));
            series_report(&flow(&x, opts.t.unwrap_or(1.0), region, opts.tol)?, opts)
        }
        Command::Verify { series, xi } => {
            let f = strict(io, series)?;
            let x = match xi {
                Some(src) => VectorField::new(ambient(io, src)?.truncate(region)),
                None => embed(&f, region)?,
            };
            let d = verify_embedding(&f, &x, region, opts.tol)?;
            let mut text = discrepancy_text("embedding", &d);
            let mut js = json!({"xi": series_json(&x.xi), "embedding": discrepancy_json(&d)});
            if let Some(s) = opts.s {
                let t = opts.t.unwrap_or(1.0);
                let g = verify_flow_group_law(&x, s, t, region, opts.tol)?;
                text.push_str(&discrepancy_text("group law", &g));
                js["group_law"] = discrepancy_json(&g);
            }
            Report { text, json: js }
        }
    })
}

/// Input problems that are not library errors (bad flag values).
fn usage_error(msg: String) -> (i32, Value, String) {
    (1, json!({"error": "InvalidArgument", "message": msg}), format!("error: InvalidArgument: {msg}\n"))
}

fn region_from(opts: &Opts) -> std::result::Result<Region, String> {
    let Some(a) = parse_q(opts.alpha_max.trim()) else {
        return Err(format!("--alpha-max {} is not a rational", opts.alpha_max));
    };
    if a <= Q::zero() {
        return Err("--alpha-max must be positive".into());
    }
    Ok(Region::new(a, opts.k_max))
}

/// Run one command line; returns the process exit code.
pub fn run<I, A>(args: I, stdin: Box<dyn Read>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let opts = &cli.opts;
    let outcome = match region_from(opts) {
        Err(msg) => Err(usage_error(msg)),
        Ok(_) if opts.mode == Mode::Float && !(opts.tol > 0.0) => Err(usage_error("--tol must be positive".into())),
        Ok(region) => {
            let mut io = Inputs { stdin: None, reader: stdin };
            let r = match opts.mode {
                Mode::Exact => execute::<Rational>(&cli.command, opts, &region, &mut io),
                Mode::Float => execute::<f64>(&cli.command, opts, &region, &mut io),
            };
            r.map_err(|e| {
                let code = if e.is_input_error() { 1 } else { 2 };
                (code, json!({"error": e.name(), "message": e.to_string()}), format!("error: {}: {e}\n", e.name()))
            })
        }
    };
    match outcome {
        Ok(rep) => {
            let body = if opts.json { format!("{}\n", serde_json::to_string_pretty(&rep.json).unwrap()) } else { rep.text };
            let _ = out.write_all(body.as_bytes());
            0
        }
        Err((code, js, text)) => {
            if opts.json {
                let _ = out.write_all(format!("{}\n", serde_json::to_string_pretty(&js).unwrap()).as_bytes());
            }
            let _ = err.write_all(text.as_bytes());
            code
        }
    }
}
