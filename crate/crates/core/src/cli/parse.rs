//! Line-oriented constraint language.
//!
//! ```text
//! # comment
//! vars x y
//! eq 1 x + 1/2 y = 1
//! val 2 : v(x) >= 1
//! ord x - y < 3
//! ```
//!
//! Valuation bounds are integers of any size and may be written as powers,
//! e.g. `-2^20`.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::{format_rational, Prime, Rational};
use crate::error::{Error, Result};
use crate::model::{Instance, OrdRel, ValRel, Witness, WitnessValue};
use crate::powersum::PowerSum;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    /// Unsigned integer, fraction, or power, kept as written.
    Num(String),
    Op(&'static str),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    line: usize,
    end: usize,
}

const OPS: [&str; 13] = [">=", "<=", "==", "!=", "<", ">", "=", "+", "-", ":", "(", ")", "@"];

fn lex(text: &str, line: usize) -> Result<Lexed> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/' || chars[i] == '^') {
                i += 1;
            }
            toks.push((Tok::Num(chars[start..i].iter().collect()), col));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match OPS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                toks.push((Tok::Op(op), col));
                i += op.len();
            }
            None => {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(Lexed {
        toks,
        line,
        end: chars.len() + 1,
    })
}

struct Cursor<'a> {
    lx: &'a Lexed,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.lx.toks.get(self.pos).map(|t| &t.0)
    }

    fn column(&self) -> usize {
        self.lx.toks.get(self.pos).map_or(self.lx.end, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.lx.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_op(&mut self, op: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Op(o)) if *o == op => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{op}'"))),
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn done(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err("unexpected trailing input")),
        }
    }

    /// Optional run of `+` / `-`; returns true for a net minus.
    fn signs(&mut self) -> bool {
        let mut neg = false;
        while let Some(Tok::Op(op)) = self.peek() {
            match *op {
                "-" => neg = !neg,
                "+" => {}
                _ => break,
            }
            self.pos += 1;
        }
        neg
    }

    fn rational(&mut self) -> Result<Rational> {
        let neg = self.signs();
        let col = self.column();
        match self.next() {
            Some(Tok::Num(s)) => {
                let q = parse_number(s).ok_or_else(|| Error::Parse {
                    line: self.lx.line,
                    column: col,
                    message: format!("malformed number '{s}'"),
                })?;
                Ok(if neg { -q } else { q })
            }
            _ => Err(Error::Parse {
                line: self.lx.line,
                column: col,
                message: "expected a number".into(),
            }),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let col = self.column();
        let q = self.rational()?;
        if !q.is_integer() {
            return Err(Error::Parse {
                line: self.lx.line,
                column: col,
                message: "expected an integer".into(),
            });
        }
        Ok(q.to_integer())
    }
}

/// `n`, `n/d` or `a^k` (unsigned).
fn parse_number(s: &str) -> Option<Rational> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: BigInt = base.parse().ok()?;
        let exp: u32 = exp.parse().ok()?;
        if exp > 1 << 16 {
            return None;
        }
        return Some(Rational::from_integer(Pow::pow(base, exp)));
    }
    crate::arith::parse_rational(s)
}

/// Coefficients of `sum c_j x_j`, up to (not including) a stop operator.
fn linear(cur: &mut Cursor, inst: &Instance, stops: &[&str]) -> Result<Vec<Rational>> {
    let mut coeffs = vec![Rational::zero(); inst.num_vars()];
    loop {
        if let Some(Tok::Op(op)) = cur.peek() {
            if stops.contains(op) {
                return Ok(coeffs);
            }
        }
        if cur.peek().is_none() {
            return Err(cur.err(format!("expected one of {}", stops.join(" "))));
        }
        let neg = cur.signs();
        let coeff = match cur.peek() {
            Some(Tok::Num(_)) => cur.rational()?,
            _ => Rational::one(),
        };
        let col = cur.column();
        let name = cur.ident()?;
        let j = inst.var_index(name).ok_or_else(|| Error::Parse {
            line: cur.lx.line,
            column: col,
            message: format!("unknown variable '{name}'"),
        })?;
        coeffs[j] += if neg { -coeff } else { coeff };
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut inst = Instance::default();
    for (k, raw) in text.lines().enumerate() {
        let lx = lex(raw, k + 1)?;
        let mut cur = Cursor { lx: &lx, pos: 0 };
        let Some(head) = cur.peek() else { continue };
        let Tok::Ident(head) = head else {
            return Err(cur.err("expected vars, eq, val or ord"));
        };
        cur.pos += 1;
        match head.as_str() {
            "vars" => {
                while cur.peek().is_some() {
                    let col = cur.column();
                    let name = cur.ident()?;
                    if inst.var_index(name).is_some() {
                        return Err(Error::Parse {
                            line: k + 1,
                            column: col,
                            message: format!("variable '{name}' declared twice"),
                        });
                    }
                    inst.vars.push(name.to_string());
                    for e in &mut inst.equations {
                        e.coeffs.push(Rational::zero());
                    }
                    for o in &mut inst.orders {
                        o.coeffs.push(Rational::zero());
                    }
                }
            }
            "eq" => {
                let coeffs = linear(&mut cur, &inst, &["="])?;
                cur.expect_op("=")?;
                let rhs = cur.rational()?;
                cur.done()?;
                inst.add_equation(coeffs, rhs);
            }
            "ord" => {
                let coeffs = linear(&mut cur, &inst, &["<", "<="])?;
                let rel = match cur.next() {
                    Some(Tok::Op("<")) => OrdRel::Lt,
                    _ => OrdRel::Le,
                };
                let rhs = cur.rational()?;
                cur.done()?;
                inst.add_order(coeffs, rel, rhs);
            }
            "val" => {
                let col = cur.column();
                let p = cur.integer()?;
                let prime = u64::try_from(&p)
                    .ok()
                    .and_then(|p| Prime::new(p).ok())
                    .ok_or_else(|| Error::Parse {
                        line: k + 1,
                        column: col,
                        message: format!("{p} is not a prime"),
                    })?;
                cur.expect_op(":")?;
                if cur.ident()? != "v" {
                    cur.pos -= 1;
                    return Err(cur.err("expected v(<var>)"));
                }
                cur.expect_op("(")?;
                let col = cur.column();
                let name = cur.ident()?;
                let var = inst.var_index(name).ok_or_else(|| Error::Parse {
                    line: k + 1,
                    column: col,
                    message: format!("unknown variable '{name}'"),
                })?;
                cur.expect_op(")")?;
                let rel = match cur.next() {
                    Some(Tok::Op(">=")) => ValRel::Ge,
                    Some(Tok::Op("<=")) => ValRel::Le,
                    Some(Tok::Op("==")) | Some(Tok::Op("=")) => ValRel::Eq,
                    Some(Tok::Op("!=")) => ValRel::Ne,
                    Some(Tok::Op("<")) => ValRel::Lt,
                    Some(Tok::Op(">")) => ValRel::Gt,
                    _ => {
                        cur.pos = cur.pos.saturating_sub(1);
                        return Err(cur.err("expected one of >= <= == != < >"));
                    }
                };
                let bound = cur.integer()?;
                cur.done()?;
                inst.add_valuation(prime, var, rel, bound);
            }
            other => {
                cur.pos -= 1;
                return Err(cur.err(format!("unknown statement '{other}'")));
            }
        }
    }
    Ok(inst)
}

fn linear_text(inst: &Instance, coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (j, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mag = format_rational(&a.abs());
        if out.is_empty() {
            let sign = if a.is_negative() { "-" } else { "" };
            out.push_str(&format!("{sign}{mag} {}", inst.vars[j]));
        } else {
            let sign = if a.is_negative() { '-' } else { '+' };
            out.push_str(&format!(" {sign} {mag} {}", inst.vars[j]));
        }
    }
    out
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("vars");
    for v in &inst.vars {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    for e in &inst.equations {
        let lhs = linear_text(inst, &e.coeffs);
        let sep = if lhs.is_empty() { "" } else { " " };
        out.push_str(&format!("eq {lhs}{sep}= {}\n", format_rational(&e.rhs)));
    }
    for v in &inst.valuations {
        out.push_str(&format!(
            "val {} : v({}) {} {}\n",
            v.prime,
            inst.vars[v.var],
            v.rel.symbol(),
            v.bound
        ));
    }
    for o in &inst.orders {
        let lhs = linear_text(inst, &o.coeffs);
        let sep = if lhs.is_empty() { "" } else { " " };
        let rel = match o.rel {
            OrdRel::Lt => "<",
            OrdRel::Le => "<=",
        };
        out.push_str(&format!("ord {lhs}{sep}{rel} {}\n", format_rational(&o.rhs)));
    }
    out
}

/// One `wit` line per variable.
pub fn render_witness(w: &Witness) -> String {
    let mut out = String::new();
    for (name, value) in w {
        match value {
            WitnessValue::Rational(q) => out.push_str(&format!("wit {name} {}\n", format_rational(q))),
            WitnessValue::PowerSum(s) => out.push_str(&format!("wit {name} p {} {s}\n", s.prime())),
        }
    }
    out
}

/// Reads `wit` lines and ignores everything else.
pub fn parse_witness(text: &str) -> Result<Witness> {
    let mut w = Witness::new();
    for (k, raw) in text.lines().enumerate() {
        let lx = lex(raw, k + 1)?;
        let mut cur = Cursor { lx: &lx, pos: 0 };
        match cur.peek() {
            Some(Tok::Ident(h)) if h == "wit" => cur.pos += 1,
            _ => continue,
        }
        let name = cur.ident()?.to_string();
        let value = match cur.peek() {
            Some(Tok::Ident(s)) if s == "p" => {
                cur.pos += 1;
                let col = cur.column();
                let p = cur.integer()?;
                let prime = u64::try_from(&p)
                    .ok()
                    .and_then(|p| Prime::new(p).ok())
                    .ok_or_else(|| Error::Parse {
                        line: k + 1,
                        column: col,
                        message: format!("{p} is not a prime"),
                    })?;
                let mut terms = Vec::new();
                while cur.peek().is_some() {
                    let coeff = cur.rational()?;
                    cur.expect_op("@")?;
                    let exp = cur.integer()?;
                    terms.push((coeff, exp));
                }
                WitnessValue::PowerSum(PowerSum::from_terms(prime, terms))
            }
            _ => WitnessValue::Rational(cur.rational()?),
        };
        cur.done()?;
        w.insert(name, value);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    #[test]
    fn two_variables() {
        let inst = parse_instance("vars x y\neq 1 x + 1 y = 1\nval 2 : v(x) >= 1").unwrap();
        assert_eq!(inst.vars, vec!["x", "y"]);
        assert_eq!(inst.equations[0].coeffs, vec![rat_int(1), rat_int(1)]);
        assert_eq!(inst.valuations[0].rel, ValRel::Ge);
    }

    #[test]
    fn not_prime() {
        let err = parse_instance("vars x\nval 4 : v(x) >= 0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn order_with_fraction() {
        let inst = parse_instance("vars x\nord 1/2 x < 3").unwrap();
        assert_eq!(inst.orders[0].coeffs, vec![rat(1, 2)]);
        assert_eq!(inst.orders[0].rel, OrdRel::Lt);
    }

    #[test]
    fn unknown_variable_position() {
        let err = parse_instance("vars x\neq x + 2 z = 0").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 10,
                message: "unknown variable 'z'".into()
            }
        );
    }

    #[test]
    fn signs_powers_and_comments() {
        let text = "# header\nvars a b\n\neq -a - -2 b = -3/4 # trailing\nval 3 : v(a) != -2^20\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.equations[0].coeffs, vec![rat_int(-1), rat_int(2)]);
        assert_eq!(inst.equations[0].rhs, rat(-3, 4));
        let expected: BigInt = -(BigInt::from(1) << 20u32);
        assert_eq!(inst.valuations[0].bound, expected);
    }

    #[test]
    fn round_trip() {
        let text = "vars x y z\neq 1 x - 3/2 y = 0\neq = 1\nval 5 : v(z) < 7\nval 2 : v(x) == 1\nord -1 z <= 1/3\n";
        let inst = parse_instance(text).unwrap();
        let again = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(inst, again);
        assert_eq!(serialize_instance(&inst), text);
    }

    #[test]
    fn witness_round_trip() {
        let mut w = Witness::new();
        w.insert("x".into(), WitnessValue::Rational(rat(5, 4)));
        let p = Prime::new(3).unwrap();
        w.insert(
            "y".into(),
            WitnessValue::PowerSum(PowerSum::from_terms(p, [(rat(-1, 2), BigInt::from(-9)), (rat_int(2), BigInt::from(0))])),
        );
        assert_eq!(parse_witness(&render_witness(&w)).unwrap(), w);
    }
}
