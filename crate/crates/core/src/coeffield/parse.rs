//! ASCII grammar for elements of k(x₁,…,x_m):
//! sums of products of powers, with `^-n`, `/`, parentheses and `p/q` scalars.

use num_bigint::BigInt;

use super::element::FieldElement;
use super::scalar::{ResidueField, Scalar};
use super::FieldError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, FieldError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = cs[st..i].iter().collect();
            out.push(Tok::Num(txt.parse().unwrap()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(FieldError::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
    field: ResidueField,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn err(&self, msg: &str) -> FieldError {
        FieldError::Parse(format!("{msg} at token {}", self.pos))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldElement, FieldError> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FieldElement, FieldError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.power()?);
            } else if self.eat('/') {
                acc = acc.div(&self.power()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn exponent(&mut self) -> Result<i64, FieldError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                i64::try_from(n).map_err(|_| self.err("exponent too large"))?
            }
            _ => return Err(self.err("expected integer exponent")),
        };
        if paren && !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        Ok(if neg { -n } else { n })
    }

    fn power(&mut self) -> Result<FieldElement, FieldError> {
        if self.eat('-') {
            return Ok(self.power()?.neg());
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FieldElement, FieldError> {
        let nv = self.names.len();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(FieldElement::from_scalar(self.field, nv, Scalar::from_bigint(self.field, &n)))
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                let i = self
                    .names
                    .iter()
                    .position(|n| *n == id)
                    .ok_or_else(|| FieldError::Parse(format!("unknown variable {id:?}")))?;
                Ok(FieldElement::var(self.field, nv, i))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            _ => Err(self.err("expected number, variable or '('")),
        }
    }
}

/// Parse an expression over the variables `names`.
pub fn parse_element(s: &str, names: &[String], field: ResidueField) -> Result<FieldElement, FieldError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(FieldError::Parse("empty expression".into()));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        field,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    #[test]
    fn parse_print_roundtrip() {
        let k = ResidueField::prime(2).unwrap();
        for s in ["x1^4*x2^2 + x2^31", "x1^-1*x2^15", "x1^317"] {
            let e = parse_element(s, &names(), k).unwrap();
            assert_eq!(e.fmt_with(&names()), s);
        }
    }

    #[test]
    fn fractions_and_scalars() {
        let k = ResidueField::Rationals;
        let e = parse_element("(x1^2 - x2^2)/(x1 - x2) - 1/2", &names(), k).unwrap();
        assert_eq!(e.fmt_with(&names()), "x1 + x2 - 1/2");
        assert!(parse_element("x3", &names(), k).is_err());
        assert!(parse_element("x1 +", &names(), k).is_err());
    }
}
