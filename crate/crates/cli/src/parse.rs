//! Polynomial text input: `±`-separated terms of numbers (decimal or `a/b`)
//! and variables `x1..xn` with optional `^exp`, joined by `*` or spaces.

use std::collections::BTreeMap;

use jcert::{MonoPoly, Multidegree};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at column {column}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let mut text = self.digits();
        if self.peek() == Some('.') {
            self.pos += 1;
            text.push('.');
            text.push_str(&self.digits());
        }
        if text.is_empty() || text == "." {
            self.pos = start;
            return self.err("expected a number");
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            let mut exp = String::from("e");
            if let Some(s @ ('+' | '-')) = self.peek() {
                exp.push(s);
                self.pos += 1;
            }
            let d = self.digits();
            if d.is_empty() {
                self.pos = save;
            } else {
                text.push_str(&exp);
                text.push_str(&d);
            }
        }
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }

    fn integer(&mut self) -> Result<u32, ParseError> {
        let d = self.digits();
        if d.is_empty() {
            return self.err("expected a nonnegative integer");
        }
        d.parse().or_else(|_| self.err("integer too large"))
    }

    /// Coefficient and exponents of one term.
    fn term(&mut self, powers: &mut BTreeMap<usize, u32>) -> Result<f64, ParseError> {
        let mut coeff = 1.0;
        let mut factors = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    let mut v = self.number()?;
                    self.skip_ws();
                    if self.peek() == Some('/') {
                        self.pos += 1;
                        self.skip_ws();
                        let at = self.pos;
                        let den = self.number()?;
                        if den == 0.0 {
                            self.pos = at;
                            return self.err("division by zero");
                        }
                        v /= den;
                    }
                    coeff *= v;
                }
                Some('x') => {
                    self.pos += 1;
                    let at = self.pos;
                    let index = self.integer()?;
                    if index == 0 {
                        self.pos = at;
                        return self.err("variables are numbered from x1");
                    }
                    self.skip_ws();
                    let mut exp = 1;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        self.skip_ws();
                        if self.peek() == Some('-') {
                            return self.err("negative exponent");
                        }
                        exp = self.integer()?;
                    }
                    *powers.entry(index as usize).or_insert(0) += exp;
                }
                None => return self.err("unexpected end of input"),
                Some(c) => return self.err(format!("unexpected '{c}'")),
            }
            factors += 1;
            self.skip_ws();
            match self.peek() {
                Some('*') => self.pos += 1,
                Some(c) if c == 'x' || c.is_ascii_digit() || c == '.' => {}
                _ => break,
            }
        }
        debug_assert!(factors > 0);
        Ok(coeff)
    }
}

/// Parses `text`; the number of variables is the highest index used (at
/// least one) unless `nvars` is given.
pub fn parse_polynomial(text: &str, nvars: Option<usize>) -> Result<MonoPoly, ParseError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    let mut terms: Vec<(BTreeMap<usize, u32>, f64)> = Vec::new();
    p.skip_ws();
    if p.peek().is_none() {
        return p.err("empty polynomial");
    }
    let mut first = true;
    loop {
        p.skip_ws();
        let mut sign = 1.0;
        match p.peek() {
            Some('+') => p.pos += 1,
            Some('-') => {
                sign = -1.0;
                p.pos += 1;
            }
            _ if first => {}
            None => break,
            Some(c) => return p.err(format!("expected '+' or '-', found '{c}'")),
        }
        first = false;
        let mut powers = BTreeMap::new();
        let c = p.term(&mut powers)?;
        terms.push((powers, sign * c));
        p.skip_ws();
        if p.peek().is_none() {
            break;
        }
    }

    let used = terms.iter().flat_map(|(m, _)| m.keys().copied()).max().unwrap_or(1);
    let n = match nvars {
        Some(n) if n < used => {
            return Err(ParseError { column: 1, message: format!("uses x{used} but --nvars is {n}") });
        }
        Some(n) => n,
        None => used,
    };
    Ok(MonoPoly::from_terms(
        n,
        terms.into_iter().map(|(m, c)| {
            let mut e = vec![0; n];
            for (i, k) in m {
                e[i - 1] = k;
            }
            (Multidegree::new(e), c)
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeff(p: &MonoPoly, e: &[u32]) -> f64 {
        p.coeff(&Multidegree::new(e.to_vec()))
    }

    #[test]
    fn example_one() {
        let p = parse_polynomial("1 - x1^2 - x1^3 + x1^4", None).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(p, MonoPoly::univariate(&[1.0, 0.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn constants_and_rationals() {
        let p = parse_polynomial("3", None).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(coeff(&p, &[0]), 3.0);
        let q = parse_polynomial("x1*x2 - 1/2", None).unwrap();
        assert_eq!(q.num_vars(), 2);
        assert_eq!(coeff(&q, &[1, 1]), 1.0);
        assert_eq!(coeff(&q, &[0, 0]), -0.5);
        assert_eq!(q.terms().count(), 2);
    }

    #[test]
    fn products_and_repeats() {
        let p = parse_polynomial("-2.5e-1 x1 x2^2 + 3*x2*x1^1 + x1*x1 + 2/4*x3", None).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert_eq!(coeff(&p, &[1, 2, 0]), -0.25);
        assert_eq!(coeff(&p, &[1, 1, 0]), 3.0);
        assert_eq!(coeff(&p, &[2, 0, 0]), 1.0);
        assert_eq!(coeff(&p, &[0, 0, 1]), 0.5);
        let q = parse_polynomial("x1 - x1", None).unwrap();
        assert_eq!(q.terms().count(), 0);
    }

    #[test]
    fn nvars_override() {
        let p = parse_polynomial("x1 + 1", Some(3)).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert!(parse_polynomial("x2", Some(1)).is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_polynomial("1 + x1^-2", None).unwrap_err();
        assert_eq!(e.column, 8);
        assert!(e.message.contains("negative exponent"));
        assert_eq!(parse_polynomial("x1 + ", None).unwrap_err().column, 6);
        assert_eq!(parse_polynomial("x0", None).unwrap_err().column, 2);
        assert_eq!(parse_polynomial("2 ? x1", None).unwrap_err().column, 3);
        assert!(parse_polynomial("1/0", None).is_err());
        assert!(parse_polynomial("   ", None).is_err());
        assert!(parse_polynomial("y1", None).is_err());
    }
}
