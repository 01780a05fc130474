//! Map literals: `(x+y^2, y+x^2+z^2, z+x^2)`.
//!
//! Variables are `x, y, z` or `x1..xn`; integer coefficients are reduced mod
//! `p` over prime fields and read as element encodings `0..q-1` otherwise.
//! Formatting lists terms in basis order and is the inverse of parsing.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{MapError, PolyMap};
use crate::ff::{Elem, FieldCtx};
use crate::mpoly::{MultiPoly, PolyRing};

struct Term {
    neg: bool,
    coeff: Option<(u64, usize)>,
    vars: Vec<(usize, u32, usize)>,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, MapError> {
        Err(MapError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn expect(&mut self, c: u8) -> Result<(), MapError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected `{}`", c as char))
        }
    }

    fn int(&mut self) -> Result<(u64, usize), MapError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        match text.parse() {
            Ok(v) => Ok((v, start)),
            Err(_) => Err(MapError::Syntax { pos: start, msg: "integer too large".into() }),
        }
    }

    /// Variable name at the cursor, returned as a 0-based index.
    fn var(&mut self) -> Result<Option<(usize, usize)>, MapError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let Some(&c) = self.s.get(self.pos) else { return Ok(None) };
        if !c.is_ascii_alphabetic() {
            return Ok(None);
        }
        self.pos += 1;
        match c {
            b'x' if self.s.get(self.pos).is_some_and(|d| d.is_ascii_digit()) => {
                let (k, _) = self.int()?;
                if k == 0 {
                    return Err(MapError::UnknownVariable { name: "x0".into(), pos: start });
                }
                Ok(Some((k as usize - 1, start)))
            }
            b'x' => Ok(Some((0, start))),
            b'y' => Ok(Some((1, start))),
            b'z' => Ok(Some((2, start))),
            _ => Err(MapError::UnknownVariable { name: (c as char).to_string(), pos: start }),
        }
    }

    fn term(&mut self, neg: bool) -> Result<Term, MapError> {
        let mut t = Term { neg, coeff: None, vars: Vec::new() };
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            t.coeff = Some(self.int()?);
        }
        loop {
            let save = self.pos;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
            match self.var()? {
                Some((v, at)) => {
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let (x, at) = self.int()?;
                        e = u32::try_from(x).map_err(|_| MapError::Syntax { pos: at, msg: "exponent too large".into() })?;
                    }
                    t.vars.push((v, e, at));
                }
                None => {
                    if self.pos != save && self.s.get(save..self.pos).is_some_and(|w| w.contains(&b'*')) {
                        return self.err("expected a variable after `*`");
                    }
                    self.pos = save;
                    break;
                }
            }
        }
        if t.coeff.is_none() && t.vars.is_empty() {
            return self.err("expected a term");
        }
        Ok(t)
    }

    fn poly(&mut self) -> Result<Vec<Term>, MapError> {
        let mut terms = Vec::new();
        let mut neg = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            neg = true;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        terms.push(self.term(neg)?);
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term(false)?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term(true)?);
                }
                _ => return Ok(terms),
            }
        }
    }

    fn map(&mut self) -> Result<Vec<Vec<Term>>, MapError> {
        self.expect(b'(')?;
        let mut comps = vec![self.poly()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            comps.push(self.poly()?);
        }
        self.expect(b')')?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(comps)
    }
}

fn build(ring: &PolyRing, terms: &[Term]) -> Result<MultiPoly, MapError> {
    let f = ring.field();
    let n = ring.n();
    let mut out = MultiPoly::zero();
    for t in terms {
        let c = match t.coeff {
            None => 1,
            Some((v, at)) => coeff_from_int(f, v, at)?,
        };
        let c = if t.neg { f.neg(c) } else { c };
        let mut exps = vec![0u32; n];
        for &(v, e, at) in &t.vars {
            if v >= n {
                let name = if n <= 3 && v < 3 { ["x", "y", "z"][v].to_string() } else { format!("x{}", v + 1) };
                return Err(MapError::UnknownVariable { name, pos: at });
            }
            exps[v] += e;
        }
        let degree: u32 = exps.iter().sum();
        if degree > ring.cap() || exps.iter().any(|&e| e > u8::MAX as u32) {
            return Err(crate::mpoly::PolyError::CapExceeded { degree, cap: ring.cap() }.into());
        }
        let e8: Vec<u8> = exps.iter().map(|&e| e as u8).collect();
        out = ring.add(&out, &ring.monomial(c, &e8)?);
    }
    Ok(out)
}

fn coeff_from_int(f: &FieldCtx, v: u64, at: usize) -> Result<Elem, MapError> {
    if f.is_prime_field() {
        Ok((v % f.p() as u64) as Elem)
    } else if (v as usize) < f.q() {
        Ok(v as Elem)
    } else {
        Err(MapError::CoefficientOutOfRange { value: v, pos: at })
    }
}

/// Parses a map literal; the number of components fixes `n`.
pub fn parse_map(text: &str, field: &Arc<FieldCtx>) -> Result<PolyMap, MapError> {
    let comps = Parser { s: text.as_bytes(), pos: 0 }.map()?;
    let ring = PolyRing::new(field.clone(), comps.len());
    let polys = comps.iter().map(|t| build(&ring, t)).collect::<Result<_, _>>()?;
    PolyMap::new(ring, polys)
}

/// Parses a map literal into an existing ring.
pub fn parse_map_in(text: &str, ring: &PolyRing) -> Result<PolyMap, MapError> {
    let comps = Parser { s: text.as_bytes(), pos: 0 }.map()?;
    if comps.len() != ring.n() {
        return Err(crate::mpoly::PolyError::ArityMismatch { expected: ring.n(), got: comps.len() }.into());
    }
    let polys = comps.iter().map(|t| build(ring, t)).collect::<Result<_, _>>()?;
    PolyMap::new(ring.clone(), polys)
}

pub fn format_poly(ring: &PolyRing, p: &MultiPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let n = ring.n();
    let short = n <= 3;
    let mut s = String::new();
    for (exps, c) in ring.terms(p) {
        if !s.is_empty() {
            s.push('+');
        }
        let constant = exps.iter().all(|&e| e == 0);
        if c != 1 || constant {
            let _ = write!(s, "{c}");
        }
        let mut first = true;
        for (v, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if short {
                s.push(['x', 'y', 'z'][v]);
            } else {
                if !first {
                    s.push('*');
                }
                let _ = write!(s, "x{}", v + 1);
            }
            first = false;
            if e > 1 {
                let _ = write!(s, "^{e}");
            }
        }
    }
    s
}

pub fn format_map(map: &PolyMap) -> String {
    let parts: Vec<String> = map.comps().iter().map(|c| format_poly(map.ring(), c)).collect();
    format!("({})", parts.join(", "))
}
