//! The dense spanning *-subalgebra of the Toeplitz algebra: rational
//! combinations of terms `s_v u_g s_w*`.
//!
//! Products follow the rules
//!
//! - `(v, g, w)(wy', h, z) = (v(g·y'), g|_{y'} h, z)`
//! - `(v, g, yw')(y, h, z) = (v, g h|_{h⁻¹·w'}, z(h⁻¹·w'))`
//!
//! and vanish when neither of `w`, `y` is a prefix of the other.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::action::{act_and_restrict, SelfSimilarAction};
use crate::alphabet::Word;
use crate::closure::{canonical_form, CanonicalForm, Caps};
use crate::error::{Error, Result};

/// The term `s_v u_g s_w*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTerm<E> {
    pub v: Word,
    pub g: E,
    pub w: Word,
}

impl<E> SpanningTerm<E> {
    /// `|v| − |w|`.
    pub fn degree(&self) -> i64 {
        self.v.len() as i64 - self.w.len() as i64
    }

    pub fn is_diagonal(&self) -> bool {
        self.v == self.w
    }
}

/// Gauge degree `|v| − |w|` of a term.
pub fn gauge_degree<E>(term: &SpanningTerm<E>) -> i64 {
    term.degree()
}

/// `r^n` for any integer `n`; `r` must be non-zero when `n < 0`.
pub fn rational_pow(r: &BigRational, n: i64) -> BigRational {
    let base = if n < 0 { r.recip() } else { r.clone() };
    num::pow(base, n.unsigned_abs() as usize)
}

/// A finitely supported rational combination of terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combination<E: Ord> {
    terms: BTreeMap<SpanningTerm<E>, BigRational>,
}

impl<E: Ord> Default for Combination<E> {
    fn default() -> Self {
        Combination {
            terms: BTreeMap::new(),
        }
    }
}

impl<E: Ord + Clone> Combination<E> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_term(term: SpanningTerm<E>) -> Self {
        let mut c = Self::zero();
        c.add_term(term, BigRational::one());
        c
    }

    pub fn add_term(&mut self, term: SpanningTerm<E>, coefficient: BigRational) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self.terms.entry(term);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coefficient;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SpanningTerm<E>, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, term: &SpanningTerm<E>) -> BigRational {
        self.terms
            .get(term)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero();
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }
}

/// `σ_{iβ}` at `r = e^{−β}`: each term is scaled by `r^{|v|−|w|}`.
pub fn apply_gauge<E: Ord + Clone>(c: &Combination<E>, r: &BigRational) -> Combination<E> {
    let mut out = Combination::zero();
    for (t, coef) in c.terms() {
        out.add_term(t.clone(), coef * rational_pow(r, t.degree()));
    }
    out
}

#[derive(Default)]
struct Representatives<E> {
    by_element: HashMap<E, E>,
    by_form: HashMap<CanonicalForm, E>,
}

/// Term arithmetic over a fixed action. Group entries of terms are replaced
/// by a canonical representative of their action, so equal automorphisms
/// always give equal terms.
pub struct Algebra<'a, A: SelfSimilarAction> {
    action: &'a A,
    caps: Caps,
    reps: Mutex<Representatives<A::Element>>,
}

impl<'a, A: SelfSimilarAction> Algebra<'a, A> {
    pub fn new(action: &'a A, caps: Caps) -> Self {
        Algebra {
            action,
            caps,
            reps: Mutex::new(Representatives {
                by_element: HashMap::new(),
                by_form: HashMap::new(),
            }),
        }
    }

    pub fn action(&self) -> &'a A {
        self.action
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    /// The representative of the class of `g`; the first element seen with a
    /// given action becomes its representative.
    pub fn canonicalize(&self, g: &A::Element) -> Result<A::Element> {
        if self.action.is_identity(g) {
            return Ok(g.clone());
        }
        if let Some(r) = self.reps.lock().expect("lock").by_element.get(g) {
            return Ok(r.clone());
        }
        let form = canonical_form(self.action, g, &self.caps).map_err(|e| match e {
            Error::Overflow { elements, depth, .. } => Error::Undecided(format!(
                "cannot canonicalize {}: closure exceeded caps ({elements} elements, depth {depth})",
                self.action.format_element(g)
            )),
            other => other,
        })?;
        let mut reps = self.reps.lock().expect("lock");
        let rep = if form.is_identity() {
            self.action.identity()
        } else {
            reps.by_form
                .entry(form)
                .or_insert_with(|| g.clone())
                .clone()
        };
        reps.by_element.insert(g.clone(), rep.clone());
        Ok(rep)
    }

    /// A term with canonicalized group entry.
    pub fn term(&self, v: Word, g: &A::Element, w: Word) -> Result<SpanningTerm<A::Element>> {
        let alphabet = self.action.alphabet();
        alphabet.check(&v)?;
        alphabet.check(&w)?;
        Ok(SpanningTerm {
            v,
            g: self.canonicalize(g)?,
            w,
        })
    }

    /// `1 = s_∅ u_e s_∅*`.
    pub fn unit(&self) -> SpanningTerm<A::Element> {
        SpanningTerm {
            v: Word::empty(),
            g: self.action.identity(),
            w: Word::empty(),
        }
    }

    pub fn multiply_terms(
        &self,
        a: &SpanningTerm<A::Element>,
        b: &SpanningTerm<A::Element>,
    ) -> Result<Option<SpanningTerm<A::Element>>> {
        let action = self.action;
        if let Some(rest) = b.v.strip_prefix(&a.w) {
            let (image, restricted) = act_and_restrict(action, &a.g, &rest);
            let g = action.compose(&restricted, &b.g);
            Ok(Some(SpanningTerm {
                v: a.v.concat(&image),
                g: self.canonicalize(&g)?,
                w: b.w.clone(),
            }))
        } else if let Some(rest) = a.w.strip_prefix(&b.v) {
            let h_inv = action.invert(&b.g);
            let (moved, _) = act_and_restrict(action, &h_inv, &rest);
            let (_, h_restricted) = act_and_restrict(action, &b.g, &moved);
            let g = action.compose(&a.g, &h_restricted);
            Ok(Some(SpanningTerm {
                v: a.v.clone(),
                g: self.canonicalize(&g)?,
                w: b.w.concat(&moved),
            }))
        } else {
            Ok(None)
        }
    }

    pub fn multiply(
        &self,
        a: &Combination<A::Element>,
        b: &Combination<A::Element>,
    ) -> Result<Combination<A::Element>> {
        let mut out = Combination::zero();
        for (s, p) in a.terms() {
            for (t, q) in b.terms() {
                if let Some(st) = self.multiply_terms(s, t)? {
                    out.add_term(st, p * q);
                }
            }
        }
        Ok(out)
    }

    /// `(s_v u_g s_w*)* = s_w u_{g⁻¹} s_v*`.
    pub fn adjoint_term(&self, t: &SpanningTerm<A::Element>) -> Result<SpanningTerm<A::Element>> {
        Ok(SpanningTerm {
            v: t.w.clone(),
            g: self.canonicalize(&self.action.invert(&t.g))?,
            w: t.v.clone(),
        })
    }

    pub fn adjoint(&self, a: &Combination<A::Element>) -> Result<Combination<A::Element>> {
        let mut out = Combination::zero();
        for (t, c) in a.terms() {
            out.add_term(self.adjoint_term(t)?, c.clone());
        }
        Ok(out)
    }

    /// Rewrites each term with `Σ_{y ∈ X^n} s_y s_y* = 1`:
    /// `s_v u_h s_w* = Σ_y s_{v(h·y)} u_{h|_y} s_{wy}*`. Only valid in the
    /// Cuntz-Pimsner quotient.
    pub fn expand_to_depth(
        &self,
        a: &Combination<A::Element>,
        n: usize,
    ) -> Result<Combination<A::Element>> {
        let mut out = Combination::zero();
        let words: Vec<Word> = self.action.alphabet().words(n).collect();
        for (t, c) in a.terms() {
            for y in &words {
                let (image, restricted) = act_and_restrict(self.action, &t.g, y);
                out.add_term(
                    SpanningTerm {
                        v: t.v.concat(&image),
                        g: self.canonicalize(&restricted)?,
                        w: t.w.concat(y),
                    },
                    c.clone(),
                );
            }
        }
        Ok(out)
    }

    pub fn format_term(&self, t: &SpanningTerm<A::Element>) -> String {
        let alphabet = self.action.alphabet();
        let mut parts = Vec::new();
        if !t.v.is_empty() {
            parts.push(format!("s[{}]", alphabet.format_word(&t.v)));
        }
        if !self.action.is_identity(&t.g) || (t.v.is_empty() && t.w.is_empty()) {
            parts.push(format!("u[{}]", self.action.format_element(&t.g)));
        }
        if !t.w.is_empty() {
            parts.push(format!("s*[{}]", alphabet.format_word(&t.w)));
        }
        parts.join(" ")
    }

    pub fn format(&self, a: &Combination<A::Element>) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (t, c)) in a.terms().enumerate() {
            let negative = c.is_negative();
            if i > 0 {
                out.push_str(if negative { " - " } else { " + " });
            } else if negative {
                out.push('-');
            }
            let magnitude = c.abs();
            if !magnitude.is_one() {
                out.push_str(&format!("{magnitude} * "));
            }
            out.push_str(&self.format_term(t));
        }
        out
    }

    /// Parses `combo := term (('+'|'-') term)*`,
    /// `term := [rational '*'] factor+`,
    /// `factor := 's[' word ']' | 's*[' word ']' | 'u[' gword ']'`.
    pub fn parse(&self, text: &str) -> Result<Combination<A::Element>> {
        Parser {
            algebra: self,
            text,
            pos: 0,
        }
        .combination()
    }

    /// Parses a single group element in the `gword` syntax.
    pub fn parse_element(&self, text: &str) -> Result<A::Element> {
        self.action.parse_element(text)
    }
}

struct Parser<'p, 'a, A: SelfSimilarAction> {
    algebra: &'p Algebra<'a, A>,
    text: &'p str,
    pos: usize,
}

impl<A: SelfSimilarAction> Parser<'_, '_, A> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.pos, message))
    }

    fn combination(&mut self) -> Result<Combination<A::Element>> {
        let mut out = Combination::zero();
        let mut sign = BigRational::one();
        if self.eat("-") {
            sign = -sign;
        } else {
            self.eat("+");
        }
        loop {
            let term = self.term()?;
            out = out.add(&term.scale(&sign));
            match self.peek() {
                None => return Ok(out),
                Some('+') => {
                    self.pos += 1;
                    sign = BigRational::one();
                }
                Some('-') => {
                    self.pos += 1;
                    sign = -BigRational::one();
                }
                Some(c) => return self.error(format!("unexpected {c:?}")),
            }
        }
    }

    fn rational(&mut self) -> Result<Option<BigRational>> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Ok(None);
        }
        let start = self.pos;
        let numer: BigInt = rest[..digits].parse().expect("digits");
        self.pos += digits;
        let mut value = BigRational::from_integer(numer);
        if self.eat("/") {
            self.skip_ws();
            let rest = &self.text[self.pos..];
            let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
            if digits == 0 {
                return self.error("expected denominator");
            }
            let denom: BigInt = rest[..digits].parse().expect("digits");
            if denom.is_zero() {
                return Err(Error::parse(start, "zero denominator"));
            }
            self.pos += digits;
            value /= BigRational::from_integer(denom);
        }
        if !self.eat("*") {
            return self.error("expected '*' after coefficient");
        }
        Ok(Some(value))
    }

    fn bracket(&mut self) -> Result<(usize, &str)> {
        if !self.eat("[") {
            return self.error("expected '['");
        }
        let start = self.pos;
        match self.text[start..].find(']') {
            Some(len) => {
                self.pos = start + len + 1;
                Ok((start, &self.text[start..start + len]))
            }
            None => self.error("unclosed '['"),
        }
    }

    fn term(&mut self) -> Result<Combination<A::Element>> {
        let algebra = self.algebra;
        let coefficient = self.rational()?.unwrap_or_else(BigRational::one);
        let mut acc = Combination::from_term(algebra.unit());
        let mut factors = 0;
        loop {
            let factor = if self.eat("s*") {
                let (start, inner) = self.bracket()?;
                let w = algebra.action.alphabet().parse_word_at(inner, start)?;
                SpanningTerm {
                    v: Word::empty(),
                    g: algebra.action.identity(),
                    w,
                }
            } else if self.eat("s") {
                let (start, inner) = self.bracket()?;
                let v = algebra.action.alphabet().parse_word_at(inner, start)?;
                SpanningTerm {
                    v,
                    g: algebra.action.identity(),
                    w: Word::empty(),
                }
            } else if self.eat("u") {
                let (start, inner) = self.bracket()?;
                let g = algebra.action.parse_element(inner).map_err(|e| match e {
                    Error::Parse { position, message } => Error::Parse {
                        position: start + position,
                        message,
                    },
                    other => other,
                })?;
                SpanningTerm {
                    v: Word::empty(),
                    g: algebra.canonicalize(&g)?,
                    w: Word::empty(),
                }
            } else {
                break;
            };
            acc = algebra.multiply(&acc, &Combination::from_term(factor))?;
            factors += 1;
        }
        if factors == 0 {
            return self.error("expected s[..], s*[..] or u[..]");
        }
        Ok(acc.scale(&coefficient))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mealy::MealyAction;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn toeplitz_cuntz_relations() {
        let act = MealyAction::basilica();
        let alg = Algebra::new(&act, Caps::default());
        let one = alg.parse("u[e]").unwrap();
        assert_eq!(alg.parse("s*[x] s[x]").unwrap(), one);
        assert!(alg.parse("s*[x] s[y]").unwrap().is_zero());
        assert!(alg.parse("s*[x] u[b] s[y]").unwrap().is_zero());
        // u_a s_x = s_y u_b
        assert_eq!(
            alg.parse("u[a] s[x]").unwrap(),
            alg.parse("s[y] u[b]").unwrap()
        );
    }

    #[test]
    fn parse_examples() {
        let act = MealyAction::basilica();
        let alg = Algebra::new(&act, Caps::default());
        let w = |s: &str| act.alphabet().parse_word(s).unwrap();
        let aba = act.parse_element("aba").unwrap();
        let c = alg.parse("s[x] u[aba] s*[x]").unwrap();
        let t = alg.term(w("x"), &aba, w("x")).unwrap();
        assert_eq!(c, Combination::from_term(t));
        let c = alg.parse("u[a^-1 b]").unwrap();
        let g = act.parse_element("a^-1 b").unwrap();
        assert_eq!(
            c,
            Combination::from_term(alg.term(w(""), &g, w("")).unwrap())
        );
        let c = alg.parse("s[xy]").unwrap();
        assert_eq!(
            c,
            Combination::from_term(alg.term(w("xy"), &act.identity(), w("")).unwrap())
        );
        let c = alg.parse("1/2 * u[a] - 3 * s[x] s*[x] + u[a]").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(alg.format(&c), "3/2 * u[a] - 3 * s[x] s*[x]");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let act = MealyAction::basilica();
        let alg = Algebra::new(&act, Caps::default());
        match alg.parse("s[xz]") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("unexpected {other:?}"),
        }
        match alg.parse("u[a q]") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(alg.parse("").is_err());
        assert!(alg.parse("u[a] +").is_err());
        assert!(alg.parse("2 u[a]").is_err());
        assert!(alg.parse("s[x").is_err());
    }

    #[test]
    fn adjoints() {
        let act = MealyAction::grigorchuk();
        let alg = Algebra::new(&act, Caps::default());
        let unit = Combination::from_term(alg.unit());
        assert_eq!(alg.adjoint(&unit).unwrap(), unit);
        for g in ["a", "b", "cad", "e"] {
            let t = alg.parse(&format!("s[x] u[{g}]")).unwrap();
            let p = alg.multiply(&alg.adjoint(&t).unwrap(), &t).unwrap();
            assert_eq!(p, unit, "{g}");
            assert_eq!(alg.adjoint(&alg.adjoint(&t).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn canonical_entries() {
        let act = MealyAction::grigorchuk();
        let alg = Algebra::new(&act, Caps::default());
        assert_eq!(alg.parse("u[cd]").unwrap(), alg.parse("u[b]").unwrap());
        assert_eq!(alg.parse("u[bb]").unwrap(), alg.parse("u[e]").unwrap());
    }

    #[test]
    fn gauge() {
        let act = MealyAction::basilica();
        let alg = Algebra::new(&act, Caps::default());
        let t = alg.parse("s[xy] u[a]").unwrap();
        let (term, _) = t.terms().next().unwrap();
        assert_eq!(gauge_degree(term), 2);
        assert_eq!(gauge_degree(&alg.unit()), 0);
        let t = alg.parse("s[x] u[a]").unwrap();
        let scaled = apply_gauge(&t, &q(1, 3));
        assert_eq!(scaled.terms().next().unwrap().1, &q(1, 3));
        let t = alg.parse("s*[x]").unwrap();
        assert_eq!(
            apply_gauge(&t, &q(1, 3)).terms().next().unwrap().1,
            &q(3, 1)
        );
    }

    #[test]
    fn expansions() {
        let act = MealyAction::basilica();
        let alg = Algebra::new(&act, Caps::default());
        let unit = Combination::from_term(alg.unit());
        assert_eq!(
            alg.expand_to_depth(&unit, 1).unwrap(),
            alg.parse("s[x] s*[x] + s[y] s*[y]").unwrap()
        );
        assert_eq!(
            alg.expand_to_depth(&alg.parse("u[aba]").unwrap(), 1)
                .unwrap(),
            alg.parse("s[x] u[b] s*[x] + s[y] u[ba] s*[y]").unwrap()
        );
        let gri = MealyAction::grigorchuk();
        let alg = Algebra::new(&gri, Caps::default());
        assert_eq!(
            alg.expand_to_depth(&alg.parse("u[d]").unwrap(), 1).unwrap(),
            alg.parse("s[x] s*[x] + s[y] u[b] s*[y]").unwrap()
        );
    }
}
