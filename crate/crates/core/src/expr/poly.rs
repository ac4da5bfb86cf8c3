//! Sparse multivariate polynomials over the rationals.
//!
//! Indeterminates are [`Atom`]s: field variables or canonicalized
//! elementary-function applications. Monomials are ordered
//! lexicographically with `x1` the most significant indeterminate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func, Var};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Var(Var),
    Apply(Func, Expr),
}

/// Power product, sorted by atom with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Monomial(pub(crate) Vec<(Atom, u32)>);

impl Monomial {
    pub(crate) fn one() -> Self {
        Monomial(Vec::new())
    }

    pub(crate) fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn degree_in(&self, a: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(b, _)| b == a)
            .map_or(0, |(_, e)| *e)
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub(crate) fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && &other.0[j].0 < a {
                return None;
            }
            if j < other.0.len() && &other.0[j].0 == a {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((a.clone(), e - f)),
                }
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Drops `a` from the monomial, returning its former exponent.
    fn split(&self, a: &Atom) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(b, f)| {
                if b == a {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((xa, ea)), Some((xb, eb))) => match xa.cmp(xb) {
                    // The side holding the smaller atom has a positive
                    // exponent where the other has zero.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => i += 1,
                        o => return o,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Self::default()
    }

    pub(crate) fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub(crate) fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub(crate) fn from_monomial(m: Monomial) -> Self {
        let mut p = Self::zero();
        p.terms.insert(m, Rational::one());
        p
    }

    pub(crate) fn atom(a: Atom) -> Self {
        let mut p = Self::zero();
        p.terms.insert(Monomial::atom(a, 1), Rational::one());
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub(crate) fn lead(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub(crate) fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(a, _)| a.clone()))
            .collect()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub(crate) fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c * k))
                .collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub(crate) fn pow(&self, mut k: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub(crate) fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.degree_in(a)).max().unwrap_or(0)
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `a`.
    pub(crate) fn coeffs_in(&self, a: &Atom) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(a) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(a);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub(crate) fn from_coeffs(a: &Atom, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let m = Monomial::atom(a.clone(), e as u32);
            for (n, k) in &c.terms {
                out.add_term(n.mul(&m), k.clone());
            }
        }
        out
    }

    /// Exact quotient, or `None` when `other` does not divide `self`.
    pub(crate) fn div_exact(&self, other: &Poly) -> Option<Poly> {
        assert!(!other.is_zero(), "polynomial division by zero");
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lm_b, lc_b) = other.lead().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some((lm_r, lc_r)) = r.lead() {
            let m = lm_r.div(&lm_b)?;
            let k = lc_r / &lc_b;
            r = r.sub(&other.mul_term(&m, &k));
            q.add_term(m, k);
        }
        Some(q)
    }

    /// Scales so that the leading coefficient is one.
    pub(crate) fn monic(&self) -> Poly {
        match self.lead() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Poly::zero(),
        }
    }

    /// Greatest common divisor, monic in the leading term.
    pub(crate) fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.as_constant().is_some() || other.as_constant().is_some() {
            return Poly::one();
        }
        if self.certainly_coprime(other) {
            return Poly::one();
        }
        let (a, b) = (self.integer_primitive(), other.integer_primitive());
        if let Some(h) = heuristic_gcd(&a, &b, 0) {
            return h.monic();
        }
        let mut atoms = self.atoms();
        atoms.extend(other.atoms());
        let v = atoms.into_iter().next().expect("non-constant polynomial has an atom");
        let in_a = self.degree_in(&v) > 0;
        let in_b = other.degree_in(&v) > 0;
        if !in_a {
            return other.coeffs_in(&v).iter().fold(self.clone(), |g, c| g.gcd(c)).monic();
        }
        if !in_b {
            return self.coeffs_in(&v).iter().fold(other.clone(), |g, c| g.gcd(c)).monic();
        }
        let ca = self.content_in(&v);
        let cb = other.content_in(&v);
        let pa = self.div_exact(&ca).expect("content divides");
        let pb = other.div_exact(&cb).expect("content divides");
        let g = primitive_prs(pa, pb, &v);
        ca.gcd(&cb).mul(&g).monic()
    }

    /// Image in `Q[v]` after substituting `vals` for every other atom.
    fn univariate_image(&self, v: &Atom, vals: &BTreeMap<Atom, Rational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut k = c.clone();
            let mut e_v = 0;
            for (a, e) in &m.0 {
                if a == v {
                    e_v = *e;
                } else {
                    k *= num_traits::pow::Pow::pow(&vals[a], *e);
                }
            }
            out.add_term(Monomial::atom(v.clone(), e_v), k);
        }
        out
    }

    /// Sufficient test for `gcd(self, other) = 1`.
    ///
    /// A nonconstant common factor depends on some atom `v`; its image under
    /// any substitution of the other atoms that keeps both leading
    /// coefficients in `v` nonzero is a nonconstant common factor of the
    /// univariate images. A trivial image gcd for every atom rules that out.
    /// `false` means "not decided".
    fn certainly_coprime(&self, other: &Poly) -> bool {
        let mut atoms = self.atoms();
        atoms.extend(other.atoms());
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        'atoms: for (i, v) in atoms.iter().enumerate() {
            let (da, db) = (self.degree_in(v), other.degree_in(v));
            if da == 0 || db == 0 {
                continue;
            }
            for attempt in 0..4u64 {
                let vals: BTreeMap<Atom, Rational> = atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| *a != v)
                    .map(|(j, a)| {
                        let k = (attempt * 7919 + (i as u64) * 104_729 + (j as u64) * 1_299_709) % 89;
                        (a.clone(), Rational::from_integer((k as i64 + 2).into()))
                    })
                    .collect();
                let ia = self.univariate_image(v, &vals);
                let ib = other.univariate_image(v, &vals);
                if ia.degree_in(v) != da || ib.degree_in(v) != db {
                    continue;
                }
                if univariate_gcd_degree(ia, ib, v) == 0 {
                    continue 'atoms;
                }
                return false;
            }
            return false;
        }
        true
    }

    fn content_in(&self, v: &Atom) -> Poly {
        self.coeffs_in(v)
            .iter()
            .fold(Poly::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part in `v`, with coprime integer coefficients.
    fn primitive_part_in(&self, v: &Atom) -> Poly {
        let c = self.content_in(v);
        let p = self.div_exact(&c).expect("content divides");
        p.scale(&p.integer_normalizer())
    }

    /// Pseudo-remainder of `self` by `b` in `v`.
    fn prem(&self, b: &Poly, v: &Atom) -> Poly {
        let db = b.degree_in(v);
        let bc = b.coeffs_in(v);
        let lb = bc.last().cloned().unwrap_or_default();
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let dr = r.degree_in(v);
            if dr < db {
                return r;
            }
            let lr = r.coeffs_in(v).pop().unwrap_or_default();
            let shift = Poly::from_coeffs(v, &{
                let mut cs = vec![Poly::zero(); (dr - db) as usize + 1];
                cs[(dr - db) as usize] = lr;
                cs
            });
            r = lb.mul(&r).sub(&shift.mul(b));
            r = r.scale(&r.integer_normalizer());
        }
    }

    /// Content over the rationals as `(lcm of denominators, gcd of numerators)`
    /// folded into one positive factor `s` such that `s * self` has coprime
    /// integer coefficients.
    pub(crate) fn integer_normalizer(&self) -> Rational {
        use num_integer::Integer;
        let mut l = num_bigint::BigInt::one();
        for c in self.terms.values() {
            l = l.lcm(c.denom());
        }
        let mut g = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            let scaled = (c * Rational::from_integer(l.clone())).to_integer();
            g = g.gcd(&scaled);
        }
        if g.is_zero() {
            return Rational::one();
        }
        Rational::new(l, g.abs())
    }
}

impl Poly {
    /// Rescaled to coprime integer coefficients.
    fn integer_primitive(&self) -> Poly {
        self.scale(&self.integer_normalizer())
    }

    /// `self` with `v` replaced by the constant `c`.
    fn eval_atom(&self, v: &Atom, c: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            let (e, rest) = m.split(v);
            out.add_term(rest, k * num_traits::pow::Pow::pow(c, e));
        }
        out
    }

    fn max_norm(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.numer().abs())
            .max()
            .unwrap_or_default()
    }

    fn map_coeffs(&self, f: impl Fn(&BigInt) -> BigInt) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), Rational::from_integer(f(c.numer())));
        }
        out
    }
}

/// Symmetric residue of `c` modulo `m`, in `(-m/2, m/2]`.
fn symmetric_mod(c: &BigInt, m: &BigInt) -> BigInt {
    use num_integer::Integer;
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

const HEURISTIC_GCD_ATTEMPTS: usize = 6;
const HEURISTIC_GCD_MAX_BITS: u64 = 60_000;

/// Heuristic gcd of integer polynomials: evaluate one atom at a large
/// integer, recurse, and rebuild the result from its balanced base-`xi`
/// digits. A candidate is accepted only if it divides both inputs, which
/// makes it the gcd for `xi` above twice the smaller max-norm. `None` when
/// the attempts are exhausted.
fn heuristic_gcd(a: &Poly, b: &Poly, depth: usize) -> Option<Poly> {
    use num_integer::Integer;
    if a.is_zero() {
        return Some(b.clone());
    }
    if b.is_zero() {
        return Some(a.clone());
    }
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        return Some(Poly::constant(Rational::from_integer(x.numer().gcd(y.numer()))));
    }
    // gcd(a, b) = gcd(cont a, cont b) · gcd(pp a, pp b) over the integers.
    let (ka, kb) = (a.integer_normalizer(), b.integer_normalizer());
    let content = ka.recip().numer().gcd(kb.recip().numer());
    let (a, b) = (&a.scale(&ka), &b.scale(&kb));
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let v = atoms.into_iter().next()?;
    let norm = a.max_norm().min(b.max_norm());
    let mut xi: BigInt = norm * 2 + 29;
    for _ in 0..HEURISTIC_GCD_ATTEMPTS {
        if xi.bits() > HEURISTIC_GCD_MAX_BITS {
            return None;
        }
        let x = Rational::from_integer(xi.clone());
        let (ea, eb) = (a.eval_atom(&v, &x), b.eval_atom(&v, &x));
        if !ea.is_zero() && !eb.is_zero() {
            if let Some(image) = heuristic_gcd(&ea, &eb, depth + 1) {
                let mut rest = image;
                let mut h = Poly::zero();
                let mut i = 0u32;
                while !rest.is_zero() {
                    let digit = rest.map_coeffs(|c| symmetric_mod(c, &xi));
                    h = h.add(&digit.mul(&Poly::from_monomial(Monomial::atom(v.clone(), i))));
                    rest = rest.sub(&digit).scale(&Rational::from_integer(xi.clone()).recip());
                    i += 1;
                }
                if !h.is_zero() {
                    let h = h.integer_primitive();
                    if a.div_exact(&h).is_some() && b.div_exact(&h).is_some() {
                        return Some(h.scale(&Rational::from_integer(content)));
                    }
                }
            }
        }
        xi = xi * BigInt::from(73_794) / BigInt::from(27_011);
    }
    None
}

/// Degree of the gcd of two univariate polynomials in `v`.
fn univariate_gcd_degree(a: Poly, b: Poly, v: &Atom) -> u32 {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        if b.is_zero() {
            return a.degree_in(v);
        }
        if b.degree_in(v) == 0 {
            return 0;
        }
        let r = a.prem(&b, v);
        a = b;
        b = r;
    }
}

/// Gcd of two polynomials that are primitive in `v` and both depend on it.
fn primitive_prs(a: Poly, b: Poly, v: &Atom) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = a.prem(&b, v);
        if r.is_zero() {
            return b.primitive_part_in(v);
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        a = b;
        b = r.primitive_part_in(v);
    }
}
