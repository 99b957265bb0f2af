//! Exact scalars.
//!
//! [`GaussRat`] is an element of the field `Q(i)`. [`Scalar`] is a polynomial
//! in named real parameters with `GaussRat` coefficients, where every
//! monomial may also carry an integer power of the formal unit `pi`. `pi` is
//! never evaluated numerically.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Element `re + im * i` of the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    re: BigRational,
    im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_parts(re: i64, im: i64) -> Self {
        GaussRat::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat::new(re, BigRational::zero())
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|^2 = re^2 + im^2`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn mul_i(&self) -> Self {
        GaussRat::new(-self.im.clone(), self.re.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Least common multiple of the denominators of both parts.
    pub fn denom_lcm(&self) -> BigInt {
        self.re.denom().lcm(self.im.denom())
    }
}

impl Default for GaussRat {
    fn default() -> Self {
        GaussRat::zero()
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($ty:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a $ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &'a $ty) -> $ty { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(GaussRat, Add add, Sub sub, Mul mul);

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}", fmt_imag(&self.im)),
            (false, false) => {
                let im = fmt_imag(&self.im);
                if im.starts_with('-') {
                    write!(f, "({}{})", fmt_rational(&self.re), im)
                } else {
                    write!(f, "({}+{})", fmt_rational(&self.re), im)
                }
            }
        }
    }
}

fn fmt_imag(im: &BigRational) -> String {
    if im.is_one() {
        "i".to_string()
    } else if (-im).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", fmt_rational(im))
    }
}

/// Interned parameter name.
pub type Symbol = Arc<str>;

/// A monomial `pi^pi_power * prod(param^exp)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    pi: i32,
    vars: Vec<(Symbol, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn pi_power(p: i32) -> Self {
        Monomial { pi: p, vars: Vec::new() }
    }

    pub fn var(name: &str) -> Self {
        Monomial { pi: 0, vars: vec![(Arc::from(name), 1)] }
    }

    pub fn pi(&self) -> i32 {
        self.pi
    }

    pub fn vars(&self) -> &[(Symbol, u32)] {
        &self.vars
    }

    pub fn is_one(&self) -> bool {
        self.pi == 0 && self.vars.is_empty()
    }

    /// Total degree in the real parameters (pi excluded).
    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        self.vars.iter().find(|(s, _)| &**s == name).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut vars: Vec<(Symbol, u32)> = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut a, mut b) = (self.vars.iter().peekable(), other.vars.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    std::cmp::Ordering::Less => {
                        vars.push((sa.clone(), *ea));
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        vars.push((sb.clone(), *eb));
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        vars.push((sa.clone(), ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(x), None) => {
                    vars.push((*x).clone());
                    a.next();
                }
                (None, Some(y)) => {
                    vars.push((*y).clone());
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial { pi: self.pi + other.pi, vars }
    }

    /// Componentwise minimum of exponents (variables absent in either side drop out).
    fn gcd(&self, other: &Monomial) -> Monomial {
        let vars = self
            .vars
            .iter()
            .filter_map(|(s, e)| {
                let f = other.degree_in(s);
                (f > 0).then(|| (s.clone(), (*e).min(f)))
            })
            .collect();
        Monomial { pi: self.pi.min(other.pi), vars }
    }

    /// Exact quotient; caller guarantees divisibility.
    fn div(&self, other: &Monomial) -> Monomial {
        let vars = self
            .vars
            .iter()
            .filter_map(|(s, e)| {
                let r = e - other.degree_in(s);
                (r > 0).then(|| (s.clone(), r))
            })
            .collect();
        Monomial { pi: self.pi - other.pi, vars }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.pi.cmp(&other.pi))
            .then_with(|| other.vars.cmp(&self.vars))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.pi {
            0 => {}
            1 => parts.push("pi".to_string()),
            p => parts.push(format!("pi**{p}")),
        }
        for (s, e) in &self.vars {
            if *e == 1 {
                parts.push(s.to_string());
            } else {
                parts.push(format!("{s}**{e}"));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Polynomial in real parameters and the formal unit `pi`, with Gaussian
/// rational coefficients. Canonical: no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from(GaussRat::one())
    }

    pub fn i() -> Self {
        Scalar::from(GaussRat::i())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from(GaussRat::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::from(GaussRat::from_ratio(num, den))
    }

    pub fn pi() -> Self {
        Scalar::monomial(Monomial::pi_power(1), GaussRat::one())
    }

    pub fn param(name: &str) -> Self {
        Scalar::monomial(Monomial::var(name), GaussRat::one())
    }

    pub fn monomial(m: Monomial, c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    /// The value as a Gaussian rational, if the scalar involves neither parameters nor `pi`.
    pub fn as_gauss(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_gauss().is_some()
    }

    /// Names of all parameters appearing in the scalar.
    pub fn params(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self
            .terms
            .keys()
            .flat_map(|m| m.vars.iter().map(|(s, _)| s.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        self.terms.keys().map(|m| m.degree_in(name)).max().unwrap_or(0)
    }

    pub fn conj(&self) -> Self {
        Scalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect() }
    }

    /// Real and imaginary parts, both with real coefficients.
    pub fn re_im(&self) -> (Scalar, Scalar) {
        let mut re = Scalar::zero();
        let mut im = Scalar::zero();
        for (m, c) in &self.terms {
            re.add_term(m.clone(), GaussRat::real(c.re().clone()));
            im.add_term(m.clone(), GaussRat::real(c.im().clone()));
        }
        (re, im)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussRat::is_real)
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    /// Division by a nonzero parameter-free Gaussian rational.
    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        let g = rhs.as_gauss().ok_or(Error::PolynomialDivision)?;
        let inv = g.inv().ok_or(Error::DivisionByZero)?;
        Ok(self.scale(&inv))
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Substitutes rational values for parameters; `pi` stays formal.
    pub fn eval(&self, values: &BTreeMap<String, BigRational>) -> Scalar {
        let mut out = Scalar::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (s, e) in &m.vars {
                match values.get(&**s) {
                    Some(v) => {
                        let p = GaussRat::real(v.clone()).pow(*e);
                        coeff = &coeff * &p;
                    }
                    None => rest.push((s.clone(), *e)),
                }
            }
            out.add_term(Monomial { pi: m.pi, vars: rest }, coeff);
        }
        out
    }

    /// Factored rendering: rational content and common monomial pulled out,
    /// e.g. `-2*pi*(t+1)`.
    pub fn factored(&self) -> String {
        if self.terms.len() <= 1 {
            return self.to_string();
        }
        let mut content: Option<BigRational> = None;
        for c in self.terms.values() {
            for part in [c.re(), c.im()] {
                if part.is_zero() {
                    continue;
                }
                content = Some(match content {
                    None => part.abs(),
                    Some(g) => rational_gcd(&g, part),
                });
            }
        }
        let mut content = content.unwrap_or_else(BigRational::one);
        let (_, lead) = self.terms.iter().next_back().unwrap();
        let lead_part = if lead.re().is_zero() { lead.im() } else { lead.re() };
        if lead_part.is_negative() {
            content = -content;
        }
        let common = self
            .terms
            .keys()
            .skip(1)
            .fold(self.terms.keys().next().unwrap().clone(), |g, m| g.gcd(m));
        let inv = GaussRat::real(content.clone()).inv().unwrap();
        let mut rest = Scalar::zero();
        for (m, c) in &self.terms {
            rest.add_term(m.div(&common), c * &inv);
        }
        let mut prefix = Vec::new();
        if content.is_one() {
        } else if (-&content).is_one() {
            prefix.push("-".to_string());
        } else {
            prefix.push(format!("{}*", fmt_rational(&content)));
        }
        if !common.is_one() {
            prefix.push(format!("{common}*"));
        }
        format!("{}({})", prefix.concat(), rest)
    }
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    let num = a.numer().gcd(b.numer());
    let den = a.denom().lcm(b.denom());
    BigRational::new(num, den)
}

impl From<GaussRat> for Scalar {
    fn from(c: GaussRat) -> Self {
        Scalar::monomial(Monomial::one(), c)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

forward_owned!(Scalar, Add add, Sub sub, Mul mul);

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let body = term_string(m, c);
            if first {
                write!(f, "{body}")?;
            } else if let Some(stripped) = body.strip_prefix('-') {
                write!(f, "-{stripped}")?;
            } else {
                write!(f, "+{body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

fn term_string(m: &Monomial, c: &GaussRat) -> String {
    if m.is_one() {
        return c.to_string();
    }
    if c.is_one() {
        return m.to_string();
    }
    if (-c).is_one() {
        return format!("-{m}");
    }
    format!("{c}*{m}")
}
