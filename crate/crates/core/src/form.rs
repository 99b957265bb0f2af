//! Sparse exterior algebra on `N` degree-one generators.
//!
//! A [`Blade`] is a subset of generator indices stored as a bitmask; index 0
//! is displayed as `e1`. Blades are ordered by degree, then lexicographically
//! by their sorted index lists, and all signs are taken relative to that
//! ascending order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, BitXor, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{GaussRat, Scalar};

pub const MAX_GENERATORS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Blade(pub u64);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    pub fn single(i: usize) -> Blade {
        Blade(1u64 << i)
    }

    pub fn from_indices(indices: &[usize]) -> Blade {
        Blade(indices.iter().fold(0u64, |m, &i| m | (1u64 << i)))
    }

    pub fn full(n: usize) -> Blade {
        if n == 64 {
            Blade(u64::MAX)
        } else {
            Blade((1u64 << n) - 1)
        }
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn indices(self) -> Vec<usize> {
        (0..64).filter(|&i| self.contains(i)).collect()
    }

    /// Sign of `e_A ∧ e_B` relative to the sorted blade, or `None` if they overlap.
    pub fn wedge_sign(self, other: Blade) -> Option<i32> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            swaps += (self.0 >> j).count_ones();
            b &= b - 1;
        }
        Some(if swaps % 2 == 0 { 1 } else { -1 })
    }

    /// Number of indices strictly below `i`.
    fn below(self, i: usize) -> u32 {
        (self.0 & ((1u64 << i) - 1)).count_ones()
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grade().cmp(&other.grade()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 >> diff.trailing_zeros() & 1 == 1 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All blades on `n` generators in canonical order.
pub fn all_blades(n: usize) -> Vec<Blade> {
    assert!(n <= 20, "dense enumeration limited to 20 generators");
    let mut v: Vec<Blade> = (0..1u64 << n).map(Blade).collect();
    v.sort();
    v
}

/// Blades of degree `k` on `n` generators in canonical order.
pub fn blades_of_grade(n: usize, k: usize) -> Vec<Blade> {
    all_blades(n).into_iter().filter(|b| b.grade() == k).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    n: usize,
    terms: BTreeMap<Blade, Scalar>,
}

impl Form {
    pub fn zero(n: usize) -> Form {
        assert!(n <= MAX_GENERATORS);
        Form { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Form {
        Form::scalar(n, Scalar::one())
    }

    pub fn scalar(n: usize, c: Scalar) -> Form {
        Form::term(n, Blade::EMPTY, c)
    }

    pub fn term(n: usize, blade: Blade, c: Scalar) -> Form {
        let mut f = Form::zero(n);
        f.add_term(blade, c);
        f
    }

    /// The generator `e_{i+1}` (0-based `i`).
    pub fn generator(n: usize, i: usize) -> Form {
        assert!(i < n, "generator {i} out of range for n = {n}");
        Form::term(n, Blade::single(i), Scalar::one())
    }

    /// Wedge of generators with the given 0-based indices, in the given order.
    pub fn monomial(n: usize, indices: &[usize]) -> Form {
        indices
            .iter()
            .fold(Form::one(n), |acc, &i| &acc ^ &Form::generator(n, i))
    }

    pub fn top(n: usize) -> Form {
        Form::term(n, Blade::full(n), Scalar::one())
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Blade, Scalar)>) -> Form {
        let mut f = Form::zero(n);
        for (b, c) in terms {
            assert!(b.0 >> n == 0 || n == 64, "blade outside {n} generators");
            f.add_term(b, c);
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Blade, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, b: Blade) -> Scalar {
        self.terms.get(&b).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Blade, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
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

    fn check_same(&self, other: &Form) -> Result<()> {
        if self.n != other.n {
            Err(Error::GeneratorMismatch { left: self.n, right: other.n })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Form {
        let mut out = Form::zero(self.n);
        for (b, x) in &self.terms {
            out.add_term(*b, x * c);
        }
        out
    }

    pub fn scale_gauss(&self, c: &GaussRat) -> Form {
        Form { n: self.n, terms: self.terms.iter().filter_map(|(b, x)| {
            let y = x.scale(c);
            (!y.is_zero()).then_some((*b, y))
        }).collect() }
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        let mut out = Form::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(s) = a.wedge_sign(*b) {
                    let c = ca * cb;
                    out.add_term(Blade(a.0 | b.0), if s > 0 { c } else { -c });
                }
            }
        }
        Ok(out)
    }

    /// Interior product with the dual vector `∂_{i+1}` (0-based `i`).
    pub fn contract(&self, i: usize) -> Result<Form> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i + 1, n: self.n });
        }
        let mut out = Form::zero(self.n);
        for (b, c) in &self.terms {
            if b.contains(i) {
                let rest = Blade(b.0 & !(1u64 << i));
                out.add_term(rest, if b.below(i) % 2 == 0 { c.clone() } else { -c });
            }
        }
        Ok(out)
    }

    /// Contraction with a constant vector field given by its components.
    pub fn contract_vector(&self, x: &[Scalar]) -> Result<Form> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let mut out = Form::zero(self.n);
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                out = &out + &self.contract(i)?.scale(xi);
            }
        }
        Ok(out)
    }

    /// The anti-automorphism reversing decomposables: degree `q` picks up `(-1)^{q(q-1)/2}`.
    pub fn reversal(&self) -> Form {
        Form {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| {
                    let q = b.grade();
                    let c = if (q * q.saturating_sub(1) / 2) % 2 == 0 { c.clone() } else { -c };
                    (*b, c)
                })
                .collect(),
        }
    }

    /// Complex conjugation of every coefficient.
    pub fn conj(&self) -> Form {
        Form { n: self.n, terms: self.terms.iter().map(|(b, c)| (*b, c.conj())).collect() }
    }

    /// Coefficient of `e_1 ∧ ... ∧ e_N`.
    pub fn top_coeff(&self) -> Scalar {
        self.coeff(Blade::full(self.n))
    }

    /// Top-degree coefficient of `σ(a) ∧ b`.
    pub fn mukai(&self, other: &Form) -> Result<Scalar> {
        Ok(self.reversal().wedge(other)?.top_coeff())
    }

    /// `σ(a) ∧ b` restricted to top degree, as a form.
    pub fn mukai_form(&self, other: &Form) -> Result<Form> {
        Ok(Form::term(self.n, Blade::full(self.n), self.mukai(other)?))
    }

    /// `e^B = Σ B^k / k!` for a pure degree-2 form.
    pub fn exp_two_form(&self) -> Result<Form> {
        self.require_degree(2)?;
        let mut out = Form::one(self.n);
        let mut power = Form::one(self.n);
        let mut k = 1i64;
        loop {
            power = power.wedge(self)?.scale_gauss(&GaussRat::from_ratio(1, k));
            if power.is_zero() {
                break;
            }
            out = &out + &power;
            k += 1;
        }
        Ok(out)
    }

    /// `(X + ξ)·a = ι_X a + ξ ∧ a`.
    pub fn clifford(&self, v: &WVec) -> Result<Form> {
        if v.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.dim() });
        }
        let xi = Form::from_terms(
            self.n,
            v.xi.iter().enumerate().map(|(i, c)| (Blade::single(i), c.clone())),
        );
        Ok(&self.contract_vector(&v.x)? + &xi.wedge(self)?)
    }

    /// `orientation * volume * top coefficient`.
    pub fn integrate(&self, volume: &Scalar, orientation: i32) -> Scalar {
        let s = volume * &self.top_coeff();
        if orientation < 0 {
            -s
        } else {
            s
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|b| b.grade()).collect();
        d.dedup();
        d
    }

    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.terms.keys().all(|b| b.grade() == k)
    }

    pub fn require_degree(&self, k: usize) -> Result<()> {
        if self.is_homogeneous(k) {
            Ok(())
        } else {
            Err(Error::NotPureDegree {
                expected: k,
                found: format!("{:?}", self.degrees()),
            })
        }
    }

    pub fn part_of_degree(&self, k: usize) -> Form {
        self.filter(|b| b.grade() == k)
    }

    pub fn even_part(&self) -> Form {
        self.filter(|b| b.grade() % 2 == 0)
    }

    pub fn odd_part(&self) -> Form {
        self.filter(|b| b.grade() % 2 == 1)
    }

    pub fn filter(&self, keep: impl Fn(Blade) -> bool) -> Form {
        Form {
            n: self.n,
            terms: self.terms.iter().filter(|(b, _)| keep(**b)).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Form {
        Form::from_terms(self.n, self.terms.iter().map(|(b, c)| (*b, f(c))))
    }

    pub fn is_parameter_free(&self) -> bool {
        self.terms.values().all(Scalar::is_constant)
    }

    /// Coefficients as Gaussian rationals, if no parameter or `pi` occurs.
    pub fn gauss_terms(&self) -> Result<Vec<(Blade, GaussRat)>> {
        self.terms
            .iter()
            .map(|(b, c)| c.as_gauss().map(|g| (*b, g)).ok_or(Error::ParametricInput))
            .collect()
    }

    /// Dense coordinates with respect to `basis`; blades outside the basis are an error.
    pub fn to_dense(&self, basis: &[Blade]) -> Result<Vec<GaussRat>> {
        let index: BTreeMap<Blade, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let mut v = vec![GaussRat::zero(); basis.len()];
        for (b, c) in self.gauss_terms()? {
            let i = *index.get(&b).ok_or_else(|| Error::Precondition {
                what: "form lies outside the requested basis".into(),
                residual: self.to_string(),
            })?;
            v[i] = c;
        }
        Ok(v)
    }

    pub fn from_dense(n: usize, basis: &[Blade], v: &[GaussRat]) -> Form {
        Form::from_terms(n, basis.iter().zip(v).map(|(b, c)| (*b, Scalar::from(c.clone()))))
    }

    /// Renders with the given generator names, `^` as the wedge.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (b, c) in &self.terms {
            let blade = b
                .indices()
                .iter()
                .map(|&i| names.get(i).cloned().unwrap_or_else(|| format!("e{}", i + 1)))
                .collect::<Vec<_>>()
                .join("^");
            let coeff = c.to_string();
            let multi = c.terms().count() > 1;
            let body = if blade.is_empty() {
                if multi { format!("({coeff})") } else { coeff }
            } else if multi {
                format!("({coeff})*{blade}")
            } else if coeff == "1" {
                blade
            } else if coeff == "-1" {
                format!("-{blade}")
            } else {
                format!("{coeff}*{blade}")
            };
            if out.is_empty() {
                out = body;
            } else if body.starts_with('-') {
                out.push_str(&body);
            } else {
                out.push('+');
                out.push_str(&body);
            }
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}

impl<'a> Add<&'a Form> for &'a Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.try_add(rhs).expect("adding forms over different generator counts")
    }
}

impl<'a> Sub<&'a Form> for &'a Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.try_add(&-rhs).expect("subtracting forms over different generator counts")
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form { n: self.n, terms: self.terms.iter().map(|(b, c)| (*b, -c)).collect() }
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

impl<'a> BitXor<&'a Form> for &'a Form {
    type Output = Form;
    fn bitxor(self, rhs: &Form) -> Form {
        self.wedge(rhs).expect("wedging forms over different generator counts")
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

/// An element `X + ξ` of `V ⊕ V*` (complexified), as coefficient vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WVec {
    pub x: Vec<Scalar>,
    pub xi: Vec<Scalar>,
}

impl WVec {
    pub fn zero(n: usize) -> WVec {
        WVec { x: vec![Scalar::zero(); n], xi: vec![Scalar::zero(); n] }
    }

    pub fn new(x: Vec<Scalar>, xi: Vec<Scalar>) -> WVec {
        assert_eq!(x.len(), xi.len(), "vector and covector parts differ in length");
        WVec { x, xi }
    }

    /// Splits a length-`2n` coefficient vector into vector and covector halves.
    pub fn from_coords(c: &[GaussRat]) -> WVec {
        let n = c.len() / 2;
        WVec {
            x: c[..n].iter().cloned().map(Scalar::from).collect(),
            xi: c[n..].iter().cloned().map(Scalar::from).collect(),
        }
    }

    /// `∂_{i+1}`.
    pub fn vector(n: usize, i: usize) -> WVec {
        let mut v = WVec::zero(n);
        v.x[i] = Scalar::one();
        v
    }

    /// `e_{i+1}` as a covector.
    pub fn covector(n: usize, i: usize) -> WVec {
        let mut v = WVec::zero(n);
        v.xi[i] = Scalar::one();
        v
    }

    /// Covector part read off a degree-1 form.
    pub fn from_one_form(f: &Form) -> WVec {
        let mut v = WVec::zero(f.n());
        for (b, c) in f.terms() {
            if b.grade() == 1 {
                v.xi[b.0.trailing_zeros() as usize] = c.clone();
            }
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn scale(&self, c: &Scalar) -> WVec {
        WVec { x: self.x.iter().map(|a| a * c).collect(), xi: self.xi.iter().map(|a| a * c).collect() }
    }

    pub fn add(&self, o: &WVec) -> WVec {
        WVec {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            xi: self.xi.iter().zip(&o.xi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn conj(&self) -> WVec {
        WVec { x: self.x.iter().map(Scalar::conj).collect(), xi: self.xi.iter().map(Scalar::conj).collect() }
    }

    /// `ξ(X)`, the quadratic form of the canonical pairing.
    pub fn self_pairing(&self) -> Scalar {
        self.x.iter().zip(&self.xi).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b))
    }

    /// `½(β(X) + α(Y))`.
    pub fn pairing(&self, o: &WVec) -> Scalar {
        let s = self
            .x
            .iter()
            .zip(&o.xi)
            .chain(o.x.iter().zip(&self.xi))
            .fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b));
        s.scale(&GaussRat::from_ratio(1, 2))
    }

    pub fn coords(&self) -> Vec<Scalar> {
        self.x.iter().chain(&self.xi).cloned().collect()
    }
}
