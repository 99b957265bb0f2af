//! Brute-force reference implementations used as test oracles.
//!
//! Everything here works on dense coefficient vectors indexed by bitmask and
//! uses its own elimination; nothing is shared with the library's linear
//! algebra or exterior algebra.

#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use gcequiv::{Form, Scalar};
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C {
    pub re: BigRational,
    pub im: BigRational,
}

impl C {
    pub fn zero() -> C {
        C { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn int(re: i64, im: i64) -> C {
        C { re: BigRational::from_integer(re.into()), im: BigRational::from_integer(im.into()) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> C {
        C { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn inv(&self) -> C {
        let d = &self.re * &self.re + &self.im * &self.im;
        C { re: &self.re / &d, im: -(&self.im / &d) }
    }
}

impl Add for &C {
    type Output = C;
    fn add(self, o: &C) -> C {
        C { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &C {
    type Output = C;
    fn sub(self, o: &C) -> C {
        C { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &C {
    type Output = C;
    fn mul(self, o: &C) -> C {
        C { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &C {
    type Output = C;
    fn neg(self) -> C {
        C { re: -self.re.clone(), im: -self.im.clone() }
    }
}

pub type Dense = Vec<C>;

pub fn zero_form(n: usize) -> Dense {
    vec![C::zero(); 1 << n]
}

pub fn basis(n: usize, mask: usize) -> Dense {
    let mut v = zero_form(n);
    v[mask] = C::int(1, 0);
    v
}

/// Sign of moving the factors of `b` past those of `a` into sorted order.
pub fn wedge_sign(a: usize, b: usize) -> i64 {
    let mut swaps = 0;
    for i in 0..64 {
        if b >> i & 1 == 1 {
            swaps += (a >> (i + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn wedge(a: &Dense, b: &Dense) -> Dense {
    let mut out = vec![C::zero(); a.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() || i & j != 0 {
                continue;
            }
            let p = x * y;
            let p = if wedge_sign(i, j) < 0 { -&p } else { p };
            out[i | j] = &out[i | j] + &p;
        }
    }
    out
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &Dense, c: &C) -> Dense {
    a.iter().map(|x| x * c).collect()
}

pub fn grade_sign(mask: usize) -> i64 {
    if mask.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `d` from the images of the generators, by the Leibniz rule on each basis monomial.
pub fn d(n: usize, dtable: &[Dense], a: &Dense) -> Dense {
    let mut out = zero_form(n);
    for (mask, c) in a.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        for (pos, &i) in idx.iter().enumerate() {
            let before: usize = idx[..pos].iter().map(|j| 1 << j).sum();
            let after: usize = idx[pos + 1..].iter().map(|j| 1 << j).sum();
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            let term = wedge(&wedge(&basis(n, before), &dtable[i]), &basis(n, after));
            let coeff = if sign > 0 { c.clone() } else { -c };
            out = add(&out, &scale(&term, &coeff));
        }
    }
    out
}

pub fn d_twisted(n: usize, dtable: &[Dense], h: &Dense, a: &Dense) -> Dense {
    let hw = wedge(h, a);
    add(&d(n, dtable, a), &scale(&hw, &C::int(-1, 0)))
}

/// Interior product with the coordinate vector field `∂_i`.
pub fn contract(n: usize, i: usize, a: &Dense) -> Dense {
    let mut out = zero_form(n);
    for (mask, c) in a.iter().enumerate() {
        if c.is_zero() || mask >> i & 1 == 0 {
            continue;
        }
        let below = (mask & ((1 << i) - 1)).count_ones();
        let v = if below % 2 == 0 { c.clone() } else { -c };
        out[mask & !(1 << i)] = &out[mask & !(1 << i)] + &v;
    }
    out
}

/// Rank by plain Gauss-Jordan elimination over `Q(i)`.
pub fn rank(mut rows: Vec<Vec<C>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        let pivot: Vec<C> = rows[r].iter().map(|x| x * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        rows[r] = pivot;
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Matrix of a linear map given by images of selected source basis vectors,
/// restricted to selected target coordinates; returned as columns.
fn columns(images: &[Dense], rows: &[usize]) -> Vec<Vec<C>> {
    images.iter().map(|v| rows.iter().map(|&r| v[r].clone()).collect()).collect()
}

/// `(even, odd)` dimensions of `d_H` cohomology.
pub fn twisted_betti(n: usize, dtable: &[Dense], h: &Dense) -> (usize, usize) {
    let all: Vec<usize> = (0..1 << n).collect();
    let even: Vec<usize> = all.iter().copied().filter(|m| m.count_ones() % 2 == 0).collect();
    let odd: Vec<usize> = all.iter().copied().filter(|m| m.count_ones() % 2 == 1).collect();
    let img = |src: &[usize]| -> Vec<Dense> { src.iter().map(|&m| d_twisted(n, dtable, h, &basis(n, m))).collect() };
    let r_eo = rank(columns(&img(&even), &odd));
    let r_oe = rank(columns(&img(&odd), &even));
    (even.len() - r_eo - r_oe, odd.len() - r_oe - r_eo)
}

/// Ordinary Betti numbers by degree.
pub fn betti(n: usize, dtable: &[Dense]) -> Vec<usize> {
    let by_deg: Vec<Vec<usize>> = (0..=n).map(|k| (0..1usize << n).filter(|m| m.count_ones() as usize == k).collect()).collect();
    let r = |k: usize| -> usize {
        if k >= n {
            return 0;
        }
        let imgs: Vec<Dense> = by_deg[k].iter().map(|&m| d(n, dtable, &basis(n, m))).collect();
        rank(columns(&imgs, &by_deg[k + 1]))
    };
    (0..=n).map(|k| by_deg[k].len() - r(k) - if k > 0 { r(k - 1) } else { 0 }).collect()
}

/// Ranks of the truncated circle-equivariant complex with
/// `D(x^p a) = x^p (d a - H a) - x^{p+1} (ι_{xi} a + α a)` on
/// `F_T = {η : deg η ≤ T, deg Dη ≤ T}`; `xi` is a coordinate direction.
pub fn circle_equivariant_ranks(n: usize, dtable: &[Dense], h: &Dense, alpha: &Dense, xi: usize, trunc: usize) -> (usize, usize) {
    let size = 1usize << n;
    let apply = |p: usize, m: usize| -> Vec<C> {
        let a = basis(n, m);
        let lower = d_twisted(n, dtable, h, &a);
        let upper = add(&contract(n, xi, &a), &wedge(alpha, &a));
        let mut v = vec![C::zero(); (trunc + 2) * size];
        for (i, c) in lower.into_iter().enumerate() {
            v[p * size + i] = c;
        }
        for (i, c) in upper.into_iter().enumerate() {
            v[(p + 1) * size + i] = -&c;
        }
        v
    };
    let mut stats = [(0usize, 0usize); 2];
    for parity in 0..2 {
        let src: Vec<(usize, usize)> =
            (0..=trunc).flat_map(|p| (0..size).filter(move |m| m.count_ones() as usize % 2 == parity).map(move |m| (p, m))).collect();
        let dst_rows: Vec<usize> = (0..=trunc + 1)
            .flat_map(|p| (0..size).filter(move |m| m.count_ones() as usize % 2 != parity).map(move |m| p * size + m))
            .collect();
        let top_rows: Vec<usize> = dst_rows.iter().copied().filter(|r| r / size == trunc + 1).collect();
        let imgs: Vec<Vec<C>> = src.iter().map(|&(p, m)| apply(p, m)).collect();
        let full = rank(columns(&imgs, &dst_rows));
        let top = rank(columns(&imgs, &top_rows));
        let dim = src.len();
        stats[parity] = (dim - full, dim - top);
    }
    let ((ze, fe), (zo, fo)) = (stats[0], stats[1]);
    (ze - (fo - zo), zo - (fe - ze))
}

pub fn scalar_to_c(s: &Scalar) -> C {
    let g = s.as_gauss().expect("parameter-free coefficient");
    C { re: g.re().clone(), im: g.im().clone() }
}

pub fn from_form(f: &Form) -> Dense {
    let mut v = zero_form(f.n());
    for (b, c) in f.terms() {
        v[b.0 as usize] = scalar_to_c(c);
    }
    v
}

/// Dense generator images of a model.
pub fn dtable_of(m: &gcequiv::model::Model) -> Vec<Dense> {
    m.d_table().iter().map(from_form).collect()
}

/// Dense `Σ_k B^k / k!`.
pub fn exp2(b: &Dense) -> Dense {
    let n = b.len().trailing_zeros() as usize;
    let mut out = basis(n, 0);
    let mut power = basis(n, 0);
    let mut k = 1i64;
    loop {
        power = scale(&wedge(&power, b), &C { re: BigRational::new(1.into(), k.into()), im: BigRational::zero() });
        if power.iter().all(C::is_zero) {
            return out;
        }
        out = add(&out, &power);
        k += 1;
    }
}

/// Top coefficient of `σ(a) ∧ b`, with `σ` the sign `(-1)^{q(q-1)/2}` on degree `q`.
pub fn mukai(a: &Dense, b: &Dense) -> C {
    let rev: Dense = a
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let q = m.count_ones() as usize;
            if (q * q.saturating_sub(1) / 2) % 2 == 0 {
                c.clone()
            } else {
                -c
            }
        })
        .collect();
    wedge(&rev, b).last().unwrap().clone()
}

pub fn one() -> BigRational {
    BigRational::one()
}

pub mod gen {
    use gcequiv::form::all_blades;
    use gcequiv::{Blade, Form, GaussRat, Scalar, WVec};
    use rand::seq::IndexedRandom;
    use rand::Rng;

    pub fn gauss<R: Rng>(rng: &mut R, complex: bool) -> GaussRat {
        let re = rng.random_range(-3..=3);
        let im = if complex { rng.random_range(-3..=3) } else { 0 };
        GaussRat::from_parts(re, im)
    }

    /// Sparse form with at most `terms` random blades.
    pub fn form<R: Rng>(rng: &mut R, n: usize, terms: usize, complex: bool) -> Form {
        let blades = all_blades(n);
        let mut f = Form::zero(n);
        for _ in 0..rng.random_range(1..=terms) {
            let b = *blades.choose(rng).unwrap();
            f.add_term(b, Scalar::from(gauss(rng, complex)));
        }
        f
    }

    /// Random form of a fixed degree.
    pub fn homogeneous<R: Rng>(rng: &mut R, n: usize, k: usize, terms: usize, complex: bool) -> Form {
        let blades: Vec<Blade> = all_blades(n).into_iter().filter(|b| b.grade() == k).collect();
        let mut f = Form::zero(n);
        if blades.is_empty() {
            return f;
        }
        for _ in 0..rng.random_range(1..=terms) {
            let b = *blades.choose(rng).unwrap();
            f.add_term(b, Scalar::from(gauss(rng, complex)));
        }
        f
    }

    pub fn wvec<R: Rng>(rng: &mut R, n: usize, complex: bool) -> WVec {
        let c: Vec<GaussRat> = (0..2 * n).map(|_| gauss(rng, complex)).collect();
        WVec::from_coords(&c)
    }

    /// 1-based monomial `e_{i1} ∧ ... ∧ e_{ik}`.
    pub fn e(n: usize, idx: &[usize]) -> Form {
        Form::monomial(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }
}
