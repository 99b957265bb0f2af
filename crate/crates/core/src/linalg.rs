//! Exact dense linear algebra over the Gaussian rationals.
//!
//! Ranks go through fraction-free Bareiss elimination over the Gaussian
//! integers. Kernels, solves and span tests use reduced row echelon form over
//! `Q(i)`. Pivots are always the first nonzero entry in column order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::GaussRat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussRat>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![GaussRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GaussRat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussRat>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<GaussRat>]) -> Matrix {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_ints(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| GaussRat::from_int(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &GaussRat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: GaussRat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[GaussRat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<GaussRat> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "matrix product dimensions");
        let mut out = Matrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = o.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c) + &(a * b);
                        out.set(r, c, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(GaussRat::zero(), |acc, (a, b)| if a.is_zero() || b.is_zero() { acc } else { &acc + &(a * b) })
            })
            .collect()
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: &GaussRat) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&GaussRat::from_int(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(GaussRat::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(GaussRat::is_real)
    }

    pub fn conj(&self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(GaussRat::conj).collect() }
    }

    /// Stacks `self` on top of `o`.
    pub fn vstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix { rows: self.rows + o.rows, cols: self.cols, data }
    }

    /// Places `o` to the right of `self`.
    pub fn hstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + o.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            for c in 0..o.cols {
                m.set(r, self.cols + c, o.get(r, c).clone());
            }
        }
        m
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                m.set(i, j, self.get(r, c).clone());
            }
        }
        m
    }

    /// Rank by fraction-free elimination over `Z[i]`.
    pub fn rank(&self) -> usize {
        bareiss_rank(self)
    }

    /// Rank read off the reduced row echelon form; independent of [`Matrix::rank`].
    pub fn rank_rref(&self) -> usize {
        self.rref().1.len()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().unwrap();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let rv = m.get(r, j);
                    if rv.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) - &(&f * rv);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Basis of `{x : self * x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<GaussRat>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![GaussRat::zero(); self.cols];
                v[f] = GaussRat::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f);
                }
                v
            })
            .collect()
    }

    /// Some `x` with `self * x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[GaussRat]) -> Option<Vec<GaussRat>> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hstack(&Matrix::from_columns(self.rows, &[b.to_vec()]));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![GaussRat::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.get(i, self.cols).clone();
        }
        Some(x)
    }

    pub fn determinant(&self) -> GaussRat {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut det = GaussRat::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m.get(i, c).is_zero()) else { return GaussRat::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = &det * &piv;
            let inv = piv.inv().unwrap();
            for i in c + 1..m.rows {
                let f = m.get(i, c) * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        det
    }
}

/// Gaussian integer used inside Bareiss elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
struct GInt(BigInt, BigInt);

impl GInt {
    fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }
    fn mul(&self, o: &GInt) -> GInt {
        GInt(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }
    fn sub(&self, o: &GInt) -> GInt {
        GInt(&self.0 - &o.0, &self.1 - &o.1)
    }
    /// Exact quotient; panics if `o` does not divide `self`.
    fn div_exact(&self, o: &GInt) -> GInt {
        let n = &o.0 * &o.0 + &o.1 * &o.1;
        let re = &self.0 * &o.0 + &self.1 * &o.1;
        let im = &self.1 * &o.0 - &self.0 * &o.1;
        let (qr, rr) = re.div_rem(&n);
        let (qi, ri) = im.div_rem(&n);
        assert!(rr.is_zero() && ri.is_zero(), "inexact Bareiss division");
        GInt(qr, qi)
    }
}

fn bareiss_rank(m: &Matrix) -> usize {
    let mut a: Vec<Vec<GInt>> = (0..m.rows)
        .map(|r| {
            let row = m.row(r);
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.denom_lcm()));
            let lr = BigRational::from_integer(l);
            row.iter()
                .map(|x| {
                    let re = x.re() * &lr;
                    let im = x.im() * &lr;
                    GInt(re.to_integer(), im.to_integer())
                })
                .collect()
        })
        .collect();
    let mut prev = GInt(BigInt::one(), BigInt::zero());
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for i in r + 1..m.rows {
            let f = a[i][c].clone();
            for j in c + 1..m.cols {
                let v = piv.mul(&a[i][j]).sub(&f.mul(&a[r][j]));
                a[i][j] = v.div_exact(&prev);
            }
            a[i][c] = GInt(BigInt::zero(), BigInt::zero());
        }
        prev = piv;
        r += 1;
    }
    r
}

/// A linearly independent subset spanning the same space as `vectors`.
pub fn span_basis(dim: usize, vectors: &[Vec<GaussRat>]) -> Vec<Vec<GaussRat>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let (_, pivots) = Matrix::from_columns(dim, vectors).rref();
    pivots.into_iter().map(|p| vectors[p].clone()).collect()
}

pub fn span_dim(dim: usize, vectors: &[Vec<GaussRat>]) -> usize {
    if vectors.is_empty() {
        0
    } else {
        Matrix::from_columns(dim, vectors).rank()
    }
}

pub fn in_span(dim: usize, vectors: &[Vec<GaussRat>], v: &[GaussRat]) -> bool {
    if v.iter().all(GaussRat::is_zero) {
        return true;
    }
    if vectors.is_empty() {
        return false;
    }
    Matrix::from_columns(dim, vectors).solve(v).is_some()
}

/// Basis of the intersection of two spans.
pub fn intersection(dim: usize, a: &[Vec<GaussRat>], b: &[Vec<GaussRat>]) -> Vec<Vec<GaussRat>> {
    let a = span_basis(dim, a);
    let b = span_basis(dim, b);
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let ma = Matrix::from_columns(dim, &a);
    let mb = Matrix::from_columns(dim, &b);
    let kernel = ma.hstack(&mb.neg()).nullspace();
    let vs: Vec<Vec<GaussRat>> = kernel.iter().map(|k| ma.mul_vec(&k[..a.len()])).collect();
    span_basis(dim, &vs)
}

/// True when the two families span the same subspace.
pub fn same_span(dim: usize, a: &[Vec<GaussRat>], b: &[Vec<GaussRat>]) -> bool {
    let ra = span_dim(dim, a);
    let rb = span_dim(dim, b);
    let mut all = a.to_vec();
    all.extend(b.iter().cloned());
    ra == rb && span_dim(dim, &all) == ra
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::from_parts(re, im)
    }

    #[test]
    fn ranks_agree_on_small_matrices() {
        let m = Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.rank_rref(), 2);
        let c = Matrix::from_rows(vec![vec![g(1, 1), g(2, 0)], vec![g(-1, 1), g(0, 2)]]);
        assert_eq!(c.rank(), 1);
        assert_eq!(c.rank_rref(), 1);
        assert_eq!(Matrix::zeros(3, 2).rank(), 0);
    }

    #[test]
    fn rank_with_fractions_and_skipped_columns() {
        let half = GaussRat::from_ratio(1, 2);
        let m = Matrix::from_rows(vec![
            vec![GaussRat::zero(), half.clone(), GaussRat::from_int(1), GaussRat::zero()],
            vec![GaussRat::zero(), GaussRat::from_int(1), GaussRat::from_int(2), GaussRat::from_int(1)],
            vec![GaussRat::zero(), GaussRat::zero(), GaussRat::zero(), g(0, 3)],
        ]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.rank_rref(), 2);
    }

    #[test]
    fn nullspace_and_solve() {
        let m = Matrix::from_ints(&[&[1, 1, 0], &[0, 0, 1]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(GaussRat::is_zero));
        let x = m.solve(&[g(2, 0), g(0, 1)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![g(2, 0), g(0, 1)]);
        let sing = Matrix::from_ints(&[&[1, 1], &[1, 1]]);
        assert!(sing.solve(&[g(1, 0), g(0, 0)]).is_none());
    }

    #[test]
    fn determinant_and_spans() {
        let m = Matrix::from_ints(&[&[2, 1], &[1, 3]]);
        assert_eq!(m.determinant(), g(5, 0));
        let a = vec![vec![g(1, 0), g(0, 0)], vec![g(0, 0), g(1, 0)]];
        let b = vec![vec![g(1, 0), g(1, 0)]];
        assert_eq!(intersection(2, &a, &b).len(), 1);
        assert!(in_span(2, &a, &[g(3, 1), g(0, 2)]));
        assert!(same_span(2, &a, &[vec![g(1, 1), g(0, 0)], vec![g(1, 0), g(1, 0)]]));
    }
}
