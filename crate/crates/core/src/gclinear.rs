//! Constant generalized complex structures on `V = R^N`.
//!
//! A [`GCMap`] is a real `2N x 2N` matrix acting on coordinates ordered as
//! `(∂_1..∂_N, e_1..e_N)`; column `j` is the image of the `j`-th basis vector.
//! Spinors are forms in `∧V*` acted on by `(X + ξ)·φ = ι_X φ + ξ ∧ φ`.

use crate::error::{Error, Result};
use crate::form::{all_blades, Blade, Form, WVec};
use crate::linalg::{self, Matrix};
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GCMap {
    n: usize,
    matrix: Matrix,
}

/// Matrix of the canonical pairing `½(β(X) + α(Y))`.
pub fn pairing_matrix(n: usize) -> Matrix {
    let half = GaussRat::from_ratio(1, 2);
    let mut g = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        g.set(i, n + i, half.clone());
        g.set(n + i, i, half.clone());
    }
    g
}

/// `⟨u, v⟩` on coordinate vectors of length `2N`.
pub fn pairing(u: &[GaussRat], v: &[GaussRat]) -> GaussRat {
    let n = u.len() / 2;
    let s = (0..n).fold(GaussRat::zero(), |acc, i| &(&acc + &(&u[i] * &v[n + i])) + &(&u[n + i] * &v[i]));
    &s * &GaussRat::from_ratio(1, 2)
}

/// Matrix of `X ↦ ι_X ω` for a 2-form; column `i` holds the coefficients of `ι_i ω`.
pub fn two_form_matrix(omega: &Form) -> Result<Matrix> {
    omega.require_degree(2)?;
    let n = omega.n();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for (b, c) in omega.contract(i)?.gauss_terms()? {
            m.set(b.0.trailing_zeros() as usize, i, c);
        }
    }
    Ok(m)
}

impl GCMap {
    /// Wraps a real rational `2N x 2N` matrix; structural identities are left to [`GCMap::validate`].
    pub fn new(matrix: Matrix) -> Result<GCMap> {
        if matrix.rows() != matrix.cols() || matrix.rows() % 2 != 0 {
            return Err(Error::InvalidStructure(format!(
                "matrix must be square of even size, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_real() {
            return Err(Error::InvalidStructure("matrix entries must be real".into()));
        }
        Ok(GCMap { n: matrix.rows() / 2, matrix })
    }

    /// `J_ω = [[0, -ω⁻¹], [ω, 0]]` for a nondegenerate real 2-form.
    pub fn symplectic(omega: &Form) -> Result<GCMap> {
        let n = omega.n();
        let w = two_form_matrix(omega)?;
        if !w.is_real() {
            return Err(Error::InvalidStructure("symplectic form must be real".into()));
        }
        let mut inv_cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut unit = vec![GaussRat::zero(); n];
            unit[j] = GaussRat::one();
            inv_cols.push(w.solve(&unit).ok_or_else(|| Error::Degenerate(format!("2-form {omega} is degenerate")))?);
        }
        let winv = Matrix::from_columns(n, &inv_cols);
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                j.set(r, n + c, -winv.get(r, c));
                j.set(n + r, c, w.get(r, c).clone());
            }
        }
        GCMap::new(j)
    }

    /// `J = [[-I, 0], [0, Iᵀ]]` for a complex structure `I` on `V`, so that
    /// `L = T^{0,1} ⊕ (T^{1,0})*` and the pure spinor is `dz_1 ∧ ... ∧ dz_m`.
    pub fn complex(i_mat: &Matrix) -> Result<GCMap> {
        let n = i_mat.rows();
        if i_mat.cols() != n {
            return Err(Error::InvalidStructure("complex structure must be square".into()));
        }
        if !i_mat.mul(i_mat).add(&Matrix::identity(n)).is_zero() {
            return Err(Error::InvalidStructure("I^2 != -1".into()));
        }
        let t = i_mat.transpose();
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                j.set(r, c, -i_mat.get(r, c));
                j.set(n + r, n + c, t.get(r, c).clone());
            }
        }
        GCMap::new(j)
    }

    /// Standard complex structure with `I ∂_{2j-1} = ∂_{2j}`, i.e. `z_j = x_j + i y_j`.
    pub fn standard_complex(n: usize) -> Result<GCMap> {
        if n % 2 != 0 {
            return Err(Error::InvalidStructure(format!("odd dimension {n} carries no complex structure")));
        }
        let mut i_mat = Matrix::zeros(n, n);
        for j in 0..n / 2 {
            i_mat.set(2 * j + 1, 2 * j, GaussRat::one());
            i_mat.set(2 * j, 2 * j + 1, GaussRat::from_int(-1));
        }
        GCMap::complex(&i_mat)
    }

    /// `J_1 ⊕ J_2` on `V_1 ⊕ V_2`.
    pub fn direct_sum(a: &GCMap, b: &GCMap) -> Result<GCMap> {
        let (p, q) = (a.n, b.n);
        let n = p + q;
        // position of a's coordinate r inside the sum
        let pa = |r: usize| if r < p { r } else { n + (r - p) };
        let pb = |r: usize| if r < q { p + r } else { n + p + (r - q) };
        let mut m = Matrix::zeros(2 * n, 2 * n);
        for r in 0..2 * p {
            for c in 0..2 * p {
                m.set(pa(r), pa(c), a.matrix.get(r, c).clone());
            }
        }
        for r in 0..2 * q {
            for c in 0..2 * q {
                m.set(pb(r), pb(c), b.matrix.get(r, c).clone());
            }
        }
        GCMap::new(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        self.matrix.mul_vec(v)
    }

    /// Checks `J² = -1` and `Jᵀ G J = G`; the error names every failed identity.
    pub fn validate(&self) -> Result<()> {
        let n2 = 2 * self.n;
        let mut failures = Vec::new();
        if !self.matrix.mul(&self.matrix).add(&Matrix::identity(n2)).is_zero() {
            failures.push("J^2 != -1");
        }
        let g = pairing_matrix(self.n);
        if self.matrix.transpose().mul(&g).mul(&self.matrix) != g {
            failures.push("J does not preserve the canonical pairing");
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidStructure(failures.join("; ")))
        }
    }

    /// Kernel of `J - i`.
    pub fn i_eigenspace(&self) -> Result<IsotropicSubspace> {
        let shifted = self.matrix.add(&Matrix::identity(2 * self.n).scale(&GaussRat::i()).neg());
        let basis = shifted.nullspace();
        if basis.len() != self.n {
            return Err(Error::EigenspaceDimension { expected: self.n, found: basis.len() });
        }
        Ok(IsotropicSubspace { n: self.n, basis })
    }

    /// The structure with `+i` eigenspace `L` and `-i` eigenspace `conj(L)`.
    pub fn from_eigenspace(l: &IsotropicSubspace) -> Result<GCMap> {
        if !l.is_maximal_isotropic() || !l.is_transverse() {
            return Err(Error::InvalidStructure("eigenspace must be maximal isotropic and transverse to its conjugate".into()));
        }
        let n2 = 2 * l.n;
        let bar = l.conj();
        let mut cols = l.basis.clone();
        cols.extend(bar.basis.iter().cloned());
        let p = Matrix::from_columns(n2, &cols);
        let mut images = Vec::with_capacity(n2);
        for j in 0..n2 {
            let unit: Vec<GaussRat> = (0..n2).map(|r| if r == j { GaussRat::one() } else { GaussRat::zero() }).collect();
            let c = p.solve(&unit).ok_or_else(|| Error::InvalidStructure("eigenvectors do not span".into()))?;
            let scaled: Vec<GaussRat> =
                c.iter().enumerate().map(|(r, x)| if r < l.n { x.mul_i() } else { -&x.mul_i() }).collect();
            images.push(p.mul_vec(&scaled));
        }
        let j = GCMap::new(Matrix::from_columns(n2, &images))?;
        j.validate()?;
        Ok(j)
    }

    /// Codimension of the projection of `L` to `V_C`.
    pub fn type_of(&self) -> Result<usize> {
        self.validate()?;
        let l = self.i_eigenspace()?;
        Ok(self.n - l.projection_rank())
    }

    pub fn pure_spinor(&self) -> Result<Form> {
        self.validate()?;
        self.i_eigenspace()?.pure_spinor()
    }

    /// `e^B J e^{-B}` with `e^B(X + ξ) = X + ξ + ι_X B`.
    pub fn b_transform(&self, b: &Form) -> Result<GCMap> {
        if b.n() != self.n {
            return Err(Error::GeneratorMismatch { left: self.n, right: b.n() });
        }
        let bm = two_form_matrix(b)?;
        let shear = |sign: i64| {
            let mut e = Matrix::identity(2 * self.n);
            for r in 0..self.n {
                for c in 0..self.n {
                    e.set(self.n + r, c, bm.get(r, c) * &GaussRat::from_int(sign));
                }
            }
            e
        };
        GCMap::new(shear(1).mul(&self.matrix).mul(&shear(-1)))
    }

    /// Eigenspace decomposition of `∧V*_C` under the Clifford lift of `J`,
    /// labelled so that `U^k` has eigenvalue `-k i` and `U^{N/2}` is the
    /// pure-spinor line.
    pub fn uk_grading(&self) -> Result<Vec<(i32, Vec<Form>)>> {
        self.validate()?;
        let n = self.n;
        if n % 2 != 0 {
            return Err(Error::InvalidStructure(format!("odd dimension {n}")));
        }
        let half = (n / 2) as i32;
        let blades = all_blades(n);
        let size = blades.len();
        let lift = self.clifford_lift(&blades)?;
        let rho = self.pure_spinor()?;
        let rv = rho.to_dense(&blades)?;
        let image = lift.mul_vec(&rv);
        let pivot = rv.iter().position(|c| !c.is_zero()).expect("pure spinor is nonzero");
        let lambda = &image[pivot] * &rv[pivot].inv().unwrap();
        if image.iter().zip(&rv).any(|(a, b)| *a != &lambda * b) {
            return Err(Error::LiftSpectrum("pure spinor is not an eigenvector of the lift".into()));
        }
        // shift so that the canonical line sits at eigenvalue -half*i
        let target = &GaussRat::from_parts(0, -(half as i64)) - &lambda;
        let shifted = lift.add(&Matrix::identity(size).scale(&target));
        let mut out = Vec::new();
        let mut total = 0;
        for k in -half..=half {
            let m = shifted.add(&Matrix::identity(size).scale(&GaussRat::from_parts(0, k as i64)));
            let basis: Vec<Form> =
                m.nullspace().iter().map(|v| normalize_spinor(&Form::from_dense(n, &blades, v))).collect();
            total += basis.len();
            out.push((k, basis));
        }
        if total != size {
            return Err(Error::LiftSpectrum(format!("eigenspaces cover {total} of {size} dimensions")));
        }
        Ok(out)
    }

    /// `-½ Σ_i [γ(J∂_i)γ(e_i) + γ(J e_i)γ(∂_i)]` as a dense matrix, which satisfies `[Ĵ, γ(w)] = -γ(Jw)`.
    fn clifford_lift(&self, blades: &[Blade]) -> Result<Matrix> {
        let n = self.n;
        let size = blades.len();
        let mut acc = Matrix::zeros(size, size);
        for i in 0..n {
            let d_i = unit(2 * n, i);
            let e_i = unit(2 * n, n + i);
            let jd = self.apply(&d_i);
            let je = self.apply(&e_i);
            let a = clifford_matrix(n, &jd, blades)?.mul(&clifford_matrix(n, &e_i, blades)?);
            let b = clifford_matrix(n, &je, blades)?.mul(&clifford_matrix(n, &d_i, blades)?);
            acc = acc.add(&a).add(&b);
        }
        Ok(acc.scale(&GaussRat::from_ratio(-1, 2)))
    }

    /// Checks `J_1 J_2 = J_2 J_1` and positivity of `⟨-J_1 J_2 u, v⟩` by leading principal minors.
    pub fn kahler_check(&self, other: &GCMap) -> Result<()> {
        self.validate()?;
        other.validate()?;
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let ab = self.matrix.mul(&other.matrix);
        if ab != other.matrix.mul(&self.matrix) {
            return Err(Error::InvalidStructure("J1 and J2 do not commute".into()));
        }
        let form = ab.neg().transpose().mul(&pairing_matrix(self.n));
        for k in 1..=2 * self.n {
            let minor = form.submatrix(0..k, 0..k).determinant();
            if !minor.is_real() || *minor.re() <= num_rational::BigRational::from_integer(0.into()) {
                return Err(Error::InvalidStructure(format!(
                    "<-J1 J2 ., .> is not positive definite: leading minor {k} = {minor}"
                )));
            }
        }
        Ok(())
    }
}

fn unit(len: usize, i: usize) -> Vec<GaussRat> {
    let mut v = vec![GaussRat::zero(); len];
    v[i] = GaussRat::one();
    v
}

/// Dense matrix of `φ ↦ v·φ` on the given blade basis.
pub fn clifford_matrix(n: usize, v: &[GaussRat], blades: &[Blade]) -> Result<Matrix> {
    if v.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: v.len() });
    }
    let w = WVec::from_coords(v);
    let cols: Vec<Vec<GaussRat>> = blades
        .iter()
        .map(|b| Form::term(n, *b, Scalar::one()).clifford(&w)?.to_dense(blades))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_columns(blades.len(), &cols))
}

/// A subspace of `(V ⊕ V*)_C` given by a basis of coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicSubspace {
    n: usize,
    basis: Vec<Vec<GaussRat>>,
}

impl IsotropicSubspace {
    pub fn new(n: usize, basis: Vec<Vec<GaussRat>>) -> Result<IsotropicSubspace> {
        for v in &basis {
            if v.len() != 2 * n {
                return Err(Error::DimensionMismatch { expected: 2 * n, found: v.len() });
            }
        }
        Ok(IsotropicSubspace { n, basis })
    }

    pub fn basis(&self) -> &[Vec<GaussRat>] {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<WVec> {
        self.basis.iter().map(|v| WVec::from_coords(v)).collect()
    }

    pub fn dim(&self) -> usize {
        linalg::span_dim(2 * self.n, &self.basis)
    }

    pub fn is_isotropic(&self) -> bool {
        self.basis.iter().all(|u| self.basis.iter().all(|v| pairing(u, v).is_zero()))
    }

    pub fn conj(&self) -> IsotropicSubspace {
        IsotropicSubspace { n: self.n, basis: self.basis.iter().map(|v| v.iter().map(GaussRat::conj).collect()).collect() }
    }

    /// `L ∩ conj(L) = 0`.
    pub fn is_transverse(&self) -> bool {
        linalg::intersection(2 * self.n, &self.basis, &self.conj().basis).is_empty()
    }

    pub fn is_maximal_isotropic(&self) -> bool {
        self.dim() == self.n && self.is_isotropic()
    }

    /// Rank of the projection to `V_C`.
    pub fn projection_rank(&self) -> usize {
        let proj: Vec<Vec<GaussRat>> = self.basis.iter().map(|v| v[..self.n].to_vec()).collect();
        linalg::span_dim(self.n, &proj)
    }

    /// Span equality.
    pub fn same_as(&self, other: &IsotropicSubspace) -> bool {
        self.n == other.n && linalg::same_span(2 * self.n, &self.basis, &other.basis)
    }

    /// Applies `e^B`: `X + ξ ↦ X + ξ + ι_X B`.
    pub fn b_transform(&self, b: &Form) -> Result<IsotropicSubspace> {
        let bm = two_form_matrix(b)?;
        let n = self.n;
        let basis = self
            .basis
            .iter()
            .map(|v| {
                let shift = bm.mul_vec(&v[..n]);
                let mut w = v.clone();
                for i in 0..n {
                    w[n + i] = &w[n + i] + &shift[i];
                }
                w
            })
            .collect();
        Ok(IsotropicSubspace { n, basis })
    }

    /// The annihilator line, normalized so the first nonzero coefficient in term order is 1.
    pub fn pure_spinor(&self) -> Result<Form> {
        let n = self.n;
        let blades = all_blades(n);
        let mut stacked: Option<Matrix> = None;
        for v in &self.basis {
            let m = clifford_matrix(n, v, &blades)?;
            stacked = Some(match stacked {
                None => m,
                Some(s) => s.vstack(&m),
            });
        }
        let kernel = match stacked {
            Some(m) => m.nullspace(),
            None => return Err(Error::SpinorLine(blades.len())),
        };
        if kernel.len() != 1 {
            return Err(Error::SpinorLine(kernel.len()));
        }
        Ok(normalize_spinor(&Form::from_dense(n, &blades, &kernel[0])))
    }
}

/// Scales a form so its first nonzero coefficient (term order) is 1.
pub fn normalize_spinor(f: &Form) -> Form {
    match f.terms().next() {
        Some((_, c)) => match c.as_gauss().and_then(|g| g.inv()) {
            Some(inv) => f.scale_gauss(&inv),
            None => f.clone(),
        },
        None => f.clone(),
    }
}

/// Annihilator of a spinor with its structural flags.
#[derive(Clone, Debug)]
pub struct Annihilator {
    pub space: IsotropicSubspace,
    pub maximal_isotropic: bool,
    pub nondegenerate: bool,
    pub transverse: bool,
}

/// `L_φ = {X + ξ : (X + ξ)·φ = 0}`.
pub fn annihilator(phi: &Form) -> Result<Annihilator> {
    if phi.is_zero() {
        return Err(Error::Precondition { what: "annihilator of the zero form".into(), residual: "0".into() });
    }
    let n = phi.n();
    let blades = all_blades(n);
    let mut cols = Vec::with_capacity(2 * n);
    for j in 0..2 * n {
        let w = WVec::from_coords(&unit(2 * n, j));
        cols.push(phi.clifford(&w)?.to_dense(&blades)?);
    }
    let basis = Matrix::from_columns(blades.len(), &cols).nullspace();
    let space = IsotropicSubspace { n, basis };
    let nondegenerate = !phi.mukai(&phi.conj())?.is_zero();
    Ok(Annihilator {
        maximal_isotropic: space.is_maximal_isotropic(),
        transverse: space.is_transverse(),
        nondegenerate,
        space,
    })
}
