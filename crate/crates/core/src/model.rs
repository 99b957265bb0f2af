//! Finite invariant models `(∧(e_1..e_N), d, H)` of manifolds with a closed
//! twisting 3-form.

use std::fmt;

use crate::error::{Error, Result};
use crate::form::{all_blades, Blade, Form, WVec};
use crate::gclinear::{normalize_spinor, GCMap};
use crate::linalg::{self, Matrix};
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    name: String,
    names: Vec<String>,
    d_table: Vec<Form>,
    h: Form,
    volume: Scalar,
    orientation: i32,
}

/// Ranks of the even and odd parts of a `Z_2`-graded cohomology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BettiPair {
    pub even: usize,
    pub odd: usize,
}

impl BettiPair {
    /// Coefficient field of every rank computation.
    pub const FIELD: &'static str = "Q(i)";
}

impl fmt::Display for BettiPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.even, self.odd)
    }
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

impl Model {
    /// Validates `d` as a degree-one derivation with `d² = 0` on generators and `dH = 0`.
    pub fn new(name: &str, names: Vec<String>, d_table: Vec<Form>, h: Form) -> Result<Model> {
        let n = names.len();
        if d_table.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d_table.len() });
        }
        for f in d_table.iter().chain(std::iter::once(&h)) {
            if f.n() != n {
                return Err(Error::GeneratorMismatch { left: n, right: f.n() });
            }
            if !f.is_parameter_free() {
                return Err(Error::ParametricInput);
            }
        }
        for (i, f) in d_table.iter().enumerate() {
            f.require_degree(2).map_err(|_| Error::NotPureDegree {
                expected: 2,
                found: format!("d{} = {}", names[i], f.display_with(&names)),
            })?;
        }
        h.require_degree(3)?;
        let m = Model { name: name.to_string(), names, d_table, h, volume: Scalar::one(), orientation: 1 };
        for i in 0..n {
            let dd = m.d(&m.d_table[i]);
            if !dd.is_zero() {
                return Err(Error::DifferentialNotNilpotent {
                    generator: m.names[i].clone(),
                    residual: m.show(&dd),
                });
            }
        }
        let dh = m.d(&m.h);
        if !dh.is_zero() {
            return Err(Error::NotClosed { what: "H".into(), residual: m.show(&dh) });
        }
        Ok(m)
    }

    pub fn torus(n: usize) -> Model {
        Model::new(&format!("T{n}"), default_names(n), vec![Form::zero(n); n], Form::zero(n)).unwrap()
    }

    /// Heisenberg nilmanifold: `de3 = e1^e2`.
    pub fn heisenberg() -> Model {
        let mut d = vec![Form::zero(3); 3];
        d[2] = Form::monomial(3, &[0, 1]);
        Model::new("heisenberg", default_names(3), d, Form::zero(3)).unwrap()
    }

    /// Kodaira-Thurston manifold, Heisenberg times a circle: `de3 = e1^e2`.
    pub fn kodaira_thurston() -> Model {
        let mut d = vec![Form::zero(4); 4];
        d[2] = Form::monomial(4, &[0, 1]);
        Model::new("kodaira-thurston", default_names(4), d, Form::zero(4)).unwrap()
    }

    pub fn with_h(&self, h: Form) -> Result<Model> {
        Model::new(&self.name, self.names.clone(), self.d_table.clone(), h)
            .map(|m| Model { volume: self.volume.clone(), orientation: self.orientation, ..m })
    }

    pub fn with_volume(mut self, volume: Scalar) -> Model {
        self.volume = volume;
        self
    }

    pub fn with_orientation(mut self, orientation: i32) -> Model {
        self.orientation = if orientation < 0 { -1 } else { 1 };
        self
    }

    pub fn with_name(mut self, name: &str) -> Model {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn d_table(&self) -> &[Form] {
        &self.d_table
    }

    pub fn h(&self) -> &Form {
        &self.h
    }

    pub fn volume(&self) -> &Scalar {
        &self.volume
    }

    pub fn orientation(&self) -> i32 {
        self.orientation
    }

    pub fn generator(&self, i: usize) -> Form {
        Form::generator(self.n(), i)
    }

    /// Renders a form with this model's generator names.
    pub fn show(&self, f: &Form) -> String {
        f.display_with(&self.names)
    }

    fn check(&self, a: &Form) -> Result<()> {
        if a.n() != self.n() {
            Err(Error::GeneratorMismatch { left: self.n(), right: a.n() })
        } else {
            Ok(())
        }
    }

    fn d_blade(&self, b: Blade) -> Form {
        let n = self.n();
        let idx = b.indices();
        let mut out = Form::zero(n);
        for (pos, &i) in idx.iter().enumerate() {
            if self.d_table[i].is_zero() {
                continue;
            }
            let before = Form::term(n, Blade::from_indices(&idx[..pos]), Scalar::one());
            let after = Form::term(n, Blade::from_indices(&idx[pos + 1..]), Scalar::one());
            let piece = &(&before ^ &self.d_table[i]) ^ &after;
            out = if pos % 2 == 0 { &out + &piece } else { &out - &piece };
        }
        out
    }

    /// The structure differential extended as a graded derivation.
    pub fn d(&self, a: &Form) -> Form {
        self.check(a).expect("form over the wrong generator count");
        let mut out = Form::zero(self.n());
        for (b, c) in a.terms() {
            let db = self.d_blade(*b);
            if !db.is_zero() {
                out = &out + &db.scale(c);
            }
        }
        out
    }

    pub fn try_d(&self, a: &Form) -> Result<Form> {
        self.check(a)?;
        Ok(self.d(a))
    }

    /// `d_H a = da - H ∧ a`.
    pub fn d_twisted(&self, a: &Form) -> Form {
        &self.d(a) - &(&self.h ^ a)
    }

    pub fn try_d_twisted(&self, a: &Form) -> Result<Form> {
        self.check(a)?;
        Ok(self.d_twisted(a))
    }

    /// Dense matrix of `d_H` from the span of `src` to the span of `dst`.
    pub fn dh_matrix(&self, src: &[Blade], dst: &[Blade]) -> Matrix {
        let n = self.n();
        let cols: Vec<Vec<GaussRat>> = src
            .iter()
            .map(|b| {
                self.d_twisted(&Form::term(n, *b, Scalar::one()))
                    .to_dense(dst)
                    .expect("d_H stays within the target basis")
            })
            .collect();
        Matrix::from_columns(dst.len(), &cols)
    }

    /// Checks `d² = 0` and `d_H² = 0` on every basis blade.
    pub fn verify_nilpotent(&self) -> Result<()> {
        for b in all_blades(self.n()) {
            let f = Form::term(self.n(), b, Scalar::one());
            let dd = self.d(&self.d(&f));
            if !dd.is_zero() {
                return Err(Error::DifferentialNotNilpotent { generator: self.show(&f), residual: self.show(&dd) });
            }
            let hh = self.d_twisted(&self.d_twisted(&f));
            if !hh.is_zero() {
                return Err(Error::DifferentialNotNilpotent { generator: self.show(&f), residual: self.show(&hh) });
            }
        }
        Ok(())
    }

    /// Ranks of `ker d_H / im d_H` on the even and odd parts.
    pub fn twisted_cohomology(&self) -> BettiPair {
        let blades = all_blades(self.n());
        let even: Vec<Blade> = blades.iter().copied().filter(|b| b.grade() % 2 == 0).collect();
        let odd: Vec<Blade> = blades.iter().copied().filter(|b| b.grade() % 2 == 1).collect();
        let r_eo = self.dh_matrix(&even, &odd).rank();
        let r_oe = self.dh_matrix(&odd, &even).rank();
        BettiPair { even: even.len() - r_eo - r_oe, odd: odd.len() - r_oe - r_eo }
    }

    /// Degree-wise Betti numbers of `d`; the twisting form is ignored.
    pub fn betti_numbers(&self) -> Vec<usize> {
        let n = self.n();
        let untwisted = Model { h: Form::zero(n), ..self.clone() };
        let by_deg: Vec<Vec<Blade>> =
            (0..=n).map(|k| all_blades(n).into_iter().filter(|b| b.grade() == k).collect()).collect();
        let rank = |k: usize| -> usize {
            if k >= n {
                0
            } else {
                untwisted.dh_matrix(&by_deg[k], &by_deg[k + 1]).rank()
            }
        };
        (0..=n).map(|k| by_deg[k].len() - rank(k) - if k == 0 { 0 } else { rank(k - 1) }).collect()
    }

    /// `e^λ ∧ a`, which carries `d_H`-closed forms to `d_{H+dλ}`-closed ones.
    pub fn exp_lambda_transport(&self, lambda: &Form, a: &Form) -> Result<Form> {
        self.check(lambda)?;
        self.check(a)?;
        Ok(&lambda.exp_two_form()? ^ a)
    }

    /// `a ∧ b` for `da = 0` and `d_H b = 0`; the product is `d_H`-closed.
    pub fn module_wedge(&self, a: &Form, b: &Form) -> Result<Form> {
        self.check(a)?;
        self.check(b)?;
        let da = self.d(a);
        if !da.is_zero() {
            return Err(Error::Precondition { what: "first factor is not d-closed".into(), residual: self.show(&da) });
        }
        let db = self.d_twisted(b);
        if !db.is_zero() {
            return Err(Error::Precondition { what: "second factor is not d_H-closed".into(), residual: self.show(&db) });
        }
        let p = a ^ b;
        let r = self.d_twisted(&p);
        if !r.is_zero() {
            return Err(Error::NotClosed { what: "product".into(), residual: self.show(&r) });
        }
        Ok(p)
    }

    /// `σ(a)` for a `d_H`-closed `a`, verified `d_{-H}`-closed.
    pub fn sigma_twist(&self, a: &Form) -> Result<Form> {
        self.check(a)?;
        let r = self.d_twisted(a);
        if !r.is_zero() {
            return Err(Error::Precondition { what: "form is not d_H-closed".into(), residual: self.show(&r) });
        }
        let s = a.reversal();
        let r = &self.d(&s) + &(&self.h ^ &s);
        if !r.is_zero() {
            return Err(Error::NotClosed { what: "sigma(a) for d_{-H}".into(), residual: self.show(&r) });
        }
        Ok(s)
    }

    /// Given `(X + γ)·a = 0`, returns whether `(X - γ)·σ(a) = 0`.
    pub fn sigma_annihilator_check(&self, v: &WVec, a: &Form) -> Result<bool> {
        self.check(a)?;
        let r = a.clifford(v)?;
        if !r.is_zero() {
            return Err(Error::Precondition { what: "vector does not annihilate the form".into(), residual: self.show(&r) });
        }
        let flipped = WVec::new(v.x.clone(), v.xi.iter().map(|c| -c).collect());
        Ok(a.reversal().clifford(&flipped)?.is_zero())
    }

    /// `∂` and `∂̄` of `J` on this model.
    pub fn del_delbar(&self, j: &GCMap) -> Result<DelDelbar> {
        DelDelbar::new(self, j)
    }

    /// `(∂a, ∂̄a)`.
    pub fn del_delbar_split(&self, j: &GCMap, a: &Form) -> Result<(Form, Form)> {
        self.check(a)?;
        let dd = self.del_delbar(j)?;
        Ok((dd.apply_del(a)?, dd.apply_delbar(a)?))
    }

    pub fn ddbar_lemma_check(&self, j: &GCMap) -> Result<DdbarReport> {
        Ok(self.del_delbar(j)?.ddbar_report())
    }

    /// Cohomology of `d_H` on the subcomplex of `∂̄`-closed forms.
    pub fn dbar_closed_cohomology(&self, j: &GCMap) -> Result<BettiPair> {
        let dd = self.del_delbar(j)?;
        let blades = &dd.blades;
        let parity_kernel = |parity: usize| -> Vec<Vec<GaussRat>> {
            let sel: Vec<usize> = (0..blades.len()).filter(|&i| blades[i].grade() % 2 == parity).collect();
            let cols: Vec<Vec<GaussRat>> = sel.iter().map(|&i| dd.delbar.column(i)).collect();
            if cols.is_empty() {
                return Vec::new();
            }
            Matrix::from_columns(blades.len(), &cols)
                .nullspace()
                .into_iter()
                .map(|k| {
                    let mut v = vec![GaussRat::zero(); blades.len()];
                    for (c, &i) in k.iter().zip(&sel) {
                        v[i] = c.clone();
                    }
                    v
                })
                .collect()
        };
        let dh = self.dh_matrix(blades, blades);
        let image_rank = |s: &[Vec<GaussRat>]| -> usize {
            let imgs: Vec<Vec<GaussRat>> = s.iter().map(|v| dh.mul_vec(v)).collect();
            linalg::span_dim(blades.len(), &imgs)
        };
        let (ke, ko) = (parity_kernel(0), parity_kernel(1));
        let (re, ro) = (image_rank(&ke), image_rank(&ko));
        Ok(BettiPair { even: ke.len() - re - ro, odd: ko.len() - ro - re })
    }
}

/// Dense `∂` and `∂̄` operators of a constant structure on a model.
#[derive(Clone, Debug)]
pub struct DelDelbar {
    n: usize,
    blades: Vec<Blade>,
    pub del: Matrix,
    pub delbar: Matrix,
}

impl DelDelbar {
    fn new(m: &Model, j: &GCMap) -> Result<DelDelbar> {
        let n = m.n();
        if j.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: j.dim() });
        }
        let grading = j.uk_grading()?;
        let blades = all_blades(n);
        let size = blades.len();
        let mut labels = Vec::with_capacity(size);
        let mut cols = Vec::with_capacity(size);
        for (k, basis) in &grading {
            for f in basis {
                labels.push(*k);
                cols.push(f.to_dense(&blades)?);
            }
        }
        let p = Matrix::from_columns(size, &cols);
        let p_inv = invert(&p);
        let d = m.dh_matrix(&blades, &blades);
        let c = p_inv.mul(&d).mul(&p);
        let mut up = Matrix::zeros(size, size);
        let mut down = Matrix::zeros(size, size);
        let mut stray = Matrix::zeros(size, size);
        for r in 0..size {
            for col in 0..size {
                let v = c.get(r, col).clone();
                if v.is_zero() {
                    continue;
                }
                match labels[r] - labels[col] {
                    1 => up.set(r, col, v),
                    -1 => down.set(r, col, v),
                    _ => stray.set(r, col, v),
                }
            }
        }
        if !stray.is_zero() {
            let col = (0..size).find(|&c| (0..size).any(|r| !stray.get(r, c).is_zero())).unwrap();
            let residual = Form::from_dense(n, &blades, &p.mul(&stray).column(col));
            return Err(Error::NotIntegrable {
                residual: format!("d_H({}) has component {}", m.show(&Form::from_dense(n, &blades, &p.column(col))), m.show(&residual)),
            });
        }
        Ok(DelDelbar { n, del: p.mul(&up).mul(&p_inv), delbar: p.mul(&down).mul(&p_inv), blades })
    }

    pub fn blades(&self) -> &[Blade] {
        &self.blades
    }

    fn apply(&self, op: &Matrix, a: &Form) -> Result<Form> {
        let v = a.to_dense(&self.blades)?;
        Ok(Form::from_dense(self.n, &self.blades, &op.mul_vec(&v)))
    }

    pub fn apply_del(&self, a: &Form) -> Result<Form> {
        self.apply(&self.del, a)
    }

    pub fn apply_delbar(&self, a: &Form) -> Result<Form> {
        self.apply(&self.delbar, a)
    }

    fn columns(m: &Matrix) -> Vec<Vec<GaussRat>> {
        (0..m.cols()).map(|c| m.column(c)).collect()
    }

    /// Compares `ker ∂ ∩ im ∂̄`, `im ∂ ∩ ker ∂̄` and `im ∂̄∂`.
    pub fn ddbar_report(&self) -> DdbarReport {
        let size = self.blades.len();
        let ker_del = self.del.nullspace();
        let ker_dbar = self.delbar.nullspace();
        let im_del = Self::columns(&self.del);
        let im_dbar = Self::columns(&self.delbar);
        let im_dd = linalg::span_basis(size, &Self::columns(&self.delbar.mul(&self.del)));
        let a = linalg::intersection(size, &ker_del, &im_dbar);
        let b = linalg::intersection(size, &im_del, &ker_dbar);
        let witness = a
            .iter()
            .chain(&b)
            .find(|v| !linalg::in_span(size, &im_dd, v))
            .map(|v| normalize_spinor(&Form::from_dense(self.n, &self.blades, v)));
        DdbarReport {
            ker_del_im_delbar: a.len(),
            im_del_ker_delbar: b.len(),
            im_delbar_del: im_dd.len(),
            witness,
        }
    }
}

fn invert(p: &Matrix) -> Matrix {
    let n = p.rows();
    let (r, pivots) = p.hstack(&Matrix::identity(n)).rref();
    assert_eq!(pivots.len(), n, "grading basis is not a basis");
    r.submatrix(0..n, n..2 * n)
}

/// Outcome of the `∂̄∂`-lemma test: subspace dimensions and, on failure, a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdbarReport {
    pub ker_del_im_delbar: usize,
    pub im_del_ker_delbar: usize,
    pub im_delbar_del: usize,
    pub witness: Option<Form>,
}

impl DdbarReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}
