//! Truncated Cartan model for torus actions on invariant models.
//!
//! Equivariant forms are polynomials in `x_1..x_k` (each of even degree) with
//! form coefficients. The equivariant differential is
//! `d_G(x^I α) = x^I dα - Σ_j x^{I+e_j} ι_{ξ_j} α`; the opposite sign
//! convention is related to this one by `x ↦ -x` and gives the same ranks.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::form::{all_blades, Blade, Form};
use crate::gclinear::GCMap;
use crate::linalg::Matrix;
use crate::model::{BettiPair, Model};
use crate::scalar::{GaussRat, Scalar};

/// Exponent vector of a monomial in `x_1..x_k`.
pub type Exponent = Vec<u32>;

pub fn exponent_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// All exponent vectors in `k` variables of total degree `deg`, in lexicographic order.
pub fn monomials(k: usize, deg: u32) -> Vec<Exponent> {
    fn rec(k: usize, deg: u32, prefix: &mut Exponent, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == k {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=deg).rev() {
            prefix.push(first);
            rec(k, deg - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(k, deg, &mut Vec::new(), &mut out);
    out
}

/// Number of monomials of degree `d` in `k` variables.
pub fn monomial_count(k: usize, d: u32) -> usize {
    monomials(k, d).len()
}

/// Polynomial in `x_1..x_k` with form coefficients, truncated at total degree `trunc`.
#[derive(Clone, Debug)]
pub struct EqForm {
    n: usize,
    k: usize,
    trunc: u32,
    terms: BTreeMap<Exponent, Form>,
    overflow: bool,
}

impl PartialEq for EqForm {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.k == o.k && self.terms == o.terms
    }
}

impl Eq for EqForm {}

impl EqForm {
    pub fn zero(n: usize, k: usize, trunc: u32) -> EqForm {
        EqForm { n, k, trunc, terms: BTreeMap::new(), overflow: false }
    }

    pub fn from_form(f: &Form, k: usize, trunc: u32) -> EqForm {
        EqForm::monomial(vec![0; k], f.clone(), trunc)
    }

    pub fn monomial(exps: Exponent, f: Form, trunc: u32) -> EqForm {
        let mut e = EqForm::zero(f.n(), exps.len(), trunc);
        e.add_term(exps, f);
        e
    }

    /// `x_j` times a form (0-based `j`).
    pub fn x_times(j: usize, k: usize, f: Form, trunc: u32) -> EqForm {
        let mut exps = vec![0; k];
        exps[j] = 1;
        EqForm::monomial(exps, f, trunc)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// True if some nonzero term was dropped by truncation.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Form)> {
        self.terms.iter()
    }

    pub fn component(&self, exps: &[u32]) -> Form {
        self.terms.get(exps).cloned().unwrap_or_else(|| Form::zero(self.n))
    }

    /// Coefficient of `x^0`.
    pub fn form_part(&self) -> Form {
        self.component(&vec![0; self.k])
    }

    /// Highest total degree present.
    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(|e| exponent_degree(e)).max().unwrap_or(0)
    }

    pub fn with_trunc(&self, trunc: u32) -> EqForm {
        let mut out = EqForm { trunc, terms: BTreeMap::new(), ..self.clone() };
        for (e, f) in &self.terms {
            out.add_term(e.clone(), f.clone());
        }
        out
    }

    pub fn add_term(&mut self, exps: Exponent, f: Form) {
        assert_eq!(exps.len(), self.k, "exponent length");
        assert_eq!(f.n(), self.n, "form generator count");
        if f.is_zero() {
            return;
        }
        if exponent_degree(&exps) > self.trunc {
            self.overflow = true;
            return;
        }
        let merged = match self.terms.remove(&exps) {
            Some(old) => &old + &f,
            None => f,
        };
        if !merged.is_zero() {
            self.terms.insert(exps, merged);
        }
    }

    fn check(&self, o: &EqForm) {
        assert_eq!((self.n, self.k), (o.n, o.k), "equivariant forms over different models");
    }

    pub fn add(&self, o: &EqForm) -> EqForm {
        self.check(o);
        let mut out = self.clone();
        out.trunc = self.trunc.min(o.trunc);
        out.overflow |= o.overflow;
        for (e, f) in &o.terms {
            out.add_term(e.clone(), f.clone());
        }
        out
    }

    pub fn neg(&self) -> EqForm {
        self.map_forms(|f| -f)
    }

    pub fn sub(&self, o: &EqForm) -> EqForm {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> EqForm {
        self.map_forms(|f| f.scale(c))
    }

    /// Applies a linear map to every coefficient.
    pub fn map_forms(&self, f: impl Fn(&Form) -> Form) -> EqForm {
        let mut out = EqForm { terms: BTreeMap::new(), ..self.clone() };
        for (e, a) in &self.terms {
            let b = f(a);
            if b.n() != self.n {
                panic!("coefficient map changed the generator count");
            }
            out.add_term(e.clone(), b);
        }
        out
    }

    /// `x_j · η`.
    pub fn mul_x(&self, j: usize) -> EqForm {
        let mut out = EqForm { terms: BTreeMap::new(), ..self.clone() };
        for (e, f) in &self.terms {
            let mut e2 = e.clone();
            e2[j] += 1;
            out.add_term(e2, f.clone());
        }
        out
    }

    /// Product; the `x_j` are central and even.
    pub fn wedge(&self, o: &EqForm) -> EqForm {
        self.check(o);
        let mut out = EqForm::zero(self.n, self.k, self.trunc.min(o.trunc));
        out.overflow = self.overflow || o.overflow;
        for (ea, fa) in &self.terms {
            for (eb, fb) in &o.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, fa ^ fb);
            }
        }
        out
    }

    /// `a ∧ η` for a plain form `a`.
    pub fn wedge_form(&self, a: &Form) -> EqForm {
        self.map_forms(|f| a ^ f)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Exponent> = self.terms.keys().collect();
        keys.sort_by(|a, b| exponent_degree(a).cmp(&exponent_degree(b)).then_with(|| b.cmp(a)));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|e| {
                let form = self.terms[e].display_with(names);
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0)
                    .map(|(j, p)| if *p == 1 { format!("x{}", j + 1) } else { format!("x{}**{}", j + 1, p) })
                    .collect();
                if mono.is_empty() {
                    format!("({form})")
                } else {
                    format!("{}*({form})", mono.join("*"))
                }
            })
            .collect();
        parts.join("+")
    }
}

impl fmt::Display for EqForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}

/// Action of a `k`-torus on a model by constant vector fields, with
/// formal moment data `m^j = dμ^j` and moment one-forms `α^j`.
#[derive(Clone, Debug)]
pub struct TorusAction {
    model: Model,
    xi: Vec<Vec<Scalar>>,
    mu_diff: Vec<Form>,
    alpha: Vec<Form>,
}

impl TorusAction {
    /// Validates invariance (`ι_{ξ_j} de_i = 0` for every generator, hence
    /// `L_{ξ_j} = 0` on the whole model), closedness of each `m^j` and degrees.
    pub fn new(model: &Model, xi: Vec<Vec<Scalar>>, mu_diff: Vec<Form>, alpha: Vec<Form>) -> Result<TorusAction> {
        let n = model.n();
        let k = xi.len();
        for v in &xi {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
            if !v.iter().all(Scalar::is_constant) {
                return Err(Error::ParametricInput);
            }
        }
        let mu_diff = if mu_diff.is_empty() { vec![Form::zero(n); k] } else { mu_diff };
        let alpha = if alpha.is_empty() { vec![Form::zero(n); k] } else { alpha };
        if mu_diff.len() != k || alpha.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: mu_diff.len().max(alpha.len()) });
        }
        for f in mu_diff.iter().chain(&alpha) {
            if f.n() != n {
                return Err(Error::GeneratorMismatch { left: n, right: f.n() });
            }
            f.require_degree(1)?;
        }
        for (j, v) in xi.iter().enumerate() {
            for (i, de) in model.d_table().iter().enumerate() {
                let l = de.contract_vector(v)?;
                if !l.is_zero() {
                    return Err(Error::NotInvariant {
                        j: j + 1,
                        target: model.names()[i].clone(),
                        residual: model.show(&l),
                    });
                }
            }
        }
        for (j, m) in mu_diff.iter().enumerate() {
            let dm = model.d(m);
            if !dm.is_zero() {
                return Err(Error::NotClosed { what: format!("m^{}", j + 1), residual: model.show(&dm) });
            }
        }
        Ok(TorusAction { model: model.clone(), xi, mu_diff, alpha })
    }

    /// Action by the coordinate vector fields `∂_{t+1}` for the given 0-based indices.
    pub fn coordinate(model: &Model, directions: &[usize]) -> Result<TorusAction> {
        let xi = directions
            .iter()
            .map(|&t| (0..model.n()).map(|i| if i == t { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        TorusAction::new(model, xi, Vec::new(), Vec::new())
    }

    pub fn with_moment(&self, mu_diff: Vec<Form>, alpha: Vec<Form>) -> Result<TorusAction> {
        TorusAction::new(&self.model, self.xi.clone(), mu_diff, alpha)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn k(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self, j: usize) -> &[Scalar] {
        &self.xi[j]
    }

    pub fn mu_diff(&self, j: usize) -> &Form {
        &self.mu_diff[j]
    }

    pub fn alpha(&self, j: usize) -> &Form {
        &self.alpha[j]
    }

    fn iota(&self, j: usize, f: &Form) -> Form {
        f.contract_vector(&self.xi[j]).expect("dimensions checked at construction")
    }

    fn check(&self, eta: &EqForm) -> Result<()> {
        if eta.n != self.model.n() {
            return Err(Error::GeneratorMismatch { left: self.model.n(), right: eta.n });
        }
        if eta.k != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), found: eta.k });
        }
        Ok(())
    }

    /// `H_G = H + Σ_j x_j α^j`.
    pub fn h_g(&self, trunc: u32) -> EqForm {
        let k = self.k();
        let mut out = EqForm::from_form(self.model.h(), k, trunc.max(1));
        for j in 0..k {
            out = out.add(&EqForm::x_times(j, k, self.alpha[j].clone(), trunc.max(1)));
        }
        out
    }

    /// `d_G η`; terms past the truncation are dropped and flagged.
    pub fn d_equivariant(&self, eta: &EqForm) -> Result<EqForm> {
        self.check(eta)?;
        let mut out = eta.map_forms(|f| self.model.d(f));
        for j in 0..self.k() {
            out = out.sub(&eta.map_forms(|f| self.iota(j, f)).mul_x(j));
        }
        Ok(out)
    }

    fn require_closed(&self, h_g: &EqForm) -> Result<()> {
        let r = self.d_equivariant(&h_g.with_trunc(h_g.x_degree() + 1))?;
        if r.is_zero() {
            Ok(())
        } else {
            Err(Error::NotClosed { what: "H_G (equivariantly)".into(), residual: r.display_with(self.model.names()) })
        }
    }

    /// `d_{G,H_G} η = d_G η - H_G ∧ η`.
    pub fn d_equivariant_twisted(&self, h_g: &EqForm, eta: &EqForm) -> Result<EqForm> {
        self.check(h_g)?;
        self.require_closed(h_g)?;
        let hg = h_g.with_trunc(eta.trunc);
        Ok(self.d_equivariant(eta)?.sub(&hg.wedge(eta)))
    }

    /// `𝒜γ = Σ_j x_j (-ι_j γ + i (m^j + i α^j) ∧ γ)`.
    pub fn moment_operator(&self, gamma: &EqForm) -> Result<EqForm> {
        self.check(gamma)?;
        let mut out = EqForm::zero(gamma.n, gamma.k, gamma.trunc);
        for j in 0..self.k() {
            let w = &self.mu_diff[j].scale(&Scalar::i()) - &self.alpha[j];
            let part = gamma.map_forms(|f| &(&w ^ f) - &self.iota(j, f));
            out = out.add(&part.mul_x(j));
        }
        Ok(out)
    }

    /// `D_G = d_H + 𝒜`, which equals `d_{G, H_G - i Σ x_j m^j}`.
    pub fn big_d(&self, gamma: &EqForm) -> Result<EqForm> {
        Ok(gamma.map_forms(|f| self.model.d_twisted(f)).add(&self.moment_operator(gamma)?))
    }

    /// `d_G(H_G - i Σ x_j m^j)`, whose vanishing is equivalent to `D_G² = 0`.
    pub fn big_d_square_residual(&self) -> EqForm {
        let k = self.k();
        let mut h = self.h_g(2);
        for j in 0..k {
            h = h.sub(&EqForm::x_times(j, k, self.mu_diff[j].scale(&Scalar::i()), 2));
        }
        self.d_equivariant(&h).expect("own model")
    }

    /// Per-direction residuals `(-ξ_j + i(m^j + iα^j))·ρ` and the closedness residual of `H_G`.
    pub fn hamiltonian_report(&self, rho: &Form) -> Result<HamiltonianReport> {
        if rho.n() != self.model.n() {
            return Err(Error::GeneratorMismatch { left: self.model.n(), right: rho.n() });
        }
        let residuals = (0..self.k())
            .map(|j| {
                let w = &self.mu_diff[j].scale(&Scalar::i()) - &self.alpha[j];
                &(&w ^ rho) - &self.iota(j, rho)
            })
            .collect();
        let closedness = self.d_equivariant(&self.h_g(2))?;
        Ok(HamiltonianReport { residuals, closedness, d_squared: self.big_d_square_residual() })
    }

    pub fn hamiltonian_check(&self, rho: &Form) -> Result<()> {
        let r = self.hamiltonian_report(rho)?;
        if r.ok() {
            return Ok(());
        }
        let names = self.model.names();
        let mut msgs = Vec::new();
        for (j, f) in r.residuals.iter().enumerate() {
            if !f.is_zero() {
                msgs.push(format!("direction {}: residual {}", j + 1, f.display_with(names)));
            }
        }
        if !r.closedness.is_zero() {
            msgs.push(format!("d_G H_G = {}", r.closedness.display_with(names)));
        }
        if !r.d_squared.is_zero() {
            msgs.push(format!("D_G^2 residual {}", r.d_squared.display_with(names)));
        }
        Err(Error::Hamiltonian(msgs.join("; ")))
    }

    /// Ranks of `d_{G,H_G}` on the truncated complex.
    pub fn equivariant_cohomology(&self, h_g: &EqForm, trunc: u32) -> Result<EqCohomology> {
        self.check(h_g)?;
        self.require_closed(h_g)?;
        let base = self.model.with_h(h_g.form_part())?.twisted_cohomology();
        let ranks = truncated_cohomology(self.model.n(), self.k(), trunc, |eta| {
            self.d_equivariant(eta).expect("checked").sub(&h_g.with_trunc(eta.trunc).wedge(eta))
        });
        Ok(EqCohomology::new(self.k(), ranks, base))
    }

    /// Ranks of `D_G` on the truncated complex.
    pub fn generalized_cohomology(&self, trunc: u32) -> Result<EqCohomology> {
        if !self.big_d_square_residual().is_zero() {
            return Err(Error::NotClosed {
                what: "H_G - i x m (D_G^2 != 0)".into(),
                residual: self.big_d_square_residual().display_with(self.model.names()),
            });
        }
        let base = self.model.twisted_cohomology();
        let ranks = truncated_cohomology(self.model.n(), self.k(), trunc, |eta| self.big_d(eta).expect("own model"));
        Ok(EqCohomology::new(self.k(), ranks, base))
    }

    /// Checks `D_G(e^{-iμ}γ) = e^{-iμ} d_{G,H_G}(γ)` with each `μ^j` a formal
    /// function satisfying `dμ^j = m^j`, `ι μ^j = 0`; `μ = Σ x_j μ^j`.
    /// Returns the residual, which is zero exactly when the identity holds
    /// through x-degree `trunc`.
    pub fn conjugation_residual(&self, gamma: &EqForm, trunc: u32) -> Result<MuSeries> {
        self.check(gamma)?;
        let h_g = self.h_g(trunc);
        self.require_closed(&h_g)?;
        let gamma = gamma.with_trunc(trunc);
        let e = MuSeries::exp_minus_i_mu(self.k(), &gamma, trunc);
        let lhs = e.apply(self, |f| self.big_d(f).expect("own model"));
        let rhs_inner = self.d_equivariant_twisted(&h_g, &gamma)?;
        let rhs = MuSeries::exp_minus_i_mu(self.k(), &rhs_inner, trunc);
        Ok(lhs.sub(&rhs))
    }

    /// Recursively corrects `φ` into a `D_G`-closed equivariant extension
    /// `φ + Σ ∂γ^k`, solving `∂̄∂γ = -𝒜(current)` at each step.
    pub fn canonical_extension(&self, j: &GCMap, phi: &Form) -> Result<EqForm> {
        let m = &self.model;
        if phi.n() != m.n() {
            return Err(Error::GeneratorMismatch { left: m.n(), right: phi.n() });
        }
        let dd = m.del_delbar(j)?;
        let report = dd.ddbar_report();
        if let Some(w) = report.witness {
            return Err(Error::DdbarViolation { witness: m.show(&w) });
        }
        let (dphi, dbphi) = (dd.apply_del(phi)?, dd.apply_delbar(phi)?);
        if !dphi.is_zero() || !dbphi.is_zero() {
            return Err(Error::Precondition {
                what: "form must be del- and delbar-closed".into(),
                residual: m.show(&(&dphi + &dbphi)),
            });
        }
        let steps = (m.n() / 2 + 1) as u32;
        let blades = dd.blades().to_vec();
        let ddbar = dd.delbar.mul(&dd.del);
        let mut current = EqForm::from_form(phi, self.k(), steps + 1);
        let mut total = current.clone();
        for _ in 0..steps {
            let r = self.moment_operator(&current)?;
            if r.is_zero() {
                break;
            }
            let mut next = EqForm::zero(m.n(), self.k(), steps + 1);
            for (e, f) in r.terms() {
                let rhs: Vec<GaussRat> = f.to_dense(&blades)?.iter().map(|c| -c).collect();
                let g = ddbar.solve(&rhs).ok_or_else(|| Error::DdbarViolation { witness: m.show(f) })?;
                let gamma = Form::from_dense(m.n(), &blades, &g);
                next.add_term(e.clone(), dd.apply_del(&gamma)?);
            }
            total = total.add(&next);
            current = next;
        }
        let residual = self.big_d(&total)?;
        if !residual.is_zero() || residual.overflowed() {
            return Err(Error::NotClosed { what: "canonical extension under D_G".into(), residual: residual.display_with(m.names()) });
        }
        Ok(total)
    }
}

/// Outcome of [`TorusAction::hamiltonian_report`].
#[derive(Clone, Debug)]
pub struct HamiltonianReport {
    pub residuals: Vec<Form>,
    pub closedness: EqForm,
    pub d_squared: EqForm,
}

impl HamiltonianReport {
    pub fn ok(&self) -> bool {
        self.residuals.iter().all(Form::is_zero) && self.closedness.is_zero() && self.d_squared.is_zero()
    }
}

/// Ranks of a truncated equivariant complex.
///
/// `ranks[t]` is the cohomology of the subcomplex `F_t` of elements of
/// x-degree at most `t` whose differential also has x-degree at most `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqCohomology {
    pub k: usize,
    pub ranks: Vec<BettiPair>,
    /// Ranks of a free module over the polynomial ring on the ordinary twisted cohomology.
    pub free_pattern: Vec<BettiPair>,
    pub base: BettiPair,
}

impl EqCohomology {
    fn new(k: usize, ranks: Vec<BettiPair>, base: BettiPair) -> EqCohomology {
        let mut free_pattern = Vec::with_capacity(ranks.len());
        let mut count = 0;
        for t in 0..ranks.len() as u32 {
            count += monomial_count(k, t);
            free_pattern.push(BettiPair { even: count * base.even, odd: count * base.odd });
        }
        EqCohomology { k, ranks, free_pattern, base }
    }

    pub fn trunc(&self) -> u32 {
        self.ranks.len() as u32 - 1
    }

    pub fn last(&self) -> BettiPair {
        *self.ranks.last().unwrap()
    }

    /// Ranks match the free-module pattern at every truncation degree.
    pub fn free_module(&self) -> bool {
        self.ranks == self.free_pattern
    }

    /// Ranks agree at the last two truncation degrees.
    pub fn stable(&self) -> bool {
        let r = &self.ranks;
        r.len() >= 2 && r[r.len() - 1] == r[r.len() - 2]
    }
}

fn basis_upto(k: usize, trunc: u32, blades: &[Blade], parity: usize) -> Vec<(Exponent, Blade)> {
    let mut out = Vec::new();
    for d in 0..=trunc {
        for e in monomials(k, d) {
            for b in blades.iter().filter(|b| b.grade() % 2 == parity) {
                out.push((e.clone(), *b));
            }
        }
    }
    out
}

fn dense(eta: &EqForm, basis: &[(Exponent, Blade)]) -> Vec<GaussRat> {
    let index: BTreeMap<(&Exponent, Blade), usize> = basis.iter().enumerate().map(|(i, (e, b))| ((e, *b), i)).collect();
    let mut v = vec![GaussRat::zero(); basis.len()];
    for (e, f) in eta.terms() {
        for (b, c) in f.gauss_terms().expect("parameter-free differential") {
            let i = index[&(e, b)];
            v[i] = c;
        }
    }
    v
}

/// Cohomology ranks of the truncated subcomplexes `F_t`, `t = 0..=trunc`,
/// for an odd differential that raises x-degree by at most one.
pub fn truncated_cohomology(n: usize, k: usize, trunc: u32, op: impl Fn(&EqForm) -> EqForm) -> Vec<BettiPair> {
    let blades = all_blades(n);
    let mut out = Vec::new();
    for t in 0..=trunc {
        // (dim C, dim Z, dim F) per parity
        let mut stats = [(0usize, 0usize, 0usize); 2];
        for parity in 0..2 {
            let src = basis_upto(k, t, &blades, parity);
            let dst = basis_upto(k, t + 1, &blades, 1 - parity);
            let top: Vec<usize> =
                (0..dst.len()).filter(|&i| exponent_degree(&dst[i].0) == t + 1).collect();
            let cols: Vec<Vec<GaussRat>> = src
                .iter()
                .map(|(e, b)| {
                    let eta = EqForm::monomial(e.clone(), Form::term(n, *b, Scalar::one()), t + 1);
                    let image = op(&eta);
                    assert!(image.x_degree() <= t + 1 && !image.overflowed(), "differential raised x-degree by more than one");
                    dense(&image, &dst)
                })
                .collect();
            if src.is_empty() {
                continue;
            }
            let full = Matrix::from_columns(dst.len(), &cols);
            let top_cols: Vec<Vec<GaussRat>> = cols.iter().map(|c| top.iter().map(|&i| c[i].clone()).collect()).collect();
            let top_rank = if top.is_empty() { 0 } else { Matrix::from_columns(top.len(), &top_cols).rank() };
            let dim = src.len();
            stats[parity] = (dim, dim - full.rank(), dim - top_rank);
        }
        let (_, ze, fe) = stats[0];
        let (_, zo, fo) = stats[1];
        out.push(BettiPair { even: ze - (fo - zo), odd: zo - (fe - ze) });
    }
    out
}

/// Polynomial in formal functions `μ^1..μ^k` with equivariant-form coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuSeries {
    k: usize,
    terms: BTreeMap<Exponent, EqForm>,
}

impl MuSeries {
    fn add_term(&mut self, p: Exponent, f: EqForm) {
        if f.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&p) {
            Some(old) => old.add(&f),
            None => f,
        };
        if !merged.is_zero() {
            self.terms.insert(p, merged);
        }
    }

    /// `e^{-i Σ x_j μ^j} γ` expanded through x-degree `trunc`.
    pub fn exp_minus_i_mu(k: usize, gamma: &EqForm, trunc: u32) -> MuSeries {
        let mut out = MuSeries { k, terms: BTreeMap::new() };
        let mut power = MuSeries { k, terms: BTreeMap::new() };
        power.add_term(vec![0; k], gamma.with_trunc(trunc));
        let mut p = 0i64;
        while !power.terms.is_empty() {
            for (e, f) in &power.terms {
                out.add_term(e.clone(), f.clone());
            }
            p += 1;
            let mut next = MuSeries { k, terms: BTreeMap::new() };
            for (e, f) in &power.terms {
                for j in 0..k {
                    let mut e2 = e.clone();
                    e2[j] += 1;
                    let c = &Scalar::i().scale(&GaussRat::from_int(-1)) * &Scalar::from_ratio(1, p);
                    next.add_term(e2, f.mul_x(j).scale(&c));
                }
            }
            power = next;
        }
        out
    }

    /// Applies `op` coefficientwise and adds the derivative terms `p_j μ^{p-e_j} m^j ∧ (·)`.
    fn apply(&self, act: &TorusAction, op: impl Fn(&EqForm) -> EqForm) -> MuSeries {
        let mut out = MuSeries { k: self.k, terms: BTreeMap::new() };
        for (p, f) in &self.terms {
            out.add_term(p.clone(), op(f));
            for j in 0..self.k {
                if p[j] > 0 {
                    let mut q = p.clone();
                    q[j] -= 1;
                    let c = Scalar::from_int(p[j] as i64);
                    out.add_term(q, f.wedge_form(act.mu_diff(j)).scale(&c));
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &MuSeries) -> MuSeries {
        let mut out = self.clone();
        for (p, f) in &o.terms {
            out.add_term(p.clone(), f.neg());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Connection forms `θ^j` dual to the action, `ι_{ξ_i} θ^j = δ_i^j`.
#[derive(Clone, Debug)]
pub struct Connection {
    act: TorusAction,
    theta: Vec<Form>,
    curvature: Vec<Form>,
}

impl Connection {
    pub fn new(act: &TorusAction, theta: Vec<Form>) -> Result<Connection> {
        let k = act.k();
        let m = act.model();
        if theta.len() != k {
            return Err(Error::NoConnection(format!("{} connection forms for a rank-{k} torus", theta.len())));
        }
        for (j, t) in theta.iter().enumerate() {
            if t.n() != m.n() {
                return Err(Error::GeneratorMismatch { left: m.n(), right: t.n() });
            }
            t.require_degree(1)?;
            for i in 0..k {
                let pairing = act.iota(i, t).as_scalar();
                let expected = if i == j { Scalar::one() } else { Scalar::zero() };
                if pairing != expected {
                    return Err(Error::NoConnection(format!(
                        "iota_{} theta^{} = {}, expected {}",
                        i + 1,
                        j + 1,
                        pairing,
                        expected
                    )));
                }
            }
        }
        // torus: the bracket term of the curvature vanishes
        let curvature: Vec<Form> = theta.iter().map(|t| m.d(t)).collect();
        for (j, c) in curvature.iter().enumerate() {
            for i in 0..k {
                let r = act.iota(i, c);
                if !r.is_zero() {
                    return Err(Error::NoConnection(format!("curvature c^{} is not horizontal: {}", j + 1, m.show(&r))));
                }
            }
        }
        Ok(Connection { act: act.clone(), theta, curvature })
    }

    /// `θ^j = e_{t_j}` for a coordinate action.
    pub fn coordinate(act: &TorusAction) -> Result<Connection> {
        let n = act.model().n();
        let theta = (0..act.k())
            .map(|j| {
                let v = act.xi(j);
                let t = v.iter().position(|c| !c.is_zero()).ok_or_else(|| Error::NoConnection("zero vector field".into()))?;
                Ok(Form::generator(n, t).scale(&Scalar::one().checked_div(&v[t])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Connection::new(act, theta)
    }

    pub fn action(&self) -> &TorusAction {
        &self.act
    }

    pub fn theta(&self, j: usize) -> &Form {
        &self.theta[j]
    }

    pub fn curvature(&self, j: usize) -> &Form {
        &self.curvature[j]
    }

    /// `Π_j (1 - θ^j ∧ ι_j) γ`.
    pub fn horizontal(&self, gamma: &Form) -> Form {
        let mut g = gamma.clone();
        for j in 0..self.act.k() {
            g = &g - &(&self.theta[j] ^ &self.act.iota(j, &g));
        }
        g
    }

    pub fn is_basic(&self, a: &Form) -> bool {
        (0..self.act.k()).all(|j| self.act.iota(j, a).is_zero())
    }

    /// `x^I ⊗ γ ↦ c^I ∧ γ_hor`.
    pub fn cartan_map(&self, eta: &EqForm) -> Result<Form> {
        self.act.check(eta)?;
        let n = eta.n();
        let mut out = Form::zero(n);
        for (e, f) in eta.terms() {
            let mut c = Form::one(n);
            for (j, p) in e.iter().enumerate() {
                for _ in 0..*p {
                    c = &c ^ &self.curvature[j];
                }
            }
            out = &out + &(&c ^ &self.horizontal(f));
        }
        if !self.is_basic(&out) {
            return Err(Error::NotBasic(self.act.model().show(&out)));
        }
        Ok(out)
    }

    /// `Γ = Σ_j θ^j ∧ α^j`, verified to satisfy `ι_i Γ = α^i`.
    pub fn gamma(&self) -> Result<Form> {
        let act = &self.act;
        let m = act.model();
        for j in 0..act.k() {
            for i in 0..act.k() {
                let r = act.iota(i, act.alpha(j));
                if !r.is_zero() {
                    return Err(Error::NotHorizontal { j: j + 1, residual: m.show(&r) });
                }
            }
        }
        let mut g = Form::zero(m.n());
        for j in 0..act.k() {
            g = &g + &(&self.theta[j] ^ act.alpha(j));
        }
        for i in 0..act.k() {
            let r = &act.iota(i, &g) - act.alpha(i);
            if !r.is_zero() {
                return Err(Error::Precondition { what: format!("iota_{} Gamma != alpha^{}", i + 1, i + 1), residual: m.show(&r) });
            }
        }
        Ok(g)
    }

    /// `H + Σ x_j α^j + d_G Γ`, which has no x-dependence and is basic.
    pub fn basic_twist(&self) -> Result<Form> {
        let act = &self.act;
        let gamma = EqForm::from_form(&self.gamma()?, act.k(), 2);
        let total = act.h_g(2).add(&act.d_equivariant(&gamma)?);
        let form = total.form_part();
        if total.terms().any(|(e, _)| exponent_degree(e) > 0) {
            return Err(Error::NotBasic(format!("x-dependent remainder {}", total.display_with(act.model().names()))));
        }
        if !self.is_basic(&form) {
            return Err(Error::NotBasic(act.model().show(&form)));
        }
        Ok(form)
    }

    /// Generators that survive in the quotient; requires each `ξ_j` to be a coordinate field.
    fn kept(&self) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = self.act.model().n();
        let mut dropped = Vec::new();
        for j in 0..self.act.k() {
            let v = self.act.xi(j);
            let nz: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
            if nz.len() != 1 {
                return Err(Error::NoConnection(
                    "quotient models need each xi_j to be a multiple of a coordinate vector field".into(),
                ));
            }
            dropped.push(nz[0]);
        }
        Ok(((0..n).filter(|i| !dropped.contains(i)).collect(), dropped))
    }

    /// The invariant model of the quotient, with zero twisting form.
    pub fn quotient_model(&self) -> Result<Model> {
        let (kept, _) = self.kept()?;
        let m = self.act.model();
        let names: Vec<String> = kept.iter().map(|&i| m.names()[i].clone()).collect();
        let d_table = kept.iter().map(|&i| restrict(&m.d_table()[i], &kept)).collect::<Result<Vec<_>>>()?;
        Model::new(&format!("{}/T{}", m.name(), self.act.k()), names, d_table, Form::zero(kept.len()))
            .map(|q| q.with_volume(m.volume().clone()).with_orientation(m.orientation()))
    }

    /// The form on the quotient model pulling back to the basic form `a`.
    pub fn descend(&self, a: &Form) -> Result<Form> {
        let m = self.act.model();
        if !self.is_basic(a) {
            let r = (0..self.act.k()).map(|j| self.act.iota(j, a)).find(|f| !f.is_zero()).unwrap();
            return Err(Error::NotBasic(format!("{} has contraction {}", m.show(a), m.show(&r))));
        }
        let (kept, _) = self.kept()?;
        restrict(a, &kept)
    }

    /// Quotient model twisted by the descended `H + dΓ`.
    pub fn quotient_with_twist(&self) -> Result<Model> {
        let h = self.descend(&self.basic_twist()?)?;
        self.quotient_model()?.with_h(h)
    }
}

impl Form {
    /// Degree-zero coefficient as a scalar.
    pub fn as_scalar(&self) -> Scalar {
        self.coeff(Blade::EMPTY)
    }
}

/// Relabels a form supported on the `kept` generators onto `0..kept.len()`.
fn restrict(a: &Form, kept: &[usize]) -> Result<Form> {
    let mut out = Form::zero(kept.len());
    for (b, c) in a.terms() {
        let mut nb = 0u64;
        for i in b.indices() {
            let pos = kept.iter().position(|&k| k == i).ok_or_else(|| Error::NotBasic(format!("{a} involves a dropped generator")))?;
            nb |= 1 << pos;
        }
        out.add_term(Blade(nb), c.clone());
    }
    Ok(out)
}

/// A DGA morphism between models given by images of generators; forms pull back by substitution.
#[derive(Clone, Debug)]
pub struct ModelMorphism {
    source: Model,
    target: Model,
    images: Vec<Form>,
}

impl ModelMorphism {
    pub fn new(source: &Model, target: &Model, images: Vec<Form>) -> Result<ModelMorphism> {
        if images.len() != source.n() {
            return Err(Error::DimensionMismatch { expected: source.n(), found: images.len() });
        }
        for f in &images {
            if f.n() != target.n() {
                return Err(Error::GeneratorMismatch { left: target.n(), right: f.n() });
            }
            f.require_degree(1)?;
        }
        let mor = ModelMorphism { source: source.clone(), target: target.clone(), images };
        for i in 0..source.n() {
            let lhs = target.d(&mor.images[i]);
            let rhs = mor.pullback(&source.d_table()[i])?;
            if lhs != rhs {
                return Err(Error::Precondition {
                    what: format!("map does not commute with d on {}", source.names()[i]),
                    residual: target.show(&(&lhs - &rhs)),
                });
            }
        }
        let hp = mor.pullback(source.h())?;
        if &hp != target.h() {
            return Err(Error::Precondition { what: "map does not pull H back to H".into(), residual: target.show(&(&hp - target.h())) });
        }
        Ok(mor)
    }

    pub fn identity(m: &Model) -> ModelMorphism {
        ModelMorphism { source: m.clone(), target: m.clone(), images: (0..m.n()).map(|i| m.generator(i)).collect() }
    }

    /// Restriction to the sub-model on which the listed generators vanish.
    pub fn restriction(m: &Model, vanish: &[usize]) -> Result<ModelMorphism> {
        let kept: Vec<usize> = (0..m.n()).filter(|i| !vanish.contains(i)).collect();
        let r = kept.len();
        let kill = |f: &Form| f.filter(|b| vanish.iter().all(|&v| !b.contains(v)));
        let names = kept.iter().map(|&i| m.names()[i].clone()).collect();
        let d_table = kept.iter().map(|&i| restrict(&kill(&m.d_table()[i]), &kept)).collect::<Result<Vec<_>>>()?;
        let h = restrict(&kill(m.h()), &kept)?;
        let target = Model::new(&format!("{}|sub", m.name()), names, d_table, h)?
            .with_volume(m.volume().clone())
            .with_orientation(m.orientation());
        let images = (0..m.n())
            .map(|i| match kept.iter().position(|&k| k == i) {
                Some(p) => Form::generator(r, p),
                None => Form::zero(r),
            })
            .collect();
        ModelMorphism::new(m, &target, images)
    }

    pub fn source(&self) -> &Model {
        &self.source
    }

    pub fn target(&self) -> &Model {
        &self.target
    }

    pub fn pullback(&self, f: &Form) -> Result<Form> {
        if f.n() != self.source.n() {
            return Err(Error::GeneratorMismatch { left: self.source.n(), right: f.n() });
        }
        let mut out = Form::zero(self.target.n());
        for (b, c) in f.terms() {
            let img = b.indices().iter().fold(Form::one(self.target.n()), |acc, &i| &acc ^ &self.images[i]);
            out = &out + &img.scale(c);
        }
        Ok(out)
    }

    pub fn pullback_eq(&self, eta: &EqForm) -> Result<EqForm> {
        let mut out = EqForm::zero(self.target.n(), eta.k(), eta.trunc());
        for (e, f) in eta.terms() {
            out.add_term(e.clone(), self.pullback(f)?);
        }
        Ok(out)
    }
}

/// Pullback along `sub`, then the Cartan map of `conn` (an action on the
/// target of `sub`), then descent to the quotient model.
pub fn kirwan_map(sub: &ModelMorphism, conn: &Connection, eta: &EqForm) -> Result<Form> {
    let pulled = sub.pullback_eq(eta)?;
    let basic = conn.cartan_map(&pulled)?;
    conn.descend(&basic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, idx: &[usize]) -> Form {
        Form::monomial(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomial_count(3, 2), 6);
        assert_eq!(monomials(0, 0), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn equivariant_differential_examples() {
        let t2 = Model::torus(2);
        let act = TorusAction::coordinate(&t2, &[0]).unwrap();
        let d = act.d_equivariant(&EqForm::from_form(&e(2, &[1]), 1, 2)).unwrap();
        assert_eq!(d, EqForm::x_times(0, 1, Form::one(2).scale(&Scalar::from_int(-1)), 2));
        let x_e2 = EqForm::x_times(0, 1, e(2, &[2]), 2);
        assert!(act.d_equivariant(&x_e2).unwrap().is_zero());
        let triv = TorusAction::new(&t2, vec![vec![Scalar::zero(); 2]], vec![], vec![]).unwrap();
        assert!(triv.d_equivariant(&EqForm::from_form(&e(2, &[1]), 1, 2)).unwrap().is_zero());
    }

    #[test]
    fn twisted_equivariant_with_alpha() {
        let t3 = Model::torus(3);
        let act = TorusAction::coordinate(&t3, &[0]).unwrap().with_moment(vec![], vec![e(3, &[2])]).unwrap();
        let h_g = act.h_g(3);
        assert!(act.d_equivariant(&h_g.with_trunc(3)).unwrap().is_zero());
        let d1 = act.d_equivariant_twisted(&h_g, &EqForm::from_form(&Form::one(3), 1, 3)).unwrap();
        assert_eq!(d1, EqForm::x_times(0, 1, -&e(3, &[2]), 3));
    }

    #[test]
    fn hamiltonian_examples() {
        let t2 = Model::torus(2);
        let rho = &Form::one(2) + &e(2, &[1, 2]).scale(&Scalar::i());
        let base = TorusAction::coordinate(&t2, &[0]).unwrap();
        let act = base.with_moment(vec![e(2, &[2])], vec![]).unwrap();
        act.hamiltonian_check(&rho).unwrap();
        let bad = base.hamiltonian_report(&rho).unwrap();
        assert_eq!(bad.residuals[0], e(2, &[2]).scale(&-Scalar::i()));
        assert!(base.hamiltonian_check(&rho).is_err());
        let gamma = EqForm::x_times(0, 1, Form::one(2), 3);
        let a = act.moment_operator(&gamma).unwrap();
        assert_eq!(a.component(&[2]), e(2, &[2]).scale(&Scalar::i()));
    }

    #[test]
    fn free_circle_on_torus() {
        for m in 2..=3 {
            let t = Model::torus(m);
            let act = TorusAction::coordinate(&t, &[0]).unwrap();
            let coh = act.equivariant_cohomology(&act.h_g(0), 3).unwrap();
            let q = Model::torus(m - 1).twisted_cohomology();
            assert!(coh.ranks.iter().all(|r| *r == q), "{:?}", coh.ranks);
            assert!(!coh.free_module());
        }
        let t2 = Model::torus(2);
        let triv = TorusAction::new(&t2, vec![vec![Scalar::zero(); 2]], vec![], vec![]).unwrap();
        let coh = triv.equivariant_cohomology(&triv.h_g(0), 3).unwrap();
        assert!(coh.free_module());
        assert_eq!(coh.last(), BettiPair { even: 8, odd: 8 });
    }

    #[test]
    fn cartan_map_and_descent() {
        let t3 = Model::torus(3);
        let act = TorusAction::coordinate(&t3, &[0]).unwrap().with_moment(vec![], vec![e(3, &[2])]).unwrap();
        let conn = Connection::coordinate(&act).unwrap();
        assert_eq!(conn.gamma().unwrap(), e(3, &[1, 2]));
        assert!(conn.basic_twist().unwrap().is_zero());
        assert_eq!(conn.cartan_map(&EqForm::from_form(&Form::one(3), 1, 2)).unwrap(), Form::one(3));
        assert!(conn.cartan_map(&EqForm::x_times(0, 1, Form::one(3), 2)).unwrap().is_zero());
        assert!(conn.cartan_map(&EqForm::from_form(&e(3, &[1, 2]), 1, 2)).unwrap().is_zero());
        assert_eq!(conn.cartan_map(&EqForm::from_form(&e(3, &[2]), 1, 2)).unwrap(), e(3, &[2]));

        let t4 = Model::torus(4);
        let a4 = TorusAction::coordinate(&t4, &[0]).unwrap();
        let c4 = Connection::coordinate(&a4).unwrap();
        assert_eq!(c4.descend(&e(4, &[2, 3, 4])).unwrap(), e(3, &[1, 2, 3]));
        assert!(matches!(c4.descend(&e(4, &[1, 2])), Err(Error::NotBasic(_))));
        let id = ModelMorphism::identity(&t4);
        assert_eq!(kirwan_map(&id, &c4, &EqForm::from_form(&Form::one(4), 1, 2)).unwrap(), Form::one(3));
        assert!(kirwan_map(&id, &c4, &EqForm::x_times(0, 1, Form::one(4), 2)).unwrap().is_zero());
    }

    #[test]
    fn conjugation_identity() {
        let t2 = Model::torus(2);
        let act = TorusAction::coordinate(&t2, &[0]).unwrap().with_moment(vec![e(2, &[2])], vec![]).unwrap();
        for b in all_blades(2) {
            let g = EqForm::from_form(&Form::term(2, b, Scalar::one()), 1, 3);
            assert!(act.conjugation_residual(&g, 3).unwrap().is_zero());
        }
    }

    #[test]
    fn canonical_extension_trivial_cases() {
        let t2 = Model::torus(2);
        let j = GCMap::symplectic(&e(2, &[1, 2])).unwrap();
        let act = TorusAction::coordinate(&t2, &[0]).unwrap().with_moment(vec![e(2, &[2])], vec![]).unwrap();
        let ext = act.canonical_extension(&j, &e(2, &[2])).unwrap();
        assert_eq!(ext, EqForm::from_form(&e(2, &[2]), 1, 2));
        let rho = j.pure_spinor().unwrap();
        let ext = act.canonical_extension(&j, &rho).unwrap();
        assert_eq!(ext.form_part(), rho);
    }
}
