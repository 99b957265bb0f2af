//! Generalized Calabi-Yau structures on invariant models, Mukai volume
//! forms, parametric quotient families and Duistermaat-Heckman densities.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::form::{blades_of_grade, Form};
use crate::gclinear::annihilator;
use crate::linalg::Matrix;
use crate::model::Model;
use crate::scalar::{GaussRat, Monomial, Scalar};

/// Rational values for the level parameters.
pub type Sample = BTreeMap<String, BigRational>;

fn show_sample(s: &Sample) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn eval_form(f: &Form, s: &Sample) -> Form {
    f.map_coeffs(|c| c.eval(s))
}

/// Total degree in the real parameters.
pub fn parameter_degree(s: &Scalar) -> u32 {
    s.terms().map(|(m, _)| m.degree()).max().unwrap_or(0)
}

/// A `d_H`-closed pure spinor with nonvanishing Mukai pairing against its conjugate.
#[derive(Clone, Debug)]
pub struct GcyStructure {
    model: Model,
    rho: Form,
    /// Top coefficient of `σ(ρ) ∧ ρ̄`, possibly depending on parameters.
    pairing: Scalar,
    samples: Vec<Sample>,
    type_at_samples: Vec<usize>,
}

impl GcyStructure {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn rho(&self) -> &Form {
        &self.rho
    }

    pub fn half_dim(&self) -> usize {
        self.model.n() / 2
    }

    pub fn pairing(&self) -> &Scalar {
        &self.pairing
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Type of the structure at each sample (or once, for parameter-free spinors).
    pub fn types(&self) -> &[usize] {
        &self.type_at_samples
    }

    /// Common type if it is the same at every sample.
    pub fn constant_type(&self) -> Option<usize> {
        let first = *self.type_at_samples.first()?;
        self.type_at_samples.iter().all(|&t| t == first).then_some(first)
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = self.rho.terms().flat_map(|(_, c)| c.params()).map(|s| s.to_string()).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Verifies `d_H ρ = 0`, purity and `(ρ, ρ̄) ≠ 0` at every sample.
///
/// With no samples, a parametric spinor is only required to have a
/// nonzero pairing polynomial.
pub fn gcy_check(model: &Model, rho: &Form, samples: &[Sample]) -> Result<GcyStructure> {
    if rho.n() != model.n() {
        return Err(Error::GeneratorMismatch { left: model.n(), right: rho.n() });
    }
    if model.n() % 2 != 0 {
        return Err(Error::InvalidStructure(format!("odd generator count {}", model.n())));
    }
    let dh = model.try_d_twisted(rho)?;
    if !dh.is_zero() {
        return Err(Error::NotClosed { what: "rho under d_H".into(), residual: model.show(&dh) });
    }
    let pairing = rho.mukai(&rho.conj())?;
    if pairing.is_zero() {
        return Err(Error::VanishingPairing { sample: "all parameter values".into() });
    }
    let mut types = Vec::new();
    let evaluation_points: Vec<Sample> =
        if rho.is_parameter_free() { vec![Sample::new()] } else { samples.to_vec() };
    for s in &evaluation_points {
        let p = pairing.eval(s);
        if p.is_zero() {
            return Err(Error::VanishingPairing { sample: show_sample(s) });
        }
        let r = eval_form(rho, s);
        if !r.is_parameter_free() {
            return Err(Error::ParametricInput);
        }
        let ann = annihilator(&r)?;
        if !ann.maximal_isotropic {
            return Err(Error::InvalidStructure(format!("not a pure spinor at {}", show_sample(s))));
        }
        types.push(ann.space.dim() - ann.space.projection_rank());
    }
    Ok(GcyStructure {
        model: model.clone(),
        rho: rho.clone(),
        pairing,
        samples: samples.to_vec(),
        type_at_samples: types,
    })
}

/// `(-1)^n / (2i)^n · σ(ρ) ∧ ρ̄`.
pub fn volume_form(g: &GcyStructure) -> Form {
    let n = g.half_dim() as u32;
    let two_i = GaussRat::from_parts(0, 2).pow(n);
    let sign = if n % 2 == 0 { GaussRat::one() } else { GaussRat::from_int(-1) };
    let c = &sign * &two_i.inv().expect("nonzero");
    Form::term(g.model.n(), crate::form::Blade::full(g.model.n()), g.pairing.scale(&c))
}

/// `ρ_t = e^{-i t c} ∧ ρ` for a closed two-form `c`, checked as a structure at `samples`.
pub fn quotient_family(model: &Model, rho: &Form, c: &Form, param: &str, samples: &[Sample]) -> Result<GcyStructure> {
    c.require_degree(2)?;
    if c.n() != model.n() {
        return Err(Error::GeneratorMismatch { left: model.n(), right: c.n() });
    }
    let dc = model.try_d(c)?;
    if !dc.is_zero() {
        return Err(Error::NotClosed { what: "c".into(), residual: model.show(&dc) });
    }
    let tc = c.scale(&(&Scalar::param(param) * &Scalar::i()).scale(&GaussRat::from_int(-1)));
    let rho_t = tc.exp_two_form()?.wedge(rho)?;
    gcy_check(model, &rho_t, samples)
}

/// Output of [`dh_density`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhResult {
    pub density: Scalar,
    pub normalization: Scalar,
    pub n: usize,
    pub k: usize,
    pub degree_bound: u32,
    pub orientation: i32,
    /// Imaginary part of the density, reported rather than rejected.
    pub imaginary_part: Scalar,
}

impl DhResult {
    pub fn is_real(&self) -> bool {
        self.imaginary_part.is_zero()
    }

    pub fn degree(&self) -> u32 {
        parameter_degree(&self.density)
    }
}

/// `(-1)^{n + k(k+1)/2} (2π)^k / (2i)^{n-k}`.
pub fn dh_normalization(n: usize, k: usize) -> Scalar {
    let exp = n + k * (k + 1) / 2;
    let sign = if exp % 2 == 0 { 1 } else { -1 };
    let two_pi_k = Scalar::monomial(Monomial::pi_power(k as i32), GaussRat::from_int(sign * (1i64 << k)));
    let denom = GaussRat::from_parts(0, 2).pow((n - k) as u32).inv().expect("nonzero");
    two_pi_k.scale(&denom)
}

/// Duistermaat-Heckman density of a family on a reduced model of dimension
/// `2(n - k)`, integrated against the model's declared volume.
///
/// `constant_type` tightens the degree bound to `n - k - p`.
pub fn dh_density(fam: &GcyStructure, n: usize, k: usize, orientation: i32, constant_type: Option<usize>) -> Result<DhResult> {
    if k > n || fam.model.n() != 2 * (n - k) {
        return Err(Error::DimensionMismatch { expected: 2 * n.saturating_sub(k), found: fam.model.n() });
    }
    if orientation != 1 && orientation != -1 {
        return Err(Error::Usage(format!("orientation must be +1 or -1, got {orientation}")));
    }
    let normalization = dh_normalization(n, k);
    let integral = fam.model.volume() * &fam.pairing;
    let integral = if orientation < 0 { -integral } else { integral };
    let density = &normalization * &integral;
    let p = constant_type.unwrap_or(0);
    let degree_bound = (n - k).saturating_sub(p) as u32;
    let degree = parameter_degree(&density);
    if degree > degree_bound {
        return Err(Error::DegreeBound { degree, bound: degree_bound });
    }
    let (_, imaginary_part) = density.re_im();
    Ok(DhResult { density, normalization, n, k, degree_bound, orientation, imaginary_part })
}

/// Checks that `ω^{n-1} ∧ ·` maps one-forms bijectively onto `(2n-1)`-forms.
pub fn lefschetz_check(model: &Model, omega: &Form) -> Result<()> {
    let big_n = model.n();
    if omega.n() != big_n {
        return Err(Error::GeneratorMismatch { left: big_n, right: omega.n() });
    }
    omega.require_degree(2)?;
    if big_n % 2 != 0 || big_n == 0 {
        return Err(Error::Degenerate(format!("odd or zero generator count {big_n}")));
    }
    if !omega.is_parameter_free() {
        return Err(Error::ParametricInput);
    }
    let n = big_n / 2;
    let mut power = Form::one(big_n);
    for _ in 0..n - 1 {
        power = power.wedge(omega)?;
    }
    if power.wedge(omega)?.top_coeff().is_zero() {
        return Err(Error::Degenerate(format!("omega^{n} = 0")));
    }
    let src = blades_of_grade(big_n, 1);
    let dst = blades_of_grade(big_n, big_n - 1);
    let cols = src
        .iter()
        .map(|b| power.wedge(&Form::term(big_n, *b, Scalar::one()))?.to_dense(&dst))
        .collect::<Result<Vec<_>>>()?;
    let m = Matrix::from_columns(dst.len(), &cols);
    if m.rank() != big_n {
        let kernel = m.nullspace();
        let w = Form::from_dense(big_n, &src, &kernel[0]);
        return Err(Error::Degenerate(format!("Lefschetz map has kernel {}", model.show(&w))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, idx: &[usize]) -> Form {
        Form::monomial(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }

    fn dz(n: usize, a: usize) -> Form {
        &e(n, &[a]) + &e(n, &[a + 1]).scale(&Scalar::i())
    }

    fn sample(t: i64) -> Sample {
        [("t".to_string(), BigRational::from_integer(t.into()))].into_iter().collect()
    }

    #[test]
    fn volume_forms() {
        let t2 = Model::torus(2);
        let rho = e(2, &[1, 2]).scale(&Scalar::i()).exp_two_form().unwrap();
        let g = gcy_check(&t2, &rho, &[]).unwrap();
        assert_eq!(g.pairing(), &Scalar::from(GaussRat::from_parts(0, -2)));
        assert_eq!(volume_form(&g), e(2, &[1, 2]));

        let t4 = Model::torus(4);
        let rho2 = dz(4, 1).wedge(&dz(4, 3)).unwrap();
        let g2 = gcy_check(&t4, &rho2, &[]).unwrap();
        assert_eq!(g2.pairing(), &Scalar::from_int(-4));
        assert_eq!(volume_form(&g2), e(4, &[1, 2, 3, 4]));
        assert_eq!(g2.types(), &[2]);

        assert!(matches!(gcy_check(&t4, &dz(4, 3), &[]), Err(Error::VanishingPairing { .. })));
    }

    #[test]
    fn dh_examples() {
        let t4 = Model::torus(4);
        let c = e(4, &[1, 2]);
        let rho1 = c.scale(&-Scalar::i()).exp_two_form().unwrap().wedge(&dz(4, 3)).unwrap();
        let fam1 = quotient_family(&t4, &rho1, &c, "t", &[sample(0), sample(1)]).unwrap();
        assert_eq!(fam1.pairing().to_string(), "4*t+4");
        let r1 = dh_density(&fam1, 3, 1, 1, None).unwrap();
        assert_eq!(r1.density.factored(), "-2*pi*(t+1)");
        assert_eq!(r1.degree_bound, 2);
        assert!(r1.is_real());

        let rho2 = dz(4, 1).wedge(&dz(4, 3)).unwrap();
        let fam2 = quotient_family(&t4, &rho2, &c, "t", &[sample(0)]).unwrap();
        assert_eq!(fam2.rho(), &rho2);
        let r2 = dh_density(&fam2, 3, 1, -1, None).unwrap();
        assert_eq!(r2.density.factored(), "-2*pi");
        assert_eq!(dh_normalization(3, 1), Scalar::pi().scale(&GaussRat::from_ratio(-1, 2)));
    }

    #[test]
    fn lefschetz() {
        lefschetz_check(&Model::torus(2), &e(2, &[1, 2])).unwrap();
        lefschetz_check(&Model::torus(4), &(&e(4, &[1, 2]) + &e(4, &[3, 4]))).unwrap();
        assert!(matches!(lefschetz_check(&Model::torus(4), &e(4, &[1, 2])), Err(Error::Degenerate(_))));
    }
}
