//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::gen::{self, e};
use common::{C, Dense};
use gcequiv::cartan::{Connection, TorusAction};
use gcequiv::form::all_blades;
use gcequiv::gclinear::GCMap;
use gcequiv::gcy::{dh_density, dh_normalization, gcy_check, volume_form};
use gcequiv::model::{BettiPair, Model};
use gcequiv::modelfile::{parse_model, ModelFile};
use gcequiv::{Error, Form, GaussRat, Monomial, Scalar};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/models")
}

fn load(stem: &str) -> Result<ModelFile, String> {
    let text = std::fs::read_to_string(models_dir().join(format!("{stem}.model"))).map_err(err)?;
    parse_model(&text).map_err(err)
}

fn pair(even: usize, odd: usize) -> BettiPair {
    BettiPair { even, odd }
}

fn t() -> Scalar {
    Scalar::param("t")
}

fn c1_dh_golden() -> Outcome {
    let minus_pi_half = Scalar::monomial(Monomial::pi_power(1), GaussRat::from_ratio(-1, 2));
    ensure!(dh_normalization(3, 1) == minus_pi_half, "normalization {} != -pi/2", dh_normalization(3, 1));
    let two_pi = Scalar::monomial(Monomial::pi_power(1), GaussRat::from_int(-2));
    let cases = [
        ("t4_rho1", "rho1t", "-2*pi*(t+1)", &two_pi * &(&t() + &Scalar::one())),
        ("t4_rho2", "rho2t", "-2*pi", two_pi.clone()),
    ];
    let mut times = Vec::new();
    for (stem, fam, text, expect) in cases {
        let start = Instant::now();
        let mf = load(stem)?;
        let f = mf.family(fam).ok_or_else(|| format!("family {fam} missing"))?;
        let r = dh_density(&f.structure, 3, 1, mf.model.orientation(), mf.constant_type).map_err(err)?;
        let dt = start.elapsed();
        ensure!(r.density == expect, "{fam}: density {} != {}", r.density.factored(), expect.factored());
        ensure!(r.density.factored() == text, "{fam}: rendered {} != {text}", r.density.factored());
        ensure!(r.normalization == minus_pi_half, "{fam}: normalization {}", r.normalization);
        ensure!(r.is_real(), "{fam}: imaginary part {}", r.imaginary_part);
        ensure!(dt < Duration::from_secs(1), "{fam}: took {dt:?}");
        times.push(format!("{fam} = {text} in {dt:.1?}"));
    }
    Ok(times.join(", "))
}

fn c2_mukai_golden() -> Outcome {
    let top = Form::top(4);
    let mf = load("t4_rho1")?;
    let rho = mf.family("rho1t").ok_or("family rho1t missing")?.structure.rho().clone();
    let four_t1 = &Scalar::from(4) * &(&t() + &Scalar::one());
    let p = rho.reversal().wedge(&rho.conj()).map_err(err)?.part_of_degree(4);
    ensure!(p == top.scale(&four_t1), "sigma(rho1_t)^conj = {p}");
    ensure!(rho.mukai_form(&rho.conj()).map_err(err)? == p, "mukai_form disagrees with the explicit wedge");
    for tv in -2..=3i64 {
        let vals = [("t".to_string(), BigRational::from_integer(tv.into()))].into_iter().collect();
        let at = common::from_form(&rho.map_coeffs(|c| c.eval(&vals)));
        let conj: Dense = at.iter().map(C::conj).collect();
        let m = common::mukai(&at, &conj);
        ensure!(m == C::int(4 * (tv + 1), 0), "oracle pairing at t={tv}: {m:?}");
    }
    let mf2 = load("t4_rho2")?;
    let rho2 = mf2.form("rho2").ok_or("form rho2 missing")?.form_part();
    let p2 = rho2.mukai_form(&rho2.conj()).map_err(err)?;
    ensure!(p2 == top.scale(&Scalar::from(-4)), "sigma(rho2)^conj = {p2}");
    let d2 = common::from_form(&rho2);
    let conj2: Dense = d2.iter().map(C::conj).collect();
    ensure!(common::mukai(&d2, &conj2) == C::int(-4, 0), "oracle disagrees on rho2");
    Ok(format!("(rho1_t, conj) = {} e1234, (rho2, conj) = -4 e1234", four_t1.factored()))
}

fn c3_mukai_b_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sizes = [2, 4, 6, 8];
    let cases = 200;
    let mut oracle_checked = 0;
    for case in 0..cases {
        let n = sizes[case % sizes.len()];
        let phi = gen::form(&mut rng, n, 8, true);
        let psi = gen::form(&mut rng, n, 8, true);
        let b = gen::homogeneous(&mut rng, n, 2, 4, case % 2 == 1);
        let eb = b.exp_two_form().map_err(err)?;
        let before = phi.mukai(&psi).map_err(err)?;
        let after = (&eb ^ &phi).mukai(&(&eb ^ &psi)).map_err(err)?;
        ensure!(before == after, "case {case} on N={n}: {before} != {after}");
        if n <= 6 {
            let (dp, dq, db) = (common::from_form(&phi), common::from_form(&psi), common::from_form(&b));
            let de = common::exp2(&db);
            let o_before = common::mukai(&dp, &dq);
            let o_after = common::mukai(&common::wedge(&de, &dp), &common::wedge(&de, &dq));
            ensure!(o_before == o_after, "oracle fails B-invariance in case {case}");
            ensure!(o_before == common::scalar_to_c(&before), "library and oracle pairings differ in case {case}");
            oracle_checked += 1;
        }
    }
    Ok(format!("{cases} cases on N in {{2,4,6,8}}, {oracle_checked} cross-checked by the oracle"))
}

fn shipped_models() -> Result<Vec<(String, Model)>, String> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(models_dir())
        .map_err(err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "model"))
        .collect();
    paths.sort();
    for p in paths {
        let stem = p.file_stem().unwrap().to_string_lossy().to_string();
        if stem == "bad" {
            continue;
        }
        out.push((stem.clone(), load(&stem)?.model));
    }
    Ok(out)
}

fn c4_differential_soundness() -> Outcome {
    let mut checked = 0;
    let mut builtin = vec![
        ("torus3".to_string(), Model::torus(3)),
        ("heisenberg".to_string(), Model::heisenberg()),
        ("kodaira_thurston".to_string(), Model::kodaira_thurston()),
    ];
    builtin.extend(shipped_models()?);
    for (name, m) in &builtin {
        let dt = common::dtable_of(m);
        let h = common::from_form(m.h());
        for b in all_blades(m.n()) {
            let f = Form::term(m.n(), b, Scalar::one());
            ensure!(m.d(&m.d(&f)).is_zero(), "{name}: d^2 != 0 on {}", m.show(&f));
            ensure!(m.d_twisted(&m.d_twisted(&f)).is_zero(), "{name}: d_H^2 != 0 on {}", m.show(&f));
            let df = common::from_form(&f);
            let once = common::d_twisted(m.n(), &dt, &h, &df);
            ensure!(once == common::from_form(&m.d_twisted(&f)), "{name}: oracle d_H differs on {}", m.show(&f));
            ensure!(common::d_twisted(m.n(), &dt, &h, &once).iter().all(C::is_zero), "{name}: oracle d_H^2 != 0");
            checked += 1;
        }
    }
    let names = |k: usize| (1..=k).map(|i| format!("e{i}")).collect::<Vec<_>>();
    // d e1 = e2^e3, d e3 = e4^e5 gives d^2 e1 = -e2^e4^e5
    let mut table = vec![Form::zero(5); 5];
    table[0] = e(5, &[2, 3]);
    table[2] = e(5, &[4, 5]);
    let bad_d = Model::new("bad_d", names(5), table, Form::zero(5));
    ensure!(bad_d.is_err(), "model with d^2 != 0 was accepted");
    let mut table = vec![Form::zero(5); 5];
    table[2] = e(5, &[1, 2]);
    let bad_h = Model::new("bad_h", names(5), table, e(5, &[3, 4, 5]));
    ensure!(matches!(bad_h, Err(Error::NotClosed { .. })), "model with dH != 0 was not rejected as not closed: {bad_h:?}");
    let file = std::fs::read_to_string(models_dir().join("bad.model")).map_err(err)?;
    let parsed = parse_model(&file);
    ensure!(matches!(parsed, Err(Error::Validation { .. })), "bad.model loaded: {:?}", parsed.map(|m| m.model.name().to_string()));
    Ok(format!("{} models, {checked} basis elements, both invalid constructions rejected", builtin.len()))
}

fn random_closed_h(rng: &mut ChaCha8Rng, m: &Model) -> Model {
    if m.n() < 3 {
        return m.clone();
    }
    loop {
        let h = gen::homogeneous(rng, m.n(), 3, 3, false);
        if let Ok(t) = m.with_h(h) {
            return t;
        }
    }
}

fn kernel_basis(m: &Model) -> Vec<Form> {
    let blades = all_blades(m.n());
    m.dh_matrix(&blades, &blades).nullspace().iter().map(|v| Form::from_dense(m.n(), &blades, v)).collect()
}

fn c5_exp_lambda() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases = [Model::torus(2), Model::torus(3), Model::torus(4), Model::heisenberg(), Model::kodaira_thurston()];
    let cases = 60;
    let mut nontrivial = 0;
    for case in 0..cases {
        let base = &bases[case % bases.len()];
        let m1 = random_closed_h(&mut rng, base);
        let mut lambda = gen::homogeneous(&mut rng, m1.n(), 2, 3, false);
        let open: Vec<Form> =
            all_blades(m1.n()).into_iter().filter(|b| b.grade() == 2).map(|b| Form::term(m1.n(), b, Scalar::one())).filter(|f| !m1.d(f).is_zero()).collect();
        if !open.is_empty() {
            let c = Scalar::from(rng.random_range(1..4i64));
            lambda = &lambda + &open[case % open.len()].scale(&c);
        }
        let dl = m1.d(&lambda);
        if !dl.is_zero() {
            nontrivial += 1;
        }
        let m2 = m1.with_h(m1.h() + &dl).map_err(err)?;
        let (b1, b2) = (m1.twisted_cohomology(), m2.twisted_cohomology());
        ensure!(b1 == b2, "case {case} on {}: {b1} vs {b2}", m1.name());
        for z in kernel_basis(&m1) {
            let moved = m1.exp_lambda_transport(&lambda, &z).map_err(err)?;
            ensure!(m2.d_twisted(&moved).is_zero(), "case {case}: e^lambda does not carry closed forms");
        }
        if case < 15 {
            let o = common::twisted_betti(m2.n(), &common::dtable_of(&m2), &common::from_form(m2.h()));
            ensure!(o == (b2.even, b2.odd), "case {case}: oracle {o:?} vs {b2}");
        }
    }
    Ok(format!("{cases} (model, lambda) pairs, {nontrivial} with d(lambda) != 0"))
}

fn c6_twisted_oracle() -> Outcome {
    let t3 = Model::torus(3);
    let twisted = t3.with_h(e(3, &[1, 2, 3])).map_err(err)?;
    let zero = vec![common::zero_form(3); 3];
    let o_twisted = common::twisted_betti(3, &zero, &common::from_form(&e(3, &[1, 2, 3])));
    let o_plain = common::twisted_betti(3, &zero, &common::zero_form(3));
    ensure!(o_twisted == (3, 3) && o_plain == (4, 4), "oracle gave {o_twisted:?} and {o_plain:?}");
    ensure!(twisted.twisted_cohomology() == pair(3, 3), "T3 with H=e123: {}", twisted.twisted_cohomology());
    ensure!(t3.twisted_cohomology() == pair(4, 4), "T3 with H=0: {}", t3.twisted_cohomology());
    for m in [Model::heisenberg(), Model::kodaira_thurston(), load("heisenberg_twisted")?.model] {
        let o = common::twisted_betti(m.n(), &common::dtable_of(&m), &common::from_form(m.h()));
        let b = m.twisted_cohomology();
        ensure!(o == (b.even, b.odd), "{}: library {b} vs oracle {o:?}", m.name());
        let betti = common::betti(m.n(), &common::dtable_of(&m));
        if m.h().is_zero() {
            ensure!(m.betti_numbers() == betti, "{}: betti {:?} vs oracle {betti:?}", m.name(), m.betti_numbers());
        }
    }
    Ok("T3: (3,3) twisted, (4,4) untwisted, oracle agrees; nilmanifold cross-checks agree".into())
}

fn gauss_to_c(g: &GaussRat) -> C {
    C { re: g.re().clone(), im: g.im().clone() }
}

/// `γ(w)φ = ι_X φ + ξ ∧ φ` on dense forms, `w = (X, ξ)`.
fn oracle_clifford(n: usize, w: &[C], phi: &Dense) -> Dense {
    let mut out = common::zero_form(n);
    for i in 0..n {
        if !w[i].is_zero() {
            out = common::add(&out, &common::scale(&common::contract(n, i, phi), &w[i]));
        }
        if !w[n + i].is_zero() {
            let ei = common::basis(n, 1 << i);
            out = common::add(&out, &common::scale(&common::wedge(&ei, phi), &w[n + i]));
        }
    }
    out
}

/// `-½ Σ_i [γ(J∂_i)γ(e_i) + γ(Je_i)γ(∂_i)] φ`.
fn oracle_lift(j: &GCMap, phi: &Dense) -> Dense {
    let n = j.dim();
    let col = |c: usize| -> Vec<C> { (0..2 * n).map(|r| gauss_to_c(j.matrix().get(r, c))).collect() };
    let unit = |c: usize| -> Vec<C> { (0..2 * n).map(|r| if r == c { C::int(1, 0) } else { C::zero() }).collect() };
    let mut acc = common::zero_form(n);
    for i in 0..n {
        let a = oracle_clifford(n, &col(i), &oracle_clifford(n, &unit(n + i), phi));
        let b = oracle_clifford(n, &col(n + i), &oracle_clifford(n, &unit(i), phi));
        acc = common::add(&acc, &common::add(&a, &b));
    }
    common::scale(&acc, &C { re: BigRational::new((-1).into(), 2.into()), im: BigRational::from_integer(0.into()) })
}

fn proportional(a: &Dense, b: &Dense) -> bool {
    let Some(p) = b.iter().position(|c| !c.is_zero()) else { return false };
    if a[p].is_zero() {
        return false;
    }
    let ratio = &a[p] * &b[p].inv();
    a.iter().zip(b).all(|(x, y)| *x == &ratio * y)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn c7_gclinear() -> Outcome {
    let mut report = Vec::new();
    for half in [1usize, 2] {
        let big_n = 2 * half;
        let omega = (1..=half).fold(Form::zero(big_n), |acc, j| &acc + &e(big_n, &[2 * j - 1, 2 * j]));
        let i_omega = omega.scale(&Scalar::i());
        let dz = (1..=half).fold(Form::one(big_n), |acc, j| {
            &acc ^ &(&e(big_n, &[2 * j - 1]) + &e(big_n, &[2 * j]).scale(&Scalar::i()))
        });
        let structures = [
            ("J_omega", GCMap::symplectic(&omega).map_err(err)?, 0, common::exp2(&common::from_form(&i_omega))),
            ("J_complex", GCMap::standard_complex(big_n).map_err(err)?, half, common::from_form(&dz)),
        ];
        for (name, j, ty, spinor) in structures {
            j.validate().map_err(err)?;
            let l = j.i_eigenspace().map_err(err)?;
            ensure!(l.dim() == big_n && l.is_maximal_isotropic(), "{name} on R^{big_n}: eigenspace dimension {}", l.dim());
            let found = j.type_of().map_err(err)?;
            ensure!(found == ty, "{name} on R^{big_n}: type {found} != {ty}");
            let rho = j.pure_spinor().map_err(err)?;
            let dense = common::from_form(&rho);
            ensure!(proportional(&dense, &spinor), "{name} on R^{big_n}: pure spinor {rho} not proportional to expected");
            for v in l.basis() {
                let w: Vec<C> = v.iter().map(gauss_to_c).collect();
                ensure!(oracle_clifford(big_n, &w, &dense).iter().all(C::is_zero), "{name}: L does not annihilate the spinor");
            }
            let lifted = oracle_lift(&j, &dense);
            let expect = common::scale(&dense, &C::int(0, -(half as i64)));
            ensure!(lifted == expect, "{name} on R^{big_n}: lift does not act by -{half}i on the canonical line");
            let grading = j.uk_grading().map_err(err)?;
            for (k, basis) in &grading {
                let want = binomial(big_n, (half as i32 - k) as usize);
                ensure!(basis.len() == want, "{name} on R^{big_n}: dim U^{k} = {} != {want}", basis.len());
                for u in basis {
                    let du = common::from_form(u);
                    let ev = common::scale(&du, &C::int(0, -(*k as i64)));
                    ensure!(oracle_lift(&j, &du) == ev, "{name}: U^{k} element is not a -{k}i eigenvector");
                }
            }
            let top = grading.iter().find(|(k, _)| *k == half as i32).ok_or("missing top grade")?;
            ensure!(top.1.len() == 1 && proportional(&common::from_form(&top.1[0]), &dense), "{name}: U^n is not the spinor line");
            let back = GCMap::from_eigenspace(&l).map_err(err)?;
            ensure!(back.matrix() == j.matrix(), "{name}: J not recovered from its eigenspace");
        }
        report.push(format!("R^{big_n}"));
    }
    Ok(format!("J_omega and J_complex on {}", report.join(" and ")))
}

fn c8_clifford() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases = 200;
    for case in 0..cases {
        let n = 1 + case % 6;
        let v = gen::wvec(&mut rng, n, case % 3 != 0);
        let phi = gen::form(&mut rng, n, 10, true);
        let lhs = phi.clifford(&v).and_then(|p| p.clifford(&v)).map_err(err)?;
        let rhs = phi.scale(&v.self_pairing());
        ensure!(lhs == rhs, "case {case} on N={n}: v.v.phi = {lhs}, xi(X) phi = {rhs}");
        if case % 4 == 0 {
            let w: Vec<C> = v.coords().iter().map(common::scalar_to_c).collect();
            let dphi = common::from_form(&phi);
            ensure!(common::from_form(&phi.clifford(&v).map_err(err)?) == oracle_clifford(n, &w, &dphi), "case {case}: Clifford action differs from the oracle");
        }
    }
    Ok(format!("{cases} random (v, phi)"))
}

fn c9_cartan() -> Outcome {
    let mut lines = Vec::new();
    for m in 2..=4usize {
        let model = Model::torus(m);
        let act = TorusAction::coordinate(&model, &[0]).map_err(err)?;
        let quotient = Model::torus(m - 1).twisted_cohomology();
        for trunc in [2u32, 3] {
            let coh = act.equivariant_cohomology(&act.h_g(trunc), trunc).map_err(err)?;
            ensure!(coh.last() == quotient, "T^{m} trunc {trunc}: {} != {quotient}", coh.last());
            ensure!(coh.stable(), "T^{m} trunc {trunc}: not stable {:?}", coh.ranks);
            let zero = vec![common::zero_form(m); m];
            let o = common::circle_equivariant_ranks(m, &zero, &common::zero_form(m), &common::zero_form(m), 0, trunc as usize);
            ensure!(o == (quotient.even, quotient.odd), "T^{m} trunc {trunc}: oracle {o:?}");
        }
        lines.push(format!("T{m} -> {quotient}"));
    }
    let h = e(4, &[2, 3, 4]);
    let model = Model::torus(4).with_h(h.clone()).map_err(err)?;
    let act = TorusAction::coordinate(&model, &[0]).map_err(err)?;
    let conn = Connection::coordinate(&act).map_err(err)?;
    let quotient = conn.quotient_with_twist().map_err(err)?;
    let expect = Model::torus(3).with_h(e(3, &[1, 2, 3])).map_err(err)?.twisted_cohomology();
    ensure!(quotient.twisted_cohomology() == expect && expect == pair(3, 3), "quotient twisted cohomology {}", quotient.twisted_cohomology());
    for trunc in [2u32, 3] {
        let coh = act.equivariant_cohomology(&act.h_g(trunc), trunc).map_err(err)?;
        ensure!(coh.last() == expect && coh.stable(), "twisted T4 trunc {trunc}: {:?}", coh.ranks);
        let zero = vec![common::zero_form(4); 4];
        let o = common::circle_equivariant_ranks(4, &zero, &common::from_form(&h), &common::zero_form(4), 0, trunc as usize);
        ensure!(o == (3, 3), "twisted T4 trunc {trunc}: oracle {o:?}");
    }
    lines.push("T4 with H=e234 -> (3,3)".into());
    Ok(lines.join(", "))
}

fn c10_hamiltonian() -> Outcome {
    let t2 = Model::torus(2);
    let xi = vec![vec![Scalar::one(), Scalar::zero()]];
    let rho = e(2, &[1, 2]).scale(&Scalar::i()).exp_two_form().map_err(err)?;
    let act = TorusAction::new(&t2, xi.clone(), vec![e(2, &[2])], vec![]).map_err(err)?;
    act.hamiltonian_check(&rho).map_err(err)?;
    let bare = TorusAction::new(&t2, xi, vec![], vec![]).map_err(err)?;
    let residual = bare.hamiltonian_report(&rho).map_err(err)?.residuals[0].clone();
    let expect = e(2, &[2]).scale(&-Scalar::i());
    ensure!(residual == expect, "residual with m=0 is {residual}");
    let msg = match bare.hamiltonian_check(&rho) {
        Err(Error::Hamiltonian(msg)) => msg,
        other => return Err(format!("m=0 should fail: {other:?}")),
    };
    ensure!(msg.contains(&format!("residual {}", t2.show(&expect))), "unexpected message {msg}");

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let bases = [Model::torus(3), Model::torus(4), Model::heisenberg(), Model::kodaira_thurston(), Model::torus(5)];
    let cases = 120;
    for case in 0..cases {
        let m = random_closed_h(&mut rng, &bases[case % bases.len()]);
        let kernel = kernel_basis(&m);
        let mut a = Form::zero(m.n());
        for z in &kernel {
            a = &a + &z.scale(&Scalar::from(gen::gauss(&mut rng, true)));
        }
        if a.is_zero() {
            a = kernel[0].clone();
        }
        let s = m.sigma_twist(&a).map_err(|e| format!("case {case} on {}: {e}", m.name()))?;
        let r = common::d_twisted(m.n(), &common::dtable_of(&m), &common::scale(&common::from_form(m.h()), &C::int(-1, 0)), &common::from_form(&s));
        ensure!(r.iter().all(C::is_zero), "case {case}: oracle finds sigma(a) not d_(-H)-closed");
    }

    for half in 1..=3usize {
        let big_n = 2 * half;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + half as u64);
        for scaled in [false, true] {
            let omega = (1..=half).fold(Form::zero(big_n), |acc, j| {
                let c = if scaled { Scalar::from(GaussRat::from_parts(rng.random_range(1..5), 0)) } else { Scalar::one() };
                &acc + &e(big_n, &[2 * j - 1, 2 * j]).scale(&c)
            });
            let rho = omega.scale(&Scalar::i()).exp_two_form().map_err(err)?;
            let g = gcy_check(&Model::torus(big_n), &rho, &[]).map_err(err)?;
            let vol = volume_form(&g);
            let mut power = common::basis(big_n, 0);
            let dw = common::from_form(&omega);
            for _ in 0..half {
                power = common::wedge(&power, &dw);
            }
            let fact = (1..=half as i64).product::<i64>();
            let expect = common::scale(&power, &C { re: BigRational::new(1.into(), fact.into()), im: BigRational::from_integer(0.into()) });
            ensure!(common::from_form(&vol) == expect, "n={half}: volume {vol} != omega^n/n!");
        }
    }
    Ok(format!("T2 datum passes, m=0 residual {}, {cases} sigma-closedness cases, volume forms n<=3", t2.show(&expect)))
}


fn c11_formality() -> Outcome {
    let mut passing = 0;
    let mut nontrivial = 0;
    let mut excluded = Vec::new();
    let mut extensions = 0;
    let candidates: Vec<(Model, Form, Form)> = {
        let t2 = Model::torus(2);
        let t4 = Model::torus(4);
        let t4h = t4.with_h(e(4, &[1, 2, 3])).map_err(err)?;
        let w2 = e(2, &[1, 2]).scale(&Scalar::i()).exp_two_form().map_err(err)?;
        let w4 = (&e(4, &[1, 2]) + &e(4, &[3, 4])).scale(&Scalar::i()).exp_two_form().map_err(err)?;
        let dz = &(&e(4, &[1]) + &e(4, &[2]).scale(&Scalar::i())) ^ &(&e(4, &[3]) + &e(4, &[4]).scale(&Scalar::i()));
        let mixed = &e(4, &[1, 2]).scale(&Scalar::i()).exp_two_form().map_err(err)? ^ &(&e(4, &[3]) + &e(4, &[4]).scale(&Scalar::i()));
        vec![
            (t2.clone(), w2, e(2, &[2])),
            (t4.clone(), w4, e(4, &[2])),
            (t4.clone(), dz.clone(), e(4, &[2])),
            (t4.clone(), mixed, e(4, &[2])),
            (t4h, dz, e(4, &[2])),
        ]
    };
    for (idx, (model, rho, formal_m)) in candidates.iter().enumerate() {
        let n = model.n();
        let gcy = gcy_check(model, rho, &[]).map_err(err)?;
        let j = GCMap::from_eigenspace(&gcequiv::gclinear::annihilator(gcy.rho()).map_err(err)?.space).map_err(err)?;
        let ddbar = model.ddbar_lemma_check(&j).map_err(err)?;
        let directions: Vec<Vec<Scalar>> = vec![
            vec![Scalar::zero(); n],
            (0..n).map(|i| if i == 0 { Scalar::one() } else { Scalar::zero() }).collect(),
            (0..n).map(|i| if i < 2 { Scalar::one() } else { Scalar::zero() }).collect(),
        ];
        for xi in directions {
            // moment one-forms: zero (the only exact choice on a torus) and a closed non-exact one
            for m in [Form::zero(n), formal_m.clone()] {
                let Ok(act) = TorusAction::new(model, vec![xi.clone()], vec![m.clone()], vec![]) else { continue };
                if act.hamiltonian_check(rho).is_err() {
                    continue;
                }
                let xi_text = xi.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
                let label = format!("candidate {} on {} xi=({xi_text}) m={}", idx + 1, model.name(), model.show(&m));
                if !m.is_zero() {
                    excluded.push(format!("{label} (moment map not exact)"));
                    continue;
                }
                if !ddbar.holds() {
                    excluded.push(format!("{label} (ddbar-lemma fails)"));
                    continue;
                }
                for trunc in [2u32, 3] {
                    let coh = act.equivariant_cohomology(&act.h_g(trunc), trunc).map_err(err)?;
                    ensure!(coh.free_module(), "{label} trunc {trunc}: {:?} vs free {:?}", coh.ranks, coh.free_pattern);
                }
                for phi in kernel_basis(model) {
                    match act.canonical_extension(&j, &phi) {
                        Ok(ext) => {
                            let r = act.big_d(&ext.with_trunc(ext.trunc() + 1)).map_err(err)?;
                            ensure!(r.is_zero() && !r.overflowed(), "{label}: extension of {} has residual {r}", model.show(&phi));
                            extensions += 1;
                        }
                        Err(Error::Precondition { .. }) => {}
                        Err(e) => return Err(format!("{label}: {e}")),
                    }
                }
                passing += 1;
                if xi.iter().any(|c| !c.is_zero()) {
                    nontrivial += 1;
                }
            }
        }
    }
    ensure!(passing > 0, "no candidate datum passed the filters");
    ensure!(extensions > 0, "no canonical extension was computed");
    Ok(format!(
        "{passing} strict Hamiltonian data ({nontrivial} with nontrivial action) free at trunc 2 and 3, {extensions} extensions D_G-closed; excluded: {}",
        if excluded.is_empty() { "none".to_string() } else { excluded.join("; ") }
    ))
}

fn c12_gamma() -> Outcome {
    let t3 = Model::torus(3);
    let act = TorusAction::coordinate(&t3, &[0]).map_err(err)?.with_moment(vec![], vec![e(3, &[2])]).map_err(err)?;
    let conn = Connection::new(&act, vec![e(3, &[1])]).map_err(err)?;
    let gamma = conn.gamma().map_err(err)?;
    ensure!(gamma == e(3, &[1, 2]), "Gamma = {}", t3.show(&gamma));
    let contracted = gamma.contract(0).map_err(err)?;
    ensure!(contracted == e(3, &[2]), "iota_1 Gamma = {}", t3.show(&contracted));
    let twist = conn.basic_twist().map_err(err)?;
    ensure!(twist.is_zero(), "basic twist {}", t3.show(&twist));
    let quotient = conn.quotient_with_twist().map_err(err)?;
    ensure!(quotient.h().is_zero(), "descended H = {}", quotient.show(quotient.h()));
    let mf = load("t3_gamma")?;
    let conn_file = mf.connection.as_ref().ok_or("t3_gamma has no connection")?;
    ensure!(conn_file.gamma().map_err(err)? == gamma, "model file disagrees");
    Ok("Gamma = e1^e2, iota_1 Gamma = e2, descended H = 0".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("DH densities of the rho1 and rho2 families", c1_dh_golden),
        ("Mukai pairings of the reduced spinors", c2_mukai_golden),
        ("Mukai pairing B-invariance", c3_mukai_b_invariance),
        ("d^2 = 0 and d_H^2 = 0, invalid models rejected", c4_differential_soundness),
        ("exp(lambda) preserves twisted Betti pairs", c5_exp_lambda),
        ("twisted cohomology against the dense oracle", c6_twisted_oracle),
        ("generalized complex linear algebra", c7_gclinear),
        ("Clifford relation", c8_clifford),
        ("Cartan map on free circle actions", c9_cartan),
        ("Hamiltonian check, sigma-closedness, volume forms", c10_hamiltonian),
        ("free-module pattern and canonical extensions", c11_formality),
        ("Gamma and descended twist on T3", c12_gamma),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let dt = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS {name} [{dt:.2?}] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL {name} [{dt:.2?}] {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
