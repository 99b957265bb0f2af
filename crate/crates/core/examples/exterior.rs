//! Forms with Gaussian-rational coefficients: wedge, contraction, Mukai
//! pairing and the Clifford action of `V ⊕ V*`.

use gcequiv::{Form, Scalar, WVec};

fn e(n: usize, idx: &[usize]) -> Form {
    Form::monomial(n, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
}

fn main() -> gcequiv::Result<()> {
    let n = 4;
    let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let show = |f: &Form| f.display_with(&names);

    let dz1 = &e(n, &[1]) + &e(n, &[2]).scale(&Scalar::i());
    let dz2 = &e(n, &[3]) + &e(n, &[4]).scale(&Scalar::i());
    let rho = &dz1 ^ &dz2;
    println!("rho = dz1^dz2 = {}", show(&rho));
    println!("(rho, conj rho) = {}", rho.mukai(&rho.conj())?);

    let b = &e(n, &[1, 3]) + &e(n, &[2, 4]).scale(&Scalar::from(2));
    let eb = b.exp_two_form()?;
    println!("exp(B) = {}", show(&eb));
    let moved = &eb ^ &rho;
    println!("(e^B rho, conj e^B rho) = {}", moved.mukai(&moved.conj())?);

    // X = d/de1, xi = e2
    let v = WVec::new(
        vec![Scalar::one(), Scalar::zero(), Scalar::zero(), Scalar::zero()],
        vec![Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::zero()],
    );
    let once = rho.clifford(&v)?;
    println!("v.rho = {}", show(&once));
    println!("v.v.rho = {}  (xi(X) = {})", show(&once.clifford(&v)?), v.self_pairing());
    println!("iota_1 rho = {}", show(&rho.contract(0)?));
    Ok(())
}
