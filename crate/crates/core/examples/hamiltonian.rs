//! Hamiltonian data for a circle action on the symplectic two-torus, the
//! generalized equivariant differential and canonical extensions.

use gcequiv::cartan::{EqForm, TorusAction};
use gcequiv::gclinear::GCMap;
use gcequiv::model::Model;
use gcequiv::{Form, Scalar};

fn main() -> gcequiv::Result<()> {
    let t2 = Model::torus(2);
    let omega = Form::monomial(2, &[0, 1]);
    let rho = omega.scale(&Scalar::i()).exp_two_form()?;
    let xi = vec![vec![Scalar::one(), Scalar::zero()]];

    let bare = TorusAction::new(&t2, xi.clone(), vec![], vec![])?;
    if let Err(e) = bare.hamiltonian_check(&rho) {
        println!("without a moment map: {e}");
    }
    let act = TorusAction::new(&t2, xi, vec![Form::monomial(2, &[1])], vec![])?;
    act.hamiltonian_check(&rho)?;
    println!("with d mu = e2 the datum is Hamiltonian");

    let gen = act.generalized_cohomology(3)?;
    println!("D_G cohomology by truncation {:?}", gen.ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>());

    let gamma = EqForm::from_form(&Form::monomial(2, &[0]), 1, 3);
    println!("conjugation identity holds: {}", act.conjugation_residual(&gamma, 3)?.is_zero());

    let j = GCMap::symplectic(&omega)?;
    let ext = act.canonical_extension(&j, &Form::monomial(2, &[1]))?;
    println!("canonical extension of e2: {}", ext.display_with(t2.names()));
    Ok(())
}
