//! Duistermaat-Heckman densities of generalized Calabi-Yau families on a
//! reduced four-torus.

use std::collections::BTreeMap;

use gcequiv::gcy::{dh_density, gcy_check, quotient_family, volume_form};
use gcequiv::model::Model;
use gcequiv::{Form, Scalar};
use num_rational::BigRational;

fn main() -> gcequiv::Result<()> {
    let t4 = Model::torus(4);
    let c = Form::monomial(4, &[0, 1]);
    let i = Scalar::i();
    let dz2 = &Form::monomial(4, &[2]) + &Form::monomial(4, &[3]).scale(&i);
    let dz1 = &Form::monomial(4, &[0]) + &Form::monomial(4, &[1]).scale(&i);
    let rho1 = &c.scale(&-i.clone()).exp_two_form()? ^ &dz2;
    let rho2 = &dz1 ^ &dz2;

    let g = gcy_check(&t4, &rho1, &[])?;
    println!("rho1: type {:?}, volume form {}", g.constant_type(), t4.show(&volume_form(&g)));

    let samples: Vec<BTreeMap<String, BigRational>> =
        (0..2).map(|t| [("t".to_string(), BigRational::from_integer(t.into()))].into_iter().collect()).collect();
    for (label, rho, orientation) in [("rho1", &rho1, 1), ("rho2", &rho2, -1)] {
        let fam = quotient_family(&t4, rho, &c, "t", &samples)?;
        let r = dh_density(&fam, 3, 1, orientation, None)?;
        println!(
            "{label}: pairing {}, density {} (normalization {}, degree {} <= {})",
            fam.pairing().factored(),
            r.density.factored(),
            r.normalization.factored(),
            r.degree(),
            r.degree_bound
        );
    }
    Ok(())
}
