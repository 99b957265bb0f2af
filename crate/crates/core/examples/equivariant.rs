//! Circle actions on invariant models: truncated equivariant cohomology,
//! the Cartan map, the correction form Γ and the Kirwan map.

use gcequiv::cartan::{kirwan_map, Connection, EqForm, ModelMorphism, TorusAction};
use gcequiv::model::Model;
use gcequiv::Form;

fn main() -> gcequiv::Result<()> {
    for m in 2..=4 {
        let act = TorusAction::coordinate(&Model::torus(m), &[0])?;
        let coh = act.equivariant_cohomology(&act.h_g(3), 3)?;
        let ranks: Vec<String> = coh.ranks.iter().map(|r| r.to_string()).collect();
        println!("S1 on T{m}: ranks by truncation {}, stable {}", ranks.join(" "), coh.stable());
    }

    let t4 = Model::torus(4).with_h(Form::monomial(4, &[1, 2, 3]))?;
    let act = TorusAction::coordinate(&t4, &[0])?;
    let conn = Connection::coordinate(&act)?;
    let quotient = conn.quotient_with_twist()?;
    println!(
        "S1 on T4 with H = e2^e3^e4: equivariant {}, quotient {} with H = {}",
        act.equivariant_cohomology(&act.h_g(3), 3)?.last(),
        quotient.twisted_cohomology(),
        quotient.show(quotient.h())
    );

    let t3 = Model::torus(3);
    let act = TorusAction::coordinate(&t3, &[0])?.with_moment(vec![], vec![Form::monomial(3, &[1])])?;
    let conn = Connection::new(&act, vec![Form::monomial(3, &[0])])?;
    println!("T3 with alpha = e2: Gamma = {}, basic twist {}", t3.show(&conn.gamma()?), t3.show(&conn.basic_twist()?));

    let plain = Connection::coordinate(&TorusAction::coordinate(&t3, &[0])?)?;
    let eta = EqForm::from_form(&Form::monomial(3, &[1, 2]), 1, 2);
    println!("Cartan map of e2^e3: {}", t3.show(&plain.cartan_map(&eta)?));

    let sub = ModelMorphism::restriction(&t3, &[2])?;
    let on_sub = Connection::coordinate(&TorusAction::coordinate(sub.target(), &[0])?)?;
    let reduced = on_sub.quotient_model()?;
    for f in [Form::monomial(3, &[1]), Form::monomial(3, &[1, 2])] {
        let image = kirwan_map(&sub, &on_sub, &EqForm::from_form(&f, 1, 2))?;
        println!("Kirwan map of {} through e3 = 0: {}", t3.show(&f), reduced.show(&image));
    }
    Ok(())
}
