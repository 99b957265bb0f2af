//! Twisted cohomology of invariant models, the `exp(λ)` isomorphism and the
//! ddbar-lemma test.

use gcequiv::gclinear::GCMap;
use gcequiv::model::Model;
use gcequiv::Form;

fn main() -> gcequiv::Result<()> {
    let t3 = Model::torus(3);
    println!("T3: {}", t3.twisted_cohomology());
    let twisted = t3.with_h(Form::top(3))?;
    println!("T3 with H = e1^e2^e3: {}", twisted.twisted_cohomology());

    let h = Model::heisenberg();
    println!("Heisenberg Betti numbers {:?}", h.betti_numbers());

    let kt = Model::kodaira_thurston();
    let lambda = Form::monomial(4, &[2, 3]);
    let dl = kt.d(&lambda);
    println!("KT: d(e3^e4) = {}", kt.show(&dl));
    let shifted = kt.with_h(dl)?;
    println!("KT: {} untwisted, {} twisted by d(lambda)", kt.twisted_cohomology(), shifted.twisted_cohomology());

    let report = kt.ddbar_lemma_check(&GCMap::standard_complex(4)?)?;
    match &report.witness {
        Some(w) => println!("KT ddbar-lemma fails, witness {}", kt.show(w)),
        None => println!("KT ddbar-lemma holds"),
    }
    let t4 = Model::torus(4);
    println!("T4 ddbar-lemma holds: {}", t4.ddbar_lemma_check(&GCMap::standard_complex(4)?)?.holds());
    Ok(())
}
