//! Linear generalized complex structures: eigenspaces, type, pure spinors,
//! the `U^k` decomposition and B-transforms.

use gcequiv::gclinear::GCMap;
use gcequiv::Form;

fn main() -> gcequiv::Result<()> {
    let names: Vec<String> = (1..=4).map(|i| format!("e{i}")).collect();
    let omega = &Form::monomial(4, &[0, 1]) + &Form::monomial(4, &[2, 3]);
    let structures = [
        ("symplectic", GCMap::symplectic(&omega)?),
        ("complex", GCMap::standard_complex(4)?),
        ("product", GCMap::direct_sum(&GCMap::symplectic(&Form::monomial(2, &[0, 1]))?, &GCMap::standard_complex(2)?)?),
    ];
    for (label, j) in &structures {
        j.validate()?;
        let l = j.i_eigenspace()?;
        println!("{label}: dim L = {}, type {}", l.dim(), j.type_of()?);
        println!("  pure spinor {}", j.pure_spinor()?.display_with(&names));
        let dims: Vec<String> = j.uk_grading()?.iter().map(|(k, b)| format!("U^{k}:{}", b.len())).collect();
        println!("  {}", dims.join(" "));
    }
    let b = Form::monomial(4, &[0, 2]);
    let moved = structures[1].1.b_transform(&b)?;
    println!("B-transformed complex structure: type {}, spinor {}", moved.type_of()?, moved.pure_spinor()?.display_with(&names));
    Ok(())
}
