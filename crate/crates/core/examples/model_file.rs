//! Loading a model file and running the command-line subcommands in-process.

use gcequiv::cli::{run, Options, SUBCOMMANDS};
use gcequiv::modelfile::parse_model;

const MODEL: &str = "\
model t4_circle
generators e1 e2 e3 e4
H = e2^e3^e4
xi 1 = D(e1)
theta 1 = e1
structure J = complex standard
form h = e2^e3^e4
";

fn main() {
    let mf = parse_model(MODEL).expect("valid model");
    println!("canonical form:\n{}", mf.to_canonical());
    let opts = Options { trunc: Some(2), ..Options::default() };
    for cmd in SUBCOMMANDS {
        let out = run(cmd, MODEL, &opts);
        println!("{cmd} [{}]: {}", out.code, out.render(false));
    }
    let broken = run("cohomology", "model m\ngenerators e1\nH = e1 ^ y\n", &Options::default());
    println!("broken file [{}]: {}", broken.code, broken.render(false));
}
