//! Subcommand dispatch producing JSON.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a parse or usage error.

use serde_json::{json, Map, Value};

use crate::cartan::{kirwan_map, Connection, EqForm, ModelMorphism, TorusAction};
use crate::error::{Error, Result};
use crate::form::Form;
use crate::gclinear::annihilator;
use crate::gcy::dh_density;
use crate::model::Model;
use crate::modelfile::{parse_model, ModelFile, NamedStructure};

pub const SUBCOMMANDS: [&str; 10] =
    ["validate", "cohomology", "gclinear", "grading", "equivariant", "cartanmap", "kirwan", "dh", "ddbar", "extension"];

/// Flags shared by all subcommands.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub trunc: Option<u32>,
    pub pretty: bool,
    pub orientation: Option<i32>,
    pub structure: Option<String>,
    pub form: Option<String>,
    pub family: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub json: Value,
}

impl Outcome {
    pub fn render(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(&self.json).expect("serializable")
        } else {
            serde_json::to_string(&self.json).expect("serializable")
        }
    }
}

pub fn error_json(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(e.kind()));
    obj.insert("message".into(), json!(e.to_string()));
    match e {
        Error::Parse { line, col, .. } => {
            obj.insert("line".into(), json!(line));
            obj.insert("col".into(), json!(col));
        }
        Error::Validation { line, .. } => {
            obj.insert("line".into(), json!(line));
        }
        _ => {}
    }
    json!({ "error": obj })
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_parse() || matches!(e, Error::Usage(_)) {
        2
    } else {
        1
    }
}

/// Runs `cmd` on the model-file text.
pub fn run(cmd: &str, text: &str, opts: &Options) -> Outcome {
    let result = if SUBCOMMANDS.contains(&cmd) {
        parse_model(text).and_then(|mf| dispatch(cmd, &mf, opts))
    } else {
        Err(Error::Usage(format!("unknown subcommand '{cmd}'; expected one of {}", SUBCOMMANDS.join(", "))))
    };
    match result {
        Ok(json) => Outcome { code: 0, json },
        Err(e) => Outcome { code: exit_code(&e), json: error_json(&e) },
    }
}

fn dispatch(cmd: &str, mf: &ModelFile, opts: &Options) -> Result<Value> {
    match cmd {
        "validate" => validate(mf),
        "cohomology" => Ok(cohomology(&mf.model)),
        "gclinear" => each_structure(mf, opts, gclinear),
        "grading" => each_structure(mf, opts, grading),
        "ddbar" => each_structure(mf, opts, |mf, s| ddbar(&mf.model, s)),
        "equivariant" => equivariant(mf, opts),
        "cartanmap" => cartanmap(mf, opts),
        "kirwan" => kirwan(mf, opts),
        "dh" => dh(mf, opts),
        "extension" => extension(mf, opts),
        _ => unreachable!("checked against SUBCOMMANDS"),
    }
}

fn show(m: &Model, f: &Form) -> String {
    f.display_with(m.names())
}

fn validate(mf: &ModelFile) -> Result<Value> {
    let m = &mf.model;
    m.verify_nilpotent()?;
    let mut out = Map::new();
    out.insert("model".into(), json!(m.name()));
    out.insert("generators".into(), json!(m.names()));
    out.insert("h".into(), json!(show(m, m.h())));
    out.insert("valid".into(), json!(true));
    let mut structures = Vec::new();
    for s in &mf.structures {
        let mut o = Map::new();
        o.insert("name".into(), json!(s.name));
        o.insert("type".into(), json!(s.map.type_of()?));
        if let (Some(rho), Some(act)) = (&s.spinor, &mf.action) {
            let rep = act.hamiltonian_report(rho)?;
            o.insert("hamiltonian".into(), json!(rep.ok()));
            let residuals: Vec<String> = rep.residuals.iter().map(|r| show(m, r)).collect();
            o.insert("hamiltonian_residuals".into(), json!(residuals));
        }
        structures.push(Value::Object(o));
    }
    out.insert("structures".into(), Value::Array(structures));
    if let Some(act) = &mf.action {
        out.insert("torus_rank".into(), json!(act.k()));
        out.insert("d_g_squared_zero".into(), json!(act.big_d_square_residual().is_zero()));
    }
    let fams: Vec<Value> = mf
        .families
        .iter()
        .map(|f| json!({ "name": f.name, "pairing": f.structure.pairing().to_string() }))
        .collect();
    out.insert("families".into(), Value::Array(fams));
    Ok(Value::Object(out))
}

fn cohomology(m: &Model) -> Value {
    let b = m.twisted_cohomology();
    if m.h().is_zero() {
        json!({ "even": b.even, "odd": b.odd, "betti": m.betti_numbers() })
    } else {
        json!({ "even": b.even, "odd": b.odd })
    }
}

fn pick_structures<'a>(mf: &'a ModelFile, opts: &Options) -> Result<Vec<&'a NamedStructure>> {
    match &opts.structure {
        Some(name) => mf
            .structure(name)
            .map(|s| vec![s])
            .ok_or_else(|| Error::Usage(format!("no structure named '{name}'"))),
        None if mf.structures.is_empty() => Err(Error::Usage("the model file declares no structure".into())),
        None => Ok(mf.structures.iter().collect()),
    }
}

fn each_structure(mf: &ModelFile, opts: &Options, f: impl Fn(&ModelFile, &NamedStructure) -> Result<Value>) -> Result<Value> {
    let items = pick_structures(mf, opts)?.into_iter().map(|s| f(mf, s)).collect::<Result<Vec<_>>>()?;
    Ok(json!({ "structures": items }))
}

fn gclinear(mf: &ModelFile, s: &NamedStructure) -> Result<Value> {
    let m = &mf.model;
    s.map.validate()?;
    let l = s.map.i_eigenspace()?;
    let rho = s.map.pure_spinor()?;
    let ann = annihilator(&rho)?;
    let basis: Vec<Vec<String>> = l.basis().iter().map(|v| v.iter().map(ToString::to_string).collect()).collect();
    Ok(json!({
        "name": s.name,
        "type": s.map.type_of()?,
        "eigenspace": basis,
        "pure_spinor": show(m, &rho),
        "maximal_isotropic": ann.maximal_isotropic,
        "transverse": ann.transverse,
        "nondegenerate": ann.nondegenerate,
    }))
}

fn grading(_mf: &ModelFile, s: &NamedStructure) -> Result<Value> {
    let dims: Vec<Value> = s.map.uk_grading()?.iter().map(|(k, b)| json!({ "k": k, "dim": b.len() })).collect();
    Ok(json!({ "name": s.name, "grading": dims }))
}

fn ddbar(m: &Model, s: &NamedStructure) -> Result<Value> {
    let r = m.ddbar_lemma_check(&s.map)?;
    Ok(json!({
        "name": s.name,
        "holds": r.holds(),
        "ker_del_im_delbar": r.ker_del_im_delbar,
        "im_del_ker_delbar": r.im_del_ker_delbar,
        "im_delbar_del": r.im_delbar_del,
        "witness": r.witness.as_ref().map(|w| show(m, w)),
    }))
}

fn require_action(mf: &ModelFile) -> Result<&TorusAction> {
    mf.action.as_ref().ok_or_else(|| Error::Usage("the model file declares no action (xi lines)".into()))
}

fn require_connection(mf: &ModelFile) -> Result<&Connection> {
    mf.connection.as_ref().ok_or_else(|| Error::Usage("the model file declares no connection (theta lines)".into()))
}

fn pick_forms<'a>(mf: &'a ModelFile, opts: &'a Options) -> Result<Vec<(&'a str, &'a EqForm)>> {
    match &opts.form {
        Some(name) => {
            mf.form(name).map(|f| vec![(name.as_str(), f)]).ok_or_else(|| Error::Usage(format!("no form named '{name}'")))
        }
        None => Ok(mf.forms.iter().map(|(n, f)| (n.as_str(), f)).collect()),
    }
}

fn ranks_json(r: &[crate::model::BettiPair]) -> Value {
    Value::Array(r.iter().enumerate().map(|(t, b)| json!({ "trunc": t, "even": b.even, "odd": b.odd })).collect())
}

fn equivariant(mf: &ModelFile, opts: &Options) -> Result<Value> {
    let act = require_action(mf)?;
    let trunc = opts.trunc.unwrap_or(mf.n() as u32);
    let coh = act.equivariant_cohomology(&act.h_g(trunc), trunc)?;
    let mut out = Map::new();
    out.insert("trunc".into(), json!(trunc));
    out.insert("ranks".into(), ranks_json(&coh.ranks));
    out.insert("free_pattern".into(), ranks_json(&coh.free_pattern));
    out.insert("free_module".into(), json!(coh.free_module()));
    out.insert("stable".into(), json!(coh.stable()));
    if (0..act.k()).any(|j| !act.mu_diff(j).is_zero()) {
        let g = act.generalized_cohomology(trunc)?;
        out.insert("generalized_ranks".into(), ranks_json(&g.ranks));
        out.insert("generalized_free_module".into(), json!(g.free_module()));
    }
    Ok(Value::Object(out))
}

fn cartanmap(mf: &ModelFile, opts: &Options) -> Result<Value> {
    let conn = require_connection(mf)?;
    let m = &mf.model;
    let mut images = Vec::new();
    for (name, eta) in pick_forms(mf, opts)? {
        let image = conn.cartan_map(eta)?;
        let mut o = Map::new();
        o.insert("form".into(), json!(name));
        o.insert("image".into(), json!(show(m, &image)));
        if let (Ok(q), Ok(d)) = (conn.quotient_model(), conn.descend(&image)) {
            o.insert("descended".into(), json!(d.display_with(q.names())));
        }
        images.push(Value::Object(o));
    }
    let mut out = Map::new();
    out.insert("images".into(), Value::Array(images));
    if let Ok(g) = conn.gamma() {
        out.insert("gamma".into(), json!(show(m, &g)));
        let twist = conn.basic_twist()?;
        out.insert("basic_twist".into(), json!(show(m, &twist)));
        if let Ok(q) = conn.quotient_with_twist() {
            out.insert("quotient_generators".into(), json!(q.names()));
            out.insert("quotient_h".into(), json!(q.h().display_with(q.names())));
            let b = q.twisted_cohomology();
            out.insert("quotient_cohomology".into(), json!({ "even": b.even, "odd": b.odd }));
        }
    }
    Ok(Value::Object(out))
}

fn kirwan(mf: &ModelFile, opts: &Options) -> Result<Value> {
    let act = require_action(mf)?;
    let conn = require_connection(mf)?;
    let m = &mf.model;
    let (sub, conn_sub) = match &mf.submodel {
        None => (ModelMorphism::identity(m), conn.clone()),
        Some(vanish) => {
            let sub = ModelMorphism::restriction(m, vanish)?;
            let kept: Vec<usize> = (0..m.n()).filter(|i| !vanish.contains(i)).collect();
            let xi = (0..act.k()).map(|j| kept.iter().map(|&i| act.xi(j)[i].clone()).collect()).collect();
            let pull = |f: &Form| sub.pullback(f);
            let mu = (0..act.k()).map(|j| pull(act.mu_diff(j))).collect::<Result<Vec<_>>>()?;
            let alpha = (0..act.k()).map(|j| pull(act.alpha(j))).collect::<Result<Vec<_>>>()?;
            let act_sub = TorusAction::new(sub.target(), xi, mu, alpha)?;
            let theta = (0..act.k()).map(|j| pull(conn.theta(j))).collect::<Result<Vec<_>>>()?;
            let conn_sub = Connection::new(&act_sub, theta)?;
            (sub, conn_sub)
        }
    };
    let q = conn_sub.quotient_model()?;
    let mut images = Vec::new();
    for (name, eta) in pick_forms(mf, opts)? {
        let image = kirwan_map(&sub, &conn_sub, eta)?;
        images.push(json!({ "form": name, "image": image.display_with(q.names()) }));
    }
    Ok(json!({ "quotient_generators": q.names(), "images": images }))
}

fn dh(mf: &ModelFile, opts: &Options) -> Result<Value> {
    let fam = match &opts.family {
        Some(name) => mf.family(name).ok_or_else(|| Error::Usage(format!("no family named '{name}'")))?,
        None => mf.families.first().ok_or_else(|| Error::Usage("the model file declares no family".into()))?,
    };
    let k = mf.torus_rank.unwrap_or(1);
    let n = mf.n() / 2 + k;
    let orientation = opts.orientation.unwrap_or(mf.model.orientation());
    let constant_type = mf.constant_type;
    let r = dh_density(&fam.structure, n, k, orientation, constant_type)?;
    Ok(json!({
        "family": fam.name,
        "density": r.density.factored(),
        "degree_bound": r.degree_bound,
        "degree": r.degree(),
        "normalization": r.normalization.to_string(),
        "orientation": r.orientation,
        "real": r.is_real(),
    }))
}

fn extension(mf: &ModelFile, opts: &Options) -> Result<Value> {
    let act = require_action(mf)?;
    let s = pick_structures(mf, opts)?[0];
    let m = &mf.model;
    let mut results = Vec::new();
    for (name, eta) in pick_forms(mf, opts)? {
        if eta.x_degree() > 0 {
            return Err(Error::Usage(format!("form '{name}' depends on the equivariant variables")));
        }
        let ext = act.canonical_extension(&s.map, &eta.form_part())?;
        results.push(json!({ "form": name, "extension": ext.display_with(m.names()), "closed": true }));
    }
    Ok(json!({ "structure": s.name, "extensions": results }))
}
