//! Line-oriented model files.
//!
//! ```text
//! model t4_rho1
//! generators e1 e2 e3 e4
//! params t
//! form c = e1^e2
//! form rho1 = exp(-i*c) ^ (e3 + i*e4)
//! family rho1t = quotient rho1, c, t
//! sample t = 0
//! torus_rank = 1
//! ```
//!
//! The full grammar is in `docs/model-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cartan::{Connection, EqForm, TorusAction};
use crate::error::{Error, Result};
use crate::form::{Blade, Form};
use crate::gclinear::{annihilator, GCMap};
use crate::gcy::{gcy_check, quotient_family, GcyStructure, Sample};
use crate::linalg::Matrix;
use crate::model::Model;
use crate::scalar::{GaussRat, Monomial, Scalar};

#[derive(Clone, Debug, PartialEq)]
enum Tk {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Raw(String),
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tk: Tk,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 13] = ["**", "+", "-", "*", "/", "^", "(", ")", "[", "]", ",", ";", "="];

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, col, msg: msg.into() })
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut depth: Vec<(char, usize, usize)> = Vec::new();
    let at_line_start = |toks: &Vec<Token>| toks.last().is_none_or(|t| t.tk == Tk::Newline);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if depth.is_empty() && !at_line_start(&toks) {
                toks.push(Token { tk: Tk::Newline, line, col });
            }
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let is_model = word == "model" && at_line_start(&toks);
            toks.push(Token { tk: Tk::Ident(word), line: sl, col: sc });
            if is_model {
                let start = i;
                while i < chars.len() && chars[i] != '\n' && chars[i] != '#' {
                    i += 1;
                }
                let raw: String = chars[start..i].iter().collect();
                let rc = col + (raw.len() - raw.trim_start().len());
                col += i - start;
                toks.push(Token { tk: Tk::Raw(raw.trim().to_string()), line: sl, col: rc });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push(Token { tk: Tk::Int(digits.parse().expect("digits")), line: sl, col: sc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return perr(sl, sc, format!("unexpected character '{c}'"));
        };
        match *sym {
            "(" | "[" => depth.push((c, sl, sc)),
            ")" | "]" => {
                let open = if *sym == ")" { '(' } else { '[' };
                match depth.pop() {
                    Some((o, _, _)) if o == open => {}
                    _ => return perr(sl, sc, format!("unbalanced '{sym}'")),
                }
            }
            _ => {}
        }
        toks.push(Token { tk: Tk::Sym(sym), line: sl, col: sc });
        i += sym.len();
        col += sym.len();
    }
    if let Some((o, l, c)) = depth.pop() {
        return perr(l, c, format!("unclosed '{o}'"));
    }
    if !at_line_start(&toks) {
        toks.push(Token { tk: Tk::Newline, line, col });
    }
    toks.push(Token { tk: Tk::Eof, line, col });
    Ok(toks)
}

/// Sparse monomial in the equivariant variables: sorted `(index, exponent)`.
type XMono = Vec<(usize, u32)>;

fn xmono_mul(a: &XMono, b: &XMono) -> XMono {
    let mut m: BTreeMap<usize, u32> = a.iter().cloned().collect();
    for (j, e) in b {
        *m.entry(*j).or_insert(0) += e;
    }
    m.into_iter().collect()
}

/// Form-valued polynomial in the `x_j`, before the torus rank is known.
#[derive(Clone, Debug)]
struct Poly {
    n: usize,
    terms: BTreeMap<XMono, Form>,
}

impl Poly {
    fn form(f: Form) -> Poly {
        let n = f.n();
        let mut p = Poly { n, terms: BTreeMap::new() };
        p.add_term(Vec::new(), f);
        p
    }

    fn scalar(n: usize, c: Scalar) -> Poly {
        Poly::form(Form::scalar(n, c))
    }

    fn add_term(&mut self, m: XMono, f: Form) {
        if f.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(old) => &old + &f,
            None => f,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, f) in &o.terms {
            out.add_term(m.clone(), f.clone());
        }
        out
    }

    fn neg(&self) -> Poly {
        Poly { n: self.n, terms: self.terms.iter().map(|(m, f)| (m.clone(), -f)).collect() }
    }

    fn wedge(&self, o: &Poly) -> Poly {
        let mut out = Poly { n: self.n, terms: BTreeMap::new() };
        for (ma, fa) in &self.terms {
            for (mb, fb) in &o.terms {
                out.add_term(xmono_mul(ma, mb), fa ^ fb);
            }
        }
        out
    }

    fn scalar_like(&self) -> bool {
        self.terms.values().all(|f| f.terms().all(|(b, _)| *b == Blade::EMPTY))
    }

    fn x_free(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    fn as_form(&self) -> Option<Form> {
        if !self.x_free() {
            return None;
        }
        Some(self.terms.get(&Vec::new()).cloned().unwrap_or_else(|| Form::zero(self.n)))
    }

    fn as_scalar(&self) -> Option<Scalar> {
        if !self.scalar_like() {
            return None;
        }
        self.as_form().map(|f| f.coeff(Blade::EMPTY))
    }

    fn max_x(&self) -> usize {
        self.terms.keys().flat_map(|m| m.iter().map(|(j, _)| j + 1)).max().unwrap_or(0)
    }

    fn to_eq(&self, k: usize) -> EqForm {
        let deg = self.terms.keys().map(|m| m.iter().map(|(_, e)| e).sum::<u32>()).max().unwrap_or(0);
        let mut out = EqForm::zero(self.n, k, deg);
        for (m, f) in &self.terms {
            let mut e = vec![0; k];
            for (j, p) in m {
                e[*j] = *p;
            }
            out.add_term(e, f.clone());
        }
        out
    }
}

/// Generalized vector `X + ξ` in an expression.
#[derive(Clone, Debug)]
struct Elem {
    x: Vec<Scalar>,
    xi: Form,
}

#[derive(Clone, Debug)]
enum Value {
    Poly(Poly),
    Elem(Elem),
}

/// A declared generalized complex structure.
#[derive(Clone, Debug)]
pub struct NamedStructure {
    pub name: String,
    pub map: GCMap,
    /// Set when the structure was declared through a spinor.
    pub spinor: Option<Form>,
}

/// A declared family of spinors on the (quotient) model.
#[derive(Clone, Debug)]
pub struct NamedFamily {
    pub name: String,
    pub structure: GcyStructure,
}

/// A parsed and validated model file.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub model: Model,
    pub params: Vec<String>,
    pub forms: Vec<(String, EqForm)>,
    pub structures: Vec<NamedStructure>,
    pub action: Option<TorusAction>,
    pub connection: Option<Connection>,
    pub families: Vec<NamedFamily>,
    pub samples: Vec<Sample>,
    pub torus_rank: Option<usize>,
    pub constant_type: Option<usize>,
    /// Generators that vanish on the sub-model used by the Kirwan map.
    pub submodel: Option<Vec<usize>>,
}

#[derive(Default)]
struct Raw {
    name: Option<String>,
    gens: Option<(Vec<String>, usize)>,
    params: Vec<String>,
    d: BTreeMap<usize, (Form, usize)>,
    h: Option<(Form, usize)>,
    volume: Option<(Scalar, usize)>,
    orientation: Option<(i32, usize)>,
    forms: Vec<(String, Poly, usize)>,
    structures: Vec<(String, RawStructure, usize)>,
    xi: BTreeMap<usize, (Vec<Scalar>, usize)>,
    mu: BTreeMap<usize, (Form, usize)>,
    alpha: BTreeMap<usize, (Form, usize)>,
    theta: BTreeMap<usize, (Form, usize)>,
    families: Vec<(String, RawFamily, usize)>,
    samples: Vec<(Sample, usize)>,
    torus_rank: Option<usize>,
    constant_type: Option<usize>,
    submodel: Option<(Vec<usize>, usize)>,
}

enum RawStructure {
    Symplectic(Form),
    Spinor(Form),
    StandardComplex,
    Complex(Matrix),
    Matrix(Matrix),
}

enum RawFamily {
    Explicit(Form),
    Quotient { rho: Form, c: Form, param: String },
}

const RESERVED: [&str; 4] = ["i", "pi", "exp", "D"];

fn is_xvar(s: &str) -> Option<usize> {
    let digits = s.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    raw: Raw,
    gen_index: BTreeMap<String, usize>,
    form_index: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tk, Tk::Sym(x) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token> {
        let t = self.next();
        match &t.tk {
            Tk::Sym(x) if *x == s => Ok(t),
            other => perr(t.line, t.col, format!("expected '{s}', found {}", describe(other))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Token)> {
        let t = self.next();
        match &t.tk {
            Tk::Ident(s) => Ok((s.clone(), t.clone())),
            other => perr(t.line, t.col, format!("expected {what}, found {}", describe(other))),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<(usize, Token)> {
        let t = self.next();
        match &t.tk {
            Tk::Int(v) => match v.to_usize() {
                Some(u) => Ok((u, t.clone())),
                None => perr(t.line, t.col, format!("{what} out of range")),
            },
            other => perr(t.line, t.col, format!("expected {what}, found {}", describe(other))),
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        let t = self.next();
        match t.tk {
            Tk::Newline | Tk::Eof => Ok(()),
            other => perr(t.line, t.col, format!("expected end of line, found {}", describe(&other))),
        }
    }

    fn n(&self, t: &Token) -> Result<usize> {
        match &self.raw.gens {
            Some((g, _)) => Ok(g.len()),
            None => perr(t.line, t.col, "generators must be declared before expressions"),
        }
    }

    fn declare(&mut self, name: &str, t: &Token) -> Result<()> {
        let taken = RESERVED.contains(&name)
            || is_xvar(name).is_some()
            || self.gen_index.contains_key(name)
            || self.raw.params.iter().any(|p| p == name)
            || self.form_index.contains_key(name);
        if taken {
            return perr(t.line, t.col, format!("name '{name}' is reserved or already declared"));
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<()> {
        let (kw, t) = self.expect_ident("a directive")?;
        let line = t.line;
        match kw.as_str() {
            "model" => {
                let r = self.next();
                let Tk::Raw(name) = r.tk else { unreachable!("lexer emits raw text after 'model'") };
                if name.is_empty() {
                    return perr(r.line, r.col, "model name is empty");
                }
                if self.raw.name.is_some() {
                    return perr(t.line, t.col, "duplicate 'model' directive");
                }
                self.raw.name = Some(name);
                return Ok(());
            }
            "generators" => {
                if self.raw.gens.is_some() {
                    return perr(t.line, t.col, "duplicate 'generators' directive");
                }
                let mut names = Vec::new();
                while let Tk::Ident(_) = self.peek().tk {
                    let (g, gt) = self.expect_ident("a generator name")?;
                    self.declare(&g, &gt)?;
                    self.gen_index.insert(g.clone(), names.len());
                    names.push(g);
                }
                if names.is_empty() || names.len() > 20 {
                    return perr(t.line, t.col, "between 1 and 20 generators are required");
                }
                self.raw.gens = Some((names, line));
            }
            "params" => {
                while let Tk::Ident(_) = self.peek().tk {
                    let (p, pt) = self.expect_ident("a parameter name")?;
                    self.declare(&p, &pt)?;
                    self.raw.params.push(p);
                }
            }
            "d" => {
                let (g, gt) = self.expect_ident("a generator name")?;
                let Some(&gi) = self.gen_index.get(&g) else {
                    return perr(gt.line, gt.col, format!("undeclared generator '{g}'"));
                };
                self.expect_sym("=")?;
                let f = self.form_expr()?;
                if self.raw.d.insert(gi, (f, line)).is_some() {
                    return perr(gt.line, gt.col, format!("d{g} assigned twice"));
                }
            }
            "H" => {
                self.expect_sym("=")?;
                let f = self.form_expr()?;
                self.raw.h = Some((f, line));
            }
            "volume" => {
                self.expect_sym("=")?;
                let s = self.scalar_expr()?;
                self.raw.volume = Some((s, line));
            }
            "orientation" => {
                self.expect_sym("=")?;
                let st = self.peek().clone();
                let s = self.scalar_expr()?;
                let o = if s == Scalar::one() {
                    1
                } else if s == Scalar::from_int(-1) {
                    -1
                } else {
                    return perr(st.line, st.col, "orientation must be +1 or -1");
                };
                self.raw.orientation = Some((o, line));
            }
            "form" => {
                let (name, nt) = self.expect_ident("a form name")?;
                self.declare(&name, &nt)?;
                self.expect_sym("=")?;
                let p = self.poly_expr()?;
                self.form_index.insert(name.clone(), self.raw.forms.len());
                self.raw.forms.push((name, p, line));
            }
            "structure" => {
                let (name, _) = self.expect_ident("a structure name")?;
                if self.raw.structures.iter().any(|(s, _, _)| *s == name) {
                    return perr(t.line, t.col, format!("duplicate structure '{name}'"));
                }
                self.expect_sym("=")?;
                let (kind, kt) = self.expect_ident("a structure kind")?;
                let s = match kind.as_str() {
                    "symplectic" => RawStructure::Symplectic(self.form_expr()?),
                    "spinor" => RawStructure::Spinor(self.form_expr()?),
                    "complex" if matches!(&self.peek().tk, Tk::Ident(w) if w == "standard") => {
                        self.next();
                        RawStructure::StandardComplex
                    }
                    "complex" => RawStructure::Complex(self.matrix()?),
                    "matrix" => RawStructure::Matrix(self.matrix()?),
                    other => {
                        return perr(kt.line, kt.col, format!("unknown structure kind '{other}' (symplectic, spinor, complex, matrix)"))
                    }
                };
                self.raw.structures.push((name, s, line));
            }
            "xi" | "mu" | "alpha" | "theta" => {
                let (j, jt) = self.expect_int("a direction index")?;
                if j == 0 {
                    return perr(jt.line, jt.col, "direction indices start at 1");
                }
                self.expect_sym("=")?;
                let dup = if kw == "xi" {
                    let v = self.vector_expr()?;
                    self.raw.xi.insert(j, (v, line)).is_some()
                } else {
                    let f = self.form_expr()?;
                    let map = match kw.as_str() {
                        "mu" => &mut self.raw.mu,
                        "alpha" => &mut self.raw.alpha,
                        _ => &mut self.raw.theta,
                    };
                    map.insert(j, (f, line)).is_some()
                };
                if dup {
                    return perr(jt.line, jt.col, format!("{kw} {j} assigned twice"));
                }
            }
            "family" => {
                let (name, _) = self.expect_ident("a family name")?;
                self.expect_sym("=")?;
                let fam = if matches!(&self.peek().tk, Tk::Ident(w) if w == "quotient") {
                    self.next();
                    let rho = self.form_expr()?;
                    self.expect_sym(",")?;
                    let c = self.form_expr()?;
                    self.expect_sym(",")?;
                    let (param, pt) = self.expect_ident("a parameter name")?;
                    if !self.raw.params.contains(&param) {
                        return perr(pt.line, pt.col, format!("undeclared parameter '{param}'"));
                    }
                    RawFamily::Quotient { rho, c, param }
                } else {
                    RawFamily::Explicit(self.form_expr()?)
                };
                self.raw.families.push((name, fam, line));
            }
            "sample" => {
                let mut s = Sample::new();
                loop {
                    let (p, pt) = self.expect_ident("a parameter name")?;
                    if !self.raw.params.contains(&p) {
                        return perr(pt.line, pt.col, format!("undeclared parameter '{p}'"));
                    }
                    self.expect_sym("=")?;
                    let vt = self.peek().clone();
                    let v = self.scalar_expr()?;
                    let Some(g) = v.as_gauss().filter(GaussRat::is_real) else {
                        return perr(vt.line, vt.col, "sample values must be real rational constants");
                    };
                    s.insert(p, g.re().clone());
                    if !self.at_sym(",") {
                        break;
                    }
                    self.next();
                }
                self.raw.samples.push((s, line));
            }
            "torus_rank" | "constant_type" => {
                self.expect_sym("=")?;
                let (v, _) = self.expect_int("a non-negative integer")?;
                if kw == "torus_rank" {
                    self.raw.torus_rank = Some(v);
                } else {
                    self.raw.constant_type = Some(v);
                }
            }
            "submodel" => {
                let (w, wt) = self.expect_ident("'vanish'")?;
                if w != "vanish" {
                    return perr(wt.line, wt.col, "expected 'vanish'");
                }
                let mut v = Vec::new();
                while let Tk::Ident(_) = self.peek().tk {
                    let (g, gt) = self.expect_ident("a generator name")?;
                    match self.gen_index.get(&g) {
                        Some(&i) => v.push(i),
                        None => return perr(gt.line, gt.col, format!("undeclared generator '{g}'")),
                    }
                }
                self.raw.submodel = Some((v, line));
            }
            other => return perr(t.line, t.col, format!("unknown directive '{other}'")),
        }
        self.end_of_statement()
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let open = self.expect_sym("[")?;
        let mut rows: Vec<Vec<GaussRat>> = vec![Vec::new()];
        loop {
            let et = self.peek().clone();
            let s = self.scalar_expr()?;
            match s.as_gauss() {
                Some(g) => rows.last_mut().unwrap().push(g),
                None => return perr(et.line, et.col, "matrix entries must be constants"),
            }
            let t = self.next();
            match t.tk {
                Tk::Sym(",") => {}
                Tk::Sym(";") => rows.push(Vec::new()),
                Tk::Sym("]") => break,
                other => return perr(t.line, t.col, format!("expected ',', ';' or ']', found {}", describe(&other))),
            }
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return perr(open.line, open.col, "matrix rows have different lengths");
        }
        Ok(Matrix::from_rows(rows))
    }

    fn form_expr(&mut self) -> Result<Form> {
        let t = self.peek().clone();
        match self.expr()? {
            Value::Poly(p) => match p.as_form() {
                Some(f) => Ok(f),
                None => perr(t.line, t.col, "expected a form without equivariant variables"),
            },
            Value::Elem(_) => perr(t.line, t.col, "expected a form, found a generalized vector"),
        }
    }

    fn poly_expr(&mut self) -> Result<Poly> {
        let t = self.peek().clone();
        match self.expr()? {
            Value::Poly(p) => Ok(p),
            Value::Elem(_) => perr(t.line, t.col, "expected a form, found a generalized vector"),
        }
    }

    fn scalar_expr(&mut self) -> Result<Scalar> {
        let t = self.peek().clone();
        let p = self.poly_expr()?;
        match p.as_scalar() {
            Some(s) => Ok(s),
            None => perr(t.line, t.col, "expected a scalar"),
        }
    }

    fn vector_expr(&mut self) -> Result<Vec<Scalar>> {
        let t = self.peek().clone();
        let n = self.n(&t)?;
        match self.expr()? {
            Value::Elem(e) if e.xi.is_zero() => Ok(e.x),
            Value::Poly(p) if p.terms.is_empty() => Ok(vec![Scalar::zero(); n]),
            _ => perr(t.line, t.col, "expected a vector field such as D(e1)"),
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            let t = self.peek().clone();
            let neg = match t.tk {
                Tk::Sym("+") => false,
                Tk::Sym("-") => true,
                _ => return Ok(acc),
            };
            self.next();
            let mut rhs = self.term()?;
            if neg {
                rhs = negate(rhs);
            }
            acc = add_values(acc, rhs, &t)?;
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            let t = self.peek().clone();
            let op = match t.tk {
                Tk::Sym(s @ ("*" | "/" | "^")) => s,
                _ => return Ok(acc),
            };
            self.next();
            let rhs = self.unary()?;
            acc = match op {
                "*" => multiply(acc, rhs, &t)?,
                "^" => match (acc, rhs) {
                    (Value::Poly(a), Value::Poly(b)) => Value::Poly(a.wedge(&b)),
                    _ => return perr(t.line, t.col, "'^' is the wedge of forms; generalized vectors cannot be wedged"),
                },
                _ => divide(acc, rhs, &t)?,
            };
        }
    }

    fn unary(&mut self) -> Result<Value> {
        match self.peek().tk {
            Tk::Sym("-") => {
                self.next();
                Ok(negate(self.unary()?))
            }
            Tk::Sym("+") => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if !self.at_sym("**") {
            return Ok(base);
        }
        let t = self.next();
        let neg = if self.at_sym("-") {
            self.next();
            true
        } else {
            false
        };
        let (e, _) = self.expect_int("an integer exponent")?;
        let Value::Poly(p) = base else {
            return perr(t.line, t.col, "'**' needs a scalar base");
        };
        if !p.scalar_like() {
            return perr(t.line, t.col, "'**' needs a scalar base; use '^' for the wedge");
        }
        if neg {
            if p.as_scalar() != Some(Scalar::pi()) {
                return perr(t.line, t.col, "negative exponents are only allowed on pi");
            }
            return Ok(Value::Poly(Poly::scalar(p.n, Scalar::monomial(Monomial::pi_power(-(e as i32)), GaussRat::one()))));
        }
        let mut out = Poly::scalar(p.n, Scalar::one());
        for _ in 0..e {
            out = out.wedge(&p);
        }
        Ok(Value::Poly(out))
    }

    fn atom(&mut self) -> Result<Value> {
        let t = self.next();
        match t.tk.clone() {
            Tk::Int(v) => {
                let n = self.n(&t)?;
                let g = GaussRat::real(BigRational::from_integer(v));
                Ok(Value::Poly(Poly::scalar(n, Scalar::from(g))))
            }
            Tk::Sym("(") => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tk::Ident(name) => {
                let n = self.n(&t)?;
                match name.as_str() {
                    "i" => return Ok(Value::Poly(Poly::scalar(n, Scalar::i()))),
                    "pi" => return Ok(Value::Poly(Poly::scalar(n, Scalar::pi()))),
                    "exp" => {
                        self.expect_sym("(")?;
                        let at = self.peek().clone();
                        let v = self.poly_expr()?;
                        self.expect_sym(")")?;
                        let Some(f) = v.as_form() else {
                            return perr(at.line, at.col, "exp() needs a form without equivariant variables");
                        };
                        if !f.is_zero() && !f.is_homogeneous(2) {
                            return perr(at.line, at.col, "exp() is defined for two-forms");
                        }
                        let e = if f.is_zero() { Form::one(n) } else { f.exp_two_form()? };
                        return Ok(Value::Poly(Poly::form(e)));
                    }
                    "D" => {
                        self.expect_sym("(")?;
                        let (g, gt) = self.expect_ident("a generator name")?;
                        self.expect_sym(")")?;
                        let Some(&gi) = self.gen_index.get(&g) else {
                            return perr(gt.line, gt.col, format!("undeclared generator '{g}'"));
                        };
                        let x = (0..n).map(|i| if i == gi { Scalar::one() } else { Scalar::zero() }).collect();
                        return Ok(Value::Elem(Elem { x, xi: Form::zero(n) }));
                    }
                    _ => {}
                }
                if let Some(&gi) = self.gen_index.get(&name) {
                    return Ok(Value::Poly(Poly::form(Form::generator(n, gi))));
                }
                if self.raw.params.contains(&name) {
                    return Ok(Value::Poly(Poly::scalar(n, Scalar::param(&name))));
                }
                if let Some(&fi) = self.form_index.get(&name) {
                    return Ok(Value::Poly(self.raw.forms[fi].1.clone()));
                }
                if let Some(j) = is_xvar(&name) {
                    let mut p = Poly { n, terms: BTreeMap::new() };
                    p.add_term(vec![(j - 1, 1)], Form::one(n));
                    return Ok(Value::Poly(p));
                }
                perr(t.line, t.col, format!("undeclared symbol '{name}'"))
            }
            other => perr(t.line, t.col, format!("expected an expression, found {}", describe(&other))),
        }
    }
}

fn describe(tk: &Tk) -> String {
    match tk {
        Tk::Ident(s) => format!("'{s}'"),
        Tk::Int(v) => format!("'{v}'"),
        Tk::Sym(s) => format!("'{s}'"),
        Tk::Raw(s) => format!("'{s}'"),
        Tk::Newline => "end of line".into(),
        Tk::Eof => "end of input".into(),
    }
}

fn negate(v: Value) -> Value {
    match v {
        Value::Poly(p) => Value::Poly(p.neg()),
        Value::Elem(e) => Value::Elem(Elem { x: e.x.iter().map(|c| -c).collect(), xi: -&e.xi }),
    }
}

fn as_covector(p: &Poly) -> Option<Form> {
    let f = p.as_form()?;
    (f.is_zero() || f.is_homogeneous(1)).then_some(f)
}

fn add_values(a: Value, b: Value, t: &Token) -> Result<Value> {
    match (a, b) {
        (Value::Poly(a), Value::Poly(b)) => Ok(Value::Poly(a.add(&b))),
        (Value::Elem(a), Value::Elem(b)) => {
            Ok(Value::Elem(Elem { x: a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect(), xi: &a.xi + &b.xi }))
        }
        (Value::Elem(e), Value::Poly(p)) | (Value::Poly(p), Value::Elem(e)) => match as_covector(&p) {
            Some(f) => Ok(Value::Elem(Elem { x: e.x, xi: &e.xi + &f })),
            None => perr(t.line, t.col, "only one-forms can be added to vector fields"),
        },
    }
}

fn multiply(a: Value, b: Value, t: &Token) -> Result<Value> {
    match (a, b) {
        (Value::Poly(a), Value::Poly(b)) => {
            if !a.scalar_like() && !b.scalar_like() {
                return perr(t.line, t.col, "'*' needs a scalar factor; use '^' for the wedge");
            }
            Ok(Value::Poly(a.wedge(&b)))
        }
        (Value::Elem(e), Value::Poly(p)) | (Value::Poly(p), Value::Elem(e)) => {
            let Some(c) = p.as_scalar().filter(|_| p.x_free()) else {
                return perr(t.line, t.col, "vector fields can only be scaled by constants");
            };
            Ok(Value::Elem(Elem { x: e.x.iter().map(|v| v * &c).collect(), xi: e.xi.scale(&c) }))
        }
        _ => perr(t.line, t.col, "cannot multiply two generalized vectors"),
    }
}

fn divide(a: Value, b: Value, t: &Token) -> Result<Value> {
    let Value::Poly(b) = b else {
        return perr(t.line, t.col, "cannot divide by a vector");
    };
    let Some(c) = b.as_scalar().filter(|_| b.x_free()) else {
        return perr(t.line, t.col, "division needs a scalar divisor");
    };
    let div = |s: &Scalar| s.checked_div(&c);
    let wrap = |e: Error| Error::Parse { line: t.line, col: t.col, msg: e.to_string() };
    match a {
        Value::Poly(p) => {
            let mut out = Poly { n: p.n, terms: BTreeMap::new() };
            for (m, f) in &p.terms {
                let mut g = Form::zero(p.n);
                for (bl, s) in f.terms() {
                    g.add_term(*bl, div(s).map_err(wrap)?);
                }
                out.add_term(m.clone(), g);
            }
            Ok(Value::Poly(out))
        }
        Value::Elem(e) => {
            let x = e.x.iter().map(|s| div(s).map_err(wrap)).collect::<Result<Vec<_>>>()?;
            let mut xi = Form::zero(e.xi.n());
            for (bl, s) in e.xi.terms() {
                xi.add_term(*bl, div(s).map_err(wrap)?);
            }
            Ok(Value::Elem(Elem { x, xi }))
        }
    }
}

fn verr(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } | Error::Validation { .. } => e,
        other => Error::Validation { line, msg: other.to_string() },
    }
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, raw: Raw::default(), gen_index: BTreeMap::new(), form_index: BTreeMap::new() };
    loop {
        match p.peek().tk {
            Tk::Eof => break,
            Tk::Newline => {
                p.next();
            }
            _ => p.statement()?,
        }
    }
    finalize(p.raw)
}

fn finalize(raw: Raw) -> Result<ModelFile> {
    let Some((names, gens_line)) = raw.gens.clone() else {
        return perr(1, 1, "missing 'generators' directive");
    };
    let n = names.len();
    let mut d_table = vec![Form::zero(n); n];
    for (i, (f, _)) in &raw.d {
        d_table[*i] = f.clone();
    }
    let h = raw.h.as_ref().map(|(f, _)| f.clone()).unwrap_or_else(|| Form::zero(n));
    let name = raw.name.clone().unwrap_or_else(|| "model".into());
    let model = Model::new(&name, names.clone(), d_table, h).map_err(|e| {
        let line = match &e {
            Error::DifferentialNotNilpotent { generator, .. } => {
                names.iter().position(|g| g == generator).and_then(|i| raw.d.get(&i)).map_or(gens_line, |(_, l)| *l)
            }
            Error::NotPureDegree { found, .. } => raw
                .d
                .iter()
                .find(|(i, _)| found.starts_with(&format!("d{} =", names[**i])))
                .map_or(gens_line, |(_, (_, l))| *l),
            _ => raw.h.as_ref().map_or(gens_line, |(_, l)| *l),
        };
        verr(line)(e)
    })?;
    let mut model = model;
    if let Some((v, _)) = &raw.volume {
        model = model.with_volume(v.clone());
    }
    if let Some((o, _)) = raw.orientation {
        model = model.with_orientation(o);
    }

    let k = raw.xi.len();
    let lines = |m: &BTreeMap<usize, usize>| m.iter().map(|(j, l)| (*j, *l)).collect::<Vec<_>>();
    let line_maps = [
        ("mu", lines(&raw.mu.iter().map(|(j, (_, l))| (*j, *l)).collect())),
        ("alpha", lines(&raw.alpha.iter().map(|(j, (_, l))| (*j, *l)).collect())),
        ("theta", lines(&raw.theta.iter().map(|(j, (_, l))| (*j, *l)).collect())),
        ("xi", lines(&raw.xi.iter().map(|(j, (_, l))| (*j, *l)).collect())),
    ];
    for (what, entries) in &line_maps {
        if let Some((j, line)) = entries.iter().find(|(j, _)| *j > k) {
            return Err(Error::Validation { line: *line, msg: format!("{what} {j} given but xi declares directions 1..={k}") });
        }
    }

    let mut forms = Vec::new();
    for (fname, poly, line) in &raw.forms {
        if poly.max_x() > k {
            return Err(Error::Validation { line: *line, msg: format!("form {fname} uses x{} but the torus has rank {k}", poly.max_x()) });
        }
        forms.push((fname.clone(), poly.to_eq(k)));
    }

    let mut structures = Vec::new();
    for (sname, s, line) in &raw.structures {
        let e = verr(*line);
        let (map, spinor) = match s {
            RawStructure::Symplectic(w) => (GCMap::symplectic(w).map_err(&e)?, None),
            RawStructure::StandardComplex => (GCMap::standard_complex(n).map_err(&e)?, None),
            RawStructure::Complex(m) => (GCMap::complex(m).map_err(&e)?, None),
            RawStructure::Matrix(m) => (GCMap::new(m.clone()).map_err(&e)?, None),
            RawStructure::Spinor(rho) => {
                if !rho.is_parameter_free() {
                    return Err(e(Error::ParametricInput));
                }
                let ann = annihilator(rho).map_err(&e)?;
                (GCMap::from_eigenspace(&ann.space).map_err(&e)?, Some(rho.clone()))
            }
        };
        map.validate().map_err(&e)?;
        structures.push(NamedStructure { name: sname.clone(), map, spinor });
    }

    let mut action = None;
    let mut connection = None;
    if k > 0 {
        let line = raw.xi.values().next().map(|(_, l)| *l).unwrap_or(gens_line);
        let xi = (1..=k).map(|j| raw.xi[&j].0.clone()).collect();
        let pick = |m: &BTreeMap<usize, (Form, usize)>| -> Vec<Form> {
            if m.is_empty() {
                Vec::new()
            } else {
                (1..=k).map(|j| m.get(&j).map(|(f, _)| f.clone()).unwrap_or_else(|| Form::zero(n))).collect()
            }
        };
        let act = TorusAction::new(&model, xi, pick(&raw.mu), pick(&raw.alpha)).map_err(verr(line))?;
        if !raw.theta.is_empty() {
            let tline = raw.theta.values().next().unwrap().1;
            if raw.theta.len() != k {
                return Err(Error::Validation { line: tline, msg: format!("theta must be given for all {k} directions") });
            }
            let theta = (1..=k).map(|j| raw.theta[&j].0.clone()).collect();
            connection = Some(Connection::new(&act, theta).map_err(verr(tline))?);
        }
        action = Some(act);
    } else if let Some((_, (_, line))) = raw.theta.iter().next() {
        return Err(Error::Validation { line: *line, msg: "theta given without an action".into() });
    }

    let samples: Vec<Sample> = raw.samples.iter().map(|(s, _)| s.clone()).collect();
    let mut families = Vec::new();
    for (fname, fam, line) in &raw.families {
        let structure = match fam {
            RawFamily::Explicit(rho) => gcy_check(&model, rho, &samples),
            RawFamily::Quotient { rho, c, param } => quotient_family(&model, rho, c, param, &samples),
        }
        .map_err(verr(*line))?;
        families.push(NamedFamily { name: fname.clone(), structure });
    }

    Ok(ModelFile {
        model,
        params: raw.params,
        forms,
        structures,
        action,
        connection,
        families,
        samples,
        torus_rank: raw.torus_rank,
        constant_type: raw.constant_type,
        submodel: raw.submodel.map(|(v, _)| v),
    })
}

fn vector_string(x: &[Scalar], names: &[String]) -> String {
    let mut out = String::new();
    for (i, c) in x.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let field = format!("D({})", names[i]);
        let s = c.to_string();
        let body = if c.terms().count() > 1 {
            format!("({s})*{field}")
        } else if s == "1" {
            field
        } else if s == "-1" {
            format!("-{field}")
        } else {
            format!("{s}*{field}")
        };
        if !out.is_empty() && !body.starts_with('-') {
            out.push('+');
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl ModelFile {
    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn form(&self, name: &str) -> Option<&EqForm> {
        self.forms.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn structure(&self, name: &str) -> Option<&NamedStructure> {
        self.structures.iter().find(|s| s.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&NamedFamily> {
        self.families.iter().find(|f| f.name == name)
    }

    /// Canonical text; parsing it yields the same canonical text.
    pub fn to_canonical(&self) -> String {
        let m = &self.model;
        let names = m.names();
        let show = |f: &Form| f.display_with(names);
        let mut out = String::new();
        let _ = writeln!(out, "model {}", m.name());
        let _ = writeln!(out, "generators {}", names.join(" "));
        if !self.params.is_empty() {
            let _ = writeln!(out, "params {}", self.params.join(" "));
        }
        for (i, de) in m.d_table().iter().enumerate() {
            if !de.is_zero() {
                let _ = writeln!(out, "d {} = {}", names[i], show(de));
            }
        }
        if !m.h().is_zero() {
            let _ = writeln!(out, "H = {}", show(m.h()));
        }
        if !m.volume().is_one_scalar() {
            let _ = writeln!(out, "volume = {}", m.volume());
        }
        if m.orientation() < 0 {
            let _ = writeln!(out, "orientation = -1");
        }
        for (fname, f) in &self.forms {
            let _ = writeln!(out, "form {fname} = {}", f.display_with(names));
        }
        for s in &self.structures {
            match &s.spinor {
                Some(rho) => {
                    let _ = writeln!(out, "structure {} = spinor {}", s.name, show(rho));
                }
                None => {
                    let mx = s.map.matrix();
                    let rows: Vec<String> = (0..mx.rows())
                        .map(|r| (0..mx.cols()).map(|c| mx.get(r, c).to_string()).collect::<Vec<_>>().join(", "))
                        .collect();
                    let _ = writeln!(out, "structure {} = matrix [{}]", s.name, rows.join("; "));
                }
            }
        }
        if let Some(act) = &self.action {
            for j in 0..act.k() {
                let _ = writeln!(out, "xi {} = {}", j + 1, vector_string(act.xi(j), names));
                if !act.mu_diff(j).is_zero() {
                    let _ = writeln!(out, "mu {} = {}", j + 1, show(act.mu_diff(j)));
                }
                if !act.alpha(j).is_zero() {
                    let _ = writeln!(out, "alpha {} = {}", j + 1, show(act.alpha(j)));
                }
            }
        }
        if let Some(conn) = &self.connection {
            for j in 0..conn.action().k() {
                let _ = writeln!(out, "theta {} = {}", j + 1, show(conn.theta(j)));
            }
        }
        for s in &self.samples {
            let parts: Vec<String> = s.iter().map(|(p, v)| format!("{p} = {v}")).collect();
            let _ = writeln!(out, "sample {}", parts.join(", "));
        }
        for f in &self.families {
            let _ = writeln!(out, "family {} = {}", f.name, show(f.structure.rho()));
        }
        if let Some(k) = self.torus_rank {
            let _ = writeln!(out, "torus_rank = {k}");
        }
        if let Some(p) = self.constant_type {
            let _ = writeln!(out, "constant_type = {p}");
        }
        if let Some(v) = &self.submodel {
            let gens: Vec<&str> = v.iter().map(|&i| names[i].as_str()).collect();
            let _ = writeln!(out, "submodel vanish {}", gens.join(" "));
        }
        out
    }
}

impl Scalar {
    fn is_one_scalar(&self) -> bool {
        *self == Scalar::one()
    }
}

/// Parses a single form expression over the given generators and parameters.
pub fn parse_form(text: &str, generators: &[String], params: &[String]) -> Result<Form> {
    let mut header = format!("generators {}\n", generators.join(" "));
    if !params.is_empty() {
        header.push_str(&format!("params {}\n", params.join(" ")));
    }
    let toks = lex(&format!("{header}form __value = {text}\n")).map_err(|e| shift_line(e, 1 + !params.is_empty() as usize))?;
    let mut p = Parser { toks, pos: 0, raw: Raw::default(), gen_index: BTreeMap::new(), form_index: BTreeMap::new() };
    loop {
        match p.peek().tk {
            Tk::Eof => break,
            Tk::Newline => {
                p.next();
            }
            _ => p.statement().map_err(|e| shift_line(e, 1 + !params.is_empty() as usize))?,
        }
    }
    let (_, poly, _) = p.raw.forms.pop().expect("one form statement");
    poly.as_form().ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "equivariant variables are not allowed here".into() })
}

fn shift_line(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { line, col, msg } => {
            let col = if line == by + 1 { col.saturating_sub("form __value = ".len()) } else { col };
            Error::Parse { line: line.saturating_sub(by).max(1), col: col.max(1), msg }
        }
        other => other,
    }
}

/// Parses a real rational like `-3/2`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a.parse::<BigInt>().ok()?, b.parse::<BigInt>().ok()?),
        None => (body.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if den.is_zero() || num.is_negative() {
        return None;
    }
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}
