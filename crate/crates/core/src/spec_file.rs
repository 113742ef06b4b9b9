//! JSON description of a [`ConvexMatrixExpr`].
//!
//! ```json
//! {
//!   "version": 1,
//!   "d": 2,
//!   "ell": 2,
//!   "root": {
//!     "op": "sum",
//!     "args": [
//!       {"op": "lift", "f": {"atom": "abs_coord", "index": 0}, "matrix": [[1, 1], [1, 1]]},
//!       {"op": "lift", "f": {"atom": "abs_coord", "index": 1}, "matrix": [[1, -1], [-1, 1]]}
//!     ]
//!   }
//! }
//! ```
//!
//! Node operators: `const {matrix}`, `affine {coeffs, offset}`,
//! `lift {f, matrix}`, `sum {args}`, `scale {alpha, arg}`,
//! `congruence {matrix, arg}`, `hadamard {mask, arg}`,
//! `precompose {matrix, offset, arg}` (the argument's input dimension is the
//! number of rows of `matrix`), `blockdiag {args}` and `double {arg}`. `sum`
//! and `blockdiag` take two or more arguments and associate to the left.
//! Scalar atoms are tagged by `atom`: `abs_coord {index}` (zero-based), `affine_scalar {a, b}` and
//! `max_affine {pieces: [{a, b}, …]}`. Matrices are arrays of rows.
//!
//! Errors name the offending location, e.g. `root.args[1].matrix`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::{ConvexMatrixExpr, Node, ScalarAtom};
use crate::subgrad::MatTuple;
use crate::symmat::{Mat, SymMat};

pub const FORMAT_VERSION: u64 = 1;

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Spec {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Attaches `path` to errors raised by the expression constructors.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Spec { .. } => e,
        other => err(path, other.to_string()),
    })
}

/// Parses a spec document.
pub fn from_str(text: &str) -> Result<ConvexMatrixExpr> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| err("$", format!("malformed JSON: {e}")))?;
    from_value(&value)
}

pub fn from_value(value: &Value) -> Result<ConvexMatrixExpr> {
    let top = object(value, "$")?;
    let version = uint(field(top, "$", "version")?, "version")?;
    if version != FORMAT_VERSION as usize {
        return Err(err("version", format!("unsupported version {version}")));
    }
    let d = uint(field(top, "$", "d")?, "d")?;
    let ell = uint(field(top, "$", "ell")?, "ell")?;
    let root = parse_node(field(top, "$", "root")?, "root", d)?;
    if root.input_dim() != d {
        return Err(err("d", format!("declared {d}, root has {}", root.input_dim())));
    }
    if root.output_dim() != ell {
        return Err(err("ell", format!("declared {ell}, root has {}", root.output_dim())));
    }
    Ok(root)
}

pub fn to_value(f: &ConvexMatrixExpr) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "d": f.input_dim(),
        "ell": f.output_dim(),
        "root": node_value(f),
    })
}

pub fn to_string(f: &ConvexMatrixExpr) -> String {
    serde_json::to_string_pretty(&to_value(f)).expect("serializable")
}

fn node_value(f: &ConvexMatrixExpr) -> Value {
    match f.node() {
        Node::Const(a) => json!({"op": "const", "matrix": a}),
        Node::Affine { coeffs, offset } => json!({"op": "affine", "coeffs": coeffs, "offset": offset}),
        Node::Lift { atom, matrix } => json!({"op": "lift", "f": atom_value(atom), "matrix": matrix}),
        Node::Sum(a, b) => json!({"op": "sum", "args": [node_value(a), node_value(b)]}),
        Node::Scale { alpha, arg } => json!({"op": "scale", "alpha": alpha, "arg": node_value(arg)}),
        Node::Congruence { factor, arg, .. } => {
            json!({"op": "congruence", "matrix": factor, "arg": node_value(arg)})
        }
        Node::Hadamard { mask, arg, .. } => json!({"op": "hadamard", "mask": mask, "arg": node_value(arg)}),
        Node::Precompose { arg, map, shift } => {
            json!({"op": "precompose", "matrix": map, "offset": shift, "arg": node_value(arg)})
        }
        Node::BlockDiag(a, b) => json!({"op": "blockdiag", "args": [node_value(a), node_value(b)]}),
        Node::Double(arg) => json!({"op": "double", "arg": node_value(arg)}),
    }
}

fn atom_value(atom: &ScalarAtom) -> Value {
    match atom {
        ScalarAtom::AffineScalar { a, b } => json!({"atom": "affine_scalar", "a": a, "b": b}),
        ScalarAtom::AbsCoord { index, .. } => json!({"atom": "abs_coord", "index": index}),
        ScalarAtom::MaxAffine { pieces } => json!({
            "atom": "max_affine",
            "pieces": pieces.iter().map(|(a, b)| json!({"a": a, "b": b})).collect::<Vec<_>>(),
        }),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| err(path, format!("missing field `{key}`")))
}

fn join(path: &str, key: &str) -> String {
    if path == "$" {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| err(path, "expected a nonnegative integer"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn vector(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn rows(v: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{path}[{i}]")))
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(err(path, "empty matrix"));
    }
    Ok(rows)
}

fn sym(v: &Value, path: &str) -> Result<SymMat> {
    at(path, SymMat::from_rows(&rows(v, path)?))
}

fn dense(v: &Value, path: &str) -> Result<Mat> {
    at(path, Mat::from_rows(&rows(v, path)?))
}

fn parse_node(v: &Value, path: &str, d: usize) -> Result<ConvexMatrixExpr> {
    let obj = object(v, path)?;
    let op_path = join(path, "op");
    let op = field(obj, path, "op")?
        .as_str()
        .ok_or_else(|| err(&op_path, "expected a string"))?;
    let get = |key: &str| field(obj, path, key).map(|v| (v, join(path, key)));
    let child = |key: &str, d: usize| -> Result<ConvexMatrixExpr> {
        let (v, p) = get(key)?;
        parse_node(v, &p, d)
    };
    let args = |d: usize| -> Result<Vec<ConvexMatrixExpr>> {
        let (v, p) = get("args")?;
        let items = array(v, &p)?;
        if items.len() < 2 {
            return Err(err(&p, "expected at least two arguments"));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, a)| parse_node(a, &format!("{p}[{i}]"), d))
            .collect()
    };
    match op {
        "const" => {
            let (m, p) = get("matrix")?;
            at(path, ConvexMatrixExpr::constant(d, sym(m, &p)?))
        }
        "affine" => {
            let (c, cp) = get("coeffs")?;
            let coeffs: Vec<SymMat> = array(c, &cp)?
                .iter()
                .enumerate()
                .map(|(i, m)| sym(m, &format!("{cp}[{i}]")))
                .collect::<Result<_>>()?;
            if coeffs.len() != d {
                return Err(err(&cp, format!("expected {d} coefficient matrices, got {}", coeffs.len())));
            }
            let coeffs = at(&cp, MatTuple::new(coeffs))?;
            let (o, op) = get("offset")?;
            at(path, ConvexMatrixExpr::affine(coeffs, sym(o, &op)?))
        }
        "lift" => {
            let (a, ap) = get("f")?;
            let atom = parse_atom(a, &ap, d)?;
            let (m, mp) = get("matrix")?;
            let matrix = sym(m, &mp)?;
            at(&mp, ConvexMatrixExpr::lift(atom, matrix))
        }
        "sum" => {
            let items = args(d)?;
            let mut acc = items[0].clone();
            for (i, b) in items[1..].iter().enumerate() {
                acc = at(&format!("{}[{}]", join(path, "args"), i + 1), ConvexMatrixExpr::sum(&acc, b))?;
            }
            Ok(acc)
        }
        "blockdiag" => {
            let items = args(d)?;
            let mut acc = items[0].clone();
            for b in &items[1..] {
                acc = at(path, ConvexMatrixExpr::block_diag(&acc, b))?;
            }
            Ok(acc)
        }
        "scale" => {
            let (a, ap) = get("alpha")?;
            let alpha = number(a, &ap)?;
            let arg = child("arg", d)?;
            at(&ap, ConvexMatrixExpr::scale(alpha, &arg))
        }
        "congruence" => {
            let (m, mp) = get("matrix")?;
            let factor = dense(m, &mp)?;
            let arg = child("arg", d)?;
            at(&mp, ConvexMatrixExpr::congruence(factor, &arg))
        }
        "hadamard" => {
            let (m, mp) = get("mask")?;
            let mask = sym(m, &mp)?;
            let arg = child("arg", d)?;
            at(&mp, ConvexMatrixExpr::hadamard(mask, &arg))
        }
        "precompose" => {
            let (m, mp) = get("matrix")?;
            let map = dense(m, &mp)?;
            if map.cols() != d {
                return Err(err(&mp, format!("expected {d} columns, got {}", map.cols())));
            }
            let (o, opath) = get("offset")?;
            let shift = vector(o, &opath)?;
            let arg = child("arg", map.rows())?;
            at(path, ConvexMatrixExpr::precompose(&arg, map, shift))
        }
        "double" => {
            let arg = child("arg", d)?;
            at(path, ConvexMatrixExpr::double(&arg))
        }
        other => Err(err(&op_path, format!("unknown operator `{other}`"))),
    }
}

fn parse_atom(v: &Value, path: &str, d: usize) -> Result<ScalarAtom> {
    let obj = object(v, path)?;
    let kind_path = join(path, "atom");
    let kind = field(obj, path, "atom")?
        .as_str()
        .ok_or_else(|| err(&kind_path, "expected a string"))?;
    let get = |key: &str| field(obj, path, key).map(|v| (v, join(path, key)));
    let check_len = |a: &[f64], p: &str| -> Result<()> {
        if a.len() != d {
            return Err(err(p, format!("expected length {d}, got {}", a.len())));
        }
        Ok(())
    };
    match kind {
        "abs_coord" => {
            let (i, ip) = get("index")?;
            at(&ip, ScalarAtom::abs_coord(uint(i, &ip)?, d))
        }
        "affine_scalar" => {
            let (a, ap) = get("a")?;
            let a = vector(a, &ap)?;
            check_len(&a, &ap)?;
            let (b, bp) = get("b")?;
            at(path, ScalarAtom::affine(a, number(b, &bp)?))
        }
        "max_affine" => {
            let (ps, pp) = get("pieces")?;
            let items = array(ps, &pp)?;
            if items.is_empty() {
                return Err(err(&pp, "expected at least one piece"));
            }
            let mut pieces = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let kp = format!("{pp}[{k}]");
                let o = object(item, &kp)?;
                let ap = join(&kp, "a");
                let a = vector(field(o, &kp, "a")?, &ap)?;
                check_len(&a, &ap)?;
                let b = number(field(o, &kp, "b")?, &join(&kp, "b"))?;
                pieces.push((a, b));
            }
            at(path, ScalarAtom::max_affine(pieces))
        }
        other => Err(err(&kind_path, format!("unknown atom kind `{other}`"))),
    }
}
