//! Browser bindings: discriminant forms, Weil representation matrices and
//! genus-2 theta values for lattices given by their Gram matrix.
//!
//! Every exported function takes and returns JSON strings; the plain-Rust
//! functions behind them are public so they can be tested natively.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use thetalift::lattice::{EvenLattice, GrassmannianFrame};
use thetalift::polyengine::MatrixPolynomial;
use thetalift::theta::{theta_genus2, zero_pair, SiegelPoint, ThetaSpace};
use thetalift::weilrep::{Mp4Word, WeilRep2};

/// Largest discriminant order accepted for Weil matrices (the matrix has `|D|⁴` entries).
const MAX_WEIL_ORDER: usize = 16;

fn parse_lattice(gram_json: &str) -> Result<EvenLattice, String> {
    let gram: Vec<Vec<i64>> = serde_json::from_str(gram_json).map_err(|e| format!("Gram matrix: {e}"))?;
    EvenLattice::from_i64("input", &gram).map_err(|e| e.to_string())
}

/// `{"orders": [...], "q": ["a/b", ...], "order": n, "signature": [b⁺, b⁻]}`.
pub fn discriminant_json(gram_json: &str) -> Result<String, String> {
    let l = parse_lattice(gram_json)?;
    let d = l.discriminant_group();
    let gens = d.orders().len();
    let q: Vec<String> = (0..gens)
        .map(|k| {
            let residues: Vec<u64> = (0..gens).map(|i| u64::from(i == k)).collect();
            d.q(d.index(&residues)).to_string()
        })
        .collect();
    Ok(json!({"orders": d.orders(), "q": q, "order": d.order(), "signature": [l.bplus(), l.bminus()]}).to_string())
}

/// `{"dim": n, "matrix": [[[re, im], ...], ...]}` for `ρ_{L,2}(word)`.
pub fn weil_matrix_json(gram_json: &str, word: &str) -> Result<String, String> {
    let l = parse_lattice(gram_json)?;
    if l.discriminant_group().order() > MAX_WEIL_ORDER {
        return Err(format!("|D_L| exceeds {MAX_WEIL_ORDER}; the matrix would be too large to display"));
    }
    let w = Mp4Word::parse(word).map_err(|e| e.to_string())?;
    let m = WeilRep2::new(&l).matrix(&w);
    let rows: Vec<Value> =
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())).collect();
    Ok(json!({"dim": m.nrows(), "matrix": rows}).to_string())
}

/// `{"values": [[re, im], ...], "radius": r, "tail_estimate": t}` for
/// `Θ_{L,2}(τ)` with the base frame and the constant polynomial.
pub fn theta_json(gram_json: &str, tau_json: &str, eps: f64) -> Result<String, String> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err("ε must lie in (0, 1)".into());
    }
    let l = parse_lattice(gram_json)?;
    let t: [[f64; 2]; 3] = serde_json::from_str(tau_json).map_err(|e| format!("τ must be [[re,im],[re,im],[re,im]]: {e}"))?;
    let c = |k: usize| Complex64::new(t[k][0], t[k][1]);
    let tau = SiegelPoint::from_entries(c(0), c(1), c(2)).map_err(|e| e.to_string())?;
    let frame = GrassmannianFrame::base(&l).map_err(|e| e.to_string())?;
    let space = ThetaSpace::for_lattice(&l, &frame).map_err(|e| e.to_string())?;
    let n = l.rank();
    let one = MatrixPolynomial::constant(space.rows(), 2, 0, Complex64::new(1.0, 0.0));
    let z = zero_pair(n);
    let v = theta_genus2(&space, &tau, &z, &z, &one, eps).map_err(|e| e.to_string())?;
    let values: Vec<[f64; 2]> = v.value.iter().map(|c| [c.re, c.im]).collect();
    Ok(json!({"values": values, "radius": v.radius, "tail_estimate": v.tail_estimate}).to_string())
}

#[wasm_bindgen]
pub fn lattice_disc(gram_json: &str) -> Result<String, JsValue> {
    discriminant_json(gram_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn weil_matrix(gram_json: &str, word: &str) -> Result<String, JsValue> {
    weil_matrix_json(gram_json, word).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn theta_eval(gram_json: &str, tau_json: &str, eps: f64) -> Result<String, JsValue> {
    theta_json(gram_json, tau_json, eps).map_err(|e| JsValue::from_str(&e))
}
