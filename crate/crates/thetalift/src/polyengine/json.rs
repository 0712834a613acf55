use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::coeff::{Coeff, PiRat};
use super::poly::MatrixPolynomial;
use crate::error::{Error, Result};
use crate::exactalg::Rat;

/// A polynomial read from JSON.  Integer pairs are rationals `[num, den]`; pairs containing
/// a float are complex `[re, im]`.  The result is exact if no complex coefficient occurs.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedPolynomial {
    Exact(MatrixPolynomial<PiRat>),
    Numeric(MatrixPolynomial<Complex64>),
}

impl ParsedPolynomial {
    pub fn to_complex(&self) -> MatrixPolynomial<Complex64> {
        match self {
            ParsedPolynomial::Exact(p) => p.map_coeffs(|c| c.to_c64()),
            ParsedPolynomial::Numeric(p) => p.clone(),
        }
    }
}

/// Serialise as `[{"monomial": [[i, j, exp], ...], "coeff": ...}]` with 1-based grid indices.
/// Rational coefficients become `[num, den]`; anything involving `1/π` or complex values
/// becomes `[re, im]`.
pub fn to_json<C: Coeff>(p: &MatrixPolynomial<C>) -> Value {
    assert_eq!(p.extra(), 0, "auxiliary variables cannot be serialised");
    let cols = p.cols();
    let terms: Vec<Value> = p
        .terms()
        .iter()
        .map(|(m, c)| {
            let monomial: Vec<Value> = m.iter().map(|&(v, e)| json!([v as usize / cols + 1, v as usize % cols + 1, e])).collect();
            json!({ "monomial": monomial, "coeff": coeff_json(c) })
        })
        .collect();
    Value::Array(terms)
}

fn coeff_json<C: Coeff>(c: &C) -> Value {
    let any: &dyn std::any::Any = c;
    if let Some(r) = any.downcast_ref::<PiRat>().and_then(PiRat::as_rational) {
        if let (Ok(n), Ok(d)) = (i64::try_from(r.numer().clone()), i64::try_from(r.denom().clone())) {
            return json!([n, d]);
        }
    }
    let z = c.to_c64();
    json!([z.re, z.im])
}

/// Parse the polynomial JSON format on a `rows × cols` grid.
pub fn from_json(value: &Value, rows: usize, cols: usize) -> Result<ParsedPolynomial> {
    let arr = value.as_array().ok_or_else(|| Error::Parse("polynomial must be a JSON array".into()))?;
    let mut exact_terms = Vec::new();
    let mut numeric_terms = Vec::new();
    let mut all_exact = true;
    for term in arr {
        let mono = term
            .get("monomial")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("term without \"monomial\" list".into()))?;
        let mut m = Vec::with_capacity(mono.len());
        for entry in mono {
            let triple: Vec<u64> = entry
                .as_array()
                .filter(|a| a.len() == 3)
                .and_then(|a| a.iter().map(Value::as_u64).collect())
                .ok_or_else(|| Error::Parse(format!("bad monomial entry {entry}")))?;
            let (i, j, e) = (triple[0] as usize, triple[1] as usize, triple[2]);
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(Error::Parse(format!("monomial index ({i},{j}) outside the {rows}x{cols} grid")));
            }
            m.push((((i - 1) * cols + (j - 1)) as u16, e as u16));
        }
        let coeff = term
            .get("coeff")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse("coeff must be a pair".into()))?;
        let value = match (coeff[0].as_i64(), coeff[1].as_i64()) {
            (Some(_), Some(0)) => return Err(Error::Parse("zero denominator".into())),
            (Some(n), Some(d)) => {
                let r = PiRat::rational(Rat::new(BigInt::from(n), BigInt::from(d)));
                let z = r.to_c64();
                exact_terms.push((m.clone(), r));
                z
            }
            _ => {
                all_exact = false;
                let re = coeff[0].as_f64().ok_or_else(|| Error::Parse("non-numeric coefficient".into()))?;
                let im = coeff[1].as_f64().ok_or_else(|| Error::Parse("non-numeric coefficient".into()))?;
                Complex64::new(re, im)
            }
        };
        numeric_terms.push((m, value));
    }
    Ok(if all_exact {
        ParsedPolynomial::Exact(MatrixPolynomial::from_terms(rows, cols, 0, exact_terms))
    } else {
        ParsedPolynomial::Numeric(MatrixPolynomial::from_terms(rows, cols, 0, numeric_terms))
    })
}

#[cfg(test)]
mod tests {
    use super::super::km::{build_p_alpha, build_q_alpha, IndexTuple};
    use super::*;

    #[test]
    fn round_trip_exact() {
        let p = build_p_alpha::<PiRat>(IndexTuple::new(1, 2, 3, 3), 3, 2).unwrap();
        let v = to_json(&p);
        assert_eq!(from_json(&v, 5, 2).unwrap(), ParsedPolynomial::Exact(p));
    }

    #[test]
    fn pi_terms_become_complex() {
        let q = build_q_alpha(IndexTuple::new(1, 1, 2, 2), 2, 1).unwrap();
        let v = to_json(&q);
        match from_json(&v, 3, 2).unwrap() {
            ParsedPolynomial::Numeric(n) => {
                let pt = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
                assert!((n.eval_f64(&pt) - q.eval_f64(&pt)).norm() < 1e-14);
            }
            other => panic!("expected numeric polynomial, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(from_json(&json!({}), 2, 2).is_err());
        assert!(from_json(&json!([{"monomial": [[3, 1, 1]], "coeff": [1, 1]}]), 2, 2).is_err());
        assert!(from_json(&json!([{"monomial": [[1, 1, 1]], "coeff": [1, 0]}]), 2, 2).is_err());
        assert!(from_json(&json!([{"monomial": [[1, 1, 1]]}]), 2, 2).is_err());
    }
}
