//! Machine format for series prefixes and errors.
//!
//! ```text
//! {"terms":[{"coeff":"p/q","mono":{"-1":"-1","1":"-1/2"}}],"exhausted":false,"budget_hit":false}
//! ```

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::monomial::{Level, Monomial};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::series::{Prefix, Term};

pub fn monomial_to_json(m: &Monomial) -> Value {
    let map: Map<String, Value> = m
        .exps()
        .iter()
        .map(|(l, r)| (l.get().to_string(), Value::String(format_rational(r))))
        .collect();
    Value::Object(map)
}

pub fn monomial_from_json(v: &Value) -> Result<Monomial> {
    let bad = |what: String| Error::MalformedInput(format!("monomial JSON: {what}"));
    let obj = v.as_object().ok_or_else(|| bad("expected an object".into()))?;
    let mut pairs = Vec::with_capacity(obj.len());
    for (k, e) in obj {
        let level: i32 = k.parse().map_err(|_| bad(format!("level key `{k}`")))?;
        let level = Level::new(level)?;
        let r = e
            .as_str()
            .and_then(parse_rational)
            .ok_or_else(|| bad(format!("exponent {e}")))?;
        if r.is_zero() {
            return Err(bad(format!("zero exponent at level {k}")));
        }
        pairs.push((level, r));
    }
    Ok(Monomial::from_pairs(pairs))
}

pub fn term_to_json(t: &Term) -> Value {
    json!({"coeff": t.coeff.to_string(), "mono": monomial_to_json(&t.mono)})
}

pub fn prefix_to_json(p: &Prefix) -> Value {
    json!({
        "terms": p.terms.iter().map(term_to_json).collect::<Vec<_>>(),
        "exhausted": p.exhausted,
        "budget_hit": p.budget_hit.is_some(),
    })
}

/// Reads a prefix back. Symbolic coefficients (`logof(2)`, ...) are parsed
/// with the expression language.
pub fn prefix_from_json(v: &Value) -> Result<Prefix> {
    let bad = |what: &str| Error::MalformedInput(format!("prefix JSON: {what}"));
    let terms = v
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `terms` array"))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let text = t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff must be a string"))?;
        let coeff = match parse_rational(text) {
            Some(q) => Scalar::from(q),
            None => crate::dsl::parse_scalar(text)?,
        };
        let mono = monomial_from_json(t.get("mono").ok_or_else(|| bad("missing mono"))?)?;
        out.push(Term { coeff, mono });
    }
    let flag = |key: &str| v.get(key).and_then(Value::as_bool).ok_or_else(|| bad(&format!("missing `{key}`")));
    let exhausted = flag("exhausted")?;
    let hit = flag("budget_hit")?;
    Ok(Prefix {
        terms: out,
        exhausted,
        budget_hit: hit.then(|| Error::MalformedInput("budget hit (from JSON)".into())),
    })
}

/// `{"error": kind, "detail": message}`.
pub fn error_to_json(e: &Error) -> Value {
    json!({"error": e.kind(), "detail": e.to_string()})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn schema() {
        let m = Monomial::from_pairs([(Level::EXP, int(-1)), (Level::LOG, rat(-1, 2))]);
        let p = Prefix {
            terms: vec![Term::new(rat(3, 4), m)],
            exhausted: true,
            budget_hit: None,
        };
        let v = prefix_to_json(&p);
        assert_eq!(
            v.to_string(),
            r#"{"terms":[{"coeff":"3/4","mono":{"-1":"-1","1":"-1/2"}}],"exhausted":true,"budget_hit":false}"#
        );
        let back = prefix_from_json(&v).unwrap();
        assert_eq!(back.terms, p.terms);
        assert!(back.exhausted && back.budget_hit.is_none());
        assert!(monomial_from_json(&json!({"0": "0"})).is_err());
        assert!(monomial_from_json(&json!({"-2": "1"})).is_err());
        let e = error_to_json(&Error::UnboundName("f".into()));
        assert_eq!(e["error"], "UnboundName");
    }
}
