//! Text formats accepted from users: norm descriptors, ε lists and
//! quadrature rule documents.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::projection::{NormFn, NormSpec};
use crate::quadrature::QuadratureRule;

fn parse_p(text: &str) -> Result<f64> {
    let t = text.trim();
    let p = match t {
        "inf" | "Inf" | "infinity" | "∞" => f64::INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("'{t}' is not an exponent")))?,
    };
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("p-norms need p ≥ 1, got '{t}'")));
    }
    Ok(p)
}

/// Parses `2`, `p=1.5`, `inf`, or `max:1,inf` (the largest of several p-norms,
/// a custom norm without a dual).
pub fn parse_norm(text: &str) -> Result<NormSpec> {
    let t = text.trim();
    if let Some(list) = t.strip_prefix("max:") {
        let parts: Vec<NormSpec> = list.split(',').map(|s| NormSpec::p(parse_p(s)?)).collect::<Result<_>>()?;
        if parts.is_empty() {
            return Err(Error::Parse("max: needs at least one exponent".into()));
        }
        let name = format!("max:{}", parts.iter().map(|n| n.describe()).collect::<Vec<_>>().join(","));
        let evaluator: NormFn = Arc::new(move |z: &[Complex64]| parts.iter().map(|n| n.eval(z)).fold(0.0, f64::max));
        return Ok(NormSpec::custom(name, evaluator, None));
    }
    let body = t.strip_prefix("p=").unwrap_or(t);
    NormSpec::p(parse_p(body)?)
}

/// Parses a comma-separated list of ε values, each in `(0, 1)`.
pub fn parse_epsilons(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let t = item.trim();
        let e: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("'{t}' is not a number")))?;
        if e >= 1.0 {
            return Err(Error::domain(format!("ε = {t}: ε < 1 required; the limit is analytic")));
        }
        if !(e > 0.0) {
            return Err(Error::domain(format!("ε = {t}: ε must be positive")));
        }
        out.push(e);
    }
    Ok(out)
}

/// Parses a JSON rule such as `{"scheme":"product-rule","radial_nodes":64,"sphere_nodes":128}`
/// and validates it for dimension `d`.
pub fn parse_rule(text: &str, d: usize) -> Result<QuadratureRule> {
    let rule: QuadratureRule = serde_json::from_str(text).map_err(|e| Error::Parse(format!("rule: {e}")))?;
    rule.validate(d)?;
    Ok(rule)
}
