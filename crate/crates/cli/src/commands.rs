use bergman_core::config::{parse_epsilons, parse_norm, parse_rule};
use bergman_core::constants::{c_exact, c_optimize, CValue, DEFAULT_RESTARTS};
use bergman_core::extremal::{convergence_table_via, ExtremalConfig, Route, DEFAULT_EPSILONS};
use bergman_core::geometry::{identity_residuals, mobius, sample_ball};
use bergman_core::multiindex::enumerate_indices;
use bergman_core::projection::{apply_t, BoundedFunction, Family};
use bergman_core::quadrature::{integrate_weighted, j_numeric, transform_sides, IntegralResult};
use bergman_core::special::{j_closed_form, reference_constants, theoretical_norm, ReferenceKind, ReferenceValue};
use bergman_core::{BallPoint, Complex64, Error, KernelParams, NormSpec, QuadratureRule};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;

use crate::output::{err, jerr, jnum, num, Report};

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or out-of-range parameters; exit 2.
    Config(String),
    /// A numerical failure during the run; exit 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Complex dimension d ≥ 1.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Weight exponent σ > −1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub sigma: f64,
    /// Derivative order n ≥ 1.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

impl KernelArgs {
    pub fn params(&self) -> Result<KernelParams, Failure> {
        Ok(KernelParams::new(self.d, self.sigma, self.n)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    /// p-norm exponent on the derivative tuple: a number ≥ 1 or `inf`.
    #[arg(long, conflicts_with = "norm")]
    pub p: Option<String>,
    /// Norm descriptor: `2`, `p=1.5`, `inf`, `max:1,inf`.
    #[arg(long)]
    pub norm: Option<String>,
}

impl NormArgs {
    pub fn spec(&self) -> Result<NormSpec, Failure> {
        let text = self.norm.as_deref().or(self.p.as_deref()).unwrap_or("2");
        Ok(parse_norm(text)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Monte Carlo sample count (switches to the Monte Carlo rule).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gauss–Jacobi nodes in the radial variable.
    #[arg(long)]
    pub radial_nodes: Option<usize>,
    /// Trapezoid nodes in the focus phase.
    #[arg(long)]
    pub sphere_nodes: Option<usize>,
    /// Nodes per transverse coordinate (d = 2).
    #[arg(long)]
    pub transverse_nodes: Option<usize>,
    /// A JSON rule document; overrides the other rule flags.
    #[arg(long, conflicts_with_all = ["samples", "radial_nodes", "sphere_nodes", "transverse_nodes"])]
    pub rule: Option<String>,
    /// Seed for Monte Carlo rules and randomized probes.
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

impl QuadArgs {
    pub fn rule(&self, d: usize) -> Result<QuadratureRule, Failure> {
        if let Some(text) = &self.rule {
            return Ok(parse_rule(text, d)?);
        }
        let rule = if let Some(samples) = self.samples {
            if self.radial_nodes.is_some() || self.sphere_nodes.is_some() || self.transverse_nodes.is_some() {
                return Err(Failure::Config("--samples cannot be combined with product-rule node counts".into()));
            }
            QuadratureRule::monte_carlo(samples, self.seed)
        } else if self.radial_nodes.is_some() || self.sphere_nodes.is_some() || self.transverse_nodes.is_some() {
            let (r, s, t) = match QuadratureRule::default_for(d.min(2)) {
                QuadratureRule::ProductRule {
                    radial_nodes,
                    sphere_nodes,
                    transverse_nodes,
                } => (radial_nodes, sphere_nodes, transverse_nodes),
                QuadratureRule::MonteCarlo { .. } => unreachable!("d ≤ 2 uses the product rule"),
            };
            QuadratureRule::product(
                self.radial_nodes.unwrap_or(r),
                self.sphere_nodes.unwrap_or(s),
                self.transverse_nodes.unwrap_or(t),
            )
        } else {
            match QuadratureRule::default_for(d) {
                QuadratureRule::MonteCarlo { samples, .. } => QuadratureRule::monte_carlo(samples, self.seed),
                rule => rule,
            }
        };
        rule.validate(d)?;
        Ok(rule)
    }
}

fn rule_json(rule: &QuadratureRule) -> Value {
    serde_json::to_value(rule).unwrap_or(Value::Null)
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Keeps the case with the largest residual-to-tolerance ratio.
fn worst(name: String, cases: impl IntoIterator<Item = (f64, f64)>) -> Check {
    let (residual, tolerance) = cases
        .into_iter()
        .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
        .unwrap_or((0.0, 0.0));
    Check {
        name,
        residual,
        tolerance,
    }
}

fn quad_case(a: &IntegralResult, exact: Complex64) -> (f64, f64) {
    ((a.value - exact).norm(), 3.0 * a.error_estimate)
}

pub fn verify(kernel: &KernelArgs, quad: &QuadArgs, max_residual: f64) -> Outcome {
    if !(max_residual >= 0.0) {
        return Err(Failure::Config(format!("--max-residual must be non-negative, got {max_residual}")));
    }
    let params = kernel.params()?;
    let rule = quad.rule(params.d)?;
    let d = params.d;
    let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
    let mut checks = Vec::new();

    let (mut r1, mut r2, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let z = sample_ball(&mut rng, d, 0.99);
        let w = sample_ball(&mut rng, d, 1.0);
        let (a, b) = identity_residuals(&z, &w)?;
        r1 = r1.max(a);
        r2 = r2.max(b);
        let back = mobius(&z, &mobius(&z, &w)?)?;
        let diff = back.coords().iter().zip(w.coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        inv = inv.max(diff);
    }
    for (name, residual) in [("identity-modulus", r1), ("identity-pairing", r2), ("involution", inv)] {
        checks.push(Check {
            name: name.into(),
            residual,
            tolerance: max_residual,
        });
    }

    let one = integrate_weighted(|_| Complex64::new(1.0, 0.0), &params, &rule)?;
    checks.push(worst("normalization".into(), [quad_case(&one, Complex64::new(1.0, 0.0))]));

    let z = sample_ball(&mut rng, d, 0.9);
    let phis: [(&str, fn(&[Complex64]) -> Complex64); 3] = [
        ("transform-one", |_| Complex64::new(1.0, 0.0)),
        ("transform-modulus", |w| Complex64::new(w.iter().map(|c| c.norm_sqr()).sum(), 0.0)),
        ("transform-re-w1", |w| Complex64::new(w[0].re, 0.0)),
    ];
    for (name, phi) in phis {
        let (lhs, rhs) = transform_sides(phi, &params, &z, &rule)?;
        checks.push(worst(
            name.into(),
            [((lhs.value - rhs.value).norm(), 3.0 * (lhs.error_estimate + rhs.error_estimate))],
        ));
    }

    let probes: Vec<BallPoint> = (0..3).map(|_| sample_ball(&mut rng, d, 0.8)).collect();
    for order in 0..=3usize {
        let betas = if order == 0 {
            vec![bergman_core::MultiIndex::new(vec![0; d])]
        } else {
            enumerate_indices(d, order)?
        };
        for beta in betas {
            let b = beta.clone();
            let g = BoundedFunction::from_unimodular(Family::PhaseField, format!("z^{beta}"), Arc::new(move |w| b.monomial(w)));
            let mut cases = Vec::new();
            for z in &probes {
                let r = apply_t(&g, &params, z, &rule)?;
                cases.push(quad_case(&r, beta.monomial(z.coords())));
            }
            checks.push(worst(format!("reproducing-{beta}"), cases));
        }
    }

    let passed = checks.iter().all(Check::pass);
    Ok(Report {
        header: vec!["check", "residual", "tolerance", "pass"],
        rows: checks
            .iter()
            .map(|c| vec![c.name.clone(), err(c.residual), err(c.tolerance), c.pass().to_string()])
            .collect(),
        json: json!({
            "d": params.d,
            "sigma": jnum(params.sigma),
            "n": params.n,
            "rule": rule_json(&rule),
            "checks": checks.iter().map(|c| json!({
                "name": c.name,
                "residual": jerr(c.residual),
                "tolerance": jerr(c.tolerance),
                "pass": c.pass(),
            })).collect::<Vec<_>>(),
            "pass": passed,
        }),
        passed,
    })
}

// ---------------------------------------------------------------------------
// reference

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefKind {
    All,
    L1,
    L2,
    Liu,
    Disc,
    Gradient,
}

/// Constants whose formula fixes some parameters say so when the request differs.
fn scope_note(kind: ReferenceKind, params: &KernelParams) -> Option<String> {
    match kind {
        ReferenceKind::Disc if params.d != 1 || params.sigma != 0.0 => {
            Some(format!("disc constant: d=1, σ=0, order n={}", params.n))
        }
        ReferenceKind::Liu { .. } if params.sigma != 0.0 => Some("unweighted bounds: σ=0".to_string()),
        _ => None,
    }
}

pub fn reference(kernel: &KernelArgs, which: RefKind, p: f64) -> Outcome {
    let params = kernel.params()?;
    let kinds: Vec<(&str, ReferenceKind)> = [
        ("l1", ReferenceKind::L1),
        ("l2", ReferenceKind::L2),
        ("liu", ReferenceKind::Liu { p }),
        ("disc", ReferenceKind::Disc),
        ("gradient", ReferenceKind::Gradient),
    ]
    .into_iter()
    .filter(|(name, _)| which == RefKind::All || RefKind::from_str(name, true).ok() == Some(which))
    .collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (name, kind) in kinds {
        match reference_constants(kind, &params) {
            Ok(value) => {
                let (lower, upper, label) = match value {
                    ReferenceValue::Exact { value } => (value, value, "exact"),
                    ReferenceValue::Interval { lower, upper } => (lower, upper, "interval"),
                };
                let note = scope_note(kind, &params);
                rows.push(vec![name.to_string(), num(lower), num(upper), note.clone().unwrap_or_default()]);
                let mut entry = json!({"kind": name, "type": label, "lower": jnum(lower), "upper": jnum(upper)});
                if let Some(note) = note {
                    entry["note"] = json!(note);
                }
                entries.push(entry);
            }
            Err(e) if which == RefKind::All => {
                rows.push(vec![name.to_string(), String::new(), String::new(), e.to_string()]);
                entries.push(json!({"kind": name, "type": "unavailable", "note": e.to_string()}));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report {
        header: vec!["kind", "lower", "upper", "note"],
        rows,
        json: json!({
            "d": params.d,
            "sigma": jnum(params.sigma),
            "n": params.n,
            "p": jnum(p),
            "constants": entries,
        }),
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// norm

struct CSummary {
    kind: &'static str,
    lower: Option<f64>,
    upper: Option<f64>,
    estimate: f64,
}

fn c_summary(norm: &NormSpec, d: usize, n: usize, restarts: usize, seed: u64) -> Result<CSummary, Failure> {
    let exact = match c_exact(norm, d, n) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(match exact {
        Some(CValue::Exact { value }) => CSummary {
            kind: "exact",
            lower: Some(value),
            upper: Some(value),
            estimate: value,
        },
        Some(CValue::Interval { lower, upper }) => CSummary {
            kind: "interval",
            lower: Some(lower),
            upper: Some(upper),
            estimate: c_optimize(norm, d, n, restarts, seed)?.value,
        },
        None => CSummary {
            kind: "estimate",
            lower: None,
            upper: None,
            estimate: c_optimize(norm, d, n, restarts, seed)?.value,
        },
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn jopt(x: Option<f64>) -> Value {
    x.map(jnum).unwrap_or(Value::Null)
}

pub fn norm(kernel: &KernelArgs, norm_args: &NormArgs, seed: u64) -> Outcome {
    let params = kernel.params()?;
    let norm = norm_args.spec()?;
    let c = c_summary(&norm, params.d, params.n, DEFAULT_RESTARTS, seed)?;
    let t = |x: f64| theoretical_norm(&params, x);
    let (v_lower, v_upper) = match (c.lower, c.upper) {
        (Some(l), Some(u)) => (Some(t(l)?), Some(t(u)?)),
        _ => (None, None),
    };
    let v_est = t(c.estimate)?;
    let value = match c.kind {
        "exact" => json!({"exact": jnum(v_est)}),
        "interval" => json!({"lower": jopt(v_lower), "upper": jopt(v_upper), "estimate": jnum(v_est)}),
        _ => json!({"estimate": jnum(v_est)}),
    };
    Ok(Report {
        header: vec![
            "d", "sigma", "n", "norm", "c_kind", "c_lower", "c_upper", "c_estimate", "lambda", "value_lower",
            "value_upper", "value_estimate",
        ],
        rows: vec![vec![
            params.d.to_string(),
            num(params.sigma),
            params.n.to_string(),
            norm.describe(),
            c.kind.to_string(),
            opt(c.lower),
            opt(c.upper),
            num(c.estimate),
            num(params.lambda),
            opt(v_lower),
            opt(v_upper),
            num(v_est),
        ]],
        json: json!({
            "d": params.d,
            "sigma": jnum(params.sigma),
            "n": params.n,
            "norm": norm.describe(),
            "C": {"kind": c.kind, "lower": jopt(c.lower), "upper": jopt(c.upper), "estimate": jnum(c.estimate)},
            "lambda": jnum(params.lambda),
            "value": value,
        }),
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// jvalue

pub fn jvalue(c: f64, t: f64, d: usize, radii: &str, quad: &QuadArgs) -> Outcome {
    let sup = j_closed_form(c, t, d)?;
    let rule = quad.rule(d)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut passed = true;
    for item in radii.split(',') {
        let r: f64 = item
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("'{}' is not a radius", item.trim())))?;
        if !(0.0..1.0).contains(&r) {
            return Err(Failure::Config(format!("radius {r} must lie in [0, 1)")));
        }
        let v = j_numeric(c, t, &BallPoint::basis(d, 0).scale(r), &rule)?;
        let within = v.re() <= sup + 3.0 * v.error_estimate;
        passed &= within;
        rows.push(vec![num(r), num(v.re()), err(v.error_estimate), num(sup), within.to_string()]);
        entries.push(json!({
            "r": jnum(r),
            "numeric": jnum(v.re()),
            "error": jerr(v.error_estimate),
            "closed_form": jnum(sup),
            "within_bound": within,
        }));
    }
    Ok(Report {
        header: vec!["r", "numeric", "error", "closed_form", "within_bound"],
        rows,
        json: json!({"c": jnum(c), "t": jnum(t), "d": d, "rule": rule_json(&rule), "rows": entries}),
        passed,
    })
}

// ---------------------------------------------------------------------------
// converge

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Transformed,
    Direct,
}

pub fn converge(kernel: &KernelArgs, norm_args: &NormArgs, eps: Option<&str>, route: RouteArg, quad: &QuadArgs) -> Outcome {
    let params = kernel.params()?;
    let norm = norm_args.spec()?;
    let epsilons = match eps {
        Some(text) => parse_epsilons(text)?,
        None => DEFAULT_EPSILONS.to_vec(),
    };
    let rule = quad.rule(params.d)?;
    let cfg = ExtremalConfig::new(params, norm, epsilons)?;
    let route = match route {
        RouteArg::Transformed => Route::Transformed,
        RouteArg::Direct => Route::Direct,
    };
    let target = cfg.theoretical()?;
    let table = convergence_table_via(&cfg, &rule, route)?;
    let passed = table.iter().all(|r| r.value <= target + 3.0 * r.error);
    let mut rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| vec![num(r.epsilon), num(r.value), err(r.error), num(r.ratio)])
        .collect();
    rows.push(vec!["theoretical_norm".into(), num(target), String::new(), "1".into()]);
    Ok(Report {
        header: vec!["epsilon", "value", "error", "ratio"],
        rows,
        json: json!({
            "d": params.d,
            "sigma": jnum(params.sigma),
            "n": params.n,
            "norm": cfg.norm().describe(),
            "route": serde_json::to_value(route).unwrap_or(Value::Null),
            "C": jnum(cfg.c_value()),
            "theoretical_norm": jnum(target),
            "rule": rule_json(&rule),
            "rows": table.iter().map(|r| json!({
                "epsilon": jnum(r.epsilon),
                "value": jnum(r.value),
                "error": jerr(r.error),
                "ratio": jnum(r.ratio),
            })).collect::<Vec<_>>(),
        }),
        passed,
    })
}

// ---------------------------------------------------------------------------
// cp

pub fn cp(ds: &[usize], ns: &[usize], ps: &[String], restarts: usize, seed: u64) -> Outcome {
    if restarts == 0 {
        return Err(Failure::Config("--restarts must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for &d in ds {
        for &n in ns {
            for p in ps {
                let norm = parse_norm(p)?;
                let exact = match c_exact(&norm, d, n) {
                    Ok(v) => Some(v),
                    Err(Error::Unsupported(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                let est = c_optimize(&norm, d, n, restarts, seed)?;
                let (kind, lower, upper) = match exact {
                    Some(CValue::Exact { value }) => ("exact", Some(value), Some(value)),
                    Some(CValue::Interval { lower, upper }) => ("interval", Some(lower), Some(upper)),
                    None => ("estimate", None, None),
                };
                let label = norm.describe();
                let label = label.strip_prefix("p=").unwrap_or(&label).to_string();
                rows.push(vec![
                    d.to_string(),
                    n.to_string(),
                    label.clone(),
                    opt(lower),
                    opt(upper),
                    num(est.value),
                    est.converged.to_string(),
                ]);
                entries.push(json!({
                    "d": d,
                    "n": n,
                    "p": label,
                    "kind": kind,
                    "lower": jopt(lower),
                    "upper": jopt(upper),
                    "estimate": jnum(est.value),
                    "converged": est.converged,
                    "maximizer": est.maximizer.coords().iter().map(|c| json!([jnum(c.re), jnum(c.im)])).collect::<Vec<_>>(),
                }));
            }
        }
    }
    Ok(Report {
        header: vec!["d", "n", "p", "lower", "upper", "estimate", "converged"],
        rows,
        json: json!({"restarts": restarts, "seed": seed, "rows": entries}),
        passed: true,
    })
}
