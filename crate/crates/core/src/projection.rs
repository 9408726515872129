//! The Bergman projection `T_σ`, its differentiated kernel, the derivative
//! tuple `D_z(T_σ G)(z)` and estimates of the order-`n` Bloch semi-norm.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{inner_slices, sample_ball, sample_sphere, BallPoint};
use crate::multiindex::{MonomialBasis, MonomialVector, MultiIndex};
use crate::quadrature::{
    integrate_weighted_focused, integrate_weighted_vec, IntegralResult, QuadratureRule, VectorFn,
    PEAK_LIMIT,
};
use crate::special::{ln_gamma_pos, KernelParams};

pub type NormFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;
pub type WitnessFn = Arc<dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync>;

/// Dual data for a custom norm: a witness map `Z ↦ W` with `|⟨Z,W⟩| = |Z|`,
/// and the dual norm used to check `|W|_* = 1`.
#[derive(Clone)]
pub struct CustomDual {
    pub witness: WitnessFn,
    pub dual_norm: NormFn,
}

#[derive(Clone)]
pub enum NormKind {
    /// `|Z|_p`, `p ∈ [1, ∞]`.
    P(f64),
    Custom {
        name: String,
        evaluator: NormFn,
        dual: Option<CustomDual>,
    },
}

/// A conjugation-invariant norm on `C^d̃`.
#[derive(Clone)]
pub struct NormSpec {
    kind: NormKind,
}

impl fmt::Debug for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormSpec({})", self.describe())
    }
}

fn p_norm(z: &[Complex64], p: f64) -> f64 {
    if p == 1.0 {
        return z.iter().map(|c| c.norm()).sum();
    }
    let max = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p == 2.0 {
        return max * z.iter().map(|c| (c.norm() / max).powi(2)).sum::<f64>().sqrt();
    }
    max * z.iter().map(|c| (c.norm() / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn unit_phase(z: Complex64) -> Complex64 {
    let m = z.norm();
    if m > 0.0 {
        z / m
    } else {
        Complex64::new(1.0, 0.0)
    }
}

impl NormSpec {
    pub fn p(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::domain(format!("p-norms need p ≥ 1, got p = {p}")));
        }
        Ok(Self { kind: NormKind::P(p) })
    }

    pub fn euclidean() -> Self {
        Self { kind: NormKind::P(2.0) }
    }

    pub fn max_norm() -> Self {
        Self {
            kind: NormKind::P(f64::INFINITY),
        }
    }

    /// A user-supplied norm; the caller vouches for the norm axioms and `|conj Z| = |Z|`.
    pub fn custom(name: impl Into<String>, evaluator: NormFn, dual: Option<CustomDual>) -> Self {
        Self {
            kind: NormKind::Custom {
                name: name.into(),
                evaluator,
                dual,
            },
        }
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn p_value(&self) -> Option<f64> {
        match self.kind {
            NormKind::P(p) => Some(p),
            NormKind::Custom { .. } => None,
        }
    }

    pub fn dual_available(&self) -> bool {
        match &self.kind {
            NormKind::P(_) => true,
            NormKind::Custom { dual, .. } => dual.is_some(),
        }
    }

    /// `q = p/(p−1)` for p-norms.
    pub fn dual_exponent(&self) -> Option<f64> {
        self.p_value().map(|p| {
            if p == 1.0 {
                f64::INFINITY
            } else if p.is_infinite() {
                1.0
            } else {
                p / (p - 1.0)
            }
        })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            NormKind::P(p) if p.is_infinite() => "p=inf".to_string(),
            NormKind::P(p) => format!("p={p}"),
            NormKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match &self.kind {
            NormKind::P(p) => p_norm(z, *p),
            NormKind::Custom { evaluator, .. } => evaluator(z),
        }
    }

    pub fn dual_eval(&self, w: &[Complex64]) -> Result<f64> {
        match &self.kind {
            NormKind::P(_) => Ok(p_norm(w, self.dual_exponent().unwrap())),
            NormKind::Custom {
                dual: Some(dual), ..
            } => Ok((dual.dual_norm)(w)),
            NormKind::Custom { name, .. } => Err(Error::Unsupported(format!(
                "norm '{name}' has no dual; supply one to use duality-based operations"
            ))),
        }
    }

    /// A dual-unit `W` with `⟨Z, W⟩ = |Z|` (real, non-negative): the equality case of Hölder.
    pub fn dual_witness(&self, z: &[Complex64]) -> Result<MonomialVector> {
        match &self.kind {
            NormKind::P(p) => {
                let p = *p;
                if z.iter().all(|c| c.norm() == 0.0) {
                    return Err(Error::domain("the zero vector has no dual witness"));
                }
                let w: Vec<Complex64> = if p == 1.0 {
                    z.iter().map(|&c| unit_phase(c)).collect()
                } else if p.is_infinite() {
                    let (imax, _) = z
                        .iter()
                        .enumerate()
                        .fold((0, -1.0), |best, (i, c)| if c.norm() > best.1 { (i, c.norm()) } else { best });
                    z.iter()
                        .enumerate()
                        .map(|(i, &c)| if i == imax { unit_phase(c) } else { Complex64::new(0.0, 0.0) })
                        .collect()
                } else {
                    let max = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    let raw: Vec<Complex64> = z
                        .iter()
                        .map(|&c| unit_phase(c) * (c.norm() / max).powf(p - 1.0))
                        .collect();
                    let q = p / (p - 1.0);
                    let scale = p_norm(&raw, q);
                    raw.into_iter().map(|c| c / scale).collect()
                };
                Ok(MonomialVector(w))
            }
            NormKind::Custom {
                dual: Some(dual), ..
            } => Ok(MonomialVector((dual.witness)(z))),
            NormKind::Custom { name, .. } => Err(Error::Unsupported(format!(
                "norm '{name}' has no dual witness"
            ))),
        }
    }
}

/// `|Z|` for the given norm.
pub fn vector_norm(z: &MonomialVector, norm: &NormSpec) -> f64 {
    norm.eval(z.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Constant,
    PhaseField,
    ClippedPolynomial,
    ExtremalGm,
}

pub type BallFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// A measurable `G` on the ball with `‖G‖_∞ ≤ 1`.
#[derive(Clone)]
pub struct BoundedFunction {
    family: Family,
    description: String,
    evaluator: BallFn,
}

impl fmt::Debug for BoundedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundedFunction({:?}: {})", self.family, self.description)
    }
}

/// One term `c · w^hol · conj(w)^anti` of a polynomial in `w` and `w̄`.
#[derive(Debug, Clone)]
pub struct PolyTerm {
    pub coeff: Complex64,
    pub hol: MultiIndex,
    pub anti: MultiIndex,
}

impl BoundedFunction {
    /// Wraps an evaluator whose modulus is at most one by construction.
    pub fn from_unimodular(family: Family, description: impl Into<String>, evaluator: BallFn) -> Self {
        Self {
            family,
            description: description.into(),
            evaluator,
        }
    }

    pub fn constant(c: Complex64) -> Result<Self> {
        if c.norm() > 1.0 {
            return Err(Error::domain(format!("constant {c} has modulus above 1")));
        }
        Ok(Self {
            family: Family::Constant,
            description: format!("constant {c}"),
            evaluator: Arc::new(move |_| c),
        })
    }

    /// `exp(i (Re⟨w, a⟩ · k + b |w|²))`, unimodular.
    pub fn phase_field(a: Vec<Complex64>, k: f64, b: f64) -> Self {
        let description = format!("phase field k={k} b={b}");
        Self {
            family: Family::PhaseField,
            description,
            evaluator: Arc::new(move |w| {
                let w2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
                let arg = inner_slices(w, &a).re * k + b * w2;
                Complex64::from_polar(1.0, arg)
            }),
        }
    }

    /// A polynomial in `w, w̄` divided by 1.01 × its sampled sup over 10⁴ points
    /// (ball and sphere), then clipped to modulus one.
    pub fn clipped_polynomial(d: usize, terms: Vec<PolyTerm>, seed: u64) -> Result<Self> {
        if terms.iter().any(|t| t.hol.dim() != d || t.anti.dim() != d) {
            return Err(Error::domain("polynomial term dimension does not match d"));
        }
        let eval_poly = {
            let terms = terms.clone();
            move |w: &[Complex64]| -> Complex64 {
                terms
                    .iter()
                    .map(|t| t.coeff * t.hol.monomial(w) * t.anti.monomial(w).conj())
                    .sum()
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup: f64 = 0.0;
        for i in 0..10_000 {
            let p = if i % 2 == 0 {
                sample_sphere(&mut rng, d)
            } else {
                sample_ball(&mut rng, d, 1.0)
            };
            sup = sup.max(eval_poly(p.coords()).norm());
        }
        let scale = if sup > 0.0 { 1.0 / (1.01 * sup) } else { 1.0 };
        Ok(Self {
            family: Family::ClippedPolynomial,
            description: format!("clipped polynomial with {} terms", terms.len()),
            evaluator: Arc::new(move |w| {
                let v = eval_poly(w) * scale;
                let m = v.norm();
                if m > 1.0 {
                    v / m
                } else {
                    v
                }
            }),
        })
    }

    /// A random member of one of the first three families.
    pub fn random<R: Rng + ?Sized>(family: Family, d: usize, rng: &mut R) -> Result<Self> {
        let rc = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        match family {
            Family::Constant => {
                let c = rc(rng);
                Self::constant(if c.norm() > 1.0 { c / c.norm() } else { c })
            }
            Family::PhaseField => {
                let a = (0..d).map(|_| rc(rng)).collect();
                Ok(Self::phase_field(a, rng.gen_range(0.5..4.0), rng.gen_range(-3.0..3.0)))
            }
            Family::ClippedPolynomial => {
                let count = rng.gen_range(1..=4);
                let terms = (0..count)
                    .map(|_| {
                        let deg = |rng: &mut R| -> MultiIndex {
                            MultiIndex::new((0..d).map(|_| rng.gen_range(0..=2)).collect())
                        };
                        PolyTerm {
                            coeff: rc(rng),
                            hol: deg(rng),
                            anti: deg(rng),
                        }
                    })
                    .collect();
                Self::clipped_polynomial(d, terms, rng.gen())
            }
            Family::ExtremalGm => Err(Error::Unsupported(
                "extremal functions are built by the extremal module".into(),
            )),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        (self.evaluator)(w)
    }

    pub fn evaluator(&self) -> &BallFn {
        &self.evaluator
    }
}

fn check_point(params: &KernelParams, z: &BallPoint, what: &str) -> Result<()> {
    if z.dim() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: z.dim(),
        });
    }
    z.require_interior(what)
}

fn check_peak(z: &BallPoint) -> Result<()> {
    if z.modulus() >= PEAK_LIMIT {
        return Err(Error::domain(format!(
            "|z| = {} is at or beyond the resolvable limit {PEAK_LIMIT} for peaked kernels",
            z.modulus()
        )));
    }
    Ok(())
}

/// `(1 − ⟨z,w⟩)^{−s}` on the principal branch.
#[inline]
fn kernel_power(z: &[Complex64], w: &[Complex64], s: f64) -> Complex64 {
    let base = Complex64::new(1.0, 0.0) - inner_slices(z, w);
    debug_assert!(base.re > 0.0, "1 − ⟨z,w⟩ left the right half-plane");
    base.powf(-s)
}

/// `K_σ(z,w) = (1−|w|²)^σ / (1−⟨z,w⟩)^{d+1+σ}`.
pub fn kernel(params: &KernelParams, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    check_point(params, z, "z")?;
    check_point(params, w, "w")?;
    Ok(kernel_power(z.coords(), w.coords(), params.lambda) * (1.0 - w.norm_sqr()).powf(params.sigma))
}

/// `∂_z^α K_σ(z,w) = Γ(λ+|α|)/Γ(λ) (1−|w|²)^σ (1−⟨z,w⟩)^{−(λ+|α|)} conj(w)^α`.
pub fn kernel_derivative(
    alpha: &MultiIndex,
    params: &KernelParams,
    z: &BallPoint,
    w: &BallPoint,
) -> Result<Complex64> {
    check_point(params, z, "z")?;
    check_point(params, w, "w")?;
    if alpha.dim() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: alpha.dim(),
        });
    }
    let order = alpha.order() as f64;
    let factor = (ln_gamma_pos(params.lambda + order) - ln_gamma_pos(params.lambda)).exp();
    Ok(factor
        * (1.0 - w.norm_sqr()).powf(params.sigma)
        * kernel_power(z.coords(), w.coords(), params.lambda + order)
        * alpha.monomial(w.coords()).conj())
}

/// `T_σ G(z) = c_σ ∫ K_σ(z,w) G(w) dv(w) = ∫ (1−⟨z,w⟩)^{−λ} G dv_σ`.
pub fn apply_t(
    g: &BoundedFunction,
    params: &KernelParams,
    z: &BallPoint,
    rule: &QuadratureRule,
) -> Result<IntegralResult> {
    check_point(params, z, "z")?;
    check_peak(z)?;
    let zc = z.coords().to_vec();
    let lambda = params.lambda;
    integrate_weighted_focused(|w| kernel_power(&zc, w, lambda) * g.eval(w), params, rule, Some(z))
}

/// `D_z(T_σ G)(z)` with componentwise error estimates, canonical order.
#[derive(Debug, Clone)]
pub struct DerivativeTuple {
    pub values: MonomialVector,
    pub errors: Vec<f64>,
}

pub fn derivative_tuple(
    g: &BoundedFunction,
    params: &KernelParams,
    z: &BallPoint,
    rule: &QuadratureRule,
) -> Result<DerivativeTuple> {
    check_point(params, z, "z")?;
    check_peak(z)?;
    let basis = MonomialBasis::new(params.d, params.n)?;
    let factor = params.derivative_factor();
    let exponent = params.lambda + params.n as f64;
    let zc = z.coords().to_vec();
    let integrand = VectorFn {
        outputs: basis.len(),
        f: |w: &[Complex64], out: &mut [Complex64]| {
            basis.evaluate_into(w, out);
            let common = kernel_power(&zc, w, exponent) * g.eval(w) * factor;
            for o in out.iter_mut() {
                *o = o.conj() * common;
            }
        },
    };
    let parts = integrate_weighted_vec(&integrand, params.d, params.sigma, rule, Some(z.coords()))?;
    Ok(DerivativeTuple {
        values: MonomialVector(parts.iter().map(|r| r.value).collect()),
        errors: parts.iter().map(|r| r.error_estimate).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochSample {
    pub point: BallPoint,
    /// `(1−|z|²)^n |D_z(T_σ G)(z)|`
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochEstimate {
    /// Maximum over probes; a lower bound for the semi-norm of `T_σ G`.
    pub value: f64,
    pub error: f64,
    pub samples: Vec<BlochSample>,
}

/// `max_z (1−|z|²)^n |D_z(T_σ G)(z)|` over the probe points.
pub fn bloch_seminorm_estimate(
    g: &BoundedFunction,
    params: &KernelParams,
    norm: &NormSpec,
    z_samples: &[BallPoint],
    rule: &QuadratureRule,
) -> Result<BlochEstimate> {
    let mut samples = Vec::with_capacity(z_samples.len());
    for z in z_samples {
        let tuple = derivative_tuple(g, params, z, rule)?;
        let weight = (1.0 - z.norm_sqr()).powi(params.n as i32);
        let err_vec: Vec<Complex64> = tuple.errors.iter().map(|&e| Complex64::new(e, 0.0)).collect();
        samples.push(BlochSample {
            point: z.clone(),
            value: weight * vector_norm(&tuple.values, norm),
            error: weight * norm.eval(&err_vec),
        });
    }
    let best = samples
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::domain("at least one probe point is required"))?;
    Ok(BlochEstimate {
        value: best.value,
        error: best.error,
        samples: samples.clone(),
    })
}

/// Probe grid: `directions` seeded sphere directions × radii `{0, 0.1, …, 0.9, 0.95}`.
pub fn default_probes(d: usize, directions: usize, seed: u64) -> Vec<BallPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).chain([0.95]).collect();
    let mut out = vec![BallPoint::origin(d)];
    for _ in 0..directions {
        let dir = sample_sphere(&mut rng, d);
        out.extend(radii.iter().skip(1).map(|&r| dir.scale(r)));
    }
    out
}
