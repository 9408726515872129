//! Integration over the unit ball against `dv` and `dv_σ = c_σ (1−|w|²)^σ dv`.
//!
//! Two schemes are available.
//!
//! *Product rule* (`d ∈ {1, 2}`). Coordinates are chosen so that `dv_σ` factors
//! into probability measures:
//!
//! - `d = 1`: `w = √a e^{iφ}`, with `a` distributed as `(σ+1)(1−a)^σ da` and `φ` uniform.
//! - `d = 2`: `w = (√a e^{iφ₁}, √((1−a)b) e^{iφ₂})`, with `a ∝ (1−a)^{σ+1}`,
//!   `b ∝ (1−b)^σ`, and both phases uniform.
//!
//! The `a` and `b` directions use Gauss–Jacobi nodes for those weights, so the
//! boundary factor `(1−|w|²)^σ` is absorbed into the nodes even for `σ < 0`.
//! Phases use the trapezoid rule. When a *focus* point `z` is supplied, the grid
//! is rotated by a unitary map sending `e₁` to `z/|z|`, and the `φ₁` nodes are
//! pulled back through the circle automorphism `e^{iφ} = (e^{is}+κ)/(1+κe^{is})`
//! with `κ = (1 − (1−ρ²)^{1/2})/ρ`, `ρ = |z|√a`. This clusters nodes where
//! kernels like `|1−⟨z,w⟩|^{−s}` peak while keeping the trapezoid spectrally
//! accurate. The error estimate is the difference against the rule with every
//! node count halved, floored at a rounding bound.
//!
//! *Monte Carlo* (any `d`). Samples are exact draws from `dv_σ`
//! (`|w|² ~ Beta(d, σ+1)`, uniform direction). The stream is split into fixed
//! chunks of [`MC_CHUNK`] samples, chunk `k` using ChaCha8 stream `k` of the
//! seed, so results do not depend on the number of worker threads. The error
//! estimate is the standard error of the mean.
//!
//! Rule parameters serialize as a tagged JSON object, e.g.
//! `{"scheme":"product-rule","radial_nodes":128,"sphere_nodes":256,"transverse_nodes":16}`
//! or `{"scheme":"monte-carlo","samples":2000000,"seed":1}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{aligning_unitary, apply_columns, inner_slices, mobius_into, BallPoint};
use crate::special::{c_sigma, KernelParams};

/// Monte Carlo samples per independently seeded chunk.
pub const MC_CHUNK: usize = 4096;

/// Closest approach to the boundary accepted by peaked-kernel operations.
pub const PEAK_LIMIT: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QuadratureRule {
    /// Deterministic tensor rule, `d ∈ {1, 2}`.
    ProductRule {
        /// Gauss–Jacobi nodes in `a = |w₁|²` (`|w|²` when `d = 1`).
        radial_nodes: usize,
        /// Trapezoid nodes in the focus phase `φ₁`.
        sphere_nodes: usize,
        /// Nodes in each transverse coordinate `b` and `φ₂` (`d = 2` only).
        #[serde(default = "default_transverse")]
        transverse_nodes: usize,
    },
    /// Seeded exact sampling from `dv_σ`, any `d`.
    MonteCarlo { samples: usize, seed: u64 },
}

fn default_transverse() -> usize {
    16
}

impl QuadratureRule {
    pub fn product(radial_nodes: usize, sphere_nodes: usize, transverse_nodes: usize) -> Self {
        QuadratureRule::ProductRule {
            radial_nodes,
            sphere_nodes,
            transverse_nodes,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureRule::MonteCarlo { samples, seed }
    }

    /// Default budget: product rule for `d ≤ 2`, 2×10⁶ Monte Carlo samples otherwise.
    pub fn default_for(d: usize) -> Self {
        match d {
            1 => Self::product(128, 256, 1),
            2 => Self::product(64, 128, 16),
            _ => Self::monte_carlo(2_000_000, 0x5eed),
        }
    }

    /// A cheaper rule for sweeps that evaluate many integrals.
    pub fn coarse_for(d: usize) -> Self {
        match d {
            1 => Self::product(48, 96, 1),
            2 => Self::product(32, 64, 8),
            _ => Self::monte_carlo(200_000, 0x5eed),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            QuadratureRule::ProductRule {
                radial_nodes,
                sphere_nodes,
                transverse_nodes,
            } => {
                if d == 0 || d > 2 {
                    return Err(Error::Unsupported(format!(
                        "the product rule supports d = 1 or 2, got d = {d}; use monte-carlo"
                    )));
                }
                if radial_nodes < 2 || sphere_nodes < 2 || (d == 2 && transverse_nodes < 2) {
                    return Err(Error::domain("product-rule node counts must be at least 2"));
                }
                if radial_nodes > 4096 || sphere_nodes > 1 << 16 || transverse_nodes > 4096 {
                    return Err(Error::domain("product-rule node counts are unreasonably large"));
                }
                Ok(())
            }
            QuadratureRule::MonteCarlo { samples, .. } => {
                if d == 0 {
                    return Err(Error::domain("dimension d must be at least 1"));
                }
                if samples < 2 {
                    return Err(Error::domain("monte-carlo needs at least 2 samples"));
                }
                Ok(())
            }
        }
    }

    fn halved(&self) -> Self {
        match *self {
            QuadratureRule::ProductRule {
                radial_nodes,
                sphere_nodes,
                transverse_nodes,
            } => QuadratureRule::ProductRule {
                radial_nodes: (radial_nodes / 2).max(1),
                sphere_nodes: (sphere_nodes / 2).max(1),
                transverse_nodes: (transverse_nodes / 2).max(1),
            },
            mc => mc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error_estimate: f64,
}

impl IntegralResult {
    pub fn new(value: Complex64, error_estimate: f64) -> Self {
        Self {
            value,
            error_estimate: error_estimate.abs(),
        }
    }

    pub fn real(value: f64, error_estimate: f64) -> Self {
        Self::new(Complex64::new(value, 0.0), error_estimate)
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.value * s, self.error_estimate * s.abs())
    }

    /// `|a − b| ≤ k (err_a + err_b)`.
    pub fn agrees_with(&self, other: &IntegralResult, k: f64) -> bool {
        (self.value - other.value).norm() <= k * (self.error_estimate + other.error_estimate)
    }
}

// ---------------------------------------------------------------------------
// Gauss–Jacobi nodes

type NodeSet = Arc<(Vec<f64>, Vec<f64>)>;

fn node_cache() -> &'static Mutex<HashMap<(u64, usize), NodeSet>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), NodeSet>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and probability weights on `[0, 1]` for the density `∝ (1−a)^alpha`.
pub fn gauss_jacobi_unit(alpha: f64, count: usize) -> NodeSet {
    let key = (alpha.to_bits(), count);
    if let Some(hit) = node_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let set = Arc::new(golub_welsch(alpha, 0.0, count));
    node_cache().lock().unwrap().insert(key, set.clone());
    set
}

/// Golub–Welsch for the Jacobi weight `(1−x)^α (1+x)^β` on `[−1, 1]`, mapped to
/// `[0, 1]` with weights normalized to sum to one.
fn golub_welsch(alpha: f64, beta: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = DMatrix::<f64>::zeros(count, count);
    let ab = alpha + beta;
    for i in 0..count {
        let k = i as f64;
        let diag = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
        };
        m[(i, i)] = diag;
        if i + 1 < count {
            let k = k + 1.0;
            let s = 2.0 * k + ab;
            let off = (4.0 * k * (k + alpha) * (k + beta) * (k + ab)
                / (s * s * (s + 1.0) * (s - 1.0)))
                .sqrt();
            m[(i, i + 1)] = off;
            m[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|j| {
            let x = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            ((x + 1.0) / 2.0, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x.clamp(0.0, 1.0), w / total)).unzip()
}

// ---------------------------------------------------------------------------
// Core engine

/// Integrand writing `m` complex outputs for the point `w`.
pub trait Integrand: Sync {
    fn outputs(&self) -> usize;
    fn eval(&self, w: &[Complex64], out: &mut [Complex64]);
}

struct Scalar<F>(F);

impl<F: Fn(&[Complex64]) -> Complex64 + Sync> Integrand for Scalar<F> {
    fn outputs(&self) -> usize {
        1
    }

    fn eval(&self, w: &[Complex64], out: &mut [Complex64]) {
        out[0] = (self.0)(w);
    }
}

/// Integrand from a closure with `m` outputs.
pub struct VectorFn<F> {
    pub outputs: usize,
    pub f: F,
}

impl<F: Fn(&[Complex64], &mut [Complex64]) + Sync> Integrand for VectorFn<F> {
    fn outputs(&self) -> usize {
        self.outputs
    }

    fn eval(&self, w: &[Complex64], out: &mut [Complex64]) {
        (self.f)(w, out)
    }
}

/// Raw accumulation: weighted sums and sums of `|w f|` for the rounding floor.
struct Accum {
    sum: Vec<Complex64>,
    abs: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl Accum {
    fn new(m: usize) -> Self {
        Self {
            sum: vec![Complex64::new(0.0, 0.0); m],
            abs: vec![0.0; m],
            sum_sq: vec![0.0; m],
            count: 0,
        }
    }

    fn merge(&mut self, other: &Accum) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.abs[i] += other.abs[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.count += other.count;
    }
}

fn check_finite(w: &[Complex64], out: &[Complex64]) -> Result<()> {
    if let Some(bad) = out.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite {
            node: BallPoint::new(w.iter().copied()).to_string(),
            value: bad.to_string(),
        });
    }
    Ok(())
}

/// Balanced grading parameter for a peak of strength `ρ` at phase zero.
fn grading(rho: f64) -> f64 {
    if rho <= 1e-8 {
        0.0
    } else {
        let rho = rho.min(1.0 - 1e-15);
        (1.0 - (1.0 - rho * rho).sqrt()) / rho
    }
}

/// Phases and trapezoid weights, graded by `κ` around zero; weights sum to one.
fn graded_phases(count: usize, kappa: f64) -> Vec<(Complex64, f64)> {
    let one = Complex64::new(1.0, 0.0);
    (0..count)
        .map(|j| {
            let s = 2.0 * PI * j as f64 / count as f64;
            let e = Complex64::from_polar(1.0, s);
            let phase = (e + kappa) / (one + e * kappa);
            let jac = (1.0 - kappa * kappa) / (one + e * kappa).norm_sqr();
            (phase / phase.norm(), jac / count as f64)
        })
        .collect()
}

struct Frame {
    columns: Option<Vec<Vec<Complex64>>>,
    focus_modulus: f64,
}

impl Frame {
    fn new(d: usize, focus: Option<&[Complex64]>) -> Self {
        match focus {
            Some(z) if z.iter().map(|c| c.norm_sqr()).sum::<f64>() > 0.0 => {
                debug_assert_eq!(z.len(), d);
                Frame {
                    columns: Some(aligning_unitary(z)),
                    focus_modulus: z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
                }
            }
            _ => Frame {
                columns: None,
                focus_modulus: 0.0,
            },
        }
    }

    fn place(&self, local: &[Complex64], out: &mut [Complex64]) {
        match &self.columns {
            Some(cols) => apply_columns(cols, local, out),
            None => out.copy_from_slice(local),
        }
    }
}

fn product_rule_pass<I: Integrand + ?Sized>(
    f: &I,
    d: usize,
    sigma: f64,
    radial: usize,
    sphere: usize,
    transverse: usize,
    frame: &Frame,
) -> Result<Accum> {
    let m = f.outputs();
    let a_nodes = gauss_jacobi_unit(if d == 1 { sigma } else { sigma + 1.0 }, radial);
    let b_nodes = if d == 2 {
        Some(gauss_jacobi_unit(sigma, transverse))
    } else {
        None
    };
    let transverse_phases = graded_phases(if d == 2 { transverse } else { 1 }, 0.0);

    let per_radius: Vec<Result<Accum>> = (0..radial)
        .into_par_iter()
        .map(|i| {
            let (a, wa) = (a_nodes.0[i], a_nodes.1[i]);
            let mut acc = Accum::new(m);
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            let mut local = [Complex64::new(0.0, 0.0); 2];
            let mut w = [Complex64::new(0.0, 0.0); 2];
            let ra = a.sqrt();
            let phases = graded_phases(sphere, grading(frame.focus_modulus * ra));
            for &(p1, wp1) in &phases {
                local[0] = p1 * ra;
                match &b_nodes {
                    None => {
                        frame.place(&local[..1], &mut w[..1]);
                        f.eval(&w[..1], &mut out);
                        check_finite(&w[..1], &out)?;
                        let weight = wa * wp1;
                        for k in 0..m {
                            acc.sum[k] += out[k] * weight;
                            acc.abs[k] += out[k].norm() * weight;
                        }
                    }
                    Some(bn) => {
                        for (&b, &wb) in bn.0.iter().zip(&bn.1) {
                            let rb = ((1.0 - a) * b).sqrt();
                            for &(p2, wp2) in &transverse_phases {
                                local[1] = p2 * rb;
                                frame.place(&local, &mut w);
                                f.eval(&w, &mut out);
                                check_finite(&w, &out)?;
                                let weight = wa * wp1 * wb * wp2;
                                for k in 0..m {
                                    acc.sum[k] += out[k] * weight;
                                    acc.abs[k] += out[k].norm() * weight;
                                }
                            }
                        }
                    }
                }
            }
            acc.count = 1;
            Ok(acc)
        })
        .collect();

    let mut total = Accum::new(m);
    for part in per_radius {
        total.merge(&part?);
    }
    Ok(total)
}

fn monte_carlo_pass<I: Integrand + ?Sized>(
    f: &I,
    d: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<Accum> {
    let m = f.outputs();
    let beta = Beta::new(d as f64, sigma + 1.0)
        .map_err(|e| Error::domain(format!("radial distribution: {e}")))?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<Accum>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut acc = Accum::new(m);
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            let mut raw = vec![0.0f64; 2 * d];
            let mut w = vec![Complex64::new(0.0, 0.0); d];
            for _ in 0..len {
                let norm = loop {
                    for x in raw.iter_mut() {
                        *x = rng.sample(StandardNormal);
                    }
                    let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 1e-300 {
                        break n;
                    }
                };
                let u: f64 = beta.sample(&mut rng);
                let r = u.sqrt() / norm;
                for j in 0..d {
                    w[j] = Complex64::new(raw[2 * j] * r, raw[2 * j + 1] * r);
                }
                f.eval(&w, &mut out);
                check_finite(&w, &out)?;
                for j in 0..m {
                    acc.sum[j] += out[j];
                    acc.abs[j] += out[j].norm();
                    acc.sum_sq[j] += out[j].norm_sqr();
                }
            }
            acc.count = len;
            Ok(acc)
        })
        .collect();
    let mut total = Accum::new(m);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Integrates a vector-valued integrand against `dv_σ` on the ball of `C^d`.
///
/// `focus`, when given, must be an interior point near which the integrand
/// peaks; it only changes node placement.
pub fn integrate_weighted_vec<I: Integrand + ?Sized>(
    f: &I,
    d: usize,
    sigma: f64,
    rule: &QuadratureRule,
    focus: Option<&[Complex64]>,
) -> Result<Vec<IntegralResult>> {
    if !(sigma > -1.0) {
        return Err(Error::domain(format!("weight exponent requires σ>−1, got σ = {sigma}")));
    }
    rule.validate(d)?;
    if let Some(z) = focus {
        if z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: z.len(),
            });
        }
    }
    match *rule {
        QuadratureRule::ProductRule {
            radial_nodes,
            sphere_nodes,
            transverse_nodes,
        } => {
            let frame = Frame::new(d, focus);
            let full = product_rule_pass(
                f,
                d,
                sigma,
                radial_nodes,
                sphere_nodes,
                transverse_nodes,
                &frame,
            )?;
            let half_rule = rule.halved();
            let QuadratureRule::ProductRule {
                radial_nodes: hr,
                sphere_nodes: hs,
                transverse_nodes: ht,
            } = half_rule
            else {
                unreachable!()
            };
            let half = product_rule_pass(f, d, sigma, hr, hs, ht, &frame)?;
            Ok((0..f.outputs())
                .map(|k| {
                    let diff = (full.sum[k] - half.sum[k]).norm();
                    IntegralResult::new(full.sum[k], diff.max(ROUNDING_FLOOR * full.abs[k]))
                })
                .collect())
        }
        QuadratureRule::MonteCarlo { samples, seed } => {
            let acc = monte_carlo_pass(f, d, sigma, samples, seed)?;
            let n = acc.count as f64;
            Ok((0..f.outputs())
                .map(|k| {
                    let mean = acc.sum[k] / n;
                    let var = ((acc.sum_sq[k] - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
                    let err = (var / n).sqrt().max(ROUNDING_FLOOR * acc.abs[k] / n);
                    IntegralResult::new(mean, err)
                })
                .collect())
        }
    }
}

/// `∫_B f dv_σ` for a scalar integrand.
pub fn integrate_weighted<F>(f: F, params: &KernelParams, rule: &QuadratureRule) -> Result<IntegralResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    integrate_weighted_focused(f, params, rule, None)
}

/// `∫_B f dv_σ`, placing nodes around `focus`.
pub fn integrate_weighted_focused<F>(
    f: F,
    params: &KernelParams,
    rule: &QuadratureRule,
    focus: Option<&BallPoint>,
) -> Result<IntegralResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let out = integrate_weighted_vec(
        &Scalar(f),
        params.d,
        params.sigma,
        rule,
        focus.map(|p| p.coords()),
    )?;
    Ok(out[0])
}

/// `∫_B f dv` against the normalized volume measure.
pub fn integrate_ball<F>(f: F, d: usize, rule: &QuadratureRule) -> Result<IntegralResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let out = integrate_weighted_vec(&Scalar(f), d, 0.0, rule, None)?;
    Ok(out[0])
}

/// `J_{c,t}(z) = ∫_B (1−|w|²)^t |1−⟨z,w⟩|^{−(d+1+t+c)} dv(w)`.
pub fn j_numeric(c: f64, t: f64, z: &BallPoint, rule: &QuadratureRule) -> Result<IntegralResult> {
    if !(t > -1.0) {
        return Err(Error::domain(format!("J_{{c,t}} requires t>−1, got t = {t}")));
    }
    z.require_interior("J_{c,t} evaluation point")?;
    if z.modulus() > PEAK_LIMIT {
        log::warn!(
            "J_{{c,t}} at |z| = {} exceeds {PEAK_LIMIT}; the kernel peak is below the rule's resolution",
            z.modulus()
        );
    }
    let d = z.dim();
    let exponent = d as f64 + 1.0 + t + c;
    let zc = z.coords().to_vec();
    let one = Complex64::new(1.0, 0.0);
    let integral = integrate_weighted_vec(
        &Scalar(|w: &[Complex64]| {
            Complex64::new((one - inner_slices(&zc, w)).norm().powf(-exponent), 0.0)
        }),
        d,
        t,
        rule,
        Some(z.coords()),
    )?[0];
    // ∫ g (1−|w|²)^t dv = ∫ g dv_t / c_t
    Ok(integral.scale(1.0 / c_sigma(d, t)?))
}

/// Both sides of the integral-transform identity
///
/// ```text
/// (1−|z|²)^n ∫ Φ(w) |1−⟨z,w⟩|^{−(λ+n)} dv_σ(w) = ∫ Φ(φ_z(ω)) |1−⟨z,ω⟩|^{−(λ−n)} dv_σ(ω)
/// ```
pub fn transform_sides<F>(
    phi: F,
    params: &KernelParams,
    z: &BallPoint,
    rule: &QuadratureRule,
) -> Result<(IntegralResult, IntegralResult)>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    z.require_interior("transform centre z")?;
    if z.dim() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: z.dim(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let n = params.n as f64;
    let zc = z.coords().to_vec();
    let lhs = integrate_weighted_focused(
        |w| phi(w) * (one - inner_slices(&zc, w)).norm().powf(-(params.lambda + n)),
        params,
        rule,
        Some(z),
    )?
    .scale((1.0 - z.norm_sqr()).powi(params.n as i32));
    let rhs = integrate_weighted_focused(
        |w| {
            let mut img: SmallVec<[Complex64; 8]> = SmallVec::from_elem(Complex64::new(0.0, 0.0), w.len());
            mobius_into(&zc, w, &mut img);
            phi(&img) * (one - inner_slices(&zc, w)).norm().powf(-(params.lambda - n))
        },
        params,
        rule,
        Some(z),
    )?;
    Ok((lhs, rhs))
}
