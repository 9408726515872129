//! The extremal sequence: the boundary maximizer `ζ₀`, a dual witness `Z₀*`,
//! the unimodular functions `G_m`, and the lower bounds they produce at
//! `z_m = ε_m ζ₀`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use smallvec::SmallVec;

use crate::constants::c_optimize;
use crate::error::{Error, Result};
use crate::geometry::{inner_slices, mobius_into, BallPoint};
use crate::multiindex::{MonomialBasis, MonomialVector};
use crate::projection::{BoundedFunction, Family, NormKind, NormSpec};
use crate::quadrature::{integrate_weighted_focused, IntegralResult, QuadratureRule, PEAK_LIMIT};
use crate::special::{theoretical_norm, KernelParams};

pub const DEFAULT_EPSILONS: [f64; 5] = [0.5, 0.8, 0.9, 0.95, 0.99];

/// Largest ε the direct route accepts; its integrand peaks like `|1−⟨z,w⟩|^{−(λ+n)}`.
pub const DIRECT_LIMIT: f64 = 0.95;

/// Restarts and seed used when a custom norm needs a numerical `ζ₀`.
const OPT_RESTARTS: usize = 32;
const OPT_SEED: u64 = 0x2e7a;

type Buf = SmallVec<[Complex64; 16]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `(1−|z|²)^n ∫ |⟨Z(w),Z₀*⟩| |1−⟨z,w⟩|^{−(λ+n)} dv_σ`
    Direct,
    /// `∫ |⟨Z(φ_z(ω)),Z₀*⟩| |1−⟨z,ω⟩|^{−(λ−n)} dv_σ`
    Transformed,
}

impl Route {
    pub fn limit(self) -> f64 {
        match self {
            Route::Direct => DIRECT_LIMIT,
            Route::Transformed => PEAK_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtremalConfig {
    params: KernelParams,
    norm: NormSpec,
    zeta0: BallPoint,
    witness: MonomialVector,
    c_value: f64,
    epsilons: Vec<f64>,
    basis: Arc<MonomialBasis>,
}

/// `ζ₀`: `e₁` for `p ≥ 2`, the balanced point for `p < 2`, the optimizer's
/// maximizer for custom norms.
pub fn select_zeta0(norm: &NormSpec, d: usize, n: usize) -> Result<BallPoint> {
    match norm.kind() {
        NormKind::P(p) if *p >= 2.0 => Ok(BallPoint::basis(d, 0)),
        NormKind::P(_) => {
            let s = Complex64::new((d as f64).sqrt().recip(), 0.0);
            Ok(BallPoint::new(std::iter::repeat(s).take(d)))
        }
        NormKind::Custom { .. } => Ok(c_optimize(norm, d, n, OPT_RESTARTS, OPT_SEED)?.maximizer),
    }
}

/// `Z₀*` with dual norm one and `⟨Z(ζ₀), Z₀*⟩ = |Z(ζ₀)|`.
pub fn dual_witness(zeta0: &BallPoint, norm: &NormSpec, n: usize) -> Result<MonomialVector> {
    let z = MonomialBasis::new(zeta0.dim(), n)?.evaluate(zeta0.coords());
    norm.dual_witness(z.as_slice())
}

impl ExtremalConfig {
    /// Builds `ζ₀` and `Z₀*` for `norm` and validates the schedule.
    pub fn new(params: KernelParams, norm: NormSpec, epsilons: Vec<f64>) -> Result<Self> {
        if !norm.dual_available() {
            return Err(Error::Unsupported(format!(
                "norm '{}' has no dual witness; the extremal construction needs one",
                norm.describe()
            )));
        }
        let zeta0 = select_zeta0(&norm, params.d, params.n)?;
        let witness = dual_witness(&zeta0, &norm, params.n)?;
        Self::with_parts(params, norm, zeta0, witness, epsilons)
    }

    pub fn with_parts(
        params: KernelParams,
        norm: NormSpec,
        zeta0: BallPoint,
        witness: MonomialVector,
        epsilons: Vec<f64>,
    ) -> Result<Self> {
        if zeta0.dim() != params.d {
            return Err(Error::DimensionMismatch {
                expected: params.d,
                got: zeta0.dim(),
            });
        }
        if (zeta0.modulus() - 1.0).abs() > 1e-14 {
            return Err(Error::domain(format!("|ζ₀| = {} is not 1", zeta0.modulus())));
        }
        let basis = Arc::new(MonomialBasis::new(params.d, params.n)?);
        if witness.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: witness.len(),
            });
        }
        let dual = norm.dual_eval(witness.as_slice())?;
        if (dual - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("dual norm of Z₀* is {dual}, not 1")));
        }
        let z0 = basis.evaluate(zeta0.coords());
        let c_value = norm.eval(z0.as_slice());
        let pairing = z0.pair(&witness).norm();
        if (pairing - c_value).abs() > 1e-10 {
            return Err(Error::domain(format!(
                "|⟨Z(ζ₀), Z₀*⟩| = {pairing} differs from |Z(ζ₀)| = {c_value}"
            )));
        }
        validate_schedule(&epsilons)?;
        Ok(Self {
            params,
            norm,
            zeta0,
            witness,
            c_value,
            epsilons,
            basis,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn zeta0(&self) -> &BallPoint {
        &self.zeta0
    }

    pub fn witness(&self) -> &MonomialVector {
        &self.witness
    }

    /// `|Z(ζ₀)|`: the constant `C` whenever `ζ₀` is a maximizer.
    pub fn c_value(&self) -> f64 {
        self.c_value
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// `theoretical_norm` at `C = |Z(ζ₀)|`.
    pub fn theoretical(&self) -> Result<f64> {
        theoretical_norm(&self.params, self.c_value)
    }

    pub fn z_m(&self, m: usize) -> Result<BallPoint> {
        let eps = self.epsilon(m)?;
        Ok(self.zeta0.scale(eps))
    }

    fn epsilon(&self, m: usize) -> Result<f64> {
        self.epsilons.get(m).copied().ok_or_else(|| {
            Error::domain(format!("index {m} is outside the schedule of {} values", self.epsilons.len()))
        })
    }

    /// `|⟨Z(w), Z₀*⟩|` and its phase.
    fn pairing(&self, w: &[Complex64]) -> Complex64 {
        let mut buf: Buf = SmallVec::from_elem(Complex64::new(0.0, 0.0), self.basis.len());
        self.basis.evaluate_into(w, &mut buf);
        buf.iter().zip(&self.witness.0).map(|(a, b)| a * b.conj()).sum()
    }
}

fn validate_schedule(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::domain("the ε schedule is empty"));
    }
    for &e in epsilons {
        if !(0.0..1.0).contains(&e) {
            return Err(Error::domain(format!("ε = {e}: ε < 1 required; the limit is analytic")));
        }
    }
    if epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("the ε schedule must be strictly increasing"));
    }
    Ok(())
}

/// `G_m(w) = phase⟨Z(w),Z₀*⟩ · |1−⟨z_m,w⟩|^{λ+n} / (1−conj⟨z_m,w⟩)^{λ+n}`; the phase is 1 where the pairing vanishes.
pub fn extremal_g(config: &ExtremalConfig, m: usize, w: &[Complex64]) -> Result<Complex64> {
    let z = config.z_m(m)?;
    Ok(g_at(config, z.coords(), w))
}

fn g_at(config: &ExtremalConfig, z: &[Complex64], w: &[Complex64]) -> Complex64 {
    let pair = config.pairing(w);
    let modulus = pair.norm();
    let phase = if modulus > 0.0 {
        pair / modulus
    } else {
        Complex64::new(1.0, 0.0)
    };
    // |b|^s / conj(b)^s is the unit number e^{i s arg b}
    let b = Complex64::new(1.0, 0.0) - inner_slices(z, w);
    let s = config.params.lambda + config.params.n as f64;
    phase * Complex64::from_polar(1.0, s * b.arg())
}

/// `G_m` as a [`BoundedFunction`].
pub fn extremal_function(config: &ExtremalConfig, m: usize) -> Result<BoundedFunction> {
    let z = config.z_m(m)?;
    let cfg = config.clone();
    let eps = config.epsilons[m];
    Ok(BoundedFunction::from_unimodular(
        Family::ExtremalGm,
        format!("G_m at ε = {eps}"),
        Arc::new(move |w| g_at(&cfg, z.coords(), w)),
    ))
}

/// A lower bound for `(1−|z_m|²)^n |D_{z_m}(T_σ G_m)(z_m)|` through the pairing with `Z₀*`.
pub fn lower_bound_value(
    config: &ExtremalConfig,
    m: usize,
    rule: &QuadratureRule,
    route: Route,
) -> Result<IntegralResult> {
    let eps = config.epsilon(m)?;
    if eps > route.limit() {
        return Err(Error::domain(format!(
            "ε = {eps} is beyond the {route:?} route's limit {}",
            route.limit()
        )));
    }
    let z = config.z_m(m)?;
    let zc = z.coords().to_vec();
    let params = &config.params;
    let n = params.n as f64;
    let one = Complex64::new(1.0, 0.0);
    let raw = match route {
        Route::Direct => integrate_weighted_focused(
            |w| {
                let k = (one - inner_slices(&zc, w)).norm().powf(-(params.lambda + n));
                Complex64::new(config.pairing(w).norm() * k, 0.0)
            },
            params,
            rule,
            Some(&z),
        )?
        .scale((1.0 - eps * eps).powi(params.n as i32)),
        Route::Transformed => integrate_weighted_focused(
            |w| {
                let mut img: Buf = SmallVec::from_elem(Complex64::new(0.0, 0.0), w.len());
                mobius_into(&zc, w, &mut img);
                let k = (one - inner_slices(&zc, w)).norm().powf(-(params.lambda - n));
                Complex64::new(config.pairing(&img).norm() * k, 0.0)
            },
            params,
            rule,
            Some(&z),
        )?,
    };
    Ok(raw.scale(params.derivative_factor()))
}

/// `Γ(λ+n)/Γ(λ) · C ∫ |1−⟨z_m,ω⟩|^{−(λ−n)} dv_σ`, the pointwise majorant of the transformed route.
pub fn transformed_majorant(config: &ExtremalConfig, m: usize, rule: &QuadratureRule) -> Result<IntegralResult> {
    let z = config.z_m(m)?;
    let zc = z.coords().to_vec();
    let params = &config.params;
    let s = params.lambda - params.n as f64;
    let one = Complex64::new(1.0, 0.0);
    Ok(integrate_weighted_focused(
        |w| Complex64::new((one - inner_slices(&zc, w)).norm().powf(-s), 0.0),
        params,
        rule,
        Some(&z),
    )?
    .scale(params.derivative_factor() * config.c_value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub value: f64,
    pub error: f64,
    pub ratio: f64,
}

/// One transformed-route row per ε, with `ratio = value / theoretical_norm`.
pub fn convergence_table(config: &ExtremalConfig, rule: &QuadratureRule) -> Result<Vec<ConvergenceRow>> {
    convergence_table_via(config, rule, Route::Transformed)
}

pub fn convergence_table_via(
    config: &ExtremalConfig,
    rule: &QuadratureRule,
    route: Route,
) -> Result<Vec<ConvergenceRow>> {
    let target = config.theoretical()?;
    (0..config.epsilons.len())
        .map(|m| {
            let r = lower_bound_value(config, m, rule, route)?;
            Ok(ConvergenceRow {
                epsilon: config.epsilons[m],
                value: r.re(),
                error: r.error_estimate,
                ratio: r.re() / target,
            })
        })
        .collect()
}
