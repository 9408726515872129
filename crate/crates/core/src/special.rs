//! Gamma-function closed forms: the weight normalization `c_σ`, the supremum of
//! the Forelli–Rudin type integral `J_{c,t}`, and the sharp norm constant.
//!
//! Everything is evaluated in log space; all arguments are positive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::d_tilde;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

// ζ(k) for k = 2..=41
const ZETA: [f64; 40] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
    1.000_000_000_465_662_9,
    1.000_000_000_232_831_2,
    1.000_000_000_116_415_5,
    1.000_000_000_058_207_7,
    1.000_000_000_029_103_9,
    1.000_000_000_014_552,
    1.000_000_000_007_276,
    1.000_000_000_003_638,
    1.000_000_000_001_819,
    1.000_000_000_000_909_5,
    1.000_000_000_000_454_7,
];

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(1 + e)` for `|e| ≤ 0.25` from the Taylor series `−γe + Σ_{k≥2} (−e)^k ζ(k)/k`.
fn ln_gamma_1p_series(e: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = e * e;
    for (i, z) in ZETA.iter().enumerate() {
        let k = (i + 2) as f64;
        let term = z * pow / k;
        sum += if i % 2 == 0 { term } else { -term };
        pow *= e;
    }
    sum - EULER_GAMMA * e
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural logarithm of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs a finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

/// Unchecked `ln Γ(x)`, `x > 0`.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(1 + x) / x keeps the argument away from the Lanczos pole
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    if (x - 1.0).abs() <= 0.25 {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.25 {
        let e = x - 2.0;
        return ln_gamma_1p_series(e) + e.ln_1p();
    }
    ln_gamma_lanczos(x)
}

pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

/// The triple `(d, σ, n)` with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub d: usize,
    pub sigma: f64,
    pub n: usize,
    /// `λ = d + 1 + σ`
    pub lambda: f64,
    pub c_sigma: f64,
    pub d_tilde: usize,
}

impl KernelParams {
    pub fn new(d: usize, sigma: f64, n: usize) -> Result<Self> {
        let c_sigma = c_sigma(d, sigma)?;
        let d_tilde = d_tilde(d, n)?;
        Ok(Self {
            d,
            sigma,
            n,
            lambda: d as f64 + 1.0 + sigma,
            c_sigma,
            d_tilde,
        })
    }

    /// `Γ(λ + n) / Γ(λ)`, the constant produced by `n` derivatives of the kernel.
    pub fn derivative_factor(&self) -> f64 {
        (ln_gamma_pos(self.lambda + self.n as f64) - ln_gamma_pos(self.lambda)).exp()
    }

    /// The same `(d, n)` with a different weight exponent.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.d, sigma, self.n)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > -1.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("weight exponent requires σ>−1, got σ = {sigma}")))
    }
}

/// `c_σ = Γ(d+σ+1) / (Γ(σ+1) Γ(d+1))`, so that `v_σ(B) = 1`.
pub fn c_sigma(d: usize, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if d == 0 {
        return Err(Error::domain("dimension d must be at least 1"));
    }
    let d = d as f64;
    Ok((ln_gamma_pos(d + sigma + 1.0) - ln_gamma_pos(sigma + 1.0) - ln_gamma_pos(d + 1.0)).exp())
}

/// `sup_B J_{c,t} = J_{c,t}(e_1) = Γ(d+1) Γ(t+1) Γ(−c) / Γ²((d+1+t−c)/2)` for `c < 0`.
pub fn j_closed_form(c: f64, t: f64, d: usize) -> Result<f64> {
    if !(c < 0.0) {
        return Err(Error::domain(format!(
            "J_{{c,t}} is bounded in B only for c<0, got c = {c}"
        )));
    }
    if !(t > -1.0) {
        return Err(Error::domain(format!("J_{{c,t}} requires t>−1, got t = {t}")));
    }
    let d = d as f64;
    Ok((ln_gamma_pos(d + 1.0) + ln_gamma_pos(t + 1.0) + ln_gamma_pos(-c)
        - 2.0 * ln_gamma_pos((d + 1.0 + t - c) / 2.0))
    .exp())
}

/// `C · Γ(λ+n) Γ(n) / Γ²((λ+n)/2)`, the norm of `T_σ : L^∞ → B`.
pub fn theoretical_norm(params: &KernelParams, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain(format!("norm constant C must be positive, got {c}")));
    }
    let ln = params.lambda + params.n as f64;
    let n = params.n as f64;
    Ok(c * (ln_gamma_pos(ln) + ln_gamma_pos(n) - 2.0 * ln_gamma_pos(ln / 2.0)).exp())
}

/// `4 (n+1) Γ²(n) / (n Γ²(n/2))`, the disc case `d = 1, σ = 0` with the modulus norm.
pub fn disc_norm(n: usize) -> f64 {
    let n = n as f64;
    4.0 * (n + 1.0) / n * (2.0 * (ln_gamma_pos(n) - ln_gamma_pos(n / 2.0))).exp()
}

/// `Γ(λ+1) / Γ²((λ+1)/2)`, the constant for the gradient semi-norm.
pub fn gradient_norm(lambda: f64) -> f64 {
    (ln_gamma_pos(lambda + 1.0) - 2.0 * ln_gamma_pos((lambda + 1.0) / 2.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// `‖T_σ‖_{L¹ → L¹_a}`, `σ > 0`.
    L1,
    /// `‖T_σ‖_{L² → L²_a}`, `σ > −1/2`.
    L2,
    /// Two-sided bounds on `‖T_0‖_{L^p → L^p_a}`, `1 < p < ∞`.
    Liu { p: f64 },
    /// `‖T_0‖_{L^∞(U) → B}` in the disc with the order-`n` derivative semi-norm.
    Disc,
    /// `Γ(λ+1)/Γ²((λ+1)/2)`, the gradient semi-norm constant.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceValue {
    Exact { value: f64 },
    Interval { lower: f64, upper: f64 },
}

/// Known reference constants for `T_σ`; `params.n` is only used by [`ReferenceKind::Disc`].
pub fn reference_constants(kind: ReferenceKind, params: &KernelParams) -> Result<ReferenceValue> {
    let d = params.d as f64;
    let sigma = params.sigma;
    match kind {
        ReferenceKind::L1 => {
            if !(sigma > 0.0) {
                return Err(Error::domain(format!(
                    "the L1 norm formula needs σ>0, got σ = {sigma}"
                )));
            }
            let value = (ln_gamma_pos(d + sigma + 1.0) - 2.0 * ln_gamma_pos((d + sigma + 1.0) / 2.0)
                + ln_gamma_pos(sigma)
                - ln_gamma_pos(sigma + 1.0))
            .exp();
            Ok(ReferenceValue::Exact { value })
        }
        ReferenceKind::L2 => {
            if !(sigma > -0.5) {
                return Err(Error::domain(format!(
                    "the L2 norm formula needs σ>−1/2, got σ = {sigma}"
                )));
            }
            let value = (0.5 * ln_gamma_pos(2.0 * sigma + 1.0) - ln_gamma_pos(sigma + 1.0)).exp();
            Ok(ReferenceValue::Exact { value })
        }
        ReferenceKind::Liu { p } => {
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::domain(format!("the Lp bounds need 1<p<∞, got p = {p}")));
            }
            let q = p / (p - 1.0);
            let half = (d + 1.0) / 2.0;
            let lower =
                (ln_gamma_pos((d + 1.0) / p) + ln_gamma_pos((d + 1.0) / q) - 2.0 * ln_gamma_pos(half))
                    .exp();
            let upper = (ln_gamma_pos(d + 1.0) - 2.0 * ln_gamma_pos(half)).exp() * PI
                / (PI / p).sin();
            Ok(ReferenceValue::Interval { lower, upper })
        }
        ReferenceKind::Disc => Ok(ReferenceValue::Exact {
            value: disc_norm(params.n),
        }),
        ReferenceKind::Gradient => Ok(ReferenceValue::Exact {
            value: gradient_norm(params.lambda),
        }),
    }
}
