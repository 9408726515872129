//! The constant `C = max_{|ζ|=1} |Z(ζ)|`: closed forms for p-norms and a
//! multi-start sphere optimizer for everything else.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sample_ball, sample_sphere, BallPoint};
use crate::multiindex::{d_tilde, MonomialBasis};
use crate::projection::NormSpec;

pub const DEFAULT_RESTARTS: usize = 32;
const MAX_ITERATIONS: usize = 20_000;
const IMPROVEMENT_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CValue {
    Exact { value: f64 },
    /// Only two-sided bounds are known.
    Interval { lower: f64, upper: f64 },
}

impl CValue {
    pub fn lower(&self) -> f64 {
        match *self {
            CValue::Exact { value } => value,
            CValue::Interval { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            CValue::Exact { value } => value,
            CValue::Interval { upper, .. } => upper,
        }
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower() - slack && x <= self.upper() + slack
    }
}

/// `C_p`: 1 for `p ≥ 2`, `d^{1/p−1/2}` for `n = 1`, and
/// `[d̃^{1/p} d^{−n/2}, d̃^{1/p−1/2}]` otherwise.
pub fn c_exact(norm: &NormSpec, d: usize, n: usize) -> Result<CValue> {
    let p = norm.p_value().ok_or_else(|| {
        Error::Unsupported(format!(
            "no closed form for norm '{}'; use the optimizer",
            norm.describe()
        ))
    })?;
    let dt = d_tilde(d, n)? as f64;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if p >= 2.0 {
        Ok(CValue::Exact { value: 1.0 })
    } else if n == 1 {
        Ok(CValue::Exact {
            value: (d as f64).powf(inv_p - 0.5),
        })
    } else {
        Ok(CValue::Interval {
            lower: dt.powf(inv_p) * (d as f64).powf(-(n as f64) / 2.0),
            upper: dt.powf(inv_p - 0.5),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereOptResult {
    pub maximizer: BallPoint,
    pub value: f64,
    pub restarts: usize,
    pub converged: bool,
}

struct Objective<'a> {
    basis: MonomialBasis,
    norm: &'a NormSpec,
    buf_len: usize,
}

impl Objective<'_> {
    fn eval(&self, x: &[f64]) -> f64 {
        let zeta: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.buf_len];
        self.basis.evaluate_into(&zeta, &mut out);
        self.norm.eval(&out)
    }
}

fn normalize(x: &mut [f64]) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= r);
}

/// Projected gradient ascent from `x` with an adaptive step.
fn ascend(obj: &Objective, mut x: Vec<f64>) -> (Vec<f64>, f64, bool) {
    normalize(&mut x);
    let mut fx = obj.eval(&x);
    let mut step = 0.1;
    let mut grad = vec![0.0; x.len()];
    for _ in 0..MAX_ITERATIONS {
        for i in 0..x.len() {
            let keep = x[i];
            x[i] = keep + FD_STEP;
            let up = obj.eval(&x);
            x[i] = keep - FD_STEP;
            let down = obj.eval(&x);
            x[i] = keep;
            grad[i] = (up - down) / (2.0 * FD_STEP);
        }
        // tangential component only
        let radial: f64 = grad.iter().zip(&x).map(|(g, v)| g * v).sum();
        grad.iter_mut().zip(&x).for_each(|(g, v)| *g -= radial * v);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            return (x, fx, true);
        }
        loop {
            let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(v, g)| v + step * g / gnorm).collect();
            normalize(&mut trial);
            let ft = obj.eval(&trial);
            if ft > fx {
                let gain = ft - fx;
                x = trial;
                fx = ft;
                step = (step * 1.5).min(1.0);
                if gain < IMPROVEMENT_TOL {
                    return (x, fx, true);
                }
                break;
            }
            step *= 0.5;
            if step < 1e-15 {
                return (x, fx, true);
            }
        }
    }
    (x, fx, false)
}

/// Rotates the first non-negligible coordinate onto the positive real axis.
fn phase_gauge(zeta: &mut [Complex64]) {
    if let Some(first) = zeta.iter().find(|c| c.norm() > 1e-12).copied() {
        let rot = first.conj() / first.norm();
        zeta.iter_mut().for_each(|c| *c *= rot);
    }
}

/// Multi-start maximization of `|Z(ζ)|` over the unit sphere.
pub fn c_optimize(norm: &NormSpec, d: usize, n: usize, restarts: usize, seed: u64) -> Result<SphereOptResult> {
    if restarts == 0 {
        return Err(Error::domain("at least one restart is required"));
    }
    let basis = MonomialBasis::new(d, n)?;
    let obj = Objective {
        buf_len: basis.len(),
        basis,
        norm,
    };
    let runs: Vec<(Vec<f64>, f64, bool)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            ascend(&obj, sample_sphere(&mut rng, d).to_real())
        })
        .collect();
    let (x, _, converged) = runs
        .into_iter()
        .reduce(|best, run| if run.1 > best.1 { run } else { best })
        .expect("restarts > 0");
    let mut zeta: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    phase_gauge(&mut zeta);
    let maximizer = BallPoint::new(zeta);
    let value = norm.eval(obj.basis.evaluate(maximizer.coords()).as_slice());
    Ok(SphereOptResult {
        maximizer,
        value,
        restarts,
        converged,
    })
}

/// `C` for the norm: the closed value when there is one, the optimizer estimate otherwise.
pub fn c_best(norm: &NormSpec, d: usize, n: usize, seed: u64) -> Result<(f64, bool)> {
    match c_exact(norm, d, n) {
        Ok(CValue::Exact { value }) => Ok((value, true)),
        Ok(CValue::Interval { .. }) | Err(Error::Unsupported(_)) => {
            Ok((c_optimize(norm, d, n, DEFAULT_RESTARTS, seed)?.value, false))
        }
        Err(e) => Err(e),
    }
}

/// `max_w |Z(w)| − C` over seeded samples: half uniform in the ball, half in the shell `0.99 ≤ |w| < 1`.
pub fn remark_bound_check(norm: &NormSpec, d: usize, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let (c, _) = c_best(norm, d, n, seed)?;
    let basis = MonomialBasis::new(d, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let w = if i % 2 == 0 {
            sample_ball(&mut rng, d, 1.0)
        } else {
            let r = 0.99 + 0.01 * rand::Rng::gen::<f64>(&mut rng);
            sample_sphere(&mut rng, d).scale(r.min(1.0 - 1e-16))
        };
        worst = worst.max(norm.eval(basis.evaluate(w.coords()).as_slice()) - c);
    }
    Ok(worst)
}
