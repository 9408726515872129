//! Points of the unit ball `B ⊂ C^d`, the Hermitian inner product and the
//! involutive automorphisms `φ_z`.

use std::ops::Index;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[Complex64; 4]>;

/// A point of the closed unit ball in `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Coords,
}

impl BallPoint {
    pub fn new(coords: impl IntoIterator<Item = Complex64>) -> Self {
        Self {
            coords: coords.into_iter().collect(),
        }
    }

    pub fn origin(d: usize) -> Self {
        Self::new(std::iter::repeat(Complex64::new(0.0, 0.0)).take(d))
    }

    /// The standard basis vector `e_{k+1}` (zero-based `k`).
    pub fn basis(d: usize, k: usize) -> Self {
        let mut p = Self::origin(d);
        p.coords[k] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn from_real_parts(re_im: &[f64]) -> Self {
        Self::new(re_im.chunks(2).map(|p| Complex64::new(p[0], p[1])))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.coords
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn modulus(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_interior(&self) -> bool {
        self.norm_sqr() < 1.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coords.iter().map(|z| z * s))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coords.iter().map(|z| z.conj()))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coords.iter().map(|z| -z))
    }

    /// Interleaved `(Re z_1, Im z_1, …, Re z_d, Im z_d)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub(crate) fn require_interior(&self, what: &str) -> Result<()> {
        if self.norm_sqr() < 1.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} must be interior (|z| < 1), got |z| = {}",
                self.modulus()
            )))
        }
    }
}

impl Index<usize> for BallPoint {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.coords[i]
    }
}

impl std::fmt::Display for BallPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// `⟨z, w⟩ = Σ z_j conj(w_j)` on raw coordinates.
#[inline]
pub fn inner_slices(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn inner(z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: w.dim(),
        });
    }
    Ok(inner_slices(z.coords(), w.coords()))
}

/// Below this `|z|²` the automorphism is taken to be exactly `−Id`.
const ORIGIN_THRESHOLD: f64 = 1e-20;

/// `φ_z(ω)` on raw coordinates, written into `out`. Caller guarantees `|z| < 1`.
///
/// Uses the form `(z − sω − ⟨ω,z⟩ z / (1+s)) / (1 − ⟨ω,z⟩)` with `s = (1−|z|²)^{1/2}`,
/// which equals the projection form `(z − P_z ω − s Q_z ω)/(1 − ⟨ω,z⟩)` but never
/// divides by `|z|²`.
#[inline]
pub fn mobius_into(z: &[Complex64], omega: &[Complex64], out: &mut [Complex64]) {
    let z2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if z2 < ORIGIN_THRESHOLD {
        for (o, w) in out.iter_mut().zip(omega) {
            *o = -w;
        }
        return;
    }
    let s = (1.0 - z2).sqrt();
    let wz = inner_slices(omega, z);
    let along = wz / (1.0 + s);
    let denom = Complex64::new(1.0, 0.0) - wz;
    for ((o, zj), wj) in out.iter_mut().zip(z).zip(omega) {
        *o = (zj - wj * s - zj * along) / denom;
    }
}

/// The automorphism `φ_z` exchanging `0` and `z`; `φ_0 = −Id`.
pub fn mobius(z: &BallPoint, omega: &BallPoint) -> Result<BallPoint> {
    z.require_interior("automorphism centre z")?;
    if z.dim() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: omega.dim(),
        });
    }
    if omega.norm_sqr() > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "automorphism argument must lie in the closed ball, got |ω| = {}",
            omega.modulus()
        )));
    }
    let mut out = BallPoint::origin(z.dim());
    mobius_into(z.coords(), omega.coords(), out.coords_mut());
    Ok(out)
}

/// Real Jacobian determinant of `φ_z` at `ω`: `((1−|z|²)/|1−⟨ω,z⟩|²)^{d+1}`.
pub fn jacobian_real(z: &BallPoint, omega: &BallPoint) -> Result<f64> {
    z.require_interior("z")?;
    omega.require_interior("ω")?;
    let wz = inner(omega, z)?;
    let base = (1.0 - z.norm_sqr()) / (Complex64::new(1.0, 0.0) - wz).norm_sqr();
    Ok(base.powi(z.dim() as i32 + 1))
}

/// Absolute residuals of the two automorphism identities
///
/// ```text
/// 1 − |φ_z(ω)|² = (1−|z|²)(1−|ω|²) / |1−⟨ω,z⟩|²
/// (1 − ⟨ω,z⟩)(1 − ⟨φ_z(ω),z⟩) = 1 − |z|²
/// ```
pub fn identity_residuals(z: &BallPoint, omega: &BallPoint) -> Result<(f64, f64)> {
    z.require_interior("z")?;
    omega.require_interior("ω")?;
    let phi = mobius(z, omega)?;
    let one = Complex64::new(1.0, 0.0);
    let wz = inner(omega, z)?;
    let z2 = z.norm_sqr();
    let lhs1 = 1.0 - phi.norm_sqr();
    let rhs1 = (1.0 - z2) * (1.0 - omega.norm_sqr()) / (one - wz).norm_sqr();
    let lhs2 = (one - wz) * (one - inner(&phi, z)?);
    let rhs2 = Complex64::new(1.0 - z2, 0.0);
    Ok(((lhs1 - rhs1).abs(), (lhs2 - rhs2).norm()))
}

/// A unitary matrix (as columns) whose first column is `direction / |direction|`.
///
/// Falls back to the identity for the zero vector.
pub fn aligning_unitary(direction: &[Complex64]) -> Vec<Vec<Complex64>> {
    let d = direction.len();
    let norm = direction.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    if norm > 0.0 {
        columns.push(direction.iter().map(|c| c / norm).collect());
    }
    // Gram-Schmidt against the standard basis
    for k in 0..d {
        if columns.len() == d {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for col in &columns {
                let proj = inner_slices(&v, col);
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi -= proj * ci;
                }
            }
        }
        let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-8 {
            columns.push(v.into_iter().map(|c| c / len).collect());
        }
    }
    columns
}

/// `U x` for `U` given by columns.
#[inline]
pub fn apply_columns(columns: &[Vec<Complex64>], x: &[Complex64], out: &mut [Complex64]) {
    for o in out.iter_mut() {
        *o = Complex64::new(0.0, 0.0);
    }
    for (col, &xk) in columns.iter().zip(x) {
        for (o, c) in out.iter_mut().zip(col) {
            *o += c * xk;
        }
    }
}

/// Uniform point on the unit sphere of `C^d` (normalized Gaussian).
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> BallPoint {
    loop {
        let raw: Vec<f64> = (0..2 * d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            let scaled: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            return BallPoint::from_real_parts(&scaled);
        }
    }
}

/// Point uniform for `dv` in the ball of radius `max_radius`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, max_radius: f64) -> BallPoint {
    let dir = sample_sphere(rng, d);
    let u: f64 = rng.gen();
    dir.scale(max_radius * u.powf(1.0 / (2.0 * d as f64)))
}
