//! Multi-indices of fixed order and the monomial vector `Z(ζ) = (…, ζ^α, …)`.
//!
//! The canonical order of the tuple is graded reverse-lexicographic with
//! `z_1 > z_2 > … > z_d`. For `d = 2, n = 2` it is `(2,0), (1,1), (0,2)`; for
//! `d = 3, n = 2` it is `(2,0,0), (1,1,0), (0,2,0), (1,0,1), (0,1,1), (0,0,2)`.
//! Every module and every file output uses this order.

use std::cmp::Ordering;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `d` and `n` for which multi-index arithmetic is supported.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `|α|`, the sum of the entries.
    pub fn order(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// `α! = α_1! ⋯ α_d!`.
    pub fn factorial(&self) -> f64 {
        self.entries
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `ζ^α`; `0^0 = 1`.
    pub fn monomial(&self, zeta: &[Complex64]) -> Complex64 {
        self.entries
            .iter()
            .zip(zeta)
            .fold(Complex64::new(1.0, 0.0), |acc, (&a, &z)| acc * z.powu(a))
    }

    /// Graded reverse-lexicographic comparison; `Greater` means earlier in the canonical order.
    pub fn grevlex_cmp(&self, other: &Self) -> Ordering {
        match self.order().cmp(&other.order()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.entries.iter().zip(&other.entries).rev() {
            match a.cmp(b) {
                Ordering::Equal => continue,
                // a smaller power of the last differing variable ranks higher
                ord => return ord.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Exact `binomial(m, k)`.
pub fn binomial(m: u64, k: u64) -> Result<u64> {
    if k > m {
        return Ok(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(m - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Range(format!("binomial({m}, {k}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

fn check_order(d: usize, n: usize) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(Error::domain(format!(
            "multi-indices need d >= 1 and n >= 1 (got d = {d}, n = {n})"
        )));
    }
    if d > MAX_ORDER || n > MAX_ORDER {
        return Err(Error::Range(format!(
            "d and n are limited to {MAX_ORDER} (got d = {d}, n = {n})"
        )));
    }
    Ok(())
}

/// `d̃ = binomial(n + d − 1, d − 1)`, the number of multi-indices of order `n` in `d` variables.
pub fn d_tilde(d: usize, n: usize) -> Result<usize> {
    check_order(d, n)?;
    Ok(binomial((n + d - 1) as u64, (d - 1) as u64)? as usize)
}

/// All `α ∈ Z_+^d` with `|α| = n`, in canonical order.
pub fn enumerate_indices(d: usize, n: usize) -> Result<Vec<MultiIndex>> {
    check_order(d, n)?;
    let mut out = Vec::with_capacity(d_tilde(d, n)?);
    let mut current = vec![0u32; d];
    fill(&mut current, 0, n as u32, &mut out);
    out.sort_by(|a, b| b.grevlex_cmp(a));
    Ok(out)
}

fn fill(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(current, pos + 1, remaining - a, out);
    }
}

/// A tuple in `C^d̃` indexed by the canonical multi-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialVector(pub Vec<Complex64>);

impl MonomialVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    /// `⟨Z, W⟩ = Σ Z_α · conj(W_α)`.
    pub fn pair(&self, other: &MonomialVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }
}

impl Index<usize> for MonomialVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Precomputed enumeration for repeated `Z(ζ)` evaluation in hot loops.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    d: usize,
    n: usize,
    indices: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Ok(Self {
            d,
            n,
            indices: enumerate_indices(d, n)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// Writes `Z(ζ)` into `out`, which must have length `d̃`.
    pub fn evaluate_into(&self, zeta: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(zeta.len(), self.d);
        // powers[j][k] = ζ_j^k
        let mut powers = [[Complex64::new(0.0, 0.0); MAX_ORDER + 1]; 4];
        if self.d <= 4 {
            for (j, &z) in zeta.iter().enumerate() {
                let row = &mut powers[j];
                row[0] = Complex64::new(1.0, 0.0);
                for k in 1..=self.n {
                    row[k] = row[k - 1] * z;
                }
            }
            for (slot, alpha) in out.iter_mut().zip(&self.indices) {
                let mut acc = Complex64::new(1.0, 0.0);
                for (j, &a) in alpha.entries().iter().enumerate() {
                    acc *= powers[j][a as usize];
                }
                *slot = acc;
            }
        } else {
            for (slot, alpha) in out.iter_mut().zip(&self.indices) {
                *slot = alpha.monomial(zeta);
            }
        }
    }

    pub fn evaluate(&self, zeta: &[Complex64]) -> MonomialVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.indices.len()];
        self.evaluate_into(zeta, &mut out);
        MonomialVector(out)
    }
}

/// `Z(ζ)` of order `n`, with `d = ζ.len()`.
pub fn monomial_vector(zeta: &[Complex64], n: usize) -> Result<MonomialVector> {
    Ok(MonomialBasis::new(zeta.len(), n)?.evaluate(zeta))
}
