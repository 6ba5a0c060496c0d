//! Exact recurrence oracle `η_n = Q η_{n-1}` and the scalability identity.
//!
//! The oracle is the ground truth for every closed form in this crate. Model
//! parameters are `f64`, which are dyadic rationals, so the model-level entry
//! points run in exact rational arithmetic and only round at the very end.

use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{exact, ScalingModel};

/// Arithmetic needed to iterate the companion recursion.
pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>
{
}

fn advance<T: Ring>(params: &[T], eta: &[T]) -> Vec<T> {
    let q = params.len();
    let last = eta[q - 1].clone();
    (0..q)
        .map(|j| {
            let carry = params[j].clone() * last.clone();
            if j == 0 {
                carry
            } else {
                eta[j - 1].clone() + carry
            }
        })
        .collect()
}

fn unit<T: Ring>(q: usize, at: usize) -> Vec<T> {
    (0..q).map(|j| if j == at { T::one() } else { T::zero() }).collect()
}

/// Coefficient vector `η_n = Q^n u₁` for closure parameters `params`.
pub fn recurrence_oracle<T: Ring>(params: &[T], n: u64) -> Vec<T> {
    assert!(!params.is_empty(), "closure must have at least one parameter");
    let mut eta = unit(params.len(), 0);
    for _ in 0..n {
        eta = advance(params, &eta);
    }
    eta
}

/// `η_0, η_1, …, η_{n_max}`.
pub fn recurrence_sequence<T: Ring>(params: &[T], n_max: u64) -> Vec<Vec<T>> {
    assert!(!params.is_empty(), "closure must have at least one parameter");
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(unit(params.len(), 0));
    for n in 1..=n_max as usize {
        let next = advance(params, &out[n - 1]);
        out.push(next);
    }
    out
}

/// `E^(a^n) = η_n · e` in exact arithmetic.
pub fn oracle_eval_exact(model: &ScalingModel, n: u64) -> BigRational {
    let eta = recurrence_oracle(&model.closure().to_exact(), n);
    eta.into_iter()
        .zip(model.evector().values())
        .fold(BigRational::zero(), |acc, (c, &e)| acc + c * exact(e))
}

/// `E^(a^n)` rounded to the nearest `f64`.
pub fn oracle_eval(model: &ScalingModel, n: u64) -> f64 {
    to_f64(&oracle_eval_exact(model, n))
}

/// Coefficient vector for a model, rounded.
pub fn model_coefficients(model: &ScalingModel, n: u64) -> Vec<f64> {
    recurrence_oracle(&model.closure().to_exact(), n)
        .iter()
        .map(to_f64)
        .collect()
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(if r.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Residuals `η^j(N) - Σ_ℓ η^j(a^{ℓ-1} K) η^ℓ(N/K)` with `N = a^n`, `K = a^k`.
pub fn scalability_residuals<T: Ring>(params: &[T], n: u64, k: u64) -> Result<Vec<T>> {
    if k > n {
        return Err(Error::Invalid(format!("need k <= n, got k = {k}, n = {n}")));
    }
    let q = params.len() as u64;
    let seq = recurrence_sequence(params, n.max(k + q - 1));
    let outer = &seq[(n - k) as usize];
    Ok((0..params.len())
        .map(|j| {
            let composed = (0..params.len()).fold(T::zero(), |acc, l| {
                acc + seq[k as usize + l][j].clone() * outer[l].clone()
            });
            seq[n as usize][j].clone() - composed
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub n: u64,
    pub k: u64,
    /// True when every residual is exactly zero.
    pub passed: bool,
    pub max_abs_residual: f64,
    /// Largest residual relative to the magnitude of the matching `η^j(N)`.
    pub max_rel_residual: f64,
}

/// Checks the regrouping identity for `N = a^n` copies split into blocks of
/// `K = a^k`, in exact arithmetic.
pub fn scalability_consistency_check(
    model: &ScalingModel,
    n: u64,
    k: u64,
) -> Result<ConsistencyReport> {
    let params = model.closure().to_exact();
    let residuals = scalability_residuals(&params, n, k)?;
    let eta = recurrence_oracle(&params, n);
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for (r, e) in residuals.iter().zip(&eta) {
        let abs = to_f64(&r.abs());
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(abs / (1.0 + to_f64(&e.abs())));
    }
    Ok(ConsistencyReport {
        n,
        k,
        passed: residuals.iter().all(Zero::is_zero),
        max_abs_residual: max_abs,
        max_rel_residual: max_rel,
    })
}
