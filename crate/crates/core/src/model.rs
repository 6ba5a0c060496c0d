//! Model types: closure parameters, e-vectors and the q-additive model itself.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::lattice::check_base;
use crate::spectrum::{self, Spectrum, SpectrumOptions};

/// Closure parameters `(x, y, z, …)`: the values `η^m(a^q)` that advance the
/// recursion at order `q`. They form the last column of the companion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureSpec {
    params: Vec<f64>,
}

impl ClosureSpec {
    pub fn new(params: Vec<f64>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Invalid("closure needs at least one parameter".into()));
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Invalid(format!("closure parameter {p} is not finite")));
        }
        Ok(Self { params })
    }

    pub fn order(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// The same parameters as exact rationals. Every finite `f64` is a dyadic
    /// rational, so this conversion is lossless.
    pub fn to_exact(&self) -> Vec<BigRational> {
        self.params.iter().map(|&p| exact(p)).collect()
    }
}

pub(crate) fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite values convert exactly")
}

/// Quantifier values at `1, a, …, a^{q-1}` copies.
#[derive(Debug, Clone, PartialEq)]
pub struct EVector {
    values: Vec<f64>,
}

impl EVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("e-vector must not be empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Invalid(format!(
                    "e-vector component e{} = {v} must be a finite non-negative number",
                    i + 1
                )));
            }
        }
        Ok(Self { values })
    }

    /// Like [`EVector::new`], additionally requiring `e₁ ≤ e₂ ≤ … ≤ e_q`.
    pub fn new_monotone(values: Vec<f64>) -> Result<Self> {
        let ev = Self::new(values)?;
        if let Some(w) = ev.values.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Invalid(format!(
                "e-vector is not monotone: e{} > e{}",
                w + 1,
                w + 2
            )));
        }
        Ok(ev)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A q-additive quantifier `E^(N)(e) = Σ_m η^m(N) e_m` on the lattice of base `a`.
#[derive(Debug, Clone)]
pub struct ScalingModel {
    base: u64,
    closure: ClosureSpec,
    evector: EVector,
    exponents: Option<Vec<f64>>,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for ScalingModel {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.closure == other.closure
            && self.evector == other.evector
            && self.exponents == other.exponents
    }
}

impl ScalingModel {
    pub fn from_closure(base: u64, closure: ClosureSpec, evector: EVector) -> Result<Self> {
        check_base(base)?;
        if closure.order() != evector.len() {
            return Err(Error::Invalid(format!(
                "closure order {} does not match e-vector length {}",
                closure.order(),
                evector.len()
            )));
        }
        Ok(Self {
            base,
            closure,
            evector,
            exponents: None,
            spectrum: OnceLock::new(),
        })
    }

    /// Builds the model from its power-law exponents `ν_k`. The spectrum is
    /// taken from the exponents directly instead of re-deriving it from the
    /// characteristic polynomial.
    pub fn from_exponents(base: u64, exponents: Vec<f64>, evector: EVector) -> Result<Self> {
        let closure = closure_from_exponents(&exponents, base)?;
        let mut model = Self::from_closure(base, closure, evector)?;
        let spectrum = Spectrum::from_exponents(&exponents, base, SpectrumOptions::default())?;
        model.spectrum = OnceLock::from(spectrum);
        model.exponents = Some(exponents);
        Ok(model)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.closure.order()
    }

    pub fn closure(&self) -> &ClosureSpec {
        &self.closure
    }

    pub fn evector(&self) -> &EVector {
        &self.evector
    }

    /// The exponents the model was built from, if any.
    pub fn exponents(&self) -> Option<&[f64]> {
        self.exponents.as_deref()
    }

    /// Companion spectrum, computed once and cached.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = spectrum::eigen_spectrum(&self.closure, self.base, SpectrumOptions::default())?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn with_evector(&self, evector: EVector) -> Result<Self> {
        if evector.len() != self.order() {
            return Err(Error::Invalid("e-vector length does not match model order".into()));
        }
        let mut m = self.clone();
        m.evector = evector;
        Ok(m)
    }
}

/// The companion matrix: zeros except for an identity block below the first
/// row and the closure parameters in the last column.
pub fn build_companion(closure: &ClosureSpec) -> DMatrix<f64> {
    let q = closure.order();
    DMatrix::from_fn(q, q, |i, j| {
        if j == q - 1 {
            closure.params[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// Closure parameters whose companion matrix has eigenvalues `a^{ν_k}`.
///
/// Expands `Π_k (λ - a^{ν_k}) = λ^q - Σ_m c_m λ^{m-1}` and returns `(c_1, …, c_q)`.
pub fn closure_from_exponents(exponents: &[f64], base: u64) -> Result<ClosureSpec> {
    check_base(base)?;
    if exponents.is_empty() {
        return Err(Error::Invalid("need at least one exponent".into()));
    }
    if let Some(v) = exponents.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("exponent {v} is not finite")));
    }
    let roots: Vec<f64> = exponents.iter().map(|&v| pow_base(base, v)).collect();
    let poly = monic_from_roots(&roots);
    let q = roots.len();
    ClosureSpec::new((0..q).map(|m| -poly[m]).collect())
}

/// Coefficients (low to high, monic) of `Π (λ - r)`.
pub(crate) fn monic_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        poly = next;
    }
    poly
}

/// `a^ν`, exact for integer `ν` in range.
pub(crate) fn pow_base(base: u64, nu: f64) -> f64 {
    if nu.fract() == 0.0 && nu.abs() < 64.0 {
        (base as f64).powi(nu as i32)
    } else {
        (base as f64).powf(nu)
    }
}
