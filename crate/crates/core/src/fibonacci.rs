//! Hybrid Fibonacci polynomials `F_n(x, y)`, defined by `F_0 = 0`, `F_1 = 1`
//! and `F_n = y F_{n-1} + x F_{n-2}`. Their explicit expansion is
//! `F_n = Σ_k C(n-1-k, k) x^k y^{n-1-2k}`.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Monomial expansion of `F_n`: terms `coeff · x^k y^{n-1-2k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridFibonacci {
    degree: u32,
    terms: Vec<(u32, BigUint)>,
}

impl HybridFibonacci {
    pub fn new(degree: u32) -> Self {
        let terms = if degree == 0 {
            Vec::new()
        } else {
            (0..=(degree - 1) / 2)
                .map(|k| {
                    let top = BigUint::from(degree - 1 - k);
                    (k, binomial(top, BigUint::from(k)))
                })
                .collect()
        };
        Self { degree, terms }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `(k, C(n-1-k, k))` for the monomial `x^k y^{n-1-2k}`.
    pub fn terms(&self) -> &[(u32, BigUint)] {
        &self.terms
    }

    /// Largest `2·deg_x + deg_y` over the monomials; equals `n - 1` for `n ≥ 1`.
    pub fn weighted_degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .map(|(k, _)| 2 * k + (self.degree - 1 - 2 * k))
            .max()
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (k, c)| {
            let c = BigRational::from_integer(BigInt::from(c.clone()));
            acc + c * pow(x, *k) * pow(y, self.degree - 1 - 2 * k)
        })
    }
}

fn pow(v: &BigRational, e: u32) -> BigRational {
    num_traits::pow(v.clone(), e as usize)
}

/// `F_n(x, y)` in exact arithmetic.
pub fn fibonacci_hybrid(n: u32, x: &BigRational, y: &BigRational) -> BigRational {
    HybridFibonacci::new(n).eval(x, y)
}

/// `F_0 … F_{n_max}` by the three-term recurrence.
pub fn fibonacci_by_recurrence(n_max: u32, x: &BigRational, y: &BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(), BigRational::one()];
    for n in 2..=n_max as usize {
        let next = y * &out[n - 1] + x * &out[n - 2];
        out.push(next);
    }
    out.truncate(n_max as usize + 1);
    out
}

/// 2-additive value at `a^n` copies: `x F_{n-1} e + F_n f`. At `n = 0` this is `e`.
pub fn fibonacci_2additive_eval(
    e: &BigRational,
    f: &BigRational,
    x: &BigRational,
    y: &BigRational,
    n: u32,
) -> BigRational {
    if n == 0 {
        return e.clone();
    }
    x * fibonacci_hybrid(n - 1, x, y) * e + fibonacci_hybrid(n, x, y) * f
}

/// `|F_n(x, y) - (λ₁ⁿ - λ₂ⁿ)/√Z|` with `Z = 4x + y²` and `λ = (y ± √Z)/2`.
pub fn binet_check(n: u32, x: f64, y: f64) -> Result<f64> {
    let z = 4.0 * x + y * y;
    if !(z > 0.0) {
        return Err(Error::Invalid(format!(
            "Binet form needs 4x + y² > 0, got {z}"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let exact = fibonacci_hybrid(
        n,
        &BigRational::from_float(x).ok_or_else(|| Error::Invalid("x not finite".into()))?,
        &BigRational::from_float(y).ok_or_else(|| Error::Invalid("y not finite".into()))?,
    );
    let sz = z.sqrt();
    let (l1, l2) = ((y + sz) / 2.0, (y - sz) / 2.0);
    let binet = (l1.powi(n as i32) - l2.powi(n as i32)) / sz;
    Ok((crate::oracle::to_f64(&exact) - binet).abs())
}
