//! Dense polynomials over the rationals, just enough for an exact square-free
//! decomposition of characteristic polynomials.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficients from lowest to highest degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatPoly(Vec<BigRational>);

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    /// `λ^q - c_q λ^{q-1} - … - c_1`.
    pub fn characteristic(closure: &[BigRational]) -> Self {
        let mut coeffs: Vec<BigRational> = closure.iter().map(|c| -c.clone()).collect();
        coeffs.push(BigRational::one());
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("non-zero polynomial")
    }

    pub fn monic(&self) -> Self {
        let lead = self.lead().clone();
        Self(self.0.iter().map(|c| c / &lead).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = other.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a - b
                })
                .collect(),
        )
    }

    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.0.clone();
        let dd = divisor.degree();
        if rem.len() <= dd {
            return (Self(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        let lead = divisor.lead().clone();
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            for (j, d) in divisor.0.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = if r.is_zero() { r } else { r.monic() };
        }
        a.monic()
    }

    /// Yun's algorithm: returns `(factor, multiplicity)` pairs with square-free,
    /// pairwise coprime factors whose product (with multiplicities) is `self`
    /// up to a constant.
    pub fn square_free(&self) -> Vec<(RatPoly, usize)> {
        let f = self.monic();
        if f.degree() == 0 {
            return Vec::new();
        }
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut mult = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            let nb = b.div_rem(&a).0;
            let nc = d.div_rem(&a).0;
            d = nc.sub(&nb.derivative());
            b = nb;
            if a.degree() > 0 {
                out.push((a, mult));
            }
            mult += 1;
        }
        out
    }
}
