//! Double-double (≈106-bit) complex arithmetic for the closed-form sums.
//!
//! Spectral sums `Σ_k C_k λ_k^n` cancel heavily when roots are spread out:
//! terms can exceed the result by many orders of magnitude. Refining the
//! roots and inverting the boundary system in double-double keeps the
//! evaluated sums accurate to full `f64` precision in those cases.

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use twofloat::TwoFloat;

pub(crate) type Cdd = Complex<TwoFloat>;

pub(crate) fn cdd(z: Complex64) -> Cdd {
    Cdd::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

pub(crate) fn to_c64(z: Cdd) -> Complex64 {
    Complex64::new(z.re.hi(), z.im.hi())
}

/// Nearest double-double to an exact rational.
pub(crate) fn rat_to_dd(r: &BigRational) -> TwoFloat {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let rest = r - BigRational::from_float(hi).expect("finite");
    TwoFloat::new_add(hi, rest.to_f64().unwrap_or(0.0))
}

/// `a / b` by long division on the high words. `TwoFloat`'s own division
/// only reaches `f64` accuracy, while its multiply-by-`f64` and subtraction
/// are exact enough to correct the quotient twice.
pub(crate) fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

pub(crate) fn cdiv(z: Cdd, w: Cdd) -> Cdd {
    let den = w.re * w.re + w.im * w.im;
    Cdd::new(
        div(z.re * w.re + z.im * w.im, den),
        div(z.im * w.re - z.re * w.im, den),
    )
}

fn norm(z: Cdd) -> f64 {
    to_c64(z).norm()
}

/// Newton refinement of a simple root of `Σ coeffs[i] z^i` (low to high).
pub(crate) fn refine_root(coeffs: &[TwoFloat], start: Complex64) -> Cdd {
    let mut z = cdd(start);
    for _ in 0..4 {
        let mut p = Cdd::zero();
        let mut dp = Cdd::zero();
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + Cdd::new(c, TwoFloat::from(0.0));
        }
        if norm(dp) == 0.0 {
            break;
        }
        let step = cdiv(p, dp);
        let next = z - step;
        if !next.re.hi().is_finite() || !next.im.hi().is_finite() {
            break;
        }
        // Newton from an f64-accurate start converges in one or two steps.
        if norm(step) > 1e-8 * norm(z).max(f64::MIN_POSITIVE) {
            break;
        }
        z = next;
        if norm(step) <= 1e-30 * norm(z) {
            break;
        }
    }
    z
}

pub(crate) fn powu(z: Cdd, mut n: u32) -> Cdd {
    let mut base = z;
    let mut acc = Cdd::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        n >>= 1;
    }
    acc
}

/// Inverse by Gauss–Jordan elimination with partial pivoting; `None` if singular.
pub(crate) fn invert(mut a: Vec<Vec<Cdd>>) -> Option<Vec<Vec<Cdd>>> {
    let n = a.len();
    let one = Cdd::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
    let mut inv: Vec<Vec<Cdd>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { one } else { Cdd::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| norm(a[i][col]).total_cmp(&norm(a[j][col])))?;
        if norm(a[pivot][col]) == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] = cdiv(a[col][j], p);
            inv[col][j] = cdiv(inv[col][j], p);
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                a[i][j] = a[i][j] - f * a[col][j];
                inv[i][j] = inv[i][j] - f * inv[col][j];
            }
        }
    }
    Some(inv)
}
