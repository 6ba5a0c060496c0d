//! Eigenvalues of the companion matrix, with multiplicities and exponents.
//!
//! Multiplicities are found in two stages. Exactly repeated roots are split
//! off by a square-free decomposition of the characteristic polynomial over
//! the rationals; the remaining simple roots are computed numerically and
//! merged when they fall within the clustering radius.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::lattice::check_base;
use crate::model::{pow_base, ClosureSpec};
use crate::poly::RatPoly;
use crate::precise::{cdd, rat_to_dd, refine_root, Cdd};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Relative distance below which two roots count as one repeated root.
    pub cluster_radius: f64,
    /// Largest accepted backward error `|p(λ)| / Σ|c_i||λ|^i`.
    pub residual_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            cluster_radius: 1e-7,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// `ν = log_a λ` (principal branch); `-∞` for a zero root.
    pub exponent: Complex64,
}

impl Root {
    fn new(value: Complex64, multiplicity: usize, base: u64) -> Self {
        Self {
            value,
            multiplicity,
            exponent: log_base(value, base),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == Complex64::new(0.0, 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.value.im.abs() <= 1e-12 * self.value.norm()
    }

    pub fn is_positive_real(&self) -> bool {
        self.is_real() && self.value.re > 0.0
    }
}

fn log_base(value: Complex64, base: u64) -> Complex64 {
    if value.norm() == 0.0 {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    value.ln() / (base as f64).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    base: u64,
    roots: Vec<Root>,
    /// The same roots in double-double precision, refined against the exact
    /// characteristic polynomial where one is known.
    precise: Vec<Cdd>,
}

impl Spectrum {
    /// Builds a spectrum from explicit `(λ, multiplicity)` pairs, keeping their order.
    pub fn new(base: u64, roots: &[(Complex64, usize)]) -> Result<Self> {
        check_base(base)?;
        if roots.is_empty() || roots.iter().any(|r| r.1 == 0) {
            return Err(Error::Invalid(
                "spectrum needs at least one root, each with positive multiplicity".into(),
            ));
        }
        Ok(Self {
            base,
            roots: roots.iter().map(|&(v, m)| Root::new(v, m, base)).collect(),
            precise: roots.iter().map(|&(v, _)| cdd(v)).collect(),
        })
    }

    /// Spectrum `{a^{ν_k}}`, clustering coincident exponents into repeated roots.
    pub fn from_exponents(exponents: &[f64], base: u64, opts: SpectrumOptions) -> Result<Self> {
        check_base(base)?;
        if exponents.is_empty() {
            return Err(Error::Invalid("need at least one exponent".into()));
        }
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &nu in exponents {
            let lam = pow_base(base, nu);
            match groups.iter_mut().find(|(g, _)| {
                let gl = pow_base(base, *g);
                (gl - lam).abs() <= opts.cluster_radius * gl.abs().max(lam.abs())
            }) {
                Some(g) => {
                    g.0 = (g.0 * g.1 as f64 + nu) / (g.1 + 1) as f64;
                    g.1 += 1;
                }
                None => groups.push((nu, 1)),
            }
        }
        let roots: Vec<Root> = groups
            .into_iter()
            .map(|(nu, m)| Root {
                value: Complex64::new(pow_base(base, nu), 0.0),
                multiplicity: m,
                exponent: Complex64::new(nu, 0.0),
            })
            .collect();
        Ok(Self {
            base,
            precise: roots.iter().map(|r| cdd(r.value)).collect(),
            roots,
        })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    /// Total number of roots counting multiplicity.
    pub fn order(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_real(&self) -> bool {
        self.roots.iter().all(Root::is_real)
    }

    pub fn has_repeated_roots(&self) -> bool {
        self.roots.iter().any(|r| r.multiplicity > 1)
    }

    /// Roots that are negative or complex (flagged, never dropped).
    pub fn non_positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| !r.is_positive_real())
    }

    /// Same roots in a different order; `perm[i]` is the old index of new root `i`.
    pub(crate) fn precise_roots(&self) -> &[Cdd] {
        &self.precise
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.roots.len()];
        if perm.len() != self.roots.len()
            || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Invalid("not a permutation of the roots".into()));
        }
        Ok(Self {
            base: self.base,
            roots: perm.iter().map(|&p| self.roots[p]).collect(),
            precise: perm.iter().map(|&p| self.precise[p]).collect(),
        })
    }
}

/// All roots of `λ^q - η^q_q λ^{q-1} - … - η^1_q`.
pub fn eigen_spectrum(closure: &ClosureSpec, base: u64, opts: SpectrumOptions) -> Result<Spectrum> {
    check_base(base)?;
    let charpoly = RatPoly::characteristic(&closure.to_exact());
    let factors = charpoly.square_free();
    // (root, multiplicity, index of its square-free factor)
    let mut found: Vec<(Complex64, usize, usize)> = Vec::new();
    for (f, (factor, mult)) in factors.iter().enumerate() {
        let coeffs: Vec<f64> = factor
            .coeffs()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        for root in simple_roots(&coeffs, opts)? {
            found.push((root, *mult, f));
        }
    }

    // (mean root, total multiplicity, members)
    let mut clusters: Vec<(Complex64, usize, Vec<usize>)> = Vec::new();
    for (i, &(value, mult, _)) in found.iter().enumerate() {
        match clusters.iter_mut().find(|(c, _, _)| {
            (*c - value).norm() <= opts.cluster_radius * c.norm().max(value.norm())
        }) {
            Some(c) => {
                let total = c.1 + mult;
                c.0 = (c.0 * c.1 as f64 + value * mult as f64) / total as f64;
                c.1 = total;
                c.2.push(i);
            }
            None => clusters.push((value, mult, vec![i])),
        }
    }

    let mut paired: Vec<(Root, Cdd)> = clusters
        .into_iter()
        .map(|(mut v, m, members)| {
            if v.im.abs() <= 1e-13 * v.norm() {
                v.im = 0.0;
            }
            // A root that is alone in its cluster is a simple root of an exact
            // square-free factor and can be refined against it.
            let precise = match members[..] {
                [only] => {
                    let dd: Vec<_> = factors[found[only].2].0.coeffs().iter().map(rat_to_dd).collect();
                    refine_root(&dd, v)
                }
                _ => cdd(v),
            };
            (Root::new(v, m, base), precise)
        })
        .collect();
    paired.sort_by(|(a, _), (b, _)| {
        b.exponent
            .re
            .total_cmp(&a.exponent.re)
            .then(b.value.im.total_cmp(&a.value.im))
    });
    let (roots, precise): (Vec<Root>, Vec<Cdd>) = paired.into_iter().unzip();

    let full: Vec<f64> = closure
        .params()
        .iter()
        .map(|c| -c)
        .chain(std::iter::once(1.0))
        .collect();
    let worst = roots
        .iter()
        .map(|r| backward_error(&full, r.value))
        .fold(0.0f64, f64::max);
    // Multiple roots only satisfy the full polynomial to about sqrt(eps).
    let tol = if roots.iter().any(|r| r.multiplicity > 1) {
        opts.residual_tol.max(1e-8)
    } else {
        opts.residual_tol
    };
    if !(worst <= tol) {
        return Err(Error::RootNonConvergence { max_residual: worst });
    }
    Ok(Spectrum {
        base,
        roots,
        precise,
    })
}

/// Roots of a square-free polynomial given low-to-high coefficients.
fn simple_roots(coeffs: &[f64], opts: SpectrumOptions) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let mut roots = match d {
        0 => return Ok(Vec::new()),
        1 => vec![Complex64::new(-monic[0], 0.0)],
        2 => quadratic_roots(monic[1], monic[0]),
        _ => {
            let companion = DMatrix::from_fn(d, d, |i, j| {
                if j == d - 1 {
                    -monic[i]
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            companion.complex_eigenvalues().iter().copied().collect()
        }
    };
    for r in &mut roots {
        *r = polish(&monic, *r);
    }
    let worst = roots
        .iter()
        .map(|&r| backward_error(&monic, r))
        .fold(0.0f64, f64::max);
    if !(worst <= opts.residual_tol) {
        return Err(Error::RootNonConvergence { max_residual: worst });
    }
    Ok(roots)
}

/// Roots of `λ² + bλ + c` without cancellation.
fn quadratic_roots(b: f64, c: f64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let t = -0.5 * (b + b.signum() * s);
        if t == 0.0 {
            return vec![Complex64::new(0.0, 0.0); 2];
        }
        vec![Complex64::new(t, 0.0), Complex64::new(c / t, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        vec![Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        if backward_error(coeffs, next) > backward_error(coeffs, z) {
            break;
        }
        z = next;
        if step.norm() <= f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

pub(crate) fn backward_error(coeffs: &[f64], z: Complex64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * r.powi(i as i32))
        .sum();
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}
