//! Closed-form evaluation `E^(N) = Σ_m Σ_k C^m_k N^{ν_k} e_m`, valid for any real `N ≥ 1`.

use num_complex::Complex64;
use num_traits::Zero;
use twofloat::TwoFloat;

use crate::coefficients::{solve_coefficients, CoefficientTable};
use crate::error::{Error, Result};
use crate::lattice::check_base;
use crate::model::{pow_base, ScalingModel};
use crate::precise::{cdd, invert, powu, to_c64, Cdd};
use crate::spectrum::{Root, Spectrum, SpectrumOptions};

/// Largest accepted `|Im E| / (1 + |Re E|)`.
pub const IMAG_TOL: f64 = 1e-9;

/// A solved coefficient table bound to its spectrum.
///
/// The public table is in `f64`; evaluation uses a double-double copy of the
/// same coefficients so that cancelling spectral sums stay accurate.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    spectrum: Spectrum,
    table: CoefficientTable,
    /// `C^m_b` in double-double, row `m`, column `b`.
    precise: Vec<Vec<Cdd>>,
}

impl ClosedForm {
    pub fn new(spectrum: &Spectrum) -> Result<Self> {
        let table = solve_coefficients(spectrum)?;
        let q = table.order();
        let v: Vec<Vec<Cdd>> = (0..q)
            .map(|l| {
                (0..q)
                    .map(|b| precise_basis_at_integer(spectrum, table.basis()[b].root, table.basis()[b].power, l))
                    .collect()
            })
            .collect();
        let inv = invert(v).ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
        let precise = (0..q).map(|m| (0..q).map(|b| inv[b][m]).collect()).collect();
        Ok(Self {
            table,
            spectrum: spectrum.clone(),
            precise,
        })
    }

    pub fn for_model(model: &ScalingModel) -> Result<Self> {
        Self::new(model.spectrum()?)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    /// `η^m(N)` for every `m`, in complex arithmetic.
    pub fn coefficients_at(&self, copies: f64) -> Result<Vec<Complex64>> {
        Ok(self.precise_coefficients_at(copies)?.into_iter().map(to_c64).collect())
    }

    fn precise_coefficients_at(&self, copies: f64) -> Result<Vec<Cdd>> {
        check_copies(copies)?;
        let base = self.spectrum.base();
        let lattice = lattice_exponent(base, copies);
        let n = copies.ln() / (base as f64).ln();
        let values: Vec<Cdd> = self
            .table
            .basis()
            .iter()
            .map(|f| match lattice {
                Some(l) => precise_basis_at_integer(&self.spectrum, f.root, f.power, l),
                None => precise_basis_off_lattice(&self.spectrum, f.root, f.power, n),
            })
            .collect();
        Ok(self
            .precise
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&values)
                    .fold(Cdd::zero(), |acc, (c, v)| acc + *c * *v)
            })
            .collect())
    }

    /// `η^m(N)` with the imaginary residue checked and discarded.
    pub fn real_coefficients_at(&self, copies: f64) -> Result<Vec<f64>> {
        self.coefficients_at(copies)?
            .into_iter()
            .map(|z| real_part(z, copies))
            .collect()
    }

    pub fn eval(&self, evector: &[f64], copies: f64) -> Result<f64> {
        if evector.len() != self.table.order() {
            return Err(Error::Invalid("e-vector length does not match spectrum order".into()));
        }
        check_copies(copies)?;
        // The first q lattice points are the boundary conditions themselves.
        if let Some(l) = lattice_exponent(self.spectrum.base(), copies).filter(|&l| l < evector.len()) {
            return Ok(evector[l]);
        }
        let total = self
            .precise_coefficients_at(copies)?
            .into_iter()
            .zip(evector)
            .fold(Cdd::zero(), |acc, (c, &e)| acc + c * TwoFloat::from(e));
        real_part(to_c64(total), copies)
    }
}

fn check_copies(copies: f64) -> Result<()> {
    if !(copies >= 1.0) || !copies.is_finite() {
        return Err(Error::Invalid(format!("number of copies must be >= 1, got {copies}")));
    }
    Ok(())
}

fn real_part(z: Complex64, copies: f64) -> Result<f64> {
    if z.im.abs() <= IMAG_TOL * (1.0 + z.re.abs()) {
        Ok(z.re)
    } else {
        Err(Error::ImaginaryResidue {
            n: copies,
            real: z.re,
            imag: z.im,
        })
    }
}

/// `Some(l)` when `copies == a^l` exactly in floating point.
fn lattice_exponent(base: u64, copies: f64) -> Option<usize> {
    let n = (copies.ln() / (base as f64).ln()).round();
    (n >= 0.0 && n < 1024.0 && (base as f64).powi(n as i32) == copies).then_some(n as usize)
}

fn unit(on: bool) -> Cdd {
    cdd(Complex64::new(if on { 1.0 } else { 0.0 }, 0.0))
}

/// `l^p λ^l` in double-double.
fn precise_basis_at_integer(spectrum: &Spectrum, root: usize, power: usize, l: usize) -> Cdd {
    if spectrum.roots()[root].is_zero() {
        return unit(l == power);
    }
    let value = powu(spectrum.precise_roots()[root], l as u32);
    if power == 0 {
        value
    } else {
        value * TwoFloat::from((l as f64).powi(power as i32))
    }
}

/// `n^p λ^n` for real `n = log_a N`: the integer part of the power in
/// double-double, the fractional part in `f64`.
fn precise_basis_off_lattice(spectrum: &Spectrum, root: usize, power: usize, n: f64) -> Cdd {
    let r: &Root = &spectrum.roots()[root];
    if r.is_zero() {
        return unit((n - power as f64).abs() < 1e-12);
    }
    let whole = n.floor();
    let frac = n - whole;
    let lambda = spectrum.precise_roots()[root];
    let value = powu(lambda, whole as u32) * cdd((to_c64(lambda).ln() * frac).exp());
    if power == 0 {
        value
    } else {
        value * TwoFloat::from(n.powi(power as i32))
    }
}

/// `E^(N)` of a model through its eigen-decomposition.
pub fn closed_form_eval(model: &ScalingModel, copies: f64) -> Result<f64> {
    ClosedForm::for_model(model)?.eval(model.evector().values(), copies)
}

/// The general 2-additive form in terms of the closure `(x, y)`:
/// `[(N^{ν₂} a^{ν₁} - N^{ν₁} a^{ν₂}) e + (N^{ν₁} - N^{ν₂}) f] / (a^{ν₁} - a^{ν₂})`
/// with `a^{ν_{1,2}} = (y ± √(4x + y²)) / 2`. Complex exponents are allowed;
/// coincident roots fall back to the degenerate expansion.
pub fn closed_form_2additive(e: f64, f: f64, x: f64, y: f64, copies: f64, base: u64) -> Result<f64> {
    check_base(base)?;
    check_copies(copies)?;
    let sqrt_z = Complex64::new(4.0 * x + y * y, 0.0).sqrt();
    let l1 = (y + sqrt_z) / 2.0;
    let l2 = (y - sqrt_z) / 2.0;
    let radius = SpectrumOptions::default().cluster_radius;
    let coincident = (l1 - l2).norm() <= radius * l1.norm().max(l2.norm());
    if coincident || l1.norm() == 0.0 || l2.norm() == 0.0 {
        let mid = (l1 + l2) / 2.0;
        if coincident && mid.im == 0.0 && mid.re > 0.0 {
            let nu = mid.re.ln() / (base as f64).ln();
            return Ok(degenerate_2additive(e, f, nu, copies, base));
        }
        let roots: Vec<(Complex64, usize)> = if coincident {
            vec![(mid, 2)]
        } else {
            vec![(l1, 1), (l2, 1)]
        };
        return ClosedForm::new(&Spectrum::new(base, &roots)?)?.eval(&[e, f], copies);
    }
    let ln_a = (base as f64).ln();
    let pow_n = |l: Complex64| (l.ln() / ln_a * copies.ln()).exp();
    let (n1, n2) = (pow_n(l1), pow_n(l2));
    let value = ((n2 * l1 - n1 * l2) * e + (n1 - n2) * f) / (l1 - l2);
    real_part(value, copies)
}

/// Three-exponent closed form with pairwise distinct `ν`'s, term by term.
pub fn closed_form_3additive(evector: [f64; 3], nu: [f64; 3], copies: f64, base: u64) -> Result<f64> {
    check_base(base)?;
    check_copies(copies)?;
    let lam: Vec<f64> = nu.iter().map(|&v| pow_base(base, v)).collect();
    let radius = SpectrumOptions::default().cluster_radius;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (lam[i] - lam[j]).abs() <= radius * lam[i].abs().max(lam[j].abs()) {
            return Err(Error::NearCoincident(format!(
                "ν{} = {} and ν{} = {}; use the degenerate or confluent evaluator",
                i + 1,
                nu[i],
                j + 1,
                nu[j]
            )));
        }
    }
    let [e1, e2, e3] = evector;
    let term = |k: usize, i: usize, j: usize| {
        (lam[i] * lam[j] * e1 - (lam[i] + lam[j]) * e2 + e3)
            / ((lam[k] - lam[i]) * (lam[k] - lam[j]))
            * copies.powf(nu[k])
    };
    Ok(term(0, 1, 2) + term(1, 0, 2) + term(2, 0, 1))
}

/// 2-additive form for coincident exponents `ν₁ = ν₂ = ν`:
/// `-N^ν (log_a N - 1) e + (N/a)^ν log_a N f`.
pub fn degenerate_2additive(e: f64, f: f64, nu: f64, copies: f64, base: u64) -> f64 {
    let n = copies.ln() / (base as f64).ln();
    let growth = copies.powf(nu);
    -growth * (n - 1.0) * e + growth / pow_base(base, nu) * n * f
}

/// 3-additive form for `ν₁ = ν₂ = ν₃ = ν`, solved from the confluent
/// boundary conditions:
/// `N^ν[1 - 3n/2 + n²/2] e₁ + (N/a)^ν[2n - n²] e₂ + (N/a²)^ν[(n² - n)/2] e₃`,
/// `n = log_a N`.
pub fn degenerate_3additive(evector: [f64; 3], nu: f64, copies: f64, base: u64) -> f64 {
    let n = copies.ln() / (base as f64).ln();
    let lam = pow_base(base, nu);
    let growth = copies.powf(nu);
    let [e1, e2, e3] = evector;
    growth * (1.0 - 1.5 * n + 0.5 * n * n) * e1
        + growth / lam * (2.0 * n - n * n) * e2
        + growth / (lam * lam) * 0.5 * (n * n - n) * e3
}
