//! Boundary-condition systems for the coefficients `C^m_k`.
//!
//! Each eigenvalue `λ_k` of multiplicity `m_k` contributes the basis
//! sequences `n^j λ_k^n`, `j < m_k` (for `λ = 0`, the unit impulses at
//! `n = j`). The coefficients are fixed by `η^m_l = δ_{m-1,l}` for
//! `l = 0, …, q-1`, i.e. they form the inverse of the (confluent)
//! Vandermonde matrix `V[l][b] = φ_b(l)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{Root, Spectrum};

/// One basis sequence: root index and power of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisFn {
    pub root: usize,
    pub power: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest accepted condition estimate of the column-equilibrated system.
    pub max_condition: f64,
    /// Tolerance on the boundary residual, relative to the size of the terms.
    pub boundary_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_condition: 1e14,
            boundary_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    basis: Vec<BasisFn>,
    /// Row `m` (0-based e-vector index), column `b` (basis index).
    entries: DMatrix<Complex64>,
    condition: f64,
    max_boundary_residual: f64,
}

impl CoefficientTable {
    pub fn order(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisFn] {
        &self.basis
    }

    /// `C^m_{k,j}` with 0-based `m`, root index `k` and power `j`.
    pub fn get(&self, m: usize, root: usize, power: usize) -> Option<Complex64> {
        let b = self
            .basis
            .iter()
            .position(|f| f.root == root && f.power == power)?;
        Some(self.entries[(m, b)])
    }

    /// Coefficient of basis function `b` for e-vector component `m`.
    pub fn entry(&self, m: usize, b: usize) -> Complex64 {
        self.entries[(m, b)]
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn max_boundary_residual(&self) -> f64 {
        self.max_boundary_residual
    }
}

fn basis_of(spectrum: &Spectrum) -> Vec<BasisFn> {
    spectrum
        .roots()
        .iter()
        .enumerate()
        .flat_map(|(k, r)| (0..r.multiplicity).map(move |j| BasisFn { root: k, power: j }))
        .collect()
}

/// `φ_b(l)` on integer lattice exponents.
pub(crate) fn basis_at_integer(root: &Root, power: usize, l: usize) -> Complex64 {
    if root.is_zero() {
        return if l == power {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let poly = if power == 0 { 1.0 } else { (l as f64).powi(power as i32) };
    root.value.powu(l as u32) * poly
}

pub fn solve_coefficients(spectrum: &Spectrum) -> Result<CoefficientTable> {
    solve_coefficients_with(spectrum, SolveOptions::default())
}

pub fn solve_coefficients_with(spectrum: &Spectrum, opts: SolveOptions) -> Result<CoefficientTable> {
    let basis = basis_of(spectrum);
    let q = basis.len();
    let roots = spectrum.roots();
    let v = DMatrix::from_fn(q, q, |l, b| {
        basis_at_integer(&roots[basis[b].root], basis[b].power, l)
    });

    // Equilibrate columns; V^{-1} = D W^{-1} with W = V D.
    let scales: Vec<f64> = (0..q)
        .map(|b| {
            let m = v.column(b).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let mut w = v.clone();
    for (b, s) in scales.iter().enumerate() {
        w.column_mut(b).scale_mut(*s);
    }
    let w_inv = w
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let condition = norm1(&w) * norm1(&w_inv);
    if !(condition <= opts.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let mut v_inv = w_inv;
    for (b, s) in scales.iter().enumerate() {
        v_inv.row_mut(b).scale_mut(*s);
    }
    let entries = v_inv.transpose();

    let mut worst = 0.0f64;
    for m in 0..q {
        for l in 0..q {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mag = 0.0;
            for b in 0..q {
                let t = entries[(m, b)] * v[(l, b)];
                sum += t;
                mag += t.norm();
            }
            let target = if m == l { 1.0 } else { 0.0 };
            worst = worst.max((sum - target).norm() / (1.0 + mag));
        }
    }
    if !(worst <= opts.boundary_tol) {
        return Err(Error::BoundaryMismatch { residual: worst });
    }
    Ok(CoefficientTable {
        basis,
        entries,
        condition,
        max_boundary_residual: worst,
    })
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
