//! Fitting q-additive models to datasets.
//!
//! With the exponents fixed, `E^(N) = Σ_m η^m(N) e_m` is linear in the
//! e-vector, so the inner problem is a (optionally non-negative) linear least
//! squares. Exponents are found by an outer grid search followed by
//! golden-section refinement one coordinate at a time.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::analysis::{model_feasibility, FeasibilityReport};
use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::io::{DataPoint, Dataset};
use crate::lattice::check_base;
use crate::model::{EVector, ScalingModel};
use crate::spectrum::{Spectrum, SpectrumOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Residuals of `E^(N)/N`.
    #[default]
    PerCopy,
    /// Residuals of `E^(N)`.
    Total,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    points: Vec<DataPoint>,
    base: u64,
    order: usize,
    exponents: Option<Vec<f64>>,
    fixed_e: Vec<Option<f64>>,
    pub objective: Objective,
    /// Project fitted e-components onto `e_m ≥ 0`.
    pub nonnegative: bool,
}

impl FitProblem {
    pub fn new(dataset: &Dataset, base: u64, order: usize) -> Result<Self> {
        check_base(base)?;
        if order == 0 {
            return Err(Error::Invalid("model order must be at least 1".into()));
        }
        if dataset.is_empty() {
            return Err(Error::Invalid("dataset is empty".into()));
        }
        Ok(Self {
            points: dataset.points().to_vec(),
            base,
            order,
            exponents: None,
            fixed_e: vec![None; order],
            objective: Objective::PerCopy,
            nonnegative: true,
        })
    }

    pub fn with_exponents(mut self, exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() != self.order {
            return Err(Error::Invalid(format!(
                "expected {} exponents, got {}",
                self.order,
                exponents.len()
            )));
        }
        self.exponents = Some(exponents);
        Ok(self)
    }

    /// Pins `e_m` (0-based `m`) to `value`.
    pub fn fix_e(mut self, m: usize, value: f64) -> Result<Self> {
        if m >= self.order {
            return Err(Error::Invalid(format!("e-component {} out of range", m + 1)));
        }
        self.fixed_e[m] = Some(value);
        Ok(self)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    fn free(&self) -> Vec<usize> {
        (0..self.order).filter(|&m| self.fixed_e[m].is_none()).collect()
    }

    fn check_counts(&self, extra_free: usize) -> Result<()> {
        let free = self.free().len() + extra_free;
        if self.points.len() < free {
            return Err(Error::Invalid(format!(
                "{} data points cannot determine {free} free parameters",
                self.points.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub base: u64,
    pub exponents: Vec<f64>,
    pub evector: Vec<f64>,
    pub rms_per_copy: f64,
    /// `model/N - data/N` for each point.
    pub residuals: Vec<f64>,
    /// Present when the fitted e-vector is admissible as a model.
    pub feasibility: Option<FeasibilityReport>,
}

impl FitResult {
    pub fn model(&self) -> Result<ScalingModel> {
        ScalingModel::from_exponents(
            self.base,
            self.exponents.clone(),
            EVector::new(self.evector.clone())?,
        )
    }
}

/// Least-squares e-vector for fixed exponents.
pub fn fit_evector(problem: &FitProblem) -> Result<FitResult> {
    let exponents = problem
        .exponents
        .clone()
        .ok_or_else(|| Error::Invalid("fit_evector needs fixed exponents".into()))?;
    problem.check_counts(0)?;
    let (evector, closed_form) = solve_evector(problem, &exponents)?;
    finish(problem, exponents, evector, &closed_form)
}

fn closed_form_for(base: u64, exponents: &[f64]) -> Result<ClosedForm> {
    ClosedForm::new(&Spectrum::from_exponents(
        exponents,
        base,
        SpectrumOptions::default(),
    )?)
}

fn solve_evector(problem: &FitProblem, exponents: &[f64]) -> Result<(Vec<f64>, ClosedForm)> {
    let cf = closed_form_for(problem.base, exponents)?;
    let free = problem.free();
    let rows = problem.points.len();
    let mut design = DMatrix::<f64>::zeros(rows, free.len());
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, p) in problem.points.iter().enumerate() {
        let n = p.copies as f64;
        let coeffs = cf.real_coefficients_at(n)?;
        let w = match problem.objective {
            Objective::PerCopy => 1.0 / n,
            Objective::Total => 1.0,
        };
        let fixed: f64 = (0..problem.order)
            .filter_map(|m| problem.fixed_e[m].map(|v| coeffs[m] * v))
            .sum();
        rhs[i] = w * (p.total - fixed);
        for (j, &m) in free.iter().enumerate() {
            design[(i, j)] = w * coeffs[m];
        }
    }

    let solution = if free.is_empty() {
        Vec::new()
    } else {
        least_squares(&design, &rhs, problem.nonnegative)?
    };
    let mut evector: Vec<f64> = problem.fixed_e.iter().map(|v| v.unwrap_or(0.0)).collect();
    for (j, &m) in free.iter().enumerate() {
        evector[m] = solution[j];
    }
    Ok((evector, cf))
}

fn finish(
    problem: &FitProblem,
    exponents: Vec<f64>,
    evector: Vec<f64>,
    cf: &ClosedForm,
) -> Result<FitResult> {
    let residuals = problem
        .points
        .iter()
        .map(|p| {
            let n = p.copies as f64;
            Ok(cf.eval(&evector, n)? / n - p.per_copy())
        })
        .collect::<Result<Vec<f64>>>()?;
    let rms_per_copy = rms(&residuals);
    let mut result = FitResult {
        base: problem.base,
        exponents,
        evector,
        rms_per_copy,
        residuals,
        feasibility: None,
    };
    result.feasibility = result.model().ok().map(|m| model_feasibility(&m));
    Ok(result)
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|r| r * r).sum::<f64>() / v.len() as f64).sqrt()
}

/// Relative singular-value cutoff for rank determination.
const RANK_TOL: f64 = 1e-12;

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, nonnegative: bool) -> Result<Vec<f64>> {
    let cols = a.ncols();
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }

    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > smax * RANK_TOL)
        .count();
    if rank < cols || smax == 0.0 {
        return Err(Error::RankDeficient {
            rank,
            needed: cols,
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let mut x: Vec<f64> = svd
        .solve(b, smax * RANK_TOL)
        .map_err(|e| Error::Invalid(e.to_string()))?
        .iter()
        .copied()
        .collect();
    if nonnegative && x.iter().any(|&v| v < 0.0) {
        x = nnls(&scaled, b);
    }
    Ok(x.iter().zip(&scales).map(|(v, s)| v * s).collect())
}

/// Lawson–Hanson active-set solver for `min ‖Ax - b‖, x ≥ 0`.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm() * b.norm().max(1.0);

    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match candidate {
            Some(t) if w[t] > tol => passive[t] = true,
            _ => break,
        }
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
            let sol = sub
                .svd(true, true)
                .solve(b, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(idx.len()));
            let mut s = DVector::<f64>::zeros(n);
            for (k, &j) in idx.iter().enumerate() {
                s[j] = sol[k];
            }
            if idx.iter().all(|&j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = idx
                .iter()
                .filter(|&&j| s[j] <= 0.0)
                .map(|&j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for &j in &idx {
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x.iter().copied().collect()
}

/// Search space for [`fit_exponents`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSearch {
    /// Candidate values per coordinate.
    pub candidates: Vec<Vec<f64>>,
    /// Half-width of the golden-section bracket around the grid optimum.
    pub bracket: f64,
    /// Convergence tolerance on exponent updates.
    pub tol: f64,
    /// Golden-section sweeps over the coordinates.
    pub max_sweeps: usize,
    /// Damped Gauss–Newton iterations after the sweeps.
    pub max_polish: usize,
    pub refine: bool,
}

impl ExponentSearch {
    /// Uniform grid `lo, lo+step, …, hi` in every coordinate.
    pub fn grid(order: usize, lo: f64, hi: f64, step: f64) -> Result<Self> {
        Ok(Self::with_candidates(vec![linspace(lo, hi, step)?; order], step))
    }

    pub fn with_candidates(candidates: Vec<Vec<f64>>, bracket: f64) -> Self {
        Self {
            candidates,
            bracket,
            tol: 1e-12,
            max_sweeps: 20,
            max_polish: 200,
            refine: true,
        }
    }

    /// Default search: exponents in `[-1, 2]` with step `0.05`.
    pub fn default_for(order: usize) -> Self {
        Self::grid(order, -1.0, 2.0, 0.05).expect("valid default grid")
    }
}

/// `lo, lo+step, …` up to `hi` (inclusive within rounding).
pub fn linspace(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Invalid(format!("bad grid {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

/// Minimizes the residual over the exponents, solving for the e-vector at each trial.
pub fn fit_exponents(problem: &FitProblem, search: &ExponentSearch) -> Result<FitResult> {
    let q = problem.order;
    if search.candidates.len() != q || search.candidates.iter().any(Vec::is_empty) {
        return Err(Error::Invalid(format!(
            "need a non-empty candidate list for each of the {q} exponents"
        )));
    }
    problem.check_counts(0)?;
    let same_grid = search.candidates.windows(2).all(|w| w[0] == w[1]);

    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for (i, cands) in search.candidates.iter().enumerate() {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                cands.iter().filter_map(move |&c| {
                    // Permutations are equivalent; with a shared grid keep descending order.
                    if same_grid && i > 0 && c >= prefix[i - 1] {
                        return None;
                    }
                    let mut next = prefix.clone();
                    next.push(c);
                    Some(next)
                })
            })
            .collect();
    }
    if combos.is_empty() {
        return Err(Error::Invalid("exponent grid is empty".into()));
    }

    let scores: Vec<f64> = combos
        .par_iter()
        .map(|nu| objective(problem, nu))
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    let mut nu = combos[best].clone();
    let mut score = scores[best];
    if !score.is_finite() {
        return Err(Error::SearchNonConvergence {
            iterations: 0,
            best_rms: score,
            best_exponents: nu,
        });
    }

    if search.refine {
        let bounds: Vec<(f64, f64)> = search
            .candidates
            .iter()
            .map(|c| {
                let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect();
        for _ in 0..search.max_sweeps {
            let mut moved = 0.0f64;
            for i in 0..q {
                let (lo, hi) = bounds[i];
                if hi <= lo {
                    continue;
                }
                let a = (nu[i] - search.bracket).max(lo);
                let b = (nu[i] + search.bracket).min(hi);
                let mut trial = nu.clone();
                let (arg, val) = golden_section(a, b, search.tol, |v| {
                    trial[i] = v;
                    objective(problem, &trial)
                });
                if val < score {
                    moved = moved.max((arg - nu[i]).abs());
                    nu[i] = arg;
                    score = val;
                }
            }
            if moved <= search.tol {
                break;
            }
        }
        // Correlated exponents make coordinate sweeps crawl; finish with
        // Gauss–Newton on the residuals, the e-vector re-solved at each trial.
        let iterations = polish(problem, &bounds, search, &mut nu, &mut score);
        if iterations >= search.max_polish {
            return Err(Error::SearchNonConvergence {
                iterations,
                best_rms: score.sqrt(),
                best_exponents: nu,
            });
        }
    }

    let (evector, cf) = solve_evector(problem, &nu)?;
    finish(problem, nu, evector, &cf)
}

/// Residuals in the problem's objective with the best e-vector for `exponents`.
fn residuals(problem: &FitProblem, exponents: &[f64]) -> Option<Vec<f64>> {
    let (e, cf) = solve_evector(problem, exponents).ok()?;
    problem
        .points
        .iter()
        .map(|p| {
            let n = p.copies as f64;
            let v = cf.eval(&e, n).ok()?;
            let r = match problem.objective {
                Objective::PerCopy => v / n - p.per_copy(),
                Objective::Total => v - p.total,
            };
            r.is_finite().then_some(r)
        })
        .collect()
}

/// Mean squared residual; `+∞` where the inner fit fails.
fn objective(problem: &FitProblem, exponents: &[f64]) -> f64 {
    residuals(problem, exponents).map_or(f64::INFINITY, |r| {
        r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64
    })
}

/// Levenberg–Marquardt steps with central-difference Jacobians. Returns the
/// number of iterations used; `max_polish` means it did not settle.
fn polish(
    problem: &FitProblem,
    bounds: &[(f64, f64)],
    search: &ExponentSearch,
    nu: &mut Vec<f64>,
    score: &mut f64,
) -> usize {
    let q = nu.len();
    let clamp = |v: &mut Vec<f64>| {
        for (x, &(lo, hi)) in v.iter_mut().zip(bounds) {
            *x = x.clamp(lo, hi);
        }
    };
    let mut damping = 1e-3;
    for iteration in 0..search.max_polish {
        let Some(r) = residuals(problem, nu) else {
            return iteration;
        };
        if *score == 0.0 {
            return iteration;
        }
        let mut jac = DMatrix::<f64>::zeros(r.len(), q);
        for j in 0..q {
            let h = 1e-6 * nu[j].abs().max(1.0);
            let (mut up, mut down) = (nu.clone(), nu.clone());
            up[j] += h;
            down[j] -= h;
            let (Some(ru), Some(rd)) = (residuals(problem, &up), residuals(problem, &down)) else {
                return iteration;
            };
            for i in 0..r.len() {
                jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let r = DVector::from_vec(r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        loop {
            let mut lhs = jtj.clone();
            for j in 0..q {
                lhs[(j, j)] += damping * jtj[(j, j)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = lhs.lu().solve(&(-&jtr)) else {
                damping *= 10.0;
                if damping > 1e12 {
                    return iteration;
                }
                continue;
            };
            let mut trial: Vec<f64> = nu.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            clamp(&mut trial);
            let value = objective(problem, &trial);
            if value < *score {
                let moved = trial
                    .iter()
                    .zip(nu.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                *nu = trial;
                *score = value;
                damping = (damping / 10.0).max(1e-12);
                if moved <= search.tol {
                    return iteration;
                }
                break;
            }
            damping *= 10.0;
            // No step improves the objective any more: a numerical minimum.
            if damping > 1e12 {
                return iteration;
            }
        }
    }
    search.max_polish
}

fn golden_section(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let ends = [(a, f(a)), (b, f(b)), (c, fc), (d, fd)];
    ends.into_iter()
        .fold((c, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// `sqrt(mean_i (E^(N_i)/N_i - value_i/N_i)²)`.
pub fn hypothesis_residual(model: &ScalingModel, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Invalid("dataset is empty".into()));
    }
    let cf = ClosedForm::for_model(model)?;
    let residuals = dataset
        .points()
        .iter()
        .map(|p| {
            let n = p.copies as f64;
            Ok(cf.eval(model.evector().values(), n)? / n - p.per_copy())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rms(&residuals))
}
