//! Feasibility constraints, large-N limits, and the superactivated
//! three-exponent model used for one-shot distillable entanglement.

use std::fmt;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::lattice::check_base;
use crate::model::{EVector, ScalingModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub satisfied: bool,
    /// Signed slack; negative means violated.
    pub margin: f64,
}

impl Constraint {
    fn at_least(name: &str, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            satisfied: margin >= 0.0,
            margin,
        }
    }

    fn strictly(name: &str, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            satisfied: margin > 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub constraints: Vec<Constraint>,
}

impl FeasibilityReport {
    pub fn all_satisfied(&self) -> bool {
        self.constraints.iter().all(|c| c.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| !c.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: FeasibilityReport) {
        self.constraints.extend(other.constraints);
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(
                f,
                "{:<8} {:<28} margin {}",
                if c.satisfied { "ok" } else { "VIOLATED" },
                c.name,
                c.margin
            )?;
        }
        Ok(())
    }
}

pub const X_NEGATIVE: &str = "x < 0";
pub const REAL_EXPONENTS: &str = "y^2 >= 4|x|";
pub const MONOTONE: &str = "f(y-1) >= |x|e";
pub const OSD_CONSISTENCY: &str = "e3 >= (sqrt(a)+1)e2";

/// Necessary conditions for `E^(a²) = xe + yf` to describe a monotone
/// 2-additive quantifier. Reports, never fails.
pub fn check_2additive_feasibility(e: f64, f: f64, x: f64, y: f64) -> FeasibilityReport {
    FeasibilityReport {
        constraints: vec![
            Constraint::strictly(X_NEGATIVE, -x),
            Constraint::at_least(REAL_EXPONENTS, y * y - 4.0 * x.abs()),
            Constraint::at_least(MONOTONE, f * (y - 1.0) - x.abs() * e),
        ],
    }
}

/// Positivity of the asymptote of the superactivated model requires
/// `e₃ ≥ (√a + 1) e₂`.
pub fn check_osd_consistency(base: u64, e2: f64, e3: f64) -> FeasibilityReport {
    let margin = e3 - ((base as f64).sqrt() + 1.0) * e2;
    FeasibilityReport {
        constraints: vec![Constraint::at_least(OSD_CONSISTENCY, margin)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoteKind {
    Vanishes,
    Finite,
    PowerDivergent,
    /// `E/N ~ (log_a N)^order`.
    LogDivergent { order: usize },
}

impl fmt::Display for AsymptoteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymptoteKind::Vanishes => write!(f, "vanishes"),
            AsymptoteKind::Finite => write!(f, "finite"),
            AsymptoteKind::PowerDivergent => write!(f, "power-divergent"),
            AsymptoteKind::LogDivergent { order } => write!(f, "log-divergent (order {order})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteReport {
    pub kind: AsymptoteKind,
    /// `lim E^(N)/N`, present only for [`AsymptoteKind::Finite`].
    pub value: Option<f64>,
    pub dominant_exponent: f64,
    pub multiplicity: usize,
}

/// Tolerance for treating the dominant exponent as exactly one.
pub const UNIT_EXPONENT_TOL: f64 = 1e-9;

/// Classifies `lim_{N→∞} E^(N)/N` by the largest exponent and its multiplicity.
pub fn asymptote(model: &ScalingModel) -> Result<AsymptoteReport> {
    let spectrum = model.spectrum()?;
    let roots = spectrum.roots();
    let nu_max = roots
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| r.exponent.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if nu_max == f64::NEG_INFINITY {
        return Ok(AsymptoteReport {
            kind: AsymptoteKind::Vanishes,
            value: None,
            dominant_exponent: nu_max,
            multiplicity: spectrum.order(),
        });
    }
    let dominant: Vec<usize> = (0..roots.len())
        .filter(|&k| !roots[k].is_zero() && (roots[k].exponent.re - nu_max).abs() <= UNIT_EXPONENT_TOL)
        .collect();
    if let Some(&k) = dominant.iter().find(|&&k| !roots[k].is_positive_real()) {
        return Err(Error::ComplexDominant(format!("λ = {}", roots[k].value)));
    }
    let multiplicity: usize = dominant.iter().map(|&k| roots[k].multiplicity).sum();
    let (kind, value) = if nu_max < 1.0 - UNIT_EXPONENT_TOL {
        (AsymptoteKind::Vanishes, None)
    } else if nu_max > 1.0 + UNIT_EXPONENT_TOL {
        (AsymptoteKind::PowerDivergent, None)
    } else if multiplicity > 1 {
        (
            AsymptoteKind::LogDivergent {
                order: multiplicity - 1,
            },
            None,
        )
    } else {
        let cf = ClosedForm::new(spectrum)?;
        let k = dominant[0];
        let b = cf
            .table()
            .basis()
            .iter()
            .position(|f| f.root == k && f.power == 0)
            .expect("every root has a power-zero basis function");
        let e = model.evector().values();
        let value: f64 = (0..e.len()).map(|m| (cf.table().entry(m, b) * e[m]).re).sum();
        (AsymptoteKind::Finite, Some(value))
    };
    Ok(AsymptoteReport {
        kind,
        value,
        dominant_exponent: nu_max,
        multiplicity,
    })
}

/// Exponents of the superactivated model: linear, square-root and constant terms.
pub const OSD_EXPONENTS: [f64; 3] = [1.0, 0.5, 0.0];

/// Inputs of the superactivated three-exponent model: the quantifier vanishes
/// below `a` copies, takes `e₂` at `a` copies and `e₃` at `a²` copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsdModelSpec {
    pub superactivation_copies: u64,
    pub e2: f64,
    pub e3: f64,
}

impl OsdModelSpec {
    pub fn new(superactivation_copies: u64, e2: f64, e3: f64) -> Result<Self> {
        check_base(superactivation_copies)?;
        if !(e2 > 0.0 && e3 > 0.0) || !e2.is_finite() || !e3.is_finite() {
            return Err(Error::Invalid(format!(
                "e2 and e3 must be positive, got {e2} and {e3}"
            )));
        }
        Ok(Self {
            superactivation_copies,
            e2,
            e3,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OsdModel {
    pub model: ScalingModel,
    pub consistency: FeasibilityReport,
}

impl OsdModel {
    pub fn warnings(&self) -> Vec<String> {
        self.consistency
            .violations()
            .map(|c| format!("{} violated (margin {})", c.name, c.margin))
            .collect()
    }
}

/// 3-additive model with `e = (0, e₂, e₃)`, exponents `(1, ½, 0)` and base
/// `a = N_SA`. A failed consistency check is attached, not raised.
pub fn build_osd_model(spec: OsdModelSpec) -> Result<OsdModel> {
    let spec = OsdModelSpec::new(spec.superactivation_copies, spec.e2, spec.e3)?;
    let model = ScalingModel::from_exponents(
        spec.superactivation_copies,
        OSD_EXPONENTS.to_vec(),
        EVector::new(vec![0.0, spec.e2, spec.e3])?,
    )?;
    Ok(OsdModel {
        model,
        consistency: check_osd_consistency(spec.superactivation_copies, spec.e2, spec.e3),
    })
}

/// Per-copy values `E^(N)/N`.
pub fn regularized_curve(model: &ScalingModel, copies: &[f64]) -> Result<Vec<(f64, f64)>> {
    let cf = ClosedForm::for_model(model)?;
    copies
        .iter()
        .map(|&n| Ok((n, cf.eval(model.evector().values(), n)? / n)))
        .collect()
}

/// A reference case from the isotropic-state comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsdCase {
    pub dimension: u32,
    pub fidelity: f64,
    pub epsilon: f64,
    pub spec: OsdModelSpec,
    /// Largest copy number of the published comparison.
    pub max_copies: u64,
}

/// Built-in inputs for local dimensions 2, 3 and 4.
pub fn builtin_osd_cases() -> [OsdCase; 3] {
    let case = |dimension, fidelity, a: u64, per_copy_e3: f64, max_copies| OsdCase {
        dimension,
        fidelity,
        epsilon: 0.001,
        spec: OsdModelSpec {
            superactivation_copies: a,
            e2: 1.0,
            e3: (a * a) as f64 * per_copy_e3,
        },
        max_copies,
    };
    [
        case(2, 0.96, 6, 0.405, 50),
        case(3, 0.9, 6, 0.518, 40),
        case(4, 0.9, 5, 0.659, 30),
    ]
}

/// Feasibility checks that apply to a given model shape.
pub fn model_feasibility(model: &ScalingModel) -> FeasibilityReport {
    let e = model.evector().values();
    let mut report = FeasibilityReport {
        constraints: vec![Constraint::at_least(
            "e_m >= 0",
            e.iter().copied().fold(f64::INFINITY, f64::min),
        )],
    };
    if model.order() == 2 {
        let p = model.closure().params();
        report.extend(check_2additive_feasibility(e[0], e[1], p[0], p[1]));
    }
    if let Some(nu) = model.exponents() {
        let mut sorted = nu.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let osd_shaped = sorted.len() == 3
            && sorted.iter().zip(OSD_EXPONENTS).all(|(a, b)| (a - b).abs() < 1e-12)
            && e[0] == 0.0;
        if osd_shaped {
            report.extend(check_osd_consistency(model.base(), e[1], e[2]));
        }
    }
    report
}
