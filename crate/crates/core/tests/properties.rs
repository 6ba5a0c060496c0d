//! Property tests over randomly drawn models.

use proptest::prelude::*;
use qadd::io::ModelFile;
use qadd::{
    check_2additive_feasibility, closed_form_2additive, closed_form_eval, degenerate_2additive, fit_evector,
    oracle_eval, ClosedForm, CopyLattice, Dataset, DataPoint, EVector, FitProblem, ScalingModel,
};

/// Exponents with pairwise gaps of at least 0.1, largest first.
fn exponents(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..0.6f64, q).prop_map(|gaps| {
        let mut nu = Vec::with_capacity(gaps.len());
        let mut current = 1.2;
        for g in gaps {
            nu.push(current);
            current -= g;
        }
        nu
    })
}

fn model() -> impl Strategy<Value = ScalingModel> {
    (1usize..=4, 2u64..=7)
        .prop_flat_map(|(q, a)| (exponents(q), prop::collection::vec(0.0..3.0f64, q), Just(a)))
        .prop_map(|(nu, e, a)| ScalingModel::from_exponents(a, nu, EVector::new(e).unwrap()).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_recurrence_on_lattice(m in model(), n in 0u64..=8) {
        let copies = (m.base() as f64).powi(n as i32);
        let closed = closed_form_eval(&m, copies).unwrap();
        let exact = oracle_eval(&m, n);
        prop_assert!(close(closed, exact, 1e-9), "N={copies}: closed {closed} vs recurrence {exact}");
    }

    #[test]
    fn boundary_values_are_the_evector(m in model()) {
        for (l, &e) in m.evector().values().iter().enumerate() {
            let copies = (m.base() as f64).powi(l as i32);
            prop_assert_eq!(closed_form_eval(&m, copies).unwrap(), e);
        }
    }

    #[test]
    fn root_order_does_not_matter(m in model(), copies in 1.0..200.0f64, seed in any::<u64>()) {
        let spectrum = m.spectrum().unwrap();
        let q = spectrum.roots().len();
        let mut perm: Vec<usize> = (0..q).collect();
        // Deterministic shuffle from the drawn seed.
        let mut s = seed;
        for i in (1..q).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let e = m.evector().values();
        let original = ClosedForm::new(spectrum).unwrap().eval(e, copies).unwrap();
        let shuffled = ClosedForm::new(&spectrum.permuted(&perm).unwrap()).unwrap().eval(e, copies).unwrap();
        prop_assert!(close(original, shuffled, 1e-12), "{original} vs {shuffled} for {perm:?}");
    }

    #[test]
    fn nearly_equal_exponents_approach_the_confluent_form(
        e in 0.0..2.0f64,
        f in 0.5..3.0f64,
        nu in 0.2..1.0f64,
        a in 2u64..=6,
        copies in 1.5..40.0f64,
    ) {
        let delta = 1e-6;
        let (x, y) = split_exponents(nu, nu + delta, a);
        let near = closed_form_2additive(e, f, x, y, copies, a).unwrap();
        let limit = degenerate_2additive(e, f, nu, copies, a);
        prop_assert!(close(near, limit, 1e-4), "{near} vs {limit}");
    }

    #[test]
    fn model_files_round_trip(m in model()) {
        let file = ModelFile::from_model(&m, Some("round trip".into()));
        let parsed = ModelFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&parsed, &file);
        let back = parsed.to_model().unwrap();
        prop_assert_eq!(&back, &m);
        for copies in [1.0, 2.5, 17.0] {
            prop_assert_eq!(
                closed_form_eval(&back, copies).unwrap().to_bits(),
                closed_form_eval(&m, copies).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn feasibility_ignores_overall_scale(
        e in 0.0..10.0f64,
        f in 0.0..10.0f64,
        x in -10.0..10.0f64,
        y in -10.0..10.0f64,
        c in 1e-3..1e3f64,
    ) {
        let flags = |e: f64, f: f64| {
            check_2additive_feasibility(e, f, x, y)
                .constraints
                .iter()
                .map(|c| c.satisfied)
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(flags(e, f), flags(c * e, c * f));
    }

    #[test]
    fn evector_fit_is_linear_and_deterministic(m in model(), c in 0.1..10.0f64) {
        let q = m.order();
        let nu = m.exponents().unwrap().to_vec();
        let scaled = m.with_evector(EVector::new(m.evector().values().iter().map(|v| v * c).collect()).unwrap()).unwrap();
        let copies: Vec<u64> = (1..=(3 * q as u64 + 6)).collect();
        let fit = |model: &ScalingModel| {
            let data = Dataset::new(
                copies
                    .iter()
                    .map(|&n| DataPoint { copies: n, total: closed_form_eval(model, n as f64).unwrap().abs() })
                    .collect(),
            )
            .unwrap();
            let problem = FitProblem::new(&data, model.base(), q).unwrap().with_exponents(nu.clone()).unwrap();
            fit_evector(&problem).unwrap().evector
        };
        let base = fit(&m);
        let again = fit(&m);
        prop_assert_eq!(
            base.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        // Absolute values keep the data valid; linearity holds for any fixed data.
        let scaled_fit = fit(&scaled);
        for (s, b) in scaled_fit.iter().zip(&base) {
            prop_assert!(close(*s, c * b, 1e-7), "{s} vs {c}·{b}");
        }
    }

    #[test]
    fn lattice_points_are_located(a in 2u64..=12, k in 0u32..=15) {
        let copies = num_bigint::BigUint::from(a).pow(k);
        let found = CopyLattice::locate(a, &copies).unwrap().unwrap();
        prop_assert_eq!(found.exponent(), k);
        let off = copies * a + 1u32;
        prop_assert!(CopyLattice::locate(a, &off).unwrap().is_none());
    }
}

/// Closure `(x, y)` whose characteristic roots are `a^{ν₁}` and `a^{ν₂}`.
fn split_exponents(nu1: f64, nu2: f64, a: u64) -> (f64, f64) {
    let (r1, r2) = ((a as f64).powf(nu1), (a as f64).powf(nu2));
    (-r1 * r2, r1 + r2)
}
