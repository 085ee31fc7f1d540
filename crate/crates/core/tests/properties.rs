use num_rational::Rational64;
use proptest::prelude::*;

use rwvd_core::criteria::{criterion_terms, dimension_gap_check, lemma46_partial_sums, GapVerdict, WalkKind};
use rwvd_core::estimators::{exact_hitting_dp, exact_return_prob, exact_return_prob_2d, renewal_identity_sides, DpTable};
use rwvd_core::lattice_walk::{LatticeDistribution, Marginal};
use rwvd_core::schedules::{ExplicitSchedule, ScheduleFamily, DEFAULT_CAP};
use rwvd_core::Error;

fn family() -> impl Strategy<Value = ScheduleFamily<f64>> {
    prop_oneof![
        Just(ScheduleFamily::DoubleExpSqrt),
        (0.05..0.95f64).prop_map(|theta| ScheduleFamily::DoubleExpTheta { theta }),
        Just(ScheduleFamily::SingleExp),
        (0.1..3.0f64).prop_map(|alpha| ScheduleFamily::ExpPolyLog { alpha }),
        (1.01..10.0f64).prop_map(|ratio| ScheduleFamily::Geometric { ratio }),
        (1.0..5.0f64).prop_map(|power| ScheduleFamily::PowerLaw { power }),
    ]
}

/// A marginal on `[-3, 3]` with integer weights, normalized.
fn marginal() -> impl Strategy<Value = Marginal<f64>> {
    prop::collection::vec(0u32..5, 7)
        .prop_filter("nonzero mass", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: u32 = w.iter().sum();
            let entries = w
                .iter()
                .enumerate()
                .map(|(i, &x)| (i as i64 - 3, x as f64 / total as f64))
                .collect();
            Marginal::new(entries).unwrap()
        })
}

/// A symmetric (mean-zero, non-degenerate) marginal on `[-3, 3]`.
fn centred_marginal() -> impl Strategy<Value = Marginal<f64>> {
    (0u32..5, prop::collection::vec(0u32..5, 3))
        .prop_filter("moves", |(_, w)| w.iter().any(|&x| x > 0))
        .prop_map(|(hold, w)| {
            let total = hold + 2 * w.iter().sum::<u32>();
            let mut entries = vec![(0, hold as f64 / total as f64)];
            for (i, &x) in w.iter().enumerate() {
                let p = x as f64 / total as f64;
                entries.push((i as i64 + 1, p));
                entries.push((-(i as i64) - 1, p));
            }
            Marginal::new(entries).unwrap()
        })
}

fn hit(dist: &LatticeDistribution<f64>, a: u64, b: u64) -> f64 {
    exact_hitting_dp(dist, a, b, None).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_values_lie_in_unit_interval(fam in family(), offset in 0u64..500) {
        let n = fam.first_index() + offset;
        let p = fam.phi(n).unwrap();
        let p1 = fam.phi1(n).unwrap();
        prop_assert!((0.0..=1.0).contains(&p), "phi({n}) = {p}");
        prop_assert!((0.0..=1.0).contains(&p1), "phi1({n}) = {p1}");
    }

    #[test]
    fn log_values_increase(fam in family(), offset in 0u64..500) {
        let n = fam.first_index() + offset;
        prop_assert!(fam.log_log(n + 1).unwrap() > fam.log_log(n).unwrap());
        if let (Ok(l0), Ok(l1)) = (fam.eval_log(n), fam.eval_log(n + 1)) {
            prop_assert!(l1 > l0);
        }
    }

    #[test]
    fn materialized_values_increase(fam in family()) {
        let values = fam.materialize_up_to(1 << 20, DEFAULT_CAP).unwrap();
        prop_assert!(values.windows(2).all(|w| w[1] > w[0]));
        for (i, v) in values.iter().enumerate().take(5) {
            prop_assert_eq!(fam.materialize(fam.first_index() + i as u64, DEFAULT_CAP).unwrap(), *v);
        }
    }

    #[test]
    fn explicit_copy_agrees_with_analytic(fam in family().prop_filter("grows fast", |f| {
        !matches!(f, ScheduleFamily::PowerLaw { .. } | ScheduleFamily::ExpPolyLog { .. })
            && !matches!(f, ScheduleFamily::Geometric { ratio } if *ratio < 1.5)
    })) {
        let first = fam.first_index();
        let values: Vec<u64> = (first..first + 2000).map_while(|n| fam.materialize(n, DEFAULT_CAP).ok()).collect();
        prop_assume!(values.len() >= 3);
        // Entries bumped past a rounding collision no longer round the closed form.
        let plain = |i: usize| fam.eval_log(first + i as u64).unwrap().exp().round() as u64 == values[i];
        let explicit = ScheduleFamily::<f64>::Explicit(ExplicitSchedule::new(values.clone()).unwrap());
        for i in 0..values.len() - 1 {
            if values[i] < 100 || !plain(i) || !plain(i + 1) {
                continue;
            }
            let tol = 1.0 / values[i] as f64 + 1e-12;
            let want = fam.phi(first + i as u64).unwrap();
            let got = explicit.phi(i as u64 + 1).unwrap();
            prop_assert!((want - got).abs() <= tol, "n = {}: {want} vs {got}", i + 1);
        }
    }

    #[test]
    fn dp_conserves_mass(m in marginal(), steps in 1u64..150) {
        let mut table = DpTable::<f64>::new((3 * steps) as usize).unwrap();
        for _ in 0..steps {
            table.step(&m);
            table.absorb_origin();
            prop_assert!(table.conservation_error() <= 1e-10);
        }
    }

    #[test]
    fn planar_return_is_a_product(mx in centred_marginal(), my in centred_marginal(), k in 0u64..40) {
        let dist = LatticeDistribution::new(vec![mx, my]).unwrap();
        let product = exact_return_prob(&dist, k, None).unwrap();
        let direct = exact_return_prob_2d(&dist, k, None).unwrap();
        prop_assert!((product - direct).abs() <= 1e-12, "{product} vs {direct}");
    }

    #[test]
    fn hitting_inclusion_and_subadditivity(m in centred_marginal(), a in 1u64..40, l1 in 1u64..40, l2 in 1u64..40) {
        let dist = LatticeDistribution::new(vec![m]).unwrap();
        let (b, c) = (a + l1, a + l1 + l2);
        let (ab, bc, ac) = (hit(&dist, a, b), hit(&dist, b, c), hit(&dist, a, c));
        prop_assert!(ab <= ac + 1e-12);
        prop_assert!(bc <= ac + 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn planar_hitting_inclusion_and_subadditivity(a in 1u64..20, l1 in 1u64..20, l2 in 1u64..20) {
        let dist = LatticeDistribution::<f64>::lazy(2).unwrap();
        let (b, c) = (a + l1, a + l1 + l2);
        let (ab, bc, ac) = (hit(&dist, a, b), hit(&dist, b, c), hit(&dist, a, c));
        prop_assert!(ab <= ac + 1e-12);
        prop_assert!(bc <= ac + 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn renewal_identity_is_exact(a in 1u64..8, len in 1u64..8, lazy in any::<bool>()) {
        let m = if lazy { Marginal::<Rational64>::lazy() } else { Marginal::simple() };
        let dist = LatticeDistribution::new(vec![m]).unwrap();
        let (lhs, rhs) = renewal_identity_sides(&dist, a, a + len).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lazification_keeps_mean_and_scales_variance(m in marginal(), hold in 0.05..0.95f64) {
        let lazy = m.lazify(hold).unwrap();
        prop_assert!((lazy.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!((lazy.mean() - (1.0 - hold) * m.mean()).abs() < 1e-12);
        let second = |x: &Marginal<f64>| x.variance() + x.mean() * x.mean();
        prop_assert!((second(&lazy) - (1.0 - hold) * second(&m)).abs() < 1e-12);
        prop_assert_eq!(lazy.period(), 1);
    }

    #[test]
    fn projection_keeps_leading_marginals(ms in prop::collection::vec(centred_marginal(), 1..5), d in 1usize..5) {
        let dist = LatticeDistribution::new(ms.clone()).unwrap();
        if d > ms.len() {
            prop_assert!(dist.project(d).is_err());
        } else {
            let p = dist.project(d).unwrap();
            prop_assert_eq!(p.marginals(), &ms[..d]);
        }
    }

    #[test]
    fn gap_rule_needs_sorted_dimensions(mut dims in prop::collection::btree_set(1u64..12, 1..6)
        .prop_map(|s| s.into_iter().collect::<Vec<_>>()), seed in any::<u64>()) {
        let sorted = dims.clone();
        let expected = if sorted[0] <= 2 && sorted.windows(2).all(|w| w[1] - w[0] <= 2) {
            GapVerdict::ConstructibleRecurrent
        } else {
            GapVerdict::ForcedTransient
        };
        prop_assert_eq!(dimension_gap_check(&sorted).unwrap(), expected);
        if dims.len() > 1 {
            let i = (seed % dims.len() as u64) as usize;
            let j = (i + 1 + (seed / 7) as usize % (dims.len() - 1)) % dims.len();
            dims.swap(i, j);
            prop_assert!(matches!(dimension_gap_check(&dims), Err(Error::MalformedDimensions(_))));
        }
    }

    #[test]
    fn four_dimensional_terms_are_dominated(fam in family(), n_max in 10u64..400) {
        let t3 = criterion_terms(WalkKind::Z2inZ3, &fam, n_max).unwrap();
        let t4 = criterion_terms(WalkKind::Z2inZ4, &fam, n_max).unwrap();
        prop_assert!(t4.iter().zip(&t3).all(|(x, y)| x <= y));
    }

    #[test]
    fn min_term_windows_obey_the_dyadic_bound(
        blocks in prop::collection::vec((0u8..5, 1u64..400, 1u32..50), 1..10)
    ) {
        let n = 1usize << 12;
        let mut seq = Vec::with_capacity(n);
        'fill: loop {
            for &(kind, len, p) in &blocks {
                for j in 0..len {
                    let v = match kind {
                        0 => p as f64,
                        1 => 1.5f64.powi((j % 80) as i32 + p as i32).round(),
                        2 => ((j + 1) as f64).powf(1.0 + p as f64 / 10.0).round(),
                        3 => if j % 2 == 0 { 1.0 } else { 2f64.powi(p as i32) },
                        _ => 2f64.powi(p as i32),
                    };
                    seq.push(v.min(2f64.powi(52)));
                    if seq.len() == n {
                        break 'fill;
                    }
                }
            }
        }
        let report = lemma46_partial_sums(&seq, n).unwrap();
        let s = &report.partial_sums;
        let mut totals = vec![0.0];
        for &b in &seq {
            totals.push(totals.last().unwrap() + b);
        }
        let mut m = 2usize;
        while 2 * m <= n {
            // Terms n in [m, 2m]: either B_{n-1} >= n^3 and the term is at most
            // n^{-3/2}, or it is at most delta_n / m with
            // sum delta_n^2 <= ln(B_{2m} / B_{m-1}).
            let window = s[2 * m - 1] - s[m - 2];
            let tail: f64 = (m..=2 * m).map(|k| (k as f64).powf(-1.5)).sum();
            let log_growth = (totals[2 * m] / totals[m - 1]).ln();
            let bound = tail + ((m + 1) as f64).sqrt() * log_growth.sqrt() / m as f64;
            prop_assert!(window <= bound * (1.0 + 1e-9), "m = {m}: {window} > {bound}");
            m *= 2;
        }
    }
}
