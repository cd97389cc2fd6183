use acimsel::examples::{envelope, registry};
use acimsel::interval_maps::{Branch, PiecewiseMonotoneMap};
use acimsel::io::format_decimal;
use acimsel::measures::{invariant_density, DistributionFunction, PiecewiseConstantDensity};
use acimsel::randmaps::{bgr_probabilities, RandomMap};
use acimsel::rational::{format_q, parse_q, q, qi, Q};
use acimsel::selection::{betweenness_check, construct_selection, symmetric_slope_solver, DEFAULT_RESOLUTION};
use acimsel::transfer::fp_apply;
use acimsel::transfer::fp_apply_random;
use proptest::prelude::*;

/// Strictly increasing cut points strictly inside `(0, 1)` with denominator `den`.
fn cuts(den: i64, max: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::btree_set(1..den, 0..max).prop_map(move |s| s.into_iter().map(|k| q(k, den)).collect())
}

fn full_branch_map(cuts: &[Q], flips: &[bool]) -> PiecewiseMonotoneMap {
    let mut knots = vec![qi(0)];
    knots.extend(cuts.iter().cloned());
    knots.push(qi(1));
    let branches = knots
        .windows(2)
        .zip(flips.iter().cycle())
        .map(|(w, &down)| {
            let s = qi(1) / (&w[1] - &w[0]);
            if down {
                Branch::affine(w[0].clone(), w[1].clone(), -s.clone(), &s * &w[1]).unwrap()
            } else {
                Branch::affine(w[0].clone(), w[1].clone(), s.clone(), -(&s * &w[0])).unwrap()
            }
        })
        .collect();
    PiecewiseMonotoneMap::new(branches).unwrap()
}

fn lambda() -> impl Strategy<Value = Q> {
    (1i64..64).prop_map(|k| q(k, 64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_branch_maps_preserve_lebesgue(c in cuts(24, 5), flips in proptest::collection::vec(any::<bool>(), 1..6)) {
        let m = full_branch_map(&c, &flips);
        let u = PiecewiseConstantDensity::uniform();
        prop_assert!(fp_apply(&m, &u).unwrap().same_density(&u));
    }

    #[test]
    fn transfer_preserves_mass(c in cuts(12, 4), flips in proptest::collection::vec(any::<bool>(), 1..5),
                               vals in proptest::collection::vec(1i64..20, 4)) {
        let m = full_branch_map(&c, &flips);
        let f = PiecewiseConstantDensity::measure(vec![qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)], vals.iter().map(|v| qi(*v)).collect())
            .unwrap();
        let out = fp_apply(&m, &f).unwrap();
        prop_assert_eq!(out.mass(), f.mass());
        prop_assert!(out.values().iter().all(|v| *v >= qi(0)));
    }

    #[test]
    fn markov_density_is_fixed(c in cuts(16, 4), flips in proptest::collection::vec(any::<bool>(), 1..5)) {
        let m = full_branch_map(&c, &flips);
        let f = invariant_density(&m).unwrap();
        prop_assert!(fp_apply(&m, &f).unwrap().same_density(&f));
        prop_assert_eq!(f.mass(), qi(1));
    }

    #[test]
    fn extended_inverse_is_monotone_and_clamped(a in 0i64..10, len in 1i64..10, c in 0i64..10, d in 1i64..10, down in any::<bool>(),
                                                xs in proptest::collection::vec(0.0f64..=1.0, 2..20)) {
        let (lo, hi) = (q(a, 20), q(a + len, 20));
        let s = if down { -q(d, len) } else { q(d, len) };
        let intercept = if down { q(c, 20) - (&s * &hi) } else { q(c, 20) - (&s * &lo) };
        let b = Branch::affine(lo.clone(), hi.clone(), s, intercept).unwrap();
        let (l, h) = b.domain_f64();
        let mut xs = xs;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ys: Vec<f64> = xs.iter().map(|&x| b.extended_inverse(x)).collect();
        prop_assert!(ys.iter().all(|y| *y >= l && *y <= h));
        for w in ys.windows(2) {
            let ordered = if down { w[1] <= w[0] } else { w[1] >= w[0] };
            prop_assert!(ordered);
        }
        let (ilo, ihi) = b.image();
        for &x in &xs {
            if x >= ilo && x <= ihi {
                prop_assert!((b.eval(b.extended_inverse(x)) - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn combination_inverts(l in lambda(), u in 0.0f64..=1.0) {
        let f = DistributionFunction::convex_combination(
            &registry::get_cdf("sec4/phi1").unwrap(),
            &registry::get_cdf("sec4/phi2").unwrap(),
            &l,
        ).unwrap();
        let x = f.invert(u).unwrap();
        prop_assert!((f.eval(x) - u).abs() < 1e-10);
    }

    #[test]
    fn symmetric_solver_preserves_its_target(l in lambda()) {
        let s = symmetric_slope_solver(&l).unwrap();
        prop_assert!(fp_apply(&s.selection.eta, &s.target).unwrap().same_density(&s.target));
        prop_assert!(s.magnitudes.iter().all(|m| *m > qi(0)));
        let eta = &s.selection.eta;
        prop_assert_eq!(eta.evaluate_exact(&q(1, 2)).unwrap(), qi(1));
        prop_assert_eq!(eta.evaluate_exact(&q(1, 3)).unwrap(), eta.evaluate_exact(&q(2, 3)).unwrap());
    }

    #[test]
    fn bgr_weights_fix_the_combination(k in 1i64..16) {
        let f1 = registry::get("ex2.1/f1").unwrap().into_density().unwrap();
        let f2 = registry::get("ex2.1/f2").unwrap().into_density().unwrap();
        let a = [q(k, 16), q(16 - k, 16)];
        let w = bgr_probabilities(&[f1.clone(), f2.clone()], &a).unwrap();
        let rm = RandomMap::new(vec![registry::get_map("ex2.1/tau1").unwrap(), registry::get_map("ex2.1/tau2").unwrap()], w).unwrap();
        let f = f1.combine(&a[0], &f2, &a[1]).unwrap();
        prop_assert!(fp_apply_random(&rm, &f).unwrap().same_density(&f));
    }

    #[test]
    fn rationals_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let x = q(n, d);
        prop_assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
    }

    #[test]
    fn decimals_keep_fifteen_digits(x in -1e6f64..1e6) {
        let back: f64 = format_decimal(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-14 * x.abs().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn main_selection_on_the_first_example(l in lambda()) {
        let ex = envelope("ex2.1").unwrap();
        let r = construct_selection(&ex.envelope, &ex.f1, &ex.f2, &l, DEFAULT_RESOLUTION).unwrap();
        prop_assert!(r.exact);
        prop_assert!(r.invariance(1 << 12).unwrap().sup_error < 1e-8);
        prop_assert!(betweenness_check(&r.eta, &ex.envelope, 2000).unwrap().max_violation() < 1e-9);
    }
}

/// η moves from the upper edge towards the lower one as λ grows.
#[test]
fn selection_moves_with_lambda() {
    let ex = envelope("ex2.1").unwrap();
    let etas: Vec<_> =
        [1, 2, 3].iter().map(|k| construct_selection(&ex.envelope, &ex.f1, &ex.f2, &q(*k, 4), DEFAULT_RESOLUTION).unwrap().eta).collect();
    let dist = |m: &PiecewiseMonotoneMap, e: &PiecewiseMonotoneMap| {
        (0..=1000).map(|k| k as f64 / 1000.0).map(|x| (m.evaluate(x).unwrap() - e.evaluate(x).unwrap()).abs()).sum::<f64>() / 1001.0
    };
    let lower: Vec<f64> = etas.iter().map(|e| dist(e, ex.envelope.tau1())).collect();
    assert!(lower[0] > lower[1] && lower[1] > lower[2], "{lower:?}");
}
