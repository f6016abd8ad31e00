use proptest::prelude::*;

use stopped_extremes::catalog::{make_family, FamilyId};
use stopped_extremes::dist::ContinuousModel;
use stopped_extremes::inference::{self, Constraint};
use stopped_extremes::pgf::Pgf;
use stopped_extremes::simulation;
use stopped_extremes::specs::StoppingSpec;
use stopped_extremes::transforms::{self, Flavor, MapOp, TransformKind, TransformedModel};

fn member() -> impl Strategy<Value = Pgf> {
    prop_oneof![
        (0.01f64..0.99).prop_map(|p| Pgf::geometric(p).unwrap()),
        (0.05f64..6.0).prop_map(|a| Pgf::zt_poisson(a).unwrap()),
        (0.01f64..0.97).prop_map(|p| Pgf::logarithmic(p).unwrap()),
        (0.05f64..1.0).prop_map(|b| Pgf::potential_conjugate(b).unwrap()),
        (1u32..6).prop_map(|m| Pgf::deterministic(m).unwrap()),
        (1u32..8, 0.05f64..0.95).prop_map(|(n, p)| Pgf::zt_binomial(n, p).unwrap()),
        (-0.9f64..3.0, 0.05f64..0.9).prop_map(|(r, p)| Pgf::etnb(r, p).unwrap()),
        (0.1f64..2.0, 0.0f64..3.0).prop_map(|(a, d)| Pgf::ex63(a, a + d).unwrap()),
        (0.1f64..2.0, 1.0f64..4.0, 0.0f64..3.0).prop_map(|(a, b, d)| Pgf::ex64(a, b, a + d).unwrap()),
    ]
}

fn closed_family() -> impl Strategy<Value = FamilyId> {
    prop_oneof![
        Just(FamilyId::ZtGeometric),
        Just(FamilyId::PotentialConjugate),
        (0.1f64..2.0).prop_map(|alpha| FamilyId::Ex63 { alpha }),
        (0.1f64..2.0, 1.0f64..4.0).prop_map(|(alpha, beta)| FamilyId::Ex64 { alpha, beta }),
    ]
}

fn base() -> impl Strategy<Value = ContinuousModel> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|r| ContinuousModel::exponential(r).unwrap()),
        (-2.0f64..2.0, 0.2f64..2.0).prop_map(|(m, s)| ContinuousModel::lognormal(m, s).unwrap()),
        (-3.0f64..3.0, 0.2f64..3.0).prop_map(|(l, s)| ContinuousModel::logistic(l, s).unwrap()),
        (-3.0f64..3.0, 0.2f64..3.0).prop_map(|(l, s)| ContinuousModel::gumbel(l, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pgf_boundary_and_monotone(h in member(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assert!(h.eval(0.0).unwrap().abs() < 1e-12);
        prop_assert!((h.eval(1.0).unwrap() - 1.0).abs() < 1e-12);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(h.eval(lo).unwrap() <= h.eval(hi).unwrap() + 1e-14);
    }

    #[test]
    fn conjugate_is_involution(h in member(), t in 0.0f64..1.0) {
        let c = h.conjugate();
        let back = 1.0 - c.eval(1.0 - t).unwrap();
        prop_assert!((back - h.eval(t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn inverses_round_trip(h in member(), u in 0.0f64..1.0) {
        prop_assert!((h.eval(h.inverse_eval(u).unwrap()).unwrap() - u).abs() < 1e-9);
        prop_assert!((h.conjugate_eval(h.conjugate_inverse_eval(u).unwrap()).unwrap() - u).abs() < 1e-9);
    }

    #[test]
    fn pmf_matches_first_term(h in member()) {
        // Pr(N = 1) = h'(0) = e^{-eta}
        let p1 = h.pmf(1).unwrap();
        prop_assert!((p1 - (-h.eta()).exp()).abs() < 1e-9 * (1.0 + p1));
        prop_assert!((p1 - h.derivative(0.0, 1).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn closed_families_add_eta(id in closed_family(), d1 in 0.0f64..2.5, d2 in 0.0f64..2.5, t in 0.0f64..1.0) {
        let fam = make_family(id).unwrap();
        let (e1, e2) = (fam.eta0() + d1, fam.eta0() + d2);
        let composed = fam.member(e1).unwrap().compose(&fam.member(e2).unwrap());
        let direct = fam.member(e1 + e2).unwrap();
        prop_assert!((composed.eval(t).unwrap() - direct.eval(t).unwrap()).abs() < 1e-8);
    }

    // away from the ends of [0, 1], where intermediate values near 1 lose digits
    #[test]
    fn extension_then_opposite_is_identity(id in closed_family(), eta in -1.5f64..1.5, u in 0.01f64..0.99, max in any::<bool>()) {
        let fam = make_family(id).unwrap();
        let flavor = if max { Flavor::Max } else { Flavor::Min };
        let x = ContinuousModel::uniform(0.0, 1.0).unwrap();
        let there = transforms::combined_extension(&fam, eta, &x, flavor).unwrap();
        let back = transforms::combined_extension(&fam, -eta, &x, flavor).unwrap();
        let mut steps = there.steps().to_vec();
        steps.extend(back.steps().iter().cloned());
        let round = TransformedModel::from_steps(TransformKind::Chain, steps, x);
        prop_assert!((round.cdf(u).unwrap() - u).abs() < 1e-9);
    }

    #[test]
    fn transformed_cdf_is_a_cdf(h in member(), x in base(), a in 0.001f64..0.999, b in 0.001f64..0.999, op in 0usize..4) {
        let op = [MapOp::Pgf, MapOp::Conjugate, MapOp::Inverse, MapOp::ConjugateInverse][op];
        let m = TransformedModel::base_only(x).then(op, &h);
        let (ya, yb) = (x.quantile(a.min(b)).unwrap(), x.quantile(a.max(b)).unwrap());
        let (fa, fb) = (m.cdf(ya).unwrap(), m.cdf(yb).unwrap());
        prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&fb));
        prop_assert!(fa <= fb + 1e-12);
    }

    #[test]
    fn transformed_quantile_inverts_cdf(h in member(), x in base(), u in 0.01f64..0.99, max in any::<bool>()) {
        let m = if max { transforms::stopped_max(&h, &x) } else { transforms::min_precursor(&h, &x) };
        let y = m.quantile(u).unwrap();
        prop_assert!((m.cdf(y).unwrap() - u).abs() < 1e-8);
    }

    #[test]
    fn stochastic_order_of_extremes(h in member(), x in base(), u in 0.01f64..0.99) {
        // min <= X <= max in distribution
        let y = x.quantile(u).unwrap();
        let fmax = transforms::stopped_max(&h, &x).cdf(y).unwrap();
        let fmin = transforms::stopped_min(&h, &x).cdf(y).unwrap();
        prop_assert!(fmax <= u + 1e-12 && u <= fmin + 1e-12);
    }

    #[test]
    fn criteria_arithmetic(ll in -1e4f64..0.0, k in 1usize..10, n in 2usize..10_000) {
        let (aic, bic) = inference::aic_bic(ll, k, n);
        prop_assert!((bic - aic - k as f64 * ((n as f64).ln() - 2.0)).abs() < 1e-9);
        prop_assert!((aic - (2.0 * k as f64 - 2.0 * ll)).abs() < 1e-9);
    }

    #[test]
    fn constraints_round_trip(z in -30.0f64..30.0) {
        for c in [Constraint::Real, Constraint::Positive, Constraint::Unit, Constraint::AboveMinusOne] {
            let x = c.from_free(z);
            prop_assert!(c.contains(x));
            if z.abs() < 15.0 {
                prop_assert!((c.to_free(x) - z).abs() < 1e-6 * (1.0 + z.abs()));
            }
        }
    }

    #[test]
    fn significant_digit_formatting(x in -1e7f64..1e7) {
        let s = inference::fmt_sig(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs() + 1e-300, "{} -> {}", x, s);
    }

    #[test]
    fn inline_specs_round_trip(p in 0.01f64..0.99, a in 0.1f64..3.0, which in 0usize..3) {
        let spec = match which {
            0 => StoppingSpec::native("logarithmic", &[("p", p)]),
            1 => StoppingSpec::native("zt_poisson", &[("alpha", a)]),
            _ => StoppingSpec::member("ex63", &[("alpha", a)], a + p),
        };
        let text = spec.to_inline();
        let again = StoppingSpec::parse(&text).unwrap();
        prop_assert_eq!(again.to_pgf().unwrap().params(), spec.to_pgf().unwrap().params());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_is_seed_deterministic(seed in any::<u64>(), h in member()) {
        let x = ContinuousModel::exponential(1.0).unwrap();
        let a = simulation::simulate_stopped(&h, &x, 64, Flavor::Max, seed).unwrap();
        let b = simulation::simulate_stopped(&h, &x, 64, Flavor::Max, seed).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        let c = simulation::simulate_stopped(&h, &x, 64, Flavor::Max, seed ^ 1).unwrap();
        prop_assert_ne!(&a.values, &c.values);
    }
}
