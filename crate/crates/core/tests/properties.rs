use proptest::prelude::*;

use mllab::atoms::{decompose, guarantees};
use mllab::harness::{gen_step_function, StepSpec, ValueDist};
use mllab::lorentz::lorentz_norm;
use mllab::morrey::morrey_lorentz_norm;
use mllab::operators::{frac_integral, maximal, FracIntegralParams, MaximalParams};
use mllab::{LorentzParams, MorreyLorentzParams, StepFunction};

fn step_function() -> impl Strategy<Value = StepFunction> {
    (any::<u64>(), 1usize..=2, -2i32..=3, 1usize..=24, 0usize..3).prop_map(|(seed, dim, level, cells, law)| {
        let dist = [ValueDist::Uniform, ValueDist::HeavyTail { beta: 2.0 }, ValueDist::IndicatorMix][law];
        gen_step_function(seed, &StepSpec::new(dim, level, cells, dist)).unwrap()
    })
}

fn morrey_params() -> impl Strategy<Value = MorreyLorentzParams> {
    (1.0f64..4.0, 0.1f64..1.0, prop_oneof![Just(f64::INFINITY), 0.5f64..4.0])
        .prop_map(|(p, qf, r)| MorreyLorentzParams::new(p, (p * qf).max(0.5), r).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_homogeneous(f in step_function(), c in -5.0f64..5.0, mp in morrey_params()) {
        let lp = LorentzParams::new(mp.p(), mp.q()).unwrap();
        prop_assert!(close(lorentz_norm(&f.scale(c), lp), c.abs() * lorentz_norm(&f, lp), 1e-12));
        prop_assert!(close(morrey_lorentz_norm(&f.scale(c), mp), c.abs() * morrey_lorentz_norm(&f, mp), 1e-12));
    }

    #[test]
    fn norms_ignore_refinement(f in step_function(), k in 1i32..=2, mp in morrey_params()) {
        let fine = f.refine(f.level() + k).unwrap();
        prop_assert!(close(morrey_lorentz_norm(&fine, mp), morrey_lorentz_norm(&f, mp), 1e-12));
    }

    #[test]
    fn dilation_scales_by_the_first_index(f in step_function(), m in -3i32..=3, mp in morrey_params()) {
        let expected = 2f64.powf(-(m * f.dim() as i32) as f64 / mp.p()) * morrey_lorentz_norm(&f, mp);
        prop_assert!(close(morrey_lorentz_norm(&f.dilate(m), mp), expected, 1e-12));
    }

    #[test]
    fn weak_norm_bounded_by_strong(f in step_function(), p in 1.0f64..4.0, r1 in 0.5f64..3.0) {
        let q = p.min(2.0);
        let small = MorreyLorentzParams::new(p, q, r1).unwrap();
        let large = MorreyLorentzParams::new(p, q, f64::INFINITY).unwrap();
        // t^{1/q} f*(t) ≤ (r/q)^{1/r} ‖f‖_{L^{q,r}}, with equality on indicators
        let constant = (r1 / q).powf(1.0 / r1);
        prop_assert!(morrey_lorentz_norm(&f, large) <= constant * morrey_lorentz_norm(&f, small) * (1.0 + 1e-10));
    }

    #[test]
    fn maximal_dominates_and_scales(f in step_function(), c in 0.1f64..10.0) {
        let eval = f.level() + 1;
        let m = maximal(&f, MaximalParams::hardy_littlewood(), eval).unwrap();
        let fine = f.refine(eval).unwrap();
        for (idx, v) in fine.iter() {
            prop_assert!(m.value(idx) >= v.abs() * (1.0 - 1e-14));
        }
        let mc = maximal(&f.scale(-c), MaximalParams::hardy_littlewood(), eval).unwrap();
        for (idx, v) in m.iter() {
            prop_assert!(close(mc.value(idx), c * v, 1e-12));
        }
    }

    #[test]
    fn fractional_integral_is_positive_on_nonnegative_input(f in step_function()) {
        prop_assume!(f.dim() == 1);
        let g = f.abs();
        let out = frac_integral(&g, FracIntegralParams::new(0.5).unwrap(), g.level() + 1).unwrap();
        prop_assert!(out.values().all(|v| v > 0.0));
    }

    #[test]
    fn decomposition_reconstructs(seed in any::<u64>(), cells in 1usize..=64, degree in 0i32..=2) {
        let f = gen_step_function(seed, &StepSpec::new(1, 4, cells, ValueDist::Uniform)).unwrap();
        let result = decompose(&f, degree, 1.0).unwrap();
        let g = guarantees(&f, &result).unwrap();
        prop_assert!(g.hold(), "{:?}", g);
    }

    #[test]
    fn json_round_trip(f in step_function()) {
        prop_assert_eq!(StepFunction::from_json(&f.to_json()).unwrap(), f);
    }
}
