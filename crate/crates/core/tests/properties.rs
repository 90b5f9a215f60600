use proptest::prelude::*;
use qball_core::functionals::{coercivity_lower_bound, compute_i, compute_q};
use qball_core::gauge::{solve_gauge, GaugeSolveOptions};
use qball_core::minimizer::trial_profile;
use qball_core::{ModelParams, RadialGrid};

fn baseline() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.3)
}

fn grid() -> RadialGrid {
    RadialGrid::new(15.0, 400).unwrap()
}

fn bump(grid: &RadialGrid, amp: f64, radius: f64) -> Vec<f64> {
    trial_profile(amp, radius, grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_field_stays_in_window(amp in 0.0f64..1.4, radius in 1.2f64..6.0, e in 0.1f64..2.0) {
        let p = ModelParams::new(e, 1.0, 1.0, 1.0, 0.3);
        let g_ = grid();
        let f = bump(&g_, amp, radius);
        let g = solve_gauge(&f, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        for w in g.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        prop_assert!(g.iter().all(|&v| v > 0.0 && v <= p.g_inf));
    }

    #[test]
    fn stronger_source_lowers_the_field(amp in 0.1f64..1.2, radius in 1.2f64..5.0, extra in 0.01f64..0.3) {
        let p = baseline();
        let g_ = grid();
        let weak = bump(&g_, amp, radius);
        let strong = bump(&g_, amp + extra, radius);
        let gw = solve_gauge(&weak, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        let gs = solve_gauge(&strong, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        prop_assert!(gs.iter().zip(&gw).all(|(s, w)| s <= w));
    }

    #[test]
    fn charge_grows_with_g(amp in 0.1f64..1.2, radius in 1.2f64..5.0, lift in 0.001f64..0.1) {
        let p = baseline();
        let g_ = grid();
        let f = bump(&g_, amp, radius);
        let g = solve_gauge(&f, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        let lifted: Vec<f64> = g.iter().map(|v| v + lift).collect();
        prop_assert!(compute_q(&f, &lifted, &g_, &p).unwrap() > compute_q(&f, &g, &g_, &p).unwrap());
    }

    #[test]
    fn reduced_action_respects_coercivity(amp in 0.0f64..1.4, radius in 1.2f64..7.0) {
        let p = baseline();
        let g_ = grid();
        let f = bump(&g_, amp, radius);
        let g = solve_gauge(&f, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        let i = compute_i(&f, &g, &g_, &p).unwrap();
        prop_assert!(i >= coercivity_lower_bound(&f, &g_, &p).unwrap());
    }

    #[test]
    fn gauge_solve_is_deterministic(amp in 0.0f64..1.4, radius in 1.2f64..7.0) {
        let p = baseline();
        let g_ = grid();
        let f = bump(&g_, amp, radius);
        let a = solve_gauge(&f, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        let b = solve_gauge(&f, &g_, &p, &GaugeSolveOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
