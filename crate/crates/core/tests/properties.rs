use approx::assert_relative_eq;
use proptest::prelude::*;
use wavedecay::envelope::{build_q, solve_envelope};
use wavedecay::feedback::{build_h0, eval_g, verify_h0, FeedbackSpec, InfinityBranch, MonotoneFn, OriginBranch};
use wavedecay::raytrace::{flow, make_null, normalized_symbol, MediumFields};
use wavedecay::wavesim::{run, CollarSpec, Grid, InitialData, SimConfig, SourceSpec};

fn power_spec(exponent: f64) -> FeedbackSpec {
    FeedbackSpec::new(
        OriginBranch::Power { exponent, m0: 1.0, big_m0: 1.0 },
        InfinityBranch::Linear { m: 1.0, big_m: 1.0 },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feedback_is_odd_monotone_and_dissipative(e in 0.2f64..5.0, s in -3.0f64..3.0, ds in 1e-3f64..1.0) {
        let spec = power_spec(e);
        let g = eval_g(&spec, s);
        prop_assert_eq!(eval_g(&spec, -s), -g);
        prop_assert!(g * s >= 0.0);
        prop_assert!(eval_g(&spec, s + ds) >= g);
    }

    #[test]
    fn h0_majorizes_near_the_origin(e in 0.2f64..5.0) {
        let spec = power_spec(e);
        let h0 = build_h0(&spec).unwrap();
        prop_assert!(verify_h0(&spec, &h0, 801) <= 1e-12);
    }

    #[test]
    fn power_inverse_round_trip(c in 0.1f64..10.0, e in 0.1f64..4.0, x in 0.0f64..50.0) {
        let f = MonotoneFn::power(c, e);
        let y = f.eval(x);
        prop_assert!((f.inverse(y).unwrap() - x).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn envelope_decreases(k in 0.2f64..5.0, b in 0.2f64..1.0, e0 in 0.1f64..10.0) {
        let q = build_q(&MonotoneFn::power(1.0, b), k).unwrap();
        let curve = solve_envelope(&q, e0, 5.0, 1e-2).unwrap();
        prop_assert!(curve.s.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
    }

    /// `S' + c·q(S) = 0` is `S' + q(S) = 0` run at speed `c`: RK4 with step `dt`
    /// on the first matches RK4 with step `c·dt` on the second node by node.
    #[test]
    fn envelope_time_reparametrization(c in 0.5f64..4.0, b in 1.2f64..3.0) {
        let dt = 1e-2;
        let fast = solve_envelope(&MonotoneFn::power(c, b), 1.0, 2.0, dt).unwrap();
        let slow = solve_envelope(&MonotoneFn::power(1.0, b), 1.0, 2.0 * c, c * dt).unwrap();
        prop_assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.s.iter().zip(&slow.s) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn undamped_energy_is_conserved(amp in 0.1f64..1.0, kx in 1usize..4) {
        let grid = Grid::new_1d(1.0, 101).unwrap();
        let c = SimConfig::new(grid, power_spec(1.0), 2e-3, 2.0, InitialData::Mode { amplitude: amp, kx, ky: 1 });
        let tr = run(&c).unwrap();
        let drift = tr.energy.iter().map(|e| (e - tr.energy[0]).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 1e-4 * tr.energy[0]);
    }

    #[test]
    fn damped_energy_balances(amp in 0.2f64..1.5, seed in 0u64..1000) {
        let grid = Grid::new_1d(1.0, 101).unwrap();
        let mut c = SimConfig::new(grid, power_spec(3.0), 2e-3, 2.0, InitialData::Random { amplitude: amp, modes: 6, seed });
        c.source = Some(SourceSpec::new(3.0, None).unwrap());
        c.collar = Some(CollarSpec { width: 0.1, a0: 1.0, a_max: 2.0 });
        let tr = run(&c).unwrap();
        let last = tr.len() - 1;
        prop_assert!(tr.damping.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((tr.energy[last] + tr.damping[last] - tr.energy[0]).abs() <= 1e-3 * tr.energy[0]);
    }

    #[test]
    fn symbol_is_conserved_along_rays(x in 0.0f64..2.0, y in 0.0f64..2.0, angle in 0.0f64..std::f64::consts::TAU) {
        let med = MediumFields::<2>::radial();
        let pp = make_null(&med, [x, y], -1.0, [angle.cos(), angle.sin()]).unwrap();
        let path = flow(&med, pp, 1e-2, 200).unwrap();
        let p0 = normalized_symbol(&med, &path.points[0]);
        for q in &path.points {
            prop_assert!((normalized_symbol(&med, q) - p0).abs() < 1e-8);
        }
    }
}

#[test]
fn envelope_rk4_is_fourth_order() {
    let q = MonotoneFn::power(1.0, 2.0);
    let exact = 1.0 / (1.0 + 3.0);
    let err = |dt: f64| (solve_envelope(&q, 1.0, 3.0, dt).unwrap().s.last().unwrap() - exact).abs();
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..20.0).contains(&ratio), "{ratio}");
}

#[test]
fn straight_rays_in_constant_media() {
    let med = MediumFields::<2>::Constant { rho: 4.0, k: [[1.0, 0.0], [0.0, 1.0]] };
    let pp = make_null(&med, [0.0, 0.0], -1.0, [3.0, 4.0]).unwrap();
    let path = flow(&med, pp, 1e-2, 100).unwrap();
    let end = path.points.last().unwrap();
    // speed sqrt(K/ρ) = 1/2
    let travelled = (end.x[0].powi(2) + end.x[1].powi(2)).sqrt();
    assert_relative_eq!(travelled, 0.5 * end.t, max_relative = 1e-10);
    assert_relative_eq!(end.x[1] / end.x[0], 4.0 / 3.0, max_relative = 1e-10);
}
