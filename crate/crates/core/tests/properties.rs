use std::f64::consts::FRAC_PI_2;

use biofilm_core::model::{constant_fn, scalar_fn};
use biofilm_core::{
    characteristic_foot, linear_preset, monod_preset, run_simulation, velocity_profile, Grid, InvariantFlag,
    KineticsModel, MonodParams, MonodSpecies, Outcome, ProblemData, Profile, SolverConfig, V1Segment,
};
use proptest::prelude::*;

fn config(cells: usize, dt: f64) -> SolverConfig {
    SolverConfig {
        grid_cells: cells,
        dt,
        ..SolverConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feet_stay_in_domain_and_keep_order(
        v1_old in -3.0f64..3.0,
        v1_new in -3.0f64..3.0,
        dt in 1e-4f64..0.2,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let seg = V1Segment::new(v1_old, v1_new, dt).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let (fa, _) = characteristic_foot(lo, &seg).unwrap();
        let (fb, _) = characteristic_foot(hi, &seg).unwrap();
        prop_assert!((0.0..=1.0).contains(&fa) && (0.0..=1.0).contains(&fb));
        prop_assert!(fa <= fb);
    }

    #[test]
    fn velocity_is_scaled_integral_of_growth(
        values in proptest::collection::vec(0.0f64..2.0, 21),
        r in 0.2f64..3.0,
    ) {
        // Linear kinetics with A = I give g = Y, so v(1) = R²·∫Y.
        let kin = linear_preset(vec![vec![1.0]], vec![vec![-1.0]], vec![0.0], vec![0.0]).unwrap();
        let grid = Grid::new(20).unwrap();
        let y = Profile::new(grid, values.clone()).unwrap();
        let c = Profile::constant(grid, 1.0);
        let v = velocity_profile(&[y], &[c], r, &kin).unwrap();
        let dz = 1.0 / 20.0;
        let integral: f64 = values.windows(2).map(|w| 0.5 * dz * (w[0] + w[1])).sum();
        prop_assert_eq!(v.values()[0], 0.0);
        prop_assert!((v.last() - r * r * integral).abs() < 1e-12 * (1.0 + integral));
    }

    #[test]
    fn pure_detachment_matches_closed_form(lambda in 0.05f64..2.0, r0 in 0.5f64..2.0) {
        let data = ProblemData {
            phi: vec![constant_fn(1.0)],
            theta: vec![constant_fn(0.0)],
            psi: vec![constant_fn(0.0)],
            diffusivity: vec![1.0],
            lambda,
            r0,
        };
        let traj = run_simulation(&data, &KineticsModel::zero(1, 1).unwrap(), &config(10, 5e-3), 0.5);
        prop_assert_eq!(traj.outcome, Outcome::Completed);
        let r = traj.last_state().unwrap().r;
        let exact = r0 * (1.0 + 3.0 * lambda * r0.powi(3) * 0.5).powf(-1.0 / 3.0);
        prop_assert!((r - exact).abs() < 1e-7, "{} vs {}", r, exact);
    }

    #[test]
    fn dissipative_energy_decreases(phi0 in 0.0f64..1.0, amp in 0.1f64..1.0) {
        let kin = linear_preset(vec![vec![-1.0]], vec![vec![-1.0]], vec![0.0], vec![0.0]).unwrap();
        let data = ProblemData {
            phi: vec![constant_fn(phi0)],
            theta: vec![scalar_fn(move |z| amp * (FRAC_PI_2 * z).cos())],
            psi: vec![constant_fn(0.0)],
            diffusivity: vec![1.0],
            lambda: 0.5,
            r0: 1.0,
        };
        let traj = run_simulation(&data, &kin, &config(40, 5e-3), 0.5);
        prop_assert_eq!(traj.outcome, Outcome::Completed);
        let energy = traj.energy_series();
        prop_assert!(energy.windows(2).all(|w| w[1].1 <= w[0].1), "{:?}", energy);
    }

    #[test]
    fn monod_keeps_nonnegative_data_nonnegative(
        y0 in 0.0f64..1.0,
        s0 in 0.0f64..1.0,
        mu in 0.1f64..2.0,
        k in 0.05f64..1.0,
        decay in 0.0f64..0.5,
    ) {
        let kin = monod_preset(&MonodParams {
            substrates: 1,
            species: vec![MonodSpecies {
                mu_max: mu,
                half_saturation: k,
                decay,
                limiting: 0,
                yields: vec![0.5],
                consumes: None,
            }],
        })
        .unwrap();
        let data = ProblemData {
            phi: vec![constant_fn(y0)],
            theta: vec![constant_fn(s0)],
            psi: vec![constant_fn(s0)],
            diffusivity: vec![1.0],
            lambda: 1.0,
            r0: 1.0,
        };
        let cfg = SolverConfig { theta_scheme: 1.0, ..config(30, 5e-3) };
        let traj = run_simulation(&data, &kin, &cfg, 1.0);
        prop_assert!(traj.outcome.is_success(), "{}", traj.outcome);
        for rep in &traj.reports {
            prop_assert!(!rep.invariant_flags.contains(&InvariantFlag::NegativeY));
            prop_assert!(!rep.invariant_flags.contains(&InvariantFlag::NegativeC));
        }
    }
}

#[test]
fn halving_the_step_changes_little() {
    let kin = linear_preset(vec![vec![0.5]], vec![vec![-1.0]], vec![0.0], vec![0.0]).unwrap();
    let data = ProblemData {
        phi: vec![scalar_fn(|z| 1.0 + z * z)],
        theta: vec![scalar_fn(|z| 1.0 + (FRAC_PI_2 * z).cos())],
        psi: vec![constant_fn(1.0)],
        diffusivity: vec![1.0],
        lambda: 0.5,
        r0: 1.0,
    };
    let final_r = |dt: f64| run_simulation(&data, &kin, &config(40, dt), 0.5).last_state().unwrap().r;
    let (coarse, mid, fine) = (final_r(1e-2), final_r(5e-3), final_r(2.5e-3));
    assert!((fine - mid).abs() < 0.6 * (mid - coarse).abs(), "{coarse} {mid} {fine}");
    assert!((fine - mid).abs() < 1e-3);
}
