use proptest::prelude::*;

use svv_core::entropy::{EntropyKernel, EntropySpec};
use svv_core::io::{read_frame, write_frame};
use svv_core::noise::NoiseModel;
use svv_core::pressure_law::{Polytropic, PressureLaw};
use svv_core::solver::{simulate, Boundary, Grid, GridState, NoiseKey, SolverConfig};
use svv_core::young_measure::{pair_average, tartar_residual, CellSpec, EmpiricalYoungMeasure};

fn cells() -> CellSpec {
    CellSpec { t_range: (0.0, 1.0), x_range: (0.0, 1.0), n_t: 1, n_x: 1 }
}

fn atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.05f64..3.0, -1.5f64..1.5).prop_map(|(r, u)| (r, r * u)), 1..12)
}

fn spec() -> impl Strategy<Value = EntropySpec> {
    prop_oneof![
        Just(EntropySpec::Energy),
        Just(EntropySpec::SignedQuadratic),
        (-1.0f64..1.0, 0.3f64..2.0).prop_map(|(center, width)| EntropySpec::CompactBump { center, width }),
        prop::collection::vec(-1.0f64..1.0, 1..4).prop_map(|coeffs| EntropySpec::Polynomial { coeffs }),
    ]
}

fn kernel() -> EntropyKernel {
    EntropyKernel::new(Polytropic::scaled(1.8).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tartar_residual_is_antisymmetric(a in atoms(), s1 in spec(), s2 in spec()) {
        let k = kernel();
        let m = EmpiricalYoungMeasure::from_atoms(0.1, cells(), vec![a]).unwrap();
        let r12 = tartar_residual(&m, &k, &s1, &s2).unwrap()[0];
        let r21 = tartar_residual(&m, &k, &s2, &s1).unwrap()[0];
        let r11 = tartar_residual(&m, &k, &s1, &s1).unwrap()[0];
        prop_assert!((r12 + r21).abs() <= 1e-12 * (1.0 + r12.abs()));
        prop_assert!(r11.abs() <= 1e-12);
    }

    #[test]
    fn pair_average_is_a_weighted_mean(a in atoms(), b in atoms(), s in spec()) {
        let k = kernel();
        let avg = |atoms: Vec<(f64, f64)>| {
            let m = EmpiricalYoungMeasure::from_atoms(0.1, cells(), vec![atoms]).unwrap();
            pair_average(&m, &k, &s).unwrap()[0]
        };
        let (ea, qa) = avg(a.clone());
        let (eb, qb) = avg(b.clone());
        let doubled = avg(a.iter().chain(&a).copied().collect());
        prop_assert!((doubled.0 - ea).abs() <= 1e-12 * (1.0 + ea.abs()));
        prop_assert!((doubled.1 - qa).abs() <= 1e-12 * (1.0 + qa.abs()));
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (e, q) = avg(a.iter().chain(&b).copied().collect());
        let (we, wq) = ((na * ea + nb * eb) / (na + nb), (na * qa + nb * qb) / (na + nb));
        prop_assert!((e - we).abs() <= 1e-12 * (1.0 + we.abs()));
        prop_assert!((q - wq).abs() <= 1e-12 * (1.0 + wq.abs()));
    }

    #[test]
    fn frames_round_trip_bitwise(
        n in 16usize..64,
        half in 0.5f64..20.0,
        t in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let grid = Grid::new(half, n).unwrap();
        let v = |i: usize, k: u64| f64::from_bits((seed ^ (i as u64).wrapping_mul(k)) >> 2);
        let state = GridState {
            t,
            rho: (0..n).map(|i| v(i, 0x9e37_79b9)).collect(),
            mom: (0..n).map(|i| -v(i, 0x7f4a_7c15)).collect(),
        };
        let mut buf = Vec::new();
        write_frame(&mut buf, &grid, &state).unwrap();
        let (g, s) = read_frame(buf.as_slice()).unwrap();
        prop_assert_eq!(g, grid);
        prop_assert_eq!(s.t.to_bits(), state.t.to_bits());
        prop_assert!(s.rho.iter().zip(&state.rho).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert!(s.mom.iter().zip(&state.mom).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn silent_periodic_runs_conserve_mass_and_stay_positive(
        base in 0.3f64..2.0,
        amp in 0.0f64..0.9,
        u0 in -0.5f64..0.5,
        phase in 0.0f64..6.3,
        eps in 0.02f64..0.5,
    ) {
        let law = PressureLaw::polytropic_scaled(1.4).unwrap();
        let grid = Grid::new(1.0, 64).unwrap();
        let init = GridState::from_fn(&grid, |x| {
            let r = base * (1.0 + amp * (std::f64::consts::PI * x + phase).sin());
            (r, r * u0)
        });
        let cfg = SolverConfig::new(eps, 0.2, Boundary::Periodic);
        let tr = simulate(&law, &grid, &cfg, &NoiseModel::none(), &init, NoiseKey { seed: 0, sample: 0 }, &mut [])
            .unwrap();
        let total = |v: &[f64]| v.iter().sum::<f64>();
        for s in &tr.saves {
            prop_assert!((total(&s.rho) - total(&init.rho)).abs() <= 1e-10 * total(&init.rho));
            prop_assert!((total(&s.mom) - total(&init.mom)).abs() <= 1e-10 * (1.0 + total(&init.mom).abs()));
            prop_assert!(s.min_density().1 > 0.0);
        }
    }
}
