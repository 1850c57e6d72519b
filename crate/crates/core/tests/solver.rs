use svv_core::noise::{base_normal, BrownianPaths, NoiseModel};
use svv_core::pressure_law::PressureLaw;
use svv_core::solver::{diffusion_substep, heat_semigroup_apply, simulate_with_source, Boundary, Grid, GridState, NoiseKey, SolverConfig};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `K(s) * exp(-x²/(4a)) = sqrt(a/(a+s)) exp(-x²/(4(a+s)))`.
fn gaussian_after(a: f64, s: f64, x: f64) -> f64 {
    (a / (a + s)).sqrt() * (-x * x / (4.0 * (a + s))).exp()
}

#[test]
fn base_normals_are_standard() {
    let n = 200_000u64;
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let z = base_normal(11, j % 7, j % 3, j);
        s1 += z;
        s2 += z * z;
        s4 += z.powi(4);
    }
    let nf = n as f64;
    let (mean, var, kurt) = (s1 / nf, s2 / nf, s4 / nf);
    assert!(mean.abs() < 5.0 / nf.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 5.0 * (2.0 / nf).sqrt(), "variance {var}");
    assert!((kurt - 3.0).abs() < 0.1, "fourth moment {kurt}");
}

#[test]
fn brownian_increments_have_tick_variance_and_do_not_depend_on_chunking() {
    let (modes, level) = (2, 10);
    let mut fine = BrownianPaths::new(3, 0, modes, 1.0, level);
    let mut coarse = BrownianPaths::new(3, 0, modes, 1.0, level);
    let mut sum_fine = vec![0.0; modes];
    let mut sq = 0.0;
    let mut dw = vec![0.0; modes];
    while fine.tick() < fine.ticks_total() {
        fine.sample_increments(1, &mut dw).unwrap();
        sq += dw[0] * dw[0];
        for (s, d) in sum_fine.iter_mut().zip(&dw) {
            *s += d;
        }
    }
    let mut sum_coarse = vec![0.0; modes];
    while coarse.tick() < coarse.ticks_total() {
        coarse.sample_increments(16, &mut dw).unwrap();
        for (s, d) in sum_coarse.iter_mut().zip(&dw) {
            *s += d;
        }
    }
    for k in 0..modes {
        assert!((sum_fine[k] - sum_coarse[k]).abs() <= 1e-12);
    }
    // Quadratic variation of one path over [0, 1].
    assert!((sq - 1.0).abs() < 5.0 * (2.0 / 1024.0f64).sqrt(), "quadratic variation {sq}");
}

#[test]
fn heat_semigroup_matches_gaussian_convolution() {
    let grid = Grid::new(12.0, 600).unwrap();
    let (a, far) = (0.5, 1.0);
    let field: Vec<f64> = grid.centers().iter().map(|&x| far + gaussian_after(a, 0.0, x)).collect();
    // Below two cells the kernel is integrated over cells, which costs O(dx²).
    for (s, tol) in [(1e-4, 1e-4), (0.05, 1e-6), (0.4, 1e-6), (2.0, 1e-6)] {
        let out = heat_semigroup_apply(&grid, &field, far, s);
        let exact: Vec<f64> = grid.centers().iter().map(|&x| far + gaussian_after(a, s, x)).collect();
        let err = max_diff(&out, &exact);
        assert!(err < tol, "s = {s}: error {err}");
    }
    assert_eq!(heat_semigroup_apply(&grid, &field, far, 0.0), field);
}

#[test]
fn implicit_diffusion_converges_to_heat_semigroup() {
    let grid = Grid::new(12.0, 1200).unwrap();
    let (a, far, eps, t) = (0.5, 1.0, 0.2, 1.0);
    let field: Vec<f64> = grid.centers().iter().map(|&x| far + gaussian_after(a, 0.0, x)).collect();
    let reference = heat_semigroup_apply(&grid, &field, far, eps * t);
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&steps| {
            let mut f = field.clone();
            for _ in 0..steps {
                f = diffusion_substep(&grid, Boundary::FarField { rho: far, m: 0.0 }, eps, t / steps as f64, &f);
            }
            max_diff(&f, &reference)
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.7..2.3).contains(&ratio), "errors {errs:?}");
    }
}

#[test]
fn periodic_diffusion_conserves_the_mean() {
    let grid = Grid::new(1.0, 64).unwrap();
    let field: Vec<f64> = grid.centers().iter().map(|&x| 2.0 + (std::f64::consts::PI * x).sin()).collect();
    let out = diffusion_substep(&grid, Boundary::Periodic, 0.3, 0.1, &field);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&out) - mean(&field)).abs() <= 1e-13);
    assert!(max_diff(&out, &vec![2.0; 64]) < max_diff(&field, &vec![2.0; 64]));
}

mod manufactured {
    use super::*;
    use std::f64::consts::PI;

    pub const EPS: f64 = 0.1;
    pub const T: f64 = 0.25;

    pub fn rho(x: f64, t: f64) -> f64 {
        2.0 + 0.5 * (PI * (x - 0.3 * t)).sin()
    }

    pub fn mom(x: f64, t: f64) -> f64 {
        rho(x, t) * (0.4 + 0.2 * (PI * x + t).cos())
    }

    /// Residual of the viscous system at `(x, t)` by centred differences of the exact fields.
    pub fn source(law: &PressureLaw, x: f64, t: f64) -> (f64, f64) {
        let h = 1e-4;
        let dt = |f: &dyn Fn(f64, f64) -> f64| (f(x, t + h) - f(x, t - h)) / (2.0 * h);
        let dx = |f: &dyn Fn(f64, f64) -> f64| (f(x + h, t) - f(x - h, t)) / (2.0 * h);
        let dxx = |f: &dyn Fn(f64, f64) -> f64| (f(x + h, t) - 2.0 * f(x, t) + f(x - h, t)) / (h * h);
        let flux = |x: f64, t: f64| mom(x, t).powi(2) / rho(x, t) + law.pressure(rho(x, t)).unwrap();
        (
            dt(&rho) + dx(&mom) - EPS * dxx(&rho),
            dt(&mom) + dx(&flux) - EPS * dxx(&mom),
        )
    }

    pub fn run(n: usize, dt_level: u32) -> (GridState, Grid) {
        let law = PressureLaw::polytropic_scaled(2.0).unwrap();
        let grid = Grid::new(1.0, n).unwrap();
        let mut cfg = SolverConfig::new(EPS, T, Boundary::Periodic);
        cfg.save_level = 0;
        cfg.base_level = dt_level;
        cfg.dt_level = Some(dt_level);
        let init = GridState::from_fn(&grid, |x| (rho(x, 0.0), mom(x, 0.0)));
        let src = |x: f64, t: f64| source(&law, x, t);
        let tr = simulate_with_source(
            &law,
            &grid,
            &cfg,
            &NoiseModel::none(),
            &init,
            NoiseKey { seed: 0, sample: 0 },
            &mut [],
            Some(&src),
        )
        .unwrap();
        (tr.final_state().clone(), grid)
    }

    pub fn error(n: usize, dt_level: u32) -> f64 {
        let (s, grid) = run(n, dt_level);
        let er = grid.centers().iter().zip(&s.rho).map(|(&x, r)| (r - rho(x, T)).abs()).fold(0.0, f64::max);
        let em = grid.centers().iter().zip(&s.mom).map(|(&x, m)| (m - mom(x, T)).abs()).fold(0.0, f64::max);
        er.max(em)
    }
}

#[test]
fn manufactured_solution_is_second_order_in_space() {
    // dt ∝ dx² so the time error scales with the spatial one.
    let errs = [manufactured::error(32, 8), manufactured::error(64, 10), manufactured::error(128, 12)];
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("space errors {errs:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p >= 1.8), "orders {orders:?}");
}

#[test]
fn manufactured_solution_is_first_order_in_time() {
    let states: Vec<GridState> = [7, 8, 9].iter().map(|&l| manufactured::run(128, l).0).collect();
    let d = |a: &GridState, b: &GridState| max_diff(&a.rho, &b.rho).max(max_diff(&a.mom, &b.mom));
    let order = (d(&states[0], &states[1]) / d(&states[1], &states[2])).log2();
    eprintln!("time self-convergence order {order}");
    assert!(order >= 0.9, "order {order}");
}
