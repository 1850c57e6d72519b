use super::Grid;

/// Heat kernel `K(s, x) = (4πs)^{-1/2} exp(-x²/(4s))` with `s = εt`.
pub fn heat_kernel(s: f64, x: f64) -> f64 {
    (4.0 * std::f64::consts::PI * s).powf(-0.5) * (-x * x / (4.0 * s)).exp()
}

/// Convolution of `field` (extended by `far` outside the grid) with `K(s, ·)`.
///
/// Uses point quadrature when the kernel spans at least two cells and exact
/// cell integrals of the kernel otherwise; `s = 0` is the identity.
pub fn heat_semigroup_apply(grid: &Grid, field: &[f64], far: f64, s: f64) -> Vec<f64> {
    assert_eq!(field.len(), grid.n, "field length must match the grid");
    if s <= 0.0 {
        return field.to_vec();
    }
    let dx = grid.dx();
    let width = 2.0 * s.sqrt();
    let resolved = width >= 2.0 * dx;
    let reach = ((12.0 * width) / dx).ceil() as usize + 1;
    let xs = grid.centers();
    let mut out = vec![far; grid.n];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(grid.n - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            let f = field[j] - far;
            if f == 0.0 {
                continue;
            }
            let w = if resolved {
                dx * heat_kernel(s, xs[i] - xs[j])
            } else {
                let a = (xs[i] - (xs[j] - 0.5 * dx)) / width;
                let b = (xs[i] - (xs[j] + 0.5 * dx)) / width;
                0.5 * (libm::erf(a) - libm::erf(b))
            };
            acc += w * f;
        }
        *o += acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_normalisation_point() {
        assert!((heat_kernel(1.0 / (4.0 * std::f64::consts::PI), 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_variances_add() {
        let grid = Grid::new(12.0, 1200).unwrap();
        let v0 = 0.3;
        let field: Vec<f64> = grid.centers().iter().map(|x| 1.0 + (-x * x / (2.0 * v0)).exp()).collect();
        for s in [0.01, 0.1, 0.5] {
            let out = heat_semigroup_apply(&grid, &field, 1.0, s);
            let v = v0 + 2.0 * s;
            let amp = (v0 / v).sqrt();
            let worst = grid
                .centers()
                .iter()
                .zip(&out)
                .map(|(x, o)| (o - 1.0 - amp * (-x * x / (2.0 * v)).exp()).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-6, "s = {s}: {worst}");
        }
    }

    #[test]
    fn mass_is_preserved() {
        let grid = Grid::new(10.0, 400).unwrap();
        let field: Vec<f64> = grid
            .centers()
            .iter()
            .map(|x| 2.0 + crate::noise::smooth_bump(x / 2.0))
            .collect();
        let mass = |f: &[f64]| f.iter().map(|v| v - 2.0).sum::<f64>() * grid.dx();
        for s in [1e-5, 0.05, 0.4] {
            let out = heat_semigroup_apply(&grid, &field, 2.0, s);
            assert!((mass(&out) - mass(&field)).abs() <= 1e-8, "s = {s}");
        }
        assert_eq!(heat_semigroup_apply(&grid, &field, 2.0, 0.0), field);
    }
}
