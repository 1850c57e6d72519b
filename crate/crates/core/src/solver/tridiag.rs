/// Boundary closure of the discrete Laplacian at one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    /// Ghost cell holds a fixed value.
    Dirichlet(f64),
    /// Ghost mirrors the first cell.
    Even,
    /// Ghost mirrors the first cell with opposite sign.
    Odd,
}

impl Closure {
    pub fn ghost(self, first: f64) -> f64 {
        match self {
            Closure::Dirichlet(g) => g,
            Closure::Even => first,
            Closure::Odd => -first,
        }
    }

    fn diag_shift(self) -> f64 {
        match self {
            Closure::Dirichlet(_) => 0.0,
            Closure::Even => -1.0,
            Closure::Odd => 1.0,
        }
    }
}

/// Solves `a x_{i-1} + b_i x_i + c x_{i+1} = d_i` (Thomas algorithm), in place on `d`.
pub fn thomas_constant(a: f64, b: &[f64], c: f64, d: &mut [f64], scratch: &mut Vec<f64>) {
    let n = d.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = b[0];
    d[0] /= beta;
    for i in 1..n {
        scratch[i] = c / beta;
        beta = b[i] - a * scratch[i];
        d[i] = (d[i] - a * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i + 1] * d[i + 1];
    }
}

/// Solves `(I - r D2) x = d` in place with the given end closures.
pub fn implicit_laplacian(r: f64, left: Closure, right: Closure, d: &mut [f64], scratch: &mut Vec<f64>, diag: &mut Vec<f64>) {
    let n = d.len();
    diag.clear();
    diag.resize(n, 1.0 + 2.0 * r);
    diag[0] += r * left.diag_shift();
    diag[n - 1] += r * right.diag_shift();
    if let Closure::Dirichlet(g) = left {
        d[0] += r * g;
    }
    if let Closure::Dirichlet(g) = right {
        d[n - 1] += r * g;
    }
    thomas_constant(-r, diag, -r, d, scratch);
}

/// Solves `(I - r D2) x = d` in place with periodic wrap (Sherman-Morrison).
pub fn implicit_laplacian_periodic(r: f64, d: &mut [f64], scratch: &mut Vec<f64>, diag: &mut Vec<f64>) {
    let n = d.len();
    let (a, c) = (-r, -r);
    let b0 = 1.0 + 2.0 * r;
    let gamma = -b0;
    diag.clear();
    diag.resize(n, b0);
    diag[0] = b0 - gamma;
    diag[n - 1] = b0 - c * a / gamma;
    let mut diag2 = diag.clone();
    thomas_constant(a, diag, c, d, scratch);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c;
    thomas_constant(a, &diag2, c, &mut u, scratch);
    diag2.clear();
    let fact = (d[0] + a * d[n - 1] / gamma) / (1.0 + u[0] + a * u[n - 1] / gamma);
    for i in 0..n {
        d[i] -= fact * u[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(r: f64, left: Closure, right: Closure, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let xl = if i == 0 { left.ghost(x[0]) } else { x[i - 1] };
                let xr = if i == n - 1 { right.ghost(x[n - 1]) } else { x[i + 1] };
                x[i] - r * (xl - 2.0 * x[i] + xr)
            })
            .collect()
    }

    #[test]
    fn solves_all_closures() {
        let x: Vec<f64> = (0..17).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        for (l, r) in [
            (Closure::Dirichlet(1.5), Closure::Dirichlet(-0.5)),
            (Closure::Even, Closure::Odd),
            (Closure::Odd, Closure::Even),
        ] {
            let mut d = apply(3.0, l, r, &x);
            implicit_laplacian(3.0, l, r, &mut d, &mut vec![], &mut vec![]);
            for i in 0..17 {
                assert!((d[i] - x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solves_periodic() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos() + 0.1 * i as f64).collect();
        let r = 2.5;
        let mut d: Vec<f64> = (0..n)
            .map(|i| x[i] - r * (x[(i + n - 1) % n] - 2.0 * x[i] + x[(i + 1) % n]))
            .collect();
        implicit_laplacian_periodic(r, &mut d, &mut vec![], &mut vec![]);
        for i in 0..n {
            assert!((d[i] - x[i]).abs() < 1e-12);
        }
    }
}
