//! Quadrature rules: adaptive Gauss-Kronrod for smooth integrands on finite
//! intervals, and Gauss-Jacobi rules for integrands carrying an algebraic
//! endpoint weight `(1 - x)^alpha (1 + x)^beta`.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss 7-point weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive 7/15-point Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi);
    let mut intervals = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numerical {
                what: format!("adaptive quadrature on [{lo}, {hi}] did not converge"),
                residual: err,
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (l, h, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            return Err(Error::Numerical {
                what: format!("adaptive quadrature cannot bisect [{l}, {h}] further"),
                residual: err,
            });
        }
        let (v1, e1) = gk15(&f, l, mid);
        let (v2, e2) = gk15(&f, mid, h);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((l, mid, v1, e1));
        intervals.push((mid, h, v2, e2));
    }
    if !total.is_finite() {
        return Err(Error::Numerical {
            what: "non-finite integrand".into(),
            residual: f64::INFINITY,
        });
    }
    // Recompute sums to shed accumulated cancellation from the running totals.
    let value: f64 = intervals.iter().map(|iv| iv.2).sum();
    let error: f64 = intervals.iter().map(|iv| iv.3).sum();
    Ok(Integral {
        value: sign * value,
        error,
    })
}

/// An `n`-point Gauss rule on `[-1, 1]` for the weight `(1-x)^alpha (1+x)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        Self::jacobi(n, 0.0, 0.0)
    }

    /// Gauss-Jacobi nodes and weights by Newton iteration on the three-term
    /// recurrence, with the standard asymptotic initial guesses for each root.
    ///
    /// Requires `alpha, beta > -1` and `n >= 1`.
    #[allow(clippy::approx_constant)]
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        assert!(alpha > -1.0 && beta > -1.0, "Jacobi exponents must exceed -1");
        let nf = n as f64;
        let ab = alpha + beta;
        let mut x = vec![0.0; n + 1]; // 1-based scratch
        let mut w = vec![0.0; n + 1];
        let mut z = 0.0_f64;
        for i in 1..=n {
            if n == 1 {
                z = (beta - alpha) / (ab + 2.0);
            } else if i == 1 {
                let an = alpha / nf;
                let bn = beta / nf;
                let r1 = (1.0 + alpha) * (2.78 / (4.0 + nf * nf) + 0.768 * an / nf);
                let r2 = 1.0 + 1.48 * an + 0.96 * bn + 0.452 * an * an + 0.83 * an * bn;
                z = 1.0 - r1 / r2;
            } else if i == 2 {
                let r1 = (4.1 + alpha) / ((1.0 + alpha) * (1.0 + 0.156 * alpha));
                let r2 = 1.0 + 0.06 * (nf - 8.0) * (1.0 + 0.12 * alpha) / nf;
                let r3 = 1.0 + 0.012 * beta * (1.0 + 0.25 * alpha.abs()) / nf;
                z -= (1.0 - z) * r1 * r2 * r3;
            } else if i == 3 {
                let r1 = (1.67 + 0.28 * alpha) / (1.0 + 0.37 * alpha);
                let r2 = 1.0 + 0.22 * (nf - 8.0) / nf;
                let r3 = 1.0 + 8.0 * beta / ((6.28 + beta) * nf * nf);
                z -= (x[1] - z) * r1 * r2 * r3;
            } else if i == n - 1 {
                let r1 = (1.0 + 0.235 * beta) / (0.766 + 0.119 * beta);
                let r2 = 1.0 / (1.0 + 0.639 * (nf - 4.0) / (1.0 + 0.71 * (nf - 4.0)));
                let r3 = 1.0 / (1.0 + 20.0 * alpha / ((7.5 + alpha) * nf * nf));
                z += (z - x[n - 3]) * r1 * r2 * r3;
            } else if i == n {
                let r1 = (1.0 + 0.37 * beta) / (1.67 + 0.28 * beta);
                let r2 = 1.0 / (1.0 + 0.22 * (nf - 8.0) / nf);
                let r3 = 1.0 / (1.0 + 8.0 * alpha / ((6.28 + alpha) * nf * nf));
                z += (z - x[n - 2]) * r1 * r2 * r3;
            } else {
                z = 3.0 * x[i - 1] - 3.0 * x[i - 2] + x[i - 3];
            }
            let mut p1;
            let mut p2;
            let mut pp;
            let mut temp;
            let mut iter = 0;
            loop {
                temp = 2.0 + ab;
                p1 = (alpha - beta + temp * z) / 2.0;
                p2 = 1.0;
                for j in 2..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    temp = 2.0 * jf + ab;
                    let a = 2.0 * jf * (jf + ab) * (temp - 2.0);
                    let b = (temp - 1.0)
                        * (alpha * alpha - beta * beta + temp * (temp - 2.0) * z);
                    let c = 2.0 * (jf - 1.0 + alpha) * (jf - 1.0 + beta) * temp;
                    p1 = (b * p2 - c * p3) / a;
                }
                pp = (nf * (alpha - beta - temp * z) * p1
                    + 2.0 * (nf + alpha) * (nf + beta) * p2)
                    / (temp * (1.0 - z * z));
                let z1 = z;
                z = z1 - p1 / pp;
                iter += 1;
                if (z - z1).abs() <= 1e-15 * (1.0 + z.abs()) || iter > 100 {
                    break;
                }
            }
            x[i] = z;
            let lg = libm::lgamma(alpha + nf) + libm::lgamma(beta + nf)
                - libm::lgamma(nf + 1.0)
                - libm::lgamma(nf + ab + 1.0);
            w[i] = lg.exp() * temp * 2f64.powf(ab) / (pp * p2);
        }
        // The recurrence yields roots in decreasing order; store ascending.
        let mut nodes: Vec<f64> = x[1..].to_vec();
        let mut weights: Vec<f64> = w[1..].to_vec();
        nodes.reverse();
        weights.reverse();
        GaussRule {
            alpha,
            beta,
            nodes,
            weights,
        }
    }

    /// Total mass of the weight, `2^(a+b+1) B(a+1, b+1)`.
    pub fn weight_mass(&self) -> f64 {
        jacobi_mass(self.alpha, self.beta)
    }

    /// Applies the rule on `[-1, 1]`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Approximates `∫_a^b (b - z)^alpha (z - a)^beta f(z) dz`.
    pub fn apply_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let scale = half.powf(self.alpha + self.beta + 1.0);
        scale * self.apply(|t| f(mid + half * t))
    }
}

/// `∫_{-1}^{1} (1-x)^a (1+x)^b dx`.
pub fn jacobi_mass(a: f64, b: f64) -> f64 {
    let lg = libm::lgamma(a + 1.0) + libm::lgamma(b + 1.0) - libm::lgamma(a + b + 2.0);
    2f64.powf(a + b + 1.0) * lg.exp()
}
