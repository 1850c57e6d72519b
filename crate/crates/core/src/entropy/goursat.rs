use serde::Serialize;

use crate::error::{Error, Result};
use crate::pressure_law::PressureLaw;

/// Special entropy `η̆` and flux `q̆` on the characteristic triangle.
///
/// Nodes are indexed by `(i, j)` with `p = i h = u + K(ρ)`, `q = j h = K(ρ) - u`
/// and `i + j ≤ n`, so `K(ρ) ≤ K(ρ_max)`.
#[derive(Debug, Clone, Serialize)]
pub struct GoursatTable {
    pub rho_max: f64,
    pub k_max: f64,
    pub n: usize,
    pub h: f64,
    /// Density on each diagonal `i + j = d`, `d = 0..=n`.
    pub rho_diag: Vec<f64>,
    eta: Vec<f64>,
    flux: Vec<f64>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    // Row i holds j = 0..=n-i.
    i * (n + 1) - i * (i.saturating_sub(1)) / 2 + j
}

/// `ρ` with `K(ρ) = k`.
fn invert_k(law: &PressureLaw, k: f64, rho_max: f64, k_max: f64) -> Result<f64> {
    if k <= 0.0 {
        return Ok(0.0);
    }
    if let Some(p) = law.as_polytropic() {
        return Ok(rho_max * (k / k_max).powf(1.0 / p.theta()));
    }
    let (mut lo, mut hi) = (0.0, rho_max);
    let mut rho = rho_max * (k / k_max).powf(1.0 / law.theta_far().max(law.gamma_vacuum() * 0.5 - 0.5));
    rho = rho.clamp(1e-300, rho_max);
    for _ in 0..200 {
        let f = law.k_integral(rho)? - k;
        if f.abs() <= 1e-14 * k {
            return Ok(rho);
        }
        if f > 0.0 {
            hi = rho;
        } else {
            lo = rho;
        }
        let newton = rho - f / law.dk(rho);
        rho = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi {
            return Ok(rho);
        }
    }
    Err(Error::Numerical {
        what: format!("inverting K at k = {k}"),
        residual: (law.k_integral(rho)? - k).abs(),
    })
}

/// Solves the Goursat problem for the special entropy by a box scheme in the
/// characteristic coordinates `p = u + K`, `q = K - u`, where the entropy
/// equation reads `η_pq + (a/4)(η_p + η_q) = 0` with `a = K''/K'²` as a
/// function of `k = K(ρ)`.
pub fn goursat_solve(law: &PressureLaw, rho_max: f64, resolution: usize) -> Result<GoursatTable> {
    if !(rho_max > 0.0) {
        return Err(Error::domain(format!("rho_max must be positive (got {rho_max})")));
    }
    if resolution < 4 {
        return Err(Error::domain("Goursat resolution must be at least 4"));
    }
    let n = resolution;
    let k_max = law.k_integral(rho_max)?;
    let h = 2.0 * k_max / n as f64;

    // Densities on node diagonals (k = d h/2) and half-diagonals (k = (d + 1/2) h/2).
    let rho_diag = (0..=n)
        .map(|d| invert_k(law, 0.5 * d as f64 * h, rho_max, k_max))
        .collect::<Result<Vec<_>>>()?;
    let rho_half = (0..n)
        .map(|d| invert_k(law, 0.5 * (d as f64 + 0.5) * h, rho_max, k_max))
        .collect::<Result<Vec<_>>>()?;
    let rho_cell = (0..n.saturating_sub(1))
        .map(|d| invert_k(law, 0.5 * (d as f64 + 1.0) * h, rho_max, k_max))
        .collect::<Result<Vec<_>>>()?;

    let boundary = |rho: f64, k: f64| -> Result<(f64, f64)> {
        if rho == 0.0 {
            return Ok((0.0, 0.0));
        }
        let re = law.energy_density(rho)?;
        let eta = 0.5 * rho * k * k + re;
        let q = 0.5 * rho * k.powi(3) + rho * k * law.d_energy_density(rho)?;
        Ok((eta, q))
    };

    let size = tri_index(n, n, 0) + 1;
    let mut eta = vec![0.0; size];
    let mut flux = vec![0.0; size];
    for d in 0..=n {
        let k = 0.5 * d as f64 * h;
        let (e, q) = boundary(rho_diag[d], k)?;
        // q = 0: u = K; p = 0: u = -K.
        eta[tri_index(n, d, 0)] = e;
        flux[tri_index(n, d, 0)] = q;
        eta[tri_index(n, 0, d)] = -e;
        flux[tri_index(n, 0, d)] = -q;
    }

    let coeff: Vec<f64> = rho_cell
        .iter()
        .map(|&rho| {
            let k1 = law.dk(rho);
            0.25 * h * law.d2k(rho) / (k1 * k1)
        })
        .collect();

    for s in 0..n.saturating_sub(1) {
        let c = coeff[s];
        for i in 0..=s {
            let j = s - i;
            let sw = eta[tri_index(n, i, j)];
            let se = eta[tri_index(n, i + 1, j)];
            let nw = eta[tri_index(n, i, j + 1)];
            let ne = if 1.0 + c >= 0.5 {
                (se + nw - sw * (1.0 - c)) / (1.0 + c)
            } else {
                // One-sided first derivatives where the centred factor degenerates.
                se + nw - sw - c * (se + nw - 2.0 * sw)
            };
            if !ne.is_finite() {
                return Err(Error::Numerical {
                    what: format!("Goursat march at cell ({i}, {j})"),
                    residual: f64::INFINITY,
                });
            }
            eta[tri_index(n, i + 1, j + 1)] = ne;
        }
    }

    // Flux from q̆_q = (u - c) η̆_q, integrated from the boundary q = 0.
    for i in 0..n {
        for j in 1..=(n - i) {
            let d = i + j - 1;
            let rho = rho_half[d];
            let u = 0.5 * (i as f64 - j as f64 + 0.5) * h;
            let c = if rho > 0.0 { law.sound_speed(rho)? } else { 0.0 };
            let de = eta[tri_index(n, i, j)] - eta[tri_index(n, i, j - 1)];
            flux[tri_index(n, i, j)] = flux[tri_index(n, i, j - 1)] + (u - c) * de;
        }
    }

    Ok(GoursatTable {
        rho_max,
        k_max,
        n,
        h,
        rho_diag,
        eta,
        flux,
    })
}

impl GoursatTable {
    /// `(ρ, u, η̆, q̆)` at node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        assert!(i + j <= self.n, "node outside the characteristic triangle");
        let idx = tri_index(self.n, i, j);
        (
            self.rho_diag[i + j],
            0.5 * (i as f64 - j as f64) * self.h,
            self.eta[idx],
            self.flux[idx],
        )
    }

    /// All nodes in row-major `(i, j)` order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, (f64, f64, f64, f64))> + '_ {
        (0..=self.n).flat_map(move |i| (0..=self.n - i).map(move |j| (i, j, self.node(i, j))))
    }

    /// Piecewise-linear interpolation at `(k, u)` with `|u| ≤ k ≤ K(ρ_max)`.
    pub fn eval_k(&self, k: f64, u: f64) -> Result<(f64, f64)> {
        if u.abs() > k * (1.0 + 1e-12) || k > self.k_max * (1.0 + 1e-12) {
            return Err(Error::domain(format!("(k = {k}, u = {u}) outside the Goursat domain")));
        }
        let p = ((u + k) / self.h).max(0.0);
        let q = ((k - u) / self.h).max(0.0);
        let n = self.n;
        let mut i0 = (p.floor() as usize).min(n);
        let mut j0 = (q.floor() as usize).min(n - i0);
        if i0 + j0 == n {
            // On the far diagonal: step back into a full lower triangle.
            if i0 > 0 {
                i0 -= 1;
            } else {
                j0 -= 1;
            }
        }
        let fp = p - i0 as f64;
        let fq = q - j0 as f64;
        let at = |i: usize, j: usize| {
            let idx = tri_index(n, i, j);
            (self.eta[idx], self.flux[idx])
        };
        let (a, b, c, wa, wb, wc) = if fp + fq <= 1.0 || i0 + j0 + 2 > n {
            (at(i0, j0), at(i0 + 1, j0), at(i0, j0 + 1), 1.0 - fp - fq, fp, fq)
        } else {
            (at(i0 + 1, j0 + 1), at(i0, j0 + 1), at(i0 + 1, j0), fp + fq - 1.0, 1.0 - fp, 1.0 - fq)
        };
        Ok((
            wa * a.0 + wb * b.0 + wc * c.0,
            wa * a.1 + wb * b.1 + wc * c.1,
        ))
    }

    /// Interpolated `(η̆, q̆)` at `(ρ, u)`.
    pub fn eval(&self, law: &PressureLaw, rho: f64, u: f64) -> Result<(f64, f64)> {
        self.eval_k(law.k_integral(rho)?, u)
    }
}
