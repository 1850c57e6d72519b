//! Barotropic pressure laws and the thermodynamic quantities derived from them.
//!
//! Two families are supported: the polytropic law `P = κ ρ^γ` and a composite
//! law that follows `κ1 ρ^γ1` near vacuum and `κ2 ρ^γ2` at large density,
//! joined smoothly in `log P` over `[ρ_lo, ρ_hi]`.
//!
//! Every function is defined at vacuum by its limit; only
//! [`PressureLaw::sound_speed`] and the Riemann invariants require `ρ > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const QUAD_TOL: f64 = 1e-10;

/// `κ = (γ-1)²/(4γ)`, the scaling for which `K(ρ) = ρ^θ`.
pub fn scaled_kappa(gamma: f64) -> f64 {
    (gamma - 1.0).powi(2) / (4.0 * gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polytropic {
    pub gamma: f64,
    pub kappa: f64,
}

impl Polytropic {
    /// Polytropic law with the scaled `κ`.
    pub fn scaled(gamma: f64) -> Result<Self> {
        Self::new(gamma, scaled_kappa(gamma))
    }

    pub fn new(gamma: f64, kappa: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::config(format!(
                "adiabatic exponent must satisfy gamma > 1 (got {gamma})"
            )));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::config(format!("kappa must be positive (got {kappa})")));
        }
        Ok(Polytropic { gamma, kappa })
    }

    pub fn theta(&self) -> f64 {
        0.5 * (self.gamma - 1.0)
    }

    /// Kernel exponent `λ = (3-γ)/(2(γ-1))`.
    pub fn lambda(&self) -> f64 {
        (3.0 - self.gamma) / (2.0 * (self.gamma - 1.0))
    }
}

/// Two power-law regimes joined by a C⁴ blend of `log P` in `log ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeLaw {
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Upper end of the near-vacuum regime.
    pub rho_lo: f64,
    /// Lower end of the large-density regime.
    pub rho_hi: f64,
}

impl CompositeLaw {
    pub fn new(
        gamma1: f64,
        gamma2: f64,
        kappa1: f64,
        kappa2: f64,
        rho_lo: f64,
        rho_hi: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if !(1.0 < gamma2 && gamma2 <= gamma1 && gamma1 < 3.0) {
            problems.push(format!(
                "composite law needs 1 < gamma2 <= gamma1 < 3 (got gamma1 = {gamma1}, gamma2 = {gamma2})"
            ));
        }
        if !(kappa1 > 0.0 && kappa2 > 0.0) {
            problems.push("composite law needs kappa1, kappa2 > 0".to_string());
        }
        if !(rho_lo > 0.0 && rho_lo < rho_hi && rho_hi.is_finite()) {
            problems.push(format!(
                "composite law needs 0 < rho_lo < rho_hi (got rho_lo = {rho_lo}, rho_hi = {rho_hi})"
            ));
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        let law = CompositeLaw {
            gamma1,
            gamma2,
            kappa1,
            kappa2,
            rho_lo,
            rho_hi,
        };
        // Hyperbolicity and genuine nonlinearity must hold across the blend.
        let steps = 400;
        for i in 0..=steps {
            let rho = rho_lo * (rho_hi / rho_lo).powf(i as f64 / steps as f64);
            let (p, dp, d2p) = law.pressure_derivs(rho);
            if !(dp > 0.0) || !(2.0 * dp + rho * d2p > 0.0) || !(p > 0.0) {
                return Err(Error::Config(format!(
                    "composite blend loses strict hyperbolicity or genuine nonlinearity near rho = {rho:.6}; \
                     choose kappa2 closer to kappa1 * rho^(gamma1 - gamma2) on the blend window"
                )));
            }
        }
        Ok(law)
    }

    fn blend(&self, rho: f64) -> (f64, f64, f64) {
        // Returns (S, dS/dl, d²S/dl²) with l = ln ρ.
        let la = self.rho_lo.ln();
        let lb = self.rho_hi.ln();
        let h = 1.0 / (lb - la);
        let t = ((rho.ln() - la) * h).clamp(0.0, 1.0);
        let s = t.powi(5) * (126.0 - 420.0 * t + 540.0 * t * t - 315.0 * t.powi(3) + 70.0 * t.powi(4));
        let ds = 630.0 * t.powi(4) * (1.0 - t).powi(4) * h;
        let d2s = 2520.0 * t.powi(3) * (1.0 - t).powi(3) * (1.0 - 2.0 * t) * h * h;
        (s, ds, d2s)
    }

    /// `(P, P', P'')` for `ρ > 0`.
    fn pressure_derivs(&self, rho: f64) -> (f64, f64, f64) {
        if rho <= self.rho_lo {
            let p = self.kappa1 * rho.powf(self.gamma1);
            return (
                p,
                self.gamma1 * p / rho,
                self.gamma1 * (self.gamma1 - 1.0) * p / (rho * rho),
            );
        }
        if rho >= self.rho_hi {
            let p = self.kappa2 * rho.powf(self.gamma2);
            return (
                p,
                self.gamma2 * p / rho,
                self.gamma2 * (self.gamma2 - 1.0) * p / (rho * rho),
            );
        }
        let l = rho.ln();
        let a = self.kappa1.ln() + self.gamma1 * l;
        let d = self.kappa2.ln() + self.gamma2 * l - a;
        let dg = self.gamma2 - self.gamma1;
        let (s, ds, d2s) = self.blend(rho);
        let f = a + s * d;
        let f1 = self.gamma1 + s * dg + ds * d;
        let f2 = 2.0 * ds * dg + d2s * d;
        let p = f.exp();
        (p, p * f1 / rho, p * (f1 * f1 + f2 - f1) / (rho * rho))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PressureLaw {
    Polytropic(Polytropic),
    Composite(CompositeLaw),
}

fn check_nonneg(rho: f64) -> Result<()> {
    if rho < 0.0 || rho.is_nan() {
        Err(Error::domain(format!("density must be nonnegative (got {rho})")))
    } else {
        Ok(())
    }
}

impl PressureLaw {
    pub fn polytropic_scaled(gamma: f64) -> Result<Self> {
        Polytropic::scaled(gamma).map(PressureLaw::Polytropic)
    }

    pub fn as_polytropic(&self) -> Option<&Polytropic> {
        match self {
            PressureLaw::Polytropic(p) => Some(p),
            PressureLaw::Composite(_) => None,
        }
    }

    /// Exponent governing the large-density regime (γ for polytropic laws, γ2 otherwise).
    pub fn gamma_far(&self) -> f64 {
        match self {
            PressureLaw::Polytropic(p) => p.gamma,
            PressureLaw::Composite(c) => c.gamma2,
        }
    }

    /// Exponent governing the near-vacuum regime.
    pub fn gamma_vacuum(&self) -> f64 {
        match self {
            PressureLaw::Polytropic(p) => p.gamma,
            PressureLaw::Composite(c) => c.gamma1,
        }
    }

    pub fn theta_far(&self) -> f64 {
        0.5 * (self.gamma_far() - 1.0)
    }

    /// Lower end of the intermediate density window (`ρ⋆`); zero for polytropic laws.
    pub fn rho_star(&self) -> f64 {
        match self {
            PressureLaw::Polytropic(_) => 0.0,
            PressureLaw::Composite(c) => c.rho_lo,
        }
    }

    /// Local exponent `γ(ρ) = ρP'/P`.
    pub fn gamma_at(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Polytropic(p) => p.gamma,
            PressureLaw::Composite(c) => {
                if rho <= 0.0 {
                    return c.gamma1;
                }
                let (p, dp, _) = c.pressure_derivs(rho);
                rho * dp / p
            }
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        check_nonneg(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    /// `P(ρ)` without the domain check; callers guarantee `ρ >= 0`.
    #[inline]
    pub fn pressure_unchecked(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match self {
            PressureLaw::Polytropic(p) => p.kappa * rho.powf(p.gamma),
            PressureLaw::Composite(c) => c.pressure_derivs(rho).0,
        }
    }

    /// `P'(ρ)`, with `P'(0) = 0`.
    pub fn dpressure(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match self {
            PressureLaw::Polytropic(p) => p.kappa * p.gamma * rho.powf(p.gamma - 1.0),
            PressureLaw::Composite(c) => c.pressure_derivs(rho).1,
        }
    }

    /// `P''(ρ)` for `ρ > 0`.
    pub fn d2pressure(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Polytropic(p) => {
                p.kappa * p.gamma * (p.gamma - 1.0) * rho.powf(p.gamma - 2.0)
            }
            PressureLaw::Composite(c) => c.pressure_derivs(rho).2,
        }
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::domain(format!(
                "sound speed needs rho > 0 (got {rho})"
            )));
        }
        Ok(self.dpressure(rho).sqrt())
    }

    /// `K(ρ) = ∫_0^ρ sqrt(P'(y))/y dy`.
    pub fn k_integral(&self, rho: f64) -> Result<f64> {
        check_nonneg(rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        match self {
            PressureLaw::Polytropic(p) => {
                let theta = p.theta();
                Ok((p.kappa * p.gamma).sqrt() / theta * rho.powf(theta))
            }
            PressureLaw::Composite(c) => {
                let power = |k: f64, g: f64, r: f64| (k * g).sqrt() / (0.5 * (g - 1.0)) * r.powf(0.5 * (g - 1.0));
                if rho <= c.rho_lo {
                    return Ok(power(c.kappa1, c.gamma1, rho));
                }
                let upper = rho.min(c.rho_hi);
                let mid = quadrature::integrate(
                    |y| c.pressure_derivs(y).1.sqrt() / y,
                    c.rho_lo,
                    upper,
                    QUAD_TOL,
                    1e-13,
                )?;
                let mut total = power(c.kappa1, c.gamma1, c.rho_lo) + mid.value;
                if rho > c.rho_hi {
                    total += power(c.kappa2, c.gamma2, rho) - power(c.kappa2, c.gamma2, c.rho_hi);
                }
                Ok(total)
            }
        }
    }

    /// `K'(ρ) = sqrt(P'(ρ))/ρ` for `ρ > 0`.
    pub fn dk(&self, rho: f64) -> f64 {
        self.dpressure(rho).sqrt() / rho
    }

    /// `K''(ρ)` for `ρ > 0`.
    pub fn d2k(&self, rho: f64) -> f64 {
        let dp = self.dpressure(rho);
        let c = dp.sqrt();
        self.d2pressure(rho) / (2.0 * c * rho) - c / (rho * rho)
    }

    /// Specific internal energy with `ρ² e'(ρ) = P(ρ)` and `e(0) = 0`.
    pub fn internal_energy(&self, rho: f64) -> Result<f64> {
        check_nonneg(rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        match self {
            PressureLaw::Polytropic(p) => Ok(p.kappa * rho.powf(p.gamma - 1.0) / (p.gamma - 1.0)),
            PressureLaw::Composite(c) => {
                let power = |k: f64, g: f64, r: f64| k * r.powf(g - 1.0) / (g - 1.0);
                if rho <= c.rho_lo {
                    return Ok(power(c.kappa1, c.gamma1, rho));
                }
                let upper = rho.min(c.rho_hi);
                let mid = quadrature::integrate(
                    |y| c.pressure_derivs(y).0 / (y * y),
                    c.rho_lo,
                    upper,
                    QUAD_TOL,
                    1e-13,
                )?;
                let mut total = power(c.kappa1, c.gamma1, c.rho_lo) + mid.value;
                if rho > c.rho_hi {
                    total += power(c.kappa2, c.gamma2, rho) - power(c.kappa2, c.gamma2, c.rho_hi);
                }
                Ok(total)
            }
        }
    }

    /// `ρ e(ρ)`.
    pub fn energy_density(&self, rho: f64) -> Result<f64> {
        Ok(rho * self.internal_energy(rho)?)
    }

    /// `(ρe)'(ρ) = e(ρ) + P(ρ)/ρ`.
    pub fn d_energy_density(&self, rho: f64) -> Result<f64> {
        check_nonneg(rho)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        Ok(self.internal_energy(rho)? + self.pressure_unchecked(rho) / rho)
    }

    /// `(ρe)''(ρ) = P'(ρ)/ρ` for `ρ > 0`.
    pub fn d2_energy_density(&self, rho: f64) -> f64 {
        self.dpressure(rho) / rho
    }

    /// Relative internal energy `e*(ρ, ρ∞)`.
    pub fn relative_internal_energy(&self, rho: f64, rho_inf: f64) -> Result<f64> {
        check_nonneg(rho)?;
        if !(rho_inf > 0.0) {
            return Err(Error::domain(format!(
                "far-field density must be positive (got {rho_inf})"
            )));
        }
        if rho == rho_inf {
            return Ok(0.0);
        }
        let e_rho = self.energy_density(rho)?;
        let e_inf = self.energy_density(rho_inf)?;
        let de_inf = self.d_energy_density(rho_inf)?;
        Ok(e_rho - e_inf - de_inf * (rho - rho_inf))
    }

    /// Potential `g` of the higher-order energy: `g'' = 2P'e/ρ`, `g(0) = g'(0) = 0`.
    pub fn high_order_potential(&self, rho: f64) -> Result<f64> {
        Ok(self.high_order_potential_with_slope(rho)?.0)
    }

    /// `(g(ρ), g'(ρ))`.
    pub fn high_order_potential_with_slope(&self, rho: f64) -> Result<(f64, f64)> {
        check_nonneg(rho)?;
        if rho == 0.0 {
            return Ok((0.0, 0.0));
        }
        let closed = |k: f64, g: f64, r: f64| {
            let c = k * k * g / ((g - 1.0) * (g - 1.0));
            (c * r.powf(2.0 * g - 1.0) / (2.0 * g - 1.0), c * r.powf(2.0 * g - 2.0))
        };
        match self {
            PressureLaw::Polytropic(p) => Ok(closed(p.kappa, p.gamma, rho)),
            PressureLaw::Composite(c) => {
                if rho <= c.rho_lo {
                    return Ok(closed(c.kappa1, c.gamma1, rho));
                }
                let a = c.rho_lo;
                let (ga, dga) = closed(c.kappa1, c.gamma1, a);
                let g2 = |y: f64| -> f64 {
                    let e = self.internal_energy(y).unwrap_or(f64::NAN);
                    2.0 * self.dpressure(y) * e / y
                };
                let slope = quadrature::integrate(g2, a, rho, QUAD_TOL, 1e-12)?;
                let curv = quadrature::integrate(|y| (rho - y) * g2(y), a, rho, QUAD_TOL, 1e-12)?;
                Ok((ga + dga * (rho - a) + curv.value, dga + slope.value))
            }
        }
    }
}

/// One named inequality evaluated over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    /// Which side(s) of the inequality the entry certifies.
    pub kind: BoundKind,
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `C⁻¹ ref ≤ value ≤ C ref`.
    TwoSided,
    /// `value ≥ C ref`.
    Lower,
    /// `value ≤ C ref`.
    Upper,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn bound_entry(name: &str, kind: BoundKind, ratios: &[f64]) -> Option<BoundEntry> {
    if ratios.is_empty() {
        return None;
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let finite = ratios.iter().all(|r| r.is_finite());
    let satisfied = finite
        && match kind {
            BoundKind::TwoSided => min > 0.0,
            BoundKind::Lower => min > 0.0,
            BoundKind::Upper => true,
        };
    Some(BoundEntry {
        name: name.to_string(),
        kind,
        samples: ratios.len(),
        min_ratio: min,
        max_ratio: max,
        satisfied,
    })
}

/// Empirical check of the power-law bounds on `P`, `P'`, `e`, `e'`, `K` in the
/// two asymptotic regimes and of the coercivity bounds on `e*(ρ, ρ∞)`.
///
/// Each entry records the extreme ratios `value / reference` over the samples
/// that fall in its density regime; the tightest admissible constants are
/// `min_ratio` for lower bounds and `max_ratio` for upper bounds.
pub fn verify_bounds(law: &PressureLaw, samples: &[f64], rho_inf: f64) -> Result<BoundReport> {
    let mut report = BoundReport::default();
    if samples.is_empty() {
        return Ok(report);
    }
    let (g1, g2, lo, hi) = match law {
        PressureLaw::Polytropic(p) => (p.gamma, p.gamma, f64::INFINITY, 0.0),
        PressureLaw::Composite(c) => (c.gamma1, c.gamma2, c.rho_lo, c.rho_hi),
    };
    let in_vacuum_regime: fn(f64, f64, f64) -> bool = |r, lo, _hi| r <= lo;
    let in_dense_regime: fn(f64, f64, f64) -> bool = |r, _lo, hi| r >= hi;
    let regimes = [(1usize, g1, in_vacuum_regime), (2, g2, in_dense_regime)];
    let e_inf = law.internal_energy(rho_inf)?;
    for (idx, gamma, in_regime) in regimes {
        let theta = 0.5 * (gamma - 1.0);
        let pts: Vec<f64> = samples
            .iter()
            .copied()
            .filter(|&r| r > 0.0 && in_regime(r, lo, hi))
            .collect();
        let mut p_ratio = Vec::new();
        let mut dp_ratio = Vec::new();
        let mut e_ratio = Vec::new();
        let mut de_ratio = Vec::new();
        let mut k_ratio = Vec::new();
        let mut rel_lower = Vec::new();
        let mut dens_upper = Vec::new();
        for &r in &pts {
            let p = law.pressure(r)?;
            let e = law.internal_energy(r)?;
            p_ratio.push(p / r.powf(gamma));
            dp_ratio.push(law.dpressure(r) / (gamma * r.powf(gamma - 1.0)));
            e_ratio.push(e / r.powf(gamma - 1.0));
            de_ratio.push((p / (r * r)) / r.powf(gamma - 2.0));
            k_ratio.push(law.k_integral(r)? / r.powf(theta));
            let es = law.relative_internal_energy(r, rho_inf)?;
            let denom = r * (r.powf(theta) - rho_inf.powf(theta)).powi(2);
            if denom > 0.0 {
                rel_lower.push(es / denom);
            }
            dens_upper.push(r.powf(gamma) / (es + rho_inf.powf(gamma)));
        }
        let named = [
            (format!("iq-lower-upper-bound-for-general-pressure-{idx}"), BoundKind::TwoSided, p_ratio),
            (format!("iq-lower-upper-bound-for-general-pressure-derivative-{idx}"), BoundKind::TwoSided, dp_ratio),
            (format!("iq-lower-upper-bound-for-general-internal-energy-{idx}"), BoundKind::TwoSided, e_ratio),
            (format!("iq-lower-upper-bound-for-general-internal-energy-derivative-{idx}"), BoundKind::TwoSided, de_ratio),
            (format!("iq-lower-upper-bound-for-k(rho)-{idx}"), BoundKind::TwoSided, k_ratio),
            (format!("iq-relative-internal-energy-control-general-pressure-law-{idx}"), BoundKind::Lower, rel_lower),
            (format!("iq-density-control-by-relative-internal-energy-general-pressure-law-{idx}"), BoundKind::Upper, dens_upper),
        ];
        for (name, kind, ratios) in named {
            report.entries.extend(bound_entry(&name, kind, &ratios));
        }
    }
    if let PressureLaw::Composite(c) = law {
        let mut ratios = Vec::new();
        for &r in samples.iter().filter(|&&r| r >= c.rho_lo && r <= c.rho_hi) {
            let es = law.relative_internal_energy(r, rho_inf)?;
            ratios.push(law.energy_density(r)? / (es + rho_inf * e_inf));
        }
        report.entries.extend(bound_entry(
            "iq-density-control-by-relative-internal-energy-general-pressure-law-3",
            BoundKind::Upper,
            &ratios,
        ));
    }
    Ok(report)
}
