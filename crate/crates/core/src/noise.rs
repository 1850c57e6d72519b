//! Finite-mode multiplicative forcing `Φ^ε(ρ, m) dW` acting on the momentum.
//!
//! Mode `k` has coefficient `a_k ζ_k(x, ρ, m)` with `ζ_k = ρ α(x) s_k(x)`, where
//! `α` is a compactly supported spatial profile and `s_1 = 1`,
//! `s_k(x) = cos((k - 1) π (x - c)/r)` for `k ≥ 2`. After
//! [`truncate_mollify`] the coefficients are multiplied by a smooth indicator
//! of the invariant region `Γ_ℋ = {-ℋ ≤ w1 ≤ w2 ≤ ℋ}` (and of `|x| < 1/ε` in the
//! whole-line case) and only the first `⌊1/ε⌋` modes are kept.
//!
//! Brownian motions are generated on a dyadic grid of `2^L` base ticks over
//! `[0, T]`. The base normal with index `j` of mode `k` is a pure function of
//! `(seed, sample, k, j)`, so paths are shared across step sizes (an increment
//! over a coarse step is the sum of its base increments) and across viscosities.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure_law::PressureLaw;

/// Spatial profile `α(x)` of the forcing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialProfile {
    /// `height · exp(1 - 1/(1 - ((x - center)/radius)²))` inside the support, zero outside.
    Bump { center: f64, radius: f64, height: f64 },
    /// Not compactly supported; rejected by the constructors.
    Gaussian { center: f64, width: f64, height: f64 },
}

impl SpatialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SpatialProfile::Bump { center, radius, height } => height * smooth_bump((x - center) / radius),
            SpatialProfile::Gaussian { center, width, height } => {
                let t = (x - center) / width;
                height * (-0.5 * t * t).exp()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match *self {
            SpatialProfile::Bump { height, .. } | SpatialProfile::Gaussian { height, .. } => height.abs(),
        }
    }

    fn center_radius(&self) -> (f64, f64) {
        match *self {
            SpatialProfile::Bump { center, radius, .. } => (center, radius),
            SpatialProfile::Gaussian { center, width, .. } => (center, width),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SpatialProfile::Bump { radius, height, .. } => {
                if !(radius > 0.0) || !height.is_finite() {
                    return Err(Error::config(format!(
                        "bump profile needs radius > 0 and finite height (got radius {radius}, height {height})"
                    )));
                }
                Ok(())
            }
            SpatialProfile::Gaussian { .. } => Err(Error::config(
                "the noise profile must have compact support; use a bump profile",
            )),
        }
    }
}

/// `exp(1 - 1/(1 - t²))` on `|t| < 1`, zero otherwise; equals 1 at `t = 0`.
pub fn smooth_bump(t: f64) -> f64 {
    let v = 1.0 - t * t;
    if v <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / v).exp()
    }
}

/// C^∞ step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |s: f64| (-1.0 / s).exp();
    let a = f(t);
    a / (a + f(1.0 - t))
}

/// Spatial support of the forcing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportKind {
    /// Forcing confined to a compact interval `𝕂 = [lo, hi]` through the profile.
    CompactX { lo: f64, hi: f64 },
    /// Additional cut-off to `Λ^ε = {|x| < 1/ε}`.
    WholeLineCutoff,
}

/// Parameters fixed by [`truncate_mollify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncation {
    pub epsilon: f64,
    pub c1: f64,
    pub alpha1: f64,
    pub invariant_region_h: f64,
    pub law: PressureLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseModel {
    /// `a_k`, `k = 1, 2, ...`.
    pub amplitudes: Vec<f64>,
    pub profile: SpatialProfile,
    pub support_kind: SupportKind,
    /// Number of active modes.
    pub mode_cap: usize,
    pub truncation: Option<Truncation>,
}

impl NoiseModel {
    /// General finite-mode model; `|a_k|` must be nonincreasing.
    pub fn new(amplitudes: Vec<f64>, profile: SpatialProfile) -> Result<Self> {
        profile.validate()?;
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("noise amplitudes must be finite"));
        }
        if amplitudes.windows(2).any(|w| w[1].abs() > w[0].abs()) {
            return Err(Error::config("noise amplitudes |a_k| must be nonincreasing in k"));
        }
        let (c, r) = profile.center_radius();
        Ok(NoiseModel {
            mode_cap: amplitudes.len(),
            amplitudes,
            profile,
            support_kind: SupportKind::CompactX { lo: c - r, hi: c + r },
            truncation: None,
        })
    }

    /// Model with `a_k = a1 k^{-p}`, `k = 1..=count`.
    pub fn decaying(a1: f64, p: f64, count: usize, profile: SpatialProfile) -> Result<Self> {
        if !(p >= 0.0) {
            return Err(Error::config(format!("decay exponent must be nonnegative (got {p})")));
        }
        Self::new((1..=count).map(|k| a1 * (k as f64).powf(-p)).collect(), profile)
    }

    /// Zero forcing.
    pub fn none() -> Self {
        NoiseModel {
            amplitudes: vec![],
            profile: SpatialProfile::Bump { center: 0.0, radius: 1.0, height: 0.0 },
            support_kind: SupportKind::CompactX { lo: -1.0, hi: 1.0 },
            mode_cap: 0,
            truncation: None,
        }
    }

    pub fn active_modes(&self) -> usize {
        self.mode_cap.min(self.amplitudes.len())
    }

    pub fn is_silent(&self) -> bool {
        self.amplitudes[..self.active_modes()].iter().all(|a| *a == 0.0)
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.truncation.as_ref().map(|t| t.epsilon)
    }

    pub fn invariant_region_h(&self) -> Option<f64> {
        self.truncation.as_ref().map(|t| t.invariant_region_h)
    }

    /// `a_k α(x) s_k(x)` for the active modes, without the state factor.
    pub fn spatial_coefficients(&self, x: f64) -> Vec<f64> {
        let (c, r) = self.profile.center_radius();
        let base = self.profile.eval(x) * self.whole_line_factor(x);
        self.amplitudes[..self.active_modes()]
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let shape = if k == 0 { 1.0 } else { (k as f64 * std::f64::consts::PI * (x - c) / r).cos() };
                a * base * shape
            })
            .collect()
    }

    fn whole_line_factor(&self, x: f64) -> f64 {
        match (&self.support_kind, &self.truncation) {
            (SupportKind::WholeLineCutoff, Some(t)) => smooth_step((1.0 / t.epsilon - x.abs()) / t.epsilon),
            _ => 1.0,
        }
    }

    /// State factor `ρ · 𝔍(ρ, m)` with `𝔍` the smooth indicator of `Γ_ℋ`.
    pub fn state_factor(&self, rho: f64, m: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match &self.truncation {
            None => rho,
            Some(t) => {
                let k = match t.law.k_integral(rho) {
                    Ok(k) => k,
                    Err(_) => return 0.0,
                };
                let u = m / rho;
                let h = t.invariant_region_h;
                rho * smooth_step((h - (u + k)) / t.epsilon) * smooth_step((u - k + h) / t.epsilon)
            }
        }
    }

    /// `a_k ζ_k^ε(x, ρ, m)` for the active modes.
    pub fn coefficients(&self, x: f64, rho: f64, m: f64) -> Vec<f64> {
        let s = self.state_factor(rho, m);
        self.spatial_coefficients(x).into_iter().map(|v| v * s).collect()
    }

    /// `𝔊 = (Σ_k |a_k ζ_k|²)^{1/2}`.
    pub fn growth(&self, x: f64, rho: f64, m: f64) -> f64 {
        self.coefficients(x, rho, m).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Precomputed spatial coefficients on a set of grid points.
    pub fn table(&self, xs: &[f64]) -> ForcingTable {
        let modes = self.active_modes();
        let mut coeff = vec![0.0; modes * xs.len()];
        let mut support = vec![false; xs.len()];
        for (i, &x) in xs.iter().enumerate() {
            for (k, v) in self.spatial_coefficients(x).into_iter().enumerate() {
                coeff[k * xs.len() + i] = v;
                support[i] |= v != 0.0;
            }
        }
        ForcingTable { n: xs.len(), modes, coeff, support }
    }
}

/// Spatial part of the forcing evaluated on a grid, mode-major.
#[derive(Debug, Clone)]
pub struct ForcingTable {
    n: usize,
    modes: usize,
    coeff: Vec<f64>,
    support: Vec<bool>,
}

impl ForcingTable {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Writes `F_i = Σ_k a_k ζ_k(x_i) ΔW_k` and `QV_i = Σ_k (a_k ζ_k(x_i))²`.
    pub fn apply(
        &self,
        model: &NoiseModel,
        rho: &[f64],
        mom: &[f64],
        dw: &[f64],
        forcing: &mut [f64],
        qv: &mut [f64],
    ) {
        forcing.iter_mut().for_each(|f| *f = 0.0);
        qv.iter_mut().for_each(|f| *f = 0.0);
        for i in 0..self.n {
            if !self.support[i] {
                continue;
            }
            let s = model.state_factor(rho[i], mom[i]);
            if s == 0.0 {
                continue;
            }
            let (mut f, mut q) = (0.0, 0.0);
            for k in 0..self.modes {
                let z = self.coeff[k * self.n + i] * s;
                f += z * dw[k];
                q += z * z;
            }
            forcing[i] = f;
            qv[i] = q;
        }
    }
}

/// Single-mode model `Φ e_1 = a1 α(x) ρ`.
pub fn make_single_mode(a1: f64, profile: SpatialProfile) -> Result<NoiseModel> {
    NoiseModel::new(vec![a1], profile)
}

/// Truncates to `⌊1/ε⌋` modes and confines the coefficients to `Γ_ℋ` with
/// `ℋ = c1 ε^{-α1}`.
pub fn truncate_mollify(
    model: &NoiseModel,
    law: &PressureLaw,
    epsilon: f64,
    c1: f64,
    alpha1: f64,
    rho_inf: f64,
) -> Result<NoiseModel> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::config(format!("epsilon must lie in (0, 1] (got {epsilon})")));
    }
    if !(c1 > 0.0) {
        return Err(Error::config(format!("c1 must be positive (got {c1})")));
    }
    let gamma1 = law.gamma_vacuum();
    let theta2 = law.theta_far();
    let alpha_max = if gamma1 <= 2.0 { theta2 } else { theta2.min(0.5) };
    if !(alpha1 > 0.0 && alpha1 < alpha_max) {
        return Err(Error::config(format!(
            "alpha1 = {alpha1} outside the admissible range (0, {alpha_max})"
        )));
    }
    let h = c1 * epsilon.powf(-alpha1);
    let need = 1.0 + (rho_inf + 1.0).powf(theta2);
    if h < need {
        return Err(Error::config(format!(
            "invariant-region bound violated: H = c1 eps^(-alpha1) = {h:.6} < 1 + (rho_inf + 1)^theta2 = {need:.6}; use a smaller epsilon or a larger c1"
        )));
    }
    if h < law.rho_star() {
        return Err(Error::config(format!(
            "invariant-region bound violated: H = {h:.6} < rho_star = {}; use a smaller epsilon",
            law.rho_star()
        )));
    }
    let mut out = model.clone();
    out.mode_cap = ((1.0 / epsilon).floor() as usize).min(model.amplitudes.len());
    out.truncation = Some(Truncation {
        epsilon,
        c1,
        alpha1,
        invariant_region_h: h,
        law: *law,
    });
    Ok(out)
}

/// Result of [`growth_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    /// Largest observed `𝔊/(ρ(1 + ε² + u² + e(ρ))^{1/2})`.
    pub empirical_b0: f64,
    pub bound_b0: f64,
    pub passed: bool,
}

/// Evaluates the growth ratio over `(x, ρ, m)` triples.
pub fn growth_check(model: &NoiseModel, law: &PressureLaw, states: &[(f64, f64, f64)], b0: f64) -> Result<GrowthReport> {
    let eps = model.epsilon().unwrap_or(0.0);
    let mut worst: f64 = 0.0;
    for &(x, rho, m) in states {
        if rho <= 0.0 {
            continue;
        }
        let u = m / rho;
        let denom = rho * (1.0 + eps * eps + u * u + law.internal_energy(rho)?).sqrt();
        worst = worst.max(model.growth(x, rho, m) / denom);
    }
    Ok(GrowthReport {
        samples: states.len(),
        empirical_b0: worst,
        bound_b0: b0,
        passed: worst <= b0 * (1.0 + 1e-12),
    })
}

/// Default base resolution: `2^16` ticks over the time horizon.
pub const DEFAULT_BASE_LEVEL: u32 = 16;

fn chacha_for(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample.to_le_bytes());
    key[16..24].copy_from_slice(b"svv-bm-1");
    ChaCha8Rng::from_seed(key)
}

fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    let a = rng.next_u64();
    let b = rng.next_u64();
    let u1 = 1.0 - (a >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard normal with index `j` of mode `mode` for `(seed, sample)`.
pub fn base_normal(seed: u64, sample: u64, mode: u64, j: u64) -> f64 {
    let mut rng = chacha_for(seed, sample);
    rng.set_stream(mode);
    rng.set_word_pos(4 * j as u128);
    box_muller(&mut rng)
}

/// Sequential reader of the Brownian paths of one sample.
#[derive(Debug, Clone)]
pub struct BrownianPaths {
    streams: Vec<ChaCha8Rng>,
    tick: u64,
    ticks_total: u64,
    tick_dt: f64,
}

impl BrownianPaths {
    /// Paths for `modes` modes over `[0, horizon]` on `2^base_level` ticks.
    pub fn new(seed: u64, sample: u64, modes: usize, horizon: f64, base_level: u32) -> Self {
        let streams = (0..modes as u64)
            .map(|k| {
                let mut rng = chacha_for(seed, sample);
                rng.set_stream(k);
                rng
            })
            .collect();
        let ticks_total = 1u64 << base_level;
        BrownianPaths {
            streams,
            tick: 0,
            ticks_total,
            tick_dt: horizon / ticks_total as f64,
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn tick_dt(&self) -> f64 {
        self.tick_dt
    }

    pub fn ticks_total(&self) -> u64 {
        self.ticks_total
    }

    /// Increments `ΔW_k` over the next `ticks` base ticks.
    pub fn sample_increments(&mut self, ticks: u64, out: &mut [f64]) -> Result<()> {
        if ticks == 0 || self.tick + ticks > self.ticks_total {
            return Err(Error::domain(format!(
                "Brownian increment over ticks [{}, {}) outside [0, {}]",
                self.tick,
                self.tick + ticks,
                self.ticks_total
            )));
        }
        let scale = self.tick_dt.sqrt();
        for (k, rng) in self.streams.iter_mut().enumerate() {
            let mut s = 0.0;
            for _ in 0..ticks {
                s += box_muller(rng);
            }
            if k < out.len() {
                out[k] = scale * s;
            }
        }
        self.tick += ticks;
        Ok(())
    }
}
