//! Discrete functionals of trajectories: relative energy and viscous
//! dissipation, the pathwise Itô energy balance, invariant-region excess,
//! compact-set moments, the weak-form entropy residual and Monte Carlo moments.
//!
//! Quantities that need every time step (dissipation, stochastic integrals,
//! entropy residuals) are accumulated by [`StepObserver`]s during the run.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::entropy::{self, EntropyKernel, EntropyPairValue, EntropySpec};
use crate::error::{Error, Result};
use crate::noise::smooth_bump;
use crate::pressure_law::PressureLaw;
use crate::solver::{Grid, GridState, StepObserver, StepView, Trajectory};

/// `∫ (m²/(2ρ) + e*(ρ, ρ∞)) dx`.
pub fn total_relative_energy(grid: &Grid, state: &GridState, law: &PressureLaw, rho_inf: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&r, &m) in state.rho.iter().zip(&state.mom) {
        acc += entropy::relative_energy(law, r, m, rho_inf)?;
    }
    Ok(acc * grid.dx())
}

/// `∫ η*_◊ dx`.
pub fn total_high_order_energy(grid: &Grid, state: &GridState, law: &PressureLaw, rho_inf: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&r, &m) in state.rho.iter().zip(&state.mom) {
        acc += entropy::high_order_energy(law, r, m, rho_inf)?.1;
    }
    Ok(acc * grid.dx())
}

/// `εΔt ∫ ((ρe)'' ρ_x² + ρ u_x²) dx`, discretised on cell faces as
/// `Σ [Δ(∂_ρη) Δρ + Δu Δm]/Δx`, which is nonnegative by convexity of `η_E`.
pub fn dissipation_increment(grid: &Grid, state: &GridState, law: &PressureLaw, epsilon: f64, dt: f64) -> Result<f64> {
    let n = grid.n;
    let mut grad = Vec::with_capacity(n);
    for (&r, &m) in state.rho.iter().zip(&state.mom) {
        if !(r > 0.0) {
            return Err(Error::domain("dissipation needs a positive density"));
        }
        let u = m / r;
        grad.push((law.d_energy_density(r)? - 0.5 * u * u, u));
    }
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let dr = state.rho[i + 1] - state.rho[i];
        let dm = state.mom[i + 1] - state.mom[i];
        acc += (grad[i + 1].0 - grad[i].0) * dr + (grad[i + 1].1 - grad[i].1) * dm;
    }
    Ok(epsilon * dt * acc / grid.dx())
}

/// Running sums for the pathwise energy identity, recorded after every step.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyAccumulator {
    law: PressureLaw,
    pub times: Vec<f64>,
    /// Cumulative dissipation `D(t)`.
    pub dissipation: Vec<f64>,
    /// Cumulative `Σ Σ u_i F_i Δx` (Itô sum).
    pub stochastic: Vec<f64>,
    /// Cumulative `½ Σ Σ (QV_i/ρ_i) Δx Δt`.
    pub ito: Vec<f64>,
}

impl EnergyAccumulator {
    pub fn new(law: &PressureLaw) -> Self {
        EnergyAccumulator {
            law: *law,
            times: vec![0.0],
            dissipation: vec![0.0],
            stochastic: vec![0.0],
            ito: vec![0.0],
        }
    }

    fn at(&self, t: f64) -> Option<(f64, f64, f64)> {
        let i = self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))?;
        Some((self.dissipation[i], self.stochastic[i], self.ito[i]))
    }
}

impl StepObserver for EnergyAccumulator {
    fn observe(&mut self, s: &StepView<'_>) -> Result<()> {
        let dx = s.grid.dx();
        let d = dissipation_increment(s.grid, s.after, &self.law, s.epsilon, s.dt)?;
        let (mut w, mut q) = (0.0, 0.0);
        for i in 0..s.grid.n {
            let r = s.before.rho[i];
            if s.forcing[i] != 0.0 {
                w += s.before.mom[i] / r * s.forcing[i];
            }
            if s.qv[i] != 0.0 {
                q += s.qv[i] / r;
            }
        }
        let last = self.times.len() - 1;
        self.times.push(s.after.t);
        self.dissipation.push(self.dissipation[last] + d);
        self.stochastic.push(self.stochastic[last] + w * dx);
        self.ito.push(self.ito[last] + 0.5 * q * dx * s.dt);
        Ok(())
    }
}

/// Energy identity `E(t) + D(t) - E(0) - M(t) - I(t)` at every save time.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub stochastic: Vec<f64>,
    pub ito: Vec<f64>,
    pub residual: Vec<f64>,
    pub max_abs_residual: f64,
    pub energy_nonincreasing: bool,
}

pub fn energy_balance_check(
    trajectory: &Trajectory,
    law: &PressureLaw,
    rho_inf: f64,
    record: Option<&EnergyAccumulator>,
) -> Result<BalanceReport> {
    let record = record.ok_or_else(|| Error::config("energy balance needs the per-step forcing record"))?;
    let mut rep = BalanceReport {
        times: vec![],
        energy: vec![],
        dissipation: vec![],
        stochastic: vec![],
        ito: vec![],
        residual: vec![],
        max_abs_residual: 0.0,
        energy_nonincreasing: true,
    };
    let e0 = total_relative_energy(&trajectory.grid, &trajectory.saves[0], law, rho_inf)?;
    for s in &trajectory.saves {
        let (d, w, q) = record
            .at(s.t)
            .ok_or_else(|| Error::config(format!("forcing record has no entry at t = {}", s.t)))?;
        let e = total_relative_energy(&trajectory.grid, s, law, rho_inf)?;
        let res = e + d - e0 - w - q;
        if let Some(&prev) = rep.energy.last() {
            if e > prev {
                rep.energy_nonincreasing = false;
            }
        }
        rep.times.push(s.t);
        rep.energy.push(e);
        rep.dissipation.push(d);
        rep.stochastic.push(w);
        rep.ito.push(q);
        rep.residual.push(res);
        rep.max_abs_residual = rep.max_abs_residual.max(res.abs());
    }
    Ok(rep)
}

/// `max(w2 - ℋ, -ℋ - w1, 0)` over all saves and cells.
pub fn invariant_region_check(trajectory: &Trajectory, law: &PressureLaw, h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &trajectory.saves {
        worst = worst.max(invariant_region_excess(s, law, h)?);
    }
    Ok(worst)
}

pub fn invariant_region_excess(state: &GridState, law: &PressureLaw, h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (&r, &m) in state.rho.iter().zip(&state.mom) {
        if !(r > 0.0) {
            return Err(Error::domain("invariant-region check needs a positive density"));
        }
        let (w1, w2) = entropy::riemann_invariants(law, r, m)?;
        worst = worst.max(w2 - h).max(-h - w1);
    }
    Ok(worst)
}

/// Space-time integrals over `[0, T] × K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// `∫∫_K ρ P(ρ)`.
    pub m_p: f64,
    /// `∫∫_K ρ|u|³`.
    pub m_u3: f64,
    /// `∫∫_K ρ^{γ+θ}` for polytropic laws.
    pub m_gamma_theta: Option<f64>,
}

/// Trapezoid rule in time over the saves; cells whose centre lies in `K`.
pub fn compact_moments(trajectory: &Trajectory, law: &PressureLaw, k: (f64, f64)) -> Result<Moments> {
    if !(k.0 < k.1) || k.0 < -trajectory.grid.half_width || k.1 > trajectory.grid.half_width {
        return Err(Error::config(format!("compact set [{}, {}] must lie inside the domain", k.0, k.1)));
    }
    let grid = &trajectory.grid;
    let cells: Vec<usize> = (0..grid.n).filter(|&i| (k.0..=k.1).contains(&grid.x(i))).collect();
    let gt = law.as_polytropic().map(|p| p.gamma + p.theta());
    let integrand = |s: &GridState| -> Result<(f64, f64, f64)> {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for &i in &cells {
            let r = s.rho[i];
            if r <= 0.0 {
                continue;
            }
            let u = s.mom[i] / r;
            a += r * law.pressure(r)?;
            b += r * u.abs().powi(3);
            if let Some(e) = gt {
                c += r.powf(e);
            }
        }
        let dx = grid.dx();
        Ok((a * dx, b * dx, c * dx))
    };
    let (mut mp, mut mu, mut mg) = (0.0, 0.0, 0.0);
    let mut prev: Option<(f64, (f64, f64, f64))> = None;
    for s in &trajectory.saves {
        let cur = integrand(s)?;
        if let Some((t0, p)) = prev {
            let w = 0.5 * (s.t - t0);
            mp += w * (p.0 + cur.0);
            mu += w * (p.1 + cur.1);
            mg += w * (p.2 + cur.2);
        }
        prev = Some((s.t, cur));
    }
    Ok(Moments {
        m_p: mp,
        m_u3: mu,
        m_gamma_theta: gt.map(|_| mg),
    })
}

/// Tensor-product bump `φ(t, x) = b((t - t_c)/t_r) b((x - x_c)/x_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct BumpTestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: f64,
    pub x_radius: f64,
}

/// `(b, b', b'')` of the standard bump.
fn bump_derivs(s: f64) -> (f64, f64, f64) {
    let v = 1.0 - s * s;
    if v <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let b = smooth_bump(s);
    let g = -2.0 * s / (v * v);
    let dg = -2.0 / (v * v) - 8.0 * s * s / (v * v * v);
    (b, b * g, b * (g * g + dg))
}

impl BumpTestFunction {
    /// Built-in bump centred on `(T/2, K)` with time radius `0.45 T`.
    pub fn builtin(t_end: f64, k: (f64, f64)) -> Self {
        BumpTestFunction {
            t_center: 0.5 * t_end,
            t_radius: 0.45 * t_end,
            x_center: 0.5 * (k.0 + k.1),
            x_radius: 0.5 * (k.1 - k.0),
        }
    }

    pub fn validate(&self, t_end: f64, grid: &Grid) -> Result<()> {
        if !(self.t_radius > 0.0 && self.x_radius > 0.0) {
            return Err(Error::config("test-function radii must be positive"));
        }
        if self.t_center - self.t_radius <= 0.0 || self.t_center + self.t_radius >= t_end {
            return Err(Error::config("test-function support must lie strictly inside (0, T)"));
        }
        if self.x_center - self.x_radius <= -grid.half_width || self.x_center + self.x_radius >= grid.half_width {
            return Err(Error::config("test-function support must lie strictly inside the domain"));
        }
        Ok(())
    }

    /// `(φ, φ_t, φ_x, φ_xx)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64, f64) {
        let (a, da, _) = bump_derivs((t - self.t_center) / self.t_radius);
        if a == 0.0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let (b, db, d2b) = bump_derivs((x - self.x_center) / self.x_radius);
        (
            a * b,
            da / self.t_radius * b,
            a * db / self.x_radius,
            a * d2b / (self.x_radius * self.x_radius),
        )
    }
}

/// Evaluates `(η, q, ∂_mη, ∂²_mη)` for a generator, through the kernel for
/// polytropic laws and through the mechanical energy otherwise.
#[derive(Debug, Clone)]
pub enum EntropyEvaluator {
    Generated { kernel: Box<EntropyKernel>, spec: EntropySpec },
    Mechanical { law: PressureLaw },
}

impl EntropyEvaluator {
    pub fn new(law: &PressureLaw, spec: &EntropySpec) -> Result<Self> {
        spec.validate()?;
        match law.as_polytropic() {
            Some(p) => Ok(EntropyEvaluator::Generated {
                kernel: Box::new(EntropyKernel::new(*p)),
                spec: spec.clone(),
            }),
            None if *spec == EntropySpec::Energy => Ok(EntropyEvaluator::Mechanical { law: *law }),
            None => Err(Error::Unsupported(
                "generated entropy pairs other than the energy need a polytropic law".into(),
            )),
        }
    }

    /// Normalised pair (the energy generator gives the mechanical energy).
    pub fn eval(&self, rho: f64, m: f64) -> Result<EntropyPairValue> {
        match self {
            EntropyEvaluator::Generated { kernel, spec } => kernel.pair_normalized(spec, rho, m),
            EntropyEvaluator::Mechanical { law } => entropy::mechanical_energy_pair(law, rho, m),
        }
    }
}

/// Running weak-form entropy residual for one `(ψ, φ)` pair.
#[derive(Debug, Clone)]
pub struct EntropyResidualAccumulator {
    evaluator: EntropyEvaluator,
    phi: BumpTestFunction,
    /// `Σ [η φ_t + q φ_x] Δx Δt`.
    pub transport: f64,
    /// `Σ ∂_mη F φ Δx`.
    pub stochastic: f64,
    /// `½ Σ ∂²_mη QV φ Δx Δt`.
    pub ito: f64,
    /// `ε Σ η φ_xx Δx Δt`.
    pub viscous: f64,
    /// `ε Σ |η φ_xx| Δx Δt`.
    pub viscous_abs: f64,
}

impl EntropyResidualAccumulator {
    pub fn new(law: &PressureLaw, spec: &EntropySpec, phi: BumpTestFunction) -> Result<Self> {
        Ok(EntropyResidualAccumulator {
            evaluator: EntropyEvaluator::new(law, spec)?,
            phi,
            transport: 0.0,
            stochastic: 0.0,
            ito: 0.0,
            viscous: 0.0,
            viscous_abs: 0.0,
        })
    }

    pub fn residual(&self) -> EntropyResidual {
        EntropyResidual {
            s: self.transport + self.stochastic + self.ito,
            transport: self.transport,
            stochastic: self.stochastic,
            ito: self.ito,
            viscous: self.viscous,
            viscous_abs: self.viscous_abs,
        }
    }
}

impl StepObserver for EntropyResidualAccumulator {
    fn observe(&mut self, s: &StepView<'_>) -> Result<()> {
        let t = s.before.t;
        let dx = s.grid.dx();
        for i in 0..s.grid.n {
            let x = s.grid.x(i);
            let (phi, phi_t, phi_x, phi_xx) = self.phi.eval(t, x);
            if phi == 0.0 && phi_t == 0.0 && phi_x == 0.0 {
                continue;
            }
            let v = self.evaluator.eval(s.before.rho[i], s.before.mom[i])?;
            self.transport += (v.eta * phi_t + v.q * phi_x) * dx * s.dt;
            self.stochastic += v.deta_dm * s.forcing[i] * phi * dx;
            self.ito += 0.5 * v.d2eta_dm2 * s.qv[i] * phi * dx * s.dt;
            self.viscous += s.epsilon * v.eta * phi_xx * dx * s.dt;
            self.viscous_abs += s.epsilon * (v.eta * phi_xx).abs() * dx * s.dt;
        }
        Ok(())
    }
}

/// Components of the discrete entropy residual.
///
/// For the viscous system `s = -viscous + (dissipation ≥ 0)` up to
/// discretisation error, so `s ≥ -viscous_abs - C(Δt + Δx²)` for convex `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyResidual {
    pub s: f64,
    pub transport: f64,
    pub stochastic: f64,
    pub ito: f64,
    pub viscous: f64,
    pub viscous_abs: f64,
}

/// Monte Carlo estimate of `E[X^p]` with a bootstrap percentile interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Largest moment exponent accepted by [`ensemble_moments`].
pub const MAX_MOMENT_EXPONENT: f64 = 6.0;

const BOOTSTRAP_RESAMPLES: usize = 1000;

fn pow_moment(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

pub fn ensemble_moments(samples: &[f64], p: f64) -> Result<MomentEstimate> {
    if samples.len() < 2 {
        return Err(Error::config("moment estimation needs at least two samples"));
    }
    if !(1.0..=MAX_MOMENT_EXPONENT).contains(&p) {
        return Err(Error::config(format!("moment exponent must lie in [1, {MAX_MOMENT_EXPONENT}] (got {p})")));
    }
    let vals: Vec<f64> = samples.iter().map(|&x| pow_moment(x, p)).collect();
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b007);
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut s = 0.0;
            for _ in 0..n {
                let j = ((rng.next_u64() as u128 * n as u128) >> 64) as usize;
                s += vals[j];
            }
            s / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = means[(0.025 * BOOTSTRAP_RESAMPLES as f64) as usize];
    let hi = means[(0.975 * BOOTSTRAP_RESAMPLES as f64) as usize - 1];
    Ok(MomentEstimate {
        p,
        mean,
        ci_low: lo.min(mean),
        ci_high: hi.max(mean),
    })
}

/// One row of the per-save time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaveRow {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub invariant_excess: f64,
    pub min_density: f64,
    pub high_order_energy: f64,
}

/// Per-save series of the standard diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<SaveRow>,
    pub moments: Moments,
    pub max_invariant_excess: f64,
}

pub fn diagnostics_report(
    trajectory: &Trajectory,
    law: &PressureLaw,
    rho_inf: f64,
    h: Option<f64>,
    energy: Option<&EnergyAccumulator>,
    k: (f64, f64),
) -> Result<DiagnosticsReport> {
    let mut rows = Vec::with_capacity(trajectory.saves.len());
    let mut max_excess: f64 = 0.0;
    for s in &trajectory.saves {
        let excess = match h {
            Some(h) => invariant_region_excess(s, law, h)?,
            None => 0.0,
        };
        max_excess = max_excess.max(excess);
        let dissipation = energy.and_then(|e| e.at(s.t)).map(|v| v.0).unwrap_or(0.0);
        rows.push(SaveRow {
            t: s.t,
            energy: total_relative_energy(&trajectory.grid, s, law, rho_inf)?,
            dissipation,
            invariant_excess: excess,
            min_density: s.min_density().1,
            high_order_energy: total_high_order_energy(&trajectory.grid, s, law, rho_inf)?,
        });
    }
    Ok(DiagnosticsReport {
        rows,
        moments: compact_moments(trajectory, law, k)?,
        max_invariant_excess: max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::solver::{simulate, Boundary, NoiseKey, SolverConfig};

    fn law() -> PressureLaw {
        PressureLaw::polytropic_scaled(2.0).unwrap()
    }

    #[test]
    fn energy_of_constant_and_kinetic_states() {
        let grid = Grid::new(4.0, 400).unwrap();
        assert_eq!(
            total_relative_energy(&grid, &GridState::constant(&grid, 1.0, 0.0), &law(), 1.0).unwrap(),
            0.0
        );
        // m = bump with unit L² mass on ρ ≡ ρ∞ = 2.
        let raw = GridState::from_fn(&grid, |x| (2.0, (-x * x).exp()));
        let l2: f64 = raw.mom.iter().map(|m| m * m).sum::<f64>() * grid.dx();
        let s = GridState {
            mom: raw.mom.iter().map(|m| m / l2.sqrt()).collect(),
            ..raw
        };
        let e = total_relative_energy(&grid, &s, &law(), 2.0).unwrap();
        assert!((e - 0.25).abs() < 1e-12);
    }

    #[test]
    fn dissipation_of_linear_velocity() {
        let grid = Grid::new(2.0, 64).unwrap();
        let s = GridState::from_fn(&grid, |x| (1.0, 0.3 * x));
        let d = dissipation_increment(&grid, &s, &law(), 0.1, 0.01).unwrap();
        let expect = 0.1 * 0.01 * 0.09 * (4.0 - grid.dx());
        assert!((d - expect).abs() < 1e-15);
        assert_eq!(dissipation_increment(&grid, &GridState::constant(&grid, 1.0, 0.0), &law(), 0.1, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn moments_of_constant_state() {
        let grid = Grid::new(4.0, 64).unwrap();
        let cfg = SolverConfig::new(0.05, 0.5, Boundary::FarField { rho: 2.0, m: 0.0 });
        let init = GridState::constant(&grid, 2.0, 0.0);
        let tr = simulate(&law(), &grid, &cfg, &NoiseModel::none(), &init, NoiseKey { seed: 0, sample: 0 }, &mut [])
            .unwrap();
        let m = compact_moments(&tr, &law(), (-1.0, 1.0)).unwrap();
        assert!((m.m_p - 0.5 * 2.0 * 2.0 * 0.5).abs() < 1e-12);
        assert!(m.m_u3.abs() < 1e-30);
    }

    #[test]
    fn test_function_derivatives() {
        let phi = BumpTestFunction { t_center: 0.5, t_radius: 0.3, x_center: 0.1, x_radius: 0.7 };
        let h = 1e-6;
        for &(t, x) in &[(0.45, 0.0), (0.6, 0.5), (0.3, -0.3)] {
            let (_, pt, px, pxx) = phi.eval(t, x);
            assert!((pt - (phi.eval(t + h, x).0 - phi.eval(t - h, x).0) / (2.0 * h)).abs() < 1e-6);
            assert!((px - (phi.eval(t, x + h).0 - phi.eval(t, x - h).0) / (2.0 * h)).abs() < 1e-6);
            assert!((pxx - (phi.eval(t, x + h).2 - phi.eval(t, x - h).2) / (2.0 * h)).abs() < 1e-5);
        }
        let grid = Grid::new(1.0, 16).unwrap();
        assert!(phi.validate(1.0, &grid).is_ok());
        assert!(phi.validate(0.7, &grid).is_err());
    }

    #[test]
    fn moment_examples() {
        let m = ensemble_moments(&[2.0; 10], 3.0).unwrap();
        assert_eq!((m.mean, m.ci_low, m.ci_high), (8.0, 8.0, 8.0));
        let xs = [1.0, 2.0, 4.0, 7.0];
        assert!((ensemble_moments(&xs, 1.0).unwrap().mean - 3.5).abs() < 1e-15);
        assert!(ensemble_moments(&[1.0], 1.0).is_err());
        assert!(ensemble_moments(&xs, 7.0).is_err());
    }
}
