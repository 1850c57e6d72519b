//! IMEX Euler-Maruyama integration of the viscous stochastic system
//!
//! ```text
//! dρ + ∂_x m dt = ε ∂_x² ρ dt
//! dm + ∂_x(m²/ρ + P(ρ)) dt = ε ∂_x² m dt + Φ^ε(ρ, m) dW
//! ```
//!
//! on a cell-centred grid over `[-L, L]`. Fluxes are centrally differenced,
//! diffusion is implicit (or explicit for [`Scheme::FullyExplicit`]), and the
//! forcing is evaluated at the start of each step. Step sizes are dyadic
//! fractions `T/2^ℓ` of the horizon so that they align with the Brownian base
//! grid and with the save times.

mod heat;
mod tridiag;

pub use heat::{heat_kernel, heat_semigroup_apply};
pub use tridiag::{implicit_laplacian, implicit_laplacian_periodic, thomas_constant, Closure};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{BrownianPaths, ForcingTable, NoiseModel, DEFAULT_BASE_LEVEL};
use crate::pressure_law::PressureLaw;

/// Uniform cell-centred grid on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::config(format!("grid needs at least 16 cells (got {n})")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::config(format!("grid half-width must be positive (got {half_width})")));
        }
        Ok(Grid { half_width, n })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Density and momentum at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
}

impl GridState {
    pub fn constant(grid: &Grid, rho: f64, m: f64) -> Self {
        GridState {
            t: 0.0,
            rho: vec![rho; grid.n],
            mom: vec![m; grid.n],
        }
    }

    pub fn from_fn<F: Fn(f64) -> (f64, f64)>(grid: &Grid, f: F) -> Self {
        let (rho, mom) = grid.centers().into_iter().map(f).unzip();
        GridState { t: 0.0, rho, mom }
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.mom)
            .map(|(r, m)| if *r > 0.0 { m / r } else { 0.0 })
            .collect()
    }

    pub fn min_density(&self) -> (usize, f64) {
        self.rho
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Ghost cells clamped to the far-field state.
    FarField { rho: f64, m: f64 },
    /// Mirror ghost cells: even density, odd momentum.
    Reflecting,
    /// Periodic wrap.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Imex,
    FullyExplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_cfl")]
    pub cfl_diffusion: f64,
    pub boundary: Boundary,
    #[serde(default = "default_floor")]
    pub density_floor: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Saves at `t = j T/2^save_level`.
    #[serde(default = "default_save_level")]
    pub save_level: u32,
    /// Brownian base grid `T/2^base_level`.
    #[serde(default = "default_base_level")]
    pub base_level: u32,
    /// Fixed step `T/2^dt_level`; adaptive when absent.
    #[serde(default)]
    pub dt_level: Option<u32>,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_floor() -> f64 {
    1e-12
}
fn default_scheme() -> Scheme {
    Scheme::Imex
}
fn default_save_level() -> u32 {
    4
}
fn default_base_level() -> u32 {
    DEFAULT_BASE_LEVEL
}

impl SolverConfig {
    pub fn new(epsilon: f64, t_end: f64, boundary: Boundary) -> Self {
        SolverConfig {
            epsilon,
            t_end,
            cfl: default_cfl(),
            cfl_diffusion: default_cfl(),
            boundary,
            density_floor: default_floor(),
            scheme: default_scheme(),
            save_level: default_save_level(),
            base_level: default_base_level(),
            dt_level: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::config(format!("epsilon must lie in (0, 1] (got {})", self.epsilon)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config(format!("end time must be positive (got {})", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) || !(self.cfl_diffusion > 0.0 && self.cfl_diffusion <= 1.0) {
            return Err(Error::config("CFL numbers must lie in (0, 1]"));
        }
        if !(self.density_floor > 0.0) {
            return Err(Error::config("density floor must be positive"));
        }
        if self.base_level > 40 || self.save_level > self.base_level {
            return Err(Error::config(format!(
                "need save_level <= base_level <= 40 (got {} and {})",
                self.save_level, self.base_level
            )));
        }
        if let Some(l) = self.dt_level {
            if l < self.save_level || l > self.base_level {
                return Err(Error::config(format!(
                    "dt_level must lie in [save_level, base_level] = [{}, {}] (got {l})",
                    self.save_level, self.base_level
                )));
            }
        }
        if let Boundary::FarField { rho, m } = self.boundary {
            if !(rho > 0.0) || !m.is_finite() {
                return Err(Error::config(format!("far-field state must have rho > 0 (got {rho}, {m})")));
            }
        }
        Ok(())
    }
}

/// Admissible step from the current state.
pub fn stable_dt(law: &PressureLaw, grid: &Grid, cfg: &SolverConfig, state: &GridState) -> f64 {
    let lam = state
        .rho
        .iter()
        .zip(&state.mom)
        .map(|(&r, &m)| if r > 0.0 { (m / r).abs() + law.dpressure(r).max(0.0).sqrt() } else { 0.0 })
        .fold(0.0, f64::max);
    let dx = grid.dx();
    let mut limit = f64::INFINITY;
    if lam > 0.0 {
        limit = limit.min(cfg.cfl * dx / lam);
        limit = limit.min(cfg.cfl * 2.0 * cfg.epsilon / (lam * lam));
    }
    if cfg.scheme == Scheme::FullyExplicit {
        limit = limit.min(cfg.cfl_diffusion * dx * dx / (2.0 * cfg.epsilon));
    }
    limit
}

/// Everything one step exposes to observers.
pub struct StepView<'a> {
    pub grid: &'a Grid,
    pub epsilon: f64,
    pub before: &'a GridState,
    pub after: &'a GridState,
    pub dt: f64,
    /// Momentum increment `Σ_k a_k ζ_k ΔW_k` per cell.
    pub forcing: &'a [f64],
    /// `Σ_k (a_k ζ_k)²` per cell, at the start of the step.
    pub qv: &'a [f64],
}

/// Per-step callback used by streaming diagnostics.
pub trait StepObserver {
    fn observe(&mut self, step: &StepView<'_>) -> Result<()>;
}

/// One recorded step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub before: GridState,
    pub dt: f64,
    pub forcing: Vec<f64>,
    pub qv: Vec<f64>,
}

/// Observer that stores every step.
#[derive(Debug, Clone, Default)]
pub struct StepRecorder {
    pub steps: Vec<StepRecord>,
    pub last: Option<GridState>,
}

impl StepObserver for StepRecorder {
    fn observe(&mut self, step: &StepView<'_>) -> Result<()> {
        self.steps.push(StepRecord {
            before: step.before.clone(),
            dt: step.dt,
            forcing: step.forcing.to_vec(),
            qv: step.qv.to_vec(),
        });
        self.last = Some(step.after.clone());
        Ok(())
    }
}

/// Source term `(S_ρ, S_m)(x, t)` added explicitly.
pub type Source<'a> = &'a dyn Fn(f64, f64) -> (f64, f64);

/// Reusable single-trajectory integrator.
pub struct Stepper<'a> {
    pub law: &'a PressureLaw,
    pub grid: Grid,
    pub config: SolverConfig,
    noise: &'a NoiseModel,
    table: ForcingTable,
    xs: Vec<f64>,
    pub forcing: Vec<f64>,
    pub qv: Vec<f64>,
    flux: Vec<f64>,
    scratch: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(law: &'a PressureLaw, grid: Grid, config: SolverConfig, noise: &'a NoiseModel) -> Result<Self> {
        config.validate()?;
        let xs = grid.centers();
        let table = noise.table(&xs);
        Ok(Stepper {
            law,
            grid,
            config,
            noise,
            table,
            xs,
            forcing: vec![0.0; grid.n],
            qv: vec![0.0; grid.n],
            flux: vec![0.0; grid.n],
            scratch: Vec::new(),
            diag: Vec::new(),
        })
    }

    pub fn modes(&self) -> usize {
        self.table.modes()
    }

    fn ghosts(&self, state: &GridState) -> [(f64, f64); 2] {
        let n = self.grid.n;
        match self.config.boundary {
            Boundary::FarField { rho, m } => [(rho, m), (rho, m)],
            Boundary::Reflecting => [(state.rho[0], -state.mom[0]), (state.rho[n - 1], -state.mom[n - 1])],
            Boundary::Periodic => [(state.rho[n - 1], state.mom[n - 1]), (state.rho[0], state.mom[0])],
        }
    }

    fn momentum_flux(&self, rho: f64, m: f64) -> f64 {
        m * m / rho + self.law.pressure_unchecked(rho)
    }

    /// One step of size `dt` with Brownian increments `dw` (one per active mode).
    pub fn step(&mut self, state: &GridState, dt: f64, dw: &[f64], source: Option<Source<'_>>) -> Result<GridState> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let eps = self.config.epsilon;
        if dw.len() < self.table.modes() {
            return Err(Error::domain("fewer Brownian increments than active modes"));
        }
        self.table
            .apply(self.noise, &state.rho, &state.mom, dw, &mut self.forcing, &mut self.qv);

        let [(rl, ml), (rr, mr)] = self.ghosts(state);
        for i in 0..n {
            self.flux[i] = self.momentum_flux(state.rho[i], state.mom[i]);
        }
        let gl = self.momentum_flux(rl, ml);
        let gr = self.momentum_flux(rr, mr);
        let c = dt / (2.0 * dx);
        let mut rho = vec![0.0; n];
        let mut mom = vec![0.0; n];
        for i in 0..n {
            let (m_w, g_w) = if i == 0 { (ml, gl) } else { (state.mom[i - 1], self.flux[i - 1]) };
            let (m_e, g_e) = if i == n - 1 { (mr, gr) } else { (state.mom[i + 1], self.flux[i + 1]) };
            rho[i] = state.rho[i] - c * (m_e - m_w);
            mom[i] = state.mom[i] - c * (g_e - g_w) + self.forcing[i];
        }
        if let Some(src) = source {
            for i in 0..n {
                let (sr, sm) = src(self.xs[i], state.t);
                rho[i] += dt * sr;
                mom[i] += dt * sm;
            }
        }

        let r = eps * dt / (dx * dx);
        match self.config.scheme {
            Scheme::Imex => match self.config.boundary {
                Boundary::Periodic => {
                    implicit_laplacian_periodic(r, &mut rho, &mut self.scratch, &mut self.diag);
                    implicit_laplacian_periodic(r, &mut mom, &mut self.scratch, &mut self.diag);
                }
                Boundary::FarField { rho: rf, m: mf } => {
                    implicit_laplacian(r, Closure::Dirichlet(rf), Closure::Dirichlet(rf), &mut rho, &mut self.scratch, &mut self.diag);
                    implicit_laplacian(r, Closure::Dirichlet(mf), Closure::Dirichlet(mf), &mut mom, &mut self.scratch, &mut self.diag);
                }
                Boundary::Reflecting => {
                    implicit_laplacian(r, Closure::Even, Closure::Even, &mut rho, &mut self.scratch, &mut self.diag);
                    implicit_laplacian(r, Closure::Odd, Closure::Odd, &mut mom, &mut self.scratch, &mut self.diag);
                }
            },
            Scheme::FullyExplicit => {
                for i in 0..n {
                    let (rw, mw) = if i == 0 { (rl, ml) } else { (state.rho[i - 1], state.mom[i - 1]) };
                    let (re, me) = if i == n - 1 { (rr, mr) } else { (state.rho[i + 1], state.mom[i + 1]) };
                    rho[i] += r * (rw - 2.0 * state.rho[i] + re);
                    mom[i] += r * (mw - 2.0 * state.mom[i] + me);
                }
            }
        }

        let t = state.t + dt;
        let mut worst = (0usize, f64::INFINITY);
        for i in 0..n {
            if !rho[i].is_finite() || !mom[i].is_finite() {
                return Err(Error::Divergence { t, x: self.xs[i] });
            }
            if rho[i] < worst.1 {
                worst = (i, rho[i]);
            }
        }
        if worst.1 < self.config.density_floor {
            return Err(Error::PositivityLoss {
                t,
                x: self.xs[worst.0],
                rho_min: worst.1,
            });
        }
        Ok(GridState { t, rho, mom })
    }
}

/// Implicit diffusion of the density alone over `dt` (operator-split substep).
pub fn diffusion_substep(grid: &Grid, boundary: Boundary, epsilon: f64, dt: f64, field: &[f64]) -> Vec<f64> {
    let r = epsilon * dt / (grid.dx() * grid.dx());
    let mut out = field.to_vec();
    let (mut s, mut d) = (Vec::new(), Vec::new());
    match boundary {
        Boundary::Periodic => implicit_laplacian_periodic(r, &mut out, &mut s, &mut d),
        Boundary::FarField { rho, .. } => {
            implicit_laplacian(r, Closure::Dirichlet(rho), Closure::Dirichlet(rho), &mut out, &mut s, &mut d)
        }
        Boundary::Reflecting => implicit_laplacian(r, Closure::Even, Closure::Even, &mut out, &mut s, &mut d),
    }
    out
}

/// Summary statistics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub min_rho: f64,
    pub min_rho_t: f64,
}

/// States at the save times plus run statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid,
    pub epsilon: f64,
    pub saves: Vec<GridState>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &GridState {
        self.saves.last().expect("trajectory has at least the initial state")
    }

    pub fn save_dt(&self) -> f64 {
        if self.saves.len() < 2 {
            0.0
        } else {
            self.saves[1].t - self.saves[0].t
        }
    }
}

/// Identifies one noise realisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseKey {
    pub seed: u64,
    pub sample: u64,
}

fn check_initial(init: &GridState, grid: &Grid, cfg: &SolverConfig) -> Result<()> {
    if init.rho.len() != grid.n || init.mom.len() != grid.n {
        return Err(Error::config(format!(
            "initial data has {} / {} values for a grid of {} cells",
            init.rho.len(),
            init.mom.len(),
            grid.n
        )));
    }
    if init.rho.iter().chain(&init.mom).any(|v| !v.is_finite()) {
        return Err(Error::config("initial data must be finite"));
    }
    let (i, v) = init.min_density();
    if v < cfg.density_floor {
        return Err(Error::config(format!(
            "initial density {v:e} at x = {} is below the density floor",
            grid.x(i)
        )));
    }
    Ok(())
}

/// Integrates from `init` (at `t = 0`) to the end time.
pub fn simulate(
    law: &PressureLaw,
    grid: &Grid,
    config: &SolverConfig,
    noise: &NoiseModel,
    init: &GridState,
    key: NoiseKey,
    observers: &mut [&mut dyn StepObserver],
) -> Result<Trajectory> {
    simulate_with_source(law, grid, config, noise, init, key, observers, None)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_with_source(
    law: &PressureLaw,
    grid: &Grid,
    config: &SolverConfig,
    noise: &NoiseModel,
    init: &GridState,
    key: NoiseKey,
    observers: &mut [&mut dyn StepObserver],
    source: Option<Source<'_>>,
) -> Result<Trajectory> {
    config.validate()?;
    check_initial(init, grid, config)?;
    let mut stepper = Stepper::new(law, *grid, config.clone(), noise)?;
    let modes = stepper.modes();
    let silent = noise.is_silent();
    let horizon = config.t_end;
    let lb = config.base_level;
    let mut paths = (!silent).then(|| BrownianPaths::new(key.seed, key.sample, modes, horizon, lb));
    let total_ticks = 1u64 << lb;
    let save_stride = 1u64 << (lb - config.save_level);

    let mut state = GridState { t: 0.0, ..init.clone() };
    let mut saves = vec![state.clone()];
    let mut tick = 0u64;
    let mut dw = vec![0.0; modes];
    let (i0, r0) = state.min_density();
    let _ = i0;
    let mut stats = RunStats {
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        min_rho: r0,
        min_rho_t: 0.0,
    };

    while tick < total_ticks {
        let limit = stable_dt(law, grid, config, &state);
        let level = match config.dt_level {
            Some(l) => {
                let dt = horizon / (1u64 << l) as f64;
                if dt > limit * (1.0 + 1e-12) {
                    return Err(Error::Stability { t: state.t, dt, limit });
                }
                l
            }
            None => {
                let mut l = config.save_level;
                while l < lb && horizon / (1u64 << l) as f64 > limit {
                    l += 1;
                }
                if horizon / (1u64 << l) as f64 > limit * (1.0 + 1e-12) {
                    return Err(Error::Stability {
                        t: state.t,
                        dt: horizon / (1u64 << l) as f64,
                        limit,
                    });
                }
                while !tick.is_multiple_of(1u64 << (lb - l)) {
                    l += 1;
                }
                l
            }
        };
        let ticks = 1u64 << (lb - level);
        let dt = ticks as f64 * (horizon / total_ticks as f64);
        match paths.as_mut() {
            Some(p) => p.sample_increments(ticks, &mut dw)?,
            None => dw.iter_mut().for_each(|v| *v = 0.0),
        }
        let mut next = stepper.step(&state, dt, &dw, source)?;
        tick += ticks;
        next.t = horizon * tick as f64 / total_ticks as f64;
        if !observers.is_empty() {
            let view = StepView {
                grid,
                epsilon: config.epsilon,
                before: &state,
                after: &next,
                dt,
                forcing: &stepper.forcing,
                qv: &stepper.qv,
            };
            for o in observers.iter_mut() {
                o.observe(&view)?;
            }
        }
        stats.steps += 1;
        stats.dt_min = stats.dt_min.min(dt);
        stats.dt_max = stats.dt_max.max(dt);
        let (_, r) = next.min_density();
        if r < stats.min_rho {
            stats.min_rho = r;
            stats.min_rho_t = next.t;
        }
        state = next;
        if tick.is_multiple_of(save_stride) {
            saves.push(state.clone());
        }
    }
    Ok(Trajectory {
        grid: *grid,
        epsilon: config.epsilon,
        saves,
        stats,
    })
}

/// Runs [`simulate`] for each viscosity of a strictly decreasing list with the
/// same Brownian paths. Failures are reported per member.
#[allow(clippy::too_many_arguments)]
pub fn epsilon_sweep<F>(
    law: &PressureLaw,
    grid: &Grid,
    template: &SolverConfig,
    noise_for: F,
    init: &GridState,
    epsilons: &[f64],
    key: NoiseKey,
) -> Result<Vec<Result<Trajectory>>>
where
    F: Fn(f64) -> Result<NoiseModel>,
{
    if epsilons.is_empty() {
        return Err(Error::config("epsilon list must not be empty"));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config("epsilon list must be strictly decreasing"));
    }
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let cfg = SolverConfig { epsilon: eps, ..template.clone() };
            let noise = noise_for(eps)?;
            simulate(law, grid, &cfg, &noise, init, key, &mut [])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> PressureLaw {
        PressureLaw::polytropic_scaled(2.0).unwrap()
    }

    #[test]
    fn grid_rejects_small() {
        assert!(Grid::new(1.0, 8).is_err());
        let g = Grid::new(2.0, 16).unwrap();
        assert!((g.dx() - 0.25).abs() < 1e-15);
        assert!((g.x(0) + 1.875).abs() < 1e-15);
    }

    #[test]
    fn constant_state_is_equilibrium() {
        let grid = Grid::new(4.0, 64).unwrap();
        let cfg = SolverConfig::new(0.05, 1.0, Boundary::FarField { rho: 1.0, m: 0.0 });
        let init = GridState::constant(&grid, 1.0, 0.0);
        let tr = simulate(&law(), &grid, &cfg, &NoiseModel::none(), &init, NoiseKey { seed: 1, sample: 0 }, &mut [])
            .unwrap();
        for s in &tr.saves {
            assert!(s.rho.iter().all(|r| (r - 1.0).abs() <= 1e-12));
            assert!(s.mom.iter().all(|m| m.abs() <= 1e-12));
        }
    }

    #[test]
    fn reflecting_boundaries_conserve_mass() {
        let grid = Grid::new(3.0, 96).unwrap();
        let cfg = SolverConfig::new(0.05, 0.5, Boundary::Reflecting);
        let init = GridState::from_fn(&grid, |x| (1.0 + 0.4 * (-x * x).exp(), 0.2 * (x * 2.0).sin()));
        let tr = simulate(&law(), &grid, &cfg, &NoiseModel::none(), &init, NoiseKey { seed: 0, sample: 0 }, &mut [])
            .unwrap();
        let mass = |s: &GridState| s.rho.iter().sum::<f64>() * grid.dx();
        for s in &tr.saves {
            assert!((mass(s) - mass(&init)).abs() <= 1e-10);
        }
    }

    #[test]
    fn fixed_level_violating_stability_is_reported() {
        let grid = Grid::new(4.0, 256).unwrap();
        let mut cfg = SolverConfig::new(0.05, 1.0, Boundary::FarField { rho: 1.0, m: 0.0 });
        cfg.dt_level = Some(4);
        let init = GridState::constant(&grid, 1.0, 0.0);
        let err = simulate(&law(), &grid, &cfg, &NoiseModel::none(), &init, NoiseKey { seed: 0, sample: 0 }, &mut [])
            .unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
    }

    #[test]
    fn sweep_requires_decreasing_list() {
        let grid = Grid::new(4.0, 32).unwrap();
        let cfg = SolverConfig::new(0.05, 0.1, Boundary::FarField { rho: 1.0, m: 0.0 });
        let init = GridState::constant(&grid, 1.0, 0.0);
        let key = NoiseKey { seed: 0, sample: 0 };
        let r = epsilon_sweep(&law(), &grid, &cfg, |_| Ok(NoiseModel::none()), &init, &[0.01, 0.05], key);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
