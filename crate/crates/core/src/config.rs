//! Run configuration (TOML) and its resolution into solver inputs.
//!
//! See `docs/config.md` for the schema. [`RunConfig::validate`] collects every
//! violation it can find before reporting, so one invocation lists them all.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, BumpTestFunction};
use crate::entropy::EntropySpec;
use crate::error::{Error, Result};
use crate::noise::{self, NoiseModel, SpatialProfile, SupportKind};
use crate::pressure_law::{CompositeLaw, Polytropic, PressureLaw};
use crate::solver::{Boundary, Grid, GridState, Scheme, SolverConfig};
use crate::young_measure::CellSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawConfig {
    Polytropic {
        gamma: f64,
        #[serde(default)]
        kappa: Option<f64>,
    },
    Composite {
        gamma1: f64,
        gamma2: f64,
        kappa1: f64,
        kappa2: f64,
        rho_lo: f64,
        rho_hi: f64,
    },
}

impl LawConfig {
    pub fn build(&self) -> Result<PressureLaw> {
        match *self {
            LawConfig::Polytropic { gamma, kappa: None } => PressureLaw::polytropic_scaled(gamma),
            LawConfig::Polytropic { gamma, kappa: Some(k) } => Polytropic::new(gamma, k).map(PressureLaw::Polytropic),
            LawConfig::Composite { gamma1, gamma2, kappa1, kappa2, rho_lo, rho_hi } => {
                CompositeLaw::new(gamma1, gamma2, kappa1, kappa2, rho_lo, rho_hi).map(PressureLaw::Composite)
            }
        }
        .map_err(|e| match e {
            Error::Domain(m) => Error::Config(m),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    FarField,
    Reflecting,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub epsilon: f64,
    pub t_end: f64,
    #[serde(default = "far_field")]
    pub boundary: BoundaryKind,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub cfl_diffusion: Option<f64>,
    #[serde(default)]
    pub density_floor: Option<f64>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub save_level: Option<u32>,
    #[serde(default)]
    pub base_level: Option<u32>,
    #[serde(default)]
    pub dt_level: Option<u32>,
}

fn far_field() -> BoundaryKind {
    BoundaryKind::FarField
}

/// Shape of the initial perturbation around the far-field state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape {
    Constant,
    /// `ρ = ρ∞ + amplitude·b(ξ)` and `u = velocity·b(ξ)` with `ξ = (x - center)/width`.
    Bump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// Smoothed jump between `(rho_left, u_left)` and `(rho_right, u_right)` over `width`,
    /// relaxing to the far field outside `|x| < extent`.
    RiemannSmoothed {
        rho_left: f64,
        rho_right: f64,
        #[serde(default)]
        u_left: f64,
        #[serde(default)]
        u_right: f64,
        width: f64,
        extent: f64,
    },
    /// CSV with columns `x, rho, m` sampled at the cell centres.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Far-field case 1, 2 (vacuum far field `ρ∞(ε) = ε^α0`) or 3 (`ρ∞ > 0`).
    pub case: u8,
    #[serde(default)]
    pub rho_inf: Option<f64>,
    #[serde(default)]
    pub alpha0: Option<f64>,
    /// Required lower bound `c0` of the initial density.
    #[serde(default)]
    pub c0: Option<f64>,
    pub profile: InitialShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    #[default]
    None,
    SingleMode {
        a1: f64,
        profile: SpatialProfile,
        #[serde(default = "default_c1")]
        c1: f64,
        #[serde(default = "default_alpha1")]
        alpha1: f64,
    },
    Decaying {
        a1: f64,
        decay: f64,
        modes: usize,
        profile: SpatialProfile,
        #[serde(default = "default_c1")]
        c1: f64,
        #[serde(default = "default_alpha1")]
        alpha1: f64,
    },
    Explicit {
        amplitudes: Vec<f64>,
        profile: SpatialProfile,
        #[serde(default = "default_c1")]
        c1: f64,
        #[serde(default = "default_alpha1")]
        alpha1: f64,
    },
}

fn default_c1() -> f64 {
    1.0
}
fn default_alpha1() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_compact")]
    pub compact_set: (f64, f64),
    #[serde(default = "default_moments")]
    pub moments: Vec<f64>,
    #[serde(default = "default_entropies")]
    pub entropies: Vec<EntropySpec>,
    #[serde(default)]
    pub test_functions: Vec<BumpTestFunction>,
}

fn default_compact() -> (f64, f64) {
    (-1.0, 1.0)
}
fn default_moments() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_entropies() -> Vec<EntropySpec> {
    vec![EntropySpec::Energy]
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            compact_set: default_compact(),
            moments: default_moments(),
            entropies: default_entropies(),
            test_functions: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub cells: Option<CellSpec>,
    #[serde(default = "default_tartar")]
    pub tartar: (EntropySpec, EntropySpec),
}

fn default_tartar() -> (EntropySpec, EntropySpec) {
    (
        EntropySpec::CompactBump { center: -0.5, width: 1.0 },
        EntropySpec::CompactBump { center: 0.5, width: 1.0 },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyTableConfig {
    pub spec: EntropySpec,
    /// `(min, max, count)`.
    pub rho: (f64, f64, usize),
    pub u: (f64, f64, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub samples: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub law: LawConfig,
    pub grid: GridConfig,
    pub solver: SolverBlock,
    pub initial: InitialConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub entropy_table: Option<EntropyTableConfig>,
}

fn one() -> usize {
    1
}

/// Everything needed to run one viscosity.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub law: PressureLaw,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub noise: NoiseModel,
    pub initial: GridState,
    pub rho_inf: f64,
}

impl ResolvedRun {
    /// Invariant-region level `ℋ^ε` of the truncated noise, if any.
    pub fn invariant_region_h(&self) -> Option<f64> {
        self.noise.invariant_region_h()
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid configuration: {}", e.message().trim())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let InitialShape::FromFile { path: p } = &mut cfg.initial.profile {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Far-field density at viscosity `epsilon`.
    pub fn far_field_density(&self, epsilon: f64) -> Result<f64> {
        match self.initial.case {
            1 | 2 => {
                let a0 = self
                    .initial
                    .alpha0
                    .ok_or_else(|| Error::config("cases 1-2 need initial.alpha0"))?;
                Ok(epsilon.powf(a0))
            }
            3 => self
                .initial
                .rho_inf
                .ok_or_else(|| Error::config("case 3 needs initial.rho_inf")),
            c => Err(Error::config(format!("initial.case must be 1, 2 or 3 (got {c})"))),
        }
    }

    fn solver_config(&self, epsilon: f64, rho_inf: f64) -> SolverConfig {
        let b = &self.solver;
        let boundary = match b.boundary {
            BoundaryKind::FarField => Boundary::FarField { rho: rho_inf, m: 0.0 },
            BoundaryKind::Reflecting => Boundary::Reflecting,
            BoundaryKind::Periodic => Boundary::Periodic,
        };
        let mut s = SolverConfig::new(epsilon, b.t_end, boundary);
        if let Some(v) = b.cfl {
            s.cfl = v;
        }
        if let Some(v) = b.cfl_diffusion {
            s.cfl_diffusion = v;
        }
        if let Some(v) = b.density_floor {
            s.density_floor = v;
        }
        if let Some(v) = b.scheme {
            s.scheme = v;
        }
        if let Some(v) = b.save_level {
            s.save_level = v;
        }
        if let Some(v) = b.base_level {
            s.base_level = v;
        }
        s.dt_level = b.dt_level;
        s
    }

    fn noise_model(&self, law: &PressureLaw, epsilon: f64, rho_inf: f64) -> Result<NoiseModel> {
        let (base, c1, alpha1) = match &self.noise {
            NoiseConfig::None => return Ok(NoiseModel::none()),
            NoiseConfig::SingleMode { a1, profile, c1, alpha1 } => (noise::make_single_mode(*a1, *profile)?, *c1, *alpha1),
            NoiseConfig::Decaying { a1, decay, modes, profile, c1, alpha1 } => {
                (NoiseModel::decaying(*a1, *decay, *modes, *profile)?, *c1, *alpha1)
            }
            NoiseConfig::Explicit { amplitudes, profile, c1, alpha1 } => {
                (NoiseModel::new(amplitudes.clone(), *profile)?, *c1, *alpha1)
            }
        };
        let mut base = base;
        if self.initial.case == 1 {
            base.support_kind = SupportKind::WholeLineCutoff;
        }
        noise::truncate_mollify(&base, law, epsilon, c1, alpha1, rho_inf)
    }

    fn initial_state(&self, grid: &Grid, rho_inf: f64) -> Result<GridState> {
        match &self.initial.profile {
            InitialShape::Constant => Ok(GridState::constant(grid, rho_inf, 0.0)),
            InitialShape::Bump { amplitude, width, center, velocity } => {
                if !(*width > 0.0) {
                    return Err(Error::config("initial bump width must be positive"));
                }
                Ok(GridState::from_fn(grid, |x| {
                    let b = noise::smooth_bump((x - center) / width);
                    let rho = rho_inf + amplitude * b;
                    (rho, rho * velocity * b)
                }))
            }
            InitialShape::RiemannSmoothed { rho_left, rho_right, u_left, u_right, width, extent } => {
                if !(*width > 0.0 && *extent > 0.0) {
                    return Err(Error::config("riemann_smoothed needs positive width and extent"));
                }
                Ok(GridState::from_fn(grid, |x| {
                    let s = 0.5 * (1.0 + (x / width).tanh());
                    let rho_c = rho_left + (rho_right - rho_left) * s;
                    let u_c = u_left + (u_right - u_left) * s;
                    // Relax to the far field near the ends of the truncated line.
                    let w = noise::smooth_step((extent - x.abs()) / (0.5 * extent));
                    let rho = rho_inf + w * (rho_c - rho_inf);
                    (rho, rho * w * u_c)
                }))
            }
            InitialShape::FromFile { path } => crate::io::read_state_csv(path, grid),
        }
    }

    /// Resolves the run at viscosity `epsilon` (the solver block's value when `None`).
    pub fn resolve(&self, epsilon: Option<f64>) -> Result<ResolvedRun> {
        let eps = epsilon.unwrap_or(self.solver.epsilon);
        let law = self.law.build()?;
        let grid = Grid::new(self.grid.half_width, self.grid.n)?;
        let rho_inf = self.far_field_density(eps)?;
        let solver = self.solver_config(eps, rho_inf);
        solver.validate()?;
        let noise = self.noise_model(&law, eps, rho_inf)?;
        let initial = self.initial_state(&grid, rho_inf)?;
        let c0 = self.initial.c0.unwrap_or(solver.density_floor);
        let (i, min_rho) = initial.min_density();
        if min_rho < c0 {
            return Err(Error::config(format!(
                "initial density {min_rho:e} at x = {} is below c0 = {c0}",
                grid.x(i)
            )));
        }
        if let Some(h) = noise.invariant_region_h() {
            let excess = diagnostics::invariant_region_excess(&initial, &law, h)?;
            if excess > 0.0 {
                return Err(Error::config(format!(
                    "initial data leave the invariant region Gamma_H (H = {h:.6}, excess {excess:.3e})"
                )));
            }
        }
        Ok(ResolvedRun { law, grid, solver, noise, initial, rho_inf })
    }

    /// All violations found, without running anything.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut push = |r: Result<()>| {
            if let Err(e) = r {
                errs.push(e.to_string());
            }
        };
        let law = self.law.build();
        push(law.as_ref().map(|_| ()).map_err(Clone::clone));
        push(Grid::new(self.grid.half_width, self.grid.n).map(|_| ()));
        push(match self.initial.case {
            1 | 2 => match (self.initial.alpha0, &law) {
                (None, _) => Err(Error::config("cases 1-2 need initial.alpha0")),
                (Some(a0), Ok(l)) if !(a0 * l.gamma_far() > 1.0) => Err(Error::config(format!(
                    "alpha0 * gamma2 must exceed 1 (got {a0} * {})",
                    l.gamma_far()
                ))),
                (Some(a0), Ok(l @ PressureLaw::Composite(_))) if !(self.solver.epsilon.powf(a0) < l.rho_star()) => {
                    Err(Error::config("rho_inf(eps) = eps^alpha0 must be below rho_star"))
                }
                _ => Ok(()),
            },
            3 => match self.initial.rho_inf {
                Some(r) if r > 0.0 => Ok(()),
                _ => Err(Error::config("case 3 needs initial.rho_inf > 0")),
            },
            c => Err(Error::config(format!("initial.case must be 1, 2 or 3 (got {c})"))),
        });
        if self.samples == 0 {
            errs.push(Error::config("samples must be at least 1").to_string());
        }
        let mut epsilons = vec![self.solver.epsilon];
        if let Some(sw) = &self.sweep {
            if sw.epsilons.is_empty() {
                errs.push(Error::config("sweep.epsilons must not be empty").to_string());
            } else if sw.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                errs.push(Error::config("sweep.epsilons must be strictly decreasing").to_string());
            }
            epsilons = sw.epsilons.clone();
            for s in [&sw.tartar.0, &sw.tartar.1] {
                if let Err(e) = s.validate() {
                    errs.push(e.to_string());
                }
            }
        }
        for spec in &self.diagnostics.entropies {
            if let Err(e) = spec.validate() {
                errs.push(e.to_string());
            }
        }
        for &p in &self.diagnostics.moments {
            if !(1.0..=diagnostics::MAX_MOMENT_EXPONENT).contains(&p) {
                errs.push(Error::config(format!("moment exponent {p} outside [1, 6]")).to_string());
            }
        }
        if let Ok(grid) = Grid::new(self.grid.half_width, self.grid.n) {
            let (a, b) = self.diagnostics.compact_set;
            if !(a < b && a >= -grid.half_width && b <= grid.half_width) {
                errs.push(Error::config("diagnostics.compact_set must lie inside the domain").to_string());
            }
            for phi in &self.diagnostics.test_functions {
                if let Err(e) = phi.validate(self.solver.t_end, &grid) {
                    errs.push(e.to_string());
                }
            }
        }
        if errs.is_empty() {
            for eps in epsilons {
                if let Err(e) = self.resolve(Some(eps)) {
                    errs.push(format!("at epsilon = {eps}: {e}"));
                }
            }
        }
        errs
    }

    /// `validate` as a single configuration error.
    pub fn check(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 3
[law]
kind = "polytropic"
gamma = 2.0
[grid]
half_width = 8.0
n = 128
[solver]
epsilon = 0.05
t_end = 0.5
[initial]
case = 3
rho_inf = 1.0
profile = { kind = "bump", amplitude = 0.5, width = 2.0 }
[noise]
kind = "single_mode"
a1 = 0.3
profile = { kind = "bump", center = 0.0, radius = 3.0, height = 1.0 }
"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = RunConfig::from_toml_str(BASIC).unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        let r = cfg.resolve(None).unwrap();
        assert_eq!(r.grid.n, 128);
        assert!(r.noise.invariant_region_h().is_some());
        let again = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn epsilon_one_violates_region_bound() {
        let cfg = RunConfig::from_toml_str(&BASIC.replace("epsilon = 0.05", "epsilon = 1.0")).unwrap();
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e.contains("invariant-region bound")), "{errs:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_toml_str(&BASIC.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
        assert!(RunConfig::from_toml_str("").is_err());
    }

    #[test]
    fn multiple_violations_are_listed() {
        let text = BASIC
            .replace("n = 128", "n = 8")
            .replace("rho_inf = 1.0", "rho_inf = -1.0");
        let errs = RunConfig::from_toml_str(&text).unwrap().validate();
        assert!(errs.len() >= 2, "{errs:?}");
    }

    #[test]
    fn vacuum_far_field_cases() {
        let text = BASIC.replace("case = 3\nrho_inf = 1.0", "case = 2\nalpha0 = 0.4");
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        assert!(cfg.validate().iter().any(|e| e.contains("alpha0 * gamma2")));
        let cfg = RunConfig::from_toml_str(&text.replace("alpha0 = 0.4", "alpha0 = 0.75")).unwrap();
        assert!((cfg.far_field_density(0.05).unwrap() - 0.05f64.powf(0.75)).abs() < 1e-15);
    }
}
