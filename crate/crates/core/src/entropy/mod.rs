//! Entropy pairs of the isentropic Euler system.
//!
//! For polytropic laws every weak entropy pair is generated by a function `ψ`
//! through the explicit kernels
//!
//! ```text
//! η^ψ(ρ, m) = ρ ∫_{-1}^{1} ψ(u + ρ^θ z) (1 - z²)^λ dz
//! q^ψ(ρ, m) = ρ ∫_{-1}^{1} (u + θ ρ^θ z) ψ(u + ρ^θ z) (1 - z²)^λ dz
//! ```
//!
//! with `u = m/ρ`, `θ = (γ-1)/2` and `λ = (3-γ)/(2(γ-1))`. The kernel is used as
//! is, without a normalising constant, so `ψ ≡ 1` yields `η = M_λ ρ` where
//! `M_λ = ∫ (1 - z²)^λ dz` ([`EntropyKernel::mass`]). The normalised variants
//! divide by `M_λ`; with that normalisation `ψ(s) = s²/2` reproduces the
//! mechanical energy pair exactly.
//!
//! The `z`-integrals are evaluated with Gauss-Jacobi rules that carry the
//! `(1 - z²)^λ` weight, split at the preimages of the generator's breakpoints
//! so that piecewise-defined generators are integrated without loss of order.

mod goursat;

pub use goursat::{goursat_solve, GoursatTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure_law::{Polytropic, PressureLaw};
use crate::quadrature::{jacobi_mass, GaussRule};

/// Default number of Gauss-Jacobi nodes per integration segment.
pub const DEFAULT_NODES: usize = 64;

/// Growth classes of generating functions at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    CompactSupport,
    Subquadratic,
    SubCubic,
    Energy,
    CutoffEnergy { r: f64 },
}

/// A generating function `ψ` with its first two derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropySpec {
    /// `ψ(s) = Σ c_i s^i`.
    Polynomial { coeffs: Vec<f64> },
    /// `ψ(s) = s²/2`, generating the mechanical energy.
    Energy,
    /// `ψ(s) = s|s|/2`, whose entropy is the special entropy inside `|u| ≤ K(ρ)`.
    SignedQuadratic,
    /// The C² cut-off approximation `ψ_R` of `s²/2`.
    Cutoff { r: f64 },
    /// `ψ(s) = (1 - t²)³₊` with `t = (s - center)/width`.
    CompactBump { center: f64, width: f64 },
    /// Convex, asymptotically linear: `ψ'' = (1 - t²)³₊`, `ψ = 0` left of the support.
    SmoothRamp { center: f64, width: f64 },
}

/// Values of `ψ_R`, `ψ_R'`, `ψ_R''`.
pub fn psi_cutoff(r: f64, s: f64) -> Result<(f64, f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("cut-off radius must be positive (got {r})")));
    }
    Ok(cutoff_values(r, s))
}

/// Piece `k` of `ψ_R` (`0`: `|s| ≤ R`, `1`: `R ≤ |s| ≤ 2R`, `2`: `|s| ≥ 2R`) evaluated at any `s`.
pub fn psi_cutoff_piece(r: f64, k: usize, s: f64) -> (f64, f64, f64) {
    let a = s.abs();
    let sg = s.signum();
    match k {
        0 => (0.5 * s * s, s, 1.0),
        1 => (
            r * r / 6.0 - 0.5 * r * a + a * a - a.powi(3) / (6.0 * r),
            sg * (-0.5 * r + 2.0 * a - a * a / (2.0 * r)),
            (2.0 * r - a) / r,
        ),
        _ => (-7.0 * r * r / 6.0 + 1.5 * r * a, sg * 1.5 * r, 0.0),
    }
}

fn cutoff_values(r: f64, s: f64) -> (f64, f64, f64) {
    let a = s.abs();
    let k = if a <= r {
        0
    } else if a <= 2.0 * r {
        1
    } else {
        2
    };
    psi_cutoff_piece(r, k, s)
}

// Antiderivatives of b(t) = (1 - t²)³.
fn ramp_b1(t: f64) -> f64 {
    t - t.powi(3) + 0.6 * t.powi(5) - t.powi(7) / 7.0
}

fn ramp_b2(t: f64) -> f64 {
    0.5 * t * t - 0.25 * t.powi(4) + 0.1 * t.powi(6) - t.powi(8) / 56.0
}

impl EntropySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EntropySpec::Cutoff { r } if !(*r > 0.0) => {
                Err(Error::config(format!("cut-off radius must be positive (got {r})")))
            }
            EntropySpec::CompactBump { width, .. } | EntropySpec::SmoothRamp { width, .. }
                if !(*width > 0.0) =>
            {
                Err(Error::config(format!("generator width must be positive (got {width})")))
            }
            EntropySpec::Polynomial { coeffs } if coeffs.is_empty() => {
                Err(Error::config("polynomial generator needs at least one coefficient"))
            }
            _ => Ok(()),
        }
    }

    /// `(ψ(s), ψ'(s), ψ''(s))`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        match self {
            EntropySpec::Polynomial { coeffs } => {
                let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2p = d2p * s + 2.0 * dp;
                    dp = dp * s + p;
                    p = p * s + c;
                }
                (p, dp, d2p)
            }
            EntropySpec::Energy => (0.5 * s * s, s, 1.0),
            EntropySpec::SignedQuadratic => (0.5 * s * s.abs(), s.abs(), s.signum()),
            EntropySpec::Cutoff { r } => cutoff_values(*r, s),
            EntropySpec::CompactBump { center, width } => {
                let t = (s - center) / width;
                if t.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let v = 1.0 - t * t;
                (
                    v.powi(3),
                    -6.0 * t * v * v / width,
                    (-6.0 * v * v + 24.0 * t * t * v) / (width * width),
                )
            }
            EntropySpec::SmoothRamp { center, width } => {
                let w = *width;
                let t = (s - center) / w;
                let b1_end = ramp_b1(1.0);
                if t <= -1.0 {
                    (0.0, 0.0, 0.0)
                } else if t < 1.0 {
                    let psi = w * w * (ramp_b2(t) - ramp_b2(-1.0) + b1_end * (t + 1.0));
                    let dpsi = w * (ramp_b1(t) + b1_end);
                    (psi, dpsi, (1.0 - t * t).powi(3))
                } else {
                    let psi_end = w * w * (ramp_b2(1.0) - ramp_b2(-1.0) + 2.0 * b1_end);
                    let slope = 2.0 * w * b1_end;
                    (psi_end + slope * (s - center - w), slope, 0.0)
                }
            }
        }
    }

    /// Points where `ψ` or one of its first three derivatives is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            EntropySpec::Polynomial { .. } | EntropySpec::Energy => vec![],
            EntropySpec::SignedQuadratic => vec![0.0],
            EntropySpec::Cutoff { r } => vec![-2.0 * r, -r, *r, 2.0 * r],
            EntropySpec::CompactBump { center, width }
            | EntropySpec::SmoothRamp { center, width } => vec![center - width, center + width],
        }
    }

    pub fn growth_class(&self) -> GrowthClass {
        match self {
            EntropySpec::Polynomial { coeffs } => match coeffs.len() {
                0..=2 => GrowthClass::Subquadratic,
                3 => GrowthClass::Energy,
                _ => GrowthClass::SubCubic,
            },
            EntropySpec::Energy => GrowthClass::Energy,
            EntropySpec::SignedQuadratic => GrowthClass::SubCubic,
            EntropySpec::Cutoff { r } => GrowthClass::CutoffEnergy { r: *r },
            EntropySpec::CompactBump { .. } => GrowthClass::CompactSupport,
            EntropySpec::SmoothRamp { .. } => GrowthClass::Subquadratic,
        }
    }

    /// Convex generators produce convex entropies.
    pub fn is_convex(&self) -> bool {
        match self {
            EntropySpec::Energy | EntropySpec::Cutoff { .. } | EntropySpec::SmoothRamp { .. } => true,
            EntropySpec::Polynomial { coeffs } => coeffs.len() <= 2 || (coeffs.len() == 3 && coeffs[2] >= 0.0),
            EntropySpec::SignedQuadratic | EntropySpec::CompactBump { .. } => false,
        }
    }

    /// Short human-readable tag used in report columns.
    pub fn label(&self) -> String {
        match self {
            EntropySpec::Polynomial { coeffs } => format!("poly{}", coeffs.len().saturating_sub(1)),
            EntropySpec::Energy => "energy".into(),
            EntropySpec::SignedQuadratic => "signed_quadratic".into(),
            EntropySpec::Cutoff { r } => format!("cutoff_r{r}"),
            EntropySpec::CompactBump { center, width } => format!("bump_c{center}_w{width}"),
            EntropySpec::SmoothRamp { center, width } => format!("ramp_c{center}_w{width}"),
        }
    }
}

/// `(η, q, ∂_m η, ∂²_m η)` at one state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyPairValue {
    pub eta: f64,
    pub q: f64,
    pub deta_dm: f64,
    pub d2eta_dm2: f64,
}

impl EntropyPairValue {
    pub const ZERO: EntropyPairValue = EntropyPairValue {
        eta: 0.0,
        q: 0.0,
        deta_dm: 0.0,
        d2eta_dm2: 0.0,
    };

    pub fn scaled(self, c: f64) -> Self {
        EntropyPairValue {
            eta: c * self.eta,
            q: c * self.q,
            deta_dm: c * self.deta_dm,
            d2eta_dm2: c * self.d2eta_dm2,
        }
    }
}

/// Quadrature machinery for the polytropic entropy kernel at a fixed `γ`.
#[derive(Debug, Clone)]
pub struct EntropyKernel {
    law: Polytropic,
    theta: f64,
    lambda: f64,
    mass: f64,
    full: GaussRule,
    left: GaussRule,
    right: GaussRule,
    interior: GaussRule,
}

impl EntropyKernel {
    pub fn new(law: Polytropic) -> Self {
        Self::with_nodes(law, DEFAULT_NODES)
    }

    pub fn with_nodes(law: Polytropic, nodes: usize) -> Self {
        let lambda = law.lambda();
        EntropyKernel {
            law,
            theta: law.theta(),
            lambda,
            mass: jacobi_mass(lambda, lambda),
            full: GaussRule::jacobi(nodes, lambda, lambda),
            // (1 + z)^λ singular at the left end of a segment touching z = -1.
            left: GaussRule::jacobi(nodes, 0.0, lambda),
            right: GaussRule::jacobi(nodes, lambda, 0.0),
            interior: GaussRule::legendre(nodes),
        }
    }

    /// Kernel for a general law; only polytropic laws have an explicit kernel.
    pub fn for_law(law: &PressureLaw) -> Result<Self> {
        match law {
            PressureLaw::Polytropic(p) => Ok(Self::new(*p)),
            PressureLaw::Composite(_) => Err(Error::Unsupported(
                "generated entropy pairs need an explicit kernel (polytropic laws only)".into(),
            )),
        }
    }

    pub fn law(&self) -> &Polytropic {
        &self.law
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `M_λ = ∫_{-1}^{1} (1 - z²)^λ dz`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `∫_{-1}^{1} f(z) (1 - z²)^λ dz`, split at `cuts` (strictly inside, ascending).
    fn weighted_integral<F: Fn(f64) -> [f64; 4]>(&self, cuts: &[f64], f: F) -> [f64; 4] {
        let mut acc = [0.0; 4];
        let mut add = |v: [f64; 4], w: f64| {
            for k in 0..4 {
                acc[k] += w * v[k];
            }
        };
        if cuts.is_empty() {
            for (&z, &w) in self.full.nodes.iter().zip(&self.full.weights) {
                add(f(z), w);
            }
            return acc;
        }
        let lam = self.lambda;
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(-1.0);
        edges.extend_from_slice(cuts);
        edges.push(1.0);
        let last = edges.len() - 2;
        for (i, pair) in edges.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            if b - a <= 1e-15 {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let (rule, cofactor): (&GaussRule, Box<dyn Fn(f64) -> f64>) = if i == 0 {
                (&self.left, Box::new(move |z: f64| (1.0 - z).powf(lam)))
            } else if i == last {
                (&self.right, Box::new(move |z: f64| (1.0 + z).powf(lam)))
            } else {
                (&self.interior, Box::new(move |z: f64| ((1.0 - z) * (1.0 + z)).powf(lam)))
            };
            let scale = half.powf(rule.alpha + rule.beta + 1.0);
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let z = mid + half * t;
                add(f(z), scale * w * cofactor(z));
            }
        }
        acc
    }

    /// Generated entropy pair with the raw kernel (no normalising constant).
    pub fn pair(&self, spec: &EntropySpec, rho: f64, m: f64) -> Result<EntropyPairValue> {
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::domain(format!("density must be nonnegative (got {rho})")));
        }
        if rho == 0.0 {
            if m != 0.0 {
                return Err(Error::VacuumSingularity { m });
            }
            return Ok(EntropyPairValue::ZERO);
        }
        let u = m / rho;
        let spread = rho.powf(self.theta);
        let mut cuts: Vec<f64> = spec
            .breakpoints()
            .into_iter()
            .map(|b| (b - u) / spread)
            .filter(|z| *z > -1.0 && *z < 1.0)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let theta = self.theta;
        let [i_psi, i_flux, i_dpsi, i_d2psi] = self.weighted_integral(&cuts, |z| {
            let s = u + spread * z;
            let (p, dp, d2p) = spec.eval(s);
            [p, (u + theta * spread * z) * p, dp, d2p]
        });
        Ok(EntropyPairValue {
            eta: rho * i_psi,
            q: rho * i_flux,
            deta_dm: i_dpsi,
            d2eta_dm2: i_d2psi / rho,
        })
    }

    /// Generated entropy pair divided by `M_λ`.
    pub fn pair_normalized(&self, spec: &EntropySpec, rho: f64, m: f64) -> Result<EntropyPairValue> {
        Ok(self.pair(spec, rho, m)?.scaled(1.0 / self.mass))
    }

    /// `χ(ρ, u, s) = [ρ^{2θ} - (s - u)²]_+^λ`; `+∞` marks the boundary singularity when `λ < 0`.
    pub fn chi(&self, rho: f64, u: f64, s: f64) -> f64 {
        kernel_chi_lambda(self.theta, self.lambda, rho, u, s)
    }

    /// `σ(ρ, u, s) = (θ s + (1 - θ) u) χ(ρ, u, s)`.
    pub fn sigma(&self, rho: f64, u: f64, s: f64) -> f64 {
        let chi = self.chi(rho, u, s);
        if chi == 0.0 {
            return 0.0;
        }
        (self.theta * s + (1.0 - self.theta) * u) * chi
    }
}

fn kernel_chi_lambda(theta: f64, lambda: f64, rho: f64, u: f64, s: f64) -> f64 {
    let bracket = rho.powf(2.0 * theta) - (s - u) * (s - u);
    if bracket > 0.0 {
        bracket.powf(lambda)
    } else if bracket == 0.0 && lambda < 0.0 && rho > 0.0 {
        f64::INFINITY
    } else if bracket == 0.0 && lambda == 0.0 && rho > 0.0 {
        // Support endpoint of the indicator kernel (γ = 3).
        1.0
    } else {
        0.0
    }
}

/// Entropy kernel `χ` of the γ-law.
pub fn kernel_chi(gamma: f64, rho: f64, u: f64, s: f64) -> Result<f64> {
    let law = Polytropic::scaled(gamma)?;
    if rho < 0.0 {
        return Err(Error::domain(format!("density must be nonnegative (got {rho})")));
    }
    Ok(kernel_chi_lambda(law.theta(), law.lambda(), rho, u, s))
}

/// Entropy flux kernel `σ` of the γ-law.
pub fn kernel_sigma(gamma: f64, rho: f64, u: f64, s: f64) -> Result<f64> {
    let law = Polytropic::scaled(gamma)?;
    let chi = kernel_chi(gamma, rho, u, s)?;
    if chi == 0.0 {
        return Ok(0.0);
    }
    let theta = law.theta();
    Ok((theta * s + (1.0 - theta) * u) * chi)
}

/// Generated entropy pair for a polytropic law (raw kernel).
pub fn entropy_pair(law: &PressureLaw, spec: &EntropySpec, rho: f64, m: f64) -> Result<EntropyPairValue> {
    EntropyKernel::for_law(law)?.pair(spec, rho, m)
}

fn vacuum_guard(rho: f64, m: f64) -> Result<bool> {
    if rho < 0.0 || rho.is_nan() {
        return Err(Error::domain(format!("density must be nonnegative (got {rho})")));
    }
    if rho == 0.0 {
        if m != 0.0 {
            return Err(Error::VacuumSingularity { m });
        }
        return Ok(true);
    }
    Ok(false)
}

/// Mechanical energy `η_E = m²/(2ρ) + ρe` and its flux `q_E = m³/(2ρ²) + m(ρe)'`.
pub fn mechanical_energy_pair(law: &PressureLaw, rho: f64, m: f64) -> Result<EntropyPairValue> {
    if vacuum_guard(rho, m)? {
        return Ok(EntropyPairValue::ZERO);
    }
    let u = m / rho;
    Ok(EntropyPairValue {
        eta: 0.5 * m * u + law.energy_density(rho)?,
        q: 0.5 * m * u * u + m * law.d_energy_density(rho)?,
        deta_dm: u,
        d2eta_dm2: 1.0 / rho,
    })
}

/// Relative mechanical energy `m²/(2ρ) + e*(ρ, ρ∞)`.
pub fn relative_energy(law: &PressureLaw, rho: f64, m: f64, rho_inf: f64) -> Result<f64> {
    let kinetic = if vacuum_guard(rho, m)? { 0.0 } else { 0.5 * m * m / rho };
    Ok(kinetic + law.relative_internal_energy(rho, rho_inf)?)
}

/// Higher-order energy `η_◊ = m⁴/(12ρ³) + e m²/ρ + g` and its relative version.
pub fn high_order_energy(law: &PressureLaw, rho: f64, m: f64, rho_inf: f64) -> Result<(f64, f64)> {
    let (g_inf, dg_inf) = law.high_order_potential_with_slope(rho_inf)?;
    if vacuum_guard(rho, m)? {
        return Ok((0.0, -g_inf + dg_inf * rho_inf));
    }
    let kinetic = m.powi(4) / (12.0 * rho.powi(3)) + law.internal_energy(rho)? * m * m / rho;
    let g = law.high_order_potential(rho)?;
    Ok((kinetic + g, kinetic + g - g_inf - dg_inf * (rho - rho_inf)))
}

/// Riemann invariants `w1 = u - K(ρ)`, `w2 = u + K(ρ)`.
pub fn riemann_invariants(law: &PressureLaw, rho: f64, m: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("Riemann invariants need rho > 0 (got {rho})")));
    }
    let u = m / rho;
    let k = law.k_integral(rho)?;
    Ok((u - k, u + k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn kernel(gamma: f64) -> EntropyKernel {
        EntropyKernel::new(Polytropic::scaled(gamma).unwrap())
    }

    #[test]
    fn chi_examples() {
        assert!((kernel_chi(2.0, 1.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kernel_chi(2.0, 1.0, 0.0, 1.5).unwrap(), 0.0);
        assert!((kernel_chi(2.0, 1.0, 0.0, 0.5).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        // γ > 3: boundary singularity is flagged, not a finite value.
        assert!(kernel_chi(4.0, 1.0, 0.0, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(kernel_sigma(2.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((kernel_sigma(2.0, 1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_sigma(2.0, 1.0, 0.0, 0.5).unwrap() - 0.25 * 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pair_examples() {
        let k = kernel(2.0);
        let one = EntropySpec::Polynomial { coeffs: vec![1.0] };
        assert!((k.pair(&one, 1.0, 0.0).unwrap().eta - FRAC_PI_2).abs() < 1e-13);
        let lin = EntropySpec::Polynomial { coeffs: vec![0.0, 1.0] };
        assert!((k.pair(&lin, 1.0, 1.0).unwrap().eta - FRAC_PI_2).abs() < 1e-13);
        for g in [1.4, 2.0, 3.0, 5.0] {
            let k = kernel(g);
            for spec in [EntropySpec::Energy, EntropySpec::Cutoff { r: 2.0 }, lin.clone()] {
                assert_eq!(k.pair(&spec, 0.0, 0.0).unwrap(), EntropyPairValue::ZERO);
            }
        }
    }

    #[test]
    fn pair_matches_direct_kernel_integration() {
        // Oracle: integrate χ ψ over s with adaptive quadrature (γ = 2 has a bounded kernel).
        let k = kernel(2.0);
        let spec = EntropySpec::CompactBump { center: 0.3, width: 0.8 };
        for &(rho, u) in &[(0.7f64, 0.1), (1.3, -0.4), (2.0, 0.5)] {
            let r = rho.powf(k.theta());
            let eta = crate::quadrature::integrate(
                |s| k.chi(rho, u, s) * spec.eval(s).0,
                u - r,
                u + r,
                1e-13,
                0.0,
            )
            .unwrap()
            .value;
            let q = crate::quadrature::integrate(
                |s| k.sigma(rho, u, s) * spec.eval(s).0,
                u - r,
                u + r,
                1e-13,
                0.0,
            )
            .unwrap()
            .value;
            let got = k.pair(&spec, rho, rho * u).unwrap();
            assert!((got.eta - eta).abs() < 1e-9, "{} vs {eta}", got.eta);
            assert!((got.q - q).abs() < 1e-9, "{} vs {q}", got.q);
        }
    }

    #[test]
    fn energy_generator_reproduces_mechanical_energy() {
        for g in [1.4, 2.0, 3.0, 4.5] {
            let law = PressureLaw::polytropic_scaled(g).unwrap();
            let k = kernel(g);
            for &(rho, u) in &[(0.1, -3.0), (1.0, 0.0), (2.5, 1.7), (5.0, -0.2)] {
                let m = rho * u;
                let a = k.pair_normalized(&EntropySpec::Energy, rho, m).unwrap();
                let b = mechanical_energy_pair(&law, rho, m).unwrap();
                assert!((a.eta - b.eta).abs() <= 1e-10 * b.eta.abs().max(1e-300));
                let scale = b.q.abs() + b.eta * law.sound_speed(rho).unwrap();
                assert!((a.q - b.q).abs() <= 1e-10 * scale, "{} vs {}", a.q, b.q);
                assert!((a.deta_dm - b.deta_dm).abs() <= 1e-10 * (u.abs() + rho.powf(k.theta())));
                assert!((a.d2eta_dm2 - b.d2eta_dm2).abs() <= 1e-10 * b.d2eta_dm2);
            }
        }
    }

    #[test]
    fn mass_is_beta_function() {
        assert!((kernel(2.0).mass() - FRAC_PI_2).abs() < 1e-14);
        assert!((kernel(3.0).mass() - 2.0).abs() < 1e-14);
        // γ = 5/3: λ = 1, M = 4/3
        assert!((kernel(5.0 / 3.0).mass() - 4.0 / 3.0).abs() < 1e-13);
        let _ = PI;
    }

    #[test]
    fn cutoff_examples_and_continuity() {
        assert!((psi_cutoff(1.0, 0.5).unwrap().0 - 0.125).abs() < 1e-15);
        assert!((psi_cutoff(1.0, 3.0).unwrap().0 - 10.0 / 3.0).abs() < 1e-14);
        assert!((psi_cutoff(1.0, 1.0).unwrap().0 - 0.5).abs() < 1e-15);
        assert!(psi_cutoff(0.0, 1.0).is_err());
        for r in [0.5, 1.0, 20.0] {
            for edge in [r, 2.0 * r, -r, -2.0 * r] {
                let lo = cutoff_values(r, edge - edge.signum() * 1e-13 * r);
                let hi = cutoff_values(r, edge + edge.signum() * 1e-13 * r);
                assert!((lo.0 - hi.0).abs() <= 1e-12 * r * r);
                assert!((lo.1 - hi.1).abs() <= 1e-12 * r);
            }
        }
    }

    #[test]
    fn ramp_and_bump_derivatives_are_consistent() {
        for spec in [
            EntropySpec::SmoothRamp { center: 0.2, width: 0.7 },
            EntropySpec::CompactBump { center: -0.1, width: 1.1 },
            EntropySpec::Cutoff { r: 0.6 },
            EntropySpec::Polynomial { coeffs: vec![1.0, -2.0, 0.5, 0.25] },
        ] {
            let h = 1e-6;
            for i in 0..=60 {
                let s = -2.0 + 4.0 * i as f64 / 60.0;
                let (_, d1, d2) = spec.eval(s);
                let fd1 = (spec.eval(s + h).0 - spec.eval(s - h).0) / (2.0 * h);
                let fd2 = (spec.eval(s + h).1 - spec.eval(s - h).1) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-6, "{spec:?} s={s}");
                assert!((d2 - fd2).abs() < 1e-5, "{spec:?} s={s}");
            }
        }
    }

    #[test]
    fn mechanical_energy_examples() {
        let law = PressureLaw::polytropic_scaled(2.0).unwrap();
        let p = mechanical_energy_pair(&law, 1.0, 1.0).unwrap();
        assert!((p.eta - 0.625).abs() < 1e-15);
        assert!((p.q - 0.75).abs() < 1e-15);
        let p = mechanical_energy_pair(&law, 1.0, 0.0).unwrap();
        assert!((p.eta - 0.125).abs() < 1e-15);
        assert_eq!(p.q, 0.0);
        assert!(mechanical_energy_pair(&law, 0.0, 1.0).is_err());
        assert_eq!(relative_energy(&law, 1.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn relative_energy_examples() {
        let law = PressureLaw::polytropic_scaled(2.0).unwrap();
        assert!((relative_energy(&law, 2.0, 0.0, 1.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((relative_energy(&law, 1.0, 2.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn high_order_energy_examples() {
        let law = PressureLaw::polytropic_scaled(2.0).unwrap();
        let (abs, rel) = high_order_energy(&law, 1.0, 1.0, 1.0).unwrap();
        assert!((abs - 0.21875).abs() < 1e-15);
        assert!((rel - (1.0 / 12.0 + 0.125)).abs() < 1e-15);
        let (abs, rel) = high_order_energy(&law, 1.0, 0.0, 1.0).unwrap();
        assert!((abs - 1.0 / 96.0).abs() < 1e-15);
        assert_eq!(rel, 0.0);
        assert_eq!(high_order_energy(&law, 0.0, 0.0, 1.0).unwrap().0, 0.0);
        assert!(high_order_energy(&law, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn riemann_invariant_examples() {
        let law = PressureLaw::polytropic_scaled(2.0).unwrap();
        assert_eq!(riemann_invariants(&law, 1.0, 0.0).unwrap(), (-1.0, 1.0));
        assert_eq!(riemann_invariants(&law, 1.0, 1.0).unwrap(), (0.0, 2.0));
        assert!(riemann_invariants(&law, 0.0, 0.0).is_err());
    }

    #[test]
    fn entropy_flux_compatibility_by_finite_differences() {
        // ∂_ρ q = ∂_ρη (P' - u²),  ∂_m q = ∂_ρ η + 2u ∂_m η   in (ρ, m) coordinates.
        for g in [1.4, 2.0, 3.0] {
            let law = PressureLaw::polytropic_scaled(g).unwrap();
            let k = kernel(g);
            for spec in [
                EntropySpec::Energy,
                EntropySpec::SmoothRamp { center: 0.1, width: 0.9 },
                EntropySpec::CompactBump { center: 0.0, width: 1.5 },
            ] {
                let mut worst: f64 = 0.0;
                for i in 0..6 {
                    for j in 0..6 {
                        let rho = 0.4 + 0.5 * i as f64;
                        let u = -1.0 + 0.4 * j as f64;
                        let m = rho * u;
                        let h = 1e-5;
                        let at = |r: f64, mm: f64| k.pair(&spec, r, mm).unwrap();
                        let eta_r = (at(rho + h, m).eta - at(rho - h, m).eta) / (2.0 * h);
                        let eta_m = (at(rho, m + h).eta - at(rho, m - h).eta) / (2.0 * h);
                        let q_r = (at(rho + h, m).q - at(rho - h, m).q) / (2.0 * h);
                        let q_m = (at(rho, m + h).q - at(rho, m - h).q) / (2.0 * h);
                        let dp = law.dpressure(rho);
                        worst = worst.max((q_r - eta_m * (dp - u * u)).abs());
                        worst = worst.max((q_m - (eta_r + 2.0 * u * eta_m)).abs());
                        assert!((at(rho, m).deta_dm - eta_m).abs() < 1e-6);
                    }
                }
                assert!(worst <= 1e-4, "gamma={g} {spec:?}: {worst}");
            }
        }
    }

    #[test]
    fn general_law_has_no_generated_pairs() {
        let k1 = crate::pressure_law::scaled_kappa(2.2);
        let c = crate::pressure_law::CompositeLaw::new(2.2, 1.6, k1, k1 * 2f64.powf(0.6), 0.5, 4.0).unwrap();
        let law = PressureLaw::Composite(c);
        assert!(matches!(
            entropy_pair(&law, &EntropySpec::Energy, 1.0, 0.0),
            Err(Error::Unsupported(_))
        ));
        assert!(mechanical_energy_pair(&law, 1.0, 0.5).is_ok());
    }
}
