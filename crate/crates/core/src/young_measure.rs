//! Empirical Young measures on space-time cells and the associated
//! commutation and concentration diagnostics.

use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyKernel, EntropyPairValue, EntropySpec};
use crate::error::{Error, Result};
use crate::solver::Trajectory;

/// Default vacuum threshold for atoms.
pub const VACUUM_TOL: f64 = 1e-10;

/// Partition of `[t0, t1] × [x0, x1]` into `n_t × n_x` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub n_t: usize,
    pub n_x: usize,
}

impl CellSpec {
    fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_x == 0 {
            return Err(Error::config("cell counts must be positive"));
        }
        if !(self.t_range.0 < self.t_range.1) || !(self.x_range.0 < self.x_range.1) {
            return Err(Error::config("cell window must have positive extent"));
        }
        Ok(())
    }

    fn locate(v: f64, (a, b): (f64, f64), n: usize) -> Option<usize> {
        if v < a || v > b {
            return None;
        }
        Some((((v - a) / (b - a) * n as f64).floor() as usize).min(n - 1))
    }

    /// `(ti, xi)` of the cell containing `(t, x)`.
    pub fn cell_of(&self, t: f64, x: f64) -> Option<(usize, usize)> {
        Some((Self::locate(t, self.t_range, self.n_t)?, Self::locate(x, self.x_range, self.n_x)?))
    }
}

/// Uniformly weighted atoms `(ρ, m)` per cell, row-major in `(ti, xi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalYoungMeasure {
    pub epsilon: f64,
    pub cells: CellSpec,
    pub atoms: Vec<Vec<(f64, f64)>>,
}

impl EmpiricalYoungMeasure {
    /// Builds a measure directly from per-cell atoms.
    pub fn from_atoms(epsilon: f64, cells: CellSpec, atoms: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        cells.validate()?;
        if atoms.len() != cells.n_t * cells.n_x {
            return Err(Error::config("atom list does not match the cell partition"));
        }
        for (k, a) in atoms.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::EmptyCell { ti: k / cells.n_x, xi: k % cells.n_x });
            }
            if a.iter().any(|(r, _)| !(*r >= 0.0)) {
                return Err(Error::domain("Young-measure atoms need nonnegative density"));
            }
        }
        Ok(EmpiricalYoungMeasure { epsilon, cells, atoms })
    }

    pub fn weights(&self, cell: usize) -> Vec<f64> {
        let n = self.atoms[cell].len();
        vec![1.0 / n as f64; n]
    }
}

/// Collects grid values at save times inside each cell, pooled over trajectories.
pub fn build_measure(trajectories: &[&Trajectory], cells: CellSpec) -> Result<EmpiricalYoungMeasure> {
    cells.validate()?;
    let first = trajectories.first().ok_or_else(|| Error::config("no trajectories to build a measure from"))?;
    let grid = first.grid;
    if cells.x_range.0 < -grid.half_width || cells.x_range.1 > grid.half_width {
        return Err(Error::config("cell window must lie inside the domain"));
    }
    let mut atoms = vec![Vec::new(); cells.n_t * cells.n_x];
    for tr in trajectories {
        if tr.grid != grid {
            return Err(Error::config("trajectories on different grids"));
        }
        for s in &tr.saves {
            for i in 0..grid.n {
                if let Some((ti, xi)) = cells.cell_of(s.t, grid.x(i)) {
                    atoms[ti * cells.n_x + xi].push((s.rho[i], s.mom[i]));
                }
            }
        }
    }
    EmpiricalYoungMeasure::from_atoms(first.epsilon, cells, atoms)
}

fn eval_atom(kernel: &EntropyKernel, spec: &EntropySpec, rho: f64, m: f64) -> Result<EntropyPairValue> {
    if rho < VACUUM_TOL {
        return Ok(EntropyPairValue::ZERO);
    }
    kernel.pair_normalized(spec, rho, m)
}

/// Per-cell `(⟨η^ψ⟩, ⟨q^ψ⟩)`.
pub fn pair_average(measure: &EmpiricalYoungMeasure, kernel: &EntropyKernel, spec: &EntropySpec) -> Result<Vec<(f64, f64)>> {
    measure
        .atoms
        .iter()
        .map(|atoms| {
            let w = 1.0 / atoms.len() as f64;
            let mut acc = (0.0, 0.0);
            for &(r, m) in atoms {
                let v = eval_atom(kernel, spec, r, m)?;
                acc.0 += w * v.eta;
                acc.1 += w * v.q;
            }
            Ok(acc)
        })
        .collect()
}

/// Per-cell `⟨η1 q2 - η2 q1⟩ - (⟨η1⟩⟨q2⟩ - ⟨q1⟩⟨η2⟩)`.
pub fn tartar_residual(
    measure: &EmpiricalYoungMeasure,
    kernel: &EntropyKernel,
    spec1: &EntropySpec,
    spec2: &EntropySpec,
) -> Result<Vec<f64>> {
    measure
        .atoms
        .iter()
        .map(|atoms| {
            if atoms.windows(2).all(|w| w[0] == w[1]) {
                return Ok(0.0);
            }
            let w = 1.0 / atoms.len() as f64;
            let (mut e1, mut q1, mut e2, mut q2, mut cross) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(r, m) in atoms {
                let a = eval_atom(kernel, spec1, r, m)?;
                let b = eval_atom(kernel, spec2, r, m)?;
                e1 += w * a.eta;
                q1 += w * a.q;
                e2 += w * b.eta;
                q2 += w * b.q;
                cross += w * (a.eta * b.q - b.eta * a.q);
            }
            Ok(cross - (e1 * q2 - q1 * e2))
        })
        .collect()
}

/// Per-cell covariance traces across a viscosity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub epsilons: Vec<f64>,
    /// `traces[j][cell]` for the `j`-th measure.
    pub traces: Vec<Vec<f64>>,
    /// Least-squares slope of `log trace` against `log ε` per cell; `None` when a trace vanishes.
    pub slopes: Vec<Option<f64>>,
}

/// Population covariance trace of the atoms of one cell.
pub fn variance_trace(atoms: &[(f64, f64)]) -> f64 {
    let n = atoms.len() as f64;
    let (mr, mm) = atoms.iter().fold((0.0, 0.0), |a, &(r, m)| (a.0 + r / n, a.1 + m / n));
    atoms
        .iter()
        .map(|&(r, m)| (r - mr).powi(2) + (m - mm).powi(2))
        .sum::<f64>()
        / n
}

pub fn concentration_metric(measures: &[EmpiricalYoungMeasure]) -> Result<ConcentrationReport> {
    if measures.len() < 2 {
        return Err(Error::config("concentration metric needs at least two viscosities"));
    }
    let cells = measures[0].cells;
    if measures.iter().any(|m| m.cells != cells) {
        return Err(Error::config("measures use different cell partitions"));
    }
    let traces: Vec<Vec<f64>> = measures
        .iter()
        .map(|m| m.atoms.iter().map(|a| variance_trace(a)).collect())
        .collect();
    let epsilons: Vec<f64> = measures.iter().map(|m| m.epsilon).collect();
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let xbar = lx.iter().sum::<f64>() / lx.len() as f64;
    let sxx: f64 = lx.iter().map(|x| (x - xbar).powi(2)).sum();
    let slopes = (0..cells.n_t * cells.n_x)
        .map(|c| {
            if sxx == 0.0 || traces.iter().any(|t| !(t[c] > 0.0)) {
                return None;
            }
            let ly: Vec<f64> = traces.iter().map(|t| t[c].ln()).collect();
            let ybar = ly.iter().sum::<f64>() / ly.len() as f64;
            Some(lx.iter().zip(&ly).map(|(x, y)| (x - xbar) * (y - ybar)).sum::<f64>() / sxx)
        })
        .collect();
    Ok(ConcentrationReport { epsilons, traces, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure_law::Polytropic;

    fn spec() -> CellSpec {
        CellSpec { t_range: (0.0, 1.0), x_range: (0.0, 1.0), n_t: 1, n_x: 1 }
    }

    #[test]
    fn two_point_variance() {
        let d = 0.3;
        assert!((variance_trace(&[(1.0, 0.0), (1.0 + d, 0.0)]) - d * d / 4.0).abs() < 1e-15);
    }

    #[test]
    fn dirac_and_symmetric_residuals_vanish() {
        let k = EntropyKernel::new(Polytropic::scaled(2.0).unwrap());
        let a = EntropySpec::CompactBump { center: 0.0, width: 1.0 };
        let b = EntropySpec::CompactBump { center: 0.5, width: 0.8 };
        let dirac = EmpiricalYoungMeasure::from_atoms(0.1, spec(), vec![vec![(1.2, 0.3); 5]]).unwrap();
        assert_eq!(tartar_residual(&dirac, &k, &a, &b).unwrap()[0], 0.0);
        let two = EmpiricalYoungMeasure::from_atoms(0.1, spec(), vec![vec![(1.2, 0.3), (0.7, -0.2)]]).unwrap();
        assert_eq!(tartar_residual(&two, &k, &a, &a).unwrap()[0], 0.0);
        let r1 = tartar_residual(&two, &k, &a, &b).unwrap()[0];
        let r2 = tartar_residual(&two, &k, &b, &a).unwrap()[0];
        assert!(r1 != 0.0 && (r1 + r2).abs() <= 1e-15 * r1.abs());
    }

    #[test]
    fn empty_cell_is_named() {
        let cells = CellSpec { n_x: 2, ..spec() };
        let err = EmpiricalYoungMeasure::from_atoms(0.1, cells, vec![vec![(1.0, 0.0)], vec![]]).unwrap_err();
        assert_eq!(err, Error::EmptyCell { ti: 0, xi: 1 });
    }

    #[test]
    fn vacuum_cells_average_to_zero() {
        let k = EntropyKernel::new(Polytropic::scaled(2.0).unwrap());
        let m = EmpiricalYoungMeasure::from_atoms(0.1, spec(), vec![vec![(0.0, 0.0), (1e-12, 1e-13)]]).unwrap();
        let avg = pair_average(&m, &k, &EntropySpec::CompactBump { center: 0.0, width: 1.0 }).unwrap();
        assert_eq!(avg[0], (0.0, 0.0));
    }
}
