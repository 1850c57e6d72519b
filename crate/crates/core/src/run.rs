//! Monte Carlo ensembles over independent noise samples.
//!
//! Samples run on a dedicated thread pool of `jobs` workers and are returned in
//! sample order, so outputs do not depend on the scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ResolvedRun;
use crate::diagnostics::{BumpTestFunction, EnergyAccumulator, EntropyResidual, EntropyResidualAccumulator};
use crate::entropy::EntropySpec;
use crate::error::{Error, Result};
use crate::solver::{self, NoiseKey, StepObserver, Trajectory};

/// Evaluates `f(0..count)` on `jobs` threads (`0` means all cores), in index order.
pub fn run_tasks<T, F>(count: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

/// Runs `f` for samples `0..samples` on `jobs` threads.
pub fn run_samples<T, F>(seed: u64, samples: usize, jobs: usize, f: F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(NoiseKey) -> Result<T> + Sync,
{
    run_tasks(samples, jobs, |s| f(NoiseKey { seed, sample: s as u64 }))
}

/// Residual of one `(ψ, φ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledResidual {
    pub entropy: String,
    pub test_function: usize,
    pub residual: EntropyResidual,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleOutput {
    pub key: NoiseKey,
    pub trajectory: Trajectory,
    pub energy: EnergyAccumulator,
    pub residuals: Vec<LabeledResidual>,
}

/// One sample with the energy accumulator and one residual per entropy and test function.
pub fn simulate_sample(
    run: &ResolvedRun,
    key: NoiseKey,
    entropies: &[EntropySpec],
    tests: &[BumpTestFunction],
) -> Result<SampleOutput> {
    let mut energy = EnergyAccumulator::new(&run.law);
    let mut acc = Vec::new();
    let mut labels = Vec::new();
    for spec in entropies {
        for (j, phi) in tests.iter().enumerate() {
            phi.validate(run.solver.t_end, &run.grid)?;
            acc.push(EntropyResidualAccumulator::new(&run.law, spec, *phi)?);
            labels.push((spec.label(), j));
        }
    }
    let trajectory = {
        let mut obs: Vec<&mut dyn StepObserver> = vec![&mut energy];
        obs.extend(acc.iter_mut().map(|a| a as &mut dyn StepObserver));
        solver::simulate(&run.law, &run.grid, &run.solver, &run.noise, &run.initial, key, &mut obs)?
    };
    let residuals = labels
        .into_iter()
        .zip(&acc)
        .map(|((entropy, test_function), a)| LabeledResidual { entropy, test_function, residual: a.residual() })
        .collect();
    Ok(SampleOutput { key, trajectory, energy, residuals })
}

/// [`simulate_sample`] for every sample of an ensemble.
pub fn simulate_ensemble(
    run: &ResolvedRun,
    seed: u64,
    samples: usize,
    jobs: usize,
    entropies: &[EntropySpec],
    tests: &[BumpTestFunction],
) -> Result<Vec<Result<SampleOutput>>> {
    run_samples(seed, samples, jobs, |key| simulate_sample(run, key, entropies, tests))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_sample_order() {
        let out = run_samples(7, 50, 4, |k| Ok(k.sample * 2)).unwrap();
        let v: Vec<u64> = out.into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(v, (0..50).map(|s| s * 2).collect::<Vec<_>>());
    }
}
