//! Command implementations behind the `svv` binary.
//!
//! Every command reads one TOML configuration, writes its artifacts into an
//! output directory together with a copy of the configuration and a version
//! stamp, and reports failures as a JSON object on stderr (and `error.json`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use svv_core::config::{EntropyTableConfig, LawConfig, ResolvedRun, RunConfig};
use svv_core::diagnostics::{self, BumpTestFunction};
use svv_core::entropy::{goursat_solve, EntropyKernel, EntropySpec};
use svv_core::io::{self, Manifest, TrajectoryEntry, TrajectoryManifest};
use svv_core::noise;
use svv_core::pressure_law::{self, PressureLaw};
use svv_core::run::{self, SampleOutput};
use svv_core::solver::NoiseKey;
use svv_core::young_measure::{self, CellSpec, EmpiricalYoungMeasure};
use svv_core::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUTPUT_DIR_ENV: &str = "SVV_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "svv-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    SweepEpsilon,
    EntropyTable,
    YoungMeasure,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::SweepEpsilon => "sweep-epsilon",
            Command::EntropyTable => "entropy-table",
            Command::YoungMeasure => "young-measure",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    /// Worker threads; `0` uses every core.
    pub jobs: usize,
    pub output_dir: Option<PathBuf>,
    /// Trajectory manifest for `young-measure`; defaults to the one in the output directory.
    pub manifest: Option<PathBuf>,
}

/// Failure of a command, with per-member failures of ensembles and sweeps.
#[derive(Debug, Clone)]
pub struct CommandError {
    pub error: Error,
    pub failures: Vec<(String, Error)>,
    pub output_dir: Option<PathBuf>,
}

impl From<Error> for CommandError {
    fn from(error: Error) -> Self {
        CommandError { error, failures: vec![], output_dir: None }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_runtime() || matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Numerical { .. } => "numerical",
        Error::Config(_) => "config",
        Error::PositivityLoss { .. } => "positivity_loss",
        Error::Divergence { .. } => "divergence",
        Error::VacuumSingularity { .. } => "vacuum_singularity",
        Error::Stability { .. } => "stability",
        Error::Unsupported(_) => "unsupported",
        Error::EmptyCell { .. } => "empty_cell",
        Error::Io(_) => "io",
    }
}

#[derive(Serialize)]
struct FailureJson<'a> {
    context: &'a str,
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    status: &'static str,
    exit_code: i32,
    kind: &'static str,
    message: String,
    failures: Vec<FailureJson<'a>>,
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.error)
    }

    pub fn to_json(&self) -> String {
        let j = ErrorJson {
            status: "error",
            exit_code: self.exit_code(),
            kind: error_kind(&self.error),
            message: self.error.to_string(),
            failures: self
                .failures
                .iter()
                .map(|(c, e)| FailureJson { context: c, kind: error_kind(e), message: e.to_string() })
                .collect(),
        };
        serde_json::to_string(&j).expect("error JSON is serialisable")
    }
}

/// Output directory precedence: flag, then `SVV_OUTPUT_DIR`, then the config, then `svv-out`.
pub fn output_dir(opts: &Options, from_config: Option<&Path>) -> PathBuf {
    if let Some(d) = &opts.output_dir {
        return d.clone();
    }
    if let Some(d) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(d);
    }
    from_config.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn prepare_output(dir: &Path, config: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let text = fs::read(config)?;
    fs::write(dir.join("config.toml"), text)?;
    fs::write(dir.join("VERSION"), format!("svv {VERSION}\n"))?;
    Ok(())
}

fn write_manifest(dir: &Path, cmd: Command, seed: u64, samples: usize, mut files: Vec<String>) -> Result<()> {
    files.sort();
    let m = Manifest {
        tool: "svv".into(),
        version: VERSION.into(),
        command: cmd.name().into(),
        seed,
        samples,
        files,
    };
    io::write_json(&dir.join("manifest.json"), &m)
}

/// Runs `cmd`; on success returns a one-line summary for stdout.
pub fn execute(cmd: Command, opts: &Options) -> std::result::Result<String, CommandError> {
    match cmd {
        Command::Simulate => cmd_simulate(opts),
        Command::SweepEpsilon => cmd_sweep_epsilon(opts),
        Command::EntropyTable => cmd_entropy_table(opts).map_err(Into::into),
        Command::YoungMeasure => cmd_young_measure(opts).map_err(Into::into),
        Command::Validate => cmd_validate(opts),
    }
}

fn with_dir(dir: &Path) -> impl Fn(Error) -> CommandError + '_ {
    move |error| CommandError { error, failures: vec![], output_dir: Some(dir.to_path_buf()) }
}

fn load_checked(opts: &Options) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&opts.config)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(n) = opts.samples {
        cfg.samples = n;
    }
    cfg.check()?;
    Ok(cfg)
}

fn test_functions(cfg: &RunConfig) -> Vec<BumpTestFunction> {
    if cfg.diagnostics.test_functions.is_empty() {
        vec![BumpTestFunction::builtin(cfg.solver.t_end, cfg.diagnostics.compact_set)]
    } else {
        cfg.diagnostics.test_functions.clone()
    }
}

#[derive(Serialize)]
struct DiagnosticsRow {
    sample: u64,
    t: f64,
    energy: f64,
    dissipation: f64,
    invariant_excess: f64,
    min_density: f64,
    high_order_energy: f64,
}

#[derive(Serialize)]
struct BalanceRow {
    sample: u64,
    t: f64,
    energy: f64,
    dissipation: f64,
    stochastic: f64,
    ito: f64,
    residual: f64,
}

#[derive(Serialize)]
struct MomentsRow {
    sample: u64,
    m_p: f64,
    m_u3: f64,
    m_gamma_theta: Option<f64>,
}

#[derive(Serialize)]
struct EnsembleMomentRow {
    quantity: &'static str,
    p: f64,
    mean: f64,
    ci_low: f64,
    ci_high: f64,
}

#[derive(Serialize)]
struct ResidualRow {
    sample: u64,
    entropy: String,
    test_function: usize,
    s: f64,
    transport: f64,
    stochastic: f64,
    ito: f64,
    viscous: f64,
    viscous_abs: f64,
}

#[derive(Serialize)]
struct StatsRow {
    sample: u64,
    status: &'static str,
    steps: Option<usize>,
    dt_min: Option<f64>,
    dt_max: Option<f64>,
    min_rho: Option<f64>,
    min_rho_t: Option<f64>,
    error: String,
}

#[derive(Serialize)]
struct SimulateReport {
    epsilon: f64,
    rho_inf: f64,
    invariant_region_h: Option<f64>,
    samples: usize,
    failed: usize,
    max_invariant_excess: f64,
    max_abs_energy_residual: f64,
    energy_nonincreasing: bool,
    min_density: f64,
    entropy_residuals: Vec<ResidualRow>,
}

/// Per-sample products shared by `simulate` and `sweep-epsilon`.
struct SampleSummary {
    report: diagnostics::DiagnosticsReport,
    balance: diagnostics::BalanceReport,
}

fn summarize(run: &ResolvedRun, cfg: &RunConfig, out: &SampleOutput) -> Result<SampleSummary> {
    let report = diagnostics::diagnostics_report(
        &out.trajectory,
        &run.law,
        run.rho_inf,
        run.invariant_region_h(),
        Some(&out.energy),
        cfg.diagnostics.compact_set,
    )?;
    let balance = diagnostics::energy_balance_check(&out.trajectory, &run.law, run.rho_inf, Some(&out.energy))?;
    Ok(SampleSummary { report, balance })
}

fn ensemble_moment_rows(cfg: &RunConfig, sums: &[SampleSummary]) -> Result<Vec<EnsembleMomentRow>> {
    let mut rows = Vec::new();
    if sums.len() < 2 {
        return Ok(rows);
    }
    let mp: Vec<f64> = sums.iter().map(|s| s.report.moments.m_p).collect();
    let mu: Vec<f64> = sums.iter().map(|s| s.report.moments.m_u3).collect();
    for &p in &cfg.diagnostics.moments {
        for (name, xs) in [("m_p", &mp), ("m_u3", &mu)] {
            let e = diagnostics::ensemble_moments(xs, p)?;
            rows.push(EnsembleMomentRow { quantity: name, p, mean: e.mean, ci_low: e.ci_low, ci_high: e.ci_high });
        }
    }
    Ok(rows)
}

fn label_sample(eps: Option<f64>, sample: u64) -> String {
    match eps {
        Some(e) => format!("epsilon {e} sample {sample}"),
        None => format!("sample {sample}"),
    }
}

pub fn cmd_simulate(opts: &Options) -> std::result::Result<String, CommandError> {
    let cfg = load_checked(opts)?;
    let dir = output_dir(opts, cfg.output_dir.as_deref());
    let wrap = with_dir(&dir);
    prepare_output(&dir, &opts.config).map_err(&wrap)?;
    let run = cfg.resolve(None).map_err(&wrap)?;
    let tests = test_functions(&cfg);
    let results = run::simulate_ensemble(&run, cfg.seed, cfg.samples, opts.jobs, &cfg.diagnostics.entropies, &tests)
        .map_err(&wrap)?;

    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir).map_err(|e| wrap(e.into()))?;
    let mut files = vec![
        "config.toml".to_string(),
        "VERSION".into(),
        "diagnostics.csv".into(),
        "energy_balance.csv".into(),
        "moments.csv".into(),
        "entropy_residuals.csv".into(),
        "run_stats.csv".into(),
        "report.json".into(),
        "trajectories.json".into(),
    ];
    let mut failures = Vec::new();
    let mut sums = Vec::new();
    let mut entries = Vec::new();
    let (mut diag_rows, mut bal_rows, mut mom_rows, mut res_rows, mut stat_rows) =
        (vec![], vec![], vec![], vec![], vec![]);
    for (sample, r) in results.into_iter().enumerate() {
        let sample = sample as u64;
        let out = match r {
            Ok(o) => o,
            Err(e) => {
                stat_rows.push(StatsRow {
                    sample,
                    status: "failed",
                    steps: None,
                    dt_min: None,
                    dt_max: None,
                    min_rho: None,
                    min_rho_t: None,
                    error: e.to_string(),
                });
                failures.push((label_sample(None, sample), e));
                continue;
            }
        };
        let prefix = format!("s{sample:04}");
        let mut entry = io::write_trajectory_frames(&frames_dir, &prefix, sample, &out.trajectory).map_err(&wrap)?;
        for f in &mut entry.frames {
            files.push(format!("frames/{f}"));
            *f = format!("frames/{f}");
        }
        entries.push(entry);
        let final_name = format!("final_{prefix}.csv");
        io::write_state_csv(&dir.join(&final_name), &out.trajectory.grid, out.trajectory.final_state())
            .map_err(&wrap)?;
        files.push(final_name);
        let st = out.trajectory.stats;
        stat_rows.push(StatsRow {
            sample,
            status: "ok",
            steps: Some(st.steps),
            dt_min: Some(st.dt_min),
            dt_max: Some(st.dt_max),
            min_rho: Some(st.min_rho),
            min_rho_t: Some(st.min_rho_t),
            error: String::new(),
        });
        for lr in &out.residuals {
            let r = lr.residual;
            res_rows.push(ResidualRow {
                sample,
                entropy: lr.entropy.clone(),
                test_function: lr.test_function,
                s: r.s,
                transport: r.transport,
                stochastic: r.stochastic,
                ito: r.ito,
                viscous: r.viscous,
                viscous_abs: r.viscous_abs,
            });
        }
        let sum = match summarize(&run, &cfg, &out) {
            Ok(s) => s,
            Err(e) => {
                failures.push((label_sample(None, sample), e));
                continue;
            }
        };
        for row in &sum.report.rows {
            diag_rows.push(DiagnosticsRow {
                sample,
                t: row.t,
                energy: row.energy,
                dissipation: row.dissipation,
                invariant_excess: row.invariant_excess,
                min_density: row.min_density,
                high_order_energy: row.high_order_energy,
            });
        }
        let b = &sum.balance;
        for k in 0..b.times.len() {
            bal_rows.push(BalanceRow {
                sample,
                t: b.times[k],
                energy: b.energy[k],
                dissipation: b.dissipation[k],
                stochastic: b.stochastic[k],
                ito: b.ito[k],
                residual: b.residual[k],
            });
        }
        let m = sum.report.moments;
        mom_rows.push(MomentsRow { sample, m_p: m.m_p, m_u3: m.m_u3, m_gamma_theta: m.m_gamma_theta });
        sums.push(sum);
    }

    io::write_csv(&dir.join("diagnostics.csv"), &diag_rows).map_err(&wrap)?;
    io::write_csv(&dir.join("energy_balance.csv"), &bal_rows).map_err(&wrap)?;
    io::write_csv(&dir.join("moments.csv"), &mom_rows).map_err(&wrap)?;
    io::write_csv(&dir.join("entropy_residuals.csv"), &res_rows).map_err(&wrap)?;
    io::write_csv(&dir.join("run_stats.csv"), &stat_rows).map_err(&wrap)?;
    let ens = ensemble_moment_rows(&cfg, &sums).map_err(&wrap)?;
    if !ens.is_empty() {
        io::write_csv(&dir.join("ensemble_moments.csv"), &ens).map_err(&wrap)?;
        files.push("ensemble_moments.csv".into());
    }
    io::write_json(&dir.join("trajectories.json"), &TrajectoryManifest { grid: run.grid, seed: cfg.seed, entries })
        .map_err(&wrap)?;
    let report = SimulateReport {
        epsilon: run.solver.epsilon,
        rho_inf: run.rho_inf,
        invariant_region_h: run.invariant_region_h(),
        samples: cfg.samples,
        failed: failures.len(),
        max_invariant_excess: sums.iter().map(|s| s.report.max_invariant_excess).fold(0.0, f64::max),
        max_abs_energy_residual: sums.iter().map(|s| s.balance.max_abs_residual).fold(0.0, f64::max),
        energy_nonincreasing: sums.iter().all(|s| s.balance.energy_nonincreasing),
        min_density: sums
            .iter()
            .flat_map(|s| s.report.rows.iter().map(|r| r.min_density))
            .fold(f64::INFINITY, f64::min),
        entropy_residuals: res_rows,
    };
    io::write_json(&dir.join("report.json"), &report).map_err(&wrap)?;
    write_manifest(&dir, Command::Simulate, cfg.seed, cfg.samples, files).map_err(&wrap)?;

    if let Some((_, first)) = failures.first() {
        return Err(CommandError { error: first.clone(), failures, output_dir: Some(dir.clone()) });
    }
    Ok(format!(
        "simulate: {} sample(s) at epsilon = {} written to {}",
        cfg.samples,
        run.solver.epsilon,
        dir.display()
    ))
}

fn sweep_epsilons(cfg: &RunConfig) -> Vec<f64> {
    cfg.sweep.as_ref().map(|s| s.epsilons.clone()).unwrap_or_else(|| vec![cfg.solver.epsilon])
}

fn default_cells(cfg: &RunConfig) -> CellSpec {
    cfg.sweep.as_ref().and_then(|s| s.cells).unwrap_or(CellSpec {
        t_range: (0.0, cfg.solver.t_end),
        x_range: cfg.diagnostics.compact_set,
        n_t: 8,
        n_x: 8,
    })
}

fn tartar_specs(cfg: &RunConfig) -> (EntropySpec, EntropySpec) {
    match &cfg.sweep {
        Some(s) => s.tartar.clone(),
        None => (
            EntropySpec::CompactBump { center: -0.5, width: 1.0 },
            EntropySpec::CompactBump { center: 0.5, width: 1.0 },
        ),
    }
}

#[derive(Serialize)]
struct YoungRow {
    cell: usize,
    ti: usize,
    xi: usize,
    epsilon: f64,
    residual: Option<f64>,
    variance: f64,
}

#[derive(Serialize)]
struct ConcentrationRow {
    cell: usize,
    slope: Option<f64>,
}

/// Per-ε Young-measure analysis results.
struct YoungAnalysis {
    rows: Vec<YoungRow>,
    max_residual: BTreeMap<usize, Option<f64>>,
    mean_trace: BTreeMap<usize, f64>,
    concentration: Vec<ConcentrationRow>,
}

fn analyse_measures(law: &PressureLaw, measures: &[(usize, EmpiricalYoungMeasure)], specs: &(EntropySpec, EntropySpec)) -> Result<YoungAnalysis> {
    let kernel = EntropyKernel::for_law(law).ok();
    let mut rows = Vec::new();
    let mut max_residual = BTreeMap::new();
    let mut mean_trace = BTreeMap::new();
    for (idx, m) in measures {
        let residuals = match &kernel {
            Some(k) => Some(young_measure::tartar_residual(m, k, &specs.0, &specs.1)?),
            None => None,
        };
        let mut traces = Vec::with_capacity(m.atoms.len());
        for (c, atoms) in m.atoms.iter().enumerate() {
            let v = young_measure::variance_trace(atoms);
            traces.push(v);
            rows.push(YoungRow {
                cell: c,
                ti: c / m.cells.n_x,
                xi: c % m.cells.n_x,
                epsilon: m.epsilon,
                residual: residuals.as_ref().map(|r| r[c]),
                variance: v,
            });
        }
        max_residual.insert(*idx, residuals.map(|r| r.iter().fold(0.0f64, |a, v| a.max(v.abs()))));
        mean_trace.insert(*idx, traces.iter().sum::<f64>() / traces.len() as f64);
    }
    let concentration = if measures.len() >= 2 {
        let ms: Vec<EmpiricalYoungMeasure> = measures.iter().map(|(_, m)| m.clone()).collect();
        let rep = young_measure::concentration_metric(&ms)?;
        rep.slopes.into_iter().enumerate().map(|(cell, slope)| ConcentrationRow { cell, slope }).collect()
    } else {
        vec![]
    };
    Ok(YoungAnalysis { rows, max_residual, mean_trace, concentration })
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    rho_inf: f64,
    samples_ok: usize,
    samples_failed: usize,
    e_max: Option<f64>,
    d_total: Option<f64>,
    m_p: Option<f64>,
    m_u3: Option<f64>,
    max_invariant_excess: Option<f64>,
    max_tartar_residual: Option<f64>,
    concentration_trace: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn cmd_sweep_epsilon(opts: &Options) -> std::result::Result<String, CommandError> {
    let cfg = load_checked(opts)?;
    let dir = output_dir(opts, cfg.output_dir.as_deref());
    let wrap = with_dir(&dir);
    prepare_output(&dir, &opts.config).map_err(&wrap)?;
    let epsilons = sweep_epsilons(&cfg);
    let runs: Vec<ResolvedRun> = epsilons.iter().map(|&e| cfg.resolve(Some(e))).collect::<Result<_>>().map_err(&wrap)?;
    let tests = test_functions(&cfg);
    let samples = cfg.samples;
    let outputs = run::run_tasks(epsilons.len() * samples, opts.jobs, |task| {
        let (ei, s) = (task / samples, task % samples);
        run::simulate_sample(
            &runs[ei],
            NoiseKey { seed: cfg.seed, sample: s as u64 },
            &cfg.diagnostics.entropies,
            &tests,
        )
    })
    .map_err(&wrap)?;

    let mut files = vec![
        "config.toml".to_string(),
        "VERSION".into(),
        "summary.csv".into(),
        "young_measure.csv".into(),
        "trajectories.json".into(),
    ];
    let mut failures = Vec::new();
    let mut entries = Vec::new();
    let mut per_eps: Vec<Vec<SampleSummary>> = (0..epsilons.len()).map(|_| vec![]).collect();
    let mut trajectories: Vec<Vec<svv_core::solver::Trajectory>> = (0..epsilons.len()).map(|_| vec![]).collect();
    let mut n_failed = vec![0usize; epsilons.len()];
    for (task, r) in outputs.into_iter().enumerate() {
        let (ei, s) = (task / samples, (task % samples) as u64);
        let res = r.and_then(|out| {
            let sum = summarize(&runs[ei], &cfg, &out)?;
            Ok((out, sum))
        });
        match res {
            Ok((out, sum)) => {
                let sub = format!("eps_{ei:02}");
                let sub_dir = dir.join(&sub);
                fs::create_dir_all(&sub_dir).map_err(|e| wrap(e.into()))?;
                let mut entry = io::write_trajectory_frames(&sub_dir, &format!("s{s:04}"), s, &out.trajectory)
                    .map_err(&wrap)?;
                for f in &mut entry.frames {
                    *f = format!("{sub}/{f}");
                    files.push(f.clone());
                }
                entries.push(entry);
                per_eps[ei].push(sum);
                trajectories[ei].push(out.trajectory);
            }
            Err(e) => {
                n_failed[ei] += 1;
                failures.push((label_sample(Some(epsilons[ei]), s), e));
            }
        }
    }

    let cells = default_cells(&cfg);
    let mut measures = Vec::new();
    for (ei, trs) in trajectories.iter().enumerate() {
        if trs.is_empty() {
            continue;
        }
        let refs: Vec<&svv_core::solver::Trajectory> = trs.iter().collect();
        match young_measure::build_measure(&refs, cells) {
            Ok(m) => measures.push((ei, m)),
            Err(e) => failures.push((format!("epsilon {} young measure", epsilons[ei]), e)),
        }
    }
    let analysis = analyse_measures(&runs[0].law, &measures, &tartar_specs(&cfg)).map_err(&wrap)?;
    io::write_csv(&dir.join("young_measure.csv"), &analysis.rows).map_err(&wrap)?;
    if !analysis.concentration.is_empty() {
        io::write_csv(&dir.join("concentration.csv"), &analysis.concentration).map_err(&wrap)?;
        files.push("concentration.csv".into());
    }

    let rows: Vec<SweepRow> = epsilons
        .iter()
        .enumerate()
        .map(|(ei, &eps)| {
            let sums = &per_eps[ei];
            SweepRow {
                epsilon: eps,
                rho_inf: runs[ei].rho_inf,
                samples_ok: sums.len(),
                samples_failed: n_failed[ei],
                e_max: mean(sums.iter().map(|s| s.balance.energy.iter().cloned().fold(f64::MIN, f64::max))),
                d_total: mean(sums.iter().map(|s| *s.balance.dissipation.last().unwrap_or(&0.0))),
                m_p: mean(sums.iter().map(|s| s.report.moments.m_p)),
                m_u3: mean(sums.iter().map(|s| s.report.moments.m_u3)),
                max_invariant_excess: (!sums.is_empty())
                    .then(|| sums.iter().map(|s| s.report.max_invariant_excess).fold(0.0, f64::max)),
                max_tartar_residual: analysis.max_residual.get(&ei).copied().flatten(),
                concentration_trace: analysis.mean_trace.get(&ei).copied(),
            }
        })
        .collect();
    io::write_csv(&dir.join("summary.csv"), &rows).map_err(&wrap)?;
    io::write_json(&dir.join("trajectories.json"), &TrajectoryManifest { grid: runs[0].grid, seed: cfg.seed, entries })
        .map_err(&wrap)?;
    write_manifest(&dir, Command::SweepEpsilon, cfg.seed, samples, files).map_err(&wrap)?;

    if let Some((_, first)) = failures.first() {
        return Err(CommandError { error: first.clone(), failures, output_dir: Some(dir.clone()) });
    }
    Ok(format!(
        "sweep-epsilon: {} viscosities x {} sample(s) written to {}",
        epsilons.len(),
        samples,
        dir.display()
    ))
}

/// Minimal configuration accepted by `entropy-table`; other blocks are ignored.
#[derive(Debug, Deserialize)]
struct TableFile {
    law: LawConfig,
    entropy_table: Option<EntropyTableConfig>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct TableRow {
    rho: f64,
    u: f64,
    eta: f64,
    q: f64,
    deta_dm: f64,
    d2eta_dm2: f64,
}

fn linspace((a, b, n): (f64, f64, usize)) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn cmd_entropy_table(opts: &Options) -> Result<String> {
    let text = fs::read_to_string(&opts.config)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", opts.config.display())))?;
    let tf: TableFile = toml::from_str(&text).map_err(|e| Error::config(format!("invalid configuration: {}", e.message().trim())))?;
    let law = tf.law.build()?;
    let table = tf.entropy_table.ok_or_else(|| Error::config("entropy_table block is required"))?;
    table.spec.validate()?;
    let (r0, r1, nr) = table.rho;
    let (u0, u1, nu) = table.u;
    if !(r0 >= 0.0 && r0 <= r1 && r1.is_finite()) || nr == 0 {
        return Err(Error::config("entropy_table.rho must be (min >= 0, max >= min, count >= 1)"));
    }
    if !(u0 <= u1 && u0.is_finite() && u1.is_finite()) || nu == 0 {
        return Err(Error::config("entropy_table.u must be (min, max >= min, count >= 1)"));
    }
    let kernel = EntropyKernel::for_law(&law)?;
    let dir = output_dir(opts, tf.output_dir.as_deref());
    prepare_output(&dir, &opts.config)?;
    let mut rows = Vec::with_capacity(nr * nu);
    for &rho in &linspace(table.rho) {
        for &u in &linspace(table.u) {
            let v = kernel.pair_normalized(&table.spec, rho, rho * u)?;
            rows.push(TableRow { rho, u, eta: v.eta, q: v.q, deta_dm: v.deta_dm, d2eta_dm2: v.d2eta_dm2 });
        }
    }
    io::write_csv(&dir.join("entropy_table.csv"), &rows)?;
    write_manifest(
        &dir,
        Command::EntropyTable,
        0,
        0,
        vec!["config.toml".into(), "VERSION".into(), "entropy_table.csv".into()],
    )?;
    Ok(format!("entropy-table: {} rows written to {}", rows.len(), dir.display()))
}

pub fn cmd_young_measure(opts: &Options) -> Result<String> {
    let cfg = load_checked(opts)?;
    let dir = output_dir(opts, cfg.output_dir.as_deref());
    let manifest_path = opts.manifest.clone().unwrap_or_else(|| dir.join("trajectories.json"));
    let manifest = TrajectoryManifest::load(&manifest_path)?;
    let base = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    fs::create_dir_all(&dir)?;
    if fs::canonicalize(dir.join("config.toml")).ok() != fs::canonicalize(&opts.config).ok() {
        prepare_output(&dir, &opts.config)?;
    }
    let mut groups: Vec<(f64, Vec<&TrajectoryEntry>)> = Vec::new();
    for e in &manifest.entries {
        match groups.iter_mut().find(|(eps, _)| *eps == e.epsilon) {
            Some((_, v)) => v.push(e),
            None => groups.push((e.epsilon, vec![e])),
        }
    }
    if groups.is_empty() {
        return Err(Error::config(format!("{} lists no trajectories", manifest_path.display())));
    }
    let cells = default_cells(&cfg);
    let mut measures = Vec::new();
    for (idx, (_, entries)) in groups.iter().enumerate() {
        let trs = entries.iter().map(|e| io::read_trajectory(&base, e)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = trs.iter().collect();
        measures.push((idx, young_measure::build_measure(&refs, cells)?));
    }
    let law = cfg.law.build()?;
    let analysis = analyse_measures(&law, &measures, &tartar_specs(&cfg))?;
    io::write_csv(&dir.join("young_measure.csv"), &analysis.rows)?;
    let mut files = vec!["config.toml".to_string(), "VERSION".into(), "young_measure.csv".into()];
    if !analysis.concentration.is_empty() {
        io::write_csv(&dir.join("concentration.csv"), &analysis.concentration)?;
        files.push("concentration.csv".into());
    }
    if opts.manifest.is_some() {
        write_manifest(&dir, Command::YoungMeasure, manifest.seed, 0, files)?;
    }
    Ok(format!("young-measure: {} viscosities, {} rows written to {}", groups.len(), analysis.rows.len(), dir.display()))
}

#[derive(Serialize)]
struct CheckResult {
    name: &'static str,
    passed: bool,
    detail: serde_json::Value,
}

#[derive(Serialize)]
struct ValidateReport {
    passed: bool,
    checks: Vec<CheckResult>,
}

/// Relative error of the Goursat table against the quadrature pair of `½ s|s|`.
pub fn goursat_cross_check(law: &PressureLaw, rho_max: f64, resolution: usize) -> Result<f64> {
    let kernel = EntropyKernel::for_law(law)?;
    let table = goursat_solve(law, rho_max, resolution)?;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (_, _, (rho, u, eta, _)) in table.nodes() {
        let oracle = kernel.pair_normalized(&EntropySpec::SignedQuadratic, rho, rho * u)?.eta;
        worst = worst.max((eta - oracle).abs());
        scale = scale.max(oracle.abs());
    }
    Ok(worst / scale)
}

const GOURSAT_CHECK_TOL: f64 = 1e-3;

pub fn cmd_validate(opts: &Options) -> std::result::Result<String, CommandError> {
    let cfg = load_checked(opts)?;
    let dir = output_dir(opts, cfg.output_dir.as_deref());
    let wrap = with_dir(&dir);
    let run = cfg.resolve(None).map_err(&wrap)?;
    let mut checks = Vec::new();

    let densities: Vec<f64> = (0..=60).map(|i| 10f64.powf(-3.0 + 0.1 * i as f64)).collect();
    let bounds = pressure_law::verify_bounds(&run.law, &densities, run.rho_inf.max(1e-3)).map_err(&wrap)?;
    checks.push(CheckResult {
        name: "pressure_law_bounds",
        passed: bounds.all_satisfied(),
        detail: serde_json::to_value(&bounds).unwrap_or_default(),
    });

    if run.noise.is_silent() {
        checks.push(CheckResult { name: "noise_growth", passed: true, detail: "no noise".into() });
    } else {
        let states: Vec<(f64, f64, f64)> = (0..run.grid.n)
            .map(|i| (run.grid.x(i), run.initial.rho[i], run.initial.mom[i]))
            .collect();
        let a2 = run.noise.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        let b0 = a2 * run.noise.profile.max_abs();
        let g = noise::growth_check(&run.noise, &run.law, &states, b0).map_err(&wrap)?;
        checks.push(CheckResult {
            name: "noise_growth",
            passed: g.passed,
            detail: serde_json::to_value(&g).unwrap_or_default(),
        });
    }

    match goursat_cross_check(&run.law, 4.0, 128) {
        Ok(err) => checks.push(CheckResult {
            name: "goursat_vs_quadrature",
            passed: err <= GOURSAT_CHECK_TOL,
            detail: serde_json::json!({ "relative_error": err, "tolerance": GOURSAT_CHECK_TOL, "resolution": 128 }),
        }),
        Err(Error::Unsupported(m)) => checks.push(CheckResult {
            name: "goursat_vs_quadrature",
            passed: true,
            detail: serde_json::json!({ "skipped": m }),
        }),
        Err(e) => return Err(wrap(e)),
    }

    let report = ValidateReport { passed: checks.iter().all(|c| c.passed), checks };
    prepare_output(&dir, &opts.config).map_err(&wrap)?;
    io::write_json(&dir.join("validate.json"), &report).map_err(&wrap)?;
    write_manifest(
        &dir,
        Command::Validate,
        cfg.seed,
        cfg.samples,
        vec!["config.toml".into(), "VERSION".into(), "validate.json".into()],
    )
    .map_err(&wrap)?;
    if !report.passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        return Err(wrap(Error::config(format!("validation checks failed: {}", failed.join(", ")))));
    }
    Ok(format!("validate: {} checks passed", report.checks.len()))
}
