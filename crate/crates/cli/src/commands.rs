use serde::Serialize;
use sparsemorse_core::io::{read_instance, ToleranceOverrides};
use sparsemorse_core::sampling::{gaussian_vec, trial_rng};
use sparsemorse_core::stability::default_epsilon;
use sparsemorse_core::{
    check_s_regularity, enumerate_stationary_with, iht_solve, probe_strong_stability,
    summarize_runs, sweep_with_table, EnumerateOptions, IhtComparison, IhtResult, Instance,
    LandscapeReport, PerturbationMode, StabilityProbeConfig, StabilityReport, SubspaceTable,
    SupportSet,
};

use crate::output::{emit_intervals_csv, emit_json, emit_points_csv, CliError, CliResult};
use crate::{GenericArgs, IhtArgs, InstanceArgs, ProbeArgs, TableArgs};

fn check_threads(threads: usize) -> CliResult {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(())
}

fn load(args: &InstanceArgs) -> CliResult<Instance> {
    check_threads(args.threads)?;
    let mut inst = read_instance(&args.instance)?;
    let overrides = ToleranceOverrides {
        zero_tol: args.zero_tol,
        stat_tol: args.stat_tol,
        rank_tol: args.rank_tol,
        dedupe_tol: None,
    };
    inst.set_tolerances(overrides.apply(*inst.tol()))?;
    Ok(inst)
}

fn landscape(inst: &Instance, threads: usize) -> CliResult<LandscapeReport> {
    let opts = EnumerateOptions {
        threads,
        ..Default::default()
    };
    Ok(enumerate_stationary_with(inst, &opts)?)
}

pub fn analyze(args: &TableArgs) -> CliResult {
    let inst = load(&args.common)?;
    let report = landscape(&inst, args.common.threads)?;
    if args.csv {
        emit_points_csv(&report, &args.common.output)
    } else {
        emit_json(&report, &args.common.output)
    }
}

#[derive(Serialize)]
struct RegularityReport {
    s_regular: bool,
    witness: Option<SupportSet>,
    s: usize,
    rank_tol: f64,
}

pub fn regularity(args: &InstanceArgs) -> CliResult {
    let inst = load(args)?;
    let (s_regular, witness) = check_s_regularity(inst.a(), inst.s(), inst.rank_tol())?;
    let report = RegularityReport {
        s_regular,
        witness,
        s: inst.s(),
        rank_tol: inst.rank_tol(),
    };
    emit_json(&report, &args.output)
}

pub fn sweep(args: &TableArgs) -> CliResult {
    let inst = load(&args.common)?;
    let report = landscape(&inst, args.common.threads)?;
    let table = SubspaceTable::with_threads(&inst, args.common.threads)?;
    let sweep = sweep_with_table(&table, &report)?;
    if args.csv {
        emit_intervals_csv(&sweep, &args.common.output)
    } else {
        emit_json(&sweep, &args.common.output)
    }
}

#[derive(Serialize)]
struct ProbeEntry {
    index: usize,
    x: Vec<f64>,
    support: SupportSet,
    kind: &'static str,
    #[serde(flatten)]
    report: StabilityReport,
}

#[derive(Serialize)]
struct ProbeOutput {
    mode: &'static str,
    seed: u64,
    probes: Vec<ProbeEntry>,
}

pub fn probe(args: &ProbeArgs) -> CliResult {
    let inst = load(&args.common)?;
    let report = landscape(&inst, args.common.threads)?;
    let indices: Vec<usize> = match args.point {
        Some(i) if i >= report.points.len() => {
            return Err(CliError::Usage(format!(
                "--point {i} out of range: the instance has {} stationary point(s)",
                report.points.len()
            )))
        }
        Some(i) => vec![i],
        None => (0..report.points.len()).collect(),
    };
    let epsilon = args.epsilon.unwrap_or_else(|| default_epsilon(&report));
    let mut cfg = StabilityProbeConfig::new(epsilon, args.delta, args.trials, args.seed);
    cfg.mode = if args.paper_mode {
        PerturbationMode::UniformShift
    } else {
        PerturbationMode::Gaussian
    };
    cfg.threads = args.common.threads;
    cfg.validate()?;

    let probes = indices
        .into_iter()
        .map(|i| {
            let p = &report.points[i];
            Ok(ProbeEntry {
                index: i,
                x: p.x().to_vec(),
                support: p.support().clone(),
                kind: p.kind.as_str(),
                report: probe_strong_stability(&inst, p, &cfg)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let out = ProbeOutput {
        mode: if args.paper_mode {
            "uniform_shift"
        } else {
            "gaussian"
        },
        seed: args.seed,
        probes,
    };
    emit_json(&out, &args.common.output)
}

pub fn generic(args: &GenericArgs) -> CliResult {
    check_threads(args.threads)?;
    let report = sparsemorse_core::enumeration::run_genericity_experiment_threaded(
        args.m,
        args.n,
        args.s,
        args.trials,
        args.seed,
        args.threads,
    )?;
    emit_json(&report, &args.output)
}

#[derive(Serialize)]
struct IhtOutput {
    starts: &'static str,
    seed: Option<u64>,
    max_iter: usize,
    step_tol: f64,
    runs: Vec<IhtResult>,
    comparison: IhtComparison,
}

pub fn iht(args: &IhtArgs) -> CliResult {
    let inst = load(&args.common)?;
    if !(args.step_tol >= 0.0 && args.step_tol.is_finite()) {
        return Err(CliError::Usage(
            "--step-tol must be finite and nonnegative".into(),
        ));
    }
    let starts: Vec<Vec<f64>> = match (args.trials, args.seed) {
        (Some(k), Some(seed)) => (0..k as u64)
            .map(|t| gaussian_vec(&mut trial_rng(seed, t), inst.n()))
            .collect(),
        _ => vec![vec![0.0; inst.n()]],
    };
    let runs = starts
        .iter()
        .map(|x0| iht_solve(&inst, x0, args.max_iter, args.step_tol))
        .collect::<Result<Vec<_>, _>>()?;
    let report = landscape(&inst, args.common.threads)?;
    let out = IhtOutput {
        starts: if args.trials.is_some() {
            "gaussian"
        } else {
            "zero"
        },
        seed: args.trials.and(args.seed),
        max_iter: args.max_iter,
        step_tol: args.step_tol,
        comparison: summarize_runs(&report, &runs),
        runs,
    };
    emit_json(&out, &args.common.output)
}
