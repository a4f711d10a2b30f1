use std::fs;
use std::path::Path;

use anyhow::Context;
use ftforge_core::cases::{self, CaseError};
use ftforge_core::dataset::{self, CompleteMode, SuperfluousMode};
use ftforge_core::moea::{self, MoeaConfig, MoeaError, OperatorWeights, ParentStrategy};
use ftforge_core::{parse_ft, serialize_ft, FailureDataset, FaultTree};
use serde::Serialize;

use crate::args::{EvalArgs, GenerateArgs, InferArgs, McsArgs, ParentsArg, SuperfluousArg};
use crate::error::{CliError, CliResult};
use crate::report::{self, Metrics};

pub fn read_ft(path: &Path) -> CliResult<FaultTree> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_ft(&text).with_context(|| format!("{}", path.display())).map_err(CliError::Data)
}

pub fn read_data(path: &Path) -> CliResult<FailureDataset> {
    dataset::read_csv(path).with_context(|| format!("{}", path.display())).map_err(CliError::Data)
}

pub fn load_case(name: &str) -> CliResult<cases::Case> {
    cases::case(name).map_err(|e| match e {
        CaseError::NeedsFile(_) | CaseError::Unknown(_) => {
            CliError::usage(format!("{e} (embedded: {})", cases::EMBEDDED.join(", ")))
        }
        other => CliError::data(other),
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(CliError::Data)
}

/// One probability per event, broadcasting a single value.
pub fn probabilities(p: &[f64], w: usize) -> CliResult<Vec<f64>> {
    match p.len() {
        1 => Ok(vec![p[0]; w]),
        n if n == w => Ok(p.to_vec()),
        n => Err(CliError::usage(format!("expected 1 or {w} probabilities, got {n}"))),
    }
}

pub fn superfluous_mode(arg: SuperfluousArg) -> SuperfluousMode {
    match arg {
        SuperfluousArg::Cross => SuperfluousMode::Cross,
        SuperfluousArg::Sample => SuperfluousMode::Sample,
    }
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    let truth = match (&args.case, &args.ft) {
        (Some(name), _) => load_case(name)?.tree,
        (None, Some(path)) => read_ft(path)?,
        (None, None) => unreachable!("clap requires a tree source"),
    };
    let p = probabilities(&args.prob, truth.universe().len())?;
    let ds = if args.complete {
        let mode = if args.sampled { CompleteMode::Sample { p, max_draws: None } } else { CompleteMode::Exhaustive };
        dataset::generate_complete(&truth, args.seed, &mode, args.cap)
    } else {
        let n = args.points.expect("clap requires -n without --complete");
        if n == 0 {
            return Err(CliError::usage("-n must be at least 1"));
        }
        dataset::generate_dataset(&truth, n, &p, args.seed)
    }
    .map_err(CliError::data)?;
    let ds = dataset::inject_superfluous(&ds, args.superfluous, args.seed, superfluous_mode(args.superfluous_mode))
        .map_err(CliError::data)?;
    dataset::write_csv(&ds, &args.out).with_context(|| format!("cannot write {}", args.out.display()))?;
    eprintln!("wrote {} rows ({} data points) to {}", ds.rows().len(), ds.n_points(), args.out.display());
    Ok(())
}

pub fn mcs(args: &McsArgs) -> CliResult<()> {
    let ds = read_data(&args.data)?;
    if !ds.check_complete() {
        eprintln!("warning: dataset is incomplete; cut sets may not be minimal for the system");
    }
    let m = ds.extract_mcs();
    if m.is_empty() {
        eprintln!("warning: no rows with TE = 1; there are no cut sets");
    } else {
        crate::emit(format_args!("{}", m.format()));
    }
    if let Some(path) = &args.matrix_out {
        write_file(path, &report::matrix_csv(&m))?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    let ft = read_ft(&args.ft)?;
    let ds = read_data(&args.data)?;
    let m = report::full_metrics(&ft, &ds, None, None).map_err(CliError::data)?;
    crate::emit(format_args!("{}", serde_json::to_string(&m).expect("plain struct")));
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary {
    setup: String,
    parents: &'static str,
    ps: usize,
    ng: usize,
    uc: usize,
    seed: u64,
    offspring_factor: usize,
    allow_duplicates: bool,
    termination: &'static str,
    generations: usize,
    data_cut_sets: usize,
    pareto_size: usize,
    best: BestSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
struct BestSummary {
    encoding: String,
    connected_bes: Vec<String>,
    /// Values of the search objectives; inactive ones hold 1.
    objectives: [f64; 3],
    metrics: Metrics,
}

pub fn config_error(e: MoeaError) -> CliError {
    match e {
        MoeaError::Config(msg) => CliError::Usage(msg),
        other => CliError::data(other),
    }
}

pub fn weights(w: Option<&[f64]>) -> CliResult<OperatorWeights> {
    match w {
        None => Ok(OperatorWeights::default()),
        Some(w) => {
            let arr: [f64; 7] =
                w.try_into().map_err(|_| CliError::usage(format!("--weights needs 7 values, got {}", w.len())))?;
            Ok(OperatorWeights(arr))
        }
    }
}

pub fn infer(args: &InferArgs) -> CliResult<()> {
    let ds = match (&args.data, &args.case) {
        (Some(path), _) => read_data(path)?,
        (None, Some(name)) => load_case(name)?.complete,
        (None, None) => unreachable!("clap requires an input"),
    };
    let parents = match args.parents {
        ParentsArg::A => ParentStrategy::OrAnd,
        ParentsArg::B => ParentStrategy::Dnf,
        ParentsArg::C => ParentStrategy::Given(read_ft(args.parent_ft.as_deref().expect("clap requires --parent-ft"))?),
    };
    let config = MoeaConfig {
        ps: args.ps,
        ng: args.ng,
        uc: args.uc,
        setup: args.mof,
        parents,
        seed: args.seed,
        dnf_product_cap: args.dnf_cap,
        operator_weights: weights(args.weights.as_deref())?,
        offspring_factor: args.offspring_factor,
        allow_duplicates: args.allow_duplicates,
    };
    config.validate().map_err(config_error)?;

    let verbose = args.verbose;
    let result = moea::run_with_observer(&config, &ds, |g| {
        if verbose {
            eprintln!(
                "gen {:>4}  best phi_s={} phi_d={:.6} phi_c={:.6}  front={} pool={}",
                g.generation, g.best_phi_s, g.best_phi_d, g.best_phi_c, g.front1_size, g.pool_size
            );
        }
    })
    .map_err(config_error)?;

    let m_d = result.data_mcs.clone().unwrap_or_else(|| ds.extract_mcs());
    let metrics = report::full_metrics(&result.best.ft, &ds, Some(&m_d), None).map_err(CliError::data)?;
    let best = &result.best;
    let o = best.objectives;
    let summary = Summary {
        setup: config.setup.to_string(),
        parents: config.parents.label(),
        ps: config.ps,
        ng: config.ng,
        uc: config.uc,
        seed: config.seed,
        offspring_factor: config.offspring_factor,
        allow_duplicates: config.allow_duplicates,
        termination: result.termination.as_str(),
        generations: result.generations.len(),
        data_cut_sets: m_d.len(),
        pareto_size: result.pareto_front.len(),
        best: BestSummary {
            encoding: best.encoding.clone(),
            connected_bes: best.ft.connected_unique_bes().into_iter().map(String::from).collect(),
            objectives: [o.phi_s as f64, o.phi_d, o.phi_c],
            metrics: metrics.clone(),
        },
        elapsed_ms: args.timings.then(|| result.generations.last().map_or(0, |g| g.elapsed_ms)),
    };

    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_file(&dir.join("best.ft"), &(serialize_ft(&best.ft) + "\n"))?;
    write_file(&dir.join("generations.csv"), &report::generations_csv(&result.generations, args.timings))?;
    write_file(&dir.join("pareto.csv"), &report::pareto_csv(&result.pareto_front))?;
    write_file(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary).expect("plain struct") + "\n"))?;

    crate::emit(format_args!(
        "{} after {} generations: phi_s={} phi_d={} phi_c={} delta_be={}",
        result.termination.as_str(),
        result.generations.len(),
        metrics.phi_s,
        metrics.phi_d,
        metrics.phi_c,
        metrics.delta_be
    ));
    crate::emit(format_args!("{}", best.encoding));
    Ok(())
}
