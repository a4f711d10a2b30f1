//! Parameter sweeps over repeated inference runs.
//!
//! A spec names the system (embedded case, tree file or dataset), a base
//! configuration, the values to sweep and the number of replications. Runs
//! are the cartesian product `ps × setup × rho × parents × replication`,
//! numbered in that nesting order. Replication `r` uses seed
//! `master_seed + r`, so every sweep cell sees the same seeds.
//!
//! Results go to `results.csv` in run order. Rows already present are
//! kept and their runs skipped, so an interrupted sweep can be resumed.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use ftforge_core::dataset::{self, CompleteMode, DEFAULT_COMPLETE_CAP};
use ftforge_core::moea::{self, MoeaConfig, ParentStrategy, DEFAULT_OFFSPRING_FACTOR};
use ftforge_core::tree::DEFAULT_PRODUCT_CAP;
use ftforge_core::{FailureDataset, FaultTree, MofSetup};
use serde::Deserialize;

use crate::args::{ExperimentArgs, SuperfluousArg};
use crate::commands::{self, read_data, read_ft};
use crate::error::{CliError, CliResult};
use crate::report;

pub const COLUMNS: [&str; 20] = [
    "run",
    "ps",
    "ng",
    "uc",
    "setup",
    "parents",
    "rho",
    "replication",
    "seed",
    "status",
    "termination",
    "generations",
    "phi_s",
    "phi_d",
    "phi_c",
    "connected_bes",
    "delta_be",
    "wall_ms",
    "best",
    "error",
];

/// Columns that identify a run; a resumed file must agree on them.
const KEY_COLUMNS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ParentLabel {
    #[serde(alias = "a")]
    A,
    #[serde(alias = "b")]
    B,
    #[serde(alias = "c")]
    C,
}

impl ParentLabel {
    fn as_str(self) -> &'static str {
        match self {
            ParentLabel::A => "A",
            ParentLabel::B => "B",
            ParentLabel::C => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    Cross,
    Sample,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Embedded case study.
    pub case: Option<String>,
    /// Ground-truth tree file.
    pub ft: Option<PathBuf>,
    /// Dataset file; when absent the data is generated from the tree.
    pub data: Option<PathBuf>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub generate: GenerateSpec,
    #[serde(default)]
    pub base: BaseSpec,
    pub sweep: Option<SweepSpec>,
}

fn one() -> usize {
    1
}

/// How data is produced from the tree. Without `points` every assignment
/// appears once.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub points: Option<u64>,
    pub p: Option<f64>,
    pub superfluous_mode: Option<RhoMode>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub ps: Option<usize>,
    pub ng: Option<usize>,
    pub uc: Option<usize>,
    pub setup: Option<MofSetup>,
    pub parents: Option<ParentLabel>,
    pub parent_ft: Option<PathBuf>,
    pub rho: Option<usize>,
    pub dnf_cap: Option<usize>,
    pub offspring_factor: Option<usize>,
    pub allow_duplicates: Option<bool>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub ps: Option<Vec<usize>>,
    pub setup: Option<Vec<MofSetup>>,
    pub rho: Option<Vec<usize>>,
    pub parents: Option<Vec<ParentLabel>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub index: usize,
    pub ps: usize,
    pub ng: usize,
    pub uc: usize,
    pub setup: MofSetup,
    pub parents: ParentLabel,
    pub rho: usize,
    pub replication: usize,
    pub seed: u64,
}

impl RunPlan {
    fn key(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            self.ps.to_string(),
            self.ng.to_string(),
            self.uc.to_string(),
            self.setup.to_string(),
            self.parents.as_str().to_string(),
            self.rho.to_string(),
            self.replication.to_string(),
            self.seed.to_string(),
        ]
    }

    fn describe(&self) -> String {
        format!(
            "ps={} setup={} rho={} parents={} seed={}",
            self.ps,
            self.setup,
            self.rho,
            self.parents.as_str(),
            self.seed
        )
    }
}

pub fn parse_spec(text: &str) -> CliResult<ExperimentSpec> {
    let spec: ExperimentSpec =
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid experiment spec: {e}")))?;
    let sources = [spec.case.is_some(), spec.ft.is_some()].iter().filter(|b| **b).count();
    if sources > 1 {
        return Err(CliError::usage("give at most one of `case` and `ft`"));
    }
    if sources == 0 && spec.data.is_none() {
        return Err(CliError::usage("the spec needs `case`, `ft` or `data`"));
    }
    if spec.replications == 0 {
        return Err(CliError::usage("replications must be at least 1"));
    }
    let sweep = spec.sweep.as_ref().ok_or_else(|| CliError::usage("the spec needs a [sweep] table"))?;
    let lists = [
        sweep.ps.as_ref().map(Vec::len),
        sweep.setup.as_ref().map(Vec::len),
        sweep.rho.as_ref().map(Vec::len),
        sweep.parents.as_ref().map(Vec::len),
    ];
    if lists.iter().all(Option::is_none) {
        return Err(CliError::usage("[sweep] must list ps, setup, rho or parents"));
    }
    if lists.contains(&Some(0)) {
        return Err(CliError::usage("sweep lists must not be empty"));
    }
    Ok(spec)
}

/// Every run of the spec, in run order.
pub fn plan(spec: &ExperimentSpec) -> Vec<RunPlan> {
    let base = &spec.base;
    let sweep = spec.sweep.as_ref().expect("validated spec");
    let defaults = MoeaConfig::default();
    let or_base = |v: &Option<Vec<_>>, b| v.clone().unwrap_or_else(|| vec![b]);
    let ps_values = or_base(&sweep.ps, base.ps.unwrap_or(defaults.ps));
    let setups = sweep.setup.clone().unwrap_or_else(|| vec![base.setup.unwrap_or(defaults.setup)]);
    let rhos = or_base(&sweep.rho, base.rho.unwrap_or(0));
    let parents = sweep.parents.clone().unwrap_or_else(|| vec![base.parents.unwrap_or(ParentLabel::A)]);

    let mut runs = Vec::new();
    for &ps in &ps_values {
        for &setup in &setups {
            for &rho in &rhos {
                for &p in &parents {
                    for replication in 0..spec.replications {
                        runs.push(RunPlan {
                            index: runs.len(),
                            ps,
                            ng: base.ng.unwrap_or(defaults.ng),
                            uc: base.uc.unwrap_or(defaults.uc),
                            setup,
                            parents: p,
                            rho,
                            replication,
                            seed: spec.master_seed.wrapping_add(replication as u64),
                        });
                    }
                }
            }
        }
    }
    runs
}

/// Data and reference shared by all runs.
struct Inputs {
    datasets: HashMap<usize, FailureDataset>,
    /// Events the ground truth depends on, when the tree is known.
    reference_bes: Option<usize>,
    parent_ft: Option<FaultTree>,
}

fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn prepare(spec: &ExperimentSpec, runs: &[RunPlan], base_dir: &Path) -> CliResult<Inputs> {
    let (truth, embedded) = match (&spec.case, &spec.ft) {
        (Some(name), _) => {
            let c = commands::load_case(name)?;
            (Some(c.tree), Some(c.complete))
        }
        (None, Some(path)) => (Some(read_ft(&resolve(base_dir, path))?), None),
        (None, None) => (None, None),
    };
    let gen = &spec.generate;
    let base = match (&spec.data, &truth) {
        (Some(path), _) => read_data(&resolve(base_dir, path))?,
        (None, Some(tree)) => match gen.points {
            Some(n) => {
                let p = commands::probabilities(&[gen.p.unwrap_or(0.5)], tree.universe().len())?;
                dataset::generate_dataset(tree, n, &p, spec.master_seed).map_err(CliError::data)?
            }
            None => match embedded {
                Some(ds) => ds,
                None => {
                    dataset::generate_complete(tree, spec.master_seed, &CompleteMode::Exhaustive, DEFAULT_COMPLETE_CAP)
                        .map_err(CliError::data)?
                }
            },
        },
        (None, None) => unreachable!("validated spec"),
    };
    let mode = match gen.superfluous_mode.unwrap_or(RhoMode::Cross) {
        RhoMode::Cross => SuperfluousArg::Cross,
        RhoMode::Sample => SuperfluousArg::Sample,
    };
    let mut datasets = HashMap::new();
    for run in runs {
        if let Entry::Vacant(slot) = datasets.entry(run.rho) {
            let ds = dataset::inject_superfluous(&base, run.rho, spec.master_seed, commands::superfluous_mode(mode))
                .map_err(CliError::data)?;
            slot.insert(ds);
        }
    }
    let parent_ft = match &spec.base.parent_ft {
        Some(path) => Some(read_ft(&resolve(base_dir, path))?),
        None if runs.iter().any(|r| r.parents == ParentLabel::C) => {
            return Err(CliError::usage("parents C needs base.parent_ft"));
        }
        None => None,
    };
    Ok(Inputs { datasets, reference_bes: truth.map(|t| t.connected().len()), parent_ft })
}

fn config_for(run: &RunPlan, spec: &ExperimentSpec, inputs: &Inputs) -> CliResult<MoeaConfig> {
    let base = &spec.base;
    let parents = match run.parents {
        ParentLabel::A => ParentStrategy::OrAnd,
        ParentLabel::B => ParentStrategy::Dnf,
        ParentLabel::C => ParentStrategy::Given(inputs.parent_ft.clone().expect("checked in prepare")),
    };
    let config = MoeaConfig {
        ps: run.ps,
        ng: run.ng,
        uc: run.uc,
        setup: run.setup,
        parents,
        seed: run.seed,
        dnf_product_cap: base.dnf_cap.unwrap_or(DEFAULT_PRODUCT_CAP),
        operator_weights: commands::weights(base.weights.as_deref())?,
        offspring_factor: base.offspring_factor.unwrap_or(DEFAULT_OFFSPRING_FACTOR),
        allow_duplicates: base.allow_duplicates.unwrap_or(false),
    };
    config.validate().map_err(commands::config_error)?;
    Ok(config)
}

/// Executes one run and renders its results row. Failures become rows with
/// status `error`.
fn execute(run: &RunPlan, config: &MoeaConfig, inputs: &Inputs) -> Vec<String> {
    let ds = &inputs.datasets[&run.rho];
    let started = Instant::now();
    let outcome = moea::run(config, ds).map_err(anyhow::Error::from).and_then(|result| {
        let m_d = result.data_mcs.clone().unwrap_or_else(|| ds.extract_mcs());
        let metrics = report::full_metrics(&result.best.ft, ds, Some(&m_d), inputs.reference_bes)?;
        Ok((result, metrics))
    });
    let wall_ms = started.elapsed().as_millis().to_string();
    let mut row = run.key();
    match outcome {
        Ok((result, m)) => row.extend([
            "ok".to_string(),
            result.termination.as_str().to_string(),
            result.generations.len().to_string(),
            m.phi_s.to_string(),
            m.phi_d.to_string(),
            m.phi_c.to_string(),
            result.best.ft.connected().len().to_string(),
            m.delta_be.to_string(),
            wall_ms,
            result.best.encoding,
            String::new(),
        ]),
        Err(e) => {
            row.extend(["error".to_string()]);
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(wall_ms);
            row.push(String::new());
            row.push(format!("{e:#}"));
        }
    }
    row
}

/// Writes rows in run order as they complete, flushing after each one.
struct OrderedWriter {
    out: csv::Writer<File>,
    next: usize,
    pending: BTreeMap<usize, Vec<String>>,
    total: usize,
}

impl OrderedWriter {
    fn push(&mut self, index: usize, row: Vec<String>) -> anyhow::Result<()> {
        self.pending.insert(index, row);
        while let Some(row) = self.pending.remove(&self.next) {
            self.out.write_record(&row)?;
            self.next += 1;
        }
        self.out.flush()?;
        Ok(())
    }
}

/// Rows of an earlier, possibly interrupted, invocation. A trailing
/// partial row is ignored.
fn existing_rows(path: &Path, runs: &[RunPlan]) -> CliResult<BTreeMap<usize, Vec<String>>> {
    let mut rows = BTreeMap::new();
    if !path.exists() {
        return Ok(rows);
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path).context("cannot read results.csv")?;
    let header = reader.headers().context("cannot read results.csv")?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(CliError::data(anyhow::anyhow!("{} has unexpected columns; rerun with --fresh", path.display())));
    }
    for record in reader.records() {
        let Ok(record) = record else { break };
        if record.len() != COLUMNS.len() {
            break;
        }
        let row: Vec<String> = record.iter().map(String::from).collect();
        let index: usize = row[0]
            .parse()
            .map_err(|_| CliError::data(anyhow::anyhow!("bad run index `{}` in {}", row[0], path.display())))?;
        match runs.get(index) {
            Some(run) if run.key() == row[..KEY_COLUMNS] => {
                rows.insert(index, row);
            }
            _ => {
                return Err(CliError::data(anyhow::anyhow!(
                    "{} holds run {index} from a different spec; rerun with --fresh",
                    path.display()
                )))
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub total: usize,
    pub resumed: usize,
    pub failed: usize,
}

pub fn experiment(args: &ExperimentArgs) -> CliResult<Outcome> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("cannot read {}", args.spec.display()))?;
    let spec = parse_spec(&text)?;
    let base_dir = args.spec.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = match (&args.out_dir, &spec.out_dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => resolve(&base_dir, dir),
        (None, None) => base_dir.join("results"),
    };
    run_spec(&spec, &base_dir, &out_dir, args.fresh)
}

pub fn run_spec(spec: &ExperimentSpec, base_dir: &Path, out_dir: &Path, fresh: bool) -> CliResult<Outcome> {
    let runs = plan(spec);
    let inputs = prepare(spec, &runs, base_dir)?;
    let configs: Vec<MoeaConfig> = runs.iter().map(|r| config_for(r, spec, &inputs)).collect::<CliResult<_>>()?;

    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let path = out_dir.join("results.csv");
    let done = if fresh { BTreeMap::new() } else { existing_rows(&path, &runs)? };
    let resumed = done.len();
    let todo: Vec<usize> = (0..runs.len()).filter(|i| !done.contains_key(i)).collect();

    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    out.write_record(COLUMNS).context("cannot write results.csv")?;
    let mut writer = OrderedWriter { out, next: 0, pending: BTreeMap::new(), total: runs.len() };
    for (i, row) in done {
        writer.push(i, row)?;
    }
    if resumed > 0 {
        eprintln!("resuming: {resumed} of {} runs already recorded", runs.len());
    }

    let writer = Mutex::new(writer);
    let failed = Mutex::new(0usize);
    let work = |&i: &usize| -> anyhow::Result<()> {
        let row = execute(&runs[i], &configs[i], &inputs);
        let mut w = writer.lock().expect("writer lock");
        let status = if row[KEY_COLUMNS] == "ok" {
            format!("phi_s={} phi_d={} phi_c={} ({}, {} generations)", row[12], row[13], row[14], row[10], row[11])
        } else {
            *failed.lock().expect("counter lock") += 1;
            format!("error: {}", row[19])
        };
        eprintln!("[{}/{}] {}: {status}", i + 1, w.total, runs[i].describe());
        w.push(i, row)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        todo.par_iter().try_for_each(work)?;
    }
    #[cfg(not(feature = "parallel"))]
    todo.iter().try_for_each(work)?;

    let failed = failed.into_inner().expect("counter lock");
    Ok(Outcome { total: runs.len(), resumed, failed })
}

/// Reads a results file back as header-keyed maps.
pub fn read_results(path: &Path) -> anyhow::Result<Vec<HashMap<String, String>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        bail!("{} is not a results file", path.display());
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(header.iter().zip(record.iter()).map(|(k, v)| (k.to_string(), v.to_string())).collect());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
case = "csd"
replications = 5
master_seed = 1

[base]
ng = 3

[sweep]
ps = [50, 100, 200]
"#;

    #[test]
    fn grid_order_and_seeds() {
        let spec = parse_spec(SPEC).unwrap();
        let runs = plan(&spec);
        assert_eq!(runs.len(), 15);
        assert_eq!(runs[0].ps, 50);
        assert_eq!(runs[4].seed, 5);
        assert_eq!(runs[5].ps, 100);
        assert_eq!(runs[5].seed, 1);
        assert!(runs.iter().all(|r| r.ng == 3 && r.uc == 20 && r.setup == MofSetup::Sdc));
        assert!(runs.iter().enumerate().all(|(i, r)| r.index == i));
    }

    #[test]
    fn nested_sweep() {
        let spec =
            parse_spec("case = 'csd'\n[sweep]\nsetup = ['sdc', 'd']\nrho = [0, 2]\nparents = ['A', 'b']\n").unwrap();
        let runs = plan(&spec);
        assert_eq!(runs.len(), 8);
        assert_eq!((runs[1].setup, runs[1].rho, runs[1].parents), (MofSetup::Sdc, 0, ParentLabel::B));
        assert_eq!((runs[2].setup, runs[2].rho, runs[2].parents), (MofSetup::Sdc, 2, ParentLabel::A));
        assert_eq!(runs[7].setup, MofSetup::D);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            "replications = 2\n[sweep]\nps = [10]",
            "case = 'csd'",
            "case = 'csd'\n[sweep]",
            "case = 'csd'\n[sweep]\nps = []",
            "case = 'csd'\nreplications = 0\n[sweep]\nps = [10]",
            "case = 'csd'\nft = 'x.ft'\n[sweep]\nps = [10]",
            "case = 'csd'\ncolour = 1\n[sweep]\nps = [10]",
            "case = 'csd'\n[sweep]\nsetup = ['cd']",
        ];
        for text in bad {
            assert!(matches!(parse_spec(text), Err(CliError::Usage(_))), "{text}");
        }
    }
}
