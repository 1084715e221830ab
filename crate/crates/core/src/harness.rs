//! Experiment harness: solve single instances, sweep levels and
//! strategies over instance suites, and emit CSV rows plus aggregate
//! means.
//!
//! Sweeps parallelize across (instance, strategy, variant, level)
//! cells; rows are sorted by key afterwards, so output never depends
//! on execution order. Every row records the restart budget and seed
//! that produced it.

pub mod config;
pub mod params;
pub mod plot;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::ansatz::{CompiledAnsatz, Variant, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::instancegen::{generate, generate_tail, GenSpec, TailGenSpec};
use crate::optimize::{
    multistart_with_diagonal, schedule_with_diagonal, LevelResult, OptSettings,
};
use crate::oracle::{solve, solve_tail};
use crate::problem::{
    default_lambdas, default_tail_lambdas, objective_diagonal, tail_objective_diagonal,
    MecInstance, TailInstance, TailLambdas,
};
use params::ParamRecord;

/// How levels are optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Independent multistart at the target level.
    Random,
    /// Warm-started schedule from level 1 up to the target level.
    Fixing,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Fixing => "fixing",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "fixing" => Ok(Strategy::Fixing),
            other => Err(Error::Format(format!(
                "unknown strategy {other:?}, expected \"random\" or \"fixing\""
            ))),
        }
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    Path(std::path::PathBuf),
    Spec(GenSpec),
}

impl InstanceSource {
    fn id(&self) -> String {
        match self {
            InstanceSource::Path(path) => sanitize_id(
                &path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.to_string_lossy().into_owned()),
            ),
            InstanceSource::Spec(spec) => format!(
                "gen-n{}-m{}-s{}",
                spec.set_count, spec.universe_size, spec.seed
            ),
        }
    }
}

/// Tail-instance counterpart of `InstanceSource`.
#[derive(Debug, Clone, PartialEq)]
pub enum TailSource {
    Path(std::path::PathBuf),
    Spec(TailGenSpec),
}

impl TailSource {
    fn id(&self) -> String {
        match self {
            TailSource::Path(path) => sanitize_id(
                &path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.to_string_lossy().into_owned()),
            ),
            TailSource::Spec(spec) => format!(
                "tail-n{}-m{}-s{}",
                spec.base.set_count, spec.base.universe_size, spec.base.seed
            ),
        }
    }
}

/// Identifiers appear in CSV fields and parameter dumps, so they must
/// stay free of separators.
fn sanitize_id(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '-'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "instance".into()
    } else {
        cleaned
    }
}

/// Sweep description: which instances, which levels, which methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sources: Vec<InstanceSource>,
    pub p_min: usize,
    pub p_max: usize,
    pub strategies: Vec<Strategy>,
    pub variants: Vec<Variant>,
    pub settings: OptSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sources: Vec::new(),
            p_min: 1,
            p_max: 7,
            strategies: vec![Strategy::Random],
            variants: vec![Variant::Original],
            settings: OptSettings::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Domain("sweep needs at least one instance".into()));
        }
        validate_common(
            self.p_min,
            self.p_max,
            &self.strategies,
            &self.variants,
            &self.settings,
        )
    }
}

/// Tail sweep description; explicit weights override the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSweepConfig {
    pub sources: Vec<TailSource>,
    pub p_min: usize,
    pub p_max: usize,
    pub strategies: Vec<Strategy>,
    pub variants: Vec<Variant>,
    pub settings: OptSettings,
    pub lambdas: Option<TailLambdas>,
}

impl Default for TailSweepConfig {
    fn default() -> Self {
        TailSweepConfig {
            sources: Vec::new(),
            p_min: 1,
            p_max: 7,
            strategies: vec![Strategy::Random],
            variants: vec![Variant::Original],
            settings: OptSettings::default(),
            lambdas: None,
        }
    }
}

impl TailSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Domain("sweep needs at least one instance".into()));
        }
        validate_common(
            self.p_min,
            self.p_max,
            &self.strategies,
            &self.variants,
            &self.settings,
        )
    }
}

fn validate_common(
    p_min: usize,
    p_max: usize,
    strategies: &[Strategy],
    variants: &[Variant],
    settings: &OptSettings,
) -> Result<()> {
    if p_min < 1 || p_max > MAX_LEVEL || p_min > p_max {
        return Err(Error::OutOfRange {
            what: "level range",
            value: if p_min > p_max { p_min } else { p_max },
            min: 1,
            max: MAX_LEVEL,
        });
    }
    if strategies.is_empty() {
        return Err(Error::Domain("sweep needs at least one strategy".into()));
    }
    if variants.is_empty() {
        return Err(Error::Domain("sweep needs at least one variant".into()));
    }
    settings.validate()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Failed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
        }
    }
}

/// One CSV data or aggregate row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub strategy: Strategy,
    pub variant: Variant,
    pub restarts: usize,
    pub seed: u64,
    pub best_fp: Option<f64>,
    pub success_prob: Option<f64>,
    /// Cost of the oracle solution; tail sweeps only.
    pub solution_cost: Option<f64>,
    pub status: RowStatus,
    pub wall_ms: u64,
}

pub const CSV_HEADER: &str =
    "instance_id,n,m,p,strategy,variant,restarts,seed,best_fp,success_prob,status,wall_ms";
pub const TAIL_CSV_HEADER: &str =
    "instance_id,n,m,p,strategy,variant,restarts,seed,best_fp,success_prob,solution_cost,status,wall_ms";

fn format_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

impl CsvRow {
    fn render(&self, tail: bool) -> String {
        let mut fields = vec![
            self.instance_id.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.p.to_string(),
            self.strategy.to_string(),
            self.variant.to_string(),
            self.restarts.to_string(),
            self.seed.to_string(),
            format_opt(self.best_fp),
            format_opt(self.success_prob),
        ];
        if tail {
            fields.push(format_opt(self.solution_cost));
        }
        fields.push(self.status.as_str().to_string());
        fields.push(self.wall_ms.to_string());
        fields.join(",")
    }

    fn sort_key(&self) -> (String, usize, usize, usize, Strategy, Variant) {
        (
            self.instance_id.clone(),
            self.n,
            self.m,
            self.p,
            self.strategy,
            self.variant,
        )
    }
}

/// Everything a sweep produced: sorted data rows, aggregate means,
/// optimal-parameter records, and per-instance error notes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<CsvRow>,
    pub aggregates: Vec<CsvRow>,
    pub params: Vec<ParamRecord>,
    pub errors: Vec<String>,
    pub tail: bool,
}

impl SweepReport {
    /// CSV body: header, data rows, aggregate rows. Deterministic for
    /// fixed inputs.
    pub fn csv_body(&self) -> String {
        let header = if self.tail { TAIL_CSV_HEADER } else { CSV_HEADER };
        let mut out = String::from(header);
        out.push('\n');
        for row in self.rows.iter().chain(&self.aggregates) {
            out.push_str(&row.render(self.tail));
            out.push('\n');
        }
        out
    }

    /// Full CSV file content with a timestamp comment line on top; the
    /// body below the comment is byte-reproducible.
    pub fn to_csv(&self) -> String {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!(
            "# mecq {} generated_at_unix={stamp}\n{}",
            env!("CARGO_PKG_VERSION"),
            self.csv_body()
        )
    }
}

/// Solves one instance: oracle first (refusing degenerate inputs),
/// then either a single multistart at level `p` or the warm-start
/// schedule up to `p`. Returns one result per computed level.
pub fn run_solve(
    instance: &MecInstance,
    p: usize,
    strategy: Strategy,
    variant: Variant,
    settings: &OptSettings,
) -> Result<Vec<LevelResult>> {
    let lambdas = default_lambdas(instance.set_count(), instance.universe_size())?;
    let report = solve(instance)?;
    let Some(solution) = report.experiment_solution() else {
        return Err(Error::InvalidInstance(format!(
            "degenerate instance, no unique optimum: {}",
            report.diagnostics()
        )));
    };
    let diagonal = objective_diagonal(instance, &lambdas)?;
    let base = CompiledAnsatz::compile(instance, &lambdas, variant, 1)?;
    match strategy {
        Strategy::Random => {
            let ansatz = base.at_level(p)?;
            Ok(vec![multistart_with_diagonal(
                &ansatz, &diagonal, solution, settings, None,
            )?])
        }
        Strategy::Fixing => schedule_with_diagonal(&base, &diagonal, solution, p, settings),
    }
}

/// Tail counterpart of `run_solve`.
pub fn run_tail_solve(
    tail: &TailInstance,
    lambdas: Option<TailLambdas>,
    p: usize,
    strategy: Strategy,
    variant: Variant,
    settings: &OptSettings,
) -> Result<Vec<LevelResult>> {
    let lambdas = match lambdas {
        Some(l) => l,
        None => default_tail_lambdas(tail.route_count(), tail.flight_count())?,
    };
    let report = solve_tail(tail, &lambdas)?;
    let Some(solution) = report.x_sol else {
        return Err(Error::InvalidInstance(format!(
            "degenerate tail instance, objective argmax not unique: {:?}",
            report.argmax
        )));
    };
    let diagonal = tail_objective_diagonal(tail, &lambdas)?;
    let base = CompiledAnsatz::compile_tail(tail, &lambdas, variant, 1)?;
    match strategy {
        Strategy::Random => {
            let ansatz = base.at_level(p)?;
            Ok(vec![multistart_with_diagonal(
                &ansatz, &diagonal, solution, settings, None,
            )?])
        }
        Strategy::Fixing => schedule_with_diagonal(&base, &diagonal, solution, p, settings),
    }
}

/// A solvable problem with its precomputed diagonal and solution, or
/// the reason it cannot run.
struct Prepared {
    id: String,
    n: usize,
    m: usize,
    ready: std::result::Result<PreparedProblem, String>,
}

struct PreparedProblem {
    base_original: CompiledAnsatz,
    base_optimized: CompiledAnsatz,
    diagonal: Vec<f64>,
    solution: usize,
    solution_cost: Option<f64>,
}

impl PreparedProblem {
    fn base(&self, variant: Variant) -> &CompiledAnsatz {
        match variant {
            Variant::Original => &self.base_original,
            Variant::Optimized => &self.base_optimized,
        }
    }
}

fn prepare_mec(id: String, instance: &MecInstance) -> Prepared {
    let n = instance.set_count();
    let m = instance.universe_size();
    let ready = (|| {
        let lambdas = default_lambdas(n, m).map_err(|e| e.to_string())?;
        let report = solve(instance).map_err(|e| e.to_string())?;
        let solution = report.experiment_solution().ok_or_else(|| {
            format!(
                "degenerate instance, no unique optimum: {}",
                report.diagnostics()
            )
        })?;
        let diagonal = objective_diagonal(instance, &lambdas).map_err(|e| e.to_string())?;
        Ok(PreparedProblem {
            base_original: CompiledAnsatz::compile(instance, &lambdas, Variant::Original, 1)
                .map_err(|e| e.to_string())?,
            base_optimized: CompiledAnsatz::compile(instance, &lambdas, Variant::Optimized, 1)
                .map_err(|e| e.to_string())?,
            diagonal,
            solution,
            solution_cost: None,
        })
    })();
    Prepared { id, n, m, ready }
}

fn prepare_tail(id: String, tail: &TailInstance, lambdas: Option<TailLambdas>) -> Prepared {
    let n = tail.route_count();
    let m = tail.flight_count();
    let ready = (|| {
        let lambdas = match lambdas {
            Some(l) => l,
            None => default_tail_lambdas(n, m).map_err(|e| e.to_string())?,
        };
        let report = solve_tail(tail, &lambdas).map_err(|e| e.to_string())?;
        let solution = report.x_sol.ok_or_else(|| {
            format!(
                "degenerate tail instance, objective argmax not unique: {:?}",
                report.argmax
            )
        })?;
        let diagonal = tail_objective_diagonal(tail, &lambdas).map_err(|e| e.to_string())?;
        Ok(PreparedProblem {
            base_original: CompiledAnsatz::compile_tail(tail, &lambdas, Variant::Original, 1)
                .map_err(|e| e.to_string())?,
            base_optimized: CompiledAnsatz::compile_tail(tail, &lambdas, Variant::Optimized, 1)
                .map_err(|e| e.to_string())?,
            diagonal,
            solution,
            solution_cost: Some(tail.selection_cost(report.x_sol.unwrap())),
        })
    })();
    Prepared { id, n, m, ready }
}

/// One schedulable unit of sweep work: a whole fixing schedule, or a
/// single random-start level.
struct Cell {
    instance_index: usize,
    strategy: Strategy,
    variant: Variant,
    level: Option<usize>,
}

struct CellOutput {
    rows: Vec<CsvRow>,
    params: Vec<ParamRecord>,
    error: Option<String>,
}

fn failed_row(
    prepared: &Prepared,
    p: usize,
    strategy: Strategy,
    variant: Variant,
    settings: &OptSettings,
    tail: bool,
) -> CsvRow {
    CsvRow {
        instance_id: prepared.id.clone(),
        n: prepared.n,
        m: prepared.m,
        p,
        strategy,
        variant,
        restarts: settings.restarts,
        seed: settings.rng_seed,
        best_fp: None,
        success_prob: None,
        solution_cost: if tail { None } else { None },
        status: RowStatus::Failed,
        wall_ms: 0,
    }
}

fn level_row(
    prepared: &Prepared,
    result: &LevelResult,
    strategy: Strategy,
    settings: &OptSettings,
    solution_cost: Option<f64>,
) -> CsvRow {
    CsvRow {
        instance_id: prepared.id.clone(),
        n: prepared.n,
        m: prepared.m,
        p: result.p,
        strategy,
        variant: result.variant,
        restarts: settings.restarts,
        seed: settings.rng_seed,
        best_fp: Some(result.best_fp),
        success_prob: Some(result.success_prob),
        solution_cost,
        status: RowStatus::Ok,
        wall_ms: result.wall_ms,
    }
}

fn run_cell(
    cell: &Cell,
    prepared: &[Prepared],
    p_min: usize,
    p_max: usize,
    settings: &OptSettings,
    tail: bool,
) -> CellOutput {
    let instance = &prepared[cell.instance_index];
    let problem = match &instance.ready {
        Ok(problem) => problem,
        Err(message) => {
            let levels: Vec<usize> = match cell.level {
                Some(p) => vec![p],
                None => (p_min..=p_max).collect(),
            };
            return CellOutput {
                rows: levels
                    .into_iter()
                    .map(|p| failed_row(instance, p, cell.strategy, cell.variant, settings, tail))
                    .collect(),
                params: Vec::new(),
                error: Some(format!("instance {}: {message}", instance.id)),
            };
        }
    };
    let base = problem.base(cell.variant);
    let outcome: Result<Vec<LevelResult>> = match cell.level {
        Some(p) => base.at_level(p).and_then(|ansatz| {
            multistart_with_diagonal(&ansatz, &problem.diagonal, problem.solution, settings, None)
                .map(|r| vec![r])
        }),
        None => {
            schedule_with_diagonal(base, &problem.diagonal, problem.solution, p_max, settings)
        }
    };
    match outcome {
        Ok(levels) => {
            let keep = |p: usize| p >= p_min && p <= p_max;
            let rows = levels
                .iter()
                .filter(|r| keep(r.p))
                .map(|r| level_row(instance, r, cell.strategy, settings, problem.solution_cost))
                .collect();
            let records = levels
                .iter()
                .filter(|r| keep(r.p))
                .map(|r| ParamRecord::from_result(&instance.id, cell.strategy, r))
                .collect();
            CellOutput {
                rows,
                params: records,
                error: None,
            }
        }
        Err(error) => {
            let levels: Vec<usize> = match cell.level {
                Some(p) => vec![p],
                None => (p_min..=p_max).collect(),
            };
            CellOutput {
                rows: levels
                    .into_iter()
                    .map(|p| failed_row(instance, p, cell.strategy, cell.variant, settings, tail))
                    .collect(),
                params: Vec::new(),
                error: Some(format!("instance {}: {error}", instance.id)),
            }
        }
    }
}

fn sweep_cells(
    prepared: Vec<Prepared>,
    p_min: usize,
    p_max: usize,
    strategies: &[Strategy],
    variants: &[Variant],
    settings: &OptSettings,
    tail: bool,
) -> SweepReport {
    let mut cells = Vec::new();
    for instance_index in 0..prepared.len() {
        for &strategy in strategies {
            for &variant in variants {
                match strategy {
                    Strategy::Fixing => cells.push(Cell {
                        instance_index,
                        strategy,
                        variant,
                        level: None,
                    }),
                    Strategy::Random => {
                        for p in p_min..=p_max {
                            cells.push(Cell {
                                instance_index,
                                strategy,
                                variant,
                                level: Some(p),
                            });
                        }
                    }
                }
            }
        }
    }
    let outputs: Vec<CellOutput> = cells
        .par_iter()
        .map(|cell| run_cell(cell, &prepared, p_min, p_max, settings, tail))
        .collect();
    let mut rows = Vec::new();
    let mut params = Vec::new();
    let mut errors = Vec::new();
    for output in outputs {
        rows.extend(output.rows);
        params.extend(output.params);
        if let Some(error) = output.error {
            if !errors.contains(&error) {
                errors.push(error);
            }
        }
    }
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    params.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let aggregates = aggregate_rows(&rows);
    SweepReport {
        rows,
        aggregates,
        params,
        errors,
        tail,
    }
}

/// Mean rows over successful data rows, grouped by
/// (n, m, p, strategy, variant), labeled instance_id=MEAN.
fn aggregate_rows(rows: &[CsvRow]) -> Vec<CsvRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, usize, usize, Strategy, Variant), Vec<&CsvRow>> =
        BTreeMap::new();
    for row in rows.iter().filter(|r| r.status == RowStatus::Ok) {
        groups
            .entry((row.n, row.m, row.p, row.strategy, row.variant))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((n, m, p, strategy, variant), members)| {
            let count = members.len() as f64;
            let mean = |f: &dyn Fn(&CsvRow) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / count;
            let costs: Vec<f64> = members.iter().filter_map(|r| r.solution_cost).collect();
            CsvRow {
                instance_id: "MEAN".into(),
                n,
                m,
                p,
                strategy,
                variant,
                restarts: members[0].restarts,
                seed: members[0].seed,
                best_fp: Some(mean(&|r| r.best_fp.unwrap_or(0.0))),
                success_prob: Some(mean(&|r| r.success_prob.unwrap_or(0.0))),
                solution_cost: if costs.is_empty() {
                    None
                } else {
                    Some(costs.iter().sum::<f64>() / costs.len() as f64)
                },
                status: RowStatus::Ok,
                wall_ms: (members.iter().map(|r| r.wall_ms).sum::<u64>() as f64 / count) as u64,
            }
        })
        .collect()
}

/// Runs the full sweep grid and collects rows, aggregates, parameter
/// records, and error notes.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut prepared = Vec::with_capacity(config.sources.len());
    for source in &config.sources {
        let id = source.id();
        let instance = match source {
            InstanceSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                crate::instancegen::parse_instance(&text)?
            }
            InstanceSource::Spec(spec) => generate(spec)?,
        };
        prepared.push(prepare_mec(id, &instance));
    }
    Ok(sweep_cells(
        prepared,
        config.p_min,
        config.p_max,
        &config.strategies,
        &config.variants,
        &config.settings,
        false,
    ))
}

/// Tail counterpart of `run_sweep`; weight ordering is checked before
/// any simulation happens.
pub fn run_tail_sweep(config: &TailSweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut prepared = Vec::with_capacity(config.sources.len());
    for source in &config.sources {
        let id = source.id();
        let tail = match source {
            TailSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                crate::instancegen::parse_tail_instance(&text)?
            }
            TailSource::Spec(spec) => generate_tail(spec)?,
        };
        prepared.push(prepare_tail(id, &tail, config.lambdas));
    }
    Ok(sweep_cells(
        prepared,
        config.p_min,
        config.p_max,
        &config.strategies,
        &config.variants,
        &config.settings,
        true,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instancegen::serialize_instance;

    fn toy4() -> MecInstance {
        MecInstance::new(4, vec![vec![1, 2], vec![3, 4], vec![1, 3], vec![2, 3, 4]]).unwrap()
    }

    fn degenerate4() -> MecInstance {
        MecInstance::new(4, vec![vec![1, 2], vec![3, 4], vec![1, 3], vec![2, 4]]).unwrap()
    }

    fn quick_settings() -> OptSettings {
        OptSettings {
            restarts: 4,
            rng_seed: 17,
            ..OptSettings::default()
        }
    }

    #[test]
    fn run_solve_random_gives_single_level() {
        let results = run_solve(
            &toy4(),
            2,
            Strategy::Random,
            Variant::Original,
            &quick_settings(),
        )
        .unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].p, 2);
        assert!(results[0].success_prob > 0.0 && results[0].success_prob <= 1.0);
    }

    #[test]
    fn run_solve_fixing_gives_all_levels() {
        let results = run_solve(
            &toy4(),
            3,
            Strategy::Fixing,
            Variant::Optimized,
            &quick_settings(),
        )
        .unwrap();
        assert_eq!(results.len(), 3);
        for (k, result) in results.iter().enumerate() {
            assert_eq!(result.p, k + 1);
            assert_eq!(result.variant, Variant::Optimized);
        }
    }

    #[test]
    fn run_solve_refuses_degenerate_instances() {
        let err = run_solve(
            &degenerate4(),
            1,
            Strategy::Random,
            Variant::Original,
            &quick_settings(),
        )
        .unwrap_err();
        let message = err.to_string();
        assert!(message.contains("degenerate"), "{message}");
        assert!(message.contains("exact_covers=2"), "{message}");
    }

    #[test]
    fn sweep_produces_expected_row_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy4.mec");
        std::fs::write(&path, serialize_instance(&toy4())).unwrap();
        let config = SweepConfig {
            sources: vec![InstanceSource::Path(path)],
            p_min: 1,
            p_max: 3,
            strategies: vec![Strategy::Random, Strategy::Fixing],
            variants: vec![Variant::Original],
            settings: quick_settings(),
            ..SweepConfig::default()
        };
        let report = run_sweep(&config).unwrap();
        // 3 levels x 2 strategies for one instance and one variant.
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.aggregates.len(), 6);
        assert!(report.errors.is_empty());
        assert!(report
            .rows
            .iter()
            .all(|r| r.status == RowStatus::Ok && r.instance_id == "toy4"));
        // Sorted by key: levels ascend within each strategy block.
        let fixing: Vec<usize> = report
            .rows
            .iter()
            .filter(|r| r.strategy == Strategy::Fixing)
            .map(|r| r.p)
            .collect();
        assert_eq!(fixing, vec![1, 2, 3]);
        // Single-member aggregates equal their row.
        for aggregate in &report.aggregates {
            let member = report
                .rows
                .iter()
                .find(|r| {
                    r.p == aggregate.p
                        && r.strategy == aggregate.strategy
                        && r.variant == aggregate.variant
                })
                .unwrap();
            assert_eq!(aggregate.instance_id, "MEAN");
            assert!((aggregate.best_fp.unwrap() - member.best_fp.unwrap()).abs() < 1e-12);
            assert!(
                (aggregate.success_prob.unwrap() - member.success_prob.unwrap()).abs() < 1e-12
            );
        }
        // One parameter record per successful row.
        assert_eq!(report.params.len(), 6);
    }

    #[test]
    fn sweep_body_is_reproducible_except_wall_clock() {
        let config = SweepConfig {
            sources: vec![InstanceSource::Spec(GenSpec::new(4, 8, 3))],
            p_min: 1,
            p_max: 2,
            strategies: vec![Strategy::Fixing],
            variants: vec![Variant::Original, Variant::Optimized],
            settings: quick_settings(),
            ..SweepConfig::default()
        };
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        let strip_wall = |body: &str| -> String {
            body.lines()
                .map(|line| {
                    let mut parts: Vec<&str> = line.split(',').collect();
                    if parts.len() > 2 {
                        parts.pop();
                    }
                    parts.join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip_wall(&a.csv_body()), strip_wall(&b.csv_body()));
        // The timestamp header stays out of the body.
        assert!(!a.csv_body().starts_with('#'));
        assert!(a.to_csv().starts_with("# mecq"));
    }

    #[test]
    fn sweep_records_failed_instances_and_continues() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("degenerate.mec");
        std::fs::write(&bad, serialize_instance(&degenerate4())).unwrap();
        let good = dir.path().join("toy4.mec");
        std::fs::write(&good, serialize_instance(&toy4())).unwrap();
        let config = SweepConfig {
            sources: vec![InstanceSource::Path(bad), InstanceSource::Path(good)],
            p_min: 1,
            p_max: 2,
            strategies: vec![Strategy::Random],
            variants: vec![Variant::Original],
            settings: quick_settings(),
            ..SweepConfig::default()
        };
        let report = run_sweep(&config).unwrap();
        assert_eq!(report.rows.len(), 4);
        let failed: Vec<&CsvRow> = report
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Failed)
            .collect();
        assert_eq!(failed.len(), 2);
        assert!(failed.iter().all(|r| r.instance_id == "degenerate"));
        assert!(failed.iter().all(|r| r.best_fp.is_none()));
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].contains("degenerate"));
        // Aggregates only cover the successful instance.
        assert_eq!(report.aggregates.len(), 2);
    }

    #[test]
    fn csv_rendering_layout() {
        let report = run_sweep(&SweepConfig {
            sources: vec![InstanceSource::Spec(GenSpec::new(4, 8, 3))],
            p_min: 1,
            p_max: 1,
            strategies: vec![Strategy::Random],
            variants: vec![Variant::Original],
            settings: quick_settings(),
            ..SweepConfig::default()
        })
        .unwrap();
        let body = report.csv_body();
        let mut lines = body.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let data = lines.next().unwrap();
        let fields: Vec<&str> = data.split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(fields[0], "gen-n4-m8-s3");
        assert_eq!(fields[1], "4");
        assert_eq!(fields[2], "8");
        assert_eq!(fields[3], "1");
        assert_eq!(fields[4], "random");
        assert_eq!(fields[5], "original");
        assert_eq!(fields[6], "4");
        assert_eq!(fields[7], "17");
        assert_eq!(fields[10], "ok");
        let mean = lines.next().unwrap();
        assert!(mean.starts_with("MEAN,"));
        let prob: f64 = fields[9].parse().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&prob));
    }

    #[test]
    fn tail_sweep_covers_costs_and_validates_lambdas() {
        let config = TailSweepConfig {
            sources: vec![TailSource::Spec(TailGenSpec::new(4, 8, 2))],
            p_min: 1,
            p_max: 2,
            strategies: vec![Strategy::Fixing],
            variants: vec![Variant::Original],
            settings: quick_settings(),
            lambdas: None,
        };
        let report = run_tail_sweep(&config).unwrap();
        assert!(report.tail);
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.solution_cost.is_some()));
        let body = report.csv_body();
        assert!(body.starts_with(TAIL_CSV_HEADER));
        assert_eq!(
            body.lines().nth(1).unwrap().split(',').count(),
            13,
            "tail rows carry the cost column"
        );
    }

    #[test]
    fn config_validation_errors() {
        let mut config = SweepConfig::default();
        assert!(config.validate().is_err());
        config.sources = vec![InstanceSource::Spec(GenSpec::new(4, 8, 1))];
        config.p_min = 0;
        assert!(config.validate().is_err());
        config.p_min = 3;
        config.p_max = 2;
        assert!(config.validate().is_err());
        config.p_min = 1;
        config.p_max = MAX_LEVEL + 1;
        assert!(config.validate().is_err());
        config.p_max = 2;
        config.strategies.clear();
        assert!(config.validate().is_err());
        config.strategies = vec![Strategy::Random];
        config.variants.clear();
        assert!(config.validate().is_err());
        config.variants = vec![Variant::Original];
        assert!(config.validate().is_ok());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("random".parse::<Strategy>().unwrap(), Strategy::Random);
        assert_eq!("fixing".parse::<Strategy>().unwrap(), Strategy::Fixing);
        assert!("greedy".parse::<Strategy>().is_err());
    }

    #[test]
    fn id_sanitization() {
        assert_eq!(sanitize_id("inst,1 bad"), "inst-1-bad");
        assert_eq!(sanitize_id(""), "instance");
        assert_eq!(
            InstanceSource::Path("/tmp/foo bar.mec".into()).id(),
            "foo-bar"
        );
        assert_eq!(
            InstanceSource::Spec(GenSpec::new(6, 12, 5)).id(),
            "gen-n6-m12-s5"
        );
    }
}
