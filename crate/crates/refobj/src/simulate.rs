//! Monte Carlo driver: rounds, record table, manifest and timing files.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use refobj_core::agreement::{SimulationRecord, Simulator};
use refobj_core::encoding::EncodingSpec;
use refobj_core::likelihood::{average_error, LikelihoodModel};
use refobj_core::rng::derive_seed;
use refobj_core::stats::Summary;
use refobj_core::su2::{HaarGrid, DEFAULT_NODES};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{csv_string, fmt_f64, json_f64, json_string, write_file};
use crate::CliError;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "REFOBJ_THREADS";

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.json";

/// Thread count from [`THREADS_VAR`]; `None` means serial.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_VAR} must be a positive integer, got {s:?}"
            ))),
        },
    }
}

pub fn build_simulator(cfg: &RunConfig) -> Result<Simulator, CliError> {
    let scenario = cfg.scenario()?;
    let spec = EncodingSpec::new(cfg.n_spins).map_err(CliError::from_core)?;
    let model = match cfg.grid.as_ref().and_then(|g| g.cdf_intervals) {
        Some(m) => LikelihoodModel::with_resolution(spec, m).map_err(CliError::from_core)?,
        None => LikelihoodModel::new(spec),
    };
    Simulator::with_model(scenario, model).map_err(CliError::from_core)
}

/// Rounds in index order; fanned out over `threads` workers when given.
pub fn run_rounds(
    sim: &Simulator,
    seed: u64,
    rounds: usize,
    threads: Option<usize>,
) -> Result<Vec<SimulationRecord>, CliError> {
    let one = |i: usize| sim.simulate_round(derive_seed(seed, i as u64));
    match threads {
        None | Some(1) => Ok((0..rounds).map(one).collect()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            Ok(pool.install(|| (0..rounds).into_par_iter().map(one).collect()))
        }
    }
}

pub fn record_header(k: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["round".into(), "seed".into(), "config_hash".into()];
    h.extend((1..=4).map(|c| format!("source_x{c}")));
    for i in 0..k {
        h.extend((1..=4).map(|c| format!("estimate{i}_x{c}")));
    }
    h.extend((0..k).map(|i| format!("error{i}")));
    for i in 0..k {
        h.extend((i + 1..k).map(|j| format!("pair{i}_{j}")));
    }
    h
}

pub fn record_row(round: usize, rec: &SimulationRecord, hash: &str) -> Vec<String> {
    let mut row = vec![round.to_string(), rec.seed.to_string(), hash.to_string()];
    row.extend(rec.source_frame.components().iter().map(|&x| fmt_f64(x)));
    for e in &rec.estimates {
        row.extend(e.components().iter().map(|&x| fmt_f64(x)));
    }
    row.extend(rec.alignment_errors.iter().map(|&x| fmt_f64(x)));
    row.extend(rec.pairwise_angles.iter().map(|&x| fmt_f64(x)));
    row
}

/// Metric columns recovered from the record table text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub alignment_error: Vec<f64>,
    pub pairwise_angle: Vec<f64>,
}

/// Parses `error*` and `pair*` columns back out of a record table.
pub fn metrics_from_csv(text: &str) -> Result<Metrics, CliError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd
        .headers()
        .map_err(|e| CliError::Io(e.to_string()))?
        .clone();
    let mut m = Metrics::default();
    for row in rd.records() {
        let row = row.map_err(|e| CliError::Io(e.to_string()))?;
        for (name, field) in header.iter().zip(row.iter()) {
            let target = if name.starts_with("error") {
                &mut m.alignment_error
            } else if name.starts_with("pair") {
                &mut m.pairwise_angle
            } else {
                continue;
            };
            let v = field
                .parse::<f64>()
                .map_err(|e| CliError::Io(format!("bad value {field:?} in column {name}: {e}")))?;
            target.push(v);
        }
    }
    Ok(m)
}

fn summary_json(values: &[f64]) -> Value {
    match Summary::of(values) {
        None => Value::Null,
        Some(s) => json!({
            "count": s.count,
            "mean": json_f64(s.mean),
            "median": json_f64(s.median),
            "std_error": json_f64(s.std_error),
        }),
    }
}

/// `{alignment_error, pairwise_angle}` summaries.
pub fn summaries(m: &Metrics) -> Value {
    let mut s = Map::new();
    s.insert("alignment_error".into(), summary_json(&m.alignment_error));
    s.insert("pairwise_angle".into(), summary_json(&m.pairwise_angle));
    Value::Object(s)
}

/// Quadrature value of the mean alignment error, for comparison with the
/// Monte Carlo mean.
fn expected_error(cfg: &RunConfig) -> Result<f64, CliError> {
    let spec = EncodingSpec::new(cfg.n_spins).map_err(CliError::from_core)?;
    let default = HaarGrid::for_spins(cfg.n_spins);
    let grid = match &cfg.grid {
        Some(g) if g.theta_panels.is_some() || g.nodes_per_panel.is_some() => HaarGrid::new(
            g.theta_panels
                .unwrap_or(default.theta_points().len() / DEFAULT_NODES),
            8,
            16,
            g.nodes_per_panel.unwrap_or(DEFAULT_NODES),
        )
        .map_err(CliError::from_core)?,
        _ => default,
    };
    average_error(&spec, &grid).map_err(CliError::from_core)
}

/// What a `simulate` run wrote.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub records_csv: String,
    pub manifest: Value,
    pub config_hash: String,
}

/// Runs `cfg` and writes the three output files into `out_dir`.
pub fn simulate(
    cfg: &RunConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<RunOutputs, CliError> {
    let started = Instant::now();
    let hash = cfg.hash();
    let sim = build_simulator(cfg)?;
    let expected = expected_error(cfg)?;
    let records = run_rounds(&sim, cfg.seed, cfg.rounds, threads)?;

    let header = record_header(cfg.observers.len());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| record_row(i, r, &hash))
        .collect();
    let records_csv = csv_string(&header_refs, &rows)?;
    let metrics = metrics_from_csv(&records_csv)?;

    let manifest = json!({
        "tool": "refobj",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "records_file": RECORDS_FILE,
        "timing_file": TIMING_FILE,
        "expected_alignment_error": json_f64(expected),
        "summaries": summaries(&metrics),
    });

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_file(&out_dir.join(RECORDS_FILE), &records_csv)?;
    write_file(&out_dir.join(MANIFEST_FILE), &json_string(&manifest))?;
    let timing = json!({
        "config_hash": hash,
        "wall_clock_seconds": json_f64(started.elapsed().as_secs_f64()),
        "threads": threads.unwrap_or(1),
        "rounds": cfg.rounds,
    });
    write_file(&out_dir.join(TIMING_FILE), &json_string(&timing))?;

    Ok(RunOutputs {
        records_csv,
        manifest,
        config_hash: hash,
    })
}
