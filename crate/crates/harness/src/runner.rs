use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{tuple_label, ConfigError, ExperimentConfig, ParamTuple};
use crate::scenarios::{self, CellRun, Prepared};

pub const CSV_HEADER: &str =
    "scenario,seed,params,metric,value,classical_bits_host_to_host,classical_bits_end_to_end,status";

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep full trace lines (hashes are always computed).
    pub keep_trace: bool,
    /// Run cells on the rayon pool; output order is unchanged.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub scenario: String,
    pub seed: u64,
    pub params: String,
    pub metric: String,
    pub value: f64,
    pub classical_bits_host_to_host: u64,
    pub classical_bits_end_to_end: u64,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub seed: u64,
    pub params: String,
    pub run: CellRun,
}

impl CellOutcome {
    pub fn aborted(&self) -> bool {
        self.run.error.is_some()
    }

    fn file_stem(&self, index: usize) -> String {
        format!("{index:04}_seed{}", self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub scenario: String,
    pub cells: Vec<CellOutcome>,
}

impl ExperimentOutput {
    pub fn records(&self) -> Vec<MetricsRecord> {
        let mut out = Vec::new();
        for c in &self.cells {
            let status = if c.aborted() { "aborted" } else { "ok" };
            for (metric, value) in &c.run.metrics {
                out.push(MetricsRecord {
                    scenario: self.scenario.clone(),
                    seed: c.seed,
                    params: c.params.clone(),
                    metric: metric.clone(),
                    value: *value,
                    classical_bits_host_to_host: c.run.classical_bits_host_to_host,
                    classical_bits_end_to_end: c.run.classical_bits_end_to_end,
                    status: status.into(),
                });
            }
        }
        out
    }

    pub fn aborted(&self) -> Vec<&CellOutcome> {
        self.cells.iter().filter(|c| c.aborted()).collect()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in self.records() {
            wr.serialize(r)?;
        }
        if self.cells.iter().all(|c| c.run.metrics.is_empty()) {
            wr.write_record(CSV_HEADER.split(','))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// One line per cell: index, seed, params, hash.
    pub fn hash_listing(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.cells.iter().enumerate() {
            s.push_str(&format!(
                "{i}\t{}\t{}\t{}\n",
                c.seed, c.params, c.run.trace_hash
            ));
        }
        s
    }

    /// Writes `metrics.csv`, `trace_hashes.txt`, and with `traces` set,
    /// one `traces/*.trace` file per cell.
    pub fn write_to_dir(&self, dir: &Path, traces: bool) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("metrics.csv"), self.csv_string())?;
        fs::write(dir.join("trace_hashes.txt"), self.hash_listing())?;
        if traces {
            let tdir = dir.join("traces");
            fs::create_dir_all(&tdir)?;
            for (i, c) in self.cells.iter().enumerate() {
                let mut body = format!(
                    "# scenario={} seed={} params={}\n",
                    self.scenario, c.seed, c.params
                );
                for line in &c.run.trace {
                    body.push_str(line);
                    body.push('\n');
                }
                if let Some(e) = &c.run.error {
                    body.push_str(&format!("# aborted: {e}\n"));
                }
                fs::write(tdir.join(format!("{}.trace", c.file_stem(i))), body)?;
            }
        }
        Ok(())
    }
}

/// Validates the config, then runs every (seed, sweep tuple) cell on its
/// own engine, seeds outermost.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: RunOptions,
) -> Result<ExperimentOutput, ConfigError> {
    cfg.validate()?;
    let tuples: Vec<(ParamTuple, Prepared)> = cfg
        .tuples()
        .into_iter()
        .map(|t| {
            let p = scenarios::prepare(cfg, &t).map_err(ConfigError::Invalid)?;
            Ok((t, p))
        })
        .collect::<Result<_, ConfigError>>()?;
    let jobs: Vec<(u64, &ParamTuple, &Prepared)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| tuples.iter().map(move |(t, p)| (s, t, p)))
        .collect();
    let exec = |&(seed, tuple, prepared): &(u64, &ParamTuple, &Prepared)| -> Vec<CellOutcome> {
        let base = tuple_label(tuple);
        scenarios::run(prepared, seed, opts.keep_trace)
            .into_iter()
            .map(|run| {
                let params = match &run.variant {
                    Some(v) if base.is_empty() => v.clone(),
                    Some(v) => format!("{base};{v}"),
                    None => base.clone(),
                };
                CellOutcome { seed, params, run }
            })
            .collect()
    };
    let nested: Vec<Vec<CellOutcome>> = if opts.parallel {
        jobs.par_iter().map(exec).collect()
    } else {
        jobs.iter().map(exec).collect()
    };
    Ok(ExperimentOutput {
        scenario: cfg.scenario.name().to_string(),
        cells: nested.into_iter().flatten().collect(),
    })
}
