//! Benchmark suites run over a worker pool with a per-instance wall-clock budget.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;
use wfsound_core::generators::random::random_free_choice_net;
use wfsound_core::generators::{chain, gen_dnf_net, gen_family, gen_random_dnf, Family};
use wfsound_core::{Net, NetError};

use crate::pipelines::{analyze, AnalysisOptions};
use crate::verdict::{Outcome, Property, StageTiming};

pub const CSV_HEADER: [&str; 9] = [
    "instance",
    "family",
    "param",
    "places",
    "transitions",
    "property",
    "outcome",
    "time_ms",
    "timeout",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    GenFamilies,
    StructFamilies,
    Dnf,
    Chains,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::GenFamilies, Suite::StructFamilies, Suite::Dnf, Suite::Chains];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GenFamilies => "gen-families",
            Suite::StructFamilies => "struct-families",
            Suite::Dnf => "dnf",
            Suite::Chains => "chains",
        }
    }

    /// Largest parameter when none is given.
    pub fn default_max(self) -> u64 {
        match self {
            Suite::GenFamilies => 8,
            Suite::StructFamilies => 10,
            Suite::Dnf => 40,
            Suite::Chains => 101,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected gen-families, struct-families, dnf or chains)"))
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub family: String,
    pub param: u64,
    pub property: Property,
    pub net: Net,
    /// Reduction forced on for this instance.
    pub reduce: bool,
}

/// Parameter value of the structural instance checked at scale.
pub const LARGE_NQUASI: u64 = 1_000_000;

/// Instances of `suite` with parameters up to `max`. Chains consist of
/// random sound free-choice nets and are reduced segment by segment.
pub fn suite_instances(suite: Suite, max: Option<u64>, seed: u64) -> Result<Vec<Instance>, NetError> {
    let max = max.unwrap_or(suite.default_max());
    let mut out = Vec::new();
    let family_instance = |family: Family, c: u64, property: Property| -> Result<Instance, NetError> {
        Ok(Instance {
            id: format!("{}-{c}", family.name()),
            family: family.name().to_string(),
            param: c,
            property,
            net: gen_family(family, c)?,
            reduce: false,
        })
    };
    match suite {
        Suite::GenFamilies => {
            for c in 1..=max {
                out.push(family_instance(Family::Nc, c, Property::GenSound)?);
            }
        }
        Suite::StructFamilies => {
            for family in [Family::NQuasi, Family::Sound, Family::NSound] {
                for c in 2..=max {
                    out.push(family_instance(family, c, Property::StructSound)?);
                }
            }
            if max >= 2 {
                out.push(family_instance(Family::NQuasi, LARGE_NQUASI, Property::StructSound)?);
            }
        }
        Suite::Dnf => {
            for s in 0..max {
                let vars = 1 + (s % 4) as usize;
                let clauses = 1 + (s / 4 % 4) as usize;
                let phi = gen_random_dnf(vars, clauses, seed.wrapping_add(s)).map_err(NetError::Invalid)?;
                let net = match gen_dnf_net(&phi) {
                    Ok(net) => net,
                    Err(NetError::NotWorkflow(_)) => continue,
                    Err(e) => return Err(e),
                };
                out.push(Instance {
                    id: format!("dnf-{s}"),
                    family: "dnf".into(),
                    param: s,
                    property: Property::ContSound,
                    net,
                    reduce: false,
                });
            }
        }
        Suite::Chains => {
            for n in (1..=max).step_by(20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n << 20));
                let toys: Vec<Net> = (0..n).map(|_| random_free_choice_net(&mut rng, 8, 0.0)).collect();
                out.push(Instance {
                    id: format!("chain-{n}"),
                    family: "chain".into(),
                    param: n,
                    property: Property::FreeChoiceSound,
                    net: chain(&toys)?.renamed(format!("chain-{n}")),
                    reduce: true,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub family: String,
    pub param: u64,
    pub places: usize,
    pub transitions: usize,
    pub property: String,
    pub outcome: String,
    pub time_ms: f64,
    pub timeout: bool,
    #[serde(skip)]
    pub stage_timings: Vec<StageTiming>,
}

impl BenchRow {
    fn record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            self.family.clone(),
            self.param.to_string(),
            self.places.to_string(),
            self.transitions.to_string(),
            self.property.clone(),
            self.outcome.clone(),
            format!("{:.3}", self.time_ms),
            self.timeout.to_string(),
        ]
    }
}

/// Property column of a row.
pub fn property_name(p: Property) -> &'static str {
    match p {
        Property::GenSound => "gen-sound",
        Property::StructSound => "struct-sound",
        Property::ContSound => "cont-sound",
        Property::IntBounded => "int-bounded",
        Property::QuasiSound { .. } => "quasi-sound",
        Property::KSound { .. } => "k-sound",
        Property::FreeChoiceSound => "free-choice",
    }
}

#[derive(Clone, Debug)]
pub struct BenchParams {
    pub workers: usize,
    pub timeout: Duration,
    pub analysis: AnalysisOptions,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            workers: 1,
            timeout: Duration::from_secs(120),
            analysis: AnalysisOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("cannot write {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Runs one instance on its own thread. The analysis is told the budget;
/// if it still overruns, the row is reported as a timeout at the budget
/// plus a 5% grace period and the thread is left to finish on its own.
fn run_one(instance: &Instance, params: &BenchParams) -> BenchRow {
    let mut opts = params.analysis.clone();
    opts.timeout = Some(params.timeout);
    opts.reduce |= instance.reduce;
    let (tx, rx) = mpsc::channel();
    let net = instance.net.clone();
    let property = instance.property;
    let start = Instant::now();
    std::thread::spawn(move || {
        let _ = tx.send(analyze(&net, property, &opts));
    });
    let grace = params.timeout + params.timeout / 20;
    let received = rx.recv_timeout(grace);
    let elapsed = start.elapsed();
    let mut row = BenchRow {
        instance: instance.id.clone(),
        family: instance.family.clone(),
        param: instance.param,
        places: instance.net.num_places(),
        transitions: instance.net.num_transitions(),
        property: property_name(property).to_string(),
        outcome: "unknown".into(),
        time_ms: elapsed.as_secs_f64() * 1000.0,
        timeout: false,
        stage_timings: Vec::new(),
    };
    match received {
        Ok(Ok(verdict)) => {
            row.outcome = match verdict.outcome {
                Outcome::Sound => "sound",
                Outcome::Unsound => "unsound",
                Outcome::Unknown => "unknown",
            }
            .into();
            row.timeout = verdict.outcome == Outcome::Unknown && elapsed >= params.timeout;
            row.stage_timings = verdict.stage_timings_ms;
        }
        Ok(Err(_)) => row.outcome = "error".into(),
        Err(_) => row.timeout = true,
    }
    row
}

/// Runs `instances` on `params.workers` threads. `sink` sees the rows in
/// instance order as soon as each prefix is complete.
pub fn run_instances(instances: &[Instance], params: &BenchParams, mut sink: impl FnMut(&BenchRow)) -> Vec<BenchRow> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, BenchRow)>();
    let mut rows = Vec::with_capacity(instances.len());
    std::thread::scope(|scope| {
        for _ in 0..params.workers.max(1) {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(instance) = instances.get(k) else { break };
                if tx.send((k, run_one(instance, params))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (k, row) in rx {
            pending.insert(k, row);
            while let Some(row) = pending.remove(&rows.len()) {
                sink(&row);
                rows.push(row);
            }
        }
    });
    rows
}

/// Runs `suite` and writes the rows to `out_csv`, flushing after each row.
pub fn run_bench_suite(
    suite: Suite,
    max: Option<u64>,
    params: &BenchParams,
    out_csv: &Path,
) -> Result<Vec<BenchRow>, BenchError> {
    let instances = suite_instances(suite, max, 0)?;
    let csv_error = |source| BenchError::Csv {
        path: out_csv.display().to_string(),
        source,
    };
    let mut writer = csv::Writer::from_path(out_csv).map_err(csv_error)?;
    writer.write_record(CSV_HEADER).map_err(csv_error)?;
    writer.flush().map_err(|e| csv_error(e.into()))?;
    let mut failure = None;
    let rows = run_instances(&instances, params, |row| {
        if failure.is_none() {
            let written = writer
                .write_record(row.record())
                .and_then(|_| writer.flush().map_err(Into::into));
            failure = written.err();
        }
    });
    match failure {
        Some(e) => Err(csv_error(e)),
        None => Ok(rows),
    }
}
