//! Verdicts and their certificates, in the JSON shape emitted by `wfsound analyze`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wfsound_smt::KValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Property {
    GenSound,
    StructSound,
    ContSound,
    IntBounded,
    QuasiSound {
        k: u64,
    },
    KSound {
        k: u64,
    },
    /// 1-, generalised and structural soundness of a free-choice net, which coincide.
    FreeChoiceSound,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::GenSound => write!(f, "gen-sound"),
            Property::StructSound => write!(f, "struct-sound"),
            Property::ContSound => write!(f, "cont-sound"),
            Property::IntBounded => write!(f, "int-bounded"),
            Property::QuasiSound { k } => write!(f, "quasi-sound({k})"),
            Property::KSound { k } => write!(f, "k-sound({k})"),
            Property::FreeChoiceSound => write!(f, "free-choice-sound"),
        }
    }
}

/// Whether the property holds. For `int-bounded`, `Unsound` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Sound,
    Unsound,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Sound => write!(f, "Sound"),
            Outcome::Unsound => write!(f, "Unsound"),
            Outcome::Unknown => write!(f, "Unknown"),
        }
    }
}

/// Markings and Parikh vectors are keyed by place and transition names,
/// with rational values written as `p/q` strings and zero entries omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// i:1 reaches `marking` continuously, and `marking` cannot reach f:1.
    ContinuousWitness { marking: BTreeMap<String, String> },
    /// x ≥ 0 with Δx ≥ 0 and Δx ≠ 0. For generalised soundness this is
    /// stated for the net without its redundant places.
    IntegerUnbounded { parikh: BTreeMap<String, String> },
    /// f:1 is not continuously reachable from i:1, so no k is quasi-sound.
    ContinuouslyUnreachable {
        fixpoint_support: Vec<String>,
        reason: String,
    },
    /// The state equation with an integral Parikh vector has no solution for any k.
    NoQuasiSoundK { k_z: KValue, k_q: KValue },
    /// k_n is the least quasi-sound k (`quasi_run` reaches f:k_n), and
    /// `run` leads from i:k_n to `marking`, which cannot reach f:k_n.
    StructuralCounterexample {
        k_n: u64,
        quasi_run: Vec<String>,
        run: Vec<String>,
        marking: BTreeMap<String, u64>,
    },
    /// `run` leads from i:k to `marking`, which cannot reach f:k.
    OracleCounterexample {
        k: u64,
        run: Vec<String>,
        marking: BTreeMap<String, u64>,
    },
    /// Exhaustive exploration from i:k never meets f:k.
    NotQuasiSound { k: u64 },
    /// `run` leads from i:k to f:k.
    QuasiSoundRun { k: u64, run: Vec<String> },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::ContinuousWitness { .. } => "continuous-witness",
            Certificate::IntegerUnbounded { .. } => "integer-unbounded",
            Certificate::ContinuouslyUnreachable { .. } => "continuously-unreachable",
            Certificate::NoQuasiSoundK { .. } => "no-quasi-sound-k",
            Certificate::StructuralCounterexample { .. } => "structural-counterexample",
            Certificate::OracleCounterexample { .. } => "oracle-counterexample",
            Certificate::NotQuasiSound { .. } => "not-quasi-sound",
            Certificate::QuasiSoundRun { .. } => "quasi-sound-run",
        }
    }

    pub fn summary(&self) -> String {
        fn marking<V: fmt::Display>(m: &BTreeMap<String, V>) -> String {
            let parts: Vec<String> = m.iter().map(|(p, v)| format!("{p}:{v}")).collect();
            format!("{{{}}}", parts.join(", "))
        }
        match self {
            Certificate::ContinuousWitness { marking: m } => format!("stuck marking {}", marking(m)),
            Certificate::IntegerUnbounded { parikh } => format!("growing Parikh vector {}", marking(parikh)),
            Certificate::ContinuouslyUnreachable { reason, .. } => format!("f:1 unreachable from i:1 ({reason})"),
            Certificate::NoQuasiSoundK { .. } => "no k satisfies the integral state equation".into(),
            Certificate::StructuralCounterexample { k_n, marking: m, .. } => {
                format!("k_N = {k_n}; {} cannot reach f:{k_n}", marking(m))
            }
            Certificate::OracleCounterexample { k, marking: m, .. } => format!("{} cannot reach f:{k}", marking(m)),
            Certificate::NotQuasiSound { k } => format!("f:{k} unreachable from i:{k}"),
            Certificate::QuasiSoundRun { k, run } => format!("run of length {} from i:{k} to f:{k}", run.len()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KReport {
    pub k_z: KValue,
    pub k_q: KValue,
    /// Least quasi-sound k, confirmed by the oracle.
    pub k_n: Option<u64>,
    pub cap: u64,
}

impl KReport {
    /// k_z ≤ k_q ≤ k_n wherever the values are determined.
    pub fn is_ordered(&self) -> bool {
        let bounds = wfsound_smt::KBounds {
            k_z: self.k_z,
            k_q: self.k_q,
            cap: self.cap,
        };
        let upper = match (self.k_q, self.k_n) {
            (KValue::Finite(q), Some(n)) => q <= n,
            (KValue::Infinite, Some(_)) => false,
            _ => true,
        };
        bounds.is_ordered() && upper
    }
}

impl fmt::Display for KReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k_z = {}, k_q = {}", self.k_z, self.k_q)?;
        if let Some(k) = self.k_n {
            write!(f, ", k_N = {k}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub net: String,
    pub property: Property,
    pub outcome: Outcome,
    pub summary: String,
    pub diagnostics: Option<String>,
    pub certificate: Option<Certificate>,
    pub k_bounds: Option<KReport>,
    pub stage_timings_ms: Vec<StageTiming>,
}

impl Verdict {
    pub fn new(net: &str, property: Property, outcome: Outcome, summary: impl Into<String>) -> Self {
        Verdict {
            net: net.to_string(),
            property,
            outcome,
            summary: summary.into(),
            diagnostics: None,
            certificate: None,
            k_bounds: None,
            stage_timings_ms: Vec::new(),
        }
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> Self {
        self.certificate = Some(certificate);
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: impl Into<String>) -> Self {
        self.diagnostics = Some(diagnostics.into());
        self
    }

    pub fn total_ms(&self) -> f64 {
        self.stage_timings_ms.iter().map(|s| s.ms).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }

    /// One line: outcome, summary, and the certificate or diagnostics.
    pub fn text_line(&self) -> String {
        let mut line = format!("{}: {}", self.outcome, self.summary);
        if let Some(c) = &self.certificate {
            line.push_str(&format!(" [{}]", c.summary()));
        } else if let Some(d) = &self.diagnostics {
            line.push_str(&format!(" [{d}]"));
        }
        if let Some(k) = &self.k_bounds {
            line.push_str(&format!(" ({k})"));
        }
        line
    }
}

/// Collects per-stage durations.
#[derive(Debug, Default)]
pub(crate) struct Stages(pub Vec<StageTiming>);

impl Stages {
    pub fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.push(stage, start.elapsed());
        out
    }

    pub fn push(&mut self, stage: &str, elapsed: Duration) {
        self.0.push(StageTiming {
            stage: stage.to_string(),
            ms: elapsed.as_secs_f64() * 1000.0,
        });
    }
}
