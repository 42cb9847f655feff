use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::AlgoConfig;
use crate::error::{Error, Result};
use crate::regions::{Region, RegionParams};

/// Version of the trajectory JSON and CSV layouts.
pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

/// CSV columns after the `x_i` block.
pub const CSV_TAIL_COLUMNS: [&str; 10] = [
    "f",
    "grad_norm",
    "lambda_minus",
    "nu",
    "delta",
    "step_norm",
    "accepted",
    "region",
    "delta_f",
    "model_decrease",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    EpsFMet,
    FirstOrderMet,
    SecondOrderMet,
    MaxIters,
    Stalled,
    Diverged,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EpsFMet => "eps_f_met",
            Self::FirstOrderMet => "first_order_met",
            Self::SecondOrderMet => "second_order_met",
            Self::MaxIters => "max_iters",
            Self::Stalled => "stalled",
            Self::Diverged => "diverged",
        }
    }
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Serializes non-finite floats as strings so JSON stays valid.
pub(crate) mod lossy_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("invalid number `{t}`"))),
            },
        }
    }
}

/// One row of a trajectory. Row `k` holds the iterate `x_k` and the step
/// attempted from it; the last row is the final iterate with no step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    #[serde(with = "lossy_f64")]
    pub f: f64,
    #[serde(with = "lossy_f64")]
    pub grad_norm: f64,
    pub lambda_minus: Option<f64>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    #[serde(with = "lossy_f64")]
    pub step_norm: f64,
    pub accepted: bool,
    #[serde(with = "lossy_f64")]
    pub model_decrease: f64,
    pub region: Region,
    #[serde(with = "lossy_f64")]
    pub delta_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalCounts {
    pub f: usize,
    pub g: usize,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub schema_version: u32,
    pub objective_id: String,
    pub config: AlgoConfig,
    pub region_params: RegionParams,
    pub x0: Vec<f64>,
    pub f_inf: Option<f64>,
    pub records: Vec<IterateRecord>,
    pub termination_reason: TerminationReason,
    pub evaluations: EvalCounts,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("trajectories are nonempty")
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    pub fn accepted_steps(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }

    /// Structural checks on a deserialized trajectory.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != TRAJECTORY_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported trajectory schema version {}",
                self.schema_version
            )));
        }
        if self.records.is_empty() {
            return Err(Error::Config("trajectory has no records".into()));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.k != i {
                return Err(Error::Config(format!("record {i} has index {}", r.k)));
            }
            if r.x.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    actual: r.x.len(),
                });
            }
        }
        Ok(())
    }

    /// One row per record; columns `k, x_0..x_{n-1}` followed by
    /// [`CSV_TAIL_COLUMNS`]. Floats carry 17 significant digits and absent
    /// values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for i in 0..self.dim() {
            out.push_str(&format!(",x_{i}"));
        }
        for c in CSV_TAIL_COLUMNS {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.k.to_string());
            for xi in &r.x {
                out.push_str(&format!(",{xi:.16e}"));
            }
            out.push_str(&format!(
                ",{:.16e},{:.16e},{},{},{},{:.16e},{},{},{:.16e},{:.16e}\n",
                r.f,
                r.grad_norm,
                opt(r.lambda_minus),
                opt(r.nu),
                opt(r.delta),
                r.step_norm,
                r.accepted,
                r.region,
                r.delta_f,
                r.model_decrease
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn write_files(&self, stem: &Path) -> Result<()> {
        std::fs::write(stem.with_extension("csv"), self.to_csv())?;
        std::fs::write(stem.with_extension("json"), self.to_json()?)?;
        Ok(())
    }
}
