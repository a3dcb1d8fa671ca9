use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::point::{fmt_real, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    HypothesisFails,
    Counterexample,
    PreconditionViolated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Verified => "verified",
            Status::HypothesisFails => "hypothesis_fails",
            Status::Counterexample => "counterexample",
            Status::PreconditionViolated => "precondition_violated",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Point,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub hypothesis: f64,
    pub conclusion: f64,
}

impl Tolerances {
    pub fn new(hypothesis: f64, conclusion: f64) -> Self {
        Tolerances { hypothesis, conclusion }
    }

    pub fn uniform(tol: f64) -> Self {
        Tolerances::new(tol, tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(serialize_with = "ser_real")]
    pub hypothesis_residual: f64,
    #[serde(serialize_with = "ser_real")]
    pub conclusion_residual: f64,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

/// Infinite residuals serialize as the string `"+inf"`.
fn ser_real<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&fmt_real(*v))
    }
}

impl CheckReport {
    pub fn new(name: impl Into<String>, tolerances: Tolerances) -> Self {
        CheckReport {
            name: name.into(),
            hypothesis_residual: 0.0,
            conclusion_residual: 0.0,
            status: Status::Verified,
            witnesses: Vec::new(),
            tolerances,
            notes: Vec::new(),
        }
    }

    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_residual <= self.tolerances.hypothesis
    }

    pub fn conclusion_holds(&self) -> bool {
        self.conclusion_residual <= self.tolerances.conclusion
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Writes reports as a JSON array.
pub fn write_reports_json<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// One CSV row per report. Witness coordinates are space-separated within
/// a point and `|`-separated across points.
pub fn write_reports_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "check_name",
        "status",
        "hypothesis_residual",
        "conclusion_residual",
        "witness_coords",
        "tolerance",
    ])?;
    for r in reports {
        let coords = r
            .witnesses
            .iter()
            .map(|w| w.point.iter().map(|c| fmt_real(*c)).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            r.name.clone(),
            r.status.to_string(),
            fmt_real(r.hypothesis_residual),
            fmt_real(r.conclusion_residual),
            coords,
            fmt_real(r.tolerances.conclusion),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Keeps the worst few violations seen, in a deterministic order.
#[derive(Debug, Default)]
pub struct WitnessLog {
    entries: Vec<(f64, usize, Witness)>,
    seen: usize,
}

pub const MAX_WITNESSES: usize = 5;

impl WitnessLog {
    pub fn new() -> Self {
        WitnessLog::default()
    }

    pub fn push(&mut self, point: Point, detail: String, magnitude: f64) {
        self.entries.push((magnitude, self.seen, Witness { point, detail }));
        self.seen += 1;
        if self.entries.len() > 4 * MAX_WITNESSES {
            self.truncate();
        }
    }

    fn truncate(&mut self) {
        self.entries
            .sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut kept: Vec<(f64, usize, Witness)> = Vec::with_capacity(MAX_WITNESSES);
        for e in self.entries.drain(..) {
            if kept.len() == MAX_WITNESSES {
                break;
            }
            if !kept.iter().any(|k| k.2.point == e.2.point) {
                kept.push(e);
            }
        }
        self.entries = kept;
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Witnesses ordered from the largest violation down.
    pub fn into_witnesses(mut self) -> Vec<Witness> {
        self.truncate();
        self.entries.into_iter().map(|e| e.2).collect()
    }
}
