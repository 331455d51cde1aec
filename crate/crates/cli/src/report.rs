//! Persistence: plot-ready CSVs and the JSON run report.
//!
//! Serialized outputs are pure functions of (config, seed): no wall-clock
//! timestamps or host information, so repeated runs are byte-identical and
//! diffable in tests.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use growgraph::stats::{ETracePoint, EnsembleSummary};

use crate::config::RunConfig;
use crate::Result;

/// One acceptance-check row of the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub anchor: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    /// `|measured - target| <= tolerance`.
    pub fn near(
        criterion: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            criterion: criterion.into(),
            anchor: anchor.into(),
            measured,
            target,
            tolerance,
            pass: (measured - target).abs() <= tolerance,
        }
    }

    /// `measured <= target + tolerance`.
    pub fn at_most(
        criterion: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            criterion: criterion.into(),
            anchor: anchor.into(),
            measured,
            target,
            tolerance,
            pass: measured <= target + tolerance,
        }
    }

    /// `measured >= target - tolerance`.
    pub fn at_least(
        criterion: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            criterion: criterion.into(),
            anchor: anchor.into(),
            measured,
            target,
            tolerance,
            pass: measured >= target - tolerance,
        }
    }
}

/// Full JSON report of a run or a verification suite.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: Option<RunConfig>,
    pub seed_derivation: &'static str,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

impl RunReport {
    pub fn new(config: Option<RunConfig>, verdicts: Vec<Verdict>) -> Self {
        let all_pass = verdicts.iter().all(|v| v.pass);
        Self {
            config,
            seed_derivation:
                "replica_seed(master, i) = splitmix64(master XOR (i+1)*0x9E3779B97F4A7C15)",
            verdicts,
            all_pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

/// Degree-distribution CSV: empirical ensemble columns plus the analytic
/// lower/upper/plug-in solutions where available.
pub fn degree_csv(
    summary: &EnsembleSummary,
    d_lower: Option<&[f64]>,
    d_upper: Option<&[f64]>,
    d_plugin: Option<&[f64]>,
) -> String {
    let mut out = String::from("k,count_mean,fraction_mean,ci_half,d_lower,d_upper,d_plugin\n");
    for k in 0..summary.count_mean.len() {
        let get = |d: Option<&[f64]>| fmt_opt(d.and_then(|d| d.get(k).copied()));
        let _ = writeln!(
            out,
            "{k},{:.12e},{:.12e},{:.12e},{},{},{}",
            summary.count_mean[k],
            summary.mean_fraction[k],
            summary.ci_half[k],
            get(d_lower),
            get(d_upper),
            get(d_plugin),
        );
    }
    out
}

/// Recurrence-solution CSV for the `solve` subcommand.
pub fn solution_csv(d_lower: &[f64], d_upper: &[f64], d_plugin: Option<&[f64]>) -> String {
    let mut out = String::from("k,d_lower,d_upper,d_plugin\n");
    let n = d_lower.len().max(d_upper.len());
    for k in 0..n {
        let _ = writeln!(
            out,
            "{k},{},{},{}",
            fmt_opt(d_lower.get(k).copied()),
            fmt_opt(d_upper.get(k).copied()),
            fmt_opt(d_plugin.and_then(|d| d.get(k).copied())),
        );
    }
    out
}

pub fn increment_csv(freq: &[f64]) -> String {
    let mut out = String::from("k,frequency\n");
    for (k, f) in freq.iter().enumerate() {
        let _ = writeln!(out, "{k},{f:.12e}");
    }
    out
}

pub fn trace_csv(trace: &[ETracePoint]) -> String {
    let mut out = String::from("t,e_mean,e_min,e_max\n");
    for p in trace {
        let _ = writeln!(out, "{},{:.6},{},{}", p.t, p.e_mean, p.e_min, p.e_max);
    }
    out
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_comparisons() {
        assert!(Verdict::near("c", "a", 1.0, 1.05, 0.1).pass);
        assert!(!Verdict::near("c", "a", 1.0, 1.2, 0.1).pass);
        assert!(Verdict::at_most("c", "a", 0.9, 1.0, 0.0).pass);
        assert!(!Verdict::at_most("c", "a", 1.1, 1.0, 0.05).pass);
        assert!(Verdict::at_least("c", "a", 1.1, 1.0, 0.0).pass);
    }

    #[test]
    fn csv_headers_match_contract() {
        let header = degree_csv(
            &empty_summary(),
            None,
            None,
            None,
        );
        assert!(header.starts_with("k,count_mean,fraction_mean,ci_half,d_lower,d_upper,d_plugin\n"));
        assert!(increment_csv(&[0.5, 0.5]).starts_with("k,frequency\n"));
        assert!(trace_csv(&[]).starts_with("t,e_mean,e_min,e_max\n"));
        assert!(solution_csv(&[1.0], &[2.0], None).starts_with("k,d_lower,d_upper,d_plugin\n"));
    }

    #[test]
    fn report_json_has_verdict_schema() {
        let report = RunReport::new(None, vec![Verdict::near("demo", "anchor-tag", 1.0, 1.0, 0.1)]);
        let json = report.to_json().unwrap();
        for key in ["\"anchor\"", "\"measured\"", "\"target\"", "\"tolerance\"", "\"pass\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert!(report.all_pass);
    }

    fn empty_summary() -> EnsembleSummary {
        use growgraph::histogram::{run_process, ObservationPlan};
        use growgraph::{ModelKind, ModelParams};
        let params = ModelParams::ba(1.0).unwrap();
        let plan = ObservationPlan::default_for(16);
        let runs =
            vec![run_process(&params, ModelKind::Ba, 16, 1, &plan).unwrap()];
        EnsembleSummary::from_trajectories(16, &runs).unwrap()
    }
}
