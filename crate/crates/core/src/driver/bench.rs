//! Benchmark harness: every (problem, mode) cell of a manifest, one row each.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{solve, BenchmarkRow, RunConfig, SolveOutcome};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::phase1::Mode;
use crate::problems::ProblemDescriptor;

/// A benchmark manifest: either a bare array of descriptors or an object
/// with a `problems` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Manifest {
    List(Vec<ProblemDescriptor>),
    Object { problems: Vec<ProblemDescriptor> },
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn problems(&self) -> &[ProblemDescriptor] {
        match self {
            Manifest::List(p) | Manifest::Object { problems: p } => p,
        }
    }
}

/// Rows in manifest order, each problem's modes adjacent.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

/// Runs every cell, visiting each outcome inside its worker; per-cell
/// failures become error rows and never abort the batch.
pub fn run_benchmark_with<X, F>(
    manifest: &[ProblemDescriptor],
    modes: &[Mode],
    config: &RunConfig,
    exec: Execution,
    visit: F,
) -> (BenchmarkTable, Vec<Option<X>>)
where
    X: Send,
    F: Fn(&SolveOutcome) -> X + Sync + Send,
{
    let cells: Vec<(&ProblemDescriptor, Mode)> = manifest
        .iter()
        .flat_map(|d| modes.iter().map(move |&m| (d, m)))
        .collect();
    let results = par::map(exec, &cells, |&(desc, mode)| {
        let started = Instant::now();
        let cfg = RunConfig {
            mode,
            ..config.clone()
        };
        match desc.resolve().and_then(|p| solve(&p, &cfg)) {
            Ok(outcome) => {
                let extra = visit(&outcome);
                (outcome.row, Some(extra))
            }
            Err(e) => {
                let mut row = BenchmarkRow::failed(&desc.name, desc.n, desc.m, mode, e.to_string());
                row.wall_time_s = started.elapsed().as_secs_f64();
                (row, None)
            }
        }
    });
    let (rows, extras) = results.into_iter().unzip();
    (BenchmarkTable { rows }, extras)
}

pub fn run_benchmark(
    manifest: &[ProblemDescriptor],
    modes: &[Mode],
    config: &RunConfig,
    exec: Execution,
) -> BenchmarkTable {
    run_benchmark_with(manifest, modes, config, exec, |_| ()).0
}

impl BenchmarkTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::SolverError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::error::SolverError::Io(e.to_string()))
    }

    /// Human-readable table with aligned columns.
    pub fn to_text(&self) -> String {
        let header = [
            "problem", "n", "m", "mode", "#V", "#F", "f(phase1)", "|g+J'y|", "p2 acc", "p2 rej", "status", "time[s]",
        ];
        let opt = |x: f64| if x.is_nan() { "-".to_string() } else { format!("{x:.2e}") };
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.problem.clone(),
                    r.n.to_string(),
                    r.m.to_string(),
                    r.mode.as_str().to_string(),
                    r.phase1_v.to_string(),
                    r.phase1_f.to_string(),
                    opt(r.phase1_obj),
                    opt(r.phase1_dual_inf),
                    r.phase2_accepted.to_string(),
                    r.phase2_rejected.to_string(),
                    r.status.clone(),
                    format!("{:.3}", r.wall_time_s),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|j| cells.iter().map(|c| c[j].len()).chain([header[j].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let parts: Vec<String> = items
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    if j == 0 || j == 3 || j == 10 {
                        format!("{s:<w$}", w = widths[j])
                    } else {
                        format!("{s:>w$}", w = widths[j])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header.map(String::from));
        for c in &cells {
            line(&mut out, c);
        }
        out
    }
}

/// Full versus v-only phase-2 effort over the problems present in both modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub problems: usize,
    /// Problems where full mode's phase-2 iteration count is ≤ v-only's.
    pub full_le_vonly: usize,
    pub full_total: usize,
    pub vonly_total: usize,
}

impl ComparisonSummary {
    pub fn fraction(&self) -> f64 {
        if self.problems == 0 {
            0.0
        } else {
            self.full_le_vonly as f64 / self.problems as f64
        }
    }

    /// At least `share` of problems favour full mode and its total is strictly smaller.
    pub fn full_mode_wins(&self, share: f64) -> bool {
        self.problems > 0 && self.fraction() >= share && self.full_total < self.vonly_total
    }
}

impl std::fmt::Display for ComparisonSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "phase-2 iterations: full <= v-only on {}/{} problems ({:.0}%); totals full {} vs v-only {}",
            self.full_le_vonly,
            self.problems,
            100.0 * self.fraction(),
            self.full_total,
            self.vonly_total
        )
    }
}

pub fn comparison_summary(rows: &[BenchmarkRow]) -> ComparisonSummary {
    let mut summary = ComparisonSummary {
        problems: 0,
        full_le_vonly: 0,
        full_total: 0,
        vonly_total: 0,
    };
    for full in rows.iter().filter(|r| r.mode == Mode::Full) {
        let Some(vonly) = rows.iter().find(|r| r.mode == Mode::VOnly && r.problem == full.problem) else {
            continue;
        };
        let (a, b) = (full.phase2_iterations(), vonly.phase2_iterations());
        summary.problems += 1;
        summary.full_total += a;
        summary.vonly_total += b;
        if a <= b {
            summary.full_le_vonly += 1;
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, mode: Mode, p2: usize) -> BenchmarkRow {
        let mut r = BenchmarkRow::failed(problem, 2, 1, mode, String::new());
        r.phase2_accepted = p2;
        r
    }

    #[test]
    fn summary_counts_pairs() {
        let rows = vec![
            row("A", Mode::Full, 3),
            row("A", Mode::VOnly, 5),
            row("B", Mode::Full, 7),
            row("B", Mode::VOnly, 7),
            row("C", Mode::Full, 9),
            row("C", Mode::VOnly, 2),
            row("D", Mode::Full, 1),
        ];
        let s = comparison_summary(&rows);
        assert_eq!(s.problems, 3);
        assert_eq!(s.full_le_vonly, 2);
        assert_eq!((s.full_total, s.vonly_total), (19, 14));
        assert!(!s.full_mode_wins(0.6));
    }

    #[test]
    fn manifest_shapes() {
        let list = r#"[{"name":"HS6","n":2,"m":1,"x0":[-1.2,1.0]}]"#;
        let obj = r#"{"problems":[{"name":"HS6","n":2,"m":1,"x0":[-1.2,1.0]}]}"#;
        assert_eq!(Manifest::parse(list).unwrap().problems(), Manifest::parse(obj).unwrap().problems());
        assert!(Manifest::parse("{}").is_err());
    }

    #[test]
    fn bad_descriptor_becomes_error_row() {
        let manifest = vec![ProblemDescriptor {
            name: "NOPE".into(),
            n: 1,
            m: 1,
            x0: vec![0.0],
        }];
        let t = run_benchmark(&manifest, &[Mode::Full, Mode::VOnly], &RunConfig::default(), Execution::Sequential);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.status == "error" && r.exit_code == 2));
        assert!(t.to_text().lines().count() == 3);
        assert!(t.to_csv().unwrap().starts_with("problem,n,m,mode,"));
    }
}
