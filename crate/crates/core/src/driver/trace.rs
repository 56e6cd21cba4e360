//! Trace files: one row per iteration of either phase.
//!
//! The CSV header is fixed (see [`TRACE_HEADER`]); columns that do not apply
//! to a row's phase are left empty. Floats are written with Rust's shortest
//! round-trip formatting, so a trace read back compares bit-for-bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Result, SolverError};
use crate::phase1::{IterKind, IterationRecord};
use crate::phase2::Phase2Record;

/// Which phase produced a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Phase1,
    Phase2,
}

/// Union of the phase-1 and phase-2 per-iteration rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub k: usize,
    pub kind: IterKind,
    pub f: f64,
    pub c_norm: f64,
    pub s_norm: f64,
    // Phase 1.
    pub v: Option<f64>,
    pub gv_norm: Option<f64>,
    pub n_norm: Option<f64>,
    pub t_norm: Option<f64>,
    pub lambda_v: Option<f64>,
    pub lambda_f: Option<f64>,
    pub delta_v: Option<f64>,
    pub delta_f: Option<f64>,
    pub delta_vmax: Option<f64>,
    pub vmax: Option<f64>,
    pub sigma_v: Option<f64>,
    pub rho_f: Option<f64>,
    pub rho_v: Option<f64>,
    pub v_trial: Option<f64>,
    pub vmax_next: Option<f64>,
    pub delta_v_next: Option<f64>,
    pub delta_f_next: Option<f64>,
    pub delta_vmax_next: Option<f64>,
    pub mv_n: Option<f64>,
    pub mv_s: Option<f64>,
    pub hv_norm: Option<f64>,
    pub hv_t_norm: Option<f64>,
    pub nt_dot: Option<f64>,
    // Phase 2.
    pub accepted: Option<bool>,
    pub t: Option<f64>,
    pub phi: Option<f64>,
    pub r_norm: Option<f64>,
    pub grad_phi_norm: Option<f64>,
    pub delta: Option<f64>,
    pub delta_max: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub phi_trial: Option<f64>,
    pub t_next: Option<f64>,
}

/// The CSV header, in column order.
pub const TRACE_HEADER: [&str; 41] = [
    "phase",
    "k",
    "kind",
    "f",
    "c_norm",
    "s_norm",
    "v",
    "gv_norm",
    "n_norm",
    "t_norm",
    "lambda_v",
    "lambda_f",
    "delta_v",
    "delta_f",
    "delta_vmax",
    "vmax",
    "sigma_v",
    "rho_f",
    "rho_v",
    "v_trial",
    "vmax_next",
    "delta_v_next",
    "delta_f_next",
    "delta_vmax_next",
    "mv_n",
    "mv_s",
    "hv_norm",
    "hv_t_norm",
    "nt_dot",
    "accepted",
    "t",
    "phi",
    "r_norm",
    "grad_phi_norm",
    "delta",
    "delta_max",
    "sigma",
    "lambda",
    "rho",
    "phi_trial",
    "t_next",
];

impl TraceRecord {
    fn blank(phase: Phase, k: usize, kind: IterKind, f: f64, c_norm: f64, s_norm: f64) -> Self {
        Self {
            phase,
            k,
            kind,
            f,
            c_norm,
            s_norm,
            v: None,
            gv_norm: None,
            n_norm: None,
            t_norm: None,
            lambda_v: None,
            lambda_f: None,
            delta_v: None,
            delta_f: None,
            delta_vmax: None,
            vmax: None,
            sigma_v: None,
            rho_f: None,
            rho_v: None,
            v_trial: None,
            vmax_next: None,
            delta_v_next: None,
            delta_f_next: None,
            delta_vmax_next: None,
            mv_n: None,
            mv_s: None,
            hv_norm: None,
            hv_t_norm: None,
            nt_dot: None,
            accepted: None,
            t: None,
            phi: None,
            r_norm: None,
            grad_phi_norm: None,
            delta: None,
            delta_max: None,
            sigma: None,
            lambda: None,
            rho: None,
            phi_trial: None,
            t_next: None,
        }
    }

    pub fn from_phase1(r: &IterationRecord) -> Self {
        Self {
            v: Some(r.v),
            gv_norm: Some(r.gv_norm),
            n_norm: Some(r.n_norm),
            t_norm: Some(r.t_norm),
            lambda_v: Some(r.lambda_v),
            lambda_f: Some(r.lambda_f),
            delta_v: Some(r.delta_v),
            delta_f: Some(r.delta_f),
            delta_vmax: Some(r.delta_vmax),
            vmax: Some(r.vmax),
            sigma_v: Some(r.sigma_v),
            rho_f: Some(r.rho_f),
            rho_v: Some(r.rho_v),
            v_trial: Some(r.v_trial),
            vmax_next: Some(r.vmax_next),
            delta_v_next: Some(r.delta_v_next),
            delta_f_next: Some(r.delta_f_next),
            delta_vmax_next: Some(r.delta_vmax_next),
            mv_n: Some(r.mv_n),
            mv_s: Some(r.mv_s),
            hv_norm: Some(r.hv_norm),
            hv_t_norm: Some(r.hv_t_norm),
            nt_dot: Some(r.nt_dot),
            ..Self::blank(Phase::Phase1, r.k, r.kind, r.f, r.c_norm, r.s_norm)
        }
    }

    pub fn from_phase2(r: &Phase2Record) -> Self {
        Self {
            accepted: Some(r.accepted),
            t: Some(r.t),
            phi: Some(r.phi),
            r_norm: Some(r.r_norm),
            grad_phi_norm: Some(r.grad_norm),
            delta: Some(r.delta),
            delta_max: Some(r.delta_max),
            sigma: Some(r.sigma),
            lambda: Some(r.lambda),
            rho: Some(r.rho),
            phi_trial: Some(r.phi_trial),
            t_next: Some(r.t_next),
            ..Self::blank(Phase::Phase2, r.k, r.kind, r.f, r.c_norm, r.s_norm)
        }
    }

    fn missing(&self, column: &str) -> SolverError {
        SolverError::Io(format!(
            "trace row {:?} k={} lacks column `{column}`",
            self.phase, self.k
        ))
    }

    /// Recovers the phase-1 record; fails on phase-2 rows or missing columns.
    pub fn to_phase1(&self) -> Result<IterationRecord> {
        if self.phase != Phase::Phase1 {
            return Err(self.missing("phase = phase1"));
        }
        macro_rules! col {
            ($name:ident) => {
                self.$name.ok_or_else(|| self.missing(stringify!($name)))?
            };
        }
        Ok(IterationRecord {
            k: self.k,
            kind: self.kind,
            f: self.f,
            v: col!(v),
            c_norm: self.c_norm,
            gv_norm: col!(gv_norm),
            n_norm: col!(n_norm),
            t_norm: col!(t_norm),
            s_norm: self.s_norm,
            lambda_v: col!(lambda_v),
            lambda_f: col!(lambda_f),
            delta_v: col!(delta_v),
            delta_f: col!(delta_f),
            delta_vmax: col!(delta_vmax),
            vmax: col!(vmax),
            sigma_v: col!(sigma_v),
            rho_f: col!(rho_f),
            rho_v: col!(rho_v),
            v_trial: col!(v_trial),
            vmax_next: col!(vmax_next),
            delta_v_next: col!(delta_v_next),
            delta_f_next: col!(delta_f_next),
            delta_vmax_next: col!(delta_vmax_next),
            mv_n: col!(mv_n),
            mv_s: col!(mv_s),
            hv_norm: col!(hv_norm),
            hv_t_norm: col!(hv_t_norm),
            nt_dot: col!(nt_dot),
        })
    }

    /// Recovers the phase-2 record; fails on phase-1 rows or missing columns.
    pub fn to_phase2(&self) -> Result<Phase2Record> {
        if self.phase != Phase::Phase2 {
            return Err(self.missing("phase = phase2"));
        }
        macro_rules! col {
            ($name:ident) => {
                self.$name.ok_or_else(|| self.missing(stringify!($name)))?
            };
        }
        Ok(Phase2Record {
            k: self.k,
            kind: self.kind,
            accepted: col!(accepted),
            f: self.f,
            c_norm: self.c_norm,
            t: col!(t),
            phi: col!(phi),
            r_norm: col!(r_norm),
            grad_norm: col!(grad_phi_norm),
            s_norm: self.s_norm,
            delta: col!(delta),
            delta_max: col!(delta_max),
            sigma: col!(sigma),
            lambda: col!(lambda),
            rho: col!(rho),
            phi_trial: col!(phi_trial),
            t_next: col!(t_next),
        })
    }
}

/// Concatenates the phase-1 and phase-2 traces of one run.
pub fn build_trace(phase1: &[IterationRecord], phase2: &[Phase2Record]) -> Vec<TraceRecord> {
    phase1
        .iter()
        .map(TraceRecord::from_phase1)
        .chain(phase2.iter().map(TraceRecord::from_phase2))
        .collect()
}

/// Trace serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(TraceFormat::Csv),
            "json" => Some(TraceFormat::Json),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRecord], format: TraceFormat) -> Result<()> {
    match format {
        TraceFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(TRACE_HEADER)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        TraceFormat::Json => {
            let mut out = out;
            let objects = rows.iter().map(json_row).collect::<Result<Vec<_>>>()?;
            serde_json::to_writer_pretty(&mut out, &objects)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// One row as a JSON object. Cells go through their CSV text so that
/// non-finite values (the `ρ = +∞` sentinels) survive as strings.
fn json_row(row: &TraceRecord) -> Result<Map<String, Value>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(row)?;
    let bytes = w.into_inner().map_err(|e| SolverError::Io(e.to_string()))?;
    let record = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes.as_slice())
        .records()
        .next()
        .ok_or_else(|| SolverError::Io("empty trace row".into()))??;
    Ok(TRACE_HEADER
        .iter()
        .zip(record.iter())
        .map(|(name, cell)| (name.to_string(), json_cell(cell)))
        .collect())
}

fn json_cell(cell: &str) -> Value {
    if cell.is_empty() {
        Value::Null
    } else if let Ok(i) = cell.parse::<u64>() {
        Value::from(i)
    } else if let Ok(b) = cell.parse::<bool>() {
        Value::Bool(b)
    } else if let Some(n) = cell.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
        Value::Number(n)
    } else {
        Value::String(cell.to_string())
    }
}

fn cell_text(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn from_json_row(object: &Map<String, Value>) -> Result<TraceRecord> {
    let cells: Vec<String> = TRACE_HEADER
        .iter()
        .map(|name| object.get(*name).map(cell_text).unwrap_or_default())
        .collect();
    let header = csv::StringRecord::from(TRACE_HEADER.to_vec());
    Ok(csv::StringRecord::from(cells).deserialize(Some(&header))?)
}

pub fn read_trace<R: Read>(input: R, format: TraceFormat) -> Result<Vec<TraceRecord>> {
    match format {
        TraceFormat::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header = r.headers()?.clone();
            if !header.iter().eq(TRACE_HEADER.iter().copied()) {
                return Err(SolverError::Io("trace header does not match the fixed column set".into()));
            }
            r.deserialize().map(|row| row.map_err(SolverError::from)).collect()
        }
        TraceFormat::Json => {
            let objects: Vec<Map<String, Value>> = serde_json::from_reader(input)?;
            objects.iter().map(from_json_row).collect()
        }
    }
}

pub fn trace_to_string(rows: &[TraceRecord], format: TraceFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(&mut buf, rows, format)?;
    String::from_utf8(buf).map_err(|e| SolverError::Io(e.to_string()))
}
