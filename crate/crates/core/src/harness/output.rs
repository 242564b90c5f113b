use std::io::Write;

use crate::error::{Error, Result};
use crate::federation::RunTrace;

use super::ExperimentSummary;

pub const TRACE_HEADER: &str = "run_id,round,fe,x_p_fitness,best_fitness";

fn write_rows<W: Write>(out: &mut csv::Writer<W>, trace: &RunTrace) -> Result<()> {
    for r in &trace.records {
        out.write_record([
            trace.run_id.to_string(),
            r.round.to_string(),
            r.fe.to_string(),
            r.x_p_fitness.to_string(),
            r.best_fitness.to_string(),
        ])?;
    }
    Ok(())
}

/// Write one trace as CSV: header, then the round-0 row and one row per round.
pub fn emit_trace<W: Write>(trace: &RunTrace, dest: W) -> Result<()> {
    emit_traces(std::slice::from_ref(trace), dest)
}

/// Write several traces under a single header.
pub fn emit_traces<W: Write>(traces: &[RunTrace], dest: W) -> Result<()> {
    if traces.iter().any(|t| t.records.is_empty()) {
        return Err(Error::invalid("cannot emit an empty trace"));
    }
    let mut out = csv::Writer::from_writer(dest);
    out.write_record(TRACE_HEADER.split(','))?;
    for t in traces {
        write_rows(&mut out, t)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_summary<W: Write>(summary: &ExperimentSummary, mut dest: W) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| Error::Config(e.to_string()))?;
    dest.write_all(text.as_bytes())?;
    Ok(())
}

pub fn parse_summary(text: &str) -> Result<ExperimentSummary> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}
