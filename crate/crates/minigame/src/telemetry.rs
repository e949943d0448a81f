//! Line-delimited JSON telemetry: one record per line.

use std::io::Write;

use minigame_core::engine::TelemetryRecord;

use crate::error::{Error, Result};

pub fn write_jsonl<W: Write>(records: &[TelemetryRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl(records: &[TelemetryRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses telemetry text; blank lines are skipped.
pub fn parse_jsonl(text: &str, origin: &str) -> Result<Vec<TelemetryRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(origin, i + 1, e.to_string())))
        .collect()
}
