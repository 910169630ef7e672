use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// The fields of an iteration line the CSV needs; everything else is ignored.
#[derive(Debug, Deserialize)]
struct Row {
    #[serde(rename = "type")]
    kind: String,
    k: Option<usize>,
    objective: Option<f64>,
    f1: Option<f64>,
    cut_count: Option<usize>,
    restart: Option<bool>,
}

/// Converts a JSONL trace into CSV with columns `k,J,F1,cuts,restart`, after
/// checking that `J` never decreases.
pub fn trace_to_csv(input: impl BufRead, mut out: impl Write) -> Result<usize> {
    writeln!(out, "k,J,F1,cuts,restart")?;
    let mut last: Option<(usize, f64)> = None;
    let mut rows = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).with_context(|| format!("line {}: not a trace event", i + 1))?;
        match row.kind.as_str() {
            "cut" => continue,
            "iteration" => {}
            other => bail!("line {}: unknown event type `{other}`", i + 1),
        }
        let (Some(k), Some(j), Some(cuts), Some(restart)) = (row.k, row.objective, row.cut_count, row.restart) else {
            bail!("line {}: iteration event is missing fields", i + 1);
        };
        if let Some((pk, pj)) = last {
            if j < pj - 1e-10 {
                bail!("line {}: J decreases from {pj} at k = {pk} to {j} at k = {k}", i + 1);
            }
        }
        last = Some((k, j));
        let f1 = row.f1.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{k},{j},{f1},{cuts},{}", restart as u8)?;
        rows += 1;
    }
    Ok(rows)
}

pub fn cmd_trace_export(input: &Path, output: Option<&Path>) -> Result<i32> {
    let file = std::fs::File::open(input).with_context(|| format!("cannot read {}", input.display()))?;
    let reader = BufReader::new(file);
    match output {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = std::io::BufWriter::new(f);
            trace_to_csv(reader, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            trace_to_csv(reader, stdout.lock())?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convert(text: &str) -> Result<String> {
        let mut out = Vec::new();
        trace_to_csv(text.as_bytes(), &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn iterations_become_rows() {
        let jsonl = concat!(
            r#"{"type":"iteration","k":0,"x":[0],"objective":0.0,"level":0.0,"violated":[0],"max_violation":1.0,"cut_count":1,"restart":false,"branch":"point"}"#,
            "\n",
            r#"{"type":"cut","iter":0,"constraint":0,"a":1.0,"b":[0.0],"c":1.0}"#,
            "\n",
            r#"{"type":"iteration","k":1,"x":[1],"objective":1.0,"level":1.0,"violated":[],"max_violation":0.0,"cut_count":1,"restart":true,"branch":"feasible","f1":0.5}"#,
            "\n"
        );
        assert_eq!(convert(jsonl).unwrap(), "k,J,F1,cuts,restart\n0,0,,1,0\n1,1,0.5,1,1\n");
    }

    #[test]
    fn empty_trace_gives_header_only() {
        assert_eq!(convert("").unwrap(), "k,J,F1,cuts,restart\n");
    }

    #[test]
    fn decreasing_objective_is_rejected() {
        let jsonl = concat!(
            r#"{"type":"iteration","k":0,"objective":2.0,"cut_count":0,"restart":false}"#,
            "\n",
            r#"{"type":"iteration","k":1,"objective":1.0,"cut_count":0,"restart":false}"#,
        );
        let err = convert(jsonl).unwrap_err().to_string();
        assert!(err.contains("decreases"), "{err}");
    }

    #[test]
    fn garbage_is_reported_with_its_line() {
        let err = convert("{\"type\":\"iteration\"}\nnot json\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 1"), "{err:#}");
    }
}
