//! Every output embeds the resolved command line: JSON files under
//! `"config"`, CSV files as a leading `# config: {...}` comment.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Command;
use crate::commands::{Failure, Outcome};

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => Ok(Box::new(
            File::create(path).map_err(|e| Failure::io(path, e))?,
        )),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_failure(out: Option<&Path>, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        body: json!({"error": "io", "message": format!("{}: {e}", out.map_or("stdout".into(), |p| p.display().to_string()))}),
    }
}

pub fn write_json(out: Option<&Path>, config: &Command, result: &Value) -> Outcome {
    let doc = json!({"config": config, "result": result});
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| io_failure(out, e))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(out, e))
}

/// `# config:` line, `# note` lines, the rows with a header, then `# trailer`
/// lines.
pub fn write_csv<R: Serialize>(
    out: Option<&Path>,
    config: &Command,
    notes: &[String],
    rows: &[R],
    trailer: &[String],
) -> Outcome {
    let mut w = sink(out)?;
    let config = serde_json::to_string(config).map_err(|e| io_failure(out, e))?;
    let head = std::iter::once(format!("config: {config}")).chain(notes.iter().cloned());
    for line in head {
        writeln!(w, "# {line}").map_err(|e| io_failure(out, e))?;
    }
    {
        let mut csv = csv::Writer::from_writer(&mut w);
        for row in rows {
            csv.serialize(row).map_err(|e| io_failure(out, e))?;
        }
        csv.flush().map_err(|e| io_failure(out, e))?;
    }
    for line in trailer {
        writeln!(w, "# {line}").map_err(|e| io_failure(out, e))?;
    }
    w.flush().map_err(|e| io_failure(out, e))
}
