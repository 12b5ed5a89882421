use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Self-describing record of one run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub wall_time_ms: u64,
    pub version: String,
}

enum Sink {
    Text { out: Box<dyn Write>, header: Vec<String> },
    Json { out: Box<dyn Write> },
    Csv { out: Box<csv::Writer<Box<dyn Write>>> },
}

/// Writes table rows as they are produced (text and csv) and the final
/// report (json, plus a summary for text).
pub struct Emitter {
    sink: Sink,
}

impl Emitter {
    pub fn open(format: Format, path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        let sink = match format {
            Format::Text => Sink::Text { out, header: Vec::new() },
            Format::Json => Sink::Json { out },
            Format::Csv => Sink::Csv { out: Box::new(csv::Writer::from_writer(out)) },
        };
        Ok(Emitter { sink })
    }

    pub fn header(&mut self, columns: &[&str]) -> io::Result<()> {
        match &mut self.sink {
            Sink::Text { header, .. } => *header = columns.iter().map(|c| c.to_string()).collect(),
            Sink::Json { .. } => {}
            Sink::Csv { out } => {
                out.write_record(columns)?;
                out.flush()?;
            }
        }
        Ok(())
    }

    pub fn row(&mut self, values: &[String]) -> io::Result<()> {
        match &mut self.sink {
            Sink::Text { out, header } => {
                let fields: Vec<String> = header.iter().zip(values).map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(out, "{}", fields.join("  "))?;
                out.flush()?;
            }
            Sink::Json { .. } => {}
            Sink::Csv { out } => {
                out.write_record(values)?;
                out.flush()?;
            }
        }
        Ok(())
    }

    pub fn finish(self, report: &RunReport, summary: &[String]) -> io::Result<()> {
        match self.sink {
            Sink::Text { mut out, .. } => {
                for line in summary {
                    writeln!(out, "{line}")?;
                }
                writeln!(out, "{} finished in {} ms", report.command, report.wall_time_ms)?;
                out.flush()
            }
            Sink::Json { mut out } => {
                serde_json::to_writer_pretty(&mut out, report)?;
                writeln!(out)?;
                out.flush()
            }
            Sink::Csv { mut out } => out.flush(),
        }
    }
}
