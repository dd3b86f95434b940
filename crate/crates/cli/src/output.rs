use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use hrsearch::fixedpoint::FracWidth;
use hrsearch::oracle::HrCaseRecord;
use hrsearch::pipeline::PhaseStats;
use hrsearch::Result;
use serde::Serialize;

use crate::args::Format;
use crate::io_err;

#[derive(Serialize)]
struct CaseRow {
    arg_bits: String,
    distance_num: u64,
    distance_den_log2: u32,
    domain: u64,
}

impl CaseRow {
    fn new(r: &HrCaseRecord, width: FracWidth) -> Result<Self> {
        Ok(CaseRow {
            arg_bits: format!("0x{:016x}", r.argument.to_f64_bits()?),
            distance_num: r.distance.raw(),
            distance_den_log2: width.bits(),
            domain: r.domain_id,
        })
    }
}

pub fn describe(r: &HrCaseRecord, width: FracWidth) -> String {
    match CaseRow::new(r, width) {
        Ok(row) => serde_json::to_string(&row).expect("plain record"),
        Err(_) => format!("{:?}", r),
    }
}

/// Where results go: files in a directory, or stdout (cases) and stderr (stats).
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(io_err)?;
        }
        Ok(Sink { dir: dir.map(Path::to_path_buf) })
    }

    fn open(&self, name: &str, fallback: fn() -> Box<dyn Write>) -> Result<Box<dyn Write>> {
        Ok(match &self.dir {
            Some(d) => Box::new(BufWriter::new(File::create(d.join(name)).map_err(io_err)?)),
            None => fallback(),
        })
    }

    pub fn write_cases(&self, records: &[HrCaseRecord], format: Format, width: FracWidth) -> Result<()> {
        let name = match format {
            Format::Jsonl => "hr_cases.jsonl",
            Format::Csv => "hr_cases.csv",
        };
        let mut w = self.open(name, || Box::new(BufWriter::new(io::stdout())))?;
        let rows = records.iter().map(|r| CaseRow::new(r, width)).collect::<Result<Vec<_>>>()?;
        match format {
            Format::Jsonl => {
                for row in &rows {
                    serde_json::to_writer(&mut w, row).map_err(io_err)?;
                    writeln!(w).map_err(io_err)?;
                }
            }
            Format::Csv => {
                let mut c = csv::Writer::from_writer(&mut w);
                for row in &rows {
                    c.serialize(row).map_err(io_err)?;
                }
                if rows.is_empty() {
                    c.write_record(["arg_bits", "distance_num", "distance_den_log2", "domain"]).map_err(io_err)?;
                }
                c.flush().map_err(io_err)?;
            }
        }
        w.flush().map_err(io_err)
    }

    pub fn write_stats(&self, stats: &PhaseStats, timing: bool) -> Result<()> {
        let w = self.open("stats.csv", || Box::new(io::stderr()))?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["phase", "domains_in", "domains_out", "arguments_covered", "wall_ms"]).map_err(io_err)?;
        for (name, row) in stats.rows() {
            let ms = if timing { row.wall_ms } else { 0 };
            c.write_record([
                name.to_string(),
                row.domains_in.to_string(),
                row.domains_out.to_string(),
                row.arguments_covered.to_string(),
                ms.to_string(),
            ])
            .map_err(io_err)?;
        }
        c.flush().map_err(io_err)
    }

    /// Per-interval algorithm choices of an `auto` run.
    pub fn write_choices(&self, stats: &PhaseStats) -> Result<()> {
        let w = self.open("choices.csv", || Box::new(io::stderr()))?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["binade", "interval", "algorithm"]).map_err(io_err)?;
        for ch in &stats.choices {
            // Reported in the command-line convention, [2^b, 2^(b+1)).
            c.write_record([(ch.binade - 1).to_string(), ch.interval.to_string(), ch.algorithm.name().to_string()])
                .map_err(io_err)?;
        }
        c.flush().map_err(io_err)
    }
}
