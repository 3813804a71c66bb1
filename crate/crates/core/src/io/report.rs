//! Per-trial CSV reports and NDJSON convergence traces.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::Termination;

pub const REPORT_HEADER: [&str; 14] = [
    "method",
    "instance",
    "m",
    "p",
    "r1",
    "q",
    "n",
    "r2",
    "trial",
    "seed",
    "iters",
    "wall_seconds",
    "final_re",
    "terminated",
];

/// One CSV row: a single trial of one method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub instance: String,
    pub m: usize,
    pub p: usize,
    pub r1: usize,
    pub q: usize,
    pub n: usize,
    pub r2: usize,
    pub trial: usize,
    pub seed: u64,
    pub iters: usize,
    pub wall_seconds: f64,
    pub final_re: Option<f64>,
    pub terminated: Termination,
}

/// 17 significant digits; round-trips every `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_report_csv<'a, W: Write>(
    rows: impl IntoIterator<Item = &'a ReportRow>,
    sink: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(sink);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.instance.clone(),
            r.m.to_string(),
            r.p.to_string(),
            r.r1.to_string(),
            r.q.to_string(),
            r.n.to_string(),
            r.r2.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.iters.to_string(),
            fmt_f64(r.wall_seconds),
            r.final_re.map(fmt_f64).unwrap_or_default(),
            r.terminated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(source: R) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(source);
    let header = rd.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected report header".into(),
        });
    }
    let mut out = Vec::new();
    for (idx, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("invalid {what}"),
        };
        let int = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(REPORT_HEADER[k]));
        out.push(ReportRow {
            method: rec[0].to_string(),
            instance: rec[1].to_string(),
            m: int(2)?,
            p: int(3)?,
            r1: int(4)?,
            q: int(5)?,
            n: int(6)?,
            r2: int(7)?,
            trial: int(8)?,
            seed: rec[9].parse().map_err(|_| bad("seed"))?,
            iters: int(10)?,
            wall_seconds: rec[11].parse().map_err(|_| bad("wall_seconds"))?,
            final_re: match &rec[12] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("final_re"))?),
            },
            terminated: rec[13].parse().map_err(|_| bad("terminated"))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub method: String,
    pub instance: String,
    pub trial: usize,
    pub k: usize,
    pub re: f64,
}

/// Writes one JSON object per line as records arrive.
pub struct TraceWriter<W: Write> {
    sink: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(sink: W) -> Self {
        Self { sink }
    }

    pub fn write(&mut self, rec: &TraceRecord) -> Result<()> {
        serde_json::to_writer(&mut self.sink, rec)?;
        self.sink.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.sink.flush()?;
        Ok(self.sink)
    }
}

pub fn write_trace_json<'a, W: Write>(
    records: impl IntoIterator<Item = &'a TraceRecord>,
    sink: W,
) -> Result<()> {
    let mut w = TraceWriter::new(sink);
    for r in records {
        w.write(r)?;
    }
    w.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: usize, re: Option<f64>) -> ReportRow {
        ReportRow {
            method: "cme-rk".into(),
            instance: "type1, \"odd\" name".into(),
            m: 100,
            p: 40,
            r1: 40,
            q: 40,
            n: 100,
            r2: 20,
            trial,
            seed: u64::MAX - 3,
            iters: 1601,
            wall_seconds: 0.1 + 0.2,
            final_re: re,
            terminated: Termination::Converged,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_report_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\r\n", REPORT_HEADER.join(","))
        );
    }

    #[test]
    fn one_row_two_lines_and_round_trip() {
        let rows = vec![row(0, Some(1.0 / 3.0)), row(1, None)];
        let mut buf = Vec::new();
        write_report_csv(&rows[..1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_report_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn trace_lines_are_json() {
        let mut buf = Vec::new();
        write_trace_json(&[], &mut buf).unwrap();
        assert!(buf.is_empty());
        let rec = TraceRecord {
            method: "drek".into(),
            instance: "i".into(),
            trial: 2,
            k: 50,
            re: 1.5e-7,
        };
        write_trace_json([&rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        let back: TraceRecord = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn trace_streams_to_sink() {
        // A sink that only counts bytes: nothing holds the full set.
        struct Count(usize);
        impl Write for Count {
            fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                self.0 += b.len();
                Ok(b.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let mut w = TraceWriter::new(Count(0));
        for k in 0..10_000 {
            w.write(&TraceRecord {
                method: "cme-rk".into(),
                instance: "s".into(),
                trial: 0,
                k,
                re: 1.0 / (k + 1) as f64,
            })
            .unwrap();
        }
        assert!(w.finish().unwrap().0 > 10_000 * 40);
    }
}
