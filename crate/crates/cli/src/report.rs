//! Spectrum reports and their CSV / JSON forms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use fcf_core::{PairMarginalSet, PatternDistribution, PhotonPattern};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::input::Metadata;

pub const CSV_HEADER: [&str; 3] = ["wavenumber_cm1", "pattern", "probability"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ptmp,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub wavenumber_cm1: f64,
    pub pattern: PhotonPattern,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_mode_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub method: Method,
    pub n_modes: usize,
    pub parameters: RunParameters,
    /// Sorted by probability (descending), then pattern.
    pub lines: Vec<SpectrumLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_captured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_vs_reference: Option<f64>,
    /// Some pattern has a count above 9 and is rendered comma-separated.
    #[serde(default)]
    pub wide_patterns: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ReportMetadata>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub molecule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<String>,
    #[serde(default)]
    pub placeholder: bool,
}

impl From<&Metadata> for ReportMetadata {
    fn from(m: &Metadata) -> Self {
        Self {
            molecule: m.molecule.clone(),
            initial_state: m.initial_state.clone(),
            final_state: m.final_state.clone(),
            placeholder: m.placeholder,
        }
    }
}

/// `Σ n_i ω'_i`, summed in mode order.
pub fn wavenumber(pattern: &PhotonPattern, omega_final: &[f64]) -> f64 {
    pattern
        .counts()
        .iter()
        .zip(omega_final)
        .fold(0.0, |acc, (&n, &w)| acc + n as f64 * w)
}

/// Builds sorted lines from pattern weights.
pub fn lines_from(weights: &BTreeMap<PhotonPattern, f64>, omega_final: &[f64]) -> Vec<SpectrumLine> {
    let mut lines: Vec<SpectrumLine> = weights
        .iter()
        .map(|(p, &w)| SpectrumLine {
            wavenumber_cm1: wavenumber(p, omega_final),
            pattern: p.clone(),
            probability: w,
        })
        .collect();
    sort_lines(&mut lines);
    lines
}

pub fn sort_lines(lines: &mut [SpectrumLine]) {
    lines.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
}

impl SpectrumReport {
    pub fn weights(&self) -> BTreeMap<PhotonPattern, f64> {
        let mut out = BTreeMap::new();
        for line in &self.lines {
            *out.entry(line.pattern.clone()).or_insert(0.0) += line.probability;
        }
        out
    }

    pub fn total_probability(&self) -> f64 {
        self.lines.iter().map(|l| l.probability).sum()
    }
}

/// Line data with the bookkeeping stripped, as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LineTable {
    pub lines: Vec<SpectrumLine>,
    weights: BTreeMap<PhotonPattern, f64>,
}

impl LineTable {
    pub fn new(lines: Vec<SpectrumLine>) -> Self {
        let mut weights = BTreeMap::new();
        for line in &lines {
            *weights.entry(line.pattern.clone()).or_insert(0.0) += line.probability;
        }
        Self { lines, weights }
    }
}

impl PatternDistribution for LineTable {
    fn pattern_weights(&self) -> &BTreeMap<PhotonPattern, f64> {
        &self.weights
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn number(x: f64) -> String {
    format!("{x:?}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes the CSV line table to any writer.
pub fn write_csv<W: Write>(lines: &[SpectrumLine], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for line in lines {
        w.write_record([
            number(line.wavenumber_cm1),
            line.pattern.render(),
            number(line.probability),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &SpectrumReport, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn write_report(report: &SpectrumReport, format: Format, path: Option<&Path>) -> Result<()> {
    let stdout_path = Path::new("<stdout>");
    let target = path.unwrap_or(stdout_path);
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Csv => write_csv(&report.lines, sink).map_err(|e| csv_err(target, e)),
        Format::Json => write_json(report, sink).map_err(io_err(target)),
    }
}

pub fn report_to_string(report: &SpectrumReport, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&report.lines, &mut buf).map_err(|e| csv_err(Path::new("<memory>"), e))?,
        Format::Json => write_json(report, &mut buf).map_err(io_err(Path::new("<memory>")))?,
    }
    String::from_utf8(buf).map_err(|e| CliError::Format(e.to_string()))
}

pub fn read_json_report(path: &Path) -> Result<SpectrumReport> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: Some(e.line()),
        message: e.to_string(),
    })
}

pub fn read_csv_lines<R: Read>(input: R, path: &Path) -> Result<Vec<SpectrumLine>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: Some(1),
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut lines = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line() as usize);
        let bad = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let wavenumber_cm1 = record[0]
            .parse()
            .map_err(|_| bad(format!("bad wavenumber {:?}", &record[0])))?;
        let pattern = PhotonPattern::parse(&record[1])
            .ok_or_else(|| bad(format!("bad pattern {:?}", &record[1])))?;
        let probability = record[2]
            .parse()
            .map_err(|_| bad(format!("bad probability {:?}", &record[2])))?;
        lines.push(SpectrumLine {
            wavenumber_cm1,
            pattern,
            probability,
        });
    }
    Ok(lines)
}

/// Reads the lines of a report in either format (chosen by extension).
pub fn read_lines(path: &Path) -> Result<LineTable> {
    let lines = match Format::from_path(path) {
        Format::Json => read_json_report(path)?.lines,
        Format::Csv => {
            let file = File::open(path).map_err(io_err(path))?;
            read_csv_lines(file, path)?
        }
    };
    Ok(LineTable::new(lines))
}

#[derive(Debug, Serialize)]
struct MarginalCell {
    pair: usize,
    mode_a: usize,
    mode_b: usize,
    n_a: usize,
    n_b: usize,
    probability: f64,
}

fn marginal_cells(pm: &PairMarginalSet) -> Vec<MarginalCell> {
    let k = pm.cutoff();
    let mut out = Vec::with_capacity(pm.tables().len() * k * k);
    for pair in 0..pm.tables().len() {
        for a in 0..k {
            for b in 0..k {
                out.push(MarginalCell {
                    pair: pair + 1,
                    mode_a: pair + 1,
                    mode_b: pair + 2,
                    n_a: a,
                    n_b: b,
                    probability: pm.get(pair, a, b),
                });
            }
        }
    }
    out
}

/// Pair tables in long form: `pair,mode_a,mode_b,n_a,n_b,probability`, modes 1-based.
pub fn write_marginals<W: Write>(pm: &PairMarginalSet, format: Format, mut out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["pair", "mode_a", "mode_b", "n_a", "n_b", "probability"])?;
            for c in marginal_cells(pm) {
                w.write_record([
                    c.pair.to_string(),
                    c.mode_a.to_string(),
                    c.mode_b.to_string(),
                    c.n_a.to_string(),
                    c.n_b.to_string(),
                    number(c.probability),
                ])?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, pm)?;
            out.write_all(b"\n")?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(lines: Vec<SpectrumLine>) -> SpectrumReport {
        SpectrumReport {
            method: Method::Ptmp,
            n_modes: lines[0].pattern.n_modes(),
            parameters: RunParameters {
                cutoff: Some(4),
                step: Some(0.01),
                iterations: Some(100),
                ..Default::default()
            },
            lines,
            mass_captured: None,
            l1_vs_reference: Some(0.1 + 0.2),
            wide_patterns: false,
            metadata: None,
        }
    }

    fn line(w: f64, p: &str, prob: f64) -> SpectrumLine {
        SpectrumLine {
            wavenumber_cm1: w,
            pattern: PhotonPattern::parse(p).unwrap(),
            probability: prob,
        }
    }

    #[test]
    fn vacuum_csv_row() {
        let r = report(vec![line(0.0, "0000000", 1.0)]);
        assert_eq!(
            report_to_string(&r, Format::Csv).unwrap(),
            "wavenumber_cm1,pattern,probability\n0.0,0000000,1.0\n"
        );
        let r = report(vec![line(1566.5, "0010000", 0.31)]);
        assert!(report_to_string(&r, Format::Csv).unwrap().ends_with("\n1566.5,0010000,0.31\n"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let lines = vec![
            line(1.0 / 3.0, "012", std::f64::consts::PI / 10.0),
            line(7e-300, "10,0,2", 1e-17),
        ];
        let text = report_to_string(&report(lines.clone()), Format::Csv).unwrap();
        assert!(text.contains("\"10,0,2\""));
        let back = read_csv_lines(text.as_bytes(), Path::new("x.csv")).unwrap();
        assert_eq!(back, lines);
    }

    #[test]
    fn json_round_trip_is_identical() {
        let r = report(vec![
            line(1.0 / 3.0, "012", 0.12345678901234568),
            line(2.0 / 3.0, "102", 1e-17),
        ]);
        let text = report_to_string(&r, Format::Json).unwrap();
        let back: SpectrumReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn sorting_and_wavenumbers() {
        let mut w = BTreeMap::new();
        w.insert(PhotonPattern::new(vec![1, 0]), 0.25);
        w.insert(PhotonPattern::new(vec![0, 1]), 0.25);
        w.insert(PhotonPattern::new(vec![0, 0]), 0.5);
        let lines = lines_from(&w, &[100.5, 30.25]);
        let order: Vec<String> = lines.iter().map(|l| l.pattern.render()).collect();
        assert_eq!(order, ["00", "01", "10"]);
        assert_eq!(lines[1].wavenumber_cm1, 30.25);
        assert_eq!(wavenumber(&PhotonPattern::new(vec![2, 3]), &[100.5, 30.25]), 201.0 + 90.75);
    }

    #[test]
    fn bad_csv_reports_line() {
        let text = "wavenumber_cm1,pattern,probability\n0.0,00,1.0\nabc,01,0.5\n";
        match read_csv_lines(text.as_bytes(), Path::new("x.csv")) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "a,b,c\n";
        assert!(read_csv_lines(text.as_bytes(), Path::new("x.csv")).is_err());
    }

    #[test]
    fn marginal_csv_layout() {
        let pm = PairMarginalSet::new(2, 2, vec![vec![0.5, 0.25, 0.125, 0.125]]).unwrap();
        let mut buf = Vec::new();
        write_marginals(&pm, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "pair,mode_a,mode_b,n_a,n_b,probability\n1,1,2,0,0,0.5\n1,1,2,0,1,0.25\n1,1,2,1,0,0.125\n1,1,2,1,1,0.125\n"
        );
    }
}
