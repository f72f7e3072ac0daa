//! Tabulated conditional probabilities in, reports and plot data out.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{detected_capacity, AxisSpread, CapacityReport};
use crate::channel::{theoretical_detected_capacity, theoretical_errors, ChannelKind, PauliParams};
use crate::error::{Error, Result};
use crate::qubit::Axis;
use crate::reconstruct::{error_profile, Sanitization, TransitionMatrix};
use crate::uncertainty::{trial_rng, Stat};

pub const TABLE_HEADER: &str =
    "param,Qz00,Qz00_err,Qz10,Qz10_err,Qx00,Qx00_err,Qx10,Qx10_err,Qy00,Qy00_err,Qy10,Qy10_err";

pub const DEFAULT_DRAWS: usize = 10_000;

/// Number of samples on every theory curve.
pub const THEORY_POINTS: usize = 201;

/// The three channel families of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    /// Amplitude damping, parameter η.
    Ad,
    /// Phase damping, `q_z = q`.
    Pd,
    /// Depolarizing, `q_x = q_y = q_z = q`.
    D,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 3] = [ChannelFamily::Ad, ChannelFamily::Pd, ChannelFamily::D];

    pub fn kind(self, param: f64) -> Result<ChannelKind> {
        Ok(match self {
            ChannelFamily::Ad => ChannelKind::AmplitudeDamping { eta: param },
            ChannelFamily::Pd => ChannelKind::Pauli(PauliParams::phase_damping(param)?),
            ChannelFamily::D => ChannelKind::Pauli(PauliParams::depolarizing(param)?),
        })
    }

    /// Physical parameter range.
    pub fn range(self) -> (f64, f64) {
        match self {
            ChannelFamily::D => (0.0, 1.0 / 3.0),
            _ => (0.0, 1.0),
        }
    }

    /// Row count of the published table for this family.
    pub fn table_rows(self) -> usize {
        match self {
            ChannelFamily::Ad => 13,
            ChannelFamily::Pd | ChannelFamily::D => 21,
        }
    }

    pub fn param_name(self) -> &'static str {
        match self {
            ChannelFamily::Ad => "eta",
            _ => "q",
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelFamily::Ad => "ad",
            ChannelFamily::Pd => "pd",
            ChannelFamily::D => "d",
        })
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" => Ok(ChannelFamily::Ad),
            "pd" => Ok(ChannelFamily::Pd),
            "d" => Ok(ChannelFamily::D),
            other => Err(Error::Config(format!(
                "unknown channel `{other}` (expected ad, pd or d)"
            ))),
        }
    }
}

/// A tabulated value with its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub std: f64,
}

/// One published row: `Q(0|0)` and `Q(1|0)` per axis. For y the tabulated
/// logical 0 is L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub param: f64,
    pub z: [Measured; 2],
    pub x: [Measured; 2],
    pub y: [Measured; 2],
}

impl TableRow {
    pub fn get(&self, axis: Axis) -> [Measured; 2] {
        match axis {
            Axis::Z => self.z,
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Full matrix from the shown half via `Q(j|1) = 1 − Q(j|0)`. Columns
    /// are not normalized; sanitization takes care of that.
    pub fn transition(&self, axis: Axis) -> TransitionMatrix {
        let [q00, q10] = self.get(axis);
        complement(axis, q00.value, q10.value)
    }

    /// Axes whose two entries for input 0 miss unit sum by more than three
    /// combined standard deviations.
    pub fn consistency_warnings(&self) -> Vec<String> {
        Axis::ALL
            .iter()
            .filter_map(|&axis| {
                let [a, b] = self.get(axis);
                let sum = a.value + b.value;
                let tol = 3.0 * a.std.hypot(b.std);
                ((sum - 1.0).abs() > tol).then(|| {
                    format!(
                        "param {}: axis {axis} entries sum to {sum:.4} (tolerance ±{tol:.4})",
                        self.param
                    )
                })
            })
            .collect()
    }
}

fn complement(axis: Axis, q00: f64, q10: f64) -> TransitionMatrix {
    TransitionMatrix::unnormalized(axis, [[q00, 1.0 - q00], [q10, 1.0 - q10]])
}

fn schema(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Parses a value cell, accepting an inline `v ± e` when the error cell is
/// empty.
fn parse_measured(value: &str, err: &str, path: &Path, line: usize) -> Result<Measured> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| schema(path, format!("line {line}: `{s}` is not a number")))
    };
    let (v, e) = match value.split_once('±') {
        Some((v, e)) if err.trim().is_empty() => (num(v)?, num(e)?),
        Some(_) => return Err(schema(path, format!("line {line}: uncertainty given twice"))),
        None => (num(value)?, num(err)?),
    };
    if e < 0.0 {
        return Err(schema(path, format!("line {line}: negative uncertainty {e}")));
    }
    Ok(Measured { value: v, std: e })
}

pub fn ingest_table(path: impl AsRef<Path>, family: ChannelFamily) -> Result<Vec<TableRow>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_table(&text, path, family)
}

/// [`ingest_table`] on in-memory text; `path` only labels errors.
pub fn parse_table(text: &str, path: &Path, family: ChannelFamily) -> Result<Vec<TableRow>> {
    let mut lines = text.lines();
    match lines.next() {
        None => return Err(schema(path, "empty file")),
        Some(h) if h.trim_end_matches('\r') != TABLE_HEADER => {
            return Err(schema(path, format!("header must be `{TABLE_HEADER}`")))
        }
        Some(_) => {}
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<TableRow> = Vec::new();
    for (k, record) in reader.records().enumerate().skip(1) {
        let record = record?;
        let line = k + 1;
        if record.len() != 13 {
            return Err(schema(
                path,
                format!("line {line}: expected 13 fields, found {}", record.len()),
            ));
        }
        let param = parse_measured(&record[0], "0", path, line)?.value;
        let m = |c: usize| parse_measured(&record[c], &record[c + 1], path, line);
        let row = TableRow {
            param,
            z: [m(1)?, m(3)?],
            x: [m(5)?, m(7)?],
            y: [m(9)?, m(11)?],
        };
        if let Some(prev) = rows.last() {
            if row.param <= prev.param {
                return Err(schema(
                    path,
                    format!("line {line}: parameter {} does not increase", row.param),
                ));
            }
        }
        rows.push(row);
    }
    if rows.len() != family.table_rows() {
        return Err(schema(
            path,
            format!(
                "{} table must have {} rows, found {}",
                family,
                family.table_rows(),
                rows.len()
            ),
        ));
    }
    Ok(rows)
}

/// Writes rows in the table schema with 6 significant digits.
pub fn write_table(path: impl AsRef<Path>, rows: &[TableRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let mut cells = vec![sig6(r.param)];
        for axis in [Axis::Z, Axis::X, Axis::Y] {
            for m in r.get(axis) {
                cells.push(sig6(m.value));
                cells.push(sig6(m.std));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Formats with at most 6 significant digits.
pub fn sig6(x: f64) -> String {
    round6(x).to_string()
}

pub fn round6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// A capacity report at one channel parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub param: f64,
    /// Uncertainty of the parameter itself (waveplate angle for AD).
    pub param_std: Option<f64>,
    pub report: CapacityReport,
}

/// Recomputes capacities from tabulated probabilities. Error bars come from
/// `draws` Gaussian resamplings of every tabulated entry; row `k` draws from
/// stream `k` of `seed`.
pub fn recompute_from_table(
    rows: &[TableRow],
    mode: Sanitization,
    draws: usize,
    seed: u64,
) -> Result<Vec<PointReport>> {
    rows.par_iter()
        .enumerate()
        .map(|(k, row)| recompute_row(row, mode, draws, trial_rng(seed, k as u64)))
        .collect()
}

fn recompute_row(
    row: &TableRow,
    mode: Sanitization,
    draws: usize,
    mut rng: rand_chacha::ChaCha8Rng,
) -> Result<PointReport> {
    let point = |qs: &[TransitionMatrix]| Ok::<_, Error>(detected_capacity(&error_profile(qs, mode)?));
    let mut report = point(&Axis::ALL.map(|a| row.transition(a)))?;
    if draws == 0 {
        return Ok(PointReport {
            param: row.param,
            param_std: None,
            report,
        });
    }

    // samples[axis][quantity][draw], quantities e0, e1, p0, C; then C_D.
    let mut samples = vec![vec![Vec::with_capacity(draws); 4]; 3];
    let mut c_d = Vec::with_capacity(draws);
    let mut excluded = 0;
    for _ in 0..draws {
        let qs = Axis::ALL.map(|axis| {
            let [a, b] = row.get(axis);
            let mut g = |m: Measured| m.value + m.std * rng.sample::<f64, _>(StandardNormal);
            let (q00, q10) = (g(a), g(b));
            complement(axis, q00, q10)
        });
        match point(&qs) {
            Ok(r) => {
                for (k, a) in r.axes.iter().enumerate() {
                    samples[k][0].push(a.errors.e0);
                    samples[k][1].push(a.errors.e1);
                    samples[k][2].push(a.prior.p0());
                    samples[k][3].push(a.capacity);
                }
                c_d.push(r.c_d);
            }
            Err(_) => excluded += 1,
        }
    }
    if excluded * 100 > draws {
        return Err(Error::TooManyExclusions {
            excluded,
            trials: draws,
            first: format!("table row {}", row.param),
        });
    }
    for (k, a) in report.axes.iter_mut().enumerate() {
        let s = |q: usize| Stat::from_samples(&samples[k][q]).std;
        a.std = Some(AxisSpread {
            e0: s(0),
            e1: s(1),
            p0: s(2),
            capacity: s(3),
        });
    }
    report.c_d_std = Some(Stat::from_samples(&c_d).std);
    Ok(PointReport {
        param: row.param,
        param_std: None,
        report,
    })
}

/// Flat report record; field order is the serialized column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub param: f64,
    pub param_std: Option<f64>,
    pub z_e0: f64,
    pub z_e0_std: Option<f64>,
    pub z_e1: f64,
    pub z_e1_std: Option<f64>,
    pub z_p0: f64,
    pub z_p0_std: Option<f64>,
    pub z_c: f64,
    pub z_c_std: Option<f64>,
    pub x_e0: f64,
    pub x_e0_std: Option<f64>,
    pub x_e1: f64,
    pub x_e1_std: Option<f64>,
    pub x_p0: f64,
    pub x_p0_std: Option<f64>,
    pub x_c: f64,
    pub x_c_std: Option<f64>,
    pub y_e0: f64,
    pub y_e0_std: Option<f64>,
    pub y_e1: f64,
    pub y_e1_std: Option<f64>,
    pub y_p0: f64,
    pub y_p0_std: Option<f64>,
    pub y_c: f64,
    pub y_c_std: Option<f64>,
    pub c_d: f64,
    pub c_d_std: Option<f64>,
    pub winner: Axis,
}

pub const REPORT_FIELDS: [&str; 29] = [
    "param",
    "param_std",
    "z_e0",
    "z_e0_std",
    "z_e1",
    "z_e1_std",
    "z_p0",
    "z_p0_std",
    "z_c",
    "z_c_std",
    "x_e0",
    "x_e0_std",
    "x_e1",
    "x_e1_std",
    "x_p0",
    "x_p0_std",
    "x_c",
    "x_c_std",
    "y_e0",
    "y_e0_std",
    "y_e1",
    "y_e1_std",
    "y_p0",
    "y_p0_std",
    "y_c",
    "y_c_std",
    "c_d",
    "c_d_std",
    "winner",
];

impl From<&PointReport> for ReportRecord {
    fn from(p: &PointReport) -> Self {
        let r = &p.report;
        let o = |v: Option<f64>| v.map(round6);
        let ax = |axis: Axis| {
            let a = r.axis(axis);
            let s = a.std;
            [
                (round6(a.errors.e0), o(s.map(|s| s.e0))),
                (round6(a.errors.e1), o(s.map(|s| s.e1))),
                (round6(a.prior.p0()), o(s.map(|s| s.p0))),
                (round6(a.capacity), o(s.map(|s| s.capacity))),
            ]
        };
        let [z, x, y] = [ax(Axis::Z), ax(Axis::X), ax(Axis::Y)];
        ReportRecord {
            param: round6(p.param),
            param_std: o(p.param_std),
            z_e0: z[0].0,
            z_e0_std: z[0].1,
            z_e1: z[1].0,
            z_e1_std: z[1].1,
            z_p0: z[2].0,
            z_p0_std: z[2].1,
            z_c: z[3].0,
            z_c_std: z[3].1,
            x_e0: x[0].0,
            x_e0_std: x[0].1,
            x_e1: x[1].0,
            x_e1_std: x[1].1,
            x_p0: x[2].0,
            x_p0_std: x[2].1,
            x_c: x[3].0,
            x_c_std: x[3].1,
            y_e0: y[0].0,
            y_e0_std: y[0].1,
            y_e1: y[1].0,
            y_e1_std: y[1].1,
            y_p0: y[2].0,
            y_p0_std: y[2].1,
            y_c: y[3].0,
            y_c_std: y[3].1,
            c_d: round6(r.c_d),
            c_d_std: o(r.c_d_std),
            winner: r.winner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Jsonl,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Jsonl => "jsonl",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" | "json-lines" => Ok(ReportFormat::Jsonl),
            other => Err(Error::Config(format!("unknown report format `{other}` (csv or jsonl)"))),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// One record per point. CSV files always carry the header.
pub fn emit_report(points: &[PointReport], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
            w.write_record(REPORT_FIELDS)?;
            for p in points {
                w.serialize(ReportRecord::from(p))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        ReportFormat::Jsonl => {
            for p in points {
                serde_json::to_writer(&mut out, &ReportRecord::from(p))?;
                out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<ReportRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            if r.headers()?.iter().ne(REPORT_FIELDS) {
                return Err(schema(path, "unexpected report header"));
            }
            r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
        }
        ReportFormat::Jsonl => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect(),
    }
}

/// Closed-form capacities of the ideal channel at one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub param: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    pub cd: f64,
}

pub fn theory_point(family: ChannelFamily, param: f64) -> Result<TheoryPoint> {
    let kind = family.kind(param)?;
    let report = detected_capacity(&theoretical_errors(kind)?);
    let (cd, _) = theoretical_detected_capacity(kind)?;
    Ok(TheoryPoint {
        param,
        cx: report.axis(Axis::X).capacity,
        cy: report.axis(Axis::Y).capacity,
        cz: report.axis(Axis::Z).capacity,
        cd,
    })
}

pub fn theory_curve(family: ChannelFamily, grid: &[f64]) -> Result<Vec<TheoryPoint>> {
    grid.iter().map(|&p| theory_point(family, p)).collect()
}

/// [`THEORY_POINTS`] evenly spaced samples over the family's range.
pub fn default_theory_grid(family: ChannelFamily) -> Vec<f64> {
    let (lo, hi) = family.range();
    let n = THEORY_POINTS - 1;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Whitespace-separated columns with a `#` header line.
pub fn write_theory(path: impl AsRef<Path>, family: ChannelFamily, curve: &[TheoryPoint]) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "# {} C_x C_y C_z C_D", family.param_name()).map_err(io)?;
    for t in curve {
        writeln!(
            out,
            "{} {} {} {} {}",
            sig6(t.param),
            sig6(t.cx),
            sig6(t.cy),
            sig6(t.cz),
            sig6(t.cd)
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes `<family>_points.dat` (measured C per axis ± σ) and
/// `<family>_theory.dat` into `dir`; returns both paths.
pub fn emit_plot_data(
    points: &[PointReport],
    family: ChannelFamily,
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let data_path = dir.join(format!("{family}_points.dat"));
    let mut out = create(&data_path)?;
    let io = |e| Error::io(&data_path, e);
    writeln!(
        out,
        "# {} {}_std C_x C_x_std C_y C_y_std C_z C_z_std C_D C_D_std",
        family.param_name(),
        family.param_name()
    )
    .map_err(io)?;
    for p in points {
        let r = &p.report;
        let mut cells = vec![sig6(p.param), sig6(p.param_std.unwrap_or(0.0))];
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let a = r.axis(axis);
            cells.push(sig6(a.capacity));
            cells.push(sig6(a.std.map_or(0.0, |s| s.capacity)));
        }
        cells.push(sig6(r.c_d));
        cells.push(sig6(r.c_d_std.unwrap_or(0.0)));
        writeln!(out, "{}", cells.join(" ")).map_err(io)?;
    }
    out.flush().map_err(io)?;

    let theory_path = dir.join(format!("{family}_theory.dat"));
    write_theory(
        &theory_path,
        family,
        &theory_curve(family, &default_theory_grid(family))?,
    )?;
    Ok((data_path, theory_path))
}
