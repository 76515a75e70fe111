use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{fit_power_law, RunnerError, ScalingFit, SweepResult};

pub const CSV_COLUMNS: [&str; 7] = ["hbar", "T", "lambda", "norm_sq", "defect_sq", "width", "width_times_T"];

/// One line of the sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub hbar: f64,
    pub t: f64,
    pub lambda: f64,
    pub norm_sq: f64,
    pub defect_sq: f64,
    pub width: f64,
    pub width_times_t: f64,
}

impl CsvRow {
    fn fields(&self) -> [f64; 7] {
        [self.hbar, self.t, self.lambda, self.norm_sq, self.defect_sq, self.width, self.width_times_t]
    }
}

/// Successful rows of a sweep, surface numbers.
pub fn csv_rows(result: &SweepResult) -> Vec<CsvRow> {
    result
        .rows
        .iter()
        .filter_map(|r| {
            r.data().map(|d| CsvRow {
                hbar: r.hbar,
                t: d.t,
                lambda: d.lambda,
                norm_sq: d.surface.norm_sq,
                defect_sq: d.surface.defect_sq,
                width: d.surface.width,
                width_times_t: d.surface.width_times_t,
            })
        })
        .collect()
}

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<(), RunnerError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for r in rows {
        w.write_record(r.fields().map(format_float)).map_err(io_err)?;
    }
    w.flush().map_err(|e| RunnerError::Io(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, RunnerError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(io_err)?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(RunnerError::Invalid(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let v = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| RunnerError::Invalid(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(CsvRow {
            hbar: v[0],
            t: v[1],
            lambda: v[2],
            norm_sq: v[3],
            defect_sq: v[4],
            width: v[5],
            width_times_t: v[6],
        });
    }
    Ok(rows)
}

/// Two named columns of any CSV with a header line.
pub fn read_columns<R: Read>(input: R, x: &str, y: &str) -> Result<Vec<(f64, f64)>, RunnerError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(io_err)?.clone();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| RunnerError::Invalid(format!("no column {name:?}")))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let parse = |s: &str| s.parse::<f64>().map_err(|e| RunnerError::Invalid(format!("{s:?}: {e}")));
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        out.push((parse(&rec[ix])?, parse(&rec[iy])?));
    }
    Ok(out)
}

/// Power-law fit of column `y` against column `x`.
pub fn fit_columns<R: Read>(input: R, x: &str, y: &str) -> Result<ScalingFit, RunnerError> {
    fit_power_law(&read_columns(input, x, y)?)
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, RunnerError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| RunnerError::Invalid(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

struct Fixed17<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident $(($arg:ident : $ty:ty))?;)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> std::io::Result<()> {
                self.0.$name(w $(, $arg)?)
            }
        )*
    };
}

impl serde_json::ser::Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward! {
        begin_array;
        end_array;
        begin_array_value(first: bool);
        end_array_value;
        begin_object;
        end_object;
        begin_object_key(first: bool);
        begin_object_value;
        end_object_value;
    }
}

/// Paths written by [`write_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// `sweep.csv` and `manifest.json` in `dir`.
pub fn write_results(result: &SweepResult, dir: &Path) -> Result<OutputFiles, RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::Io(format!("{}: {e}", dir.display())))?;
    let csv = dir.join("sweep.csv");
    let manifest = dir.join("manifest.json");
    let f = std::fs::File::create(&csv).map_err(|e| RunnerError::Io(format!("{}: {e}", csv.display())))?;
    write_csv(&csv_rows(result), std::io::BufWriter::new(f))?;
    std::fs::write(&manifest, to_json_string(result)?)
        .map_err(|e| RunnerError::Io(format!("{}: {e}", manifest.display())))?;
    Ok(OutputFiles { csv, manifest })
}

fn io_err(e: csv::Error) -> RunnerError {
    RunnerError::Io(e.to_string())
}
