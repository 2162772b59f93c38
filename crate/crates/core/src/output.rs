//! Writers for sweep tables and their provenance record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sweep::{Cell, SweepResult};

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format!("{x:.16e}"),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Missing => String::new(),
    }
}

/// RFC 4180 table with a header row. Missing values are empty fields.
pub fn write_csv<W: Write>(r: &SweepResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(&r.columns).map_err(io)?;
    for row in &r.rows {
        out.write_record(row.iter().map(cell_text)).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(r: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(r, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// JSON array of row objects keyed by column name; missing values are null.
pub fn write_json<W: Write>(r: &SweepResult, w: W) -> Result<()> {
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = r
        .rows
        .iter()
        .map(|row| {
            r.columns
                .iter()
                .zip(row)
                .map(|(k, c)| (k.clone(), serde_json::to_value(c).unwrap_or_default()))
                .collect()
        })
        .collect();
    serde_json::to_writer_pretty(w, &rows).map_err(|e| Error::Io(e.to_string()))
}

pub fn provenance_json(r: &SweepResult) -> Result<String> {
    let v = serde_json::json!({
        "provenance": r.provenance,
        "columns": r.columns,
        "rows": r.rows.len(),
        "warnings": r.warnings,
    });
    serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))
}

/// Gnuplot script plotting every numeric `n*` column against the first axis.
pub fn gnuplot_script(r: &SweepResult, data_file: &str) -> String {
    let n_axes = r.provenance.axes.len();
    let x = &r.columns[0];
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set xlabel '{x}'\n"));
    if r.provenance.axes.first().is_some_and(|a| a.scale == crate::sweep::Scale::Log) {
        s.push_str("set logscale x\n");
    }
    let series: Vec<usize> = r
        .columns
        .iter()
        .enumerate()
        .skip(n_axes)
        .filter(|(_, c)| c.starts_with('n'))
        .map(|(i, _)| i + 1)
        .collect();
    if n_axes == 2 {
        s.push_str(&format!("set ylabel '{}'\n", r.columns[1]));
        s.push_str("set pm3d map\n");
        if let Some(&col) = series.first() {
            s.push_str(&format!("splot '{data_file}' using 1:2:{col} with pm3d\n"));
        }
    } else {
        s.push_str("set logscale y\n");
        let parts: Vec<String> = series
            .iter()
            .map(|c| format!("'{data_file}' using 1:{c} with lines"))
            .collect();
        s.push_str(&format!("plot {}\n", parts.join(", ")));
    }
    s
}

/// Paths of the files written next to a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub table: PathBuf,
    pub provenance: PathBuf,
    pub gnuplot: Option<PathBuf>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes the table plus `<stem>.provenance.json`, and a `<stem>.gp` script
/// for CSV output.
pub fn write_outputs(r: &SweepResult, path: &Path, format: crate::sweep::Format) -> Result<Written> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = fs::File::create(path)?;
    let gnuplot = match format {
        crate::sweep::Format::Csv => {
            write_csv(r, std::io::BufWriter::new(file))?;
            let gp = sibling(path, ".gp");
            let data = path.file_name().unwrap_or_default().to_string_lossy();
            fs::write(&gp, gnuplot_script(r, &data))?;
            Some(gp)
        }
        crate::sweep::Format::Json => {
            write_json(r, std::io::BufWriter::new(file))?;
            None
        }
    };
    let prov = sibling(path, ".provenance.json");
    fs::write(&prov, provenance_json(r)?)?;
    Ok(Written {
        table: path.to_path_buf(),
        provenance: prov,
        gnuplot,
    })
}
