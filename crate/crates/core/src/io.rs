//! CSV and JSON file formats.
//!
//! CSV files always carry a header row and numbers are written with 17
//! significant digits, so a write/read round trip is bit-exact. Readers look
//! columns up by name; extra columns are ignored and missing ones are a schema
//! error.

#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lockin_dsp::TimeSeries;
use crate::magnetometry::OdmrSpectrum;
use crate::spectral::Spectrum;

pub const SCAN_COLUMNS: [&str; 2] = ["frequency_Hz", "transmission"];
pub const SATURATION_COLUMNS: [&str; 2] = ["pump_power_W", "normalized_transmission"];
pub const ODMR_COLUMNS: [&str; 2] = ["microwave_frequency_Hz", "transmission"];
pub const TIME_SERIES_COLUMNS: [&str; 2] = ["time_s", "value"];
pub const SPECTRUM_COLUMNS: [&str; 2] = ["frequency_Hz", "asd"];

/// Shortest representation that still round-trips: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equal-length columns under `headers`.
pub fn write_columns(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::Schema("header and column counts differ".into()));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Schema("columns have different lengths".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the named columns, in the order given.
pub fn read_columns(path: &Path, required: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let index: Vec<usize> = required
        .iter()
        .map(|name| {
            header.iter().position(|h| h.trim() == *name).ok_or_else(|| {
                Error::Schema(format!(
                    "{}: missing column '{name}' (found: {})",
                    path.display(),
                    header.iter().collect::<Vec<_>>().join(", ")
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new(); required.len()];
    for (row, record) in r.records().enumerate() {
        let record = record?;
        for (col, &i) in index.iter().enumerate() {
            let cell = record.get(i).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| {
                Error::Schema(format!("{}: row {}: '{cell}' is not a number", path.display(), row + 2))
            })?;
            out[col].push(v);
        }
    }
    Ok(out)
}

/// A column that may be absent; `None` when the header lacks it.
pub fn read_optional_column(path: &Path, name: &str) -> Result<Option<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    if !r.headers()?.iter().any(|h| h.trim() == name) {
        return Ok(None);
    }
    Ok(read_columns(path, &[name])?.pop())
}

fn two_columns(path: &Path, names: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut cols = read_columns(path, &names)?;
    let b = cols.pop().unwrap_or_default();
    let a = cols.pop().unwrap_or_default();
    Ok((a, b))
}

pub fn write_scan(path: &Path, frequency: &[f64], transmission: &[f64]) -> Result<()> {
    write_columns(path, &SCAN_COLUMNS, &[frequency, transmission])
}

pub fn read_scan(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    two_columns(path, SCAN_COLUMNS)
}

pub fn write_saturation(path: &Path, power: &[f64], transmission: &[f64]) -> Result<()> {
    write_columns(path, &SATURATION_COLUMNS, &[power, transmission])
}

pub fn read_saturation(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    two_columns(path, SATURATION_COLUMNS)
}

pub fn write_odmr(path: &Path, spectrum: &OdmrSpectrum) -> Result<()> {
    write_columns(
        path,
        &ODMR_COLUMNS,
        &[&spectrum.microwave_frequencies, &spectrum.normalized_transmission],
    )
}

pub fn read_odmr(path: &Path) -> Result<OdmrSpectrum> {
    let (f, t) = two_columns(path, ODMR_COLUMNS)?;
    Ok(OdmrSpectrum {
        microwave_frequencies: f,
        normalized_transmission: t,
    })
}

pub fn write_spectrum(path: &Path, spectrum: &Spectrum) -> Result<()> {
    write_columns(
        path,
        &SPECTRUM_COLUMNS,
        &[&spectrum.frequencies, &spectrum.amplitude_spectral_density],
    )
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let (f, a) = two_columns(path, SPECTRUM_COLUMNS)?;
    Spectrum::new(f, a).map_err(|e| Error::Schema(e.to_string()))
}

/// JSON header written next to a time-series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesHeader {
    pub sample_rate_Hz: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Echo of the configuration that produced the series.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

/// `trace.csv` -> `trace.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_time_series(path: &Path, series: &TimeSeries, header: &TimeSeriesHeader) -> Result<()> {
    let times: Vec<f64> = (0..series.len()).map(|i| series.time(i)).collect();
    write_columns(path, &TIME_SERIES_COLUMNS, &[&times, &series.samples])?;
    write_json(&sidecar_path(path), header)
}

/// Reads a time series. The sample rate comes from the sidecar when present,
/// otherwise from the time column, which must then be uniform to 1e-6.
pub fn read_time_series(path: &Path) -> Result<(TimeSeries, Option<TimeSeriesHeader>)> {
    let (t, v) = two_columns(path, TIME_SERIES_COLUMNS)?;
    if t.len() < 2 {
        return Err(Error::Schema(format!("{}: need at least two samples", path.display())));
    }
    let sidecar = sidecar_path(path);
    let header: Option<TimeSeriesHeader> = if sidecar.is_file() {
        Some(serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?)
    } else {
        None
    };
    let sample_rate = match &header {
        Some(h) => h.sample_rate_Hz,
        None => {
            let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
            let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt.abs());
            if !(dt > 0.0) || !uniform {
                return Err(Error::Schema(format!("{}: time_s column is not uniformly increasing", path.display())));
            }
            1.0 / dt
        }
    };
    let series = TimeSeries::new(sample_rate, t[0], v).map_err(|e| Error::Schema(e.to_string()))?;
    Ok((series, header))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scan.csv");
        let f = vec![0.1, 1.0 / 3.0, -2.5e9, f64::MIN_POSITIVE, 1e300];
        let t = vec![std::f64::consts::PI, 0.0, -0.0, 1e-17, 0.9999999999999999];
        write_scan(&p, &f, &t).unwrap();
        let (f2, t2) = read_scan(&p).unwrap();
        assert_eq!(f, f2);
        assert_eq!(t, t2);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("frequency_Hz,transmission\n"));
    }

    #[test]
    fn missing_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sat.csv");
        std::fs::write(&p, "pump_power_W,transmission\n0.0,1.0\n").unwrap();
        let err = read_saturation(&p).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn columns_found_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sat.csv");
        std::fs::write(&p, "note,normalized_transmission,pump_power_W\n0,0.5,1.5\n0,0.25,3.0\n").unwrap();
        let (pw, t) = read_saturation(&p).unwrap();
        assert_eq!(pw, vec![1.5, 3.0]);
        assert_eq!(t, vec![0.5, 0.25]);
    }

    #[test]
    fn optional_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sat.csv");
        std::fs::write(&p, "pump_power_W,normalized_transmission,sigma\n0,1,0.01\n").unwrap();
        assert_eq!(read_optional_column(&p, "sigma").unwrap(), Some(vec![0.01]));
        assert_eq!(read_optional_column(&p, "weight").unwrap(), None);
    }

    #[test]
    fn bad_number_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "frequency_Hz,transmission\n1,abc\n").unwrap();
        assert!(matches!(read_scan(&p), Err(Error::Schema(_))));
    }

    #[test]
    fn time_series_with_and_without_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ts.csv");
        let s = TimeSeries::new(1e4, 0.0, (0..100).map(|i| (i as f64).sin()).collect()).unwrap();
        let header = TimeSeriesHeader {
            sample_rate_Hz: 1e4,
            seed: Some(7),
            config: None,
        };
        write_time_series(&p, &s, &header).unwrap();
        let (back, h) = read_time_series(&p).unwrap();
        assert_eq!(back.samples, s.samples);
        assert_eq!(h.unwrap(), header);

        std::fs::remove_file(sidecar_path(&p)).unwrap();
        let (back, h) = read_time_series(&p).unwrap();
        assert!(h.is_none());
        assert!((back.sample_rate - 1e4).abs() < 1e-6);
    }

    #[test]
    fn spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("asd.csv");
        let s = Spectrum::new(vec![0.0, 1.0, 2.0], vec![1e-9, 2e-9, 3e-9]).unwrap();
        write_spectrum(&p, &s).unwrap();
        assert_eq!(read_spectrum(&p).unwrap(), s);
    }
}
