//! Error metrics and convergence logs.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::image::Image;

/// Fixed reporting scale applied to squared linear differences.
pub const MSE_SCALE: f64 = 255.0 * 255.0;

/// Exact CSV header of a convergence log.
pub const LOG_HEADER: [&str; 5] = ["iteration", "seconds", "mse", "mean_radius", "vm_share"];

/// Mean over pixels and channels of squared differences, times 255².
pub fn mse(img: &Image, reference: &Image) -> Result<f64> {
    if img.width != reference.width || img.height != reference.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            img.width, img.height, reference.width, reference.height
        )));
    }
    if img.pixels.is_empty() {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    let mut sum = 0.0;
    for (a, b) in img.pixels.iter().zip(&reference.pixels) {
        for c in 0..3 {
            let d = a[c] as f64 - b[c] as f64;
            sum += d * d;
        }
    }
    Ok(MSE_SCALE * sum / (3 * img.pixels.len()) as f64)
}

/// Least-squares slope of `ln mse` against `ln iteration`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(i, m)| *i > 0.0 && *m > 0.0 && m.is_finite())
        .map(|(i, m)| (i.ln(), m.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientSamples(format!(
            "slope fit needs at least 10 rows with positive MSE, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("degenerate window: all iterations equal".into()));
    }
    Ok(sxy / sxx)
}

/// One row of a convergence log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub iteration: u64,
    pub seconds: f64,
    /// NaN when no reference was supplied.
    pub mse: f64,
    pub mean_radius: f64,
    pub vm_share: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceLog {
    rows: Vec<LogRow>,
}

fn fmt_field(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

impl ConvergenceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    /// Appends a row; iterations must be strictly increasing.
    pub fn push(&mut self, row: LogRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.iteration <= last.iteration {
                return Err(Error::InvalidArgument(format!(
                    "iteration {} does not follow {}",
                    row.iteration, last.iteration
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Slope over rows with `from <= iteration <= to`.
    pub fn slope(&self, from: u64, to: u64) -> Result<f64> {
        if from > to {
            return Err(Error::InvalidArgument(format!("empty window {from}..{to}")));
        }
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.iteration >= from && r.iteration <= to)
            .map(|r| (r.iteration as f64, r.mse))
            .collect();
        log_log_slope(&pts)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LOG_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.iteration.to_string(),
                fmt_field(r.seconds),
                fmt_field(r.mse),
                fmt_field(r.mean_radius),
                fmt_field(r.vm_share),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers()?.clone();
        if header.iter().ne(LOG_HEADER) {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unexpected log header '{}'", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut log = ConvergenceLog::new();
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            let fields: [String; 5] = match rec.iter().map(str::to_string).collect::<Vec<_>>().try_into() {
                Ok(f) => f,
                Err(_) => {
                    return Err(Error::Parse { line, column: 1, message: "expected 5 fields".into() });
                }
            };
            let num = |i: usize| -> Result<f64> {
                fields[i].trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    column: i + 1,
                    message: format!("bad {} value '{}'", LOG_HEADER[i], fields[i]),
                })
            };
            let iteration = fields[0].trim().parse::<u64>().map_err(|_| Error::Parse {
                line,
                column: 1,
                message: format!("bad iteration '{}'", fields[0]),
            })?;
            log.push(LogRow { iteration, seconds: num(1)?, mse: num(2)?, mean_radius: num(3)?, vm_share: num(4)? })
                .map_err(|e| Error::Parse { line, column: 1, message: e.to_string() })?;
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_of_one_channel() {
        let a = Image::new(1, 1);
        let mut b = Image::new(1, 1);
        b.set(0, 0, [0.0, (1.0f64 / 255.0) as f32, 0.0]);
        let m = mse(&a, &b).unwrap();
        let d = (1.0f64 / 255.0) as f32 as f64;
        assert!((m - MSE_SCALE * d * d / 3.0).abs() < 1e-12);
        assert!((m - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn mismatched_sizes() {
        assert!(mse(&Image::new(1, 2), &Image::new(2, 1)).is_err());
    }

    #[test]
    fn csv_roundtrip_keeps_nan() {
        let mut log = ConvergenceLog::new();
        log.push(LogRow { iteration: 1, seconds: 0.5, mse: f64::NAN, mean_radius: 0.1, vm_share: 0.0 }).unwrap();
        log.push(LogRow { iteration: 2, seconds: 0.25, mse: 3.0, mean_radius: 0.1, vm_share: 1.0 }).unwrap();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,seconds,mse,mean_radius,vm_share\n"));
        let back = ConvergenceLog::read_csv(&buf[..]).unwrap();
        assert!(back.rows()[0].mse.is_nan());
        assert_eq!(back.rows()[1], log.rows()[1]);
    }

    #[test]
    fn rejects_non_increasing_iterations() {
        let mut log = ConvergenceLog::new();
        let r = LogRow { iteration: 3, seconds: 0.0, mse: 1.0, mean_radius: 0.0, vm_share: 0.0 };
        log.push(r).unwrap();
        assert!(log.push(r).is_err());
    }
}
