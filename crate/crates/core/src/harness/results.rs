//! CSV serialization of experiment records.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields bit-identical values. Failed trials leave `delta_hat`
//! and `abs_err` empty.

use std::io::{Read, Write};
use std::str::FromStr;

use super::{ExperimentRecord, TrialStatus};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "case,prefilter,estimator,sigma,trial,delta_true,delta_hat,abs_err,status,kappa_ratio,mask_fraction,seed";

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in records {
        let status = match r.status {
            TrialStatus::Ok => "ok",
            TrialStatus::Failed => "failed",
        };
        w.write_record([
            r.case.to_string(),
            r.prefilter.to_string(),
            r.estimator.to_string(),
            r.sigma.to_string(),
            r.trial.to_string(),
            r.delta_true.to_string(),
            opt(r.delta_hat),
            opt(r.abs_err),
            status.to_string(),
            r.kappa_ratio.to_string(),
            r.mask_fraction.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let name = CSV_HEADER.split(',').nth(idx).unwrap_or("?");
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|e| Error::Parse { line: Some(line), message: format!("column {name}: {e} ({raw:?})") })
}

fn opt_field(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    if rec.get(idx).is_some_and(|s| s.trim().is_empty()) {
        Ok(None)
    } else {
        field(rec, idx, line).map(Some)
    }
}

/// Reads records written by [`write_csv`]. The header must match exactly.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(csv_error)?,
        None => return Err(Error::Empty("csv")),
    };
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Parse { line: Some(1), message: format!("expected header `{CSV_HEADER}`") });
    }

    let mut out = Vec::new();
    for row in rows {
        let rec = row.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let status = match rec.get(8).map(str::trim) {
            Some("ok") => TrialStatus::Ok,
            Some("failed") => TrialStatus::Failed,
            other => {
                return Err(Error::Parse { line: Some(line), message: format!("column status: bad value {other:?}") })
            }
        };
        let r = ExperimentRecord {
            case: field(&rec, 0, line)?,
            prefilter: field(&rec, 1, line)?,
            estimator: field(&rec, 2, line)?,
            sigma: field(&rec, 3, line)?,
            trial: field(&rec, 4, line)?,
            delta_true: field(&rec, 5, line)?,
            delta_hat: opt_field(&rec, 6, line)?,
            abs_err: opt_field(&rec, 7, line)?,
            status,
            kappa_ratio: field(&rec, 9, line)?,
            mask_fraction: field(&rec, 10, line)?,
            seed: field(&rec, 11, line)?,
        };
        if r.is_ok() != r.delta_hat.is_some() || r.delta_hat.is_some() != r.abs_err.is_some() {
            return Err(Error::Parse {
                line: Some(line),
                message: "delta_hat/abs_err must be present exactly when status is ok".into(),
            });
        }
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gs::Estimator;
    use crate::harness::aggregate_mae;
    use crate::prefilter::Prefilter;
    use crate::synth::Case;

    fn sample() -> Vec<ExperimentRecord> {
        let mut v = Vec::new();
        for (trial, err) in [(0, Some(0.1)), (1, None), (2, Some(1.0 / 3.0))] {
            v.push(ExperimentRecord {
                case: Case::III,
                prefilter: Prefilter::Gfb,
                estimator: Estimator::Sin,
                sigma: 0.1 * trial as f64,
                trial,
                delta_true: std::f64::consts::FRAC_PI_3,
                delta_hat: err.map(|e| std::f64::consts::FRAC_PI_3 + e),
                abs_err: err,
                status: if err.is_some() { TrialStatus::Ok } else { TrialStatus::Failed },
                kappa_ratio: 0.0123456789,
                mask_fraction: 0.9,
                seed: u64::MAX - trial as u64,
            });
        }
        v
    }

    fn to_string(records: &[ExperimentRecord]) -> String {
        let mut buf = Vec::new();
        write_csv(&mut buf, records).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let recs = sample();
        let text = to_string(&recs);
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.lines().nth(2).unwrap().contains(",,,failed,"));
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, recs);
        assert_eq!(aggregate_mae(&back).unwrap(), aggregate_mae(&recs).unwrap());
    }

    #[test]
    fn header_only_is_empty_list() {
        assert!(read_csv(format!("{CSV_HEADER}\n").as_bytes()).unwrap().is_empty());
        assert!(matches!(read_csv(&b""[..]), Err(Error::Empty(_))));
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(matches!(read_csv(&b"a,b\n"[..]), Err(Error::Parse { line: Some(1), .. })));
        let text = to_string(&sample()).replace("III,gfb", "IV,gfb");
        assert!(matches!(read_csv(text.as_bytes()), Err(Error::Parse { line: Some(2), .. })));
        let text = to_string(&sample()).replacen(",ok,", ",failed,", 1);
        assert!(matches!(read_csv(text.as_bytes()), Err(Error::Parse { .. })));
    }
}
