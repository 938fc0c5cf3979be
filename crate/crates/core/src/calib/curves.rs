use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CURVE_HEADER: [&str; 3] = ["rating", "t_years", "cum_default_rate"];

/// Observed cumulative default rates of one rating class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricalCurve {
    pub rating: String,
    /// `(t, rate)` with strictly increasing `t`.
    pub points: Vec<(f64, f64)>,
}

impl HistoricalCurve {
    pub fn new(rating: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let c = HistoricalCurve {
            rating: rating.into(),
            points,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidModel(format!("curve {} has no points", self.rating)));
        }
        for (k, &(t, r)) in self.points.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "curve {}: time {t} must be positive",
                    self.rating
                )));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidModel(format!(
                    "curve {}: rate {r} outside [0, 1]",
                    self.rating
                )));
            }
            if k > 0 {
                let (tp, rp) = self.points[k - 1];
                if !(t > tp) {
                    return Err(Error::InvalidModel(format!(
                        "curve {}: times must increase ({tp} then {t})",
                        self.rating
                    )));
                }
                if r < rp {
                    return Err(Error::InvalidModel(format!(
                        "curve {}: rates must not decrease ({rp} then {r})",
                        self.rating
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses `rating,t_years,cum_default_rate` rows. Ratings keep their
/// first-appearance order. Row numbers in errors count the header as row 0.
pub fn read_curves<R: Read>(reader: R) -> Result<Vec<HistoricalCurve>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(Error::Data {
                row: 0,
                detail: e.to_string(),
            })
        }
        None => {
            return Err(Error::Data {
                row: 0,
                detail: "empty file".into(),
            })
        }
    };
    if header.iter().collect::<Vec<_>>() != CURVE_HEADER {
        return Err(Error::Data {
            row: 0,
            detail: format!(
                "expected header {:?}, found {:?}",
                CURVE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut curves: Vec<HistoricalCurve> = Vec::new();
    for (k, rec) in records.enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| Error::Data {
            row,
            detail: e.to_string(),
        })?;
        if rec.len() != 3 {
            return Err(Error::Data {
                row,
                detail: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| Error::Data {
                row,
                detail: format!("{what} {:?} is not a number", &rec[i]),
            })
        };
        let t = num(1, "t_years")?;
        let r = num(2, "cum_default_rate")?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Data {
                row,
                detail: format!("t_years must be positive, got {t}"),
            });
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Data {
                row,
                detail: format!("cum_default_rate {r} outside [0, 1]"),
            });
        }
        let rating = rec[0].to_string();
        let curve = match curves.iter_mut().find(|c| c.rating == rating) {
            Some(c) => c,
            None => {
                curves.push(HistoricalCurve {
                    rating,
                    points: Vec::new(),
                });
                curves.last_mut().unwrap()
            }
        };
        if let Some(&(tp, rp)) = curve.points.last() {
            if !(t > tp) {
                return Err(Error::Data {
                    row,
                    detail: format!("t_years {t} does not increase after {tp} for {}", curve.rating),
                });
            }
            if r < rp {
                return Err(Error::Data {
                    row,
                    detail: format!("rate {r} decreases after {rp} for {}", curve.rating),
                });
            }
        }
        curve.points.push((t, r));
    }
    if curves.is_empty() {
        return Err(Error::Data {
            row: 1,
            detail: "no data rows".into(),
        });
    }
    Ok(curves)
}

/// Writes curves in the format accepted by [`read_curves`].
pub fn write_curves<W: std::io::Write>(writer: W, curves: &[HistoricalCurve]) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidModel(format!("csv write failed: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CURVE_HEADER).map_err(io)?;
    for c in curves {
        for &(t, r) in &c.points {
            w.write_record([c.rating.clone(), t.to_string(), r.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidModel(format!("csv write failed: {e}")))?;
    Ok(())
}
