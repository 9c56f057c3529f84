use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Label;

/// Default minimum absolute next-day return for an instance to be kept.
pub const DEFAULT_THRESHOLD: f64 = 0.02;

#[derive(Debug, Error)]
pub enum PriceError {
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("dates must be strictly increasing: {prev} then {next}")]
    Order { prev: NaiveDate, next: NaiveDate },
    #[error("price on {date} must be positive, got {price}")]
    NonPositive { date: NaiveDate, price: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Adjusted closes on trading days.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub entity_id: String,
    points: Vec<(NaiveDate, f64)>,
}

#[derive(Debug, Deserialize)]
struct PriceRow {
    date: String,
    close: String,
}

impl PriceSeries {
    pub fn new(entity_id: impl Into<String>, points: Vec<(NaiveDate, f64)>) -> Result<Self, PriceError> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PriceError::Order {
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        if let Some(&(date, price)) = points.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
            return Err(PriceError::NonPositive { date, price });
        }
        Ok(PriceSeries {
            entity_id: entity_id.into(),
            points,
        })
    }

    /// Reads a `date,close` CSV with a header row.
    pub fn from_csv<R: Read>(entity_id: impl Into<String>, reader: R) -> Result<Self, PriceError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for (i, row) in rdr.deserialize::<PriceRow>().enumerate() {
            // header is line 1
            let line = i + 2;
            let row = row.map_err(|e| PriceError::Row {
                line,
                message: e.to_string(),
            })?;
            let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| PriceError::Row {
                line,
                message: format!("bad date `{}`: {e}", row.date),
            })?;
            let close: f64 = row.close.parse().map_err(|_| PriceError::Row {
                line,
                message: format!("bad close `{}`", row.close),
            })?;
            points.push((date, close));
        }
        Self::new(entity_id, points)
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    /// Close on `date` and on the following trading day.
    pub fn close_and_next(&self, date: NaiveDate) -> Result<(f64, f64), Exclusion> {
        let i = self
            .points
            .binary_search_by_key(&date, |p| p.0)
            .map_err(|_| Exclusion::NotATradingDay)?;
        let next = self.points.get(i + 1).ok_or(Exclusion::NoNextTradingDay)?;
        Ok((self.points[i].1, next.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Exclusion {
    /// `|return| < threshold`
    SmallMove { ret: f64 },
    NotATradingDay,
    NoNextTradingDay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelOutcome {
    Labeled(Label),
    Excluded(Exclusion),
}

impl LabelOutcome {
    pub fn label(self) -> Option<Label> {
        match self {
            LabelOutcome::Labeled(l) => Some(l),
            LabelOutcome::Excluded(_) => None,
        }
    }
}

/// Sign of a next-day return of magnitude at least `threshold`.
pub fn label_from_closes(close: f64, next: f64, threshold: f64) -> LabelOutcome {
    let ret = (next - close) / close;
    if ret >= threshold {
        LabelOutcome::Labeled(Label::Positive)
    } else if ret <= -threshold {
        LabelOutcome::Labeled(Label::Negative)
    } else {
        LabelOutcome::Excluded(Exclusion::SmallMove { ret })
    }
}

pub fn label_instance(prices: &PriceSeries, date: NaiveDate, threshold: f64) -> LabelOutcome {
    match prices.close_and_next(date) {
        Ok((close, next)) => label_from_closes(close, next, threshold),
        Err(e) => LabelOutcome::Excluded(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2012, 3, day).unwrap()
    }

    fn series(a: f64, b: f64) -> PriceSeries {
        PriceSeries::new("X", vec![(d(1), a), (d(2), b)]).unwrap()
    }

    #[test]
    fn up_three_percent() {
        assert_eq!(label_instance(&series(100.0, 103.0), d(1), 0.02), LabelOutcome::Labeled(Label::Positive));
    }

    #[test]
    fn down_one_percent_excluded() {
        assert!(matches!(
            label_instance(&series(100.0, 99.0), d(1), 0.02),
            LabelOutcome::Excluded(Exclusion::SmallMove { .. })
        ));
    }

    #[test]
    fn down_two_point_one_percent() {
        assert_eq!(label_instance(&series(100.0, 97.9), d(1), 0.02), LabelOutcome::Labeled(Label::Negative));
    }

    #[test]
    fn exactly_two_percent_kept() {
        assert_eq!(label_instance(&series(100.0, 102.0), d(1), 0.02), LabelOutcome::Labeled(Label::Positive));
    }

    #[test]
    fn missing_dates() {
        let s = series(100.0, 103.0);
        assert_eq!(label_instance(&s, d(2), 0.02), LabelOutcome::Excluded(Exclusion::NoNextTradingDay));
        assert_eq!(label_instance(&s, d(5), 0.02), LabelOutcome::Excluded(Exclusion::NotATradingDay));
    }

    #[test]
    fn csv_rows() {
        let s = PriceSeries::from_csv("X", "date,close\n2012-03-01,10.5\n2012-03-02,11\n".as_bytes()).unwrap();
        assert_eq!(s.points().len(), 2);
        let e = PriceSeries::from_csv("X", "date,close\n2012-03-01,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(e, PriceError::Row { line: 2, .. }));
        assert!(PriceSeries::from_csv("X", "date,close\n2012-03-02,1\n2012-03-01,1\n".as_bytes()).is_err());
    }
}
