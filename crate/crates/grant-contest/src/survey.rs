//! Time-use survey records.
//!
//! CSV layout (UTF-8, header row, `.` decimal separator):
//!
//! ```text
//! id,field,hrs_research,hrs_fundraising,hrs_other,grant_expected,grant_guaranteed[,covariate...]
//! ```
//!
//! Hours are per week, grant amounts in $M per year. Any columns after the
//! seventh are named numeric covariates.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{AppError, SurveyError};

pub const REQUIRED_COLUMNS: [&str; 7] = [
    "id",
    "field",
    "hrs_research",
    "hrs_fundraising",
    "hrs_other",
    "grant_expected",
    "grant_guaranteed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRecord {
    pub id: String,
    pub field: String,
    pub hrs_research: f64,
    pub hrs_fundraising: f64,
    pub hrs_other: f64,
    pub grant_expected: f64,
    pub grant_guaranteed: f64,
    pub covariates: Vec<(String, f64)>,
}

impl SurveyRecord {
    /// Looks up a core variable or a covariate by column name.
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "hrs_research" => Some(self.hrs_research),
            "hrs_fundraising" => Some(self.hrs_fundraising),
            "hrs_other" => Some(self.hrs_other),
            "grant_expected" => Some(self.grant_expected),
            "grant_guaranteed" => Some(self.grant_guaranteed),
            _ => self.covariates.iter().find(|(n, _)| n == name).map(|(_, v)| *v),
        }
    }

    /// Expected grant dollars per fundraising hour.
    pub fn grant_per_fundraising_hour(&self) -> f64 {
        self.grant_expected / self.hrs_fundraising
    }
}

/// Records dropped by each sample restriction, applied in order: nonzero
/// research time, nonzero other work, nonzero fundraising time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionReport {
    pub research_zero: usize,
    pub other_zero: usize,
    pub fundraising_zero: usize,
}

impl RejectionReport {
    pub fn total(&self) -> usize {
        self.research_zero + self.other_zero + self.fundraising_zero
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `(rule, dropped)` in application order.
    pub fn entries(&self) -> [(&'static str, usize); 3] {
        [
            ("research-zero", self.research_zero),
            ("other-zero", self.other_zero),
            ("fundraising-zero", self.fundraising_zero),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyData {
    pub records: Vec<SurveyRecord>,
    pub covariate_names: Vec<String>,
    pub report: RejectionReport,
}

pub fn load_and_filter(path: impl AsRef<Path>) -> Result<SurveyData, AppError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    Ok(read_and_filter(file)?)
}

pub fn read_and_filter<R: Read>(reader: R) -> Result<SurveyData, SurveyError> {
    let (records, covariate_names) = read_records(reader)?;
    let (records, report) = apply_restrictions(records);
    Ok(SurveyData {
        records,
        covariate_names,
        report,
    })
}

/// Parses every row without applying the sample restrictions.
pub fn read_records<R: Read>(reader: R) -> Result<(Vec<SurveyRecord>, Vec<String>), SurveyError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for (i, expected) in REQUIRED_COLUMNS.iter().enumerate() {
        let found = headers.get(i).unwrap_or("");
        if found.trim() != *expected {
            return Err(SurveyError::Schema {
                expected,
                position: i + 1,
                found: found.to_string(),
            });
        }
    }
    let covariate_names: Vec<String> = headers.iter().skip(7).map(|h| h.trim().to_string()).collect();

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, SurveyError> {
            let raw = row.get(i).unwrap_or("").trim();
            let column = headers.get(i).unwrap_or("").to_string();
            let value: f64 = raw.parse().map_err(|_| SurveyError::Parse {
                line,
                column: column.clone(),
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(SurveyError::Parse {
                    line,
                    column,
                    value: raw.to_string(),
                });
            }
            Ok(value)
        };
        let nonneg = |i: usize| -> Result<f64, SurveyError> {
            let value = num(i)?;
            if value < 0.0 {
                return Err(SurveyError::Negative {
                    line,
                    column: REQUIRED_COLUMNS[i].to_string(),
                    value,
                });
            }
            Ok(value)
        };
        let covariates = covariate_names
            .iter()
            .enumerate()
            .map(|(j, name)| Ok((name.clone(), num(7 + j)?)))
            .collect::<Result<Vec<_>, SurveyError>>()?;
        records.push(SurveyRecord {
            id: row.get(0).unwrap_or("").to_string(),
            field: row.get(1).unwrap_or("").to_string(),
            hrs_research: nonneg(2)?,
            hrs_fundraising: nonneg(3)?,
            hrs_other: nonneg(4)?,
            grant_expected: nonneg(5)?,
            grant_guaranteed: nonneg(6)?,
            covariates,
        });
    }
    Ok((records, covariate_names))
}

pub fn apply_restrictions(records: Vec<SurveyRecord>) -> (Vec<SurveyRecord>, RejectionReport) {
    let mut report = RejectionReport::default();
    let kept = records
        .into_iter()
        .filter(|r| {
            if r.hrs_research <= 0.0 {
                report.research_zero += 1;
                false
            } else if r.hrs_other <= 0.0 {
                report.other_zero += 1;
                false
            } else if r.hrs_fundraising <= 0.0 {
                report.fundraising_zero += 1;
                false
            } else {
                true
            }
        })
        .collect();
    (kept, report)
}

/// Leave-one-out field average of grant dollars per fundraising hour, in
/// record order.
pub fn jackknife_instrument(records: &[SurveyRecord]) -> Result<Vec<f64>, SurveyError> {
    let mut by_field: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in records {
        if r.hrs_fundraising.is_nan() || r.hrs_fundraising <= 0.0 {
            return Err(SurveyError::ZeroFundraising(r.id.clone()));
        }
        let entry = by_field.entry(r.field.as_str()).or_insert((0.0, 0));
        entry.0 += r.grant_per_fundraising_hour();
        entry.1 += 1;
    }
    if let Some((field, _)) = by_field.iter().find(|(_, (_, n))| *n < 2) {
        return Err(SurveyError::SingletonField(field.to_string()));
    }
    Ok(records
        .iter()
        .map(|r| {
            let (sum, n) = by_field[r.field.as_str()];
            (sum - r.grant_per_fundraising_hour()) / (n - 1) as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: &'static str,
    pub variable: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    /// Set when fewer than two observations make the sd meaningless.
    pub degenerate: bool,
}

pub const TIME_USE_GROUP: &str = "Time use, hrs. per week";
pub const FUNDING_GROUP: &str = "Funding, $-M per year";
pub const COVARIATE_GROUP: &str = "Covariates";

/// Count, mean and sample standard deviation per variable, grouped as time
/// use, funding, then covariates.
pub fn summarize(records: &[SurveyRecord]) -> Result<Vec<SummaryRow>, SurveyError> {
    let first = records.first().ok_or(SurveyError::Empty)?;
    let mut vars: Vec<(&'static str, String)> = vec![
        (TIME_USE_GROUP, "hrs_research".into()),
        (TIME_USE_GROUP, "hrs_fundraising".into()),
        (TIME_USE_GROUP, "hrs_other".into()),
        (FUNDING_GROUP, "grant_expected".into()),
        (FUNDING_GROUP, "grant_guaranteed".into()),
    ];
    vars.extend(first.covariates.iter().map(|(n, _)| (COVARIATE_GROUP, n.clone())));

    vars.into_iter()
        .map(|(group, variable)| {
            let xs = records
                .iter()
                .map(|r| r.value(&variable).ok_or_else(|| SurveyError::UnknownVariable(variable.clone())))
                .collect::<Result<Vec<f64>, _>>()?;
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let degenerate = n < 2;
            let sd = if degenerate {
                0.0
            } else {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            Ok(SummaryRow {
                group,
                variable,
                count: n,
                mean,
                sd,
                degenerate,
            })
        })
        .collect()
}
