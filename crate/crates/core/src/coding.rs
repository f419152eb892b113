//! Coding of raw meter streams into cases-by-variables matrices, the
//! double-log transform for frequency data, and random partitioning.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Datelike, Months, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::sum::compensated_sum;
use crate::{Error, Result};

/// Half-hour readings per day.
pub const BINS_PER_DAY: usize = 48;

pub const WEEKDAY_NAMES: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

/// One time-stamped nominal event logged by a meter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub case_id: String,
    pub timestamp: DateTime<Utc>,
    pub code: String,
}

impl EventRecord {
    pub fn new(
        case_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        code: impl Into<String>,
    ) -> Result<Self> {
        let case_id = case_id.into();
        let code = code.into();
        if case_id.is_empty() {
            return Err(Error::invalid("event record has an empty case id"));
        }
        if code.is_empty() {
            return Err(Error::invalid("event record has an empty code"));
        }
        Ok(Self {
            case_id,
            timestamp,
            code,
        })
    }
}

/// One day of half-hourly kWh readings for a meter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionRecord {
    pub case_id: String,
    pub date: NaiveDate,
    bins: Box<[f64; BINS_PER_DAY]>,
}

impl ConsumptionRecord {
    pub fn new(case_id: impl Into<String>, date: NaiveDate, bins: &[f64]) -> Result<Self> {
        let case_id = case_id.into();
        if case_id.is_empty() {
            return Err(Error::invalid("consumption record has an empty case id"));
        }
        let bins: [f64; BINS_PER_DAY] = bins.try_into().map_err(|_| {
            Error::invalid(format!(
                "expected {BINS_PER_DAY} half-hour bins, got {}",
                bins.len()
            ))
        })?;
        if let Some(i) = bins.iter().position(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::invalid(format!(
                "bin {} is {} (must be finite and non-negative)",
                i + 1,
                bins[i]
            )));
        }
        Ok(Self {
            case_id,
            date,
            bins: Box::new(bins),
        })
    }

    pub fn bins(&self) -> &[f64; BINS_PER_DAY] {
        &self.bins
    }

    pub fn daily_total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Inclusive calendar-date interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    start: NaiveDate,
    end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::invalid(format!(
                "window start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    /// Three calendar months beginning at `start`, the default analysis span.
    pub fn three_months_from(start: NaiveDate) -> Self {
        let end = start
            .checked_add_months(Months::new(3))
            .and_then(|d| d.pred_opt())
            .unwrap_or(NaiveDate::MAX);
        Self { start, end }
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    EventFrequency,
    ConsumptionDayOfWeek,
    Generic,
}

/// A labelled cases-by-variables matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedMatrix {
    matrix: DenseMatrix,
    case_ids: Vec<String>,
    variable_names: Vec<String>,
    kind: MatrixKind,
    /// Set once the double-log transform has been applied.
    transformed: bool,
}

impl CodedMatrix {
    pub fn new(
        matrix: DenseMatrix,
        case_ids: Vec<String>,
        variable_names: Vec<String>,
        kind: MatrixKind,
    ) -> Result<Self> {
        Self::assemble(matrix, case_ids, variable_names, kind, false)
    }

    fn assemble(
        matrix: DenseMatrix,
        case_ids: Vec<String>,
        variable_names: Vec<String>,
        kind: MatrixKind,
        transformed: bool,
    ) -> Result<Self> {
        if case_ids.len() != matrix.rows() || variable_names.len() != matrix.cols() {
            return Err(Error::invalid(format!(
                "{} case ids and {} variable names for a {}x{} matrix",
                case_ids.len(),
                variable_names.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        ensure_unique(&case_ids, "case id")?;
        ensure_unique(&variable_names, "variable name")?;
        if kind == MatrixKind::EventFrequency
            && !transformed
            && matrix
                .as_slice()
                .iter()
                .any(|&v| v < 0.0 || v.fract() != 0.0)
        {
            return Err(Error::invalid(
                "event frequencies must be non-negative integers",
            ));
        }
        Ok(Self {
            matrix,
            case_ids,
            variable_names,
            kind,
            transformed,
        })
    }

    pub fn empty(kind: MatrixKind) -> Self {
        Self {
            matrix: DenseMatrix::empty(),
            case_ids: Vec::new(),
            variable_names: Vec::new(),
            kind,
            transformed: false,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_transformed(&self) -> bool {
        self.transformed
    }

    pub fn rows(&self) -> usize {
        self.case_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.variable_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Sub-matrix over the named variables, in the order given.
    pub fn select_variables<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .variable_names
            .iter()
            .enumerate()
            .map(|(j, n)| (n.as_str(), j))
            .collect();
        let columns = names
            .iter()
            .map(|n| {
                index
                    .get(n.as_ref())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("unknown variable `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(
            self.matrix.select_columns(&columns)?,
            self.case_ids.clone(),
            names.iter().map(|n| n.as_ref().to_owned()).collect(),
            self.kind,
            self.transformed,
        )
    }

    /// Sub-matrix over the named cases, in the order given.
    pub fn select_cases<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .case_ids
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|n| {
                index
                    .get(n.as_ref())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("unknown case `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(
            self.matrix.select_rows(&rows)?,
            ids.iter().map(|n| n.as_ref().to_owned()).collect(),
            self.variable_names.clone(),
            self.kind,
            self.transformed,
        )
    }

    /// Names of variables whose values are identical across all cases.
    pub fn constant_variables(&self) -> Vec<String> {
        (0..self.cols())
            .filter(|&j| {
                let first = self.matrix.get(0, j);
                (1..self.rows()).all(|i| self.matrix.get(i, j) == first)
            })
            .map(|j| self.variable_names[j].clone())
            .collect()
    }
}

fn ensure_unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::invalid(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

/// Cases and variables removed (or patched) while coding.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub dropped_cases: Vec<String>,
    pub dropped_variables: Vec<String>,
    /// Cases kept, but with at least one imputed entry.
    pub imputed_cases: Vec<String>,
}

impl DropReport {
    pub fn is_empty(&self) -> bool {
        self.dropped_cases.is_empty()
            && self.dropped_variables.is_empty()
            && self.imputed_cases.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coded {
    pub matrix: CodedMatrix,
    pub report: DropReport,
}

fn sorted_unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = items.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Counts each event code per case over the window.
///
/// Rows are case ids and columns event codes, both sorted. Cases or codes
/// observed only outside the window give all-zero rows or columns; those are
/// dropped and listed in the report, so the result is always safe for
/// correspondence analysis.
pub fn code_events(records: &[EventRecord], window: &DateWindow) -> Coded {
    let cases = sorted_unique(records.iter().map(|r| r.case_id.as_str()));
    let codes = sorted_unique(records.iter().map(|r| r.code.as_str()));
    let case_index: HashMap<&str, usize> = cases.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let code_index: HashMap<&str, usize> = codes.iter().enumerate().map(|(j, &c)| (c, j)).collect();

    let p = codes.len();
    let mut counts = vec![0u64; cases.len() * p];
    for r in records
        .iter()
        .filter(|r| window.contains(r.timestamp.date_naive()))
    {
        counts[case_index[r.case_id.as_str()] * p + code_index[r.code.as_str()]] += 1;
    }

    let keep_rows: Vec<usize> = (0..cases.len())
        .filter(|&i| counts[i * p..(i + 1) * p].iter().any(|&c| c > 0))
        .collect();
    let keep_cols: Vec<usize> = (0..p)
        .filter(|&j| (0..cases.len()).any(|i| counts[i * p + j] > 0))
        .collect();

    let report = DropReport {
        dropped_cases: dropped(&cases, &keep_rows),
        dropped_variables: dropped(&codes, &keep_cols),
        imputed_cases: Vec::new(),
    };
    if keep_rows.is_empty() {
        return Coded {
            matrix: CodedMatrix::empty(MatrixKind::EventFrequency),
            report,
        };
    }

    let mut values = Vec::with_capacity(keep_rows.len() * keep_cols.len());
    for &i in &keep_rows {
        values.extend(keep_cols.iter().map(|&j| counts[i * p + j] as f64));
    }
    let matrix = DenseMatrix::from_raw(keep_rows.len(), keep_cols.len(), values);
    Coded {
        matrix: CodedMatrix {
            matrix,
            case_ids: keep_rows.iter().map(|&i| cases[i].to_owned()).collect(),
            variable_names: keep_cols.iter().map(|&j| codes[j].to_owned()).collect(),
            kind: MatrixKind::EventFrequency,
            transformed: false,
        },
        report,
    }
}

fn dropped(names: &[&str], kept: &[usize]) -> Vec<String> {
    let kept: BTreeSet<usize> = kept.iter().copied().collect();
    names
        .iter()
        .enumerate()
        .filter(|(i, _)| !kept.contains(i))
        .map(|(_, n)| (*n).to_owned())
        .collect()
}

/// `ln(ln(x + 1) + 1) + 1` applied elementwise; zero maps to exactly one.
pub fn double_log(x: f64) -> f64 {
    x.ln_1p().ln_1p() + 1.0
}

/// Compresses frequency counts with [`double_log`]. The kind is kept and
/// the result is marked as transformed; transforming twice is an error.
pub fn double_log_transform(coded: &CodedMatrix) -> Result<CodedMatrix> {
    if coded.transformed {
        return Err(Error::invalid("matrix is already double-log transformed"));
    }
    if let Some(pos) = coded.matrix.as_slice().iter().position(|&v| v < 0.0) {
        let cols = coded.cols();
        return Err(Error::invalid(format!(
            "negative count for case `{}`, variable `{}`",
            coded.case_ids[pos / cols],
            coded.variable_names[pos % cols]
        )));
    }
    let matrix = if coded.is_empty() {
        DenseMatrix::empty()
    } else {
        let values = coded.matrix.as_slice().iter().map(|&v| double_log(v)).collect();
        DenseMatrix::from_raw(coded.rows(), coded.cols(), values)
    };
    Ok(CodedMatrix {
        matrix,
        case_ids: coded.case_ids.clone(),
        variable_names: coded.variable_names.clone(),
        kind: coded.kind,
        transformed: true,
    })
}

/// Mean daily consumption (sum of the 48 bins) per day of week, Monday
/// first.
///
/// A weekday with no in-window observation is filled with the mean of the
/// case's observed weekdays, and the case is listed as imputed. Cases with
/// no in-window day at all are dropped. Results do not depend on record
/// order.
pub fn code_consumption(records: &[ConsumptionRecord], window: &DateWindow) -> Coded {
    let mut per_case: BTreeMap<&str, [Vec<f64>; 7]> = BTreeMap::new();
    for r in records {
        let days = per_case.entry(r.case_id.as_str()).or_default();
        if window.contains(r.date) {
            days[r.date.weekday().num_days_from_monday() as usize].push(r.daily_total());
        }
    }

    let mut report = DropReport::default();
    let mut case_ids = Vec::new();
    let mut values = Vec::new();
    for (case, mut days) in per_case {
        if days.iter().all(Vec::is_empty) {
            report.dropped_cases.push(case.to_owned());
            continue;
        }
        let means: Vec<Option<f64>> = days
            .iter_mut()
            .map(|totals| {
                (!totals.is_empty()).then(|| {
                    totals.sort_by(f64::total_cmp);
                    compensated_sum(totals.iter().copied()) / totals.len() as f64
                })
            })
            .collect();
        let observed: Vec<f64> = means.iter().flatten().copied().collect();
        if observed.len() < 7 {
            report.imputed_cases.push(case.to_owned());
        }
        let fill = compensated_sum(observed.iter().copied()) / observed.len() as f64;
        values.extend(means.iter().map(|m| m.unwrap_or(fill)));
        case_ids.push(case.to_owned());
    }

    if case_ids.is_empty() {
        return Coded {
            matrix: CodedMatrix::empty(MatrixKind::ConsumptionDayOfWeek),
            report,
        };
    }
    Coded {
        matrix: CodedMatrix {
            matrix: DenseMatrix::from_raw(case_ids.len(), 7, values),
            case_ids,
            variable_names: WEEKDAY_NAMES.iter().map(|&s| s.to_owned()).collect(),
            kind: MatrixKind::ConsumptionDayOfWeek,
            transformed: false,
        },
        report,
    }
}

/// Joins two coded matrices column-wise over the cases they share (sorted).
/// Variable names are prefixed to keep them unique.
pub fn join_columns(
    left: &CodedMatrix,
    left_prefix: &str,
    right: &CodedMatrix,
    right_prefix: &str,
) -> Result<CodedMatrix> {
    let right_ids: BTreeSet<&str> = right.case_ids.iter().map(String::as_str).collect();
    let mut common: Vec<&str> = left
        .case_ids
        .iter()
        .map(String::as_str)
        .filter(|id| right_ids.contains(id))
        .collect();
    common.sort_unstable();
    if common.is_empty() {
        return Err(Error::NoCommonCases);
    }
    let l = left.select_cases(&common)?;
    let r = right.select_cases(&common)?;
    let cols = l.cols() + r.cols();
    let mut values = Vec::with_capacity(common.len() * cols);
    for i in 0..common.len() {
        values.extend_from_slice(l.matrix.row(i));
        values.extend_from_slice(r.matrix.row(i));
    }
    let names = l
        .variable_names
        .iter()
        .map(|n| format!("{left_prefix}{n}"))
        .chain(r.variable_names.iter().map(|n| format!("{right_prefix}{n}")))
        .collect();
    CodedMatrix::new(
        DenseMatrix::new(common.len(), cols, values)?,
        common.iter().map(|&s| s.to_owned()).collect(),
        names,
        MatrixKind::Generic,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMode {
    ByType,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    pub mode: PartitionMode,
    pub part_count: usize,
    pub seed: u64,
    pub window: DateWindow,
}

/// Splits variables into `part_count` disjoint, non-empty subsets whose sizes
/// differ by at most one. Each subset keeps the input order.
pub fn random_partition<S: AsRef<str>>(
    variables: &[S],
    spec: &PartitionSpec,
) -> Result<Vec<Vec<String>>> {
    if spec.mode != PartitionMode::Random {
        return Err(Error::InvalidPartition(
            "random partitioning requested with a by-type spec".into(),
        ));
    }
    let n = variables.len();
    let k = spec.part_count;
    if k < 2 {
        return Err(Error::InvalidPartition(format!(
            "need at least 2 parts, got {k}"
        )));
    }
    if k > n {
        return Err(Error::InvalidPartition(format!(
            "{k} parts requested for {n} variables"
        )));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = variables.iter().map(AsRef::as_ref).find(|&v| !seen.insert(v)) {
        return Err(Error::InvalidPartition(format!(
            "duplicate variable `{dup}`"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let base = n / k;
    let extra = n % k;
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for part in 0..k {
        let len = base + usize::from(part < extra);
        let mut members = order[start..start + len].to_vec();
        members.sort_unstable();
        parts.push(
            members
                .into_iter()
                .map(|i| variables[i].as_ref().to_owned())
                .collect(),
        );
        start += len;
    }
    Ok(parts)
}

/// Assigns each nominal level a distinct uniform draw from `[0, 1)`.
/// Re-seed per repetition so associations between codes stay unbiased.
pub fn random_numeric_coding<S: AsRef<str>>(
    levels: &[S],
    seed: u64,
) -> Result<BTreeMap<String, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: BTreeSet<u64> = BTreeSet::new();
    let mut out = BTreeMap::new();
    for level in levels {
        let level = level.as_ref();
        if out.contains_key(level) {
            return Err(Error::invalid(format!("duplicate level `{level}`")));
        }
        let value = loop {
            let u: f64 = rng.random();
            if used.insert(u.to_bits()) {
                break u;
            }
        };
        out.insert(level.to_owned(), value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap()
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn window() -> DateWindow {
        DateWindow::new(date(2017, 1, 1), date(2017, 3, 31)).unwrap()
    }

    fn ev(case: &str, t: DateTime<Utc>, code: &str) -> EventRecord {
        EventRecord::new(case, t, code).unwrap()
    }

    #[test]
    fn empty_events_give_empty_matrix() {
        let coded = code_events(&[], &window());
        assert!(coded.matrix.is_empty());
        assert_eq!(coded.matrix.rows(), 0);
        assert!(coded.report.is_empty());
    }

    #[test]
    fn events_are_counted_per_case_and_code() {
        let t = at(2017, 2, 1);
        let recs = [ev("m1", t, "A"), ev("m1", t, "A"), ev("m2", t, "B")];
        let coded = code_events(&recs, &window());
        assert_eq!(coded.matrix.case_ids(), &["m1", "m2"]);
        assert_eq!(coded.matrix.variable_names(), &["A", "B"]);
        assert_eq!(coded.matrix.matrix().as_slice(), &[2.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn window_excludes_out_of_range_events() {
        let t = at(2017, 6, 1);
        let recs = [ev("m1", t, "A"), ev("m1", t, "A"), ev("m2", t, "B")];
        let coded = code_events(&recs, &window());
        assert!(coded.matrix.is_empty());
        assert_eq!(coded.report.dropped_cases, vec!["m1", "m2"]);
        assert_eq!(coded.report.dropped_variables, vec!["A", "B"]);
    }

    #[test]
    fn zero_rows_and_columns_are_dropped() {
        let recs = [
            ev("m1", at(2017, 2, 1), "A"),
            ev("m2", at(2017, 6, 1), "B"),
            ev("m3", at(2017, 2, 1), "A"),
            ev("m3", at(2017, 2, 2), "C"),
        ];
        let coded = code_events(&recs, &window());
        assert_eq!(coded.matrix.case_ids(), &["m1", "m3"]);
        assert_eq!(coded.matrix.variable_names(), &["A", "C"]);
        assert_eq!(coded.report.dropped_cases, vec!["m2"]);
        assert_eq!(coded.report.dropped_variables, vec!["B"]);
    }

    #[test]
    fn double_log_point_values() {
        assert_eq!(double_log(0.0), 1.0);
        let e = std::f64::consts::E;
        assert!((double_log(e - 1.0) - (2.0_f64.ln() + 1.0)).abs() < 1e-12);
        assert!((double_log((e - 1.0).exp() - 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transformed_frequencies_keep_kind_through_selection() {
        let t = at(2017, 2, 1);
        let recs = [ev("m1", t, "A"), ev("m1", t, "B"), ev("m2", t, "B")];
        let coded = code_events(&recs, &window()).matrix;
        let logged = double_log_transform(&coded).unwrap();
        assert_eq!(logged.kind(), MatrixKind::EventFrequency);
        assert!(logged.is_transformed());
        let part = logged.select_variables(&["B"]).unwrap().select_cases(&["m2"]).unwrap();
        assert_eq!(part.matrix().as_slice(), &[double_log(1.0)]);
        assert!(double_log_transform(&logged).is_err());
    }

    #[test]
    fn double_log_rejects_negative() {
        let m = CodedMatrix::new(
            DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap(),
            vec!["a".into()],
            vec!["x".into(), "y".into()],
            MatrixKind::Generic,
        )
        .unwrap();
        assert!(matches!(
            double_log_transform(&m),
            Err(Error::InvalidInput(_))
        ));
    }

    fn day(case: &str, d: NaiveDate, each: f64) -> ConsumptionRecord {
        ConsumptionRecord::new(case, d, &[each; BINS_PER_DAY]).unwrap()
    }

    #[test]
    fn consumption_single_monday_imputes_other_days() {
        // 2017-01-02 is a Monday
        let coded = code_consumption(&[day("m1", date(2017, 1, 2), 1.0)], &window());
        assert_eq!(coded.matrix.matrix().row(0), &[48.0; 7]);
        assert_eq!(coded.report.imputed_cases, vec!["m1"]);
    }

    #[test]
    fn consumption_averages_same_weekday() {
        let recs = [
            day("m1", date(2017, 1, 2), 10.0 / 48.0),
            day("m1", date(2017, 1, 9), 20.0 / 48.0),
            day("m1", date(2017, 1, 3), 1.0),
        ];
        let coded = code_consumption(&recs, &window());
        let row = coded.matrix.matrix().row(0);
        assert!((row[0] - 15.0).abs() < 1e-12);
        assert!((row[1] - 48.0).abs() < 1e-12);
        // imputed with the mean of the observed weekday means
        assert!((row[6] - 31.5).abs() < 1e-12);
    }

    #[test]
    fn consumption_drops_cases_without_window_days() {
        let recs = [day("m1", date(2017, 1, 2), 1.0), day("m2", date(2018, 1, 1), 1.0)];
        let coded = code_consumption(&recs, &window());
        assert_eq!(coded.matrix.case_ids(), &["m1"]);
        assert_eq!(coded.report.dropped_cases, vec!["m2"]);
        assert!(code_consumption(&[], &window()).matrix.is_empty());
    }

    #[test]
    fn consumption_record_validates_bins() {
        assert!(ConsumptionRecord::new("m", date(2017, 1, 1), &[1.0; 47]).is_err());
        let mut bins = [1.0; BINS_PER_DAY];
        bins[3] = -0.1;
        assert!(ConsumptionRecord::new("m", date(2017, 1, 1), &bins).is_err());
    }

    #[test]
    fn three_month_window() {
        let w = DateWindow::three_months_from(date(2017, 1, 1));
        assert_eq!(w.end(), date(2017, 3, 31));
        assert!(DateWindow::new(date(2017, 2, 1), date(2017, 1, 1)).is_err());
    }

    fn spec(parts: usize, seed: u64) -> PartitionSpec {
        PartitionSpec {
            mode: PartitionMode::Random,
            part_count: parts,
            seed,
            window: window(),
        }
    }

    #[test]
    fn random_partition_balances_sizes() {
        let vars: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
        let parts = random_partition(&vars, &spec(2, 7)).unwrap();
        assert_eq!(parts.iter().map(Vec::len).collect::<Vec<_>>(), vec![5, 5]);

        let vars: Vec<String> = (0..7).map(|i| format!("v{i}")).collect();
        let parts = random_partition(&vars, &spec(3, 7)).unwrap();
        let mut sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);
    }

    #[test]
    fn random_partition_is_seeded() {
        let vars: Vec<String> = (0..20).map(|i| format!("v{i}")).collect();
        assert_eq!(
            random_partition(&vars, &spec(3, 42)).unwrap(),
            random_partition(&vars, &spec(3, 42)).unwrap()
        );
    }

    #[test]
    fn random_partition_errors() {
        let vars = ["a", "b"];
        assert!(matches!(
            random_partition(&vars, &spec(3, 1)),
            Err(Error::InvalidPartition(_))
        ));
        let mut by_type = spec(2, 1);
        by_type.mode = PartitionMode::ByType;
        assert!(random_partition(&vars, &by_type).is_err());
    }

    #[test]
    fn numeric_coding_is_injective_and_seeded() {
        let levels: Vec<String> = (0..100).map(|i| format!("c{i}")).collect();
        let a = random_numeric_coding(&levels, 9).unwrap();
        let distinct: BTreeSet<u64> = a.values().map(|v| v.to_bits()).collect();
        assert_eq!(distinct.len(), 100);
        assert!(a.values().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a, random_numeric_coding(&levels, 9).unwrap());

        let one = random_numeric_coding(&["only"], 1).unwrap();
        assert!((0.0..=1.0).contains(&one["only"]));
        assert!(random_numeric_coding(&["x", "x"], 1).is_err());
    }

    #[test]
    fn join_columns_uses_common_cases() {
        let a = CodedMatrix::new(
            DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap(),
            vec!["x".into(), "y".into()],
            vec!["e".into()],
            MatrixKind::Generic,
        )
        .unwrap();
        let b = CodedMatrix::new(
            DenseMatrix::from_rows(&[[3.0], [4.0]]).unwrap(),
            vec!["z".into(), "y".into()],
            vec!["e".into()],
            MatrixKind::Generic,
        )
        .unwrap();
        let j = join_columns(&a, "a:", &b, "b:").unwrap();
        assert_eq!(j.case_ids(), &["y"]);
        assert_eq!(j.variable_names(), &["a:e", "b:e"]);
        assert_eq!(j.matrix().as_slice(), &[2.0, 4.0]);
    }
}
