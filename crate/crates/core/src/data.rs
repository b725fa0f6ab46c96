//! Gap-time data: long-format CSV ingestion, covariate encoding and the
//! validated in-memory dataset.
//!
//! The CSV layout is one row per gap time:
//!
//! ```text
//! subject_id,event_index,gap_time,censored,<covariate columns...>
//! ```
//!
//! `censored` is read from the last row of each subject; a `1` on any earlier
//! row is rejected. When a subject is censored its last gap is the censoring
//! residual, a lower bound on the unobserved gap.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUBJECT_COLUMN: &str = "subject_id";
pub const INDEX_COLUMN: &str = "event_index";
pub const GAP_COLUMN: &str = "gap_time";
pub const CENSORED_COLUMN: &str = "censored";

/// How one raw CSV column becomes encoded covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric {
        #[serde(default)]
        standardize: bool,
    },
    Binary,
    /// `levels` lists every admissible level; `baseline` maps to the
    /// all-zero pattern and the others get one dummy column each, in order.
    Categorical {
        levels: Vec<String>,
        baseline: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

/// Location/scale used to standardize a numeric column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

/// Maps raw covariate columns onto the encoded design vector `x_ij`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariateCodec {
    #[serde(default)]
    pub columns: Vec<ColumnSpec>,
    /// Fitted standardization per column name. Filled on first load and
    /// reused afterwards so prediction sees the same scale.
    #[serde(default)]
    pub standardization: BTreeMap<String, Standardization>,
}

impl CovariateCodec {
    pub fn new(columns: Vec<ColumnSpec>) -> Self {
        CovariateCodec {
            columns,
            standardization: BTreeMap::new(),
        }
    }

    /// Encoded dimension `q` after dummy expansion.
    pub fn dimension(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColumnKind::Numeric { .. } | ColumnKind::Binary => 1,
                ColumnKind::Categorical { levels, .. } => levels.len().saturating_sub(1),
            })
            .sum()
    }

    /// Names of the encoded columns, `name=level` for dummies.
    pub fn encoded_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dimension());
        for col in &self.columns {
            match &col.kind {
                ColumnKind::Numeric { .. } | ColumnKind::Binary => out.push(col.name.clone()),
                ColumnKind::Categorical { levels, baseline } => {
                    for level in levels.iter().filter(|l| *l != baseline) {
                        out.push(format!("{}={}", col.name, level));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "covariate column `{}` listed twice",
                    col.name
                )));
            }
            if [SUBJECT_COLUMN, INDEX_COLUMN, GAP_COLUMN, CENSORED_COLUMN].contains(&col.name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "`{}` is reserved and cannot be a covariate",
                    col.name
                )));
            }
            if let ColumnKind::Categorical { levels, baseline } = &col.kind {
                if levels.len() < 2 {
                    return Err(Error::InvalidConfig(format!(
                        "categorical `{}` needs at least two levels",
                        col.name
                    )));
                }
                if !levels.contains(baseline) {
                    return Err(Error::InvalidConfig(format!(
                        "baseline `{baseline}` is not a level of `{}`",
                        col.name
                    )));
                }
                let distinct: std::collections::HashSet<_> = levels.iter().collect();
                if distinct.len() != levels.len() {
                    return Err(Error::InvalidConfig(format!(
                        "categorical `{}` has repeated levels",
                        col.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Encodes one row of raw cells (ordered as `columns`). Numeric columns
    /// are standardized only if `standardization` already holds their stats.
    fn encode_row(&self, cells: &[&str], row: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dimension());
        for (col, cell) in self.columns.iter().zip(cells) {
            let cell = cell.trim();
            match &col.kind {
                ColumnKind::Numeric { standardize } => {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| Error::row(row, format!("`{}`: `{cell}` is not a number", col.name)))?;
                    if !v.is_finite() {
                        return Err(Error::row(row, format!("`{}` is not finite", col.name)));
                    }
                    let v = match (standardize, self.standardization.get(&col.name)) {
                        (true, Some(s)) => (v - s.mean) / s.sd,
                        _ => v,
                    };
                    out.push(v);
                }
                ColumnKind::Binary => {
                    let v = match cell {
                        "0" => 0.0,
                        "1" => 1.0,
                        _ => {
                            return Err(Error::row(
                                row,
                                format!("`{}`: binary value must be 0 or 1, got `{cell}`", col.name),
                            ))
                        }
                    };
                    out.push(v);
                }
                ColumnKind::Categorical { levels, baseline } => {
                    if !levels.iter().any(|l| l == cell) {
                        return Err(Error::row(row, format!("`{}`: unknown level `{cell}`", col.name)));
                    }
                    for level in levels.iter().filter(|l| *l != baseline) {
                        out.push(if level == cell { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One subject's gap-time sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub gap_times: Vec<f64>,
    /// The last entry of `gap_times` is a censoring residual.
    pub censored: bool,
    /// Encoded covariates, one row per gap time.
    pub covariates: Vec<Vec<f64>>,
}

impl SubjectRecord {
    pub fn len(&self) -> usize {
        self.gap_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gap_times.is_empty()
    }

    /// Number of fully observed gaps.
    pub fn observed_len(&self) -> usize {
        if self.censored {
            self.len() - 1
        } else {
            self.len()
        }
    }
}

/// Raw covariate column names and cells, per subject and gap.
type RawCells = (Vec<String>, Vec<Vec<Vec<String>>>);

/// Validated dataset. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTimeDataset {
    subjects: Vec<SubjectRecord>,
    log_gaps: Vec<Vec<f64>>,
    q: usize,
    max_gaps: usize,
    covariate_names: Vec<String>,
    /// Raw covariate cells as read, kept for lossless re-export.
    raw_cells: Option<RawCells>,
}

impl GapTimeDataset {
    /// Builds a dataset from records, checking every invariant.
    pub fn new(subjects: Vec<SubjectRecord>, q: usize) -> Result<Self> {
        let names = (1..=q).map(|r| format!("x{r}")).collect();
        Self::with_names(subjects, q, names)
    }

    pub fn with_names(subjects: Vec<SubjectRecord>, q: usize, covariate_names: Vec<String>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::InvalidData("dataset has no subjects".into()));
        }
        if covariate_names.len() != q {
            return Err(Error::InvalidData(format!(
                "{} covariate names for q = {q}",
                covariate_names.len()
            )));
        }
        for s in &subjects {
            if s.is_empty() {
                return Err(Error::InvalidData(format!(
                    "subject `{}` has no gap times",
                    s.subject_id
                )));
            }
            if let Some(w) = s.gap_times.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(Error::InvalidData(format!(
                    "subject `{}` has non-positive gap time {w}",
                    s.subject_id
                )));
            }
            if s.covariates.len() != s.len() {
                return Err(Error::InvalidData(format!(
                    "subject `{}`: {} covariate rows for {} gap times",
                    s.subject_id,
                    s.covariates.len(),
                    s.len()
                )));
            }
            if s.covariates.iter().any(|row| row.len() != q) {
                return Err(Error::InvalidData(format!(
                    "subject `{}`: ragged covariate rows (expected q = {q})",
                    s.subject_id
                )));
            }
        }
        let log_gaps = subjects
            .iter()
            .map(|s| s.gap_times.iter().map(|w| w.ln()).collect())
            .collect();
        let max_gaps = subjects.iter().map(SubjectRecord::len).max().unwrap_or(0);
        Ok(GapTimeDataset {
            subjects,
            log_gaps,
            q,
            max_gaps,
            covariate_names,
            raw_cells: None,
        })
    }

    /// Builds a covariate-free dataset directly from log gaps, which avoids
    /// the round trip through `exp` for simulated data.
    pub fn from_log_gaps(ids: Vec<String>, log_gaps: Vec<Vec<f64>>, censored: Vec<bool>) -> Result<Self> {
        if ids.len() != log_gaps.len() || ids.len() != censored.len() {
            return Err(Error::InvalidData("mismatched subject vectors".into()));
        }
        if log_gaps.iter().flatten().any(|y| !y.is_finite()) {
            return Err(Error::InvalidData("non-finite log gap".into()));
        }
        let subjects = ids
            .into_iter()
            .zip(&log_gaps)
            .zip(censored)
            .map(|((id, ys), c)| SubjectRecord {
                subject_id: id,
                gap_times: ys.iter().map(|y| y.exp()).collect(),
                censored: c,
                covariates: vec![Vec::new(); ys.len()],
            })
            .collect();
        let mut ds = Self::new(subjects, 0)?;
        ds.log_gaps = log_gaps;
        Ok(ds)
    }

    pub fn subjects(&self) -> &[SubjectRecord] {
        &self.subjects
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    /// Encoded covariate dimension.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Largest number of gap times of any subject (`J`).
    pub fn max_gaps(&self) -> usize {
        self.max_gaps
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// `Y_ij = ln W_ij`, ragged by subject.
    pub fn log_gaps(&self) -> &[Vec<f64>] {
        &self.log_gaps
    }

    pub fn n_censored(&self) -> usize {
        self.subjects.iter().filter(|s| s.censored).count()
    }

    pub fn total_gaps(&self) -> usize {
        self.subjects.iter().map(SubjectRecord::len).sum()
    }

    /// Rejects designs with a covariate column identically equal to one,
    /// which would be confounded with the random-effect intercepts.
    pub fn check_no_intercept(&self) -> Result<()> {
        for r in 0..self.q {
            let constant_one = self
                .subjects
                .iter()
                .flat_map(|s| s.covariates.iter())
                .all(|row| row[r] == 1.0);
            if constant_one {
                return Err(Error::InvalidData(format!(
                    "covariate `{}` is constant 1; the intercept is carried by the random effects",
                    self.covariate_names[r]
                )));
            }
        }
        Ok(())
    }
}

/// Natural log of every gap time, ragged by subject.
pub fn log_transform(dataset: &GapTimeDataset) -> Vec<Vec<f64>> {
    dataset.log_gaps().to_vec()
}

/// Number of subjects with exactly `j` gap times, for every `j` present.
pub fn gap_count_table(dataset: &GapTimeDataset) -> BTreeMap<usize, usize> {
    let mut table = BTreeMap::new();
    for s in dataset.subjects() {
        *table.entry(s.len()).or_insert(0) += 1;
    }
    table
}

pub fn load_csv(path: impl AsRef<Path>, codec: &mut CovariateCodec) -> Result<GapTimeDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, codec)
}

/// Reads the long-format CSV. On the first load of a codec with
/// standardized columns the fitted mean/SD are written back into `codec`.
pub fn read_csv<R: Read>(reader: R, codec: &mut CovariateCodec) -> Result<GapTimeDataset> {
    codec.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = find(SUBJECT_COLUMN)?;
    let idx_col = find(INDEX_COLUMN)?;
    let gap_col = find(GAP_COLUMN)?;
    let cens_col = find(CENSORED_COLUMN)?;
    let cov_cols = codec
        .columns
        .iter()
        .map(|c| find(&c.name))
        .collect::<Result<Vec<_>>>()?;

    struct Pending {
        id: String,
        rows: Vec<(usize, i64, f64, bool, Vec<String>)>,
    }
    let mut order: Vec<Pending> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();

    for (k, record) in rdr.records().enumerate() {
        // header is line 1
        let row = k + 2;
        let record = record?;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let id = cell(id_col).to_string();
        if id.is_empty() {
            return Err(Error::row(row, "empty subject_id"));
        }
        let index: i64 = cell(idx_col)
            .parse()
            .map_err(|_| Error::row(row, format!("bad event_index `{}`", cell(idx_col))))?;
        let gap: f64 = cell(gap_col)
            .parse()
            .map_err(|_| Error::row(row, format!("bad gap_time `{}`", cell(gap_col))))?;
        if !(gap.is_finite() && gap > 0.0) {
            return Err(Error::row(row, format!("gap_time must be positive, got {gap}")));
        }
        let censored = match cell(cens_col) {
            "0" => false,
            "1" => true,
            other => return Err(Error::row(row, format!("censored must be 0 or 1, got `{other}`"))),
        };
        if record.len() != headers.len() {
            return Err(Error::row(row, "ragged row: wrong number of fields"));
        }
        let raw: Vec<String> = cov_cols.iter().map(|&c| cell(c).to_string()).collect();
        let slot = *by_id.entry(id.clone()).or_insert_with(|| {
            order.push(Pending {
                id: id.clone(),
                rows: Vec::new(),
            });
            order.len() - 1
        });
        order[slot].rows.push((row, index, gap, censored, raw));
    }
    if order.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }

    // Fit standardization on first use.
    for (c, col) in codec.columns.clone().iter().enumerate() {
        if let ColumnKind::Numeric { standardize: true } = col.kind {
            if codec.standardization.contains_key(&col.name) {
                continue;
            }
            let mut values = Vec::new();
            for p in &order {
                for (row, _, _, _, raw) in &p.rows {
                    let v: f64 = raw[c]
                        .trim()
                        .parse()
                        .map_err(|_| Error::row(*row, format!("`{}`: `{}` is not a number", col.name, raw[c])))?;
                    values.push(v);
                }
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            codec
                .standardization
                .insert(col.name.clone(), Standardization { mean, sd });
        }
    }

    let mut subjects = Vec::with_capacity(order.len());
    let mut raw_all = Vec::with_capacity(order.len());
    for p in order {
        let n = p.rows.len();
        let mut gaps = Vec::with_capacity(n);
        let mut covs = Vec::with_capacity(n);
        let mut raws = Vec::with_capacity(n);
        let mut last_index = i64::MIN;
        let mut censored = false;
        for (k, (row, index, gap, cens, raw)) in p.rows.into_iter().enumerate() {
            if index <= last_index {
                return Err(Error::row(
                    row,
                    format!("event_index {index} not increasing for subject `{}`", p.id),
                ));
            }
            last_index = index;
            if cens && k + 1 < n {
                return Err(Error::row(
                    row,
                    format!("subject `{}` is censored before its last gap time", p.id),
                ));
            }
            censored = cens;
            let cells: Vec<&str> = raw.iter().map(String::as_str).collect();
            covs.push(codec.encode_row(&cells, row)?);
            gaps.push(gap);
            raws.push(raw);
        }
        subjects.push(SubjectRecord {
            subject_id: p.id,
            gap_times: gaps,
            censored,
            covariates: covs,
        });
        raw_all.push(raws);
    }
    let names = codec.encoded_names();
    let mut ds = GapTimeDataset::with_names(subjects, codec.dimension(), names)?;
    ds.raw_cells = Some((codec.columns.iter().map(|c| c.name.clone()).collect(), raw_all));
    Ok(ds)
}

pub fn write_csv_path(dataset: &GapTimeDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, file)
}

/// Writes the long format. Covariates are written as the raw cells they
/// were read from when available, otherwise as encoded numeric columns.
pub fn write_csv<W: Write>(dataset: &GapTimeDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![
        SUBJECT_COLUMN.to_string(),
        INDEX_COLUMN.to_string(),
        GAP_COLUMN.to_string(),
        CENSORED_COLUMN.to_string(),
    ];
    match &dataset.raw_cells {
        Some((names, _)) => header.extend(names.iter().cloned()),
        None => header.extend(dataset.covariate_names.iter().cloned()),
    }
    w.write_record(&header)?;
    for (i, s) in dataset.subjects.iter().enumerate() {
        for (j, gap) in s.gap_times.iter().enumerate() {
            let last = j + 1 == s.len();
            let mut rec = vec![
                s.subject_id.clone(),
                (j + 1).to_string(),
                gap.to_string(),
                if last && s.censored { "1" } else { "0" }.to_string(),
            ];
            match &dataset.raw_cells {
                Some((_, raw)) => rec.extend(raw[i][j].iter().cloned()),
                None => rec.extend(s.covariates[j].iter().map(|v| v.to_string())),
            }
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Covariate profile of a "typical" subject for each gap index: the
/// per-column mode for binary/categorical columns and the median for
/// numeric ones, computed over all rows at that gap index.
pub fn empirical_mode_profile(dataset: &GapTimeDataset, codec: &CovariateCodec, horizon: usize) -> Vec<Vec<f64>> {
    let mut profile = Vec::with_capacity(horizon);
    for j in 0..horizon {
        let rows: Vec<&Vec<f64>> = dataset.subjects().iter().filter_map(|s| s.covariates.get(j)).collect();
        let mut x = Vec::with_capacity(dataset.q());
        let mut offset = 0;
        for col in &codec.columns {
            match &col.kind {
                ColumnKind::Numeric { .. } => {
                    let mut v: Vec<f64> = rows.iter().map(|r| r[offset]).collect();
                    x.push(median(&mut v));
                    offset += 1;
                }
                ColumnKind::Binary => {
                    let ones = rows.iter().filter(|r| r[offset] == 1.0).count();
                    x.push(if 2 * ones > rows.len() { 1.0 } else { 0.0 });
                    offset += 1;
                }
                ColumnKind::Categorical { levels, .. } => {
                    let width = levels.len() - 1;
                    // pattern 0 = baseline, k = k-th dummy
                    let mut counts = vec![0usize; width + 1];
                    for r in &rows {
                        let hot = (0..width).find(|&k| r[offset + k] == 1.0);
                        counts[hot.map_or(0, |k| k + 1)] += 1;
                    }
                    let best = counts
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                        .map(|(k, _)| k)
                        .unwrap_or(0);
                    for k in 0..width {
                        x.push(if best == k + 1 { 1.0 } else { 0.0 });
                    }
                    offset += width;
                }
            }
        }
        profile.push(x);
    }
    profile
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, codec: &mut CovariateCodec) -> Result<GapTimeDataset> {
        read_csv(text.as_bytes(), codec)
    }

    #[test]
    fn minimal_file() {
        let mut codec = CovariateCodec::default();
        let ds = parse(
            "subject_id,event_index,gap_time,censored\na,1,24,0\na,2,433,0\n",
            &mut codec,
        )
        .unwrap();
        assert_eq!(ds.n_subjects(), 1);
        assert_eq!(ds.subjects()[0].len(), 2);
        assert_eq!(ds.max_gaps(), 2);
        let y = log_transform(&ds);
        assert!((y[0][0] - 3.178_053_830_347_945_7).abs() < 1e-12);
        assert!((y[0][1] - 6.070_737_728_002_49).abs() < 1e-12);
    }

    #[test]
    fn log_identities() {
        let ds = GapTimeDataset::new(
            vec![SubjectRecord {
                subject_id: "s".into(),
                gap_times: vec![1.0, std::f64::consts::E],
                censored: false,
                covariates: vec![vec![], vec![]],
            }],
            0,
        )
        .unwrap();
        let y = log_transform(&ds);
        assert_eq!(y[0][0], 0.0);
        assert!((y[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_gap_names_row() {
        let mut codec = CovariateCodec::default();
        let err = parse(
            "subject_id,event_index,gap_time,censored\na,1,24,0\na,2,0,0\n",
            &mut codec,
        )
        .unwrap_err();
        match err {
            Error::Row { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn mid_sequence_censoring_rejected() {
        let mut codec = CovariateCodec::default();
        let err = parse(
            "subject_id,event_index,gap_time,censored\na,1,24,1\na,2,5,0\n",
            &mut codec,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
    }

    #[test]
    fn censored_flag_from_last_row() {
        let mut codec = CovariateCodec::default();
        let ds = parse(
            "subject_id,event_index,gap_time,censored\na,1,24,0\nb,1,3,1\na,2,5,1\n",
            &mut codec,
        )
        .unwrap();
        assert_eq!(ds.n_subjects(), 2);
        assert_eq!(ds.subjects()[0].subject_id, "a");
        assert_eq!(ds.subjects()[0].gap_times, vec![24.0, 5.0]);
        assert!(ds.subjects()[0].censored);
        assert!(ds.subjects()[1].censored);
        assert_eq!(ds.n_censored(), 2);
    }

    fn readmission_codec() -> CovariateCodec {
        CovariateCodec::new(vec![
            ColumnSpec {
                name: "chemo".into(),
                kind: ColumnKind::Binary,
            },
            ColumnSpec {
                name: "dukes".into(),
                kind: ColumnKind::Categorical {
                    levels: vec!["A-B".into(), "C".into(), "D".into()],
                    baseline: "A-B".into(),
                },
            },
            ColumnSpec {
                name: "age".into(),
                kind: ColumnKind::Numeric { standardize: true },
            },
        ])
    }

    #[test]
    fn dummy_coding() {
        let mut codec = readmission_codec();
        assert_eq!(codec.dimension(), 4);
        let ds = parse(
            "subject_id,event_index,gap_time,censored,chemo,dukes,age\n\
             a,1,10,0,1,A-B,50\n\
             a,2,12,0,1,C,60\n\
             b,1,3,1,0,D,70\n",
            &mut codec,
        )
        .unwrap();
        let rows: Vec<&Vec<f64>> = ds.subjects().iter().flat_map(|s| &s.covariates).collect();
        assert_eq!(&rows[0][..3], &[1.0, 0.0, 0.0]);
        assert_eq!(&rows[1][..3], &[1.0, 1.0, 0.0]);
        assert_eq!(&rows[2][..3], &[0.0, 0.0, 1.0]);
        let s = codec.standardization["age"];
        assert!((s.mean - 60.0).abs() < 1e-12);
        assert!((s.sd - 10.0).abs() < 1e-12);
        assert!((rows[0][3] + 1.0).abs() < 1e-12);
        assert_eq!(ds.covariate_names(), &["chemo", "dukes=C", "dukes=D", "age"]);
    }

    #[test]
    fn unknown_level_and_missing_column() {
        let mut codec = readmission_codec();
        let err = parse(
            "subject_id,event_index,gap_time,censored,chemo,dukes,age\na,1,10,0,1,E,50\n",
            &mut codec,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown level"), "{err}");

        let mut codec = readmission_codec();
        let err = parse(
            "subject_id,event_index,gap_time,censored,chemo,age\na,1,10,0,1,50\n",
            &mut codec,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "dukes"));
    }

    #[test]
    fn ragged_row_rejected() {
        let mut codec = CovariateCodec::new(vec![ColumnSpec {
            name: "x".into(),
            kind: ColumnKind::Numeric { standardize: false },
        }]);
        let err = parse(
            "subject_id,event_index,gap_time,censored,x\na,1,10,0,1\na,2,3,0\n",
            &mut codec,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Csv(_) | Error::Row { .. }), "{err}");
    }

    #[test]
    fn intercept_column_rejected() {
        let mut codec = CovariateCodec::new(vec![ColumnSpec {
            name: "one".into(),
            kind: ColumnKind::Numeric { standardize: false },
        }]);
        let ds = parse(
            "subject_id,event_index,gap_time,censored,one\na,1,10,0,1\nb,1,3,0,1\n",
            &mut codec,
        )
        .unwrap();
        assert!(ds.check_no_intercept().is_err());
    }

    #[test]
    fn count_table_single_subject() {
        let ds = GapTimeDataset::from_log_gaps(vec!["a".into()], vec![vec![0.0, 1.0, 2.0]], vec![false]).unwrap();
        assert_eq!(gap_count_table(&ds), BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn mode_profile() {
        let mut codec = readmission_codec();
        let ds = parse(
            "subject_id,event_index,gap_time,censored,chemo,dukes,age\n\
             a,1,10,0,1,C,50\n\
             b,1,12,0,1,C,60\n\
             c,1,3,1,0,D,70\n",
            &mut codec,
        )
        .unwrap();
        let p = empirical_mode_profile(&ds, &codec, 1);
        assert_eq!(&p[0][..3], &[1.0, 1.0, 0.0]);
        assert!(p[0][3].abs() < 1e-12);
    }
}
