//! Tabular dataset ingestion and preprocessing: CSV loading, label encoding,
//! stratified splitting, missing-value imputation and min-max normalization.
//!
//! Missing cells are carried as `NaN` inside the feature matrix until
//! imputation replaces them.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Raw label values; position is the class index.
    pub class_labels: Vec<String>,
}

impl Schema {
    pub fn new(
        feature_names: Vec<String>,
        target_name: String,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let mut seen = HashMap::new();
        for name in &feature_names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate feature name {name:?}")));
            }
        }
        if seen.contains_key(target_name.as_str()) {
            return Err(Error::Schema(format!(
                "target {target_name:?} is also listed as a feature"
            )));
        }
        if class_labels.is_empty() {
            return Err(Error::Schema("no class labels".into()));
        }
        let mut labels = HashMap::new();
        for l in &class_labels {
            if labels.insert(l.as_str(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate class label {l:?}")));
            }
        }
        Ok(Self {
            feature_names,
            target_name,
            class_labels,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn class_index(&self, raw: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == raw)
    }
}

/// Per-feature minimum and maximum captured on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    fn span(&self, j: usize) -> f64 {
        self.max[j] - self.min[j]
    }

    /// Maps each feature through `(x - min) / (max - min)`. Constant features map to 0.
    /// Values outside the training range are not clipped.
    pub fn apply(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let span = self.span(j);
                *v = if span > 0.0 {
                    (*v - self.min[j]) / span
                } else {
                    0.0
                };
            }
        }
        out
    }

    pub fn invert(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let span = self.span(j);
                *v = if span > 0.0 {
                    *v * span + self.min[j]
                } else {
                    self.min[j]
                };
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub norm_stats: Option<NormStats>,
}

impl Table {
    pub fn new(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::dim(features.rows(), labels.len(), "label count"));
        }
        Ok(Self {
            features,
            labels,
            norm_stats: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_missing(&self) -> usize {
        self.features
            .as_slice()
            .iter()
            .filter(|v| v.is_nan())
            .count()
    }

    pub fn class_counts(&self, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row indices grouped by class index.
    pub fn class_members(&self, n_classes: usize) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); n_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            norm_stats: self.norm_stats.clone(),
        }
    }

    pub fn with_features(&self, features: Matrix) -> Self {
        Self {
            features,
            labels: self.labels.clone(),
            norm_stats: self.norm_stats.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub train: Table,
    pub test: Table,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Class indices in first-appearance order plus the raw values they decode to.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEncoding {
    pub indices: Vec<usize>,
    pub classes: Vec<String>,
}

impl LabelEncoding {
    pub fn one_hot(&self) -> Matrix {
        one_hot(&self.indices, self.classes.len())
    }

    pub fn decode(&self) -> Vec<String> {
        self.indices
            .iter()
            .map(|&i| self.classes[i].clone())
            .collect()
    }
}

pub fn encode_labels<S: AsRef<str>>(raw: &[S]) -> LabelEncoding {
    let mut classes: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let indices = raw
        .iter()
        .map(|r| {
            let r = r.as_ref();
            match lookup.get(r) {
                Some(&i) => i,
                None => {
                    let i = classes.len();
                    classes.push(r.to_string());
                    lookup.insert(r.to_string(), i);
                    i
                }
            }
        })
        .collect();
    LabelEncoding { indices, classes }
}

pub fn one_hot(indices: &[usize], n_classes: usize) -> Matrix {
    let mut m = Matrix::zeros(indices.len(), n_classes);
    for (r, &c) in indices.iter().enumerate() {
        m[(r, c)] = 1.0;
    }
    m
}

/// Loads a header-first, comma-separated file. Every non-target column must be
/// numeric or equal to `missing_token`; missing cells become `NaN`.
pub fn load_csv(path: &Path, target_name: &str, missing_token: &str) -> Result<(Table, Schema)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target_name, missing_token).map_err(|e| match e {
        Error::Csv { message, .. } => Error::Csv {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    target_name: &str,
    missing_token: &str,
) -> Result<(Table, Schema)> {
    let csv_err = |message: String| Error::Csv {
        path: "<input>".into(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(csv_err("empty file".into()));
    }
    let target_col = headers
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::Schema(format!("target column {target_name:?} not found")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(csv_err(format!(
                "row {} has {} fields, header has {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            if j == target_col {
                raw_labels.push(cell.to_string());
            } else if cell == missing_token {
                values.push(f64::NAN);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    csv_err(format!(
                        "row {}, column {:?}: cannot parse {cell:?} as a number",
                        line + 2,
                        headers[j]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(csv_err(format!(
                        "row {}, column {:?}: non-finite value {cell:?}",
                        line + 2,
                        headers[j]
                    )));
                }
                values.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(csv_err("no data rows".into()));
    }
    let encoding = encode_labels(&raw_labels);
    let features = Matrix::from_vec(raw_labels.len(), feature_names.len(), values)?;
    let schema = Schema::new(feature_names, target_name.to_string(), encoding.classes)?;
    Ok((Table::new(features, encoding.indices)?, schema))
}

/// Writes features and decoded labels with the schema's header layout
/// (features in order, target last).
pub fn write_csv(path: &Path, schema: &Schema, features: &Matrix, labels: &[usize]) -> Result<()> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, schema, features, labels)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: std::io::Write>(
    writer: W,
    schema: &Schema,
    features: &Matrix,
    labels: &[usize],
) -> Result<()> {
    let err = |e: csv::Error| Error::Csv {
        path: "<output>".into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = schema.feature_names.iter().map(String::as_str).collect();
    header.push(&schema.target_name);
    w.write_record(&header).map_err(err)?;
    for (row, &label) in features.row_iter().zip(labels) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(schema.class_labels[label].clone());
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Per-class shuffled split. Each class contributes `round(count * test_fraction)`
/// test rows, nudged by at most one so the total matches `round(n * test_fraction)`,
/// and always leaves at least one row of every class on each side.
pub fn stratified_split(
    table: &Table,
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let groups = table.class_members(n_classes);
    for (c, g) in groups.iter().enumerate() {
        if !g.is_empty() && g.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "class {c} has {} row(s); stratified split needs at least 2",
                g.len()
            )));
        }
    }

    let ideal: Vec<f64> = groups
        .iter()
        .map(|g| g.len() as f64 * test_fraction)
        .collect();
    let mut counts: Vec<usize> = groups
        .iter()
        .zip(&ideal)
        .map(|(g, &x)| {
            if g.is_empty() {
                0
            } else {
                (x.round() as usize).clamp(1, g.len() - 1)
            }
        })
        .collect();

    let target_total = (table.n_rows() as f64 * test_fraction).round() as usize;
    let mut total: usize = counts.iter().sum();
    // Largest residual first; ties resolved by class index.
    let mut order: Vec<usize> = (0..n_classes).filter(|&c| !groups[c].is_empty()).collect();
    while total != target_total {
        let adjusted = if total < target_total {
            order.sort_by(|&a, &b| {
                let ra = ideal[a] - counts[a] as f64;
                let rb = ideal[b] - counts[b] as f64;
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            order.iter().copied().find(|&c| {
                counts[c] < groups[c].len() - 1 && (counts[c] as f64) < ideal[c] + 1.0 - 1e-12
            })
        } else {
            order.sort_by(|&a, &b| {
                let ra = counts[a] as f64 - ideal[a];
                let rb = counts[b] as f64 - ideal[b];
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            order
                .iter()
                .copied()
                .find(|&c| counts[c] > 1 && (counts[c] as f64) > ideal[c] - 1.0 + 1e-12)
        };
        match adjusted {
            Some(c) if total < target_total => {
                counts[c] += 1;
                total += 1;
            }
            Some(c) => {
                counts[c] -= 1;
                total -= 1;
            }
            None => break,
        }
    }

    let mut rng = seeded(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (g, &k) in groups.iter().zip(&counts) {
        let mut members = g.clone();
        members.shuffle(&mut rng);
        test_idx.extend_from_slice(&members[..k]);
        train_idx.extend_from_slice(&members[k..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    Ok(SplitPair {
        train: table.select(&train_idx),
        test: table.select(&test_idx),
        train_indices: train_idx,
        test_indices: test_idx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ImputeStrategy {
    #[default]
    Mean,
    Median,
    Zero,
}

/// Per-feature fill values computed from observed cells of one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub fill: Vec<f64>,
    /// Features with no observed value; these are filled with 0.
    pub all_missing: Vec<usize>,
}

impl Imputer {
    pub fn fit(table: &Table, strategy: ImputeStrategy) -> Self {
        let mut fill = Vec::with_capacity(table.n_features());
        let mut all_missing = Vec::new();
        for j in 0..table.n_features() {
            let mut observed: Vec<f64> = table
                .features
                .column(j)
                .into_iter()
                .filter(|v| !v.is_nan())
                .collect();
            if observed.is_empty() {
                all_missing.push(j);
                fill.push(0.0);
                continue;
            }
            let value = match strategy {
                ImputeStrategy::Zero => 0.0,
                ImputeStrategy::Mean => observed.iter().sum::<f64>() / observed.len() as f64,
                ImputeStrategy::Median => {
                    observed.sort_by(f64::total_cmp);
                    let n = observed.len();
                    if n % 2 == 1 {
                        observed[n / 2]
                    } else {
                        0.5 * (observed[n / 2 - 1] + observed[n / 2])
                    }
                }
            };
            fill.push(value);
        }
        Self { fill, all_missing }
    }

    pub fn apply(&self, table: &Table) -> Table {
        let mut features = table.features.clone();
        for i in 0..features.rows() {
            for (v, &f) in features.row_mut(i).iter_mut().zip(&self.fill) {
                if v.is_nan() {
                    *v = f;
                }
            }
        }
        table.with_features(features)
    }
}

/// Fits fill values on `table` itself and applies them.
pub fn impute_missing(table: &Table, strategy: ImputeStrategy) -> (Table, Imputer) {
    let imputer = Imputer::fit(table, strategy);
    if !imputer.all_missing.is_empty() {
        log::warn!(
            "features {:?} have no observed values; filled with 0",
            imputer.all_missing
        );
    }
    (imputer.apply(table), imputer)
}

pub fn fit_normalizer(train: &Table) -> NormStats {
    let d = train.n_features();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in train.features.row_iter() {
        for (j, &v) in row.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    for j in 0..d {
        if !min[j].is_finite() {
            min[j] = 0.0;
            max[j] = 0.0;
        }
    }
    NormStats { min, max }
}

pub fn apply_normalizer(table: &Table, stats: &NormStats) -> Table {
    Table {
        features: stats.apply(&table.features),
        labels: table.labels.clone(),
        norm_stats: Some(stats.clone()),
    }
}

pub fn invert_normalizer(table: &Table, stats: &NormStats) -> Table {
    Table {
        features: stats.invert(&table.features),
        labels: table.labels.clone(),
        norm_stats: None,
    }
}

/// Split, impute and normalize. All statistics come from the training side.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub schema: Schema,
    pub split: SplitPair,
    pub imputer: Imputer,
    pub norm: NormStats,
}

pub fn prepare(
    raw: &Table,
    schema: Schema,
    test_fraction: f64,
    strategy: ImputeStrategy,
    seed: u64,
) -> Result<Prepared> {
    let split = stratified_split(raw, schema.n_classes(), test_fraction, seed)?;
    let (train, imputer) = impute_missing(&split.train, strategy);
    let test = imputer.apply(&split.test);
    let norm = fit_normalizer(&train);
    let split = SplitPair {
        train: apply_normalizer(&train, &norm),
        test: apply_normalizer(&test, &norm),
        train_indices: split.train_indices,
        test_indices: split.test_indices,
    };
    Ok(Prepared {
        schema,
        split,
        imputer,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[&[f64]], labels: &[usize]) -> Table {
        Table::new(Matrix::from_rows(rows).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn single_row_csv() {
        let (t, s) = read_csv("a,b,y\n1,2,M\n".as_bytes(), "y", "").unwrap();
        assert_eq!(t.features, Matrix::from_rows(&[[1.0, 2.0]]).unwrap());
        assert_eq!(t.labels, vec![0]);
        assert_eq!(s.feature_names, vec!["a", "b"]);
        assert_eq!(s.class_labels, vec!["M"]);
    }

    #[test]
    fn missing_token_marks_cell() {
        let (t, _) = read_csv("a,b,y\n1,?,M\n3,4,B\n".as_bytes(), "y", "?").unwrap();
        assert!(t.features[(0, 1)].is_nan());
        assert_eq!(t.n_missing(), 1);
        assert_eq!(t.labels, vec![0, 1]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_csv("a,b\n1,2\n".as_bytes(), "y", ""),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            read_csv("a,y\nx,1\n".as_bytes(), "y", "?"),
            Err(Error::Csv { .. })
        ));
        assert!(read_csv("".as_bytes(), "y", "").is_err());
        assert!(read_csv("a,y\n".as_bytes(), "y", "").is_err());
    }

    #[test]
    fn one_hot_encoding() {
        let enc = encode_labels(&["M", "B", "M"]);
        assert_eq!(enc.indices, vec![0, 1, 0]);
        assert_eq!(
            enc.one_hot(),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap()
        );
        assert_eq!(enc.decode(), vec!["M", "B", "M"]);

        let single = encode_labels(&["B", "B"]);
        assert_eq!(single.one_hot(), Matrix::filled(2, 1, 1.0));
    }

    #[test]
    fn impute_mean_and_fallback() {
        let t = table(
            &[&[1.0, f64::NAN], &[f64::NAN, f64::NAN], &[3.0, f64::NAN]],
            &[0, 0, 0],
        );
        let (out, imp) = impute_missing(&t, ImputeStrategy::Mean);
        assert_eq!(out.features.column(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(out.features.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(imp.all_missing, vec![1]);
    }

    #[test]
    fn impute_median_and_zero() {
        let t = table(&[&[1.0], &[f64::NAN], &[10.0], &[4.0]], &[0, 0, 0, 0]);
        let (m, _) = impute_missing(&t, ImputeStrategy::Median);
        assert_eq!(m.features[(1, 0)], 4.0);
        let (z, _) = impute_missing(&t, ImputeStrategy::Zero);
        assert_eq!(z.features[(1, 0)], 0.0);
    }

    #[test]
    fn impute_without_missing_is_identity() {
        let t = table(&[&[1.0, 2.0], &[3.0, 4.0]], &[0, 1]);
        assert_eq!(impute_missing(&t, ImputeStrategy::Median).0, t);
    }

    #[test]
    fn split_exact_proportions() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let t = Table::new(
            Matrix::from_rows(&rows).unwrap(),
            vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1],
        )
        .unwrap();
        let s = stratified_split(&t, 2, 0.5, 42).unwrap();
        assert_eq!(s.test.class_counts(2), vec![3, 2]);
        assert_eq!(s.train.class_counts(2), vec![3, 2]);
        assert_eq!(s, stratified_split(&t, 2, 0.5, 42).unwrap());
    }

    #[test]
    fn split_rejects_singleton_class() {
        let t = table(&[&[0.0], &[1.0], &[2.0]], &[0, 0, 1]);
        assert!(stratified_split(&t, 2, 0.5, 1).is_err());
    }

    #[test]
    fn normalizer_examples() {
        let t = table(&[&[2.0, 5.0], &[4.0, 5.0], &[6.0, 5.0]], &[0, 0, 0]);
        let stats = fit_normalizer(&t);
        let n = apply_normalizer(&t, &stats);
        assert_eq!(n.features.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(n.features.column(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(invert_normalizer(&n, &stats).features, t.features);

        let above = stats.apply(&Matrix::from_rows(&[[8.0, 5.0]]).unwrap());
        assert_eq!(above[(0, 0)], 1.5);
    }

    fn arb_table() -> impl Strategy<Value = Table> {
        (2usize..5, 4usize..30).prop_flat_map(|(d, n)| {
            (
                proptest::collection::vec(-1e3f64..1e3, d * n),
                proptest::collection::vec(0usize..2, n),
            )
                .prop_map(move |(vals, mut labels)| {
                    // both classes need at least two members
                    labels[0] = 0;
                    labels[1] = 0;
                    labels[2] = 1;
                    labels[3] = 1;
                    Table::new(Matrix::from_vec(n, d, vals).unwrap(), labels).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn normalization_round_trip(t in arb_table()) {
            let stats = fit_normalizer(&t);
            let back = invert_normalizer(&apply_normalizer(&t, &stats), &stats);
            prop_assert!(back.features.max_abs_diff(&t.features) <= 1e-12 * 1e3);
            for v in stats.apply(&t.features).as_slice() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }

        #[test]
        fn stratification_within_one(t in arb_table(), frac in 0.1f64..0.9, seed in 0u64..1000) {
            let s = stratified_split(&t, 2, frac, seed).unwrap();
            let counts = t.class_counts(2);
            let test_counts = s.test.class_counts(2);
            for c in 0..2 {
                prop_assert!((test_counts[c] as f64 - frac * counts[c] as f64).abs() <= 1.0 + 1e-9);
            }
            let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..t.n_rows()).collect::<Vec<_>>());
            prop_assert_eq!(s.clone(), stratified_split(&t, 2, frac, seed).unwrap());
        }

        #[test]
        fn imputation_idempotent(t in arb_table(), mask in proptest::collection::vec(any::<bool>(), 120)) {
            let mut t = t;
            for (v, &m) in t.features.as_mut_slice().iter_mut().zip(&mask) {
                if m { *v = f64::NAN; }
            }
            let (once, _) = impute_missing(&t, ImputeStrategy::Mean);
            let (twice, _) = impute_missing(&once, ImputeStrategy::Mean);
            prop_assert_eq!(once.n_missing(), 0);
            prop_assert_eq!(once, twice);
        }
    }
}
