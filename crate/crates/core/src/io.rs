//! CSV datasets, JSON model files, Wilcoxon feature ranking and the number
//! formatting shared by every text output.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::{linear_predictor, Dataset, FitConfig, FitDiagnostics, GocreModel};
use crate::error::{GocreError, Result};
use crate::family::LinkFamily;

/// Which column of a CSV file holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    Index(usize),
}

impl FromStr for ResponseColumn {
    type Err = std::convert::Infallible;

    /// Digits select by position; anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        })
    }
}

/// A dataset together with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub data: Dataset,
    pub response: String,
    pub predictors: Vec<String>,
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub values: Array2<f64>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn resolve(&self, column: &ResponseColumn) -> Result<usize> {
        match column {
            ResponseColumn::Name(name) => self
                .column_index(name)
                .ok_or_else(|| GocreError::MissingColumn(name.clone())),
            ResponseColumn::Index(i) if *i < self.header.len() => Ok(*i),
            ResponseColumn::Index(i) => Err(GocreError::MissingColumn(format!(
                "index {i} (file has {} columns)",
                self.header.len()
            ))),
        }
    }

    /// Splits off the response column; the rest stay in file order.
    pub fn into_dataset(self, response: &ResponseColumn) -> Result<NamedDataset> {
        let r = self.resolve(response)?;
        let keep: Vec<usize> = (0..self.header.len()).filter(|&j| j != r).collect();
        let x = self.values.select(Axis(1), &keep);
        let y = self.values.column(r).to_owned();
        Ok(NamedDataset {
            data: Dataset::new(x, y)?,
            response: self.header[r].clone(),
            predictors: keep.iter().map(|&j| self.header[j].clone()).collect(),
        })
    }

    /// Columns named `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<Array2<f64>> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| GocreError::MissingColumn(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.values.select(Axis(1), &idx))
    }
}

/// Reads a comma-separated numeric table. Parse errors report the 1-based
/// line number in the file (the header is line 1) and the 1-based column.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(GocreError::Format("missing header row".into()));
    }
    let width = header.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != width {
            return Err(GocreError::Format(format!(
                "line {line} has {} fields, header has {width}",
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| GocreError::Parse {
                    row: line,
                    column: j + 1,
                    value: cell.to_string(),
                })?;
            values.push(v);
        }
        rows += 1;
    }
    let values = Array2::from_shape_vec((rows, width), values)
        .map_err(|e| GocreError::Format(e.to_string()))?;
    Ok(Table { header, values })
}

pub fn load_table(path: impl AsRef<Path>) -> Result<Table> {
    read_table(BufReader::new(File::open(path)?))
}

pub fn load_csv(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<NamedDataset> {
    load_table(path)?.into_dataset(response)
}

/// Writes a table with shortest round-trip decimals, so reading it back
/// reproduces every value exactly.
pub fn write_table<W: Write>(writer: W, header: &[String], values: ArrayView2<f64>) -> Result<()> {
    if header.len() != values.ncols() {
        return Err(GocreError::Dimension(format!(
            "{} header names for {} columns",
            header.len(),
            values.ncols()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for row in values.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the response first, then the predictors.
pub fn write_csv(path: impl AsRef<Path>, data: &NamedDataset) -> Result<()> {
    let mut header = vec![data.response.clone()];
    header.extend(data.predictors.iter().cloned());
    let mut values = Array2::zeros((data.data.n(), data.data.p() + 1));
    values.column_mut(0).assign(&data.data.y);
    values.slice_mut(ndarray::s![.., 1..]).assign(&data.data.x);
    write_table(BufWriter::new(File::create(path)?), &header, values.view())
}

/// `%.10g`-style rendering: 10 significant digits, trailing zeros dropped,
/// exponent notation outside [1e-5, 1e10).
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 10;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Mid-ranks (1-based) of `values`.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Largest group size for which the exact null distribution is enumerated.
pub const EXACT_MAX_GROUP: usize = 10;

/// Two-sided rank-sum p-value of `values` split by the 0/1 `group`.
///
/// The statistic is the rank sum of group 1. When both groups have at most
/// [`EXACT_MAX_GROUP`] members the p-value is exact, conditional on the
/// observed ties: 2·min(P(S ≤ s), P(S ≥ s)), capped at 1. Otherwise a
/// tie-corrected normal approximation with continuity correction is used.
pub fn wilcoxon_p_value(values: &[f64], group: &[bool]) -> Result<f64> {
    if values.len() != group.len() {
        return Err(GocreError::Dimension(format!(
            "{} values but {} labels",
            values.len(),
            group.len()
        )));
    }
    let n1 = group.iter().filter(|&&g| g).count();
    let n2 = group.len() - n1;
    if n1 == 0 || n2 == 0 {
        return Err(GocreError::InvalidArgument(
            "rank-sum test needs both classes present".into(),
        ));
    }
    let ranks = mid_ranks(values);
    if n1 <= EXACT_MAX_GROUP && n2 <= EXACT_MAX_GROUP {
        // Mid-ranks are multiples of 1/2, so doubled ranks are integers.
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let observed: usize = doubled
            .iter()
            .zip(group)
            .filter(|(_, &g)| g)
            .map(|(d, _)| d)
            .sum();
        Ok(exact_two_sided(&doubled, n1, observed))
    } else {
        Ok(normal_two_sided(&ranks, group, n1, n2))
    }
}

/// Counts, over all size-`k` subsets, how often each doubled rank sum occurs.
fn exact_two_sided(doubled: &[usize], k: usize, observed: usize) -> f64 {
    let max_sum: usize = doubled.iter().sum();
    // counts[j][s]: subsets of size j with sum s, over the items seen so far.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    for &d in doubled {
        for j in (1..=k).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (d..=max_sum).rev() {
                cur[s] += prev[s - d];
            }
        }
    }
    let dist = &counts[k];
    let total: f64 = dist.iter().sum();
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_two_sided(ranks: &[f64], group: &[bool], n1: usize, n2: usize) -> f64 {
    let n = (n1 + n2) as f64;
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let s: f64 = ranks
        .iter()
        .zip(group)
        .filter(|(_, &g)| g)
        .map(|(r, _)| r)
        .sum();
    let mean = n1f * (n + 1.0) / 2.0;

    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((s - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.sf(z)).min(1.0)
}

/// Per-column p-values and the column order by ascending p-value (ties by
/// column index). Columns are scored in parallel.
pub fn wilcoxon_rank_features(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
) -> Result<(Array1<f64>, Vec<usize>)> {
    if x.nrows() != y.len() {
        return Err(GocreError::Dimension(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(GocreError::InvalidArgument(format!(
            "rank-sum test needs a 0/1 response, found {v}"
        )));
    }
    let group: Vec<bool> = y.iter().map(|&v| v == 1.0).collect();
    let columns: Vec<Vec<f64>> = x.axis_iter(Axis(1)).map(|c| c.to_vec()).collect();
    let p_values = columns
        .par_iter()
        .map(|c| wilcoxon_p_value(c, &group))
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    Ok((Array1::from(p_values), order))
}

pub const MODEL_FORMAT: &str = "gocre-model";
pub const MODEL_VERSION: u32 = 1;
pub const NUMBER_ENCODING: &str = "shortest round-trip decimal (at most 17 significant digits)";

/// Intercept and component coefficients after each component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub intercept: f64,
    pub gammas: Vec<f64>,
}

/// Everything needed to predict from a fit, plus its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub number_encoding: String,
    pub family: LinkFamily,
    pub response: String,
    pub predictors: Vec<String>,
    pub intercept: f64,
    pub column_offsets: Vec<f64>,
    pub loadings: Vec<Vec<f64>>,
    pub gammas: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub weights: Vec<f64>,
    pub path: Vec<PathEntry>,
    pub config: FitConfig,
    pub diagnostics: FitDiagnostics,
}

impl ModelFile {
    /// `predictors` names the model's columns, in the order they were fitted.
    pub fn from_model(model: &GocreModel, response: &str, predictors: &[String]) -> Result<Self> {
        if predictors.len() != model.beta_hat.len() {
            return Err(GocreError::Dimension(format!(
                "{} predictor names for {} coefficients",
                predictors.len(),
                model.beta_hat.len()
            )));
        }
        Ok(Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            number_encoding: NUMBER_ENCODING.into(),
            family: model.family,
            response: response.into(),
            predictors: predictors.to_vec(),
            intercept: model.intercept,
            column_offsets: model.column_offsets.to_vec(),
            loadings: model.loadings.iter().map(|l| l.to_vec()).collect(),
            gammas: model.components.iter().map(|c| c.gamma).collect(),
            beta_hat: model.beta_hat.to_vec(),
            weights: model.weights.to_vec(),
            path: model
                .path
                .iter()
                .map(|p| PathEntry {
                    intercept: p.intercept,
                    gammas: p.gammas.clone(),
                })
                .collect(),
            config: model.config.clone(),
            diagnostics: model.diagnostics.clone(),
        })
    }

    /// Linear predictor and mean, computed exactly as [`GocreModel::predict`].
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let eta = linear_predictor(
            self.intercept,
            ArrayView1::from(&self.column_offsets),
            ArrayView1::from(&self.beta_hat),
            x,
        )?;
        let mean = eta.mapv(|e| self.family.mean(e));
        Ok((eta, mean))
    }

    fn check(&self) -> Result<()> {
        let p = self.predictors.len();
        if self.column_offsets.len() != p
            || self.beta_hat.len() != p
            || self.loadings.iter().any(|l| l.len() != p)
            || self.loadings.len() != self.gammas.len()
        {
            return Err(GocreError::Format(
                "inconsistent array lengths in model file".into(),
            ));
        }
        let numbers = [self.intercept]
            .into_iter()
            .chain(self.column_offsets.iter().copied())
            .chain(self.beta_hat.iter().copied())
            .chain(self.gammas.iter().copied())
            .chain(self.weights.iter().copied())
            .chain(self.loadings.iter().flatten().copied())
            .chain(
                self.path
                    .iter()
                    .flat_map(|e| std::iter::once(e.intercept).chain(e.gammas.iter().copied())),
            );
        for v in numbers {
            if !v.is_finite() {
                return Err(GocreError::Format(
                    "model contains a non-finite number".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.check()?;
        serde_json::to_string_pretty(self).map_err(|e| GocreError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GocreError::Format(e.to_string()))?;
        if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
            return Err(GocreError::Format("not a gocre model file".into()));
        }
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| GocreError::Format("missing version".into()))?;
        if version != MODEL_VERSION as u64 {
            return Err(GocreError::UnsupportedVersion {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                supported: MODEL_VERSION,
            });
        }
        let model: ModelFile =
            serde_json::from_value(value).map_err(|e| GocreError::Format(e.to_string()))?;
        model.check()?;
        Ok(model)
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(model.to_json()?.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    ModelFile::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::fit;
    use ndarray::array;

    fn table(text: &str) -> Result<Table> {
        read_table(text.as_bytes())
    }

    #[test]
    fn response_by_name_or_index() {
        let text = "y,x1,x2\n1,0.5,2\n0,1.5,-1\n1,2.5,3e-2\n";
        let by_name = table(text)
            .unwrap()
            .into_dataset(&"y".parse().unwrap())
            .unwrap();
        let by_index = table(text)
            .unwrap()
            .into_dataset(&"0".parse().unwrap())
            .unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!((by_name.data.n(), by_name.data.p()), (3, 2));
        assert_eq!(by_name.predictors, vec!["x1", "x2"]);
        assert_eq!(by_name.data.x[[2, 1]], 0.03);
        let mid = table(text)
            .unwrap()
            .into_dataset(&"x1".parse().unwrap())
            .unwrap();
        assert_eq!(mid.predictors, vec!["y", "x2"]);
    }

    #[test]
    fn load_errors() {
        match table("y,x\n1,2\n0,NA\n") {
            Err(GocreError::Parse { row, column, value }) => {
                assert_eq!((row, column, value.as_str()), (3, 2, "NA"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(table("y,x\n1,2\n0\n"), Err(GocreError::Format(_))));
        let t = table("y,x\n1,2\n").unwrap();
        assert!(matches!(
            t.clone().into_dataset(&ResponseColumn::Name("z".into())),
            Err(GocreError::MissingColumn(_))
        ));
        assert!(matches!(
            t.into_dataset(&ResponseColumn::Index(5)),
            Err(GocreError::MissingColumn(_))
        ));
    }

    #[test]
    fn table_round_trip_is_exact() {
        let values = array![[0.1, 1.0 / 3.0, -2.5e-300], [1e21, f64::MIN_POSITIVE, 7.0]];
        let header = vec!["a".to_string(), "b".into(), "c".into()];
        let mut buf = Vec::new();
        write_table(&mut buf, &header, values.view()).unwrap();
        let back = read_table(buf.as_slice()).unwrap();
        assert_eq!(back.header, header);
        assert_eq!(back.values, values);
    }

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_sig(-2.0 / 3.0), "-0.6666666667");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(1234567890123.0), "1.23456789e+12");
        assert_eq!(format_sig(1.5e-7), "1.5e-07");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(9999999999.5), "1e+10");
        assert_eq!(format_sig(f64::NAN), "NaN");
    }

    #[test]
    fn mid_ranks_with_ties() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn wilcoxon_examples() {
        let group = [false, false, false, true, true, true];
        let p = wilcoxon_p_value(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &group).unwrap();
        assert!((p - 0.1).abs() < 1e-15);
        let p = wilcoxon_p_value(&[2.0; 6], &group).unwrap();
        assert_eq!(p, 1.0);
        assert!(wilcoxon_p_value(&[1.0, 2.0], &[true, true]).is_err());
    }

    #[test]
    fn normal_approximation_is_close_to_exact_at_the_threshold() {
        // 10 vs 10 is exact; the same ranks with one extra observation per
        // group switch to the approximation and should land nearby.
        let values: Vec<f64> = (0..20).map(|i| ((i * 7) % 20) as f64).collect();
        let group: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let exact = wilcoxon_p_value(&values, &group).unwrap();
        let ranks = mid_ranks(&values);
        let approx = normal_two_sided(&ranks, &group, 10, 10);
        assert!((exact - approx).abs() < 0.02, "{exact} vs {approx}");
    }

    #[test]
    fn rank_features_order_and_errors() {
        let x = array![
            [1.0, 5.0, 0.0],
            [2.0, 5.0, 1.0],
            [3.0, 5.0, 0.0],
            [4.0, 5.0, 1.0]
        ];
        let y = array![0.0, 0.0, 1.0, 1.0];
        let (p, order) = wilcoxon_rank_features(x.view(), y.view()).unwrap();
        assert_eq!(p[1], 1.0);
        assert_eq!(order, vec![0, 1, 2]);
        assert!(wilcoxon_rank_features(x.view(), array![1.0, 1.0, 1.0, 1.0].view()).is_err());
    }

    fn toy_model() -> GocreModel {
        let x = array![
            [0.3, -1.2, 0.5],
            [1.1, 0.4, -0.7],
            [-0.8, 0.9, 0.2],
            [0.1, -0.3, 1.4],
            [1.7, 0.2, -0.1],
            [-0.5, -0.6, 0.8]
        ];
        let y = array![1.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        let data = Dataset::new(x, y).unwrap();
        fit(
            &data,
            &LinkFamily::logit(),
            &FitConfig::default().with_kappa_max(2),
        )
        .unwrap()
    }

    #[test]
    fn model_round_trip_predicts_identically() {
        let model = toy_model();
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let file = ModelFile::from_model(&model, "y", &names).unwrap();
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
        let x = array![[0.25, -1.0 / 3.0, 9.0], [1e-3, 2.0, -4.5]];
        let (eta_a, mu_a) = model.predict(x.view()).unwrap();
        let (eta_b, mu_b) = back.predict(x.view()).unwrap();
        assert_eq!(eta_a, eta_b);
        assert_eq!(mu_a, mu_b);
    }

    #[test]
    fn model_version_and_truncation_errors() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let json = ModelFile::from_model(&toy_model(), "y", &names)
            .unwrap()
            .to_json()
            .unwrap();
        let bumped = json.replacen("\"version\": 1", "\"version\": 999", 1);
        assert!(matches!(
            ModelFile::from_json(&bumped),
            Err(GocreError::UnsupportedVersion {
                found: 999,
                supported: 1
            })
        ));
        assert!(matches!(
            ModelFile::from_json(&json[..json.len() / 2]),
            Err(GocreError::Format(_))
        ));
    }

    #[test]
    fn empty_model_round_trips() {
        let data = Dataset::new(array![[1.0], [2.0], [3.0]], array![1.0, 1.0, 1.0]).unwrap();
        let model = fit(&data, &LinkFamily::logit(), &FitConfig::default()).unwrap();
        assert_eq!(model.n_components(), 0);
        let file = ModelFile::from_model(&model, "y", &["x".to_string()]).unwrap();
        let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back.beta_hat, vec![0.0]);
        assert!(back.loadings.is_empty());
    }
}
