//! Simulation study: AR(1)-block predictors, Laplace coefficients, logistic
//! responses, κ chosen on a validation set, MR and PRESS on a test set.
//!
//! Each replicate draws everything from a ChaCha8 stream seeded with
//! `base_seed + replicate`, so replicates can run on any number of workers
//! and still aggregate to identical numbers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{fit, Dataset, FitConfig, GocreModel};
use crate::error::{GocreError, Result};
use crate::family::LinkFamily;
use crate::firth::BiasMode;
use crate::irpls::{irpls_dg_fit, irpls_m_fit, IrplsConfig, IrplsResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub p: usize,
    pub n_blocks: usize,
    pub rho: f64,
    pub laplace_location: f64,
    pub laplace_scale: f64,
    pub replicates: usize,
    pub kappa_max: usize,
    pub base_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_train: 100,
            n_valid: 100,
            n_test: 200,
            p: 1000,
            n_blocks: 10,
            rho: 0.0,
            laplace_location: 2.0,
            laplace_scale: 1.0,
            replicates: 20,
            kappa_max: 10,
            base_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GocreError::InvalidArgument(msg));
        if self.n_train < 2 || self.n_valid == 0 || self.n_test == 0 {
            return bad("need at least 2 training rows and non-empty validation/test sets".into());
        }
        if self.p == 0 || self.n_blocks == 0 || !self.p.is_multiple_of(self.n_blocks) {
            return bad(format!(
                "p = {} must be a positive multiple of n_blocks = {}",
                self.p, self.n_blocks
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if !(self.laplace_scale > 0.0) || !self.laplace_location.is_finite() {
            return bad("Laplace scale must be positive and location finite".into());
        }
        if self.replicates == 0 || self.kappa_max == 0 {
            return bad("replicates and kappa_max must be positive".into());
        }
        Ok(())
    }
}

/// Rows of independent AR(1) blocks with N(0, 1) marginals.
pub fn gen_ar1_predictors<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    n_blocks: usize,
    rho: f64,
    rng: &mut R,
) -> Result<Array2<f64>> {
    if n_blocks == 0 || !p.is_multiple_of(n_blocks) {
        return Err(GocreError::InvalidArgument(format!(
            "p = {p} is not divisible by n_blocks = {n_blocks}"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(GocreError::InvalidArgument(format!(
            "rho must lie in [0, 1), got {rho}"
        )));
    }
    let block = p / n_blocks;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        for b in 0..n_blocks {
            let mut prev: f64 = rng.sample(StandardNormal);
            row[b * block] = prev;
            for t in 1..block {
                let e: f64 = rng.sample(StandardNormal);
                prev = rho * prev + innovation * e;
                row[b * block + t] = prev;
            }
        }
    }
    Ok(x)
}

/// I.i.d. Laplace(location, scale) draws by inverting the CDF.
pub fn gen_coefficients<R: Rng + ?Sized>(
    p: usize,
    location: f64,
    scale: f64,
    rng: &mut R,
) -> Array1<f64> {
    Array1::from_shape_fn(p, |_| {
        let u = loop {
            let u: f64 = rng.random::<f64>() - 0.5;
            if u > -0.5 {
                break u;
            }
        };
        location - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    })
}

/// yᵢ ~ Bernoulli(1 / (1 + exp(−intercept − xᵢβ))).
pub fn gen_responses<R: Rng + ?Sized>(
    x: ArrayView2<f64>,
    beta: ArrayView1<f64>,
    intercept: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    if x.ncols() != beta.len() {
        return Err(GocreError::Dimension(format!(
            "{} columns but {} coefficients",
            x.ncols(),
            beta.len()
        )));
    }
    let eta = x.dot(&beta);
    Ok(eta.mapv(|e| {
        let prob = 1.0 / (1.0 + (-(intercept + e)).exp());
        (rng.random::<f64>() < prob) as u8 as f64
    }))
}

fn check_metric_input(y: ArrayView1<f64>, prob: ArrayView1<f64>) -> Result<()> {
    if y.is_empty() {
        return Err(GocreError::InvalidArgument("empty input".into()));
    }
    if y.len() != prob.len() {
        return Err(GocreError::Dimension(format!(
            "{} responses but {} probabilities",
            y.len(),
            prob.len()
        )));
    }
    Ok(())
}

/// Fraction of observations with (prob ≥ 0.5) ≠ y.
pub fn misclassification_rate(y: ArrayView1<f64>, prob: ArrayView1<f64>) -> Result<f64> {
    check_metric_input(y, prob)?;
    let wrong = y
        .iter()
        .zip(prob)
        .filter(|(&yi, &pi)| (pi >= 0.5) != (yi == 1.0))
        .count();
    Ok(wrong as f64 / y.len() as f64)
}

/// Mean squared residual on the probability scale.
pub fn press(y: ArrayView1<f64>, prob: ArrayView1<f64>) -> Result<f64> {
    Ok(press_sum(y, prob)? / y.len() as f64)
}

/// Sum of squared residuals on the probability scale.
pub fn press_sum(y: ArrayView1<f64>, prob: ArrayView1<f64>) -> Result<f64> {
    check_metric_input(y, prob)?;
    Ok(y.iter().zip(prob).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Validation scores of one candidate κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub mr: f64,
    pub press: f64,
}

/// 1-based κ with the smallest validation MR; ties go to the smaller κ unless
/// a larger tied κ has strictly smaller PRESS.
pub fn select_kappa(candidates: &[Candidate]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(GocreError::InvalidArgument("no candidate models".into()));
    }
    let mut best = 0;
    for (k, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        if c.mr < b.mr || (c.mr == b.mr && c.press < b.press) {
            best = k;
        }
    }
    Ok(best + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    IrplsM,
    IrplsDg,
    Gocre0,
    Gocre,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::IrplsM,
        Method::IrplsDg,
        Method::Gocre0,
        Method::Gocre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::IrplsM => "irpls-m",
            Method::IrplsDg => "irpls-dg",
            Method::Gocre0 => "gocre0",
            Method::Gocre => "gocre",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = GocreError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                GocreError::InvalidArgument(format!(
                    "unknown method {s:?} (expected irpls-m, irpls-dg, gocre0 or gocre)"
                ))
            })
    }
}

/// A method fitted for every κ = 1..κ_max on one training set.
pub enum FittedPath {
    /// One component fit; nested models are its truncations.
    Gocre(GocreModel),
    /// One IRLS fit per κ.
    Irpls(Vec<IrplsResult>),
}

impl FittedPath {
    pub fn fit(method: Method, train: &Dataset, kappa_max: usize) -> Result<Self> {
        match method {
            Method::Gocre | Method::Gocre0 => {
                let bias = if method == Method::Gocre {
                    BiasMode::ClosedFormDelta
                } else {
                    BiasMode::FullDelta
                };
                let config = FitConfig::default()
                    .with_kappa_max(kappa_max)
                    .with_bias_mode(bias);
                Ok(FittedPath::Gocre(fit(
                    train,
                    &LinkFamily::logit(),
                    &config,
                )?))
            }
            Method::IrplsM | Method::IrplsDg => (1..=kappa_max)
                .map(|k| {
                    let cfg = IrplsConfig::new(k);
                    if method == Method::IrplsM {
                        irpls_m_fit(train, &cfg)
                    } else {
                        irpls_dg_fit(train, &cfg)
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(FittedPath::Irpls),
        }
    }

    /// Whether the model with `kappa` components converged.
    pub fn converged(&self, kappa: usize) -> bool {
        match self {
            FittedPath::Gocre(m) => {
                let k = kappa.min(m.n_components());
                m.diagnostics.converged[..k].iter().all(|&c| c)
            }
            FittedPath::Irpls(fits) => fits[kappa - 1].converged,
        }
    }

    pub fn predict(&self, kappa: usize, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        match self {
            FittedPath::Gocre(m) => m.predict_truncated(kappa, x),
            FittedPath::Irpls(fits) => fits[kappa - 1].predict_mean(&LinkFamily::logit(), x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub kappa: usize,
    pub converged: bool,
    pub mr: f64,
    pub press: f64,
    pub press_sum: f64,
}

/// MR and PRESS on `data` for each κ of a fitted path.
pub fn kappa_curve(path: &FittedPath, data: &Dataset, kappa_max: usize) -> Result<Vec<CurvePoint>> {
    (1..=kappa_max)
        .map(|k| {
            let prob = path.predict(k, data.x.view())?;
            Ok(CurvePoint {
                kappa: k,
                converged: path.converged(k),
                mr: misclassification_rate(data.y.view(), prob.view())?,
                press: press(data.y.view(), prob.view())?,
                press_sum: press_sum(data.y.view(), prob.view())?,
            })
        })
        .collect()
}

/// Everything recorded for one method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub method: Method,
    pub rho: f64,
    pub replicate: usize,
    pub selected_kappa: usize,
    /// All κ = 1..κ_max converged.
    pub converged: bool,
    pub test_mr: f64,
    pub test_press: f64,
    pub test_press_sum: f64,
    pub seconds: f64,
    pub valid_curve: Vec<CurvePoint>,
    pub test_curve: Vec<CurvePoint>,
    /// Set when the fit itself failed; metrics are then NaN.
    pub error: Option<String>,
}

/// Train, validation and test sets of one replicate.
pub struct ReplicateData {
    pub beta: Array1<f64>,
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
}

pub fn replicate_data(sim: &SimConfig, replicate: usize) -> Result<ReplicateData> {
    let mut rng = ChaCha8Rng::seed_from_u64(sim.base_seed.wrapping_add(replicate as u64));
    let beta = gen_coefficients(sim.p, sim.laplace_location, sim.laplace_scale, &mut rng);
    let mut draw = |n: usize| -> Result<Dataset> {
        let x = gen_ar1_predictors(n, sim.p, sim.n_blocks, sim.rho, &mut rng)?;
        let y = gen_responses(x.view(), beta.view(), 0.0, &mut rng)?;
        Dataset::new(x, y)
    };
    let train = draw(sim.n_train)?;
    let valid = draw(sim.n_valid)?;
    let test = draw(sim.n_test)?;
    Ok(ReplicateData {
        beta,
        train,
        valid,
        test,
    })
}

fn evaluate(
    method: Method,
    data: &ReplicateData,
    sim: &SimConfig,
    replicate: usize,
) -> ReplicateOutcome {
    let started = Instant::now();
    let result = FittedPath::fit(method, &data.train, sim.kappa_max);
    let seconds = started.elapsed().as_secs_f64();
    let scored = result.and_then(|path| {
        let valid = kappa_curve(&path, &data.valid, sim.kappa_max)?;
        let test = kappa_curve(&path, &data.test, sim.kappa_max)?;
        let candidates: Vec<Candidate> = valid
            .iter()
            .map(|c| Candidate {
                mr: c.mr,
                press: c.press,
            })
            .collect();
        let k = select_kappa(&candidates)?;
        let converged = (1..=sim.kappa_max).all(|k| path.converged(k));
        Ok((k, converged, valid, test))
    });
    match scored {
        Ok((k, converged, valid_curve, test_curve)) => {
            let chosen = test_curve[k - 1];
            ReplicateOutcome {
                method,
                rho: sim.rho,
                replicate,
                selected_kappa: k,
                converged,
                test_mr: chosen.mr,
                test_press: chosen.press,
                test_press_sum: chosen.press_sum,
                seconds,
                valid_curve,
                test_curve,
                error: None,
            }
        }
        Err(e) => ReplicateOutcome {
            method,
            rho: sim.rho,
            replicate,
            selected_kappa: 0,
            converged: false,
            test_mr: f64::NAN,
            test_press: f64::NAN,
            test_press_sum: f64::NAN,
            seconds,
            valid_curve: Vec::new(),
            test_curve: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs every method on one replicate; all methods see the same data.
pub fn run_replicate(
    sim: &SimConfig,
    methods: &[Method],
    replicate: usize,
) -> Result<Vec<ReplicateOutcome>> {
    let data = replicate_data(sim, replicate)?;
    Ok(methods
        .iter()
        .map(|&m| evaluate(m, &data, sim, replicate))
        .collect())
}

/// One aggregated row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub rho: f64,
    pub replicates: usize,
    pub failures: usize,
    pub convergence_frequency: f64,
    pub median_mr: f64,
    pub mr_spread: f64,
    pub median_press: f64,
    pub press_spread: f64,
    pub median_press_sum: f64,
    pub press_sum_spread: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
    pub outcomes: Vec<ReplicateOutcome>,
}

impl BenchmarkReport {
    pub fn row(&self, method: Method, rho: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.rho == rho)
    }

    /// Mean seconds of each row divided by the fastest method at the same ρ.
    pub fn relative_times(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                let fastest = self
                    .rows
                    .iter()
                    .filter(|o| o.rho == r.rho)
                    .map(|o| o.mean_seconds)
                    .fold(f64::INFINITY, f64::min);
                r.mean_seconds / fastest
            })
            .collect()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn aggregate(
    outcomes: &[ReplicateOutcome],
    methods: &[Method],
    rhos: &[f64],
) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for &rho in rhos {
        for &method in methods {
            let mut subset: Vec<&ReplicateOutcome> = outcomes
                .iter()
                .filter(|o| o.method == method && o.rho == rho)
                .collect();
            subset.sort_by_key(|o| o.replicate);
            let ok: Vec<&&ReplicateOutcome> = subset.iter().filter(|o| o.error.is_none()).collect();
            let collect =
                |f: fn(&ReplicateOutcome) -> f64| -> Vec<f64> { ok.iter().map(|o| f(o)).collect() };
            let mr = collect(|o| o.test_mr);
            let pr = collect(|o| o.test_press);
            let ps = collect(|o| o.test_press_sum);
            let total = subset.len();
            rows.push(ReportRow {
                method,
                rho,
                replicates: total,
                failures: total - ok.len(),
                convergence_frequency: if total == 0 {
                    f64::NAN
                } else {
                    subset.iter().filter(|o| o.converged).count() as f64 / total as f64
                },
                median_mr: median(&mr),
                mr_spread: sample_sd(&mr),
                median_press: median(&pr),
                press_spread: sample_sd(&pr),
                median_press_sum: median(&ps),
                press_sum_spread: sample_sd(&ps),
                mean_seconds: subset.iter().map(|o| o.seconds).sum::<f64>() / total.max(1) as f64,
            });
        }
    }
    rows
}

/// Worker count from `GOCRE_THREADS` (unset or 0 means automatic).
pub fn configured_threads() -> usize {
    std::env::var("GOCRE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Runs the full protocol for each ρ in `rhos` (overriding `sim.rho`).
pub fn run_benchmark(
    sim: &SimConfig,
    rhos: &[f64],
    methods: &[Method],
    threads: usize,
) -> Result<BenchmarkReport> {
    if methods.is_empty() || rhos.is_empty() {
        return Err(GocreError::InvalidArgument(
            "need at least one method and one rho".into(),
        ));
    }
    let configs: Vec<SimConfig> = rhos
        .iter()
        .map(|&rho| SimConfig { rho, ..sim.clone() })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..sim.replicates).map(move |r| (c, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| GocreError::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<ReplicateOutcome>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| run_replicate(&configs[c], methods, r))
            .collect()
    });
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.extend(r?);
    }
    outcomes.sort_by(|a, b| {
        a.rho
            .total_cmp(&b.rho)
            .then(a.replicate.cmp(&b.replicate))
            .then(a.method.cmp(&b.method))
    });
    let rows = aggregate(&outcomes, methods, rhos);
    Ok(BenchmarkReport { rows, outcomes })
}
