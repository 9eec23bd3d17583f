//! Sequential construction of weighted-orthogonal components for a GLM.
//!
//! Each component is built by an inner fixed-point loop that alternates
//! between the working response Z(η) and a unit loading α ∝ XⱼᵗWZ, refreshing
//! the intercept and all component coefficients against Z on every pass.
//! Once α and η both settle, the component is removed from Xⱼ by a W-orthogonal
//! deflation and the next component starts from the current η.
//!
//! Weights follow one of two schedules: dynamic during the first component
//! (starting from W = I) and frozen afterwards, or a second complete run with
//! W fixed from the first run's final linear predictor.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, GocreError, Result};
use crate::family::{variance_weight, LinkFamily};
use crate::firth::{corrected_z, leverages, BiasMode};

/// Observed responses and predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(GocreError::InvalidArgument(format!(
                "dataset must be non-empty, got {n}×{p}"
            )));
        }
        if y.len() != n {
            return Err(GocreError::Dimension(format!(
                "{} responses for {} rows",
                y.len(),
                n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GocreError::InvalidArgument(
                "predictor matrix has non-finite entries".into(),
            ));
        }
        ensure_finite(&y.to_vec(), "response")?;
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightStrategy {
    /// Dynamic weights while building component 1, frozen afterwards.
    #[default]
    DynamicFirstComponent,
    /// A second full run with W built from the first run's final η.
    TwoRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub kappa_max: usize,
    /// Inner loops stop once ‖Δα‖ and the relative max change in η both fall
    /// below this.
    pub tol_alpha: f64,
    pub max_inner_iter: usize,
    pub stop_eps: f64,
    pub weight_strategy: WeightStrategy,
    pub bias_mode: BiasMode,
    /// While component 1 is built, each refresh sets W to
    /// `r·W + (1 − r)·variance_weight(η)`. r starts here, is raised (up to
    /// 0.95) after a pass that makes no progress and falls back after one
    /// that does. 0 takes the new weights as is.
    pub weight_relaxation: f64,
    /// Scale columns to unit standard deviation before fitting.
    pub standardize: bool,
    /// Echoed into model files; the fit itself uses no randomness.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            kappa_max: 10,
            tol_alpha: 1e-8,
            max_inner_iter: 100,
            stop_eps: 1e-10,
            weight_strategy: WeightStrategy::default(),
            bias_mode: BiasMode::default(),
            weight_relaxation: 0.5,
            standardize: false,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn with_kappa_max(mut self, kappa_max: usize) -> Self {
        self.kappa_max = kappa_max;
        self
    }

    pub fn with_bias_mode(mut self, bias_mode: BiasMode) -> Self {
        self.bias_mode = bias_mode;
        self
    }

    pub fn with_weight_strategy(mut self, strategy: WeightStrategy) -> Self {
        self.weight_strategy = strategy;
        self
    }

    pub fn with_weight_relaxation(mut self, relaxation: f64) -> Self {
        self.weight_relaxation = relaxation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.weight_relaxation) {
            return Err(GocreError::InvalidArgument(format!(
                "weight_relaxation must lie in [0, 1), got {}",
                self.weight_relaxation
            )));
        }
        if self.kappa_max == 0 {
            return Err(GocreError::InvalidArgument(
                "kappa_max must be at least 1".into(),
            ));
        }
        if self.max_inner_iter == 0 {
            return Err(GocreError::InvalidArgument(
                "max_inner_iter must be at least 1".into(),
            ));
        }
        for (name, v) in [("tol_alpha", self.tol_alpha), ("stop_eps", self.stop_eps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GocreError::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One constructed component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    /// Unit loading in the deflated space Xⱼ.
    pub alpha: Array1<f64>,
    /// Deflation row Pⱼ = αⱼᵗXⱼᵗWXⱼ / (αⱼᵗXⱼᵗWXⱼαⱼ).
    pub p_row: Array1<f64>,
    pub gamma: f64,
    /// Xⱼαⱼ on the training rows.
    pub score: Array1<f64>,
    pub inner_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Uncorrelated,
    KappaMax,
    InnerNonconvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub components_built: usize,
    pub stop_reason: StopReason,
    pub inner_iters: Vec<usize>,
    pub converged: Vec<bool>,
    pub runs: usize,
}

impl FitDiagnostics {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Intercept and component coefficients as they stood right after a given
/// component converged. Truncating a fit at κ components uses these.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub intercept: f64,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GocreModel {
    pub intercept: f64,
    pub components: Vec<ComponentRecord>,
    /// Composite loadings ϖⱼ against the original (centred) predictors.
    pub loadings: Vec<Array1<f64>>,
    pub beta_hat: Array1<f64>,
    pub column_offsets: Array1<f64>,
    /// Present when the fit standardized columns; α and P live in that space.
    pub column_scales: Option<Array1<f64>>,
    pub weights: Array1<f64>,
    pub family: LinkFamily,
    pub config: FitConfig,
    pub diagnostics: FitDiagnostics,
    pub path: Vec<PathPoint>,
    /// Final η on the training rows.
    pub linear_predictor: Array1<f64>,
}

fn check_positive_weights(w: ArrayView1<f64>) -> Result<()> {
    if let Some((i, v)) = w
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(GocreError::InvalidArgument(format!(
            "weights must be positive, found {v} at position {i}"
        )));
    }
    Ok(())
}

/// Weighted column centring: offsets = XᵗW1/Σw.
pub fn weighted_center(
    x: ArrayView2<f64>,
    w: ArrayView1<f64>,
) -> Result<(Array2<f64>, Array1<f64>)> {
    if w.len() != x.nrows() {
        return Err(GocreError::Dimension(format!(
            "{} weights for {} rows",
            w.len(),
            x.nrows()
        )));
    }
    check_positive_weights(w)?;
    let total = w.sum();
    let offsets = x.t().dot(&w) / total;
    let mut centered = x.to_owned();
    for mut row in centered.rows_mut() {
        row -= &offsets;
    }
    Ok((centered, offsets))
}

pub(crate) fn deflation_row(
    xj: ArrayView2<f64>,
    score: ArrayView1<f64>,
    w: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    let ws = &score * &w;
    let denom = score.dot(&ws);
    if !(denom > 0.0) {
        return Err(GocreError::DegenerateComponent(
            "component score has zero weighted norm".into(),
        ));
    }
    Ok(xj.t().dot(&ws) / denom)
}

pub(crate) fn apply_deflation(
    xj: &mut Array2<f64>,
    score: ArrayView1<f64>,
    p_row: ArrayView1<f64>,
) {
    Zip::from(xj.rows_mut())
        .and(&score)
        .for_each(|mut row, &s| row.scaled_add(-s, &p_row));
}

/// Removes the component Xⱼαⱼ from Xⱼ, returning Pⱼ and Xⱼ₊₁.
pub fn deflate(
    xj: ArrayView2<f64>,
    alpha: ArrayView1<f64>,
    w: ArrayView1<f64>,
) -> Result<(Array1<f64>, Array2<f64>)> {
    if alpha.len() != xj.ncols() || w.len() != xj.nrows() {
        return Err(GocreError::Dimension(format!(
            "matrix is {}×{}, loading has {} entries, weights {}",
            xj.nrows(),
            xj.ncols(),
            alpha.len(),
            w.len()
        )));
    }
    let score = xj.dot(&alpha);
    let p_row = deflation_row(xj, score.view(), w)?;
    let mut next = xj.to_owned();
    apply_deflation(&mut next, score.view(), p_row.view());
    Ok((p_row, next))
}

/// Composite loadings ϖⱼ = (I − α₁P₁)…(I − αⱼ₋₁Pⱼ₋₁)αⱼ and β̂ = Σⱼ γⱼϖⱼ.
///
/// The products are applied as rank-one vector updates, so no p×p matrix is
/// ever formed.
pub fn recover_coefficients(
    components: &[ComponentRecord],
    p: usize,
) -> Result<(Vec<Array1<f64>>, Array1<f64>)> {
    let mut loadings = Vec::with_capacity(components.len());
    for (j, comp) in components.iter().enumerate() {
        if comp.alpha.len() != p || comp.p_row.len() != p {
            return Err(GocreError::Dimension(format!(
                "component {} has loading length {} and deflation row length {}, expected {}",
                j + 1,
                comp.alpha.len(),
                comp.p_row.len(),
                p
            )));
        }
        let mut v = comp.alpha.clone();
        for prev in components[..j].iter().rev() {
            let proj = prev.p_row.dot(&v);
            v.scaled_add(-proj, &prev.alpha);
        }
        loadings.push(v);
    }
    let mut beta = Array1::zeros(p);
    for (l, c) in loadings.iter().zip(components) {
        beta.scaled_add(c.gamma, l);
    }
    Ok((loadings, beta))
}

/// Result of one call to [`construct_component`].
#[derive(Debug, Clone)]
pub enum ComponentStep {
    Built {
        record: ComponentRecord,
        intercept: f64,
        eta: Array1<f64>,
        /// Refreshed coefficients for every component including the new one.
        gammas: Vec<f64>,
    },
    /// XⱼᵗWZ vanished; no further component can be built.
    Uncorrelated { intercept: f64 },
}

/// One pass of the inner loop: working response, intercept, loading,
/// coefficient refresh and the new η.
enum Pass {
    Update {
        alpha: Array1<f64>,
        score: Array1<f64>,
        mu: f64,
        gammas: Vec<f64>,
        eta: Array1<f64>,
    },
    Uncorrelated {
        mu: f64,
    },
}

struct Prior<'a> {
    scores: Vec<ArrayView1<'a, f64>>,
    denoms: Vec<f64>,
}

impl<'a> Prior<'a> {
    fn new(records: &'a [ComponentRecord], w: ArrayView1<f64>) -> Self {
        let scores: Vec<_> = records.iter().map(|r| r.score.view()).collect();
        let denoms = scores.iter().map(|s| (s * &w).dot(s)).collect();
        Self { scores, denoms }
    }

    fn empty() -> Self {
        Self {
            scores: Vec::new(),
            denoms: Vec::new(),
        }
    }
}

struct PassInput<'a> {
    xj: ArrayView2<'a, f64>,
    y: ArrayView1<'a, f64>,
    w: ArrayView1<'a, f64>,
    zeta: Option<ArrayView1<'a, f64>>,
    family: &'a LinkFamily,
    stop_eps: f64,
    max_abs: f64,
}

fn working_z(
    family: &LinkFamily,
    y: ArrayView1<f64>,
    eta: ArrayView1<f64>,
    zeta: Option<ArrayView1<f64>>,
) -> Array1<f64> {
    match zeta {
        Some(zeta) => Zip::from(&y)
            .and(&eta)
            .and(&zeta)
            .map_collect(|&yi, &e, &zi| corrected_z(family, yi, e, zi)),
        None => Zip::from(&y)
            .and(&eta)
            .map_collect(|&yi, &e| family.working_value(yi, e)),
    }
}

fn inner_pass(input: &PassInput, prior: &Prior, eta: ArrayView1<f64>) -> Pass {
    let z = working_z(input.family, input.y, eta, input.zeta);
    let wz = &z * &input.w;
    let total_w = input.w.sum();
    let mu = wz.sum() / total_w;

    let cov = input.xj.t().dot(&wz);
    let norm = cov.dot(&cov).sqrt();
    let scale = total_w * input.max_abs.max(1.0);
    if !(norm / scale >= input.stop_eps) {
        return Pass::Uncorrelated { mu };
    }
    let alpha = cov / norm;
    let score = input.xj.dot(&alpha);
    let denom = (&score * &input.w).dot(&score);

    let mut gammas: Vec<f64> = prior
        .scores
        .iter()
        .zip(&prior.denoms)
        .map(|(s, d)| s.dot(&wz) / d)
        .collect();
    let gamma = score.dot(&wz) / denom;
    gammas.push(gamma);

    let mut new_eta = Array1::from_elem(eta.len(), mu);
    for (s, g) in prior.scores.iter().zip(&gammas) {
        new_eta.scaled_add(*g, s);
    }
    new_eta.scaled_add(gamma, &score);

    Pass::Update {
        alpha,
        score,
        mu,
        gammas,
        eta: new_eta,
    }
}

fn max_abs(x: ArrayView2<f64>) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn distance(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    Zip::from(a)
        .and(b)
        .fold(0.0, |acc, x, y| acc + (x - y) * (x - y))
        .sqrt()
}

/// Largest change in η relative to its scale. The α test alone misses a
/// drifting γ when α is nearly pinned down (few predictors).
fn eta_change(old: &Array1<f64>, new: &Array1<f64>) -> f64 {
    let scale = new.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Zip::from(old)
        .and(new)
        .fold(0.0f64, |m, a, b| m.max((a - b).abs()))
        / scale
}

/// Builds component j on a fixed weight matrix.
///
/// `xj` must be the W-centred, already deflated predictor matrix and `prior`
/// the components built so far (their scores mutually W-orthogonal). `zeta`
/// carries the leverages when the working response is bias corrected.
/// `xj` itself is left untouched; the returned record carries Pⱼ.
#[allow(clippy::too_many_arguments)]
pub fn construct_component(
    xj: ArrayView2<f64>,
    y: ArrayView1<f64>,
    prior: &[ComponentRecord],
    eta_init: ArrayView1<f64>,
    w: ArrayView1<f64>,
    zeta: Option<ArrayView1<f64>>,
    family: &LinkFamily,
    config: &FitConfig,
) -> Result<ComponentStep> {
    let n = xj.nrows();
    if y.len() != n || eta_init.len() != n || w.len() != n || zeta.is_some_and(|z| z.len() != n) {
        return Err(GocreError::Dimension(
            "response, linear predictor, weights and leverages need one entry per row".into(),
        ));
    }
    if prior.iter().any(|r| r.score.len() != n) {
        return Err(GocreError::Dimension("prior component score length".into()));
    }
    check_positive_weights(w)?;
    let input = PassInput {
        xj,
        y,
        w,
        zeta,
        family,
        stop_eps: config.stop_eps,
        max_abs: max_abs(xj),
    };
    let prior_view = Prior::new(prior, w);
    let mut eta = eta_init.to_owned();
    let mut previous: Option<Array1<f64>> = None;
    let mut last = None;
    let mut converged = false;
    let mut iters = 0;

    while iters < config.max_inner_iter {
        iters += 1;
        match inner_pass(&input, &prior_view, eta.view()) {
            Pass::Uncorrelated { mu } => return Ok(ComponentStep::Uncorrelated { intercept: mu }),
            Pass::Update {
                alpha,
                score,
                mu,
                gammas,
                eta: next,
            } => {
                let eta_step = eta_change(&eta, &next);
                eta = next;
                if let Some(prev) = &previous {
                    converged =
                        distance(prev, &alpha) < config.tol_alpha && eta_step < config.tol_alpha;
                }
                previous = Some(alpha.clone());
                last = Some((alpha, score, mu, gammas));
                if converged {
                    break;
                }
            }
        }
    }

    let (alpha, score, mu, gammas) = last.expect("at least one inner pass ran");
    let p_row = deflation_row(xj, score.view(), w)?;
    Ok(ComponentStep::Built {
        record: ComponentRecord {
            alpha,
            p_row,
            gamma: gammas[gammas.len() - 1],
            score,
            inner_iters: iters,
            converged,
        },
        intercept: mu,
        eta,
        gammas,
    })
}

/// State handed from the first component to the rest of the run.
struct Start {
    /// X₂ when a first component was built, otherwise the centred X.
    xj: Array2<f64>,
    offsets: Array1<f64>,
    w: Array1<f64>,
    zeta: Option<Array1<f64>>,
    first: FirstOutcome,
}

enum FirstOutcome {
    Built {
        record: ComponentRecord,
        intercept: f64,
        eta: Array1<f64>,
    },
    Uncorrelated {
        intercept: f64,
    },
}

enum WeightPlan {
    DynamicFirst,
    Fixed(Array1<f64>),
}

/// Component 1 with W refreshed from η on every pass (W = I on the first,
/// relaxed towards the new weights afterwards),
/// re-centring X and recomputing leverages whenever W changes.
/// Ceiling for the adaptive weight damping.
const MAX_RELAXATION: f64 = 0.95;

fn first_component_dynamic(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    eta0: &Array1<f64>,
    family: &LinkFamily,
    config: &FitConfig,
) -> Result<Start> {
    let n = x.nrows();
    let mut w = Array1::ones(n);
    let mut eta = eta0.clone();
    let mut previous: Option<Array1<f64>> = None;
    let mut converged = false;
    let mut iters = 0;
    let empty = Prior::empty();
    let mut r = config.weight_relaxation;
    let mut last_step = f64::INFINITY;

    loop {
        iters += 1;
        if iters > 1 {
            let target = variance_weight(family, eta.view())?;
            w = if r > 0.0 {
                w * r + target * (1.0 - r)
            } else {
                target
            };
        }
        let (mut xc, offsets) = weighted_center(x, w.view())?;
        let zeta = leverages(config.bias_mode, xc.view(), w.view())?;
        let input = PassInput {
            xj: xc.view(),
            y,
            w: w.view(),
            zeta: zeta.as_ref().map(|z| z.view()),
            family,
            stop_eps: config.stop_eps,
            max_abs: max_abs(xc.view()),
        };
        match inner_pass(&input, &empty, eta.view()) {
            Pass::Uncorrelated { mu } => {
                return Ok(Start {
                    xj: xc,
                    offsets,
                    w,
                    zeta,
                    first: FirstOutcome::Uncorrelated { intercept: mu },
                });
            }
            Pass::Update {
                alpha,
                score,
                mu,
                gammas,
                eta: next,
            } => {
                let eta_step = eta_change(&eta, &next);
                eta = next;
                if let Some(prev) = &previous {
                    let step = distance(prev, &alpha).max(eta_step);
                    converged = step < config.tol_alpha;
                    // Damp harder when a pass makes no progress, ease off when it does.
                    if r > 0.0 {
                        r = if step >= last_step {
                            (1.0 - 0.5 * (1.0 - r)).min(MAX_RELAXATION)
                        } else {
                            (2.0 * r - 1.0).max(config.weight_relaxation)
                        };
                    }
                    last_step = step;
                }
                if converged || iters >= config.max_inner_iter {
                    let p_row = deflation_row(xc.view(), score.view(), w.view())?;
                    apply_deflation(&mut xc, score.view(), p_row.view());
                    return Ok(Start {
                        xj: xc,
                        offsets,
                        w,
                        zeta,
                        first: FirstOutcome::Built {
                            record: ComponentRecord {
                                alpha,
                                p_row,
                                gamma: gammas[0],
                                score,
                                inner_iters: iters,
                                converged,
                            },
                            intercept: mu,
                            eta,
                        },
                    });
                }
                previous = Some(alpha);
            }
        }
    }
}

fn fixed_start(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    w: Array1<f64>,
    eta0: &Array1<f64>,
    family: &LinkFamily,
    config: &FitConfig,
) -> Result<Start> {
    let (mut xc, offsets) = weighted_center(x, w.view())?;
    let zeta = leverages(config.bias_mode, xc.view(), w.view())?;
    let step = construct_component(
        xc.view(),
        y,
        &[],
        eta0.view(),
        w.view(),
        zeta.as_ref().map(|z| z.view()),
        family,
        config,
    )?;
    let first = match step {
        ComponentStep::Uncorrelated { intercept } => FirstOutcome::Uncorrelated { intercept },
        ComponentStep::Built {
            record,
            intercept,
            eta,
            ..
        } => {
            apply_deflation(&mut xc, record.score.view(), record.p_row.view());
            FirstOutcome::Built {
                record,
                intercept,
                eta,
            }
        }
    };
    Ok(Start {
        xj: xc,
        offsets,
        w,
        zeta,
        first,
    })
}

struct RunOutput {
    intercept: f64,
    components: Vec<ComponentRecord>,
    path: Vec<PathPoint>,
    offsets: Array1<f64>,
    w: Array1<f64>,
    eta: Array1<f64>,
    stop_reason: StopReason,
}

fn run_once(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    eta0: &Array1<f64>,
    family: &LinkFamily,
    config: &FitConfig,
    plan: WeightPlan,
) -> Result<RunOutput> {
    let start = match plan {
        WeightPlan::DynamicFirst => first_component_dynamic(x, y, eta0, family, config)?,
        WeightPlan::Fixed(w) => fixed_start(x, y, w, eta0, family, config)?,
    };
    let Start {
        mut xj,
        offsets,
        w,
        zeta,
        first,
    } = start;

    let (record, mut intercept, mut eta) = match first {
        FirstOutcome::Uncorrelated { intercept } => {
            return Ok(RunOutput {
                intercept,
                components: Vec::new(),
                path: Vec::new(),
                offsets,
                w,
                eta: Array1::from_elem(x.nrows(), intercept),
                stop_reason: StopReason::Uncorrelated,
            });
        }
        FirstOutcome::Built {
            record,
            intercept,
            eta,
        } => (record, intercept, eta),
    };
    let mut path = vec![PathPoint {
        intercept,
        gammas: vec![record.gamma],
    }];
    let mut stop_reason = if record.converged {
        StopReason::KappaMax
    } else {
        StopReason::InnerNonconvergence
    };
    let mut components = vec![record];

    while stop_reason == StopReason::KappaMax && components.len() < config.kappa_max {
        let step = construct_component(
            xj.view(),
            y,
            &components,
            eta.view(),
            w.view(),
            zeta.as_ref().map(|z| z.view()),
            family,
            config,
        )?;
        match step {
            ComponentStep::Uncorrelated { .. } => {
                stop_reason = StopReason::Uncorrelated;
            }
            ComponentStep::Built {
                record,
                intercept: mu,
                eta: next,
                gammas,
            } => {
                apply_deflation(&mut xj, record.score.view(), record.p_row.view());
                for (c, g) in components.iter_mut().zip(&gammas) {
                    c.gamma = *g;
                }
                if !record.converged {
                    stop_reason = StopReason::InnerNonconvergence;
                }
                components.push(record);
                intercept = mu;
                eta = next;
                path.push(PathPoint { intercept, gammas });
            }
        }
    }

    Ok(RunOutput {
        intercept,
        components,
        path,
        offsets,
        w,
        eta,
        stop_reason,
    })
}

fn column_scales(x: ArrayView2<f64>) -> Array1<f64> {
    let n = x.nrows() as f64;
    x.axis_iter(Axis(1))
        .map(|col| {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// Fits the component model to `data`.
pub fn fit(data: &Dataset, family: &LinkFamily, config: &FitConfig) -> Result<GocreModel> {
    config.validate()?;
    family.check_response(data.y.view())?;
    if config.bias_mode != BiasMode::None && !family.is_logit() {
        return Err(GocreError::InvalidArgument(
            "bias correction is only defined for the logit family".into(),
        ));
    }
    let p = data.p();

    let scales = config.standardize.then(|| column_scales(data.x.view()));
    let scaled;
    let x = match &scales {
        Some(s) => {
            scaled = &data.x / s;
            scaled.view()
        }
        None => data.x.view(),
    };

    let y_mean = data.y.mean().unwrap_or(0.0);
    let eta0 = Array1::from_elem(data.n(), family.link(y_mean));

    let mut run = run_once(
        x,
        data.y.view(),
        &eta0,
        family,
        config,
        WeightPlan::DynamicFirst,
    )?;
    let mut runs = 1;
    if config.weight_strategy == WeightStrategy::TwoRun {
        let w = variance_weight(family, run.eta.view())?;
        run = run_once(
            x,
            data.y.view(),
            &eta0,
            family,
            config,
            WeightPlan::Fixed(w),
        )?;
        runs = 2;
    }

    let (mut loadings, mut beta_hat) = recover_coefficients(&run.components, p)?;
    let mut offsets = run.offsets;
    if let Some(s) = &scales {
        for l in loadings.iter_mut() {
            *l /= s;
        }
        beta_hat /= s;
        offsets *= s;
    }

    let diagnostics = FitDiagnostics {
        components_built: run.components.len(),
        stop_reason: run.stop_reason,
        inner_iters: run.components.iter().map(|c| c.inner_iters).collect(),
        converged: run.components.iter().map(|c| c.converged).collect(),
        runs,
    };
    Ok(GocreModel {
        intercept: run.intercept,
        components: run.components,
        loadings,
        beta_hat,
        column_offsets: offsets,
        column_scales: scales,
        weights: run.w,
        family: *family,
        config: config.clone(),
        diagnostics,
        path: run.path,
        linear_predictor: run.eta,
    })
}

/// η = intercept + (X − 1·offsetsᵗ)β.
pub fn linear_predictor(
    intercept: f64,
    offsets: ArrayView1<f64>,
    beta: ArrayView1<f64>,
    x: ArrayView2<f64>,
) -> Result<Array1<f64>> {
    if x.ncols() != beta.len() || offsets.len() != beta.len() {
        return Err(GocreError::Dimension(format!(
            "model has {} predictors, data has {} columns",
            beta.len(),
            x.ncols()
        )));
    }
    let centered_x_beta = Zip::from(x.rows()).map_collect(|row| {
        row.iter()
            .zip(offsets)
            .zip(beta)
            .map(|((v, o), b)| (v - o) * b)
            .sum::<f64>()
    });
    Ok(centered_x_beta + intercept)
}

/// Linear predictor and mean for new rows.
pub fn predict(model: &GocreModel, x_new: ArrayView2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    model.predict(x_new)
}

impl GocreModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn predict(&self, x_new: ArrayView2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let eta = linear_predictor(
            self.intercept,
            self.column_offsets.view(),
            self.beta_hat.view(),
            x_new,
        )?;
        let mean = eta.mapv(|e| self.family.mean(e));
        Ok((eta, mean))
    }

    /// Intercept and coefficient vector of the nested model that stops after
    /// `k` components. `k` is capped at the number built; a model without
    /// components yields its intercept and a zero vector.
    pub fn truncated(&self, k: usize) -> (f64, Array1<f64>) {
        let k = k.min(self.components.len());
        if k == 0 {
            return (self.intercept, Array1::zeros(self.beta_hat.len()));
        }
        let point = &self.path[k - 1];
        let mut beta = Array1::zeros(self.beta_hat.len());
        for (l, g) in self.loadings.iter().zip(&point.gammas) {
            beta.scaled_add(*g, l);
        }
        (point.intercept, beta)
    }

    /// Predicted means of the nested model with `k` components.
    pub fn predict_truncated(&self, k: usize, x_new: ArrayView2<f64>) -> Result<Array1<f64>> {
        let (intercept, beta) = self.truncated(k);
        let eta = linear_predictor(intercept, self.column_offsets.view(), beta.view(), x_new)?;
        Ok(eta.mapv(|e| self.family.mean(e)))
    }
}
