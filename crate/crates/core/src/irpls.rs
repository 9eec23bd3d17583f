//! Iteratively reweighted PLS baselines.
//!
//! Every outer IRLS iteration recomputes W and the working response from the
//! current η, re-centres X under the new W and fits a fresh κ-component
//! weighted PLS. The bias-corrected variant additionally recomputes the exact
//! hat-matrix leverages at every iteration.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::engine::{
    apply_deflation, deflation_row, recover_coefficients, weighted_center, ComponentRecord, Dataset,
};
use crate::error::{GocreError, Result};
use crate::family::{variance_weight, working_response, LinkFamily};
use crate::firth::{corrected_working_response, delta_full};

/// Relative size of XₖᵗWz below which no further PLS component is extracted.
const PLS_STOP_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPls {
    pub beta: Array1<f64>,
    /// 1ᵗWz / 1ᵗW1; predictions are intercept + X_centred·beta.
    pub intercept: f64,
    pub components_built: usize,
}

/// κ-component PLS regression of z on a W-centred X under the W inner product,
/// with X-only deflation.
pub fn weighted_pls(
    x: ArrayView2<f64>,
    z: ArrayView1<f64>,
    w: ArrayView1<f64>,
    kappa: usize,
) -> Result<WeightedPls> {
    let (n, p) = x.dim();
    if z.len() != n || w.len() != n {
        return Err(GocreError::Dimension(format!(
            "{n} rows but {} responses and {} weights",
            z.len(),
            w.len()
        )));
    }
    if kappa == 0 {
        return Err(GocreError::InvalidArgument(
            "kappa must be at least 1".into(),
        ));
    }
    if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GocreError::InvalidArgument(
            "weights must be positive".into(),
        ));
    }
    let total_w = w.sum();
    let wz = &z * &w;
    let intercept = wz.sum() / total_w;

    let mut xk = x.to_owned();
    let mut records: Vec<ComponentRecord> = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let cov = xk.t().dot(&wz);
        let norm = cov.dot(&cov).sqrt();
        let max_abs = xk.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(norm / (total_w * max_abs.max(1.0)) >= PLS_STOP_EPS) {
            break;
        }
        let alpha = cov / norm;
        let score = xk.dot(&alpha);
        let denom = (&score * &w).dot(&score);
        let gamma = score.dot(&wz) / denom;
        let p_row = deflation_row(xk.view(), score.view(), w)?;
        apply_deflation(&mut xk, score.view(), p_row.view());
        records.push(ComponentRecord {
            alpha,
            p_row,
            gamma,
            score,
            inner_iters: 1,
            converged: true,
        });
    }
    let (_, beta) = recover_coefficients(&records, p)?;
    Ok(WeightedPls {
        beta,
        intercept,
        components_built: records.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrplsConfig {
    pub kappa: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub family: LinkFamily,
    /// ‖β‖ above which the fit is declared divergent.
    pub divergence_threshold: f64,
}

impl IrplsConfig {
    pub fn new(kappa: usize) -> Self {
        Self {
            kappa,
            max_iter: 100,
            tol: 1e-6,
            family: LinkFamily::logit(),
            divergence_threshold: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrplsResult {
    pub beta: Array1<f64>,
    /// Intercept on the raw predictor scale: η = intercept + xβ.
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    pub diverged: bool,
    /// ‖β‖ after each outer iteration.
    pub beta_norms: Vec<f64>,
}

impl IrplsResult {
    pub fn predict_mean(&self, family: &LinkFamily, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.beta.len() {
            return Err(GocreError::Dimension(format!(
                "fit has {} predictors, data has {} columns",
                self.beta.len(),
                x.ncols()
            )));
        }
        Ok((x.dot(&self.beta) + self.intercept).mapv(|e| family.mean(e)))
    }
}

pub(crate) fn irpls_loop<F>(
    data: &Dataset,
    cfg: &IrplsConfig,
    mut leverage: F,
) -> Result<IrplsResult>
where
    F: FnMut(ArrayView2<f64>, ArrayView1<f64>) -> Result<Option<Array1<f64>>>,
{
    if cfg.kappa == 0 || cfg.max_iter == 0 || !(cfg.tol > 0.0) {
        return Err(GocreError::InvalidArgument(
            "kappa and max_iter must be positive and tol > 0".into(),
        ));
    }
    let family = &cfg.family;
    family.check_response(data.y.view())?;
    let y = data.y.view();
    let n = data.n();
    let p = data.p();
    let y_mean = data.y.mean().unwrap_or(0.0);
    let mut eta = Array1::from_elem(n, family.link(y_mean));

    let mut beta = Array1::zeros(p);
    let mut intercept = eta[0];
    let mut prev: Option<Array1<f64>> = None;
    let mut beta_norms = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let w = variance_weight(family, eta.view())?;
        let (xc, offsets) = weighted_center(data.x.view(), w.view())?;
        let z = match leverage(xc.view(), w.view())? {
            Some(zeta) => corrected_working_response(family, y, eta.view(), zeta.view())?,
            None => working_response(family, y, eta.view())?,
        };
        let pls = weighted_pls(xc.view(), z.view(), w.view(), cfg.kappa)?;
        let norm = pls.beta.dot(&pls.beta).sqrt();
        beta_norms.push(norm);
        if !norm.is_finite() || norm > cfg.divergence_threshold || !pls.intercept.is_finite() {
            diverged = true;
            beta = pls.beta;
            intercept = pls.intercept - offsets.dot(&beta);
            break;
        }
        eta = xc.dot(&pls.beta) + pls.intercept;
        intercept = pls.intercept - offsets.dot(&pls.beta);
        beta = pls.beta;
        if let Some(old) = &prev {
            let diff = (&beta - old).mapv(|v| v * v).sum().sqrt();
            let base = old.dot(old).sqrt().max(1.0);
            if diff / base < cfg.tol {
                converged = true;
                break;
            }
        }
        prev = Some(beta.clone());
    }

    Ok(IrplsResult {
        beta,
        intercept,
        converged,
        iterations,
        diverged,
        beta_norms,
    })
}

/// IRLS with the weighted least-squares step replaced by a κ-component PLS.
pub fn irpls_m_fit(data: &Dataset, cfg: &IrplsConfig) -> Result<IrplsResult> {
    irpls_loop(data, cfg, |_, _| Ok(None))
}

/// As [`irpls_m_fit`] but with the bias-corrected working response, the
/// leverages recomputed from a pivoted QR under the current W at every iteration.
pub fn irpls_dg_fit(data: &Dataset, cfg: &IrplsConfig) -> Result<IrplsResult> {
    if !cfg.family.is_logit() {
        return Err(GocreError::InvalidArgument(
            "bias correction is only defined for the logit family".into(),
        ));
    }
    irpls_loop(data, cfg, |xc, w| Ok(Some(delta_full(xc, w)?.zeta)))
}
