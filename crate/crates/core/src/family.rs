//! Link and variance functions for the two supported exponential families.
//!
//! Only canonical links ship: logit for Bernoulli responses and identity for
//! Gaussian responses. Fitted Bernoulli means are clamped to
//! `[PROB_CLAMP, 1 - PROB_CLAMP]` so that the working response and its weights
//! stay finite when the classes are (quasi-)separated.

use ndarray::{Array1, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, GocreError, Result};

/// Clamp applied to Bernoulli means.
pub const PROB_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    LogitBernoulli,
    IdentityGaussian,
}

/// A link/variance bundle with a fixed dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFamily {
    pub kind: FamilyKind,
    pub dispersion: f64,
}

impl Default for LinkFamily {
    fn default() -> Self {
        Self::logit()
    }
}

impl LinkFamily {
    pub fn logit() -> Self {
        Self {
            kind: FamilyKind::LogitBernoulli,
            dispersion: 1.0,
        }
    }

    pub fn identity() -> Self {
        Self {
            kind: FamilyKind::IdentityGaussian,
            dispersion: 1.0,
        }
    }

    pub fn with_dispersion(self, dispersion: f64) -> Result<Self> {
        if !(dispersion.is_finite() && dispersion > 0.0) {
            return Err(GocreError::InvalidArgument(format!(
                "dispersion must be positive and finite, got {dispersion}"
            )));
        }
        Ok(Self { dispersion, ..self })
    }

    pub fn is_logit(&self) -> bool {
        self.kind == FamilyKind::LogitBernoulli
    }

    /// g⁻¹ for a single linear predictor value (clamped for logit).
    #[inline]
    pub fn mean(&self, eta: f64) -> f64 {
        match self.kind {
            FamilyKind::LogitBernoulli => {
                let mu = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                mu.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
            }
            FamilyKind::IdentityGaussian => eta,
        }
    }

    /// dg⁻¹/dη evaluated through the clamped mean.
    #[inline]
    pub fn mean_deriv(&self, eta: f64) -> f64 {
        match self.kind {
            FamilyKind::LogitBernoulli => {
                let mu = self.mean(eta);
                mu * (1.0 - mu)
            }
            FamilyKind::IdentityGaussian => 1.0,
        }
    }

    /// b''(θ)a(φ) expressed through η.
    #[inline]
    pub fn variance(&self, eta: f64) -> f64 {
        match self.kind {
            FamilyKind::LogitBernoulli => {
                let mu = self.mean(eta);
                mu * (1.0 - mu) * self.dispersion
            }
            FamilyKind::IdentityGaussian => self.dispersion,
        }
    }

    /// Inverse variance of the working response, {∇g⁻¹(η)}² / (b''(θ)a(φ)).
    #[inline]
    pub fn weight(&self, eta: f64) -> f64 {
        let d = self.mean_deriv(eta);
        d * d / self.variance(eta)
    }

    /// Working response for one observation; exactly `y` for the identity link.
    #[inline]
    pub fn working_value(&self, y: f64, eta: f64) -> f64 {
        match self.kind {
            FamilyKind::LogitBernoulli => eta + (y - self.mean(eta)) / self.mean_deriv(eta),
            FamilyKind::IdentityGaussian => y,
        }
    }

    /// The link g itself; Bernoulli means are clamped before taking the logit.
    pub fn link(&self, mean: f64) -> f64 {
        match self.kind {
            FamilyKind::LogitBernoulli => {
                let m = mean.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                (m / (1.0 - m)).ln()
            }
            FamilyKind::IdentityGaussian => mean,
        }
    }

    /// Checks that every response value lies in the family's support.
    pub fn check_response(&self, y: ArrayView1<f64>) -> Result<()> {
        ensure_finite(&y.to_vec(), "response")?;
        if self.is_logit() {
            if let Some((i, v)) = y.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
                return Err(GocreError::InvalidArgument(format!(
                    "logit family needs a 0/1 response, found {v} at row {i}"
                )));
            }
        }
        Ok(())
    }
}

fn check_eta(eta: ArrayView1<f64>) -> Result<()> {
    if let Some(pos) = eta.iter().position(|v| !v.is_finite()) {
        return Err(GocreError::InvalidArgument(format!(
            "linear predictor is not finite at position {pos}"
        )));
    }
    Ok(())
}

pub fn inverse_link(family: &LinkFamily, eta: ArrayView1<f64>) -> Result<Array1<f64>> {
    check_eta(eta)?;
    Ok(eta.mapv(|e| family.mean(e)))
}

pub fn mean_derivative(family: &LinkFamily, eta: ArrayView1<f64>) -> Result<Array1<f64>> {
    check_eta(eta)?;
    Ok(eta.mapv(|e| family.mean_deriv(e)))
}

/// Z = η + (y − g⁻¹(η)) / ∇g⁻¹(η).
pub fn working_response(
    family: &LinkFamily,
    y: ArrayView1<f64>,
    eta: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    if y.len() != eta.len() {
        return Err(GocreError::Dimension(format!(
            "response has {} entries but linear predictor has {}",
            y.len(),
            eta.len()
        )));
    }
    check_eta(eta)?;
    Ok(Zip::from(&y)
        .and(&eta)
        .map_collect(|&yi, &e| family.working_value(yi, e)))
}

pub fn variance_weight(family: &LinkFamily, eta: ArrayView1<f64>) -> Result<Array1<f64>> {
    check_eta(eta)?;
    Ok(eta.mapv(|e| family.weight(e)))
}
