//! Firth-type bias correction of the working response.
//!
//! The correction only needs the diagonal ζ of the weighted hat matrix
//! Δ = W^{1/2}X(XᵗWX)⁺XᵗW^{1/2}. Two routes are provided: the exact diagonal
//! from a pivoted QR of W^{1/2}X, and the closed form ζᵢ = 1 − wᵢ/Σw that holds
//! whenever X is weighted-centred and has rank n − 1.

use nalgebra::DMatrix;
use ndarray::{Array1, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{GocreError, Result};
use crate::family::LinkFamily;

/// How (and whether) the working response is bias corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasMode {
    None,
    /// Exact leverages from a pivoted QR of W^{1/2}X.
    FullDelta,
    /// ζᵢ = 1 − wᵢ/Σw.
    #[default]
    ClosedFormDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeverageMode {
    FullDelta,
    ClosedFormDelta,
}

impl BiasMode {
    pub fn leverage_mode(self) -> Option<LeverageMode> {
        match self {
            BiasMode::None => None,
            BiasMode::FullDelta => Some(LeverageMode::FullDelta),
            BiasMode::ClosedFormDelta => Some(LeverageMode::ClosedFormDelta),
        }
    }
}

/// Diagonal of Δ together with the route used to obtain it.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageSpec {
    pub zeta: Array1<f64>,
    pub mode: LeverageMode,
    /// Numerical rank of W^{1/2}X (n − 1 by assumption for the closed form).
    pub rank: usize,
}

fn check_weights(w: ArrayView1<f64>) -> Result<()> {
    if let Some((i, v)) = w
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(GocreError::InvalidArgument(format!(
            "weights must be positive and finite, found {v} at position {i}"
        )));
    }
    Ok(())
}

/// Exact leverages of W^{1/2}X from a column-pivoted Householder QR.
///
/// The numerical rank counts the leading diagonal entries of R above
/// `max(n, p) · 2⁻⁵² · |R₁₁|`; ζ is the row-wise squared norm of the matching
/// columns of Q. (nalgebra's SVD was tried first and returned factors off by
/// ~1e-4 on some rank-deficient centred inputs.)
pub fn delta_full(x: ArrayView2<f64>, w: ArrayView1<f64>) -> Result<LeverageSpec> {
    let (n, p) = x.dim();
    if w.len() != n {
        return Err(GocreError::Dimension(format!(
            "{} weights for {} rows",
            w.len(),
            n
        )));
    }
    check_weights(w)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GocreError::InvalidArgument(
            "predictor matrix has non-finite entries".into(),
        ));
    }
    let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let qr = DMatrix::from_fn(n, p, |i, j| sqrt_w[i] * x[(i, j)]).col_piv_qr();
    let r = qr.r();
    let m = n.min(p);
    let lead = r[(0, 0)].abs();
    let cutoff = n.max(p) as f64 * f64::EPSILON * lead;
    let rank = if lead > 0.0 {
        (0..m).take_while(|&k| r[(k, k)].abs() > cutoff).count()
    } else {
        0
    };

    let mut zeta = Array1::zeros(n);
    if rank > 0 {
        let q = qr.q();
        for k in 0..rank {
            for i in 0..n {
                zeta[i] += q[(i, k)] * q[(i, k)];
            }
        }
    }
    Ok(LeverageSpec {
        zeta,
        mode: LeverageMode::FullDelta,
        rank,
    })
}

/// ζᵢ = 1 − wᵢ/Σw, in O(n).
pub fn delta_closed_form(w: ArrayView1<f64>) -> Result<LeverageSpec> {
    let n = w.len();
    if n < 2 {
        return Err(GocreError::InvalidArgument(format!(
            "closed-form leverages need at least two observations, got {n}"
        )));
    }
    check_weights(w)?;
    let total: f64 = w.sum();
    Ok(LeverageSpec {
        zeta: w.mapv(|wi| 1.0 - wi / total),
        mode: LeverageMode::ClosedFormDelta,
        rank: n - 1,
    })
}

/// Leverages for the requested mode, or `None` when correction is disabled.
pub fn leverages(
    mode: BiasMode,
    x: ArrayView2<f64>,
    w: ArrayView1<f64>,
) -> Result<Option<Array1<f64>>> {
    Ok(match mode {
        BiasMode::None => None,
        BiasMode::FullDelta => Some(delta_full(x, w)?.zeta),
        BiasMode::ClosedFormDelta => Some(delta_closed_form(w)?.zeta),
    })
}

/// Zᵢ = ηᵢ + {yᵢ + ζᵢ/2 − (1+ζᵢ)g⁻¹(ηᵢ)} / {(1+ζᵢ)∇g⁻¹(ηᵢ)}.
pub fn corrected_working_response(
    family: &LinkFamily,
    y: ArrayView1<f64>,
    eta: ArrayView1<f64>,
    zeta: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    let n = y.len();
    if eta.len() != n || zeta.len() != n {
        return Err(GocreError::Dimension(format!(
            "lengths differ: y {}, eta {}, zeta {}",
            n,
            eta.len(),
            zeta.len()
        )));
    }
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(GocreError::InvalidArgument(
            "linear predictor is not finite".into(),
        ));
    }
    if let Some(z) = zeta.iter().find(|z| !(0.0..=1.0 + 1e-12).contains(*z)) {
        return Err(GocreError::InvalidArgument(format!(
            "leverage {z} outside [0, 1]"
        )));
    }
    Ok(Zip::from(&y)
        .and(&eta)
        .and(&zeta)
        .map_collect(|&yi, &e, &zi| corrected_z(family, yi, e, zi)))
}

#[inline]
pub(crate) fn corrected_z(family: &LinkFamily, y: f64, eta: f64, zeta: f64) -> f64 {
    let h = (1.0 + zeta) * family.mean_deriv(eta);
    eta + (y + 0.5 * zeta - (1.0 + zeta) * family.mean(eta)) / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::weighted_center;
    use crate::family::working_response;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    /// diag of W^{1/2} X (XᵗWX)⁺ XᵗW^{1/2}, pseudo-inverse from a symmetric
    /// eigendecomposition of the p×p cross-product.
    fn explicit_hat_diagonal(x: &Array2<f64>, w: &Array1<f64>) -> Array1<f64> {
        let (n, p) = x.dim();
        let xm = DMatrix::from_fn(n, p, |i, j| x[(i, j)]);
        let wm = DMatrix::from_fn(n, n, |i, j| if i == j { w[i] } else { 0.0 });
        let xtwx = xm.transpose() * &wm * &xm;
        let eig = xtwx.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let mut pinv = DMatrix::zeros(p, p);
        for k in 0..p {
            let l = eig.eigenvalues[k];
            if l > 1e-12 * lmax {
                let v = eig.eigenvectors.column(k);
                pinv += (v * v.transpose()) / l;
            }
        }
        let sw = DMatrix::from_fn(n, n, |i, j| if i == j { w[i].sqrt() } else { 0.0 });
        let delta = &sw * &xm * pinv * xm.transpose() * &sw;
        Array1::from_shape_fn(n, |i| delta[(i, i)])
    }

    #[test]
    fn full_delta_matches_explicit_pseudo_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(5, 3, &mut rng);
        let w = Array1::from_shape_fn(5, |_| 0.2 + rng.random::<f64>());
        let got = delta_full(x.view(), w.view()).unwrap();
        let want = explicit_hat_diagonal(&x, &w);
        assert_eq!(got.rank, 3);
        for i in 0..5 {
            assert!((got.zeta[i] - want[i]).abs() < 1e-10);
        }
        assert!((got.zeta.sum() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn full_rank_square_gives_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_matrix(6, 6, &mut rng);
        let w = Array1::from_shape_fn(6, |_| 0.5 + rng.random::<f64>());
        let got = delta_full(x.view(), w.view()).unwrap();
        for z in got.zeta.iter() {
            assert!((z - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_values() {
        let l = delta_closed_form(array![1.0, 1.0, 1.0, 1.0].view()).unwrap();
        assert_eq!(l.zeta, array![0.75, 0.75, 0.75, 0.75]);
        let l = delta_closed_form(array![1.0, 2.0, 3.0, 4.0].view()).unwrap();
        assert!((l.zeta[0] - 0.9).abs() < 1e-15);
        assert!((l.zeta.sum() - 3.0).abs() < 1e-12);
        assert!(delta_closed_form(array![1.0].view()).is_err());
        assert!(delta_closed_form(array![1.0, -1.0].view()).is_err());
    }

    #[test]
    fn closed_form_agrees_with_full_on_centred_rank_deficient_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = random_matrix(4, 10, &mut rng);
        let w = array![1.0, 2.0, 3.0, 4.0];
        let (xc, _) = weighted_center(raw.view(), w.view()).unwrap();
        let full = delta_full(xc.view(), w.view()).unwrap();
        assert_eq!(full.rank, 3);
        let closed = delta_closed_form(w.view()).unwrap();
        for i in 0..4 {
            assert!((full.zeta[i] - closed.zeta[i]).abs() < 1e-10);
        }
        assert!((full.zeta[0] - 0.9).abs() < 1e-10);
    }

    #[test]
    fn full_matches_closed_form_on_wide_centred_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let raw = random_matrix(60, 400, &mut rng);
            let w = Array1::from_shape_fn(60, |_| 0.01 + 0.24 * rng.random::<f64>());
            let (xc, _) = weighted_center(raw.view(), w.view()).unwrap();
            let full = delta_full(xc.view(), w.view()).unwrap();
            assert_eq!(full.rank, 59);
            let closed = delta_closed_form(w.view()).unwrap();
            for i in 0..60 {
                assert!((full.zeta[i] - closed.zeta[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let x = Array2::<f64>::zeros((4, 7));
        let l = delta_full(x.view(), Array1::ones(4).view()).unwrap();
        assert_eq!(l.rank, 0);
        assert!(l.zeta.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn corrected_response_hand_values() {
        let f = LinkFamily::logit();
        let z = corrected_working_response(
            &f,
            array![1.0, 0.0].view(),
            array![0.0, 0.0].view(),
            array![1.0, 1.0].view(),
        )
        .unwrap();
        assert!((z[0] - 1.0).abs() < 1e-15);
        assert!((z[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_leverage_reduces_to_plain_working_response() {
        let f = LinkFamily::logit();
        let y = array![1.0, 0.0, 1.0, 0.0];
        let eta = array![0.3, -1.2, 2.5, 0.0];
        let plain = working_response(&f, y.view(), eta.view()).unwrap();
        let corr =
            corrected_working_response(&f, y.view(), eta.view(), Array1::zeros(4).view()).unwrap();
        assert_eq!(plain, corr);
    }

    #[test]
    fn correction_shrinks_towards_eta() {
        let f = LinkFamily::logit();
        for &y in &[0.0, 1.0] {
            for &zeta in &[0.1, 0.5, 0.9, 1.0] {
                let plain = working_response(&f, array![y].view(), array![0.0].view()).unwrap()[0];
                let corr = corrected_z(&f, y, 0.0, zeta);
                assert!(corr.abs() <= plain.abs());
            }
        }
    }

    #[test]
    fn corrected_response_rejects_bad_input() {
        let f = LinkFamily::logit();
        assert!(matches!(
            corrected_working_response(
                &f,
                array![1.0].view(),
                array![0.0, 1.0].view(),
                array![0.5].view()
            ),
            Err(GocreError::Dimension(_))
        ));
        assert!(corrected_working_response(
            &f,
            array![1.0].view(),
            array![0.0].view(),
            array![1.5].view()
        )
        .is_err());
    }
}
