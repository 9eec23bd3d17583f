#![allow(dead_code)]

use gocre::{Dataset, GocreModel};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.sample(StandardNormal))
}

pub fn positive_weights(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| 0.05 + rng.random::<f64>())
}

/// Logistic responses from a random direction; both classes guaranteed.
pub fn logistic_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, signal: f64) -> Dataset {
    let x = gaussian_matrix(rng, n, p);
    let beta = Array1::from_shape_fn(p, |_| rng.sample::<f64, _>(StandardNormal) * signal);
    let eta = x.dot(&beta);
    let mut y: Array1<f64> = eta.mapv(|e| {
        let prob = 1.0 / (1.0 + (-e).exp());
        (rng.random::<f64>() < prob) as u8 as f64
    });
    y[0] = 0.0;
    y[1] = 1.0;
    Dataset::new(x, y).unwrap()
}

/// Columns of `x` minus their `w`-weighted means, computed directly.
pub fn center_by(x: ArrayView2<f64>, w: ArrayView1<f64>) -> Array2<f64> {
    let total = w.sum();
    let mut out = x.to_owned();
    for mut col in out.columns_mut() {
        let mean = col.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>() / total;
        col.mapv_inplace(|v| v - mean);
    }
    out
}

/// The deflated matrices X₁, X₂, … implied by a fitted model, rebuilt from
/// its offsets and deflation rows.
pub fn deflated_matrices(model: &GocreModel, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
    let mut xk = x.to_owned();
    for (mut col, o) in xk.columns_mut().into_iter().zip(&model.column_offsets) {
        col.mapv_inplace(|v| v - o);
    }
    let mut out = vec![xk.clone()];
    for c in &model.components {
        let score = xk.dot(&c.alpha);
        for i in 0..xk.nrows() {
            for j in 0..xk.ncols() {
                xk[[i, j]] -= score[i] * c.p_row[j];
            }
        }
        out.push(xk.clone());
    }
    out
}

/// Textbook NIPALS PLS1 with X-deflation (unit weights). Returns the
/// training scores and a closure-free description usable for prediction.
pub struct Pls1 {
    pub x_mean: Array1<f64>,
    pub y_mean: f64,
    pub weights: Vec<Array1<f64>>,
    pub loadings: Vec<Array1<f64>>,
    pub q: Vec<f64>,
    pub scores: Vec<Array1<f64>>,
}

pub fn nipals_pls1(x: ArrayView2<f64>, y: ArrayView1<f64>, ncomp: usize) -> Pls1 {
    let n = x.nrows() as f64;
    let x_mean = x.sum_axis(ndarray::Axis(0)) / n;
    let y_mean = y.sum() / n;
    let mut e = &x - &x_mean;
    let f = y.mapv(|v| v - y_mean);
    let mut out = Pls1 {
        x_mean,
        y_mean,
        weights: vec![],
        loadings: vec![],
        q: vec![],
        scores: vec![],
    };
    for _ in 0..ncomp {
        let wv = e.t().dot(&f);
        let norm = wv.dot(&wv).sqrt();
        if norm < 1e-12 {
            break;
        }
        let wv = wv / norm;
        let t = e.dot(&wv);
        let tt = t.dot(&t);
        let pv = e.t().dot(&t) / tt;
        let q = f.dot(&t) / tt;
        for i in 0..e.nrows() {
            for j in 0..e.ncols() {
                e[[i, j]] -= t[i] * pv[j];
            }
        }
        out.weights.push(wv);
        out.loadings.push(pv);
        out.q.push(q);
        out.scores.push(t);
    }
    out
}

impl Pls1 {
    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        let mut e = &x - &self.x_mean;
        let mut yhat = Array1::from_elem(x.nrows(), self.y_mean);
        for ((w, p), q) in self.weights.iter().zip(&self.loadings).zip(&self.q) {
            let t = e.dot(w);
            yhat.scaled_add(*q, &t);
            for i in 0..e.nrows() {
                for j in 0..e.ncols() {
                    e[[i, j]] -= t[i] * p[j];
                }
            }
        }
        yhat
    }
}

/// Least-squares fit with intercept via the normal equations on centred data.
/// Returns (intercept, coefficients).
pub fn ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> (f64, Array1<f64>) {
    let (n, p) = x.dim();
    let xm = x.sum_axis(ndarray::Axis(0)) / n as f64;
    let ym = y.sum() / n as f64;
    let xc = DMatrix::from_fn(n, p, |i, j| x[[i, j]] - xm[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - ym);
    let xtx = xc.transpose() * &xc;
    let xty = xc.transpose() * yc;
    let b = xtx.cholesky().expect("full column rank").solve(&xty);
    let beta = Array1::from_iter(b.iter().copied());
    (ym - xm.dot(&beta), beta)
}

/// Two-sided rank-sum p-value by enumerating every assignment of `n1` of the
/// observations to group 1. Ranks are mid-ranks of the pooled sample.
pub fn brute_force_wilcoxon(values: &[f64], group: &[bool]) -> f64 {
    let n = values.len();
    let n1 = group.iter().filter(|&&g| g).count();
    let ranks: Vec<f64> = values
        .iter()
        .map(|v| {
            let below = values.iter().filter(|u| *u < v).count() as f64;
            let equal = values.iter().filter(|u| *u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = ranks
        .iter()
        .zip(group)
        .filter(|(_, &g)| g)
        .map(|(r, _)| r)
        .sum();
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        total += 1;
        if s <= observed + 1e-9 {
            le += 1;
        }
        if s >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

/// Two predictors, classes split perfectly by the sign of the first.
pub fn separated_dataset() -> Dataset {
    let mut rng = rng(2024);
    let n = 30;
    let mut x = gaussian_matrix(&mut rng, n, 2);
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let shift = if i % 2 == 0 { 1.0 } else { -1.0 };
        x[[i, 0]] = x[[i, 0]].abs() * shift + 0.5 * shift;
        y[i] = if shift > 0.0 { 1.0 } else { 0.0 };
    }
    Dataset::new(x, y).unwrap()
}

pub fn max_abs_diff(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
