//! Linear readout trained by ridge regression, and the RMSE metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, gram, xt_vec, Cholesky, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReadoutError {
    #[error("normal equations are singular (pivot {pivot})")]
    SingularSystem { pivot: usize },
    #[error("input contains NaN or infinity")]
    NonFiniteInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("regularization must be non-negative, got {0}")]
    NegativeLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub lambda: f64,
    /// Fit an unpenalized constant term.
    pub intercept: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig { lambda: 1e-4, intercept: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    /// One weight per state column, followed by the intercept if fitted.
    pub w: Vec<f64>,
    pub dims: usize,
    pub intercept: bool,
}

/// Minimizes `‖Xw − y‖² + λ‖w‖²` through a Cholesky solve of
/// `(XᵀX + λI) w = Xᵀy`, followed by one step of iterative refinement.
pub fn fit(x: &Matrix, y: &[f64], cfg: &RidgeConfig) -> Result<ReadoutWeights, ReadoutError> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(ReadoutError::EmptyInput);
    }
    if y.len() != x.rows() {
        return Err(ReadoutError::DimensionMismatch { expected: x.rows(), got: y.len() });
    }
    if !(cfg.lambda >= 0.0) {
        return Err(ReadoutError::NegativeLambda(cfg.lambda));
    }
    if !x.all_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(ReadoutError::NonFiniteInput);
    }
    let dims = x.cols();
    let (system, rhs) = normal_equations(x, y, cfg);
    if !system.all_finite() || rhs.iter().any(|v| !v.is_finite()) {
        return Err(ReadoutError::NonFiniteInput);
    }
    let chol = Cholesky::factor(system.clone()).map_err(|e| ReadoutError::SingularSystem { pivot: e.pivot })?;
    let mut w = chol.solve(&rhs);
    let ax = system.mul_vec(&w);
    let residual: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let correction = chol.solve(&residual);
    for (wi, ci) in w.iter_mut().zip(&correction) {
        *wi += ci;
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(ReadoutError::NonFiniteInput);
    }
    Ok(ReadoutWeights { w, dims, intercept: cfg.intercept })
}

/// The regularized normal equations `(XᵀX + λI, Xᵀy)`, with an appended
/// unpenalized ones column when an intercept is requested.
pub fn normal_equations(x: &Matrix, y: &[f64], cfg: &RidgeConfig) -> (Matrix, Vec<f64>) {
    let p = x.cols();
    let g = gram(x);
    let xty = xt_vec(x, y);
    if !cfg.intercept {
        let mut g = g;
        for i in 0..p {
            let v = g.get(i, i) + cfg.lambda;
            g.set(i, i, v);
        }
        return (g, xty);
    }
    let mut col_sums = vec![0.0; p];
    for t in 0..x.rows() {
        for (c, v) in col_sums.iter_mut().zip(x.row(t)) {
            *c += v;
        }
    }
    let mut aug = Matrix::zeros(p + 1, p + 1);
    for i in 0..p {
        aug.row_mut(i)[..p].copy_from_slice(g.row(i));
        let v = aug.get(i, i) + cfg.lambda;
        aug.set(i, i, v);
        aug.set(i, p, col_sums[i]);
        aug.set(p, i, col_sums[i]);
    }
    aug.set(p, p, x.rows() as f64);
    let mut rhs = xty;
    rhs.push(y.iter().sum());
    (aug, rhs)
}

pub fn predict(x: &Matrix, weights: &ReadoutWeights) -> Result<Vec<f64>, ReadoutError> {
    if x.cols() != weights.dims {
        return Err(ReadoutError::DimensionMismatch { expected: weights.dims, got: x.cols() });
    }
    let (w, b) = if weights.intercept {
        (&weights.w[..weights.dims], weights.w[weights.dims])
    } else {
        (&weights.w[..], 0.0)
    };
    Ok((0..x.rows()).map(|t| dot(x.row(t), w) + b).collect())
}

pub fn rmse(yhat: &[f64], y: &[f64]) -> Result<f64, ReadoutError> {
    if yhat.len() != y.len() {
        return Err(ReadoutError::DimensionMismatch { expected: y.len(), got: yhat.len() });
    }
    if y.is_empty() {
        return Err(ReadoutError::EmptyInput);
    }
    let sse: f64 = yhat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn diagonal_closed_form() {
        let w = fit(&Matrix::identity(2), &[1.0, 2.0], &RidgeConfig { lambda: 1.0, intercept: false }).unwrap();
        assert!((w.w[0] - 0.5).abs() < 1e-15 && (w.w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_fit_without_regularization() {
        let x = Matrix::from_vec(2, 1, vec![1.0, 2.0]);
        let w = fit(&x, &[1.0, 2.0], &RidgeConfig { lambda: 0.0, intercept: false }).unwrap();
        assert!((w.w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_interpolation() {
        let x = random(12, 12, 9);
        let y: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        let w = fit(&x, &y, &RidgeConfig { lambda: 0.0, intercept: false }).unwrap();
        let yhat = predict(&x, &w).unwrap();
        for (a, b) in yhat.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_is_singular() {
        let x = Matrix::from_vec(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let err = fit(&x, &[1.0, 2.0, 3.0], &RidgeConfig { lambda: 0.0, intercept: false }).unwrap_err();
        assert!(matches!(err, ReadoutError::SingularSystem { .. }));
        // Any positive penalty fixes it.
        assert!(fit(&x, &[1.0, 2.0, 3.0], &RidgeConfig { lambda: 1e-6, intercept: false }).is_ok());
    }

    #[test]
    fn error_paths() {
        let x = Matrix::from_vec(1, 1, vec![f64::NAN]);
        assert_eq!(fit(&x, &[1.0], &RidgeConfig::default()), Err(ReadoutError::NonFiniteInput));
        assert_eq!(
            fit(&Matrix::identity(2), &[1.0], &RidgeConfig::default()),
            Err(ReadoutError::DimensionMismatch { expected: 2, got: 1 })
        );
        let w = ReadoutWeights { w: vec![1.0; 3], dims: 3, intercept: false };
        assert_eq!(predict(&Matrix::identity(2), &w), Err(ReadoutError::DimensionMismatch { expected: 3, got: 2 }));
        assert_eq!(rmse(&[], &[]), Err(ReadoutError::EmptyInput));
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn predict_examples() {
        let w = ReadoutWeights { w: vec![3.0, -1.0, 0.5], dims: 3, intercept: false };
        assert_eq!(predict(&Matrix::identity(3), &w).unwrap(), w.w);
        assert_eq!(predict(&Matrix::zeros(4, 3), &w).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn intercept_is_unpenalized() {
        let x = Matrix::from_vec(4, 1, vec![0.0, 1.0, 2.0, 3.0]);
        let y = [5.0, 7.0, 9.0, 11.0];
        let w = fit(&x, &y, &RidgeConfig { lambda: 0.0, intercept: true }).unwrap();
        assert!((w.w[0] - 2.0).abs() < 1e-10 && (w.w[1] - 5.0).abs() < 1e-10);
        // Large penalty flattens the slope but keeps the mean.
        let w = fit(&x, &y, &RidgeConfig { lambda: 1e9, intercept: true }).unwrap();
        assert!(w.w[0].abs() < 1e-6 && (w.w[1] - 8.0).abs() < 1e-6);
    }

    #[test]
    fn row_order_does_not_matter() {
        let x = random(40, 6, 1);
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut perm: Vec<usize> = (0..40).collect();
        perm.reverse();
        perm.swap(3, 17);
        let xp = Matrix::from_fn(40, 6, |i, j| x.get(perm[i], j));
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let cfg = RidgeConfig::default();
        let a = fit(&x, &y, &cfg).unwrap();
        let b = fit(&xp, &yp, &cfg).unwrap();
        for (u, v) in a.w.iter().zip(&b.w) {
            assert!((u - v).abs() < 1e-10);
        }
        assert_eq!(fit(&x, &y, &cfg).unwrap(), a);
    }

    proptest! {
        #[test]
        fn shrinkage_is_monotone(seed in 0u64..1000, l1 in 1e-6f64..1.0, factor in 1.5f64..100.0) {
            let x = random(30, 8, seed);
            let y: Vec<f64> = (0..30).map(|i| ((i as u64 + seed) as f64).sin()).collect();
            let norm = |l: f64| {
                let w = fit(&x, &y, &RidgeConfig { lambda: l, intercept: false }).unwrap();
                w.w.iter().map(|v| v * v).sum::<f64>()
            };
            prop_assert!(norm(l1) >= norm(l1 * factor) - 1e-12);
        }

        #[test]
        fn rmse_is_permutation_invariant(v in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..50)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.iter().copied().unzip();
            let r = rmse(&a, &b).unwrap();
            prop_assert!(r >= 0.0);
            let ra: Vec<f64> = a.iter().rev().copied().collect();
            let rb: Vec<f64> = b.iter().rev().copied().collect();
            prop_assert!((rmse(&ra, &rb).unwrap() - r).abs() < 1e-12);
            prop_assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        }
    }
}
