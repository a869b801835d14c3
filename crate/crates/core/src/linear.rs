//! Linear classifiers: thresholded linear regression, softmax regression,
//! and the linear support vector machine.
//!
//! The SVM loss comes in two variants sharing the `(1/p) * sum(w^2)`
//! regularizer (p = feature dimensionality): the L1 variant penalizes
//! `C * sum(hinge)`, the differentiable L2 variant `C * sum(hinge^2)`.
//! Training uses the L2 variant; L1 exists for loss comparisons.

use crate::error::{Error, Result};
use crate::numerics::{init_weights, InitScheme, Matrix, Rng};
use crate::optim::HasParams;

/// Weights and bias of an affine scorer: `scores = x * theta + bias`.
#[derive(Debug, Clone)]
pub struct LinearParams {
    pub theta: Matrix,
    pub bias: Matrix,
}

impl LinearParams {
    /// Scaled-normal weights, zero bias.
    pub fn new(num_features: usize, num_outputs: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            theta: init_weights((num_features, num_outputs), InitScheme::ScaledNormal, rng)?,
            bias: Matrix::zeros(1, num_outputs),
        })
    }

    pub fn zeros(num_features: usize, num_outputs: usize) -> Self {
        Self {
            theta: Matrix::zeros(num_features, num_outputs),
            bias: Matrix::zeros(1, num_outputs),
        }
    }
}

impl HasParams for LinearParams {
    fn param_slots(&mut self) -> Vec<(&str, &mut Matrix)> {
        vec![("theta", &mut self.theta), ("bias", &mut self.bias)]
    }
}

/// Affine forward pass, one score row per sample.
pub fn linreg_forward(x: &Matrix, params: &LinearParams) -> Result<Matrix> {
    x.matmul(&params.theta)?.add_row_broadcast(&params.bias)
}

/// Maps regression scores to `{0,1}` labels at the 0.5 boundary
/// (boundary inclusive: a score of exactly 0.5 maps to 1).
pub fn threshold_05(scores: &Matrix) -> Result<Vec<u8>> {
    if scores.cols() != 1 {
        return Err(Error::dim(
            "threshold_05",
            scores.shape(),
            (scores.rows(), 1),
        ));
    }
    Ok(scores
        .data()
        .iter()
        .map(|&s| if s >= 0.5 { 1 } else { 0 })
        .collect())
}

/// Mean squared error and its gradient with respect to the scores.
pub fn mse_loss(targets: &Matrix, scores: &Matrix) -> Result<(f64, Matrix)> {
    if targets.shape() != scores.shape() {
        return Err(Error::dim("mse_loss", targets.shape(), scores.shape()));
    }
    let n = targets.rows() as f64;
    let diff = scores.sub(targets)?;
    let loss = diff.sum_squares() / n;
    let grad = diff.scale(2.0 / n);
    Ok((loss, grad))
}

/// Row-wise softmax with max-subtraction for numerical stability.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..logits.rows() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (c, &v) in row.iter().enumerate() {
            let e = (v - max).exp();
            out.set(r, c, e);
            sum += e;
        }
        for c in 0..logits.cols() {
            out.set(r, c, out.get(r, c) / sum);
        }
    }
    out
}

/// Mean cross entropy over the batch; probabilities are clamped at 1e-12
/// before the log so saturated predictions stay finite.
pub fn cross_entropy(y_onehot: &Matrix, y_hat: &Matrix) -> Result<f64> {
    if y_onehot.shape() != y_hat.shape() {
        return Err(Error::dim("cross_entropy", y_onehot.shape(), y_hat.shape()));
    }
    let mut total = 0.0;
    for r in 0..y_onehot.rows() {
        for c in 0..y_onehot.cols() {
            let y = y_onehot.get(r, c);
            if y != 0.0 {
                total -= y * y_hat.get(r, c).max(1e-12).ln();
            }
        }
    }
    Ok(total / y_onehot.rows() as f64)
}

/// Combined softmax + cross-entropy gradient with respect to the logits:
/// `(probs - y) / N`.
pub fn softmax_ce_grad(y_onehot: &Matrix, probs: &Matrix) -> Result<Matrix> {
    if y_onehot.shape() != probs.shape() {
        return Err(Error::dim(
            "softmax_ce_grad",
            y_onehot.shape(),
            probs.shape(),
        ));
    }
    Ok(probs.sub(y_onehot)?.scale(1.0 / y_onehot.rows() as f64))
}

/// Which hinge penalty the SVM loss applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SvmVariant {
    L1,
    L2,
}

/// SVM penalty parameter and hinge variant.
#[derive(Debug, Clone, Copy)]
pub struct SvmConfig {
    pub c: f64,
    pub variant: SvmVariant,
}

impl SvmConfig {
    pub fn new(c: f64, variant: SvmVariant) -> Result<Self> {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::Config(format!("SVM C must be positive, got {c}")));
        }
        Ok(Self { c, variant })
    }
}

/// SVM loss value and its gradient with respect to the scores.
#[derive(Debug, Clone)]
pub struct SvmLoss {
    pub total: f64,
    pub hinge: f64,
    pub regularizer: f64,
    pub dscores: Matrix,
}

/// Hinge loss over `{-1,+1}` margin targets plus the weight regularizer.
///
/// `targets` and `scores` share one shape: one column for the sign form or
/// one column per class for the argmax form. For the L1 variant the
/// subgradient at a margin of exactly 1 is taken as 0.
pub fn svm_loss(
    targets: &Matrix,
    scores: &Matrix,
    weights: &Matrix,
    cfg: &SvmConfig,
) -> Result<SvmLoss> {
    if targets.shape() != scores.shape() {
        return Err(Error::dim("svm_loss", targets.shape(), scores.shape()));
    }
    if let Some(&bad) = targets.data().iter().find(|t| t.abs() != 1.0) {
        return Err(Error::LabelEncoding { found: bad });
    }
    let p = weights.rows() as f64;
    let regularizer = weights.sum_squares() / p;

    let mut hinge = 0.0;
    let mut dscores = Matrix::zeros(scores.rows(), scores.cols());
    for r in 0..scores.rows() {
        for c in 0..scores.cols() {
            let y = targets.get(r, c);
            let margin = 1.0 - y * scores.get(r, c);
            if margin > 0.0 {
                match cfg.variant {
                    SvmVariant::L1 => {
                        hinge += margin;
                        dscores.set(r, c, -cfg.c * y);
                    }
                    SvmVariant::L2 => {
                        hinge += margin * margin;
                        dscores.set(r, c, -2.0 * cfg.c * y * margin);
                    }
                }
            }
        }
    }
    Ok(SvmLoss {
        total: regularizer + cfg.c * hinge,
        hinge,
        regularizer,
        dscores,
    })
}

/// Gradient of the `(1/p) * sum(w^2)` regularizer: `(2/p) * w`.
pub fn svm_reg_grad(weights: &Matrix) -> Matrix {
    weights.scale(2.0 / weights.rows() as f64)
}

/// Sign predictor over a single score column; a score of exactly 0 maps
/// to +1.
pub fn sign_predict(scores: &Matrix) -> Result<Vec<i8>> {
    if scores.cols() != 1 {
        return Err(Error::dim(
            "sign_predict",
            scores.shape(),
            (scores.rows(), 1),
        ));
    }
    Ok(scores
        .data()
        .iter()
        .map(|&s| if s >= 0.0 { 1 } else { -1 })
        .collect())
}

/// Index of the highest score per row; exact ties resolve to the lower
/// index.
pub fn argmax_predict(scores: &Matrix) -> Vec<usize> {
    (0..scores.rows())
        .map(|r| {
            let row = scores.row(r);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.uniform(-2.0, 2.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn linreg_constant_model() {
        let mut params = LinearParams::zeros(4, 1);
        params.bias.set(0, 0, 0.7);
        let x = Matrix::zeros(3, 4).map(|_| 5.0);
        let scores = linreg_forward(&x, &params).unwrap();
        assert!(scores.data().iter().all(|&s| s == 0.7));
    }

    #[test]
    fn linreg_basis_vector() {
        let mut params = LinearParams::zeros(3, 1);
        params.theta.set(0, 0, 1.0);
        let x = Matrix::from_rows(&[&[1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(linreg_forward(&x, &params).unwrap().get(0, 0), 1.0);
    }

    #[test]
    fn linreg_matches_dot_product_oracle() {
        let mut rng = Rng::new(17);
        let params = LinearParams::new(6, 1, &mut rng).unwrap();
        let x = random_matrix(4, 6, &mut rng);
        let scores = linreg_forward(&x, &params).unwrap();
        for r in 0..4 {
            let mut expected = params.bias.get(0, 0);
            for j in 0..6 {
                expected += x.get(r, j) * params.theta.get(j, 0);
            }
            assert!((scores.get(r, 0) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        let scores = Matrix::from_vec(3, 1, vec![0.5, 0.49999, 0.50001]).unwrap();
        assert_eq!(threshold_05(&scores).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn threshold_is_monotone() {
        let mut rng = Rng::new(4);
        let mut values: Vec<f64> = (0..50).map(|_| rng.uniform(-1.0, 2.0)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let labels = threshold_05(&Matrix::from_vec(50, 1, values).unwrap()).unwrap();
        for w in labels.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn mse_hand_values() {
        let y = Matrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let (loss, _) = mse_loss(&y, &y.clone()).unwrap();
        assert_eq!(loss, 0.0);

        let y = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        let s = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let (loss, grad) = mse_loss(&y, &s).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(grad.get(0, 0), 2.0);
    }

    #[test]
    fn softmax_symmetry_and_shift() {
        let z = Matrix::from_vec(1, 2, vec![0.0, 0.0]).unwrap();
        assert_eq!(softmax(&z).data(), &[0.5, 0.5]);

        let big = Matrix::from_vec(1, 2, vec![1000.0, 1000.0]).unwrap();
        let p = softmax(&big);
        assert!(p.data().iter().all(|v| v.is_finite()));
        assert_eq!(p.data(), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_matches_high_precision_oracle() {
        let z = Matrix::from_vec(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let p = softmax(&z);
        // Frozen from a 50-digit computation of exp(k)/sum(exp).
        let expected = [
            0.090_030_573_170_380_46,
            0.244_728_471_054_797_64,
            0.665_240_955_774_821_9,
        ];
        for (got, want) in p.data().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn cross_entropy_hand_values() {
        let y = Matrix::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(cross_entropy(&y, &y.clone()).unwrap(), 0.0);

        let uniform = Matrix::from_vec(1, 2, vec![0.5, 0.5]).unwrap();
        let ce = cross_entropy(&y, &uniform).unwrap();
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_saturated_prediction_stays_finite() {
        let y = Matrix::from_vec(1, 2, vec![1.0, 0.0]).unwrap();
        let p = Matrix::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        let ce = cross_entropy(&y, &p).unwrap();
        assert!(ce.is_finite());
        assert!(ce > 20.0); // -ln(1e-12) ~ 27.6
    }

    #[test]
    fn svm_hand_values() {
        let w = Matrix::zeros(3, 1);
        let y = Matrix::from_vec(1, 1, vec![1.0]).unwrap();

        // On-margin sample with zero weights: no loss in either variant.
        let s = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        for variant in [SvmVariant::L1, SvmVariant::L2] {
            let out = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, variant).unwrap()).unwrap();
            assert_eq!(out.total, 0.0);
        }

        // Score 0: margin 1, so L1 = 1 and L2 = 1.
        let s = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        let l1 = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, SvmVariant::L1).unwrap()).unwrap();
        let l2 = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, SvmVariant::L2).unwrap()).unwrap();
        assert_eq!(l1.total, 1.0);
        assert_eq!(l2.total, 1.0);

        // Score -1: margin 2, so L1 = 2 and L2 = 4.
        let s = Matrix::from_vec(1, 1, vec![-1.0]).unwrap();
        let l1 = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, SvmVariant::L1).unwrap()).unwrap();
        let l2 = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, SvmVariant::L2).unwrap()).unwrap();
        assert_eq!(l1.total, 2.0);
        assert_eq!(l2.total, 4.0);
    }

    #[test]
    fn svm_rejects_bad_labels() {
        let y = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        let s = Matrix::from_vec(1, 1, vec![0.3]).unwrap();
        let w = Matrix::zeros(2, 1);
        let err = svm_loss(&y, &s, &w, &SvmConfig::new(1.0, SvmVariant::L2).unwrap());
        assert!(matches!(err, Err(Error::LabelEncoding { .. })));
    }

    #[test]
    fn svm_l2_scores_gradient_matches_finite_differences() {
        let mut rng = Rng::new(55);
        let cfg = SvmConfig::new(2.5, SvmVariant::L2).unwrap();
        let w = random_matrix(4, 2, &mut rng);
        for _ in 0..20 {
            let scores = random_matrix(3, 2, &mut rng);
            let targets = scores.map(|_| if rng.bernoulli(0.5) { 1.0 } else { -1.0 });
            let out = svm_loss(&targets, &scores, &w, &cfg).unwrap();
            let h = 1e-5;
            for r in 0..3 {
                for c in 0..2 {
                    let mut plus = scores.clone();
                    plus.set(r, c, scores.get(r, c) + h);
                    let mut minus = scores.clone();
                    minus.set(r, c, scores.get(r, c) - h);
                    let lp = svm_loss(&targets, &plus, &w, &cfg).unwrap().total;
                    let lm = svm_loss(&targets, &minus, &w, &cfg).unwrap().total;
                    let numeric = (lp - lm) / (2.0 * h);
                    let analytic = out.dscores.get(r, c);
                    assert_relative_eq!(analytic, numeric, max_relative = 1e-6, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn svm_l2_hinge_zero_iff_all_margins_met() {
        let w = Matrix::zeros(2, 1);
        let cfg = SvmConfig::new(1.0, SvmVariant::L2).unwrap();
        let y = Matrix::from_vec(2, 1, vec![1.0, -1.0]).unwrap();
        let ok = Matrix::from_vec(2, 1, vec![1.5, -1.0]).unwrap();
        assert_eq!(svm_loss(&y, &ok, &w, &cfg).unwrap().hinge, 0.0);
        let violating = Matrix::from_vec(2, 1, vec![1.5, -0.9]).unwrap();
        assert!(svm_loss(&y, &violating, &w, &cfg).unwrap().hinge > 0.0);
    }

    #[test]
    fn sign_predictor_boundary() {
        let scores = Matrix::from_vec(3, 1, vec![0.0, -0.1, 2.0]).unwrap();
        assert_eq!(sign_predict(&scores).unwrap(), vec![1, -1, 1]);
    }

    #[test]
    fn argmax_forced_and_tie() {
        let scores = Matrix::from_rows(&[&[-3.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(argmax_predict(&scores), vec![1, 0]);
    }

    proptest! {
        #[test]
        fn softmax_rows_are_distributions(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let z = random_matrix(4, 3, &mut rng);
            let p = softmax(&z);
            for r in 0..4 {
                let sum: f64 = p.row(r).iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
                prop_assert!(p.row(r).iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }

        #[test]
        fn softmax_shift_invariance(seed in any::<u64>(), shift in -50.0f64..50.0) {
            let mut rng = Rng::new(seed);
            let z = random_matrix(3, 4, &mut rng);
            let shifted = z.map(|v| v + shift);
            let a = softmax(&z);
            let b = softmax(&shifted);
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn svm_losses_are_nonnegative(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let scores = random_matrix(5, 2, &mut rng);
            let targets = scores.map(|_| if rng.bernoulli(0.5) { 1.0 } else { -1.0 });
            let w = random_matrix(3, 2, &mut rng);
            for variant in [SvmVariant::L1, SvmVariant::L2] {
                let cfg = SvmConfig::new(1.5, variant).unwrap();
                let out = svm_loss(&targets, &scores, &w, &cfg).unwrap();
                prop_assert!(out.total >= 0.0);
                prop_assert!(out.hinge >= 0.0);
            }
        }

        #[test]
        fn argmax_is_scale_invariant(seed in any::<u64>(), factor in 1e-3f64..1e3) {
            let mut rng = Rng::new(seed);
            let scores = random_matrix(6, 2, &mut rng);
            let scaled = scores.scale(factor);
            prop_assert_eq!(argmax_predict(&scores), argmax_predict(&scaled));
        }
    }
}
