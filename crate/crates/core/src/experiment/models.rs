//! Wiring of losses, gradients, and optimizers into trainable models.
//!
//! Optimizer assignment: SGD for linear regression and the MLP, Adam for
//! GRU-SVM, softmax regression, and the SVM. The SVM family trains on two
//! score columns with `{-1,+1}` targets so argmax prediction applies; the
//! cross-entropy models train on one-hot targets; linear regression uses a
//! single `{0,1}` target column with the 0.5 decision threshold.

use crate::dataset::{binary_targets, one_hot, pm_one_targets, Diagnosis};
use crate::error::Result;
use crate::linear::{
    argmax_predict, cross_entropy, linreg_forward, softmax, softmax_ce_grad, svm_loss,
    svm_reg_grad, threshold_05, LinearParams, SvmConfig, SvmVariant,
};
use crate::neural::{
    gru_svm_backward, gru_svm_forward, mlp_backward, mlp_forward, GruParams, MlpParams, Phase,
};
use crate::numerics::{Matrix, Rng};
use crate::optim::{adam_step, sgd_step, AdamState, ModelParams, SgdState};

use super::config::{ModelKind, ResolvedConfig};

/// Loss and batch accuracy of one optimizer step.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    pub loss: f64,
    pub batch_accuracy: f64,
}

/// A classifier that learns from mini-batches and predicts labels.
pub trait TrainableModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats>;
    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>>;
}

fn fraction_correct(predicted: &[Diagnosis], actual: &[Diagnosis]) -> f64 {
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    hits as f64 / actual.len() as f64
}

fn argmax_labels(scores: &Matrix) -> Vec<Diagnosis> {
    argmax_predict(scores)
        .into_iter()
        .map(Diagnosis::from_class_index)
        .collect()
}

/// Gradients of an affine layer given the upstream score gradient.
fn affine_grads(x: &Matrix, dscores: &Matrix) -> Result<ModelParams> {
    let mut grads = ModelParams::new();
    grads.insert("theta", x.matmul_transpose_left(dscores)?);
    grads.insert("bias", dscores.col_sums());
    Ok(grads)
}

struct LinRegModel {
    params: LinearParams,
    opt: SgdState,
}

impl TrainableModel for LinRegModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats> {
        let scores = linreg_forward(x, &self.params)?;
        let targets = binary_targets(y);
        let (loss, dscores) = crate::linear::mse_loss(&targets, &scores)?;
        let batch_accuracy = fraction_correct(&self.predict_from_scores(&scores), y);
        let grads = affine_grads(x, &dscores)?;
        sgd_step(&mut self.params, &grads, &self.opt)?;
        Ok(StepStats {
            loss,
            batch_accuracy,
        })
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>> {
        let scores = linreg_forward(x, &self.params)?;
        Ok(self.predict_from_scores(&scores))
    }
}

impl LinRegModel {
    fn predict_from_scores(&self, scores: &Matrix) -> Vec<Diagnosis> {
        threshold_05(scores)
            .expect("single output column")
            .into_iter()
            .map(|bit| Diagnosis::from_class_index(bit as usize))
            .collect()
    }
}

struct SoftmaxModel {
    params: LinearParams,
    opt: AdamState,
}

impl TrainableModel for SoftmaxModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats> {
        let logits = linreg_forward(x, &self.params)?;
        let probs = softmax(&logits);
        let targets = one_hot(y);
        let loss = cross_entropy(&targets, &probs)?;
        let dlogits = softmax_ce_grad(&targets, &probs)?;
        let batch_accuracy = fraction_correct(&argmax_labels(&probs), y);
        let grads = affine_grads(x, &dlogits)?;
        adam_step(&mut self.params, &grads, &mut self.opt)?;
        Ok(StepStats {
            loss,
            batch_accuracy,
        })
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>> {
        Ok(argmax_labels(&linreg_forward(x, &self.params)?))
    }
}

struct SvmModel {
    params: LinearParams,
    opt: AdamState,
    cfg: SvmConfig,
}

impl TrainableModel for SvmModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats> {
        let scores = linreg_forward(x, &self.params)?;
        let targets = pm_one_targets(y);
        let out = svm_loss(&targets, &scores, &self.params.theta, &self.cfg)?;
        let batch_accuracy = fraction_correct(&argmax_labels(&scores), y);
        let mut grads = affine_grads(x, &out.dscores)?;
        grads
            .get_mut("theta")
            .unwrap()
            .accumulate_from(&svm_reg_grad(&self.params.theta))?;
        adam_step(&mut self.params, &grads, &mut self.opt)?;
        Ok(StepStats {
            loss: out.total,
            batch_accuracy,
        })
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>> {
        Ok(argmax_labels(&linreg_forward(x, &self.params)?))
    }
}

struct MlpModel {
    params: MlpParams,
    opt: SgdState,
}

impl TrainableModel for MlpModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats> {
        let (logits, cache) = mlp_forward(x, &self.params)?;
        let probs = softmax(&logits);
        let targets = one_hot(y);
        let loss = cross_entropy(&targets, &probs)?;
        let dlogits = softmax_ce_grad(&targets, &probs)?;
        let batch_accuracy = fraction_correct(&argmax_labels(&probs), y);
        let grads = mlp_backward(&dlogits, &self.params, &cache)?;
        sgd_step(&mut self.params, &grads, &self.opt)?;
        Ok(StepStats {
            loss,
            batch_accuracy,
        })
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>> {
        let (logits, _) = mlp_forward(x, &self.params)?;
        Ok(argmax_labels(&logits))
    }
}

struct GruSvmModel {
    params: GruParams,
    opt: AdamState,
    cfg: SvmConfig,
    keep_prob: f64,
    dropout_rng: Rng,
}

impl TrainableModel for GruSvmModel {
    fn train_step(&mut self, x: &Matrix, y: &[Diagnosis]) -> Result<StepStats> {
        let (scores, cache) = gru_svm_forward(
            x,
            &self.params,
            self.keep_prob,
            Phase::Train,
            &mut self.dropout_rng,
        )?;
        let targets = pm_one_targets(y);
        let out = svm_loss(&targets, &scores, &self.params.svm_w, &self.cfg)?;
        let batch_accuracy = fraction_correct(&argmax_labels(&scores), y);
        let mut grads = gru_svm_backward(&out.dscores, &self.params, &cache)?;
        grads
            .get_mut("svm_w")
            .unwrap()
            .accumulate_from(&svm_reg_grad(&self.params.svm_w))?;
        adam_step(&mut self.params, &grads, &mut self.opt)?;
        Ok(StepStats {
            loss: out.total,
            batch_accuracy,
        })
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<Diagnosis>> {
        // Eval never draws from the generator.
        let mut scratch = Rng::new(0);
        let (scores, _) =
            gru_svm_forward(x, &self.params, self.keep_prob, Phase::Eval, &mut scratch)?;
        Ok(argmax_labels(&scores))
    }
}

/// Builds a trainable model from a resolved configuration.
///
/// `init_rng` seeds the weights; `dropout_rng` drives train-phase dropout.
/// Panics if called for a nearest-neighbor configuration (those have no
/// training phase and are handled by the runner directly).
pub fn build_model(
    cfg: &ResolvedConfig,
    num_features: usize,
    init_rng: &mut Rng,
    dropout_rng: Rng,
) -> Result<Box<dyn TrainableModel>> {
    let lr = cfg
        .learning_rate
        .expect("trained model has a learning rate");
    match cfg.model {
        ModelKind::LinReg => {
            let params = LinearParams::new(num_features, 1, init_rng)?;
            let opt = SgdState::new(lr)?;
            Ok(Box::new(LinRegModel { params, opt }))
        }
        ModelKind::Softmax => {
            let mut params = LinearParams::new(num_features, 2, init_rng)?;
            let opt = AdamState::new(lr, &mut params)?;
            Ok(Box::new(SoftmaxModel { params, opt }))
        }
        ModelKind::Svm => {
            let mut params = LinearParams::new(num_features, 2, init_rng)?;
            let opt = AdamState::new(lr, &mut params)?;
            Ok(Box::new(SvmModel {
                params,
                opt,
                cfg: SvmConfig::new(cfg.svm_c.unwrap(), SvmVariant::L2)?,
            }))
        }
        ModelKind::Mlp => {
            let mut sizes = vec![num_features];
            sizes.extend(cfg.hidden_sizes.as_ref().unwrap());
            sizes.push(2);
            let params = MlpParams::new(&sizes, init_rng)?;
            let opt = SgdState::new(lr)?;
            Ok(Box::new(MlpModel { params, opt }))
        }
        ModelKind::GruSvm => {
            let mut params = GruParams::new(
                cfg.gru_input_size.unwrap(),
                cfg.cell_size.unwrap(),
                init_rng,
            )?;
            let opt = AdamState::new(lr, &mut params)?;
            Ok(Box::new(GruSvmModel {
                params,
                opt,
                cfg: SvmConfig::new(cfg.svm_c.unwrap(), SvmVariant::L2)?,
                keep_prob: cfg.dropout_keep.unwrap(),
                dropout_rng,
            }))
        }
        ModelKind::NnL1 | ModelKind::NnL2 => {
            unreachable!("nearest-neighbor models have no training phase")
        }
    }
}
