//! Parameter containers and update rules: plain SGD and Adam.
//!
//! Gradients travel as a [`ModelParams`] value whose entries mirror the
//! model's parameters by name and shape; the update rules zip the two and
//! fail loudly on any mismatch.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Ordered, named collection of matrices.
///
/// Used both for gradients and for optimizer moment state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    entries: Vec<(String, Matrix)>,
}

impl ModelParams {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn insert(&mut self, name: &str, value: Matrix) {
        debug_assert!(self.get(name).is_none(), "duplicate parameter name {name}");
        self.entries.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix> {
        self.entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.entries.iter().map(|(n, m)| (n.as_str(), m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Accumulates `other` into `self` entrywise (used across time steps).
    pub fn accumulate(&mut self, other: &ModelParams) -> Result<()> {
        for (name, grad) in other.iter() {
            let slot = self
                .get_mut(name)
                .ok_or_else(|| Error::Config(format!("unknown parameter {name:?}")))?;
            slot.accumulate_from(grad)?;
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::new()
    }
}

/// Anything holding named trainable matrices.
pub trait HasParams {
    /// Mutable views of every parameter, in a stable order.
    fn param_slots(&mut self) -> Vec<(&str, &mut Matrix)>;

    /// A zeroed [`ModelParams`] mirroring this model's names and shapes.
    fn grads_template(&mut self) -> ModelParams {
        let mut grads = ModelParams::new();
        for (name, m) in self.param_slots() {
            let shape = m.shape();
            grads.insert(name, Matrix::zeros(shape.0, shape.1));
        }
        grads
    }
}

impl HasParams for ModelParams {
    fn param_slots(&mut self) -> Vec<(&str, &mut Matrix)> {
        self.entries
            .iter_mut()
            .map(|(n, m)| (n.as_str(), m))
            .collect()
    }
}

/// Plain stochastic gradient descent: `p <- p - lr * g`.
#[derive(Debug, Clone)]
pub struct SgdState {
    pub learning_rate: f64,
}

impl SgdState {
    /// A zero learning rate is accepted and makes the update an identity
    /// map, which is occasionally useful for no-op training runs.
    pub fn new(learning_rate: f64) -> Result<Self> {
        if learning_rate.is_nan() || learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be nonnegative, got {learning_rate}"
            )));
        }
        Ok(Self { learning_rate })
    }
}

pub fn sgd_step(params: &mut impl HasParams, grads: &ModelParams, state: &SgdState) -> Result<()> {
    for (name, p) in params.param_slots() {
        let g = grads
            .get(name)
            .ok_or_else(|| Error::Config(format!("missing gradient for {name:?}")))?;
        if g.shape() != p.shape() {
            return Err(Error::dim("sgd_step", p.shape(), g.shape()));
        }
        for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
            *pv -= state.learning_rate * gv;
        }
    }
    Ok(())
}

/// Adam optimizer state with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: ModelParams,
    v: ModelParams,
}

impl AdamState {
    /// Standard constants: beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    pub fn new(learning_rate: f64, template: &mut impl HasParams) -> Result<Self> {
        if learning_rate.is_nan() || learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be nonnegative, got {learning_rate}"
            )));
        }
        Ok(Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: template.grads_template(),
            v: template.grads_template(),
        })
    }

    #[cfg(test)]
    pub(crate) fn second_moment(&self) -> &ModelParams {
        &self.v
    }
}

pub fn adam_step(
    params: &mut impl HasParams,
    grads: &ModelParams,
    state: &mut AdamState,
) -> Result<()> {
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    for (name, p) in params.param_slots() {
        let g = grads
            .get(name)
            .ok_or_else(|| Error::Config(format!("missing gradient for {name:?}")))?;
        if g.shape() != p.shape() {
            return Err(Error::dim("adam_step", p.shape(), g.shape()));
        }
        let m = state
            .m
            .get_mut(name)
            .ok_or_else(|| Error::Config(format!("missing moment slot for {name:?}")))?;
        for (mv, gv) in m.data_mut().iter_mut().zip(g.data()) {
            *mv = state.beta1 * *mv + (1.0 - state.beta1) * gv;
        }
        let v = state
            .v
            .get_mut(name)
            .ok_or_else(|| Error::Config(format!("missing moment slot for {name:?}")))?;
        for (vv, gv) in v.data_mut().iter_mut().zip(g.data()) {
            *vv = state.beta2 * *vv + (1.0 - state.beta2) * gv * gv;
        }
        let m = state.m.get(name).unwrap();
        let v = state.v.get(name).unwrap();
        for ((pv, mv), vv) in p.data_mut().iter_mut().zip(m.data()).zip(v.data()) {
            let m_hat = mv / bc1;
            let v_hat = vv / bc2;
            *pv -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(value: f64) -> ModelParams {
        let mut p = ModelParams::new();
        p.insert("p", Matrix::from_vec(1, 1, vec![value]).unwrap());
        p
    }

    fn scalar_grad(value: f64) -> ModelParams {
        scalar_params(value)
    }

    fn value(p: &ModelParams) -> f64 {
        p.get("p").unwrap().get(0, 0)
    }

    #[test]
    fn sgd_zero_gradient_is_identity() {
        let mut p = scalar_params(1.0);
        sgd_step(&mut p, &scalar_grad(0.0), &SgdState::new(0.1).unwrap()).unwrap();
        assert_eq!(value(&p), 1.0);
    }

    #[test]
    fn sgd_forced_arithmetic() {
        let mut p = scalar_params(1.0);
        sgd_step(&mut p, &scalar_grad(2.0), &SgdState::new(0.1).unwrap()).unwrap();
        assert!((value(&p) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sgd_converges_on_quadratic_bowl() {
        // f(p) = p^2, so each step multiplies p by (1 - 2*lr) = 0.8.
        let mut p = scalar_params(1.0);
        let state = SgdState::new(0.1).unwrap();
        for _ in 0..100 {
            let g = scalar_grad(2.0 * value(&p));
            sgd_step(&mut p, &g, &state).unwrap();
        }
        assert!(value(&p).abs() < 1e-8, "p = {}", value(&p));
    }

    #[test]
    fn sgd_shape_mismatch_errors() {
        let mut p = scalar_params(1.0);
        let mut g = ModelParams::new();
        g.insert("p", Matrix::zeros(2, 1));
        assert!(sgd_step(&mut p, &g, &SgdState::new(0.1).unwrap()).is_err());
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut p = scalar_params(3.5);
        let mut state = AdamState::new(1e-3, &mut p).unwrap();
        adam_step(&mut p, &scalar_grad(0.0), &mut state).unwrap();
        assert_eq!(value(&p), 3.5);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // At t = 1 the bias corrections cancel, so the step is
        // lr * g / (|g| + eps) ~ lr for any constant positive gradient.
        for g in [0.5, 3.0, 42.0] {
            let mut p = scalar_params(1.0);
            let mut state = AdamState::new(1e-3, &mut p).unwrap();
            adam_step(&mut p, &scalar_grad(g), &mut state).unwrap();
            let moved = 1.0 - value(&p);
            assert!((moved - 1e-3).abs() < 1e-9, "g={g} moved={moved}");
        }
    }

    #[test]
    fn adam_converges_on_quadratic_bowl() {
        let mut p = scalar_params(1.0);
        let mut state = AdamState::new(1e-3, &mut p).unwrap();
        for _ in 0..5000 {
            let g = scalar_grad(2.0 * value(&p));
            adam_step(&mut p, &g, &mut state).unwrap();
        }
        assert!(value(&p).abs() < 1e-3, "p = {}", value(&p));
    }

    #[test]
    fn adam_second_moment_stays_nonnegative() {
        let mut rng = crate::numerics::Rng::new(31);
        let mut p = ModelParams::new();
        p.insert("w", Matrix::zeros(3, 2));
        let mut state = AdamState::new(1e-2, &mut p).unwrap();
        for _ in 0..200 {
            let mut g = ModelParams::new();
            let data = (0..6).map(|_| rng.uniform(-5.0, 5.0)).collect();
            g.insert("w", Matrix::from_vec(3, 2, data).unwrap());
            adam_step(&mut p, &g, &mut state).unwrap();
            assert!(state
                .second_moment()
                .get("w")
                .unwrap()
                .data()
                .iter()
                .all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn shapes_unchanged_by_updates() {
        let mut p = ModelParams::new();
        p.insert("w", Matrix::zeros(4, 3));
        p.insert("b", Matrix::zeros(1, 3));
        let mut g = ModelParams::new();
        g.insert("w", Matrix::zeros(4, 3));
        g.insert("b", Matrix::zeros(1, 3));
        let mut adam = AdamState::new(1e-3, &mut p).unwrap();
        adam_step(&mut p, &g, &mut adam).unwrap();
        sgd_step(&mut p, &g, &SgdState::new(0.1).unwrap()).unwrap();
        assert_eq!(p.get("w").unwrap().shape(), (4, 3));
        assert_eq!(p.get("b").unwrap().shape(), (1, 3));
    }

    #[test]
    fn rejects_negative_learning_rate() {
        assert!(SgdState::new(-1.0).is_err());
        assert!(SgdState::new(f64::NAN).is_err());
        let mut p = scalar_params(0.0);
        assert!(AdamState::new(-0.5, &mut p).is_err());
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let mut p = scalar_params(2.5);
        let g = scalar_grad(7.0);
        sgd_step(&mut p, &g, &SgdState::new(0.0).unwrap()).unwrap();
        assert_eq!(value(&p), 2.5);
        let mut state = AdamState::new(0.0, &mut p).unwrap();
        for _ in 0..5 {
            adam_step(&mut p, &g, &mut state).unwrap();
        }
        assert_eq!(value(&p), 2.5);
    }
}
