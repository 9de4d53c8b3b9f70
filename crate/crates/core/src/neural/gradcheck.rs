use super::{compute_gradients, evaluate_loss, ModelParams, NeuralError};
use crate::training::loss::{LossContext, LossError, LossInstance};

pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Compares analytic gradients against central differences over every
/// parameter coordinate and returns the largest
/// `|analytic − numeric| / max(1e-8, |analytic| + |numeric|)`.
///
/// Relation matrices the instance reads are created first if missing.
pub fn finite_diff_check(
    params: &ModelParams,
    instance: &LossInstance,
    ctx: &LossContext<'_>,
    epsilon: f64,
) -> Result<f64, LossError> {
    if !(epsilon > 0.0) {
        return Err(NeuralError::Epsilon(epsilon).into());
    }
    let mut p = params.clone();
    for label in instance.relations() {
        p.ensure_relation(label);
    }
    let batch = core::slice::from_ref(instance);
    let (_, grads) = compute_gradients(batch, &p, ctx)?;
    let analytic = grads.blocks_for(&p);
    let mut worst: f64 = 0.0;
    for (block, expected) in analytic.iter().enumerate() {
        for (i, &a) in expected.iter().enumerate() {
            let original = p.blocks()[block][i];
            p.blocks_mut()[block][i] = original + epsilon;
            let plus = evaluate_loss(instance, &p, ctx)?;
            p.blocks_mut()[block][i] = original - epsilon;
            let minus = evaluate_loss(instance, &p, ctx)?;
            p.blocks_mut()[block][i] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            let err = (a - numeric).abs() / f64::max(1e-8, a.abs() + numeric.abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Whether central differences at `epsilon` and `epsilon / 100` agree on
/// every coordinate. When they do not, a max-pooling or hinge switch lies
/// within the step and a finite-difference comparison at `epsilon` is not
/// meaningful for this instance.
pub fn smooth_within(
    params: &ModelParams,
    instance: &LossInstance,
    ctx: &LossContext<'_>,
    epsilon: f64,
) -> Result<bool, LossError> {
    if !(epsilon > 0.0) {
        return Err(NeuralError::Epsilon(epsilon).into());
    }
    let mut p = params.clone();
    for label in instance.relations() {
        p.ensure_relation(label);
    }
    let blocks = p.blocks().len();
    for block in 0..blocks {
        for i in 0..p.blocks()[block].len() {
            let original = p.blocks()[block][i];
            let mut central = |h: f64| -> Result<f64, LossError> {
                p.blocks_mut()[block][i] = original + h;
                let plus = evaluate_loss(instance, &p, ctx)?;
                p.blocks_mut()[block][i] = original - h;
                let minus = evaluate_loss(instance, &p, ctx)?;
                p.blocks_mut()[block][i] = original;
                Ok((plus - minus) / (2.0 * h))
            };
            let coarse = central(epsilon)?;
            let fine = central(epsilon / 100.0)?;
            if (coarse - fine).abs() > 1e-5 * f64::max(1e-6, coarse.abs() + fine.abs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
