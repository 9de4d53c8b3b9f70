use alloc::vec;
use alloc::vec::Vec;

use super::encoder::{encode_mention_side, encode_type_side, Composer, Encoding};
use super::{Gradients, ModelParams};
use crate::linalg::{cosine, cosine_with_grad};
use crate::training::loss::{objective, ranking_loss, LossContext, LossError, LossInstance};

/// Loss of one instance under the context's settings.
pub fn evaluate_loss(inst: &LossInstance, params: &ModelParams, ctx: &LossContext<'_>) -> Result<f64, LossError> {
    let obj = objective(inst, ctx)?;
    let left = encode_mention_side(obj.head, obj.tuples, ctx.table, params)?.representation();
    let scores = obj
        .candidates
        .iter()
        .map(|c| Ok(cosine(&left, &encode_type_side(&c.head, &c.tuples, ctx.table, params)?.representation())))
        .collect::<Result<Vec<f64>, LossError>>()?;
    Ok(ranking_loss(obj.rule, &scores, params.margin).0)
}

/// Summed batch loss and its exact gradient, accumulated sequentially in
/// batch order. Relation matrices the batch uses must already exist in
/// `params` for their gradients to be recorded.
pub fn compute_gradients(
    batch: &[LossInstance],
    params: &ModelParams,
    ctx: &LossContext<'_>,
) -> Result<(f64, Gradients), LossError> {
    let mut grads = Gradients::zeros_like(params);
    let mut total = 0.0;
    for inst in batch {
        total += accumulate(inst, params, ctx, &mut grads)?;
    }
    Ok((total, grads))
}

fn accumulate(inst: &LossInstance, params: &ModelParams, ctx: &LossContext<'_>, grads: &mut Gradients) -> Result<f64, LossError> {
    let obj = objective(inst, ctx)?;
    let left = encode_mention_side(obj.head, obj.tuples, ctx.table, params)?;
    let left_rep = left.representation();
    let right = obj
        .candidates
        .iter()
        .map(|c| encode_type_side(&c.head, &c.tuples, ctx.table, params))
        .collect::<Result<Vec<Encoding>, _>>()?;
    let mut scores = Vec::with_capacity(right.len());
    let mut partials = Vec::with_capacity(right.len());
    for r in &right {
        let (c, da, db) = cosine_with_grad(&left_rep, &r.representation());
        scores.push(c);
        partials.push((da, db));
    }
    let (loss, coeff) = ranking_loss(obj.rule, &scores, params.margin);
    if loss == 0.0 {
        return Ok(0.0);
    }
    let mut d_left = vec![0.0; left_rep.len()];
    for ((enc, (da, db)), &w) in right.iter().zip(&partials).zip(&coeff) {
        if w == 0.0 {
            continue;
        }
        for (g, x) in d_left.iter_mut().zip(da) {
            *g += w * x;
        }
        let d_right: Vec<f64> = db.iter().map(|x| w * x).collect();
        backward(enc, &d_right, params, grads);
    }
    backward(&left, &d_left, params, grads);
    Ok(loss)
}

/// Backpropagates `∂L/∂[head; pooled]` through pooling, convolution, and
/// composition into `grads`. Embeddings are frozen, so the head part is
/// dropped.
pub fn backward(enc: &Encoding, d_rep: &[f64], params: &ModelParams, grads: &mut Gradients) {
    let d_pooled = &d_rep[params.d..];
    let mut d_pre: Vec<Option<Vec<f64>>> = vec![None; enc.tuples.len()];
    for (f, arg) in enc.argmax.iter().enumerate() {
        let Some(i) = *arg else { continue };
        let g = d_pooled[f];
        if g == 0.0 {
            continue;
        }
        let h = enc.hidden[i][f];
        d_pre[i].get_or_insert_with(|| vec![0.0; params.filters])[f] += g * (1.0 - h * h);
    }
    let n = 2 * params.d;
    for (trace, dz) in enc.tuples.iter().zip(d_pre) {
        let Some(dz) = dz else { continue };
        grads.conv_w.add_outer(1.0, &dz, &trace.output);
        for (b, z) in grads.conv_b.iter_mut().zip(&dz) {
            *b += z;
        }
        let dc = params.conv_w.transpose_mul_vec(&dz);
        let du: Vec<f64> = dc.iter().zip(&trace.output).map(|(g, c)| g * (1.0 - c * c)).collect();
        match &trace.composer {
            Composer::Relation(label) => {
                if params.relations.contains_key(label) {
                    // out = tanh(x · M): ∂/∂M[a][b] = x[a] · du[b]
                    grads.relation_mut(label, n).add_outer(1.0, &trace.input, &du);
                }
            }
            Composer::Tensor => {
                // out[k] = tanh(xᵀ U[k] x): ∂/∂U[k][a][b] = du[k] · x[a] · x[b]
                let x = &trace.input;
                for (k, &g) in du.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let slice = grads.tensor.slice_mut(k);
                    for (a, &xa) in x.iter().enumerate() {
                        let s = g * xa;
                        for (cell, &xb) in slice[a * n..(a + 1) * n].iter_mut().zip(x) {
                            *cell += s * xb;
                        }
                    }
                }
            }
        }
    }
}
