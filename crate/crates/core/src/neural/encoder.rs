use alloc::string::String;
use alloc::vec::Vec;

use super::{check_len, conv_tuple, pool_argmax, ModelParams, NeuralError};
use crate::embedding::EmbeddingTable;
use crate::linalg::{bilinear, concat, cosine, tanh_in_place};
use crate::structures::{ArgumentPath, MentionStructure, MentionTuple, RolePath, TypeStructure, TypeTuple};

#[derive(Debug, Clone, PartialEq)]
pub enum Composer {
    /// Relation matrix for this label; identity when the model has none.
    Relation(String),
    Tensor,
}

#[derive(Debug, Clone)]
pub(crate) struct TupleTrace {
    pub(crate) composer: Composer,
    pub(crate) input: Vec<f64>,
    pub(crate) output: Vec<f64>,
}

/// Forward pass of one structure, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub head: Vec<f64>,
    pub pooled: Vec<f64>,
    pub(crate) tuples: Vec<TupleTrace>,
    pub(crate) hidden: Vec<Vec<f64>>,
    pub(crate) argmax: Vec<Option<usize>>,
}

impl Encoding {
    /// `[V_head; V_S]`, length `d + F`.
    pub fn representation(&self) -> Vec<f64> {
        concat(&self.head, &self.pooled)
    }
}

fn finish(head: Vec<f64>, tuples: Vec<TupleTrace>, params: &ModelParams) -> Encoding {
    let hidden: Vec<Vec<f64>> = tuples.iter().map(|t| conv_tuple(&t.output, params)).collect();
    let (pooled, argmax) = pool_argmax(&hidden, params.filters);
    Encoding { head, pooled, tuples, hidden, argmax }
}

fn check_table(table: &EmbeddingTable, params: &ModelParams) -> Result<(), NeuralError> {
    check_len(table.dim(), params.d)
}

/// Encodes a head key plus relation-composed tuples (mention structures
/// and argument paths).
pub fn encode_mention_side(
    head_key: &str,
    tuples: &[MentionTuple],
    table: &EmbeddingTable,
    params: &ModelParams,
) -> Result<Encoding, NeuralError> {
    check_table(table, params)?;
    let traces = tuples
        .iter()
        .map(|t| {
            let input = concat(&table.lookup(&t.left), &table.lookup(&t.right));
            let mut output = match params.relations.get(&t.relation) {
                Some(m) => m.left_mul(&input),
                None => input.clone(),
            };
            tanh_in_place(&mut output);
            TupleTrace { composer: Composer::Relation(t.relation.clone()), input, output }
        })
        .collect();
    Ok(finish(table.lookup(head_key).into_owned(), traces, params))
}

/// Encodes a head key plus tensor-composed `<type, role>` tuples (type
/// structures and role paths).
pub fn encode_type_side(
    head_key: &str,
    tuples: &[TypeTuple],
    table: &EmbeddingTable,
    params: &ModelParams,
) -> Result<Encoding, NeuralError> {
    check_table(table, params)?;
    let n = params.tensor.n();
    check_len(n, 2 * params.d)?;
    let traces = tuples
        .iter()
        .map(|t| {
            let input = concat(&table.lookup(&t.type_name), &table.lookup(&t.role));
            let output = (0..n).map(|k| libm::tanh(bilinear(params.tensor.slice(k), &input))).collect();
            TupleTrace { composer: Composer::Tensor, input, output }
        })
        .collect();
    Ok(finish(table.lookup(head_key).into_owned(), traces, params))
}

/// `cos([V_t; V_{S_t}], [V_y; V_{S_y}])` with shared convolution weights.
pub fn mention_score(
    mention: &MentionStructure,
    type_s: &TypeStructure,
    table: &EmbeddingTable,
    params: &ModelParams,
) -> Result<f64, NeuralError> {
    let m = encode_mention_side(&mention.trigger_key, &mention.tuples[..mention.real_count], table, params)?;
    let y = encode_type_side(&type_s.type_key, &type_s.tuples[..type_s.real_count], table, params)?;
    Ok(cosine(&m.representation(), &y.representation()))
}

/// `cos([V_a; V_{S_a}], [V_r; V_{S_r}])`.
pub fn argument_score(
    path: &ArgumentPath,
    role: &RolePath,
    table: &EmbeddingTable,
    params: &ModelParams,
) -> Result<f64, NeuralError> {
    let a = encode_mention_side(&path.argument_key, &path.tuples[..path.real_count], table, params)?;
    let r = encode_type_side(&role.role_key, core::slice::from_ref(&role.tuple), table, params)?;
    Ok(cosine(&a.representation(), &r.representation()))
}

impl core::fmt::Display for Composer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Composer::Relation(r) => f.write_str(r),
            Composer::Tensor => f.write_str("<tensor>"),
        }
    }
}
