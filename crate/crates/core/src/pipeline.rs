//! Transform, score and decode one posterior matrix.

use crate::decoder::{viterbi_decode, DecodingResult, HmmModel};
use crate::error::Result;
use crate::mink::LossOrder;
use crate::posterior::{to_log_scores, transform_matrix, PosteriorMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOptions {
    pub order: LossOrder,
    pub renormalize: bool,
    pub priors: Option<Vec<f64>>,
}

impl DecodeOptions {
    pub fn new(order: LossOrder) -> Self {
        DecodeOptions {
            order,
            renormalize: true,
            priors: None,
        }
    }
}

pub fn decode_posteriors(
    posteriors: &PosteriorMatrix,
    hmm: &HmmModel,
    options: &DecodeOptions,
) -> Result<DecodingResult> {
    let transformed = transform_matrix(posteriors, options.order, options.renormalize)?;
    let scores = to_log_scores(&transformed, options.priors.as_deref())?;
    viterbi_decode(&scores, hmm)
}
