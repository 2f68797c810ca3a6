//! Error-correcting output codes: coding matrices, per-column training,
//! nearest-codeword decoding, and the correct-decoding bound.

mod code;
mod model;

pub use code::{
    hamming_distance, min_code_distance, min_code_length, one_vs_all_code, random_code,
    validate_code, CodeViolation, CodingMatrix,
};
pub use model::{
    decode_bits, decode_vector, ecoc_decode_hard, ecoc_decode_soft, ecoc_train, DecodeResult,
    Decoding, EcocModel, PicModel,
};

use crate::error::{Error, Result};
use crate::stats::binomial_range;

/// Default code length for benchmarks.
pub const DEFAULT_CODE_LENGTH: usize = 150;

/// Lower bound on the probability of decoding correctly when each of the
/// `n` PiCs errs independently with probability at most `p_prime`:
/// `Σ_{k=0}^{⌊Δmin/2⌋} C(n,k) p′^k (1−p′)^(n−k)`.
pub fn correct_classification_bound(n: usize, delta_min: usize, p_prime: f64) -> Result<f64> {
    if delta_min == 0 || delta_min > n {
        return Err(Error::Range(format!(
            "minimum distance {delta_min} not in [1, {n}]"
        )));
    }
    if !(0.0..0.5).contains(&p_prime) {
        return Err(Error::Range(format!("p' = {p_prime} not in [0, 0.5)")));
    }
    Ok(binomial_range(n as u64, 0, (delta_min / 2) as u64, p_prime))
}
