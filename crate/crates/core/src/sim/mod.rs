//! Monte Carlo simulation of the block-Markov superposition scheme with
//! Gelfand–Pinsker binning, at desk scale.
//!
//! One trial sends `blocks - 1` fresh message pairs over `blocks` blocks of
//! length `n`. Each block superimposes the fresh messages on a cloud center
//! whose index (the helping index) resolves what the receiver could not
//! decide about the previous block.

mod codebook;
mod trial;
mod typical;

use serde::{Deserialize, Serialize};

pub use codebook::{generate_codebooks, CodebookEnsemble, SatelliteBook};
pub use trial::{apply_encoder, gp_bin_search, run_simulation, run_trial, Simulator, TrialOutcome};
pub use typical::{is_typical, TypicalityTest};

use crate::channel::{Causality, SchemeKind};
use crate::error::{Error, Result};
use crate::region::DEFAULT_SEED;

pub const MAX_BLOCK_LENGTH: usize = 32;
pub const MAX_BOOK_SIZE: usize = 1 << 16;
pub const MAX_ALPHABET: usize = 4;
/// Cap on the total number of stored codeword symbols in one ensemble.
pub const MAX_CODEBOOK_SYMBOLS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Block length.
    pub n: usize,
    /// Number of blocks, including the final block that carries no fresh
    /// messages.
    pub blocks: usize,
    /// Cloud-center (helping index) rate.
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// Within-bin rates of the Gelfand–Pinsker bins.
    pub rp1: f64,
    pub rp2: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Reject repeated codewords inside each book.
    #[serde(default)]
    pub distinct_codewords: bool,
}

impl Default for CodeParams {
    fn default() -> Self {
        CodeParams {
            n: 16,
            blocks: 4,
            r0: 0.0,
            r1: 0.0,
            r2: 0.0,
            rp1: 0.0,
            rp2: 0.0,
            epsilon: 0.5,
            trials: 100,
            seed: DEFAULT_SEED,
            distinct_codewords: false,
        }
    }
}

impl CodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("block length must be at least 1"));
        }
        if self.blocks < 2 {
            return Err(Error::config("at least two blocks are needed"));
        }
        if self.trials == 0 {
            return Err(Error::config("at least one trial is needed"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for (name, r) in [
            ("r0", self.r0),
            ("r1", self.r1),
            ("r2", self.r2),
            ("rp1", self.rp1),
            ("rp2", self.rp2),
        ] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::config(format!("rate {name} = {r} must be a nonnegative number")));
            }
        }
        if self.n > MAX_BLOCK_LENGTH {
            return Err(Error::size(format!(
                "block length {} exceeds the cap of {MAX_BLOCK_LENGTH}",
                self.n
            )));
        }
        Ok(())
    }
}

/// `ceil(2^{n R})`, with a little slack so that `n R` landing a hair above
/// an integer does not add a codeword.
pub fn book_size(n: usize, rate: f64) -> Result<usize> {
    let size = ((n as f64 * rate).exp2() - 1e-9).ceil().max(1.0);
    if size > MAX_BOOK_SIZE as f64 {
        return Err(Error::size(format!(
            "2^({n} * {rate}) codewords exceeds the per-book cap of {MAX_BOOK_SIZE}"
        )));
    }
    Ok(size as usize)
}

/// Codebook dimensions after rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BookSizes {
    /// Cloud centers.
    pub m0: usize,
    /// Bins (messages) of each transmitter.
    pub m1: usize,
    pub m2: usize,
    /// Sequences per bin; 1 unless states are known non-causally.
    pub w1: usize,
    pub w2: usize,
}

impl BookSizes {
    pub fn new(params: &CodeParams, kind: &SchemeKind) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let binned = kind.causality == Causality::NonCausal;
        let sizes = BookSizes {
            m0: book_size(n, params.r0)?,
            m1: book_size(n, params.r1)?,
            m2: book_size(n, params.r2)?,
            w1: if binned { book_size(n, params.rp1)? } else { 1 },
            w2: if binned { book_size(n, params.rp2)? } else { 1 },
        };
        for (k, total) in [(1, sizes.m1 * sizes.w1), (2, sizes.m2 * sizes.w2)] {
            if total > MAX_BOOK_SIZE {
                return Err(Error::size(format!(
                    "codebook of transmitter {k} holds {total} sequences, cap is {MAX_BOOK_SIZE}"
                )));
            }
        }
        Ok(sizes)
    }

    pub(crate) fn check_caps(&self, n: usize) -> Result<()> {
        let symbols = self.m0 * (self.m1 * self.w1 + self.m2 * self.w2 + 1) * n;
        if symbols > MAX_CODEBOOK_SYMBOLS {
            return Err(Error::size(format!(
                "codebook ensemble needs {symbols} symbols, cap is {MAX_CODEBOOK_SYMBOLS}"
            )));
        }
        Ok(())
    }

    /// Rates actually carried after rounding the codebook sizes.
    pub fn rounded_rates(&self, n: usize) -> (f64, f64) {
        let r = |m: usize| (m as f64).log2() / n as f64;
        (r(self.m1), r(self.m2))
    }
}

/// Aggregate outcome of a simulation. Event counts are numbers of blocks in
/// which the event happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Blocks in which some transmitter found no typical sequence in its bin.
    pub encode_failures: u64,
    /// Blocks after the first in which the receiver missed the cloud index.
    pub decode_m0_errors: u64,
    /// Blocks in which a fed-back transmitter got the other's message wrong.
    pub cross_decode_errors: u64,
    /// Trials in which at least one of the message pairs was decoded wrong.
    pub final_message_errors: u64,
    pub error_rate: f64,
    /// `(R1 (B-1)/B, R2 (B-1)/B)` with the rounded rates.
    pub effective_rates: (f64, f64),
}
