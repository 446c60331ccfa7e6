//! Cross-checks between the region evaluators that must hold for every
//! scheme distribution: binning penalties, arm orderings, the identical
//! strictly causal regions, and the collapse to the classical feedback
//! region when the states are trivial.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bounds_cover_leung, BoundTriple, InformationTerms, RateBounds, Theorem};
use crate::channel::{build_joint_capped, ChannelKernel, StateModel};
use crate::error::Result;
use crate::region::{sample_scheme, SearchParams};

/// Deviations above this fail a check.
pub const REDUCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Largest deviation seen over all samples. For the one-sided checks
    /// this is the largest amount by which the ordering was violated.
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub samples: usize,
    pub seed: u64,
    pub null_states: bool,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

fn diff(a: &RateBounds, b: &RateBounds) -> BoundTriple {
    BoundTriple {
        r1: a.pre_clamp.r1 - b.pre_clamp.r1,
        r2: a.pre_clamp.r2 - b.pre_clamp.r2,
        rsum: a.pre_clamp.rsum - b.pre_clamp.rsum,
    }
}

fn excess(lower: f64, upper: f64) -> f64 {
    (lower - upper).max(0.0)
}

/// Deviations of one sample, in the order of [`CHECK_NAMES`]; `None` where a
/// check does not apply.
fn deviations(
    model: &StateModel,
    kernel: &ChannelKernel,
    search: &SearchParams,
    index: usize,
) -> Result<Vec<Option<f64>>> {
    let p = sample_scheme(Theorem::FullNonCausal, model, kernel, search, index)?;
    let t = InformationTerms::from_joint(&build_joint_capped(&p, search.cell_cap)?)?;
    let b = |th| t.bounds(th);
    let (b1, b2, b3) = (b(Theorem::FullNonCausal), b(Theorem::FullCausal), b(Theorem::FullStrict));
    let (b4, b5, b6) = (
        b(Theorem::PartialNonCausal),
        b(Theorem::PartialCausal),
        b(Theorem::PartialStrict),
    );
    let penalties = BoundTriple {
        r1: t.v1_state_given_u,
        r2: t.v2_state_given_u,
        rsum: t.v1_state_given_u + t.v2_state_given_u,
    };
    let direct = bounds_cover_leung(&p)?;

    let collapse = model.is_null().then(|| {
        [&b2, &b3, &direct]
            .iter()
            .map(|o| b1.pre_clamp.max_abs_diff(&o.pre_clamp))
            .fold(0.0, f64::max)
    });

    // Without rate splitting: same draw with the cloud center removed.
    let q = sample_scheme(Theorem::NoFeedback, model, kernel, search, index)?;
    let tq = InformationTerms::from_joint(&build_joint_capped(&q, search.cell_cap)?)?;
    let (nf, full) = (tq.bounds(Theorem::NoFeedback), tq.bounds(Theorem::FullNonCausal));
    let no_feedback = excess(full.pre_clamp.r1, nf.pre_clamp.r1)
        .max(excess(full.pre_clamp.r2, nf.pre_clamp.r2))
        .max((full.pre_clamp.rsum - nf.pre_clamp.rsum).abs());

    Ok(vec![
        Some(diff(&b2, &b1).max_abs_diff(&penalties)),
        Some(diff(&b5, &b4).max_abs_diff(&penalties)),
        Some(b6.pre_clamp.max_abs_diff(&b3.pre_clamp)),
        Some(b3.pre_clamp.max_abs_diff(&direct.pre_clamp)),
        Some(excess(b2.pre_clamp.r1, b3.pre_clamp.r1).max(excess(b2.pre_clamp.r2, b3.pre_clamp.r2))),
        Some(excess(b1.pre_clamp.r1, b4.pre_clamp.r1)),
        Some(no_feedback),
        collapse,
    ])
}

pub const CHECK_NAMES: [&str; 8] = [
    "full-causal-minus-noncausal-is-penalty",
    "partial-causal-minus-noncausal-is-penalty",
    "partial-strict-equals-full-strict",
    "strict-equals-direct-summation",
    "strict-dominates-causal",
    "partial-r1-dominates-full-r1",
    "no-feedback-dominates-full-noncausal",
    "null-state-collapse",
];

/// Evaluates every applicable check on `search.samples` scheme
/// distributions drawn as in a region search.
pub fn check_reductions(
    model: &StateModel,
    kernel: &ChannelKernel,
    search: &SearchParams,
) -> Result<ReductionReport> {
    let per_sample: Vec<Vec<Option<f64>>> = (0..search.samples)
        .into_par_iter()
        .map(|i| deviations(model, kernel, search, i))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (k, name) in CHECK_NAMES.iter().enumerate() {
        let seen: Vec<f64> = per_sample.iter().filter_map(|d| d[k]).collect();
        if seen.is_empty() {
            continue;
        }
        let max_deviation = seen.iter().copied().fold(0.0, f64::max);
        checks.push(IdentityCheck {
            name: name.to_string(),
            max_deviation,
            passed: max_deviation <= REDUCTION_TOLERANCE,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ReductionReport {
        samples: search.samples,
        seed: search.seed,
        null_states: model.is_null(),
        checks,
        passed,
    })
}
