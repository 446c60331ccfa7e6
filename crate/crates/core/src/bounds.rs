//! Right-hand sides of the rate inequalities for one scheme distribution.
//!
//! Each region is a pentagon `R1 <= a, R2 <= b, R1 + R2 <= c`. The
//! evaluators share one set of information terms computed from the joint
//! table; the Cover–Leung evaluator is a separate route that never builds
//! the nine-variable table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{build_joint, validate, var, SchemeDistribution};
use crate::error::{Error, Result};
use crate::prob::JointTable;

/// Region identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Two-sided feedback, non-causal states.
    FullNonCausal,
    /// Two-sided feedback, causal states.
    FullCausal,
    /// Two-sided feedback, strictly causal states.
    FullStrict,
    /// Feedback to transmitter 1 only, non-causal states.
    PartialNonCausal,
    PartialCausal,
    PartialStrict,
    /// No feedback, `U` degenerate.
    NoFeedback,
    /// The classical feedback region with the states averaged out.
    CoverLeung,
}

impl Theorem {
    pub const NUMBERED: [Theorem; 6] = [
        Theorem::FullNonCausal,
        Theorem::FullCausal,
        Theorem::FullStrict,
        Theorem::PartialNonCausal,
        Theorem::PartialCausal,
        Theorem::PartialStrict,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Theorem::FullNonCausal => "1",
            Theorem::FullCausal => "2",
            Theorem::FullStrict => "3",
            Theorem::PartialNonCausal => "4",
            Theorem::PartialCausal => "5",
            Theorem::PartialStrict => "6",
            Theorem::NoFeedback => "no-feedback",
            Theorem::CoverLeung => "cover-leung",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = Theorem::NUMBERED
            .iter()
            .chain(&[Theorem::NoFeedback, Theorem::CoverLeung]);
        all.copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown theorem `{s}`")))
    }
}

/// An `(R1, R2, R1+R2)` bound triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTriple {
    pub r1: f64,
    pub r2: f64,
    pub rsum: f64,
}

impl BoundTriple {
    pub fn max_abs_diff(&self, other: &BoundTriple) -> f64 {
        (self.r1 - other.r1)
            .abs()
            .max((self.r2 - other.r2).abs())
            .max((self.rsum - other.rsum).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub theorem: Theorem,
    pub r1_max: f64,
    pub r2_max: f64,
    pub rsum_max: f64,
    /// Values before clamping at zero.
    pub pre_clamp: BoundTriple,
}

impl RateBounds {
    fn from_raw(theorem: Theorem, r1: f64, r2: f64, rsum: f64) -> Self {
        RateBounds {
            theorem,
            r1_max: r1.max(0.0),
            r2_max: r2.max(0.0),
            rsum_max: rsum.max(0.0),
            pre_clamp: BoundTriple { r1, r2, rsum },
        }
    }

    pub fn clamped(&self) -> BoundTriple {
        BoundTriple {
            r1: self.r1_max,
            r2: self.r2_max,
            rsum: self.rsum_max,
        }
    }
}

/// Every mutual information the evaluators need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationTerms {
    /// I(V1; Y | U V2)
    pub v1_y_given_u_v2: f64,
    /// I(V1; Y | U V2 S0 S2)
    pub v1_y_given_u_v2_s0_s2: f64,
    /// I(V2; Y | U V1)
    pub v2_y_given_u_v1: f64,
    /// I(V2; Y | U V1 S0 S1)
    pub v2_y_given_u_v1_s0_s1: f64,
    /// I(V1 V2; Y)
    pub v1v2_y: f64,
    /// I(U; Y)
    pub u_y: f64,
    /// I(V1; S0 S1 | U), the binning cost of transmitter 1.
    pub v1_state_given_u: f64,
    /// I(V2; S0 S2 | U)
    pub v2_state_given_u: f64,
    /// I(V1; Y | V2)
    pub v1_y_given_v2: f64,
    /// I(V2; Y | V1)
    pub v2_y_given_v1: f64,
    /// I(V1; S0 S1)
    pub v1_state: f64,
    /// I(V2; S0 S2)
    pub v2_state: f64,
}

impl InformationTerms {
    pub fn from_joint(j: &JointTable) -> Result<Self> {
        use var::*;
        Ok(InformationTerms {
            v1_y_given_u_v2: j.mutual_info(&[V1], &[Y], &[U, V2])?,
            v1_y_given_u_v2_s0_s2: j.mutual_info(&[V1], &[Y], &[U, V2, S0, S2])?,
            v2_y_given_u_v1: j.mutual_info(&[V2], &[Y], &[U, V1])?,
            v2_y_given_u_v1_s0_s1: j.mutual_info(&[V2], &[Y], &[U, V1, S0, S1])?,
            v1v2_y: j.mutual_info(&[V1, V2], &[Y], &[])?,
            u_y: j.mutual_info(&[U], &[Y], &[])?,
            v1_state_given_u: j.mutual_info(&[V1], &[S0, S1], &[U])?,
            v2_state_given_u: j.mutual_info(&[V2], &[S0, S2], &[U])?,
            v1_y_given_v2: j.mutual_info(&[V1], &[Y], &[V2])?,
            v2_y_given_v1: j.mutual_info(&[V2], &[Y], &[V1])?,
            v1_state: j.mutual_info(&[V1], &[S0, S1], &[])?,
            v2_state: j.mutual_info(&[V2], &[S0, S2], &[])?,
        })
    }

    pub fn of(p: &SchemeDistribution) -> Result<Self> {
        InformationTerms::from_joint(&build_joint(p)?)
    }

    /// Evaluates one region's inequalities. `NoFeedback` does not check the
    /// degenerate-`U` precondition here; [`bounds_nofeedback`] does.
    pub fn bounds(&self, theorem: Theorem) -> RateBounds {
        let t = self;
        let pen1 = t.v1_state_given_u;
        let pen2 = t.v2_state_given_u;
        let full_r1 = t.v1_y_given_u_v2.min(t.v1_y_given_u_v2_s0_s2);
        let full_r2 = t.v2_y_given_u_v1.min(t.v2_y_given_u_v1_s0_s1);
        let partial_r2 = (t.v2_y_given_u_v1 + t.u_y).min(t.v2_y_given_u_v1_s0_s1);
        let (r1, r2, rsum) = match theorem {
            Theorem::FullNonCausal => (full_r1 - pen1, full_r2 - pen2, t.v1v2_y - pen1 - pen2),
            Theorem::FullCausal => (full_r1, full_r2, t.v1v2_y),
            Theorem::FullStrict | Theorem::PartialStrict | Theorem::CoverLeung => {
                (t.v1_y_given_u_v2, t.v2_y_given_u_v1, t.v1v2_y)
            }
            Theorem::PartialNonCausal => (
                t.v1_y_given_u_v2 - pen1,
                partial_r2 - pen2,
                t.v1v2_y - pen1 - pen2,
            ),
            Theorem::PartialCausal => (t.v1_y_given_u_v2, partial_r2, t.v1v2_y),
            Theorem::NoFeedback => (
                t.v1_y_given_v2 - t.v1_state,
                t.v2_y_given_v1 - t.v2_state,
                t.v1v2_y - t.v1_state - t.v2_state,
            ),
        };
        RateBounds::from_raw(theorem, r1, r2, rsum)
    }
}

fn terms_checked(p: &SchemeDistribution) -> Result<InformationTerms> {
    let report = validate(p);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    InformationTerms::of(p)
}

/// Two-sided feedback, non-causal states.
pub fn bounds_thm1(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::FullNonCausal))
}

/// Two-sided feedback, causal states: the non-causal bounds without the
/// binning penalties.
pub fn bounds_thm2(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::FullCausal))
}

/// Two-sided feedback, strictly causal states.
pub fn bounds_thm3(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::FullStrict))
}

/// Partial feedback, non-causal states.
pub fn bounds_thm4(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::PartialNonCausal))
}

pub fn bounds_thm5(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::PartialCausal))
}

/// Same expressions as [`bounds_thm3`].
pub fn bounds_thm6(p: &SchemeDistribution) -> Result<RateBounds> {
    Ok(terms_checked(p)?.bounds(Theorem::PartialStrict))
}

/// Region without feedback links. Requires `|U| = 1`.
pub fn bounds_nofeedback(p: &SchemeDistribution) -> Result<RateBounds> {
    if p.pu.len() != 1 {
        return Err(Error::Precondition(format!(
            "the no-feedback region needs a degenerate U, got |U| = {}",
            p.pu.len()
        )));
    }
    Ok(terms_checked(p)?.bounds(Theorem::NoFeedback))
}

/// Dispatches on `theorem`.
pub fn bounds(theorem: Theorem, p: &SchemeDistribution) -> Result<RateBounds> {
    match theorem {
        Theorem::NoFeedback => bounds_nofeedback(p),
        Theorem::CoverLeung => bounds_cover_leung(p),
        t => Ok(terms_checked(p)?.bounds(t)),
    }
}

/// `R1 <= I(V1;Y|UV2)`, `R2 <= I(V2;Y|UV1)`, `R1+R2 <= I(V1V2;Y)`, evaluated
/// on `p(u,v1,v2,y)` summed directly from the factorization and with each
/// information term written as an explicit log-ratio sum.
pub fn bounds_cover_leung(p: &SchemeDistribution) -> Result<RateBounds> {
    let report = validate(p);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let sz = p.sizes();
    let (nu, n1, n2, ny) = (sz.u, sz.v1, sz.v2, sz.y);
    let at = |u: usize, a: usize, b: usize, y: usize| ((u * n1 + a) * n2 + b) * ny + y;
    let mut q = vec![0.0f64; nu * n1 * n2 * ny];
    let st = &p.states;
    for (s0, w0) in st.q0.iter().enumerate() {
        for (s1, w1) in st.q1.iter().enumerate() {
            for (s2, w2) in st.q2.iter().enumerate() {
                for (u, wu) in p.pu.iter().enumerate() {
                    for (a, pa) in p.pv1.slice(&[u, s0, s1]).iter().enumerate() {
                        let x1 = p.f1.apply(u, a, s0, s1);
                        for (b, pb) in p.pv2.slice(&[u, s0, s2]).iter().enumerate() {
                            let x2 = p.f2.apply(u, b, s0, s2);
                            let w = w0 * w1 * w2 * wu * pa * pb;
                            for (y, py) in p.kernel.slice(s0, s1, s2, x1, x2).iter().enumerate() {
                                q[at(u, a, b, y)] += w * py;
                            }
                        }
                    }
                }
            }
        }
    }

    // I(V1;Y|U,V2) = sum p(u,a,b,y) log p(u,a,b,y) p(u,b) / (p(u,a,b) p(u,b,y))
    let mut p_uab = vec![0.0; nu * n1 * n2];
    let mut p_uby = vec![0.0; nu * n2 * ny];
    let mut p_uay = vec![0.0; nu * n1 * ny];
    let mut p_ub = vec![0.0; nu * n2];
    let mut p_ua = vec![0.0; nu * n1];
    let mut p_ab = vec![0.0; n1 * n2];
    let mut p_y = vec![0.0; ny];
    for u in 0..nu {
        for a in 0..n1 {
            for b in 0..n2 {
                for y in 0..ny {
                    let w = q[at(u, a, b, y)];
                    p_uab[(u * n1 + a) * n2 + b] += w;
                    p_uby[(u * n2 + b) * ny + y] += w;
                    p_uay[(u * n1 + a) * ny + y] += w;
                    p_ub[u * n2 + b] += w;
                    p_ua[u * n1 + a] += w;
                    p_ab[a * n2 + b] += w;
                    p_y[y] += w;
                }
            }
        }
    }
    let mut p_aby = vec![0.0; n1 * n2 * ny];
    for u in 0..nu {
        for a in 0..n1 {
            for b in 0..n2 {
                for y in 0..ny {
                    p_aby[(a * n2 + b) * ny + y] += q[at(u, a, b, y)];
                }
            }
        }
    }
    let (mut i1, mut i2, mut isum) = (0.0f64, 0.0f64, 0.0f64);
    for u in 0..nu {
        for a in 0..n1 {
            for b in 0..n2 {
                for y in 0..ny {
                    let w = q[at(u, a, b, y)];
                    if w <= 0.0 {
                        continue;
                    }
                    let uab = p_uab[(u * n1 + a) * n2 + b];
                    i1 += w * (w * p_ub[u * n2 + b] / (uab * p_uby[(u * n2 + b) * ny + y])).log2();
                    i2 += w * (w * p_ua[u * n1 + a] / (uab * p_uay[(u * n1 + a) * ny + y])).log2();
                }
            }
        }
    }
    for a in 0..n1 {
        for b in 0..n2 {
            for y in 0..ny {
                let w = p_aby[(a * n2 + b) * ny + y];
                if w > 0.0 {
                    isum += w * (w / (p_ab[a * n2 + b] * p_y[y])).log2();
                }
            }
        }
    }
    Ok(RateBounds::from_raw(Theorem::CoverLeung, i1, i2, isum))
}
