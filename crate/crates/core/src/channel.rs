//! The state-dependent MAC, its three independent state components, and the
//! family of scheme distributions the rate regions are evaluated over.
//!
//! A [`SchemeDistribution`] fixes
//! `p(s0) p(s1) p(s2) p(u) p(v1|u,s0,s1) p(v2|u,s0,s2)` together with the
//! deterministic encoder maps `x1 = f1(u,v1,s0,s1)`, `x2 = f2(u,v2,s0,s2)`
//! and the channel kernel `p(y|x1,x2,s0,s1,s2)`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{sample_simplex, Alphabet, JointTable, SUM_TOLERANCE};

/// Variable names used in the nine-variable joint table.
pub mod var {
    pub const S0: &str = "s0";
    pub const S1: &str = "s1";
    pub const S2: &str = "s2";
    pub const U: &str = "u";
    pub const V1: &str = "v1";
    pub const V2: &str = "v2";
    pub const X1: &str = "x1";
    pub const X2: &str = "x2";
    pub const Y: &str = "y";
}

/// Order of variables in the output of [`build_joint`].
pub const JOINT_VARS: [&str; 9] = [
    var::S0,
    var::S1,
    var::S2,
    var::U,
    var::V1,
    var::V2,
    var::X1,
    var::X2,
    var::Y,
];

/// Default cap on the number of cells in the full joint table.
pub const DEFAULT_CELL_CAP: usize = 1 << 18;

/// Independent state components: `s0` common to both transmitters, `s1`
/// seen only by transmitter 1, `s2` only by transmitter 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateModel {
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

impl StateModel {
    pub fn new(q0: Vec<f64>, q1: Vec<f64>, q2: Vec<f64>) -> Result<Self> {
        let model = StateModel { q0, q1, q2 };
        let mut issues = Vec::new();
        model.check(&mut issues);
        if issues.is_empty() {
            Ok(model)
        } else {
            Err(Error::Validation(ValidityReport { violations: issues }))
        }
    }

    /// All three components degenerate.
    pub fn null() -> Self {
        StateModel {
            q0: vec![1.0],
            q1: vec![1.0],
            q2: vec![1.0],
        }
    }

    pub fn is_null(&self) -> bool {
        self.q0.len() == 1 && self.q1.len() == 1 && self.q2.len() == 1
    }

    pub fn component(&self, k: usize) -> &[f64] {
        match k {
            0 => &self.q0,
            1 => &self.q1,
            _ => &self.q2,
        }
    }

    fn check(&self, issues: &mut Vec<Violation>) {
        for k in 0..3 {
            if let Some(issue) = pmf_issue(self.component(k)) {
                issues.push(Violation::StatePmf { component: k, issue });
            }
        }
    }
}

/// Alphabet sizes of the channel kernel's conditioning variables and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelShape {
    pub s0: usize,
    pub s1: usize,
    pub s2: usize,
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

impl KernelShape {
    fn slices(&self) -> usize {
        self.s0 * self.s1 * self.s2 * self.x1 * self.x2
    }
}

/// `p(y | x1, x2, s0, s1, s2)`, one pmf over `y` per conditioning tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelKernel {
    shape: KernelShape,
    table: Vec<f64>,
}

impl ChannelKernel {
    /// Wraps a flat table laid out `[s0][s1][s2][x1][x2][y]`. Slice sums are
    /// checked by [`validate`], not here.
    pub fn new(shape: KernelShape, table: Vec<f64>) -> Result<Self> {
        let dims = [shape.s0, shape.s1, shape.s2, shape.x1, shape.x2, shape.y];
        if dims.contains(&0) {
            return Err(Error::config("kernel alphabet of size 0"));
        }
        if table.len() != shape.slices() * shape.y {
            return Err(Error::Shape(format!(
                "kernel table has {} entries, shape needs {}",
                table.len(),
                shape.slices() * shape.y
            )));
        }
        Ok(ChannelKernel { shape, table })
    }

    pub fn from_fn(
        shape: KernelShape,
        mut f: impl FnMut(usize, usize, usize, usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(shape.slices() * shape.y);
        for s0 in 0..shape.s0 {
            for s1 in 0..shape.s1 {
                for s2 in 0..shape.s2 {
                    for x1 in 0..shape.x1 {
                        for x2 in 0..shape.x2 {
                            let pmf = f(s0, s1, s2, x1, x2);
                            if pmf.len() != shape.y {
                                return Err(Error::Shape(format!(
                                    "kernel slice ({s0},{s1},{s2},{x1},{x2}) has {} entries, |Y| = {}",
                                    pmf.len(),
                                    shape.y
                                )));
                            }
                            table.extend(pmf);
                        }
                    }
                }
            }
        }
        ChannelKernel::new(shape, table)
    }

    /// Noiseless MAC `y = (x1, x2)`, encoded as `y = x1 * |X2| + x2`.
    pub fn identity(x1: usize, x2: usize) -> Result<Self> {
        let shape = KernelShape { s0: 1, s1: 1, s2: 1, x1, x2, y: x1 * x2 };
        ChannelKernel::from_fn(shape, |_, _, _, a, b| {
            let mut pmf = vec![0.0; x1 * x2];
            pmf[a * x2 + b] = 1.0;
            pmf
        })
    }

    /// Binary `y = (x1 ^ z1, x2 ^ z2)` with independent flips of probability
    /// `crossover` on each component, `y = 2 * y1 + y2`.
    pub fn binary_symmetric_pair(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::config(format!("crossover {crossover} outside [0, 1]")));
        }
        let shape = KernelShape { s0: 1, s1: 1, s2: 1, x1: 2, x2: 2, y: 4 };
        ChannelKernel::from_fn(shape, |_, _, _, a, b| {
            let flip = |x: usize, y: usize| if x == y { 1.0 - crossover } else { crossover };
            (0..4).map(|y| flip(a, y >> 1) * flip(b, y & 1)).collect()
        })
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn slice(&self, s0: usize, s1: usize, s2: usize, x1: usize, x2: usize) -> &[f64] {
        let start = self.slice_index(s0, s1, s2, x1, x2) * self.shape.y;
        &self.table[start..start + self.shape.y]
    }

    fn slice_index(&self, s0: usize, s1: usize, s2: usize, x1: usize, x2: usize) -> usize {
        let k = &self.shape;
        (((s0 * k.s1 + s1) * k.s2 + s2) * k.x1 + x1) * k.x2 + x2
    }

    fn slice_coords(&self, mut idx: usize) -> [usize; 5] {
        let k = &self.shape;
        let mut out = [0usize; 5];
        for (slot, size) in out.iter_mut().zip([k.s0, k.s1, k.s2, k.x1, k.x2]).rev() {
            *slot = idx % size;
            idx /= size;
        }
        out
    }
}

/// A conditional pmf over `out` symbols, one slice per conditioning tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPmf {
    cond: Vec<usize>,
    out: usize,
    table: Vec<f64>,
}

impl CondPmf {
    pub fn new(cond: Vec<usize>, out: usize, table: Vec<f64>) -> Result<Self> {
        if out == 0 || cond.contains(&0) {
            return Err(Error::config("conditional pmf with an empty alphabet"));
        }
        let slices: usize = cond.iter().product();
        if table.len() != slices * out {
            return Err(Error::Shape(format!(
                "conditional table has {} entries, shape needs {}",
                table.len(),
                slices * out
            )));
        }
        Ok(CondPmf { cond, out, table })
    }

    pub fn from_fn(cond: Vec<usize>, out: usize, mut f: impl FnMut(&[usize]) -> Vec<f64>) -> Result<Self> {
        let slices: usize = cond.iter().product();
        let mut table = Vec::with_capacity(slices * out);
        let mut digits = vec![0usize; cond.len()];
        for _ in 0..slices {
            let pmf = f(&digits);
            if pmf.len() != out {
                return Err(Error::Shape(format!(
                    "slice {digits:?} has {} entries, expected {out}",
                    pmf.len()
                )));
            }
            table.extend(pmf);
            crate::prob::advance(&mut digits, &cond);
        }
        CondPmf::new(cond, out, table)
    }

    pub fn cond_shape(&self) -> &[usize] {
        &self.cond
    }

    pub fn out_size(&self) -> usize {
        self.out
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn slice(&self, cond: &[usize]) -> &[f64] {
        let start = self.flat(cond) * self.out;
        &self.table[start..start + self.out]
    }

    pub fn slice_mut(&mut self, cond: &[usize]) -> &mut [f64] {
        let start = self.flat(cond) * self.out;
        &mut self.table[start..start + self.out]
    }

    fn flat(&self, cond: &[usize]) -> usize {
        cond.iter().zip(&self.cond).fold(0, |acc, (c, size)| acc * size + c)
    }

    fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.cond.len()];
        for (slot, size) in out.iter_mut().zip(&self.cond).rev() {
            *slot = idx % size;
            idx /= size;
        }
        out
    }
}

/// A deterministic encoder map `(u, v, s0, s_k) -> x`. Entries may be
/// missing so that incomplete maps can be reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetMap {
    inputs: [usize; 4],
    out: usize,
    table: Vec<Option<usize>>,
}

impl DetMap {
    pub fn new(inputs: [usize; 4], out: usize, table: Vec<Option<usize>>) -> Result<Self> {
        if out == 0 || inputs.contains(&0) {
            return Err(Error::config("encoder map with an empty alphabet"));
        }
        if table.len() != inputs.iter().product::<usize>() {
            return Err(Error::Shape(format!(
                "encoder map has {} entries, inputs need {}",
                table.len(),
                inputs.iter().product::<usize>()
            )));
        }
        Ok(DetMap { inputs, out, table })
    }

    pub fn from_fn(
        inputs: [usize; 4],
        out: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> usize,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(inputs.iter().product());
        for u in 0..inputs[0] {
            for v in 0..inputs[1] {
                for s0 in 0..inputs[2] {
                    for sk in 0..inputs[3] {
                        table.push(Some(f(u, v, s0, sk)));
                    }
                }
            }
        }
        DetMap::new(inputs, out, table)
    }

    pub fn inputs(&self) -> [usize; 4] {
        self.inputs
    }

    pub fn out_size(&self) -> usize {
        self.out
    }

    pub fn get(&self, u: usize, v: usize, s0: usize, sk: usize) -> Option<usize> {
        self.table[self.flat(u, v, s0, sk)]
    }

    pub fn set(&mut self, u: usize, v: usize, s0: usize, sk: usize, x: Option<usize>) {
        let i = self.flat(u, v, s0, sk);
        self.table[i] = x;
    }

    /// Evaluates a map that has passed validation.
    pub(crate) fn apply(&self, u: usize, v: usize, s0: usize, sk: usize) -> usize {
        self.get(u, v, s0, sk).expect("encoder map validated as total")
    }

    fn flat(&self, u: usize, v: usize, s0: usize, sk: usize) -> usize {
        let [_, nv, ns0, nsk] = self.inputs;
        ((u * nv + v) * ns0 + s0) * nsk + sk
    }

    fn coords(&self, mut idx: usize) -> [usize; 4] {
        let mut out = [0usize; 4];
        for (slot, size) in out.iter_mut().zip(self.inputs).rev() {
            *slot = idx % size;
            idx /= size;
        }
        out
    }
}

/// Auxiliary alphabet sizes used when sampling scheme distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinalities {
    pub u: usize,
    pub v1: usize,
    pub v2: usize,
}

impl Default for Cardinalities {
    fn default() -> Self {
        Cardinalities { u: 2, v1: 2, v2: 2 }
    }
}

/// Alphabet sizes of all nine variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub s0: usize,
    pub s1: usize,
    pub s2: usize,
    pub u: usize,
    pub v1: usize,
    pub v2: usize,
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

impl Sizes {
    pub fn as_array(&self) -> [usize; 9] {
        [
            self.s0, self.s1, self.s2, self.u, self.v1, self.v2, self.x1, self.x2, self.y,
        ]
    }
}

/// One member of the scheme family.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeDistribution {
    pub states: StateModel,
    pub kernel: ChannelKernel,
    pub pu: Vec<f64>,
    /// `p(v1 | u, s0, s1)`.
    pub pv1: CondPmf,
    /// `p(v2 | u, s0, s2)`.
    pub pv2: CondPmf,
    /// `x1 = f1(u, v1, s0, s1)`.
    pub f1: DetMap,
    /// `x2 = f2(u, v2, s0, s2)`.
    pub f2: DetMap,
}

impl SchemeDistribution {
    /// Draws pmfs from a symmetric Dirichlet and each encoder map entry
    /// uniformly over the input alphabet.
    pub fn sample<R: Rng + ?Sized>(
        states: &StateModel,
        kernel: &ChannelKernel,
        cards: Cardinalities,
        concentration: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if cards.u == 0 || cards.v1 == 0 || cards.v2 == 0 {
            return Err(Error::config("auxiliary cardinalities must be at least 1"));
        }
        let (ns0, ns1, ns2) = (states.q0.len(), states.q1.len(), states.q2.len());
        let k = kernel.shape();
        let pu = sample_simplex(cards.u, concentration, rng)?;
        let mut draw_cond = |cond: Vec<usize>, out: usize| -> Result<CondPmf> {
            let slices: usize = cond.iter().product();
            let mut table = Vec::with_capacity(slices * out);
            for _ in 0..slices {
                table.extend(sample_simplex(out, concentration, rng)?);
            }
            CondPmf::new(cond, out, table)
        };
        let pv1 = draw_cond(vec![cards.u, ns0, ns1], cards.v1)?;
        let pv2 = draw_cond(vec![cards.u, ns0, ns2], cards.v2)?;
        let f1 = DetMap::from_fn([cards.u, cards.v1, ns0, ns1], k.x1, |_, _, _, _| {
            rng.random_range(0..k.x1)
        })?;
        let f2 = DetMap::from_fn([cards.u, cards.v2, ns0, ns2], k.x2, |_, _, _, _| {
            rng.random_range(0..k.x2)
        })?;
        Ok(SchemeDistribution {
            states: states.clone(),
            kernel: kernel.clone(),
            pu,
            pv1,
            pv2,
            f1,
            f2,
        })
    }

    /// Degenerate `u`, `v_k` uniform over `X_k` and independent of the
    /// states, `x_k = v_k`.
    pub fn uncoded(states: &StateModel, kernel: &ChannelKernel) -> Result<Self> {
        let (ns0, ns1, ns2) = (states.q0.len(), states.q1.len(), states.q2.len());
        let k = kernel.shape();
        let uniform = |n: usize| vec![1.0 / n as f64; n];
        Ok(SchemeDistribution {
            states: states.clone(),
            kernel: kernel.clone(),
            pu: vec![1.0],
            pv1: CondPmf::from_fn(vec![1, ns0, ns1], k.x1, |_| uniform(k.x1))?,
            pv2: CondPmf::from_fn(vec![1, ns0, ns2], k.x2, |_| uniform(k.x2))?,
            f1: DetMap::from_fn([1, k.x1, ns0, ns1], k.x1, |_, v, _, _| v)?,
            f2: DetMap::from_fn([1, k.x2, ns0, ns2], k.x2, |_, v, _, _| v)?,
        })
    }

    pub fn sizes(&self) -> Sizes {
        let k = self.kernel.shape();
        Sizes {
            s0: self.states.q0.len(),
            s1: self.states.q1.len(),
            s2: self.states.q2.len(),
            u: self.pu.len(),
            v1: self.pv1.out_size(),
            v2: self.pv2.out_size(),
            x1: k.x1,
            x2: k.x2,
            y: k.y,
        }
    }

    /// The same scheme with each `p(v_k | u, s0, s_k)` replaced by its
    /// state average `p(v_k | u)`. This is the distribution a codebook
    /// chosen without looking at the states actually induces.
    pub fn state_averaged(&self) -> SchemeDistribution {
        let avg = |pv: &CondPmf, q0: &[f64], qk: &[f64]| -> CondPmf {
            let mut out = pv.clone();
            let nu = pv.cond_shape()[0];
            for u in 0..nu {
                let mut mean = vec![0.0; pv.out_size()];
                for (s0, w0) in q0.iter().enumerate() {
                    for (sk, wk) in qk.iter().enumerate() {
                        for (m, p) in mean.iter_mut().zip(pv.slice(&[u, s0, sk])) {
                            *m += w0 * wk * p;
                        }
                    }
                }
                for s0 in 0..q0.len() {
                    for sk in 0..qk.len() {
                        out.slice_mut(&[u, s0, sk]).copy_from_slice(&mean);
                    }
                }
            }
            out
        };
        let mut out = self.clone();
        out.pv1 = avg(&self.pv1, &self.states.q0, &self.states.q1);
        out.pv2 = avg(&self.pv2, &self.states.q0, &self.states.q2);
        out
    }
}

/// Which feedback links exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    TwoSided,
    /// Only transmitter 1 observes the channel output.
    Partial,
    None,
}

/// How much of the state sequence an encoder sees when emitting symbol `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Causality {
    NonCausal,
    Causal,
    /// States up to index `i - lag`.
    StrictlyCausal { lag: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeKind {
    pub feedback: Feedback,
    pub causality: Causality,
}

impl SchemeKind {
    pub fn new(feedback: Feedback, causality: Causality) -> Result<Self> {
        if let Causality::StrictlyCausal { lag } = causality {
            if lag == 0 {
                return Err(Error::config("strictly causal lag must be at least 1"));
            }
        }
        Ok(SchemeKind { feedback, causality })
    }

    pub fn strictly_causal(feedback: Feedback) -> Self {
        SchemeKind {
            feedback,
            causality: Causality::StrictlyCausal { lag: 1 },
        }
    }
}

/// Problems with a single pmf.
#[derive(Debug, Clone, PartialEq)]
pub enum PmfIssue {
    Empty,
    Negative { index: usize, value: f64 },
    Sum(f64),
}

impl fmt::Display for PmfIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmfIssue::Empty => write!(f, "is empty"),
            PmfIssue::Negative { index, value } => write!(f, "has entry {index} = {value}"),
            PmfIssue::Sum(s) => write!(f, "sums to {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Component shapes that do not agree with each other.
    Shape(String),
    StatePmf { component: usize, issue: PmfIssue },
    Pu(PmfIssue),
    Pv1Slice { u: usize, s0: usize, s1: usize, issue: PmfIssue },
    Pv2Slice { u: usize, s0: usize, s2: usize, issue: PmfIssue },
    KernelSlice { index: [usize; 5], issue: PmfIssue },
    /// `which` is 1 or 2.
    MapMissing { which: u8, input: [usize; 4] },
    MapOutOfRange { which: u8, input: [usize; 4], output: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Violation::StatePmf { component, issue } => write!(f, "q{component} {issue}"),
            Violation::Pu(issue) => write!(f, "p(u) {issue}"),
            Violation::Pv1Slice { u, s0, s1, issue } => {
                write!(f, "p(v1 | u={u}, s0={s0}, s1={s1}) {issue}")
            }
            Violation::Pv2Slice { u, s0, s2, issue } => {
                write!(f, "p(v2 | u={u}, s0={s0}, s2={s2}) {issue}")
            }
            Violation::KernelSlice { index, issue } => {
                let [s0, s1, s2, x1, x2] = index;
                write!(f, "p(y | s0={s0}, s1={s1}, s2={s2}, x1={x1}, x2={x2}) {issue}")
            }
            Violation::MapMissing { which, input } => {
                let [u, v, s0, sk] = input;
                write!(f, "f{which} has no output for (u={u}, v{which}={v}, s0={s0}, s{which}={sk})")
            }
            Violation::MapOutOfRange { which, input, output } => {
                let [u, v, s0, sk] = input;
                write!(
                    f,
                    "f{which}(u={u}, v{which}={v}, s0={s0}, s{which}={sk}) = {output} is outside X{which}"
                )
            }
        }
    }
}

/// Every violated invariant of a scheme distribution; empty iff valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn pmf_issue(p: &[f64]) -> Option<PmfIssue> {
    if p.is_empty() {
        return Some(PmfIssue::Empty);
    }
    if let Some((index, value)) = p
        .iter()
        .enumerate()
        .find(|(_, x)| !x.is_finite() || **x < 0.0)
    {
        return Some(PmfIssue::Negative { index, value: *value });
    }
    let sum: f64 = p.iter().sum();
    ((sum - 1.0).abs() > SUM_TOLERANCE).then_some(PmfIssue::Sum(sum))
}

/// Checks every invariant of `p`. Never aborts; shape mismatches suppress
/// the checks that depend on the mismatched shape.
pub fn validate(p: &SchemeDistribution) -> ValidityReport {
    let mut v = Vec::new();
    p.states.check(&mut v);
    if let Some(issue) = pmf_issue(&p.pu) {
        v.push(Violation::Pu(issue));
    }

    let (ns0, ns1, ns2, nu) = (p.states.q0.len(), p.states.q1.len(), p.states.q2.len(), p.pu.len());
    let k = p.kernel.shape();
    let mut shapes_ok = true;
    let mut shape = |ok: bool, msg: String| {
        if !ok {
            v.push(Violation::Shape(msg));
            shapes_ok = false;
        }
    };
    shape(
        (k.s0, k.s1, k.s2) == (ns0, ns1, ns2),
        format!(
            "kernel states ({},{},{}) vs state model ({ns0},{ns1},{ns2})",
            k.s0, k.s1, k.s2
        ),
    );
    shape(
        p.pv1.cond_shape() == [nu, ns0, ns1],
        format!("p(v1|u,s0,s1) conditions on {:?}", p.pv1.cond_shape()),
    );
    shape(
        p.pv2.cond_shape() == [nu, ns0, ns2],
        format!("p(v2|u,s0,s2) conditions on {:?}", p.pv2.cond_shape()),
    );
    shape(
        p.f1.inputs() == [nu, p.pv1.out_size(), ns0, ns1] && p.f1.out_size() == k.x1,
        format!("f1 maps {:?} -> {}", p.f1.inputs(), p.f1.out_size()),
    );
    shape(
        p.f2.inputs() == [nu, p.pv2.out_size(), ns0, ns2] && p.f2.out_size() == k.x2,
        format!("f2 maps {:?} -> {}", p.f2.inputs(), p.f2.out_size()),
    );
    if !shapes_ok {
        return ValidityReport { violations: v };
    }

    for idx in 0..k.slices() {
        if let Some(issue) = pmf_issue(&p.kernel.table[idx * k.y..(idx + 1) * k.y]) {
            v.push(Violation::KernelSlice {
                index: p.kernel.slice_coords(idx),
                issue,
            });
        }
    }
    for (which, pv) in [(1u8, &p.pv1), (2u8, &p.pv2)] {
        let slices: usize = pv.cond_shape().iter().product();
        for idx in 0..slices {
            let c = pv.coords(idx);
            if let Some(issue) = pmf_issue(pv.slice(&c)) {
                v.push(if which == 1 {
                    Violation::Pv1Slice { u: c[0], s0: c[1], s1: c[2], issue }
                } else {
                    Violation::Pv2Slice { u: c[0], s0: c[1], s2: c[2], issue }
                });
            }
        }
    }
    for (which, map) in [(1u8, &p.f1), (2u8, &p.f2)] {
        for (idx, entry) in map.table.iter().enumerate() {
            let input = map.coords(idx);
            match entry {
                None => v.push(Violation::MapMissing { which, input }),
                Some(x) if *x >= map.out => v.push(Violation::MapOutOfRange {
                    which,
                    input,
                    output: *x,
                }),
                Some(_) => {}
            }
        }
    }
    ValidityReport { violations: v }
}

/// Builds the joint over `(s0,s1,s2,u,v1,v2,x1,x2,y)` with the default cell cap.
pub fn build_joint(p: &SchemeDistribution) -> Result<JointTable> {
    build_joint_capped(p, DEFAULT_CELL_CAP)
}

pub fn build_joint_capped(p: &SchemeDistribution, cell_cap: usize) -> Result<JointTable> {
    let report = validate(p);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let sz = p.sizes();
    let dims = sz.as_array();
    let cells = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .filter(|c| *c <= cell_cap)
        .ok_or_else(|| {
            Error::size(format!(
                "joint table over alphabets {dims:?} exceeds the cap of {cell_cap} cells"
            ))
        })?;

    let mut strides = [1usize; 9];
    for i in (0..8).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut probs = vec![0.0; cells];
    let q = &p.states;
    for s0 in 0..sz.s0 {
        for s1 in 0..sz.s1 {
            for s2 in 0..sz.s2 {
                for u in 0..sz.u {
                    let base = q.q0[s0] * q.q1[s1] * q.q2[s2] * p.pu[u];
                    if base == 0.0 {
                        continue;
                    }
                    let pv1 = p.pv1.slice(&[u, s0, s1]);
                    let pv2 = p.pv2.slice(&[u, s0, s2]);
                    for (v1, w1) in pv1.iter().enumerate() {
                        let x1 = p.f1.apply(u, v1, s0, s1);
                        for (v2, w2) in pv2.iter().enumerate() {
                            let x2 = p.f2.apply(u, v2, s0, s2);
                            let weight = base * w1 * w2;
                            if weight == 0.0 {
                                continue;
                            }
                            let offset = [s0, s1, s2, u, v1, v2, x1, x2]
                                .iter()
                                .zip(&strides)
                                .map(|(s, st)| s * st)
                                .sum::<usize>();
                            for (y, py) in p.kernel.slice(s0, s1, s2, x1, x2).iter().enumerate() {
                                probs[offset + y] += weight * py;
                            }
                        }
                    }
                }
            }
        }
    }
    let vars = JOINT_VARS
        .iter()
        .zip(dims)
        .map(|(name, size)| Alphabet::new(*name, size))
        .collect::<Result<Vec<_>>>()?;
    JointTable::new(vars, probs)
}
