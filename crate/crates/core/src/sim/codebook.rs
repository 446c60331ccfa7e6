//! Superposition codebooks with Gelfand–Pinsker bins.

use std::collections::HashSet;

use rand::Rng;

use super::{BookSizes, CodeParams};
use crate::channel::{CondPmf, Feedback, SchemeDistribution, SchemeKind};
use crate::error::{Error, Result};

/// All satellite sequences superimposed on one cloud center, stored bin by
/// bin: sequence `(bin, within)` sits at `bin * per_bin + within`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatelliteBook {
    pub bins: usize,
    pub per_bin: usize,
    seqs: Vec<Vec<u8>>,
}

impl SatelliteBook {
    pub fn new(bins: usize, per_bin: usize, seqs: Vec<Vec<u8>>) -> Result<Self> {
        if seqs.len() != bins * per_bin {
            return Err(Error::Shape(format!(
                "{} sequences cannot fill {bins} bins of {per_bin}",
                seqs.len()
            )));
        }
        Ok(SatelliteBook { bins, per_bin, seqs })
    }

    pub fn get(&self, bin: usize, within: usize) -> &[u8] {
        &self.seqs[bin * self.per_bin + within]
    }

    pub fn bin(&self, bin: usize) -> &[Vec<u8>] {
        &self.seqs[bin * self.per_bin..(bin + 1) * self.per_bin]
    }

    pub fn sequences(&self) -> &[Vec<u8>] {
        &self.seqs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookEnsemble {
    /// Cloud centers, one per helping index.
    pub u_book: Vec<Vec<u8>>,
    /// `v1_books[m0]` holds the satellites of cloud `m0`.
    pub v1_books: Vec<SatelliteBook>,
    pub v2_books: Vec<SatelliteBook>,
    /// Partial feedback only: the cell of each transmitter-2 bin.
    pub partition: Option<Vec<usize>>,
}

impl CodebookEnsemble {
    pub fn cell_of(&self, m2: usize) -> usize {
        self.partition.as_ref().map_or(0, |p| p[m2])
    }
}

pub(crate) fn draw<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> usize {
    let mut x: f64 = rng.random();
    for (i, p) in pmf.iter().enumerate() {
        if x < *p {
            return i;
        }
        x -= p;
    }
    // Rounding left a sliver past the last entry; take the last positive one.
    pmf.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// `p(v | u) = sum_{s0, sk} p(s0) p(sk) p(v | u, s0, sk)`.
fn satellite_law(pv: &CondPmf, q0: &[f64], qk: &[f64]) -> Vec<Vec<f64>> {
    let nu = pv.cond_shape()[0];
    (0..nu)
        .map(|u| {
            let mut law = vec![0.0; pv.out_size()];
            for (s0, w0) in q0.iter().enumerate() {
                for (sk, wk) in qk.iter().enumerate() {
                    for (l, p) in law.iter_mut().zip(pv.slice(&[u, s0, sk])) {
                        *l += w0 * wk * p;
                    }
                }
            }
            law
        })
        .collect()
}

fn draw_book<R: Rng + ?Sized>(
    count: usize,
    n: usize,
    mut symbol: impl FnMut(usize, &mut R) -> u8,
    distinct: bool,
    rng: &mut R,
) -> Result<Vec<Vec<u8>>> {
    let mut draw_seq = |rng: &mut R| -> Vec<u8> { (0..n).map(|i| symbol(i, rng)).collect() };
    if !distinct {
        return Ok((0..count).map(|_| draw_seq(rng)).collect());
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let budget = 64 * count + 1024;
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let seq = draw_seq(rng);
        if seen.insert(seq.clone()) {
            out.push(seq);
        }
    }
    if out.len() < count {
        return Err(Error::size(format!(
            "could not draw {count} distinct codewords of length {n} from the codeword law"
        )));
    }
    Ok(out)
}

/// Draws the cloud centers i.i.d. from `p(u)` and, for each center, every
/// satellite conditionally i.i.d. from `p(v_k | u)`. Consecutive runs of
/// `per_bin` satellites form a bin, which has the same law as pouring
/// i.i.d. sequences into bins at random.
pub fn generate_codebooks<R: Rng + ?Sized>(
    p: &SchemeDistribution,
    params: &CodeParams,
    kind: &SchemeKind,
    rng: &mut R,
) -> Result<CodebookEnsemble> {
    let sizes = BookSizes::new(params, kind)?;
    sizes.check_caps(params.n)?;
    let n = params.n;
    let law1 = satellite_law(&p.pv1, &p.states.q0, &p.states.q1);
    let law2 = satellite_law(&p.pv2, &p.states.q0, &p.states.q2);
    let u_book = draw_book(sizes.m0, n, |_, r| draw(&p.pu, r) as u8, params.distinct_codewords, rng)?;
    let mut v1_books = Vec::with_capacity(sizes.m0);
    let mut v2_books = Vec::with_capacity(sizes.m0);
    for u in &u_book {
        let v1 = draw_book(
            sizes.m1 * sizes.w1,
            n,
            |i, r| draw(&law1[usize::from(u[i])], r) as u8,
            params.distinct_codewords,
            rng,
        )?;
        let v2 = draw_book(
            sizes.m2 * sizes.w2,
            n,
            |i, r| draw(&law2[usize::from(u[i])], r) as u8,
            params.distinct_codewords,
            rng,
        )?;
        v1_books.push(SatelliteBook::new(sizes.m1, sizes.w1, v1)?);
        v2_books.push(SatelliteBook::new(sizes.m2, sizes.w2, v2)?);
    }
    let partition = (kind.feedback == Feedback::Partial)
        .then(|| (0..sizes.m2).map(|m2| m2 % sizes.m0).collect());
    Ok(CodebookEnsemble {
        u_book,
        v1_books,
        v2_books,
        partition,
    })
}
