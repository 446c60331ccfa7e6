use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use super::codebook::draw;
use super::{generate_codebooks, BookSizes, CodeParams, CodebookEnsemble, SimReport, TypicalityTest};
use super::{MAX_ALPHABET, MAX_BLOCK_LENGTH};
use crate::channel::{build_joint, var, Causality, DetMap, Feedback, SchemeDistribution, SchemeKind};
use crate::error::{Error, Result};
use crate::region::sample_rng;

/// Per-trial event counts (in blocks) and the overall verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub success: bool,
    pub encode_failures: u64,
    pub decode_m0_errors: u64,
    pub cross_decode_errors: u64,
}

/// Candidate `(m1, w1, m2, w2)`: bin and within-bin indices of both users.
type Tuple = (usize, usize, usize, usize);

/// Searches one Gelfand–Pinsker bin for the first sequence jointly typical
/// with the cloud center and the encoder's states. `test` must take its
/// sequences in the order `(u, v, s0, s_k)`.
pub fn gp_bin_search(
    bin: &[Vec<u8>],
    u: &[u8],
    s0: &[u8],
    sk: &[u8],
    test: &TypicalityTest,
) -> Option<usize> {
    bin.iter().position(|v| test.check(&[u, v, s0, sk]))
}

/// Applies a symbol-wise encoder map. Non-causal and causal encoders use the
/// current state symbol; a strictly causal encoder with lag `r` uses the
/// symbol `r` positions back, and reads state 0 before the block starts.
pub fn apply_encoder(
    map: &DetMap,
    u: &[u8],
    v: &[u8],
    s0: &[u8],
    sk: &[u8],
    causality: Causality,
) -> Vec<u8> {
    let lag = match causality {
        Causality::StrictlyCausal { lag } => lag,
        _ => 0,
    };
    (0..u.len())
        .map(|i| {
            let (a, b) = if i >= lag {
                (usize::from(s0[i - lag]), usize::from(sk[i - lag]))
            } else {
                (0, 0)
            };
            map.apply(usize::from(u[i]), usize::from(v[i]), a, b) as u8
        })
        .collect()
}

/// Everything about a simulation that does not change between trials.
#[derive(Debug, Clone)]
pub struct Simulator {
    scheme: SchemeDistribution,
    params: CodeParams,
    kind: SchemeKind,
    sizes: BookSizes,
    /// `(u, v1, s0, s1)` and `(u, v2, s0, s2)`.
    gp: [TypicalityTest; 2],
    /// `(u, y)`.
    cloud: TypicalityTest,
    /// `(u, v1, v2, y, s0, s1)` for transmitter 1, `(..., s0, s2)` for 2.
    cross: [TypicalityTest; 2],
    /// `(u, v1, v2, y)`.
    receiver: TypicalityTest,
    /// `(u, v1, y)` and `(u, v2, y)`, necessary conditions for `receiver`.
    prune: [TypicalityTest; 2],
}

struct Block {
    s: [Vec<u8>; 3],
    y: Vec<u8>,
    within: [usize; 2],
    encode_failed: bool,
}

impl Simulator {
    /// In causal modes the satellites are chosen without looking at the
    /// states, so decoders test against the state-averaged scheme.
    pub fn new(p: &SchemeDistribution, params: &CodeParams, kind: &SchemeKind) -> Result<Self> {
        if kind.feedback == Feedback::None {
            return Err(Error::config(
                "the simulator runs two-sided or partial feedback schemes only",
            ));
        }
        if let Causality::StrictlyCausal { lag } = kind.causality {
            if lag == 0 {
                return Err(Error::config("strictly causal lag must be at least 1"));
            }
        }
        let sizes = BookSizes::new(params, kind)?;
        sizes.check_caps(params.n)?;
        debug_assert!(params.n <= MAX_BLOCK_LENGTH);
        if let Some(big) = p.sizes().as_array().iter().find(|s| **s > MAX_ALPHABET) {
            return Err(Error::size(format!(
                "alphabet of size {big} exceeds the simulator cap of {MAX_ALPHABET}"
            )));
        }
        let scheme = match kind.causality {
            Causality::NonCausal => p.clone(),
            _ => p.state_averaged(),
        };
        let joint = build_joint(&scheme)?;
        let eps = params.epsilon;
        let t = |order: &[&str]| TypicalityTest::new(&joint, order, eps);
        use var::*;
        Ok(Simulator {
            gp: [t(&[U, V1, S0, S1])?, t(&[U, V2, S0, S2])?],
            cloud: t(&[U, Y])?,
            cross: [t(&[U, V1, V2, Y, S0, S1])?, t(&[U, V1, V2, Y, S0, S2])?],
            receiver: t(&[U, V1, V2, Y])?,
            prune: [t(&[U, V1, Y])?, t(&[U, V2, Y])?],
            scheme: p.clone(),
            params: params.clone(),
            kind: *kind,
            sizes,
        })
    }

    pub fn sizes(&self) -> BookSizes {
        self.sizes
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialOutcome> {
        let books = generate_codebooks(&self.scheme, &self.params, &self.kind, rng)?;
        Ok(self.run_trial_with_books(&books, rng))
    }

    /// Runs one trial on a given codebook ensemble.
    pub fn run_trial_with_books<R: Rng + ?Sized>(
        &self,
        books: &CodebookEnsemble,
        rng: &mut R,
    ) -> TrialOutcome {
        let blocks = self.params.blocks;
        let fresh = |m: usize, rng: &mut R| -> Vec<usize> {
            (0..blocks)
                .map(|b| if b + 1 < blocks { rng.random_range(0..m) } else { 0 })
                .collect()
        };
        let m1 = fresh(self.sizes.m1, rng);
        let m2 = fresh(self.sizes.m2, rng);
        let mut out = TrialOutcome::default();
        let estimates = match self.kind.feedback {
            Feedback::Partial => self.partial_feedback(books, &m1, &m2, &mut out, rng),
            _ => self.two_sided_feedback(books, &m1, &m2, &mut out, rng),
        };
        // With one message per user the decoder's output is forced.
        let trivial = self.sizes.m1 == 1 && self.sizes.m2 == 1;
        out.success = trivial
            || estimates
                .iter()
                .enumerate()
                .all(|(b, e)| *e == Some((m1[b], m2[b])));
        out
    }

    fn two_sided_feedback<R: Rng + ?Sized>(
        &self,
        books: &CodebookEnsemble,
        m1: &[usize],
        m2: &[usize],
        out: &mut TrialOutcome,
        rng: &mut R,
    ) -> Vec<Option<(usize, usize)>> {
        let blocks = self.params.blocks;
        let mut estimates = vec![None; blocks - 1];
        // Block 1 uses cloud 0, known to everyone.
        let mut tx_m0 = [0usize; 2];
        let mut rx_list: Option<Vec<Tuple>> = None;
        for b in 0..blocks {
            let block = self.transmit(books, tx_m0, [m1[b], m2[b]], rng);
            out.encode_failures += u64::from(block.encode_failed);
            let rx_m0 = if b == 0 { Some(0) } else { self.decode_cloud(books, &block.y) };
            if b > 0 {
                out.decode_m0_errors += u64::from(rx_m0 != Some(tx_m0[1]));
                estimates[b - 1] = match (&rx_list, rx_m0) {
                    (Some(list), Some(i)) => list.get(i).map(|t| (t.0, t.2)),
                    _ => None,
                };
            }
            if b + 1 == blocks {
                break;
            }
            let mut lists: HashMap<usize, Vec<Tuple>> = HashMap::new();
            let mut list_for = |m0: usize| -> Vec<Tuple> {
                lists
                    .entry(m0)
                    .or_insert_with(|| self.candidates(books, m0, &block.y, None))
                    .clone()
            };
            rx_list = rx_m0.map(&mut list_for);

            let heard2 = self.cross_decode(0, books, tx_m0[0], [m1[b], block.within[0]], &block);
            let heard1 = self.cross_decode(1, books, tx_m0[1], [m2[b], block.within[1]], &block);
            let truth2 = (m2[b], block.within[1]);
            let truth1 = (m1[b], block.within[0]);
            out.cross_decode_errors += u64::from(heard2 != Some(truth2) || heard1 != Some(truth1));

            // Each transmitter points the receiver at its view of the true
            // tuple inside the list of tuples typical with this block's output.
            let believed = [
                heard2.map(|(m, w)| (m1[b], block.within[0], m, w)),
                heard1.map(|(m, w)| (m, w, m2[b], block.within[1])),
            ];
            let mut next = [0usize; 2];
            for k in 0..2 {
                if let Some(t) = believed[k] {
                    let list = list_for(tx_m0[k]);
                    next[k] = list
                        .iter()
                        .position(|c| *c == t)
                        .filter(|i| *i < self.sizes.m0)
                        .unwrap_or(0);
                }
            }
            tx_m0 = next;
        }
        estimates
    }

    fn partial_feedback<R: Rng + ?Sized>(
        &self,
        books: &CodebookEnsemble,
        m1: &[usize],
        m2: &[usize],
        out: &mut TrialOutcome,
        rng: &mut R,
    ) -> Vec<Option<(usize, usize)>> {
        let blocks = self.params.blocks;
        let mut estimates = vec![None; blocks - 1];
        let mut tx_m0 = [0usize; 2];
        let mut rx_prev: Option<(usize, Vec<u8>)> = None;
        for b in 0..blocks {
            let block = self.transmit(books, tx_m0, [m1[b], m2[b]], rng);
            out.encode_failures += u64::from(block.encode_failed);
            let rx_m0 = if b == 0 { Some(0) } else { self.decode_cloud(books, &block.y) };
            if b > 0 {
                out.decode_m0_errors += u64::from(rx_m0 != Some(tx_m0[1]));
                // Restricted decoding: the cloud index of this block names the
                // cell holding the previous block's transmitter-2 bin.
                estimates[b - 1] = match (&rx_prev, rx_m0) {
                    (Some((prev_m0, prev_y)), Some(cell)) => {
                        match self.candidates(books, *prev_m0, prev_y, Some(cell))[..] {
                            [t] => Some((t.0, t.2)),
                            _ => None,
                        }
                    }
                    _ => None,
                };
            }
            if b + 1 == blocks {
                break;
            }
            rx_prev = rx_m0.map(|m0| (m0, block.y.clone()));
            let heard2 = self.cross_decode(0, books, tx_m0[0], [m1[b], block.within[0]], &block);
            out.cross_decode_errors += u64::from(heard2 != Some((m2[b], block.within[1])));
            tx_m0 = [
                heard2.map_or(0, |(m, _)| books.cell_of(m)),
                books.cell_of(m2[b]),
            ];
        }
        estimates
    }

    fn transmit<R: Rng + ?Sized>(
        &self,
        books: &CodebookEnsemble,
        m0: [usize; 2],
        msgs: [usize; 2],
        rng: &mut R,
    ) -> Block {
        let n = self.params.n;
        let q = &self.scheme.states;
        let s: [Vec<u8>; 3] = [&q.q0, &q.q1, &q.q2]
            .map(|pmf| (0..n).map(|_| draw(pmf, rng) as u8).collect());
        let mut within = [0usize; 2];
        let mut encode_failed = false;
        let mut x: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
        for k in 0..2 {
            let book = if k == 0 { &books.v1_books[m0[k]] } else { &books.v2_books[m0[k]] };
            let u = &books.u_book[m0[k]];
            let sk = &s[k + 1];
            if self.kind.causality == Causality::NonCausal {
                match gp_bin_search(book.bin(msgs[k]), u, &s[0], sk, &self.gp[k]) {
                    Some(w) => within[k] = w,
                    None => encode_failed = true,
                }
            }
            let v = book.get(msgs[k], within[k]);
            let map = if k == 0 { &self.scheme.f1 } else { &self.scheme.f2 };
            x[k] = apply_encoder(map, u, v, &s[0], sk, self.kind.causality);
        }
        let kernel = &self.scheme.kernel;
        let y = (0..n)
            .map(|i| {
                let slice = kernel.slice(
                    usize::from(s[0][i]),
                    usize::from(s[1][i]),
                    usize::from(s[2][i]),
                    usize::from(x[0][i]),
                    usize::from(x[1][i]),
                );
                draw(slice, rng) as u8
            })
            .collect();
        Block { s, y, within, encode_failed }
    }

    /// The unique cloud center typical with `y`; a single center needs no test.
    fn decode_cloud(&self, books: &CodebookEnsemble, y: &[u8]) -> Option<usize> {
        if books.u_book.len() == 1 {
            return Some(0);
        }
        unique(
            books
                .u_book
                .iter()
                .enumerate()
                .filter(|(_, u)| self.cloud.check(&[u, y]))
                .map(|(i, _)| i),
        )
    }

    /// Transmitter `k` (0 or 1) decodes the other user's `(bin, within)` from
    /// its own codeword, its states, and the fed-back output. Any second
    /// typical candidate is a failure.
    fn cross_decode(
        &self,
        k: usize,
        books: &CodebookEnsemble,
        m0: usize,
        own: [usize; 2],
        block: &Block,
    ) -> Option<(usize, usize)> {
        let (mine, theirs) = if k == 0 {
            (&books.v1_books[m0], &books.v2_books[m0])
        } else {
            (&books.v2_books[m0], &books.v1_books[m0])
        };
        if theirs.bins * theirs.per_bin == 1 {
            return Some((0, 0));
        }
        let u = &books.u_book[m0];
        let v_own = mine.get(own[0], own[1]);
        let (s0, sk) = (&block.s[0], &block.s[k + 1]);
        let test = &self.cross[k];
        unique((0..theirs.bins).flat_map(|m| (0..theirs.per_bin).map(move |w| (m, w))).filter(
            |&(m, w)| {
                let v_other = theirs.get(m, w);
                let (v1, v2) = if k == 0 { (v_own, v_other) } else { (v_other, v_own) };
                test.check(&[u, v1, v2, &block.y, s0, sk])
            },
        ))
    }

    /// Every `(m1, w1, m2, w2)` on cloud `m0` typical with `y`, in
    /// lexicographic order, optionally restricted to transmitter-2 bins in
    /// one partition cell.
    fn candidates(
        &self,
        books: &CodebookEnsemble,
        m0: usize,
        y: &[u8],
        cell: Option<usize>,
    ) -> Vec<Tuple> {
        let u = &books.u_book[m0];
        let (b1, b2) = (&books.v1_books[m0], &books.v2_books[m0]);
        let in_cell = |m2: usize| cell.is_none_or(|c| books.cell_of(m2) == c);
        let all1: Vec<(usize, usize)> =
            (0..b1.bins).flat_map(|m| (0..b1.per_bin).map(move |w| (m, w))).collect();
        let all2: Vec<(usize, usize)> = (0..b2.bins)
            .filter(|m| in_cell(*m))
            .flat_map(|m| (0..b2.per_bin).map(move |w| (m, w)))
            .collect();
        if all1.len() * all2.len() == 1 {
            return vec![(all1[0].0, all1[0].1, all2[0].0, all2[0].1)];
        }
        let c1: Vec<(usize, usize)> = all1
            .into_iter()
            .filter(|&(m, w)| self.prune[0].check(&[u, b1.get(m, w), y]))
            .collect();
        let c2: Vec<(usize, usize)> = all2
            .into_iter()
            .filter(|&(m, w)| self.prune[1].check(&[u, b2.get(m, w), y]))
            .collect();
        let mut out = Vec::new();
        for &(a, wa) in &c1 {
            for &(c, wc) in &c2 {
                if self.receiver.check(&[u, b1.get(a, wa), b2.get(c, wc), y]) {
                    out.push((a, wa, c, wc));
                }
            }
        }
        out
    }

    /// Aggregates `params.trials` trials, each seeded from `(seed, index)`.
    pub fn run(&self) -> Result<SimReport> {
        let outcomes: Vec<TrialOutcome> = (0..self.params.trials)
            .into_par_iter()
            .map(|t| self.run_trial(&mut sample_rng(self.params.seed, t)))
            .collect::<Result<_>>()?;
        let sum = |f: fn(&TrialOutcome) -> u64| outcomes.iter().map(f).sum::<u64>();
        let failures = outcomes.iter().filter(|o| !o.success).count() as u64;
        let (r1, r2) = self.sizes.rounded_rates(self.params.n);
        let keep = (self.params.blocks - 1) as f64 / self.params.blocks as f64;
        Ok(SimReport {
            encode_failures: sum(|o| o.encode_failures),
            decode_m0_errors: sum(|o| o.decode_m0_errors),
            cross_decode_errors: sum(|o| o.cross_decode_errors),
            final_message_errors: failures,
            error_rate: failures as f64 / self.params.trials as f64,
            effective_rates: (r1 * keep, r2 * keep),
        })
    }
}

fn unique<T>(mut it: impl Iterator<Item = T>) -> Option<T> {
    let first = it.next()?;
    it.next().is_none().then_some(first)
}

/// One trial of the scheme with freshly drawn codebooks.
pub fn run_trial<R: Rng + ?Sized>(
    p: &SchemeDistribution,
    params: &CodeParams,
    kind: &SchemeKind,
    rng: &mut R,
) -> Result<TrialOutcome> {
    Simulator::new(p, params, kind)?.run_trial(rng)
}

pub fn run_simulation(
    p: &SchemeDistribution,
    params: &CodeParams,
    kind: &SchemeKind,
) -> Result<SimReport> {
    Simulator::new(p, params, kind)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelKernel, StateModel};
    use crate::sim::SatelliteBook;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless() -> SchemeDistribution {
        let kernel = ChannelKernel::identity(2, 2).unwrap();
        SchemeDistribution::uncoded(&StateModel::null(), &kernel).unwrap()
    }

    fn full_nc() -> SchemeKind {
        SchemeKind::new(Feedback::TwoSided, Causality::NonCausal).unwrap()
    }

    #[test]
    fn unique_rejects_ties() {
        assert_eq!(unique([3].into_iter()), Some(3));
        assert_eq!(unique([3, 4].into_iter()), None);
        assert_eq!(unique(std::iter::empty::<usize>()), None);
    }

    #[test]
    fn gp_search_finds_exactly_typical_sequence() {
        let p = noiseless();
        let joint = build_joint(&p).unwrap();
        let test = TypicalityTest::new(&joint, &[var::U, var::V1, var::S0, var::S1], 0.01).unwrap();
        let zeros = vec![0u8; 8];
        let bin = vec![vec![0u8; 8], vec![0, 1, 0, 1, 0, 1, 0, 1], vec![1, 1, 1, 1, 0, 0, 0, 0]];
        assert_eq!(gp_bin_search(&bin, &zeros, &zeros, &zeros, &test), Some(1));
        assert_eq!(gp_bin_search(&bin[..1], &zeros, &zeros, &zeros, &test), None);
    }

    #[test]
    fn strictly_causal_encoder_ignores_recent_states() {
        let map = DetMap::from_fn([1, 2, 2, 2], 2, |_, v, s0, s1| v ^ s0 ^ s1).unwrap();
        let u = vec![0u8; 6];
        let v = vec![1u8, 0, 1, 1, 0, 0];
        let s0 = vec![0u8, 1, 1, 0, 1, 0];
        let s1 = vec![1u8, 1, 0, 0, 1, 1];
        for (causality, lag) in [
            (Causality::Causal, 0usize),
            (Causality::StrictlyCausal { lag: 1 }, 1),
            (Causality::StrictlyCausal { lag: 3 }, 3),
        ] {
            let base = apply_encoder(&map, &u, &v, &s0, &s1, causality);
            for j in 0..6 {
                let mut t0 = s0.clone();
                t0[j] ^= 1;
                let perturbed = apply_encoder(&map, &u, &v, &t0, &s1, causality);
                for i in 0..6 {
                    if i < j + lag {
                        assert_eq!(perturbed[i], base[i], "{causality:?}: index {i} saw state {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_message_always_succeeds() {
        let params = CodeParams { n: 6, blocks: 3, epsilon: 0.01, trials: 20, ..Default::default() };
        for kind in [full_nc(), SchemeKind::new(Feedback::Partial, Causality::Causal).unwrap()] {
            let report = run_simulation(&noiseless(), &params, &kind).unwrap();
            assert_eq!(report.error_rate, 0.0);
            assert_eq!(report.effective_rates, (0.0, 0.0));
        }
    }

    #[test]
    fn one_trial_rate_is_zero_or_one() {
        let params = CodeParams {
            n: 8,
            blocks: 3,
            r1: 0.5,
            r2: 0.5,
            epsilon: 3.0,
            trials: 1,
            ..Default::default()
        };
        let r = run_simulation(&noiseless(), &params, &full_nc()).unwrap();
        assert!(r.error_rate == 0.0 || r.error_rate == 1.0);
    }

    #[test]
    fn unsupported_modes_rejected() {
        let params = CodeParams::default();
        let none = SchemeKind::new(Feedback::None, Causality::NonCausal).unwrap();
        assert!(matches!(run_simulation(&noiseless(), &params, &none), Err(Error::Config(_))));
        let long = CodeParams { n: 64, ..Default::default() };
        assert!(matches!(run_simulation(&noiseless(), &long, &full_nc()), Err(Error::Size(_))));
        let big = CodeParams { n: 32, r1: 0.75, ..Default::default() };
        assert!(matches!(run_simulation(&noiseless(), &big, &full_nc()), Err(Error::Size(_))));
    }

    #[test]
    fn colliding_codewords_fail_instead_of_guessing() {
        // Two bins of transmitter 2 hold the same sequence, so neither the
        // receiver nor transmitter 1 can tell them apart.
        let p = noiseless();
        let params = CodeParams {
            n: 4,
            blocks: 2,
            r1: 0.25,
            r2: 0.25,
            epsilon: 3.0,
            ..Default::default()
        };
        let sim = Simulator::new(&p, &params, &full_nc()).unwrap();
        assert_eq!(sim.sizes().m2, 2);
        let books = CodebookEnsemble {
            u_book: vec![vec![0; 4]],
            v1_books: vec![SatelliteBook::new(2, 1, vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0]]).unwrap()],
            v2_books: vec![SatelliteBook::new(2, 1, vec![vec![0, 1, 0, 1]; 2]).unwrap()],
            partition: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut failures = 0;
        for _ in 0..40 {
            let out = sim.run_trial_with_books(&books, &mut rng);
            failures += usize::from(!out.success);
            assert_eq!(out.cross_decode_errors, 1);
        }
        // The single helping index always points at the first listed tuple,
        // so every trial that sent the second bin fails.
        assert!(failures > 5, "{failures}");
        // With distinct codewords the same channel always decodes.
        let mut fixed = books.clone();
        fixed.v2_books[0] = SatelliteBook::new(2, 1, vec![vec![0, 1, 0, 1], vec![1, 0, 1, 0]]).unwrap();
        for _ in 0..10 {
            assert!(sim.run_trial_with_books(&fixed, &mut rng).success);
        }
    }
}
