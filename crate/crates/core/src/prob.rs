//! Dense joint probability tables over finite alphabets.
//!
//! Every information quantity used by the rate-region evaluators reduces to
//! entropies of marginals of a [`JointTable`]. All logarithms are base 2, so
//! entropies and mutual informations are in bits.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a table.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Negative information values above this magnitude are treated as bugs
/// rather than rounding noise.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// A named finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        let name = name.into();
        if size == 0 {
            return Err(Error::config(format!("alphabet `{name}` has size 0")));
        }
        Ok(Alphabet { name, size })
    }
}

/// A normalized probability table, row-major with the last variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    vars: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(vars: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        for (i, a) in vars.iter().enumerate() {
            if a.size == 0 {
                return Err(Error::config(format!("alphabet `{}` has size 0", a.name)));
            }
            if vars[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::config(format!("duplicate variable `{}`", a.name)));
            }
        }
        let cells = cell_count(&vars)
            .ok_or_else(|| Error::size("joint table cell count overflows usize"))?;
        if probs.len() != cells {
            return Err(Error::Shape(format!(
                "table has {} entries but the alphabets need {cells}",
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::config(format!("entry {i} is {p}, not a probability")));
        }
        let total = stable_sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::config(format!("table sums to {total}, not 1")));
        }
        Ok(JointTable { vars, probs })
    }

    /// Builds a table by evaluating `f` on every symbol tuple.
    pub fn from_fn(vars: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let cells = cell_count(&vars)
            .ok_or_else(|| Error::size("joint table cell count overflows usize"))?;
        let sizes: Vec<usize> = vars.iter().map(|a| a.size).collect();
        let mut digits = vec![0usize; sizes.len()];
        let mut probs = Vec::with_capacity(cells);
        for _ in 0..cells {
            probs.push(f(&digits));
            advance(&mut digits, &sizes);
        }
        JointTable::new(vars, probs)
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self> {
        let cells = cell_count(&vars)
            .ok_or_else(|| Error::size("joint table cell count overflows usize"))?;
        JointTable::new(vars, vec![1.0 / cells as f64; cells])
    }

    pub fn vars(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::config(format!("unknown variable `{name}`")))
    }

    /// Row-major strides, one per variable.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].size;
        }
        strides
    }

    /// Probability of one symbol tuple, given in table order.
    pub fn prob(&self, symbols: &[usize]) -> f64 {
        debug_assert_eq!(symbols.len(), self.vars.len());
        let idx: usize = symbols
            .iter()
            .zip(self.strides())
            .map(|(s, stride)| s * stride)
            .sum();
        self.probs[idx]
    }

    /// Sums out every variable not in `keep`. The result lists the kept
    /// variables in table order, whatever order `keep` names them in.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointTable> {
        let mask = self.mask_of(keep)?;
        Ok(self.marginalize_mask(&mask))
    }

    /// H(of | given) in bits.
    pub fn entropy(&self, of: &[&str], given: &[&str]) -> Result<f64> {
        let of_mask = self.mask_of(of)?;
        let given_mask = self.mask_of(given)?;
        ensure_disjoint(&of_mask, &given_mask, of, given)?;
        let both: Vec<bool> = of_mask.iter().zip(&given_mask).map(|(a, b)| *a || *b).collect();
        let h = self.mask_entropy(&both) - self.mask_entropy(&given_mask);
        clamp_negative(h, "conditional entropy")
    }

    /// I(a; b | given) in bits.
    pub fn mutual_info(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let a_mask = self.mask_of(a)?;
        let b_mask = self.mask_of(b)?;
        let g_mask = self.mask_of(given)?;
        ensure_disjoint(&a_mask, &b_mask, a, b)?;
        ensure_disjoint(&a_mask, &g_mask, a, given)?;
        ensure_disjoint(&b_mask, &g_mask, b, given)?;
        let union = |x: &[bool], y: &[bool]| -> Vec<bool> {
            x.iter().zip(y).map(|(p, q)| *p || *q).collect()
        };
        let ag = union(&a_mask, &g_mask);
        let bg = union(&b_mask, &g_mask);
        let abg = union(&ag, &b_mask);
        let value = self.mask_entropy(&ag) + self.mask_entropy(&bg)
            - self.mask_entropy(&abg)
            - self.mask_entropy(&g_mask);
        clamp_negative(value, "mutual information")
    }

    fn mask_of(&self, names: &[&str]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.vars.len()];
        for name in names {
            let i = self.var_index(name)?;
            if mask[i] {
                return Err(Error::config(format!("variable `{name}` listed twice")));
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    fn marginalize_mask(&self, mask: &[bool]) -> JointTable {
        let vars: Vec<Alphabet> = self
            .vars
            .iter()
            .zip(mask)
            .filter(|(_, keep)| **keep)
            .map(|(a, _)| a.clone())
            .collect();
        let out_len = vars.iter().map(|a| a.size).product::<usize>();
        // Stride of each source variable inside the output table; 0 if dropped.
        let mut target_strides = vec![0usize; self.vars.len()];
        let mut stride = 1usize;
        for i in (0..self.vars.len()).rev() {
            if mask[i] {
                target_strides[i] = stride;
                stride *= self.vars[i].size;
            }
        }
        let sizes: Vec<usize> = self.vars.iter().map(|a| a.size).collect();
        let mut out = vec![0.0; out_len];
        let mut digits = vec![0usize; sizes.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            for d in (0..sizes.len()).rev() {
                digits[d] += 1;
                target += target_strides[d];
                if digits[d] < sizes[d] {
                    break;
                }
                target -= target_strides[d] * sizes[d];
                digits[d] = 0;
            }
        }
        JointTable { vars, probs: out }
    }

    fn mask_entropy(&self, mask: &[bool]) -> f64 {
        if !mask.iter().any(|m| *m) {
            return 0.0;
        }
        if mask.iter().all(|m| *m) {
            return entropy_of(&self.probs);
        }
        entropy_of(&self.marginalize_mask(mask).probs)
    }
}

/// Entropy in bits of a probability vector, with 0·log 0 = 0.
pub fn entropy_of(probs: &[f64]) -> f64 {
    stable_sum(
        probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| -p * p.log2()),
    )
}

/// Neumaier-compensated summation.
pub(crate) fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Draws a point from the symmetric Dirichlet distribution with the given
/// concentration. Concentration 1 is uniform over the simplex.
pub fn sample_simplex<R: Rng + ?Sized>(
    dim: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::config("simplex dimension must be at least 1"));
    }
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(Error::config(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    if dim == 1 {
        return Ok(vec![1.0]);
    }
    let gamma = Gamma::new(concentration, 1.0)
        .map_err(|e| Error::config(format!("bad concentration: {e}")))?;
    let mut draws: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        for d in &mut draws {
            *d /= total;
        }
    } else {
        // Every gamma draw underflowed; the Dirichlet limit is a vertex.
        let vertex = rng.random_range(0..dim);
        draws.iter_mut().enumerate().for_each(|(i, d)| *d = f64::from(u8::from(i == vertex)));
    }
    Ok(draws)
}

pub(crate) fn cell_count(vars: &[Alphabet]) -> Option<usize> {
    vars.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.size))
}

/// Odometer increment, last digit fastest.
pub(crate) fn advance(digits: &mut [usize], sizes: &[usize]) {
    for d in (0..sizes.len()).rev() {
        digits[d] += 1;
        if digits[d] < sizes[d] {
            return;
        }
        digits[d] = 0;
    }
}

fn ensure_disjoint(x: &[bool], y: &[bool], xn: &[&str], yn: &[&str]) -> Result<()> {
    if x.iter().zip(y).any(|(a, b)| *a && *b) {
        return Err(Error::config(format!(
            "variable sets {xn:?} and {yn:?} overlap"
        )));
    }
    Ok(())
}

/// Differences of entropies this close to zero are rounding noise (a
/// constant variable still leaves ~1e-16 behind) and are reported as 0.
const ZERO_SNAP: f64 = 1e-14;

fn clamp_negative(value: f64, what: &str) -> Result<f64> {
    if value > ZERO_SNAP {
        Ok(value)
    } else if value >= -NEGATIVE_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!("{what} evaluated to {value}")))
    }
}
