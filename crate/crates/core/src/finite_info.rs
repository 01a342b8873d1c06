//! Entropy and mutual information of dense finite joint distributions.
//!
//! A [`Pmf`] is a row-major tensor with one axis per random variable. Subsets
//! of variables are addressed with [`VarSet`]. Every quantity is in bits and
//! `0 · log 0` is taken as `0`; entries below [`ZERO_PROB`] count as exact
//! zeros.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest dense alphabet product accepted.
pub const MAX_ENTRIES: usize = 1 << 20;
/// Probabilities at or below this are treated as zero.
pub const ZERO_PROB: f64 = 1e-15;
/// Normalisation tolerance of a valid pmf.
pub const NORM_TOL: f64 = 1e-12;
/// Negative information values above `-CMI_TOL` are rounding noise.
pub const CMI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = checked_size(&shape)?;
        if probs.len() != size {
            return Err(Error::InvalidPmf(format!(
                "shape {shape:?} needs {size} entries, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { shape, probs })
    }

    /// Uniform distribution over the given alphabets.
    pub fn uniform(shape: Vec<usize>) -> Result<Self> {
        let size = checked_size(&shape)?;
        Self::new(shape, vec![1.0 / size as f64; size])
    }

    /// Independent product of one-dimensional marginals.
    pub fn product(factors: &[Vec<f64>]) -> Result<Self> {
        let shape: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let size = checked_size(&shape)?;
        let mut probs = vec![1.0; size];
        let mut index = vec![0usize; shape.len()];
        for p in probs.iter_mut() {
            for (axis, &i) in index.iter().enumerate() {
                *p *= factors[axis][i];
            }
            advance(&mut index, &shape);
        }
        Self::new(shape, probs)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_vars(&self) -> usize {
        self.shape.len()
    }

    /// Probability of a full outcome.
    pub fn get(&self, outcome: &[usize]) -> f64 {
        let mut flat = 0;
        for (&i, &n) in outcome.iter().zip(&self.shape) {
            flat = flat * n + i;
        }
        self.probs[flat]
    }
}

fn checked_size(shape: &[usize]) -> Result<usize> {
    let mut size: usize = 1;
    for &n in shape {
        if n == 0 {
            return Err(Error::InvalidPmf("alphabet sizes must be positive".into()));
        }
        size = size.saturating_mul(n);
        if size > MAX_ENTRIES {
            return Err(Error::TooLarge { size, cap: MAX_ENTRIES });
        }
    }
    Ok(size)
}

/// Row-major odometer step.
pub(crate) fn advance(index: &mut [usize], shape: &[usize]) {
    for axis in (0..shape.len()).rev() {
        index[axis] += 1;
        if index[axis] < shape[axis] {
            return;
        }
        index[axis] = 0;
    }
}

/// Sorted set of variable positions within a [`Pmf`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarSet {
    indices: Vec<usize>,
}

impl VarSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.indices.iter().chain(&other.indices).copied().collect())
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.indices.iter().all(|i| !other.indices.contains(i))
    }

    fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, &i| m | (1u64 << i))
    }

    fn check(&self, n: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
            None => Ok(()),
        }
    }
}

impl From<Vec<usize>> for VarSet {
    fn from(v: Vec<usize>) -> Self {
        VarSet::new(v)
    }
}

impl<const N: usize> From<[usize; N]> for VarSet {
    fn from(v: [usize; N]) -> Self {
        VarSet::new(v.to_vec())
    }
}

/// Marginal over `keep`, with axes in increasing variable order.
pub fn marginalize(joint: &Pmf, keep: &VarSet) -> Result<Pmf> {
    keep.check(joint.num_vars())?;
    let probs = marginal_probs(joint, keep);
    let shape = keep.indices.iter().map(|&i| joint.shape[i]).collect();
    Ok(Pmf { shape, probs })
}

fn marginal_probs(joint: &Pmf, keep: &VarSet) -> Vec<f64> {
    let shape = &joint.shape;
    // stride of each joint axis inside the kept tensor, 0 for summed axes
    let mut kstride = vec![0usize; shape.len()];
    let mut size = 1;
    for &axis in keep.indices.iter().rev() {
        kstride[axis] = size;
        size *= shape[axis];
    }
    let mut out = vec![0.0; size];
    let mut index = vec![0usize; shape.len()];
    let mut pos = 0usize;
    for &p in &joint.probs {
        out[pos] += p;
        // odometer over the joint, tracking the kept position incrementally
        for axis in (0..shape.len()).rev() {
            index[axis] += 1;
            pos += kstride[axis];
            if index[axis] < shape[axis] {
                break;
            }
            pos -= kstride[axis] * shape[axis];
            index[axis] = 0;
        }
    }
    out
}

fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > ZERO_PROB)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Joint entropy `H(vars)` in bits.
pub fn entropy(joint: &Pmf, vars: &VarSet) -> Result<f64> {
    vars.check(joint.num_vars())?;
    Ok(entropy_of(&marginal_probs(joint, vars)))
}

/// `I(A;B|C)` before clamping; may be slightly negative from rounding.
pub fn cond_mutual_info_raw(joint: &Pmf, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
    JointInfo::new(joint).cmi_raw(a, b, c)
}

/// `I(A;B|C)` in bits, clamped at zero.
pub fn cond_mutual_info(joint: &Pmf, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
    Ok(clamp_info(cond_mutual_info_raw(joint, a, b, c)?))
}

/// Whether `A — B — C` is a Markov chain, i.e. `I(A;C|B) ≤ tol`.
pub fn check_markov(joint: &Pmf, a: &VarSet, b: &VarSet, c: &VarSet, tol: f64) -> Result<bool> {
    Ok(cond_mutual_info_raw(joint, a, c, b)? <= tol)
}

fn clamp_info(v: f64) -> f64 {
    if v < 0.0 && v >= -CMI_TOL {
        0.0
    } else {
        v
    }
}

/// A joint pmf with memoised subset entropies.
///
/// The DM evaluators query hundreds of overlapping entropies of the same
/// joint; the memo is keyed by the variable bitmask.
pub struct JointInfo<'a> {
    joint: &'a Pmf,
    memo: Mutex<HashMap<u64, f64>>,
}

impl<'a> JointInfo<'a> {
    pub fn new(joint: &'a Pmf) -> Self {
        assert!(joint.num_vars() <= 64, "at most 64 variables");
        Self { joint, memo: Mutex::new(HashMap::new()) }
    }

    pub fn joint(&self) -> &Pmf {
        self.joint
    }

    pub fn entropy(&self, vars: &VarSet) -> Result<f64> {
        vars.check(self.joint.num_vars())?;
        if vars.is_empty() {
            return Ok(0.0);
        }
        let key = vars.mask();
        if let Some(&h) = self.memo.lock().unwrap().get(&key) {
            return Ok(h);
        }
        let h = entropy_of(&marginal_probs(self.joint, vars));
        self.memo.lock().unwrap().insert(key, h);
        Ok(h)
    }

    pub fn cmi_raw(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(Error::OverlappingSets);
        }
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let ac = a.union(c);
        let bc = b.union(c);
        let abc = ac.union(b);
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?)
    }

    /// `I(A;B|C)` clamped at zero.
    pub fn cmi(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
        Ok(clamp_info(self.cmi_raw(a, b, c)?))
    }
}
