//! Rate regions represented by their sum-rate bounds over user subsets.

use serde::{Deserialize, Serialize};

use crate::subsets;

/// The bound on `∑_{t∈T} R_t` for one nonempty user subset `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetBound {
    pub users: Vec<usize>,
    /// Bound after clamping at zero.
    pub bound: f64,
    /// Value of the minimum over relay cuts before clamping.
    pub raw: f64,
    pub clamped: bool,
    /// Relay subset attaining the minimum, when the bound comes from a cut
    /// enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_relays: Option<Vec<usize>>,
}

/// `{R ≥ 0 : ∑_{t∈T} R_t ≤ bound(T) for every nonempty T}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub num_users: usize,
    /// One entry per nonempty user subset, ordered by bitmask.
    pub bounds: Vec<SubsetBound>,
}

impl RateRegion {
    /// Builds a region from `raw(mask) -> (value, binding relay mask)`.
    pub fn from_fn(num_users: usize, mut raw: impl FnMut(u32) -> (f64, Option<u32>)) -> Self {
        let bounds = subsets::nonempty(num_users)
            .map(|mask| {
                let (value, binding) = raw(mask);
                SubsetBound {
                    users: subsets::members(mask),
                    bound: value.max(0.0),
                    raw: value,
                    clamped: value < 0.0,
                    binding_relays: binding.map(subsets::members),
                }
            })
            .collect();
        Self { num_users, bounds }
    }

    /// A box `R_l ≤ caps[l]`, stored through its subset sums.
    pub fn from_box(caps: &[f64]) -> Self {
        Self::from_fn(caps.len(), |mask| {
            (subsets::members(mask).iter().map(|&l| caps[l]).sum(), None)
        })
    }

    /// The region `{0}` for `num_users` users.
    pub fn zero(num_users: usize) -> Self {
        Self::from_fn(num_users, |_| (0.0, None))
    }

    pub fn bound_mask(&self, mask: u32) -> f64 {
        assert!(mask != 0, "bounds exist for nonempty subsets only");
        self.bounds[mask as usize - 1].bound
    }

    pub fn bound(&self, users: &[usize]) -> f64 {
        self.bound_mask(subsets::from_members(users))
    }

    pub fn sum_rate(&self) -> f64 {
        self.bound_mask(subsets::full(self.num_users))
    }

    pub fn any_clamped(&self) -> bool {
        self.bounds.iter().any(|b| b.clamped)
    }

    pub fn contains(&self, rates: &[f64], tol: f64) -> bool {
        rates.len() == self.num_users
            && rates.iter().all(|&r| r >= -tol)
            && self.bounds.iter().all(|b| {
                b.users.iter().map(|&l| rates[l]).sum::<f64>() <= b.bound + tol
            })
    }

    /// Whether every bound of `self` is at most the matching bound of `other`.
    pub fn is_within(&self, other: &RateRegion, tol: f64) -> bool {
        self.num_users == other.num_users
            && self.bounds.iter().zip(&other.bounds).all(|(a, b)| a.bound <= b.bound + tol)
    }

    pub fn max_abs_diff(&self, other: &RateRegion) -> f64 {
        self.bounds
            .iter()
            .zip(&other.bounds)
            .map(|(a, b)| (a.bound - b.bound).abs())
            .fold(0.0, f64::max)
    }
}
