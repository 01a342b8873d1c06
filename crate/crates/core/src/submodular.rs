//! The fronthaul polytope of a target sum rate and the time-shared
//! successive schedules that dominate its extreme points.
//!
//! For a policy and a sum rate `R`, the joint-decoding constraints read
//! `∑_{k∈S} C_k ≥ g(S)` with
//!
//! ```text
//! g(S) = R + I(U_S; Y_S | U_{S^c}, Q) − I(U_K; X_L | Q),
//! ```
//!
//! so the feasible fronthaul vectors form `P_R = {C ≥ 0 : ∑_S C_k ≥ g⁺(S)}`.
//! `g⁺ = max(g, 0)` is supermodular and every ordering of the relays gives an
//! extreme point by prefix differences.

use serde::{Deserialize, Serialize};

use crate::dm::{self, DmCranModel, DmEvaluator, DmPolicy, SchemeRegion, Tensor};
use crate::subsets;
use crate::{Error, Result};

/// Comparison slack of the polytope and domination checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest relay count for the pairwise supermodularity check.
pub const MAX_SUPERMODULAR_RELAYS: usize = 5;
/// Largest relay count for ordering enumeration.
pub const MAX_ORDERING_RELAYS: usize = 4;

/// `g` and `g⁺` over all relay subsets, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFunctionBound {
    pub num_relays: usize,
    pub rsum: f64,
    pub g_values: Vec<f64>,
    pub gplus: Vec<f64>,
}

impl SetFunctionBound {
    pub fn from_table(num_relays: usize, rsum: f64, g_values: Vec<f64>) -> Result<Self> {
        if g_values.len() != 1 << num_relays {
            return Err(Error::DimensionMismatch(format!("need {} values", 1usize << num_relays)));
        }
        let gplus = g_values.iter().map(|g| g.max(0.0)).collect();
        Ok(Self { num_relays, rsum, g_values, gplus })
    }

    pub fn g(&self, mask: u32) -> f64 {
        self.g_values[mask as usize]
    }

    pub fn g_plus(&self, mask: u32) -> f64 {
        self.gplus[mask as usize]
    }

    /// Whether `alloc` satisfies every constraint of `P_R` within `tol`.
    pub fn contains(&self, alloc: &[f64], tol: f64) -> bool {
        alloc.iter().all(|&c| c >= -tol)
            && subsets::nonempty(self.num_relays)
                .all(|s| subsets::members(s).iter().map(|&k| alloc[k]).sum::<f64>() >= self.g_plus(s) - tol)
    }
}

/// `g(S)` in its defining form.
pub fn g_of_s(eval: &DmEvaluator, rsum: f64, relays: u32) -> f64 {
    let all = subsets::full(eval.layout().relays);
    rsum + eval.compression(relays) - eval.input_info(all)
}

/// `R + I(U_S; Y_S | X_L, U_{S^c}, Q) − I(U_{S^c}; X_L | Q)`, equal to
/// [`g_of_s`] under the quantizer Markov chains.
pub fn g_of_s_dual(eval: &DmEvaluator, rsum: f64, relays: u32) -> f64 {
    let rest = subsets::complement(relays, eval.layout().relays);
    rsum + eval.compression_given_inputs(relays) - eval.input_info(rest)
}

pub fn set_function(eval: &DmEvaluator, rsum: f64) -> SetFunctionBound {
    let k = eval.layout().relays;
    let g = subsets::all(k).map(|s| g_of_s(eval, rsum, s)).collect();
    SetFunctionBound::from_table(k, rsum, g).expect("table has 2^K entries")
}

/// Pairwise check of `g⁺(A∪B) + g⁺(A∩B) ≥ g⁺(A) + g⁺(B) − tol`.
pub fn check_supermodular(bound: &SetFunctionBound, tol: f64) -> Result<bool> {
    if bound.num_relays > MAX_SUPERMODULAR_RELAYS {
        return Err(Error::TooManyRelays { count: bound.num_relays, cap: MAX_SUPERMODULAR_RELAYS });
    }
    let n = bound.num_relays;
    Ok(subsets::all(n).all(|a| {
        subsets::all(n).all(|b| bound.g_plus(a | b) + bound.g_plus(a & b) >= bound.g_plus(a) + bound.g_plus(b) - tol)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremePoint {
    /// Relays in greedy order.
    pub ordering: Vec<usize>,
    /// `C̃_k` indexed by relay.
    pub allocation: Vec<f64>,
    /// Position (0-based) of the first prefix with `g > 0`.
    pub j_index: Option<usize>,
    /// Fraction of time the relay at `j_index` stays silent.
    pub alpha: f64,
    /// `I(Y_j; U_j | U_{later}, Q)` for the relay at `j_index`.
    pub denominator: Option<f64>,
}

fn prefix_mask(ordering: &[usize], len: usize) -> u32 {
    subsets::from_members(&ordering[..len])
}

pub fn extreme_point(eval: &DmEvaluator, bound: &SetFunctionBound, ordering: &[usize]) -> Result<ExtremePoint> {
    let k_n = bound.num_relays;
    if !subsets::is_permutation(ordering, k_n) {
        return Err(Error::InvalidPermutation(format!("ordering {ordering:?}")));
    }
    let mut allocation = vec![0.0; k_n];
    for pos in 0..k_n {
        let now = bound.g_plus(prefix_mask(ordering, pos + 1));
        let before = bound.g_plus(prefix_mask(ordering, pos));
        allocation[ordering[pos]] = now - before;
    }
    let j = (0..k_n).find(|&pos| bound.g(prefix_mask(ordering, pos + 1)) > 0.0);
    let Some(j) = j else {
        return Ok(ExtremePoint { ordering: ordering.to_vec(), allocation, j_index: None, alpha: 1.0, denominator: None });
    };
    let relay = ordering[j];
    let later = subsets::from_members(&ordering[j + 1..]);
    let denom = eval.wyner_ziv_rate(relay, later);
    let g_prev = bound.g(prefix_mask(ordering, j));
    if denom <= 1e-15 {
        return Err(Error::DegenerateAlpha { position: j, g_prev });
    }
    let alpha = (-g_prev / denom).clamp(0.0, 1.0);
    Ok(ExtremePoint { ordering: ordering.to_vec(), allocation, j_index: Some(j), alpha, denominator: Some(denom) })
}

/// A successive schedule over the composite time-sharing variable
/// `Q' = (B, Q)`, `B ~ Bernoulli(α)`, indexed `q' = b·|Q| + q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub policy: DmPolicy,
    /// Decompression order: the reverse of the extreme point's ordering.
    pub relay_order: Vec<usize>,
    /// Wyner-Ziv rate of each relay under `relay_order`, indexed by relay.
    pub per_relay_rates: Vec<f64>,
    /// `I(X_L; U'_K | Q')`.
    pub achieved_rsum: f64,
}

fn constant_quantizer(q: usize, y: usize, u: usize) -> Tensor {
    let mut data = vec![0.0; q * y * u];
    for row in 0..q * y {
        data[row * u] = 1.0;
    }
    Tensor::new(vec![q, y, u], data).expect("shape matches")
}

/// Relays before position `j` send nothing, the relay at `j` is silent when
/// `B = 1` and the rest keep their quantizers.
pub fn construct_cf_ssd_schedule(model: &DmCranModel, policy: &DmPolicy, ep: &ExtremePoint) -> Result<Schedule> {
    let k_n = model.num_relays();
    if !subsets::is_permutation(&ep.ordering, k_n) {
        return Err(Error::InvalidPermutation(format!("ordering {:?}", ep.ordering)));
    }
    let q = policy.q_card();
    let position: Vec<usize> = {
        let mut p = vec![0; k_n];
        ep.ordering.iter().enumerate().for_each(|(i, &k)| p[k] = i);
        p
    };
    let j = ep.j_index.unwrap_or(k_n);
    let mixing = ep.j_index.is_some() && ep.alpha > 0.0;
    let phases = if mixing { 2 } else { 1 };

    let pq: Vec<f64> = if mixing {
        let mut v: Vec<f64> = policy.pq().iter().map(|p| p * (1.0 - ep.alpha)).collect();
        v.extend(policy.pq().iter().map(|p| p * ep.alpha));
        v
    } else {
        policy.pq().to_vec()
    };
    let px = policy
        .px_given_q()
        .iter()
        .map(|t| {
            let data: Vec<f64> = (0..phases).flat_map(|_| t.data.iter().copied()).collect();
            Tensor::new(vec![q * phases, t.shape[1]], data)
        })
        .collect::<Result<Vec<_>>>()?;
    let pu = policy
        .pu_given_yq()
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let (y, u) = (t.shape[1], t.shape[2]);
            let silent = constant_quantizer(q, y, u);
            let per_phase: Vec<&Tensor> = (0..phases)
                .map(|b| {
                    let off = position[k] < j || (position[k] == j && b == 1);
                    if off {
                        &silent
                    } else {
                        t
                    }
                })
                .collect();
            let data = per_phase.iter().flat_map(|p| p.data.iter().copied()).collect();
            Tensor::new(vec![q * phases, y, u], data)
        })
        .collect::<Result<Vec<_>>>()?;
    let composite = DmPolicy::new(pq, px, pu)?;

    let relay_order: Vec<usize> = ep.ordering.iter().rev().copied().collect();
    let joint = dm::assemble_joint(model, &composite)?;
    let eval = DmEvaluator::new(model, &joint);
    let per_relay_rates = eval.successive_compression_rates(&relay_order);
    let achieved_rsum = eval.input_info(subsets::full(k_n));
    Ok(Schedule { policy: composite, relay_order, per_relay_rates, achieved_rsum })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingVerdict {
    pub ordering: Vec<usize>,
    pub allocation: Vec<f64>,
    pub j_index: Option<usize>,
    pub alpha: f64,
    pub per_relay_rates: Vec<f64>,
    pub achieved_rsum: f64,
    /// Sum rate of the successive region of the schedule at fronthaul `C̃`.
    pub ssd_sum_rate: Option<f64>,
    pub in_polytope: bool,
    pub dominated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub rsum: f64,
    pub fronthaul: Vec<f64>,
    /// Holds whenever `rsum > 0`. At a clamped zero rate the fronthaul may
    /// fall short of `P_0`.
    pub fronthaul_in_polytope: bool,
    pub supermodular: bool,
    pub tolerance: f64,
    pub orderings: Vec<OrderingVerdict>,
    pub failures: usize,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks every extreme point of `P_R` at `R = sumrate_cf_jd` against its
/// constructed successive schedule.
pub fn verify_domination(model: &DmCranModel, policy: &DmPolicy, tol: f64) -> Result<DominationReport> {
    let k_n = model.num_relays();
    if k_n > MAX_ORDERING_RELAYS {
        return Err(Error::TooManyRelays { count: k_n, cap: MAX_ORDERING_RELAYS });
    }
    let joint = dm::assemble_joint(model, policy)?;
    let eval = DmEvaluator::new(model, &joint);
    let rsum = eval.sumrate_cf_jd();
    let bound = set_function(&eval, rsum);
    let supermodular = check_supermodular(&bound, tol)?;
    let fronthaul_in_polytope = bound.contains(model.fronthaul(), tol);
    let mut orderings = Vec::new();
    for ordering in subsets::permutations(k_n) {
        orderings.push(verify_ordering(model, policy, &eval, &bound, &ordering, tol)?);
    }
    let failures = orderings.iter().filter(|o| !o.dominated).count()
        + usize::from(!supermodular)
        + usize::from(rsum > 0.0 && !fronthaul_in_polytope);
    Ok(DominationReport { rsum, fronthaul: model.fronthaul().to_vec(), fronthaul_in_polytope, supermodular, tolerance: tol, orderings, failures })
}

fn verify_ordering(
    model: &DmCranModel,
    policy: &DmPolicy,
    eval: &DmEvaluator,
    bound: &SetFunctionBound,
    ordering: &[usize],
    tol: f64,
) -> Result<OrderingVerdict> {
    let ep = extreme_point(eval, bound, ordering)?;
    let in_polytope = bound.contains(&ep.allocation, tol);
    let schedule = construct_cf_ssd_schedule(model, policy, &ep)?;
    let mut failure = None;
    if !in_polytope {
        failure = Some("extreme point violates a polytope constraint".to_string());
    }
    for (k, (&r, &c)) in schedule.per_relay_rates.iter().zip(&ep.allocation).enumerate() {
        if r > c + tol {
            failure.get_or_insert(format!("relay {k} needs {r} bits, allocation is {c}"));
        }
    }
    if schedule.achieved_rsum < bound.rsum - tol {
        failure.get_or_insert(format!("sum rate {} below {}", schedule.achieved_rsum, bound.rsum));
    }
    let padded: Vec<f64> = ep.allocation.iter().map(|c| c + tol).collect();
    let ssd = dm::region_cf_ssd(
        &model.with_fronthaul(padded)?,
        &schedule.policy,
        &schedule.relay_order,
        &(0..model.num_users()).collect::<Vec<_>>(),
    )?;
    let ssd_sum_rate = match ssd {
        SchemeRegion::Feasible { region } => Some(region.sum_rate()),
        SchemeRegion::Infeasible { .. } => None,
    };
    match ssd_sum_rate {
        None => {
            failure.get_or_insert("schedule is infeasible at the allocation".to_string());
        }
        Some(v) if v < bound.rsum - tol => {
            failure.get_or_insert(format!("successive sum rate {v} below {}", bound.rsum));
        }
        Some(_) => {}
    }
    Ok(OrderingVerdict {
        ordering: ordering.to_vec(),
        allocation: ep.allocation,
        j_index: ep.j_index,
        alpha: ep.alpha,
        per_relay_rates: schedule.per_relay_rates,
        achieved_rsum: schedule.achieved_rsum,
        ssd_sum_rate,
        in_polytope,
        dominated: failure.is_none(),
        failure,
    })
}
