//! Discrete-memoryless CRAN models and their compress-and-forward regions.
//!
//! The joint distribution of a policy is always assembled in the product form
//! `p(q) ∏ p(x_l|q) p(y_K|x_L) ∏ p(u_k|y_k,q)`, with variables laid out as
//! `(Q, X_1..X_L, Y_1..Y_K, U_1..U_K)`. Every region is reported as a
//! [`RateRegion`] whose bounds already contain the minimum over relay cuts.

use serde::{Deserialize, Serialize};

use crate::finite_info::{self, JointInfo, Pmf, VarSet};
use crate::region::RateRegion;
use crate::subsets;
use crate::{Error, Result};

/// Largest relay count for exhaustive cut enumeration.
pub const MAX_RELAYS: usize = 16;
/// Tolerance of the conditional-independence check in [`region_theorem1`].
pub const MARKOV_TOL: f64 = 1e-9;
/// Row-normalisation tolerance for conditional pmfs read from documents.
pub const ROW_TOL: f64 = 1e-9;
/// Slack allowed in fronthaul feasibility comparisons.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Dense row-major tensor with its shape listed first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "tensor shape {shape:?} needs {n} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Checks that every row along the trailing `trailing` axes is a pmf and
    /// renormalises it exactly.
    fn normalise_rows(&mut self, trailing: usize, what: &str) -> Result<()> {
        let row: usize = self.shape[self.shape.len() - trailing..].iter().product();
        for (i, chunk) in self.data.chunks_mut(row).enumerate() {
            if chunk.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidPmf(format!("{what}: row {i} has a negative entry")));
            }
            let s: f64 = chunk.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidPmf(format!("{what}: row {i} sums to {s}")));
            }
            chunk.iter_mut().for_each(|p| *p /= s);
        }
        Ok(())
    }
}

/// A DM CRAN: `L` users, `K` relays, the channel `p(y_1..y_K | x_1..x_L)`
/// and the fronthaul capacities in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmCranModelDoc", into = "DmCranModelDoc")]
pub struct DmCranModel {
    x_alphabets: Vec<usize>,
    y_alphabets: Vec<usize>,
    /// Shape `[X_1..X_L, Y_1..Y_K]`; rows over the `Y` axes sum to one.
    channel: Tensor,
    fronthaul: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DmCranModelDoc {
    users: usize,
    relays: usize,
    x_alphabets: Vec<usize>,
    y_alphabets: Vec<usize>,
    channel: Tensor,
    fronthaul: Vec<f64>,
}

impl TryFrom<DmCranModelDoc> for DmCranModel {
    type Error = Error;
    fn try_from(doc: DmCranModelDoc) -> Result<Self> {
        if doc.x_alphabets.len() != doc.users || doc.y_alphabets.len() != doc.relays {
            return Err(Error::DimensionMismatch(
                "alphabet lists must have one entry per user and per relay".into(),
            ));
        }
        DmCranModel::new(doc.x_alphabets, doc.y_alphabets, doc.channel, doc.fronthaul)
    }
}

impl From<DmCranModel> for DmCranModelDoc {
    fn from(m: DmCranModel) -> Self {
        DmCranModelDoc {
            users: m.num_users(),
            relays: m.num_relays(),
            x_alphabets: m.x_alphabets,
            y_alphabets: m.y_alphabets,
            channel: m.channel,
            fronthaul: m.fronthaul,
        }
    }
}

impl DmCranModel {
    pub fn new(
        x_alphabets: Vec<usize>,
        y_alphabets: Vec<usize>,
        mut channel: Tensor,
        fronthaul: Vec<f64>,
    ) -> Result<Self> {
        if x_alphabets.is_empty() || y_alphabets.is_empty() {
            return Err(Error::DimensionMismatch("need at least one user and one relay".into()));
        }
        if y_alphabets.len() > MAX_RELAYS {
            return Err(Error::TooManyRelays { count: y_alphabets.len(), cap: MAX_RELAYS });
        }
        if x_alphabets.iter().chain(&y_alphabets).any(|&n| n == 0) {
            return Err(Error::InvalidPmf("alphabet sizes must be positive".into()));
        }
        let shape: Vec<usize> = x_alphabets.iter().chain(&y_alphabets).copied().collect();
        if channel.shape != shape {
            return Err(Error::DimensionMismatch(format!(
                "channel shape {:?} does not match alphabets {shape:?}",
                channel.shape
            )));
        }
        Tensor::new(channel.shape.clone(), std::mem::take(&mut channel.data))
            .map(|t| channel = t)?;
        channel.normalise_rows(y_alphabets.len(), "channel")?;
        if fronthaul.len() != y_alphabets.len() {
            return Err(Error::DimensionMismatch("one fronthaul capacity per relay".into()));
        }
        if fronthaul.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidPmf("fronthaul capacities must be nonnegative".into()));
        }
        Ok(Self { x_alphabets, y_alphabets, channel, fronthaul })
    }

    /// Channel whose outputs are conditionally independent given the inputs:
    /// `p(y_K|x_L) = ∏_k p(y_k|x_L)`. Each factor has shape `[X_1..X_L, Y_k]`.
    pub fn conditionally_independent(
        x_alphabets: Vec<usize>,
        factors: &[Tensor],
        fronthaul: Vec<f64>,
    ) -> Result<Self> {
        let y_alphabets: Vec<usize> = factors.iter().map(|f| *f.shape.last().unwrap()).collect();
        let shape: Vec<usize> = x_alphabets.iter().chain(&y_alphabets).copied().collect();
        let n: usize = shape.iter().product();
        let l = x_alphabets.len();
        let mut data = Vec::with_capacity(n);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..n {
            let mut p = 1.0;
            for (k, f) in factors.iter().enumerate() {
                let mut flat = 0;
                for i in 0..l {
                    flat = flat * x_alphabets[i] + index[i];
                }
                p *= f.data[flat * y_alphabets[k] + index[l + k]];
            }
            data.push(p);
            finite_info::advance(&mut index, &shape);
        }
        Self::new(x_alphabets, y_alphabets, Tensor::new(shape, data)?, fronthaul)
    }

    pub fn num_users(&self) -> usize {
        self.x_alphabets.len()
    }

    pub fn num_relays(&self) -> usize {
        self.y_alphabets.len()
    }

    pub fn x_alphabets(&self) -> &[usize] {
        &self.x_alphabets
    }

    pub fn y_alphabets(&self) -> &[usize] {
        &self.y_alphabets
    }

    pub fn channel(&self) -> &Tensor {
        &self.channel
    }

    pub fn fronthaul(&self) -> &[f64] {
        &self.fronthaul
    }

    pub fn with_fronthaul(&self, fronthaul: Vec<f64>) -> Result<Self> {
        Self::new(self.x_alphabets.clone(), self.y_alphabets.clone(), self.channel.clone(), fronthaul)
    }
}

/// Input and quantizer distributions: `p(q)`, `p(x_l|q)` with shape
/// `[Q, X_l]` and `p(u_k|y_k,q)` with shape `[Q, Y_k, U_k]`.
///
/// The alphabets of `Q` and `U_k` are read off these tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmPolicyDoc", into = "DmPolicyDoc")]
pub struct DmPolicy {
    pq: Vec<f64>,
    px_given_q: Vec<Tensor>,
    pu_given_yq: Vec<Tensor>,
}

#[derive(Serialize, Deserialize)]
struct DmPolicyDoc {
    pq: Vec<f64>,
    px_given_q: Vec<Tensor>,
    pu_given_yq: Vec<Tensor>,
}

impl TryFrom<DmPolicyDoc> for DmPolicy {
    type Error = Error;
    fn try_from(d: DmPolicyDoc) -> Result<Self> {
        DmPolicy::new(d.pq, d.px_given_q, d.pu_given_yq)
    }
}

impl From<DmPolicy> for DmPolicyDoc {
    fn from(p: DmPolicy) -> Self {
        DmPolicyDoc { pq: p.pq, px_given_q: p.px_given_q, pu_given_yq: p.pu_given_yq }
    }
}

impl DmPolicy {
    pub fn new(pq: Vec<f64>, mut px_given_q: Vec<Tensor>, mut pu_given_yq: Vec<Tensor>) -> Result<Self> {
        let mut pq_t = Tensor::new(vec![pq.len()], pq)?;
        pq_t.normalise_rows(1, "p(q)")?;
        let q = pq_t.data.len();
        for (l, t) in px_given_q.iter_mut().enumerate() {
            if t.shape.len() != 2 || t.shape[0] != q {
                return Err(Error::DimensionMismatch(format!("p(x_{l}|q) must have shape [Q, X]")));
            }
            *t = Tensor::new(t.shape.clone(), std::mem::take(&mut t.data))?;
            t.normalise_rows(1, &format!("p(x_{l}|q)"))?;
        }
        for (k, t) in pu_given_yq.iter_mut().enumerate() {
            if t.shape.len() != 3 || t.shape[0] != q {
                return Err(Error::DimensionMismatch(format!("p(u_{k}|y_{k},q) must have shape [Q, Y, U]")));
            }
            *t = Tensor::new(t.shape.clone(), std::mem::take(&mut t.data))?;
            t.normalise_rows(1, &format!("p(u_{k}|y_{k},q)"))?;
        }
        Ok(Self { pq: pq_t.data, px_given_q, pu_given_yq })
    }

    pub fn q_card(&self) -> usize {
        self.pq.len()
    }

    pub fn u_card(&self, k: usize) -> usize {
        self.pu_given_yq[k].shape[2]
    }

    pub fn pq(&self) -> &[f64] {
        &self.pq
    }

    pub fn px_given_q(&self) -> &[Tensor] {
        &self.px_given_q
    }

    pub fn pu_given_yq(&self) -> &[Tensor] {
        &self.pu_given_yq
    }

    fn check_against(&self, model: &DmCranModel) -> Result<()> {
        if self.px_given_q.len() != model.num_users() || self.pu_given_yq.len() != model.num_relays() {
            return Err(Error::DimensionMismatch(
                "policy needs one input pmf per user and one quantizer per relay".into(),
            ));
        }
        for (l, t) in self.px_given_q.iter().enumerate() {
            if t.shape[1] != model.x_alphabets[l] {
                return Err(Error::DimensionMismatch(format!("input alphabet of user {l}")));
            }
        }
        for (k, t) in self.pu_given_yq.iter().enumerate() {
            if t.shape[1] != model.y_alphabets[k] {
                return Err(Error::DimensionMismatch(format!("output alphabet of relay {k}")));
            }
        }
        Ok(())
    }
}

/// Positions of the model variables inside an assembled joint.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub users: usize,
    pub relays: usize,
}

impl Layout {
    pub fn q(&self) -> usize {
        0
    }
    pub fn x(&self, l: usize) -> usize {
        1 + l
    }
    pub fn y(&self, k: usize) -> usize {
        1 + self.users + k
    }
    pub fn u(&self, k: usize) -> usize {
        1 + self.users + self.relays + k
    }
    pub fn xs(&self, users: u32) -> VarSet {
        VarSet::new(subsets::members(users).into_iter().map(|l| self.x(l)).collect())
    }
    pub fn ys(&self, relays: u32) -> VarSet {
        VarSet::new(subsets::members(relays).into_iter().map(|k| self.y(k)).collect())
    }
    pub fn us(&self, relays: u32) -> VarSet {
        VarSet::new(subsets::members(relays).into_iter().map(|k| self.u(k)).collect())
    }
    pub fn qs(&self) -> VarSet {
        VarSet::new(vec![0])
    }
}

/// Joint pmf of `(Q, X_L, Y_K, U_K)` under `policy`.
pub fn assemble_joint(model: &DmCranModel, policy: &DmPolicy) -> Result<Pmf> {
    policy.check_against(model)?;
    let l_n = model.num_users();
    let k_n = model.num_relays();
    let mut shape = vec![policy.q_card()];
    shape.extend(&model.x_alphabets);
    shape.extend(&model.y_alphabets);
    shape.extend((0..k_n).map(|k| policy.u_card(k)));
    let size = shape.iter().try_fold(1usize, |acc, &n| {
        let s = acc.saturating_mul(n);
        (s <= finite_info::MAX_ENTRIES).then_some(s)
    });
    let size = size.ok_or(Error::TooLarge {
        size: shape.iter().fold(1usize, |a, &n| a.saturating_mul(n)),
        cap: finite_info::MAX_ENTRIES,
    })?;

    let mut probs = Vec::with_capacity(size);
    let mut index = vec![0usize; shape.len()];
    let ch = &model.channel;
    for _ in 0..size {
        let q = index[0];
        let mut p = policy.pq[q];
        let mut ch_flat = 0;
        for l in 0..l_n {
            let x = index[1 + l];
            p *= policy.px_given_q[l].data[q * model.x_alphabets[l] + x];
            ch_flat = ch_flat * model.x_alphabets[l] + x;
        }
        for k in 0..k_n {
            let y = index[1 + l_n + k];
            let u = index[1 + l_n + k_n + k];
            ch_flat = ch_flat * model.y_alphabets[k] + y;
            let t = &policy.pu_given_yq[k];
            p *= t.data[(q * t.shape[1] + y) * t.shape[2] + u];
        }
        p *= ch.data[ch_flat];
        probs.push(p);
        finite_info::advance(&mut index, &shape);
    }
    // products of exact rows can drift from one by a few ulps per factor
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Pmf::new(shape, probs)
}

/// Outcome of a scheme whose fronthaul constraints may fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SchemeRegion {
    Feasible { region: RateRegion },
    Infeasible {
        /// Relay subset whose compression constraint fails.
        relays: Vec<usize>,
        required: f64,
        available: f64,
    },
}

impl SchemeRegion {
    pub fn region(&self) -> Option<&RateRegion> {
        match self {
            SchemeRegion::Feasible { region } => Some(region),
            SchemeRegion::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.region().is_some()
    }
}

/// Information quantities of one assembled (model, policy) pair.
pub struct DmEvaluator<'a> {
    model: &'a DmCranModel,
    layout: Layout,
    info: JointInfo<'a>,
}

impl<'a> DmEvaluator<'a> {
    pub fn new(model: &'a DmCranModel, joint: &'a Pmf) -> Self {
        let layout = Layout { users: model.num_users(), relays: model.num_relays() };
        Self { model, layout, info: JointInfo::new(joint) }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn info(&self) -> &JointInfo<'a> {
        &self.info
    }

    fn all_users(&self) -> u32 {
        subsets::full(self.layout.users)
    }

    fn all_relays(&self) -> u32 {
        subsets::full(self.layout.relays)
    }

    /// `I(a ; b | c, Q)`.
    pub fn cmi_q(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> f64 {
        self.info.cmi(a, b, &c.union(&self.layout.qs())).expect("layout sets are disjoint")
    }

    /// `I(X_T ; U_S | X_{T^c}, Q)`.
    pub fn mac_info(&self, users: u32, relays: u32) -> f64 {
        let lay = self.layout;
        let rest = subsets::complement(users, lay.users);
        self.cmi_q(&lay.xs(users), &lay.us(relays), &lay.xs(rest))
    }

    /// `I(Y_S ; U_S | X_L, U_{S^c}, Q)`.
    pub fn compression_given_inputs(&self, relays: u32) -> f64 {
        let lay = self.layout;
        let rest = subsets::complement(relays, lay.relays);
        self.cmi_q(&lay.ys(relays), &lay.us(relays), &lay.xs(self.all_users()).union(&lay.us(rest)))
    }

    /// `I(U_S ; Y_S | U_{S^c}, Q)`.
    pub fn compression(&self, relays: u32) -> f64 {
        let lay = self.layout;
        let rest = subsets::complement(relays, lay.relays);
        self.cmi_q(&lay.us(relays), &lay.ys(relays), &lay.us(rest))
    }

    /// `I(Y_k ; U_k | U_side, Q)` for a single relay and side-information set.
    pub fn wyner_ziv_rate(&self, relay: usize, side: u32) -> f64 {
        let lay = self.layout;
        let r = 1u32 << relay;
        self.cmi_q(&lay.ys(r), &lay.us(r), &lay.us(side & !r))
    }

    /// `I(X_L ; U_S | Q)`.
    pub fn input_info(&self, relays: u32) -> f64 {
        let lay = self.layout;
        self.cmi_q(&lay.xs(self.all_users()), &lay.us(relays), &VarSet::empty())
    }

    fn fronthaul_sum(&self, relays: u32) -> f64 {
        subsets::members(relays).iter().map(|&k| self.model.fronthaul[k]).sum()
    }

    /// Checks `Y_k — X_L — Y_{K∖k}` for every relay.
    pub fn check_conditional_independence(&self, tol: f64) -> Result<()> {
        let lay = self.layout;
        for k in 0..lay.relays {
            let me = 1u32 << k;
            let others = self.all_relays() & !me;
            if others == 0 {
                continue;
            }
            let cmi = self.info.cmi_raw(&lay.ys(me), &lay.ys(others), &lay.xs(self.all_users()))?;
            if cmi > tol {
                return Err(Error::MarkovViolation { relay: k, cmi });
            }
        }
        Ok(())
    }

    fn min_over_cuts(&self, mut cut: impl FnMut(u32) -> f64) -> (f64, Option<u32>) {
        let mut best = (f64::INFINITY, None);
        for s in subsets::all(self.layout.relays) {
            let v = cut(s);
            if v < best.0 {
                best = (v, Some(s));
            }
        }
        best
    }

    pub fn region_theorem1(&self) -> Result<RateRegion> {
        self.check_conditional_independence(MARKOV_TOL)?;
        let lay = self.layout;
        let per_relay: Vec<f64> = (0..lay.relays)
            .map(|k| {
                let r = 1u32 << k;
                self.model.fronthaul[k]
                    - self.cmi_q(&lay.ys(r), &lay.us(r), &lay.xs(self.all_users()))
            })
            .collect();
        Ok(RateRegion::from_fn(lay.users, |t| {
            self.min_over_cuts(|s| {
                let fronthaul: f64 = subsets::members(s).iter().map(|&k| per_relay[k]).sum();
                fronthaul + self.mac_info(t, subsets::complement(s, lay.relays))
            })
        }))
    }

    pub fn region_cf_jd(&self) -> RateRegion {
        let lay = self.layout;
        RateRegion::from_fn(lay.users, |t| {
            self.min_over_cuts(|s| {
                self.fronthaul_sum(s) - self.compression_given_inputs(s)
                    + self.mac_info(t, subsets::complement(s, lay.relays))
            })
        })
    }

    pub fn sumrate_cf_jd(&self) -> f64 {
        let lay = self.layout;
        let (v, _) = self.min_over_cuts(|s| {
            self.fronthaul_sum(s) - self.compression_given_inputs(s)
                + self.input_info(subsets::complement(s, lay.relays))
        });
        v.max(0.0)
    }

    pub fn region_cf_sd(&self) -> SchemeRegion {
        let lay = self.layout;
        // smallest violated subset first, ties by mask
        let mut order: Vec<u32> = subsets::nonempty(lay.relays).collect();
        order.sort_by_key(|&s| (subsets::size(s), s));
        for s in order {
            let required = self.compression(s);
            let available = self.fronthaul_sum(s);
            if available + FEASIBILITY_TOL < required {
                return SchemeRegion::Infeasible { relays: subsets::members(s), required, available };
            }
        }
        let all = self.all_relays();
        SchemeRegion::Feasible {
            region: RateRegion::from_fn(lay.users, |t| (self.mac_info(t, all), None)),
        }
    }

    /// Per-relay Wyner-Ziv rates `I(U_{π(k)} ; Y_{π(k)} | U_{π(1..k-1)}, Q)`,
    /// indexed by relay.
    pub fn successive_compression_rates(&self, relay_order: &[usize]) -> Vec<f64> {
        let mut rates = vec![0.0; self.layout.relays];
        let mut side = 0u32;
        for &k in relay_order {
            rates[k] = self.wyner_ziv_rate(k, side);
            side |= 1 << k;
        }
        rates
    }

    /// Per-user successive decoding rates `I(X_{π(l)} ; U_K | X_{π(1..l-1)}, Q)`,
    /// indexed by user.
    pub fn successive_user_rates(&self, user_order: &[usize]) -> Vec<f64> {
        let lay = self.layout;
        let all = self.all_relays();
        let mut rates = vec![0.0; lay.users];
        let mut known = 0u32;
        for &l in user_order {
            rates[l] = self.cmi_q(&lay.xs(1 << l), &lay.us(all), &lay.xs(known));
            known |= 1 << l;
        }
        rates
    }

    pub fn region_cf_ssd(&self, relay_order: &[usize], user_order: &[usize]) -> Result<SchemeRegion> {
        let lay = self.layout;
        if !subsets::is_permutation(relay_order, lay.relays) {
            return Err(Error::InvalidPermutation(format!("relay order {relay_order:?}")));
        }
        if !subsets::is_permutation(user_order, lay.users) {
            return Err(Error::InvalidPermutation(format!("user order {user_order:?}")));
        }
        let rates = self.successive_compression_rates(relay_order);
        for &k in relay_order {
            let available = self.model.fronthaul[k];
            if available + FEASIBILITY_TOL < rates[k] {
                return Ok(SchemeRegion::Infeasible { relays: vec![k], required: rates[k], available });
            }
        }
        let caps = self.successive_user_rates(user_order);
        Ok(SchemeRegion::Feasible { region: RateRegion::from_box(&caps) })
    }
}

fn with_evaluator<T>(
    model: &DmCranModel,
    policy: &DmPolicy,
    f: impl FnOnce(&DmEvaluator) -> Result<T>,
) -> Result<T> {
    let joint = assemble_joint(model, policy)?;
    f(&DmEvaluator::new(model, &joint))
}

/// Capacity region of the conditionally independent class, for one policy.
///
/// Fails with [`Error::MarkovViolation`] when some `Y_k — X_L — Y_{K∖k}`
/// does not hold within [`MARKOV_TOL`].
pub fn region_theorem1(model: &DmCranModel, policy: &DmPolicy) -> Result<RateRegion> {
    with_evaluator(model, policy, |e| e.region_theorem1())
}

/// Region of compress-and-forward with joint decompression and decoding.
pub fn region_cf_jd(model: &DmCranModel, policy: &DmPolicy) -> Result<RateRegion> {
    with_evaluator(model, policy, |e| Ok(e.region_cf_jd()))
}

/// Region of compress-and-forward with separate decompression then decoding.
pub fn region_cf_sd(model: &DmCranModel, policy: &DmPolicy) -> Result<SchemeRegion> {
    with_evaluator(model, policy, |e| Ok(e.region_cf_sd()))
}

/// Box region of successive decompression and decoding in the given orders.
pub fn region_cf_ssd(
    model: &DmCranModel,
    policy: &DmPolicy,
    relay_order: &[usize],
    user_order: &[usize],
) -> Result<SchemeRegion> {
    with_evaluator(model, policy, |e| e.region_cf_ssd(relay_order, user_order))
}

/// Maximum CF-JD sum rate for one policy, clamped at zero.
pub fn sumrate_cf_jd(model: &DmCranModel, policy: &DmPolicy) -> Result<f64> {
    with_evaluator(model, policy, |e| Ok(e.sumrate_cf_jd()))
}

/// One decoding order of the successive scheme and its box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsdBox {
    pub relay_order: Vec<usize>,
    pub user_order: Vec<usize>,
    pub outcome: SchemeRegion,
}

/// The successive region as the union of the boxes of all `K!·L!` orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsdUnion {
    pub boxes: Vec<SsdBox>,
}

impl SsdUnion {
    pub fn contains(&self, rates: &[f64], tol: f64) -> bool {
        self.boxes
            .iter()
            .filter_map(|b| b.outcome.region())
            .any(|r| r.contains(rates, tol))
    }

    /// Largest sum rate over the feasible boxes, `None` if none is feasible.
    pub fn max_sum_rate(&self) -> Option<f64> {
        self.boxes
            .iter()
            .filter_map(|b| b.outcome.region())
            .map(|r| r.sum_rate())
            .reduce(f64::max)
    }
}

/// Supports up to four relays and four users.
pub fn region_cf_ssd_union(model: &DmCranModel, policy: &DmPolicy) -> Result<SsdUnion> {
    if model.num_relays() > 4 || model.num_users() > 4 {
        return Err(Error::Unsupported("order enumeration needs K, L ≤ 4".into()));
    }
    with_evaluator(model, policy, |e| {
        let mut boxes = Vec::new();
        for relay_order in subsets::permutations(model.num_relays()) {
            for user_order in subsets::permutations(model.num_users()) {
                let outcome = e.region_cf_ssd(&relay_order, &user_order)?;
                boxes.push(SsdBox { relay_order: relay_order.clone(), user_order, outcome });
            }
        }
        Ok(SsdUnion { boxes })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// L = K = 1 noiseless binary link with `U = Y = X`.
    pub(crate) fn noiseless_single(c: f64) -> (DmCranModel, DmPolicy) {
        let ch = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let model = DmCranModel::new(vec![2], vec![2], ch, vec![c]).unwrap();
        let policy = DmPolicy::new(
            vec![1.0],
            vec![Tensor::new(vec![1, 2], vec![0.5, 0.5]).unwrap()],
            vec![Tensor::new(vec![1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap()],
        )
        .unwrap();
        (model, policy)
    }

    #[test]
    fn point_mass_policy_gives_point_mass_joint() {
        let ch = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let model = DmCranModel::new(vec![2], vec![2], ch, vec![1.0]).unwrap();
        let policy = DmPolicy::new(
            vec![1.0],
            vec![Tensor::new(vec![1, 2], vec![0.0, 1.0]).unwrap()],
            vec![Tensor::new(vec![1, 2, 2], vec![1.0, 0.0, 1.0, 0.0]).unwrap()],
        )
        .unwrap();
        let j = assemble_joint(&model, &policy).unwrap();
        assert_eq!(j.get(&[0, 1, 1, 0]), 1.0);
        assert_eq!(j.probs().iter().filter(|&&p| p > 0.0).count(), 1);
    }

    #[test]
    fn identity_quantizer_keeps_all_information() {
        let (model, policy) = noiseless_single(1.0);
        let j = assemble_joint(&model, &policy).unwrap();
        let e = DmEvaluator::new(&model, &j);
        let lay = e.layout();
        let i = e.info().cmi(&lay.xs(1), &lay.us(1), &VarSet::empty()).unwrap();
        assert!((i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assembled_joint_has_quantizer_markov_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
            let j = assemble_joint(&model, &policy).unwrap();
            let lay = Layout { users: 2, relays: 2 };
            // U_k — (Y_k, Q) — (X_L, Y_other, U_other)
            for k in 0..2 {
                let o = 1u32 << (1 - k);
                let rest = lay.xs(0b11).union(&lay.ys(o)).union(&lay.us(o));
                let cond = lay.ys(1 << k).union(&lay.qs());
                assert!(finite_info::check_markov(&j, &lay.us(1 << k), &cond, &rest, 1e-12).unwrap());
            }
            // channel marginal is preserved
            let m = finite_info::marginalize(&j, &lay.xs(0b11).union(&lay.ys(0b11))).unwrap();
            let px = finite_info::marginalize(&j, &lay.xs(0b11)).unwrap();
            for (idx, p) in m.probs().iter().enumerate() {
                let xflat = idx / 4;
                let expect = px.probs()[xflat] * model.channel().data[idx];
                assert!((p - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_fronthaul_collapses_every_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, true);
        let model = model.with_fronthaul(vec![0.0, 0.0]).unwrap();
        let t1 = region_theorem1(&model, &policy).unwrap();
        let jd = region_cf_jd(&model, &policy).unwrap();
        for r in [&t1, &jd] {
            assert!(r.bounds.iter().all(|b| b.bound < 1e-12));
        }
        assert_eq!(sumrate_cf_jd(&model, &policy).unwrap(), 0.0);
    }

    #[test]
    fn noiseless_single_link_rates() {
        let (model, policy) = noiseless_single(1.0);
        assert!((region_theorem1(&model, &policy).unwrap().sum_rate() - 1.0).abs() < 1e-12);
        assert!((region_cf_jd(&model, &policy).unwrap().sum_rate() - 1.0).abs() < 1e-12);
        assert!((sumrate_cf_jd(&model, &policy).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Bound table by direct enumeration of every (T, S) pair from raw
    /// entropies, without the evaluator's helpers.
    fn brute_force_theorem1(model: &DmCranModel, policy: &DmPolicy) -> Vec<f64> {
        let j = assemble_joint(model, policy).unwrap();
        let (l_n, k_n) = (model.num_users(), model.num_relays());
        let lay = Layout { users: l_n, relays: k_n };
        let h = |v: &VarSet| finite_info::entropy(&j, v).unwrap();
        let cmi = |a: &VarSet, b: &VarSet, c: &VarSet| {
            h(&a.union(c)) + h(&b.union(c)) - h(&a.union(b).union(c)) - h(c)
        };
        let q = lay.qs();
        let xall = lay.xs(subsets::full(l_n));
        (1..(1u32 << l_n))
            .map(|t| {
                let mut best = f64::INFINITY;
                for s in 0..(1u32 << k_n) {
                    let mut v = 0.0;
                    for k in subsets::members(s) {
                        v += model.fronthaul()[k]
                            - cmi(&lay.ys(1 << k), &lay.us(1 << k), &xall.union(&q));
                    }
                    let sc = subsets::full(k_n) & !s;
                    let tc = subsets::full(l_n) & !t;
                    v += cmi(&lay.xs(t), &lay.us(sc), &lay.xs(tc).union(&q));
                    best = best.min(v);
                }
                best.max(0.0)
            })
            .collect()
    }

    #[test]
    fn theorem1_matches_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, true);
            let r = region_theorem1(&model, &policy).unwrap();
            let want = brute_force_theorem1(&model, &policy);
            for (b, w) in r.bounds.iter().zip(&want) {
                assert!((b.bound - w).abs() < 1e-10, "{} vs {w}", b.bound);
            }
        }
    }

    #[test]
    fn theorem1_rejects_dependent_outputs() {
        // Y_1 = Y_2 = X xor Z with common noise Z: outputs dependent given X
        let e = 0.2;
        let mut data = vec![0.0; 8];
        for x in 0..2 {
            data[x * 4 + x * 3] = 1.0 - e;
            data[x * 4 + (1 - x) * 3] = e;
        }
        let model = DmCranModel::new(vec![2], vec![2, 2], Tensor::new(vec![2, 2, 2], data).unwrap(), vec![1.0, 1.0])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let policy = random::dm_policy(&mut rng, &model, 1, 2);
        match region_theorem1(&model, &policy) {
            Err(Error::MarkovViolation { relay: 0, cmi }) => assert!(cmi > 0.1),
            other => panic!("expected a Markov violation, got {other:?}"),
        }
        // the general inner bound still evaluates
        assert!(region_cf_jd(&model, &policy).is_ok());
    }

    #[test]
    fn cf_jd_empty_cut_and_constant_quantizers() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
        let j = assemble_joint(&model, &policy).unwrap();
        let e = DmEvaluator::new(&model, &j);
        let r = e.region_cf_jd();
        for t in subsets::nonempty(2) {
            assert!(r.bound_mask(t) <= e.mac_info(t, 0b11) + 1e-12);
        }

        let constant = DmPolicy::new(
            policy.pq().to_vec(),
            policy.px_given_q().to_vec(),
            (0..2).map(|_| Tensor::new(vec![2, 2, 2], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap()).collect(),
        )
        .unwrap();
        let r = region_cf_jd(&model, &constant).unwrap();
        assert!(r.bounds.iter().all(|b| b.bound.abs() < 1e-12));
    }

    #[test]
    fn cf_sd_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let (model, policy) = random::dm_instance(&mut rng, 1, 2, 2, false);
        let rich = model.with_fronthaul(vec![100.0, 100.0]).unwrap();
        let j = assemble_joint(&rich, &policy).unwrap();
        let e = DmEvaluator::new(&rich, &j);
        match e.region_cf_sd() {
            SchemeRegion::Feasible { region } => {
                assert!((region.sum_rate() - e.mac_info(1, 0b11)).abs() < 1e-15)
            }
            _ => panic!("large fronthaul must be feasible"),
        }

        let poor = model.with_fronthaul(vec![0.0, 0.0]).unwrap();
        match region_cf_sd(&poor, &policy).unwrap() {
            SchemeRegion::Infeasible { relays, .. } => assert_eq!(relays.len(), 1),
            _ => panic!("zero fronthaul with informative quantizers is infeasible"),
        }
    }

    #[test]
    fn cf_sd_feasibility_matches_exhaustive_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..20 {
            let (model, policy) = random::dm_instance(&mut rng, 1, 3, 2, false);
            let j = assemble_joint(&model, &policy).unwrap();
            let e = DmEvaluator::new(&model, &j);
            let lay = e.layout();
            let exhaustive = subsets::nonempty(3).all(|s| {
                let need = finite_info::cond_mutual_info(
                    &j,
                    &lay.us(s),
                    &lay.ys(s),
                    &lay.us(7 & !s).union(&lay.qs()),
                )
                .unwrap();
                subsets::members(s).iter().map(|&k| model.fronthaul()[k]).sum::<f64>() + 1e-12 >= need
            });
            assert_eq!(e.region_cf_sd().is_feasible(), exhaustive);
        }
    }

    #[test]
    fn ssd_single_link_equals_sd() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for _ in 0..10 {
            let (model, policy) = random::dm_instance(&mut rng, 1, 1, 2, false);
            let sd = region_cf_sd(&model, &policy).unwrap();
            let ssd = region_cf_ssd(&model, &policy, &[0], &[0]).unwrap();
            match (&sd, &ssd) {
                (SchemeRegion::Feasible { region: a }, SchemeRegion::Feasible { region: b }) => {
                    assert!(a.max_abs_diff(b) < 1e-14)
                }
                (SchemeRegion::Infeasible { .. }, SchemeRegion::Infeasible { .. }) => {}
                _ => panic!("feasibility differs: {sd:?} vs {ssd:?}"),
            }
        }
    }

    #[test]
    fn ssd_orthogonal_noiseless_users() {
        // Y_k = X_k, U_k = Y_k, uniform inputs
        let mut data = vec![0.0; 16];
        for x1 in 0..2 {
            for x2 in 0..2 {
                data[((x1 * 2 + x2) * 2 + x1) * 2 + x2] = 1.0;
            }
        }
        let model = DmCranModel::new(vec![2, 2], vec![2, 2], Tensor::new(vec![2, 2, 2, 2], data).unwrap(), vec![1.0, 1.0])
            .unwrap();
        let id = Tensor::new(vec![1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let half = Tensor::new(vec![1, 2], vec![0.5, 0.5]).unwrap();
        let policy = DmPolicy::new(vec![1.0], vec![half.clone(), half], vec![id.clone(), id]).unwrap();
        let r = region_cf_ssd(&model, &policy, &[1, 0], &[0, 1]).unwrap();
        let r = r.region().expect("C = H(Y) is feasible");
        assert!((r.bound(&[0]) - 1.0).abs() < 1e-12);
        assert!((r.bound(&[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssd_rejects_bad_orders() {
        let (model, policy) = noiseless_single(1.0);
        assert!(matches!(region_cf_ssd(&model, &policy, &[1], &[0]), Err(Error::InvalidPermutation(_))));
        assert!(matches!(region_cf_ssd(&model, &policy, &[0], &[0, 0]), Err(Error::InvalidPermutation(_))));
    }

    #[test]
    fn sumrate_equals_full_bound_of_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
            let r = region_cf_jd(&model, &policy).unwrap();
            let s = sumrate_cf_jd(&model, &policy).unwrap();
            assert!((r.sum_rate() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_joint_is_rejected() {
        let x = vec![4; 4];
        let y = vec![4; 4];
        let shape: Vec<usize> = x.iter().chain(&y).copied().collect();
        let n: usize = shape.iter().product();
        let ch = Tensor::new(shape, vec![1.0 / 256.0; n]).unwrap();
        let model = DmCranModel::new(x, y, ch, vec![1.0; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let policy = random::dm_policy(&mut rng, &model, 1, 4);
        assert!(matches!(assemble_joint(&model, &policy), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
        let m2: DmCranModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        let p2: DmPolicy = serde_json::from_str(&serde_json::to_string(&policy).unwrap()).unwrap();
        assert_eq!(model, m2);
        assert_eq!(policy, p2);

        let bad = r#"{"users":1,"relays":1,"x_alphabets":[2],"y_alphabets":[2],
            "channel":{"shape":[2,2],"data":[0.5,0.4,0.0,1.0]},"fronthaul":[1.0]}"#;
        assert!(serde_json::from_str::<DmCranModel>(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn scheme_containment(seed in any::<u64>(), users in 1usize..=2, relays in 1usize..=3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (model, policy) = random::dm_instance(&mut rng, users, relays, 2, false);
                let jd = region_cf_jd(&model, &policy).unwrap();
                if let SchemeRegion::Feasible { region: sd } = region_cf_sd(&model, &policy).unwrap() {
                    prop_assert!(sd.is_within(&jd, 1e-9));
                }
                let union = region_cf_ssd_union(&model, &policy).unwrap();
                for b in &union.boxes {
                    if let Some(ssd) = b.outcome.region() {
                        let j = assemble_joint(&model, &policy).unwrap();
                        let e = DmEvaluator::new(&model, &j);
                        let full = subsets::full(users);
                        for t in subsets::nonempty(users) {
                            prop_assert!(ssd.bound_mask(t) <= e.mac_info(t, subsets::full(relays)) + 1e-9);
                        }
                        prop_assert!(ssd.bound_mask(full) <= jd.sum_rate() + 1e-9);
                    }
                }
            }

            #[test]
            fn class_collapse(seed in any::<u64>(), users in 1usize..=2, relays in 1usize..=3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (model, policy) = random::dm_instance(&mut rng, users, relays, 2, true);
                let jd = region_cf_jd(&model, &policy).unwrap();
                let t1 = region_theorem1(&model, &policy).unwrap();
                prop_assert!(jd.max_abs_diff(&t1) < 1e-9);
            }

            #[test]
            fn monotone_in_fronthaul(seed in any::<u64>(), bump in 0.0f64..2.0, which in 0usize..2) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
                let mut c = model.fronthaul().to_vec();
                c[which] += bump;
                let bigger = model.with_fronthaul(c).unwrap();
                let a = region_cf_jd(&model, &policy).unwrap();
                let b = region_cf_jd(&bigger, &policy).unwrap();
                prop_assert!(a.is_within(&b, 1e-12));
            }
        }
    }
}
