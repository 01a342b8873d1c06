//! Gaussian rate regions with oblivious relays.
//!
//! For user subset `T` and relay cut `S`, a time-sharing profile gives
//!
//! ```text
//! ∑_{k∈S} [C_k − E_Q log|Σ_k⁻¹|/|Σ_k⁻¹ − B_{k,Q}|]
//!     + E_Q log|∑_{k∈S^c} H_{k,T}ᴴ B_{k,Q} H_{k,T} + K_{T,Q}⁻¹| / |K_{T,Q}⁻¹|
//! ```
//!
//! and the region is the union over profiles of `{∑_T R ≤ min_S bound(T, S)}`.
//! Regions are reported per `T`, each maximized separately.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian_info::{
    self, clip_spectrum, info_term, psd_sqrt, CMatrix, GaussianCranModel,
    QuantizerProfile, TimeShare, TimeShareEntry, PROJECTION_CEIL,
};
use crate::optimize::{self, OptResult, PgConfig};
use crate::region::RateRegion;
use crate::subsets;
use crate::{Error, Result};

/// Smallest time-sharing weight seen by the optimizer.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// `∑_{k∈S}[C_k − E cost_k] + E info(T, S^c)` before clamping.
pub fn gaussian_bound_raw(model: &GaussianCranModel, ts: &TimeShare, users: u32, relays: u32) -> Result<f64> {
    let k_n = model.num_relays();
    let sc = subsets::complement(relays, k_n);
    let mut v: f64 = subsets::members(relays).iter().map(|&k| model.fronthaul()[k]).sum();
    for e in ts.entries() {
        if e.weight == 0.0 {
            continue;
        }
        let cost: f64 = subsets::members(relays).iter().map(|&k| e.quantizers.compression_cost(k)).sum();
        let blocks: Vec<&CMatrix> = subsets::members(users).into_iter().map(|l| &e.inputs[l]).collect();
        let k_t = gaussian_info::block_diag(&blocks);
        v += e.weight * (info_term(model, users, sc, &k_t, &e.quantizers)? - cost);
    }
    Ok(v)
}

/// [`gaussian_bound_raw`] clamped at zero.
pub fn gaussian_bound(model: &GaussianCranModel, ts: &TimeShare, users: u32, relays: u32) -> Result<f64> {
    Ok(gaussian_bound_raw(model, ts, users, relays)?.max(0.0))
}

/// Cut-set bound: `B_k = Σ_k⁻¹` and no compression cost.
pub fn cutset_bound(model: &GaussianCranModel, users: u32, relays: u32) -> f64 {
    let sc = subsets::complement(relays, model.num_relays());
    let fronthaul: f64 = subsets::members(relays).iter().map(|&k| model.fronthaul()[k]).sum();
    let eye: Vec<CMatrix> = model.rx_antennas().iter().map(|&m| CMatrix::identity(m, m)).collect();
    let k_t = model.caps_block(users);
    fronthaul + gaussian_info::info_term_whitened(model, users, sc, &k_t, &eye).expect("caps block matches users")
}

/// The cut-set region `{∑_T R ≤ min_S cutset(T, S)}`.
pub fn cutset_region(model: &GaussianCranModel) -> RateRegion {
    RateRegion::from_fn(model.num_users(), |t| {
        let mut best = (f64::INFINITY, None);
        for s in subsets::all(model.num_relays()) {
            let v = cutset_bound(model, t, s);
            if v < best.0 {
                best = (v, Some(s));
            }
        }
        best
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapRegime {
    #[serde(rename = "KM>2N")]
    Large,
    #[serde(rename = "KM<=2N")]
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    pub users: Vec<usize>,
    pub relays: Vec<usize>,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    /// Per-user gap in bits.
    pub delta: f64,
    pub regime: GapRegime,
    /// `cutset(T, S) − achieved(T)` for every pair.
    pub per_constraint_slack: Vec<ConstraintSlack>,
    /// `min_S cutset(T, S) − achieved(T)` per nonempty `T`, by bitmask.
    pub per_subset_gap: Vec<f64>,
    pub tolerance: f64,
    pub verified: bool,
}

/// Per-user gap for `K` relays with `M` antennas serving users with `N`.
pub fn gap_delta(k: usize, m: usize, n: usize) -> (f64, GapRegime) {
    let (km, n) = ((k * m) as f64, n as f64);
    if km > 2.0 * n {
        (0.5 * n * (2.45 + (km / n).log2()), GapRegime::Large)
    } else {
        (0.5 * (km + n), GapRegime::Small)
    }
}

/// Checks `min_S cutset(T, S) − achieved(T) ≤ |T|·Δ + tol` for every `T`.
pub fn gap_certificate(model: &GaussianCranModel, achieved: &RateRegion, tol: f64) -> Result<GapCertificate> {
    let (n, m) = model
        .equal_antennas()
        .ok_or_else(|| Error::Unsupported("gap certificate needs equal antenna counts".into()))?;
    if achieved.num_users != model.num_users() {
        return Err(Error::DimensionMismatch("region and model user counts differ".into()));
    }
    let (delta, regime) = gap_delta(model.num_relays(), m, n);
    let mut per_constraint_slack = Vec::new();
    let mut per_subset_gap = Vec::new();
    let mut verified = true;
    for t in subsets::nonempty(model.num_users()) {
        let a = achieved.bound_mask(t);
        let mut gap = f64::INFINITY;
        for s in subsets::all(model.num_relays()) {
            let slack = cutset_bound(model, t, s) - a;
            gap = gap.min(slack);
            per_constraint_slack.push(ConstraintSlack { users: subsets::members(t), relays: subsets::members(s), slack });
        }
        verified &= gap <= subsets::size(t) as f64 * delta + tol;
        per_subset_gap.push(gap);
    }
    Ok(GapCertificate { delta, regime, per_constraint_slack, per_subset_gap, tolerance: tol, verified })
}

/// Hermitian `m × m` matrix from `m²` reals: the diagonal, then `(re, im)`
/// of each upper entry.
fn herm_from(p: &[f64], m: usize) -> CMatrix {
    let mut out = CMatrix::zeros(m, m);
    let mut o = m;
    for i in 0..m {
        out[(i, i)] = p[i].into();
        for j in i + 1..m {
            let z = num_complex::Complex64::new(p[o], p[o + 1]);
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
            o += 2;
        }
    }
    out
}

fn herm_to(a: &CMatrix, p: &mut [f64]) {
    let m = a.nrows();
    let mut o = m;
    for i in 0..m {
        p[i] = a[(i, i)].re;
        for j in i + 1..m {
            p[o] = a[(i, j)].re;
            p[o + 1] = a[(i, j)].im;
            o += 2;
        }
    }
}

fn project_herm(p: &mut [f64], m: usize) {
    if m == 1 {
        p[0] = p[0].clamp(0.0, PROJECTION_CEIL);
        return;
    }
    let a = clip_spectrum(&herm_from(p, m), 0.0, PROJECTION_CEIL);
    herm_to(&a, p);
}

/// Euclidean projection onto `{s ≥ 0, ∑ s ≤ 1}`.
fn project_capped_simplex(v: &mut [f64]) {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= 1.0 {
        v.copy_from_slice(&clipped);
    } else {
        optimize::project_simplex(v, 0.0);
    }
}

/// How the inputs of each phase are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputRule {
    /// `K_{l,q} = K_l`.
    AtCaps,
    /// `K_{l,q} = (s_{l,q}/α_q) K_l` with `∑_q s_{l,q} = 1`.
    Shares,
    /// `K_{l,q} = (s_{l,q}/α_q) K_l` with `∑_q s_{l,q} ≤ 1`.
    SharesBelowCap,
}

/// Parameter layout `[weights?] ++ shares ++ quantizers` for one problem.
#[derive(Debug, Clone)]
struct Layout {
    q: usize,
    users: usize,
    antennas: Vec<usize>,
    free_weights: bool,
    inputs: InputRule,
}

impl Layout {
    fn n_weights(&self) -> usize {
        if self.free_weights {
            self.q
        } else {
            0
        }
    }

    fn n_shares(&self) -> usize {
        match self.inputs {
            InputRule::AtCaps => 0,
            _ => self.users * self.q,
        }
    }

    fn per_phase(&self) -> usize {
        self.antennas.iter().map(|m| m * m).sum()
    }

    fn dim(&self) -> usize {
        self.n_weights() + self.n_shares() + self.q * self.per_phase()
    }

    fn b_offset(&self, q: usize, k: usize) -> usize {
        self.n_weights() + self.n_shares() + q * self.per_phase() + self.antennas[..k].iter().map(|m| m * m).sum::<usize>()
    }

    fn weights<'a>(&self, x: &'a [f64], fixed: &'a [f64]) -> &'a [f64] {
        if self.free_weights {
            &x[..self.q]
        } else {
            fixed
        }
    }

    /// Share `s_{l,q}`, or the weight itself when inputs sit at the caps.
    fn share(&self, x: &[f64], w: &[f64], l: usize, q: usize) -> f64 {
        match self.inputs {
            InputRule::AtCaps => w[q],
            _ => x[self.n_weights() + l * self.q + q],
        }
    }

    fn quantizer(&self, x: &[f64], q: usize, k: usize) -> CMatrix {
        let m = self.antennas[k];
        let o = self.b_offset(q, k);
        herm_from(&x[o..o + m * m], m)
    }

    fn project(&self, x: &mut [f64]) {
        if self.free_weights {
            optimize::project_simplex(&mut x[..self.q], WEIGHT_FLOOR);
        }
        let nw = self.n_weights();
        if self.inputs != InputRule::AtCaps {
            for l in 0..self.users {
                let shares = &mut x[nw + l * self.q..nw + (l + 1) * self.q];
                if self.inputs == InputRule::Shares {
                    optimize::project_simplex(shares, 0.0);
                } else {
                    project_capped_simplex(shares);
                }
            }
        }
        for q in 0..self.q {
            for (k, &m) in self.antennas.iter().enumerate() {
                let o = self.b_offset(q, k);
                project_herm(&mut x[o..o + m * m], m);
            }
        }
    }
}

/// Precomputed `K_T^{1/2} G_{k,T}ᴴ` factors of one user subset.
struct CutTable {
    /// `(user, first row, rows)` inside `K_T`.
    rows: Vec<(usize, usize, usize)>,
    factors: Vec<CMatrix>,
}

impl CutTable {
    fn new(model: &GaussianCranModel, users: u32) -> Self {
        let half = psd_sqrt(&model.caps_block(users));
        let factors = (0..model.num_relays())
            .map(|k| &half * model.whitened_block(1 << k, users).adjoint())
            .collect();
        let mut rows = Vec::new();
        let mut o = 0;
        for l in subsets::members(users) {
            let n = model.tx_antennas()[l];
            rows.push((l, o, n));
            o += n;
        }
        Self { rows, factors }
    }

    fn dim(&self) -> usize {
        self.rows.iter().map(|r| r.2).sum()
    }
}

fn log2det_pd(m: &CMatrix) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].re.log2();
    }
    let d = m.determinant().re;
    if d > 0.0 {
        d.log2()
    } else {
        f64::NAN
    }
}

fn cost_fast(bt: &CMatrix) -> f64 {
    let m = bt.nrows();
    let d = if m == 1 { 1.0 - bt[(0, 0)].re } else { (CMatrix::identity(m, m) - bt).determinant().re };
    if d > 0.0 {
        -d.log2()
    } else {
        f64::INFINITY
    }
}

struct Problem<'a> {
    model: &'a GaussianCranModel,
    layout: Layout,
    table: CutTable,
    fixed_weights: Vec<f64>,
}

impl Problem<'_> {
    /// `min_S` pieces, one per relay cut, ordered by mask.
    fn pieces(&self, x: &[f64]) -> Vec<f64> {
        let k_n = self.model.num_relays();
        let lay = &self.layout;
        let w = lay.weights(x, &self.fixed_weights);
        let n_t = self.table.dim();
        let mut out: Vec<f64> = subsets::all(k_n)
            .map(|s| subsets::members(s).iter().map(|&k| self.model.fronthaul()[k]).sum())
            .collect();
        for q in 0..lay.q {
            let a = w[q];
            if a <= 0.0 {
                continue;
            }
            let bts: Vec<CMatrix> = (0..k_n).map(|k| lay.quantizer(x, q, k)).collect();
            let costs: Vec<f64> = bts.iter().map(cost_fast).collect();
            // rows of K_{T,q}^{1/2} G^H scale with sqrt(s/α)
            let mut scale = vec![1.0; n_t];
            for &(l, o, n) in &self.table.rows {
                let f = (lay.share(x, w, l, q).max(0.0) / a).sqrt();
                scale[o..o + n].iter_mut().for_each(|v| *v = f);
            }
            let terms: Vec<CMatrix> = (0..k_n)
                .map(|k| {
                    let mut f = self.table.factors[k].clone();
                    for (r, sv) in scale.iter().enumerate() {
                        f.row_mut(r).iter_mut().for_each(|z| *z *= *sv);
                    }
                    &f * &bts[k] * f.adjoint()
                })
                .collect();
            for (i, s) in subsets::all(k_n).enumerate() {
                let mut m = CMatrix::identity(n_t, n_t);
                let mut cost = 0.0;
                for k in 0..k_n {
                    if s >> k & 1 == 1 {
                        cost += costs[k];
                    } else {
                        m += &terms[k];
                    }
                }
                out[i] += a * (log2det_pd(&m) - cost);
            }
        }
        out.iter().map(|v| if v.is_nan() { f64::NEG_INFINITY } else { *v }).collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.pieces(x).into_iter().fold(f64::INFINITY, f64::min)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.layout.dim()).map(|_| rng.gen::<f64>()).collect();
        // random Hermitian blocks with moderate off-diagonal mass
        for q in 0..self.layout.q {
            for (k, &m) in self.layout.antennas.iter().enumerate() {
                let o = self.layout.b_offset(q, k);
                x[o + m..o + m * m].iter_mut().for_each(|v| *v = 0.3 * (*v - 0.5));
            }
        }
        self.layout.project(&mut x);
        x
    }

    fn time_share(&self, x: &[f64]) -> Result<TimeShare> {
        let lay = &self.layout;
        let w = lay.weights(x, &self.fixed_weights).to_vec();
        let entries = (0..lay.q)
            .map(|q| {
                let inputs = (0..self.model.num_users())
                    .map(|l| {
                        let cap = &self.model.input_caps()[l];
                        if w[q] <= 0.0 {
                            CMatrix::zeros(cap.nrows(), cap.ncols())
                        } else {
                            cap.scale(lay.share(x, &w, l, q) / w[q])
                        }
                    })
                    .collect();
                let bts = (0..self.model.num_relays()).map(|k| lay.quantizer(x, q, k)).collect();
                Ok(TimeShareEntry { weight: w[q], inputs, quantizers: QuantizerProfile::from_whitened(self.model, bts)? })
            })
            .collect::<Result<Vec<_>>>()?;
        // project_simplex leaves a rounding-level defect in the weights
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        let entries = entries.into_iter().map(|mut e| {
            e.weight /= total;
            e
        });
        TimeShare::new(self.model, entries.collect())
    }
}

/// Inputs of the optimized regions.
#[derive(Debug, Clone)]
pub struct GaussianOptions {
    /// Number of time-sharing phases, 1 to 3.
    pub q_card: usize,
    /// Resolution of the weight grid.
    pub weight_resolution: f64,
    /// Keep `K_{l,q} = K_l` in every phase.
    pub equal_inputs: bool,
    /// In the single-phase region, optimize `K_l ⪯ cap` by a scalar factor.
    pub optimize_powers: bool,
    pub pg: PgConfig,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        Self { q_card: 2, weight_resolution: 0.05, equal_inputs: false, optimize_powers: false, pg: PgConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub users: Vec<usize>,
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub feasibility_residual: f64,
    pub kkt_residual: f64,
}

/// Optimized region with one maximizing profile per user subset.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianRegion {
    pub region: RateRegion,
    pub q_card: usize,
    pub optimizer: Vec<OptimizerReport>,
    #[serde(skip)]
    pub profiles: Vec<TimeShare>,
}

impl GaussianRegion {
    pub fn sum_rate(&self) -> f64 {
        self.region.sum_rate()
    }
}

fn report(users: u32, r: &OptResult, power_residual: f64) -> OptimizerReport {
    OptimizerReport {
        users: subsets::members(users),
        value: r.value,
        iterations: r.iterations,
        restarts_used: r.restarts_used,
        feasibility_residual: r.feasibility_residual.max(power_residual),
        kkt_residual: r.kkt_residual,
    }
}

fn scaled_identity_start(layout: &Layout, t: f64, shares: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; layout.dim()];
    if layout.free_weights {
        x[..layout.q].fill(1.0 / layout.q as f64);
    }
    let nw = layout.n_weights();
    if layout.inputs != InputRule::AtCaps {
        for l in 0..layout.users {
            x[nw + l * layout.q..nw + (l + 1) * layout.q].copy_from_slice(shares);
        }
    }
    for q in 0..layout.q {
        for (k, &m) in layout.antennas.iter().enumerate() {
            let o = layout.b_offset(q, k);
            for i in 0..m {
                x[o + i] = t;
            }
        }
    }
    x
}

/// Writes a single-phase quantizer vector into every phase of `x`.
fn replicate_quantizers(layout: &Layout, x: &mut [f64], single: &[f64], phases: &[usize]) {
    let per = layout.per_phase();
    for &q in phases {
        let o = layout.b_offset(q, 0);
        x[o..o + per].copy_from_slice(single);
    }
}

/// Region without time sharing: one quantizer profile and inputs at the caps.
pub fn region_gaussian_no_ts(model: &GaussianCranModel, opts: &GaussianOptions) -> Result<GaussianRegion> {
    let mut bounds = Vec::new();
    let mut optimizer = Vec::new();
    let mut profiles = Vec::new();
    for t in subsets::nonempty(model.num_users()) {
        let (r, problem) = solve_no_ts(model, t, opts)?;
        let ts = problem.time_share(&r.argmax)?;
        optimizer.push(report(t, &r, ts.power_residual(model)));
        bounds.push(r.value);
        profiles.push(ts);
    }
    Ok(GaussianRegion {
        region: RateRegion::from_fn(model.num_users(), |t| (bounds[t as usize - 1], None)),
        q_card: 1,
        optimizer,
        profiles,
    })
}

fn solve_no_ts<'a>(model: &'a GaussianCranModel, users: u32, opts: &GaussianOptions) -> Result<(OptResult, Problem<'a>)> {
    let layout = Layout {
        q: 1,
        users: model.num_users(),
        antennas: model.rx_antennas().to_vec(),
        free_weights: false,
        inputs: if opts.optimize_powers { InputRule::SharesBelowCap } else { InputRule::AtCaps },
    };
    let problem = Problem { model, layout, table: CutTable::new(model, users), fixed_weights: vec![1.0] };
    let warm: Vec<Vec<f64>> = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99]
        .iter()
        .map(|&t| scaled_identity_start(&problem.layout, t, &[1.0]))
        .collect();
    let r = optimize::projected_gradient(
        |x| problem.pieces(x),
        |x: &mut [f64]| problem.layout.project(x),
        &warm,
        |rng| problem.sample(rng),
        &opts.pg,
    )?;
    Ok((r, problem))
}

/// Region with `opts.q_card` time-sharing phases.
///
/// For each `T` the weights are searched on a simplex grid with the inputs
/// and quantizers optimized per grid point, then all parameters are polished
/// jointly. The single-phase solution seeds every search, so the result is
/// never below [`region_gaussian_no_ts`].
pub fn region_gaussian_ts(model: &GaussianCranModel, opts: &GaussianOptions) -> Result<GaussianRegion> {
    let q = opts.q_card;
    if !(1..=3).contains(&q) {
        return Err(Error::Unsupported(format!("time sharing with |Q| = {q}")));
    }
    if q == 1 {
        return region_gaussian_no_ts(model, &GaussianOptions { optimize_powers: false, ..opts.clone() });
    }
    let base_opts = GaussianOptions { optimize_powers: false, ..opts.clone() };
    let inner_cfg = PgConfig { restarts: opts.pg.restarts.min(2), ..opts.pg.clone() };
    let inputs = if opts.equal_inputs { InputRule::AtCaps } else { InputRule::Shares };
    let mut bounds = Vec::new();
    let mut optimizer = Vec::new();
    let mut profiles = Vec::new();
    for t in subsets::nonempty(model.num_users()) {
        let (single, single_problem) = solve_no_ts(model, t, &base_opts)?;
        let single_b = single.argmax.clone();
        let layout = Layout { q, users: model.num_users(), antennas: model.rx_antennas().to_vec(), free_weights: false, inputs };

        let warm_for = |w: &[f64], layout: &Layout| -> Vec<Vec<f64>> {
            let nw = layout.n_weights();
            let mut starts = Vec::new();
            // every phase a copy of the single-phase optimum
            let mut x = scaled_identity_start(layout, 0.0, w);
            if nw > 0 {
                x[..q].copy_from_slice(w);
            }
            replicate_quantizers(layout, &mut x, &single_b, &(0..q).collect::<Vec<_>>());
            starts.push(x);
            // all power and the single-phase quantizers in one phase, the rest silent
            if inputs != InputRule::AtCaps {
                for hot in 0..q {
                    let mut e = vec![0.0; q];
                    e[hot] = 1.0;
                    let mut x = scaled_identity_start(layout, 0.0, &e);
                    if nw > 0 {
                        x[..q].copy_from_slice(w);
                    }
                    replicate_quantizers(layout, &mut x, &single_b, &[hot]);
                    starts.push(x);
                }
            }
            starts
        };

        let grid_search = optimize::timeshare_search(
            |w| {
                let problem = Problem { model, layout: layout.clone(), table: CutTable::new(model, t), fixed_weights: w.to_vec() };
                optimize::projected_gradient(
                    |x| problem.pieces(x),
                    |x: &mut [f64]| problem.layout.project(x),
                    &warm_for(w, &problem.layout),
                    |rng| problem.sample(rng),
                    &inner_cfg,
                )
            },
            q,
            opts.weight_resolution,
        )?;

        // joint polish from the best grid point with free weights
        let free = Layout { free_weights: true, ..layout.clone() };
        let polish = Problem { model, layout: free, table: CutTable::new(model, t), fixed_weights: Vec::new() };
        let mut start = grid_search.argmax.clone();
        optimize::project_simplex(&mut start[..q], WEIGHT_FLOOR);
        let w0 = start[..q].to_vec();
        let mut warm = vec![start];
        warm.extend(warm_for(&w0, &polish.layout));
        let polished = optimize::projected_gradient(
            |x| polish.pieces(x),
            |x: &mut [f64]| polish.layout.project(x),
            &warm,
            |rng| polish.sample(rng),
            &PgConfig { restarts: 0, ..opts.pg.clone() },
        )?;

        let mut candidates: Vec<(f64, TimeShare, OptResult)> = Vec::new();
        candidates.push((single.value, single_problem.time_share(&single.argmax)?, single.clone()));
        {
            let fixed = Problem { model, layout: layout.clone(), table: CutTable::new(model, t), fixed_weights: w0.clone() };
            let ts = fixed.time_share(&grid_search.argmax[q..])?;
            candidates.push((fixed.value(&grid_search.argmax[q..]), ts, grid_search.clone()));
        }
        candidates.push((polished.value, polish.time_share(&polished.argmax)?, polished.clone()));
        let (value, ts, r) = candidates
            .into_iter()
            .reduce(|a, b| if b.0 > a.0 { b } else { a })
            .expect("three candidates");
        let mut r = r;
        r.iterations = single.iterations + grid_search.iterations + polished.iterations;
        r.restarts_used = single.restarts_used + grid_search.restarts_used + polished.restarts_used;
        optimizer.push(report(t, &OptResult { value, ..r }, ts.power_residual(model)));
        bounds.push(value);
        profiles.push(ts);
    }
    Ok(GaussianRegion {
        region: RateRegion::from_fn(model.num_users(), |t| (bounds[t as usize - 1], None)),
        q_card: q,
        optimizer,
        profiles,
    })
}

/// Evaluates the region of a fixed profile.
pub fn region_of_profile(model: &GaussianCranModel, ts: &TimeShare) -> Result<RateRegion> {
    let mut err = None;
    let r = RateRegion::from_fn(model.num_users(), |t| {
        let mut best = (f64::INFINITY, None);
        for s in subsets::all(model.num_relays()) {
            match gaussian_bound_raw(model, ts, t, s) {
                Ok(v) if v < best.0 => best = (v, Some(s)),
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        }
        best
    });
    err.map_or(Ok(r), Err)
}

/// The single-user two-relay model with gains `a`, unit noise, power `p`
/// and fronthaul `c` on both links.
pub fn example1_model(a: f64, p: f64, c: f64) -> Result<GaussianCranModel> {
    GaussianCranModel::scalar(&[vec![a], vec![a]], p, vec![c, c])
}

/// `min_S` of the single-phase bound with both whitened quantizers at `b`.
pub fn example1_no_ts_objective(a: f64, p: f64, c: f64, b: f64) -> f64 {
    let g = a * a * p;
    let l1b = (1.0 - b).log2();
    [(1.0 + 2.0 * g * b).log2(), c + l1b + (1.0 + g * b).log2(), 2.0 * (c + l1b)]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Closed-form maximum of [`example1_no_ts_objective`] over `b`.
pub fn closed_form_no_ts(a: f64, p: f64, c: f64) -> f64 {
    if a == 0.0 || p == 0.0 || c == 0.0 {
        return 0.0;
    }
    let g = a * a * p;
    let t = (2.0 * c).exp2();
    let inner = t + g - (g * g + (1.0 + 2.0 * g) * t).sqrt();
    (1.0 + 2.0 * g * inner.max(0.0) / t).log2()
}

/// Two-phase time sharing: during a fraction `α` the user sends at power
/// `P/α` and the relays use fronthaul `C/α`; the rest of the time all nodes
/// are silent.
pub fn two_phase_rate(a: f64, p: f64, c: f64) -> f64 {
    two_phase_optimum(a, p, c).0
}

/// `(rate, α, b)` of the best two-phase scheme.
pub fn two_phase_optimum(a: f64, p: f64, c: f64) -> (f64, f64, f64) {
    if a == 0.0 || p == 0.0 || c == 0.0 {
        return (0.0, 1.0, 0.0);
    }
    let inner = |alpha: f64| {
        let r = optimize::grid_then_golden(
            |b| alpha * example1_no_ts_objective(a, p / alpha, c / alpha, b),
            0.0,
            1.0,
            64,
            1e-10,
        )
        .expect("objective is finite on [0, 1)");
        (r.value, r.argmax[0])
    };
    let outer = optimize::grid_then_golden(|alpha| inner(alpha).0, 1e-4, 1.0, 200, 1e-10).expect("finite");
    let alpha = outer.argmax[0];
    let (v, b) = inner(alpha);
    // the α = 1 point is the single-phase optimum, attained by the closed form
    let single = closed_form_no_ts(a, p, c);
    if single >= v {
        (single, 1.0, f64::NAN)
    } else {
        (v, alpha, b)
    }
}

/// Successive decompression and decoding with Gaussian test channels
/// `U_k = Y_k + Z_k`, relay 1 decompressed first.
pub fn cf_ssd_no_ts_example1(a: f64, p: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let g = a * a * p;
    let d = c.exp2() - 1.0;
    let s1 = (g + 1.0) / d;
    let s2 = (g + 1.0 - g * g / (g + 1.0 + s1)) / d;
    (1.0 + g * (1.0 / (1.0 + s1) + 1.0 / (1.0 + s2))).log2()
}

/// Cut-set sum rate of the two-relay model.
pub fn cutset_example1(a: f64, p: f64, c: f64) -> f64 {
    let g = a * a * p;
    [2.0 * c, c + (1.0 + g).log2(), (1.0 + 2.0 * g).log2()].into_iter().fold(f64::INFINITY, f64::min)
}

/// Pieces of the symmetric time-shared family: per phase a weight, a power
/// share and a common whitened quantizer `b_q` at both relays.
fn example1_ts_pieces(a: f64, p: f64, c: f64, q: usize, x: &[f64]) -> Vec<f64> {
    let (w, rest) = x.split_at(q);
    let (s, b) = rest.split_at(q);
    let mut out = [0.0, c, 2.0 * c];
    for i in 0..q {
        if w[i] <= 0.0 {
            continue;
        }
        let g = a * a * p * s[i] / w[i];
        let l1b = (1.0 - b[i]).log2();
        out[0] += w[i] * (1.0 + 2.0 * g * b[i]).log2();
        out[1] += w[i] * (l1b + (1.0 + g * b[i]).log2());
        out[2] += w[i] * 2.0 * l1b;
    }
    out.to_vec()
}

/// Time-shared capacity of the two-relay model with up to `q_max` phases,
/// a lower bound on the supremum over unbounded `|Q|`.
pub fn capacity_ts_example1(a: f64, p: f64, c: f64, q_max: usize, cfg: &PgConfig) -> Result<f64> {
    if !(1..=3).contains(&q_max) {
        return Err(Error::Unsupported(format!("time sharing with |Q| = {q_max}")));
    }
    if a == 0.0 || p == 0.0 || c == 0.0 {
        return Ok(0.0);
    }
    let nots = closed_form_no_ts(a, p, c);
    let (tp, alpha, b2) = two_phase_optimum(a, p, c);
    let mut best = nots.max(tp);
    for q in 2..=q_max {
        let project = |x: &mut [f64]| {
            optimize::project_simplex(&mut x[..q], WEIGHT_FLOOR);
            optimize::project_simplex(&mut x[q..2 * q], 0.0);
            x[2 * q..].iter_mut().for_each(|v| *v = v.clamp(0.0, PROJECTION_CEIL));
        };
        let b_nots = optimize::golden_section(|b| example1_no_ts_objective(a, p, c, b), 0.0, 1.0, 1e-10)?.argmax[0];
        let mut warm = Vec::new();
        let mut even = vec![1.0 / q as f64; 2 * q];
        even.extend(vec![b_nots; q]);
        warm.push(even);
        if alpha < 1.0 {
            let mut x = vec![(1.0 - alpha) / (q - 1) as f64; q];
            x[0] = alpha;
            x.extend((0..q).map(|i| if i == 0 { 1.0 } else { 0.0 }));
            x.extend((0..q).map(|i| if i == 0 { b2 } else { 0.0 }));
            warm.push(x);
        }
        let r = optimize::projected_gradient(
            |x| example1_ts_pieces(a, p, c, q, x),
            project,
            &warm,
            |rng| {
                let mut x: Vec<f64> = (0..3 * q).map(|_| rng.gen::<f64>()).collect();
                project(&mut x);
                x
            },
            cfg,
        )?;
        best = best.max(r.value);
    }
    Ok(best)
}

/// One row of the two-relay example sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Row {
    pub p_db: f64,
    pub capacity_ts: f64,
    pub capacity_no_ts: f64,
    pub two_phase: f64,
    pub cf_ssd_no_ts: f64,
    pub cutset: f64,
}

impl Example1Row {
    pub const SCHEMES: [&'static str; 5] = ["capacity_no_ts", "capacity_ts", "cf_ssd_no_ts", "cutset", "two_phase"];

    /// Value by scheme name.
    pub fn get(&self, scheme: &str) -> Option<f64> {
        Some(match scheme {
            "capacity_ts" => self.capacity_ts,
            "capacity_no_ts" => self.capacity_no_ts,
            "two_phase" => self.two_phase,
            "cf_ssd_no_ts" => self.cf_ssd_no_ts,
            "cutset" => self.cutset,
            _ => return None,
        })
    }
}

pub fn example1_row(a: f64, p_db: f64, c: f64, q_max: usize, cfg: &PgConfig) -> Result<Example1Row> {
    let p = 10f64.powf(p_db / 10.0);
    Ok(Example1Row {
        p_db,
        capacity_ts: capacity_ts_example1(a, p, c, q_max, cfg)?,
        capacity_no_ts: closed_form_no_ts(a, p, c),
        two_phase: two_phase_rate(a, p, c),
        cf_ssd_no_ts: cf_ssd_no_ts_example1(a, p, c),
        cutset: cutset_example1(a, p, c),
    })
}

/// Rows for every point of `p_db`, evaluated in parallel.
pub fn example1_sweep(a: f64, c: f64, p_db: &[f64], q_max: usize, cfg: &PgConfig) -> Result<Vec<Example1Row>> {
    use rayon::prelude::*;
    p_db.par_iter().map(|&p| example1_row(a, p, c, q_max, cfg)).collect()
}
