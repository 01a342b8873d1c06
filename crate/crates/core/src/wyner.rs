//! The circular symmetric Wyner model: `K` single-antenna cells where user
//! `k` reaches relay `k` with gain 1 and the two neighbouring relays with
//! gain `γ`, unit noise and fronthaul `C` on every link.
//!
//! Every rate is per cell, in bits.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian_info::PROJECTION_CEIL;
use crate::gaussian_schemes::WEIGHT_FLOOR;
use crate::optimize::{self, PgConfig};
use crate::subsets;
use crate::sweep::{self, Table};
use crate::{Error, Result};

/// Largest cell count for subset minimization.
pub const MAX_CELLS: usize = 12;
/// Half-width of the coefficient window when the norm bound is not used.
pub const COF_WINDOW: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WynerModel {
    pub cells: usize,
    pub gamma: f64,
    pub power: f64,
    pub fronthaul: f64,
}

impl WynerModel {
    pub fn new(cells: usize, gamma: f64, power: f64, fronthaul: f64) -> Result<Self> {
        if cells < 3 {
            return Err(Error::ModelDomain(format!("the circular model needs K ≥ 3 cells, got {cells}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::ModelDomain(format!("γ = {gamma} is outside [0, 1]")));
        }
        if !(power >= 0.0 && power.is_finite()) || !(fronthaul >= 0.0) {
            return Err(Error::ModelDomain("power and fronthaul must be nonnegative".into()));
        }
        Ok(Self { cells, gamma, power, fronthaul })
    }

    pub fn with_power(&self, power: f64) -> Self {
        Self { power, ..self.clone() }
    }

    pub fn with_fronthaul(&self, fronthaul: f64) -> Self {
        Self { fronthaul, ..self.clone() }
    }

    pub fn channel(&self) -> DMatrix<f64> {
        let k = self.cells;
        DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                1.0
            } else if r == (c + 1) % k || (r + 1) % k == c {
                self.gamma
            } else {
                0.0
            }
        })
    }

    /// `1 + 2γ²`, the squared norm of every row.
    fn row_energy(&self) -> f64 {
        1.0 + 2.0 * self.gamma * self.gamma
    }

    fn check_size(&self) -> Result<()> {
        if self.cells > MAX_CELLS {
            return Err(Error::Unsupported(format!("{} cells exceeds the subset cap {MAX_CELLS}", self.cells)));
        }
        Ok(())
    }
}

/// Eigenvalues of `H_{S^c} H_{S^c}ᵀ` for every relay subset `S`.
#[derive(Debug, Clone)]
struct CutSpectra {
    sizes: Vec<f64>,
    eigs: Vec<Vec<f64>>,
}

impl CutSpectra {
    fn new(m: &WynerModel) -> Self {
        let h = m.channel();
        let mut sizes = Vec::new();
        let mut eigs = Vec::new();
        for s in subsets::all(m.cells) {
            let rows = subsets::members(subsets::complement(s, m.cells));
            sizes.push(subsets::size(s) as f64);
            if rows.is_empty() {
                eigs.push(Vec::new());
                continue;
            }
            let hs = h.select_rows(rows.iter());
            let g = &hs * hs.transpose();
            eigs.push(SymmetricEigen::new(g).eigenvalues.iter().map(|v| v.max(0.0)).collect());
        }
        Self { sizes, eigs }
    }

    /// `∑ log₂(1 + t·λ)` for subset `s`.
    fn log_det(&self, s: usize, t: f64) -> f64 {
        self.eigs[s].iter().map(|l| (t * l).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
    }

    /// Per-cell pieces at fronthaul `c`, phases `(weight, power, b)`.
    fn pieces(&self, k: f64, c: f64, phases: &[(f64, f64, f64)]) -> Vec<f64> {
        (0..self.sizes.len())
            .map(|s| {
                let mut v = self.sizes[s] * c;
                for &(w, p, b) in phases {
                    if w > 0.0 {
                        v += w * (self.sizes[s] * (1.0 - b).log2() + self.log_det(s, p * b));
                    }
                }
                v / k
            })
            .collect()
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn log2det_i_plus_sym(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.iter().map(|l| l.max(0.0).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// `min{C, (1/K) log₂det(I + P·HHᵀ)}`.
pub fn rate_cutset(m: &WynerModel) -> f64 {
    let h = m.channel();
    let g = (&h * h.transpose()).scale(m.power);
    m.fronthaul.min(log2det_i_plus_sym(&g) / m.cells as f64)
}

/// Decode-and-forward: each relay decodes its own user, treating the
/// neighbours as noise or decoding all three jointly.
pub fn rate_df(m: &WynerModel) -> f64 {
    let (p, g2) = (m.power, m.gamma * m.gamma);
    let tin = (1.0 + p / (1.0 + 2.0 * g2 * p)).log2();
    let joint = (0.5 * (1.0 + 2.0 * g2 * p).log2()).min((1.0 + (1.0 + 2.0 * g2) * p).log2() / 3.0);
    tin.max(joint).min(m.fronthaul)
}

/// Compute-and-forward with symmetric integer coefficients `(b₁, b₂, b₂)`.
///
/// With `coeff_bound_auto` the search covers the whole norm-bounded set,
/// otherwise the window `|b| ≤ 10` inside it. Coefficient pairs whose
/// circulant equation system is singular are skipped.
pub fn rate_cof(m: &WynerModel, coeff_bound_auto: bool) -> f64 {
    let (p, g) = (m.power, m.gamma);
    let snr = 1.0 + p * m.row_energy();
    let b1_max = snr.sqrt().floor() as i64;
    let b2_max = (snr / 2.0).sqrt().floor() as i64;
    let (b1_max, b2_max) = if coeff_bound_auto { (b1_max, b2_max) } else { (b1_max.min(COF_WINDOW), b2_max.min(COF_WINDOW)) };
    let mut best = f64::INFINITY;
    for b1 in 1..=b1_max {
        // the objective is even in (b₁, b₂) jointly, so b₁ > 0 suffices
        for b2 in -b2_max..=b2_max {
            let (x, y) = (b1 as f64, b2 as f64);
            let norm = x * x + 2.0 * y * y;
            if norm > snr || !circulant_invertible(m.cells, b1, b2) {
                continue;
            }
            let proj = x + 2.0 * g * y;
            best = best.min(norm - p * proj * proj / snr);
        }
    }
    (-best.log2()).max(0.0).min(m.fronthaul)
}

/// Whether the `K × K` circulant with `b₁` on the diagonal and `b₂` on both
/// neighbours has no zero eigenvalue `b₁ + 2b₂cos(2πj/K)`.
fn circulant_invertible(k: usize, b1: i64, b2: i64) -> bool {
    (0..k).all(|j| {
        let e = b1 as f64 + 2.0 * b2 as f64 * (std::f64::consts::TAU * j as f64 / k as f64).cos();
        e.abs() > 1e-9
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfVariant {
    JdTwoPhase,
    SdNoTs,
    SsdNoTs,
    PtpNoTs,
    CapacityTs,
    CapacityNoTs,
}

impl CfVariant {
    pub const ALL: [CfVariant; 6] =
        [Self::JdTwoPhase, Self::SdNoTs, Self::SsdNoTs, Self::PtpNoTs, Self::CapacityTs, Self::CapacityNoTs];

    pub fn name(self) -> &'static str {
        match self {
            Self::JdTwoPhase => "jd_two_phase",
            Self::SdNoTs => "sd_no_ts",
            Self::SsdNoTs => "ssd_no_ts",
            Self::PtpNoTs => "ptp_no_ts",
            Self::CapacityTs => "capacity_ts",
            Self::CapacityNoTs => "capacity_no_ts",
        }
    }
}

/// Options of the time-shared capacity search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WynerOptions {
    pub q_max: usize,
    pub pg: PgConfig,
}

impl Default for WynerOptions {
    fn default() -> Self {
        Self { q_max: 3, pg: PgConfig { restarts: 4, ..PgConfig::default() } }
    }
}

pub fn rate_cf_variant(m: &WynerModel, variant: CfVariant, opts: &WynerOptions) -> Result<f64> {
    m.check_size()?;
    if m.fronthaul == 0.0 || m.power == 0.0 {
        return Ok(0.0);
    }
    if m.fronthaul.is_infinite() {
        return Ok(rate_cutset(m));
    }
    match variant {
        CfVariant::CapacityNoTs => Ok(capacity_no_ts(m, &CutSpectra::new(m))?.0),
        CfVariant::JdTwoPhase => Ok(two_phase(m, &CutSpectra::new(m))?.0),
        CfVariant::CapacityTs => capacity_ts(m, opts),
        CfVariant::SdNoTs => Ok(sd_no_ts(m)),
        CfVariant::SsdNoTs => Ok(ssd_no_ts(m)),
        CfVariant::PtpNoTs => Ok(ptp_no_ts(m)),
    }
}

/// `(rate, b)` of the single-phase capacity.
fn capacity_no_ts(m: &WynerModel, cuts: &CutSpectra) -> Result<(f64, f64)> {
    let k = m.cells as f64;
    let r = optimize::golden_section(|b| min_of(&cuts.pieces(k, m.fronthaul, &[(1.0, m.power, b)])), 0.0, 1.0, 1e-10)?;
    Ok((r.value.max(0.0), r.argmax[0]))
}

/// `(rate, α, b)` of the scheme active during a fraction `α` at power
/// `P/α` and silent otherwise.
fn two_phase(m: &WynerModel, cuts: &CutSpectra) -> Result<(f64, f64, f64)> {
    let k = m.cells as f64;
    let inner = |alpha: f64| -> Result<(f64, f64)> {
        let r = optimize::grid_then_golden(
            |b| min_of(&cuts.pieces(k, m.fronthaul, &[(alpha, m.power / alpha, b)])),
            0.0,
            1.0,
            32,
            1e-10,
        )?;
        Ok((r.value, r.argmax[0]))
    };
    let outer = optimize::grid_then_golden(|a| inner(a).map_or(f64::NEG_INFINITY, |v| v.0), 1e-4, 1.0, 100, 1e-9)?;
    let alpha = outer.argmax[0];
    let (v, b) = inner(alpha)?;
    let (single, b1) = capacity_no_ts(m, cuts)?;
    Ok(if single >= v { (single, 1.0, b1) } else { (v, alpha, b) })
}

/// Time-shared capacity over phases with a common quantizer level, up to
/// `opts.q_max` phases.
fn capacity_ts(m: &WynerModel, opts: &WynerOptions) -> Result<f64> {
    if !(1..=3).contains(&opts.q_max) {
        return Err(Error::Unsupported(format!("time sharing with |Q| = {}", opts.q_max)));
    }
    let cuts = CutSpectra::new(m);
    let k = m.cells as f64;
    let (nots, b_nots) = capacity_no_ts(m, &cuts)?;
    let (tp, alpha, b_tp) = two_phase(m, &cuts)?;
    let mut best = nots.max(tp);
    for q in 2..=opts.q_max {
        let phases = |x: &[f64]| -> Vec<(f64, f64, f64)> {
            (0..q).filter(|&i| x[i] > 0.0).map(|i| (x[i], m.power * x[q + i] / x[i], x[2 * q + i])).collect()
        };
        let project = |x: &mut [f64]| {
            optimize::project_simplex(&mut x[..q], WEIGHT_FLOOR);
            optimize::project_simplex(&mut x[q..2 * q], 0.0);
            x[2 * q..].iter_mut().for_each(|v| *v = v.clamp(0.0, PROJECTION_CEIL));
        };
        let mut even = vec![1.0 / q as f64; 2 * q];
        even.extend(vec![b_nots; q]);
        let mut warm = vec![even];
        if alpha < 1.0 {
            let mut x = vec![(1.0 - alpha) / (q - 1) as f64; q];
            x[0] = alpha;
            x.extend((0..q).map(|i| if i == 0 { 1.0 } else { 0.0 }));
            x.extend((0..q).map(|i| if i == 0 { b_tp } else { 0.0 }));
            warm.push(x);
        }
        let r = optimize::projected_gradient(
            |x| cuts.pieces(k, m.fronthaul, &phases(x)),
            project,
            &warm,
            |rng| {
                let mut x: Vec<f64> = (0..3 * q).map(|_| rng.gen::<f64>()).collect();
                project(&mut x);
                x
            },
            &opts.pg,
        )?;
        best = best.max(r.value);
    }
    Ok(best)
}

/// `∑_k log₂(1 + (Pλ_k + 1)/σ²)` evaluated at `σ² = 2^{-t}`.
fn sd_compression_rate(eigs: &[f64], p: f64, t: f64) -> f64 {
    eigs.iter().map(|l| (p * l + 1.0 + (-t).exp2()).log2() + t).sum()
}

/// Separate decoding with common test-channel noise `σ²` spending the
/// whole fronthaul budget.
fn sd_no_ts(m: &WynerModel) -> f64 {
    let h = m.channel();
    let eigs: Vec<f64> = SymmetricEigen::new(&h * h.transpose()).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let target = m.cells as f64 * m.fronthaul;
    // bisection on t = −log₂σ²; the rate is increasing in t
    let (mut lo, mut hi) = (-200.0, 1000.0);
    while sd_compression_rate(&eigs, m.power, lo) > target {
        lo *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sd_compression_rate(&eigs, m.power, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma2 = (-0.5 * (lo + hi)).exp2();
    eigs.iter().map(|l| (m.power * l / (1.0 + sigma2)).ln_1p()).sum::<f64>() / std::f64::consts::LN_2 / m.cells as f64
}

/// Test-channel noise of each relay when compressing in index order with
/// the earlier descriptions as side information.
pub fn ssd_noise_levels(m: &WynerModel) -> Vec<f64> {
    let h = m.channel();
    let p = m.power;
    let d = m.fronthaul.exp2() - 1.0;
    let mut sigma2: Vec<f64> = Vec::with_capacity(m.cells);
    for k in 0..m.cells {
        let var = p * m.row_energy() + 1.0;
        let mmse = if k == 0 {
            var
        } else {
            let prev = h.rows(0, k).into_owned();
            let hk = h.row(k).into_owned();
            let mut cov = (&prev * prev.transpose()).scale(p);
            for i in 0..k {
                cov[(i, i)] += 1.0 + sigma2[i];
            }
            let cross = (&prev * hk.transpose()).scale(p);
            let inv = cov.cholesky().expect("covariance is positive definite").inverse();
            var - (cross.transpose() * inv * &cross)[(0, 0)]
        };
        sigma2.push(mmse / d);
    }
    sigma2
}

fn rate_with_scaling(m: &WynerModel, d: &[f64]) -> f64 {
    let h = m.channel();
    // det(I + P·D·HHᵀ) = det(I + P·D^{1/2}HHᵀD^{1/2})
    let dh = DMatrix::from_fn(m.cells, m.cells, |r, c| d[r].sqrt() * h[(r, c)]);
    log2det_i_plus_sym(&(&dh * dh.transpose()).scale(m.power)) / m.cells as f64
}

/// Successive Wyner-Ziv compression in cell order.
fn ssd_no_ts(m: &WynerModel) -> f64 {
    let d: Vec<f64> = ssd_noise_levels(m).iter().map(|s| 1.0 / (1.0 + s)).collect();
    rate_with_scaling(m, &d)
}

/// Point-to-point compression without binning.
fn ptp_no_ts(m: &WynerModel) -> f64 {
    let t = m.fronthaul.exp2();
    let d = (t - 1.0) / (t + m.power * m.row_energy());
    rate_with_scaling(m, &vec![d; m.cells])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WynerScheme {
    Cutset,
    Df,
    Cof,
    Cf(CfVariant),
}

impl WynerScheme {
    pub const ALL: [WynerScheme; 9] = [
        Self::Cutset,
        Self::Df,
        Self::Cof,
        Self::Cf(CfVariant::CapacityTs),
        Self::Cf(CfVariant::CapacityNoTs),
        Self::Cf(CfVariant::JdTwoPhase),
        Self::Cf(CfVariant::SdNoTs),
        Self::Cf(CfVariant::SsdNoTs),
        Self::Cf(CfVariant::PtpNoTs),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cutset => "cutset",
            Self::Df => "df",
            Self::Cof => "cof",
            Self::Cf(v) => v.name(),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_oblivious(self) -> bool {
        matches!(self, Self::Cf(_))
    }
}

pub fn rate(m: &WynerModel, scheme: WynerScheme, opts: &WynerOptions) -> Result<f64> {
    Ok(match scheme {
        WynerScheme::Cutset => rate_cutset(m),
        WynerScheme::Df => rate_df(m),
        WynerScheme::Cof => rate_cof(m, true),
        WynerScheme::Cf(v) => rate_cf_variant(m, v, opts)?,
    })
}

/// How the fronthaul follows the power along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FronthaulLaw {
    Fixed { c: f64 },
    /// `C = slope·log₁₀(P)`, floored at 0.
    LogPower { slope: f64 },
}

impl FronthaulLaw {
    pub fn at(self, p: f64) -> f64 {
        match self {
            Self::Fixed { c } => c,
            Self::LogPower { slope } => (slope * p.log10()).max(0.0),
        }
    }
}

/// Sweep parameters, also written as the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WynerSweep {
    pub cells: usize,
    pub gamma: f64,
    pub fronthaul: FronthaulLaw,
    pub p_db: Vec<f64>,
    pub schemes: Vec<WynerScheme>,
    pub options: WynerOptions,
}

impl WynerSweep {
    /// Fixed-fronthaul defaults: three cells, `γ = 1/√2`, `C = 3.5`, power
    /// from −10 to 30 dB.
    pub fn fixed_default() -> Self {
        Self {
            cells: 3,
            gamma: std::f64::consts::FRAC_1_SQRT_2,
            fronthaul: FronthaulLaw::Fixed { c: 3.5 },
            p_db: sweep::linear_grid(-10.0, 30.0, 81).expect("valid grid"),
            schemes: WynerScheme::ALL.to_vec(),
            options: WynerOptions::default(),
        }
    }

    /// Scaling defaults: `C = 5·log₁₀(P)`, power from 0 to 60 dB.
    pub fn dof_default() -> Self {
        Self {
            fronthaul: FronthaulLaw::LogPower { slope: 5.0 },
            p_db: sweep::linear_grid(0.0, 60.0, 61).expect("valid grid"),
            ..Self::fixed_default()
        }
    }

    /// One row per power point, evaluated in parallel.
    pub fn run(&self) -> Result<Table> {
        use rayon::prelude::*;
        let base = WynerModel::new(self.cells, self.gamma, 0.0, 0.0)?;
        base.check_size()?;
        let rows: Vec<Vec<f64>> = self
            .p_db
            .par_iter()
            .map(|&db| {
                let p = sweep::db_to_linear(db);
                let m = base.with_power(p).with_fronthaul(self.fronthaul.at(p));
                let mut row = vec![db];
                for &s in &self.schemes {
                    row.push(rate(&m, s, &self.options)?);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut columns = vec!["P_dB".to_string()];
        columns.extend(self.schemes.iter().map(|s| s.name().to_string()));
        let mut t = Table::new(columns);
        for r in rows {
            t.push(r)?;
        }
        Ok(t)
    }
}
