//! Hermitian linear algebra for MIMO CRAN models.
//!
//! Quantizers are described by matrices `0 ⪯ B_k ⪯ Σ_k⁻¹` with
//! `mmse(Y_k | X, U_k) = Σ_k − Σ_k B_k Σ_k`. Internally everything is
//! evaluated in the whitened domain `B̃_k = Σ_k^{1/2} B_k Σ_k^{1/2} ∈ [0, I]`
//! against the whitened channel `G = Σ^{-1/2} H`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::subsets;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Smallest admissible noise eigenvalue.
pub const MIN_NOISE_EIG: f64 = 1e-12;
/// Largest admissible noise condition number.
pub const MAX_CONDITION: f64 = 1e12;
/// Slack on the whitened eigenvalue range `[0, 1]`.
pub const CONE_TOL: f64 = 1e-10;
/// Upper clip used when projecting whitened quantizers.
pub const PROJECTION_CEIL: f64 = 1.0 - 1e-9;
/// Slack of the power constraint of a time-sharing profile.
pub const POWER_TOL: f64 = 1e-9;

/// Hermitian part `(A + Aᴴ)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    if a.nrows() == 0 {
        return (Vec::new(), a.clone());
    }
    let e = hermitian_part(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn eigenvalues(a: &CMatrix) -> Vec<f64> {
    eigh(a).0
}

/// `V f(Λ) Vᴴ` for the Hermitian part of `a`.
pub fn spectral_map(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let mut scaled = vecs.clone();
    for (c, v) in vals.iter().enumerate() {
        let s = Complex64::from(f(*v));
        scaled.column_mut(c).iter_mut().for_each(|x| *x *= s);
    }
    scaled * vecs.adjoint()
}

/// Square root of a PSD matrix; negative eigenvalues are treated as zero.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    spectral_map(a, |v| v.max(0.0).sqrt())
}

/// Projection onto `{lo·I ⪯ X ⪯ hi·I}` by eigenvalue clipping.
pub fn clip_spectrum(a: &CMatrix, lo: f64, hi: f64) -> CMatrix {
    spectral_map(a, |v| v.clamp(lo, hi))
}

/// `log₂ det(I + A)` for Hermitian PSD `A`.
pub fn log2det_i_plus(a: &CMatrix) -> f64 {
    eigenvalues(a).iter().map(|v| (1.0 + v.max(0.0)).log2()).sum()
}

/// Whether `a ⪯ b + tol·I`.
pub fn loewner_le(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    eigenvalues(&(b - a)).first().map_or(true, |&v| v >= -tol)
}

pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        out.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        o += b.nrows();
    }
    out
}

pub fn real_scalar(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, Complex64::from(v))
}

/// Validated square root and inverse square root of a noise covariance.
fn noise_factors(sigma: &CMatrix, relay: usize) -> Result<(CMatrix, CMatrix)> {
    let vals = eigenvalues(sigma);
    let (lo, hi) = (vals[0], *vals.last().unwrap());
    if lo <= MIN_NOISE_EIG {
        return Err(Error::SingularNoise { relay });
    }
    if hi / lo > MAX_CONDITION {
        return Err(Error::IllConditioned { cond: hi / lo });
    }
    Ok((spectral_map(sigma, f64::sqrt), spectral_map(sigma, |v| 1.0 / v.sqrt())))
}

/// `B̃ = Σ^{1/2} B Σ^{1/2}`.
pub fn whiten(b: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    let (half, _) = noise_factors(sigma, 0)?;
    Ok(hermitian_part(&(&half * b * &half)))
}

/// `B = Σ^{-1/2} B̃ Σ^{-1/2}`.
pub fn unwhiten(bt: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    let (_, inv_half) = noise_factors(sigma, 0)?;
    Ok(hermitian_part(&(&inv_half * bt * &inv_half)))
}

/// `−log₂ det(I − B̃)` for a whitened quantizer; `+∞` once an eigenvalue
/// reaches one.
pub fn compression_cost_whitened(bt: &CMatrix, relay: usize) -> Result<f64> {
    let mut cost = 0.0;
    for v in eigenvalues(bt) {
        if !(v >= -CONE_TOL && v <= 1.0 + CONE_TOL) {
            return Err(Error::InfeasibleQuantizer { relay, eigenvalue: v });
        }
        if v >= 1.0 {
            return Ok(f64::INFINITY);
        }
        cost -= (1.0 - v.max(0.0)).log2();
    }
    Ok(cost)
}

/// `log₂ |Σ⁻¹| / |Σ⁻¹ − B|`, the rate `I(Y_k; U_k | X)` of the test channel.
pub fn compression_cost(b: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    compression_cost_whitened(&whiten(b, sigma)?, 0)
}

/// `mmse(Y_k | X, U_k) = Σ − Σ B Σ`.
pub fn mmse(b: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    compression_cost(b, sigma)?;
    Ok(hermitian_part(&(sigma - sigma * b * sigma)))
}

/// One complex entry in a model document; bare numbers are real.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum EntryDoc {
    Real(f64),
    Complex { re: f64, im: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
struct MatrixDoc(Vec<Vec<EntryDoc>>);

impl MatrixDoc {
    fn from_matrix(m: &CMatrix) -> Self {
        MatrixDoc(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| EntryDoc::Complex { re: m[(r, c)].re, im: m[(r, c)].im }).collect())
                .collect(),
        )
    }

    fn to_matrix(&self, rows: usize, cols: usize, what: &str) -> Result<CMatrix> {
        if self.0.len() != rows || self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!("{what} must be {rows}×{cols}")));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| match self.0[r][c] {
            EntryDoc::Real(v) => Complex64::new(v, 0.0),
            EntryDoc::Complex { re, im } => Complex64::new(re, im),
        }))
    }
}

#[derive(Serialize, Deserialize)]
struct GaussianModelDoc {
    tx_antennas: Vec<usize>,
    rx_antennas: Vec<usize>,
    /// `channel[k][l]` is the block `H_{k,l}`.
    channel: Vec<Vec<MatrixDoc>>,
    noise: Vec<MatrixDoc>,
    input_caps: Vec<MatrixDoc>,
    fronthaul: Vec<f64>,
}

/// `Y_k = ∑_l H_{k,l} X_l + N_k` with `N_k ~ CN(0, Σ_k)`, `E[X_l X_lᴴ] ⪯ K_l`
/// and fronthaul `C_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianModelDoc", into = "GaussianModelDoc")]
pub struct GaussianCranModel {
    tx_antennas: Vec<usize>,
    rx_antennas: Vec<usize>,
    channel: CMatrix,
    noise: Vec<CMatrix>,
    input_caps: Vec<CMatrix>,
    fronthaul: Vec<f64>,
    whitened: CMatrix,
    noise_half: Vec<CMatrix>,
    noise_inv_half: Vec<CMatrix>,
}

impl TryFrom<GaussianModelDoc> for GaussianCranModel {
    type Error = Error;
    fn try_from(d: GaussianModelDoc) -> Result<Self> {
        let (l_n, k_n) = (d.tx_antennas.len(), d.rx_antennas.len());
        if d.channel.len() != k_n || d.channel.iter().any(|row| row.len() != l_n) {
            return Err(Error::DimensionMismatch("channel must list K rows of L blocks".into()));
        }
        if d.noise.len() != k_n || d.input_caps.len() != l_n {
            return Err(Error::DimensionMismatch("one noise matrix per relay and one cap per user".into()));
        }
        let m_tot: usize = d.rx_antennas.iter().sum();
        let n_tot: usize = d.tx_antennas.iter().sum();
        let mut h = CMatrix::zeros(m_tot, n_tot);
        let mut ro = 0;
        for (k, row) in d.channel.iter().enumerate() {
            let mut co = 0;
            for (l, blk) in row.iter().enumerate() {
                let b = blk.to_matrix(d.rx_antennas[k], d.tx_antennas[l], &format!("H[{k}][{l}]"))?;
                h.view_mut((ro, co), (b.nrows(), b.ncols())).copy_from(&b);
                co += d.tx_antennas[l];
            }
            ro += d.rx_antennas[k];
        }
        let noise = d
            .noise
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_matrix(d.rx_antennas[k], d.rx_antennas[k], &format!("noise[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let caps = d
            .input_caps
            .iter()
            .enumerate()
            .map(|(l, m)| m.to_matrix(d.tx_antennas[l], d.tx_antennas[l], &format!("input_caps[{l}]")))
            .collect::<Result<Vec<_>>>()?;
        GaussianCranModel::new(d.tx_antennas, d.rx_antennas, h, noise, caps, d.fronthaul)
    }
}

impl From<GaussianCranModel> for GaussianModelDoc {
    fn from(m: GaussianCranModel) -> Self {
        let channel = (0..m.num_relays())
            .map(|k| (0..m.num_users()).map(|l| MatrixDoc::from_matrix(&m.channel_block(1 << k, 1 << l))).collect())
            .collect();
        GaussianModelDoc {
            noise: m.noise.iter().map(MatrixDoc::from_matrix).collect(),
            input_caps: m.input_caps.iter().map(MatrixDoc::from_matrix).collect(),
            tx_antennas: m.tx_antennas,
            rx_antennas: m.rx_antennas,
            channel,
            fronthaul: m.fronthaul,
        }
    }
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let tol = 1e-9 * (1.0 + m.norm());
    if (m - m.adjoint()).norm() > tol {
        return Err(Error::DimensionMismatch(format!("{what} is not Hermitian")));
    }
    Ok(())
}

impl GaussianCranModel {
    /// `channel` is the stacked `∑M_k × ∑N_l` matrix.
    pub fn new(
        tx_antennas: Vec<usize>,
        rx_antennas: Vec<usize>,
        channel: CMatrix,
        noise: Vec<CMatrix>,
        input_caps: Vec<CMatrix>,
        fronthaul: Vec<f64>,
    ) -> Result<Self> {
        let (l_n, k_n) = (tx_antennas.len(), rx_antennas.len());
        if l_n == 0 || k_n == 0 || tx_antennas.iter().chain(&rx_antennas).any(|&n| n == 0) {
            return Err(Error::DimensionMismatch("need positive antenna counts for every node".into()));
        }
        if k_n > crate::dm::MAX_RELAYS {
            return Err(Error::TooManyRelays { count: k_n, cap: crate::dm::MAX_RELAYS });
        }
        let m_tot: usize = rx_antennas.iter().sum();
        let n_tot: usize = tx_antennas.iter().sum();
        if channel.shape() != (m_tot, n_tot) {
            return Err(Error::DimensionMismatch(format!("channel must be {m_tot}×{n_tot}")));
        }
        if noise.len() != k_n || input_caps.len() != l_n || fronthaul.len() != k_n {
            return Err(Error::DimensionMismatch("per-node lists have the wrong length".into()));
        }
        if channel.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("channel".into()));
        }
        let mut noise_half = Vec::with_capacity(k_n);
        let mut noise_inv_half = Vec::with_capacity(k_n);
        for (k, s) in noise.iter().enumerate() {
            if s.shape() != (rx_antennas[k], rx_antennas[k]) {
                return Err(Error::DimensionMismatch(format!("noise[{k}] shape")));
            }
            check_hermitian(s, &format!("noise[{k}]"))?;
            let (h, ih) = noise_factors(s, k)?;
            noise_half.push(h);
            noise_inv_half.push(ih);
        }
        for (l, c) in input_caps.iter().enumerate() {
            if c.shape() != (tx_antennas[l], tx_antennas[l]) {
                return Err(Error::DimensionMismatch(format!("input_caps[{l}] shape")));
            }
            check_hermitian(c, &format!("input_caps[{l}]"))?;
            if eigenvalues(c)[0] < -POWER_TOL {
                return Err(Error::DimensionMismatch(format!("input_caps[{l}] is not PSD")));
            }
        }
        if fronthaul.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidPmf("fronthaul capacities must be nonnegative".into()));
        }
        let inv_half: Vec<&CMatrix> = noise_inv_half.iter().collect();
        let whitened = block_diag(&inv_half) * &channel;
        let noise = noise.iter().map(hermitian_part).collect();
        let input_caps = input_caps.iter().map(hermitian_part).collect();
        Ok(Self { tx_antennas, rx_antennas, channel, noise, input_caps, fronthaul, whitened, noise_half, noise_inv_half })
    }

    /// Scalar model with `h[k][l]` real gains, unit noise and power `power`.
    pub fn scalar(gains: &[Vec<f64>], power: f64, fronthaul: Vec<f64>) -> Result<Self> {
        let k_n = gains.len();
        let l_n = gains.first().map_or(0, |r| r.len());
        let h = CMatrix::from_fn(k_n, l_n, |k, l| Complex64::from(gains[k][l]));
        Self::new(
            vec![1; l_n],
            vec![1; k_n],
            h,
            vec![real_scalar(1.0); k_n],
            vec![real_scalar(power); l_n],
            fronthaul,
        )
    }

    pub fn num_users(&self) -> usize {
        self.tx_antennas.len()
    }

    pub fn num_relays(&self) -> usize {
        self.rx_antennas.len()
    }

    pub fn tx_antennas(&self) -> &[usize] {
        &self.tx_antennas
    }

    pub fn rx_antennas(&self) -> &[usize] {
        &self.rx_antennas
    }

    pub fn channel(&self) -> &CMatrix {
        &self.channel
    }

    pub fn noise(&self) -> &[CMatrix] {
        &self.noise
    }

    pub fn input_caps(&self) -> &[CMatrix] {
        &self.input_caps
    }

    pub fn fronthaul(&self) -> &[f64] {
        &self.fronthaul
    }

    pub fn noise_half(&self, k: usize) -> &CMatrix {
        &self.noise_half[k]
    }

    pub fn noise_inv_half(&self, k: usize) -> &CMatrix {
        &self.noise_inv_half[k]
    }

    pub fn with_fronthaul(&self, fronthaul: Vec<f64>) -> Result<Self> {
        Self::new(
            self.tx_antennas.clone(),
            self.rx_antennas.clone(),
            self.channel.clone(),
            self.noise.clone(),
            self.input_caps.clone(),
            fronthaul,
        )
    }

    /// The same model with every `Σ_k` multiplied by `eps`.
    pub fn with_noise_scaled(&self, eps: f64) -> Result<Self> {
        Self::new(
            self.tx_antennas.clone(),
            self.rx_antennas.clone(),
            self.channel.clone(),
            self.noise.iter().map(|s| s.scale(eps)).collect(),
            self.input_caps.clone(),
            self.fronthaul.clone(),
        )
    }

    pub fn with_input_caps(&self, input_caps: Vec<CMatrix>) -> Result<Self> {
        Self::new(
            self.tx_antennas.clone(),
            self.rx_antennas.clone(),
            self.channel.clone(),
            self.noise.clone(),
            input_caps,
            self.fronthaul.clone(),
        )
    }

    fn row_index(&self, relays: u32) -> Vec<usize> {
        let mut out = Vec::new();
        let mut o = 0;
        for (k, &m) in self.rx_antennas.iter().enumerate() {
            if relays >> k & 1 == 1 {
                out.extend(o..o + m);
            }
            o += m;
        }
        out
    }

    fn col_index(&self, users: u32) -> Vec<usize> {
        let mut out = Vec::new();
        let mut o = 0;
        for (l, &n) in self.tx_antennas.iter().enumerate() {
            if users >> l & 1 == 1 {
                out.extend(o..o + n);
            }
            o += n;
        }
        out
    }

    fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
    }

    /// `H_{S,T}` for relay mask `S` and user mask `T`.
    pub fn channel_block(&self, relays: u32, users: u32) -> CMatrix {
        Self::submatrix(&self.channel, &self.row_index(relays), &self.col_index(users))
    }

    /// `Σ_S^{-1/2} H_{S,T}`.
    pub fn whitened_block(&self, relays: u32, users: u32) -> CMatrix {
        Self::submatrix(&self.whitened, &self.row_index(relays), &self.col_index(users))
    }

    /// Block-diagonal `K_T` of the input caps of user mask `users`.
    pub fn caps_block(&self, users: u32) -> CMatrix {
        let blocks: Vec<&CMatrix> = subsets::members(users).into_iter().map(|l| &self.input_caps[l]).collect();
        block_diag(&blocks)
    }

    /// Equal antenna counts `(N, M)` across users and relays, if any.
    pub fn equal_antennas(&self) -> Option<(usize, usize)> {
        let n = self.tx_antennas[0];
        let m = self.rx_antennas[0];
        (self.tx_antennas.iter().all(|&x| x == n) && self.rx_antennas.iter().all(|&x| x == m)).then_some((n, m))
    }
}

/// Per-relay quantizer matrices `B_k` with `0 ⪯ B_k ⪯ Σ_k⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerProfile {
    b: Vec<CMatrix>,
    whitened: Vec<CMatrix>,
}

impl QuantizerProfile {
    pub fn new(model: &GaussianCranModel, b: Vec<CMatrix>) -> Result<Self> {
        if b.len() != model.num_relays() {
            return Err(Error::DimensionMismatch("one quantizer per relay".into()));
        }
        let mut whitened = Vec::with_capacity(b.len());
        for (k, bk) in b.iter().enumerate() {
            let m = model.rx_antennas[k];
            if bk.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!("B[{k}] must be {m}×{m}")));
            }
            let h = model.noise_half(k);
            let bt = hermitian_part(&(h * bk * h));
            compression_cost_whitened(&bt, k)?;
            whitened.push(bt);
        }
        Ok(Self { b: b.iter().map(hermitian_part).collect(), whitened })
    }

    /// Builds the profile from whitened matrices `B̃_k ∈ [0, I]`.
    pub fn from_whitened(model: &GaussianCranModel, whitened: Vec<CMatrix>) -> Result<Self> {
        if whitened.len() != model.num_relays() {
            return Err(Error::DimensionMismatch("one quantizer per relay".into()));
        }
        let mut b = Vec::with_capacity(whitened.len());
        for (k, bt) in whitened.iter().enumerate() {
            compression_cost_whitened(bt, k)?;
            let ih = model.noise_inv_half(k);
            b.push(hermitian_part(&(ih * bt * ih)));
        }
        Ok(Self { b, whitened: whitened.iter().map(hermitian_part).collect() })
    }

    /// `B̃_k = t_k · I`.
    pub fn scaled_identity(model: &GaussianCranModel, t: &[f64]) -> Result<Self> {
        let w = model.rx_antennas.iter().zip(t).map(|(&m, &v)| CMatrix::identity(m, m).scale(v)).collect();
        Self::from_whitened(model, w)
    }

    pub fn zero(model: &GaussianCranModel) -> Self {
        Self::scaled_identity(model, &vec![0.0; model.num_relays()]).expect("zero is feasible")
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.b
    }

    pub fn whitened(&self) -> &[CMatrix] {
        &self.whitened
    }

    pub fn compression_cost(&self, k: usize) -> f64 {
        compression_cost_whitened(&self.whitened[k], k).expect("validated on construction")
    }
}

/// `log₂ det(I + K_T^{1/2} (∑_{k∈S^c} H_{k,T}ᴴ B_k H_{k,T}) K_T^{1/2})`.
pub fn info_term(
    model: &GaussianCranModel,
    users: u32,
    relays_c: u32,
    k_t: &CMatrix,
    profile: &QuantizerProfile,
) -> Result<f64> {
    info_term_whitened(model, users, relays_c, k_t, profile.whitened())
}

/// [`info_term`] for whitened quantizers, with `K_T^{1/2}` supplied.
pub fn info_term_whitened(
    model: &GaussianCranModel,
    users: u32,
    relays_c: u32,
    k_t: &CMatrix,
    whitened: &[CMatrix],
) -> Result<f64> {
    let n: usize = subsets::members(users).iter().map(|&l| model.tx_antennas[l]).sum();
    if k_t.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("K_T must be {n}×{n}")));
    }
    if relays_c == 0 || users == 0 {
        return Ok(0.0);
    }
    let half = psd_sqrt(k_t);
    let mut a = CMatrix::zeros(n, n);
    for k in subsets::members(relays_c) {
        let g = model.whitened_block(1 << k, users);
        a += g.adjoint() * &whitened[k] * g;
    }
    Ok(log2det_i_plus(&hermitian_part(&(&half * a * &half))))
}

/// `Σ_k − Σ_k B_k Σ_k`.
pub fn mmse_matrix(model: &GaussianCranModel, k: usize, b_k: &CMatrix) -> Result<CMatrix> {
    if k >= model.num_relays() {
        return Err(Error::IndexOutOfRange { index: k, len: model.num_relays() });
    }
    mmse(b_k, &model.noise[k])
}

/// One phase of a time-sharing profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShareEntry {
    pub weight: f64,
    /// One covariance `K_{l,q}` per user.
    pub inputs: Vec<CMatrix>,
    pub quantizers: QuantizerProfile,
}

/// Gaussian inputs and quantizers switched by a time-sharing variable `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShare {
    entries: Vec<TimeShareEntry>,
}

impl TimeShare {
    pub fn new(model: &GaussianCranModel, entries: Vec<TimeShareEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InfeasibleTimeShare("no phases".into()));
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if entries.iter().any(|e| !(0.0..=1.0).contains(&e.weight)) || (total - 1.0).abs() > POWER_TOL {
            return Err(Error::InfeasibleTimeShare(format!("weights sum to {total}")));
        }
        for l in 0..model.num_users() {
            let n = model.tx_antennas[l];
            let mut avg = CMatrix::zeros(n, n);
            for (q, e) in entries.iter().enumerate() {
                let k = e.inputs.get(l).ok_or_else(|| {
                    Error::InfeasibleTimeShare(format!("phase {q} lacks an input for user {l}"))
                })?;
                if k.shape() != (n, n) || !loewner_le(&CMatrix::zeros(n, n), k, POWER_TOL) {
                    return Err(Error::InfeasibleTimeShare(format!("K[{l}] of phase {q} is not an {n}×{n} PSD matrix")));
                }
                avg += k.scale(e.weight);
            }
            if !loewner_le(&avg, &model.input_caps[l], POWER_TOL) {
                return Err(Error::InfeasibleTimeShare(format!("power constraint of user {l}")));
            }
        }
        Ok(Self { entries })
    }

    /// A single phase with inputs at the caps.
    pub fn single(model: &GaussianCranModel, quantizers: QuantizerProfile) -> Result<Self> {
        Self::new(model, vec![TimeShareEntry { weight: 1.0, inputs: model.input_caps.clone(), quantizers }])
    }

    pub fn entries(&self) -> &[TimeShareEntry] {
        &self.entries
    }

    /// Largest violation of the power constraint, zero when satisfied.
    pub fn power_residual(&self, model: &GaussianCranModel) -> f64 {
        (0..model.num_users())
            .map(|l| {
                let n = model.tx_antennas[l];
                let avg = self.entries.iter().fold(CMatrix::zeros(n, n), |acc, e| acc + e.inputs[l].scale(e.weight));
                (-eigenvalues(&(&model.input_caps[l] - avg))[0]).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}
