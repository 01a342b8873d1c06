//! Maximizers for the rate expressions: golden-section search on an
//! interval, projected gradient ascent for min-of-pieces objectives on
//! convex sets, and a simplex-grid search over time-sharing weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5EED;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Distance of `argmax` from the feasible set.
    pub feasibility_residual: f64,
    pub restarts_used: usize,
    /// Projected-gradient stationarity measure of the smoothed objective.
    #[serde(default)]
    pub kkt_residual: f64,
    /// Best true objective value after each accepted iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl OptResult {
    fn point(argmax: Vec<f64>, value: f64, iterations: usize) -> Self {
        Self { argmax, value, iterations, feasibility_residual: 0.0, restarts_used: 1, kkt_residual: 0.0, trace: Vec::new() }
    }
}

/// Accepts `−∞`, which rate expressions reach at the cone boundary.
fn finite(v: f64, at: f64) -> Result<f64> {
    if v.is_finite() || v == f64::NEG_INFINITY {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("objective is {v} at {at}")))
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
///
/// The endpoints are evaluated too, so monotone objectives return the
/// correct boundary point.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<OptResult> {
    if !(lo < hi) {
        return Err(Error::OptimizerFailed(format!("empty interval [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = finite(f(c), c)?;
    let mut fd = finite(f(d), d)?;
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = finite(f(c), c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = finite(f(d), d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, finite(f(mid), mid)?);
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    for x in [lo, hi] {
        let v = finite(f(x), x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(OptResult::point(vec![best.0], best.1, iterations))
}

/// Evaluates `grid + 1` equispaced points, then refines around the best one
/// by golden-section search.
pub fn grid_then_golden(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize, tol: f64) -> Result<OptResult> {
    let grid = grid.max(2);
    let h = (hi - lo) / grid as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..=grid {
        let x = lo + h * i as f64;
        let v = finite(f(x), x)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let a = lo + h * best.0.saturating_sub(1) as f64;
    let b = (lo + h * (best.0 + 1) as f64).min(hi);
    let mut r = golden_section(&f, a, b, tol)?;
    if best.1 > r.value {
        r.argmax = vec![lo + h * best.0 as f64];
        r.value = best.1;
    }
    r.iterations += grid + 1;
    Ok(r)
}

/// Euclidean projection onto `{x : x_i ≥ floor, ∑x_i = 1}`.
pub fn project_simplex(v: &mut [f64], floor: f64) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mass = 1.0 - floor * n as f64;
    let mut u: Vec<f64> = v.iter().map(|x| x - floor).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - mass) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - floor - theta).max(0.0) + floor);
}

/// All points of the `dim`-simplex whose coordinates are multiples of
/// `1/steps`.
pub fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(dim, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        rec(dim, steps, steps, &mut Vec::new(), &mut out);
    }
    out
}

fn min_of(pieces: &[f64]) -> f64 {
    let m = pieces.iter().copied().fold(f64::INFINITY, f64::min);
    if m.is_nan() {
        f64::NEG_INFINITY
    } else {
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgConfig {
    /// Random starting points in addition to the warm starts.
    pub restarts: usize,
    /// Gradient iterations per start.
    pub max_iter: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// Stop once the predicted increase of a step falls below this.
    pub tol: f64,
    /// Rejected steps in a row before switching to pattern search.
    pub stall: usize,
    pub seed: u64,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self { restarts: 20, max_iter: 500, fd_step: 1e-6, tol: 1e-12, stall: 50, seed: DEFAULT_SEED }
    }
}

/// Central-difference Jacobian, one row per piece.
fn fd_jacobian<F: Fn(&[f64]) -> Vec<f64>>(pieces: &F, x: &[f64], n: usize, rel: f64) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; x.len()]; n];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let h = rel * (1.0 + x[i].abs());
        y[i] = x[i] + h;
        let up = pieces(&y);
        y[i] = x[i] - h;
        let dn = pieces(&y);
        y[i] = x[i];
        for (r, row) in jac.iter_mut().enumerate() {
            let g = (up[r] - dn[r]) / (2.0 * h);
            row[i] = if g.is_finite() { g } else { 0.0 };
        }
    }
    jac
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Step of `max_d min_i [p_i + g_i·d] − |d|²/2η` subject to `x + d` feasible.
///
/// The dual over piece weights `λ` is minimized by projected gradient; for
/// fixed `λ` the primal step is `P(x + η G λ) − x`.
fn proximal_step<P: Fn(&mut [f64])>(p: &[f64], jac: &[Vec<f64>], x: &[f64], eta: f64, project: &P) -> Vec<f64> {
    let n = p.len();
    let m = min_of(p);
    let primal = |lam: &[f64]| {
        let mut y: Vec<f64> = x.to_vec();
        for (l, g) in lam.iter().zip(jac) {
            if *l != 0.0 {
                y.iter_mut().zip(g).for_each(|(v, gi)| *v += eta * l * gi);
            }
        }
        project(&mut y);
        y.iter_mut().zip(x).for_each(|(v, xi)| *v -= xi);
        y
    };
    let mut lam = vec![0.0; n];
    let start = p.iter().position(|&v| v == m).unwrap_or(0);
    lam[start] = 1.0;
    if n == 1 {
        return primal(&lam);
    }
    let lip = eta * jac.iter().map(|g| dot(g, g)).sum::<f64>() + 1e-300;
    let step = 1.0 / lip;
    let mut d = primal(&lam);
    for _ in 0..200 {
        // gradient of the dual: p_i + g_i·d(λ), shifted by the minimum
        let grad: Vec<f64> = (0..n).map(|i| p[i] - m + dot(&jac[i], &d)).collect();
        let mut next: Vec<f64> = lam.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
        project_simplex(&mut next, 0.0);
        let moved: f64 = next.iter().zip(&lam).map(|(a, b)| (a - b).abs()).sum();
        lam = next;
        d = primal(&lam);
        if moved < 1e-12 {
            break;
        }
    }
    d
}

struct Run {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    kkt: f64,
    trace: Vec<f64>,
}

fn single_run<F, P>(pieces: &F, project: &P, mut x: Vec<f64>, cfg: &PgConfig) -> Run
where
    F: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut [f64]),
{
    project(&mut x);
    let mut p = pieces(&x);
    let mut best = min_of(&p);
    let mut trace = vec![best];
    let mut iterations = 0;
    let mut kkt = f64::INFINITY;
    let mut eta: f64 = 1.0;
    let mut rejected = 0;
    while iterations < cfg.max_iter && best.is_finite() {
        iterations += 1;
        let jac = fd_jacobian(pieces, &x, p.len(), cfg.fd_step);
        let mut accepted = false;
        for _ in 0..40 {
            let d = proximal_step(&p, &jac, &x, eta, project);
            let pred = (0..p.len()).map(|i| p[i] + dot(&jac[i], &d)).fold(f64::INFINITY, f64::min) - best;
            if pred <= cfg.tol {
                kkt = norm(&d) / eta;
                break;
            }
            let cand: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            let pc = pieces(&cand);
            let v = min_of(&pc);
            if v >= best + 0.1 * pred {
                x = cand;
                p = pc;
                best = v;
                trace.push(best);
                accepted = true;
                eta = (eta * 2.0).min(1e6);
                break;
            }
            eta *= 0.25;
            rejected += 1;
            if rejected >= cfg.stall {
                break;
            }
        }
        if !accepted {
            break;
        }
        rejected = 0;
    }

    // pattern search on the nonsmooth objective around the final point
    for h in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        loop {
            let mut improved = false;
            for i in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let mut cand = x.clone();
                    cand[i] += sign * h;
                    project(&mut cand);
                    let v = min_of(&pieces(&cand));
                    iterations += 1;
                    if v > best + 1e-14 {
                        best = v;
                        x = cand;
                        improved = true;
                        trace.push(best);
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Run { x, value: best, iterations, kkt, trace }
}

/// Projected gradient ascent on `min_i pieces(x)_i` over the set described
/// by `project`.
///
/// Each step maximizes the linearization of the pieces around the current
/// point with a proximal term, accepted when the true minimum rises by a
/// fraction of the predicted increase; a pattern search finishes each start. Starts are `warm` followed by
/// `cfg.restarts` draws of `sample`; the best run wins, ties going to the
/// earliest start, so the result does not depend on the thread count.
pub fn projected_gradient<F, P, S>(
    pieces: F,
    project: P,
    warm: &[Vec<f64>],
    sample: S,
    cfg: &PgConfig,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    P: Fn(&mut [f64]) + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let mut starts: Vec<Vec<f64>> = warm.to_vec();
    for i in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        starts.push(sample(&mut rng));
    }
    if starts.is_empty() {
        return Err(Error::OptimizerFailed("no starting points".into()));
    }
    let runs: Vec<Run> = starts.into_par_iter().map(|x0| single_run(&pieces, &project, x0, cfg)).collect();
    let restarts_used = runs.len();
    let total_iter: usize = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one run");
    if !best.value.is_finite() {
        return Err(Error::OptimizerFailed("every restart diverged".into()));
    }
    let mut projected = best.x.clone();
    project(&mut projected);
    let feasibility_residual = norm(&projected.iter().zip(&best.x).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(OptResult {
        argmax: best.x,
        value: best.value,
        iterations: total_iter,
        feasibility_residual,
        restarts_used,
        kkt_residual: best.kkt,
        trace: best.trace,
    })
}

/// [`projected_gradient`] for a smooth scalar objective on a box.
pub fn projected_gradient_box<F>(f: F, lo: &[f64], hi: &[f64], cfg: &PgConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
        return Err(Error::OptimizerFailed("invalid box".into()));
    }
    let centre: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    projected_gradient(
        |x| vec![f(x)],
        |x: &mut [f64]| x.iter_mut().zip(lo.iter().zip(hi)).for_each(|(v, (a, b))| *v = v.clamp(*a, *b)),
        &[centre],
        |rng| lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..=*b)).collect(),
        cfg,
    )
}

/// Maximizes `inner(weights)` over the simplex grid of resolution `res` in
/// dimension `q`.
///
/// The returned `argmax` is the weight vector followed by the inner argmax.
pub fn timeshare_search<F>(inner: F, q: usize, res: f64) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<OptResult> + Sync,
{
    if !(1..=3).contains(&q) {
        return Err(Error::Unsupported(format!("time sharing with |Q| = {q}")));
    }
    let steps = (1.0 / res).round().max(1.0) as usize;
    let grid = simplex_grid(q, steps);
    let results: Vec<Result<OptResult>> = grid.par_iter().map(|w| inner(w)).collect();
    let mut best: Option<(Vec<f64>, OptResult)> = None;
    let mut iterations = 0;
    let mut restarts = 0;
    for (w, r) in grid.into_iter().zip(results) {
        let r = r?;
        iterations += r.iterations;
        restarts += r.restarts_used;
        if best.as_ref().map_or(true, |(_, b)| r.value > b.value) {
            best = Some((w, r));
        }
    }
    let (w, mut r) = best.expect("grid is nonempty");
    let mut argmax = w;
    argmax.extend(r.argmax);
    r.argmax = argmax;
    r.iterations = iterations;
    r.restarts_used = restarts;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_quadratic_and_constant() {
        let r = golden_section(|b| -(b - 0.3) * (b - 0.3), 0.0, 1.0, 1e-8).unwrap();
        assert!((r.argmax[0] - 0.3).abs() < 1e-6);
        let r = golden_section(|_| 2.5, 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(r.value, 2.5);
        let r = golden_section(|b| b, 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(r.argmax[0], 1.0);
        assert!(golden_section(|b| (b - b) / (b - b), 0.0, 1.0, 1e-6).is_err());
        assert!(golden_section(|b| b, 1.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn golden_section_on_the_two_relay_min_form() {
        // max_b min{ log(1+2Pb), 2C + 2log(1-b), C + log(1-b) + log(1+Pb) } at P = 1, C = 0.5
        let (p, c) = (1.0f64, 0.5f64);
        let f = |b: f64| {
            let v = [
                (1.0 + 2.0 * p * b).log2(),
                2.0 * c + 2.0 * (1.0 - b).log2(),
                c + (1.0 - b).log2() + (1.0 + p * b).log2(),
            ];
            v.into_iter().fold(f64::INFINITY, f64::min)
        };
        let r = golden_section(f, 0.0, 1.0, 1e-10).unwrap();
        let closed = (1.0 + 3.0 - 7f64.sqrt()).log2();
        assert!((r.value - closed).abs() < 1e-8);
    }

    #[test]
    fn grid_then_golden_escapes_local_maxima() {
        let f = |x: f64| (-(x - 0.1).powi(2) * 200.0).exp() * 0.5 + (-(x - 0.8).powi(2) * 200.0).exp();
        let r = grid_then_golden(f, 0.0, 1.0, 50, 1e-9).unwrap();
        assert!((r.argmax[0] - 0.8).abs() < 1e-4);
    }

    #[test]
    fn simplex_projection_and_grid() {
        let mut v = vec![0.7, 0.7, -0.5];
        project_simplex(&mut v, 0.0);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((v[0] - 0.5).abs() < 1e-12 && v[2] == 0.0);
        let mut v = vec![2.0, -3.0];
        project_simplex(&mut v, 0.01);
        assert!((v[1] - 0.01).abs() < 1e-12 && (v[0] - 0.99).abs() < 1e-12);
        let g = simplex_grid(3, 20);
        assert_eq!(g.len(), 231);
        assert!(g.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert_eq!(simplex_grid(1, 20), vec![vec![1.0]]);
    }

    #[test]
    fn pg_interior_and_corner_maxima() {
        let cfg = PgConfig { restarts: 4, ..PgConfig::default() };
        let r = projected_gradient_box(
            |x| -(x[0] - 0.3).powi(2) - 2.0 * (x[1] - 0.6).powi(2),
            &[0.0, 0.0],
            &[1.0, 1.0],
            &cfg,
        )
        .unwrap();
        assert!((r.argmax[0] - 0.3).abs() < 1e-4 && (r.argmax[1] - 0.6).abs() < 1e-4);
        assert!(r.feasibility_residual <= 1e-8);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));

        let r = projected_gradient_box(|x| x[0] + 2.0 * x[1], &[0.0, 0.0], &[1.0, 1.0], &cfg).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-9 && (r.argmax[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pg_matches_golden_on_single_relay_rate() {
        // one relay, one user: max_b min{ C + log(1-b) + ..., log(1+Pb) } reduces to
        // the S = {1} cut C + log(1-b) and the S = ∅ cut log(1+Pb)
        let (p, c) = (3.0f64, 1.0f64);
        let pieces = |b: f64| vec![(1.0 + p * b).log2(), c + (1.0 - b).log2().max(-60.0)];
        let g = golden_section(|b| min_of(&pieces(b)), 0.0, 1.0, 1e-10).unwrap();
        let cfg = PgConfig { restarts: 3, ..PgConfig::default() };
        let r = projected_gradient(
            |x| pieces(x[0]),
            |x: &mut [f64]| x[0] = x[0].clamp(0.0, 1.0 - 1e-9),
            &[vec![0.5]],
            |rng| vec![rng.gen::<f64>()],
            &cfg,
        )
        .unwrap();
        assert!((r.value - g.value).abs() < 1e-4, "{} vs {}", r.value, g.value);
    }

    #[test]
    fn pg_is_deterministic_and_restart_monotone() {
        let f = |x: &[f64]| vec![(3.0 * x[0]).sin() + (5.0 * x[1]).cos(), 1.5 - x[0]];
        let proj = |x: &mut [f64]| x.iter_mut().for_each(|v| *v = v.clamp(-2.0, 2.0));
        let sample = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let mut prev = f64::NEG_INFINITY;
        for restarts in [1, 2, 4, 8] {
            let cfg = PgConfig { restarts, ..PgConfig::default() };
            let a = projected_gradient(f, proj, &[], sample, &cfg).unwrap();
            let b = projected_gradient(f, proj, &[], sample, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.value >= prev);
            prev = a.value;
        }
    }

    #[test]
    fn timeshare_search_reduces_and_recovers() {
        let inner = |w: &[f64]| Ok(OptResult::point(vec![], w[0] * (1.0 - w[0]), 1));
        let r = timeshare_search(inner, 1, 0.05).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.argmax, vec![1.0]);
        let r = timeshare_search(inner, 2, 0.05).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
        // two-phase structure: phase 1 carries all the power
        let (p, c) = (0.05f64, 0.5f64);
        let inner = |w: &[f64]| {
            let a = w[0];
            if a == 0.0 {
                return Ok(OptResult::point(vec![0.0], 0.0, 1));
            }
            let f = |b: f64| {
                let v = [
                    a * (1.0 + 2.0 * p / a * b).log2(),
                    a * (2.0 * c / a + 2.0 * (1.0 - b).log2()),
                    a * (c / a + (1.0 - b).log2() + (1.0 + p / a * b).log2()),
                ];
                v.into_iter().fold(f64::INFINITY, f64::min)
            };
            golden_section(f, 0.0, 1.0, 1e-9)
        };
        let r = timeshare_search(inner, 2, 0.05).unwrap();
        assert!(r.value > 0.0 && r.argmax[0] < 1.0);
        assert!(timeshare_search(inner, 4, 0.05).is_err());
    }
}
