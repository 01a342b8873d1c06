//! Acceptance criteria. Each prints one `[PASS]` or `[FAIL]` line with the
//! measured quantity; the test fails if any criterion fails.

use std::time::{Duration, Instant};

use cran_rates::dm::{self, DmEvaluator};
use cran_rates::gaussian_schemes::{self as gs, GaussianOptions};
use cran_rates::optimize::{self, PgConfig};
use cran_rates::submodular::{self, DEFAULT_TOL};
use cran_rates::sweep;
use cran_rates::wyner::{CfVariant, FronthaulLaw, WynerScheme, WynerSweep};
use cran_rates::{random, subsets};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let pass = out.pass && elapsed <= budget;
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id}. {name}: {} ({:.2?} of {:.0?})", out.detail, elapsed, budget);
    pass
}

// 1
const CLOSED_FORM_TOL: f64 = 1e-4;
const CLOSED_FORM_GRID: f64 = 1e-5;

fn closed_form_vs_grid() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let steps = (1.0 / CLOSED_FORM_GRID) as usize;
        let grid = (0..=steps)
            .map(|i| gs::example1_no_ts_objective(1.0, p, 0.5, i as f64 * CLOSED_FORM_GRID))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((gs::closed_form_no_ts(1.0, p, 0.5) - grid).abs());
    }
    let zeros = gs::closed_form_no_ts(1.0, 1.0, 0.0) == 0.0 && gs::closed_form_no_ts(1.0, 0.0, 0.5) == 0.0;
    Outcome { pass: worst <= CLOSED_FORM_TOL && zeros, detail: format!("max |closed − grid| = {worst:.2e}, zero cases exact: {zeros}") }
}

// 2
const CHAIN_SLACK: f64 = -1e-6;
const SMALL_POWER_GAIN: f64 = 1e-3;

fn example1_orderings() -> Outcome {
    let grid = sweep::linear_grid(-20.0, 20.0, 41).unwrap();
    let cfg = PgConfig { restarts: 4, ..PgConfig::default() };
    let mut worst = f64::INFINITY;
    let mut gain = f64::NAN;
    for c in [0.5, 6.0] {
        for r in gs::example1_sweep(1.0, c, &grid, 3, &cfg).unwrap() {
            let chain = [r.cf_ssd_no_ts, r.capacity_no_ts, r.two_phase, r.capacity_ts, r.cutset];
            for w in chain.windows(2) {
                worst = worst.min(w[1] - w[0]);
            }
            if c == 0.5 && r.p_db == -13.0 {
                gain = r.two_phase - r.capacity_no_ts;
            }
        }
    }
    Outcome {
        pass: worst >= CHAIN_SLACK && gain >= SMALL_POWER_GAIN,
        detail: format!("min chain slack = {worst:.2e}, two-phase gain at −13 dB = {gain:.4} bits"),
    }
}

// 3
const GAP_LO: f64 = 1.5;
const GAP_HI: f64 = 1.80;

fn wyner_gap() -> Outcome {
    let mut s = WynerSweep::fixed_default();
    s.p_db = sweep::linear_grid(-10.0, 30.0, 81).unwrap();
    s.schemes = std::iter::once(WynerScheme::Cutset).chain(CfVariant::ALL.map(WynerScheme::Cf)).collect();
    let t = s.run().unwrap();
    let (mut gap, mut at) = (f64::NEG_INFINITY, f64::NAN);
    for row in &t.rows {
        let best = row[2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if row[1] - best > gap {
            gap = row[1] - best;
            at = row[0];
        }
    }
    Outcome {
        pass: (GAP_LO..=GAP_HI).contains(&gap),
        detail: format!("max gap = {gap:.4} bits at {at} dB, required in [{GAP_LO}, {GAP_HI}]"),
    }
}

// 4
const DOF_TARGET: f64 = 1.0;
const DOF_TOL: f64 = 0.05;

fn wyner_dof() -> Outcome {
    let mut s = WynerSweep::dof_default();
    s.fronthaul = FronthaulLaw::LogPower { slope: 5.0 };
    s.p_db = sweep::linear_grid(30.0, 60.0, 31).unwrap();
    s.schemes = vec![WynerScheme::Cf(CfVariant::CapacityTs), WynerScheme::Df];
    let t = s.run().unwrap();
    let per_octave = 10.0 * 2f64.log10();
    let slope = |col: usize| {
        let x: Vec<f64> = t.rows.iter().map(|r| r[0] / per_octave).collect();
        let y: Vec<f64> = t.rows.iter().map(|r| r[col]).collect();
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    };
    let (ts, df) = (slope(1), slope(2));
    Outcome {
        pass: (ts - DOF_TARGET).abs() <= DOF_TOL,
        detail: format!("capacity_ts slope = {ts:.4} bits per 3.01 dB (decode-and-forward {df:.4})"),
    }
}

// 5
const INSTANCES_DOMINATION: usize = 200;

fn domination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(optimize::DEFAULT_SEED);
    let mut failures = 0;
    let mut worst_deficit: f64 = 0.0;
    let mut extreme_points = 0;
    for i in 0..INSTANCES_DOMINATION {
        let relays = 2 + i % 2;
        let users = 1 + (i / 2) % 2;
        let (model, policy) = random::dm_instance(&mut rng, users, relays, 2, false);
        let r = submodular::verify_domination(&model, &policy, DEFAULT_TOL).unwrap();
        failures += r.failures;
        for o in &r.orderings {
            extreme_points += 1;
            worst_deficit = worst_deficit.max(r.rsum - o.achieved_rsum);
            for (c, a) in o.per_relay_rates.iter().zip(&o.allocation) {
                worst_deficit = worst_deficit.max(c - a);
            }
        }
    }
    Outcome {
        pass: failures == 0 && worst_deficit <= DEFAULT_TOL,
        detail: format!("{extreme_points} extreme points, {failures} failures, worst deficit = {worst_deficit:.2e}"),
    }
}

// 6
const COLLAPSE_TOL: f64 = 1e-9;

fn class_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(optimize::DEFAULT_SEED + 6);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (model, policy) = random::dm_instance(&mut rng, 1 + i % 2, 2 + (i / 2) % 2, 2, true);
        let jd = dm::region_cf_jd(&model, &policy).unwrap();
        let th = dm::region_theorem1(&model, &policy).unwrap();
        worst = worst.max(jd.max_abs_diff(&th));
    }
    Outcome { pass: worst <= COLLAPSE_TOL, detail: format!("max |CF-JD − capacity| = {worst:.2e}") }
}

// 7
const CERT_TOL: f64 = 0.05;

fn gap_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(optimize::DEFAULT_SEED + 7);
    let opts = GaussianOptions { pg: PgConfig { restarts: 4, ..PgConfig::default() }, ..GaussianOptions::default() };
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let (l, k) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let (n, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let power = 10f64.powf(rng.gen_range(-1.0..3.0));
        let model = random::gaussian_model(&mut rng, l, n, k, m, power);
        let region = gs::region_gaussian_ts(&model, &opts).unwrap();
        let cert = gs::gap_certificate(&model, &region.region, CERT_TOL).unwrap();
        failures += usize::from(!cert.verified);
        for (t, g) in subsets::nonempty(l).zip(&cert.per_subset_gap) {
            worst = worst.max(g - subsets::size(t) as f64 * cert.delta);
        }
    }
    let (d, _) = gs::gap_delta(2, 1, 1);
    Outcome {
        pass: failures == 0 && d == 1.5,
        detail: format!("{failures} of 50 instances violate, max(gap − |T|Δ) = {worst:.3} bits, Δ(K=2, M=N=1) = {d}"),
    }
}

// 8
fn supermodularity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(optimize::DEFAULT_SEED + 8);
    let mut violations = 0;
    for i in 0..500 {
        let (model, policy) = random::dm_instance(&mut rng, 1 + i % 2, 3, 2, false);
        let joint = dm::assemble_joint(&model, &policy).unwrap();
        let eval = DmEvaluator::new(&model, &joint);
        let bound = submodular::set_function(&eval, eval.sumrate_cf_jd());
        violations += usize::from(!submodular::check_supermodular(&bound, DEFAULT_TOL).unwrap());
    }
    Outcome { pass: violations == 0, detail: format!("{violations} of 500 policies violate") }
}

// 9
const VANISHING_GAP: f64 = 0.05;

fn vanishing_gap() -> Outcome {
    let opts = GaussianOptions::default();
    let mut gaps = Vec::new();
    for eps in [1.0, 0.1, 0.01, 0.001] {
        let model = gs::example1_model(1.0, 1.0, 0.5).unwrap().with_noise_scaled(eps).unwrap();
        let ts = gs::region_gaussian_ts(&model, &opts).unwrap().sum_rate();
        let nots = gs::region_gaussian_no_ts(&model, &opts).unwrap().sum_rate();
        gaps.push(ts - nots);
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap();
    Outcome {
        pass: monotone && last < VANISHING_GAP,
        detail: format!("gaps = {:?}, monotone: {monotone}", gaps.iter().map(|g| format!("{g:.5}")).collect::<Vec<_>>()),
    }
}

#[test]
fn acceptance() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        run(1, "closed-form single-phase rate", Duration::from_secs(1), closed_form_vs_grid),
        run(2, "two-relay scheme ordering", min(2), example1_orderings),
        run(3, "Wyner oblivious gap", min(5), wyner_gap),
        run(4, "Wyner degrees of freedom", min(5), wyner_dof),
        run(5, "extreme-point domination", min(5), domination),
        run(6, "class collapse", min(1), class_collapse),
        run(7, "constant-gap certificate", min(10), gap_certificates),
        run(8, "supermodularity", min(1), supermodularity),
        run(9, "vanishing time-sharing gain", min(2), vanishing_gap),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed} of {} criteria passed", results.len());
    assert!(results.iter().all(|&p| p), "{} criteria failed", results.len() - passed);
}
