//! End-to-end checks across modules: documents in, regions and tables out.

use cran_rates::dm::{self, DmCranModel, DmPolicy, SchemeRegion};
use cran_rates::gaussian_info::GaussianCranModel;
use cran_rates::gaussian_schemes::{self as gs, GaussianOptions};
use cran_rates::optimize::PgConfig;
use cran_rates::submodular;
use cran_rates::sweep::{self, Table};
use cran_rates::wyner::{CfVariant, WynerScheme, WynerSweep};
use cran_rates::random;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dm_documents_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
    let m: DmCranModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
    let p: DmPolicy = serde_json::from_str(&serde_json::to_string(&policy).unwrap()).unwrap();
    let (a, b) = (dm::region_cf_jd(&m, &p).unwrap(), dm::region_cf_jd(&model, &policy).unwrap());
    assert_eq!(a.bounds.len(), b.bounds.len());
    for (x, y) in a.bounds.iter().zip(&b.bounds) {
        assert_eq!(x.users, y.users);
        assert!((x.bound - y.bound).abs() < 1e-12);
    }
}

#[test]
fn successive_boxes_sit_inside_joint_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let (model, policy) = random::dm_instance(&mut rng, 2, 2, 2, false);
        let jd = dm::region_cf_jd(&model, &policy).unwrap();
        let union = dm::region_cf_ssd_union(&model, &policy).unwrap();
        for b in &union.boxes {
            if let SchemeRegion::Feasible { region } = &b.outcome {
                assert!(region.is_within(&jd, 1e-9));
            }
        }
        if let Some(s) = union.max_sum_rate() {
            assert!(s <= jd.sum_rate() + 1e-9);
        }
    }
}

#[test]
fn domination_holds_with_three_relays_and_two_users() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let (model, policy) = random::dm_instance(&mut rng, 2, 3, 2, false);
        assert!(submodular::verify_domination(&model, &policy, submodular::DEFAULT_TOL).unwrap().passed());
    }
}

#[test]
fn example1_model_matches_scalar_closed_forms() {
    let model = gs::example1_model(1.0, 2.0, 0.8).unwrap();
    let doc = serde_json::to_string(&model).unwrap();
    let back: GaussianCranModel = serde_json::from_str(&doc).unwrap();
    let opts = GaussianOptions { pg: PgConfig { restarts: 2, ..PgConfig::default() }, ..GaussianOptions::default() };
    let nots = gs::region_gaussian_no_ts(&back, &opts).unwrap().sum_rate();
    assert!((nots - gs::closed_form_no_ts(1.0, 2.0, 0.8)).abs() < 1e-6);
    let cut = gs::cutset_region(&back).sum_rate();
    assert!((cut - gs::cutset_example1(1.0, 2.0, 0.8)).abs() < 1e-12);
}

#[test]
fn sweep_tables_parse_back() {
    let cfg = PgConfig { restarts: 1, ..PgConfig::default() };
    let rows = gs::example1_sweep(1.0, 0.5, &[-10.0, 0.0], 2, &cfg).unwrap();
    let t = sweep::example1_table(&rows);
    let back = Table::parse_wide_csv(&t.to_wide_csv()).unwrap();
    assert_eq!(back.columns, t.columns);
    for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
        assert!((a - b).abs() <= 5e-6 * b.abs());
    }

    let mut w = WynerSweep::fixed_default();
    w.p_db = vec![0.0, 5.0];
    w.schemes = vec![WynerScheme::Cutset, WynerScheme::Cf(CfVariant::SsdNoTs)];
    let t = w.run().unwrap();
    assert_eq!(Table::parse_wide_csv(&t.to_wide_csv()).unwrap().rows.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jd_sum_rate_is_monotone_in_fronthaul(seed in 0u64..1000, extra in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, policy) = random::dm_instance(&mut rng, 1, 2, 2, false);
        let more: Vec<f64> = model.fronthaul().iter().map(|c| c + extra).collect();
        let a = dm::sumrate_cf_jd(&model, &policy).unwrap();
        let b = dm::sumrate_cf_jd(&model.with_fronthaul(more).unwrap(), &policy).unwrap();
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn example1_chain_at_random_points(db in -20.0f64..20.0, c in 0.1f64..6.0) {
        let p = sweep::db_to_linear(db);
        let chain = [
            gs::cf_ssd_no_ts_example1(1.0, p, c),
            gs::closed_form_no_ts(1.0, p, c),
            gs::two_phase_rate(1.0, p, c),
            gs::cutset_example1(1.0, p, c),
        ];
        for w in chain.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-9, "{:?}", chain);
        }
    }
}
