use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cran_rates::dm::{self, DmCranModel, DmPolicy};
use cran_rates::gaussian_info::GaussianCranModel;
use cran_rates::gaussian_schemes::{self as gs, GaussianOptions};
use cran_rates::optimize::PgConfig;
use cran_rates::submodular::{self, DominationReport};
use cran_rates::sweep::{self, Table};
use cran_rates::wyner::{FronthaulLaw, WynerModel, WynerOptions, WynerScheme, WynerSweep};
use cran_rates::random;

use crate::args::{CsvFormat, Example1Args, RegionArgs, VerifyArgs, WynerArgs};
use crate::output::{emit, labelled, to_json, Failure};

pub const DM_SCHEMES: [&str; 6] = ["theorem1", "cf-jd", "cf-sd", "cf-ssd", "cf-ssd-union", "sumrate"];
pub const GAUSSIAN_SCHEMES: [&str; 3] = ["no-ts", "ts", "cutset"];
/// Slack of the constant-gap check attached to Gaussian regions.
pub const DEFAULT_GAP_TOL: f64 = 0.05;

#[derive(Deserialize)]
struct KindProbe {
    kind: String,
}

#[derive(Deserialize)]
struct DmFile {
    #[allow(dead_code)]
    kind: String,
    model: DmCranModel,
    policy: DmPolicy,
    #[serde(default)]
    relay_order: Option<Vec<usize>>,
    #[serde(default)]
    user_order: Option<Vec<usize>>,
}

#[derive(Deserialize)]
struct GaussianFile {
    #[allow(dead_code)]
    kind: String,
    model: GaussianCranModel,
}

fn parse_document<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Failure::config(format!(
            "{}: line {} column {}: field `{}`: {inner}",
            path.display(),
            inner.line(),
            inner.column(),
            e.path()
        ))
    })
}

fn seed_string(seed: u64) -> String {
    format!("0x{seed:X}")
}

fn pg_config(seed: u64) -> PgConfig {
    PgConfig { seed, ..PgConfig::default() }
}

pub fn region(args: &RegionArgs) -> Result<(), Failure> {
    let path = &args.model;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let probe: KindProbe = parse_document(path, &text)?;
    let results = match probe.kind.as_str() {
        "dm" => {
            check_names(&args.scheme, &DM_SCHEMES)?;
            let file: DmFile = parse_document(path, &text)?;
            dm_results(&file, &args.scheme)?
        }
        "gaussian" => {
            check_names(&args.scheme, &GAUSSIAN_SCHEMES)?;
            let file: GaussianFile = parse_document(path, &text)?;
            gaussian_results(&file.model, args)?
        }
        other => return Err(Failure::config(format!("{}: unknown model kind {other:?}, expected \"dm\" or \"gaussian\"", path.display()))),
    };
    let doc = json!({
        "kind": probe.kind,
        "seed": seed_string(args.common.seed),
        "results": results,
    });
    emit(args.common.out.as_deref(), &to_json(&doc)?)
}

fn check_names(names: &[String], valid: &[&str]) -> Result<(), Failure> {
    for n in names {
        if !valid.contains(&n.as_str()) {
            return Err(Failure::config(format!("unknown scheme {n:?}; expected one of {}", valid.join(", "))));
        }
    }
    Ok(())
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn dm_results(file: &DmFile, schemes: &[String]) -> Result<Vec<Value>, Failure> {
    let (model, policy) = (&file.model, &file.policy);
    let relay_order = file.relay_order.clone().unwrap_or_else(|| (0..model.num_relays()).collect());
    let user_order = file.user_order.clone().unwrap_or_else(|| (0..model.num_users()).collect());
    schemes
        .iter()
        .map(|s| {
            Ok(match s.as_str() {
                "theorem1" => {
                    let r = dm::region_theorem1(model, policy)?;
                    json!({ "scheme": s, "sum_rate": r.sum_rate(), "region": value(&r) })
                }
                "cf-jd" => {
                    let r = dm::region_cf_jd(model, policy)?;
                    json!({ "scheme": s, "sum_rate": r.sum_rate(), "region": value(&r) })
                }
                "cf-sd" => json!({ "scheme": s, "outcome": value(&dm::region_cf_sd(model, policy)?) }),
                "cf-ssd" => json!({
                    "scheme": s,
                    "relay_order": relay_order,
                    "user_order": user_order,
                    "outcome": value(&dm::region_cf_ssd(model, policy, &relay_order, &user_order)?),
                }),
                "cf-ssd-union" => {
                    let u = dm::region_cf_ssd_union(model, policy)?;
                    json!({ "scheme": s, "max_sum_rate": u.max_sum_rate(), "union": value(&u) })
                }
                "sumrate" => json!({ "scheme": s, "sum_rate": dm::sumrate_cf_jd(model, policy)? }),
                _ => unreachable!("names checked"),
            })
        })
        .collect()
}

fn gaussian_results(model: &GaussianCranModel, args: &RegionArgs) -> Result<Vec<Value>, Failure> {
    let opts = GaussianOptions { q_card: args.q_card, pg: pg_config(args.common.seed), ..GaussianOptions::default() };
    let tol = args.common.tol.unwrap_or(DEFAULT_GAP_TOL);
    args.scheme
        .iter()
        .map(|s| {
            let region = match s.as_str() {
                "no-ts" => gs::region_gaussian_no_ts(model, &opts)?,
                "ts" => gs::region_gaussian_ts(model, &opts)?,
                "cutset" => {
                    let r = gs::cutset_region(model);
                    return Ok(json!({ "scheme": s, "sum_rate": r.sum_rate(), "region": value(&r) }));
                }
                _ => unreachable!("names checked"),
            };
            let certificate = match model.equal_antennas() {
                Some(_) => value(&gs::gap_certificate(model, &region.region, tol)?),
                None => Value::Null,
            };
            Ok(json!({
                "scheme": s,
                "sum_rate": region.sum_rate(),
                "q_card": region.q_card,
                "region": value(&region.region),
                "optimizer": value(&region.optimizer),
                "gap_certificate": certificate,
            }))
        })
        .collect()
}

pub fn wyner(args: &WynerArgs) -> Result<(), Failure> {
    WynerModel::new(args.k, args.gamma, 1.0, if args.dof { 0.0 } else { args.c })?;
    let mut s = if args.dof { WynerSweep::dof_default() } else { WynerSweep::fixed_default() };
    s.cells = args.k;
    s.gamma = args.gamma;
    if !args.dof {
        s.fronthaul = FronthaulLaw::Fixed { c: args.c };
    }
    if let Some(spec) = &args.sweep {
        s.p_db = spec.power_db().map_err(Failure::config)?;
    }
    if !args.scheme.is_empty() {
        s.schemes = args
            .scheme
            .iter()
            .map(|n| {
                WynerScheme::parse(n).ok_or_else(|| {
                    let names: Vec<&str> = WynerScheme::ALL.iter().map(|s| s.name()).collect();
                    Failure::config(format!("unknown scheme {n:?}; expected one of {}", names.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?;
    }
    s.options = WynerOptions { q_max: args.q_card, pg: PgConfig { seed: args.common.seed, ..WynerOptions::default().pg } };
    let table = s.run()?;
    let out = args.common.out.as_deref();
    emit(out, &table.to_wide_csv())?;
    if let Some(path) = out {
        let sidecar = path.with_extension("json");
        if sidecar == path {
            return Err(Failure::config("the CSV output must not have a .json extension"));
        }
        emit(Some(&sidecar), &to_json(&json!({ "seed": seed_string(args.common.seed), "sweep": value(&s) }))?)?;
    }
    Ok(())
}

pub fn example1(args: &Example1Args) -> Result<(), Failure> {
    let grid = match &args.sweep {
        Some(spec) => spec.power_db().map_err(Failure::config)?,
        None => sweep::linear_grid(-20.0, 20.0, 41)?,
    };
    if args.c.is_empty() {
        return Err(Failure::config("at least one fronthaul value is needed"));
    }
    let cfg = pg_config(args.common.seed);
    let render = |t: &Table| match args.format {
        CsvFormat::Wide => t.to_wide_csv(),
        CsvFormat::Long => t.to_long_csv("rate_bits"),
    };
    let mut blocks = Vec::new();
    for &c in &args.c {
        let rows = gs::example1_sweep(args.a, c, &grid, args.q_card, &cfg)?;
        blocks.push((c, render(&sweep::example1_table(&rows))));
    }
    match (&args.common.out, blocks.len()) {
        (Some(path), 1) => emit(Some(path), &blocks[0].1),
        (Some(path), _) => {
            for (c, text) in &blocks {
                emit(Some(&labelled(path, &format!("C{}", sweep::format_sig(*c)))), text)?;
            }
            Ok(())
        }
        (None, _) => {
            let joined: Vec<&str> = blocks.iter().map(|(_, t)| t.as_str()).collect();
            emit(None, &joined.join("\n"))
        }
    }
}

#[derive(Serialize)]
struct InstanceSummary {
    index: usize,
    rsum: f64,
    extreme_points: usize,
    failures: usize,
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    if args.instances == 0 {
        return Err(Failure::config("--instances must be at least 1"));
    }
    if args.k == 0 || args.l == 0 {
        return Err(Failure::config("--k and --l must be at least 1"));
    }
    let tol = args.common.tol.unwrap_or(submodular::DEFAULT_TOL);
    let seed = args.common.seed;
    let reports: Vec<DominationReport> = (0..args.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (model, policy) = random::dm_instance(&mut rng, args.l, args.k, 2, false);
            submodular::verify_domination(&model, &policy, tol)
        })
        .collect::<Result<_, _>>()?;
    let summaries: Vec<InstanceSummary> = reports
        .iter()
        .enumerate()
        .map(|(index, r)| InstanceSummary { index, rsum: r.rsum, extreme_points: r.orderings.len(), failures: r.failures })
        .collect();
    let failing: Vec<(usize, &DominationReport)> = reports.iter().enumerate().filter(|(_, r)| !r.passed()).collect();
    let total: usize = reports.iter().map(|r| r.failures).sum();
    let doc = json!({
        "seed": seed_string(seed),
        "instances": args.instances,
        "relays": args.k,
        "users": args.l,
        "tolerance": tol,
        "failures": total,
        "passed": total == 0,
        "summary": value(&summaries),
        "failing": failing.iter().map(|(i, r)| json!({ "index": i, "report": value(r) })).collect::<Vec<_>>(),
    });
    emit(args.common.out.as_deref(), &to_json(&doc)?)?;
    if total > 0 {
        let first = failing[0].0;
        return Err(Failure::verification(format!("{total} domination failures in {} instances, first at index {first}", failing.len())));
    }
    Ok(())
}
