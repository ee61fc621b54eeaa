use std::path::PathBuf;

use dpsr_core::auditor::{canonical_pair, DEFAULT_PAIR_CAP, DEFAULT_VERIFY_PAIRS};
use dpsr_core::bounds::{all_bounds, BoundReport};
use dpsr_core::distribution::{fraction_string, to_f64};
use dpsr_core::grouptesting::{parse_rational, simulate};
use dpsr_core::mechanisms::DEFAULT_OUTCOME_CAP;
use dpsr_core::{
    audit_accuracy, audit_privacy, audit_testing_privacy, mc_estimate_delta, AccuracyReport,
    AuditOptions, AuditReport, ScanPolicy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    AuditArgs, BoundsArgs, CapArgs, GridArgs, GtArgs, ModeChoice, PointArgs, PrivacyArgs,
    SampleArgs, ScanChoice, SweepArgs,
};
use crate::config::Layer;
use crate::error::{usage, CliError, CliResult};
use crate::output::{write_atomically, Rendered, Table, SCHEMA_VERSION};
use crate::ratio::Multiplier;
use crate::subject::{Subject, SubjectKind, SubjectPlan};

const DEFAULT_MC_SAMPLES: u64 = 100_000;

fn dec(x: f64) -> String {
    format!("{x:?}")
}

fn point(
    layer: &mut Layer,
    p: &PointArgs,
    fixed_n: Option<usize>,
) -> CliResult<(usize, usize, Option<usize>)> {
    let n = match (layer.get("n", p.n)?, fixed_n) {
        (Some(n), _) => n,
        (None, Some(n)) => n,
        (None, None) => return Err(usage("missing --n")),
    };
    Ok((n, layer.require("d", p.d)?, layer.get("beta", p.beta)?))
}

fn multiplier(layer: &mut Layer, a: &PrivacyArgs) -> CliResult<Multiplier> {
    let eps2: Option<f64> = layer.get("eps2", a.eps2)?;
    let t: Option<String> = layer.get("t", a.t.clone())?;
    // a flag for one silences the config value of the other
    let (eps2, t) = match (a.eps2, &a.t) {
        (Some(e), _) => (Some(e), None),
        (None, Some(t)) => (None, Some(t.clone())),
        _ => (eps2, t),
    };
    match (eps2, t) {
        (Some(_), Some(_)) => Err(usage("give either --eps2 or --t, not both")),
        (Some(e), None) => Multiplier::from_eps2(e),
        (None, Some(t)) => Multiplier::from_t(
            parse_rational(&t).map_err(|_| usage(format!("--t: cannot read {t:?}")))?,
        ),
        (None, None) => Ok(Multiplier::one()),
    }
}

fn multiplier_json(m: &Multiplier) -> Value {
    json!({ "t": fraction_string(&m.t), "eps2": m.eps2, "rounding": m.rounding })
}

fn audit_options(layer: &mut Layer, c: &CapArgs, seed: Option<u64>) -> CliResult<AuditOptions> {
    let scan = match layer.or("scan", c.scan, ScanChoice::Auto)? {
        ScanChoice::Auto => ScanPolicy::Auto,
        ScanChoice::Full => ScanPolicy::Full,
        ScanChoice::Symmetric => ScanPolicy::Symmetric,
    };
    Ok(AuditOptions {
        outcome_cap: layer.or("outcome-cap", c.outcome_cap, DEFAULT_OUTCOME_CAP)?,
        pair_cap: layer.or("pair-cap", c.pair_cap, DEFAULT_PAIR_CAP)?,
        scan,
        verify_pairs: DEFAULT_VERIFY_PAIRS,
        seed: seed.unwrap_or(0),
    })
}

fn require_seed(seed: Option<u64>, why: &str) -> CliResult<u64> {
    seed.ok_or_else(|| usage(format!("{why} is randomized; --seed is required")))
}

/// Generator for simulation draws, on a different stream from the one
/// that drew any random design.
fn sim_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub fn bounds(mut layer: Layer, a: &BoundsArgs) -> CliResult<Rendered> {
    let (n, d, beta) = point(&mut layer, &a.point, None)?;
    let beta = beta.ok_or_else(|| usage("missing --beta"))?;
    let eps1 = layer.or("eps1", a.eps1, 0.0)?;
    let eps2 = layer.or("eps2", a.eps2, 0.0)?;
    layer.finish()?;
    let set = all_bounds(n, d, beta, eps1, eps2)?;

    let mut table = Table::new(["bound", "value", "raw", "regime_ok", "regime_note"]);
    let mut row = |name: &str, r: Option<&BoundReport>| match r {
        Some(r) => table.push(vec![
            name.into(),
            dec(r.value),
            dec(r.raw),
            r.regime_ok.to_string(),
            r.regime_note.clone(),
        ]),
        None => table.push(vec![
            name.into(),
            "-".into(),
            "-".into(),
            "false".into(),
            "beta > min(d, n-d)".into(),
        ]),
    };
    row("thm1_lower", Some(&set.thm1_lower));
    row("thm1_upper", set.thm1_upper.as_ref());
    row("thm2_lower", Some(&set.thm2_lower));
    row("thm2_upper", Some(&set.thm2_upper));
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "bounds",
        "n": n, "d": d, "beta": beta, "eps1": eps1, "eps2": eps2,
        "bounds": set,
    });
    Ok(Rendered {
        json,
        table,
        single: false,
    })
}

struct ExactAudit {
    privacy: AuditReport,
    accuracy: Option<AccuracyReport>,
}

fn exact_audit(s: &Subject, m: &Multiplier, opts: &AuditOptions) -> CliResult<ExactAudit> {
    let privacy = match &s.kind {
        SubjectKind::Mech(mech) => audit_privacy(mech, &m.t, opts)?,
        SubjectKind::Gt(p) => audit_testing_privacy(&p.design, &p.noise, p.d, &m.t, opts)?,
    };
    let accuracy = match s.beta {
        Some(beta) => Some(audit_accuracy(s.as_mechanism(), beta, opts)?),
        None => None,
    };
    Ok(ExactAudit { privacy, accuracy })
}

fn observable(s: &Subject) -> &'static str {
    match s.kind {
        SubjectKind::Mech(_) => "outputs",
        SubjectKind::Gt(_) => "syndromes",
    }
}

fn pair_string(p: &(dpsr_core::Subset, dpsr_core::Subset)) -> String {
    format!("{} vs {}", p.0, p.1)
}

pub fn audit(mut layer: Layer, a: &AuditArgs) -> CliResult<Rendered> {
    let plan = SubjectPlan::resolve(&mut layer, &a.subject)?;
    let (n, d, beta) = point(&mut layer, &a.point, plan.fixed_n())?;
    let seed: Option<u64> = layer.get("seed", a.seed)?;
    let mode = layer.or("mode", a.mode, ModeChoice::Exact)?;
    let samples = layer.or("samples", a.samples, DEFAULT_MC_SAMPLES)?;
    let m = multiplier(&mut layer, &a.privacy)?;
    let opts = audit_options(&mut layer, &a.caps, seed)?;
    layer.finish()?;
    if plan.needs_seed() {
        require_seed(seed, "the pooling design")?;
    }
    let subject = plan.build(n, d, beta, seed)?;

    match mode {
        ModeChoice::Exact => {
            let r = exact_audit(&subject, &m, &opts)?;
            let mut table = Table::new([
                "subject",
                "mode",
                "t",
                "t_rounding",
                "delta_star",
                "delta_star_decimal",
                "worst_pair",
                "pairs_scanned",
                "scan",
                "eps1",
                "eps1_decimal",
            ]);
            let (eps1, eps1_dec) = match &r.accuracy {
                Some(acc) => (
                    fraction_string(&acc.eps1_exact),
                    dec(to_f64(&acc.eps1_exact)),
                ),
                None => ("-".into(), "-".into()),
            };
            table.push(vec![
                subject.label(),
                "exact".into(),
                fraction_string(&m.t),
                format!("{:?}", m.rounding).to_lowercase(),
                fraction_string(&r.privacy.delta_star),
                dec(to_f64(&r.privacy.delta_star)),
                pair_string(&r.privacy.worst_pair),
                r.privacy.pairs_scanned.to_string(),
                format!("{:?}", r.privacy.scan).to_lowercase(),
                eps1,
                eps1_dec,
            ]);
            let json = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "audit",
                "mode": "exact",
                "subject": subject.describe(),
                "observable": observable(&subject),
                "multiplier": multiplier_json(&m),
                "privacy": r.privacy,
                "accuracy": r.accuracy,
            });
            Ok(Rendered {
                json,
                table,
                single: true,
            })
        }
        ModeChoice::Mc => {
            let seed = require_seed(seed, "--mode mc")?;
            let pair = canonical_pair(n, d)?;
            let mut rng = sim_rng(seed);
            let est = mc_estimate_delta(
                subject.as_mechanism(),
                (&pair.0, &pair.1),
                &m.t,
                samples,
                &mut rng,
            )?;
            let obs = if matches!(subject.kind, SubjectKind::Gt(_)) {
                "decoded outputs"
            } else {
                "outputs"
            };
            let mut table = Table::new([
                "subject", "mode", "t", "pair", "estimate", "samples", "seed",
            ]);
            table.push(vec![
                subject.label(),
                "mc".into(),
                fraction_string(&m.t),
                pair_string(&pair),
                dec(est.estimate),
                est.samples.to_string(),
                seed.to_string(),
            ]);
            let json = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "audit",
                "mode": "mc",
                "subject": subject.describe(),
                "observable": obs,
                "multiplier": multiplier_json(&m),
                "pair": [pair.0, pair.1],
                "estimate": est.estimate,
                "samples": est.samples,
                "seed": seed,
                "note": est.note,
            });
            Ok(Rendered {
                json,
                table,
                single: true,
            })
        }
    }
}

pub fn sample(mut layer: Layer, a: &SampleArgs) -> CliResult<Rendered> {
    let plan = SubjectPlan::resolve(&mut layer, &a.subject)?;
    let (n, d, beta) = point(&mut layer, &a.point, plan.fixed_n())?;
    let seed = require_seed(layer.get("seed", a.seed)?, "sampling")?;
    let count = layer.or("count", a.count, 1)?;
    let input: Option<String> = layer.get("input", a.input.clone())?;
    layer.finish()?;
    let subject = plan.build(n, d, beta, Some(seed))?;
    let e = subject.input(input.as_deref())?;
    let m = subject.as_mechanism();

    let mut rng = sim_rng(seed);
    let mut table = Table::new(["draw", "output", "distance"]);
    let mut draws = Vec::new();
    for i in 0..count {
        let out = m.sample_output(&e, &mut rng)?;
        let dist = out.distance(&e)?;
        table.push(vec![i.to_string(), out.to_string(), dist.to_string()]);
        draws.push(json!({ "draw": i, "output": out, "distance": dist }));
    }
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sample",
        "subject": subject.describe(),
        "seed": seed,
        "input": e,
        "draws": draws,
    });
    Ok(Rendered {
        json,
        table,
        single: false,
    })
}

pub fn gt(mut layer: Layer, a: &GtArgs) -> CliResult<Rendered> {
    let plan = SubjectPlan::resolve(&mut layer, &a.subject)?;
    if !plan.is_gt() {
        return Err(usage(
            "gt simulates pooled tests; give --gt identity|bernoulli|file",
        ));
    }
    let (n, d, beta) = point(&mut layer, &a.point, plan.fixed_n())?;
    let seed = require_seed(layer.get("seed", a.seed)?, "simulation")?;
    let trials = layer.or("trials", a.trials, 1)?;
    let input: Option<String> = layer.get("input", a.input.clone())?;
    let out: Option<PathBuf> = layer.get("out", a.out.clone())?;
    layer.finish()?;
    let subject = plan.build(n, d, beta, Some(seed))?;
    let e = subject.input(input.as_deref())?;
    let SubjectKind::Gt(pipeline) = &subject.kind else {
        unreachable!("checked above")
    };

    let mut rng = sim_rng(seed);
    let mut table = Table::new(["trial", "syndrome", "decoded", "distance"]);
    let mut rows = Vec::new();
    for i in 0..trials {
        let rec = simulate(&pipeline.design, &e, &pipeline.noise, &mut rng)?;
        table.push(vec![
            i.to_string(),
            rec.syndrome.to_string(),
            rec.decoded.to_string(),
            rec.distance_to_e.to_string(),
        ]);
        rows.push(json!({
            "trial": i,
            "syndrome": rec.syndrome,
            "decoded": rec.decoded,
            "distance": rec.distance_to_e,
        }));
    }
    if let Some(path) = out {
        write_atomically(&path, |f| table.write_csv(f))?;
        let mut summary = Table::new(["out", "trials"]);
        summary.push(vec![path.display().to_string(), trials.to_string()]);
        let json = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "gt",
            "out": path,
            "trials": trials,
        });
        return Ok(Rendered {
            json,
            table: summary,
            single: true,
        });
    }
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "gt",
        "subject": subject.describe(),
        "seed": seed,
        "input": e,
        "trials": rows,
    });
    Ok(Rendered {
        json,
        table,
        single: false,
    })
}

/// `7`, `5,7,9`, `5..9` (inclusive) or a comma-separated mix.
pub fn parse_grid(flag: &str, text: &str) -> CliResult<Vec<usize>> {
    let bad = || usage(format!("--{flag}: cannot read grid {text:?}"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| bad())?;
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

const SWEEP_HEADER: [&str; 18] = [
    "n",
    "d",
    "beta",
    "subject",
    "thm1_lower",
    "thm1_lower_regime_ok",
    "thm1_upper",
    "thm2_lower",
    "thm2_lower_regime_ok",
    "thm2_upper",
    "thm2_upper_regime_ok",
    "delta_star",
    "delta_star_decimal",
    "eps1",
    "eps1_decimal",
    "scan",
    "pairs_scanned",
    "multiplier",
];

fn sweep_cell(
    plan: &SubjectPlan,
    (n, d, beta): (usize, usize, usize),
    eps1: f64,
    m: &Multiplier,
    opts: &AuditOptions,
    seed: u64,
) -> CliResult<Option<Vec<String>>> {
    // cells outside a mechanism's domain are skipped, not fatal
    let subject = match plan.build(n, d, Some(beta), Some(seed)) {
        Ok(s) => s,
        Err(CliError::Usage(_) | CliError::Core(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let Ok(bounds) = all_bounds(n, d, beta, eps1, m.eps2.unwrap_or(0.0)) else {
        return Ok(None);
    };
    let r = exact_audit(&subject, m, opts)?;
    let acc = r.accuracy.expect("sweep cells always carry beta");
    Ok(Some(vec![
        n.to_string(),
        d.to_string(),
        beta.to_string(),
        subject.label(),
        dec(bounds.thm1_lower.value),
        bounds.thm1_lower.regime_ok.to_string(),
        bounds.thm1_upper.map(|b| dec(b.value)).unwrap_or_default(),
        dec(bounds.thm2_lower.value),
        bounds.thm2_lower.regime_ok.to_string(),
        dec(bounds.thm2_upper.value),
        bounds.thm2_upper.regime_ok.to_string(),
        fraction_string(&r.privacy.delta_star),
        dec(to_f64(&r.privacy.delta_star)),
        fraction_string(&acc.eps1_exact),
        dec(to_f64(&acc.eps1_exact)),
        format!("{:?}", r.privacy.scan).to_lowercase(),
        r.privacy.pairs_scanned.to_string(),
        fraction_string(&m.t),
    ]))
}

pub fn sweep(mut layer: Layer, a: &SweepArgs) -> CliResult<Rendered> {
    let plan = SubjectPlan::resolve(&mut layer, &a.subject)?;
    let grid = |layer: &mut Layer, key: &str, flag: &Option<String>| -> CliResult<Vec<usize>> {
        let text: String = layer.require(key, flag.clone())?;
        parse_grid(key, &text)
    };
    let GridArgs { n, d, beta } = &a.grid;
    let ns = grid(&mut layer, "n", n)?;
    let ds = grid(&mut layer, "d", d)?;
    let betas = grid(&mut layer, "beta", beta)?;
    let seed = require_seed(layer.get("seed", a.seed)?, "the sweep's audit verification")?;
    let out: PathBuf = layer.require("out", a.out.clone())?;
    let eps1 = layer.or("eps1", a.eps1, 0.0)?;
    let m = multiplier(&mut layer, &a.privacy)?;
    let opts = audit_options(&mut layer, &a.caps, Some(seed))?;

    layer.finish()?;

    let mut cells = Vec::new();
    for &n in &ns {
        for &d in &ds {
            cells.extend(betas.iter().map(|&b| (n, d, b)));
        }
    }
    if cells.is_empty() {
        return Err(usage("the grid is empty"));
    }
    let results: Vec<CliResult<Option<Vec<String>>>> = cells
        .par_iter()
        .map(|&cell| sweep_cell(&plan, cell, eps1, &m, &opts, seed))
        .collect();
    let mut table = Table::new(SWEEP_HEADER);
    let mut skipped = 0usize;
    for r in results {
        match r? {
            Some(row) => table.push(row),
            None => skipped += 1,
        }
    }
    if table.rows.is_empty() {
        return Err(usage(format!(
            "none of the {} grid cells is a valid parameter point",
            cells.len()
        )));
    }
    write_atomically(&out, |f| table.write_csv(f))?;

    let mut summary = Table::new(["out", "rows", "skipped"]);
    summary.push(vec![
        out.display().to_string(),
        table.rows.len().to_string(),
        skipped.to_string(),
    ]);
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "out": out,
        "rows": table.rows.len(),
        "skipped": skipped,
    });
    Ok(Rendered {
        json,
        table: summary,
        single: true,
    })
}
