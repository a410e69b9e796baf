//! End-to-end acceptance checks. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed; exits nonzero on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mdlac::imaging::seeded_rng;
use mdlac::lsd::LsdConfig;
use mdlac::numeric::{
    binomial_tail_log, g_split_extrema, g_split_lower_bound, g_split_upper_bound,
    hoeffding_tail_bound, log_binomial, stirling_log_binomial,
};
use mdlac::polygon::PolygonHypothesis;
use mdlac::score::Criterion;
use mdlac_cli::commands::relative_gap;
use mdlac_cli::config::{Axis, EquivConfig, ExperimentConfig, ShapeConfig, ShapeKind};
use mdlac_cli::{equiv_run, lsd_run, polygon_run, sweep_multi, sweep_single};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

const MINUTE: Duration = Duration::from_secs(60);
const MINUTES: Duration = Duration::from_secs(600);

type Check = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn equivalence() -> Outcome {
    let reports = match equiv_run::run_equivalence(&EquivConfig::default(), 0) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let alphabets: Vec<u32> = reports.iter().map(|r| r.alphabet).collect();
    let configs: u64 = reports.iter().map(|r| r.total_configurations()).sum();
    let boundary: u64 = reports.iter().map(|r| r.boundary_cases()).sum();
    let mismatches = equiv_run::total_mismatches(&reports);
    let covered = alphabets.contains(&2) && alphabets.contains(&3);
    outcome(
        mismatches == 0 && covered,
        format!("{} families, {configs} configurations, {boundary} boundary cases, {mismatches} mismatches", reports.len()),
    )
}

fn hoeffding() -> Outcome {
    let mut rng = seeded_rng(2, 0);
    let (mut checked, mut violations) = (0, 0);
    while checked < 10_000 {
        let n: u64 = rng.gen_range(1..=1000);
        let k: u64 = rng.gen_range(0..=n);
        let q: f64 = rng.gen_range(0.0..1.0);
        if q <= 0.0 || k as f64 / n as f64 <= q {
            continue;
        }
        checked += 1;
        let tail = binomial_tail_log(n, k, q).unwrap();
        let bound = hoeffding_tail_bound(n, k, q).unwrap();
        if tail > bound + 1e-9 * bound.abs().max(1.0) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{checked} triples, {violations} violations"),
    )
}

fn exact_binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn exact_tail(n: u64, k: u64, tenths: i64) -> f64 {
    let q = BigRational::new(tenths.into(), 10.into());
    let p = BigRational::one() - &q;
    let mut total = BigRational::zero();
    for i in k..=n {
        let mut term = BigRational::from_integer(exact_binomial(n, i));
        for _ in 0..i {
            term *= &q;
        }
        for _ in 0..n - i {
            term *= &p;
        }
        total += term;
    }
    total.to_f64().unwrap()
}

fn tail_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 0..=25u64 {
        for k in 0..=n {
            for t in 1..=9i64 {
                let exact = exact_tail(n, k, t);
                let got = binomial_tail_log(n, k, t as f64 / 10.0).unwrap().exp2();
                worst = worst.max((got - exact).abs() / exact);
                cases += 1;
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("{cases} cases, max relative error {worst:.2e}"),
    )
}

fn stirling() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0u64;
    for i in 0..=40 {
        let n = (100.0 * 100f64.powf(i as f64 / 40.0)).round() as u64;
        for k in 10..=n - 10 {
            let err = (stirling_log_binomial(n, k).unwrap() - log_binomial(n, k).unwrap()).abs();
            worst = worst.max(err);
            cases += 1;
        }
    }
    outcome(
        worst < 0.2,
        format!("{cases} (n, k) pairs, max error {worst:.4} bits"),
    )
}

fn split_bounds() -> Outcome {
    let (mut upper_ok, mut lower_ok, mut half_log_fails) = (true, true, 0);
    let (mut upper_slack, mut lower_slack) = (f64::INFINITY, f64::INFINITY);
    for n in 8..=200u64 {
        let (lo, hi) = g_split_extrema(n).unwrap();
        let up = g_split_upper_bound(n);
        let low = g_split_lower_bound(n);
        upper_ok &= hi <= up + 1e-9;
        lower_ok &= lo >= low - 1e-9;
        upper_slack = upper_slack.min(up - hi);
        lower_slack = lower_slack.min(lo - low);
        if lo < 0.5 * (n as f64).log2() {
            half_log_fails += 1;
        }
    }
    outcome(
        upper_ok && lower_ok,
        format!(
            "upper bound holds (tightest gap {upper_slack:.1e}); lower bound (3 + log2((n-2)/n))/2 holds (tightest gap {lower_slack:.1e}); (1/2)log2 n fails for {half_log_fails}/193 n"
        ),
    )
}

fn single_square() -> Outcome {
    let sweep = match sweep_single::run_sweep_single(&ExperimentConfig::default()) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let s = sweep_single::SingleSummary::from_cells(&sweep.cells);
    let a = s.small_agreement >= 0.9;
    let b = s.small_nfa_ge_mdl >= 0.95;
    let c = s.large_cells > 0 && s.large_max_nfa_rate < 0.1 && s.large_min_mdl_rate > 0.9;
    outcome(
        a && b && c,
        format!(
            "(a) agreement {:.3} over {} cells; (b) nfa>=mdl in {:.3}; (c) {} cells, max nfa rate {:.2}, min mdl rate {:.2}",
            s.small_agreement, s.small_cells, s.small_nfa_ge_mdl, s.large_cells, s.large_max_nfa_rate, s.large_min_mdl_rate
        ),
    )
}

fn within(v: Option<f64>, lo: f64, hi: f64) -> bool {
    v.is_some_and(|v| v >= lo - 1e-9 && v <= hi + 1e-9)
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| format!("{v}"))
}

fn multi_square() -> Outcome {
    let cfg = ExperimentConfig::default();
    let noise = sweep_multi::run_sweep_multi(&cfg, Axis::Noise);
    let margin = sweep_multi::run_sweep_multi(&cfg, Axis::Margin);
    let (noise, margin) = match (noise, margin) {
        (Ok(n), Ok(m)) => (n, m),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let t = noise.thresholds[0];
    let noise_ok = within(t.nfa, 0.36, 0.44)
        && matches!((t.mdl, t.nfa), (Some(m), Some(n)) if m <= n + 1e-9 && n - m <= 0.05 + 1e-9);
    let row = |d: f64| {
        margin
            .thresholds
            .iter()
            .find(|t| t.delta == Some(d))
            .copied()
    };
    let (low, high) = match (row(0.2), row(0.4)) {
        (Some(l), Some(h)) => (l, h),
        _ => return outcome(false, "margin grid lacks delta 0.2 or 0.4".into()),
    };
    let low_ok = within(low.nfa, 14.0, 18.0) && within(low.mdl, 14.0, 18.0);
    let high_ok = within(high.nfa, 6.0, 10.0)
        && within(high.mdl, 4.0, 8.0)
        && matches!((high.nfa, high.mdl), (Some(n), Some(m)) if n >= m);
    outcome(
        noise_ok && low_ok && high_ok,
        format!(
            "{} seeds; noise thresholds nfa {} mdl {}; margin at 0.2: nfa {} mdl {}; margin at 0.4: nfa {} mdl {}",
            cfg.multi.seeds,
            fmt(t.nfa),
            fmt(t.mdl),
            fmt(low.nfa),
            fmt(low.mdl),
            fmt(high.nfa),
            fmt(high.mdl)
        ),
    )
}

fn polygon() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [ShapeKind::Star, ShapeKind::Cross, ShapeKind::Arrow] {
        let start = Instant::now();
        let shape = ShapeConfig {
            kind,
            ..ShapeConfig::default()
        };
        let inst = match polygon_run::synthesize_shape(&shape, 0) {
            Ok(i) => i,
            Err(e) => return outcome(false, e.to_string()),
        };
        let initial: &PolygonHypothesis = &inst.initial;
        let runs =
            match polygon_run::simplify(&inst.image, initial, &[Criterion::Mdl, Criterion::Nfa]) {
                Ok(r) => r,
                Err(e) => return outcome(false, e.to_string()),
            };
        let interior = runs.iter().all(|r| r.minimum_is_interior());
        let (m, n) = (runs[0].minimum_vertices(), runs[1].minimum_vertices());
        let gap = relative_gap(m, n);
        let elapsed = start.elapsed();
        pass &= interior && gap <= 0.25 && elapsed < MINUTE;
        parts.push(format!(
            "{kind:?}: {} -> mdl {m} / nfa {n} (gap {:.0}%, interior {interior}, {:.2}s)",
            initial.vertex_count(),
            100.0 * gap,
            elapsed.as_secs_f64()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn lsd_table() -> Outcome {
    let cfg = LsdConfig::default();
    let table = match lsd_run::boundary_table(512 * 512, 60, &cfg) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let bounds = lsd_run::boundaries(&table);
    let mut nested = true;
    let mut monotone = true;
    let mut prev = (0, 0);
    let mut detected_rows = 0;
    for b in bounds.iter().filter(|b| (4..=60).contains(&b.n_r)) {
        match (b.nfa_min_k, b.mdl_min_k) {
            (Some(a), Some(m)) => {
                nested &= a <= m;
                monotone &= a >= prev.0 && m >= prev.1;
                prev = (a, m);
                detected_rows += 1;
            }
            (None, Some(_)) => nested = false,
            _ => {}
        }
    }
    // every larger k is detected once the boundary is reached
    let closed = table.iter().all(|r| {
        let b = bounds[(r.n_r - 1) as usize];
        r.nfa_detect == b.nfa_min_k.is_some_and(|k| r.k_r >= k)
            && r.mdl_detect == b.mdl_min_k.is_some_and(|k| r.k_r >= k)
    });
    let c = table.iter().find(|r| (r.n_r, r.k_r) == (40, 30)).copied();
    let both = c.is_some_and(|c| c.nfa_detect && c.mdl_detect);
    let b40 = bounds[39];
    outcome(
        nested && monotone && closed && both,
        format!(
            "theta {}; nested {nested}, monotone {monotone}, upward closed {closed}, {detected_rows} rows with both boundaries; n_r=40: nfa k>={} mdl k>={}; (40,30) both {both}",
            cfg.theta(),
            fmt(b40.nfa_min_k.map(|k| k as f64)),
            fmt(b40.mdl_min_k.map(|k| k as f64))
        ),
    )
}

fn false_alarms() -> Outcome {
    let counts = lsd_run::false_alarms(100, 256, 0, &LsdConfig::default());
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    outcome(
        mean <= 1.5,
        format!("{} maps, mean {mean:.3}, max {max}", counts.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 10] = [
        ("equivalence, exhaustive", MINUTE, equivalence),
        ("Hoeffding dominance", MINUTE, hoeffding),
        ("binomial tail oracle", MINUTE, tail_oracle),
        ("Stirling accuracy", MINUTE, stirling),
        ("split-term bounds", MINUTE, split_bounds),
        ("single-square sweep", MINUTES, single_square),
        ("multi-square thresholds", MINUTES, multi_square),
        ("polygon simplification", MINUTES, polygon),
        ("segment boundary table", MINUTE, lsd_table),
        ("false alarms on random maps", MINUTES, false_alarms),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed < *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
