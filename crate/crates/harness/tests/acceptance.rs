//! Acceptance suite: runs each criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use laminar_core::models::random_ultrametric;
use laminar_core::setsystem::binomial;
use laminar_core::{equality_witness, type_space, TypeSpaceOptions};
use laminar_harness::demo::run_demo;
use laminar_harness::growth::{run_growth, ExperimentConfig, GrowthReport};
use laminar_harness::lemmas::{self, LemmaResult, EXHAUSTIVE_MAX_B, EXHAUSTIVE_MAX_CARRIER};

const SEED: u64 = 0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn lemma_outcome(r: &LemmaResult, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    let in_time = limit.is_none_or(|l| elapsed < l);
    let mut detail = format!(
        "{} trials, {} failures, {:.1}s",
        r.trials,
        r.failures,
        elapsed.as_secs_f64()
    );
    if let Some(l) = limit {
        detail.push_str(&format!(" (limit {}s)", l.as_secs()));
    }
    if let Some(f) = &r.first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Outcome {
        pass: r.passed() && in_time,
        detail,
    }
}

fn timed_lemma(f: impl FnOnce() -> LemmaResult, limit: Option<u64>) -> Outcome {
    let start = Instant::now();
    let r = f();
    lemma_outcome(&r, start.elapsed(), limit.map(Duration::from_secs))
}

fn growth(
    formula: &str,
    arity: usize,
    sizes: Vec<usize>,
    tol: f64,
) -> Result<(GrowthReport, Duration), String> {
    let mut config = ExperimentConfig::new(formula, arity, sizes);
    config.seed = SEED;
    config.tol = tol;
    config.timing = false;
    let start = Instant::now();
    let report = run_growth(&config).map_err(|e| e.to_string())?;
    Ok((report, start.elapsed()))
}

fn medians(report: &GrowthReport) -> String {
    report
        .formulas
        .iter()
        .map(|f| match f.median_exponent {
            Some(e) => format!("{} {e:.3}", f.formula),
            None => format!("{} n/a", f.formula),
        })
        .join(", ")
}

fn c1() -> Outcome {
    timed_lemma(|| lemmas::linear_type_bound(SEED, 500), Some(30))
}

fn c2() -> Outcome {
    timed_lemma(|| lemmas::convexity(SEED, 1000), Some(30))
}

fn c3() -> Outcome {
    timed_lemma(|| lemmas::sum_dist(SEED, 1000), None)
}

fn c4() -> Outcome {
    timed_lemma(|| lemmas::sauer_shelah(SEED, 1000), None)
}

fn c5() -> Outcome {
    timed_lemma(|| lemmas::components_canonicity(SEED, 500), None)
}

fn c6() -> Outcome {
    timed_lemma(
        || lemmas::determination_exhaustive(EXHAUSTIVE_MAX_CARRIER, EXHAUSTIVE_MAX_B),
        Some(60),
    )
}

fn c7() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for b in lemmas::INCREMENTAL_B_SIZES {
        match run_demo(b, SEED) {
            Ok(r) => {
                pass &= r.ok;
                parts.push(format!(
                    "|B|={b}: {} steps, sum dist {}/{}, union {}/{}, {}",
                    r.steps.len(),
                    r.sum_dist,
                    r.sum_dist_bound,
                    r.virtual_union,
                    r.aggregate_bound,
                    if r.ok { "ok" } else { "FAIL" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("|B|={b}: {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c8() -> Outcome {
    match growth("ball", 1, vec![8, 16, 32, 64], 0.10) {
        Ok((r, _)) => Outcome {
            pass: r.pass
                && r.formulas
                    .iter()
                    .all(|f| f.median_exponent.is_some_and(|e| e <= 1.10)),
            detail: format!("median {} (ceiling 1.10)", medians(&r)),
        },
        Err(e) => Outcome {
            pass: false,
            detail: e,
        },
    }
}

fn c9() -> Outcome {
    let sizes = vec![8, 16, 32, 64, 128, 256];
    match growth("corpus", 2, sizes, 0.15) {
        Ok((r, elapsed)) => {
            let all_exhaustive = r.formulas.iter().all(|f| f.exhaustive);
            let in_range = r
                .formulas
                .iter()
                .all(|f| f.median_exponent.is_some_and(|e| e <= 2.15));
            Outcome {
                pass: r.pass && all_exhaustive && in_range && elapsed < Duration::from_secs(300),
                detail: format!(
                    "medians {} (ceiling 2.15), {:.1}s (limit 300s)",
                    medians(&r),
                    elapsed.as_secs_f64()
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e,
        },
    }
}

/// Distinct traces `{x1, x2} ∩ B` over all pairs of carrier points.
fn pair_traces(carrier: usize, b: &[usize]) -> usize {
    let mut seen = HashSet::new();
    for x1 in 0..carrier {
        for x2 in 0..carrier {
            let mut t: Vec<usize> = b.iter().copied().filter(|&y| y == x1 || y == x2).collect();
            t.sort_unstable();
            seen.insert(t);
        }
    }
    seen.len()
}

fn c10() -> Outcome {
    let carrier = 24;
    let model = random_ultrametric(carrier, 3, SEED).expect("feasible model");
    let f = equality_witness(2, carrier);
    let mut mismatches = Vec::new();
    for m in 2..=10 {
        let b: Vec<usize> = (0..m).map(|i| (i * 7) % carrier).collect();
        let params: Vec<Vec<usize>> = b.iter().map(|&y| vec![y]).collect();
        let count = type_space(
            std::slice::from_ref(&f),
            &params,
            &model,
            2,
            TypeSpaceOptions::default(),
        )
        .map(|t| t.count())
        .unwrap_or(0);
        let expected = 1 + m + binomial(m as u64, 2) as usize;
        let oracle = pair_traces(carrier, &b);
        if count != expected || oracle != expected {
            mismatches.push(format!(
                "m={m}: counted {count}, oracle {oracle}, formula {expected}"
            ));
        }
    }
    match growth("eq-witness", 2, vec![8, 16, 32, 64, 128, 256], 0.15) {
        Ok((r, _)) => {
            let e = r.formulas.first().and_then(|f| f.median_exponent);
            let pass = mismatches.is_empty() && e.is_some_and(|e| e >= 1.85);
            let exponent = e.map_or("n/a".to_string(), |e| format!("{e:.3}"));
            let mut detail =
                format!("counts 1+m+C(m,2) for m=2..10, median exponent {exponent} (floor 1.85)");
            if !mismatches.is_empty() {
                detail = format!("{}; {detail}", mismatches.join("; "));
            }
            Outcome { pass, detail }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e,
        },
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("linear type bound, 500 trials, under 30s", c1),
        (
            "convexity of the type-tree order, 1000 trials, under 30s",
            c2,
        ),
        ("sum of distances at most 2|F|, 1000 trials", c3),
        ("Sauer-Shelah bound, 1000 trials", c4),
        ("canonical components, 500 trials", c5),
        (
            "forest determination, exhaustive n<=20, |B|<=6, under 60s",
            c6,
        ),
        ("incremental count for |B| in {4, 8, 16}", c7),
        ("ball growth k=1, median exponent <= 1.10", c8),
        (
            "corpus growth k=2, median exponents <= 2.15, under 5 min",
            c9,
        ),
        ("equality-witness counts and exponent >= 1.85", c10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{}]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
