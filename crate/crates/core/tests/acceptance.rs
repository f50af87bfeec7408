//! Acceptance run: one pass/fail line per criterion.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{brute_range, brute_worlds, random_instance, support};
use logical_induction::deduction::DeductiveProcess;
use logical_induction::harness::check::{check_trace, CheckReport};
use logical_induction::harness::io::{read_certificates, write_certificates, write_trace, CertificateRow};
use logical_induction::harness::{evaluate_experiment, scenarios, ExperimentReport, Scenario};
use logical_induction::inductor::{member_worst_cases, MarketTrace};
use logical_induction::logic::{parse_sentence, plausible_worlds, TheoryFragment};
use logical_induction::pricing::Pricing;
use logical_induction::rational::{format_rational, half, int, ratio};
use logical_induction::trading::{evaluate_exploitation, parse_strategy, plausible_value_range, Holdings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn from_report(r: &ExperimentReport) -> Outcome {
    let failed: Vec<String> = r
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.label, c.detail))
        .collect();
    if failed.is_empty() {
        outcome(
            true,
            format!("{} checks on days {}..={}", r.checks.len(), r.window.0, r.window.1),
        )
    } else {
        outcome(false, failed.join("; "))
    }
}

fn files(s: &Scenario, t: &MarketTrace) -> (Vec<u8>, Vec<u8>) {
    let (mut trace, mut certs) = (Vec::new(), Vec::new());
    write_trace(&mut trace, &t.pricings).unwrap();
    write_certificates(&mut certs, &t.certificates, &s.member_names()).unwrap();
    (trace, certs)
}

fn soundness(s: &Scenario, t: &MarketTrace, elapsed: Duration) -> Outcome {
    let (_, certs) = files(s, t);
    let rows: Vec<CertificateRow> = read_certificates(&certs[..]).unwrap();
    let report: CheckReport = match check_trace(&t.pricings, Some(s), Some(&rows), Some(&s.config.resolution)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let worst = rows.iter().map(|r| &r.max_value - &r.epsilon).max().unwrap();
    let in_time = elapsed <= Duration::from_secs(600);
    outcome(
        report.passed() && report.replayed == 200 && in_time,
        format!(
            "{} days replayed by enumeration, {} issues, max(value - epsilon) = {}, run {:.1}s",
            report.replayed,
            report.issues.len(),
            format_rational(&worst),
            elapsed.as_secs_f64()
        ),
    )
}

fn budget_safety(s: &Scenario, t: &MarketTrace) -> Outcome {
    let mut tightest: Option<(u64, usize, logical_induction::rational::Rational)> = None;
    for n in 1..=t.horizon() {
        let f = s.fragment(&t.pricings, n).unwrap();
        for (i, wc) in member_worst_cases(t, n, &f).unwrap().into_iter().enumerate() {
            let slack = wc + &s.config.pool.members[i].budget;
            if tightest.as_ref().is_none_or(|(_, _, v)| &slack < v) {
                tightest = Some((n, i, slack));
            }
        }
    }
    let (n, i, slack) = tightest.unwrap();
    outcome(
        slack >= int(0),
        format!(
            "tightest: {} on day {n}, budget slack {}",
            s.member_names()[i],
            format_rational(&slack)
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng, 12);
        let atoms: Vec<_> = support(&inst).into_iter().collect();
        let mut got = plausible_worlds(&inst.fragment, &support(&inst)).unwrap();
        let mut want = brute_worlds(&inst.fragment, &atoms);
        got.sort();
        want.sort();
        let mut h = Holdings::new();
        h.cash = inst.cash.clone();
        for (s, q) in &inst.terms {
            *h.shares.entry(s.clone()).or_default() += q;
        }
        let range_ok = match (
            plausible_value_range(&h, &inst.fragment),
            brute_range(&inst.fragment, &atoms, &inst.cash, &inst.terms),
        ) {
            (Ok(a), Some(b)) => a == b,
            (Err(_), None) => true,
            _ => false,
        };
        if got != want || !range_ok {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("1000 instances, {mismatches} mismatches"))
}

fn exploitation_ground_truth() -> Outcome {
    let phi = parse_sentence("phi").unwrap();
    let market: Vec<Pricing> = vec![[(phi.clone(), half())].into_iter().collect(); 20];
    let d = DeductiveProcess::scripted(BTreeMap::from([(10, TheoryFragment::from_iter([phi]))]));
    let trader = parse_strategy("trader buyer\nphi : 1").unwrap();
    let r = evaluate_exploitation(&trader, &market, &d, &[], 20).unwrap();
    let min = r.running_min().map(|(_, v)| v);
    let max = r.days.iter().find(|d| d.day == 20).map(|d| d.max.clone());
    outcome(
        min == Some(ratio(-9, 2)) && max == Some(int(10)),
        format!(
            "running min {}, day-20 max {}",
            min.map_or("none".into(), |v| format_rational(&v)),
            max.map_or("none".into(), |v| format_rational(&v))
        ),
    )
}

fn determinism(scenarios: &[(Scenario, MarketTrace)]) -> Outcome {
    let mut differing = Vec::new();
    for (s, first) in scenarios {
        let second = s.run().unwrap();
        if files(s, first) != files(s, &second) {
            differing.push(s.name.clone());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} scenarios rerun; differing: {:?}", scenarios.len(), differing),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let standard = scenarios::standard().unwrap();
    let start = Instant::now();
    let trace = standard.run().unwrap();
    let elapsed = start.elapsed();

    results.push((1, "certificate soundness", soundness(&standard, &trace, elapsed)));
    results.push((2, "budget safety", budget_safety(&standard, &trace)));
    let exp = |name: &str| from_report(&evaluate_experiment(name, &standard, &trace).unwrap());
    results.push((3, "provability induction", exp("provability")));
    results.push((4, "convergence", exp("convergence")));
    results.push((5, "coherence probes", exp("coherence")));

    let mut runs = Vec::new();
    let mut paradox = Vec::new();
    for p in [half(), ratio(1, 4)] {
        let s = scenarios::paradox(&p, false).unwrap();
        let t = s.run().unwrap();
        let r = evaluate_experiment("paradox", &s, &t).unwrap();
        paradox.push((format_rational(&p), from_report(&r)));
        runs.push((s, t));
    }
    results.push((
        6,
        "paradox resistance",
        outcome(
            paradox.iter().all(|(_, o)| o.passed),
            paradox
                .iter()
                .map(|(p, o)| format!("p={p}: {}", o.detail))
                .collect::<Vec<_>>()
                .join("; "),
        ),
    ));
    results.push((7, "non-dogmatism", exp("non_dogmatism")));
    results.push((8, "oracle equivalence", oracle_equivalence()));
    results.push((9, "exploitation ground truth", exploitation_ground_truth()));

    let net = scenarios::net_update(8, "n+10").unwrap();
    let net_trace = net.run().unwrap();
    let net_outcome = from_report(&evaluate_experiment("net_update", &net, &net_trace).unwrap());
    let halting = scenarios::halting().unwrap();
    let halting_trace = halting.run().unwrap();
    runs.push((net, net_trace));
    runs.push((halting, halting_trace));
    runs.push((standard, trace));
    results.push((10, "determinism", determinism(&runs)));
    results.push((11, "no expected net update", net_outcome));

    let mut failures = 0;
    for (n, name, o) in &results {
        println!(
            "criterion {n:>2} [PRIMARY] {name}: {} ({})",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failures += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failures} failed", results.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
