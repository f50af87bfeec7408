//! Experiments over a market trace. Each report keeps the series it judged
//! and the thresholds it used, so the verdict can be recomputed offline.

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Deserialize;

use super::expectation::{expectation, DeferralFunction, Variable};
use super::scenario::{family_instances, names_to_sentences, parse_rat, Scenario};
use super::HarnessError;
use crate::inductor::builtins::{bin_atom, bin_value};
use crate::inductor::MarketTrace;
use crate::logic::{Connective, Node, Sentence};
use crate::pricing::Pricing;
use crate::rational::{abs, format_rational, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `values[n-1]` is the day-`n` value; `None` where undefined.
    pub values: Vec<Option<Rational>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub target: String,
    pub window: (u64, u64),
    pub tolerance: Rational,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    /// Run without the trader the property depends on.
    pub control: bool,
    pub runtime: Duration,
}

impl ExperimentReport {
    fn new(name: &str, target: String, window: (u64, u64), tolerance: Rational) -> Self {
        ExperimentReport {
            name: name.to_string(),
            target,
            window,
            tolerance,
            series: Vec::new(),
            checks: Vec::new(),
            control: false,
            runtime: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn dec(r: &Rational) -> String {
    format!("{:.6}", to_f64(r))
}

/// Plain-text report: header, checks, then the series as CSV.
pub fn format_report(r: &ExperimentReport) -> String {
    let mut out = format!("# experiment: {}\n", r.name);
    if r.control {
        out.push_str("# control: true\n");
    }
    out.push_str(&format!("# target: {}\n", r.target));
    out.push_str(&format!("# window: {}..={}\n", r.window.0, r.window.1));
    out.push_str(&format!("# tolerance: {}\n", format_rational(&r.tolerance)));
    out.push_str(&format!("# runtime_ms: {}\n", r.runtime.as_millis()));
    for c in &r.checks {
        out.push_str(&format!(
            "# check {}: {} ({})\n",
            c.label,
            if c.passed { "pass" } else { "FAIL" },
            c.detail
        ));
    }
    out.push_str(&format!("# verdict: {}\n", if r.passed() { "pass" } else { "fail" }));
    out.push_str("day");
    for s in &r.series {
        out.push_str(&format!(",\"{}\"", s.label.replace('"', "\"\"")));
    }
    out.push('\n');
    let days = r.series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    for d in 0..days {
        out.push_str(&(d + 1).to_string());
        for s in &r.series {
            out.push(',');
            if let Some(Some(v)) = s.values.get(d) {
                out.push_str(&format_rational(v));
            }
        }
        out.push('\n');
    }
    out
}

fn window_or(w: Option<[u64; 2]>, horizon: u64, start_fraction: (u64, u64)) -> Result<(u64, u64), HarnessError> {
    let (lo, hi) = match w {
        Some([a, b]) => (a, b),
        None => ((horizon * start_fraction.0).div_ceil(start_fraction.1).max(1), horizon),
    };
    if lo == 0 || lo > hi || hi > horizon {
        return Err(HarnessError::Config(format!(
            "window {lo}..={hi} does not fit horizon {horizon}"
        )));
    }
    Ok((lo, hi))
}

fn fixed_series(trace: &MarketTrace, s: &Sentence) -> Series {
    Series {
        label: s.render().to_string(),
        values: trace.pricings.iter().map(|p| Some(p.get(s))).collect(),
    }
}

fn family_series(trace: &MarketTrace, family: &str) -> Result<(Series, Vec<Option<Sentence>>), HarnessError> {
    let inst = family_instances(family, trace.horizon())?;
    let values = trace
        .pricings
        .iter()
        .zip(&inst)
        .map(|(p, s)| s.as_ref().map(|s| p.get(s)))
        .collect();
    Ok((
        Series {
            label: family.to_string(),
            values,
        },
        inst,
    ))
}

fn in_window<'a>(s: &'a Series, w: (u64, u64)) -> impl Iterator<Item = (u64, &'a Rational)> + 'a {
    (w.0..=w.1).filter_map(move |n| s.values.get(n as usize - 1).and_then(|v| v.as_ref()).map(|v| (n, v)))
}

/// Checks every windowed value against `ok`; reports the worst offender.
fn window_check(
    report: &mut ExperimentReport,
    label: &str,
    s: &Series,
    ok: impl Fn(&Rational) -> bool,
    describe: &str,
) {
    let w = report.window;
    let bad: Vec<(u64, &Rational)> = in_window(s, w).filter(|(_, v)| !ok(v)).collect();
    let count = in_window(s, w).count();
    let detail = match bad.first() {
        None if count == 0 => "no values in window".to_string(),
        None => format!("{count} days, all {describe}"),
        Some((n, v)) => format!("{} of {count} days violate; first day {n} at {}", bad.len(), dec(v)),
    };
    report.check(label, bad.is_empty() && count > 0, detail);
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceParams {
    pub window: Option<[u64; 2]>,
    pub tolerance: Option<String>,
    pub sentences: Option<Vec<String>>,
}

/// Per probe: `max |P_n(φ) - P_N(φ)|` over the window.
pub fn convergence_report(
    trace: &MarketTrace,
    probes: &[Sentence],
    window: (u64, u64),
    tolerance: &Rational,
) -> ExperimentReport {
    let n_final = trace.horizon();
    let mut report = ExperimentReport::new(
        "convergence",
        format!("max deviation from day {n_final} over the window <= {}", dec(tolerance)),
        window,
        tolerance.clone(),
    );
    for s in probes {
        let series = fixed_series(trace, s);
        let last = trace.price(n_final, s);
        let dev = in_window(&series, window)
            .map(|(_, v)| abs(&(v - &last)))
            .max()
            .unwrap_or_default();
        report.check(
            s.render(),
            &dev <= tolerance,
            format!("deviation {} ({})", dec(&dev), format_rational(&dev)),
        );
        report.series.push(series);
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub label: String,
    pub value: Rational,
}

/// Coherence residuals: `|P(φ)+P(¬φ)-1|` per pair,
/// `|P(φ)+P(ψ)-P(φ∨ψ)-P(φ∧ψ)|` per triple, and `max(0, P(φ)-P(ψ))` per
/// implication `φ ⇒ ψ`.
pub fn coherence_probe(
    p: &Pricing,
    pairs: &[(Sentence, Sentence)],
    triples: &[(Sentence, Sentence)],
    implications: &[(Sentence, Sentence)],
) -> Vec<Residual> {
    let one = Rational::from_integer(1.into());
    let mut out = Vec::new();
    for (a, b) in pairs {
        out.push(Residual {
            label: format!("{a} + {b}"),
            value: abs(&(p.get(a) + p.get(b) - &one)),
        });
    }
    for (a, b) in triples {
        let or = Sentence::or(a.clone(), b.clone());
        let and = Sentence::and(a.clone(), b.clone());
        out.push(Residual {
            label: format!("{a} + {b} - {or} - {and}"),
            value: abs(&(p.get(a) + p.get(b) - p.get(&or) - p.get(&and))),
        });
    }
    for (a, b) in implications {
        let gap = p.get(a) - p.get(b);
        out.push(Residual {
            label: format!("{a} => {b}"),
            value: if gap.is_positive() { gap } else { Rational::zero() },
        });
    }
    out
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceParams {
    pub tolerance: Option<String>,
    /// Also hold triples and deduced implications to the tolerance.
    pub strict: Option<bool>,
}

fn coherence_from(
    scenario: &Scenario,
    trace: &MarketTrace,
    params: &CoherenceParams,
) -> Result<ExperimentReport, HarnessError> {
    let tol = params
        .tolerance
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("tolerance", t))?;
    let n = trace.horizon();
    let last = trace.pricings.last().cloned().unwrap_or_default();
    let f = scenario.fragment(&trace.pricings, n)?;
    let implications: Vec<(Sentence, Sentence)> = f
        .iter()
        .filter_map(|s| match s.node() {
            Node::Binary(Connective::Implies, a, b) => Some((a.clone(), b.clone())),
            _ => None,
        })
        .collect();
    let residuals = coherence_probe(&last, &scenario.probes.pairs, &scenario.probes.triples, &implications);
    let strict = params.strict.unwrap_or(false);
    let mut report = ExperimentReport::new(
        "coherence",
        format!("day-{n} complement residuals <= {}", dec(&tol)),
        (n, n),
        tol.clone(),
    );
    let pair_count = scenario.probes.pairs.len();
    for (i, r) in residuals.iter().enumerate() {
        let judged = i < pair_count || strict;
        let passed = !judged || r.value <= tol;
        let note = if judged { "" } else { ", informational" };
        report.check(r.label.clone(), passed, format!("residual {}{note}", dec(&r.value)));
    }
    for (a, b) in &scenario.probes.pairs {
        report.series.push(fixed_series(trace, a));
        report.series.push(fixed_series(trace, b));
    }
    Ok(report)
}

fn ratio_tenth() -> Rational {
    crate::rational::ratio(1, 10)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvabilityParams {
    pub family: Option<String>,
    pub refuted: Option<String>,
    pub window: Option<[u64; 2]>,
    pub min: Option<String>,
    pub max: Option<String>,
}

fn provability_from(trace: &MarketTrace, params: &ProvabilityParams) -> Result<ExperimentReport, HarnessError> {
    let family = params.family.clone().unwrap_or_else(|| "t_{n}".into());
    let window = window_or(params.window, trace.horizon(), (3, 4))?;
    let min = params
        .min
        .as_deref()
        .map_or(Ok(crate::rational::ratio(9, 10)), |t| parse_rat("min", t))?;
    let max = params
        .max
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("max", t))?;
    let mut report = ExperimentReport::new(
        "provability",
        format!("P_n({family}) >= {} on the window", dec(&min)),
        window,
        min.clone(),
    );
    let (s, _) = family_series(trace, &family)?;
    window_check(&mut report, &family, &s, |v| v >= &min, &format!(">= {}", dec(&min)));
    report.series.push(s);
    if let Some(refuted) = &params.refuted {
        let (s, _) = family_series(trace, refuted)?;
        window_check(&mut report, refuted, &s, |v| v <= &max, &format!("<= {}", dec(&max)));
        report.series.push(s);
        report.target.push_str(&format!("; P_n({refuted}) <= {}", dec(&max)));
    }
    Ok(report)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonDogmatismParams {
    pub sentences: Option<Vec<String>>,
    pub window: Option<[u64; 2]>,
    pub band: Option<[String; 2]>,
}

fn non_dogmatism_from(trace: &MarketTrace, params: &NonDogmatismParams) -> Result<ExperimentReport, HarnessError> {
    let names = params
        .sentences
        .clone()
        .ok_or_else(|| HarnessError::Config("non_dogmatism needs `sentences`".into()))?;
    let window = window_or(params.window, trace.horizon(), (1, 2))?;
    let (lo, hi) = match &params.band {
        Some([a, b]) => (parse_rat("band", a)?, parse_rat("band", b)?),
        None => (crate::rational::ratio(1, 20), crate::rational::ratio(19, 20)),
    };
    let mut report = ExperimentReport::new(
        "non_dogmatism",
        format!("undecided prices stay in [{}, {}]", dec(&lo), dec(&hi)),
        window,
        lo.clone(),
    );
    for s in names_to_sentences(&names)? {
        let series = fixed_series(trace, &s);
        window_check(
            &mut report,
            s.render(),
            &series,
            |v| v >= &lo && v <= &hi,
            "inside the band",
        );
        report.series.push(series);
    }
    Ok(report)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParadoxParams {
    pub family: Option<String>,
    pub p: Option<String>,
    pub window: Option<[u64; 2]>,
    pub tolerance: Option<String>,
    pub control: Option<bool>,
}

fn paradox_from(
    scenario: &Scenario,
    trace: &MarketTrace,
    params: &ParadoxParams,
) -> Result<ExperimentReport, HarnessError> {
    let family = params.family.clone().unwrap_or_else(|| "chi_{n}".into());
    let p = match &params.p {
        Some(t) => parse_rat("p", t)?,
        None => scenario
            .rules
            .iter()
            .find_map(|r| match &r.kind {
                crate::deduction::ReflectiveKind::Diagonal { threshold, .. } => Some(threshold.clone()),
                _ => None,
            })
            .ok_or_else(|| HarnessError::Config("paradox needs a diagonal rule or `p`".into()))?,
    };
    let window = window_or(params.window, trace.horizon(), (1, 2))?;
    let tol = params
        .tolerance
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("tolerance", t))?;
    let mut report = ExperimentReport::new(
        "paradox",
        format!(
            "|P_n({family}) - {}| <= {} on the window",
            format_rational(&p),
            dec(&tol)
        ),
        window,
        tol.clone(),
    );
    report.control = params.control.unwrap_or(false);
    let (s, _) = family_series(trace, &family)?;
    window_check(
        &mut report,
        &family,
        &s,
        |v| abs(&(v - &p)) <= tol,
        "within tolerance of p",
    );
    report.series.push(s);
    Ok(report)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfKnowledgeCase {
    pub sentence: String,
    pub fact: String,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfKnowledgeParams {
    pub cases: Option<Vec<SelfKnowledgeCase>>,
    pub delta: Option<String>,
    pub window: Option<[u64; 2]>,
    pub tolerance: Option<String>,
}

fn self_knowledge_from(trace: &MarketTrace, params: &SelfKnowledgeParams) -> Result<ExperimentReport, HarnessError> {
    let cases = params
        .cases
        .clone()
        .ok_or_else(|| HarnessError::Config("self_knowledge needs `cases`".into()))?;
    let delta = params
        .delta
        .as_deref()
        .map_or(Ok(crate::rational::ratio(1, 20)), |t| parse_rat("delta", t))?;
    let tol = params
        .tolerance
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("tolerance", t))?;
    let window = window_or(params.window, trace.horizon(), (1, 2))?;
    let one = Rational::from_integer(1.into());
    let mut report = ExperimentReport::new(
        "self_knowledge",
        format!(
            "fact price >= {} when the price is inside the band by delta, <= {} when outside by delta",
            dec(&(&one - &tol)),
            dec(&tol)
        ),
        window,
        tol.clone(),
    );
    for case in cases {
        let (lo, hi) = (parse_rat("lo", &case.lo)?, parse_rat("hi", &case.hi)?);
        let (watched, _) = family_series(trace, &case.sentence)?;
        let (fact, _) = family_series(trace, &case.fact)?;
        let (mut inside, mut outside, mut excluded, mut bad) = (0, 0, 0, Vec::new());
        for n in window.0..=window.1 {
            let i = n as usize - 1;
            let (Some(Some(x)), Some(Some(y))) = (watched.values.get(i), fact.values.get(i)) else {
                continue;
            };
            if x > &(&lo + &delta) && x < &(&hi - &delta) {
                inside += 1;
                if y < &(&one - &tol) {
                    bad.push(n);
                }
            } else if x <= &(&lo - &delta) || x >= &(&hi + &delta) {
                outside += 1;
                if y > &tol {
                    bad.push(n);
                }
            } else {
                excluded += 1;
            }
        }
        report.check(
            format!("{} in ({}, {})", case.sentence, case.lo, case.hi),
            bad.is_empty(),
            format!(
                "{inside} inside, {outside} outside, {excluded} within delta of an edge; {} violations{}",
                bad.len(),
                bad.first().map_or(String::new(), |d| format!(", first day {d}"))
            ),
        );
        report.series.push(watched);
        report.series.push(fact);
    }
    Ok(report)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaltingParams {
    pub halting: Option<String>,
    pub bounded: Option<String>,
    pub undecided: Option<Vec<String>>,
    pub window: Option<[u64; 2]>,
    pub min: Option<String>,
    pub max: Option<String>,
}

fn halting_from(trace: &MarketTrace, params: &HaltingParams) -> Result<ExperimentReport, HarnessError> {
    let window = window_or(params.window, trace.horizon(), (3, 4))?;
    let min = params
        .min
        .as_deref()
        .map_or(Ok(crate::rational::ratio(9, 10)), |t| parse_rat("min", t))?;
    let max = params
        .max
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("max", t))?;
    let mut report = ExperimentReport::new(
        "halting",
        format!(
            "halting family >= {}, bounded non-halting family <= {}, undecided strictly inside (0, 1)",
            dec(&min),
            dec(&max)
        ),
        window,
        max.clone(),
    );
    if let Some(f) = &params.halting {
        let (s, _) = family_series(trace, f)?;
        window_check(&mut report, f, &s, |v| v >= &min, &format!(">= {}", dec(&min)));
        report.series.push(s);
    }
    if let Some(f) = &params.bounded {
        let (s, _) = family_series(trace, f)?;
        window_check(&mut report, f, &s, |v| v <= &max, &format!("<= {}", dec(&max)));
        report.series.push(s);
    }
    let n = trace.horizon();
    for s in names_to_sentences(params.undecided.as_deref().unwrap_or(&[]))? {
        let v = trace.price(n, &s);
        let inside = v.is_positive() && v < Rational::from_integer(1.into());
        report.check(format!("{s} at day {n}"), inside, format!("price {}", dec(&v)));
        report.series.push(fixed_series(trace, &s));
    }
    Ok(report)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetUpdateParams {
    pub family: Option<String>,
    pub prefix: Option<String>,
    pub bins: Option<u32>,
    pub deferral: Option<String>,
    pub window: Option<[u64; 2]>,
    pub slack: Option<String>,
}

/// The binned variable for `ℙ_{f(n)}(φ_n)`: outcome `j` is the bin atom
/// `<prefix><j>_n`, valued at the bin midpoint.
pub fn binned_variable(prefix: &str, bins: u32, n: u64) -> Result<Variable, HarnessError> {
    let mut partition = Vec::new();
    for j in 0..bins {
        let t = crate::template::SentenceTemplate::parse(&bin_atom(prefix, j))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let s = t
            .at(n as i64)
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .ok_or_else(|| HarnessError::Config("bin index below 1".into()))?;
        partition.push((s, bin_value(j, bins)));
    }
    Variable::new(partition)
}

fn net_update_from(trace: &MarketTrace, params: &NetUpdateParams) -> Result<ExperimentReport, HarnessError> {
    let family = params.family.clone().unwrap_or_else(|| "t_{n}".into());
    let prefix = params.prefix.clone().unwrap_or_else(|| "nb".into());
    let bins = params.bins.unwrap_or(8);
    let deferral = DeferralFunction::parse(params.deferral.as_deref().unwrap_or("n+10"), trace.horizon())?;
    let window = window_or(params.window, trace.horizon(), (3, 4))?;
    let slack = params
        .slack
        .as_deref()
        .map_or(Ok(ratio_tenth()), |t| parse_rat("slack", t))?;
    let bound = crate::rational::ratio(1, bins as i64) + &slack;
    let mut report = ExperimentReport::new(
        "net_update",
        format!(
            "|P_n({family}) - E_n(binned P_f(n)({family}))| <= 1/{bins} + {} with f(n) = {}",
            dec(&slack),
            deferral.text()
        ),
        window,
        bound.clone(),
    );
    let (price, inst) = family_series(trace, &family)?;
    let mut expected = Vec::new();
    let mut gap = Vec::new();
    for (i, p) in trace.pricings.iter().enumerate() {
        let n = i as u64 + 1;
        let e = expectation(p, &binned_variable(&prefix, bins, n)?);
        gap.push(inst[i].as_ref().map(|s| abs(&(p.get(s) - &e))));
        expected.push(Some(e));
    }
    let gap = Series {
        label: "discrepancy".into(),
        values: gap,
    };
    window_check(
        &mut report,
        "discrepancy",
        &gap,
        |v| v <= &bound,
        &format!("<= {}", dec(&bound)),
    );
    report.series.push(price);
    report.series.push(Series {
        label: "expectation".into(),
        values: expected,
    });
    report.series.push(gap);
    Ok(report)
}

pub const EXPERIMENTS: &[&str] = &[
    "convergence",
    "coherence",
    "provability",
    "non_dogmatism",
    "paradox",
    "self_knowledge",
    "halting",
    "net_update",
];

/// Runs the named experiment on an existing trace of `scenario`.
pub fn evaluate_experiment(
    name: &str,
    scenario: &Scenario,
    trace: &MarketTrace,
) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    let mut report = match name {
        "convergence" => {
            let p: ConvergenceParams = scenario.experiment_params(name)?;
            let probes = match &p.sentences {
                Some(names) => names_to_sentences(names)?,
                None => scenario.probes.track.clone(),
            };
            let window = window_or(p.window, trace.horizon(), (3, 4))?;
            let tol = p
                .tolerance
                .as_deref()
                .map_or(Ok(crate::rational::ratio(1, 20)), |t| parse_rat("tolerance", t))?;
            convergence_report(trace, &probes, window, &tol)
        }
        "coherence" => coherence_from(scenario, trace, &scenario.experiment_params(name)?)?,
        "provability" => provability_from(trace, &scenario.experiment_params(name)?)?,
        "non_dogmatism" => non_dogmatism_from(trace, &scenario.experiment_params(name)?)?,
        "paradox" => paradox_from(scenario, trace, &scenario.experiment_params(name)?)?,
        "self_knowledge" => self_knowledge_from(trace, &scenario.experiment_params(name)?)?,
        "halting" => halting_from(trace, &scenario.experiment_params(name)?)?,
        "net_update" => net_update_from(trace, &scenario.experiment_params(name)?)?,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown experiment `{other}` (known: {})",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    report.runtime += start.elapsed();
    Ok(report)
}

/// Runs `scenario` and then the named experiment; the runtime covers both.
pub fn run_experiment(name: &str, scenario: &Scenario) -> Result<ExperimentReport, HarnessError> {
    if !EXPERIMENTS.contains(&name) {
        return Err(HarnessError::Config(format!(
            "unknown experiment `{name}` (known: {})",
            EXPERIMENTS.join(", ")
        )));
    }
    let start = Instant::now();
    let trace = scenario.run()?;
    let run_time = start.elapsed();
    let mut report = evaluate_experiment(name, scenario, &trace)?;
    report.runtime += run_time;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;
    use crate::rational::{half, int, ratio};

    fn trace_of(values: &[Rational], s: &Sentence) -> MarketTrace {
        MarketTrace {
            pricings: values
                .iter()
                .map(|v| [(s.clone(), v.clone())].into_iter().collect())
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn constant_series_has_no_deviation() {
        let s = parse_sentence("phi").unwrap();
        let t = trace_of(&vec![half(); 20], &s);
        let r = convergence_report(&t, &[s], (10, 20), &Rational::zero());
        assert!(r.passed());
        assert!(r.checks[0].detail.contains("0/1"));
    }

    #[test]
    fn alternating_series_deviation() {
        // 1/2 + (-1/2)^n
        let s = parse_sentence("phi").unwrap();
        let values: Vec<Rational> = (1..=20).map(|n| half() + num_traits::pow(ratio(-1, 2), n)).collect();
        let t = trace_of(&values, &s);
        let expected = abs(&(&values[9] - &values[19]));
        let r = convergence_report(&t, &[s], (10, 20), &expected);
        assert!(r.passed());
        let tighter = &expected - ratio(1, 1 << 30);
        let t2 = convergence_report(&t, &[parse_sentence("phi").unwrap()], (10, 20), &tighter);
        assert!(!t2.passed());
    }

    #[test]
    fn coherence_examples() {
        let (a, b) = (parse_sentence("a").unwrap(), parse_sentence("b").unwrap());
        let na = Sentence::not(a.clone());
        let p: Pricing = [(a.clone(), ratio(3, 5)), (na.clone(), ratio(2, 5))]
            .into_iter()
            .collect();
        assert_eq!(coherence_probe(&p, &[(a.clone(), na)], &[], &[])[0].value, int(0));

        let p: Pricing = [
            (a.clone(), half()),
            (b.clone(), half()),
            (Sentence::or(a.clone(), b.clone()), ratio(3, 4)),
            (Sentence::and(a.clone(), b.clone()), ratio(1, 4)),
        ]
        .into_iter()
        .collect();
        assert_eq!(
            coherence_probe(&p, &[], &[(a.clone(), b.clone())], &[])[0].value,
            int(0)
        );

        let p: Pricing = [(a.clone(), ratio(4, 5)), (b.clone(), ratio(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(coherence_probe(&p, &[], &[], &[(a, b)])[0].value, ratio(3, 10));
    }

    #[test]
    fn windows_follow_the_horizon() {
        assert_eq!(window_or(None, 200, (3, 4)).unwrap(), (150, 200));
        assert_eq!(window_or(None, 200, (1, 2)).unwrap(), (100, 200));
        assert!(window_or(Some([5, 300]), 200, (1, 2)).is_err());
    }

    #[test]
    fn report_text_is_recheckable() {
        let s = parse_sentence("phi").unwrap();
        let t = trace_of(&vec![half(); 4], &s);
        let r = convergence_report(&t, &[s], (2, 4), &ratio(1, 20));
        let text = format_report(&r);
        assert!(text.contains("# verdict: pass"));
        assert!(text.contains("day,\"phi\"\n1,1/2\n"));
    }
}
