//! Scenario files (TOML).
//!
//! ```toml
//! name = "demo"
//! horizon = 50
//!
//! [market]
//! resolution = "1/1024"
//!
//! [deduction]
//! facts = ["day 10: a"]
//!
//! [[deduction.stream]]
//! family = "t_{n}"
//! delay = "2*n"
//!
//! [[trader]]
//! kind = "theorem_buyer"
//! family = "t_{n}"
//! target = "63/64"
//!
//! [probes]
//! track = ["a", "~a"]
//! pairs = [["a", "~a"]]
//! ```
//!
//! Paths (`script`, strategy `file`) are relative to the scenario file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;
use crate::deduction::{
    parse_script, DayMap, DeductiveProcess, HaltingStream, Interval, MachineFamily, ReflectiveKind, ReflectiveRule,
};
use crate::inductor::builtins::{self, StreamTrader};
use crate::inductor::{default_weight, InductorConfig, MarketTrace, PoolMember, TraderPool};
use crate::logic::{parse_sentence, Sentence, TheoryFragment};
use crate::pricing::Pricing;
use crate::rational::{parse_rational, Rational};
use crate::template::{IndexExpr, SentenceTemplate};
use crate::trading::{load_strategy, parse_strategy, Trader};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    horizon: u64,
    #[serde(default)]
    market: MarketSection,
    #[serde(default)]
    deduction: DeductionSection,
    #[serde(default)]
    reflective: Vec<ReflectiveSpec>,
    #[serde(default)]
    trader: Vec<MemberSpec>,
    #[serde(default)]
    probes: ProbeSection,
    #[serde(default)]
    experiment: toml::Table,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketSection {
    resolution: Option<String>,
    initial_price: Option<String>,
    max_iterations: Option<usize>,
    epsilon_floor: Option<String>,
    activation: Option<String>,
    world_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeductionSection {
    script: Option<String>,
    #[serde(default)]
    facts: Vec<String>,
    #[serde(default)]
    stream: Vec<StreamSpec>,
    #[serde(default)]
    halting: Vec<HaltingSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamSpec {
    family: String,
    delay: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HaltingSpec {
    atom: String,
    machine: String,
    step_bound: Option<String>,
    steps_per_day: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ReflectiveSpec {
    PriceFact {
        sentence: String,
        lo: String,
        hi: String,
        interval: Option<String>,
        price_day: Option<String>,
        atom: Option<String>,
        lag: Option<u64>,
    },
    Diagonal {
        atom: String,
        threshold: String,
        lag: Option<u64>,
    },
    /// `bins` price-fact rules splitting `[0, 1]` into equal bins.
    Bins {
        sentence: String,
        prefix: String,
        bins: u32,
        price_day: String,
        lag: Option<u64>,
    },
}

#[derive(Debug, Deserialize)]
struct MemberSpec {
    name: Option<String>,
    weight: Option<String>,
    budget: Option<String>,
    #[serde(flatten)]
    kind: TraderSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TraderSpec {
    TheoremBuyer {
        family: String,
        target: Option<String>,
        slope: Option<String>,
        lookback: Option<u64>,
        from_day: Option<u64>,
    },
    TheoremSeller {
        family: String,
        target: Option<String>,
        slope: Option<String>,
        lookback: Option<u64>,
        from_day: Option<u64>,
    },
    Oscillation {
        sentences: Vec<String>,
        slope: Option<String>,
    },
    Complement {
        pairs: Vec<[String; 2]>,
        slope: Option<String>,
    },
    ReflectionDiagonal {
        family: String,
        threshold: String,
        slope: Option<String>,
    },
    ReflectionBand {
        sentence: String,
        fact: String,
        lo: String,
        hi: String,
        delta: Option<String>,
        slope: Option<String>,
    },
    ExpectationBins {
        sentence: String,
        prefix: String,
        bins: u32,
        slope: Option<String>,
    },
    Strategy {
        file: Option<String>,
        text: Option<String>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeSection {
    #[serde(default)]
    track: Vec<String>,
    #[serde(default)]
    pairs: Vec<[String; 2]>,
    #[serde(default)]
    triples: Vec<[String; 2]>,
}

/// Sentences an experiment watches.
#[derive(Debug, Clone, Default)]
pub struct Probes {
    pub track: Vec<Sentence>,
    pub pairs: Vec<(Sentence, Sentence)>,
    /// `(φ, ψ)`, read together with `φ | ψ` and `φ & ψ`.
    pub triples: Vec<(Sentence, Sentence)>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub horizon: u64,
    pub config: InductorConfig,
    pub process: DeductiveProcess,
    pub rules: Vec<ReflectiveRule>,
    pub probes: Probes,
    /// Raw `[experiment.<name>]` tables.
    pub experiments: toml::Table,
}

fn rat(field: &str, text: &str) -> Result<Rational, HarnessError> {
    parse_rational(text).map_err(|e| HarnessError::Config(format!("{field}: {e}")))
}

fn opt_rat(field: &str, text: &Option<String>, default: Rational) -> Result<Rational, HarnessError> {
    text.as_deref().map_or(Ok(default), |t| rat(field, t))
}

fn sentence(text: &str) -> Result<Sentence, HarnessError> {
    parse_sentence(text).map_err(|e| HarnessError::Config(format!("sentence `{text}`: {e}")))
}

fn template(text: &str) -> Result<SentenceTemplate, HarnessError> {
    SentenceTemplate::parse(text).map_err(|e| HarnessError::Config(format!("template `{text}`: {e}")))
}

fn index_expr(text: &str) -> Result<IndexExpr, HarnessError> {
    IndexExpr::parse(text).map_err(|e| HarnessError::Config(format!("index expression `{text}`: {e}")))
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

fn stream_spec(
    family: &str,
    target: &Option<String>,
    slope: &Option<String>,
    lookback: Option<u64>,
    from_day: Option<u64>,
    default_target: Rational,
) -> Result<StreamTrader, HarnessError> {
    let mut s = StreamTrader::new(family, opt_rat("target", target, default_target)?);
    s.slope = opt_rat("slope", slope, one())?;
    s.lookback = lookback.unwrap_or(0);
    s.from_day = from_day;
    Ok(s)
}

fn build_trader(spec: &TraderSpec, name: &str, base: &Path) -> Result<Trader, HarnessError> {
    use crate::rational::ratio;
    Ok(match spec {
        TraderSpec::TheoremBuyer {
            family,
            target,
            slope,
            lookback,
            from_day,
        } => builtins::theorem_buyer(
            name,
            &stream_spec(family, target, slope, *lookback, *from_day, ratio(63, 64))?,
        )?,
        TraderSpec::TheoremSeller {
            family,
            target,
            slope,
            lookback,
            from_day,
        } => builtins::theorem_seller(
            name,
            &stream_spec(family, target, slope, *lookback, *from_day, ratio(1, 64))?,
        )?,
        TraderSpec::Oscillation { sentences, slope } => {
            builtins::oscillation_arbitrageur(name, sentences, &opt_rat("slope", slope, one())?)?
        }
        TraderSpec::Complement { pairs, slope } => {
            let pairs: Vec<(String, String)> = pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect();
            builtins::complement_arbitrageur(name, &pairs, &opt_rat("slope", slope, one())?)?
        }
        TraderSpec::ReflectionDiagonal {
            family,
            threshold,
            slope,
        } => builtins::reflection_diagonal(
            name,
            family,
            &rat("threshold", threshold)?,
            &opt_rat("slope", slope, one())?,
        )?,
        TraderSpec::ReflectionBand {
            sentence,
            fact,
            lo,
            hi,
            delta,
            slope,
        } => builtins::reflection_band(
            name,
            sentence,
            fact,
            &rat("lo", lo)?,
            &rat("hi", hi)?,
            &opt_rat("delta", delta, ratio(1, 20))?,
            &opt_rat("slope", slope, one())?,
        )?,
        TraderSpec::ExpectationBins {
            sentence,
            prefix,
            bins,
            slope,
        } => builtins::expectation_bins(name, sentence, prefix, *bins, &opt_rat("slope", slope, one())?)?,
        TraderSpec::Strategy { file, text } => match (file, text) {
            (Some(f), None) => load_strategy(&base.join(f))?,
            (None, Some(t)) => parse_strategy(t)?,
            _ => {
                return Err(HarnessError::Config(
                    "a strategy trader needs exactly one of `file` or `text`".into(),
                ))
            }
        },
    })
}

fn kind_name(spec: &TraderSpec) -> &'static str {
    match spec {
        TraderSpec::TheoremBuyer { .. } => "theorem_buyer",
        TraderSpec::TheoremSeller { .. } => "theorem_seller",
        TraderSpec::Oscillation { .. } => "oscillation",
        TraderSpec::Complement { .. } => "complement",
        TraderSpec::ReflectionDiagonal { .. } => "reflection_diagonal",
        TraderSpec::ReflectionBand { .. } => "reflection_band",
        TraderSpec::ExpectationBins { .. } => "expectation_bins",
        TraderSpec::Strategy { .. } => "strategy",
    }
}

fn interval(text: &Option<String>) -> Result<Interval, HarnessError> {
    match text.as_deref() {
        None => Ok(Interval::Open),
        Some(t) => Interval::parse(t).ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown interval `{t}` (open, closed_open, open_closed, closed)"
            ))
        }),
    }
}

fn build_rules(specs: &[ReflectiveSpec]) -> Result<Vec<ReflectiveRule>, HarnessError> {
    let mut rules = Vec::new();
    for spec in specs {
        match spec {
            ReflectiveSpec::PriceFact {
                sentence,
                lo,
                hi,
                interval: iv,
                price_day,
                atom,
                lag,
            } => {
                let mut rule = ReflectiveRule::price_fact(template(sentence)?, rat("lo", lo)?, rat("hi", hi)?)?;
                if let ReflectiveKind::PriceFact {
                    interval: ref mut i,
                    price_day: ref mut d,
                    atom: ref mut a,
                    ..
                } = rule.kind
                {
                    *i = interval(iv)?;
                    if let Some(pd) = price_day {
                        *d = index_expr(pd)?;
                    }
                    if let Some(at) = atom {
                        *a = template(at)?;
                    }
                }
                rules.push(rule.with_lag(lag.unwrap_or(1)));
            }
            ReflectiveSpec::Diagonal { atom, threshold, lag } => {
                let p = rat("threshold", threshold)?;
                if p <= Rational::from_integer(0.into()) || p >= one() {
                    return Err(HarnessError::Config("diagonal threshold must lie in (0, 1)".into()));
                }
                rules.push(ReflectiveRule::diagonal(template(atom)?, p).with_lag(lag.unwrap_or(1)));
            }
            ReflectiveSpec::Bins {
                sentence,
                prefix,
                bins,
                price_day,
                lag,
            } => {
                if *bins < 2 {
                    return Err(HarnessError::Config("at least two bins are needed".into()));
                }
                let b = *bins as i64;
                for j in 0..b {
                    rules.push(
                        ReflectiveRule {
                            kind: ReflectiveKind::PriceFact {
                                sentence: template(sentence)?,
                                lo: crate::rational::ratio(j, b),
                                hi: crate::rational::ratio(j + 1, b),
                                interval: if j + 1 == b {
                                    Interval::Closed
                                } else {
                                    Interval::ClosedOpen
                                },
                                price_day: index_expr(price_day)?,
                                atom: template(&builtins::bin_atom(prefix, j as u32))?,
                            },
                            lag: 1,
                        }
                        .with_lag(lag.unwrap_or(1)),
                    );
                }
            }
        }
    }
    Ok(rules)
}

fn build_process(section: &DeductionSection, base: &Path) -> Result<DeductiveProcess, HarnessError> {
    let mut parts = Vec::new();
    let mut script = String::new();
    if let Some(path) = &section.script {
        let p = base.join(path);
        script = std::fs::read_to_string(&p).map_err(|e| HarnessError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?;
        script.push('\n');
    }
    for line in &section.facts {
        script.push_str(line);
        script.push('\n');
    }
    if !script.trim().is_empty() {
        parts.push(parse_script(&script)?);
    }
    for s in &section.stream {
        let delay = DayMap::parse(&s.delay).map_err(|e| HarnessError::Config(e.to_string()))?;
        parts.push(DeductiveProcess::theorem_stream(template(&s.family)?, delay));
    }
    for h in &section.halting {
        let family = MachineFamily::parse(&h.machine)
            .ok_or_else(|| HarnessError::Config(format!("unknown machine family `{}`", h.machine)))?;
        parts.push(DeductiveProcess::halting(HaltingStream {
            atom: template(&h.atom)?,
            family,
            step_bound: h.step_bound.as_deref().map(index_expr).transpose()?,
            steps_per_day: h.steps_per_day.unwrap_or(1),
        }));
    }
    Ok(match parts.len() {
        0 => DeductiveProcess::empty(),
        1 => parts.pop().expect("one part"),
        _ => DeductiveProcess::composite(parts),
    })
}

/// Parses scenario text; relative paths resolve against `base`.
pub fn parse_scenario(text: &str, base: &Path) -> Result<Scenario, HarnessError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    if file.horizon == 0 {
        return Err(HarnessError::Config("horizon must be at least 1".into()));
    }

    let mut pool = TraderPool::new();
    for (i, m) in file.trader.iter().enumerate() {
        let name = m
            .name
            .clone()
            .unwrap_or_else(|| format!("{}_{}", kind_name(&m.kind), i + 1));
        let trader = build_trader(&m.kind, &name, base)?;
        pool.members.push(PoolMember {
            trader,
            weight: opt_rat("weight", &m.weight, default_weight(i as u32 + 1))?,
            budget: opt_rat("budget", &m.budget, one())?,
        });
    }
    if let Some(a) = &file.market.activation {
        pool.activation = Some(index_expr(a)?);
    }

    let mut config = InductorConfig::new(pool);
    let mk = &file.market;
    if let Some(r) = &mk.resolution {
        config.resolution = rat("resolution", r)?;
    }
    if let Some(p) = &mk.initial_price {
        config.initial_price = rat("initial_price", p)?;
    }
    if let Some(m) = mk.max_iterations {
        config.max_iterations = m;
    }
    if let Some(e) = &mk.epsilon_floor {
        config.epsilon_floor = Some(rat("epsilon_floor", e)?);
    }
    if let Some(c) = mk.world_cap {
        config.world_cap = c;
    }
    config.validate().map_err(|e| HarnessError::Config(e.to_string()))?;

    let probes = Probes {
        track: file
            .probes
            .track
            .iter()
            .map(|s| sentence(s))
            .collect::<Result<_, _>>()?,
        pairs: file
            .probes
            .pairs
            .iter()
            .map(|[a, b]| Ok((sentence(a)?, sentence(b)?)))
            .collect::<Result<_, HarnessError>>()?,
        triples: file
            .probes
            .triples
            .iter()
            .map(|[a, b]| Ok((sentence(a)?, sentence(b)?)))
            .collect::<Result<_, HarnessError>>()?,
    };

    Ok(Scenario {
        name: file.name.unwrap_or_else(|| "scenario".into()),
        horizon: file.horizon,
        config,
        process: build_process(&file.deduction, base)?,
        rules: build_rules(&file.reflective)?,
        probes,
        experiments: file.experiment,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, &base)
}

impl Scenario {
    pub fn run(&self) -> Result<MarketTrace, HarnessError> {
        Ok(crate::inductor::run_inductor(
            &self.config,
            &self.process,
            &self.rules,
            self.horizon,
        )?)
    }

    pub fn run_with(&self, on_day: impl FnMut(&crate::inductor::DayCertificate)) -> Result<MarketTrace, HarnessError> {
        Ok(crate::inductor::run_inductor_with(
            &self.config,
            &self.process,
            &self.rules,
            self.horizon,
            on_day,
        )?)
    }

    /// `D_n` as seen by the market on day `n`.
    pub fn fragment(&self, pricings: &[Pricing], n: u64) -> Result<TheoryFragment, HarnessError> {
        Ok(crate::inductor::deduced(&self.process, &self.rules, pricings, n)?)
    }

    pub fn member_names(&self) -> Vec<String> {
        self.config
            .pool
            .members
            .iter()
            .map(|m| m.trader.name().to_string())
            .collect()
    }

    /// Deserializes `[experiment.<name>]`, or the defaults when absent.
    pub fn experiment_params<T: serde::de::DeserializeOwned + Default>(&self, name: &str) -> Result<T, HarnessError> {
        match self.experiments.get(name) {
            None => Ok(T::default()),
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| HarnessError::Config(format!("[experiment.{name}]: {e}"))),
        }
    }
}

/// Sentence instances `family(n)` for each day `1..=horizon` (None below 1).
pub fn family_instances(family: &str, horizon: u64) -> Result<Vec<Option<Sentence>>, HarnessError> {
    let t = template(family)?;
    (1..=horizon as i64)
        .map(|n| t.at(n).map_err(|e| HarnessError::Config(e.to_string())))
        .collect()
}

pub(crate) fn names_to_sentences(names: &[String]) -> Result<Vec<Sentence>, HarnessError> {
    names.iter().map(|s| sentence(s)).collect()
}

pub(crate) fn parse_rat(field: &str, text: &str) -> Result<Rational, HarnessError> {
    rat(field, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
name = "demo"
horizon = 5

[market]
resolution = "1/64"

[deduction]
facts = ["day 2: a"]

[[deduction.stream]]
family = "t_{n}"
delay = "2*n"

[[reflective]]
kind = "diagonal"
atom = "chi_{n}"
threshold = "1/2"

[[reflective]]
kind = "bins"
sentence = "t_{n}"
prefix = "nb"
bins = 4
price_day = "n+1"

[[trader]]
kind = "theorem_buyer"
family = "t_{n}"

[[trader]]
kind = "strategy"
name = "manual"
weight = "1/8"
text = "trader manual\na : 1/2 - price(a, 0)"

[probes]
track = ["a"]
pairs = [["a", "~a"]]
"#;

    #[test]
    fn parses_every_section() {
        let s = parse_scenario(DEMO, Path::new(".")).unwrap();
        assert_eq!(s.horizon, 5);
        assert_eq!(s.config.pool.len(), 2);
        assert_eq!(s.member_names(), vec!["theorem_buyer_1", "manual"]);
        assert_eq!(s.config.pool.members[1].weight, crate::rational::ratio(1, 8));
        assert_eq!(s.rules.len(), 5);
        assert_eq!(s.probes.pairs.len(), 1);
        let trace = s.run().unwrap();
        assert_eq!(trace.horizon(), 5);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            parse_scenario("horizon = 0", Path::new(".")),
            Err(HarnessError::Config(_))
        ));
        assert!(matches!(
            parse_scenario("horizon = 3\nbogus = 1", Path::new(".")),
            Err(HarnessError::Config(_))
        ));
        let bad_rule = "horizon = 3\n[[reflective]]\nkind = \"diagonal\"\natom = \"c_{n}\"\nthreshold = \"3/2\"";
        assert!(parse_scenario(bad_rule, Path::new(".")).is_err());
        let missing = "horizon = 3\n[[trader]]\nkind = \"strategy\"\nfile = \"nope.strategy\"";
        assert!(parse_scenario(missing, Path::new(".")).is_err());
    }
}
