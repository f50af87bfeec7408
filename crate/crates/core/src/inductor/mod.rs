//! The market construction: a weighted, budgeted pool of traders is
//! aggregated into one firm, and each day's prices are searched until the
//! firm's trade cannot gain more than `ε_n` in any world consistent with
//! what has been deduced so far.

pub mod builtins;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::deduction::{reflective_extend, DeductionError, DeductiveProcess, ReflectiveRule};
use crate::logic::{LogicError, Sentence, TheoryFragment, WorldSpace, DEFAULT_WORLD_CAP};
use crate::pricing::Pricing;
use crate::rational::{floor_to, half, int, ratio, round_to, Rational};
use crate::template::{bind_n, IndexExpr};
use crate::trading::{plausible_value_range, Holdings, Trade, Trader, TradingError};

pub use search::find_prices;

#[derive(Debug, Error)]
pub enum InductorError {
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    Trading(#[from] TradingError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("day {day}: the deduced facts are inconsistent")]
    Inconsistent { day: u64 },
    #[error(
        "day {day}: no price at resolution {resolution} certifies the firm's trade \
         (best value {best} > epsilon {epsilon} after {evaluations} evaluations); \
         refine the resolution or relax epsilon"
    )]
    ResolutionFailure {
        day: u64,
        resolution: String,
        best: String,
        epsilon: String,
        evaluations: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone)]
pub struct PoolMember {
    pub trader: Trader,
    pub weight: Rational,
    pub budget: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct TraderPool {
    pub members: Vec<PoolMember>,
    /// Number of active members on day `n`; `min(n, size)` when absent.
    pub activation: Option<IndexExpr>,
}

impl TraderPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a pool with weights `2^-i` (1-based) and budget 1.
    pub fn with_defaults(traders: Vec<Trader>) -> Self {
        let mut pool = TraderPool::new();
        for t in traders {
            pool.push_default(t);
        }
        pool
    }

    /// Appends with the default weight for its position and budget 1.
    pub fn push_default(&mut self, trader: Trader) {
        let i = self.members.len() as u32 + 1;
        self.members.push(PoolMember {
            trader,
            weight: default_weight(i),
            budget: Rational::one(),
        });
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn active(&self, n: u64) -> Result<usize, InductorError> {
        let size = self.members.len() as i64;
        let k = match &self.activation {
            None => (n as i64).min(size),
            Some(e) => e
                .eval(&bind_n(n as i64))
                .map_err(|e| InductorError::Config(e.to_string()))?,
        };
        Ok(k.clamp(0, size) as usize)
    }

    pub fn validate(&self) -> Result<(), InductorError> {
        for (i, m) in self.members.iter().enumerate() {
            if !m.weight.is_positive() {
                return Err(InductorError::Config(format!(
                    "member {} has a non-positive weight",
                    i + 1
                )));
            }
            if !m.budget.is_positive() {
                return Err(InductorError::Config(format!(
                    "member {} has a non-positive budget",
                    i + 1
                )));
            }
        }
        let mut prev = 0;
        for n in 1..=64 {
            let k = self.active(n)?;
            if k < prev {
                return Err(InductorError::Config("activation must be nondecreasing".into()));
            }
            prev = k;
        }
        Ok(())
    }
}

/// `2^-i`.
pub fn default_weight(i: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << i)
}

#[derive(Debug, Clone)]
pub struct InductorConfig {
    pub pool: TraderPool,
    /// Lower bound on `ε_n`; `resolution / 4` when absent.
    pub epsilon_floor: Option<Rational>,
    /// Price grid step; must be `1/k`.
    pub resolution: Rational,
    /// Candidate-pricing evaluations allowed per day.
    pub max_iterations: usize,
    pub initial_price: Rational,
    /// Cap on plausible worlds enumerated per atom component.
    pub world_cap: usize,
}

impl InductorConfig {
    pub fn new(pool: TraderPool) -> Self {
        InductorConfig {
            pool,
            epsilon_floor: None,
            resolution: ratio(1, 1024),
            max_iterations: 20_000,
            initial_price: half(),
            world_cap: DEFAULT_WORLD_CAP,
        }
    }

    /// `ε_n = max(2^-n, floor)`.
    pub fn epsilon(&self, n: u64) -> Rational {
        let floor = self.epsilon_floor.clone().unwrap_or_else(|| &self.resolution / int(4));
        let pow = if n >= 4096 {
            Rational::zero()
        } else {
            Rational::new(BigInt::one(), BigInt::one() << n as usize)
        };
        pow.max(floor)
    }

    pub fn validate(&self) -> Result<(), InductorError> {
        let r = &self.resolution;
        if !r.is_positive() || !r.numer().is_one() || r > &Rational::one() {
            return Err(InductorError::Config(format!("resolution must be 1/k, got {r}")));
        }
        if self.initial_price.is_negative() || self.initial_price > Rational::one() {
            return Err(InductorError::Config("initial price must lie in [0, 1]".into()));
        }
        if let Some(f) = &self.epsilon_floor {
            if !f.is_positive() {
                return Err(InductorError::Config("epsilon floor must be positive".into()));
            }
        }
        if self.max_iterations == 0 {
            return Err(InductorError::Config("max_iterations must be positive".into()));
        }
        self.pool.validate()
    }

    pub(crate) fn snap(&self, p: &Rational) -> Rational {
        let r = round_to(p, &self.resolution);
        r.max(Rational::zero()).min(Rational::one())
    }
}

/// Per-day record that the posted prices left the firm no plausible gain
/// above `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct DayCertificate {
    pub day: u64,
    pub epsilon: Rational,
    pub pricing: Pricing,
    pub firm_trade: Trade,
    pub max_value: Rational,
    /// One entry per pool member; inactive members have scale 0.
    pub scales: Vec<Rational>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarketTrace {
    pub pricings: Vec<Pricing>,
    pub certificates: Vec<DayCertificate>,
    /// `member_trades[n-1][i]`: member `i`'s scaled trade on day `n`.
    pub member_trades: Vec<Vec<Trade>>,
}

impl MarketTrace {
    pub fn horizon(&self) -> u64 {
        self.pricings.len() as u64
    }

    /// Price of `s` on day `n` (1-based).
    pub fn price(&self, n: u64, s: &Sentence) -> Rational {
        self.pricings
            .get((n as usize).wrapping_sub(1))
            .map(|p| p.get(s))
            .unwrap_or_else(Rational::zero)
    }

    pub fn series(&self, s: &Sentence) -> Vec<Rational> {
        self.pricings.iter().map(|p| p.get(s)).collect()
    }

    /// Cumulative holdings of member `i` after day `n`.
    pub fn holdings(&self, i: usize, n: u64) -> Holdings {
        let mut h = Holdings::new();
        for day in self.member_trades.iter().take(n as usize) {
            if let Some(t) = day.get(i) {
                h.add_scaled(t, &Rational::one());
            }
        }
        h
    }
}

/// Sentences priced on day `n`: everything the active members trade or
/// look at, plus the deduced facts.
pub fn support_sentences(pool: &TraderPool, n: u64, f: &TheoryFragment) -> Result<BTreeSet<Sentence>, InductorError> {
    let mut out: BTreeSet<Sentence> = f.iter().cloned().collect();
    for m in pool.members.iter().take(pool.active(n)?) {
        for (s, e) in m.trader.day_template(n)? {
            e.for_each_price(&mut |p, _| {
                out.insert(p.clone());
            });
            out.insert(s);
        }
    }
    Ok(out)
}

const SCALE_GRID_BITS: usize = 32;

/// Largest `s ∈ [0, 1]` keeping the budget, from the current worst case
/// `wc` and the worst case `full` after the unscaled trade. Rounded down to
/// a dyadic grid so denominators stay bounded across days.
pub fn scale_from(wc: &Rational, full: &Rational, budget: &Rational) -> Rational {
    let headroom = budget + wc;
    if !headroom.is_positive() {
        return Rational::zero();
    }
    let loss = wc - full;
    if !loss.is_positive() {
        return Rational::one();
    }
    let s = (headroom / loss).min(Rational::one());
    let grid = Rational::new(BigInt::one(), BigInt::one() << SCALE_GRID_BITS);
    floor_to(&s, &grid)
}

/// Budget scale for holdings `h` taking `trade`, valued against `f`.
pub fn budget_scale(
    h: &Holdings,
    trade: &Trade,
    f: &TheoryFragment,
    budget: &Rational,
) -> Result<Rational, LogicError> {
    let (wc, _) = plausible_value_range(h, f)?;
    let mut after = h.clone();
    after.add_scaled(trade, &Rational::one());
    let (full, _) = plausible_value_range(&after, f)?;
    Ok(scale_from(&wc, &full, budget))
}

/// Firm trade at `candidate` for day `history.len() + 1`, with the scale
/// chosen for each active member.
pub fn firm_trade(
    pool: &TraderPool,
    holdings: &[Holdings],
    candidate: &Pricing,
    history: &[Pricing],
    f: &TheoryFragment,
) -> Result<(Trade, Vec<Rational>), InductorError> {
    let n = history.len() as u64 + 1;
    let ctx = search::DayContext::build(pool, holdings, history, f, n, DEFAULT_WORLD_CAP, Rational::zero())?;
    let eval = ctx.evaluate(candidate)?;
    Ok((eval.firm, eval.scales))
}

/// `D_n` including reflective facts.
pub fn deduced(
    d: &DeductiveProcess,
    rules: &[ReflectiveRule],
    history: &[Pricing],
    n: u64,
) -> Result<TheoryFragment, InductorError> {
    let mut f = d.step(n)?;
    if !rules.is_empty() {
        f.extend(
            reflective_extend(&history[..(n as usize - 1).min(history.len())], rules, n)?
                .iter()
                .cloned(),
        );
    }
    Ok(f)
}

/// Runs the day loop for `horizon` days.
pub fn run_inductor(
    config: &InductorConfig,
    d: &DeductiveProcess,
    rules: &[ReflectiveRule],
    horizon: u64,
) -> Result<MarketTrace, InductorError> {
    run_inductor_with(config, d, rules, horizon, |_| {})
}

/// [`run_inductor`] with a callback after each posted day.
pub fn run_inductor_with(
    config: &InductorConfig,
    d: &DeductiveProcess,
    rules: &[ReflectiveRule],
    horizon: u64,
    mut on_day: impl FnMut(&DayCertificate),
) -> Result<MarketTrace, InductorError> {
    config.validate()?;
    if horizon == 0 {
        return Err(InductorError::Config("horizon must be at least 1".into()));
    }
    let size = config.pool.len();
    let mut trace = MarketTrace::default();
    let mut holdings = vec![Holdings::new(); size];
    for n in 1..=horizon {
        let f = deduced(d, rules, &trace.pricings, n)?;
        let (pricing, certificate, trades) =
            search::find_prices_full(&config.pool, &holdings, &trace.pricings, &f, n, config)?;
        for (h, t) in holdings.iter_mut().zip(&trades) {
            h.add_scaled(t, &Rational::one());
        }
        on_day(&certificate);
        trace.pricings.push(pricing);
        trace.certificates.push(certificate);
        trace.member_trades.push(trades);
    }
    Ok(trace)
}

/// Worst case of each member's holdings under `D_n`, recomputed from the
/// trace by full world enumeration.
pub fn member_worst_cases(trace: &MarketTrace, n: u64, f: &TheoryFragment) -> Result<Vec<Rational>, LogicError> {
    let members = trace.member_trades.first().map_or(0, Vec::len);
    (0..members)
        .map(|i| plausible_value_range(&trace.holdings(i, n), f).map(|(lo, _)| lo))
        .collect()
}

pub(crate) fn price_map(entries: BTreeMap<Sentence, Rational>) -> Pricing {
    entries.into_iter().collect()
}

pub(crate) fn build_space<'a>(
    f: &TheoryFragment,
    interest: impl IntoIterator<Item = &'a Sentence>,
    cap: usize,
    day: u64,
) -> Result<WorldSpace, InductorError> {
    let space = WorldSpace::build(f, interest, cap)?;
    if space.is_empty() {
        return Err(InductorError::Inconsistent { day });
    }
    Ok(space)
}
