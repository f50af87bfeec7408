//! Replays a trader against a recorded market and tracks the plausible value
//! of its holdings day by day.

use num_traits::Zero;

use super::{apply_trade, plausible_value_range, trade_at, Holdings, Trade, Trader, TradingError};
use crate::deduction::{reflective_extend, DeductionError, DeductiveProcess, ReflectiveRule};
use crate::logic::TheoryFragment;
use crate::pricing::Pricing;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct DayValue {
    pub day: u64,
    pub min: Rational,
    pub max: Rational,
    pub running_min: Rational,
    pub running_max: Rational,
}

/// Finite-horizon reading of the exploitation pattern: over the last quarter
/// of the horizon the running minimum stays put while the running maximum
/// keeps climbing. A heuristic, not a proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub bounded_below: bool,
    pub max_increasing: bool,
}

impl Verdict {
    pub fn exploitation(&self) -> bool {
        self.bounded_below && self.max_increasing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploitationReport {
    pub trader: String,
    pub days: Vec<DayValue>,
    pub verdict: Verdict,
}

impl ExploitationReport {
    pub fn horizon(&self) -> u64 {
        self.days.len() as u64
    }

    /// Running minimum and the day it was first attained.
    pub fn running_min(&self) -> Option<(u64, Rational)> {
        let last = self.days.last()?;
        let day = self.days.iter().find(|d| d.min == last.running_min)?.day;
        Some((day, last.running_min.clone()))
    }

    pub fn final_max(&self) -> Option<Rational> {
        self.days.last().map(|d| d.running_max.clone())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExploitError {
    #[error(transparent)]
    Trading(#[from] TradingError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error("market covers {have} days, horizon is {horizon}")]
    ShortMarket { have: usize, horizon: u64 },
}

/// Values of the cumulative holdings of `trades` under `fragments`, one
/// entry per day.
pub fn exploitation_from_trades(
    name: &str,
    trades: &[Trade],
    fragments: &[TheoryFragment],
) -> Result<ExploitationReport, TradingError> {
    let mut holdings = Holdings::new();
    let mut days: Vec<DayValue> = Vec::with_capacity(trades.len());
    for (i, (t, f)) in trades.iter().zip(fragments).enumerate() {
        holdings = apply_trade(&holdings, t);
        let (min, max) = plausible_value_range(&holdings, f)?;
        let (running_min, running_max) = match days.last() {
            Some(prev) => (
                prev.running_min.clone().min(min.clone()),
                prev.running_max.clone().max(max.clone()),
            ),
            None => (min.clone(), max.clone()),
        };
        days.push(DayValue {
            day: i as u64 + 1,
            min,
            max,
            running_min,
            running_max,
        });
    }
    let verdict = verdict(&days);
    Ok(ExploitationReport {
        trader: name.to_string(),
        days,
        verdict,
    })
}

fn verdict(days: &[DayValue]) -> Verdict {
    let n = days.len();
    if n < 2 {
        return Verdict {
            bounded_below: true,
            max_increasing: false,
        };
    }
    let start = n - (n / 4).max(1);
    let (early, late) = (&days[start - 1], &days[n - 1]);
    Verdict {
        bounded_below: late.running_min == early.running_min,
        max_increasing: late.running_max > early.running_max,
    }
}

/// Replays `trader` against days `1..=horizon` of `market`, valuing its
/// holdings against `D_n` (plus reflective facts from `rules`).
pub fn evaluate_exploitation(
    trader: &Trader,
    market: &[Pricing],
    d: &DeductiveProcess,
    rules: &[ReflectiveRule],
    horizon: u64,
) -> Result<ExploitationReport, ExploitError> {
    if (market.len() as u64) < horizon {
        return Err(ExploitError::ShortMarket {
            have: market.len(),
            horizon,
        });
    }
    let mut trades = Vec::with_capacity(horizon as usize);
    let mut fragments = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let i = n as usize;
        trades.push(trade_at(trader, &market[..i - 1], &market[i - 1])?);
        let mut f = d.step(n)?;
        if !rules.is_empty() {
            f.extend(reflective_extend(&market[..i - 1], rules, n)?.iter().cloned());
        }
        fragments.push(f);
    }
    Ok(exploitation_from_trades(trader.name(), &trades, &fragments)?)
}

/// True when every per-day value is zero.
pub fn is_flat_zero(report: &ExploitationReport) -> bool {
    report.days.iter().all(|d| d.min.is_zero() && d.max.is_zero())
}
