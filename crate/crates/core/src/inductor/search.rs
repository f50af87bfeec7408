//! Per-day price search.
//!
//! Prices live on the grid `i · resolution`. Starting from yesterday's
//! prices, each traded sentence is moved in the direction of the firm's net
//! demand for it (step doubling, then bisection on the sign of demand), in
//! Gauss-Seidel sweeps. If that does not certify, a ±1 step coordinate
//! descent on the certificate value follows, then a lexicographic grid scan
//! over the few sentences with the largest demand.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{build_space, price_map, scale_from, DayCertificate, InductorConfig, InductorError, TraderPool};
use crate::logic::{Sentence, TheoryFragment, WorldSpace};
use crate::pricing::{PriceView, Pricing};
use crate::rational::{format_rational, Rational};
use crate::trading::{FeatureExpr, Holdings, Trade};

struct MemberDay {
    index: usize,
    weight: Rational,
    budget: Rational,
    template: Vec<(Sentence, FeatureExpr)>,
    groups: BTreeMap<usize, Vec<(usize, Rational)>>,
    mins: BTreeMap<usize, Rational>,
    worst: Rational,
}

/// Everything about day `n` that does not depend on the candidate pricing.
pub(crate) struct DayContext<'a> {
    pub day: u64,
    pub epsilon: Rational,
    past: &'a [Pricing],
    space: WorldSpace,
    members: Vec<MemberDay>,
    pool_size: usize,
    /// Sentences some active member trades today.
    pub traded: Vec<Sentence>,
    pub support: BTreeSet<Sentence>,
}

#[derive(Clone)]
pub(crate) struct Eval {
    pub firm: Trade,
    /// Per active member: unscaled trade and budget scale.
    pub trades: Vec<Trade>,
    pub scales: Vec<Rational>,
    pub value: Rational,
}

impl Eval {
    fn demand(&self, s: &Sentence) -> i32 {
        self.firm
            .shares
            .get(s)
            .map_or(0, |q| if q.is_positive() { 1 } else { -1 })
    }
}

impl<'a> DayContext<'a> {
    pub fn build(
        pool: &TraderPool,
        holdings: &[Holdings],
        past: &'a [Pricing],
        f: &TheoryFragment,
        day: u64,
        cap: usize,
        epsilon: Rational,
    ) -> Result<Self, InductorError> {
        let active = pool.active(day)?;
        let mut templates = Vec::with_capacity(active);
        let mut support: BTreeSet<Sentence> = f.iter().cloned().collect();
        let mut traded = BTreeSet::new();
        for m in &pool.members[..active] {
            let t = m.trader.day_template(day)?;
            for (s, e) in &t {
                e.for_each_price(&mut |p, _| {
                    support.insert(p.clone());
                });
                support.insert(s.clone());
                traded.insert(s.clone());
            }
            templates.push(t);
        }
        let empty = Holdings::new();
        let held = |i: usize| holdings.get(i).unwrap_or(&empty);
        let mut interest = support.clone();
        for i in 0..active {
            interest.extend(held(i).shares.keys().cloned());
        }
        let space = build_space(f, interest.iter(), cap, day)?;

        let mut members = Vec::with_capacity(active);
        for (i, template) in templates.into_iter().enumerate() {
            let h = held(i);
            let (constant, groups) = space.group(h.terms())?;
            let mut worst = &h.cash + constant;
            let mut mins = BTreeMap::new();
            for (c, terms) in &groups {
                let lo = space.component_range(*c, terms).0;
                worst += &lo;
                mins.insert(*c, lo);
            }
            let m = &pool.members[i];
            members.push(MemberDay {
                index: i,
                weight: m.weight.clone(),
                budget: m.budget.clone(),
                template,
                groups,
                mins,
                worst,
            });
        }
        Ok(DayContext {
            day,
            epsilon,
            past,
            space,
            members,
            pool_size: pool.len(),
            traded: traded.into_iter().collect(),
            support,
        })
    }

    fn scale(&self, m: &MemberDay, trade: &Trade) -> Result<Rational, InductorError> {
        let (constant, groups) = self.space.group(trade.terms())?;
        let mut full = &m.worst + &trade.cash + constant;
        for (c, terms) in groups {
            let mut merged = m.groups.get(&c).cloned().unwrap_or_default();
            merged.extend(terms);
            let lo = self.space.component_range(c, &merged).0;
            full += lo;
            if let Some(old) = m.mins.get(&c) {
                full -= old;
            }
        }
        Ok(scale_from(&m.worst, &full, &m.budget))
    }

    pub fn evaluate(&self, candidate: &Pricing) -> Result<Eval, InductorError> {
        let view = PriceView::with_candidate(self.past, candidate);
        let mut firm = Trade::new();
        let mut trades = Vec::with_capacity(self.members.len());
        let mut scales = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let t = Trade::at_prices(m.template.iter().map(|(s, e)| (s.clone(), e.eval(&view))), candidate);
            let s = if t.is_empty() {
                Rational::from_integer(1.into())
            } else {
                self.scale(m, &t)?
            };
            firm.add_scaled(&t, &(&m.weight * &s));
            trades.push(t);
            scales.push(s);
        }
        let (_, value) = self.space.extrema(&firm.cash, firm.terms())?;
        Ok(Eval {
            firm,
            trades,
            scales,
            value,
        })
    }

    fn certificate(&self, pricing: Pricing, eval: &Eval, evaluations: usize) -> (DayCertificate, Vec<Trade>) {
        let mut scales = vec![Rational::zero(); self.pool_size];
        let mut executed = vec![Trade::new(); self.pool_size];
        for (m, (t, s)) in self.members.iter().zip(eval.trades.iter().zip(&eval.scales)) {
            scales[m.index] = s.clone();
            executed[m.index] = t.scaled(s);
        }
        let cert = DayCertificate {
            day: self.day,
            epsilon: self.epsilon.clone(),
            pricing,
            firm_trade: eval.firm.clone(),
            max_value: eval.value.clone(),
            scales,
            evaluations,
        };
        (cert, executed)
    }
}

const MAX_SWEEPS: usize = 64;
const GRID_DIMENSIONS: usize = 3;

struct Search<'c, 'a> {
    ctx: &'c DayContext<'a>,
    steps: i64,
    resolution: Rational,
    fixed: BTreeMap<Sentence, Rational>,
    budget: usize,
    evaluations: usize,
}

enum Outcome {
    Certified(BTreeMap<Sentence, i64>, Box<Eval>),
    Exhausted,
}

impl Search<'_, '_> {
    fn pricing(&self, grid: &BTreeMap<Sentence, i64>) -> Pricing {
        let mut all = self.fixed.clone();
        for (s, i) in grid {
            all.insert(s.clone(), &self.resolution * Rational::from_integer(BigInt::from(*i)));
        }
        price_map(all)
    }

    fn eval(&mut self, grid: &BTreeMap<Sentence, i64>) -> Result<Option<Eval>, InductorError> {
        if self.evaluations >= self.budget {
            return Ok(None);
        }
        self.evaluations += 1;
        self.ctx.evaluate(&self.pricing(grid)).map(Some)
    }

    fn certified(&self, e: &Eval) -> bool {
        e.value <= self.ctx.epsilon
    }

    /// Moves sentence `s` to the grid point where its demand changes sign.
    fn solve_one(
        &mut self,
        s: &Sentence,
        grid: &BTreeMap<Sentence, i64>,
        current: &Eval,
    ) -> Result<Option<(i64, Eval)>, InductorError> {
        let dir = current.demand(s);
        if dir == 0 {
            return Ok(Some((grid[s], current.clone())));
        }
        let mut probe = grid.clone();
        let (mut a, mut ea) = (grid[s], current.clone());
        let mut step = 1i64;
        let (mut b, mut eb) = loop {
            let y = (a + dir as i64 * step).clamp(0, self.steps);
            if y == a {
                return Ok(Some((a, ea)));
            }
            probe.insert(s.clone(), y);
            let Some(e) = self.eval(&probe)? else {
                return Ok(None);
            };
            if e.demand(s) == dir {
                a = y;
                ea = e;
                step *= 2;
            } else {
                break (y, e);
            }
        };
        while (b - a).abs() > 1 {
            let m = (a + b).div_euclid(2);
            probe.insert(s.clone(), m);
            let Some(e) = self.eval(&probe)? else {
                return Ok(None);
            };
            if e.demand(s) == dir {
                a = m;
                ea = e;
            } else {
                b = m;
                eb = e;
            }
        }
        let pick_b = eb.value < ea.value || (eb.value == ea.value && b < a);
        Ok(Some(if pick_b { (b, eb) } else { (a, ea) }))
    }

    fn run(&mut self, start: BTreeMap<Sentence, i64>) -> Result<(Outcome, Option<Rational>), InductorError> {
        let mut grid = start;
        let Some(mut cur) = self.eval(&grid)? else {
            return Ok((Outcome::Exhausted, None));
        };
        if self.certified(&cur) {
            return Ok((Outcome::Certified(grid, Box::new(cur)), None));
        }
        let traded = self.ctx.traded.clone();

        'sweeps: for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for s in &traded {
                let Some((i, e)) = self.solve_one(s, &grid, &cur)? else {
                    break 'sweeps;
                };
                if i != grid[s] {
                    moved = true;
                    grid.insert(s.clone(), i);
                    cur = e;
                    if self.certified(&cur) {
                        return Ok((Outcome::Certified(grid, Box::new(cur)), None));
                    }
                }
            }
            if !moved {
                break;
            }
        }

        // coordinate descent on the certificate value
        loop {
            let mut improved = false;
            for s in &traded {
                for d in [-1i64, 1] {
                    let y = grid[s] + d;
                    if y < 0 || y > self.steps {
                        continue;
                    }
                    let mut probe = grid.clone();
                    probe.insert(s.clone(), y);
                    let Some(e) = self.eval(&probe)? else {
                        return Ok((Outcome::Exhausted, Some(cur.value)));
                    };
                    if e.value < cur.value {
                        grid = probe;
                        cur = e;
                        improved = true;
                        if self.certified(&cur) {
                            return Ok((Outcome::Certified(grid, Box::new(cur)), None));
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }

        // grid scan over the sentences with the largest demand
        let mut by_demand: Vec<(&Sentence, Rational)> = traded
            .iter()
            .map(|s| (s, cur.firm.shares.get(s).map(|q| q.abs()).unwrap_or_default()))
            .filter(|(_, q)| !q.is_zero())
            .collect();
        by_demand.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        let dims: Vec<Sentence> = by_demand
            .iter()
            .take(GRID_DIMENSIONS)
            .map(|(s, _)| (*s).clone())
            .collect();
        if !dims.is_empty() {
            let remaining = self.budget.saturating_sub(self.evaluations) as f64;
            let per_axis = remaining.powf(1.0 / dims.len() as f64).floor() as i64;
            let axes: Vec<Vec<i64>> = dims
                .iter()
                .map(|s| {
                    if per_axis > self.steps {
                        (0..=self.steps).collect()
                    } else {
                        let r = ((per_axis - 1) / 2).max(0);
                        let c = grid[s];
                        ((c - r).max(0)..=(c + r).min(self.steps)).collect()
                    }
                })
                .collect();
            let mut idx = vec![0usize; dims.len()];
            'scan: loop {
                let mut probe = grid.clone();
                for (d, s) in dims.iter().enumerate() {
                    probe.insert(s.clone(), axes[d][idx[d]]);
                }
                let Some(e) = self.eval(&probe)? else {
                    break 'scan;
                };
                if e.value < cur.value {
                    cur = e.clone();
                }
                if self.certified(&e) {
                    return Ok((Outcome::Certified(probe, Box::new(e)), None));
                }
                let mut d = dims.len();
                loop {
                    if d == 0 {
                        break 'scan;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < axes[d].len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        Ok((Outcome::Exhausted, Some(cur.value)))
    }
}

pub(crate) fn find_prices_full(
    pool: &TraderPool,
    holdings: &[Holdings],
    history: &[Pricing],
    f: &TheoryFragment,
    day: u64,
    config: &InductorConfig,
) -> Result<(Pricing, DayCertificate, Vec<Trade>), InductorError> {
    search_with_epsilon(pool, holdings, history, f, day, config, config.epsilon(day))
}

fn search_with_epsilon(
    pool: &TraderPool,
    holdings: &[Holdings],
    history: &[Pricing],
    f: &TheoryFragment,
    day: u64,
    config: &InductorConfig,
    epsilon: Rational,
) -> Result<(Pricing, DayCertificate, Vec<Trade>), InductorError> {
    let ctx = DayContext::build(pool, holdings, history, f, day, config.world_cap, epsilon)?;
    let steps = (config.resolution.denom() / config.resolution.numer())
        .to_i64()
        .ok_or_else(|| InductorError::Config("resolution too fine".into()))?;
    let start_price = |s: &Sentence| {
        let p = history
            .last()
            .and_then(|p| p.lookup(s).cloned())
            .unwrap_or_else(|| config.initial_price.clone());
        config.snap(&p)
    };
    let traded: BTreeSet<&Sentence> = ctx.traded.iter().collect();
    let mut fixed = BTreeMap::new();
    let mut grid = BTreeMap::new();
    for s in &ctx.support {
        let p = start_price(s);
        if traded.contains(s) {
            let i = (&p / &config.resolution).to_integer().to_i64().unwrap_or(0);
            grid.insert(s.clone(), i);
        } else {
            // an untraded sentence settled by D_n is priced at its truth value
            let one = Rational::from_integer(1.into());
            let (lo, hi) = ctx.space.extrema(&Rational::zero(), [(s, &one)])?;
            let p = if lo == hi { lo } else { p };
            fixed.insert(s.clone(), p);
        }
    }
    let mut search = Search {
        ctx: &ctx,
        steps,
        resolution: config.resolution.clone(),
        fixed,
        budget: config.max_iterations,
        evaluations: 0,
    };
    match search.run(grid)? {
        (Outcome::Certified(grid, eval), _) => {
            let pricing = search.pricing(&grid);
            let (cert, trades) = ctx.certificate(pricing.clone(), &eval, search.evaluations);
            Ok((pricing, cert, trades))
        }
        (Outcome::Exhausted, best) => Err(InductorError::ResolutionFailure {
            day,
            resolution: format_rational(&config.resolution),
            best: best.map_or_else(|| "n/a".into(), |b| format_rational(&b)),
            epsilon: format_rational(&ctx.epsilon),
            evaluations: search.evaluations,
        }),
    }
}

/// Searches day `history.len() + 1` for a pricing whose firm trade has
/// plausible value at most `epsilon`.
pub fn find_prices(
    pool: &TraderPool,
    holdings: &[Holdings],
    history: &[Pricing],
    f: &TheoryFragment,
    epsilon: &Rational,
    config: &InductorConfig,
) -> Result<(Pricing, DayCertificate), InductorError> {
    let day = history.len() as u64 + 1;
    search_with_epsilon(pool, holdings, history, f, day, config, epsilon.clone()).map(|(p, c, _)| (p, c))
}
