//! Regime labels and the named equilibria: separation thresholds, the naive
//! receiver, sender-optimal acceptance thresholds, the KG experiment, and the
//! uninformative outcomes.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AcceptanceSet, Experiment, MarketParams, Menu, MenuOption, Signal};
use crate::obedience::receiver_payoff;
use crate::optimizer::{solve_revenue_max_all, solve_revenue_max_with, Allocation, SolveResult, TieBreak};
use crate::rational::{format_rational, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Separating,
    KgPooling,
    PartialPooling,
    BadNews,
    Degenerate,
    Uninformative,
    NoTrade,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Separating => "separating",
            RegimeLabel::KgPooling => "kg-pooling",
            RegimeLabel::PartialPooling => "partial-pooling",
            RegimeLabel::BadNews => "bad-news",
            RegimeLabel::Degenerate => "degenerate",
            RegimeLabel::Uninformative => "uninformative",
            RegimeLabel::NoTrade => "no-trade",
        }
    }

    pub fn is_separating(&self) -> bool {
        matches!(self, RegimeLabel::Separating)
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labels an optimal allocation. Rules are checked in order, first match wins:
///
/// 1. zero revenue: `degenerate`
/// 2. accepted mass on `e = 1`: `uninformative`
/// 3. no low-type mass on the set: `separating`
/// 4. identical on-set masses: `kg-pooling`
/// 5. low support strictly inside high support: `partial-pooling`
/// 6. low-type mass on some accepted `e < 1`: `bad-news`
/// 7. otherwise (same supports, low type scaled down): `partial-pooling`
pub fn classify(alloc: &Allocation, revenue: &Q) -> RegimeLabel {
    if revenue.is_zero() {
        return RegimeLabel::Degenerate;
    }
    let on_one = alloc
        .signals
        .iter()
        .zip(alloc.high.iter().zip(&alloc.low))
        .any(|(e, (x, y))| e.is_one() && !(x.is_zero() && y.is_zero()));
    if on_one {
        return RegimeLabel::Uninformative;
    }
    if alloc.low.iter().all(Zero::is_zero) {
        return RegimeLabel::Separating;
    }
    if alloc.high == alloc.low {
        return RegimeLabel::KgPooling;
    }
    let hs = alloc.high_support();
    let ls = alloc.low_support();
    if ls.len() < hs.len() && ls.iter().all(|e| hs.contains(e)) {
        return RegimeLabel::PartialPooling;
    }
    let bad_news = alloc
        .signals
        .iter()
        .zip(&alloc.low)
        .any(|(e, y)| matches!(e, Signal::Finite(v) if *v < Q::one()) && !y.is_zero());
    if bad_news {
        return RegimeLabel::BadNews;
    }
    RegimeLabel::PartialPooling
}

pub fn classify_result(r: &SolveResult) -> RegimeLabel {
    classify(&r.allocation, r.revenue())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationClass {
    MustSeparate,
    MaySeparate,
    CannotSeparate,
}

impl SeparationClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeparationClass::MustSeparate => "must-separate",
            SeparationClass::MaySeparate => "may-separate",
            SeparationClass::CannotSeparate => "cannot-separate",
        }
    }
}

/// Compares `inf(E)` with `1/μ`.
pub fn separating_threshold(set: &AcceptanceSet, p: &MarketParams) -> Result<SeparationClass> {
    let inf = set.infimum().ok_or_else(|| Error::InvalidAcceptanceSet("empty acceptance set".into()))?;
    let cutoff = Signal::Finite(p.mu.recip());
    Ok(match inf.cmp(&cutoff) {
        std::cmp::Ordering::Greater => SeparationClass::MustSeparate,
        std::cmp::Ordering::Equal => SeparationClass::MaySeparate,
        std::cmp::Ordering::Less => SeparationClass::CannotSeparate,
    })
}

#[derive(Clone, Debug)]
pub struct NaiveReceiverOutcome {
    pub acceptance: AcceptanceSet,
    pub result: SolveResult,
    pub separating: bool,
    /// Both options are the single experiment with all mass at `1/l(μ)`,
    /// priced at `l(μ)`.
    pub pools_at_threshold: bool,
}

impl NaiveReceiverOutcome {
    /// Separating exactly when `μ ≤ 2 − 1/π*`, pooling at `1/l(μ)` otherwise.
    pub fn dichotomy_holds(&self, p: &MarketParams) -> bool {
        let should_separate = p.mu <= p.separation_cutoff();
        if should_separate {
            self.separating
        } else {
            !self.separating && self.pools_at_threshold
        }
    }
}

/// Geometric grid `1/l(μ)·r^k`, `k = 0..grid_size`, with `r = 1 + 4/grid_size`,
/// plus `∞`.
pub fn naive_acceptance_grid(p: &MarketParams, grid_size: usize) -> Result<AcceptanceSet> {
    p.require_pessimistic()?;
    if grid_size == 0 {
        return Err(Error::Config("grid_size must be at least 1".into()));
    }
    let base = p.l_mu.recip();
    let ratio = Q::one() + Q::from_integer(4.into()) / Q::from_integer(grid_size.into());
    let mut signals = Vec::with_capacity(grid_size + 1);
    let mut point = base;
    for _ in 0..grid_size {
        signals.push(Signal::Finite(point.clone()));
        point *= &ratio;
    }
    signals.push(Signal::Infinite);
    AcceptanceSet::new(signals)
}

/// Receiver who accepts every signal whose face-value posterior clears `π*`.
///
/// On a revenue tie the separating menu is reported.
pub fn naive_receiver_solve(p: &MarketParams, grid_size: usize) -> Result<NaiveReceiverOutcome> {
    let acceptance = naive_acceptance_grid(p, grid_size)?;
    let result = solve_revenue_max_with(&acceptance, p, TieBreak::MinRent)?;
    let separating = result.regime.is_separating();
    let threshold = Signal::Finite(p.l_mu.recip());
    let pools_at_threshold = {
        let a = &result.allocation;
        a.signals.iter().zip(a.high.iter().zip(&a.low)).all(|(e, (x, y))| {
            if *e == threshold {
                x.is_one() && y.is_one()
            } else {
                x.is_zero() && y.is_zero()
            }
        }) && result.menu.high.price == p.l_mu
            && result.menu.low.price == p.l_mu
    };
    Ok(NaiveReceiverOutcome { acceptance, result, separating, pools_at_threshold })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingletonRent {
    pub signal: Signal,
    #[serde(with = "crate::rational::frac")]
    pub rent: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SenderOptimum {
    pub best: Signal,
    #[serde(with = "crate::rational::frac")]
    pub rent: Q,
    pub schedule: Vec<SingletonRent>,
}

/// Largest high-type rent among optimal menus on the singleton `{e}`.
pub fn singleton_rent(e: &Signal, p: &MarketParams) -> Result<Q> {
    let set = AcceptanceSet::new([e.clone()])?;
    let all = solve_revenue_max_all(&set, p)?;
    Ok(all.into_iter().map(|r| r.welfare.rent_high).max().unwrap_or_else(Q::zero))
}

/// Rent schedule over singleton acceptance thresholds, read from the
/// closed-form branches rather than the LP.
pub fn singleton_rent_formula(e: &Signal, p: &MarketParams) -> Q {
    let one = Q::one();
    let Signal::Finite(v) = e else { return Q::zero() };
    let inv_mu = p.mu.recip();
    let inv_l = p.l_mu.recip();
    if *v <= one || *v > inv_mu {
        Q::zero()
    } else if *v <= inv_l {
        (v - &one) * &p.l_mu
    } else {
        one - v.recip()
    }
}

/// Maximum attainable high-type rent over singleton thresholds.
pub fn sender_optimal_rent(p: &MarketParams) -> Q {
    let one = Q::one();
    if p.l_mu.recip() < p.mu.recip() {
        one - &p.mu
    } else {
        &p.l_mu * (&one - &p.mu) / &p.mu
    }
}

/// Evaluates singleton acceptance sets and returns the rent-maximizing one.
pub fn sender_optimal_search(p: &MarketParams, candidates: &[Signal]) -> Result<SenderOptimum> {
    p.require_pessimistic()?;
    if candidates.is_empty() {
        return Err(Error::Config("empty candidate list".into()));
    }
    let mut schedule = Vec::with_capacity(candidates.len());
    for e in candidates {
        let rent = if matches!(e, Signal::Finite(v) if *v < Q::one()) { Q::zero() } else { singleton_rent(e, p)? };
        schedule.push(SingletonRent { signal: e.clone(), rent });
    }
    let mut best = &schedule[0];
    for s in &schedule[1..] {
        if s.rent > best.rent {
            best = s;
        }
    }
    Ok(SenderOptimum { best: best.signal.clone(), rent: best.rent.clone(), schedule: schedule.clone() })
}

/// All state-h mass at `1/l(μ)`, leaving the receiver exactly indifferent.
pub fn kg_menu(p: &MarketParams) -> Result<Experiment> {
    p.require_pessimistic()?;
    Experiment::new([(Signal::Finite(p.l_mu.recip()), Q::one())])
}

/// The KG experiment offered to both types at price `l(μ)`.
pub fn kg_pooling_menu(p: &MarketParams) -> Result<Menu> {
    let x = kg_menu(p)?;
    let opt = MenuOption::new(x, p.l_mu.clone())?;
    Ok(Menu::new(opt.clone(), opt))
}

/// Certifier-optimal menu when the receiver accepts the uninformative signal.
pub fn certifier_optimal_uninformative(p: &MarketParams, allow_uninformative: bool) -> Result<(Menu, AcceptanceSet)> {
    p.require_pessimistic()?;
    if !allow_uninformative {
        return Err(Error::InvalidAcceptanceSet("e = 1 requires allow_uninformative".into()));
    }
    let set = AcceptanceSet::with_uninformative([Signal::one()])?;
    let l = p.l_mu.clone();
    let high = Experiment::new([(Signal::one(), Q::one())])?;
    let low = Experiment::new([(Signal::one(), l.clone()), (Signal::Infinite, Q::one() - &l)])?;
    let menu = Menu::new(MenuOption::new(high, Q::one())?, MenuOption::new(low, l)?);
    Ok((menu, set))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimisticOutcome {
    pub regime: RegimeLabel,
    pub menu: Menu,
    pub phi_accepted: bool,
    pub acceptance: Vec<Signal>,
    #[serde(with = "crate::rational::frac")]
    pub revenue: Q,
    #[serde(with = "crate::rational::frac_opt", skip_serializing_if = "Option::is_none")]
    pub receiver_payoff: Option<Q>,
}

/// The two outcomes available when the receiver already accepts on the prior:
/// no certification, or an uninformative test sold to both types at price 1.
pub fn optimistic_receiver_outcomes(p: &MarketParams) -> Result<[OptimisticOutcome; 2]> {
    if p.is_pessimistic() {
        return Err(Error::NotOptimistic { mu: format_rational(&p.mu), pi_star: format_rational(&p.pi_star) });
    }
    let payoff = receiver_payoff(p, &Q::one(), &Q::one());
    let no_trade = OptimisticOutcome {
        regime: RegimeLabel::NoTrade,
        menu: Menu::zero(),
        phi_accepted: true,
        acceptance: Vec::new(),
        revenue: Q::zero(),
        receiver_payoff: payoff.clone(),
    };
    let x = Experiment::new([(Signal::one(), Q::one())])?;
    let opt = MenuOption::new(x, Q::one())?;
    let uninformative = OptimisticOutcome {
        regime: RegimeLabel::Uninformative,
        menu: Menu::new(opt.clone(), opt),
        phi_accepted: false,
        acceptance: vec![Signal::one()],
        revenue: Q::one(),
        receiver_payoff: payoff,
    };
    Ok([no_trade, uninformative])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{posterior, ReceiverUtilities};
    use crate::obedience::{check_obedience, menu_revenue};
    use crate::optimizer::solve_revenue_max;
    use crate::rational::{q, qi};

    fn sig(s: &str) -> Signal {
        s.parse().unwrap()
    }

    fn set(items: &[&str]) -> AcceptanceSet {
        AcceptanceSet::parse_list(items, false).unwrap()
    }

    fn base() -> MarketParams {
        MarketParams::new(q(1, 4), q(1, 2)).unwrap()
    }

    #[test]
    fn classify_examples() {
        let p = base();
        assert_eq!(solve_revenue_max(&set(&["5"]), &p).unwrap().regime, RegimeLabel::Separating);
        assert_eq!(solve_revenue_max(&set(&["3"]), &p).unwrap().regime, RegimeLabel::KgPooling);
        let r = solve_revenue_max(&set(&["2", "1/2"]), &p).unwrap();
        assert_eq!(classify_result(&r), RegimeLabel::BadNews);
        assert_eq!(solve_revenue_max(&set(&["1/2"]), &p).unwrap().regime, RegimeLabel::Degenerate);
    }

    #[test]
    fn labels_serialize_hyphenated() {
        let labels: Vec<String> = [
            RegimeLabel::Separating,
            RegimeLabel::KgPooling,
            RegimeLabel::PartialPooling,
            RegimeLabel::BadNews,
            RegimeLabel::Degenerate,
            RegimeLabel::Uninformative,
            RegimeLabel::NoTrade,
        ]
        .iter()
        .map(|l| {
            let s = serde_json::to_string(l).unwrap();
            assert_eq!(s.trim_matches('"'), l.as_str());
            l.to_string()
        })
        .collect();
        assert_eq!(
            labels,
            ["separating", "kg-pooling", "partial-pooling", "bad-news", "degenerate", "uninformative", "no-trade"]
        );
    }

    #[test]
    fn separating_threshold_examples() {
        let p = base();
        assert_eq!(separating_threshold(&set(&["5"]), &p).unwrap(), SeparationClass::MustSeparate);
        assert_eq!(separating_threshold(&set(&["4"]), &p).unwrap(), SeparationClass::MaySeparate);
        assert_eq!(separating_threshold(&set(&["2", "1/2"]), &p).unwrap(), SeparationClass::CannotSeparate);
        let r = solve_revenue_max(&set(&["2", "1/2"]), &p).unwrap();
        assert!(!r.regime.is_separating());
        let inf_only = AcceptanceSet::new([Signal::Infinite]).unwrap();
        assert_eq!(separating_threshold(&inf_only, &p).unwrap(), SeparationClass::MustSeparate);
    }

    #[test]
    fn naive_receiver_examples() {
        let p = base();
        let out = naive_receiver_solve(&p, 8).unwrap();
        assert!(!out.separating);
        assert!(out.pools_at_threshold);
        assert_eq!(out.result.regime, RegimeLabel::KgPooling);
        assert_eq!(out.result.revenue(), &q(1, 3));
        assert!(out.dichotomy_holds(&p));

        let p = MarketParams::new(q(1, 2), q(4, 5)).unwrap();
        let out = naive_receiver_solve(&p, 8).unwrap();
        assert!(out.separating);
        assert_eq!(out.result.revenue(), &q(1, 2));

        let p = MarketParams::new(q(9, 16), q(4, 5)).unwrap();
        let out = naive_receiver_solve(&p, 8).unwrap();
        assert!(out.separating);
        assert!(out.dichotomy_holds(&p));
    }

    #[test]
    fn naive_receiver_label_stable_under_refinement() {
        for (mu, pi) in [(q(1, 4), q(1, 2)), (q(1, 2), q(4, 5)), (q(3, 4), q(4, 5))] {
            let p = MarketParams::new(mu, pi).unwrap();
            let a = naive_receiver_solve(&p, 4).unwrap();
            let b = naive_receiver_solve(&p, 8).unwrap();
            assert_eq!(a.result.regime, b.result.regime);
            assert_eq!(a.result.revenue(), b.result.revenue());
        }
    }

    #[test]
    fn naive_receiver_rejects_optimism() {
        assert!(naive_receiver_solve(&MarketParams::new(q(3, 5), q(1, 2)).unwrap(), 4).is_err());
    }

    #[test]
    fn sender_optimal_examples() {
        let p = base();
        let cands: Vec<Signal> = ["2", "3", "7/2", "4", "9/2", "6"].iter().map(|s| sig(s)).collect();
        let best = sender_optimal_search(&p, &cands).unwrap();
        assert_eq!(best.best, sig("4"));
        assert_eq!(best.rent, q(3, 4));
        assert_eq!(best.rent, sender_optimal_rent(&p));
        assert_eq!(singleton_rent(&sig("7/2"), &p).unwrap(), q(5, 7));
        assert_eq!(singleton_rent(&sig("2"), &p).unwrap(), q(1, 3));
        assert!(sender_optimal_search(&p, &[]).is_err());
    }

    #[test]
    fn sender_optimum_when_threshold_exceeds_inverse_prior() {
        // μ = 1/2, π* = 4/5: l = 1/4, so 1/l = 4 ≥ 1/μ = 2.
        let p = MarketParams::new(q(1, 2), q(4, 5)).unwrap();
        let cands: Vec<Signal> = ["3/2", "2", "5/2", "3"].iter().map(|s| sig(s)).collect();
        let best = sender_optimal_search(&p, &cands).unwrap();
        assert_eq!(best.best, sig("2"));
        assert_eq!(best.rent, q(1, 4));
        assert_eq!(best.rent, sender_optimal_rent(&p));
    }

    #[test]
    fn kg_examples() {
        let p = base();
        let x = kg_menu(&p).unwrap();
        assert_eq!(x.high_state_mass(&sig("3")), qi(1));
        assert_eq!(x.low_state_mass(&sig("3")), p.l_mu);
        assert_eq!(posterior(&p.mu, &sig("3")), p.pi_star);

        let p = MarketParams::new(q(1, 3), q(1, 2)).unwrap();
        assert_eq!(kg_menu(&p).unwrap().atoms().keys().next(), Some(&sig("2")));

        let menu = kg_pooling_menu(&p).unwrap();
        let e = AcceptanceSet::new([sig("2")]).unwrap();
        let r = check_obedience(&menu, &e, &p);
        assert!(r.overall());
        assert!(r.receiver_obedience.binding());
    }

    #[test]
    fn uninformative_certifier_optimum() {
        let p = base();
        let (menu, e) = certifier_optimal_uninformative(&p, true).unwrap();
        assert_eq!(menu_revenue(&menu, &p), q(1, 2));
        let r = check_obedience(&menu, &e, &p);
        assert!(r.overall());
        assert!(r.receiver_obedience.binding());
        assert!(certifier_optimal_uninformative(&p, false).is_err());
        for s in ["2", "3", "4", "6"] {
            let single = solve_revenue_max(&set(&[s]), &p).unwrap();
            assert!(menu_revenue(&menu, &p) > *single.revenue());
        }
    }

    #[test]
    fn optimistic_outcomes() {
        let u = ReceiverUtilities::new(qi(1), qi(0), qi(1), qi(0)).unwrap();
        let p = MarketParams::with_utilities(q(3, 5), u).unwrap();
        let [no_trade, paid] = optimistic_receiver_outcomes(&p).unwrap();
        assert_eq!(paid.revenue, qi(1));
        assert_eq!(paid.menu.high.price, qi(1));
        assert_eq!(paid.menu.low.price, qi(1));
        assert_eq!(no_trade.regime, RegimeLabel::NoTrade);
        assert_eq!(no_trade.receiver_payoff, Some(q(3, 5)));
        assert!(optimistic_receiver_outcomes(&base()).is_err());
    }
}
