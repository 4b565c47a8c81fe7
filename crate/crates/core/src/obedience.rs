//! Sender IC/IR and receiver obedience for a (menu, acceptance set) pair,
//! plus revenue, rents and receiver welfare.

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::model::{AcceptanceSet, MarketParams, Menu, Signal};
use crate::rational::{format_rational, Q};

/// One constraint: `margin = lhs − rhs`, passing iff `margin ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub margin: Q,
}

impl Check {
    fn from_margin(margin: Q) -> Self {
        Check { margin }
    }

    pub fn pass(&self) -> bool {
        !self.margin.is_negative()
    }

    pub fn binding(&self) -> bool {
        self.margin.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObedienceReport {
    pub sender_ic_high: Check,
    pub sender_ic_low: Check,
    pub sender_ir_high: Check,
    pub sender_ir_low: Check,
    /// Tightest accepted atom; `None` when the acceptance set is empty.
    pub receiver_obedience: Check,
    pub tightest_signal: Option<Signal>,
}

impl ObedienceReport {
    pub fn overall(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.pass())
    }

    pub fn checks(&self) -> [(&'static str, &Check); 5] {
        [
            ("sender_ic_high", &self.sender_ic_high),
            ("sender_ic_low", &self.sender_ic_low),
            ("sender_ir_high", &self.sender_ir_high),
            ("sender_ir_low", &self.sender_ir_low),
            ("receiver_obedience", &self.receiver_obedience),
        ]
    }
}

impl Serialize for ObedienceReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(11))?;
        for (name, check) in self.checks() {
            map.serialize_entry(name, &check.pass())?;
            map.serialize_entry(&format!("{name}_margin"), &format_rational(&check.margin))?;
        }
        map.serialize_entry("overall", &self.overall())?;
        map.end()
    }
}

/// Checks a menu against an acceptance set. Violations are reported through
/// negative margins, never as errors.
///
/// Receiver obedience over every subset of accepted signals reduces to the
/// per-atom bound `σ_l(e|l) ≤ l(μ)·σ_h(e|h)`.
pub fn check_obedience(m: &Menu, set: &AcceptanceSet, p: &MarketParams) -> ObedienceReport {
    let hi = &m.high.experiment;
    let lo = &m.low.experiment;
    let (rho_h, rho_l) = (&m.high.price, &m.low.price);

    let hh = hi.high_mass_on(set);
    let lh = lo.high_mass_on(set);
    let ll = lo.low_mass_on(set);
    let hl = hi.low_mass_on(set);

    let sender_ic_high = Check::from_margin((&hh - rho_h) - (&lh - rho_l));
    let sender_ic_low = Check::from_margin((&ll - rho_l) - (&hl - rho_h));
    let sender_ir_high = Check::from_margin(&hh - rho_h);
    let sender_ir_low = Check::from_margin(&ll - rho_l);

    let mut tightest: Option<(Signal, Q)> = None;
    for e in set.iter() {
        let margin = &p.l_mu * hi.high_state_mass(e) - lo.low_state_mass(e);
        if tightest.as_ref().is_none_or(|(_, best)| margin < *best) {
            tightest = Some((e.clone(), margin));
        }
    }
    let (tightest_signal, obedience_margin) = match tightest {
        Some((e, m)) => (Some(e), m),
        None => (None, Q::zero()),
    };

    ObedienceReport {
        sender_ic_high,
        sender_ic_low,
        sender_ir_high,
        sender_ir_low,
        receiver_obedience: Check::from_margin(obedience_margin),
        tightest_signal,
    }
}

/// `μ·ρ_h + (1−μ)·ρ_l`.
pub fn menu_revenue(m: &Menu, p: &MarketParams) -> Q {
    &p.mu * &m.high.price + (Q::one() - &p.mu) * &m.low.price
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WelfareAccount {
    #[serde(with = "crate::rational::frac")]
    pub revenue: Q,
    #[serde(with = "crate::rational::frac")]
    pub rent_high: Q,
    #[serde(with = "crate::rational::frac")]
    pub rent_low: Q,
    #[serde(with = "crate::rational::frac_opt", skip_serializing_if = "Option::is_none")]
    pub receiver_payoff: Option<Q>,
    #[serde(with = "crate::rational::frac")]
    pub accept_prob_h: Q,
    #[serde(with = "crate::rational::frac")]
    pub accept_prob_l: Q,
    /// Set when the menu is not obedient with respect to the acceptance set.
    pub hypothetical: bool,
}

/// Receiver payoff when the high type is accepted with `accept_h` and the
/// low type with `accept_l`. `None` without utilities.
pub fn receiver_payoff(p: &MarketParams, accept_h: &Q, accept_l: &Q) -> Option<Q> {
    let u = p.utilities.as_ref()?;
    let one = Q::one();
    let high = accept_h * &u.v_ah_h + (&one - accept_h) * &u.v_al_h;
    let low = accept_l * &u.v_ah_l + (&one - accept_l) * &u.v_al_l;
    Some(&p.mu * high + (&one - &p.mu) * low)
}

/// Welfare under truthful selection: each type buys its own option.
pub fn welfare(m: &Menu, set: &AcceptanceSet, p: &MarketParams) -> WelfareAccount {
    let accept_prob_h = m.high.experiment.high_mass_on(set);
    let accept_prob_l = m.low.experiment.low_mass_on(set);
    let hypothetical = !check_obedience(m, set, p).overall();
    WelfareAccount {
        revenue: menu_revenue(m, p),
        rent_high: &accept_prob_h - &m.high.price,
        rent_low: &accept_prob_l - &m.low.price,
        receiver_payoff: receiver_payoff(p, &accept_prob_h, &accept_prob_l),
        accept_prob_h,
        accept_prob_l,
        hypothetical,
    }
}

/// Same acceptance set, same on-set signal distributions per type, same revenue.
pub fn outcome_equivalent(a: (&Menu, &AcceptanceSet), b: (&Menu, &AcceptanceSet), p: &MarketParams) -> bool {
    let (ma, ea) = a;
    let (mb, eb) = b;
    if ea.signals() != eb.signals() {
        return false;
    }
    let same_on_set = ea.iter().all(|e| {
        ma.high.experiment.high_state_mass(e) == mb.high.experiment.high_state_mass(e)
            && ma.low.experiment.low_state_mass(e) == mb.low.experiment.low_state_mass(e)
    });
    same_on_set && menu_revenue(ma, p) == menu_revenue(mb, p)
}
