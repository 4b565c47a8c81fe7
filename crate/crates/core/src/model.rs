//! Market primitives and the likelihood-ratio representation of experiments.
//!
//! An experiment is stored by its state-h distribution over likelihood ratios
//! `e = dσ(·|h)/dσ(·|l)`. The state-l mass of an atom is `mass / e`, and the
//! state-l residual `1 − Σ mass/e` is always booked at `e = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, in_closed_unit, in_open_unit, parse_rational, to_f64, Q};

/// Extended nonnegative likelihood ratio in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Signal {
    Finite(Q),
    Infinite,
}

impl Signal {
    pub fn finite(value: Q) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::ParseSignal(format_rational(&value)));
        }
        Ok(Signal::Finite(value))
    }

    pub fn zero() -> Self {
        Signal::Finite(Q::zero())
    }

    pub fn one() -> Self {
        Signal::Finite(Q::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Signal::Finite(v) if v.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Signal::Finite(v) if v.is_one())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Signal::Infinite)
    }

    pub fn value(&self) -> Option<&Q> {
        match self {
            Signal::Finite(v) => Some(v),
            Signal::Infinite => None,
        }
    }

    /// `1/e` with `1/∞ = 0` and `1/0 = ∞`.
    pub fn reciprocal(&self) -> Signal {
        match self {
            Signal::Infinite => Signal::zero(),
            Signal::Finite(v) if v.is_zero() => Signal::Infinite,
            Signal::Finite(v) => Signal::Finite(v.recip()),
        }
    }

    /// `1/e` as a rational for `e ∈ (0, ∞]`.
    ///
    /// Panics at `e = 0`; the zero signal never appears in an acceptance set.
    pub fn inv(&self) -> Q {
        match self {
            Signal::Infinite => Q::zero(),
            Signal::Finite(v) => {
                assert!(!v.is_zero(), "1/e requested at e = 0");
                v.recip()
            }
        }
    }

    /// `1 − 1/e`, the per-unit information rent weight.
    pub fn rent_weight(&self) -> Q {
        Q::one() - self.inv()
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Signal::Finite(v) => to_f64(v),
            Signal::Infinite => f64::INFINITY,
        }
    }
}

impl From<Q> for Signal {
    fn from(value: Q) -> Self {
        Signal::finite(value).expect("nonnegative signal")
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Finite(v) => f.write_str(&format_rational(v)),
            Signal::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Signal::Infinite);
        }
        let value = parse_rational(t).map_err(|_| Error::ParseSignal(s.to_string()))?;
        Signal::finite(value).map_err(|_| Error::ParseSignal(s.to_string()))
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverUtilities {
    #[serde(with = "crate::rational::frac")]
    pub v_ah_h: Q,
    #[serde(with = "crate::rational::frac")]
    pub v_al_h: Q,
    #[serde(with = "crate::rational::frac")]
    pub v_al_l: Q,
    #[serde(with = "crate::rational::frac")]
    pub v_ah_l: Q,
}

impl ReceiverUtilities {
    pub fn new(v_ah_h: Q, v_al_h: Q, v_al_l: Q, v_ah_l: Q) -> Result<Self> {
        let u = ReceiverUtilities { v_ah_h, v_al_h, v_al_l, v_ah_l };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_ah_h > self.v_al_h && self.v_al_l > self.v_ah_l {
            Ok(())
        } else {
            Err(Error::UtilityOrdering)
        }
    }

    /// Utilities `(1 − π*, 0, π*, 0)`, the simplest payoffs with threshold `π*`.
    pub fn normalized(pi_star: &Q) -> Self {
        ReceiverUtilities { v_ah_h: Q::one() - pi_star, v_al_h: Q::zero(), v_al_l: pi_star.clone(), v_ah_l: Q::zero() }
    }
}

/// Posterior threshold above which the receiver takes `a_h`.
pub fn derive_threshold(u: &ReceiverUtilities) -> Result<Q> {
    u.validate()?;
    let low_gain = &u.v_al_l - &u.v_ah_l;
    let high_gain = &u.v_ah_h - &u.v_al_h;
    Ok(&low_gain / (&low_gain + high_gain))
}

fn check_open_unit(name: &'static str, value: &Q) -> Result<()> {
    if in_open_unit(value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { name, value: format_rational(value) })
    }
}

/// `l(μ) = μ(1−π*) / (π*(1−μ))`.
pub fn odds_factor(mu: &Q, pi_star: &Q) -> Result<Q> {
    check_open_unit("mu", mu)?;
    check_open_unit("pi_star", pi_star)?;
    let one = Q::one();
    Ok(mu * (&one - pi_star) / (pi_star * (&one - mu)))
}

/// Naive Bayes posterior `eμ / (eμ + 1 − μ)` on the high type.
pub fn posterior(mu: &Q, e: &Signal) -> Q {
    match e {
        Signal::Infinite => Q::one(),
        Signal::Finite(v) => {
            let num = v * mu;
            let den = &num + (Q::one() - mu);
            if den.is_zero() {
                Q::zero()
            } else {
                num / den
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    AcceptHigh,
    RejectLow,
}

/// Ties go to `a_h`.
pub fn receiver_best_response(belief: &Q, pi_star: &Q) -> Action {
    if belief >= pi_star {
        Action::AcceptHigh
    } else {
        Action::RejectLow
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketParams {
    #[serde(with = "crate::rational::frac")]
    pub mu: Q,
    #[serde(with = "crate::rational::frac")]
    pub pi_star: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<ReceiverUtilities>,
    #[serde(with = "crate::rational::frac")]
    pub l_mu: Q,
}

impl MarketParams {
    pub fn new(mu: Q, pi_star: Q) -> Result<Self> {
        let l_mu = odds_factor(&mu, &pi_star)?;
        Ok(MarketParams { mu, pi_star, utilities: None, l_mu })
    }

    pub fn with_utilities(mu: Q, utilities: ReceiverUtilities) -> Result<Self> {
        let pi_star = derive_threshold(&utilities)?;
        let mut p = MarketParams::new(mu, pi_star)?;
        p.utilities = Some(utilities);
        Ok(p)
    }

    /// Attaches the normalized utilities if none are present.
    pub fn with_normalized_utilities(mut self) -> Self {
        if self.utilities.is_none() {
            self.utilities = Some(ReceiverUtilities::normalized(&self.pi_star));
        }
        self
    }

    pub fn is_pessimistic(&self) -> bool {
        self.mu < self.pi_star
    }

    pub fn require_pessimistic(&self) -> Result<()> {
        if self.is_pessimistic() {
            Ok(())
        } else {
            Err(Error::NotPessimistic { mu: format_rational(&self.mu), pi_star: format_rational(&self.pi_star) })
        }
    }

    /// `2 − 1/π*`, the naive-receiver separation cutoff on `μ`.
    pub fn separation_cutoff(&self) -> Q {
        Q::from_integer(2.into()) - self.pi_star.recip()
    }
}

/// Finite atom measure over likelihood ratios, stored by state-h masses.
///
/// The empty experiment is the no-certification option Φ.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Experiment {
    atoms: BTreeMap<Signal, Q>,
}

impl Experiment {
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Signal, Q)>,
    {
        let mut map: BTreeMap<Signal, Q> = BTreeMap::new();
        for (e, m) in atoms {
            if m.is_negative() {
                return Err(Error::InvalidExperiment(format!("negative mass at {e}")));
            }
            if m.is_zero() {
                continue;
            }
            if e.is_zero() {
                return Err(Error::InvalidExperiment("state-h mass at e = 0".into()));
            }
            *map.entry(e).or_insert_with(Q::zero) += m;
        }
        if map.is_empty() {
            return Err(Error::InvalidExperiment("no mass; use Experiment::phi()".into()));
        }
        let total: Q = map.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidExperiment(format!("state-h masses sum to {}", format_rational(&total))));
        }
        let low: Q = map.iter().map(|(e, m)| m * e.inv()).sum();
        if low > Q::one() {
            return Err(Error::InvalidExperiment(format!("state-l masses sum to {} > 1", format_rational(&low))));
        }
        Ok(Experiment { atoms: map })
    }

    /// The no-certification option Φ.
    pub fn phi() -> Self {
        Experiment::default()
    }

    pub fn is_phi(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &BTreeMap<Signal, Q> {
        &self.atoms
    }

    pub fn high_state_mass(&self, e: &Signal) -> Q {
        self.atoms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn low_state_mass(&self, e: &Signal) -> Q {
        if self.is_phi() {
            return Q::zero();
        }
        if e.is_zero() {
            let booked: Q = self.atoms.iter().map(|(s, m)| m * s.inv()).sum();
            return Q::one() - booked;
        }
        self.atoms.get(e).map(|m| m * e.inv()).unwrap_or_else(Q::zero)
    }

    /// State-l distribution including the residual at `e = 0`.
    pub fn low_state_atoms(&self) -> BTreeMap<Signal, Q> {
        let mut out = BTreeMap::new();
        if self.is_phi() {
            return out;
        }
        let residual = self.low_state_mass(&Signal::zero());
        if !residual.is_zero() {
            out.insert(Signal::zero(), residual);
        }
        for (e, m) in &self.atoms {
            let l = m * e.inv();
            if !l.is_zero() {
                out.insert(e.clone(), l);
            }
        }
        out
    }

    pub fn high_mass_on(&self, set: &AcceptanceSet) -> Q {
        set.iter().map(|e| self.high_state_mass(e)).sum()
    }

    pub fn low_mass_on(&self, set: &AcceptanceSet) -> Q {
        set.iter().map(|e| self.low_state_mass(e)).sum()
    }
}

impl Serialize for Experiment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.atoms.len()))?;
        for (e, m) in &self.atoms {
            map.serialize_entry(&e.to_string(), &format_rational(m))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Experiment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        if raw.is_empty() {
            return Ok(Experiment::phi());
        }
        let mut atoms = Vec::with_capacity(raw.len());
        for (k, v) in raw {
            let e: Signal = k.parse().map_err(serde::de::Error::custom)?;
            let m = parse_rational(&v).map_err(serde::de::Error::custom)?;
            atoms.push((e, m));
        }
        Experiment::new(atoms).map_err(serde::de::Error::custom)
    }
}

/// Signals after which the receiver plays `a_h`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AcceptanceSet {
    signals: BTreeSet<Signal>,
    allow_uninformative: bool,
}

impl AcceptanceSet {
    pub fn new<I>(signals: I) -> Result<Self>
    where
        I: IntoIterator<Item = Signal>,
    {
        Self::build(signals, false)
    }

    /// Admits the uninformative signal `e = 1`.
    pub fn with_uninformative<I>(signals: I) -> Result<Self>
    where
        I: IntoIterator<Item = Signal>,
    {
        Self::build(signals, true)
    }

    fn build<I>(signals: I, allow_uninformative: bool) -> Result<Self>
    where
        I: IntoIterator<Item = Signal>,
    {
        let signals: BTreeSet<Signal> = signals.into_iter().collect();
        if signals.iter().any(Signal::is_zero) {
            return Err(Error::InvalidAcceptanceSet("e = 0 cannot be accepted".into()));
        }
        if !allow_uninformative && signals.iter().any(Signal::is_one) {
            return Err(Error::InvalidAcceptanceSet("e = 1 requires allow_uninformative".into()));
        }
        Ok(AcceptanceSet { signals, allow_uninformative })
    }

    pub fn parse_list<S: AsRef<str>>(items: &[S], allow_uninformative: bool) -> Result<Self> {
        let signals = items.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<Signal>>>()?;
        Self::build(signals, allow_uninformative)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Signal> + '_ {
        self.signals.iter()
    }

    pub fn signals(&self) -> &BTreeSet<Signal> {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn contains(&self, e: &Signal) -> bool {
        self.signals.contains(e)
    }

    pub fn allows_uninformative(&self) -> bool {
        self.allow_uninformative
    }

    pub fn infimum(&self) -> Option<&Signal> {
        self.signals.iter().next()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.signals.iter().map(Signal::to_string).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuOption {
    pub experiment: Experiment,
    #[serde(with = "crate::rational::frac")]
    pub price: Q,
}

impl MenuOption {
    pub fn new(experiment: Experiment, price: Q) -> Result<Self> {
        if !in_closed_unit(&price) {
            return Err(Error::PriceOutOfRange(format_rational(&price)));
        }
        Ok(MenuOption { experiment, price })
    }

    pub fn phi() -> Self {
        MenuOption { experiment: Experiment::phi(), price: Q::zero() }
    }
}

/// Two priced experiments; the free option `(Φ, 0)` is always implicitly present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Menu {
    pub high: MenuOption,
    pub low: MenuOption,
}

impl Menu {
    pub fn new(high: MenuOption, low: MenuOption) -> Self {
        Menu { high, low }
    }

    pub fn zero() -> Self {
        Menu { high: MenuOption::phi(), low: MenuOption::phi() }
    }
}
