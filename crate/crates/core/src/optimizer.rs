//! Revenue-maximizing obedient menus for a finite acceptance set.
//!
//! With low-type IR binding, the certifier's problem becomes a linear program
//! over the on-set state-h masses of the two offered experiments:
//! `x_e = σ_h(e|h)` and `y_e = σ_l(e|h)` for each accepted `e`.
//!
//! ```text
//! max  μ·Σx_e + Σ(1/e − μ)·y_e
//! s.t. Σx_e ≤ 1, Σx_e/e ≤ 1, Σy_e ≤ 1, Σy_e/e ≤ 1
//!      y_e/e ≤ l(μ)·x_e                      for every accepted e
//!      Σ(1−1/e)x_e ≥ Σ(1−1/e)y_e ≥ 0
//! ```
//!
//! Prices are recovered as `ρ_h = Σx_e − Σ(1−1/e)y_e` and `ρ_l = Σy_e/e`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::equilibrium::{classify, RegimeLabel};
use crate::error::{Error, Result};
use crate::model::{AcceptanceSet, Experiment, MarketParams, Menu, MenuOption, Signal};
use crate::obedience::{welfare, WelfareAccount};
use crate::rational::{format_rational, Q};
use crate::simplex::{maximize_lex, LinearProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRow {
    pub name: String,
    pub coeffs: Vec<Q>,
    pub rhs: Q,
}

/// The linear program for one acceptance set. Variables are ordered
/// `x_{e_1..e_n}` then `y_{e_1..e_n}`, with signals ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpInstance {
    pub signals: Vec<Signal>,
    pub mu: Q,
    pub l_mu: Q,
    pub objective: Vec<Q>,
    pub rows: Vec<ConstraintRow>,
}

impl LpInstance {
    pub fn num_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn num_vars(&self) -> usize {
        2 * self.signals.len()
    }

    pub fn x_index(&self, i: usize) -> usize {
        i
    }

    pub fn y_index(&self, i: usize) -> usize {
        self.signals.len() + i
    }

    pub fn row(&self, name: &str) -> Option<&ConstraintRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_program(&self) -> LinearProgram {
        LinearProgram {
            rows: self.rows.iter().map(|r| r.coeffs.clone()).collect(),
            rhs: self.rows.iter().map(|r| r.rhs.clone()).collect(),
        }
    }

    /// Rent weights `(1 − 1/e)` on the `y` block; zero on `x`.
    pub fn rent_objective(&self) -> Vec<Q> {
        let n = self.signals.len();
        let mut c = vec![Q::zero(); 2 * n];
        for (i, e) in self.signals.iter().enumerate() {
            c[n + i] = e.rent_weight();
        }
        c
    }

    pub fn objective_value(&self, values: &[Q]) -> Q {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Whether `values` satisfies every row and nonnegativity, exactly.
    pub fn is_feasible(&self, values: &[Q]) -> bool {
        values.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|r| {
                let lhs: Q = r.coeffs.iter().zip(values).map(|(a, v)| a * v).sum();
                lhs <= r.rhs
            })
    }
}

/// Builds the revenue LP. Requires a pessimistic receiver and a nonempty set.
pub fn build_lp(set: &AcceptanceSet, p: &MarketParams) -> Result<LpInstance> {
    p.require_pessimistic()?;
    if set.is_empty() {
        return Err(Error::InvalidAcceptanceSet("empty acceptance set".into()));
    }
    let signals: Vec<Signal> = set.iter().cloned().collect();
    let n = signals.len();
    let zero_row = || vec![Q::zero(); 2 * n];

    let mut objective = zero_row();
    for (i, e) in signals.iter().enumerate() {
        objective[i] = p.mu.clone();
        objective[n + i] = e.inv() - &p.mu;
    }

    let mut rows = Vec::with_capacity(n + 6);
    let mut push = |name: String, coeffs: Vec<Q>, rhs: Q| rows.push(ConstraintRow { name, coeffs, rhs });

    let mut high_h = zero_row();
    let mut high_l = zero_row();
    let mut low_h = zero_row();
    let mut low_l = zero_row();
    for (i, e) in signals.iter().enumerate() {
        high_h[i] = Q::one();
        high_l[i] = e.inv();
        low_h[n + i] = Q::one();
        low_l[n + i] = e.inv();
    }
    push("high_state_h".into(), high_h, Q::one());
    push("high_state_l".into(), high_l, Q::one());
    push("low_state_h".into(), low_h, Q::one());
    push("low_state_l".into(), low_l, Q::one());

    for (i, e) in signals.iter().enumerate() {
        let mut row = zero_row();
        row[i] = -p.l_mu.clone();
        row[n + i] = e.inv();
        push(format!("obedience[{e}]"), row, Q::zero());
    }

    let mut ic = zero_row();
    let mut ic_floor = zero_row();
    for (i, e) in signals.iter().enumerate() {
        let w = e.rent_weight();
        ic[i] = -w.clone();
        ic[n + i] = w.clone();
        ic_floor[n + i] = -w;
    }
    push("ic_high".into(), ic, Q::zero());
    push("ic_floor".into(), ic_floor, Q::zero());

    Ok(LpInstance { signals, mu: p.mu.clone(), l_mu: p.l_mu.clone(), objective, rows })
}

/// On-set masses of the two experiments, aligned with `signals`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub signals: Vec<Signal>,
    /// `σ_h(e|h)` on each accepted signal.
    pub high: Vec<Q>,
    /// `σ_l(e|h)` on each accepted signal.
    pub low: Vec<Q>,
}

impl Allocation {
    pub fn from_values(signals: &[Signal], values: &[Q]) -> Self {
        let n = signals.len();
        Allocation { signals: signals.to_vec(), high: values[..n].to_vec(), low: values[n..2 * n].to_vec() }
    }

    pub fn zero(signals: &[Signal]) -> Self {
        let n = signals.len();
        Allocation { signals: signals.to_vec(), high: vec![Q::zero(); n], low: vec![Q::zero(); n] }
    }

    pub fn values(&self) -> Vec<Q> {
        self.high.iter().chain(&self.low).cloned().collect()
    }

    pub fn high_total(&self) -> Q {
        self.high.iter().sum()
    }

    pub fn low_total(&self) -> Q {
        self.low.iter().sum()
    }

    pub fn high_support(&self) -> Vec<Signal> {
        support(&self.signals, &self.high)
    }

    pub fn low_support(&self) -> Vec<Signal> {
        support(&self.signals, &self.low)
    }

    /// High-type rent `Σ(1−1/e)·y_e`.
    pub fn rent_high(&self) -> Q {
        self.signals.iter().zip(&self.low).map(|(e, y)| e.rent_weight() * y).sum()
    }
}

fn support(signals: &[Signal], masses: &[Q]) -> Vec<Signal> {
    signals.iter().zip(masses).filter(|(_, m)| !m.is_zero()).map(|(e, _)| e.clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOptimum {
    pub allocation: Allocation,
    pub objective: Q,
}

/// Which optimal vertex to report when the optimum is not unique.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// The vertex Bland's rule reaches first.
    #[default]
    FirstVertex,
    /// Among optimal menus, the one leaving the high type the least rent.
    MinRent,
    /// Among optimal menus, the one leaving the high type the most rent.
    MaxRent,
}

/// Solves the LP exactly by primal simplex under Bland's rule.
pub fn solve_lp(lp: &LpInstance) -> LpOptimum {
    solve_lp_with(lp, TieBreak::FirstVertex)
}

pub fn solve_lp_with(lp: &LpInstance, tie: TieBreak) -> LpOptimum {
    let mut objectives = vec![lp.objective.clone()];
    match tie {
        TieBreak::FirstVertex => {}
        TieBreak::MinRent => objectives.push(lp.rent_objective().into_iter().map(|c| -c).collect()),
        TieBreak::MaxRent => objectives.push(lp.rent_objective()),
    }
    // The origin is feasible and every variable is boxed, so neither
    // infeasibility nor unboundedness can occur.
    let sol = maximize_lex(&lp.to_program(), &objectives).expect("revenue LP is feasible and bounded");
    LpOptimum { allocation: Allocation::from_values(&lp.signals, &sol.values), objective: sol.objectives[0].clone() }
}

/// `(ρ_h, ρ_l)` with the low type's IR binding.
pub fn recover_prices(alloc: &Allocation) -> (Q, Q) {
    let mut rho_h = Q::zero();
    let mut rho_l = Q::zero();
    for ((e, x), y) in alloc.signals.iter().zip(&alloc.high).zip(&alloc.low) {
        rho_h += x - e.rent_weight() * y;
        rho_l += y * e.inv();
    }
    (rho_h, rho_l)
}

/// Places an off-set residual with state-h mass `rh` and state-l mass `rl`.
///
/// The common part `min(rh, rl)` goes to `e = 1`, the state-h excess to
/// `e = ∞`, and the state-l excess stays implicit at `e = 0`. When 1 or ∞ are
/// themselves accepted, a finite atom off the set is used instead.
fn place_residual(rh: &Q, rl: &Q, set: &AcceptanceSet) -> Result<Vec<(Signal, Q)>> {
    let mut atoms = Vec::new();
    if rh.is_zero() {
        return Ok(atoms);
    }
    let one = Signal::one();
    let inf = Signal::Infinite;
    if !set.contains(&one) && !set.contains(&inf) {
        let common = rh.min(rl).clone();
        if !common.is_zero() {
            atoms.push((one, common.clone()));
        }
        if rh > &common {
            atoms.push((inf, rh - &common));
        }
        return Ok(atoms);
    }
    if !set.contains(&inf) {
        atoms.push((inf, rh.clone()));
        return Ok(atoms);
    }
    // ∞ is accepted: one finite atom e' ≥ max(rh/rl, 1) with state-l mass rh/e' ≤ rl.
    if rl.is_zero() {
        return Err(Error::ResidualPlacement(format!(
            "state-h residual {} has no state-l mass and e = inf is accepted",
            format_rational(rh)
        )));
    }
    let floor = (rh / rl).max(Q::one());
    let mut candidate = floor.ceil();
    loop {
        let e = Signal::Finite(candidate.clone());
        if !set.contains(&e) {
            atoms.push((e, rh.clone()));
            return Ok(atoms);
        }
        candidate += Q::one();
    }
}

fn materialize_experiment(signals: &[Signal], masses: &[Q], set: &AcceptanceSet) -> Result<Experiment> {
    let total: Q = masses.iter().sum();
    if total.is_zero() {
        return Ok(Experiment::phi());
    }
    let low: Q = signals.iter().zip(masses).map(|(e, m)| m * e.inv()).sum();
    let mut atoms: Vec<(Signal, Q)> =
        signals.iter().cloned().zip(masses.iter().cloned()).filter(|(_, m)| !m.is_zero()).collect();
    atoms.extend(place_residual(&(Q::one() - total), &(Q::one() - low), set)?);
    Experiment::new(atoms)
}

/// Turns an LP allocation into a priced menu; zero-mass options become Φ.
pub fn materialize_menu(alloc: &Allocation, set: &AcceptanceSet) -> Result<Menu> {
    let (rho_h, rho_l) = recover_prices(alloc);
    let high = materialize_experiment(&alloc.signals, &alloc.high, set)?;
    let low = materialize_experiment(&alloc.signals, &alloc.low, set)?;
    let high = if high.is_phi() { MenuOption::phi() } else { MenuOption::new(high, rho_h)? };
    let low = if low.is_phi() { MenuOption::phi() } else { MenuOption::new(low, rho_l)? };
    Ok(Menu::new(high, low))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Lp,
    ClosedForm,
    SupportEnum,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::Lp => "lp",
            SolverPath::ClosedForm => "closed-form",
            SolverPath::SupportEnum => "support-enum",
        }
    }
}

impl fmt::Display for SolverPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(SolverPath::Lp),
            "closed-form" => Ok(SolverPath::ClosedForm),
            "support-enum" => Ok(SolverPath::SupportEnum),
            other => Err(Error::Config(format!("unknown solver path `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    #[serde(serialize_with = "serialize_set")]
    pub acceptance: AcceptanceSet,
    pub menu: Menu,
    #[serde(flatten)]
    pub welfare: WelfareAccount,
    pub regime: RegimeLabel,
    pub solver_path: SolverPath,
    /// Optimal LP objective; equals the revenue.
    #[serde(with = "crate::rational::frac")]
    pub certificate: Q,
    #[serde(skip)]
    pub allocation: Allocation,
}

fn serialize_set<S: Serializer>(set: &AcceptanceSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.to_strings())
}

impl SolveResult {
    pub fn revenue(&self) -> &Q {
        &self.welfare.revenue
    }

    pub fn from_allocation(
        alloc: Allocation,
        objective: Q,
        set: &AcceptanceSet,
        p: &MarketParams,
        path: SolverPath,
    ) -> Result<Self> {
        let menu = materialize_menu(&alloc, set)?;
        let welfare = welfare(&menu, set, p);
        debug_assert_eq!(welfare.revenue, objective, "revenue must equal the LP objective");
        let regime = classify(&alloc, &objective);
        Ok(SolveResult {
            acceptance: set.clone(),
            menu,
            welfare,
            regime,
            solver_path: path,
            certificate: objective,
            allocation: alloc,
        })
    }
}

fn all_below_one(set: &AcceptanceSet) -> bool {
    set.iter().all(|e| matches!(e, Signal::Finite(v) if *v < Q::one()))
}

/// Revenue-maximizing obedient menu via the exact LP.
pub fn solve_revenue_max(set: &AcceptanceSet, p: &MarketParams) -> Result<SolveResult> {
    solve_revenue_max_with(set, p, TieBreak::FirstVertex)
}

pub fn solve_revenue_max_with(set: &AcceptanceSet, p: &MarketParams, tie: TieBreak) -> Result<SolveResult> {
    let lp = build_lp(set, p)?;
    if all_below_one(set) {
        let alloc = Allocation::zero(&lp.signals);
        return SolveResult::from_allocation(alloc, Q::zero(), set, p, SolverPath::Lp);
    }
    let opt = solve_lp_with(&lp, tie);
    if opt.objective.is_positive() {
        debug_assert!(opt.allocation.high_total().is_one(), "positive revenue needs full high-type acceptance");
    }
    SolveResult::from_allocation(opt.allocation, opt.objective, set, p, SolverPath::Lp)
}

/// Every distinct optimal menu reachable by the rent tie-breaks, least rent first.
pub fn solve_revenue_max_all(set: &AcceptanceSet, p: &MarketParams) -> Result<Vec<SolveResult>> {
    let low = solve_revenue_max_with(set, p, TieBreak::MinRent)?;
    let high = solve_revenue_max_with(set, p, TieBreak::MaxRent)?;
    if low.allocation == high.allocation {
        Ok(vec![low])
    } else {
        Ok(vec![low, high])
    }
}

/// Regimes of the two-signal closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinaryRegime {
    /// Obedience binds at both signals; low type pays `l(μ)·e_l`-weighted price.
    TwoTier,
    /// Both options share the high type's split; low option scaled by `e_l·l(μ)`.
    PriceDiscrimination,
    /// A single pooled experiment with all mass on `e_h`, priced at `1/e_h`.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryClosedForm {
    pub regime: BinaryRegime,
    /// Other regimes whose formulas are also optimal on a regime boundary.
    pub also_optimal: Vec<BinaryRegime>,
    pub allocation: Allocation,
    pub menu: Menu,
    pub revenue: Q,
}

struct BinaryRegimeTests {
    two_tier: bool,
    pooled: bool,
    ab_boundary: bool,
    ac_boundary: bool,
    bc_boundary: bool,
}

fn binary_regime_tests(e_h: &Q, e_l: &Q, p: &MarketParams) -> BinaryRegimeTests {
    let one = Q::one();
    let l = &p.l_mu;
    let mu = &p.mu;
    let inv_l = l.recip();
    let inv_mu = mu.recip();
    let pool_gain = mu + (&one - mu) * l * e_l;
    let below_both = e_h <= &inv_l && e_h <= &inv_mu;
    let scaled = e_h * &pool_gain;
    let two_tier = below_both && scaled <= one;
    let in_middle = e_h > &inv_l && e_h <= &inv_mu;
    let pooled = in_middle && e_h.recip() > pool_gain;
    BinaryRegimeTests {
        two_tier,
        pooled,
        ab_boundary: below_both && scaled == one,
        ac_boundary: *e_h == inv_l && e_h <= &inv_mu && scaled <= one,
        bc_boundary: in_middle && e_h.recip() == pool_gain,
    }
}

fn binary_allocation(regime: BinaryRegime, e_h: &Q, e_l: &Q, l: &Q) -> (Q, Q, Q, Q) {
    let one = Q::one();
    let split_h = e_h * (&one - e_l) / (e_h - e_l);
    let split_l = e_l * (e_h - &one) / (e_h - e_l);
    match regime {
        BinaryRegime::TwoTier => {
            let den = &one - l * e_h * e_l;
            let x_h = &split_h * (&one - l * e_l) / &den;
            let x_l = &split_l * (&one - l * e_h) / &den;
            let y_h = e_h * l * &x_h;
            let y_l = e_l * l * &x_l;
            (x_h, x_l, y_h, y_l)
        }
        BinaryRegime::PriceDiscrimination => {
            let beta = e_l * l;
            let y_h = &beta * &split_h;
            let y_l = &beta * &split_l;
            (split_h, split_l, y_h, y_l)
        }
        BinaryRegime::Pooled => (one.clone(), Q::zero(), one, Q::zero()),
    }
}

/// Closed-form optimal menu for `E = {e_h, e_l}` with `e_h > 1 > e_l > 0`.
///
/// The state-l residual of the low option is the row-sum complement, placed
/// off the set by the usual residual rule.
pub fn closed_form_binary(e_h: &Signal, e_l: &Signal, p: &MarketParams) -> Result<BinaryClosedForm> {
    p.require_pessimistic()?;
    let (Signal::Finite(eh), Signal::Finite(el)) = (e_h, e_l) else {
        return Err(Error::BinaryOrdering);
    };
    let one = Q::one();
    if !(eh > &one && el < &one && el.is_positive()) {
        return Err(Error::BinaryOrdering);
    }
    let tests = binary_regime_tests(eh, el, p);
    let regime = if tests.two_tier {
        BinaryRegime::TwoTier
    } else if tests.pooled {
        BinaryRegime::Pooled
    } else {
        BinaryRegime::PriceDiscrimination
    };
    let mut also_optimal = Vec::new();
    let mut note = |r: BinaryRegime| {
        if r != regime && !also_optimal.contains(&r) {
            also_optimal.push(r);
        }
    };
    if tests.ab_boundary {
        note(BinaryRegime::TwoTier);
        note(BinaryRegime::PriceDiscrimination);
    }
    if tests.ac_boundary {
        note(BinaryRegime::TwoTier);
        note(BinaryRegime::Pooled);
    }
    if tests.bc_boundary {
        note(BinaryRegime::PriceDiscrimination);
        note(BinaryRegime::Pooled);
    }
    also_optimal.sort();

    let (x_h, x_l, y_h, y_l) = binary_allocation(regime, eh, el, &p.l_mu);
    // Signals ascending: e_l first.
    let allocation = Allocation { signals: vec![e_l.clone(), e_h.clone()], high: vec![x_l, x_h], low: vec![y_l, y_h] };
    let set = AcceptanceSet::new([e_h.clone(), e_l.clone()])?;
    let menu = materialize_menu(&allocation, &set)?;
    let revenue = crate::obedience::menu_revenue(&menu, p);
    Ok(BinaryClosedForm { regime, also_optimal, allocation, menu, revenue })
}

/// Revenue formula of a binary regime, used to check boundary multiplicity.
pub fn binary_regime_revenue(regime: BinaryRegime, e_h: &Q, e_l: &Q, p: &MarketParams) -> Q {
    let (x_h, x_l, y_h, y_l) = binary_allocation(regime, e_h, e_l, &p.l_mu);
    &p.mu * (x_h + x_l) + (e_h.recip() - &p.mu) * y_h + (e_l.recip() - &p.mu) * y_l
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPooling {
    pub allocation: Allocation,
    pub menu: Menu,
    pub revenue: Q,
}

/// Three-signal partial-pooling menu on `{ē, e_h, e_l}` with `ē > e_h > 1 > e_l`.
///
/// The high option puts mass on all three signals; the low option only on
/// `e_h` (obedience binding) and `e_l` (at the cap `β = e_l·l(μ)`).
///
/// The menu is always obedient but is not always optimal on `{ē, e_h, e_l}`:
/// the LP can earn more by leaving some of the high option's state-l mass
/// off the set.
pub fn partial_pooling_menu(e_bar: &Signal, e_h: &Signal, e_l: &Signal, p: &MarketParams) -> Result<PartialPooling> {
    p.require_pessimistic()?;
    let one = Q::one();
    let (Signal::Finite(eh), Signal::Finite(el)) = (e_h, e_l) else {
        return Err(Error::ConditionsNotMet("e_h and e_l must be finite".into()));
    };
    if !(e_bar > e_h && eh > &one && el < &one && el.is_positive()) {
        return Err(Error::ConditionsNotMet("need e_bar > e_h > 1 > e_l > 0".into()));
    }
    let l = &p.l_mu;
    let mu = &p.mu;
    let inv_bar = e_bar.inv();
    let inv_h = eh.recip();
    let inv_l = el.recip();

    // Existence conditions.
    let (ratio_num, ratio_den, cap_num, cap_den) = match e_bar {
        Signal::Infinite => (eh * el, (eh - &one) + el.clone(), el + (eh - &one), el * eh),
        Signal::Finite(eb) => (
            eh * el * (eb - &one),
            eb * (eh - &one) + el * (eb - eh),
            el * (eb - eh) + eb * (eh - &one),
            (eb - &one) * el * eh,
        ),
    };
    let pooling_value = mu + (&one - mu) * l * ratio_num / ratio_den;
    if l.min(&pooling_value) < &inv_h {
        return Err(Error::ConditionsNotMet(format!(
            "min(l, pooling value) = {} < 1/e_h = {}",
            format_rational(l.min(&pooling_value)),
            format_rational(&inv_h)
        )));
    }
    if l > &(cap_num / cap_den) {
        return Err(Error::ConditionsNotMet("l(mu) exceeds the partial-pooling cap".into()));
    }

    let slope = (eh - &one) / (&one - el);
    let x_low_signal = (&one - &inv_bar) / ((&inv_l - &inv_bar) + (&inv_h - &inv_bar) / &slope);
    let x_mid = (&one - &inv_bar) / ((&inv_l - &inv_bar) * &slope + (&inv_h - &inv_bar));
    let x_top = &one - &x_low_signal - &x_mid;
    let y_mid = eh * l * &x_mid;
    let y_low_signal = el * l * &x_low_signal;

    let allocation = Allocation {
        signals: vec![e_l.clone(), e_h.clone(), e_bar.clone()],
        high: vec![x_low_signal, x_mid.clone(), x_top],
        low: vec![y_low_signal, y_mid, Q::zero()],
    };
    let revenue = mu + (&one - mu) * l * &x_mid * (eh - el) / (&one - el);
    let set = AcceptanceSet::new([e_bar.clone(), e_h.clone(), e_l.clone()])?;
    let menu = materialize_menu(&allocation, &set)?;
    Ok(PartialPooling { allocation, menu, revenue })
}

/// One restricted LP in the support enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportCandidate {
    pub high_support: Vec<usize>,
    pub low_support: Vec<usize>,
    pub optimum: LpOptimum,
}

fn subsets_up_to(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &it in items {
        let extended: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut t = s.clone();
                t.push(it);
                t
            })
            .collect();
        out.extend(extended);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn solve_restricted(lp: &LpInstance, high: &[usize], low: &[usize]) -> LpOptimum {
    let n = lp.num_signals();
    let mut cols: Vec<usize> = high.to_vec();
    cols.extend(low.iter().map(|&i| n + i));
    let program = LinearProgram {
        rows: lp.rows.iter().map(|r| cols.iter().map(|&c| r.coeffs[c].clone()).collect()).collect(),
        rhs: lp.rows.iter().map(|r| r.rhs.clone()).collect(),
    };
    let objective: Vec<Q> = cols.iter().map(|&c| lp.objective[c].clone()).collect();
    let sol = maximize_lex(&program, &[objective]).expect("restricted LP is feasible and bounded");
    let mut values = vec![Q::zero(); 2 * n];
    for (&c, v) in cols.iter().zip(sol.values) {
        values[c] = v;
    }
    LpOptimum { allocation: Allocation::from_values(&lp.signals, &values), objective: sol.objectives[0].clone() }
}

/// Solves the LP on every support with at most three high-type signals and at
/// most two low-type signals inside them. Candidates are ordered by support
/// size then lexicographically; the first best one wins.
pub fn enumerate_support_menus(set: &AcceptanceSet, p: &MarketParams) -> Result<Vec<SupportCandidate>> {
    let lp = build_lp(set, p)?;
    let indices: Vec<usize> = (0..lp.num_signals()).collect();
    let mut out = Vec::new();
    for high in subsets_up_to(&indices, 3) {
        if high.is_empty() {
            continue;
        }
        for low in subsets_up_to(&high, 2) {
            let optimum = solve_restricted(&lp, &high, &low);
            out.push(SupportCandidate { high_support: high.clone(), low_support: low, optimum });
        }
    }
    Ok(out)
}

pub fn best_support_candidate(candidates: &[SupportCandidate]) -> Option<&SupportCandidate> {
    let mut best: Option<&SupportCandidate> = None;
    for c in candidates {
        if best.is_none_or(|b| c.optimum.objective > b.optimum.objective) {
            best = Some(c);
        }
    }
    best
}

pub fn solve_by_support_enum(set: &AcceptanceSet, p: &MarketParams) -> Result<SolveResult> {
    let candidates = enumerate_support_menus(set, p)?;
    let best = best_support_candidate(&candidates).expect("nonempty acceptance set yields candidates");
    SolveResult::from_allocation(
        best.optimum.allocation.clone(),
        best.optimum.objective.clone(),
        set,
        p,
        SolverPath::SupportEnum,
    )
}

/// Solves through the two-signal closed form; only for `E = {e_h > 1, e_l < 1}`.
pub fn solve_by_closed_form(set: &AcceptanceSet, p: &MarketParams) -> Result<SolveResult> {
    let signals: Vec<&Signal> = set.iter().collect();
    let [e_l, e_h] = signals.as_slice() else {
        return Err(Error::BinaryOrdering);
    };
    let cf = closed_form_binary(e_h, e_l, p)?;
    SolveResult::from_allocation(cf.allocation, cf.revenue, set, p, SolverPath::ClosedForm)
}

pub fn closed_form_applies(set: &AcceptanceSet) -> bool {
    let signals: Vec<&Signal> = set.iter().collect();
    match signals.as_slice() {
        [Signal::Finite(lo), hi] => {
            lo.is_positive() && *lo < Q::one() && matches!(hi, Signal::Finite(h) if *h > Q::one())
        }
        _ => false,
    }
}

/// Best menu when both types must face the same single option (or Φ):
/// either a pooled experiment bought by both types, or an experiment sold to
/// the high type only. Ties go to the separating option.
pub fn solve_single_item(set: &AcceptanceSet, p: &MarketParams) -> Result<SolveResult> {
    let lp = build_lp(set, p)?;
    let n = lp.num_signals();

    let mut pooled_lp = lp.clone();
    for i in 0..n {
        let mut tie = vec![Q::zero(); 2 * n];
        tie[i] = Q::one();
        tie[n + i] = -Q::one();
        pooled_lp.rows.push(ConstraintRow {
            name: format!("pool_upper[{}]", lp.signals[i]),
            coeffs: tie.iter().map(|c| -c).collect(),
            rhs: Q::zero(),
        });
        pooled_lp.rows.push(ConstraintRow {
            name: format!("pool_lower[{}]", lp.signals[i]),
            coeffs: tie,
            rhs: Q::zero(),
        });
    }
    let pooled = solve_lp(&pooled_lp);
    let all: Vec<usize> = (0..n).collect();
    let separating = solve_restricted(&lp, &all, &[]);

    let best = if separating.objective >= pooled.objective { separating } else { pooled };
    SolveResult::from_allocation(best.allocation, best.objective, set, p, SolverPath::Lp)
}
