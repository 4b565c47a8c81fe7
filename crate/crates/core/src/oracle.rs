//! Independent ground truth for the optimizer at desk scale.
//!
//! `grid_search_menus` brute-forces the mass grid with integer arithmetic and
//! builds its constraints straight from the market primitives.
//! `vertex_enumerate` visits every basic solution of an [`LpInstance`] with
//! fraction-free elimination. Neither shares code with the simplex.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AcceptanceSet, MarketParams, Signal};
use crate::optimizer::LpInstance;
use crate::rational::{q, qi, Q};

pub const GRID_MAX_SIGNALS: usize = 3;
pub const VERTEX_MAX_SIGNALS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub resolution: usize,
    pub seed: u64,
    pub signal_bounds: (Q, Q),
}

impl GridSpec {
    pub fn new(resolution: usize, seed: u64, signal_bounds: (Q, Q)) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::Config(format!("grid resolution must be at least 8, got {resolution}")));
        }
        Ok(GridSpec { resolution, seed, signal_bounds })
    }

    pub fn with_resolution(resolution: usize) -> Result<Self> {
        Self::new(resolution, 0, default_signal_bounds())
    }
}

pub fn default_signal_bounds() -> (Q, Q) {
    (q(1, 10), qi(10))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridOptimum {
    pub high: Vec<Q>,
    pub low: Vec<Q>,
    pub objective: Q,
    pub resolution: usize,
}

/// `Σ coeffs·v ≤ rhs` over integer grid counts.
struct IntRow {
    coeffs: Vec<i128>,
    rhs: i128,
}

fn lcm_of_denoms<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128().ok_or_else(|| Error::Config("grid coefficients overflow i128".into()))
}

fn int_row(coeffs: &[Q], rhs: &Q, resolution: usize) -> Result<IntRow> {
    let scale = lcm_of_denoms(coeffs.iter().chain(std::iter::once(rhs)));
    let scale_q = Q::from_integer(scale);
    let coeffs = coeffs.iter().map(|c| to_i128(&(c * &scale_q).to_integer())).collect::<Result<Vec<_>>>()?;
    let rhs = to_i128(&(rhs * &scale_q * Q::from_integer(resolution.into())).to_integer())?;
    Ok(IntRow { coeffs, rhs })
}

/// Variables `[a_0..a_n, b_0..b_n]`: grid counts of the high and low options'
/// state-h masses on each accepted signal.
fn grid_rows(signals: &[Signal], p: &MarketParams, resolution: usize) -> Result<Vec<IntRow>> {
    let n = signals.len();
    let recips: Vec<Q> = signals
        .iter()
        .map(|e| match e {
            Signal::Infinite => Q::zero(),
            Signal::Finite(v) => v.recip(),
        })
        .collect();
    let one = Q::one();
    let mut rows = Vec::new();
    let mut add = |coeffs: Vec<Q>, rhs: Q| -> Result<()> {
        rows.push(int_row(&coeffs, &rhs, resolution)?);
        Ok(())
    };
    let blank = || vec![Q::zero(); 2 * n];

    // Both options are sub-probabilities on the set under either state.
    for offset in [0, n] {
        let mut under_h = blank();
        let mut under_l = blank();
        for i in 0..n {
            under_h[offset + i] = one.clone();
            under_l[offset + i] = recips[i].clone();
        }
        add(under_h, one.clone())?;
        add(under_l, one.clone())?;
    }
    // Posterior at every accepted atom clears the threshold.
    for i in 0..n {
        let mut row = blank();
        row[n + i] = recips[i].clone();
        row[i] = -p.l_mu.clone();
        add(row, Q::zero())?;
    }
    // High type prefers its option; the low option's rent weight is nonnegative.
    let mut ic = blank();
    let mut floor = blank();
    for i in 0..n {
        let w = &one - &recips[i];
        ic[i] = -w.clone();
        ic[n + i] = w.clone();
        floor[n + i] = -w;
    }
    add(ic, Q::zero())?;
    add(floor, Q::zero())?;
    Ok(rows)
}

fn compositions(dims: usize, total: i128) -> Vec<Vec<i128>> {
    let mut out = Vec::new();
    let mut cur = vec![0i128; dims];
    fn rec(i: usize, left: i128, cur: &mut Vec<i128>, out: &mut Vec<Vec<i128>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GridPoint {
    score: i128,
    // Reversed so that `max` prefers the lexicographically smallest point.
    point: std::cmp::Reverse<Vec<i128>>,
}

/// Exhaustive search over masses on the `1/N` grid.
///
/// For each grid assignment of all but the last variable, the feasible values
/// of the last variable form an integer interval; the objective is linear in
/// it, so the best endpoint equals a scan of the interval. The result is a
/// lower bound on the exact optimum.
pub fn grid_search_menus(set: &AcceptanceSet, p: &MarketParams, g: &GridSpec) -> Result<GridOptimum> {
    p.require_pessimistic()?;
    let signals: Vec<Signal> = set.iter().cloned().collect();
    let n = signals.len();
    if n == 0 {
        return Err(Error::InvalidAcceptanceSet("empty acceptance set".into()));
    }
    if n > GRID_MAX_SIGNALS {
        return Err(Error::EnvelopeExceeded { what: "grid oracle", max: GRID_MAX_SIGNALS, got: n });
    }
    let big_n = g.resolution as i128;
    let rows = grid_rows(&signals, p, g.resolution)?;

    let mut obj_q = vec![p.mu.clone(); n];
    for e in &signals {
        let inv = match e {
            Signal::Infinite => Q::zero(),
            Signal::Finite(v) => v.recip(),
        };
        obj_q.push(inv - &p.mu);
    }
    let obj_scale = lcm_of_denoms(obj_q.iter());
    let obj_scale_q = Q::from_integer(obj_scale.clone());
    let obj: Vec<i128> = obj_q.iter().map(|c| to_i128(&(c * &obj_scale_q).to_integer())).collect::<Result<_>>()?;

    let highs: Vec<Vec<i128>> = compositions(n, big_n);
    let prefixes: Vec<Vec<i128>> = compositions(n - 1, big_n);
    let last = 2 * n - 1;

    let best = highs
        .par_iter()
        .filter_map(|a| {
            let mut v = vec![0i128; 2 * n];
            v[..n].copy_from_slice(a);
            let mut best: Option<GridPoint> = None;
            for prefix in &prefixes {
                v[n..last].copy_from_slice(prefix);
                v[last] = 0;
                let mut lo: i128 = 0;
                let mut hi: i128 = big_n;
                let mut ok = true;
                for row in &rows {
                    let base: i128 = row.coeffs[..last].iter().zip(&v[..last]).map(|(c, x)| c * x).sum();
                    let slack = row.rhs - base;
                    let c = row.coeffs[last];
                    if c == 0 {
                        if slack < 0 {
                            ok = false;
                            break;
                        }
                    } else if c > 0 {
                        hi = hi.min(slack.div_euclid(c));
                    } else {
                        // c·t ≤ slack with c < 0  ⇔  t ≥ ceil(slack / c)
                        lo = lo.max(ceil_div(slack, c));
                    }
                    if lo > hi {
                        ok = false;
                        break;
                    }
                }
                if !ok || lo > hi {
                    continue;
                }
                v[last] = if obj[last] > 0 { hi } else { lo };
                let score: i128 = obj.iter().zip(&v).map(|(c, x)| c * x).sum();
                let cand = GridPoint { score, point: std::cmp::Reverse(v.clone()) };
                if best.as_ref().is_none_or(|b| cand > *b) {
                    best = Some(cand);
                }
            }
            best
        })
        .max()
        .expect("the zero menu is always on the grid");

    let denom = Q::from_integer(big_n.into());
    let point = best.point.0;
    let high = point[..n].iter().map(|&c| Q::from_integer(c.into()) / &denom).collect();
    let low = point[n..].iter().map(|&c| Q::from_integer(c.into()) / &denom).collect();
    let objective = Q::from_integer(best.score.into()) / (obj_scale_q * denom);
    Ok(GridOptimum { high, low, objective, resolution: g.resolution })
}

/// `ceil(a / b)` for `b ≠ 0`.
fn ceil_div(a: i128, b: i128) -> i128 {
    let (q, r) = (a.div_euclid(b), a.rem_euclid(b));
    // div_euclid rounds toward −∞ for b > 0 and toward +∞ for b < 0.
    if b > 0 {
        if r == 0 {
            q
        } else {
            q + 1
        }
    } else {
        q
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOptimum {
    pub values: Vec<Q>,
    pub objective: Q,
    /// Every optimal vertex, sorted.
    pub optimal_vertices: Vec<Vec<Q>>,
    pub vertices_visited: usize,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Fraction-free Gaussian elimination on an integer augmented matrix.
/// Returns `None` when singular.
fn bareiss_solve(mut m: Vec<Vec<BigInt>>) -> Option<Vec<Q>> {
    let k = m.len();
    let mut prev = BigInt::one();
    for p in 0..k {
        let pivot_row = (p..k).find(|&r| !m[r][p].is_zero())?;
        m.swap(p, pivot_row);
        for i in p + 1..k {
            for j in p + 1..=k {
                let v = (&m[i][j] * &m[p][p] - &m[i][p] * &m[p][j]) / &prev;
                m[i][j] = v;
            }
            m[i][p] = BigInt::zero();
        }
        prev = m[p][p].clone();
    }
    let mut x = vec![Q::zero(); k];
    for i in (0..k).rev() {
        let mut acc = Q::from_integer(m[i][k].clone());
        for j in i + 1..k {
            acc -= Q::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / Q::from_integer(m[i][i].clone());
    }
    Some(x)
}

/// Enumerates every basic feasible solution: for each choice of `k` free
/// variables (the rest fixed at zero) and `k` tight rows, solve the square
/// system and keep the solution if it is feasible.
pub fn vertex_enumerate(lp: &LpInstance) -> Result<VertexOptimum> {
    let n_signals = lp.num_signals();
    if n_signals > VERTEX_MAX_SIGNALS {
        return Err(Error::EnvelopeExceeded { what: "vertex enumeration", max: VERTEX_MAX_SIGNALS, got: n_signals });
    }
    let nv = lp.num_vars();
    let m = lp.rows.len();

    // Integer copies of each row, scaled by the row's denominator lcm.
    let int_rows: Vec<(Vec<BigInt>, BigInt)> = lp
        .rows
        .iter()
        .map(|r| {
            let scale = Q::from_integer(lcm_of_denoms(r.coeffs.iter().chain(std::iter::once(&r.rhs))));
            let coeffs = r.coeffs.iter().map(|c| (c * &scale).to_integer()).collect();
            (coeffs, (&r.rhs * &scale).to_integer())
        })
        .collect();

    let feasible = |v: &[Q]| {
        lp.rows.iter().all(|r| {
            let lhs: Q = r.coeffs.iter().zip(v).filter(|(c, _)| !c.is_zero()).map(|(c, x)| c * x).sum();
            lhs <= r.rhs
        })
    };

    let mut jobs = Vec::new();
    for k in 0..=nv.min(m) {
        for vars in combinations(nv, k) {
            jobs.push((vars, k));
        }
    }
    let vertices: Vec<Vec<Q>> = jobs
        .par_iter()
        .flat_map_iter(|(vars, k)| {
            let mut found = Vec::new();
            if *k == 0 {
                let origin = vec![Q::zero(); nv];
                if feasible(&origin) {
                    found.push(origin);
                }
                return found;
            }
            let useful: Vec<usize> = (0..m).filter(|&r| vars.iter().any(|&c| !int_rows[r].0[c].is_zero())).collect();
            for rows in combinations(useful.len(), *k) {
                let mat: Vec<Vec<BigInt>> = rows
                    .iter()
                    .map(|&ri| {
                        let (coeffs, rhs) = &int_rows[useful[ri]];
                        let mut row: Vec<BigInt> = vars.iter().map(|&c| coeffs[c].clone()).collect();
                        row.push(rhs.clone());
                        row
                    })
                    .collect();
                let Some(sol) = bareiss_solve(mat) else { continue };
                if sol.iter().any(Signed::is_negative) {
                    continue;
                }
                let mut v = vec![Q::zero(); nv];
                for (&c, x) in vars.iter().zip(sol) {
                    v[c] = x;
                }
                if feasible(&v) {
                    found.push(v);
                }
            }
            found
        })
        .collect();

    let unique: BTreeSet<Vec<Q>> = vertices.into_iter().collect();
    let value = |v: &[Q]| -> Q { lp.objective.iter().zip(v).map(|(c, x)| c * x).sum() };
    let objective = unique.iter().map(|v| value(v)).max().expect("origin is a vertex");
    let optimal_vertices: Vec<Vec<Q>> = unique.iter().filter(|v| value(v) == objective).cloned().collect();
    Ok(VertexOptimum {
        values: optimal_vertices[0].clone(),
        objective,
        optimal_vertices,
        vertices_visited: unique.len(),
    })
}

/// A reproducible test instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub acceptance: Vec<Signal>,
    #[serde(with = "crate::rational::frac")]
    pub mu: Q,
    #[serde(with = "crate::rational::frac")]
    pub pi_star: Q,
}

impl Instance {
    pub fn acceptance_set(&self) -> Result<AcceptanceSet> {
        AcceptanceSet::new(self.acceptance.iter().cloned())
    }

    pub fn params(&self) -> Result<MarketParams> {
        MarketParams::new(self.mu.clone(), self.pi_star.clone())
    }
}

/// Deterministic instance: 1–3 distinct rational signals in `bounds` other
/// than 1, and `μ < π*` on a grid of twentieths.
pub fn random_instance(seed: u64, bounds: &(Q, Q)) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.random_range(1..=GRID_MAX_SIGNALS);
    let (lo, hi) = bounds;
    let mut signals: BTreeSet<Signal> = BTreeSet::new();
    let mut attempts = 0;
    while signals.len() < size && attempts < 1000 {
        attempts += 1;
        let den: i64 = rng.random_range(1..=8);
        let den_q = qi(den);
        let min_num = (lo * &den_q).ceil().to_integer().to_i64().unwrap_or(1).max(1);
        let max_num = (hi * &den_q).floor().to_integer().to_i64().unwrap_or(1);
        if min_num > max_num {
            continue;
        }
        let num = rng.random_range(min_num..=max_num);
        let v = q(num, den);
        if v.is_one() {
            continue;
        }
        signals.insert(Signal::Finite(v));
    }
    let pi_num: i64 = rng.random_range(2..=19);
    let mu_num: i64 = rng.random_range(1..pi_num);
    Instance { seed, acceptance: signals.into_iter().collect(), mu: q(mu_num, 20), pi_star: q(pi_num, 20) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{build_lp, solve_lp};

    fn set(items: &[&str]) -> AcceptanceSet {
        AcceptanceSet::parse_list(items, false).unwrap()
    }

    fn base() -> MarketParams {
        MarketParams::new(q(1, 4), q(1, 2)).unwrap()
    }

    #[test]
    fn ceil_div_matches_definition() {
        for a in -20i128..=20 {
            for b in [-7i128, -3, -1, 1, 2, 5] {
                let exact = (a as f64 / b as f64).ceil() as i128;
                assert_eq!(ceil_div(a, b), exact, "{a}/{b}");
            }
        }
    }

    #[test]
    fn grid_examples() {
        let g = GridSpec::with_resolution(20).unwrap();
        let r = grid_search_menus(&set(&["5"]), &base(), &g).unwrap();
        assert_eq!(r.objective, q(1, 4));
        assert_eq!((r.high.clone(), r.low.clone()), (vec![qi(1)], vec![qi(0)]));

        let g = GridSpec::with_resolution(12).unwrap();
        assert_eq!(grid_search_menus(&set(&["3"]), &base(), &g).unwrap().objective, q(1, 3));

        let g36 = GridSpec::with_resolution(36).unwrap();
        let r36 = grid_search_menus(&set(&["2", "1/2"]), &base(), &g36).unwrap();
        assert!(r36.objective <= q(7, 16));
        assert!(q(7, 16) - &r36.objective <= q(1, 100));
        let r18 = grid_search_menus(&set(&["2", "1/2"]), &base(), &GridSpec::with_resolution(18).unwrap()).unwrap();
        assert!(r18.objective <= r36.objective);
    }

    #[test]
    fn grid_refuses_large_sets() {
        let g = GridSpec::with_resolution(8).unwrap();
        let err = grid_search_menus(&set(&["2", "3", "4", "5"]), &base(), &g).unwrap_err();
        assert!(matches!(err, Error::EnvelopeExceeded { .. }));
        assert!(GridSpec::with_resolution(4).is_err());
    }

    #[test]
    fn vertex_examples() {
        let lp = build_lp(&set(&["5"]), &base()).unwrap();
        let v = vertex_enumerate(&lp).unwrap();
        assert_eq!(v.objective, q(1, 4));
        assert_eq!(v.optimal_vertices, vec![vec![qi(1), qi(0)]]);

        let lp = build_lp(&set(&["1/2"]), &base()).unwrap();
        assert_eq!(vertex_enumerate(&lp).unwrap().objective, qi(0));

        let lp = build_lp(&set(&["2", "1/2"]), &base()).unwrap();
        assert_eq!(vertex_enumerate(&lp).unwrap().objective, solve_lp(&lp).objective);

        // At e = 1/μ both the separating and the pooled vertex are optimal.
        let lp = build_lp(&set(&["4"]), &base()).unwrap();
        let v = vertex_enumerate(&lp).unwrap();
        assert_eq!(v.optimal_vertices, vec![vec![qi(1), qi(0)], vec![qi(1), qi(1)]]);
    }

    #[test]
    fn vertex_refuses_large_sets() {
        let items: Vec<String> = (2..=8).map(|i| i.to_string()).collect();
        let lp = build_lp(&AcceptanceSet::parse_list(&items, false).unwrap(), &base()).unwrap();
        assert!(matches!(vertex_enumerate(&lp), Err(Error::EnvelopeExceeded { .. })));
    }

    #[test]
    fn random_instances_are_deterministic_and_valid() {
        assert_eq!(random_instance(0, &default_signal_bounds()), random_instance(0, &default_signal_bounds()));
        for seed in 0..100 {
            let inst = random_instance(seed, &default_signal_bounds());
            assert!(inst.mu < inst.pi_star);
            assert!(!inst.acceptance.is_empty() && inst.acceptance.len() <= 3);
            for e in &inst.acceptance {
                assert!(!e.is_zero() && !e.is_one());
                let v = e.value().unwrap();
                assert!(*v >= q(1, 10) && *v <= qi(10));
            }
            assert!(inst.acceptance_set().is_ok());
        }
    }
}
