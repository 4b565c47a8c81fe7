//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::time::Instant;

use certmenu::equilibrium::{
    certifier_optimal_uninformative, naive_receiver_solve, optimistic_receiver_outcomes, sender_optimal_rent,
    singleton_rent, singleton_rent_formula, RegimeLabel,
};
use certmenu::model::{AcceptanceSet, MarketParams, Signal};
use certmenu::obedience::{check_obedience, menu_revenue, welfare};
use certmenu::optimizer::{
    build_lp, closed_form_binary, materialize_menu, solve_by_support_enum, solve_revenue_max, solve_revenue_max_all,
    solve_single_item, Allocation,
};
use certmenu::oracle::{default_signal_bounds, grid_search_menus, random_instance, vertex_enumerate, GridSpec};
use certmenu::rational::{format_rational, q, qi, to_f64, Q};
use num_traits::{One, Zero};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(mu: Q, pi: Q) -> MarketParams {
    MarketParams::new(mu, pi).expect("valid params").with_normalized_utilities()
}

fn singleton(e: &Q) -> AcceptanceSet {
    AcceptanceSet::new([Signal::Finite(e.clone())]).expect("valid singleton")
}

fn seeded(seed: u64) -> (AcceptanceSet, MarketParams, String) {
    let inst = random_instance(seed, &default_signal_bounds());
    let set = inst.acceptance_set().expect("generator yields valid sets");
    let p = inst.params().expect("generator yields valid params").with_normalized_utilities();
    let label = format!(
        "seed {seed}: E={:?} mu={} pi*={}",
        set.to_strings(),
        format_rational(&p.mu),
        format_rational(&p.pi_star)
    );
    (set, p, label)
}

fn cross_solver_identity() -> Outcome {
    for seed in 0..100 {
        let (set, p, label) = seeded(seed);
        let lp = solve_revenue_max(&set, &p).map_err(|e| format!("{label}: {e}"))?.certificate;
        let vertex = vertex_enumerate(&build_lp(&set, &p).unwrap()).map_err(|e| e.to_string())?.objective;
        let support = solve_by_support_enum(&set, &p).map_err(|e| e.to_string())?.certificate;
        check(lp == vertex && lp == support, || format!("{label}: lp {lp} vertex {vertex} support {support}"))?;
    }
    Ok("100 instances, three exact paths agree".into())
}

fn oracle_convergence() -> Outcome {
    let mut worst = Q::zero();
    for seed in 0..20 {
        let (set, p, label) = seeded(seed);
        let exact = solve_revenue_max(&set, &p).unwrap().certificate;
        let mut prev_gap: Option<Q> = None;
        for n in [12, 24, 48] {
            let g = GridSpec::with_resolution(n).unwrap();
            let grid = grid_search_menus(&set, &p, &g).map_err(|e| e.to_string())?.objective;
            check(grid <= exact, || format!("{label}: grid {grid} above exact {exact} at N={n}"))?;
            let gap = &exact - &grid;
            if let Some(prev) = &prev_gap {
                check(gap <= *prev, || format!("{label}: gap grew from {prev} to {gap} at N={n}"))?;
            }
            if n == 48 {
                check(gap <= q(1, 100), || format!("{label}: gap {gap} > 1/100 at N=48"))?;
                worst = worst.max(gap.clone());
            }
            prev_gap = Some(gap);
        }
    }
    Ok(format!("20 instances, worst gap at N=48 is {:.5}", to_f64(&worst)))
}

fn binary_closed_form_exactness() -> Outcome {
    let e_hs = [q(3, 2), qi(2), qi(3), qi(4), qi(6), qi(8)];
    let e_ls = [q(1, 10), q(1, 4), q(1, 2), q(3, 4), q(9, 10)];
    let mus = [q(1, 10), q(1, 5), q(1, 4), q(1, 3), q(1, 2)];
    let pis = [q(1, 5), q(1, 3), q(1, 2), q(2, 3), q(9, 10)];
    let mut points = 0;
    for mu in &mus {
        for pi in &pis {
            if mu >= pi {
                continue;
            }
            let p = params(mu.clone(), pi.clone());
            for e_h in &e_hs {
                for e_l in &e_ls {
                    let (sh, sl) = (Signal::Finite(e_h.clone()), Signal::Finite(e_l.clone()));
                    let set = AcceptanceSet::new([sh.clone(), sl.clone()]).unwrap();
                    let cf = closed_form_binary(&sh, &sl, &p).map_err(|e| e.to_string())?;
                    let lp = solve_revenue_max(&set, &p).unwrap().certificate;
                    let here = || format!("(e_h, e_l, mu, pi*) = ({e_h}, {e_l}, {mu}, {pi})");
                    check(cf.revenue == lp, || format!("{}: closed form {} vs lp {lp}", here(), cf.revenue))?;
                    check(check_obedience(&cf.menu, &set, &p).overall(), || format!("{}: not obedient", here()))?;
                    points += 1;
                }
            }
        }
    }
    // Worked instance, cross-checked against vertex enumeration.
    let p = params(q(1, 4), q(1, 2));
    let (sh, sl) = (Signal::Finite(qi(2)), Signal::Finite(q(1, 2)));
    let set = AcceptanceSet::new([sh.clone(), sl.clone()]).unwrap();
    let cf = closed_form_binary(&sh, &sl, &p).unwrap();
    let vertex = vertex_enumerate(&build_lp(&set, &p).unwrap()).unwrap().objective;
    let w = welfare(&cf.menu, &set, &p);
    check(cf.revenue == q(7, 16) && vertex == q(7, 16), || format!("worked revenue {}", cf.revenue))?;
    check(cf.menu.high.price == q(3, 4) && cf.menu.low.price == q(1, 3), || "worked prices".into())?;
    check(w.rent_high == q(1, 4), || format!("worked rent {}", w.rent_high))?;
    Ok(format!("{points} pessimistic grid points bit-exact; worked instance 7/16, (3/4, 1/3), rent 1/4"))
}

fn singleton_threshold() -> Outcome {
    let p = params(q(1, 4), q(1, 2));
    let four = qi(4);
    for k in 1..=40 {
        let e = Q::one() + q(k, 8);
        let all = solve_revenue_max_all(&singleton(&e), &p).map_err(|err| err.to_string())?;
        let labels: Vec<RegimeLabel> = all.iter().map(|r| r.regime).collect();
        if e > four {
            check(labels.iter().all(RegimeLabel::is_separating), || format!("e*={e}: {labels:?}"))?;
        } else if e < four {
            check(!labels.iter().any(RegimeLabel::is_separating), || format!("e*={e}: {labels:?}"))?;
        } else {
            let revenues: Vec<&Q> = all.iter().map(|r| r.revenue()).collect();
            check(
                labels.iter().any(RegimeLabel::is_separating)
                    && labels.iter().any(|l| !l.is_separating())
                    && revenues.windows(2).all(|w| w[0] == w[1]),
                || format!("e*=4: {labels:?} {revenues:?}"),
            )?;
        }
    }
    Ok("separating above 4, pooling below 4, exact tie at 4".into())
}

fn naive_dichotomy() -> Outcome {
    let mut points = 0;
    let mut separating = 0;
    for pi_num in 11..=19 {
        let pi = q(pi_num, 20);
        let mut mus: Vec<Q> = (1..20).map(|j| q(j, 20)).filter(|m| *m < pi).collect();
        let cutoff = qi(2) - pi.recip();
        if cutoff > Q::zero() && !mus.contains(&cutoff) {
            mus.push(cutoff);
        }
        for mu in mus {
            let p = params(mu.clone(), pi.clone());
            let out = naive_receiver_solve(&p, 32).map_err(|e| e.to_string())?;
            let expect_sep = mu <= p.separation_cutoff();
            check(out.separating == expect_sep, || format!("mu={mu} pi*={pi}: separating {}", out.separating))?;
            check(out.dichotomy_holds(&p), || format!("mu={mu} pi*={pi}: pooling branch not at 1/l"))?;
            points += 1;
            separating += usize::from(out.separating);
        }
    }
    Ok(format!("{points} points ({separating} separating), pooling branch at 1/l with price l"))
}

fn rent_schedule() -> Outcome {
    let p = params(q(1, 4), q(1, 2));
    let one = Q::one();
    let mut best = Q::zero();
    for k in 1..=40 {
        let e = &one + q(k, 8);
        let expected = if e <= qi(3) {
            (&e - &one) / qi(3)
        } else if e <= qi(4) {
            &one - e.recip()
        } else {
            Q::zero()
        };
        let sig = Signal::Finite(e.clone());
        let lp_rent = singleton_rent(&sig, &p).map_err(|err| err.to_string())?;
        check(lp_rent == expected, || format!("e*={e}: lp rent {lp_rent}, expected {expected}"))?;
        check(singleton_rent_formula(&sig, &p) == expected, || format!("e*={e}: formula disagrees"))?;
        best = best.max(lp_rent);
    }
    check(best == q(3, 4), || format!("maximum rent {best}"))?;
    check(sender_optimal_rent(&p) == q(3, 4), || "sender optimum".into())?;
    Ok("40 singleton rents exact, maximum 3/4 at e*=4".into())
}

fn zero_low_rent() -> Outcome {
    let mut positive = 0;
    for seed in 0..100 {
        let (set, p, label) = seeded(seed);
        let lp = build_lp(&set, &p).unwrap();
        let mut optima: Vec<Allocation> = solve_revenue_max_all(&set, &p)
            .unwrap()
            .into_iter()
            .filter(|r| r.certificate > Q::zero())
            .map(|r| r.allocation)
            .collect();
        let vertex = vertex_enumerate(&lp).unwrap();
        if vertex.objective > Q::zero() {
            optima.extend(vertex.optimal_vertices.iter().map(|v| Allocation::from_values(&lp.signals, v)));
        }
        for a in &optima {
            let menu = materialize_menu(a, &set).map_err(|e| format!("{label}: {e}"))?;
            let w = welfare(&menu, &set, &p);
            check(a.high_total().is_one(), || format!("{label}: high mass {}", a.high_total()))?;
            check(w.rent_low.is_zero(), || format!("{label}: low rent {}", w.rent_low))?;
            positive += 1;
        }
    }
    Ok(format!("{positive} positive-revenue optima: full high acceptance, zero low rent"))
}

fn support_bounds() -> Outcome {
    let mut vertices = 0;
    for seed in 0..100 {
        let (set, p, label) = seeded(seed);
        let lp = build_lp(&set, &p).unwrap();
        for v in vertex_enumerate(&lp).unwrap().optimal_vertices {
            let a = Allocation::from_values(&lp.signals, &v);
            let (h, l) = (a.high_support().len(), a.low_support().len());
            check(h <= 3 && l <= 2, || format!("{label}: supports {h}, {l}"))?;
            vertices += 1;
        }
    }
    Ok(format!("{vertices} optimal vertices within (3, 2) support bounds"))
}

fn uninformative_outcomes() -> Outcome {
    let p = params(q(1, 4), q(1, 2));
    let (menu, set) = certifier_optimal_uninformative(&p, true).map_err(|e| e.to_string())?;
    let revenue = menu_revenue(&menu, &p);
    check(revenue == q(1, 2), || format!("revenue {revenue}"))?;
    check(check_obedience(&menu, &set, &p).overall(), || "uninformative menu not obedient".into())?;
    for k in 1..=40 {
        let e = Q::one() + q(k, 8);
        for r in solve_revenue_max_all(&singleton(&e), &p).unwrap() {
            check(*r.revenue() <= revenue, || format!("singleton {e} earns {}", r.revenue()))?;
        }
    }
    let p = params(q(3, 5), q(1, 2));
    let [no_trade, uninformative] = optimistic_receiver_outcomes(&p).map_err(|e| e.to_string())?;
    check(no_trade.revenue.is_zero() && no_trade.phi_accepted, || "no-trade outcome".into())?;
    check(
        uninformative.menu.high.price.is_one()
            && uninformative.menu.low.price.is_one()
            && uninformative.revenue.is_one()
            && uninformative.menu.high.experiment.atoms().keys().all(Signal::is_one),
        || "optimistic uninformative menu".into(),
    )?;
    Ok("revenue 1/2 dominates all singleton optima; optimistic receiver gets the price-1 test".into())
}

fn receiver_dominance() -> Outcome {
    let mut used = 0;
    let mut strict = 0;
    let mut seed = 0;
    while used < 20 {
        let (set, p, label) = seeded(seed);
        seed += 1;
        if p.mu >= p.separation_cutoff() {
            continue;
        }
        let single = solve_single_item(&set, &p).map_err(|e| e.to_string())?;
        let full = solve_revenue_max(&set, &p).map_err(|e| e.to_string())?;
        let a = single.welfare.receiver_payoff.clone().unwrap();
        let b = full.welfare.receiver_payoff.clone().unwrap();
        check(a >= b, || format!("{label}: single item {a} < full menu {b}"))?;
        strict += usize::from(a > b);
        used += 1;
    }
    check(strict > 0, || "no strict improvement".into())?;
    Ok(format!("20 instances (seeds 0..{seed}), {strict} strict"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("cross-solver identity", cross_solver_identity),
        ("grid oracle convergence", oracle_convergence),
        ("two-signal closed form exactness", binary_closed_form_exactness),
        ("singleton separation threshold", singleton_threshold),
        ("naive receiver dichotomy", naive_dichotomy),
        ("singleton rent schedule", rent_schedule),
        ("full high acceptance and zero low rent", zero_low_rent),
        ("optimal support bounds", support_bounds),
        ("uninformative signal outcomes", uninformative_outcomes),
        ("receiver prefers single item", receiver_dominance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
