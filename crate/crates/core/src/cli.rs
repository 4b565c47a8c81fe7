//! Command-line front end: `solve`, `sweep`, `classify` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error,
//! 3 disagreement between solver paths.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::json;

use crate::equilibrium::{naive_receiver_solve, separating_threshold};
use crate::error::{Error, Result};
use crate::model::{AcceptanceSet, MarketParams, ReceiverUtilities, Signal};
use crate::obedience::check_obedience;
use crate::optimizer::{
    build_lp, closed_form_applies, solve_by_closed_form, solve_by_support_enum, solve_revenue_max, solve_single_item,
    Allocation, SolveResult,
};
use crate::oracle::{
    default_signal_bounds, grid_search_menus, random_instance, vertex_enumerate, GridSpec, Instance, GRID_MAX_SIGNALS,
};
use crate::rational::{format_decimal, format_rational, parse_rational, Q};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;

/// Signals in the naive receiver's acceptance grid when no set is given.
pub const NAIVE_GRID_SIZE: usize = 32;

pub const CSV_HEADER: &str = "param,value,revenue,rent_high,receiver_payoff,regime";

#[derive(Parser, Debug)]
#[command(name = "certmenu", version, about = "Revenue-maximizing certification menus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated accepted signals, e.g. `2,1/2,inf`.
    #[arg(long, value_delimiter = ',')]
    pub acceptance: Option<Vec<String>>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long = "pi-star")]
    pub pi_star: Option<String>,
    #[arg(long = "solver-path")]
    pub solver_path: Option<PathChoice>,
    #[arg(long = "allow-uninformative")]
    pub allow_uninformative: bool,
    #[arg(long = "single-item")]
    pub single_item: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    #[default]
    Lp,
    ClosedForm,
    SupportEnum,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "mu")]
    Mu,
    #[value(name = "pi_star", alias = "pi-star")]
    PiStar,
    #[value(name = "e_star", alias = "e-star")]
    EStar,
}

impl SweepParam {
    fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::PiStar => "pi_star",
            SweepParam::EStar => "e_star",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for the revenue-maximizing menu.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "json")]
        output: OutputFormat,
    },
    /// Re-solve over a parameter grid `(from, to]` with `steps` points.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        output: OutputFormat,
    },
    /// Report the equilibrium regime of the optimal menu.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "json")]
        output: OutputFormat,
    },
    /// Cross-check the solver against the oracles on random instances.
    Verify {
        /// Replays a single instance instead of drawing random ones.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        resolution: usize,
    },
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("expected a rational string or number, got {other}"))),
    }
}

fn opt_string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    string_or_number(d).map(Some)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    #[serde(deserialize_with = "string_or_number")]
    pub mu: String,
    #[serde(default, deserialize_with = "opt_string_or_number", skip_serializing_if = "Option::is_none")]
    pub pi_star: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver_utilities: Option<ReceiverUtilities>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFlags {
    #[serde(default)]
    pub allow_uninformative: bool,
    #[serde(default)]
    pub single_item: bool,
    #[serde(default)]
    pub solver_path: PathChoice,
}

/// JSON run configuration. Rationals are fraction or decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketConfig,
    /// Absent: the receiver accepts every signal whose face-value posterior
    /// clears the threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<Vec<String>>,
    #[serde(default)]
    pub flags: RunFlags,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub params: MarketParams,
    pub acceptance: Option<AcceptanceSet>,
    pub flags: RunFlags,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let field = |name: &str, e: Error| Error::Config(format!("market.{name}: {e}"));
        let mu = parse_rational(&self.market.mu).map_err(|e| field("mu", e))?;
        let params = match (&self.market.pi_star, &self.market.receiver_utilities) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("market: give either pi_star or receiver_utilities, not both".into()))
            }
            (None, None) => return Err(Error::Config("market: missing pi_star or receiver_utilities".into())),
            (Some(pi), None) => {
                let pi = parse_rational(pi).map_err(|e| field("pi_star", e))?;
                MarketParams::new(mu, pi).map_err(|e| field("pi_star", e))?.with_normalized_utilities()
            }
            (None, Some(u)) => {
                MarketParams::with_utilities(mu, u.clone()).map_err(|e| field("receiver_utilities", e))?
            }
        };
        let acceptance = self
            .acceptance
            .as_ref()
            .map(|items| AcceptanceSet::parse_list(items, self.flags.allow_uninformative))
            .transpose()
            .map_err(|e| Error::Config(format!("acceptance: {e}")))?;
        Ok(Resolved { params, acceptance, flags: self.flags.clone() })
    }

    /// Canonical form: every rational rewritten as a reduced fraction string.
    pub fn normalized(&self) -> Result<Self> {
        let canon = |s: &str| parse_rational(s).map(|v| format_rational(&v));
        let mut out = self.clone();
        out.market.mu = canon(&self.market.mu)?;
        out.market.pi_star = self.market.pi_star.as_deref().map(canon).transpose()?;
        out.acceptance = match &self.acceptance {
            Some(items) => {
                Some(items.iter().map(|s| s.parse::<Signal>().map(|e| e.to_string())).collect::<Result<Vec<_>>>()?)
            }
            None => None,
        };
        Ok(out)
    }

    fn from_instance(inst: &Instance) -> Self {
        RunConfig {
            market: MarketConfig {
                mu: format_rational(&inst.mu),
                pi_star: Some(format_rational(&inst.pi_star)),
                receiver_utilities: None,
            },
            acceptance: Some(inst.acceptance.iter().map(|e| e.to_string()).collect()),
            flags: RunFlags::default(),
        }
    }
}

fn load_config(input: &InputArgs) -> Result<RunConfig> {
    let mut cfg = match &input.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let mu = input.mu.clone().ok_or_else(|| Error::Config("missing --mu (or --config)".into()))?;
            RunConfig {
                market: MarketConfig { mu, pi_star: None, receiver_utilities: None },
                acceptance: None,
                flags: RunFlags::default(),
            }
        }
    };
    if let Some(mu) = &input.mu {
        cfg.market.mu = mu.clone();
    }
    if let Some(pi) = &input.pi_star {
        cfg.market.pi_star = Some(pi.clone());
        cfg.market.receiver_utilities = None;
    }
    if let Some(items) = &input.acceptance {
        cfg.acceptance = Some(items.clone());
    }
    if let Some(path) = input.solver_path {
        cfg.flags.solver_path = path;
    }
    cfg.flags.allow_uninformative |= input.allow_uninformative;
    cfg.flags.single_item |= input.single_item;
    Ok(cfg)
}

/// Outcome of one solve: one result per requested path.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub results: Vec<SolveResult>,
    /// False when the paths disagree on the optimal revenue.
    pub agree: bool,
    /// Set when no acceptance set was given.
    pub naive: bool,
}

impl SolveOutcome {
    pub fn primary(&self) -> &SolveResult {
        &self.results[0]
    }
}

pub fn solve_config(r: &Resolved) -> Result<SolveOutcome> {
    let Some(set) = &r.acceptance else {
        let out = naive_receiver_solve(&r.params, NAIVE_GRID_SIZE)?;
        return Ok(SolveOutcome { results: vec![out.result], agree: true, naive: true });
    };
    if r.flags.single_item {
        return Ok(SolveOutcome { results: vec![solve_single_item(set, &r.params)?], agree: true, naive: false });
    }
    let results = match r.flags.solver_path {
        PathChoice::Lp => vec![solve_revenue_max(set, &r.params)?],
        PathChoice::ClosedForm => vec![solve_by_closed_form(set, &r.params)?],
        PathChoice::SupportEnum => vec![solve_by_support_enum(set, &r.params)?],
        PathChoice::All => {
            let mut all = vec![solve_revenue_max(set, &r.params)?];
            if closed_form_applies(set) {
                all.push(solve_by_closed_form(set, &r.params)?);
            }
            all.push(solve_by_support_enum(set, &r.params)?);
            all
        }
    };
    let agree = results.iter().all(|x| x.certificate == results[0].certificate);
    Ok(SolveOutcome { results, agree, naive: false })
}

fn opt_frac(v: &Option<Q>) -> String {
    v.as_ref().map(format_rational).unwrap_or_default()
}

fn table_value(v: &Q) -> String {
    format!("{} ({})", format_rational(v), format_decimal(v))
}

fn write_result_table(out: &mut dyn Write, r: &SolveResult) -> std::io::Result<()> {
    writeln!(out, "solver_path      {}", r.solver_path)?;
    writeln!(out, "acceptance       {}", r.acceptance.to_strings().join(","))?;
    writeln!(out, "regime           {}", r.regime)?;
    writeln!(out, "revenue          {}", table_value(&r.welfare.revenue))?;
    writeln!(out, "price_high       {}", table_value(&r.menu.high.price))?;
    writeln!(out, "price_low        {}", table_value(&r.menu.low.price))?;
    writeln!(out, "rent_high        {}", table_value(&r.welfare.rent_high))?;
    writeln!(out, "rent_low         {}", table_value(&r.welfare.rent_low))?;
    if let Some(v) = &r.welfare.receiver_payoff {
        writeln!(out, "receiver_payoff  {}", table_value(v))?;
    }
    for (name, opt) in [("high", &r.menu.high), ("low", &r.menu.low)] {
        let atoms: Vec<String> =
            opt.experiment.atoms().iter().map(|(e, m)| format!("{e}:{}", format_rational(m))).collect();
        let shown = if atoms.is_empty() { "none".to_string() } else { atoms.join(" ") };
        writeln!(out, "experiment_{name:<5} {shown}")?;
    }
    Ok(())
}

fn result_csv_row(param: &str, value: &Q, r: &SolveResult) -> String {
    format!(
        "{param},{},{},{},{},{}",
        format_rational(value),
        format_rational(&r.welfare.revenue),
        format_rational(&r.welfare.rent_high),
        opt_frac(&r.welfare.receiver_payoff),
        r.regime
    )
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("values serialize"))
}

fn cmd_solve(input: &InputArgs, output: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let resolved = load_config(input)?.resolve()?;
    let outcome = solve_config(&resolved)?;
    match output {
        OutputFormat::Json => {
            let value = if outcome.results.len() == 1 {
                serde_json::to_value(outcome.primary()).expect("results serialize")
            } else {
                json!({ "agree": outcome.agree, "results": outcome.results })
            };
            emit_json(out, &value).map_err(io_err)?;
        }
        OutputFormat::Table => {
            for (i, r) in outcome.results.iter().enumerate() {
                if i > 0 {
                    writeln!(out).map_err(io_err)?;
                }
                write_result_table(out, r).map_err(io_err)?;
            }
            if outcome.results.len() > 1 {
                writeln!(out, "\nagree            {}", outcome.agree).map_err(io_err)?;
            }
        }
        OutputFormat::Csv => {
            writeln!(out, "solver_path,revenue,rent_high,receiver_payoff,regime").map_err(io_err)?;
            for r in &outcome.results {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.solver_path,
                    format_rational(&r.welfare.revenue),
                    format_rational(&r.welfare.rent_high),
                    opt_frac(&r.welfare.receiver_payoff),
                    r.regime
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(if outcome.agree { EXIT_OK } else { EXIT_DISAGREEMENT })
}

/// Grid points `from + k·(to − from)/steps` for `k = 1..=steps`.
pub fn sweep_points(from: &Q, to: &Q, steps: usize) -> Result<Vec<Q>> {
    if steps == 0 {
        return Err(Error::Config("--steps must be at least 1".into()));
    }
    if to <= from {
        return Err(Error::Config("--to must exceed --from".into()));
    }
    let width = (to - from) / Q::from_integer(steps.into());
    Ok((1..=steps).map(|k| from + &width * Q::from_integer(k.into())).collect())
}

/// Applies one sweep value to a base configuration.
pub fn sweep_config(base: &RunConfig, param: SweepParam, value: &Q) -> RunConfig {
    let mut cfg = base.clone();
    let s = format_rational(value);
    match param {
        SweepParam::Mu => cfg.market.mu = s,
        SweepParam::PiStar => {
            cfg.market.pi_star = Some(s);
            cfg.market.receiver_utilities = None;
        }
        SweepParam::EStar => cfg.acceptance = Some(vec![s]),
    }
    cfg
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    input: &InputArgs,
    param: SweepParam,
    from: &str,
    to: &str,
    steps: usize,
    output: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32> {
    let base = load_config(input)?;
    let from = parse_rational(from).map_err(|e| Error::Config(format!("--from: {e}")))?;
    let to = parse_rational(to).map_err(|e| Error::Config(format!("--to: {e}")))?;
    let points = sweep_points(&from, &to, steps)?;
    // Validate every point before solving any of them.
    let resolved: Vec<Resolved> = points
        .iter()
        .map(|v| {
            sweep_config(&base, param, v)
                .resolve()
                .and_then(|r| r.params.require_pessimistic().map(|_| r))
                .map_err(|e| Error::Config(format!("{} = {}: {e}", param.as_str(), format_rational(v))))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<SolveOutcome> = resolved.par_iter().map(solve_config).collect::<Result<_>>()?;
    let agree = outcomes.iter().all(|o| o.agree);
    match output {
        OutputFormat::Csv | OutputFormat::Table => {
            writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
            for (v, o) in points.iter().zip(&outcomes) {
                writeln!(out, "{}", result_csv_row(param.as_str(), v, o.primary())).map_err(io_err)?;
            }
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = points
                .iter()
                .zip(&outcomes)
                .map(|(v, o)| json!({ "param": param.as_str(), "value": format_rational(v), "result": o.primary() }))
                .collect();
            emit_json(out, &serde_json::Value::Array(rows)).map_err(io_err)?;
        }
    }
    Ok(if agree { EXIT_OK } else { EXIT_DISAGREEMENT })
}

fn cmd_classify(input: &InputArgs, output: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let resolved = load_config(input)?.resolve()?;
    let outcome = solve_config(&resolved)?;
    let r = outcome.primary();
    let separation = match &resolved.acceptance {
        Some(set) => Some(separating_threshold(set, &resolved.params)?.as_str()),
        None => None,
    };
    let obedience = check_obedience(&r.menu, &r.acceptance, &resolved.params);
    match output {
        OutputFormat::Json => {
            let value = json!({
                "regime": r.regime,
                "separation": separation,
                "revenue": format_rational(r.revenue()),
                "high_support": r.allocation.high_support(),
                "low_support": r.allocation.low_support(),
                "obedience": obedience,
            });
            emit_json(out, &value).map_err(io_err)?;
        }
        OutputFormat::Table | OutputFormat::Csv => {
            writeln!(out, "regime      {}", r.regime).map_err(io_err)?;
            if let Some(s) = separation {
                writeln!(out, "separation  {s}").map_err(io_err)?;
            }
            writeln!(out, "revenue     {}", table_value(r.revenue())).map_err(io_err)?;
            writeln!(out, "obedient    {}", obedience.overall()).map_err(io_err)?;
        }
    }
    Ok(EXIT_OK)
}

/// Names of the invariants checked per verify trial, in report order.
pub const VERIFY_CHECKS: [&str; 7] = [
    "lp_equals_vertex",
    "lp_equals_support_enum",
    "grid_below_lp",
    "menu_obedient",
    "full_high_acceptance",
    "zero_low_rent",
    "support_bounds",
];

/// Per-instance verdicts in `VERIFY_CHECKS` order.
pub fn verify_instance(set: &AcceptanceSet, p: &MarketParams, resolution: usize) -> Result<[bool; 7]> {
    let lp_result = solve_revenue_max(set, p)?;
    let lp_obj = lp_result.certificate.clone();
    let vertex = vertex_enumerate(&build_lp(set, p)?)?;
    let support = solve_by_support_enum(set, p)?;
    let grid_ok = if set.len() <= GRID_MAX_SIGNALS {
        let g = GridSpec::with_resolution(resolution)?;
        grid_search_menus(set, p, &g)?.objective <= lp_obj
    } else {
        true
    };
    let positive = lp_obj > Q::zero();
    let full_high = !positive || lp_result.allocation.high_total().is_one();
    let zero_low = !positive || lp_result.welfare.rent_low.is_zero();
    let bounds_ok = vertex.optimal_vertices.iter().all(|v| {
        let a = Allocation::from_values(&build_lp(set, p).map(|lp| lp.signals).unwrap_or_default(), v);
        a.high_support().len() <= 3 && a.low_support().len() <= 2
    }) || !positive;
    Ok([
        vertex.objective == lp_obj,
        support.certificate == lp_obj,
        grid_ok,
        check_obedience(&lp_result.menu, set, p).overall(),
        full_high,
        zero_low,
        bounds_ok,
    ])
}

fn cmd_verify(
    config: Option<&PathBuf>,
    trials: usize,
    seed: u64,
    resolution: usize,
    out: &mut dyn Write,
) -> Result<i32> {
    GridSpec::with_resolution(resolution)?;
    let instances: Vec<(Option<Instance>, RunConfig)> = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            vec![(None, RunConfig::from_json(&text)?)]
        }
        None => {
            if trials == 0 {
                return Err(Error::Config("--trials must be at least 1".into()));
            }
            let bounds = default_signal_bounds();
            (0..trials as u64)
                .map(|i| {
                    let inst = random_instance(seed.wrapping_add(i), &bounds);
                    let cfg = RunConfig::from_instance(&inst);
                    (Some(inst), cfg)
                })
                .collect()
        }
    };
    let verdicts: Vec<(RunConfig, Result<[bool; 7]>)> = instances
        .into_par_iter()
        .map(|(_, cfg)| {
            let verdict = cfg.resolve().and_then(|r| {
                let set = r.acceptance.ok_or_else(|| Error::Config("verify needs an acceptance set".into()))?;
                verify_instance(&set, &r.params, resolution)
            });
            (cfg, verdict)
        })
        .collect();

    let mut passed = [0usize; 7];
    let mut failures = Vec::new();
    for (cfg, verdict) in &verdicts {
        match verdict {
            Ok(checks) => {
                for (count, ok) in passed.iter_mut().zip(checks) {
                    *count += usize::from(*ok);
                }
                if checks.iter().any(|ok| !ok) {
                    let failed: Vec<&str> =
                        VERIFY_CHECKS.iter().zip(checks).filter(|(_, ok)| !**ok).map(|(n, _)| *n).collect();
                    failures.push((cfg, failed.join(",")));
                }
            }
            Err(e) => {
                if config.is_some() {
                    return Err(e.clone());
                }
                failures.push((cfg, format!("error: {e}")));
            }
        }
    }
    let total = verdicts.len();
    for (name, count) in VERIFY_CHECKS.iter().zip(passed) {
        writeln!(out, "{name:<24} {count}/{total}").map_err(io_err)?;
    }
    for (cfg, why) in &failures {
        writeln!(out, "FAILED ({why}): {}", serde_json::to_string(cfg).expect("configs serialize")).map_err(io_err)?;
    }
    if failures.is_empty() {
        writeln!(out, "all {total} instances passed").map_err(io_err)?;
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { input, output } => cmd_solve(input, *output, out),
        Command::Sweep { input, param, from, to, steps, output } => {
            cmd_sweep(input, *param, from, to, *steps, *output, out)
        }
        Command::Classify { input, output } => cmd_classify(input, *output, out),
        Command::Verify { config, trials, seed, resolution } => {
            cmd_verify(config.as_ref(), *trials, *seed, *resolution, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["certmenu"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_round_trip_is_idempotent() {
        let cfg = RunConfig::from_json(
            r#"{"market":{"mu":"0.25","pi_star":"2/4"},"acceptance":["2","0.5"],"flags":{"solver_path":"all"}}"#,
        )
        .unwrap();
        let once = cfg.normalized().unwrap();
        assert_eq!(once.market.mu, "1/4");
        assert_eq!(once.market.pi_star.as_deref(), Some("1/2"));
        assert_eq!(once.acceptance, Some(vec!["2".to_string(), "1/2".to_string()]));
        let text = serde_json::to_string(&once).unwrap();
        let twice = RunConfig::from_json(&text).unwrap().normalized().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn config_diagnostics_name_the_field() {
        let err = RunConfig::from_json(r#"{"market":{"mu":"abc","pi_star":"1/2"},"acceptance":["2"]}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("market.mu"), "{err}");
        let err = RunConfig::from_json(r#"{"market":{"mu":"1/4"},"bogus":1}"#).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn numeric_json_values_are_exact() {
        let cfg = RunConfig::from_json(r#"{"market":{"mu":0.25,"pi_star":0.5},"acceptance":["5"]}"#).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.params.mu, crate::rational::q(1, 4));
    }

    #[test]
    fn solve_separating_example() {
        let (code, out, _) = run_capture(&["solve", "--mu", "1/4", "--pi-star", "1/2", "--acceptance", "5"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["revenue"], "1/4");
        assert_eq!(v["regime"], "separating");
    }

    #[test]
    fn uninformative_signal_requires_flag() {
        let (code, _, err) = run_capture(&["solve", "--mu", "1/4", "--pi-star", "1/2", "--acceptance", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("error"));
    }

    #[test]
    fn sweep_points_are_half_open() {
        let pts = sweep_points(&Q::one(), &Q::from_integer(3.into()), 4).unwrap();
        assert_eq!(pts.first().unwrap(), &crate::rational::q(3, 2));
        assert_eq!(pts.last().unwrap(), &Q::from_integer(3.into()));
        assert!(sweep_points(&Q::one(), &Q::one(), 1).is_err());
        assert!(sweep_points(&Q::zero(), &Q::one(), 0).is_err());
    }

    #[test]
    fn verify_rejects_zero_trials() {
        let (code, _, _) = run_capture(&["verify", "--trials", "0"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
