//! Command-line front end: experiment runner, exact enumeration, bound
//! evaluation, LP duality checks, and the order-book demo.
//!
//! Exit status is 0 only when every assertion configured for the invoked
//! command holds.

use clap::{Args, Parser, Subcommand};
use gtsim::bounds;
use gtsim::duality::{solve_dual, solve_primal, DualityInstance, SolveStatus};
use gtsim::harness::{
    enumerate_joint_martingale, run_counter_example_exact, run_lln, run_lower_bound_blocks,
    run_theorem_optimal, verify_certificates, LlnConfig, LowerBoundConfig, TheoremOptimalConfig,
};
use gtsim::market::{OrderBook, Side};
use gtsim::measures::{ObsSpace, ProbMeasure};
use gtsim::strategies::RandomSceptic;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gtsim", about = "Sequential forecast-betting protocol workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a TOML config file.
    Simulate(SimulateArgs),
    /// Exhaustively verify conditional ledger increments on a small instance.
    Enumerate(EnumerateArgs),
    /// Law-of-large-numbers experiments for K-step-lookback sums.
    Lln(SimulateArgs),
    /// Evaluate a closed-form bound, echoing inputs as JSON.
    Bounds(BoundsArgs),
    /// Check LP duality on an instance file and recover the ticket strategy.
    LpCheck(LpCheckArgs),
    /// Replay an order stream CSV through the book and emit fills CSV.
    MarketDemo(MarketDemoArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Protocol steps (binary outcome space).
    #[arg(long, default_value_t = 3)]
    n_steps: usize,
    /// Number of random predictable sceptics to test.
    #[arg(long, default_value_t = 50)]
    sceptics: usize,
    /// Ticket magnitude of the random sceptics.
    #[arg(long, default_value_t = 0.05)]
    magnitude: f64,
    /// Maximum allowed |conditional increment expectation|.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// One of: g, lemma-ep, hoeffding, chain, regret-threshold,
    /// no-restriction, risk-aggregation, feller, lln-threshold, lower-bound.
    name: String,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated sample for lemma-ep.
    #[arg(long)]
    xs: Option<String>,
}

#[derive(Args)]
struct LpCheckArgs {
    /// DualityInstance JSON file.
    instance: PathBuf,
    /// Maximum allowed duality gap.
    #[arg(long, default_value_t = 1e-9)]
    gap: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarketDemoArgs {
    /// Order stream CSV: timestamp,side,kind,price,qty,expiry.
    orders: PathBuf,
    /// Fills CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
struct AssertSpec {
    freq_upper_max: Option<f64>,
    freq_lower_min: Option<f64>,
    dichotomy: Option<bool>,
    /// Exact (value, probability) pairs for the counterexample distribution.
    distribution: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct SimulateFile {
    experiment: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_reps")]
    reps: usize,
    #[serde(default)]
    assert: AssertSpec,
    #[serde(flatten)]
    params: toml::Value,
}

fn default_reps() -> usize {
    1000
}

#[derive(Serialize)]
struct Emitted<T: Serialize> {
    experiment: String,
    seed: u64,
    reps: usize,
    report: T,
    pass: bool,
}

fn emit<T: Serialize>(out: &Option<PathBuf>, doc: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| e.to_string())?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| e.to_string())?;
    let file: SimulateFile = toml::from_str(&text).map_err(|e| e.to_string())?;
    let seed = args.seed.unwrap_or(file.seed);
    let reps = args.reps.unwrap_or(file.reps);
    match file.experiment.as_str() {
        "theorem-optimal" => {
            let cfg: TheoremOptimalConfig =
                file.params.try_into().map_err(|e| format!("params: {e}"))?;
            let report = run_theorem_optimal(&cfg, seed, reps).map_err(|e| e.to_string())?;
            let mut pass = true;
            if let Some(max) = file.assert.freq_upper_max {
                pass &= report.violation.wilson.upper <= max;
            }
            if file.assert.dichotomy.unwrap_or(false) {
                pass &= report.dichotomy_ok == Some(true)
                    && verify_certificates(&cfg, seed, &report, 32).map_err(|e| e.to_string())?;
            }
            emit(
                &args.out,
                &Emitted {
                    experiment: file.experiment,
                    seed,
                    reps,
                    report,
                    pass,
                },
            )?;
            Ok(pass)
        }
        "lower-bound" => {
            let cfg: LowerBoundConfig =
                file.params.try_into().map_err(|e| format!("params: {e}"))?;
            let report = run_lower_bound_blocks(&cfg, seed, reps).map_err(|e| e.to_string())?;
            let mut pass = true;
            if let Some(min) = file.assert.freq_lower_min {
                pass &= report.exceed.wilson.lower >= min;
            }
            emit(
                &args.out,
                &Emitted {
                    experiment: file.experiment,
                    seed,
                    reps,
                    report,
                    pass,
                },
            )?;
            Ok(pass)
        }
        "counter-example" => {
            #[derive(Deserialize)]
            #[serde(rename_all = "kebab-case")]
            struct CeParams {
                n_steps: usize,
                p_last: f64,
            }
            let p: CeParams = file.params.try_into().map_err(|e| format!("params: {e}"))?;
            let report =
                run_counter_example_exact(p.n_steps, p.p_last).map_err(|e| e.to_string())?;
            let mut pass = true;
            if let Some(expected) = &file.assert.distribution {
                pass &= report.distribution == *expected;
            }
            emit(
                &args.out,
                &Emitted {
                    experiment: file.experiment,
                    seed,
                    reps: 0,
                    report,
                    pass,
                },
            )?;
            Ok(pass)
        }
        other => Err(format!("unknown experiment '{other}'")),
    }
}

fn run_lln_cmd(args: &SimulateArgs) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| e.to_string())?;
    let file: SimulateFile = toml::from_str(&text).map_err(|e| e.to_string())?;
    if file.experiment != "lln" {
        return Err("lln expects experiment = \"lln\"".into());
    }
    let seed = args.seed.unwrap_or(file.seed);
    let reps = args.reps.unwrap_or(file.reps);
    let cfg: LlnConfig = file.params.try_into().map_err(|e| format!("params: {e}"))?;
    let report = run_lln(&cfg, seed, reps).map_err(|e| e.to_string())?;
    let mut pass = true;
    if let Some(max) = file.assert.freq_upper_max {
        pass &= report.exceed.wilson.upper <= max;
    }
    if let Some(min) = file.assert.freq_lower_min {
        pass &= report.exceed.wilson.lower >= min;
    }
    emit(
        &args.out,
        &Emitted {
            experiment: "lln".into(),
            seed,
            reps,
            report,
            pass,
        },
    )?;
    Ok(pass)
}

fn run_enumerate(args: &EnumerateArgs) -> Result<bool, String> {
    let space = ObsSpace::binary();
    let count = space.seq_count(args.n_steps);
    let weights: Vec<f64> = (0..count)
        .map(|i| 1.0 + ((i * 13 + args.seed as usize) % 7) as f64)
        .collect();
    let base = ProbMeasure::new(space, args.n_steps, weights).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut reports = Vec::new();
    for s in 0..args.sceptics {
        let seed = args.seed ^ (s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let r = enumerate_joint_martingale(&base, || {
            Box::new(RandomSceptic::new(seed, args.magnitude))
        })
        .map_err(|e| e.to_string())?;
        worst = worst.max(r.max_abs_deviation);
        reports.push(r.max_abs_deviation);
    }
    let pass = worst <= args.tolerance;
    emit(
        &args.out,
        &json!({
            "experiment": "enumerate",
            "n_steps": args.n_steps,
            "sceptics": args.sceptics,
            "max_abs_deviation": worst,
            "per_sceptic": reports,
            "tolerance": args.tolerance,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing --{name}"))
}

fn run_bounds(args: &BoundsArgs) -> Result<bool, String> {
    let doc = match args.name.as_str() {
        "g" => {
            let v = bounds::g_eval(
                need(args.x, "x")?,
                need(args.c, "c")?,
                need(args.k, "k")?,
                need(args.alpha, "alpha")?,
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "g", "x": args.x, "c": args.c, "k": args.k, "alpha": args.alpha, "value": v})
        }
        "lemma-ep" => {
            let xs: Vec<f64> = args
                .xs
                .as_deref()
                .ok_or("missing --xs")?
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let holds = bounds::lemma_ep_check(&xs, need(args.c, "c")?, need(args.alpha, "alpha")?)
                .map_err(|e| e.to_string())?;
            json!({"bound": "lemma-ep", "xs": xs, "c": args.c, "alpha": args.alpha, "holds": holds})
        }
        "hoeffding" => {
            let t = bounds::hoeffding_bound(
                need(args.u, "u")?,
                need(args.q, "q")?,
                need(args.k, "k")?,
                need(args.n, "n")?,
            );
            json!({"bound": "hoeffding", "u": args.u, "q": args.q, "k": args.k, "n": args.n,
                   "tight": t.tight, "coarse": t.coarse})
        }
        "chain" => {
            let v = bounds::regret_chain_bound(
                need(args.c, "c")?,
                need(args.k, "k")?,
                need(args.n, "n")?,
                args.gamma.unwrap_or(0.8),
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "chain", "c": args.c, "k": args.k, "n": args.n,
                   "gamma": args.gamma.unwrap_or(0.8), "value": v})
        }
        "regret-threshold" => {
            let v = bounds::regret_threshold(
                need(args.k, "k")?,
                need(args.n, "n")?,
                need(args.eps, "eps")?,
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "regret-threshold", "k": args.k, "n": args.n, "eps": args.eps, "value": v})
        }
        "no-restriction" => {
            let v = bounds::no_restriction_bound(
                need(args.delta, "delta")?,
                need(args.k, "k")?,
                need(args.n, "n")?,
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "no-restriction", "delta": args.delta, "k": args.k, "n": args.n, "value": v})
        }
        "risk-aggregation" => {
            let a = need(args.a, "a")?;
            let c = need(args.c, "c")?;
            let k = need(args.k, "k")?;
            match args.t {
                Some(t) => {
                    let v = bounds::risk_aggregation_e(a, c, k, t).map_err(|e| e.to_string())?;
                    json!({"bound": "risk-aggregation", "a": a, "c": c, "k": k, "t": t, "value": v})
                }
                None => {
                    let (t, v) =
                        bounds::risk_aggregation_inf(a, c, k).map_err(|e| e.to_string())?;
                    json!({"bound": "risk-aggregation-inf", "a": a, "c": c, "k": k,
                           "argmin_t": t, "value": v})
                }
            }
        }
        "feller" => {
            let v =
                bounds::feller_bound(need(args.c, "c")?, need(args.k, "k")?, need(args.n, "n")?);
            json!({"bound": "feller", "c": args.c, "k": args.k, "n": args.n, "value": v})
        }
        "lln-threshold" => {
            let v = bounds::lln_threshold(
                need(args.k, "k")?,
                need(args.n, "n")?,
                need(args.eps, "eps")?,
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "lln-threshold", "k": args.k, "n": args.n, "eps": args.eps, "value": v})
        }
        "lower-bound" => {
            let e = bounds::lower_bound_eval(
                need(args.k, "k")?,
                need(args.n, "n")?,
                need(args.eps, "eps")?,
            )
            .map_err(|e| e.to_string())?;
            json!({"bound": "lower-bound", "k": args.k, "n": args.n, "eps": args.eps,
                   "threshold": e.threshold, "floor": e.floor,
                   "floor_improved": e.floor_improved, "condition_ok": e.condition_ok})
        }
        other => return Err(format!("unknown bound '{other}'")),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?
    );
    Ok(true)
}

fn run_lp_check(args: &LpCheckArgs) -> Result<bool, String> {
    let text = std::fs::read_to_string(&args.instance).map_err(|e| e.to_string())?;
    let inst: DualityInstance = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let primal = solve_primal(&inst).map_err(|e| e.to_string())?;
    let dual = solve_dual(&inst).map_err(|e| e.to_string())?;
    let gap = (primal.objective - dual.objective).abs();
    let pass = primal.status == SolveStatus::Optimal
        && dual.status == SolveStatus::Optimal
        && gap <= args.gap;
    emit(
        &args.out,
        &json!({
            "primal_status": primal.status,
            "dual_status": dual.status,
            "primal_objective": primal.objective,
            "dual_objective": dual.objective,
            "gap": gap,
            "branch_probabilities": primal.x,
            "ticket_strategy": dual.z,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn run_market_demo(args: &MarketDemoArgs) -> Result<bool, String> {
    let mut reader = csv::Reader::from_path(&args.orders).map_err(|e| e.to_string())?;
    let mut book = OrderBook::new();
    let mut out: Vec<String> = vec!["order_seq,event,maker_id,price,qty".into()];
    for (seq, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let get = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let timestamp: u64 = get(0)
            .parse()
            .map_err(|_| format!("row {seq}: bad timestamp"))?;
        let side = match get(1).as_str() {
            "buy" => Side::Buy,
            "sell" => Side::Sell,
            other => return Err(format!("row {seq}: bad side '{other}'")),
        };
        for id in book.expire_orders(timestamp) {
            out.push(format!("{seq},expired,{id},,"));
        }
        match get(2).as_str() {
            "limit" => {
                let price: f64 = get(3).parse().map_err(|_| format!("row {seq}: bad price"))?;
                let ticks = gtsim::market::price_to_ticks(price).map_err(|e| e.to_string())?;
                let qty: u64 = get(4).parse().map_err(|_| format!("row {seq}: bad qty"))?;
                let expiry = {
                    let e = get(5);
                    if e.is_empty() {
                        None
                    } else {
                        Some(
                            e.parse::<u64>()
                                .map_err(|_| format!("row {seq}: bad expiry"))?,
                        )
                    }
                };
                match book.submit_limit(side, ticks, qty, expiry, 1) {
                    Ok(id) => out.push(format!("{seq},rested,{id},{price},{qty}")),
                    Err(e) => out.push(format!("{seq},rejected,,,{e}").replace(',', ";")),
                }
            }
            "market" => {
                let qty: u64 = get(4).parse().map_err(|_| format!("row {seq}: bad qty"))?;
                let fills = book.submit_market(side, qty).map_err(|e| e.to_string())?;
                for f in fills {
                    out.push(format!(
                        "{seq},fill,{},{},{}",
                        f.maker_id,
                        f.price_ticks as f64 / 10_000.0,
                        f.qty
                    ));
                }
            }
            other => return Err(format!("row {seq}: bad kind '{other}'")),
        }
        book.check_invariants().map_err(|e| e.to_string())?;
    }
    let text = out.join("\n") + "\n";
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| e.to_string())?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Enumerate(args) => run_enumerate(args),
        Command::Lln(args) => run_lln_cmd(args),
        Command::Bounds(args) => run_bounds(args),
        Command::LpCheck(args) => run_lp_check(args),
        Command::MarketDemo(args) => run_market_demo(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertions failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
