use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use aztec_core::asymptotics::{
    constants, decay_fit, product_asym_sweep, product_ratio_limit, products_csv, superfactorial_asym,
    superfactorial_ratio, ProductSelector,
};
use aztec_core::correlation::{
    corr_exact, corr_limit_balanced, corr_limit_charged, coulomb_predict, transform, BalancedOptions, ChargedOptions,
    ChargedStrategy, InnerLimit, TransformKind,
};
use aztec_core::exact_count::{count_ar_defects, CountMode, CountResult};
use aztec_core::exact_value::render;
use aztec_core::match_oracle::{count_matchings, region_graph};
use aztec_core::par::Exec;
use aztec_core::suites::{run_suite, Suite, SuiteOptions, DEFAULT_SEED};
use aztec_core::{parse_config, Error, NumericContext};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "aztec", version, about = "Exact counts and correlations for defected Aztec regions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 64)]
    digits: usize,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Include wall time in the JSON report (makes it nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    /// Run schedule sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Number of perfect matchings of AR_{2n,2n+k-l}(H,S).
    Count {
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        holes: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        seps: Vec<i64>,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Cross-check against the explicit matching counter.
        #[arg(long)]
        oracle: bool,
    },
    /// Correlation of a defect configuration such as "h@0 h@1 | s@5 s@6".
    Correlate {
        config: String,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Comma list or `a:b:geometric`.
        #[arg(long)]
        n_schedule: Option<String>,
        #[arg(long)]
        d_schedule: Option<String>,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Strategy::Pairs)]
        strategy: Strategy,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = suite_names())]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
    },
    /// Constants, kernel product asymptotics, superfactorials and decay fits.
    Asymptotics {
        #[arg(value_enum)]
        topic: Topic,
        #[arg(long, value_enum)]
        selector: Option<Selector>,
        #[arg(long)]
        d_schedule: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        /// The two clusters for `decay`, each in its own frame, e.g. `--pair "h@0 h@1" "s@0 s@1"`.
        #[arg(long, num_args = 2)]
        pair: Vec<String>,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Compress, standardize or canonically rearrange a configuration.
    Transform {
        config: String,
        #[arg(long, value_enum)]
        kind: Kind,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exact,
    Log,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Method {
    Exact,
    Limit,
    Predict,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Pairs,
    Nested,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topic {
    Constants,
    Products,
    Superfactorial,
    Decay,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    #[value(name = "L_odd")]
    LOdd,
    #[value(name = "U_odd")]
    UOdd,
    #[value(name = "L_even")]
    LEven,
    #[value(name = "U_even")]
    UEven,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Compress,
    Standardize,
    Canonical,
}

fn suite_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(Suite::ALL.map(|s| s.name()))
}

#[derive(Serialize)]
struct CheckOut {
    name: String,
    anchor: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    inputs: Value,
    results: Value,
    checks: Vec<CheckOut>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u128>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DuplicateCoordinate(_)
            | Error::Malformed { .. }
            | Error::InvalidRegion(_)
            | Error::ExactCap { .. }
            | Error::WidthCap { .. }
            | Error::Unbalanced { .. }
            | Error::Domain(_)
            | Error::Precondition(_)
            | Error::Overlap(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

fn parse_schedule(s: &str) -> Result<Vec<i64>, Failure> {
    let bad = || Failure::Usage(format!("bad schedule {s:?}"));
    if let Some(rest) = s.strip_suffix(":geometric") {
        let (a, b) = rest.split_once(':').ok_or_else(bad)?;
        let (mut a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a <= 0 || b < a {
            return Err(bad());
        }
        let mut out = Vec::new();
        while a <= b {
            out.push(a);
            a *= 2;
        }
        return Ok(out);
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn positive(v: Vec<i64>) -> Result<Vec<u64>, Failure> {
    v.into_iter().map(|x| u64::try_from(x).map_err(|_| Failure::Usage(format!("{x} must be positive")))).collect()
}

fn ctx(digits: usize) -> Result<std::sync::Arc<NumericContext>, Failure> {
    Ok(NumericContext::shared(digits)?)
}

fn run(cli: &Cli, report: &mut RunReport) -> Result<(), Failure> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match &cli.cmd {
        Cmd::Count { n, holes, seps, mode, oracle } => {
            report.command = "count".into();
            report.inputs = json!({"n": n, "holes": holes, "seps": seps, "mode": mode, "oracle": oracle});
            let m = match mode {
                Mode::Exact => CountMode::Exact,
                Mode::Log => CountMode::Log,
            };
            let res = count_ar_defects(*n, holes, seps, m, cli.digits)?;
            match &res {
                CountResult::Exact(v) => {
                    report.results = json!({"count": v.to_string()});
                    eprintln!("M = {v}");
                }
                CountResult::Log { value, digits } => {
                    report.results = json!({"ln_count": render(value, *digits)});
                    eprintln!("ln M = {}", render(value, 20));
                }
            }
            if *oracle {
                let g = region_graph(*n as usize, holes, seps)?;
                let o = count_matchings(&g)?;
                let pass = res.exact().is_some_and(|v| *v == o);
                report.checks.push(CheckOut {
                    name: "matching oracle".into(),
                    anchor: "rectangle count product formula".into(),
                    pass,
                    detail: o.to_string(),
                });
                eprintln!("oracle = {o} ({})", if pass { "agrees" } else { "MISMATCH" });
            }
        }
        Cmd::Correlate { config, method, n_schedule, d_schedule, order, strategy } => {
            report.command = "correlate".into();
            report.inputs = json!({"config": config, "method": method, "n_schedule": n_schedule,
                "d_schedule": d_schedule, "order": order});
            let cfg = parse_config(config)?;
            let c = ctx(cli.digits)?;
            match method {
                Method::Exact | Method::Predict => {
                    let v = if *method == Method::Exact {
                        corr_exact(&cfg.without_clusters())?
                    } else {
                        let parts: Vec<_> =
                            cfg.cluster_configs().into_iter().map(|p| (p.min_pos().unwrap_or(0), p)).collect();
                        coulomb_predict(&parts.into_iter().map(|(x, p)| (p, x)).collect::<Vec<_>>())?
                    };
                    eprintln!("{v} = {}", v.to_f64(&c));
                    report.results = json!({"method": method, "exact": v.to_json(&c),
                        "numeric": v.to_json(&c).decimal, "residual": null, "samples": []});
                }
                Method::Limit => {
                    let flat = cfg.without_clusters();
                    let ns = n_schedule.as_deref().map(parse_schedule).transpose()?.map(positive).transpose()?;
                    let est = if flat.charge() == 0 {
                        let mut o = BalancedOptions { order: *order, exec, ..BalancedOptions::default() };
                        if let Some(ns) = ns {
                            o.n_schedule = ns;
                        }
                        corr_limit_balanced(&flat, &o, &c)?
                    } else {
                        let mut o = ChargedOptions { order: *order, exec, ..ChargedOptions::default() };
                        if let Some(ds) = d_schedule {
                            o.d_schedule = parse_schedule(ds)?;
                        }
                        if let Some(ns) = ns {
                            o.inner = InnerLimit::Extrapolated(BalancedOptions { n_schedule: ns, ..BalancedOptions::default() });
                        }
                        o.strategy = match strategy {
                            Strategy::Pairs => ChargedStrategy::Pairs,
                            Strategy::Nested => ChargedStrategy::Nested,
                        };
                        corr_limit_charged(&flat, &o, &c)?
                    };
                    let j = est.to_json(cli.digits);
                    eprintln!("{} (residual {})", render(&est.value, 20), j.residual);
                    report.results = json!({"method": method, "exact": null, "numeric": j.value,
                        "residual": j.residual, "order": j.order, "samples": j.samples});
                }
            }
        }
        Cmd::Verify { suite, seed, sizes } => {
            report.command = "verify".into();
            report.inputs = json!({"suite": suite, "seed": seed, "sizes": sizes});
            let s = Suite::parse(suite)?;
            let c = ctx(cli.digits)?;
            let r = run_suite(s, &SuiteOptions { seed: *seed, sizes: sizes.clone(), exec }, &c)?;
            for ch in &r.checks {
                if !ch.pass {
                    eprintln!("FAIL {}: {}", ch.name, ch.detail);
                }
            }
            eprintln!("{}: {} passed, {} failed", suite, r.passed, r.failed);
            report.results = json!({"suite": suite, "passed": r.passed, "failed": r.failed});
            report.checks = r
                .checks
                .into_iter()
                .map(|c| CheckOut { name: c.name, anchor: c.anchor.into(), pass: c.pass, detail: c.detail })
                .collect();
        }
        Cmd::Asymptotics { topic, selector, d_schedule, n, pair, csv_out } => {
            report.command = "asymptotics".into();
            let c = ctx(cli.digits)?;
            match topic {
                Topic::Constants => {
                    report.inputs = json!({"topic": "constants"});
                    let t = constants(&c);
                    let mut vals = serde_json::Map::new();
                    for k in t.entries() {
                        vals.insert(k.name.into(), json!({"value": render(&k.value, cli.digits), "formula": k.formula}));
                        eprintln!("{:>8} = {}", k.name, render(&k.value, 30));
                    }
                    report.results = Value::Object(vals);
                    for id in t.identities(&c, 30) {
                        report.checks.push(CheckOut {
                            name: id.name.into(),
                            anchor: "constant identities".into(),
                            pass: id.holds,
                            detail: id.difference,
                        });
                    }
                }
                Topic::Products => {
                    let ds = positive(parse_schedule(d_schedule.as_deref().unwrap_or("1024:1048576:geometric"))?)?;
                    let sels: Vec<ProductSelector> = match selector {
                        None => ProductSelector::ALL.to_vec(),
                        Some(Selector::LOdd) => vec![ProductSelector::LOdd],
                        Some(Selector::UOdd) => vec![ProductSelector::UOdd],
                        Some(Selector::LEven) => vec![ProductSelector::LEven],
                        Some(Selector::UEven) => vec![ProductSelector::UEven],
                    };
                    report.inputs = json!({"topic": "products", "d_schedule": ds});
                    let mut all = Vec::new();
                    let mut out = Vec::new();
                    for sel in sels {
                        let rs = product_asym_sweep(sel, &ds, exec, &c)?;
                        let lim = if rs.len() >= 5 { Some(product_ratio_limit(&rs, 4)?) } else { None };
                        eprintln!(
                            "{}: ratio at d={} is {}",
                            sel.name(),
                            ds.last().unwrap(),
                            render(&rs.last().unwrap().ratio, 15)
                        );
                        out.push(json!({
                            "selector": sel.name(),
                            "rows": rs.iter().map(|r| json!({"d": r.d, "product": render(&r.product, 20),
                                "predicted": render(&r.predicted, 20), "ratio": render(&r.ratio, 20)})).collect::<Vec<_>>(),
                            "extrapolated_ratio": lim.as_ref().map(|l| render(&l.value, 20)),
                            "residual": lim.as_ref().map(|l| render(&l.residual, 6)),
                        }));
                        all.extend(rs);
                    }
                    if let Some(p) = csv_out {
                        std::fs::write(p, products_csv(&all, 20)).map_err(|e| Failure::Run(e.to_string()))?;
                    }
                    report.results = Value::Array(out);
                }
                Topic::Superfactorial => {
                    let n = n.unwrap_or(1000);
                    report.inputs = json!({"topic": "superfactorial", "n": n});
                    let a = superfactorial_asym(n, &c)?;
                    let r = superfactorial_ratio(n, &c)?;
                    eprintln!("sf({n}) / asymptotic = {}", render(&r, 20));
                    report.results = json!({"asymptotic": render(&a, 20), "ratio": render(&r, 20)});
                }
                Topic::Decay => {
                    if pair.len() != 2 {
                        return Err(Failure::Usage("decay needs --pair A B".into()));
                    }
                    let parts = [parse_config(&pair[0])?.without_clusters(), parse_config(&pair[1])?.without_clusters()];
                    let ds = parse_schedule(d_schedule.as_deref().unwrap_or("16:1024:geometric"))?;
                    report.inputs = json!({"topic": "decay", "pair": pair, "d_schedule": ds});
                    let fit = decay_fit(&parts[0], &parts[1], &ds, exec, &c)?;
                    eprintln!("exponent {} (expected {})", fit.exponent, fit.expected_exponent);
                    report.results = serde_json::to_value(&fit).expect("serializable");
                }
            }
        }
        Cmd::Transform { config, kind } => {
            report.command = "transform".into();
            report.inputs = json!({"config": config});
            let k = match kind {
                Kind::Compress => TransformKind::Compress,
                Kind::Standardize => TransformKind::Standardize,
                Kind::Canonical => TransformKind::Canonical,
            };
            let out = transform(&parse_config(config)?, k)?;
            eprintln!("{out}");
            report.results = json!({"config": out.to_string(), "json": out.to_json()});
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = RunReport {
        command: String::new(),
        inputs: Value::Null,
        results: Value::Null,
        checks: Vec::new(),
        pass: true,
        wall_ms: None,
    };
    let outcome = run(&cli, &mut report);
    let code = match outcome {
        Ok(()) => {
            report.pass = report.checks.iter().all(|c| c.pass);
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    if cli.timing {
        report.wall_ms = Some(start.elapsed().as_millis());
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    if let Some(p) = &cli.json_out {
        if let Err(e) = std::fs::write(p, &text) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
