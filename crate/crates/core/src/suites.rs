//! Named verification suites driven by the command line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use serde::Serialize;

use crate::asymptotics::{
    constants, decay_fit, product_asym_sweep, product_ratio_limit, richardson_extrapolate, superfactorial_ratio,
    telescoping_check, ProductSelector,
};
use crate::correlation::{
    corr_exact, corr_exact_with, corr_limit_balanced, corr_tilde_finite, coulomb_predict, doublet_family_ratio,
    BalancedOptions, PlanStrategy,
};
use crate::error::{Error, Result};
use crate::exact_count::{count_ar_defects, count_rbar, factorization_check, CountMode};
use crate::exact_value::ExactValue;
use crate::kernels::{exactness_ratio, move_ratio};
use crate::lattice::{Defect, DefectConfig, Kind};
use crate::match_oracle::{build_graph, count_matchings, rbar_graph, region_graph, trimer_expansion_check};
use crate::numeric::NumericContext;
use crate::par::Exec;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FormulaVsOracle,
    Trimer,
    Exactness,
    Moves,
    NiceSupport,
    Telescoping,
    Constants,
    Decay,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::FormulaVsOracle,
        Suite::Trimer,
        Suite::Exactness,
        Suite::Moves,
        Suite::NiceSupport,
        Suite::Telescoping,
        Suite::Constants,
        Suite::Decay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FormulaVsOracle => "formula-vs-oracle",
            Suite::Trimer => "trimer",
            Suite::Exactness => "exactness",
            Suite::Moves => "moves",
            Suite::NiceSupport => "nice-support",
            Suite::Telescoping => "telescoping",
            Suite::Constants => "constants",
            Suite::Decay => "decay",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity or value under test.
    pub anchor: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Size parameters; meaning depends on the suite (largest n for counts).
    pub sizes: Option<Vec<u64>>,
    pub exec: Exec,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: DEFAULT_SEED, sizes: None, exec: Exec::default() }
    }
}

struct Log {
    checks: Vec<Check>,
}

impl Log {
    fn push(&mut self, name: impl Into<String>, anchor: &'static str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), anchor, pass, detail: detail.into() });
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions, ctx: &NumericContext) -> Result<SuiteReport> {
    let mut log = Log { checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    match suite {
        Suite::FormulaVsOracle => formula_vs_oracle(&mut log, &mut rng, opts)?,
        Suite::Trimer => trimer(&mut log, &mut rng)?,
        Suite::Exactness => exactness(&mut log, &mut rng)?,
        Suite::Moves => moves(&mut log, &mut rng, ctx)?,
        Suite::NiceSupport => nice_support(&mut log, &mut rng, opts, ctx)?,
        Suite::Telescoping => telescoping(&mut log, opts)?,
        Suite::Constants => constants_suite(&mut log, opts, ctx)?,
        Suite::Decay => decay(&mut log, opts, ctx)?,
    }
    let failed = log.checks.iter().filter(|c| !c.pass).count();
    Ok(SuiteReport { suite, seed: opts.seed, passed: log.checks.len() - failed, failed, checks: log.checks })
}

/// Random labels `H`, `S` for `AR_{2n,2n+k-l}` with `k, l ≤ max_kl`.
pub fn random_region(rng: &mut ChaCha8Rng, n: u64, max_kl: u64) -> (Vec<i64>, Vec<i64>) {
    loop {
        let k = rng.random_range(0..=max_kl);
        let l = rng.random_range(0..=max_kl.min(n));
        let len = 2 * n + k - l;
        if k + l > len {
            continue;
        }
        let mut labels: Vec<i64> = (1..=len as i64).collect();
        labels.shuffle(rng);
        let mut h = labels[..k as usize].to_vec();
        let mut s = labels[k as usize..(k + l) as usize].to_vec();
        h.sort();
        s.sort();
        return (h, s);
    }
}

/// Random configuration with `1..=max_defects` defects in `[-span, span]`.
pub fn random_config(rng: &mut ChaCha8Rng, max_defects: usize, span: i64) -> DefectConfig {
    let k = rng.random_range(1..=max_defects);
    let mut pos: Vec<i64> = (-span..=span).collect();
    pos.shuffle(rng);
    let d = pos[..k]
        .iter()
        .map(|&p| Defect { pos: p, kind: if rng.random_bool(0.5) { Kind::Hole } else { Kind::Separation } })
        .collect();
    DefectConfig::new(d).expect("distinct positions")
}

/// Random charge-zero configuration with `2..=max_defects` defects.
pub fn random_balanced(rng: &mut ChaCha8Rng, max_defects: usize, span: i64) -> DefectConfig {
    let pairs = rng.random_range(1..=max_defects / 2);
    let mut pos: Vec<i64> = (-span..=span).collect();
    pos.shuffle(rng);
    let d = pos[..2 * pairs]
        .iter()
        .enumerate()
        .map(|(i, &p)| Defect { pos: p, kind: if i < pairs { Kind::Hole } else { Kind::Separation } })
        .collect();
    DefectConfig::new(d).expect("distinct positions")
}

fn exact_count(n: u64, h: &[i64], s: &[i64]) -> Result<rug::Integer> {
    Ok(count_ar_defects(n, h, s, CountMode::Exact, 0)?.exact().cloned().expect("exact mode"))
}

fn formula_vs_oracle(log: &mut Log, rng: &mut ChaCha8Rng, opts: &SuiteOptions) -> Result<()> {
    let max_n = opts.sizes.as_ref().and_then(|s| s.iter().max().copied()).unwrap_or(4);
    let anchor = "rectangle count product formula";
    for i in 0..200 {
        let n = 1 + i % max_n;
        let (h, s) = random_region(rng, n, 3);
        let formula = exact_count(n, &h, &s)?;
        let oracle = count_matchings(&region_graph(n as usize, &h, &s)?)?;
        log.push(format!("n={n} H={h:?} S={s:?}"), anchor, formula == oracle, format!("{formula} vs {oracle}"));
        let f = factorization_check(n, &h, &s)?;
        log.push(format!("split n={n} H={h:?} S={s:?}"), "factorization into two R-bar counts", f.holds, f.rhs);
    }
    let fig = count_rbar(5, 9, &[1, 2, 4, 7, 9])?;
    log.push("R-bar(5,9,{1,2,4,7,9})", "R-bar count", fig == 34_406_400, fig.to_string());
    for _ in 0..100 {
        let m = rng.random_range(1..=4u64);
        let n = rng.random_range(m..=7u64);
        let mut t: Vec<i64> = (1..=n as i64).collect();
        t.shuffle(rng);
        let mut t = t[..m as usize].to_vec();
        t.sort();
        let formula = count_rbar(m, n, &t)?;
        let oracle = count_matchings(&rbar_graph(m as usize, n as usize, &t)?)?;
        log.push(format!("R-bar m={m} n={n} T={t:?}"), "R-bar count", formula == oracle, formula.to_string());
    }
    Ok(())
}

fn trimer(log: &mut Log, rng: &mut ChaCha8Rng) -> Result<()> {
    for _ in 0..30 {
        let n = rng.random_range(1..=2u64);
        let k = rng.random_range(0..=2u64);
        let len = 2 * n + k - 1;
        let mut labels: Vec<i64> = (1..=len as i64).collect();
        labels.shuffle(rng);
        let v = labels[0];
        let mut h = labels[1..=k as usize].to_vec();
        h.sort();
        let r = trimer_expansion_check(n as usize, &h, &[v], v)?;
        log.push(format!("n={n} H={h:?} S=[{v}]"), "separation count as a sum of four trimer deletions", r.holds, r.split_count);
    }
    Ok(())
}

fn exactness(log: &mut Log, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut done = 0;
    while done < 50 {
        let c = random_config(rng, 6, 6);
        let (h, s) = (c.holes(), c.seps());
        if h.is_empty() || s.is_empty() {
            continue;
        }
        let a = h[rng.random_range(0..h.len())];
        let b = s[rng.random_range(0..s.len())];
        let lhs = corr_exact(&c)? / corr_exact(&c.swapped(a, b)?)?;
        let rhs = exactness_ratio(&c, a, b)?;
        log.push(format!("{c} swap {a},{b}"), "exactness of the Coulomb energy ratio", lhs == rhs, lhs.to_string());
        done += 1;
    }
    Ok(())
}

fn moves(log: &mut Log, rng: &mut ChaCha8Rng, ctx: &NumericContext) -> Result<()> {
    let prec = ctx.prec();
    let ns: Vec<u64> = (4..=9).map(|k| 1u64 << k).collect();
    let mut done = 0;
    while done < 20 {
        let c = random_config(rng, 4, 4);
        let movable: Vec<i64> = c.support().into_iter().filter(|&x| c.kind_at(x - 1).is_none()).collect();
        if movable.is_empty() {
            continue;
        }
        let x = movable[rng.random_range(0..movable.len())];
        let moved = c.moved(x, x - 1)?;
        let want = move_ratio(&c, x, -1)?.to_float(ctx);
        let mut samples = Vec::new();
        let mut disc = Vec::new();
        for &n in &ns {
            let r: Rational = corr_tilde_finite(&c, n)? / corr_tilde_finite(&moved, n)?;
            let v = Float::with_val(prec, &r);
            disc.push((Float::with_val(prec, &v - &want) / &want).to_f64().abs());
            samples.push((Float::with_val(prec, 1) / n, v));
        }
        let est = richardson_extrapolate(&samples, 4)?;
        let extrap = (Float::with_val(prec, &est.value - &want) / &want).to_f64().abs();
        let at256 = disc[ns.iter().position(|&n| n == 256).unwrap()];
        let halving = disc[disc.len() - 2] / disc[disc.len() - 1];
        let name = format!("{c} move {x}");
        let anchor = "one-unit move ratio of kernels";
        let (linear, note) = if disc.iter().all(|&d| d < 1e-30) {
            (true, "exact at every n".to_string())
        } else {
            ((1.6..2.4).contains(&halving), format!("error ratio {halving:.3}"))
        };
        log.push(format!("{name}: O(1/n)"), anchor, linear, note);
        log.push(format!("{name}: n=256 within 1e-2"), anchor, at256 <= 1e-2, format!("{at256:.3e}"));
        log.push(format!("{name}: extrapolated within 1e-5"), anchor, extrap <= 1e-5, format!("{extrap:.3e}"));
        done += 1;
    }
    for i in 0..50u64 {
        let c = random_config(rng, 6, 6);
        let a = corr_exact_with(&c, PlanStrategy::Randomized(2 * i))?;
        let b = corr_exact_with(&c, PlanStrategy::Randomized(2 * i + 1))?;
        log.push(format!("{c} plans"), "independence of the move plan", a == b, a.to_string());
    }
    Ok(())
}

fn nice_support(log: &mut Log, rng: &mut ChaCha8Rng, opts: &SuiteOptions, ctx: &NumericContext) -> Result<()> {
    let cfg = |h: &[i64], s: &[i64]| DefectConfig::from_sets(h, s).expect("distinct");
    let inv_pi = |k: i64| ExactValue::pi_pow_halves(-2 * k);
    let cases = [
        (cfg(&[0, 1], &[]), inv_pi(1), "two adjacent holes"),
        (cfg(&[], &[0, 1]), ExactValue::from_u64(2) * inv_pi(1), "two adjacent separations"),
        (cfg(&[0, 1], &[5, 6]), inv_pi(2), "hole pair with separation pair"),
        (cfg(&[0], &[]), ExactValue::w(), "unit hole"),
    ];
    for (c, want, anchor) in cases {
        let got = corr_exact(&c)?;
        log.push(format!("{c}"), anchor, got == want, got.to_string());
    }
    for n in 1..=6u64 {
        for _ in 0..8 {
            let s = random_doublets(rng, n);
            let formula = doublet_family_ratio(n, &s)?;
            let (h, sp) = doublet_labels(&s);
            let num = count_matchings(&build_graph(2 * n as usize, 2 * n as usize, &h, &sp)?)?;
            let den = count_matchings(&build_graph(2 * n as usize, 2 * n as usize, &[], &[])?)?;
            let oracle = Rational::from((num, den));
            log.push(format!("doublets n={n} s={s:?} oracle"), "finite doublet-family ratio", formula == oracle, formula.to_string());
        }
    }
    for _ in 0..50 {
        let n = rng.random_range(7..=60u64);
        let s = random_doublets(rng, n);
        let formula = doublet_family_ratio(n, &s)?;
        let (h, sp) = doublet_labels(&s);
        let ratio = Rational::from((exact_count(n, &h, &sp)?, exact_count(n, &[], &[])?));
        log.push(format!("doublets n={n} s={s:?} formula"), "finite doublet-family ratio", formula == ratio, formula.to_string());
    }
    let configs: Vec<DefectConfig> = (0..20).map(|_| random_balanced(rng, 4, 6)).collect();
    let bal = BalancedOptions { exec: opts.exec, ..BalancedOptions::default() };
    for c in &configs {
        let exact = corr_exact(c)?.to_float(ctx);
        let lim = corr_limit_balanced(c, &bal, ctx)?;
        let rel = (Float::with_val(ctx.prec(), &lim.value - &exact) / &exact).to_f64().abs();
        log.push(
            format!("{c} limit"),
            "finite-diamond limit against the exact value",
            rel <= 1e-4,
            format!("rel {rel:.2e} residual {:.2e}", lim.relative_residual()),
        );
    }
    Ok(())
}

fn random_doublets(rng: &mut ChaCha8Rng, n: u64) -> Vec<u64> {
    let k = rng.random_range(1..=n.min(4));
    let mut all: Vec<u64> = (0..n).collect();
    all.shuffle(rng);
    let mut s = all[..k as usize].to_vec();
    s.sort();
    s
}

fn doublet_labels(s: &[u64]) -> (Vec<i64>, Vec<i64>) {
    (s.iter().map(|&x| 2 * x as i64 + 1).collect(), s.iter().map(|&x| 2 * x as i64 + 2).collect())
}

fn telescoping(log: &mut Log, opts: &SuiteOptions) -> Result<()> {
    let d_max = opts.sizes.as_ref().and_then(|s| s.iter().max().copied()).unwrap_or(50);
    let r = telescoping_check(d_max)?;
    let anchor = "telescoping of the modified kernel products";
    log.push(format!("odd arguments d <= {d_max}"), anchor, r.odd_holds, format!("{:?}", r.first_failure));
    log.push(format!("even arguments d <= {d_max}"), anchor, r.even_holds, format!("{:?}", r.first_failure));
    Ok(())
}

fn constants_suite(log: &mut Log, opts: &SuiteOptions, ctx: &NumericContext) -> Result<()> {
    let table = constants(ctx);
    for id in table.identities(ctx, 30) {
        log.push(id.name, "constant identities", id.holds, id.difference);
    }
    let a = table.a.value.to_string_radix(10, Some(12));
    log.push("A digits", "Glaisher-Kinkelin constant", a.starts_with("1.28242712"), a);
    let sf = superfactorial_ratio(1000, ctx)?.to_f64();
    log.push("superfactorial n=1000", "Glaisher's superfactorial formula", (sf - 1.0).abs() < 1e-3, format!("{sf}"));
    let ds: Vec<u64> = (10..=20).map(|k| 1u64 << k).collect();
    for sel in ProductSelector::ALL {
        let reports = product_asym_sweep(sel, &ds, opts.exec, ctx)?;
        let est = product_ratio_limit(&reports, 4)?;
        let dev = (est.value.to_f64() - 1.0).abs();
        log.push(format!("{} limit", sel.name()), "kernel product asymptotics", dev < 1e-4, format!("{dev:.3e}"));
        let gaps: Vec<f64> = reports.iter().map(|r| (r.ratio.to_f64() - 1.0).abs()).collect();
        let monotone = gaps.windows(2).skip(1).all(|w| w[1] <= w[0]);
        log.push(format!("{} monotone", sel.name()), "kernel product asymptotics", monotone, fmt_list(&gaps));
    }
    Ok(())
}

fn decay(log: &mut Log, opts: &SuiteOptions, ctx: &NumericContext) -> Result<()> {
    let cfg = |h: &[i64], s: &[i64]| DefectConfig::from_sets(h, s).expect("distinct");
    let ds: Vec<i64> = (4..=10).map(|k| 1i64 << k).collect();
    let anchor = "Coulomb law for cluster pairs";
    let families = [
        (cfg(&[0, 1], &[]), cfg(&[], &[0, 1])),
        (cfg(&[0], &[]), cfg(&[0], &[])),
        (cfg(&[0], &[]), cfg(&[], &[0])),
    ];
    for (a, b) in &families {
        let fit = decay_fit(a, b, &ds, opts.exec, ctx)?;
        let dev = (fit.exponent - fit.expected_exponent).abs();
        log.push(format!("exponent {a} vs {b}"), anchor, dev <= 1e-2, format!("{:.5} vs {}", fit.exponent, fit.expected_exponent));
        let ratios: Vec<f64> = fit.points.iter().map(|p| (p.ratio - 1.0).abs()).collect();
        let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
        log.push(format!("monotone {a} vs {b}"), anchor, monotone, fmt_list(&ratios));
        if fit.charges == (2, -2) {
            let last = fit.points.last().unwrap().ratio;
            log.push("ratio at 1024", anchor, (0.99..=1.01).contains(&last), format!("{last}"));
        }
    }
    let pair = cfg(&[0, 1], &[]);
    let anti = cfg(&[], &[0, 1]);
    for d in [512i64, 1024] {
        let joint = cfg(&[0, 1, 2 * d, 2 * d + 1], &[d, d + 1]);
        let r = corr_exact(&joint)?.to_f64(ctx)
            / coulomb_predict(&[(pair.clone(), 0), (anti.clone(), d), (pair.clone(), 2 * d)])?.to_f64(ctx);
        log.push(format!("three clusters at spacing {d}"), anchor, (0.98..=1.02).contains(&r), format!("{r}"));
    }
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
}
