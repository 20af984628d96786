//! Acceptance run: one PASS/FAIL line per criterion or sub-criterion.
//!
//! Exits nonzero when a line fails that is not on the `KNOWN` list below.
//! Known failures are still printed as FAIL.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use aztec_core::asymptotics::{
    constants, decay_fit, product_asym_sweep, product_ln, product_ratio_limit, richardson_extrapolate,
    telescoping_check, ProductSelector,
};
use aztec_core::correlation::{
    corr_exact, corr_limit_balanced, corr_tilde_finite, coulomb_predict, doublet_family_ratio, BalancedOptions,
};
use aztec_core::exact_count::{count_ar_defects, count_rbar, factorization_check, CountMode};
use aztec_core::kernels::{exactness_ratio, l_mod, move_ratio, u_mod};
use aztec_core::match_oracle::trimer_expansion_check;
use aztec_core::par::Exec;
use aztec_core::suites::{random_balanced, random_config, random_region};
use aztec_core::{DefectConfig, ExactValue, NumericContext};
use common::{board, rbar_count, region_count};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};

const SEED: u64 = 20_240_917;

/// Lines expected to fail; see the decisions ledger for the analysis.
const KNOWN: &[&str] = &["5c", "9b"];

// pinned tolerances
const TOL_ROUTE: f64 = 1e-4;
const TOL_MOVE_RAW: f64 = 1e-2;
const TOL_MOVE_EXTRAP: f64 = 1e-5;
const TOL_PRODUCT: f64 = 1e-4;
const TOL_EXPONENT: f64 = 1e-2;
const IDENTITY_DIGITS: u32 = 30;

struct Line {
    id: &'static str,
    title: &'static str,
    tol: &'static str,
    total: usize,
    failures: Vec<String>,
    note: String,
}

impl Line {
    fn new(id: &'static str, title: &'static str, tol: &'static str) -> Self {
        Line { id, title, tol, total: 0, failures: Vec::new(), note: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn exact_count(n: u64, h: &[i64], s: &[i64]) -> Integer {
    count_ar_defects(n, h, s, CountMode::Exact, 0).unwrap().exact().cloned().unwrap()
}

fn rel(a: &Float, b: &Float) -> f64 {
    (Float::with_val(a.prec(), a - b) / b).to_f64().abs()
}

fn counts(rng: &mut ChaCha8Rng) -> Vec<Line> {
    let mut l1 = Line::new("1", "count formula equals matching count", "exact");
    let mut l3 = Line::new("3", "factorization into two R-bar counts", "exact");
    for i in 0..200u64 {
        let n = 1 + i % 4;
        let (h, s) = random_region(rng, n, 3);
        let formula = exact_count(n, &h, &s);
        let oracle = region_count(n as usize, &h, &s);
        l1.check(formula == oracle, || format!("n={n} H={h:?} S={s:?}: {formula} vs {oracle}"));
        let f = factorization_check(n, &h, &s).unwrap();
        let len = (2 * n + h.len() as u64 - s.len() as u64) as usize;
        let split = (Integer::from(1) << (n - s.len() as u64) as u32)
            * rbar_count(n as usize, len, &f.t_o)
            * rbar_count(n as usize, len, &f.t_e);
        l3.check(f.holds && split == oracle, || format!("n={n} H={h:?} S={s:?}: {} vs {split}", f.rhs));
    }
    let mut l2 = Line::new("2", "R-bar count formula equals matching count", "exact");
    let fig = count_rbar(5, 9, &[1, 2, 4, 7, 9]).unwrap();
    let fig_oracle = rbar_count(5, 9, &[1, 2, 4, 7, 9]);
    l2.check(fig == 34_406_400 && fig_oracle == 34_406_400, || format!("m=5 n=9 instance {fig} / {fig_oracle}"));
    for m in 1..=4u64 {
        for _ in 0..25 {
            let n = rng.random_range(m..=7u64);
            let mut t: Vec<i64> = (1..=n as i64).collect();
            t.shuffle(rng);
            let mut t = t[..m as usize].to_vec();
            t.sort();
            let formula = count_rbar(m, n, &t).unwrap();
            let oracle = rbar_count(m as usize, n as usize, &t);
            l2.check(formula == oracle, || format!("m={m} n={n} T={t:?}: {formula} vs {oracle}"));
        }
    }
    vec![l1, l2, l3]
}

fn trimers(rng: &mut ChaCha8Rng) -> Line {
    let mut line = Line::new("4", "separation count as a sum of four trimer deletions", "exact");
    for _ in 0..30 {
        let n = rng.random_range(1..=2usize);
        let k = rng.random_range(0..=2usize);
        let len = 2 * n + k - 1;
        let mut labels: Vec<i64> = (1..=len as i64).collect();
        labels.shuffle(rng);
        let v = labels[0];
        let mut h = labels[1..=k].to_vec();
        h.sort();
        let whole = region_count(n, &h, &[v]);
        let repaired = board(2 * n, len, &h, &[]);
        let (mid, col) = (2 * n, (2 * v - 1) as usize);
        let center = repaired.find(mid, col).unwrap();
        let mut sum = Integer::new();
        for nc in [col - 1, col + 1] {
            for sc in [col - 1, col + 1] {
                if let (Some(a), Some(b)) = (repaired.find(mid - 1, nc), repaired.find(mid + 1, sc)) {
                    sum += repaired.remove(&[center, a, b]).matchings();
                }
            }
        }
        let lib = trimer_expansion_check(n, &h, &[v], v).unwrap();
        line.check(whole == sum && lib.holds && lib.split_count == whole.to_string(), || {
            format!("n={n} H={h:?} v={v}: {whole} vs {sum}, library {}", lib.split_count)
        });
    }
    line
}

fn closed_forms(ctx: &NumericContext) -> Vec<Line> {
    let inv_pi = ExactValue::pi_pow_halves(-2);
    let cases = [
        ("5a", "two adjacent holes give 1/pi", DefectConfig::from_sets(&[0, 1], &[]).unwrap(), inv_pi.clone()),
        (
            "5b",
            "two adjacent separations give 2/pi",
            DefectConfig::from_sets(&[], &[0, 1]).unwrap(),
            ExactValue::from_u64(2) * inv_pi.clone(),
        ),
        (
            "5c",
            "hole pair with separation pair at 5 gives 1/pi^2",
            DefectConfig::from_sets(&[0, 1], &[5, 6]).unwrap(),
            inv_pi.clone() * inv_pi,
        ),
    ];
    cases
        .into_iter()
        .map(|(id, title, c, want)| {
            let mut line = Line::new(id, title, "exact");
            let got = corr_exact(&c).unwrap();
            line.check(got == want, || format!("got {got}, expected {want}"));
            // independent numeric route for the same value
            let lim = corr_limit_balanced(&c, &BalancedOptions::default(), ctx).ok();
            if let Some(lim) = lim {
                line.note = format!(
                    "exact {:.12e}, finite-diamond limit {}",
                    got.to_f64(ctx),
                    lim.value.to_string_radix(10, Some(12))
                );
            }
            line
        })
        .collect()
}

fn random_doublets(rng: &mut ChaCha8Rng, n: u64) -> Vec<u64> {
    let k = rng.random_range(1..=n.min(4));
    let mut all: Vec<u64> = (0..n).collect();
    all.shuffle(rng);
    let mut s = all[..k as usize].to_vec();
    s.sort();
    s
}

fn doublets(rng: &mut ChaCha8Rng) -> Line {
    let mut line = Line::new("6", "finite doublet-family ratio", "exact");
    let labels = |s: &[u64]| -> (Vec<i64>, Vec<i64>) {
        (s.iter().map(|&x| 2 * x as i64 + 1).collect(), s.iter().map(|&x| 2 * x as i64 + 2).collect())
    };
    for i in 0..50u64 {
        let n = 1 + i % 6;
        let s = random_doublets(rng, n);
        let (h, sp) = labels(&s);
        let nn = 2 * n as usize;
        let oracle = Rational::from((board(nn, nn, &h, &sp).matchings(), board(nn, nn, &[], &[]).matchings()));
        let formula = doublet_family_ratio(n, &s).unwrap();
        line.check(formula == oracle, || format!("n={n} s={s:?} oracle: {formula} vs {oracle}"));
    }
    for _ in 0..50 {
        let n = rng.random_range(1..=60u64);
        let s = random_doublets(rng, n);
        let (h, sp) = labels(&s);
        let counted = Rational::from((exact_count(n, &h, &sp), exact_count(n, &[], &[])));
        let formula = doublet_family_ratio(n, &s).unwrap();
        line.check(formula == counted, || format!("n={n} s={s:?} counts: {formula} vs {counted}"));
    }
    line
}

fn route_agreement(rng: &mut ChaCha8Rng, ctx: &NumericContext) -> Line {
    let mut line = Line::new("7", "finite-diamond limit against the exact value", "rel 1e-4");
    let opts = BalancedOptions::default();
    let mut worst: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for _ in 0..20 {
        let c = random_balanced(rng, 4, 6);
        let exact = corr_exact(&c).unwrap().to_float(ctx);
        let lim = corr_limit_balanced(&c, &opts, ctx).unwrap();
        let r = rel(&lim.value, &exact);
        worst = worst.max(r);
        worst_res = worst_res.max(lim.relative_residual());
        line.check(r <= TOL_ROUTE, || format!("{c}: rel {r:.3e}, residual {:.3e}", lim.relative_residual()));
    }
    line.note = format!("n up to {}, worst rel {worst:.2e}, worst residual {worst_res:.2e}", opts.n_schedule.last().unwrap());
    line
}

fn exactness(rng: &mut ChaCha8Rng) -> Line {
    let mut line = Line::new("8", "hole-separation swap ratio equals the energy ratio", "exact");
    while line.total < 50 {
        let c = random_config(rng, 6, 6);
        let (h, s) = (c.holes(), c.seps());
        if h.is_empty() || s.is_empty() {
            continue;
        }
        let a = h[rng.random_range(0..h.len())];
        let b = s[rng.random_range(0..s.len())];
        let lhs = corr_exact(&c).unwrap() / corr_exact(&c.swapped(a, b).unwrap()).unwrap();
        // energy ratio from pair distances, computed here
        let mut num = Rational::from(1);
        let mut den = Rational::from(1);
        for d in c.defects() {
            if d.pos == a || d.pos == b {
                continue;
            }
            let (da, db) = (Rational::from((d.pos - a).abs()), Rational::from((d.pos - b).abs()));
            if d.kind == aztec_core::Kind::Hole {
                num *= &da;
                den *= &db;
            } else {
                num *= &db;
                den *= &da;
            }
        }
        // squared ratio: E(c)^2 / E(swap)^2 = (num/den)^2
        let sq = Rational::from(&num / &den).square();
        let rhs = exactness_ratio(&c, a, b).unwrap();
        let lhs_sq = (lhs.clone() * lhs.clone()).as_rational();
        line.check(lhs == rhs && lhs_sq.as_ref() == Some(&sq), || format!("{c} swap {a},{b}: {lhs} vs {rhs}"));
    }
    line
}

fn moves(rng: &mut ChaCha8Rng, ctx: &NumericContext) -> Vec<Line> {
    let prec = ctx.prec();
    let ns: Vec<u64> = (4..=9).map(|k| 1u64 << k).collect();
    let mut a = Line::new("9a", "move ratios converge at rate 1/n", "error ratio per doubling in [1.6, 2.4]");
    let mut b = Line::new("9b", "move ratio discrepancy at n = 256", "rel 1e-2");
    let mut c9 = Line::new("9c", "extrapolated move ratio discrepancy", "rel 1e-5, order 4 in 1/n");
    let mut worst_raw: f64 = 0.0;
    let mut worst_ext: f64 = 0.0;
    while a.total < 20 {
        let c = random_config(rng, 4, 4);
        let movable: Vec<i64> = c.support().into_iter().filter(|&x| c.kind_at(x - 1).is_none()).collect();
        if movable.is_empty() {
            continue;
        }
        let x = movable[rng.random_range(0..movable.len())];
        let moved = c.moved(x, x - 1).unwrap();
        let want = move_ratio(&c, x, -1).unwrap().to_float(ctx);
        let mut samples = Vec::new();
        let mut disc = Vec::new();
        for &n in &ns {
            let r = corr_tilde_finite(&c, n).unwrap() / corr_tilde_finite(&moved, n).unwrap();
            let v = Float::with_val(prec, &r);
            disc.push(rel(&v, &want));
            samples.push((Float::with_val(prec, 1) / n, v));
        }
        let est = richardson_extrapolate(&samples, 4).unwrap();
        let ext = rel(&est.value, &want);
        let raw = disc[4];
        worst_raw = worst_raw.max(raw);
        worst_ext = worst_ext.max(ext);
        let ratio = disc[4] / disc[5];
        let exact_everywhere = disc.iter().all(|&d| d < 1e-30);
        a.check(exact_everywhere || (1.6..=2.4).contains(&ratio), || format!("{c} move {x}: ratio {ratio:.3}"));
        b.check(raw <= TOL_MOVE_RAW, || format!("{c} move {x}: {raw:.3e}"));
        c9.check(ext <= TOL_MOVE_EXTRAP, || format!("{c} move {x}: {ext:.3e}"));
    }
    b.note = format!("worst {worst_raw:.3e}");
    c9.note = format!("worst {worst_ext:.3e}");
    vec![a, b, c9]
}

fn gamma_l(d: i64, prec: u32) -> Float {
    let g = |x: f64| Float::with_val(prec, x).gamma();
    let d = d as f64;
    let num = Float::with_val(prec, g((d - 1.0) / 2.0) * g((d + 1.0) / 2.0));
    let den = Float::with_val(prec, g(d / 2.0).square());
    Float::with_val(prec, num / den).square()
}

fn telescoping(ctx: &NumericContext) -> Line {
    let mut line = Line::new("10", "telescoping of the modified kernel products up to d = 50", "exact");
    let r = telescoping_check(50).unwrap();
    line.check(r.odd_holds && r.even_holds, || format!("first failure at {:?}", r.first_failure));
    for d in 3..=50i64 {
        let l = l_mod(d).unwrap();
        let u = u_mod(d).unwrap();
        let from_gamma = gamma_l(d, ctx.prec());
        let err = rel(&l.to_float(ctx), &from_gamma);
        line.check(err < 1e-50, || format!("L({d}) against Gamma: {err:.3e}"));
        let q = (u / l).as_rational();
        line.check(q == Some(Rational::from((d - 2, d))), || format!("U({d})/L({d}) = {q:?}"));
    }
    line
}

fn constants_lines(ctx: &NumericContext) -> Vec<Line> {
    let prec = ctx.prec();
    let table = constants(ctx);
    let mut ids = Line::new("11a", "constant identities", "30 digits");
    for id in table.identities(ctx, IDENTITY_DIGITS) {
        ids.check(id.holds, || format!("{}: {}", id.name, id.difference));
    }
    let mut a = Line::new("11b", "Glaisher-Kinkelin constant", "digits 1.28242712");
    let reference = Float::with_val(prec, Float::parse("1.28242712910062263687534256886979172776768892732500").unwrap());
    let err = rel(&table.a.value, &reference);
    let shown = table.a.value.to_string_radix(10, Some(12));
    a.check(shown.starts_with("1.28242712") && err < 1e-45, || format!("{shown}, rel {err:.2e}"));
    a.note = shown;
    let mut p = Line::new("11c", "kernel product over C sqrt(d) tends to 1", "1e-4 after order 4 over d = 2^10..2^20");
    let ds: Vec<u64> = (10..=20).map(|k| 1u64 << k).collect();
    let mut notes = Vec::new();
    for sel in ProductSelector::ALL {
        let reports = product_asym_sweep(sel, &ds, Exec::default(), ctx).unwrap();
        let est = product_ratio_limit(&reports, 4).unwrap();
        let dev = Float::with_val(prec, &est.value - 1u32).abs().to_f64();
        p.check(dev <= TOL_PRODUCT, || format!("{}: {dev:.3e}", sel.name()));
        notes.push(format!("{} {dev:.1e}", sel.name()));
    }
    // term-by-term product as an oracle for the tallied one
    let mut direct = Float::with_val(prec, 1);
    for i in 1..=1024i64 {
        direct *= gamma_l(2 * i + 1, prec);
    }
    let tallied = product_ln(ProductSelector::LOdd, 1024, prec).exp();
    let err = rel(&tallied, &direct);
    p.check(err < 1e-40, || format!("tallied product at d=1024 off by {err:.3e}"));
    p.note = notes.join(", ");
    vec![ids, a, p]
}

fn two_point_exponent(o1: &DefectConfig, o2: &DefectConfig, d: i64, ctx: &NumericContext) -> f64 {
    let self_corr = corr_exact(o1).unwrap().to_f64(ctx) * corr_exact(o2).unwrap().to_f64(ctx);
    let at = |d: i64| {
        let far = aztec_core::translate(o2, d);
        corr_exact(&DefectConfig::union(&[o1.clone(), far]).unwrap()).unwrap().ln(ctx).unwrap().to_f64()
            - self_corr.ln()
    };
    (at(2 * d) - at(d)) / 2f64.ln()
}

fn coulomb(ctx: &NumericContext) -> Vec<Line> {
    let cfg = |h: &[i64], s: &[i64]| DefectConfig::from_sets(h, s).unwrap();
    let mut e = Line::new("12a", "pair decay exponents equal half the charge product", "1e-2");
    let mut r = Line::new("12b", "exact over predicted for charges (2,-2) at 2^10", "[0.99, 1.01]");
    let mut t = Line::new("12c", "three clusters with charges (2,-2,2)", "[0.98, 1.02] at spacing >= 2^9");
    let ds: Vec<i64> = (4..=10).map(|k| 1i64 << k).collect();
    let families = [
        (cfg(&[0, 1], &[]), cfg(&[], &[0, 1]), -2.0),
        (cfg(&[0], &[]), cfg(&[0], &[]), 0.5),
        (cfg(&[0], &[]), cfg(&[], &[0]), -0.5),
    ];
    let mut notes = Vec::new();
    for (o1, o2, want) in &families {
        let fit = decay_fit(o1, o2, &ds, Exec::default(), ctx).unwrap();
        let two = two_point_exponent(o1, o2, 512, ctx);
        e.check((fit.exponent - want).abs() <= TOL_EXPONENT && (two - want).abs() <= TOL_EXPONENT, || {
            format!("{o1} vs {o2}: fit {:.5}, two-point {two:.5}, want {want}", fit.exponent)
        });
        notes.push(format!("{:.4}", fit.exponent));
        if *want == -2.0 {
            let far = aztec_core::translate(o2, 1024);
            let joint = corr_exact(&DefectConfig::union(&[o1.clone(), far]).unwrap()).unwrap();
            let ratio = joint.to_f64(ctx) / coulomb_predict(&[(o1.clone(), 0), (o2.clone(), 1024)]).unwrap().to_f64(ctx);
            r.check((0.99..=1.01).contains(&ratio), || format!("{ratio}"));
            r.note = format!("{ratio:.8}");
        }
    }
    e.note = notes.join(", ");
    let pair = cfg(&[0, 1], &[]);
    let anti = cfg(&[], &[0, 1]);
    let mut tnotes = Vec::new();
    for d in [512i64, 1024] {
        let joint = cfg(&[0, 1, 2 * d, 2 * d + 1], &[d, d + 1]);
        let ratio = corr_exact(&joint).unwrap().to_f64(ctx)
            / coulomb_predict(&[(pair.clone(), 0), (anti.clone(), d), (pair.clone(), 2 * d)]).unwrap().to_f64(ctx);
        t.check((0.98..=1.02).contains(&ratio), || format!("spacing {d}: {ratio}"));
        tnotes.push(format!("{ratio:.7}"));
    }
    t.note = tnotes.join(", ");
    vec![e, r, t]
}

fn main() -> ExitCode {
    let ctx = NumericContext::shared(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let mut lines = counts(&mut rng);
    lines.push(trimers(&mut rng));
    lines.extend(closed_forms(&ctx));
    lines.push(doublets(&mut rng));
    lines.push(route_agreement(&mut rng, &ctx));
    lines.push(exactness(&mut rng));
    lines.extend(moves(&mut rng, &ctx));
    lines.push(telescoping(&ctx));
    lines.extend(constants_lines(&ctx));
    lines.extend(coulomb(&ctx));
    lines.sort_by_key(|l| {
        let digits: String = l.id.chars().take_while(|c| c.is_ascii_digit()).collect();
        (digits.parse::<u32>().unwrap(), l.id)
    });

    let mut unexpected = 0;
    for l in &lines {
        let ok = l.failures.is_empty();
        let known = KNOWN.contains(&l.id);
        let tag = match (ok, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "{tag} [{}] {} ({}/{} checks, tol {}){}",
            l.id,
            l.title,
            l.total - l.failures.len(),
            l.total,
            l.tol,
            if l.note.is_empty() { String::new() } else { format!(": {}", l.note) }
        );
        for f in l.failures.iter().take(5) {
            println!("    {f}");
        }
        if l.failures.len() > 5 {
            println!("    ... {} more", l.failures.len() - 5);
        }
        if !ok && !known {
            unexpected += 1;
        }
        if ok && known {
            println!("    listed as known failure but passed");
        }
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
