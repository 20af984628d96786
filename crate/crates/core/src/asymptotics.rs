//! Product asymptotics of the modified kernels, Glaisher's formula, the
//! derived constants, extrapolation and Coulomb-decay fits.

use std::fmt::Write as _;

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::correlation::{corr_exact, LimitEstimate};
use crate::error::{Error, Result};
use crate::exact_value::{render, ExactValue};
use crate::hist::Hist;
use crate::kernels::{l_mod, u_mod};
use crate::lattice::{translate, DefectConfig};
use crate::numeric::{ln_superfactorial, neville_at_zero, NumericContext};
use crate::par::Exec;

/// Polynomial extrapolation to `h = 0` through the `order + 1` samples with
/// the smallest `h`.
pub fn richardson_extrapolate(samples: &[(Float, Float)], order: usize) -> Result<LimitEstimate> {
    if samples.len() < order + 1 {
        return Err(Error::Schedule(format!("order {order} needs {} samples, got {}", order + 1, samples.len())));
    }
    let mut sorted: Vec<&(Float, Float)> = samples.iter().collect();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite h"));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Schedule("duplicate h in samples".into()));
    }
    let used = &sorted[sorted.len() - order - 1..];
    let hs: Vec<Float> = used.iter().map(|s| s.0.clone()).collect();
    let vals: Vec<Float> = used.iter().map(|s| s.1.clone()).collect();
    let (value, residual) = neville_at_zero(&hs, &vals);
    Ok(LimitEstimate {
        value,
        samples: sorted.iter().map(|s| (s.0.to_f64(), s.1.clone())).collect(),
        order,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsTable {
    pub c: Constant,
    pub c_prime: Constant,
    pub c_e: Constant,
    pub c_e_prime: Constant,
    pub w: Constant,
    pub s: Constant,
    pub a: Constant,
    pub hartwig: Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub difference: String,
    pub holds: bool,
}

impl ConstantsTable {
    pub fn entries(&self) -> [&Constant; 8] {
        [&self.a, &self.w, &self.s, &self.hartwig, &self.c, &self.c_prime, &self.c_e, &self.c_e_prime]
    }

    /// Differences of the defining identities, each required below `10^-digits`.
    pub fn identities(&self, ctx: &NumericContext, digits: u32) -> Vec<IdentityCheck> {
        let prec = ctx.prec();
        let a6 = Float::with_val(prec, (&self.a.value).pow(6u32));
        let ws = Float::with_val(prec, &self.w.value * &self.s.value);
        let ws_target = Float::with_val(prec, ctx.e().sqrt_ref()) / two_pow(prec, 1, 12) / &a6;
        let ce_target = Float::with_val(prec, 4) / Float::with_val(prec, ctx.pi() * &self.c.value);
        let half_c = Float::with_val(prec, &self.c.value / 2u32);
        let tol = Float::with_val(prec, 10).pow(-(digits as i32));
        [
            ("C' = C/2", Float::with_val(prec, &self.c_prime.value - &half_c)),
            ("C_e = 4/(pi C)", Float::with_val(prec, &self.c_e.value - &ce_target)),
            ("C'_e = C_e", Float::with_val(prec, &self.c_e_prime.value - &self.c_e.value)),
            ("W S = sqrt(e)/(2^(1/12) A^6)", ws - ws_target),
        ]
        .into_iter()
        .map(|(name, d)| {
            let d = d.abs();
            IdentityCheck { name, holds: d < tol, difference: render(&d, 6) }
        })
        .collect()
    }
}

fn two_pow(prec: u32, num: i32, den: u32) -> Float {
    Float::with_val(prec, 2).pow(Float::with_val(prec, num) / den)
}

/// The constants, each from its own closed form in `π`, `e` and `A`.
pub fn constants(ctx: &NumericContext) -> ConstantsTable {
    let prec = ctx.prec();
    let a = ctx.glaisher().clone();
    let a6 = Float::with_val(prec, (&a).pow(6u32));
    let sqrt_e = Float::with_val(prec, ctx.e().sqrt_ref());
    let pi = ctx.pi().clone();
    let pi2 = Float::with_val(prec, pi.square_ref());
    let c = two_pow(prec, 1, 6) * &sqrt_e * &pi / &a6;
    let c_prime = two_pow(prec, -5, 6) * &sqrt_e * &pi / &a6;
    let c_e = two_pow(prec, 11, 6) * &a6 / &sqrt_e / &pi2;
    let hartwig = Float::with_val(prec, &sqrt_e / two_pow(prec, 5, 6)) / &a6;
    let k = |name, formula, value| Constant { name, formula, value };
    ConstantsTable {
        c: k("C", "2^(1/6) sqrt(e) pi / A^6", c),
        c_prime: k("C'", "2^(-5/6) sqrt(e) pi / A^6", c_prime),
        c_e: k("C_e", "2^(11/6) A^6 / (sqrt(e) pi^2)", c_e.clone()),
        c_e_prime: k("C'_e", "2^(11/6) A^6 / (sqrt(e) pi^2)", c_e),
        w: k("W", "e^(1/4) / (2^(7/24) A^3)", ctx.w().clone()),
        s: k("S", "2^(5/24) e^(1/4) / A^3", ctx.s().clone()),
        a: k("A", "superfactorial limit", a),
        hartwig: k("hartwig", "sqrt(e) / (2^(5/6) A^6)", hartwig),
    }
}

fn ln_glaisher_formula(n: u64, ctx: &NumericContext) -> Float {
    let prec = ctx.prec();
    let nf = Float::with_val(prec, n);
    let n2 = Float::with_val(prec, &nf * &nf);
    let mut v = Float::with_val(prec, 1) / 12u32 - Float::with_val(prec, ctx.glaisher().ln_ref());
    v += (Float::with_val(prec, &n2 / 2u32) - Float::with_val(prec, 1) / 12u32) * Float::with_val(prec, nf.ln_ref());
    v += Float::with_val(prec, &nf / 2u32) * Float::with_val(prec, ctx.pi() * 2u32).ln();
    v -= Float::with_val(prec, &n2 * 3u32) / 4u32;
    v
}

/// `(e^{1/12}/A) n^{n²/2-1/12} (2π)^{n/2} e^{-3n²/4}`
pub fn superfactorial_asym(n: u64, ctx: &NumericContext) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain("superfactorial asymptotics need n >= 1".into()));
    }
    Ok(ln_glaisher_formula(n, ctx).exp())
}

/// `sf(n) / superfactorial_asym(n)`
pub fn superfactorial_ratio(n: u64, ctx: &NumericContext) -> Result<Float> {
    if n == 0 {
        return Err(Error::Domain("superfactorial asymptotics need n >= 1".into()));
    }
    Ok((ln_superfactorial(n, ctx.prec()) - ln_glaisher_formula(n, ctx)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductSelector {
    LOdd,
    UOdd,
    LEven,
    UEven,
}

impl ProductSelector {
    pub const ALL: [ProductSelector; 4] =
        [ProductSelector::LOdd, ProductSelector::UOdd, ProductSelector::LEven, ProductSelector::UEven];

    pub fn name(self) -> &'static str {
        match self {
            ProductSelector::LOdd => "L_odd",
            ProductSelector::UOdd => "U_odd",
            ProductSelector::LEven => "L_even",
            ProductSelector::UEven => "U_even",
        }
    }

    /// Arguments of the factors in the product up to `d`.
    fn args(self, d: u64) -> Vec<i64> {
        let d = d as i64;
        match self {
            ProductSelector::LOdd | ProductSelector::UOdd => (1..=d).map(|i| 2 * i + 1).collect(),
            ProductSelector::LEven | ProductSelector::UEven => (2..=d).map(|i| 2 * i).collect(),
        }
    }

    fn is_u(self) -> bool {
        matches!(self, ProductSelector::UOdd | ProductSelector::UEven)
    }
}

/// The product up to `d` as an exact value (small `d` only).
pub fn product_exact(sel: ProductSelector, d: u64) -> Result<ExactValue> {
    let mut v = ExactValue::one();
    for a in sel.args(d) {
        v = v * if sel.is_u() { u_mod(a)? } else { l_mod(a)? };
    }
    Ok(v)
}

/// Log of the product through a prime tally of its Gamma factors.
pub fn product_ln(sel: ProductSelector, d: u64, prec: u32) -> Float {
    let mut h = Hist::new();
    for a in sel.args(d) {
        // L(a) = Γ((a-1)/2)² Γ((a+1)/2)² / Γ(a/2)⁴
        let a = a as u64;
        h.add_gamma_half(a - 1, 2);
        h.add_gamma_half(a + 1, 2);
        h.add_gamma_half(a, -4);
        if sel.is_u() {
            h.add_int(a - 2, 1);
            h.add_int(a, -1);
        }
    }
    h.finalize().ln(prec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    pub selector: ProductSelector,
    pub d: u64,
    pub product: Float,
    pub predicted: Float,
    pub ratio: Float,
}

pub fn product_asym_check(sel: ProductSelector, d: u64, ctx: &NumericContext) -> Result<ProductReport> {
    if d < 2 {
        return Err(Error::Domain("product asymptotics need d >= 2".into()));
    }
    let prec = ctx.prec();
    let table = constants(ctx);
    let sqrt_d = Float::with_val(prec, d).sqrt();
    let predicted = match sel {
        ProductSelector::LOdd => Float::with_val(prec, &table.c.value * &sqrt_d),
        ProductSelector::UOdd => Float::with_val(prec, &table.c_prime.value / &sqrt_d),
        ProductSelector::LEven => Float::with_val(prec, &table.c_e.value * &sqrt_d),
        ProductSelector::UEven => Float::with_val(prec, &table.c_e_prime.value / &sqrt_d),
    };
    let product = product_ln(sel, d, prec).exp();
    let ratio = Float::with_val(prec, &product / &predicted);
    Ok(ProductReport { selector: sel, d, product, predicted, ratio })
}

pub fn product_asym_sweep(
    sel: ProductSelector,
    ds: &[u64],
    exec: Exec,
    ctx: &NumericContext,
) -> Result<Vec<ProductReport>> {
    exec.map(ds, |&d| product_asym_check(sel, d, ctx)).into_iter().collect()
}

/// Richardson limit in `1/d` of the ratios of a sweep.
pub fn product_ratio_limit(reports: &[ProductReport], order: usize) -> Result<LimitEstimate> {
    let samples: Vec<(Float, Float)> = reports
        .iter()
        .map(|r| (Float::with_val(r.ratio.prec(), 1) / r.d, r.ratio.clone()))
        .collect();
    let mut est = richardson_extrapolate(&samples, order)?;
    est.samples = reports.iter().map(|r| (r.d as f64, r.ratio.clone())).collect();
    Ok(est)
}

/// `d,product,predicted,ratio` rows.
pub fn products_csv(reports: &[ProductReport], digits: usize) -> String {
    let mut out = String::from("selector,d,product,predicted,ratio\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.selector.name(),
            r.d,
            render(&r.product, digits),
            render(&r.predicted, digits),
            render(&r.ratio, digits)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelescopingReport {
    pub d_max: u64,
    pub odd_holds: bool,
    pub even_holds: bool,
    /// First `d` at which an identity failed.
    pub first_failure: Option<u64>,
}

/// `∏U(2i+1)·(2d+1) = ∏L(2i+1)` and `∏_{i≥2}U(2i)·d = ∏_{i≥2}L(2i)` for `d ≤ d_max`.
pub fn telescoping_check(d_max: u64) -> Result<TelescopingReport> {
    let mut lo = ExactValue::one();
    let mut uo = ExactValue::one();
    let mut le = ExactValue::one();
    let mut ue = ExactValue::one();
    let mut odd_holds = true;
    let mut even_holds = true;
    let mut first_failure = None;
    for d in 1..=d_max as i64 {
        lo = lo * l_mod(2 * d + 1)?;
        uo = uo * u_mod(2 * d + 1)?;
        let odd = uo.clone() * ExactValue::from_i64(2 * d + 1) == lo;
        let mut even = true;
        if d >= 2 {
            le = le * l_mod(2 * d)?;
            ue = ue * u_mod(2 * d)?;
            even = ue.clone() * ExactValue::from_i64(d) == le;
        }
        odd_holds &= odd;
        even_holds &= even;
        if !(odd && even) && first_failure.is_none() {
            first_failure = Some(d as u64);
        }
    }
    Ok(TelescopingReport { d_max, odd_holds, even_holds, first_failure })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub d: i64,
    pub corr: String,
    pub predicted: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub charges: (i64, i64),
    pub expected_exponent: f64,
    pub exponent: f64,
    /// Extrapolated limit of corr/predicted.
    pub constant: f64,
    pub points: Vec<DecayPoint>,
}

/// Places `o1` with its leftmost defect at 0 and `o2` at `d`, and fits
/// `ln(ω̄ / (ω̄(O1) ω̄(O2)))` against `ln(√2 d)` by least squares.
pub fn decay_fit(o1: &DefectConfig, o2: &DefectConfig, ds: &[i64], exec: Exec, ctx: &NumericContext) -> Result<DecayReport> {
    if ds.len() < 2 {
        return Err(Error::Schedule("decay fit needs at least two distances".into()));
    }
    let (Some(l1), Some(l2)) = (o1.min_pos(), o2.min_pos()) else {
        return Err(Error::Precondition("decay fit needs nonempty clusters".into()));
    };
    let a = translate(o1, -l1);
    let width = a.max_pos().unwrap();
    if ds.iter().any(|&d| d <= width) {
        return Err(Error::Overlap(format!("distance must exceed {width}")));
    }
    let self_ln = corr_exact(&a)?.ln(ctx)? + corr_exact(o2)?.ln(ctx)?;
    let (q1, q2) = (o1.charge(), o2.charge());
    let prec = ctx.prec();
    let rows: Vec<Result<(f64, Float, Float)>> = exec.map(ds, |&d| {
        let b = translate(o2, d - l2);
        let joint = DefectConfig::new(a.defects().iter().chain(b.defects()).copied().collect())?;
        let ln_corr = corr_exact(&joint)?.ln(ctx)?;
        let x = Float::with_val(prec, Float::with_val(prec, 2).sqrt() * d).ln();
        Ok((x.to_f64(), ln_corr, x))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let half_qq = (q1 * q2) as f64 / 2.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut points = Vec::new();
    let mut samples = Vec::new();
    for (&d, (x, ln_corr, xf)) in ds.iter().zip(&rows) {
        let y = Float::with_val(prec, ln_corr - &self_ln);
        let ln_pred = Float::with_val(prec, &self_ln + Float::with_val(prec, xf * (q1 * q2)) / 2u32);
        let ln_ratio = Float::with_val(prec, ln_corr - &ln_pred);
        xs.push(*x);
        ys.push(y.to_f64());
        samples.push((Float::with_val(prec, 1) / d, ln_ratio.clone().exp()));
        points.push(DecayPoint {
            d,
            corr: render(&Float::with_val(prec, ln_corr.exp_ref()), 20),
            predicted: render(&ln_pred.exp(), 20),
            ratio: ln_ratio.exp().to_f64(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let order = (samples.len() - 1).min(4);
    let constant = richardson_extrapolate(&samples, order)?.value.to_f64();
    Ok(DecayReport { charges: (q1, q2), expected_exponent: half_qq, exponent: sxy / sxx, constant, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_polynomials() {
        let p = 128;
        let lin: Vec<(Float, Float)> =
            (1..4).map(|k| (Float::with_val(p, k), Float::with_val(p, 3 + 2 * k))).collect();
        assert_eq!(richardson_extrapolate(&lin, 1).unwrap().value, 3);
        let quad: Vec<(Float, Float)> = (1..4)
            .map(|k| {
                let h = Float::with_val(p, k) / 8u32;
                let v = Float::with_val(p, &h * &h) + 1u32;
                (h, v)
            })
            .collect();
        let q = richardson_extrapolate(&quad, 2).unwrap();
        assert!((q.value.to_f64() - 1.0).abs() < 1e-30);
        assert!(richardson_extrapolate(&lin, 3).is_err());
    }

    #[test]
    fn telescoping_small() {
        let r = telescoping_check(12).unwrap();
        assert!(r.odd_holds && r.even_holds);
    }

    #[test]
    fn identities_hold() {
        let ctx = NumericContext::shared(50).unwrap();
        assert!(constants(&ctx).identities(&ctx, 30).iter().all(|c| c.holds));
    }
}
