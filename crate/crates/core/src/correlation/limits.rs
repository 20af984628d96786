//! Correlations as limits of finite regions and far-defect renormalization.

use rug::Float;
use serde::Serialize;

use crate::asymptotics::richardson_extrapolate;
use crate::error::{Error, Result};
use crate::exact_count::count_hist_coords;
use crate::exact_value::render;
use crate::lattice::{DefectConfig, Kind};
use crate::numeric::NumericContext;
use crate::par::Exec;

use super::engine::balanced_limit_ln;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub value: Float,
    /// `(parameter, raw value)` in schedule order
    pub samples: Vec<(f64, Float)>,
    pub order: usize,
    /// Absolute difference of the last two extrapolation stages.
    pub residual: Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitJson {
    pub value: String,
    pub residual: String,
    pub order: usize,
    pub samples: Vec<(f64, String)>,
}

impl LimitEstimate {
    pub fn to_json(&self, digits: usize) -> LimitJson {
        LimitJson {
            value: render(&self.value, digits),
            residual: render(&self.residual, 6),
            order: self.order,
            samples: self.samples.iter().map(|(p, v)| (*p, render(v, digits))).collect(),
        }
    }

    pub fn relative_residual(&self) -> f64 {
        (self.residual.to_f64() / self.value.to_f64()).abs()
    }
}

fn extrapolate(params: &[f64], vals: Vec<Float>, order: usize, prec: u32) -> Result<LimitEstimate> {
    let samples: Vec<(Float, Float)> =
        params.iter().zip(&vals).map(|(p, v)| (Float::with_val(prec, 1) / *p, v.clone())).collect();
    let mut est = richardson_extrapolate(&samples, order)?;
    est.samples = params.iter().copied().zip(vals).collect();
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedOptions {
    pub n_schedule: Vec<u64>,
    pub order: usize,
    pub exec: Exec,
}

impl Default for BalancedOptions {
    fn default() -> Self {
        BalancedOptions { n_schedule: (4..=9).map(|k| 1u64 << k).collect(), order: 4, exec: Exec::default() }
    }
}

/// `lim M(AD_{2n}(H,S)) / M(AD_{2n})` extrapolated in `1/n`.
pub fn corr_limit_balanced(
    config: &DefectConfig,
    opts: &BalancedOptions,
    ctx: &NumericContext,
) -> Result<LimitEstimate> {
    if config.charge() != 0 {
        return Err(Error::Precondition("balanced limit needs equally many holes and separations".into()));
    }
    let mut ns = opts.n_schedule.clone();
    ns.sort();
    let Some(&n0) = ns.first() else {
        return Err(Error::Schedule("empty n schedule".into()));
    };
    if let (Some(lo), Some(hi)) = (config.min_pos(), config.max_pos()) {
        if lo < -(n0 as i64) || hi > n0 as i64 - 1 {
            return Err(Error::InvalidRegion(format!("{config} does not fit the window at n = {n0}")));
        }
    }
    let prec = ctx.prec();
    let empty = DefectConfig::default();
    let vals: Vec<Result<Float>> = opts.exec.map(&ns, |&n| {
        let mut h = count_hist_coords(n, config)?;
        h.merge(&count_hist_coords(n, &empty)?, -1);
        Ok(h.finalize().ln(prec).exp())
    });
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let params: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    extrapolate(&params, vals, opts.order, prec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargedStrategy {
    /// Neutralize with far opposite-kind doublets (and one far unit defect
    /// for odd charge) at geometrically spread distances, divide out their
    /// closed-form correlations and Coulomb factors, extrapolate in `1/d`.
    Pairs,
    /// One far defect at a time, literally as in the recursive definition;
    /// inner levels use distances scaled from the outer one.
    Nested,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InnerLimit {
    /// Exact `n → ∞` limit of the balanced ratio.
    ClosedForm,
    /// Extrapolated finite-n ratios; the schedule is scaled up to enclose
    /// the far defects.
    Extrapolated(BalancedOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargedOptions {
    pub d_schedule: Vec<i64>,
    pub order: usize,
    pub strategy: ChargedStrategy,
    pub inner: InnerLimit,
    /// Ratio between successive far clusters in the `Pairs` strategy.
    pub spread: i64,
    /// Inner distance multipliers in the `Nested` strategy.
    pub nested_multipliers: Vec<i64>,
    /// Fail when the relative residual exceeds this.
    pub max_residual: Option<f64>,
    pub exec: Exec,
}

impl Default for ChargedOptions {
    fn default() -> Self {
        ChargedOptions {
            d_schedule: (5..=12).map(|k| 1i64 << k).collect(),
            order: 4,
            strategy: ChargedStrategy::Pairs,
            inner: InnerLimit::ClosedForm,
            spread: 16,
            nested_multipliers: vec![8, 16, 32, 64],
            max_residual: None,
            exec: Exec::default(),
        }
    }
}

fn inner_ln(config: &DefectConfig, inner: &InnerLimit, ctx: &NumericContext) -> Result<Float> {
    match inner {
        InnerLimit::ClosedForm => balanced_limit_ln(config, ctx.prec()),
        InnerLimit::Extrapolated(opts) => {
            let extent = config.support().iter().map(|x| x.unsigned_abs() + 1).max().unwrap_or(1);
            let n0 = *opts.n_schedule.iter().min().unwrap_or(&1);
            let scale = extent.div_ceil(n0).max(1);
            let scaled = BalancedOptions {
                n_schedule: opts.n_schedule.iter().map(|n| n * scale).collect(),
                exec: Exec::Sequential,
                ..opts.clone()
            };
            Ok(corr_limit_balanced(config, &scaled, ctx)?.value.ln())
        }
    }
}

/// Correlation of a configuration with unequal hole and separation counts.
pub fn corr_limit_charged(
    config: &DefectConfig,
    opts: &ChargedOptions,
    ctx: &NumericContext,
) -> Result<LimitEstimate> {
    if config.charge() == 0 {
        return Err(Error::Precondition("charged limit needs unequal hole and separation counts".into()));
    }
    let mut ds = opts.d_schedule.clone();
    ds.sort();
    if ds.len() < opts.order + 1 || ds[0] <= 0 {
        return Err(Error::Schedule(format!("need {} positive distances", opts.order + 1)));
    }
    let est = match opts.strategy {
        ChargedStrategy::Pairs => pairs_limit(config, &ds, opts, ctx)?,
        ChargedStrategy::Nested => nested_limit(config, &ds, opts, ctx)?,
    };
    if let Some(tol) = opts.max_residual {
        if est.relative_residual() > tol {
            return Err(Error::Schedule(format!(
                "relative residual {:.3e} exceeds {tol:.1e}; extend the schedule",
                est.relative_residual()
            )));
        }
    }
    Ok(est)
}

fn ln_sqrt2_dist(dist: i64, prec: u32) -> Float {
    Float::with_val(prec, Float::with_val(prec, 2).sqrt() * dist).ln()
}

fn pairs_limit(config: &DefectConfig, ds: &[i64], opts: &ChargedOptions, ctx: &NumericContext) -> Result<LimitEstimate> {
    let prec = ctx.prec();
    let q = config.charge();
    let base = config.min_pos().unwrap();
    let right = config.max_pos().unwrap();
    // closed forms: holes pair 1/π, separations pair 2/π, unit hole W, unit separation S
    let ln_pi = Float::with_val(prec, ctx.pi().ln_ref());
    let ln2 = Float::with_val(prec, 2).ln();
    let (pair_kind, ln_pair) = if q > 0 {
        (Kind::Separation, Float::with_val(prec, &ln2 - &ln_pi))
    } else {
        (Kind::Hole, Float::with_val(prec, -&ln_pi))
    };
    let (single_kind, ln_single) = if q > 0 {
        (Kind::Separation, Float::with_val(prec, ctx.s().ln_ref()))
    } else {
        (Kind::Hole, Float::with_val(prec, ctx.w().ln_ref()))
    };
    let vals: Vec<Result<Float>> = opts.exec.map(ds, |&d| {
        let mut clusters: Vec<(i64, i64)> = vec![(base, q)];
        let mut defects = config.defects().to_vec();
        let mut ln_norm = Float::with_val(prec, 0);
        let mut reach = 1i64;
        for _ in 0..q.unsigned_abs() / 2 {
            let p = right + d * reach;
            defects.push(crate::lattice::Defect { pos: p, kind: pair_kind });
            defects.push(crate::lattice::Defect { pos: p + 1, kind: pair_kind });
            clusters.push((p, -2 * q.signum()));
            ln_norm += &ln_pair;
            reach *= opts.spread;
        }
        if q % 2 != 0 {
            let p = right + d * reach;
            defects.push(crate::lattice::Defect { pos: p, kind: single_kind });
            clusters.push((p, -q.signum()));
            ln_norm += &ln_single;
        }
        let aug = DefectConfig::new(defects)?;
        let mut v = inner_ln(&aug, &opts.inner, ctx)? - ln_norm;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let e = Float::with_val(prec, clusters[i].1 * clusters[j].1) / 2u32;
                v -= e * ln_sqrt2_dist((clusters[j].0 - clusters[i].0).abs(), prec);
            }
        }
        Ok(v.exp())
    });
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let params: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
    extrapolate(&params, vals, opts.order, prec)
}

fn nested_limit(config: &DefectConfig, ds: &[i64], opts: &ChargedOptions, ctx: &NumericContext) -> Result<LimitEstimate> {
    let prec = ctx.prec();
    let vals: Vec<Result<Float>> = opts.exec.map(ds, |&d| nested_sample(config, d, opts, ctx));
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let params: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
    extrapolate(&params, vals, opts.order, prec)
}

/// One outer sample `(b√2)^{|q|/2} ω̄(config ∪ far) / norm` with the far
/// defect at coordinate `b = max + d`.
fn nested_sample(config: &DefectConfig, d: i64, opts: &ChargedOptions, ctx: &NumericContext) -> Result<Float> {
    let prec = ctx.prec();
    let q = config.charge();
    let b = config.max_pos().unwrap().max(0) + d;
    let (kind, norm) = if q > 0 { (Kind::Separation, ctx.s()) } else { (Kind::Hole, ctx.w()) };
    let mut defects = config.defects().to_vec();
    defects.push(crate::lattice::Defect { pos: b, kind });
    let aug = DefectConfig::new(defects)?;
    let inner = if aug.charge() == 0 {
        inner_ln(&aug, &opts.inner, ctx)?.exp()
    } else {
        let inner_ds: Vec<i64> = opts.nested_multipliers.iter().map(|m| m * b).collect();
        let vals = inner_ds.iter().map(|&d2| nested_sample(&aug, d2, opts, ctx)).collect::<Result<Vec<_>>>()?;
        let params: Vec<f64> = inner_ds.iter().map(|&x| x as f64).collect();
        let order = opts.order.min(params.len().saturating_sub(1));
        extrapolate(&params, vals, order, prec)?.value
    };
    let root = Float::with_val(prec, Float::with_val(prec, 2).sqrt() * b);
    let factor = Float::with_val(prec, root.ln() * q.abs() / 2i32).exp();
    Ok(factor * inner / norm)
}
