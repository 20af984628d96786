//! Coulomb energy, likes/unlikes kernels and elementary-move ratios.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exact_value::{gamma_half_ratio, ExactValue};
use crate::lattice::{DefectConfig, Kind};

/// The defect support `D` against which between-site parities are counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelContext {
    d: BTreeSet<i64>,
}

impl KernelContext {
    pub fn new<I: IntoIterator<Item = i64>>(support: I) -> Self {
        KernelContext { d: support.into_iter().collect() }
    }

    pub fn of(config: &DefectConfig) -> Self {
        Self::new(config.support())
    }

    pub fn without(&self, x: i64) -> Self {
        let mut d = self.d.clone();
        d.remove(&x);
        KernelContext { d }
    }

    /// `|⟨x,y⟩ \ D|`: integers strictly between `x` and `y` outside `D`.
    pub fn free_between(&self, x: i64, y: i64) -> u64 {
        let (lo, hi) = (x.min(y), x.max(y));
        if hi - lo <= 1 {
            return 0;
        }
        let inside = self.d.range(lo + 1..hi).count() as u64;
        (hi - lo - 1) as u64 - inside
    }
}

/// `Γ((d-1)/2) Γ((d+1)/2) / Γ(d/2)²`
fn gamma_even(d: i64) -> Result<ExactValue> {
    if d <= 1 {
        return Err(Error::Pole(format!("Gamma((d-1)/2) at d = {d}")));
    }
    gamma_half_ratio(&[d - 1, d + 1], &[d, d])
}

/// `Γ(d/2) Γ(d/2+1) / Γ((d+1)/2)²`
fn gamma_odd(d: i64) -> Result<ExactValue> {
    if d <= 0 {
        return Err(Error::Pole(format!("Gamma(d/2) at d = {d}")));
    }
    gamma_half_ratio(&[d, d + 2], &[d + 1, d + 1])
}

pub fn likes_kernel(x: i64, y: i64, ctx: &KernelContext) -> Result<ExactValue> {
    if x == y {
        return Err(Error::Domain("kernel at coincident points".into()));
    }
    let d = (x - y).abs();
    if ctx.free_between(x, y).is_multiple_of(2) {
        gamma_even(d)
    } else {
        gamma_odd(d)
    }
}

pub fn unlikes_kernel(x: i64, y: i64, ctx: &KernelContext) -> Result<ExactValue> {
    if x == y {
        return Err(Error::Domain("kernel at coincident points".into()));
    }
    let d = (x - y).abs();
    if ctx.free_between(x, y) % 2 == 1 {
        gamma_even(d)
    } else {
        gamma_odd(d)
    }
}

/// `L(d) = Γ²((d-1)/2) Γ²((d+1)/2) / Γ⁴(d/2)`
pub fn l_mod(d: i64) -> Result<ExactValue> {
    if d < 3 {
        return Err(Error::Domain(format!("L(d) needs d >= 3, got {d}")));
    }
    gamma_even(d)?.powi(2)
}

/// `U(d) = L(d) (d-2) / d`
pub fn u_mod(d: i64) -> Result<ExactValue> {
    Ok(l_mod(d)? * ExactValue::ratio(d - 2, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSel {
    L,
    U,
}

/// `[f(a)]_k = f(a) f(a+2) ... f(a+2k-2)`
pub fn bracket_product(f: KernelSel, a: i64, k: u64) -> Result<ExactValue> {
    let mut v = ExactValue::one();
    for i in 0..k as i64 {
        let x = a + 2 * i;
        v = v * match f {
            KernelSel::L => l_mod(x)?,
            KernelSel::U => u_mod(x)?,
        };
    }
    Ok(v)
}

/// `∏|a_i-a_j|^{1/2} ∏|b_i-b_j|^{1/2} / ∏|a_i-b_j|^{1/2}`
pub fn coulomb_e(config: &DefectConfig) -> ExactValue {
    let d = config.defects();
    let mut num = ExactValue::one();
    let mut den = ExactValue::one();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let dist = ExactValue::from_u64((d[j].pos - d[i].pos).unsigned_abs());
            if d[i].kind == d[j].kind {
                num = num * dist;
            } else {
                den = den * dist;
            }
        }
    }
    (num / den).sqrt().expect("positive value")
}

/// `E(config) / E(config with the kinds at a1 and b1 exchanged)`.
pub fn exactness_ratio(config: &DefectConfig, a1: i64, b1: i64) -> Result<ExactValue> {
    if config.kind_at(a1) != Some(Kind::Hole) {
        return Err(Error::Precondition(format!("no hole at {a1}")));
    }
    if config.kind_at(b1) != Some(Kind::Separation) {
        return Err(Error::Precondition(format!("no separation at {b1}")));
    }
    let swapped = config.swapped(a1, b1)?;
    Ok(coulomb_e(config) / coulomb_e(&swapped))
}

/// Every pair of consecutive support points has an even number of free sites between.
pub fn even_runs(support: &[i64]) -> bool {
    support.windows(2).all(|w| (w[1] - w[0] - 1) % 2 == 0)
}

/// `ω̄(config) / ω̄(config with the defect at x moved left by |step|)`.
pub fn move_ratio(config: &DefectConfig, x: i64, step: i64) -> Result<ExactValue> {
    let kind = config.kind_at(x).ok_or_else(|| Error::Precondition(format!("no defect at {x}")))?;
    let others: Vec<(i64, bool)> =
        config.defects().iter().filter(|d| d.pos != x).map(|d| (d.pos, d.kind == kind)).collect();
    match step {
        -1 => {
            if config.kind_at(x - 1).is_some() {
                return Err(Error::Precondition(format!("target site {} occupied", x - 1)));
            }
            let ctx = KernelContext::of(config).without(x);
            let mut num = ExactValue::one();
            let mut den = ExactValue::one();
            for &(j, like) in &others {
                match (like, j < x) {
                    (true, true) => num = num * likes_kernel(x, j, &ctx)?,
                    (true, false) => den = den * likes_kernel(x - 1, j, &ctx)?,
                    (false, true) => den = den * unlikes_kernel(x, j, &ctx)?,
                    (false, false) => num = num * unlikes_kernel(x - 1, j, &ctx)?,
                }
            }
            Ok(num / den)
        }
        -2 => {
            if config.kind_at(x - 1).is_some() || config.kind_at(x - 2).is_some() {
                return Err(Error::Precondition(format!("sites {} and {} must be free", x - 1, x - 2)));
            }
            if !even_runs(&config.support()) {
                return Err(Error::Precondition("an odd number of free sites separates two defects".into()));
            }
            let mut num = ExactValue::one();
            let mut den = ExactValue::one();
            for &(j, like) in &others {
                let f = if like { l_mod } else { u_mod };
                if j < x {
                    num = num * f(x - j)?;
                } else {
                    den = den * f(j - x + 2)?;
                }
            }
            Ok(num / den)
        }
        _ => Err(Error::Domain(format!("unsupported step {step}"))),
    }
}
