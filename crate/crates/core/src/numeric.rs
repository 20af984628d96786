//! High-precision constants and the shared numeric context.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::hist::Hist;

pub const DEFAULT_DIGITS: usize = 64;
const PRINTED_A: &str = "1.28242712";

#[derive(Debug, Clone)]
pub struct NumericContext {
    digits: usize,
    prec: u32,
    pi: Float,
    e: Float,
    a: Float,
    w: Float,
    s: Float,
}

pub fn bits_for(digits: usize) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 24
}

impl NumericContext {
    /// Builds a context, deriving the Glaisher-Kinkelin constant from the
    /// superfactorial limit.  Fails if it does not reproduce the reference
    /// digits 1.28242712.
    pub fn new(digits: usize) -> Result<Self> {
        let digits = digits.max(10);
        let prec = bits_for(digits);
        let pi = Float::with_val(prec, Constant::Pi);
        let e = Float::with_val(prec, 1).exp();
        let a = glaisher_from_limit(prec);
        check_printed_a(&a)?;
        let e14 = Float::with_val(prec, Float::with_val(prec, 1) / 4u32).exp();
        let a3 = Float::with_val(prec, (&a).pow(3u32));
        let two = Float::with_val(prec, 2);
        let w = Float::with_val(prec, &e14 / Float::with_val(prec, (&two).pow(Float::with_val(prec, 7) / 24u32))) / &a3;
        let s = Float::with_val(prec, (&two).pow(Float::with_val(prec, 5) / 24u32)) * &e14 / &a3;
        Ok(NumericContext { digits, prec, pi, e, a, w, s })
    }

    /// Process-wide memoized context for a digit count.
    pub fn shared(digits: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<NumericContext>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().unwrap().get(&digits) {
            return Ok(Arc::clone(c));
        }
        let c = Arc::new(Self::new(digits)?);
        cache.lock().unwrap().insert(digits, Arc::clone(&c));
        Ok(c)
    }

    pub fn digits(&self) -> usize {
        self.digits
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn pi(&self) -> &Float {
        &self.pi
    }
    pub fn e(&self) -> &Float {
        &self.e
    }
    /// Glaisher-Kinkelin constant.
    pub fn glaisher(&self) -> &Float {
        &self.a
    }
    /// Unit-hole correlation.
    pub fn w(&self) -> &Float {
        &self.w
    }
    /// Unit-separation correlation.
    pub fn s(&self) -> &Float {
        &self.s
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.prec, v)
    }
}

fn check_printed_a(a: &Float) -> Result<()> {
    let shown = a.to_string_radix(10, Some(12));
    let scaled = Float::with_val(a.prec(), a * 100_000_000u32).floor();
    if scaled.to_integer().map(|i| i == 128_242_712) != Some(true) {
        return Err(Error::Constant(format!("Glaisher-Kinkelin constant {shown} does not match {PRINTED_A}")));
    }
    Ok(())
}

/// `ln sf(n)` at `prec` bits through the prime tally of `0! 1! ... (n-1)!`.
pub fn ln_superfactorial(n: u64, prec: u32) -> Float {
    let mut h = Hist::new();
    h.add_superfactorial(n, 1);
    h.finalize().ln(prec)
}

/// The superfactorial limit
/// `ln sf(n) - (n²/2 - 1/12) ln n - (n/2) ln 2π + 3n²/4 -> 1/12 - ln A`
/// has an expansion in powers of `1/n²`; Neville extrapolation in that
/// variable over `n = 2^5 .. 2^16` recovers `A`.
pub fn glaisher_from_limit(prec: u32) -> Float {
    let work = prec + 64;
    let ln2pi = Float::with_val(work, Float::with_val(work, Constant::Pi) * 2u32).ln();
    let ns: Vec<u64> = (5..=16).map(|k| 1u64 << k).collect();
    let mut hs = Vec::new();
    let mut vals = Vec::new();
    for &n in &ns {
        let nf = Float::with_val(work, n);
        let n2 = Float::with_val(work, &nf * &nf);
        let lnn = Float::with_val(work, nf.ln_ref());
        let coef = Float::with_val(work, &n2 / 2u32) - Float::with_val(work, 1) / 12u32;
        let mut f = ln_superfactorial(n, work);
        f -= coef * &lnn;
        f -= Float::with_val(work, &nf / 2u32) * &ln2pi;
        f += Float::with_val(work, &n2 * 3u32) / 4u32;
        hs.push(Float::with_val(work, 1) / n2);
        vals.push(f);
    }
    let (lim, _) = neville_at_zero(&hs, &vals);
    let lna = Float::with_val(work, 1) / 12u32 - lim;
    Float::with_val(prec, lna.exp())
}

/// Polynomial extrapolation to `h = 0` through all points.  Returns the
/// value and the difference between the last two tableau stages.
pub fn neville_at_zero(hs: &[Float], vals: &[Float]) -> (Float, Float) {
    assert_eq!(hs.len(), vals.len());
    assert!(!hs.is_empty());
    let prec = vals[0].prec();
    let mut p: Vec<Float> = vals.to_vec();
    let n = p.len();
    let mut prev_top = p[n - 1].clone();
    let mut top = p[n - 1].clone();
    for k in 1..n {
        for i in (k..n).rev() {
            // p[i] <- (h[i-k] p[i] - h[i] p[i-1]) / (h[i-k] - h[i])
            let num = Float::with_val(prec, &hs[i - k] * &p[i]) - Float::with_val(prec, &hs[i] * &p[i - 1]);
            let den = Float::with_val(prec, &hs[i - k] - &hs[i]);
            p[i] = num / den;
        }
        prev_top = top;
        top = p[n - 1].clone();
    }
    let resid = Float::with_val(prec, &top - &prev_top).abs();
    (top, resid)
}
