//! Closed values `sign · ∏ p^(e/4) · π^(a/2) · W^b`.
//!
//! Prime exponents are stored in quarters so that square roots and the
//! fourth roots produced by half-integer powers of `√2·d` stay in the ring.
//! Powers of π are stored in halves (`Γ(1/2) = √π`).  The map is kept free of
//! zero exponents, so structural equality is value equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NumericContext;
use crate::primes::{factor_u64, spf_table};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactValue {
    sign: i8,
    primes: BTreeMap<u64, i64>,
    pi_halves: i64,
    w_pow: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Mul,
    Div,
    Pow(i64),
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue { sign: 0, primes: BTreeMap::new(), pi_halves: 0, w_pow: 0 }
    }

    pub fn one() -> Self {
        ExactValue { sign: 1, primes: BTreeMap::new(), pi_halves: 0, w_pow: 0 }
    }

    pub fn from_prime_quarters<I: IntoIterator<Item = (u64, i64)>>(it: I) -> Self {
        let mut v = Self::one();
        for (p, e) in it {
            v.add_prime(p, e);
        }
        v
    }

    fn add_prime(&mut self, p: u64, e: i64) {
        if e == 0 {
            return;
        }
        let slot = self.primes.entry(p).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.primes.remove(&p);
        }
    }

    pub fn from_u64(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Self::from_prime_quarters(factor_u64(n).into_iter().map(|(p, e)| (p, 4 * e as i64)))
    }

    pub fn from_i64(n: i64) -> Self {
        let mut v = Self::from_u64(n.unsigned_abs());
        if n < 0 {
            v.sign = -1;
        }
        v
    }

    /// `num/den` for machine integers; `den` must be nonzero.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Factors an arbitrary-precision rational.  Fails if a prime factor
    /// does not fit in 64 bits.
    pub fn from_rational(q: &Rational) -> Result<Self> {
        if *q == 0 {
            return Ok(Self::zero());
        }
        let mut v = Self::one();
        for (part, sgn) in [(q.numer().clone().abs(), 1i64), (q.denom().clone(), -1i64)] {
            for (p, e) in factor_integer(part)? {
                v.add_prime(p, 4 * sgn * e as i64);
            }
        }
        if *q < 0 {
            v.sign = -1;
        }
        Ok(v)
    }

    pub fn pi() -> Self {
        Self::pi_pow_halves(2)
    }

    pub fn pi_pow_halves(h: i64) -> Self {
        let mut v = Self::one();
        v.pi_halves = h;
        v
    }

    /// The unit-hole constant, kept symbolic.
    pub fn w() -> Self {
        let mut v = Self::one();
        v.w_pow = 1;
        v
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
    pub fn pi_halves(&self) -> i64 {
        self.pi_halves
    }
    pub fn w_pow(&self) -> i64 {
        self.w_pow
    }
    pub fn prime_quarters(&self) -> &BTreeMap<u64, i64> {
        &self.primes
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ExactValue {
            sign: self.sign,
            primes: self.primes.iter().map(|(&p, &e)| (p, -e)).collect(),
            pi_halves: -self.pi_halves,
            w_pow: -self.w_pow,
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.recip()?)
    }

    pub fn powi(&self, k: i64) -> Result<Self> {
        if self.is_zero() {
            return match k {
                0 => Ok(Self::one()),
                k if k > 0 => Ok(Self::zero()),
                _ => Err(Error::DivisionByZero),
            };
        }
        Ok(ExactValue {
            sign: if self.sign < 0 && k % 2 != 0 { -1 } else { 1 },
            primes: self.primes.iter().filter(|_| k != 0).map(|(&p, &e)| (p, e * k)).collect(),
            pi_halves: self.pi_halves * k,
            w_pow: self.w_pow * k,
        })
    }

    /// `self^(num/den)` for a positive value, when the result stays in the ring.
    pub fn pow_frac(&self, num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::Domain("nonpositive root index".into()));
        }
        if den == 1 {
            return self.powi(num);
        }
        if self.sign <= 0 {
            return Err(Error::Domain("fractional power of a nonpositive value".into()));
        }
        let scale = |e: i64| -> Result<i64> {
            let t = e * num;
            if t % den != 0 {
                return Err(Error::Domain(format!("power {num}/{den} leaves the ring")));
            }
            Ok(t / den)
        };
        let mut primes = BTreeMap::new();
        for (&p, &e) in &self.primes {
            let s = scale(e)?;
            if s != 0 {
                primes.insert(p, s);
            }
        }
        Ok(ExactValue { sign: 1, primes, pi_halves: scale(self.pi_halves)?, w_pow: scale(self.w_pow)? })
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.pow_frac(1, 2)
    }

    pub fn arith(&self, y: &Self, op: ArithOp) -> Result<Self> {
        match op {
            ArithOp::Mul => Ok(self.clone() * y.clone()),
            ArithOp::Div => self.checked_div(y),
            ArithOp::Pow(k) => self.powi(k),
        }
    }

    fn split(&self) -> (Rational, Rational, Rational) {
        // e = 4a + 2b + c with truncation toward zero at each step
        let mut q = (Integer::from(1), Integer::from(1));
        let mut r = (Integer::from(1), Integer::from(1));
        let mut f = (Integer::from(1), Integer::from(1));
        for (&p, &e) in &self.primes {
            let a = e / 4;
            let rem = e - 4 * a;
            let b = rem / 2;
            let c = rem - 2 * b;
            for (slot, k) in [(&mut q, a), (&mut r, b), (&mut f, c)] {
                let pk = Integer::from(p).pow(k.unsigned_abs() as u32);
                if k > 0 {
                    slot.0 *= pk;
                } else if k < 0 {
                    slot.1 *= pk;
                }
            }
        }
        let mut rational = Rational::from(q);
        if self.sign < 0 {
            rational = -rational;
        }
        (rational, Rational::from(r), Rational::from(f))
    }

    /// Signed rational part.
    pub fn rational(&self) -> Rational {
        if self.is_zero() {
            return Rational::new();
        }
        self.split().0
    }

    /// Rational under the square root (squarefree numerator and denominator).
    pub fn radicand(&self) -> Rational {
        self.split().1
    }

    /// Rational under the fourth root (squarefree numerator and denominator).
    pub fn fourth_root(&self) -> Rational {
        self.split().2
    }

    /// Exact rational value, if there are no roots, π or W.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.pi_halves != 0 || self.w_pow != 0 || self.primes.values().any(|e| e % 4 != 0) {
            return None;
        }
        Some(self.rational())
    }

    pub fn to_float(&self, ctx: &NumericContext) -> Float {
        let prec = ctx.prec();
        if self.is_zero() {
            return Float::with_val(prec, 0);
        }
        let (q, r, f) = self.split();
        let mut x = Float::with_val(prec, &q);
        if r != 1 {
            x *= Float::with_val(prec, &r).sqrt();
        }
        if f != 1 {
            x *= Float::with_val(prec, &f).sqrt().sqrt();
        }
        if self.pi_halves != 0 {
            x *= Float::with_val(prec, ctx.pi().sqrt_ref()).pow(self.pi_halves as i32);
        }
        if self.w_pow != 0 {
            x *= Float::with_val(prec, ctx.w().pow(self.w_pow as i32));
        }
        x
    }

    pub fn to_f64(&self, ctx: &NumericContext) -> f64 {
        self.to_float(ctx).to_f64()
    }

    /// Natural log of a positive value.
    pub fn ln(&self, ctx: &NumericContext) -> Result<Float> {
        if self.sign <= 0 {
            return Err(Error::Domain("log of a nonpositive value".into()));
        }
        let prec = ctx.prec();
        let mut acc = Float::with_val(prec, 0);
        for (&p, &e) in &self.primes {
            acc += Float::with_val(prec, p).ln() * e / 4i32;
        }
        acc += Float::with_val(prec, ctx.pi().ln_ref()) * self.pi_halves / 2i32;
        acc += Float::with_val(prec, ctx.w().ln_ref()) * self.w_pow;
        Ok(acc)
    }

    pub fn to_json(&self, ctx: &NumericContext) -> ExactJson {
        let (q, r, f) = if self.is_zero() {
            (Rational::new(), Rational::from(1), Rational::from(1))
        } else {
            self.split()
        };
        ExactJson {
            sign: self.sign as i32,
            rational: q.abs().to_string(),
            radicand: r.to_string(),
            fourth_root: f.to_string(),
            pi_pow: self.pi_halves as f64 / 2.0,
            w_pow: self.w_pow,
            decimal: to_decimal(self, ctx),
        }
    }

    pub fn from_json(j: &ExactJson) -> Result<Self> {
        let parse = |s: &str| -> Result<Rational> {
            s.parse::<Rational>().map_err(|_| Error::Malformed { pos: 0, token: s.to_string() })
        };
        if j.sign == 0 {
            return Ok(Self::zero());
        }
        let halves = j.pi_pow * 2.0;
        if halves.fract() != 0.0 {
            return Err(Error::Malformed { pos: 0, token: j.pi_pow.to_string() });
        }
        let mut v = Self::from_rational(&parse(&j.rational)?)?;
        v = v * Self::from_rational(&parse(&j.radicand)?)?.sqrt()?;
        v = v * Self::from_rational(&parse(&j.fourth_root)?)?.pow_frac(1, 4)?;
        v = v * Self::pi_pow_halves(halves as i64) * Self::w().powi(j.w_pow)?;
        if j.sign < 0 {
            v.sign = -v.sign;
        }
        Ok(v)
    }
}

/// JSON rendering of an [`ExactValue`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactJson {
    pub sign: i32,
    pub rational: String,
    pub radicand: String,
    #[serde(default = "one_str")]
    pub fourth_root: String,
    pub pi_pow: f64,
    pub w_pow: i64,
    pub decimal: String,
}

fn one_str() -> String {
    "1".into()
}

fn factor_integer(mut n: Integer) -> Result<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    if let Some(small) = n.to_u64() {
        return Ok(factor_u64(small));
    }
    let spf = spf_table(1 << 16);
    for p in 2..spf.len() as u64 {
        if spf[p as usize] as u64 != p {
            continue;
        }
        let mut e = 0;
        while n.is_divisible_u(p as u32) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if let Some(small) = n.to_u64() {
            out.extend(factor_u64(small));
            return Ok(merge_factors(out));
        }
    }
    Err(Error::Domain(format!("cannot factor {n} into 64-bit primes")))
}

fn merge_factors(mut v: Vec<(u64, u32)>) -> Vec<(u64, u32)> {
    v.sort();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for (p, e) in v {
        match out.last_mut() {
            Some(l) if l.0 == p => l.1 += e,
            _ => out.push((p, e)),
        }
    }
    out
}

impl Mul for ExactValue {
    type Output = ExactValue;
    fn mul(mut self, rhs: ExactValue) -> ExactValue {
        if self.is_zero() || rhs.is_zero() {
            return ExactValue::zero();
        }
        for (p, e) in rhs.primes {
            self.add_prime(p, e);
        }
        self.sign *= rhs.sign;
        self.pi_halves += rhs.pi_halves;
        self.w_pow += rhs.w_pow;
        self
    }
}

impl<'a> Mul<&'a ExactValue> for ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: &'a ExactValue) -> ExactValue {
        self * rhs.clone()
    }
}

impl Div for ExactValue {
    type Output = ExactValue;
    /// Panics on division by zero; see [`ExactValue::checked_div`].
    fn div(self, rhs: ExactValue) -> ExactValue {
        self.checked_div(&rhs).expect("division by zero")
    }
}

impl<'a> Div<&'a ExactValue> for ExactValue {
    type Output = ExactValue;
    fn div(self, rhs: &'a ExactValue) -> ExactValue {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl std::iter::Product for ExactValue {
    fn product<I: Iterator<Item = ExactValue>>(iter: I) -> Self {
        iter.fold(ExactValue::one(), |a, b| a * b)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (q, r, fr) = self.split();
        let mut parts = Vec::new();
        if q != 1 || (r == 1 && fr == 1 && self.pi_halves == 0 && self.w_pow == 0) {
            parts.push(q.to_string());
        } else if self.sign < 0 {
            parts.push("-1".into());
        }
        if r != 1 {
            parts.push(format!("sqrt({r})"));
        }
        if fr != 1 {
            parts.push(format!("({fr})^(1/4)"));
        }
        match self.pi_halves {
            0 => {}
            2 => parts.push("pi".into()),
            h if h % 2 == 0 => parts.push(format!("pi^{}", h / 2)),
            h => parts.push(format!("pi^({h}/2)")),
        }
        match self.w_pow {
            0 => {}
            1 => parts.push("W".into()),
            b => parts.push(format!("W^{b}")),
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Decimal rendering at the context's digit count.
pub fn to_decimal(x: &ExactValue, ctx: &NumericContext) -> String {
    render(&x.to_float(ctx), ctx.digits())
}

pub fn render(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// `Γ(m)` for positive integer `m`, or `Γ(m + 1/2)`, given `twice` = 2·argument.
pub fn gamma_half(twice: i64) -> Result<ExactValue> {
    if twice <= 0 {
        return Err(Error::Pole(format!("Gamma at {}/2", twice)));
    }
    let t = twice as u64;
    if t.is_multiple_of(2) {
        Ok(factorial(t / 2 - 1))
    } else {
        let m = (t - 1) / 2;
        Ok(factorial(2 * m) / factorial(m)
            * ExactValue::from_prime_quarters([(2u64, -8 * m as i64)])
            * ExactValue::pi_pow_halves(1))
    }
}

/// `n!` factored by Legendre's formula.
pub fn factorial(n: u64) -> ExactValue {
    let spf = spf_table(n as usize + 1);
    let mut v = ExactValue::one();
    for p in 2..=n {
        if spf[p as usize] as u64 != p {
            continue;
        }
        let mut e = 0u64;
        let mut q = n / p;
        while q > 0 {
            e += q;
            q /= p;
        }
        v.add_prime(p, 4 * e as i64);
    }
    v
}

/// Ratio of Gamma products at positive half-integers, each given as twice its value.
pub fn gamma_half_ratio(num: &[i64], den: &[i64]) -> Result<ExactValue> {
    let mut v = ExactValue::one();
    for &a in num {
        v = v * gamma_half(a)?;
    }
    for &a in den {
        v = v / gamma_half(a)?;
    }
    Ok(v)
}

/// Rising factorial `(a)_k`.
pub fn pochhammer(a: &Rational, k: u64) -> Rational {
    let mut p = Rational::from(1);
    let mut x = a.clone();
    for _ in 0..k {
        p *= &x;
        x += 1;
    }
    p
}
