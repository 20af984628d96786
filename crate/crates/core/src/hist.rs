//! Multiplicity histograms over positive integers.
//!
//! Products of pairwise differences and of Gamma values at (half-)integers
//! are accumulated as signed multiplicities `d -> m(d)` and only turned into
//! a number at the end, either exactly (prime tally) or as a logarithm.
//! Differences between two arithmetic progressions of step 2 contribute a
//! trapezoid of multiplicities, which is recorded in O(1) through stride-2
//! slope changes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::exact_value::ExactValue;
use crate::primes::spf_table;

/// An arithmetic progression `start, start+2, ..., start+2(len-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: i64,
    pub len: u64,
}

impl Block {
    pub fn last(&self) -> i64 {
        self.start + 2 * (self.len as i64 - 1)
    }
}

/// Splits a sorted set into maximal step-2 runs.
pub fn blocks_of(sorted: &[i64]) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some(b) if b.last() + 2 == x => b.len += 1,
            _ => out.push(Block { start: x, len: 1 }),
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct Hist {
    direct: Vec<i128>,
    ramp: Vec<i128>,
    int_fall: Vec<i128>,
    odd_fall: Vec<i128>,
    pub pow2: i128,
    pub pi_halves: i128,
}

fn bump(v: &mut Vec<i128>, i: usize, w: i128) {
    if v.len() <= i {
        v.resize(i + 1, 0);
    }
    v[i] += w;
}

impl Hist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_int(&mut self, d: u64, w: i128) {
        assert!(d >= 1, "multiplicity on nonpositive integer");
        bump(&mut self.direct, d as usize, w);
    }

    /// Differences `y - x` for `x` in `a`, `y` in `b`, all positive.
    pub fn add_cross(&mut self, a: &Block, b: &Block, w: i128) {
        assert!(b.start > a.last(), "blocks must be ordered and disjoint");
        let d0 = b.start - a.start;
        let (i, j) = (a.len as i64, b.len as i64);
        for (s, sw) in [(1 - i, w), (1, -w), (j - i + 1, -w), (j + 1, w)] {
            let d = d0 + 2 * s;
            debug_assert!(d >= 1);
            bump(&mut self.ramp, d as usize, sw);
        }
    }

    /// Differences within a single block.
    pub fn add_self(&mut self, b: &Block, w: i128) {
        let j = b.len as i128;
        if j < 2 {
            return;
        }
        bump(&mut self.ramp, 2, (j - 1) * w);
        bump(&mut self.ramp, 4, -j * w);
        bump(&mut self.ramp, 2 * b.len as usize + 2, w);
    }

    /// Adds `w * ln Δ(T)` for the set given as ordered step-2 blocks.
    pub fn add_vandermonde(&mut self, blocks: &[Block], w: i128) {
        for (idx, b) in blocks.iter().enumerate() {
            self.add_self(b, w);
            for c in &blocks[idx + 1..] {
                self.add_cross(b, c, w);
            }
        }
    }

    /// Adds `w * ln Γ(twice / 2)`.
    pub fn add_gamma_half(&mut self, twice: u64, w: i128) {
        assert!(twice >= 1, "Gamma pole at {}/2", twice);
        if twice.is_multiple_of(2) {
            bump(&mut self.int_fall, (twice / 2) as usize, w);
        } else {
            let m = (twice - 1) / 2;
            bump(&mut self.odd_fall, m as usize, w);
            self.pow2 -= m as i128 * w;
            self.pi_halves += w;
        }
    }

    /// Adds `w * ln sf(n)` with `sf(n) = 0! 1! ... (n-1)!`.
    pub fn add_superfactorial(&mut self, n: u64, w: i128) {
        for m in 1..=n {
            bump(&mut self.int_fall, m as usize, w);
        }
    }

    pub fn merge(&mut self, other: &Hist, w: i128) {
        for (dst, src) in [
            (&mut self.direct, &other.direct),
            (&mut self.ramp, &other.ramp),
            (&mut self.int_fall, &other.int_fall),
            (&mut self.odd_fall, &other.odd_fall),
        ] {
            if dst.len() < src.len() {
                dst.resize(src.len(), 0);
            }
            for (a, b) in dst.iter_mut().zip(src) {
                *a += w * b;
            }
        }
        self.pow2 += w * other.pow2;
        self.pi_halves += w * other.pi_halves;
    }

    /// Dense multiplicity vector `m[d]`.
    pub fn multiplicities(&self) -> Vec<i128> {
        let len = self
            .direct
            .len()
            .max(self.ramp.len())
            .max(self.int_fall.len())
            .max(2 * self.odd_fall.len() + 1);
        let mut m = vec![0i128; len];
        for (d, &w) in self.direct.iter().enumerate() {
            m[d] += w;
        }
        let mut slope = [0i128; 2];
        let mut val = [0i128; 2];
        for (d, &r) in self.ramp.iter().enumerate() {
            let p = d % 2;
            slope[p] += r;
            val[p] += slope[p];
            m[d] += val[p];
        }
        debug_assert!(val == [0, 0] && slope == [0, 0]);
        let mut acc = 0i128;
        for j in (1..self.int_fall.len()).rev() {
            acc += self.int_fall[j];
            m[j - 1] += acc;
        }
        // m[0] collects Γ(1) = 0! which is empty
        m[0] = 0;
        let mut acc = 0i128;
        for j in (0..self.odd_fall.len()).rev() {
            acc += self.odd_fall[j];
            if j >= 1 {
                m[2 * (j - 1) + 1] += acc;
            }
        }
        m
    }

    pub fn finalize(&self) -> Tally {
        let m = self.multiplicities();
        let spf = spf_table(m.len());
        let mut exps = vec![0i128; m.len().max(3)];
        for d in (2..m.len()).rev() {
            let w = m[d];
            if w == 0 {
                continue;
            }
            let mut x = d;
            while x > 1 {
                let p = spf[x] as usize;
                x /= p;
                exps[p] += w;
            }
        }
        exps[2] += self.pow2;
        let primes = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(p, &e)| (p as u64, e))
            .collect();
        Tally { primes, pi_halves: self.pi_halves }
    }
}

/// A fully factored value `∏ p^e · π^(pi_halves/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub primes: Vec<(u64, i128)>,
    pub pi_halves: i128,
}

fn product_tree(mut v: Vec<Integer>) -> Integer {
    if v.is_empty() {
        return Integer::from(1);
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len() / 2 + 1);
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().unwrap()
}

fn power(p: u64, e: i128) -> Integer {
    Integer::from(p).pow(u32::try_from(e).expect("exponent too large"))
}

impl Tally {
    pub fn is_one(&self) -> bool {
        self.primes.is_empty() && self.pi_halves == 0
    }

    pub fn to_integer(&self) -> Result<Integer> {
        if self.pi_halves != 0 {
            return Err(Error::Domain("value carries a power of pi".into()));
        }
        if let Some((p, e)) = self.primes.iter().find(|(_, e)| *e < 0) {
            return Err(Error::Domain(format!("not an integer: prime {p} has exponent {e}")));
        }
        Ok(product_tree(self.primes.iter().map(|&(p, e)| power(p, e)).collect()))
    }

    pub fn to_rational(&self) -> Result<Rational> {
        if self.pi_halves != 0 {
            return Err(Error::Domain("value carries a power of pi".into()));
        }
        let num = product_tree(self.primes.iter().filter(|x| x.1 > 0).map(|&(p, e)| power(p, e)).collect());
        let den = product_tree(self.primes.iter().filter(|x| x.1 < 0).map(|&(p, e)| power(p, -e)).collect());
        Ok(Rational::from((num, den)))
    }

    pub fn to_exact(&self) -> ExactValue {
        let mut v = ExactValue::from_prime_quarters(
            self.primes.iter().map(|&(p, e)| (p, i64::try_from(4 * e).expect("exponent overflow"))),
        );
        v = v * ExactValue::pi_pow_halves(self.pi_halves as i64);
        v
    }

    /// Natural logarithm at `prec` bits.
    pub fn ln(&self, prec: u32) -> Float {
        let work = prec + 64;
        let table = log_table(work, self.primes.last().map_or(2, |x| x.0));
        let mut acc = Float::with_val(work, 0);
        for &(p, e) in &self.primes {
            let lp = table.get(p);
            acc += Float::with_val(work, lp * Integer::from(e));
        }
        if self.pi_halves != 0 {
            let lpi = Float::with_val(work, rug::float::Constant::Pi).ln();
            acc += lpi * Integer::from(self.pi_halves) / 2u32;
        }
        Float::with_val(prec, acc)
    }
}

pub struct LogTable {
    limit: u64,
    primes: Vec<u64>,
    logs: Vec<Float>,
}

impl LogTable {
    fn get(&self, p: u64) -> &Float {
        let i = self.primes.binary_search(&p).expect("not a tabulated prime");
        &self.logs[i]
    }
}

type LogCache = RwLock<HashMap<u32, Arc<LogTable>>>;

fn log_cache() -> &'static LogCache {
    static CACHE: std::sync::OnceLock<LogCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized logarithms of all primes up to at least `upto`, per precision.
pub fn log_table(prec: u32, upto: u64) -> Arc<LogTable> {
    if let Some(t) = log_cache().read().unwrap().get(&prec) {
        if t.limit >= upto {
            return Arc::clone(t);
        }
    }
    let mut guard = log_cache().write().unwrap();
    let old = guard.get(&prec).cloned();
    if let Some(t) = &old {
        if t.limit >= upto {
            return Arc::clone(t);
        }
    }
    let limit = (upto as usize).max(1 << 10).next_power_of_two();
    let spf = spf_table(limit);
    let (mut primes, mut logs, from) = match &old {
        Some(t) => (t.primes.clone(), t.logs.clone(), t.limit as usize + 1),
        None => (Vec::new(), Vec::new(), 2),
    };
    for i in from..=limit {
        if spf[i] as usize == i {
            primes.push(i as u64);
            logs.push(Float::with_val(prec, i as u64).ln());
        }
    }
    let t = Arc::new(LogTable { limit: limit as u64, primes, logs });
    guard.insert(prec, Arc::clone(&t));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_delta(t: &[i64]) -> Integer {
        let mut p = Integer::from(1);
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                p *= t[j] - t[i];
            }
        }
        p
    }

    #[test]
    fn vandermonde_matches_double_loop() {
        let sets: [&[i64]; 4] = [&[1, 3, 5, 6, 8, 13], &[2], &[-7, -5, 0, 2, 4, 6, 9, 10], &[0, 1, 2, 3, 4]];
        for t in sets {
            let mut h = Hist::new();
            h.add_vandermonde(&blocks_of(t), 1);
            assert_eq!(h.finalize().to_integer().unwrap(), naive_delta(t), "{t:?}");
        }
    }

    #[test]
    fn gamma_values() {
        let mut h = Hist::new();
        h.add_gamma_half(10, 1); // Γ(5) = 24
        assert_eq!(h.finalize().to_integer().unwrap(), 24);
        let mut h = Hist::new();
        h.add_gamma_half(5, 1); // Γ(5/2) = (3/4)√π
        let t = h.finalize();
        assert_eq!(t.pi_halves, 1);
        h.pi_halves = 0;
        assert_eq!(h.finalize().to_rational().unwrap(), Rational::from((3, 4)));
    }

    #[test]
    fn superfactorial_small() {
        let mut h = Hist::new();
        h.add_superfactorial(5, 1); // 0!1!2!3!4! = 288
        assert_eq!(h.finalize().to_integer().unwrap(), 288);
    }

    #[test]
    fn log_agrees_with_integer() {
        let mut h = Hist::new();
        h.add_vandermonde(&blocks_of(&[1, 3, 5, 7, 8, 10, 20]), 1);
        h.add_int(7, -1);
        let t = h.finalize();
        let q = t.to_rational().unwrap();
        let ln = t.ln(200);
        let direct = Float::with_val(200, &q).ln();
        assert!((ln - direct).abs() < 1e-50);
    }
}
