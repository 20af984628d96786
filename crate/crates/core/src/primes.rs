//! Smallest-prime-factor sieve shared by every factor tally in the crate.

use std::sync::{Arc, RwLock};

static SIEVE: RwLock<Option<Arc<Vec<u32>>>> = RwLock::new(None);

/// Returns an SPF table covering at least `0..=limit`.  The table is grown
/// geometrically and shared between threads.
pub fn spf_table(limit: usize) -> Arc<Vec<u32>> {
    if let Some(t) = SIEVE.read().unwrap().as_ref() {
        if t.len() > limit {
            return Arc::clone(t);
        }
    }
    let mut guard = SIEVE.write().unwrap();
    if let Some(t) = guard.as_ref() {
        if t.len() > limit {
            return Arc::clone(t);
        }
    }
    let size = (limit + 1).max(1 << 12).next_power_of_two();
    let t = Arc::new(build_spf(size));
    *guard = Some(Arc::clone(&t));
    t
}

fn build_spf(size: usize) -> Vec<u32> {
    let mut spf = vec![0u32; size];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..size {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let j = i * p as usize;
            if p > si || j >= size {
                break;
            }
            spf[j] = p;
        }
    }
    spf
}

/// Factor `n` by trial division (for values beyond any sieve).
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    if (n as usize) < (1 << 24) {
        let t = spf_table(n as usize);
        let mut m = n as usize;
        while m > 1 {
            let p = t[m] as usize;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
