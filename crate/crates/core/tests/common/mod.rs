#![allow(dead_code)]

use std::collections::HashMap;

use rug::Integer;

/// Adjacency lists of the defected Aztec rectangle on the `(2m+1) x (2n+1)`
/// board. Middle-row vertex at column `2x-1` carries label `x`.
pub struct Board {
    pub cells: Vec<(usize, usize, u8)>,
    pub adj: Vec<Vec<usize>>,
    pub rows: usize,
}

// part: 0 whole, 1 keeps the upper edges, 2 keeps the lower edges
pub fn board(m: usize, n: usize, holes: &[i64], seps: &[i64]) -> Board {
    let rows = 2 * m + 1;
    let cols = 2 * n + 1;
    let mut cells = Vec::new();
    for r in 0..rows {
        for c in (0..cols).filter(|c| (r + c) % 2 == 1) {
            let label = c.div_ceil(2) as i64;
            if r == m && holes.contains(&label) {
                continue;
            }
            if r == m && seps.contains(&label) {
                cells.push((r, c, 1));
                cells.push((r, c, 2));
            } else {
                cells.push((r, c, 0));
            }
        }
    }
    let mut adj = vec![Vec::new(); cells.len()];
    for a in 0..cells.len() {
        for b in 0..cells.len() {
            let (ra, ca, pa) = cells[a];
            let (rb, cb, pb) = cells[b];
            if rb != ra + 1 || ca.abs_diff(cb) != 1 {
                continue;
            }
            // a is above b: a must keep its lower edges, b its upper ones
            if pa == 1 || pb == 2 {
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    Board { cells, adj, rows }
}

impl Board {
    pub fn remove(&self, drop: &[usize]) -> Board {
        let keep: Vec<usize> = (0..self.cells.len()).filter(|i| !drop.contains(i)).collect();
        let mut at = vec![usize::MAX; self.cells.len()];
        for (k, &i) in keep.iter().enumerate() {
            at[i] = k;
        }
        let cells = keep.iter().map(|&i| self.cells[i]).collect();
        let adj = keep
            .iter()
            .map(|&i| self.adj[i].iter().filter(|&&j| at[j] != usize::MAX).map(|&j| at[j]).collect())
            .collect();
        Board { cells, adj, rows: self.rows }
    }

    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        self.cells.iter().position(|&(a, b, p)| a == r && b == c && p == 0)
    }

    pub fn without_bottom_except(&self, keep: &[i64]) -> Board {
        let drop: Vec<usize> = (0..self.cells.len())
            .filter(|&i| {
                let (r, c, _) = self.cells[i];
                r + 1 == self.rows && !keep.contains(&(c.div_ceil(2) as i64))
            })
            .collect();
        self.remove(&drop)
    }

    /// Perfect matchings, scanning vertices in board order; the state records
    /// which of the upcoming vertices are already taken.
    pub fn matchings(&self) -> Integer {
        let mut order: Vec<usize> = (0..self.cells.len()).collect();
        order.sort_by_key(|&i| self.cells[i]);
        let mut pos = vec![0; order.len()];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let mut states: HashMap<u128, Integer> = HashMap::from([(0, Integer::from(1))]);
        for (k, &v) in order.iter().enumerate() {
            let mut next: HashMap<u128, Integer> = HashMap::new();
            for (mask, ways) in states {
                if mask & 1 == 1 {
                    *next.entry(mask >> 1).or_default() += &ways;
                    continue;
                }
                for &w in &self.adj[v] {
                    let off = pos[w] as isize - k as isize;
                    if off <= 0 {
                        continue;
                    }
                    assert!(off < 128, "board too wide for the scan");
                    let bit = 1u128 << off;
                    if mask & bit == 0 {
                        *next.entry((mask | bit) >> 1).or_default() += &ways;
                    }
                }
            }
            states = next;
        }
        states.remove(&0).unwrap_or_default()
    }
}

/// Count for `AR_{2n,2n+k-l}(H,S)`.
pub fn region_count(n: usize, holes: &[i64], seps: &[i64]) -> Integer {
    board(2 * n, 2 * n + holes.len() - seps.len(), holes, seps).matchings()
}

pub fn rbar_count(m: usize, n: usize, t: &[i64]) -> Integer {
    board(m, n, &[], &[]).without_bottom_except(t).matchings()
}

#[test]
fn scan_counts_small_diamonds() {
    // Aztec diamond of order k has 2^{k(k+1)/2} tilings
    for k in 1..=6usize {
        assert_eq!(board(k, k, &[], &[]).matchings(), Integer::from(1) << (k * (k + 1) / 2) as u32);
    }
}
