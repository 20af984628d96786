//! Explicit defected Aztec-rectangle graphs and a row-by-row perfect
//! matching counter, independent of the closed-form counts.

use std::collections::{BTreeSet, HashMap};

use rug::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

pub const WIDTH_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Whole,
    /// Half of a split vertex keeping the northern edges.
    North,
    /// Half of a split vertex keeping the southern edges.
    South,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub part: Part,
    /// Bipartition class: parity of the row.
    pub class: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectGraph {
    pub rows: usize,
    pub cols: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
}

impl DefectGraph {
    pub fn class_sizes(&self) -> (usize, usize) {
        let even = self.vertices.iter().filter(|v| v.class == 0).count();
        (even, self.vertices.len() - even)
    }

    pub fn is_balanced(&self) -> bool {
        let (a, b) = self.class_sizes();
        a == b
    }

    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.vertices[a].class != self.vertices[b].class)
    }

    pub fn find(&self, row: usize, col: usize, part: Part) -> Option<usize> {
        self.vertices.iter().position(|v| v.row == row && v.col == col && v.part == part)
    }

    /// Removes the given vertex ids and reindexes.
    pub fn without(&self, drop: &[usize]) -> DefectGraph {
        let gone: BTreeSet<usize> = drop.iter().copied().collect();
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for v in &self.vertices {
            if !gone.contains(&v.id) {
                map[v.id] = vertices.len();
                vertices.push(Vertex { id: vertices.len(), ..v.clone() });
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| !gone.contains(a) && !gone.contains(b))
            .map(|&(a, b)| (map[a], map[b]))
            .collect();
        DefectGraph { rows: self.rows, cols: self.cols, vertices, edges }
    }

    /// Mirror image top-to-bottom and/or left-to-right.
    pub fn reflected(&self, vertical: bool, horizontal: bool) -> DefectGraph {
        let mut g = self.clone();
        for v in &mut g.vertices {
            if vertical {
                v.row = self.rows - 1 - v.row;
                v.part = match v.part {
                    Part::North => Part::South,
                    Part::South => Part::North,
                    Part::Whole => Part::Whole,
                };
            }
            if horizontal {
                v.col = self.cols - 1 - v.col;
            }
            v.class = (v.row % 2) as u8;
        }
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }
}

/// White squares of the `(2m+1) x (2n+1)` board with black corners, joined
/// diagonally.  Defect labels `1..=n` sit on the middle row at column
/// `2·label - 1`; holes are deleted and separations split into a northern
/// and a southern half.
pub fn build_graph(m: usize, n: usize, holes: &[i64], seps: &[i64]) -> Result<DefectGraph> {
    let h: BTreeSet<i64> = holes.iter().copied().collect();
    let s: BTreeSet<i64> = seps.iter().copied().collect();
    if let Some(x) = h.intersection(&s).next() {
        return Err(Error::InvalidRegion(format!("label {x} is both a hole and a separation")));
    }
    if !(h.is_empty() && s.is_empty()) && m % 2 == 1 {
        return Err(Error::InvalidRegion("defects need an even row parameter m".into()));
    }
    if let Some(x) = h.iter().chain(&s).find(|&&x| x < 1 || x > n as i64) {
        return Err(Error::InvalidRegion(format!("label {x} outside 1..={n}")));
    }
    let rows = 2 * m + 1;
    let cols = 2 * n + 1;
    let mut vertices = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if (i + j) % 2 == 0 {
                continue;
            }
            let label = if i == m { Some((j as i64 + 1) / 2) } else { None };
            let class = (i % 2) as u8;
            match label {
                Some(x) if h.contains(&x) => {}
                Some(x) if s.contains(&x) => {
                    for part in [Part::North, Part::South] {
                        vertices.push(Vertex { id: vertices.len(), row: i, col: j, part, class });
                    }
                }
                _ => vertices.push(Vertex { id: vertices.len(), row: i, col: j, part: Part::Whole, class }),
            }
        }
    }
    let mut index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for v in &vertices {
        index.entry((v.row, v.col)).or_default().push(v.id);
    }
    let mut edges = Vec::new();
    for v in &vertices {
        if v.row + 1 == rows || v.part == Part::North {
            continue;
        }
        for nc in [v.col.wrapping_sub(1), v.col + 1] {
            if let Some(ids) = index.get(&(v.row + 1, nc)) {
                for &w in ids {
                    if vertices[w].part != Part::South {
                        edges.push((v.id, w));
                    }
                }
            }
        }
    }
    Ok(DefectGraph { rows, cols, vertices, edges })
}

/// Number of perfect matchings, by dynamic programming over rows with the
/// set of current-row vertices already matched from above as state.
pub fn count_matchings(g: &DefectGraph) -> Result<Integer> {
    let (even, odd) = g.class_sizes();
    if even != odd {
        return Err(Error::Unbalanced { even, odd });
    }
    if !g.is_bipartite() {
        return Err(Error::Precondition("graph has an edge inside a color class".into()));
    }
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); g.rows];
    for v in &g.vertices {
        layers[v.row].push(v.id);
    }
    for l in &mut layers {
        l.sort_by_key(|&id| (g.vertices[id].col, g.vertices[id].part as u8));
        if l.len() > WIDTH_CAP {
            return Err(Error::WidthCap { width: l.len(), cap: WIDTH_CAP });
        }
    }
    if g.edges.iter().any(|&(a, b)| g.vertices[a].row.abs_diff(g.vertices[b].row) != 1) {
        return Err(Error::Precondition("edges must join adjacent rows".into()));
    }
    let mut slot = vec![0usize; g.vertices.len()];
    for l in &layers {
        for (k, &id) in l.iter().enumerate() {
            slot[id] = k;
        }
    }
    // down[id] = bit positions of neighbors in the next row
    let mut down: Vec<Vec<usize>> = vec![Vec::new(); g.vertices.len()];
    for &(a, b) in &g.edges {
        let (up, lo) = if g.vertices[a].row < g.vertices[b].row { (a, b) } else { (b, a) };
        down[up].push(slot[lo]);
    }
    let mut states: HashMap<u32, Integer> = HashMap::new();
    states.insert(0, Integer::from(1));
    for (r, layer) in layers.iter().enumerate() {
        let full: u32 = if layer.len() == 32 { u32::MAX } else { (1u32 << layer.len()) - 1 };
        let mut next: HashMap<u32, Integer> = HashMap::new();
        for (mask, ways) in states {
            let free: Vec<usize> = (0..layer.len()).filter(|&k| mask & (1 << k) == 0).map(|k| layer[k]).collect();
            if r + 1 == g.rows {
                if mask == full {
                    *next.entry(0).or_default() += &ways;
                }
                continue;
            }
            let mut out = Vec::new();
            assign(&free, &down, 0, 0, &mut out);
            for m2 in out {
                *next.entry(m2).or_default() += &ways;
            }
        }
        states = next;
    }
    Ok(states.remove(&0).unwrap_or_default())
}

fn assign(free: &[usize], down: &[Vec<usize>], i: usize, used: u32, out: &mut Vec<u32>) {
    if i == free.len() {
        out.push(used);
        return;
    }
    for &k in &down[free[i]] {
        if used & (1 << k) == 0 {
            assign(free, down, i + 1, used | (1 << k), out);
        }
    }
}

/// Graph of the region `AR_{2n,2n+k-l}(H,S)`.
pub fn region_graph(n: usize, holes: &[i64], seps: &[i64]) -> Result<DefectGraph> {
    let cols = 2 * n + holes.len();
    if seps.len() > cols {
        return Err(Error::InvalidRegion("too many separations".into()));
    }
    build_graph(2 * n, cols - seps.len(), holes, seps)
}

/// `AR_{m,n}` with every bottom vertex deleted except those at labels in `t`.
pub fn rbar_graph(m: usize, n: usize, t: &[i64]) -> Result<DefectGraph> {
    if let Some(x) = t.iter().find(|&&x| x < 1 || x > n as i64) {
        return Err(Error::InvalidRegion(format!("label {x} outside 1..={n}")));
    }
    let g = build_graph(m, n, &[], &[])?;
    let bottom = g.rows - 1;
    let drop: Vec<usize> = g
        .vertices
        .iter()
        .filter(|v| v.row == bottom && !t.contains(&((v.col as i64 + 1) / 2)))
        .map(|v| v.id)
        .collect();
    Ok(g.without(&drop))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrimerReport {
    pub split_count: String,
    /// Counts with the trimers NW+SW, NW+SE, NE+SW, NE+SE removed.
    pub terms: [String; 4],
    pub holds: bool,
}

/// Checks that the count with a separation at label `v` equals the sum of
/// the four counts obtained by repairing `v` and deleting `v` together with
/// one northern and one southern neighbor.
pub fn trimer_expansion_check(n: usize, holes: &[i64], seps: &[i64], v: i64) -> Result<TrimerReport> {
    if !seps.contains(&v) {
        return Err(Error::Precondition(format!("no separation at label {v}")));
    }
    let g = region_graph(n, holes, seps)?;
    let total = count_matchings(&g)?;
    let others: Vec<i64> = seps.iter().copied().filter(|&x| x != v).collect();
    let repaired = build_graph(g.rows / 2, g.cols / 2, holes, &others)?;
    let mid = g.rows / 2;
    let col = (2 * v - 1) as usize;
    let center = repaired.find(mid, col, Part::Whole).expect("repaired vertex present");
    let mut terms: [Integer; 4] = Default::default();
    let mut sum = Integer::new();
    let mut idx = 0;
    for nc in [col - 1, col + 1] {
        for sc in [col - 1, col + 1] {
            let a = repaired.find(mid - 1, nc, Part::Whole);
            let b = repaired.find(mid + 1, sc, Part::Whole);
            let t = match (a, b) {
                (Some(a), Some(b)) => count_matchings(&repaired.without(&[center, a, b]))?,
                _ => Integer::new(),
            };
            sum += &t;
            terms[idx] = t;
            idx += 1;
        }
    }
    Ok(TrimerReport {
        split_count: total.to_string(),
        terms: terms.map(|t| t.to_string()),
        holds: sum == total,
    })
}
