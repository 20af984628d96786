//! Defect configurations on the axis and the O/E labeling of a defected
//! Aztec rectangle.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Hole,
    Separation,
}

impl Kind {
    pub fn flip(self) -> Kind {
        match self {
            Kind::Hole => Kind::Separation,
            Kind::Separation => Kind::Hole,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Defect {
    pub pos: i64,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cluster {
    pub name: String,
    pub coords: Vec<i64>,
}

/// Holes and separations at distinct integer coordinates, sorted ascending,
/// with an optional partition into named clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DefectConfig {
    defects: Vec<Defect>,
    clusters: Option<Vec<Cluster>>,
}

impl DefectConfig {
    pub fn new(mut defects: Vec<Defect>) -> Result<Self> {
        defects.sort();
        if let Some(w) = defects.windows(2).find(|w| w[0].pos == w[1].pos) {
            return Err(Error::DuplicateCoordinate(w[0].pos));
        }
        Ok(DefectConfig { defects, clusters: None })
    }

    pub fn from_sets(holes: &[i64], seps: &[i64]) -> Result<Self> {
        let mut d: Vec<Defect> = holes.iter().map(|&pos| Defect { pos, kind: Kind::Hole }).collect();
        d.extend(seps.iter().map(|&pos| Defect { pos, kind: Kind::Separation }));
        Self::new(d)
    }

    /// Groups defects into clusters; every coordinate must appear in exactly one.
    pub fn with_clusters(mut self, clusters: Vec<Cluster>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &clusters {
            for &x in &c.coords {
                if self.kind_at(x).is_none() {
                    return Err(Error::Precondition(format!("cluster {} names absent coordinate {x}", c.name)));
                }
                if !seen.insert(x) {
                    return Err(Error::DuplicateCoordinate(x));
                }
            }
        }
        if seen.len() != self.defects.len() {
            return Err(Error::Precondition("cluster partition does not cover every defect".into()));
        }
        let mut clusters = clusters;
        for c in &mut clusters {
            c.coords.sort();
        }
        self.clusters = Some(clusters);
        Ok(self)
    }

    pub fn defects(&self) -> &[Defect] {
        &self.defects
    }
    pub fn clusters(&self) -> Option<&[Cluster]> {
        self.clusters.as_deref()
    }
    pub fn len(&self) -> usize {
        self.defects.len()
    }
    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn holes(&self) -> Vec<i64> {
        self.of_kind(Kind::Hole)
    }
    pub fn seps(&self) -> Vec<i64> {
        self.of_kind(Kind::Separation)
    }
    fn of_kind(&self, k: Kind) -> Vec<i64> {
        self.defects.iter().filter(|d| d.kind == k).map(|d| d.pos).collect()
    }
    pub fn support(&self) -> Vec<i64> {
        self.defects.iter().map(|d| d.pos).collect()
    }
    pub fn kind_at(&self, x: i64) -> Option<Kind> {
        self.defects.binary_search_by_key(&x, |d| d.pos).ok().map(|i| self.defects[i].kind)
    }

    /// Holes minus separations.
    pub fn charge(&self) -> i64 {
        self.defects.iter().map(|d| if d.kind == Kind::Hole { 1 } else { -1 }).sum()
    }

    pub fn min_pos(&self) -> Option<i64> {
        self.defects.first().map(|d| d.pos)
    }
    pub fn max_pos(&self) -> Option<i64> {
        self.defects.last().map(|d| d.pos)
    }

    /// The clusters as separate configurations (the whole config if unpartitioned).
    pub fn cluster_configs(&self) -> Vec<DefectConfig> {
        match &self.clusters {
            None => vec![DefectConfig { defects: self.defects.clone(), clusters: None }],
            Some(cs) => cs
                .iter()
                .map(|c| {
                    let d = c.coords.iter().map(|&x| Defect { pos: x, kind: self.kind_at(x).unwrap() }).collect();
                    DefectConfig { defects: d, clusters: None }
                })
                .collect(),
        }
    }

    /// Moves the defect at `from` to the free site `to`, keeping cluster membership.
    pub fn moved(&self, from: i64, to: i64) -> Result<Self> {
        let kind = self.kind_at(from).ok_or_else(|| Error::Precondition(format!("no defect at {from}")))?;
        if self.kind_at(to).is_some() {
            return Err(Error::Precondition(format!("site {to} is occupied")));
        }
        let mut d: Vec<Defect> = self.defects.iter().copied().filter(|d| d.pos != from).collect();
        d.push(Defect { pos: to, kind });
        d.sort();
        let clusters = self.clusters.as_ref().map(|cs| {
            cs.iter()
                .map(|c| {
                    let mut coords: Vec<i64> = c.coords.iter().map(|&x| if x == from { to } else { x }).collect();
                    coords.sort();
                    Cluster { name: c.name.clone(), coords }
                })
                .collect()
        });
        Ok(DefectConfig { defects: d, clusters })
    }

    /// Exchanges the kinds at two occupied coordinates.
    pub fn swapped(&self, a: i64, b: i64) -> Result<Self> {
        let (ka, kb) = match (self.kind_at(a), self.kind_at(b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::Precondition(format!("swap needs defects at {a} and {b}"))),
        };
        let mut out = self.clone();
        for d in &mut out.defects {
            if d.pos == a {
                d.kind = kb;
            } else if d.pos == b {
                d.kind = ka;
            }
        }
        Ok(out)
    }

    /// Same defects with every kind replaced by `f(pos)`.
    pub fn with_kinds<F: Fn(i64) -> Kind>(&self, f: F) -> Self {
        let mut out = self.clone();
        for d in &mut out.defects {
            d.kind = f(d.pos);
        }
        out
    }

    pub fn without_clusters(&self) -> Self {
        DefectConfig { defects: self.defects.clone(), clusters: None }
    }

    /// Union of configurations with disjoint supports; each input becomes a cluster.
    pub fn union(parts: &[DefectConfig]) -> Result<Self> {
        let mut all = Vec::new();
        let mut clusters = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            all.extend_from_slice(&p.defects);
            clusters.push(Cluster { name: format!("O{}", i + 1), coords: p.support() });
        }
        let sorted = {
            let mut s = all.clone();
            s.sort();
            s
        };
        if let Some(w) = sorted.windows(2).find(|w| w[0].pos == w[1].pos) {
            return Err(Error::Overlap(format!("coordinate {} used twice", w[0].pos)));
        }
        DefectConfig::new(all)?.with_clusters(clusters)
    }

    pub fn to_json(&self) -> ConfigJson {
        let groups = self.cluster_configs();
        ConfigJson {
            clusters: groups.iter().map(|g| ClusterJson { holes: g.holes(), separations: g.seps() }).collect(),
        }
    }
}

impl fmt::Display for DefectConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = |d: &Defect| match d.kind {
            Kind::Hole => format!("h@{}", d.pos),
            Kind::Separation => format!("s@{}", d.pos),
        };
        let groups: Vec<String> = match &self.clusters {
            None => vec![self.defects.iter().map(token).collect::<Vec<_>>().join(" ")],
            Some(cs) => cs
                .iter()
                .map(|c| {
                    c.coords
                        .iter()
                        .map(|&x| token(&Defect { pos: x, kind: self.kind_at(x).unwrap() }))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect(),
        };
        write!(f, "{}", groups.join(" | "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterJson {
    #[serde(default)]
    pub holes: Vec<i64>,
    #[serde(default)]
    pub separations: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub clusters: Vec<ClusterJson>,
}

/// Parses `h@<int>` / `s@<int>` tokens, with `|` between clusters, or the
/// JSON form `{"clusters":[{"holes":[..],"separations":[..]}, ..]}`.
pub fn parse_config(text: &str) -> Result<DefectConfig> {
    let t = text.trim();
    if t.starts_with('{') {
        let j: ConfigJson = serde_json::from_str(t).map_err(|e| Error::Malformed {
            pos: e.column(),
            token: e.to_string(),
        })?;
        return from_groups(
            j.clusters
                .into_iter()
                .map(|c| {
                    let mut d: Vec<Defect> = c.holes.into_iter().map(|pos| Defect { pos, kind: Kind::Hole }).collect();
                    d.extend(c.separations.into_iter().map(|pos| Defect { pos, kind: Kind::Separation }));
                    d
                })
                .collect(),
        );
    }
    let mut groups: Vec<Vec<Defect>> = vec![Vec::new()];
    let mut pos = 0usize;
    let bytes = text.as_bytes();
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c == b'|' {
            groups.push(Vec::new());
            pos += 1;
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'|' {
            pos += 1;
        }
        let tok = &text[start..pos];
        let bad = || Error::Malformed { pos: start, token: tok.to_string() };
        let (kind, num) = if let Some(r) = tok.strip_prefix("h@") {
            (Kind::Hole, r)
        } else if let Some(r) = tok.strip_prefix("s@") {
            (Kind::Separation, r)
        } else {
            return Err(bad());
        };
        let x: i64 = num.parse().map_err(|_| bad())?;
        groups.last_mut().unwrap().push(Defect { pos: x, kind });
    }
    if groups.len() > 1 && groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Malformed { pos: text.len(), token: "empty cluster".into() });
    }
    from_groups(groups)
}

fn from_groups(groups: Vec<Vec<Defect>>) -> Result<DefectConfig> {
    let all: Vec<Defect> = groups.iter().flatten().copied().collect();
    let cfg = DefectConfig::new(all)?;
    if groups.len() <= 1 {
        return Ok(cfg);
    }
    let clusters = groups
        .iter()
        .enumerate()
        .map(|(i, g)| Cluster { name: format!("O{}", i + 1), coords: g.iter().map(|d| d.pos).collect() })
        .collect();
    cfg.with_clusters(clusters)
}

/// Shifts every coordinate.
pub fn translate(config: &DefectConfig, shift: i64) -> DefectConfig {
    DefectConfig {
        defects: config.defects.iter().map(|d| Defect { pos: d.pos + shift, kind: d.kind }).collect(),
        clusters: config.clusters.as_ref().map(|cs| {
            cs.iter()
                .map(|c| Cluster { name: c.name.clone(), coords: c.coords.iter().map(|x| x + shift).collect() })
                .collect()
        }),
    }
}

/// Half-order `n`, hole count `k` and separation count `l` of `AR_{2n,2n+k-l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub n: u64,
    pub k: u64,
    pub l: u64,
}

impl RegionSpec {
    /// Number of cells on the axis, `2n + k - l`.
    pub fn length(&self) -> i64 {
        2 * self.n as i64 + self.k as i64 - self.l as i64
    }

    /// Validates label sets against the region.
    pub fn check(&self, holes: &BTreeSet<i64>, seps: &BTreeSet<i64>) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidRegion("n must be positive".into()));
        }
        if holes.len() as u64 != self.k || seps.len() as u64 != self.l {
            return Err(Error::InvalidRegion("|H| must equal k and |S| must equal l".into()));
        }
        if self.l > self.n {
            return Err(Error::InvalidRegion("2n - 2l must be nonnegative".into()));
        }
        if let Some(x) = holes.intersection(seps).next() {
            return Err(Error::InvalidRegion(format!("H and S must be disjoint (label {x} in both)")));
        }
        let len = self.length();
        if let Some(x) = holes.iter().chain(seps).find(|&&x| x < 1 || x > len) {
            return Err(Error::InvalidRegion(format!("label {x} outside 1..{len}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OeLabeling {
    pub o_set: Vec<i64>,
    pub e_set: Vec<i64>,
    pub length: i64,
}

/// Labels cells `1..=2n+k-l`: free cells alternate O, E starting with O;
/// separation cells join both sets; hole cells join neither.
pub fn build_oe_labeling(region: RegionSpec, holes: &BTreeSet<i64>, seps: &BTreeSet<i64>) -> Result<OeLabeling> {
    region.check(holes, seps)?;
    let (o, e) = oe_sets(1, region.length(), |x| {
        if holes.contains(&x) {
            Some(Kind::Hole)
        } else if seps.contains(&x) {
            Some(Kind::Separation)
        } else {
            None
        }
    });
    if o.len() as u64 != region.n || e.len() as u64 != region.n {
        return Err(Error::InvalidRegion(format!("|O| = {}, |E| = {}, expected {}", o.len(), e.len(), region.n)));
    }
    Ok(OeLabeling { o_set: o, e_set: e, length: region.length() })
}

/// O and E sets over the cell range `lo..=hi` for an arbitrary defect lookup.
pub fn oe_sets<F: Fn(i64) -> Option<Kind>>(lo: i64, hi: i64, kind: F) -> (Vec<i64>, Vec<i64>) {
    let mut o = Vec::new();
    let mut e = Vec::new();
    let mut rank = 0u64;
    for x in lo..=hi {
        match kind(x) {
            Some(Kind::Hole) => {}
            Some(Kind::Separation) => {
                o.push(x);
                e.push(x);
            }
            None => {
                if rank.is_multiple_of(2) {
                    o.push(x)
                } else {
                    e.push(x)
                }
                rank += 1;
            }
        }
    }
    (o, e)
}

/// Drops hole cells and expands each separation cell into the two letters
/// that continue the alternation; the result must read O,E,O,E,... of
/// length 2n.
pub fn gap_picture_holds(lab: &OeLabeling, holes: &BTreeSet<i64>, seps: &BTreeSet<i64>) -> bool {
    let o: BTreeSet<i64> = lab.o_set.iter().copied().collect();
    let e: BTreeSet<i64> = lab.e_set.iter().copied().collect();
    let mut word: Vec<char> = Vec::new();
    for x in 1..=lab.length {
        if holes.contains(&x) {
            if o.contains(&x) || e.contains(&x) {
                return false;
            }
            continue;
        }
        if seps.contains(&x) {
            if !(o.contains(&x) && e.contains(&x)) {
                return false;
            }
            let prev = word.last().copied().unwrap_or('E');
            let next = if prev == 'E' { 'O' } else { 'E' };
            word.push(next);
            word.push(prev);
            continue;
        }
        match (o.contains(&x), e.contains(&x)) {
            (true, false) => word.push('O'),
            (false, true) => word.push('E'),
            _ => return false,
        }
    }
    word.len() == 2 * lab.o_set.len() && word.iter().enumerate().all(|(i, &c)| c == if i % 2 == 0 { 'O' } else { 'E' })
}
