//! Finite posets with opaque string ids.
//!
//! Elements get dense indices in input order. The order relation is stored as a
//! bit matrix and the cover list is always the transitive reduction of whatever
//! relations were supplied.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 512;

/// Connectivity of a subset, taken in the comparability graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Empty,
    Connected,
    Disconnected,
}

/// Coordinates of a product-of-chains poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub shape: Vec<usize>,
    pub coords: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct FinitePoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    covers: Vec<(usize, usize)>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    words: usize,
    leq: Vec<u64>,
    topo: Vec<usize>,
    grid: Option<Grid>,
}

impl PartialEq for FinitePoset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.covers == other.covers
    }
}

impl Eq for FinitePoset {}

impl FinitePoset {
    /// Builds a poset from ids and any generating set of relations `a <= b`.
    pub fn new<S: AsRef<str>>(elements: &[S], relations: &[(S, S)]) -> Result<FinitePoset> {
        Self::with_cap(elements, relations, DEFAULT_CAP)
    }

    pub fn with_cap<S: AsRef<str>>(
        elements: &[S],
        relations: &[(S, S)],
        cap: usize,
    ) -> Result<FinitePoset> {
        if elements.len() > cap {
            return Err(Error::TooLarge(elements.len(), cap));
        }
        let mut index = HashMap::new();
        let mut names = Vec::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            let e = e.as_ref().to_string();
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::DuplicateElement(e));
            }
            names.push(e);
        }
        let mut edges = Vec::with_capacity(relations.len());
        for (a, b) in relations {
            let lookup = |s: &S| {
                index
                    .get(s.as_ref())
                    .copied()
                    .ok_or_else(|| Error::UnknownElement(s.as_ref().to_string()))
            };
            edges.push((lookup(a)?, lookup(b)?));
        }
        Self::from_edges(names, index, &edges, None)
    }

    fn from_edges(
        names: Vec<String>,
        index: HashMap<String, usize>,
        edges: &[(usize, usize)],
        grid: Option<Grid>,
    ) -> Result<FinitePoset> {
        let n = names.len();
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Cycle(names[a].clone()));
            }
            succ[a].push(b);
            indeg[b] += 1;
        }
        // Kahn's algorithm, smallest index first, gives a deterministic linear extension.
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            topo.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if topo.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).expect("some element is on a cycle");
            return Err(Error::Cycle(names[stuck].clone()));
        }
        let words = n.div_ceil(64).max(1);
        let mut leq = vec![0u64; n * words];
        for &v in topo.iter().rev() {
            leq[v * words + v / 64] |= 1 << (v % 64);
            for &w in &succ[v] {
                for k in 0..words {
                    let bits = leq[w * words + k];
                    leq[v * words + k] |= bits;
                }
            }
        }
        let mut poset = FinitePoset {
            names,
            index,
            covers: Vec::new(),
            up: vec![Vec::new(); n],
            down: vec![Vec::new(); n],
            words,
            leq,
            topo,
            grid,
        };
        let mut covers = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && poset.leq(a, b) && !(0..n).any(|z| z != a && z != b && poset.leq(a, z) && poset.leq(z, b)) {
                    covers.push((a, b));
                }
            }
        }
        for &(a, b) in &covers {
            poset.up[a].push(b);
            poset.down[b].push(a);
        }
        poset.covers = covers;
        Ok(poset)
    }

    /// Product of chains `0 < 1 < ... < shape[i]-1`, elements named `v_i_j...`.
    pub fn grid(shape: &[usize]) -> Result<FinitePoset> {
        let total: usize = shape.iter().product();
        if total > DEFAULT_CAP {
            return Err(Error::TooLarge(total, DEFAULT_CAP));
        }
        let mut coords: Vec<Vec<usize>> = vec![vec![]];
        for &len in shape {
            coords = coords
                .into_iter()
                .flat_map(|c| {
                    (0..len).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        let names: Vec<String> = coords
            .iter()
            .map(|c| {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("v_{}", parts.join("_"))
            })
            .collect();
        let index: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let pos: HashMap<Vec<usize>, usize> =
            coords.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let mut edges = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            for d in 0..shape.len() {
                let mut nc = c.clone();
                nc[d] += 1;
                if let Some(&j) = pos.get(&nc) {
                    edges.push((i, j));
                }
            }
        }
        let grid = Grid { shape: shape.to_vec(), coords };
        Self::from_edges(names, index, &edges, Some(grid))
    }

    /// Total order `e0 < e1 < ...` on the given ids.
    pub fn chain<S: AsRef<str>>(elements: &[S]) -> Result<FinitePoset> {
        let rel: Vec<(&str, &str)> =
            elements.windows(2).map(|w| (w[0].as_ref(), w[1].as_ref())).collect();
        let els: Vec<&str> = elements.iter().map(|s| s.as_ref()).collect();
        FinitePoset::new(&els, &rel)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// Cover pairs `(a, b)` with `a < b`, sorted lexicographically by index.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_covers(&self, a: usize) -> &[usize] {
        &self.up[a]
    }

    pub fn lower_covers(&self, a: usize) -> &[usize] {
        &self.down[a]
    }

    /// A fixed linear extension.
    pub fn linear_extension(&self) -> &[usize] {
        &self.topo
    }

    pub fn downset(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq(x, a)).collect()
    }

    pub fn upset(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq(a, x)).collect()
    }

    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq(a, x) && self.leq(x, b)).collect()
    }

    /// All pairs `(a, b)` with `a <= b`, including `a == b`.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.leq(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn connectivity(&self, set: &[usize]) -> Connectivity {
        if set.is_empty() {
            return Connectivity::Empty;
        }
        let mut seen = vec![false; set.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..set.len() {
                if !seen[j] && self.comparable(set[i], set[j]) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        if count == set.len() {
            Connectivity::Connected
        } else {
            Connectivity::Disconnected
        }
    }

    /// Empty sets count as connected here.
    pub fn is_connected(&self, set: &[usize]) -> bool {
        self.connectivity(set) != Connectivity::Disconnected
    }

    /// Cover pairs of the induced subposet on `set`.
    pub fn subposet_covers(&self, set: &[usize]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &a in set {
            for &b in set {
                if self.lt(a, b) && !set.iter().any(|&z| z != a && z != b && self.leq(a, z) && self.leq(z, b)) {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_convex(&self, set: &[usize]) -> bool {
        let member = self.membership(set);
        set.iter().all(|&a| {
            set.iter().all(|&b| {
                !self.leq(a, b) || (0..self.len()).all(|z| member[z] || !(self.leq(a, z) && self.leq(z, b)))
            })
        })
    }

    pub fn is_downset(&self, set: &[usize]) -> bool {
        let member = self.membership(set);
        set.iter().all(|&a| (0..self.len()).all(|x| !self.leq(x, a) || member[x]))
    }

    pub fn is_upset(&self, set: &[usize]) -> bool {
        let member = self.membership(set);
        set.iter().all(|&a| (0..self.len()).all(|x| !self.leq(a, x) || member[x]))
    }

    pub fn membership(&self, set: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.len()];
        for &x in set {
            m[x] = true;
        }
        m
    }

    /// Every closed interval is a chain.
    pub fn is_diamond_free(&self) -> bool {
        self.comparable_pairs().into_iter().all(|(a, b)| {
            let iv = self.interval(a, b);
            iv.iter().all(|&x| iv.iter().all(|&y| self.comparable(x, y)))
        })
    }

    pub fn grid_info(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    /// Index of the grid point with the given coordinates, if it exists.
    pub fn grid_index(&self, coords: &[i64]) -> Option<usize> {
        let g = self.grid.as_ref()?;
        if coords.len() != g.shape.len() {
            return None;
        }
        let mut idx = 0usize;
        for (c, &len) in coords.iter().zip(&g.shape) {
            if *c < 0 || *c as usize >= len {
                return None;
            }
            idx = idx * len + *c as usize;
        }
        Some(idx)
    }
}

/// Order-preserving map between finite posets.
#[derive(Clone, Debug)]
pub struct OrderMap {
    pub source: Arc<FinitePoset>,
    pub target: Arc<FinitePoset>,
    pub map: Vec<usize>,
}

impl OrderMap {
    pub fn new(source: Arc<FinitePoset>, target: Arc<FinitePoset>, map: Vec<usize>) -> Result<OrderMap> {
        if map.len() != source.len() {
            return Err(Error::Dimension(format!(
                "map has {} images for {} elements",
                map.len(),
                source.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= target.len()) {
            return Err(Error::UnknownElement(format!("target index {bad}")));
        }
        for &(a, b) in source.covers() {
            if !target.leq(map[a], map[b]) {
                return Err(Error::NotOrderPreserving(
                    source.name(a).to_string(),
                    source.name(b).to_string(),
                ));
            }
        }
        Ok(OrderMap { source, target, map })
    }

    /// Builds a map from `(source id, target id)` pairs.
    pub fn from_names<S: AsRef<str>>(
        source: Arc<FinitePoset>,
        target: Arc<FinitePoset>,
        pairs: &[(S, S)],
    ) -> Result<OrderMap> {
        let mut map = vec![usize::MAX; source.len()];
        for (a, b) in pairs {
            map[source.index_of(a.as_ref())?] = target.index_of(b.as_ref())?;
        }
        if let Some(i) = map.iter().position(|&y| y == usize::MAX) {
            return Err(Error::UnknownElement(format!("no image for {}", source.name(i))));
        }
        OrderMap::new(source, target, map)
    }

    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    /// `a <= b` iff `f(a) <= f(b)`.
    pub fn is_order_embedding(&self) -> bool {
        let n = self.source.len();
        (0..n).all(|a| (0..n).all(|b| self.source.leq(a, b) == self.target.leq(self.map[a], self.map[b])))
    }
}

/// Pair `iota: P -> P'`, `pi: P' -> P` with `iota(a) <= x` iff `a <= pi(x)` and
/// `iota` an order-embedding.
#[derive(Clone, Debug)]
pub struct GaloisInsertion {
    pub iota: OrderMap,
    pub pi: OrderMap,
}

impl GaloisInsertion {
    pub fn new(iota: OrderMap, pi: OrderMap) -> Result<GaloisInsertion> {
        if *iota.source != *pi.target || *iota.target != *pi.source {
            return Err(Error::NotGaloisInsertion("domains and codomains do not match".into()));
        }
        if !iota.is_order_embedding() {
            return Err(Error::NotGaloisInsertion("embedding is not an order-embedding".into()));
        }
        let p = &iota.source;
        let q = &iota.target;
        for a in 0..p.len() {
            for x in 0..q.len() {
                if q.leq(iota.apply(a), x) != p.leq(a, pi.apply(x)) {
                    return Err(Error::NotGaloisInsertion(format!(
                        "adjunction fails at ({}, {})",
                        p.name(a),
                        q.name(x)
                    )));
                }
            }
        }
        Ok(GaloisInsertion { iota, pi })
    }
}
