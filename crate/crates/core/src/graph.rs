//! Graphs underlying the protocol: adjacency algebra over GF(2), triangular
//! lattices, triangle covers and designated neighbours.
//!
//! Vertices are `0..n`. A [`Graph`] always carries its adjacency; the triangle
//! cover `T` and the designated neighbour map `u(v)` are populated when they
//! exist and validated whenever they are supplied explicitly.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// A triangle given by its three vertices in increasing order.
pub type Triangle = [usize; 3];

/// Characteristic vector over the vertex set.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    /// The unit vector `1_v`.
    pub fn unit(len: usize, v: usize) -> Self {
        let mut b = Self::zeros(len);
        b.set(v, true);
        b
    }

    pub fn from_support(len: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::zeros(len);
        for v in support {
            b.set(v, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_zero(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Indices of set bits, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    /// GF(2) sum.
    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len(), other.len(), "bit vector length mismatch");
        BitVector {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Integer dot product (number of common set bits).
    pub fn dot(&self, other: &BitVector) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Simple undirected graph with optional triangle cover and designated neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<BitVector>,
    triangle_cover: Option<Vec<Triangle>>,
    designated: Vec<Option<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Self loops and out-of-range endpoints
    /// are rejected; duplicate edges collapse. The triangle cover and the
    /// designated neighbours are derived with the deterministic default rules
    /// (the cover is left empty if some vertex lies in no triangle).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        let mut adjacency = vec![BitVector::zeros(n); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange { vertex: a.max(b), n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
            adjacency[a].set(b, true);
            adjacency[b].set(a, true);
        }
        let designated = (0..n).map(|v| adjacency[v].support().next()).collect();
        let mut g = Graph {
            n,
            edges: set,
            adjacency,
            triangle_cover: None,
            designated,
        };
        g.triangle_cover = find_triangle_cover(&g).ok();
        Ok(g)
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Self::from_edges(n, &edges).expect("complete graph edges are valid")
    }

    /// Replaces the triangle cover after checking the cover invariants.
    pub fn with_triangle_cover(mut self, cover: Vec<Triangle>) -> Result<Self, GraphError> {
        let mut covered = vec![false; self.n];
        let mut normalized = Vec::with_capacity(cover.len());
        for t in cover {
            let mut t = t;
            t.sort_unstable();
            for &v in &t {
                if v >= self.n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
                }
            }
            if !self.is_triangle(t) {
                return Err(GraphError::NotATriangle(t));
            }
            for &v in &t {
                covered[v] = true;
            }
            normalized.push(t);
        }
        let missing: Vec<usize> = (0..self.n).filter(|v| !covered[*v]).collect();
        if !missing.is_empty() {
            return Err(GraphError::Uncoverable(missing));
        }
        self.triangle_cover = Some(normalized);
        Ok(self)
    }

    /// Replaces the designated neighbour map; each `u(v)` must be adjacent to `v`.
    pub fn with_designated_neighbors(mut self, map: Vec<usize>) -> Result<Self, GraphError> {
        if map.len() != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, found: map.len() });
        }
        for (v, &u) in map.iter().enumerate() {
            if u >= self.n || !self.has_edge(v, u) {
                return Err(GraphError::NotANeighbor { vertex: v, neighbor: u });
            }
        }
        self.designated = map.into_iter().map(Some).collect();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.adjacency[a].get(b)
    }

    pub fn is_triangle(&self, t: Triangle) -> bool {
        t[0] != t[1]
            && t[1] != t[2]
            && t[0] != t[2]
            && self.has_edge(t[0], t[1])
            && self.has_edge(t[1], t[2])
            && self.has_edge(t[0], t[2])
    }

    /// Row `v` of the adjacency matrix, i.e. `A·1_v`.
    pub fn adjacency_row(&self, v: usize) -> &BitVector {
        &self.adjacency[v]
    }

    /// `A·t` reduced mod 2.
    pub fn apply_adjacency(&self, t: &BitVector) -> BitVector {
        assert_eq!(t.len(), self.n);
        t.support()
            .fold(BitVector::zeros(self.n), |acc, v| acc.xor(&self.adjacency[v]))
    }

    /// The triangle cover, or the list of vertices that no triangle covers.
    pub fn triangle_cover(&self) -> Result<&[Triangle], GraphError> {
        match &self.triangle_cover {
            Some(t) => Ok(t),
            None => Err(find_triangle_cover(self).err().unwrap_or(GraphError::Uncoverable(vec![]))),
        }
    }

    pub fn has_triangle_cover(&self) -> bool {
        self.triangle_cover.is_some()
    }

    /// Designated neighbour `u(v)`; `None` for isolated vertices.
    pub fn designated_neighbor(&self, v: usize) -> Option<usize> {
        self.designated.get(v).copied().flatten()
    }

    /// All triangles, lexicographically ordered.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in self.adjacency[a].support().filter(|&b| b > a) {
                for c in self.adjacency[b].support().filter(|&c| c > b) {
                    if self.adjacency[a].get(c) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Lossless file representation.
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            n: Some(self.n),
            edges: Some(self.edges.iter().map(|&(a, b)| [a, b]).collect()),
            lattice: None,
            triangles: self.triangle_cover.clone(),
            designated_neighbors: self.designated.iter().copied().collect::<Option<Vec<_>>>(),
        }
    }
}

/// Characteristic vector of the neighbourhood of `v`.
pub fn neighborhood(g: &Graph, v: usize) -> Result<BitVector, GraphError> {
    if v >= g.n {
        return Err(GraphError::VertexOutOfRange { vertex: v, n: g.n });
    }
    Ok(g.adjacency[v].clone())
}

/// Greedy cover over lexicographically ordered triangles: a triangle is kept
/// when it covers a vertex not yet covered.
pub fn find_triangle_cover(g: &Graph) -> Result<Vec<Triangle>, GraphError> {
    let mut covered = vec![false; g.n];
    let mut cover = Vec::new();
    for t in g.triangles() {
        if t.iter().any(|&v| !covered[v]) {
            for &v in &t {
                covered[v] = true;
            }
            cover.push(t);
        }
    }
    let missing: Vec<usize> = (0..g.n).filter(|v| !covered[*v]).collect();
    if missing.is_empty() {
        Ok(cover)
    } else {
        Err(GraphError::Uncoverable(missing))
    }
}

/// `(-1)^{t·At / 2}` with `t·At` over the integers, i.e. `-1` to the number of
/// edges inside the support of `t`.
pub fn stabilizer_sign(g: &Graph, t: &BitVector) -> i8 {
    assert_eq!(t.len(), g.n, "bit vector length must equal vertex count");
    let internal = g.edges.iter().filter(|&&(a, b)| t.get(a) && t.get(b)).count();
    if internal % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Triangular lattice with `rows·cols` vertices numbered row-major.
///
/// With at least two rows and columns each row is a path, columns are paths,
/// and each cell gets one diagonal: `(r, c+1)–(r+1, c)` below even rows and
/// `(r, c)–(r+1, c+1)` below odd rows, so odd rows sit half a step to the
/// right. A single row (or column) is the triangle strip `i~i+1, i~i+2`, the
/// zigzag reading of a two-row lattice.
pub fn build_triangular_lattice(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    if rows == 0 || cols == 0 {
        return Err(GraphError::EmptyLattice);
    }
    let n = rows * cols;
    let mut edges = Vec::new();
    if rows == 1 || cols == 1 {
        for i in 0..n {
            if i + 1 < n {
                edges.push((i, i + 1));
            }
            if i + 2 < n {
                edges.push((i, i + 2));
            }
        }
    } else {
        let idx = |r: usize, c: usize| r * cols + c;
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((idx(r, c), idx(r + 1, c)));
                    if c + 1 < cols {
                        if r % 2 == 0 {
                            edges.push((idx(r, c + 1), idx(r + 1, c)));
                        } else {
                            edges.push((idx(r, c), idx(r + 1, c + 1)));
                        }
                    }
                }
            }
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    let cover = find_triangle_cover(&g)?;
    g.with_triangle_cover(cover)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
}

/// Graph spec file contents (TOML).
///
/// Either `lattice = { rows, cols }` or `n` plus `edges = [[a, b], ...]`.
/// `triangles` and `designated_neighbors` override the derived defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<Vec<Triangle>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designated_neighbors: Option<Vec<usize>>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, GraphError> {
        let mut g = match (&self.lattice, self.n) {
            (Some(l), None) if self.edges.is_none() => build_triangular_lattice(l.rows, l.cols)?,
            (None, Some(n)) => {
                let edges: Vec<_> = self
                    .edges
                    .as_deref()
                    .unwrap_or_default()
                    .iter()
                    .map(|e| (e[0], e[1]))
                    .collect();
                Graph::from_edges(n, &edges)?
            }
            _ => return Err(GraphError::Spec("give either `lattice` or `n` with `edges`".into())),
        };
        if let Some(t) = &self.triangles {
            g = g.with_triangle_cover(t.clone())?;
        }
        if let Some(d) = &self.designated_neighbors {
            g = g.with_designated_neighbors(d.clone())?;
        }
        Ok(g)
    }

    pub fn from_toml(text: &str) -> Result<Self, GraphError> {
        toml::from_str(text).map_err(|e| GraphError::Spec(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("graph spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn lattice_1x3_is_k3() {
        let g = build_triangular_lattice(1, 3).unwrap();
        assert_eq!(g, Graph::complete(3).with_triangle_cover(vec![[0, 1, 2]]).unwrap());
        assert_eq!(g.triangle_cover().unwrap(), &[[0, 1, 2]]);
    }

    #[test]
    fn lattice_4x5_is_covered() {
        let g = build_triangular_lattice(4, 5).unwrap();
        assert_eq!(g.n(), 20);
        let cover = g.triangle_cover().unwrap();
        for v in 0..20 {
            assert!(cover.iter().any(|t| t.contains(&v)), "vertex {v} uncovered");
        }
        for t in cover {
            assert!(g.is_triangle(*t));
        }
        // 4 rows of 4 horizontal edges, 3x5 vertical, 3x4 diagonals
        assert_eq!(g.edge_count(), 16 + 15 + 12);
    }

    #[test]
    fn lattice_matches_figure_diagonals() {
        let g = build_triangular_lattice(4, 5).unwrap();
        let idx = |r: usize, c: usize| r * 5 + c;
        // b0-a1, a1-b2, b2-a3
        assert!(g.has_edge(idx(0, 1), idx(1, 0)));
        assert!(g.has_edge(idx(1, 0), idx(2, 1)));
        assert!(g.has_edge(idx(2, 1), idx(3, 0)));
        assert!(!g.has_edge(idx(0, 0), idx(1, 1)));
    }

    #[test]
    fn lattice_1x2_rejected() {
        assert!(matches!(build_triangular_lattice(1, 2), Err(GraphError::Uncoverable(v)) if v == vec![0, 1]));
        assert!(matches!(build_triangular_lattice(0, 3), Err(GraphError::EmptyLattice)));
    }

    #[test]
    fn neighborhood_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(neighborhood(&k3, 0).unwrap(), BitVector::from_support(3, [1, 2]));
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(neighborhood(&edge, 0).unwrap(), BitVector::from_support(2, [1]));
        assert_eq!(neighborhood(&path(3), 1).unwrap(), BitVector::from_support(3, [0, 2]));
        assert!(neighborhood(&k3, 3).is_err());
    }

    #[test]
    fn cover_examples() {
        assert_eq!(find_triangle_cover(&Graph::complete(3)).unwrap(), vec![[0, 1, 2]]);
        let two = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(find_triangle_cover(&two).unwrap(), vec![[0, 1, 2], [3, 4, 5]]);
        match find_triangle_cover(&path(4)) {
            Err(GraphError::Uncoverable(v)) => assert_eq!(v, vec![0, 1, 2, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sign_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(stabilizer_sign(&k3, &BitVector::from_support(3, [0, 1, 2])), -1);
        assert_eq!(stabilizer_sign(&k3, &BitVector::zeros(3)), 1);
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(stabilizer_sign(&edge, &BitVector::from_support(2, [0, 1])), -1);
    }

    #[test]
    fn triangle_sign_and_adjacency_vanish_on_triangle() {
        let g = build_triangular_lattice(3, 3).unwrap();
        for t in g.triangle_cover().unwrap() {
            let tau = BitVector::from_support(g.n(), t.iter().copied());
            assert_eq!(stabilizer_sign(&g, &tau), -1);
            let a_tau = g.apply_adjacency(&tau);
            assert!(t.iter().all(|&v| !a_tau.get(v)));
        }
    }

    #[test]
    fn designated_neighbor_is_smallest() {
        let g = build_triangular_lattice(2, 3).unwrap();
        for v in 0..g.n() {
            let u = g.designated_neighbor(v).unwrap();
            assert!(g.has_edge(v, u));
            assert_eq!(Some(u), g.adjacency_row(v).support().next());
        }
    }

    #[test]
    fn invalid_overrides_rejected() {
        let g = path(3);
        assert!(matches!(
            g.clone().with_triangle_cover(vec![[0, 1, 2]]),
            Err(GraphError::NotATriangle(_))
        ));
        assert!(matches!(
            g.with_designated_neighbors(vec![2, 0, 1]),
            Err(GraphError::NotANeighbor { vertex: 0, neighbor: 2 })
        ));
        assert!(matches!(Graph::from_edges(2, &[(0, 0)]), Err(GraphError::SelfLoop(0))));
    }

    #[test]
    fn spec_round_trip() {
        let g = build_triangular_lattice(3, 4).unwrap();
        let text = g.to_spec().to_toml();
        let back = GraphSpec::from_toml(&text).unwrap().build().unwrap();
        assert_eq!(g, back);

        let spec = GraphSpec::from_toml("lattice = { rows = 1, cols = 3 }").unwrap();
        assert_eq!(spec.build().unwrap().n(), 3);
        let spec = GraphSpec::from_toml("n = 2\nedges = [[0, 1]]").unwrap();
        let g = spec.build().unwrap();
        assert!(!g.has_triangle_cover());
        assert!(GraphSpec::from_toml("n = 2\nbogus = 1").is_err());
    }
}
