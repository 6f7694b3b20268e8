//! Port-labelled trees and paths, their enumeration, sampling and file formats.
//!
//! Nodes carry internal indices `0..n` so the engine and the monitors can talk
//! about them. Agents never see these indices: a model only observes degrees,
//! port numbers and the memory stored at its current node.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ports are numbered `1..=degree`, as in the model.
pub type Port = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("a tree needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("tree enumeration supports 2..=8 nodes, got {0}")]
    EnumerationRange(usize),
    #[error("declared n = {declared} but {actual} port lists given")]
    CountMismatch { declared: usize, actual: usize },
    #[error("node {node}: neighbor {neighbor} out of range")]
    NeighborOutOfRange { node: usize, neighbor: usize },
    #[error("node {node} lists itself as a neighbor")]
    SelfLoop { node: usize },
    #[error("edge {a}-{b} is not listed exactly once on both sides")]
    Asymmetric { a: usize, b: usize },
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("orientation has length {got}, expected {expected}")]
    OrientationLength { expected: usize, got: usize },
    #[error("not a path in index order: {0}")]
    NotAPath(String),
    #[error("memory init has {got} cells for {expected} nodes")]
    MemoryLength { expected: usize, got: usize },
    #[error("memory cell at node {node} is not admissible for degree {degree}")]
    Inadmissible { node: usize, degree: usize },
    #[error("memory file is for model {got:?}, expected {expected:?}")]
    ModelMismatch { expected: String, got: String },
    #[error("parse error: {0}")]
    Parse(String),
}

/// An unrooted tree whose edges carry local port numbers at both ends.
///
/// `ports[v][i]` is the neighbor reached from `v` through port `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TreeFile", into = "TreeFile")]
pub struct PortLabeledTree {
    ports: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    n: usize,
    ports: Vec<Vec<usize>>,
}

impl TryFrom<TreeFile> for PortLabeledTree {
    type Error = TopologyError;

    fn try_from(file: TreeFile) -> Result<Self, Self::Error> {
        if file.n != file.ports.len() {
            return Err(TopologyError::CountMismatch {
                declared: file.n,
                actual: file.ports.len(),
            });
        }
        PortLabeledTree::new(file.ports)
    }
}

impl From<PortLabeledTree> for TreeFile {
    fn from(tree: PortLabeledTree) -> Self {
        TreeFile {
            n: tree.ports.len(),
            ports: tree.ports,
        }
    }
}

impl PortLabeledTree {
    /// Validates connectivity, acyclicity and port symmetry.
    pub fn new(ports: Vec<Vec<usize>>) -> Result<Self, TopologyError> {
        let n = ports.len();
        if n < 2 {
            return Err(TopologyError::TooSmall(n));
        }
        let mut edges = 0usize;
        for (v, list) in ports.iter().enumerate() {
            for &w in list {
                if w >= n {
                    return Err(TopologyError::NeighborOutOfRange { node: v, neighbor: w });
                }
                if w == v {
                    return Err(TopologyError::SelfLoop { node: v });
                }
                let here = list.iter().filter(|&&x| x == w).count();
                let there = ports[w].iter().filter(|&&x| x == v).count();
                if here != 1 || there != 1 {
                    return Err(TopologyError::Asymmetric { a: v, b: w });
                }
            }
            edges += list.len();
        }
        if edges != 2 * (n - 1) {
            return Err(TopologyError::NotATree(format!(
                "{} edges for {} nodes",
                edges / 2,
                n
            )));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &ports[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(TopologyError::NotATree("disconnected".into()));
        }
        Ok(PortLabeledTree { ports })
    }

    /// Builds a tree from adjacency lists, numbering ports by ascending neighbor index.
    pub fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Result<Self, TopologyError> {
        for list in &mut adj {
            list.sort_unstable();
        }
        Self::new(adj)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(TopologyError::NeighborOutOfRange { node: a.min(b), neighbor: a.max(b) });
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        Self::from_adjacency(adj)
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.ports[v].len()
    }

    pub fn ports(&self, v: usize) -> &[usize] {
        &self.ports[v]
    }

    pub fn port_lists(&self) -> &[Vec<usize>] {
        &self.ports
    }

    /// Neighbor reached from `v` through `port`, if the port exists.
    pub fn neighbor(&self, v: usize, port: Port) -> Option<usize> {
        if port == 0 {
            return None;
        }
        self.ports[v].get(port as usize - 1).copied()
    }

    /// Port at `v` leading to the adjacent node `w`.
    pub fn port_to(&self, v: usize, w: usize) -> Option<Port> {
        self.ports[v].iter().position(|&x| x == w).map(|i| i as Port + 1)
    }

    /// Port number of the edge `(v, port)` as seen from its far end.
    pub fn reverse_port(&self, v: usize, port: Port) -> Option<Port> {
        let w = self.neighbor(v, port)?;
        self.port_to(w, v)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n() - 1);
        for (v, list) in self.ports.iter().enumerate() {
            for &w in list {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// Number of port labelings of the underlying shape: the product of `d_v!`.
    pub fn labeling_count(&self) -> u64 {
        self.ports
            .iter()
            .map(|l| (1..=l.len() as u64).product::<u64>())
            .product()
    }

    pub fn is_path(&self) -> bool {
        self.ports.iter().all(|l| l.len() <= 2)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        serde_json::from_str(text).map_err(|e| {
            TopologyError::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
        })
    }
}

/// A path `0 - 1 - ... - n-1` with its port orientation.
///
/// `orientation[i - 1]` is true iff port 1 of internal node `i` leads left
/// (towards node `i - 1`). Endpoints only have port 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathInstance {
    tree: PortLabeledTree,
    orientation: Vec<bool>,
}

pub fn build_path(n: usize, orientation: &[bool]) -> Result<PathInstance, TopologyError> {
    if n < 2 {
        return Err(TopologyError::TooSmall(n));
    }
    if orientation.len() != n - 2 {
        return Err(TopologyError::OrientationLength {
            expected: n - 2,
            got: orientation.len(),
        });
    }
    let mut ports = Vec::with_capacity(n);
    ports.push(vec![1]);
    for i in 1..n - 1 {
        if orientation[i - 1] {
            ports.push(vec![i - 1, i + 1]);
        } else {
            ports.push(vec![i + 1, i - 1]);
        }
    }
    ports.push(vec![n - 2]);
    Ok(PathInstance {
        tree: PortLabeledTree { ports },
        orientation: orientation.to_vec(),
    })
}

impl PathInstance {
    /// Recovers the orientation from a tree that is a path in index order.
    pub fn from_tree(tree: PortLabeledTree) -> Result<Self, TopologyError> {
        let n = tree.n();
        let mut orientation = Vec::with_capacity(n.saturating_sub(2));
        for v in 0..n {
            let mut sorted = tree.ports(v).to_vec();
            sorted.sort_unstable();
            let expected: Vec<usize> = match v {
                0 => vec![1],
                _ if v == n - 1 => vec![n - 2],
                _ => vec![v - 1, v + 1],
            };
            if sorted != expected {
                return Err(TopologyError::NotAPath(format!("node {v} has neighbors {sorted:?}")));
            }
            if v > 0 && v < n - 1 {
                orientation.push(tree.ports(v)[0] == v - 1);
            }
        }
        Ok(PathInstance { tree, orientation })
    }

    pub fn tree(&self) -> &PortLabeledTree {
        &self.tree
    }

    pub fn into_tree(self) -> PortLabeledTree {
        self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn orientation(&self) -> &[bool] {
        &self.orientation
    }

    /// Port at internal node `v` that leads left.
    pub fn left_port(&self, v: usize) -> Port {
        if self.orientation[v - 1] {
            1
        } else {
            2
        }
    }
}

/// All `prod d_v!` relabelings of `tree`, in a fixed order (node 0 varies slowest).
pub fn enumerate_port_labelings(tree: &PortLabeledTree) -> impl Iterator<Item = PortLabeledTree> {
    let per_node: Vec<Vec<Vec<usize>>> = tree
        .ports
        .iter()
        .map(|list| {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            let k = sorted.len();
            sorted.into_iter().permutations(k).collect()
        })
        .collect();
    per_node
        .into_iter()
        .multi_cartesian_product()
        .map(|ports| PortLabeledTree { ports })
}

/// One representative per isomorphism class of trees on `n` nodes.
///
/// Classes are grown by attaching a leaf to every node of every class on
/// `n - 1` nodes and deduplicating by a center-rooted canonical code. The
/// representative is the preorder labeling of its code, with ports in
/// ascending neighbor order. Output is sorted by code.
pub fn enumerate_trees(n: usize) -> Result<Vec<PortLabeledTree>, TopologyError> {
    if !(2..=8).contains(&n) {
        return Err(TopologyError::EnumerationRange(n));
    }
    let mut classes: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    let edge = vec![vec![1], vec![0]];
    classes.insert(canonical_code(&edge), edge);
    for _ in 3..=n {
        let mut next = BTreeMap::new();
        for adj in classes.values() {
            for v in 0..adj.len() {
                let mut grown = adj.clone();
                let leaf = grown.len();
                grown[v].push(leaf);
                grown.push(vec![v]);
                next.entry(canonical_code(&grown)).or_insert(grown);
            }
        }
        classes = next;
    }
    classes
        .keys()
        .map(|code| PortLabeledTree::from_adjacency(tree_from_code(code)))
        .collect()
}

/// Canonical code of an unlabeled tree: the smaller of its rooted codes at the centers.
pub fn canonical_code(adj: &[Vec<usize>]) -> String {
    centers(adj)
        .into_iter()
        .map(|c| rooted_code(adj, c, usize::MAX))
        .min()
        .expect("a tree has a center")
}

fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| rooted_code(adj, w, v))
        .collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

fn centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer
}

fn tree_from_code(code: &str) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for ch in code.chars() {
        if ch == '(' {
            let id = adj.len();
            adj.push(Vec::new());
            if let Some(&p) = stack.last() {
                adj[p].push(id);
                adj[id].push(p);
            }
            stack.push(id);
        } else {
            stack.pop();
        }
    }
    adj
}

/// The pinned generator behind every seeded choice in this crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random labeled tree with uniform random port labels.
///
/// Draws a Prüfer sequence of `n - 2` values uniformly from `0..n` with
/// ChaCha8 seeded by `seed`, decodes it (each labeled tree corresponds to
/// exactly one sequence), then shuffles the port order at every node in index
/// order. The output is a pure function of `(n, seed)`.
pub fn random_tree(n: usize, seed: u64) -> Result<PortLabeledTree, TopologyError> {
    if n < 2 {
        return Err(TopologyError::TooSmall(n));
    }
    let mut rng = rng_from_seed(seed);
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut adj = prufer_decode(n, &seq);
    for list in &mut adj {
        list.sort_unstable();
        list.shuffle(&mut rng);
    }
    PortLabeledTree::new(adj)
}

/// Decodes a Prüfer sequence into adjacency lists.
pub fn prufer_decode(n: usize, seq: &[usize]) -> Vec<Vec<usize>> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut adj = vec![Vec::new(); n];
    for &x in seq {
        let leaf = *leaves.iter().next().expect("a leaf remains");
        leaves.remove(&leaf);
        adj[leaf].push(x);
        adj[x].push(leaf);
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);
    adj
}

/// A per-node memory value of some model, with its admissible range.
pub trait MemoryCell: Clone + Sized {
    /// Model name used in memory-init files.
    const MODEL: &'static str;

    /// Every admissible value at a node of the given degree, in a fixed order.
    fn admissible(degree: usize) -> Vec<Self>;

    fn is_admissible(&self, degree: usize) -> bool;

    /// A value drawn uniformly from [`MemoryCell::admissible`].
    fn random<R: Rng>(degree: usize, rng: &mut R) -> Self {
        let all = Self::admissible(degree);
        all[rng.gen_range(0..all.len())].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Clean,
    Dirty(u64),
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryInit<C> {
    pub cells: Vec<C>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct MemoryFile<C> {
    model: String,
    cells: Vec<C>,
}

impl<C: MemoryCell> MemoryInit<C> {
    pub fn explicit(tree: &PortLabeledTree, cells: Vec<C>) -> Result<Self, TopologyError> {
        let init = MemoryInit {
            cells,
            provenance: Provenance::Explicit,
        };
        init.check(tree)?;
        Ok(init)
    }

    pub fn uniform(tree: &PortLabeledTree, cell: impl Fn(usize) -> C) -> Self {
        MemoryInit {
            cells: (0..tree.n()).map(|v| cell(tree.degree(v))).collect(),
            provenance: Provenance::Clean,
        }
    }

    pub fn check(&self, tree: &PortLabeledTree) -> Result<(), TopologyError> {
        if self.cells.len() != tree.n() {
            return Err(TopologyError::MemoryLength {
                expected: tree.n(),
                got: self.cells.len(),
            });
        }
        for (v, c) in self.cells.iter().enumerate() {
            if !c.is_admissible(tree.degree(v)) {
                return Err(TopologyError::Inadmissible {
                    node: v,
                    degree: tree.degree(v),
                });
            }
        }
        Ok(())
    }
}

impl<C: MemoryCell + Serialize> MemoryInit<C> {
    pub fn to_json(&self) -> String {
        let file = MemoryFile {
            model: C::MODEL.to_string(),
            cells: self.cells.clone(),
        };
        serde_json::to_string(&file).expect("memory serializes")
    }
}

impl<C: MemoryCell + for<'de> Deserialize<'de>> MemoryInit<C> {
    pub fn from_json(text: &str, tree: &PortLabeledTree) -> Result<Self, TopologyError> {
        let file: MemoryFile<C> = serde_json::from_str(text).map_err(|e| {
            TopologyError::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
        })?;
        if file.model != C::MODEL {
            return Err(TopologyError::ModelMismatch {
                expected: C::MODEL.into(),
                got: file.model,
            });
        }
        Self::explicit(tree, file.cells)
    }
}

/// Uniform admissible memory, drawn node by node with the pinned generator.
pub fn random_memory<C: MemoryCell>(tree: &PortLabeledTree, seed: u64) -> MemoryInit<C> {
    let mut rng = rng_from_seed(seed);
    MemoryInit {
        cells: (0..tree.n()).map(|v| C::random(tree.degree(v), &mut rng)).collect(),
        provenance: Provenance::Dirty(seed),
    }
}

/// Odometer over all admissible memory assignments.
///
/// Nodes listed in `pinned` keep the value they have in `base` (used for the
/// start node, whose cell some models overwrite before reading it).
pub struct MemoryOdometer<C> {
    choices: Vec<Vec<C>>,
    digits: Vec<usize>,
    current: Vec<C>,
    done: bool,
}

impl<C: MemoryCell> MemoryOdometer<C> {
    pub fn new(tree: &PortLabeledTree, base: &[C], pinned: &[usize]) -> Self {
        let choices: Vec<Vec<C>> = (0..tree.n())
            .map(|v| {
                if pinned.contains(&v) {
                    vec![base[v].clone()]
                } else {
                    C::admissible(tree.degree(v))
                }
            })
            .collect();
        let current = choices.iter().map(|c| c[0].clone()).collect();
        MemoryOdometer {
            digits: vec![0; choices.len()],
            choices,
            current,
            done: false,
        }
    }

    pub fn total(&self) -> u64 {
        self.choices.iter().map(|c| c.len() as u64).product()
    }

    /// The current assignment, or `None` once every assignment was produced.
    pub fn current(&self) -> Option<&[C]> {
        (!self.done).then_some(self.current.as_slice())
    }

    pub fn advance(&mut self) {
        for v in (0..self.digits.len()).rev() {
            self.digits[v] += 1;
            if self.digits[v] < self.choices[v].len() {
                self.current[v] = self.choices[v][self.digits[v]].clone();
                return;
            }
            self.digits[v] = 0;
            self.current[v] = self.choices[v][0].clone();
        }
        self.done = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_three() {
        let p = build_path(3, &[true]).unwrap();
        assert_eq!(p.tree().neighbor(1, 1), Some(0));
        assert_eq!(p.tree().neighbor(1, 2), Some(2));
        assert_eq!(p.tree().neighbor(0, 1), Some(1));
    }

    #[test]
    fn path_of_four() {
        let p = build_path(4, &[false, true]).unwrap();
        assert_eq!(p.tree().neighbor(1, 1), Some(2));
        assert_eq!(p.tree().neighbor(2, 1), Some(1));
        assert_eq!(p.left_port(1), 2);
    }

    #[test]
    fn single_edge() {
        let p = build_path(2, &[]).unwrap();
        assert_eq!(p.tree().ports(0), &[1]);
        assert_eq!(p.tree().ports(1), &[0]);
        assert!(build_path(1, &[]).is_err());
    }

    #[test]
    fn reverse_ports() {
        let t = random_tree(12, 3).unwrap();
        for v in 0..t.n() {
            for p in 1..=t.degree(v) as Port {
                let w = t.neighbor(v, p).unwrap();
                let back = t.reverse_port(v, p).unwrap();
                assert_eq!(t.neighbor(w, back), Some(v));
            }
        }
    }

    #[test]
    fn rejects_cycles_and_asymmetry() {
        assert!(PortLabeledTree::new(vec![vec![1, 2], vec![0, 2], vec![0, 1]]).is_err());
        assert!(PortLabeledTree::new(vec![vec![1], vec![]]).is_err());
        assert!(PortLabeledTree::new(vec![vec![1], vec![0], vec![], vec![]]).is_err());
    }

    #[test]
    fn labeling_counts() {
        let star = PortLabeledTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(enumerate_port_labelings(&star).count(), 6);
        let p3 = build_path(3, &[true]).unwrap();
        assert_eq!(enumerate_port_labelings(p3.tree()).count(), 2);
        let p5 = build_path(5, &[true, true, true]).unwrap();
        assert_eq!(enumerate_port_labelings(p5.tree()).count(), 8);
    }

    #[test]
    fn tree_range() {
        assert!(enumerate_trees(1).is_err());
        assert!(enumerate_trees(9).is_err());
        assert_eq!(enumerate_trees(2).unwrap().len(), 1);
    }

    #[test]
    fn odometer_counts() {
        #[derive(Clone, Debug, PartialEq)]
        struct Bit(bool);
        impl MemoryCell for Bit {
            const MODEL: &'static str = "bit";
            fn admissible(_: usize) -> Vec<Self> {
                vec![Bit(false), Bit(true)]
            }
            fn is_admissible(&self, _: usize) -> bool {
                true
            }
        }
        let t = build_path(4, &[true, true]).unwrap();
        let base = vec![Bit(true); 4];
        let mut odo = MemoryOdometer::new(t.tree(), &base, &[2]);
        assert_eq!(odo.total(), 8);
        let mut seen = 0;
        while let Some(cells) = odo.current() {
            assert_eq!(cells[2], Bit(true));
            seen += 1;
            odo.advance();
        }
        assert_eq!(seen, 8);
    }
}
