//! Root clusters of bond percolation on a perfect binary tree.
//!
//! Clusters are grown lazily, generation by generation, from the root: a node
//! at generation `g < depth_bound` asks its [`EdgeSource`] whether the left and
//! then the right edge below it is open. Nodes are visited breadth-first, so
//! the order in which a source is consulted is fixed and reproducible. Nodes
//! at `depth_bound` never spawn children and are never counted as leaves.
//!
//! Random clusters draw from a ChaCha8 stream selected by
//! `(master seed, sample index)` (see [`sample_stream`]); the tag
//! [`RNG_VERSION`] identifies that scheme in every output.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::ModelParams;
use crate::error::{Error, Result};

/// Identifies the random stream construction used by [`sample_cluster`].
pub const RNG_VERSION: &str = "chacha8-seed_from_u64-set_stream(index)/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left = 0,
    Right = 1,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn bit(self) -> bool {
        self == Side::Right
    }
}

/// An edge of the underlying perfect tree, named by the parent's position.
///
/// `position` is the parent's index within its generation of the perfect
/// tree (`0..2^generation`); it is unique only below generation 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSite {
    pub generation: u32,
    pub position: u64,
    pub side: Side,
}

impl EdgeSite {
    pub fn child_position(&self) -> u64 {
        self.position.wrapping_mul(2).wrapping_add(self.side as u64)
    }
}

/// Decides the state of each edge as the cluster grows.
pub trait EdgeSource {
    fn is_open(&mut self, site: EdgeSite) -> bool;
}

impl<F: FnMut(EdgeSite) -> bool> EdgeSource for F {
    fn is_open(&mut self, site: EdgeSite) -> bool {
        self(site)
    }
}

/// Independent Bernoulli(p) edges: open iff a uniform draw in `[0, 1)` is `< p`.
#[derive(Debug, Clone)]
pub struct BernoulliEdges<R> {
    rng: R,
    p: f64,
}

impl<R: Rng> BernoulliEdges<R> {
    pub fn new(rng: R, p: f64) -> Self {
        Self { rng, p }
    }
}

impl<R: Rng> EdgeSource for BernoulliEdges<R> {
    fn is_open(&mut self, _site: EdgeSite) -> bool {
        self.rng.random::<f64>() < self.p
    }
}

/// The random stream owned by sample `index` under `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub generation: u32,
    /// Index of this node in its generation of the perfect tree.
    pub position: u64,
    pub children: [Option<u32>; 2],
}

impl Node {
    pub fn child(&self, side: Side) -> Option<u32> {
        self.children[side as usize]
    }

    pub fn is_childless(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }
}

/// A root cluster truncated at `depth_bound`. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    depth_bound: u32,
    nodes: Vec<Node>,
}

impl Cluster {
    /// Grows the cluster breadth-first, consulting `source` left edge first.
    pub fn grow<S: EdgeSource + ?Sized>(depth_bound: u32, source: &mut S) -> Self {
        let mut nodes = vec![Node {
            generation: 0,
            position: 0,
            children: [None, None],
        }];
        let mut next = 0;
        while next < nodes.len() {
            let parent = nodes[next];
            if parent.generation < depth_bound {
                for side in Side::BOTH {
                    let site = EdgeSite {
                        generation: parent.generation,
                        position: parent.position,
                        side,
                    };
                    if source.is_open(site) {
                        let id = nodes.len() as u32;
                        nodes.push(Node {
                            generation: parent.generation + 1,
                            position: site.child_position(),
                            children: [None, None],
                        });
                        nodes[next].children[side as usize] = Some(id);
                    }
                }
            }
            next += 1;
        }
        Self { depth_bound, nodes }
    }

    /// The prefix closure of `codewords` (`false` = left, `true` = right).
    ///
    /// Every codeword names a node; every prefix of one is an interior node.
    pub fn from_paths<I, P>(depth_bound: u32, paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[bool]>,
    {
        let mut cluster = Self {
            depth_bound,
            nodes: vec![Node {
                generation: 0,
                position: 0,
                children: [None, None],
            }],
        };
        for path in paths {
            let path = path.as_ref();
            if path.len() > depth_bound as usize {
                return Err(Error::InvalidCluster(format!(
                    "path of length {} exceeds depth bound {depth_bound}",
                    path.len()
                )));
            }
            let mut at = 0usize;
            for &bit in path {
                let side = if bit { Side::Right } else { Side::Left };
                at = match cluster.nodes[at].child(side) {
                    Some(c) => c as usize,
                    None => cluster.attach(at, side),
                };
            }
        }
        Ok(cluster)
    }

    /// Appends a child below `parent` and returns its index.
    pub(crate) fn attach(&mut self, parent: usize, side: Side) -> usize {
        let p = self.nodes[parent];
        let id = self.nodes.len();
        self.nodes.push(Node {
            generation: p.generation + 1,
            position: p.position.wrapping_mul(2).wrapping_add(side as u64),
            children: [None, None],
        });
        self.nodes[parent].children[side as usize] = Some(id as u32);
        id
    }

    /// The cluster with every edge closed.
    pub fn root_only(depth_bound: u32) -> Self {
        Self::grow(depth_bound, &mut |_: EdgeSite| false)
    }

    pub fn depth_bound(&self) -> u32 {
        self.depth_bound
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether `node` counts as a leaf: childless and above the depth bound.
    pub fn is_leaf(&self, node: &Node) -> bool {
        node.generation < self.depth_bound && node.is_childless()
    }

    /// Checks the structural invariants: generation 0 root without a parent,
    /// children one generation below their parent, nothing past the bound,
    /// and every non-root node reachable exactly once.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCluster(m));
        if self.root().generation != 0 {
            return bad("root is not at generation 0".into());
        }
        let mut parents = vec![0u32; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.generation > self.depth_bound {
                return bad(format!("node {i} lies beyond the depth bound"));
            }
            for c in node.children.iter().flatten() {
                let Some(child) = self.nodes.get(*c as usize) else {
                    return bad(format!("node {i} points at missing node {c}"));
                };
                if child.generation != node.generation + 1 {
                    return bad(format!("node {c} is not one generation below node {i}"));
                }
                parents[*c as usize] += 1;
            }
        }
        if parents[0] != 0 {
            return bad("root has a parent".into());
        }
        if let Some(i) = parents.iter().skip(1).position(|&n| n != 1) {
            return bad(format!("node {} has {} parents", i + 1, parents[i + 1]));
        }
        Ok(())
    }
}

/// Draws the root cluster for sample `index` under `seed`.
///
/// Edges are independent Bernoulli(p) draws, one per edge, consumed
/// breadth-first and left before right, so the result depends only on
/// `(seed, index, p, depth_bound)`.
pub fn sample_cluster(params: ModelParams, depth_bound: u32, seed: u64, index: u64) -> Cluster {
    let mut edges = BernoulliEdges::new(sample_stream(seed, index), params.p());
    Cluster::grow(depth_bound, &mut edges)
}

/// Per-generation node counts `N_0..=N_D` and leaf counts `L_0..L_{D-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationTally {
    depth_bound: u32,
    node_counts: Vec<u64>,
    leaf_counts: Vec<u64>,
}

impl GenerationTally {
    /// Builds a tally from raw counts, checking that some cluster could
    /// produce them.
    pub fn from_counts(
        depth_bound: u32,
        node_counts: Vec<u64>,
        leaf_counts: Vec<u64>,
    ) -> Result<Self> {
        let t = Self {
            depth_bound,
            node_counts,
            leaf_counts,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn depth_bound(&self) -> u32 {
        self.depth_bound
    }

    pub fn node_counts(&self) -> &[u64] {
        &self.node_counts
    }

    pub fn leaf_counts(&self) -> &[u64] {
        &self.leaf_counts
    }

    /// Nodes at the depth bound.
    pub fn final_nodes(&self) -> u64 {
        self.node_counts[self.depth_bound as usize]
    }

    pub fn leaf_total(&self) -> u64 {
        self.leaf_counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.depth_bound as usize;
        let bad = |m: String| Err(Error::InvalidTally(m));
        if self.node_counts.len() != d + 1 || self.leaf_counts.len() != d {
            return bad(format!(
                "expected {} node counts and {d} leaf counts, got {} and {}",
                d + 1,
                self.node_counts.len(),
                self.leaf_counts.len()
            ));
        }
        if self.node_counts[0] != 1 {
            return bad("N_0 must be 1".into());
        }
        for n in 0..d {
            let (nodes, leaves, next) = (
                self.node_counts[n],
                self.leaf_counts[n],
                self.node_counts[n + 1],
            );
            if leaves > nodes {
                return bad(format!("L_{n} = {leaves} exceeds N_{n} = {nodes}"));
            }
            // every non-leaf has one or two children
            let parents = nodes - leaves;
            if next < parents || next > 2 * parents {
                return bad(format!(
                    "N_{} = {next} is incompatible with the {parents} non-leaf nodes of generation {n}",
                    n + 1
                ));
            }
        }
        Ok(())
    }
}

/// Counts nodes and leaves per generation.
pub fn tally(cluster: &Cluster) -> GenerationTally {
    let d = cluster.depth_bound() as usize;
    let mut node_counts = vec![0u64; d + 1];
    let mut leaf_counts = vec![0u64; d];
    for node in cluster.nodes() {
        let g = node.generation as usize;
        node_counts[g] += 1;
        if cluster.is_leaf(node) {
            leaf_counts[g] += 1;
        }
    }
    GenerationTally {
        depth_bound: cluster.depth_bound(),
        node_counts,
        leaf_counts,
    }
}

/// True iff the cluster still has nodes at the depth bound.
pub fn survived(tally: &GenerationTally) -> bool {
    tally.final_nodes() > 0
}
