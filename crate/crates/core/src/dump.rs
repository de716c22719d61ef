//! Cluster dump formats.
//!
//! JSON: `{"depth_bound": D, "root": NODE}` where `NODE` is
//! `{"gen": g, "left": NODE?, "right": NODE?}` and absent children are
//! omitted. DOT: a `digraph` with one vertex per node labelled by its root
//! path and edges labelled `0` (left) or `1` (right).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percolate::{Cluster, Side};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDoc {
    pub depth_bound: u32,
    pub root: NodeDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub gen: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Box<NodeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Box<NodeDoc>>,
}

impl ClusterDoc {
    pub fn from_cluster(cluster: &Cluster) -> Self {
        fn build(cluster: &Cluster, id: u32) -> NodeDoc {
            let node = cluster.node(id);
            let child = |side| node.child(side).map(|c| Box::new(build(cluster, c)));
            NodeDoc {
                gen: node.generation,
                left: child(Side::Left),
                right: child(Side::Right),
            }
        }
        Self {
            depth_bound: cluster.depth_bound(),
            root: build(cluster, 0),
        }
    }

    /// Rebuilds the cluster, rejecting inconsistent generations.
    pub fn to_cluster(&self) -> Result<Cluster> {
        if self.root.gen != 0 {
            return Err(Error::InvalidCluster("root must have gen 0".into()));
        }
        let mut cluster = Cluster::root_only(self.depth_bound);
        let mut stack = vec![(&self.root, 0usize)];
        while let Some((doc, id)) = stack.pop() {
            for (side, child) in [(Side::Left, &doc.left), (Side::Right, &doc.right)] {
                let Some(child) = child else { continue };
                if child.gen != doc.gen + 1 {
                    return Err(Error::InvalidCluster(format!(
                        "child at gen {} below a node at gen {}",
                        child.gen, doc.gen
                    )));
                }
                if child.gen > self.depth_bound {
                    return Err(Error::InvalidCluster(format!(
                        "node at gen {} exceeds depth bound {}",
                        child.gen, self.depth_bound
                    )));
                }
                let cid = cluster.attach(id, side);
                stack.push((child, cid));
            }
        }
        Ok(cluster)
    }
}

pub fn to_json(cluster: &Cluster) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ClusterDoc::from_cluster(
        cluster,
    ))?)
}

pub fn from_json(text: &str) -> Result<Cluster> {
    let doc: ClusterDoc = serde_json::from_str(text)?;
    doc.to_cluster()
}

pub fn to_dot(cluster: &Cluster) -> String {
    let mut out = String::from("digraph cluster {\n  node [shape=circle, label=\"\"];\n");
    let mut stack = vec![(0u32, String::new())];
    while let Some((id, path)) = stack.pop() {
        let node = cluster.node(id);
        let shape = if cluster.is_leaf(node) {
            ", shape=doublecircle"
        } else {
            ""
        };
        let label = if path.is_empty() { "root" } else { &path };
        let _ = writeln!(out, "  n{id} [label=\"{label}\"{shape}];");
        for side in Side::BOTH {
            if let Some(c) = node.child(side) {
                let bit = side as u8;
                let _ = writeln!(out, "  n{id} -> n{c} [label=\"{bit}\"];");
                stack.push((c, format!("{path}{bit}")));
            }
        }
    }
    out.push_str("}\n");
    out
}
