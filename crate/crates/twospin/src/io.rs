//! Graph and tree documents.
//!
//! Graph: `{"beta", "gamma", "vertices": [{"id", "lambda"}], "edges": [[u, v]], "pins": [{"id", "spin"}]}`
//! with `pins` optional. Tree: nested `{"lambda", "pin"?, "children"?}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twospin_core::tree::RootedTree;
use twospin_core::{Spin, SpinParams, SpinSystem, VertexId};

use crate::cli::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: VertexId,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinDoc {
    pub id: VertexId,
    pub spin: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub beta: f64,
    pub gamma: f64,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<PinDoc>,
}

impl GraphDoc {
    pub fn to_system(&self) -> twospin_core::Result<SpinSystem> {
        let params = SpinParams::new(self.beta, self.gamma)?;
        let mut pins = BTreeMap::new();
        for p in &self.pins {
            if pins.insert(p.id, Spin::from_u8(p.spin)?).is_some() {
                return Err(twospin_core::Error::InvalidInstance(format!("vertex {} pinned twice", p.id)));
            }
        }
        SpinSystem::new(
            params,
            self.vertices.iter().map(|v| twospin_core::spin::Vertex { id: v.id, lambda: v.lambda }).collect(),
            self.edges.iter().map(|e| (e[0], e[1])).collect(),
            pins,
        )
    }

    pub fn from_system(sys: &SpinSystem) -> Self {
        let p = sys.params();
        GraphDoc {
            beta: p.beta(),
            gamma: p.gamma(),
            vertices: sys.vertices().iter().map(|v| VertexDoc { id: v.id, lambda: v.lambda }).collect(),
            edges: sys.edges().iter().map(|&(a, b)| [a, b]).collect(),
            pins: sys.pins().iter().map(|(&id, s)| PinDoc { id, spin: s.as_u8() }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeDoc>,
}

impl TreeDoc {
    /// Arena form; vertex ids are assigned in breadth-first order.
    pub fn to_tree(&self) -> twospin_core::Result<RootedTree> {
        let pin = |d: &TreeDoc| d.pin.map(Spin::from_u8).transpose();
        let mut tree = RootedTree::new(0, self.lambda, pin(self)?);
        let mut queue = std::collections::VecDeque::from([(self, 0usize)]);
        while let Some((doc, idx)) = queue.pop_front() {
            for c in &doc.children {
                let id = tree.len() as VertexId;
                let ci = tree.push_child(idx, id, c.lambda, pin(c)?);
                queue.push_back((c, ci));
            }
        }
        Ok(tree)
    }

    pub fn from_tree(tree: &RootedTree) -> Self {
        fn build(tree: &RootedTree, i: usize) -> TreeDoc {
            let n = tree.node(i);
            TreeDoc {
                lambda: n.lambda,
                pin: n.pin.map(Spin::as_u8),
                children: n.children.iter().map(|&c| build(tree, c)).collect(),
            }
        }
        build(tree, 0)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn load_graph(path: &Path) -> Result<SpinSystem, CliError> {
    let doc: GraphDoc = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: not a graph document: {e}", path.display())))?;
    Ok(doc.to_system()?)
}

pub fn load_tree(path: &Path) -> Result<RootedTree, CliError> {
    let doc: TreeDoc = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: not a tree document: {e}", path.display())))?;
    Ok(doc.to_tree()?)
}
