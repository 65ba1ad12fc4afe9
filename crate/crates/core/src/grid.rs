//! Discretized windows of the necklace graph.
//!
//! A grid covers a run of consecutive segments, every segment boundary
//! (vertex) falling exactly on a node. `dx = π / nodes_per_semi` divides
//! both segment lengths because `L = l·π`. Grids are immutable after
//! construction and shared read-only (`Arc`) by profiles, the BVP solver
//! and the simulator.

use std::sync::Arc;

use crate::geometry::{Geometry, Segment, VertexKind};
use crate::{Error, Result};

/// Role of a node in the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior(Segment),
    Vertex(VertexKind),
}

/// Per-node metadata: the cell/segment on each side (equal except at
/// cell-boundary vertices).
#[derive(Debug, Clone, Copy)]
pub struct NodeSides {
    pub cell_left: i64,
    pub seg_left: Segment,
    pub cell_right: i64,
    pub seg_right: Segment,
}

#[derive(Debug, Clone)]
pub struct GraphGrid {
    geometry: Geometry,
    dx: f64,
    nodes_per_semi: usize,
    start: f64,
    segments: Vec<Segment>,
    node_x: Vec<f64>,
    kinds: Vec<NodeKind>,
    sides: Vec<NodeSides>,
    center_index: usize,
}

impl GraphGrid {
    fn build(
        geometry: Geometry,
        start: f64,
        segments: Vec<Segment>,
        nodes_per_semi: usize,
        center_index: usize,
    ) -> Result<Arc<Self>> {
        if nodes_per_semi < 2 || nodes_per_semi % 2 != 0 {
            return Err(Error::InvalidConfiguration(
                "nodes_per_semi must be even and >= 2".into(),
            ));
        }
        let dx = geometry.semi_len() / nodes_per_semi as f64;
        let mut node_x = Vec::new();
        let mut kinds = Vec::new();
        let mut x = start;
        for (si, seg) in segments.iter().enumerate() {
            let intervals = match seg {
                Segment::Link => geometry.l() as usize * nodes_per_semi,
                Segment::Semicircle => nodes_per_semi,
            };
            let seg_len = geometry.segment_len(*seg);
            // Segment-start node.
            if si == 0 {
                node_x.push(x);
                kinds.push(NodeKind::Vertex(match seg {
                    Segment::Link => VertexKind::SemiToLink,
                    Segment::Semicircle => VertexKind::LinkToSemi,
                }));
            }
            for i in 1..=intervals {
                node_x.push(x + seg_len * i as f64 / intervals as f64);
                kinds.push(if i == intervals {
                    NodeKind::Vertex(match seg {
                        Segment::Link => VertexKind::LinkToSemi,
                        Segment::Semicircle => VertexKind::SemiToLink,
                    })
                } else {
                    NodeKind::Interior(*seg)
                });
            }
            x += seg_len;
        }
        let sides = node_x
            .iter()
            .zip(kinds.iter())
            .map(|(&x, kind)| Self::sides_of(&geometry, x, *kind))
            .collect();
        Ok(Arc::new(GraphGrid {
            geometry,
            dx,
            nodes_per_semi,
            start,
            segments,
            node_x,
            kinds,
            sides,
            center_index,
        }))
    }

    fn sides_of(geometry: &Geometry, x: f64, kind: NodeKind) -> NodeSides {
        match kind {
            NodeKind::Interior(seg) => {
                let loc = geometry.locate(x);
                NodeSides {
                    cell_left: loc.cell,
                    seg_left: seg,
                    cell_right: loc.cell,
                    seg_right: seg,
                }
            }
            NodeKind::Vertex(VertexKind::LinkToSemi) => {
                // x = nP + L, inside cell n on both sides.
                let cell = ((x - geometry.link_len()) / geometry.period()).round() as i64;
                NodeSides {
                    cell_left: cell,
                    seg_left: Segment::Link,
                    cell_right: cell,
                    seg_right: Segment::Semicircle,
                }
            }
            NodeKind::Vertex(VertexKind::SemiToLink) => {
                // x = nP: cell n-1 semicircle on the left, cell n link on the right.
                let cell = (x / geometry.period()).round() as i64;
                NodeSides {
                    cell_left: cell - 1,
                    seg_left: Segment::Semicircle,
                    cell_right: cell,
                    seg_right: Segment::Link,
                }
            }
        }
    }

    /// Window symmetric about a link midpoint `L/2`, spanning `n_cells`
    /// whole cells on each side of the central link.
    pub fn link_centered(
        geometry: Geometry,
        n_cells: usize,
        nodes_per_semi: usize,
    ) -> Result<Arc<Self>> {
        let mut segments = Vec::with_capacity(4 * n_cells + 1);
        for _ in 0..2 * n_cells {
            segments.push(Segment::Link);
            segments.push(Segment::Semicircle);
        }
        segments.push(Segment::Link);
        let start = -(n_cells as f64) * geometry.period();
        let per_cell = (geometry.l() as usize + 1) * nodes_per_semi;
        let center = n_cells * per_cell + geometry.l() as usize * nodes_per_semi / 2;
        Self::build(geometry, start, segments, nodes_per_semi, center)
    }

    /// Window symmetric about a semicircle midpoint `L + π/2`.
    pub fn circle_centered(
        geometry: Geometry,
        n_cells: usize,
        nodes_per_semi: usize,
    ) -> Result<Arc<Self>> {
        let mut segments = Vec::with_capacity(4 * n_cells + 1);
        segments.push(Segment::Semicircle);
        for _ in 0..2 * n_cells {
            segments.push(Segment::Link);
            segments.push(Segment::Semicircle);
        }
        let start = geometry.link_len() - n_cells as f64 * geometry.period();
        let per_cell = (geometry.l() as usize + 1) * nodes_per_semi;
        let center = n_cells * per_cell + nodes_per_semi / 2;
        Self::build(geometry, start, segments, nodes_per_semi, center)
    }

    /// Whole cells `n0 ..= n1`; both window ends are `nP` vertices.
    pub fn cell_range(
        geometry: Geometry,
        n0: i64,
        n1: i64,
        nodes_per_semi: usize,
    ) -> Result<Arc<Self>> {
        if n1 < n0 {
            return Err(Error::InvalidConfiguration("empty cell range".into()));
        }
        let mut segments = Vec::new();
        for _ in n0..=n1 {
            segments.push(Segment::Link);
            segments.push(Segment::Semicircle);
        }
        let start = n0 as f64 * geometry.period();
        let n = ((n1 - n0 + 1) as usize * (geometry.l() as usize + 1) * nodes_per_semi) / 2;
        Self::build(geometry, start, segments, nodes_per_semi, n)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes_per_semi(&self) -> usize {
        self.nodes_per_semi
    }

    pub fn n_nodes(&self) -> usize {
        self.node_x.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.node_x[i]
    }

    pub fn xs(&self) -> &[f64] {
        &self.node_x
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.kinds[i]
    }

    pub fn sides(&self, i: usize) -> NodeSides {
        self.sides[i]
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        *self.node_x.last().unwrap()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Node index of the window's symmetry point (for centered windows).
    pub fn center_index(&self) -> usize {
        self.center_index
    }

    /// Segment containing the interval between nodes `i` and `i + 1`.
    pub fn interval_segment(&self, i: usize) -> Segment {
        self.sides[i].seg_right
    }

    /// Lumped mass of node `i` under the graph measure (links weight 1,
    /// doubled semicircles weight 2); boundary nodes carry half masses.
    pub fn mass(&self, i: usize) -> f64 {
        let w_left = if i == 0 {
            0.0
        } else {
            match self.sides[i].seg_left {
                Segment::Link => 1.0,
                Segment::Semicircle => 2.0,
            }
        };
        let w_right = if i + 1 == self.n_nodes() {
            0.0
        } else {
            match self.sides[i].seg_right {
                Segment::Link => 1.0,
                Segment::Semicircle => 2.0,
            }
        };
        0.5 * self.dx * (w_left + w_right)
    }

    /// Number of nodes in one full cell.
    pub fn nodes_per_cell(&self) -> usize {
        (self.geometry.l() as usize + 1) * self.nodes_per_semi
    }
}
