//! Piecewise-smooth functions on a [`GraphGrid`] with one-sided derivatives
//! at the vertex points.
//!
//! Values are continuous across vertices (a single sample per node), while
//! the derivative carries the Kirchhoff jump: at every vertex the link-side
//! derivative equals twice the semicircle-side derivative.

use std::io::Write;
use std::sync::Arc;

use crate::geometry::VertexKind;
use crate::grid::{GraphGrid, NodeKind};
use crate::json::fmt_f64;
use crate::Result;

#[derive(Debug, Clone)]
pub struct GraphProfile {
    grid: Arc<GraphGrid>,
    u: Vec<f64>,
    du_left: Vec<f64>,
    du_right: Vec<f64>,
}

impl GraphProfile {
    pub fn new(
        grid: Arc<GraphGrid>,
        u: Vec<f64>,
        du_left: Vec<f64>,
        du_right: Vec<f64>,
    ) -> Self {
        assert_eq!(u.len(), grid.n_nodes());
        assert_eq!(du_left.len(), grid.n_nodes());
        assert_eq!(du_right.len(), grid.n_nodes());
        GraphProfile {
            grid,
            u,
            du_left,
            du_right,
        }
    }

    pub fn zero(grid: Arc<GraphGrid>) -> Self {
        let n = grid.n_nodes();
        GraphProfile::new(grid, vec![0.0; n], vec![0.0; n], vec![0.0; n])
    }

    /// Build from node values, deriving one-sided derivatives by
    /// second-order finite differences (centered inside segments, 3-point
    /// one-sided at vertices and window ends).
    pub fn from_values(grid: Arc<GraphGrid>, u: Vec<f64>) -> Self {
        let n = grid.n_nodes();
        assert_eq!(u.len(), n);
        let dx = grid.dx();
        let mut dl = vec![0.0; n];
        let mut dr = vec![0.0; n];
        for i in 0..n {
            let left = |i: usize| (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * dx);
            let right = |i: usize| (-3.0 * u[i] + 4.0 * u[i + 1] - u[i + 2]) / (2.0 * dx);
            match grid.kind(i) {
                NodeKind::Interior(_) => {
                    let d = if i == 0 {
                        right(i)
                    } else if i + 1 == n {
                        left(i)
                    } else {
                        (u[i + 1] - u[i - 1]) / (2.0 * dx)
                    };
                    dl[i] = d;
                    dr[i] = d;
                }
                NodeKind::Vertex(_) => {
                    dl[i] = if i >= 2 { left(i) } else { 0.0 };
                    dr[i] = if i + 2 < n { right(i) } else { 0.0 };
                    if i < 2 {
                        dl[i] = dr[i];
                    }
                    if i + 2 >= n {
                        dr[i] = dl[i];
                    }
                }
            }
        }
        GraphProfile::new(grid, u, dl, dr)
    }

    pub fn grid(&self) -> &Arc<GraphGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn du_left(&self) -> &[f64] {
        &self.du_left
    }

    pub fn du_right(&self) -> &[f64] {
        &self.du_right
    }

    pub fn du_right_mut(&mut self) -> &mut [f64] {
        &mut self.du_right
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Maximum Kirchhoff defect over interior vertices: at each vertex the
    /// link-side derivative must equal twice the semicircle-side one.
    /// Values are continuous by construction (one sample per node), so the
    /// continuity term is identically zero here.
    pub fn kirchhoff_residual(&self) -> f64 {
        let n = self.grid.n_nodes();
        let mut worst = 0.0f64;
        for i in 1..n.saturating_sub(1) {
            if let NodeKind::Vertex(kind) = self.grid.kind(i) {
                let defect = match kind {
                    // link on the left: u'_link = 2 u'_semi
                    VertexKind::LinkToSemi => self.du_left[i] - 2.0 * self.du_right[i],
                    // link on the right
                    VertexKind::SemiToLink => self.du_right[i] - 2.0 * self.du_left[i],
                };
                worst = worst.max(defect.abs());
            }
        }
        worst
    }

    /// CSV with header `x,u,uprime,cell,segment`; vertex rows are written
    /// twice, left-side then right-side derivative.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,u,uprime,cell,segment")?;
        let n = self.grid.n_nodes();
        for i in 0..n {
            let x = fmt_f64(self.grid.x(i));
            let u = fmt_f64(self.u[i]);
            let sides = self.grid.sides(i);
            let interior_vertex =
                matches!(self.grid.kind(i), NodeKind::Vertex(_)) && i > 0 && i + 1 < n;
            if interior_vertex {
                writeln!(
                    w,
                    "{x},{u},{},{},{}",
                    fmt_f64(self.du_left[i]),
                    sides.cell_left,
                    sides.seg_left.label()
                )?;
                writeln!(
                    w,
                    "{x},{u},{},{},{}",
                    fmt_f64(self.du_right[i]),
                    sides.cell_right,
                    sides.seg_right.label()
                )?;
            } else {
                // Window-end nodes report their inward side.
                let (du, cell, seg) = if i == 0 {
                    (self.du_right[i], sides.cell_right, sides.seg_right)
                } else {
                    (self.du_left[i], sides.cell_left, sides.seg_left)
                };
                writeln!(w, "{x},{u},{},{},{}", fmt_f64(du), cell, seg.label())?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
