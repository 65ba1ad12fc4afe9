//! Unit-cell layout of the necklace graph in the symmetric subspace.
//!
//! Cell `n` covers `[nP, (n+1)P)` and consists of a link `[nP, nP+L]`
//! followed by a (doubled) semicircle `[nP+L, (n+1)P]`, with `L = l·π` and
//! `P = L + π`. Crossing a vertex in the increasing-x direction multiplies
//! the one-sided derivative: by 1/2 entering a semicircle, by 2 leaving one.
//! Function values are continuous at every vertex.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Which segment of a cell a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Link,
    Semicircle,
}

impl Segment {
    pub fn label(self) -> &'static str {
        match self {
            Segment::Link => "link",
            Segment::Semicircle => "semicircle",
        }
    }
}

/// Vertex type, named by the segments on its left/right side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// `x = nP + L`: link on the left, semicircle on the right.
    LinkToSemi,
    /// `x = nP`: semicircle on the left, link on the right.
    SemiToLink,
}

impl VertexKind {
    /// Multiplier applied to `u'` when crossing in the increasing-x direction.
    pub fn jump(self) -> VertexJump {
        match self {
            VertexKind::LinkToSemi => VertexJump { factor: 0.5 },
            VertexKind::SemiToLink => VertexJump { factor: 2.0 },
        }
    }
}

/// Derivative multiplier at a vertex crossing; values are continuous (factor 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexJump {
    pub factor: f64,
}

/// Necklace-graph geometry with link length `L = l·π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    l: u32,
    link_len: f64,
    period: f64,
}

/// Result of locating a global coordinate within the cell layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub cell: i64,
    pub segment: Segment,
    /// Coordinate within the segment, in `[0, segment length]`.
    pub local: f64,
}

impl Geometry {
    /// Integer link multiplier `l >= 1`. Odd `l` is required for validated
    /// breather configurations; any `l >= 1` is accepted for spectrum scans.
    pub fn new(l: u32) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidGeometry("l must be >= 1".into()));
        }
        let link_len = l as f64 * PI;
        Ok(Geometry {
            l,
            link_len,
            period: link_len + PI,
        })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Link length `L = l·π`.
    pub fn link_len(&self) -> f64 {
        self.link_len
    }

    /// Semicircle length, always `π`.
    pub fn semi_len(&self) -> f64 {
        PI
    }

    /// Period `P = L + π`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// True when the link multiplier is odd (breather-admissible lengths).
    pub fn has_odd_link(&self) -> bool {
        self.l % 2 == 1
    }

    pub fn segment_len(&self, segment: Segment) -> f64 {
        match segment {
            Segment::Link => self.link_len,
            Segment::Semicircle => PI,
        }
    }

    /// Inverse of the affine coordinate map: locate `x` in the cell layout.
    pub fn locate(&self, x: f64) -> Location {
        let cell = (x / self.period).floor();
        let mut cell = cell as i64;
        let mut local = x - cell as f64 * self.period;
        // Guard against floor rounding at cell boundaries.
        if local < 0.0 {
            cell -= 1;
            local = x - cell as f64 * self.period;
        } else if local >= self.period {
            cell += 1;
            local = x - cell as f64 * self.period;
        }
        if local < self.link_len {
            Location {
                cell,
                segment: Segment::Link,
                local,
            }
        } else {
            Location {
                cell,
                segment: Segment::Semicircle,
                local: local - self.link_len,
            }
        }
    }

    /// Affine coordinate map sending a cell-local position back to the line.
    pub fn global(&self, cell: i64, segment: Segment, local: f64) -> f64 {
        let base = cell as f64 * self.period;
        match segment {
            Segment::Link => base + local,
            Segment::Semicircle => base + self.link_len + local,
        }
    }
}
