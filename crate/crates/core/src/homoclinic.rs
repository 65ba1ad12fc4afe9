//! The two symmetric bound states of `u'' = ε²u - u³` on the necklace
//! graph, constructed by shooting.
//!
//! Starting at a symmetry point `x₀ ∈ {L/2, L + π/2}` with `(u, u') =
//! (a, 0)`, the semi-orbit is integrated rightward through the vertex
//! jumps; the left half follows by reflection (the system is reversible
//! about both symmetry points). At `λ = -ε²` the period map is a positive
//! saddle, so off the stable manifold the semi-orbit either crosses zero
//! (amplitude too large) or turns back upward (too small); bisection on
//! `a` separates the two and converges onto the decaying orbit.

use std::sync::Arc;

use crate::floquet::trace_formula;
use crate::geometry::{Geometry, Segment, VertexKind};
use crate::grid::{GraphGrid, NodeKind};
use crate::profile::GraphProfile;
use crate::{Error, Result};

/// Which symmetry point the bound state is even about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Even about the link midpoint `L/2`.
    LinkCentered,
    /// Even about the semicircle midpoint `L + π/2`.
    CircleCentered,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::LinkCentered => "link",
            Family::CircleCentered => "circle",
        }
    }

    pub fn center(self, geometry: &Geometry) -> f64 {
        match self {
            Family::LinkCentered => geometry.link_len() / 2.0,
            Family::CircleCentered => geometry.link_len() + geometry.semi_len() / 2.0,
        }
    }

    pub fn grid(
        self,
        geometry: Geometry,
        n_cells: usize,
        nodes_per_semi: usize,
    ) -> Result<Arc<GraphGrid>> {
        match self {
            Family::LinkCentered => GraphGrid::link_centered(geometry, n_cells, nodes_per_semi),
            Family::CircleCentered => {
                GraphGrid::circle_centered(geometry, n_cells, nodes_per_semi)
            }
        }
    }
}

/// How a rightward semi-orbit terminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShootEvent {
    /// Reached the far end of the classification range still decaying.
    Converged,
    /// `u` crossed zero at `x` (amplitude too large).
    ZeroCross { x: f64 },
    /// `u'` turned positive at `x` while `u > 0` (amplitude too small).
    TurnedUp { x: f64 },
    /// `|u|` exceeded the guard `10·a`; `sign` is the sign of `u`.
    Escaped { x: f64, sign: f64 },
}

impl ShootEvent {
    fn too_large(self) -> Option<bool> {
        match self {
            ShootEvent::Converged => None,
            ShootEvent::ZeroCross { .. } => Some(true),
            ShootEvent::TurnedUp { .. } => Some(false),
            ShootEvent::Escaped { sign, .. } => Some(sign < 0.0),
        }
    }
}

/// Options for the shooting integrator.
#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Apply the Kirchhoff derivative jumps (disable to recover the line).
    pub jumps: bool,
    /// Extra cells integrated past the window purely to classify the
    /// semi-orbit; nothing there is recorded.
    pub extension_cells: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            jumps: true,
            extension_cells: 400,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    u: f64,
    p: f64,
}

#[inline]
fn accel(eps: f64, u: f64) -> f64 {
    eps * eps * u - u * u * u
}

/// One RK4 step of `u'' = ε²u - u³`.
#[inline]
fn rk4(eps: f64, s: State, h: f64) -> State {
    let f = |st: State| (st.p, accel(eps, st.u));
    let (k1u, k1p) = f(s);
    let (k2u, k2p) = f(State {
        u: s.u + 0.5 * h * k1u,
        p: s.p + 0.5 * h * k1p,
    });
    let (k3u, k3p) = f(State {
        u: s.u + 0.5 * h * k2u,
        p: s.p + 0.5 * h * k2p,
    });
    let (k4u, k4p) = f(State {
        u: s.u + h * k3u,
        p: s.p + h * k3p,
    });
    State {
        u: s.u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        p: s.p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    }
}

/// Rightward semi-orbit from the grid's center node. Records `(u, u'_left,
/// u'_right)` at every node from the center to the window edge; continues
/// integrating through `extension_cells` more cells for classification.
struct RightShot {
    u: Vec<f64>,
    du_left: Vec<f64>,
    du_right: Vec<f64>,
    event: ShootEvent,
}

fn shoot_right(
    grid: &GraphGrid,
    eps: f64,
    amplitude: f64,
    opts: &ShootOptions,
) -> RightShot {
    let n = grid.n_nodes();
    let c = grid.center_index();
    let dx = grid.dx();
    let guard = 10.0 * amplitude.abs().max(f64::MIN_POSITIVE);
    let mut u = vec![0.0; n - c];
    let mut dl = vec![0.0; n - c];
    let mut dr = vec![0.0; n - c];
    let mut s = State {
        u: amplitude,
        p: 0.0,
    };
    u[0] = s.u;
    let mut event = ShootEvent::Converged;

    // Node walk across the recorded window, then a virtual continuation
    // for classification only.
    let record = n - c - 1;
    let per_cell = grid.nodes_per_cell();
    let total = record + opts.extension_cells * per_cell;
    let geometry = *grid.geometry();
    for step in 1..=total {
        let prev = s;
        s = rk4(eps, s, dx);
        let i = step; // offset from center
        let x = grid.x(c) + step as f64 * dx;
        let kind = if c + step < n {
            grid.kind(c + step)
        } else {
            // Past the window: reconstruct the node kind from the geometry.
            node_kind_at(&geometry, x, dx)
        };
        let incoming = s.p;
        if let NodeKind::Vertex(kind) = kind {
            if opts.jumps {
                s.p *= kind.jump().factor;
            }
        }
        if i <= record {
            u[i] = s.u;
            dl[i] = incoming;
            dr[i] = s.p;
        }
        // Event checks (after the step so the initial p = 0 is not a turn).
        if s.u <= 0.0 {
            event = ShootEvent::ZeroCross { x };
            break;
        }
        if s.u.abs() > guard {
            event = ShootEvent::Escaped { x, sign: s.u.signum() };
            break;
        }
        if s.p > 0.0 && prev.p <= 0.0 && step > 1 {
            event = ShootEvent::TurnedUp { x };
            break;
        }
    }
    RightShot {
        u,
        du_left: dl,
        du_right: dr,
        event,
    }
}

/// Node kind at coordinate `x` on an infinite grid with spacing `dx`.
fn node_kind_at(geometry: &Geometry, x: f64, dx: f64) -> NodeKind {
    let loc = geometry.locate(x + 0.5 * dx);
    // The node itself is a vertex iff the segment-local coordinate of the
    // probe is within half a step of the segment start.
    if loc.local < dx {
        NodeKind::Vertex(match loc.segment {
            Segment::Link => VertexKind::SemiToLink,
            Segment::Semicircle => VertexKind::LinkToSemi,
        })
    } else {
        NodeKind::Interior(loc.segment)
    }
}

/// Shooting integrator for `u'' = ε²u - u³` from a symmetry point.
///
/// Returns the profile over the full window (left half by reflection) and
/// the classification event of the rightward semi-orbit. An aborted shot
/// zero-fills the window beyond the event.
pub fn shoot(
    geometry: Geometry,
    eps: f64,
    family: Family,
    amplitude: f64,
    n_cells: usize,
    nodes_per_semi: usize,
    opts: &ShootOptions,
) -> Result<(GraphProfile, ShootEvent)> {
    if !(0.0..=0.5).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidConfiguration(
            "eps must lie in (0, 0.5]".into(),
        ));
    }
    if amplitude < 0.0 {
        return Err(Error::InvalidConfiguration("amplitude must be >= 0".into()));
    }
    let grid = family.grid(geometry, n_cells, nodes_per_semi)?;
    let shot = shoot_right(&grid, eps, amplitude, opts);
    let n = grid.n_nodes();
    let c = grid.center_index();
    let mut u = vec![0.0; n];
    let mut dl = vec![0.0; n];
    let mut dr = vec![0.0; n];
    for j in 0..(n - c) {
        u[c + j] = shot.u[j];
        dl[c + j] = shot.du_left[j];
        dr[c + j] = shot.du_right[j];
        // Reflection: u(x₀ - δ) = u(x₀ + δ), sides swap and flip sign.
        u[c - j] = shot.u[j];
        dl[c - j] = -shot.du_right[j];
        dr[c - j] = -shot.du_left[j];
    }
    // The center has u' = 0 on both sides by construction.
    dl[c] = 0.0;
    dr[c] = 0.0;
    Ok((GraphProfile::new(grid, u, dl, dr), shot.event))
}

/// A converged symmetric bound state.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub eps: f64,
    pub family: Family,
    pub profile: GraphProfile,
    /// Converged shooting amplitude `a = u(x₀)`.
    pub amplitude: f64,
    pub max_u: f64,
    /// Decay rate fitted from per-cell tail samples of the profile.
    pub beta_hat: f64,
    /// Linear prediction `acosh(tr M(-ε²)/2) / P`.
    pub beta_lin: f64,
    pub n_cells: usize,
    pub nodes_per_semi: usize,
}

impl BoundState {
    /// JSON summary `{eps, family, amplitude, beta_hat, beta_lin, max_u,
    /// window}` with 17-significant-digit floats.
    pub fn summary_json(&self) -> String {
        use crate::json::Sig;
        use serde::Serialize;

        #[derive(Serialize)]
        struct Window {
            cells_per_side: usize,
            nodes_per_semi: usize,
            dx: Sig,
            x_min: Sig,
            x_max: Sig,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: u32,
            eps: Sig,
            family: &'a str,
            amplitude: Sig,
            beta_hat: Sig,
            beta_lin: Sig,
            max_u: Sig,
            window: Window,
        }
        let grid = self.profile.grid();
        serde_json::to_string_pretty(&Doc {
            schema: 1,
            eps: Sig(self.eps),
            family: self.family.label(),
            amplitude: Sig(self.amplitude),
            beta_hat: Sig(self.beta_hat),
            beta_lin: Sig(self.beta_lin),
            max_u: Sig(self.max_u),
            window: Window {
                cells_per_side: self.n_cells,
                nodes_per_semi: self.nodes_per_semi,
                dx: Sig(grid.dx()),
                x_min: Sig(grid.start()),
                x_max: Sig(grid.end()),
            },
        })
        .expect("summary serialization")
    }
}

/// Default window size: enough cells that the tail reaches `e^{-12}` decay.
pub fn default_n_cells(eps: f64, geometry: &Geometry) -> usize {
    (12.0 / (eps * geometry.period())).ceil() as usize
}

/// Find a bound state by bisection on the shooting amplitude.
///
/// The initial bracket is `[0.1, 10]·√2·ε`; the endpoints must classify to
/// opposite sides of the stable manifold.
pub fn find_bound_state(
    geometry: Geometry,
    eps: f64,
    family: Family,
    n_cells: usize,
    nodes_per_semi: usize,
) -> Result<BoundState> {
    find_bound_state_with_bracket(
        geometry,
        eps,
        family,
        n_cells,
        nodes_per_semi,
        (0.1 * 2.0f64.sqrt() * eps, 10.0 * 2.0f64.sqrt() * eps),
    )
}

/// As [`find_bound_state`] with an explicit amplitude bracket.
pub fn find_bound_state_with_bracket(
    geometry: Geometry,
    eps: f64,
    family: Family,
    n_cells: usize,
    nodes_per_semi: usize,
    bracket: (f64, f64),
) -> Result<BoundState> {
    if !geometry.has_odd_link() {
        return Err(Error::InvalidConfiguration(format!(
            "l = {} is even: the half-period trace vanishes in a band and no \
             breather frequency validates; bound states require odd l",
            geometry.l()
        )));
    }
    if !(0.0..=0.5).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidConfiguration(
            "eps must lie in (0, 0.5]".into(),
        ));
    }
    let opts = ShootOptions::default();
    let grid = family.grid(geometry, n_cells, nodes_per_semi)?;
    let classify = |a: f64| shoot_right(&grid, eps, a, &opts).event;

    let (mut lo, mut hi) = bracket;
    let lo_event = classify(lo);
    let hi_event = classify(hi);
    let (lo_side, hi_side) = match (lo_event.too_large(), hi_event.too_large()) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => {
            return Err(Error::BracketFailure(format!(
                "amplitudes {lo:.6e} and {hi:.6e} classify as {lo_event:?} / {hi_event:?}; \
                 no stable-manifold crossing inside the bracket"
            )))
        }
    };
    debug_assert!(hi_side && !lo_side || !hi_side && lo_side);

    for _ in 0..200 {
        if (hi - lo) <= 1e-14 * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match classify(mid).too_large() {
            None => {
                // Decayed through the whole classification range: take it.
                lo = mid;
                hi = mid;
                break;
            }
            Some(side) => {
                if side == lo_side {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    let a = 0.5 * (lo + hi);
    let (profile, _event) = shoot(geometry, eps, family, a, n_cells, nodes_per_semi, &opts)?;

    let beta_lin = (trace_formula(-eps * eps, &geometry) / 2.0).acosh() / geometry.period();
    let beta_hat = fit_decay_rate(&profile, a);
    let max_u = profile.max_abs();
    Ok(BoundState {
        eps,
        family,
        profile,
        amplitude: a,
        max_u,
        beta_hat,
        beta_lin,
        n_cells,
        nodes_per_semi,
    })
}

/// Least-squares slope of `ln|u|` against x, sampled once per cell (same
/// phase) on the right tail. The clean exponential regime sits between the
/// nonlinear core and the shadowing floor, `u/a ∈ [1e-6, 1e-2]`; short
/// windows that never reach it fall back to the outer half of the window.
fn fit_decay_rate(profile: &GraphProfile, amplitude: f64) -> f64 {
    let grid = profile.grid();
    let c = grid.center_index();
    let per_cell = grid.nodes_per_cell();
    let collect = |lo_rel: f64, hi_rel: f64, from_cell: usize| -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut j = c + from_cell * per_cell;
        while j < grid.n_nodes() {
            let u = profile.values()[j];
            let rel = u / amplitude;
            if u > 0.0 && rel >= lo_rel && rel <= hi_rel {
                xs.push(grid.x(j));
                ys.push(u.ln());
            }
            j += per_cell;
        }
        (xs, ys)
    };
    let (xs, ys) = {
        let clean = collect(1e-6, 1e-2, 1);
        if clean.0.len() >= 3 {
            clean
        } else {
            // Outer half of the window, skipping the core.
            let n_cells = (grid.n_nodes() - 1 - c) / per_cell;
            collect(0.0, f64::INFINITY, (n_cells / 2).max(1))
        }
    };
    if xs.len() < 2 {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    -(sxy / sxx)
}

/// Max symmetry defect `|u(x₀+δ) - u(x₀-δ)|` of the stored profile. The
/// left half is built by reflection, so this is zero unless the profile
/// was modified.
pub fn reversibility_residual(state: &BoundState) -> f64 {
    let grid = state.profile.grid();
    let c = grid.center_index();
    let u = state.profile.values();
    let mut worst = 0.0f64;
    for j in 1..=c.min(grid.n_nodes() - 1 - c) {
        worst = worst.max((u[c + j] - u[c - j]).abs());
    }
    worst
}

/// Cross-check variant: the left half is re-integrated independently
/// (leftward RK4 through the jumps) and compared against the reflected
/// right half.
pub fn reversibility_residual_crosscheck(state: &BoundState) -> Result<f64> {
    let grid = state.profile.grid();
    let c = grid.center_index();
    let dx = grid.dx();
    let mut s = State {
        u: state.amplitude,
        p: 0.0,
    };
    let mut worst = 0.0f64;
    for j in 1..=c {
        s = rk4(state.eps, s, -dx);
        // Crossing the vertex at node c - j in the decreasing direction:
        // the jump factor is the inverse of the rightward one.
        if let NodeKind::Vertex(kind) = grid.kind(c - j) {
            if c - j > 0 {
                s.p /= kind.jump().factor;
            }
        }
        worst = worst.max((s.u - state.profile.values()[c - j]).abs());
    }
    Ok(worst)
}

/// Max defect of the ODE `u'' = ε²u - u³` over the smooth intervals of a
/// profile, measured at interval midpoints through quintic Hermite
/// interpolation of the stored `(u, u')` samples. Scales as `dx⁴` for
/// RK4-produced profiles.
pub fn ode_residual(profile: &GraphProfile, eps: f64) -> f64 {
    let grid = profile.grid();
    let h = grid.dx();
    let u = profile.values();
    let mut worst = 0.0f64;
    for i in 0..grid.n_nodes() - 1 {
        let u0 = u[i];
        let p0 = profile.du_right()[i];
        let u1 = u[i + 1];
        let p1 = profile.du_left()[i + 1];
        let s0 = accel(eps, u0);
        let s1 = accel(eps, u1);
        // Quintic Hermite from (u, u', u'') at both ends.
        let a = u1 - u0 - p0 * h - 0.5 * s0 * h * h;
        let b = p1 - p0 - s0 * h;
        let cc = s1 - s0;
        let c3 = (10.0 * a - 4.0 * b * h + 0.5 * cc * h * h) / (h * h * h);
        let c4 = (-15.0 * a + 7.0 * b * h - cc * h * h) / (h * h * h * h);
        let c5 = (6.0 * a - 3.0 * b * h + 0.5 * cc * h * h) / (h * h * h * h * h);
        let t = 0.5 * h;
        let hu = u0 + t * (p0 + t * (0.5 * s0 + t * (c3 + t * (c4 + t * c5))));
        let hdd = s0 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        let r = (hdd - accel(eps, hu)).abs();
        worst = worst.max(r);
    }
    worst
}
