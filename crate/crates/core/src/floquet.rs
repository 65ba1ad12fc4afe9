//! Transfer and monodromy matrices of `-u'' = λu` on the necklace cell.
//!
//! On a smooth segment of length `s` the fundamental matrix in the state
//! `(u, u')` is
//!
//! ```text
//! T(s, λ) = [ c(s, λ)      sn(s, λ) ]      c  = cos(√λ s)
//!           [ -λ·sn(s, λ)  c(s, λ)  ]      sn = sin(√λ s)/√λ
//! ```
//!
//! analytically continued through λ = 0 (`cosh`/`sinh` for λ < 0, a Taylor
//! branch near 0 where the direct expressions cancel). One period of the
//! cell, based at `x̌ = 0`, gives the monodromy
//!
//! ```text
//! M₀(λ) = diag(1, 2) · T(π, λ) · diag(1, 1/2) · T(L, λ),
//! ```
//!
//! the diagonal factors being the derivative jumps at the two vertex types.
//! Its trace reduces to `(9·cos((L+π)ω) - cos((L-π)ω))/4` with `ω = √λ`,
//! and `|tr| ≤ 2` is equivalent to λ lying in the spectrum.

use crate::geometry::{Geometry, Segment, VertexKind};
use crate::{Error, Result};

/// Threshold on `|λ|·s²` below which the series branch is used.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Real 2×2 matrix acting on the state `(u, u')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn diag(a: f64, d: f64) -> Mat2 {
        Mat2 { a, b: 0.0, c: 0.0, d }
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Kahan-style determinant: accurate to ~ε·|det| given exact entries.
    pub fn det(&self) -> f64 {
        let w = self.b * self.c;
        let e = self.b.mul_add(self.c, -w);
        let f = self.a.mul_add(self.d, -w);
        f - e
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }
}

/// `cos(√λ s)` continued analytically through λ = 0.
fn prop_c(s: f64, lambda: f64) -> f64 {
    let z = lambda * s * s;
    if z.abs() < SERIES_THRESHOLD {
        // 4-term Taylor series in z = λs²; next term is z⁴/8! < 1e-21.
        1.0 + z * (-0.5 + z * (1.0 / 24.0 + z * (-1.0 / 720.0)))
    } else if lambda > 0.0 {
        (lambda.sqrt() * s).cos()
    } else {
        ((-lambda).sqrt() * s).cosh()
    }
}

/// `sin(√λ s)/√λ` continued analytically through λ = 0.
fn prop_sn(s: f64, lambda: f64) -> f64 {
    let z = lambda * s * s;
    if z.abs() < SERIES_THRESHOLD {
        s * (1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 + z * (-1.0 / 5040.0))))
    } else if lambda > 0.0 {
        let w = lambda.sqrt();
        (w * s).sin() / w
    } else {
        let v = (-lambda).sqrt();
        (v * s).sinh() / v
    }
}

/// Fundamental matrix of `-u'' = λu` over a smooth segment of length `s`.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix {
    pub mat: Mat2,
    pub lambda: f64,
    pub s: f64,
}

/// Closed-form transfer matrix; unit determinant by construction.
pub fn transfer(s: f64, lambda: f64) -> TransferMatrix {
    let c = prop_c(s, lambda);
    let sn = prop_sn(s, lambda);
    TransferMatrix {
        mat: Mat2 {
            a: c,
            b: sn,
            c: -lambda * sn,
            d: c,
        },
        lambda,
        s,
    }
}

/// Monodromy matrix of the cell, based at `x̌ ∈ [0, P)`.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    pub mat: Mat2,
    pub lambda: f64,
    /// Base point; states at the vertex points use right-sided derivatives.
    pub base: f64,
    pub period: f64,
}

impl Monodromy {
    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn det(&self) -> f64 {
        self.mat.det()
    }
}

fn jump_mat(kind: VertexKind) -> Mat2 {
    Mat2::diag(1.0, kind.jump().factor)
}

/// Compensated (double-double) arithmetic for the monodromy product.
///
/// At strongly hyperbolic λ the factors have entries up to `cosh(νP)` and
/// the unit determinant lives entirely in the cancellation between
/// same-magnitude products; a plain f64 product loses it at
/// `ε·‖M‖²`. Carrying error terms through the four-matrix product keeps
/// `det - 1` and the base-point conjugacy identities at working precision.
mod dd {
    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    impl Dd {
        pub fn from(x: f64) -> Dd {
            Dd { hi: x, lo: 0.0 }
        }

        pub fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let hi = a + b;
        let lo = b - (hi - a);
        Dd { hi, lo }
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> Dd {
        let hi = a + b;
        let v = hi - a;
        let lo = (a - (hi - v)) + (b - v);
        Dd { hi, lo }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let hi = a * b;
        let lo = a.mul_add(b, -hi);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add(a: Dd, b: Dd) -> Dd {
        let s = two_sum(a.hi, b.hi);
        quick_two_sum(s.hi, s.lo + a.lo + b.lo)
    }

    #[inline]
    pub fn mul(a: Dd, b: Dd) -> Dd {
        let p = two_prod(a.hi, b.hi);
        quick_two_sum(p.hi, p.lo + a.hi * b.lo + a.lo * b.hi)
    }

    /// 2×2 matrix with double-double entries, row-major.
    #[derive(Debug, Clone, Copy)]
    pub struct Mat2Dd(pub [Dd; 4]);

    impl Mat2Dd {
        pub fn from_f64(a: f64, b: f64, c: f64, d: f64) -> Self {
            Mat2Dd([Dd::from(a), Dd::from(b), Dd::from(c), Dd::from(d)])
        }

        pub fn mul(&self, rhs: &Mat2Dd) -> Mat2Dd {
            let l = &self.0;
            let r = &rhs.0;
            Mat2Dd([
                add(mul(l[0], r[0]), mul(l[1], r[2])),
                add(mul(l[0], r[1]), mul(l[1], r[3])),
                add(mul(l[2], r[0]), mul(l[3], r[2])),
                add(mul(l[2], r[1]), mul(l[3], r[3])),
            ])
        }

        pub fn det(&self) -> f64 {
            let m = &self.0;
            add(mul(m[0], m[3]), mul(m[1], m[2]).neg()).hi
        }
    }
}

fn dd_mat(m: &Mat2) -> dd::Mat2Dd {
    dd::Mat2Dd::from_f64(m.a, m.b, m.c, m.d)
}

fn monodromy_product(lambda: f64, geometry: &Geometry, base: f64) -> dd::Mat2Dd {
    let l_len = geometry.link_len();
    let j_in = dd_mat(&jump_mat(VertexKind::LinkToSemi));
    let j_out = dd_mat(&jump_mat(VertexKind::SemiToLink));
    if base < l_len {
        // link remainder, semicircle, link head of the next cell
        let head = dd_mat(&transfer(base, lambda).mat);
        let tail = dd_mat(&transfer(l_len - base, lambda).mat);
        let semi = dd_mat(&transfer(geometry.semi_len(), lambda).mat);
        head.mul(&j_out).mul(&semi).mul(&j_in).mul(&tail)
    } else {
        let sigma = base - l_len;
        let head = dd_mat(&transfer(sigma, lambda).mat);
        let tail = dd_mat(&transfer(geometry.semi_len() - sigma, lambda).mat);
        let link = dd_mat(&transfer(l_len, lambda).mat);
        head.mul(&j_in).mul(&link).mul(&j_out).mul(&tail)
    }
}

/// Closed-form monodromy over `[x̌, x̌ + P)`, split at the vertex crossings.
pub fn monodromy(lambda: f64, geometry: &Geometry, base: f64) -> Monodromy {
    let p = geometry.period();
    debug_assert!((0.0..p).contains(&base));
    let prod = monodromy_product(lambda, geometry, base);
    let mat = Mat2 {
        a: prod.0[0].hi,
        b: prod.0[1].hi,
        c: prod.0[2].hi,
        d: prod.0[3].hi,
    };
    Monodromy {
        mat,
        lambda,
        base,
        period: p,
    }
}

/// Determinant of the monodromy with the product carried in compensated
/// arithmetic, accurate to a few ulp even deep in the hyperbolic regime.
pub fn monodromy_det(lambda: f64, geometry: &Geometry, base: f64) -> f64 {
    monodromy_product(lambda, geometry, base).det()
}

/// One classical RK4 step for the constant-coefficient system `v' = A v`.
fn rk4_step(a: &Mat2, v: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = a.apply(v);
    let k2 = a.apply([v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
    let k3 = a.apply([v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
    let k4 = a.apply([v[0] + h * k3[0], v[1] + h * k3[1]]);
    [
        v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn steps_for(len: f64, h: f64) -> Result<usize> {
    let n = (len / h).round();
    if n < 1.0 || ((len / h) - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::StepSize { h, len });
    }
    Ok(n as usize)
}

/// Monodromy obtained by explicit 4th-order integration of the first-order
/// system, with the vertex jumps applied at each crossing. Serves as an
/// independent oracle for [`monodromy`]; `h` must divide both segment
/// lengths.
pub fn monodromy_by_integration(
    lambda: f64,
    geometry: &Geometry,
    base: f64,
    h: f64,
) -> Result<Monodromy> {
    let a = Mat2 {
        a: 0.0,
        b: 1.0,
        c: -lambda,
        d: 0.0,
    };
    // Segment/jump sequence over [base, base + P).
    let l_len = geometry.link_len();
    let mut pieces: Vec<(f64, Option<VertexKind>)> = Vec::new();
    if base < l_len {
        pieces.push((l_len - base, Some(VertexKind::LinkToSemi)));
        pieces.push((geometry.semi_len(), Some(VertexKind::SemiToLink)));
        pieces.push((base, None));
    } else {
        let sigma = base - l_len;
        pieces.push((geometry.semi_len() - sigma, Some(VertexKind::SemiToLink)));
        pieces.push((l_len, Some(VertexKind::LinkToSemi)));
        pieces.push((sigma, None));
    }
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for (len, vertex) in pieces {
        if len > 0.0 {
            let n = steps_for(len, h)?;
            let step = len / n as f64;
            for col in cols.iter_mut() {
                let mut v = *col;
                for _ in 0..n {
                    v = rk4_step(&a, v, step);
                }
                *col = v;
            }
        }
        if let Some(kind) = vertex {
            let f = kind.jump().factor;
            for col in cols.iter_mut() {
                col[1] *= f;
            }
        }
    }
    Ok(Monodromy {
        mat: Mat2 {
            a: cols[0][0],
            b: cols[1][0],
            c: cols[0][1],
            d: cols[1][1],
        },
        lambda,
        base,
        period: geometry.period(),
    })
}

/// Trace of the monodromy as a closed expression in `ω = √λ`:
/// `(9·cos((L+π)ω) - cos((L-π)ω))/4`.
pub fn trace_formula_omega(omega: f64, geometry: &Geometry) -> f64 {
    let l_len = geometry.link_len();
    let p = l_len + geometry.semi_len();
    let q = l_len - geometry.semi_len();
    0.25 * (9.0 * (p * omega).cos() - (q * omega).cos())
}

/// λ-based variant of the trace formula; the cosines become hyperbolic for
/// λ < 0.
pub fn trace_formula(lambda: f64, geometry: &Geometry) -> f64 {
    if lambda >= 0.0 {
        trace_formula_omega(lambda.sqrt(), geometry)
    } else {
        let v = (-lambda).sqrt();
        let l_len = geometry.link_len();
        let p = l_len + geometry.semi_len();
        let q = l_len - geometry.semi_len();
        0.25 * (9.0 * (p * v).cosh() - (q * v).cosh())
    }
}

/// The four Floquet cases of the trace classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloquetCase {
    /// `tr > 2`: positive real multipliers off the unit circle.
    GapPositive,
    /// `tr < -2`: negative real multipliers off the unit circle.
    GapNegative,
    /// `|tr| < 2`: conjugate multipliers on the unit circle.
    Band,
    /// `|tr| = 2` within tolerance: multipliers collide at ±1.
    Edge,
}

impl FloquetCase {
    pub fn is_gap(self) -> bool {
        matches!(self, FloquetCase::GapPositive | FloquetCase::GapNegative)
    }

    pub fn label(self) -> &'static str {
        match self {
            FloquetCase::GapPositive => "gap_positive",
            FloquetCase::GapNegative => "gap_negative",
            FloquetCase::Band => "band",
            FloquetCase::Edge => "edge",
        }
    }
}

/// Floquet multipliers `μ, 1/μ` (as complex pairs even when real) together
/// with the decay exponent solving `2·cosh(βP) = |tr|` in the gap cases.
#[derive(Debug, Clone, Copy)]
pub struct FloquetClassification {
    pub case: FloquetCase,
    /// Pair `(Re, Im)` per multiplier.
    pub multipliers: [(f64, f64); 2],
    pub exponent: f64,
    /// Set when `|tr|` landed inside the edge tolerance band.
    pub degenerate_edge: bool,
}

/// Classify a monodromy matrix by its trace; `tol` is the edge tolerance.
pub fn classify(m: &Monodromy, tol: f64) -> FloquetClassification {
    let tr = m.trace();
    let scale = tr.abs().max(1.0);
    debug_assert!((m.det() - 1.0).abs() < 1e-10 * scale * scale);
    let at_edge = (tr.abs() - 2.0).abs() <= tol;
    let (case, multipliers, exponent) = if at_edge {
        let mu = if tr >= 0.0 { 1.0 } else { -1.0 };
        (FloquetCase::Edge, [(mu, 0.0), (mu, 0.0)], 0.0)
    } else if tr > 2.0 || tr < -2.0 {
        // Real roots of μ² - tr·μ + 1 = 0: take the large root from the
        // quadratic formula and its partner as 1/μ (the small root suffers
        // cancellation when |tr| is large).
        let disc = (tr * tr - 4.0).sqrt();
        let mu1 = 0.5 * (tr + tr.signum() * disc);
        let mu2 = 1.0 / mu1;
        let case = if tr > 2.0 {
            FloquetCase::GapPositive
        } else {
            FloquetCase::GapNegative
        };
        let beta = (tr.abs() / 2.0).acosh() / m.period;
        (case, [(mu1, 0.0), (mu2, 0.0)], beta)
    } else {
        let im = (4.0 - tr * tr).sqrt() * 0.5;
        (
            FloquetCase::Band,
            [(0.5 * tr, im), (0.5 * tr, -im)],
            0.0,
        )
    };
    FloquetClassification {
        case,
        multipliers,
        exponent,
        degenerate_edge: at_edge,
    }
}

/// Default edge tolerance for algebraic checks.
pub const EDGE_TOL_ALGEBRAIC: f64 = 1e-9;
/// Edge tolerance for scanned classification (a scan grid cannot hit edges
/// exactly).
pub const EDGE_TOL_SCAN: f64 = 1e-6;

/// Linear part of a segment of the shooting systems; re-exported here so the
/// integrators share one definition of the segment sequence.
pub fn segment_sequence(geometry: &Geometry) -> [(Segment, f64); 2] {
    [
        (Segment::Link, geometry.link_len()),
        (Segment::Semicircle, geometry.semi_len()),
    ]
}
