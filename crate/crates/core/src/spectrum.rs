//! Band/gap structure of the necklace-graph Laplacian and the breather
//! frequency selection rule.
//!
//! A point λ belongs to the spectrum iff `|tr M(λ)| ≤ 2`. The breather
//! ansatz with frequency `ω = k/2` (odd k) and `α = ω²` needs λ₁ = 0 on a
//! band edge while every higher odd harmonic λ_m = m²ω² - α falls into a
//! gap; the trace at those points tends to -5/2. For even link multipliers
//! the trace at one half period is 0 and the rule fails.

use serde::Serialize;

use crate::floquet::{
    classify, monodromy, trace_formula, trace_formula_omega, FloquetCase, EDGE_TOL_ALGEBRAIC,
    EDGE_TOL_SCAN,
};
use crate::geometry::Geometry;
use crate::json::Sig;
use crate::{Error, Result};

/// One classified interval of a [`BandScan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    pub kind: IntervalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Band,
    Gap,
}

#[derive(Debug, Clone)]
pub struct BandScan {
    pub lambdas: Vec<f64>,
    pub traces: Vec<f64>,
    pub classes: Vec<FloquetCase>,
    /// Band/gap intervals partitioning the scanned range.
    pub intervals: Vec<SpectralInterval>,
    /// Points where `tr` reaches ±2 tangentially without crossing.
    pub touch_points: Vec<f64>,
    pub warnings: Vec<String>,
}

fn bisect_edge(geometry: &Geometry, mut lo: f64, mut hi: f64) -> f64 {
    let g = |lambda: f64| trace_formula(lambda, geometry).abs() - 2.0;
    let mut g_lo = g(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locate the extremum of `tr` inside `[lo, hi]` by golden-section search.
fn refine_extremum(geometry: &Geometry, lo: f64, hi: f64, maximize: bool) -> (f64, f64) {
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let sign = if maximize { 1.0 } else { -1.0 };
    let f = |x: f64| sign * trace_formula(x, geometry);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, trace_formula(x, geometry))
}

/// Scan `[lo, hi]` with `n` grid points: traces, per-point classification,
/// refined band/gap intervals and tangential touch points.
pub fn scan_bands(geometry: &Geometry, lo: f64, hi: f64, n: usize) -> Result<BandScan> {
    if n < 2 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidConfiguration(
            "scan needs a finite range and at least 2 grid points".into(),
        ));
    }
    let lambdas: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let traces: Vec<f64> = lambdas
        .iter()
        .map(|&l| trace_formula(l, geometry))
        .collect();
    let classes: Vec<FloquetCase> = lambdas
        .iter()
        .map(|&l| classify(&monodromy(l, geometry, 0.0), EDGE_TOL_SCAN).case)
        .collect();

    let mut warnings = Vec::new();
    let g = |tr: f64| tr.abs() - 2.0;

    // Edges from sign changes of |tr| - 2. Each base cell is probed at 4
    // interior points so edge pairs stepped over by the grid are still
    // recovered (with a coarseness warning).
    let mut edges = Vec::new();
    let mut touch_points = Vec::new();
    const PROBES: usize = 4;
    for i in 0..n - 1 {
        let a = g(traces[i]);
        let b = g(traces[i + 1]);
        let mut pts = Vec::with_capacity(PROBES + 2);
        pts.push((lambdas[i], a));
        for p in 1..=PROBES {
            let x = lambdas[i] + (lambdas[i + 1] - lambdas[i]) * p as f64 / (PROBES + 1) as f64;
            pts.push((x, g(trace_formula(x, geometry))));
        }
        pts.push((lambdas[i + 1], b));
        let mut changes = 0usize;
        let mut anchor: Option<(f64, f64)> = None;
        for &(x, v) in &pts {
            if v == 0.0 {
                continue;
            }
            if let Some((ax, av)) = anchor {
                if (v > 0.0) != (av > 0.0) {
                    edges.push(bisect_edge(geometry, ax, x));
                    changes += 1;
                }
            }
            anchor = Some((x, v));
        }
        let base_visible = a != 0.0 && b != 0.0 && (a > 0.0) != (b > 0.0);
        if changes > usize::from(base_visible) {
            warnings.push(format!(
                "grid too coarse to separate edges in [{:.6}, {:.6}]",
                lambdas[i],
                lambdas[i + 1]
            ));
        }
    }

    // Grid points where |tr| = 2 exactly: an edge if the trace crosses,
    // a tangential touching if it only reaches the line.
    for i in 1..n - 1 {
        if g(traces[i]) == 0.0 {
            let a = g(traces[i - 1]);
            let b = g(traces[i + 1]);
            if a != 0.0 && b != 0.0 {
                if (a > 0.0) != (b > 0.0) {
                    edges.push(lambdas[i]);
                } else {
                    touch_points.push(lambdas[i]);
                }
            }
        }
    }

    // Off-grid tangential touchings: local extrema of tr where |tr|
    // reaches 2 without a sign change of |tr| - 2.
    for i in 1..n - 1 {
        let d1 = traces[i] - traces[i - 1];
        let d2 = traces[i + 1] - traces[i];
        if d1 * d2 < 0.0 {
            let maximize = d1 > 0.0;
            let (x, tr) = refine_extremum(geometry, lambdas[i - 1], lambdas[i + 1], maximize);
            if (tr.abs() - 2.0).abs() <= EDGE_TOL_SCAN
                && !edges.iter().any(|e| (e - x).abs() < 1e-8)
                && !touch_points.iter().any(|t| (t - x).abs() < 1e-8)
            {
                touch_points.push(x);
            }
        }
    }
    touch_points.sort_by(f64::total_cmp);
    touch_points.dedup_by(|a, b| (*a - *b).abs() < 1e-8);

    // Assemble the interval partition.
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut cuts = vec![lo];
    cuts.extend(edges.iter().copied().filter(|&e| e > lo && e < hi));
    cuts.push(hi);
    let mut intervals = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let kind = if g(trace_formula(mid, geometry)) > 0.0 {
            IntervalKind::Gap
        } else {
            IntervalKind::Band
        };
        intervals.push(SpectralInterval {
            lo: w[0],
            hi: w[1],
            kind,
        });
    }
    let grid_step = (hi - lo) / (n - 1) as f64;
    for itv in &intervals {
        if itv.hi - itv.lo < 2.0 * grid_step && intervals.len() > 1 {
            warnings.push(format!(
                "interval [{:.6}, {:.6}] narrower than two grid steps; refine the grid",
                itv.lo, itv.hi
            ));
        }
    }

    Ok(BandScan {
        lambdas,
        traces,
        classes,
        intervals,
        touch_points,
        warnings,
    })
}

impl BandScan {
    /// CSV with header `lambda,trace,class`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("lambda,trace,class\n");
        for i in 0..self.lambdas.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::json::fmt_f64(self.lambdas[i]),
                crate::json::fmt_f64(self.traces[i]),
                self.classes[i].label()
            ));
        }
        out
    }
}

/// Record for one odd harmonic in a [`FrequencyReport`].
#[derive(Debug, Clone)]
pub struct ModeRecord {
    pub m: u32,
    /// λ_m = m²ω² - α.
    pub lambda: f64,
    pub trace: f64,
    /// |tr| - 2; positive inside gaps.
    pub margin: f64,
    pub class: FloquetCase,
    /// Selection-rule trace at λ = (mω)² (α = 0); equals -5/2 for every odd
    /// m·k when the link multiplier is odd.
    pub trace_alpha0: f64,
}

/// Outcome of the frequency validation for ω = k/2, α = ω².
#[derive(Debug, Clone)]
pub struct FrequencyReport {
    pub k: u32,
    pub l: u32,
    pub omega: f64,
    pub alpha: f64,
    pub modes: Vec<ModeRecord>,
    /// True iff λ₁ is edge-or-band and every checked λ_m (m ≥ 3) is a gap.
    pub valid: bool,
    /// Trace of the monodromy at one half period of the trace map: the
    /// m → ∞ limit of tr(λ_m); -5/2 for odd l, 0 for even l.
    pub limit_trace: f64,
}

/// Validate the breather frequency ω = k/2 with α = ω² against the
/// band/gap structure. Even `l` is not an error: it yields an invalid
/// verdict.
pub fn validate_frequency(k: u32, l: u32, m_check: u32) -> Result<FrequencyReport> {
    if k % 2 == 0 || k < 1 {
        return Err(Error::InvalidConfiguration("k must be odd and >= 1".into()));
    }
    if m_check < 3 || m_check % 2 == 0 {
        return Err(Error::InvalidConfiguration(
            "M_check must be odd and >= 3".into(),
        ));
    }
    let geometry = Geometry::new(l)?;
    let omega = k as f64 / 2.0;
    let alpha = omega * omega;
    let mut modes = Vec::new();
    let mut valid = true;
    for m in (1..=m_check).step_by(2) {
        let lambda = (m * m) as f64 * omega * omega - alpha;
        let mono = monodromy(lambda, &geometry, 0.0);
        let trace = mono.trace();
        let class = classify(&mono, EDGE_TOL_ALGEBRAIC).case;
        let margin = trace.abs() - 2.0;
        let m_omega = m as f64 * omega;
        let trace_alpha0 = trace_formula_omega(m_omega, &geometry);
        if m == 1 {
            if class.is_gap() {
                valid = false;
            }
        } else if !class.is_gap() {
            valid = false;
        }
        modes.push(ModeRecord {
            m,
            lambda,
            trace,
            margin,
            class,
            trace_alpha0,
        });
    }
    let limit_trace = trace_formula_omega(0.5, &geometry);
    Ok(FrequencyReport {
        k,
        l,
        omega,
        alpha,
        modes,
        valid,
        limit_trace,
    })
}

#[derive(Serialize)]
struct ModeRecordJson {
    m: u32,
    lambda: Sig,
    trace: Sig,
    margin: Sig,
    class: &'static str,
}

#[derive(Serialize)]
struct FrequencyReportJson {
    schema: u32,
    k: u32,
    l: u32,
    omega: Sig,
    alpha: Sig,
    modes: Vec<ModeRecordJson>,
    verdict: &'static str,
    limit_trace: Sig,
}

impl FrequencyReport {
    pub fn to_json_string(&self) -> String {
        let doc = FrequencyReportJson {
            schema: 1,
            k: self.k,
            l: self.l,
            omega: Sig(self.omega),
            alpha: Sig(self.alpha),
            modes: self
                .modes
                .iter()
                .map(|m| ModeRecordJson {
                    m: m.m,
                    lambda: Sig(m.lambda),
                    trace: Sig(m.trace),
                    margin: Sig(m.margin),
                    class: m.class.label(),
                })
                .collect(),
            verdict: if self.valid { "valid" } else { "invalid" },
            limit_trace: Sig(self.limit_trace),
        };
        serde_json::to_string_pretty(&doc).expect("report serialization")
    }
}

/// Link length input for the rationality check: `l` as an exact fraction or
/// a declared-irrational value such as `sqrt2`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkLength {
    Rational { num: i64, den: i64 },
    Irrational { value: f64, label: String },
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Parse `"3"`, `"3/2"`, `"1.5"` or `"sqrtN"` into a [`LinkLength`].
pub fn parse_link_length(s: &str) -> Result<LinkLength> {
    let s = s.trim();
    if let Some(stripped) = s.strip_prefix("sqrt") {
        let n: i64 = stripped
            .parse()
            .map_err(|_| Error::Parse(format!("bad sqrt argument in '{s}'")))?;
        if n <= 0 {
            return Err(Error::Parse("sqrt argument must be positive".into()));
        }
        let root = (n as f64).sqrt();
        let r = root.round() as i64;
        if r * r == n {
            return Ok(LinkLength::Rational { num: r, den: 1 });
        }
        return Ok(LinkLength::Irrational {
            value: root,
            label: s.to_string(),
        });
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: i64 = p.trim().parse().map_err(|_| Error::Parse(format!("bad fraction '{s}'")))?;
        let den: i64 = q.trim().parse().map_err(|_| Error::Parse(format!("bad fraction '{s}'")))?;
        if den == 0 || num <= 0 {
            return Err(Error::Parse("l must be a positive fraction".into()));
        }
        let g = gcd(num, den);
        return Ok(LinkLength::Rational {
            num: num / g,
            den: den / g,
        });
    }
    if let Ok(n) = s.parse::<i64>() {
        if n <= 0 {
            return Err(Error::Parse("l must be positive".into()));
        }
        return Ok(LinkLength::Rational { num: n, den: 1 });
    }
    if let Some(dot) = s.find('.') {
        let digits = s.len() - dot - 1;
        if digits == 0 || digits > 9 || !s[dot + 1..].chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("cannot parse l = '{s}'")));
        }
        let scale = 10i64.pow(digits as u32);
        let whole: i64 = s[..dot]
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse l = '{s}'")))?;
        let frac: i64 = s[dot + 1..]
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse l = '{s}'")))?;
        let num = whole * scale + frac;
        if num <= 0 {
            return Err(Error::Parse("l must be positive".into()));
        }
        let g = gcd(num, scale);
        return Ok(LinkLength::Rational {
            num: num / g,
            den: scale / g,
        });
    }
    Err(Error::Parse(format!("cannot parse l = '{s}'")))
}

/// Periodicity report for the trace map at link length `L = l·π`.
#[derive(Debug, Clone)]
pub struct RationalityReport {
    pub l_label: String,
    pub l_value: f64,
    /// (L-π)/(L+π) = (l-1)/(l+1), reduced, when l is rational.
    pub ratio: Option<(i64, i64)>,
    pub ratio_value: f64,
    /// The trace map ω ↦ tr M(ω²) is periodic iff the ratio is rational.
    pub periodic: bool,
    /// Period of the trace map in ω when it exists.
    pub period_omega: Option<(i64, i64)>,
}

/// §-style rationality check: the trace is a sum of cosines with periods
/// 2π/(L+π) and 2π/(L-π); it is periodic iff their ratio (L-π)/(L+π) is
/// rational, i.e. iff l is rational.
pub fn rationality_check(l: &LinkLength) -> RationalityReport {
    match l {
        LinkLength::Rational { num: p, den: q } => {
            let rn = p - q;
            let rd = p + q;
            let g = gcd(rn, rd).max(1);
            let ratio = (rn / g, rd / g);
            // Component periods in ω: 2q/(p+q) and (for l != 1) 2q/(p-q);
            // lcm(a/b, c/d) = lcm(a,c)/gcd(b,d) on reduced fractions.
            let reduce = |n: i64, d: i64| {
                let g = gcd(n, d).max(1);
                (n / g, d / g)
            };
            let (a1, b1) = reduce(2 * q, p + q);
            let period = if rn == 0 {
                (a1, b1)
            } else {
                let (a2, b2) = reduce(2 * q, (p - q).abs());
                let lcm_num = a1 / gcd(a1, a2).max(1) * a2;
                (lcm_num, gcd(b1, b2).max(1))
            };
            RationalityReport {
                l_label: if *q == 1 {
                    format!("{p}")
                } else {
                    format!("{p}/{q}")
                },
                l_value: *p as f64 / *q as f64,
                ratio: Some(ratio),
                ratio_value: ratio.0 as f64 / ratio.1 as f64,
                periodic: true,
                period_omega: Some(reduce(period.0, period.1)),
            }
        }
        LinkLength::Irrational { value, label } => RationalityReport {
            l_label: label.clone(),
            l_value: *value,
            ratio: None,
            ratio_value: (value - 1.0) / (value + 1.0),
            periodic: false,
            period_omega: None,
        },
    }
}

impl RationalityReport {
    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: u32,
            l: &'a str,
            l_value: Sig,
            ratio: Option<String>,
            ratio_value: Sig,
            periodic: bool,
            trace_period_omega: Option<String>,
        }
        let fmt_frac = |(n, d): (i64, i64)| {
            if d == 1 {
                format!("{n}")
            } else {
                format!("{n}/{d}")
            }
        };
        serde_json::to_string_pretty(&Doc {
            schema: 1,
            l: &self.l_label,
            l_value: Sig(self.l_value),
            ratio: self.ratio.map(fmt_frac),
            ratio_value: Sig(self.ratio_value),
            periodic: self.periodic,
            trace_period_omega: self.period_omega.map(fmt_frac),
        })
        .expect("report serialization")
    }
}
