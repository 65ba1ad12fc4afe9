//! Standalone matplotlib script emission for the CSV outputs.

use std::fmt::Write as _;

/// Script plotting `lambda,trace,class` with ±2 guides and optional
/// markers at the harmonic points λ_m = m²ω² - α for ω = k/2, α = ω².
pub fn trace_script(csv: &str, mark_k: Option<u32>, lambda_max: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "#!/usr/bin/env python3\n\
         import csv\n\
         import matplotlib.pyplot as plt\n\n\
         lam, tr = [], []\n\
         with open({csv:?}) as f:\n\
         \u{20}   for row in csv.DictReader(f):\n\
         \u{20}       lam.append(float(row['lambda']))\n\
         \u{20}       tr.append(float(row['trace']))\n\n\
         fig, ax = plt.subplots(figsize=(8, 4.5))\n\
         ax.plot(lam, tr, lw=1.2, color='tab:blue', label='tr M(lambda)')\n\
         ax.axhline(2.0, color='red', lw=0.8)\n\
         ax.axhline(-2.0, color='red', lw=0.8)"
    );
    if let Some(k) = mark_k {
        let omega = k as f64 / 2.0;
        let alpha = omega * omega;
        let mut marks = Vec::new();
        let mut m = 1u32;
        loop {
            let lam = (m as f64 * omega).powi(2) - alpha;
            if lam > lambda_max {
                break;
            }
            marks.push(format!("{lam:.12}"));
            m += 2;
        }
        let _ = writeln!(
            s,
            "for x in [{}]:\n\
             \u{20}   ax.axvline(x, color='green', lw=0.8, ls='--')",
            marks.join(", ")
        );
    }
    let _ = writeln!(
        s,
        "ax.set_xlabel('lambda')\n\
         ax.set_ylabel('trace')\n\
         ax.legend()\n\
         fig.tight_layout()\n\
         plt.show()"
    );
    s
}

/// Script plotting a `x,u,uprime,cell,segment` profile with vertex lines.
pub fn profile_script(csv: &str, vertices: &[f64]) -> String {
    let marks: Vec<String> = vertices.iter().map(|v| format!("{v:.12}")).collect();
    format!(
        "#!/usr/bin/env python3\n\
         import csv\n\
         import matplotlib.pyplot as plt\n\n\
         x, u = [], []\n\
         with open({csv:?}) as f:\n\
         \u{20}   for row in csv.DictReader(f):\n\
         \u{20}       x.append(float(row['x']))\n\
         \u{20}       u.append(float(row['u']))\n\n\
         fig, ax = plt.subplots(figsize=(8, 4.5))\n\
         ax.plot(x, u, lw=1.2)\n\
         for v in [{}]:\n\
         \u{20}   ax.axvline(v, color='gray', lw=0.5, alpha=0.5)\n\
         ax.set_xlabel('x')\n\
         ax.set_ylabel('u')\n\
         fig.tight_layout()\n\
         plt.show()\n",
        marks.join(", ")
    )
}

/// Script rendering `t,x,u` snapshots as a space-time heat map.
pub fn spacetime_script(csv: &str) -> String {
    format!(
        "#!/usr/bin/env python3\n\
         import csv\n\
         import numpy as np\n\
         import matplotlib.pyplot as plt\n\n\
         ts, xs, us = [], [], []\n\
         with open({csv:?}) as f:\n\
         \u{20}   for row in csv.DictReader(f):\n\
         \u{20}       ts.append(float(row['t']))\n\
         \u{20}       xs.append(float(row['x']))\n\
         \u{20}       us.append(float(row['u']))\n\n\
         t_vals = sorted(set(ts))\n\
         x_vals = sorted(set(xs))\n\
         grid = np.full((len(t_vals), len(x_vals)), np.nan)\n\
         ti = {{t: i for i, t in enumerate(t_vals)}}\n\
         xi = {{x: i for i, x in enumerate(x_vals)}}\n\
         for t, x, u in zip(ts, xs, us):\n\
         \u{20}   grid[ti[t], xi[x]] = u\n\n\
         fig, ax = plt.subplots(figsize=(8, 4.5))\n\
         im = ax.imshow(grid, aspect='auto', origin='lower',\n\
         \u{20}              extent=[x_vals[0], x_vals[-1], t_vals[0], t_vals[-1]],\n\
         \u{20}              cmap='RdBu_r')\n\
         fig.colorbar(im, ax=ax, label='u')\n\
         ax.set_xlabel('x')\n\
         ax.set_ylabel('t')\n\
         fig.tight_layout()\n\
         plt.show()\n"
    )
}
