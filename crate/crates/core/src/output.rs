//! Deterministic text artifacts: trajectory CSV, profile matrices, event logs,
//! comparison reports and plot data.
//!
//! Floats are written with Rust's shortest round-trip scientific formatting,
//! so identical runs give byte-identical files.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::passive::{ComparisonReport, RunSummary};
use crate::plant::SpatialGrid;
use crate::supervisor::{EventLog, RunOutput, Trajectory};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"))
}

/// Columns `t,norm,input,theta_hat,c_hat,n_modes,a_1..a_n`.
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory) -> io::Result<()> {
    let n = traj.samples.first().map_or(0, |s| s.modes.len());
    write!(w, "t,norm,input,theta_hat,c_hat,n_modes")?;
    for k in 1..=n {
        write!(w, ",a_{k}")?;
    }
    writeln!(w)?;
    for s in &traj.samples {
        write!(w, "{:e},{:e},{:e},{:e},{:e},{}", s.t, s.norm, s.input, s.theta_hat, s.c_hat, s.n_modes)?;
        for a in &s.modes {
            write!(w, ",{a:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Profile matrix: one row per recorded time, one column per grid node. The
/// header carries the node positions.
pub fn write_profiles_csv<W: Write>(w: &mut W, traj: &Trajectory, grid: &SpatialGrid) -> io::Result<()> {
    write!(w, "t")?;
    for x in grid.nodes() {
        write!(w, ",{x:e}")?;
    }
    writeln!(w)?;
    for s in &traj.samples {
        if let Some(p) = &s.profile {
            write!(w, "{:e}", s.t)?;
            for v in p {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// One `event` line per event followed by one `mode` line per identified mode.
pub fn write_event_log<W: Write>(w: &mut W, log: &EventLog) -> io::Result<()> {
    for e in &log.events {
        write!(
            w,
            "event index={} tau={:e} mu={:e} norm={:e} reason={} kind={} theta_before={:e} c_before={:e} theta_after={:e} c_after={:e} n_modes={} r={:e} omega={:e}",
            e.index,
            e.tau,
            e.mu,
            e.norm,
            e.reason.as_str(),
            e.kind.map_or("none", |k| k.as_str()),
            e.before.theta_hat,
            e.before.c_hat,
            e.after.theta_hat,
            e.after.c_hat,
            e.n_modes,
            e.r,
            e.omega,
        )?;
        if let Some(note) = &e.note {
            write!(w, " note={}", note.replace(char::is_whitespace, "_"))?;
        }
        writeln!(w)?;
        for (i, m) in e.eqs.iter().enumerate() {
            writeln!(
                w,
                "mode event={} n={} h1={:e} h2={:e} q1={:e} q2={:e} q3={:e}",
                e.index,
                i + 1,
                m.h1,
                m.h2,
                m.q1,
                m.q2,
                m.q3
            )?;
        }
    }
    Ok(())
}

/// A parsed `key=value` record with its leading tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub tag: String,
    pub fields: BTreeMap<String, String>,
}

impl Record {
    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.fields.get(key)?.parse().ok()
    }
}

/// Parses the line format written by [`write_event_log`] and [`write_report`].
pub fn parse_records(text: &str) -> Vec<Record> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split_whitespace();
            let tag = parts.next().unwrap_or_default().to_string();
            let fields = parts
                .filter_map(|kv| kv.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
                .collect();
            Record { tag, fields }
        })
        .collect()
}

fn write_summary<W: Write>(w: &mut W, tag: &str, s: &RunSummary) -> io::Result<()> {
    writeln!(
        w,
        "{tag} initial_norm={:e} peak_norm={:e} peak_time={:e} time_to_tenth={} time_to_hundredth={} final_norm={:e} final_theta_hat={:e}",
        s.initial_norm,
        s.peak_norm,
        s.peak_time,
        opt(s.time_to_tenth),
        opt(s.time_to_hundredth),
        s.final_norm,
        s.final_theta_hat
    )
}

/// Comparison report: one line per run and a `delta` line (`b − a`).
pub fn write_report<W: Write>(w: &mut W, report: &ComparisonReport) -> io::Result<()> {
    write_summary(w, "run_a", &report.a)?;
    write_summary(w, "run_b", &report.b)?;
    write!(w, "delta")?;
    for (k, v) in report.deltas() {
        write!(w, " {k}={v:e}")?;
    }
    let dt = match (report.a.time_to_tenth, report.b.time_to_tenth) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    writeln!(w, " time_to_tenth={}", opt(dt))
}

/// Plot data: `t,norm,theta_hat,c_hat`, one column group per labelled run,
/// each run on its own sample times (rows padded with empty cells).
pub fn write_plot_data<W: Write>(w: &mut W, runs: &[(&str, &RunOutput)]) -> io::Result<()> {
    let header: Vec<String> = runs
        .iter()
        .flat_map(|(l, _)| ["t", "norm", "theta_hat", "c_hat"].map(|c| format!("{l}_{c}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let rows = runs.iter().map(|(_, r)| r.trajectory.samples.len()).max().unwrap_or(0);
    for i in 0..rows {
        let cells: Vec<String> = runs
            .iter()
            .flat_map(|(_, r)| match r.trajectory.samples.get(i) {
                Some(s) => [s.t, s.norm, s.theta_hat, s.c_hat].map(|v| format!("{v:e}")),
                None => [(); 4].map(|_| String::new()),
            })
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Matplotlib script that plots every `*_norm` column (log scale) and every
/// `*_theta_hat` column of `plot_data.csv` in its own directory.
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot norm and estimate histories from plot_data.csv next to this script."""
import csv
import os
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "plot_data.csv")) as fh:
    rows = list(csv.DictReader(fh))
labels = sorted({k[: -len("_norm")] for k in rows[0] if k.endswith("_norm")})

fig, (ax_n, ax_t) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
for label in labels:
    pts = [(float(r[label + "_t"]), float(r[label + "_norm"]), float(r[label + "_theta_hat"]))
           for r in rows if r[label + "_t"]]
    t = [p[0] for p in pts]
    ax_n.semilogy(t, [p[1] for p in pts], label=label)
    ax_t.plot(t, [p[2] for p in pts], label=label)
ax_n.set_ylabel("||u[t]||")
ax_t.set_ylabel("theta_hat")
ax_t.set_xlabel("t")
ax_n.legend()
fig.tight_layout()
out = os.path.join(here, "plot.png")
fig.savefig(out, dpi=120)
if "--show" in sys.argv:
    plt.show()
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifier::{Estimates, ModeEqs, SetKind};
    use crate::supervisor::{EventRecord, Sample, TriggerReason};

    fn sample(t: f64) -> Sample {
        Sample { t, norm: 1.5, input: -0.25, theta_hat: 0.1, c_hat: 1.0, n_modes: 1, modes: vec![0.5, 0.0], profile: None }
    }

    #[test]
    fn trajectory_csv_layout() {
        let tr = Trajectory { samples: vec![sample(0.0), sample(0.1)] };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,norm,input,theta_hat,c_hat,n_modes,a_1,a_2");
        assert_eq!(lines[2], "1e-1,1.5e0,-2.5e-1,1e-1,1e0,1,5e-1,0e0");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn event_log_round_trip() {
        let e = Estimates { theta_hat: 0.1, c_hat: 1.0 };
        let log = EventLog {
            events: vec![EventRecord {
                index: 1,
                tau: 0.05,
                mu: 0.0,
                norm: 1.2,
                before: e,
                after: Estimates { theta_hat: 11.0, c_hat: 1.0 },
                kind: Some(SetKind::KnownC),
                reason: TriggerReason::Timer,
                n_modes: 19,
                r: 3.0,
                omega: 1.0,
                eqs: vec![ModeEqs { h1: 1.0, h2: 0.0, q1: 2.0, q2: 0.0, q3: 0.0, f2: 1.0 }],
                note: None,
            }],
        };
        let mut buf = Vec::new();
        write_event_log(&mut buf, &log).unwrap();
        let recs = parse_records(&String::from_utf8(buf).unwrap());
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].tag, "event");
        assert_eq!(recs[0].get_f64("theta_after"), Some(11.0));
        assert_eq!(recs[0].fields["reason"], "timer");
        assert_eq!(recs[1].get_f64("q1"), Some(2.0));
    }
}
