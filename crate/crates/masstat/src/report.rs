//! CSV and SVG emission for schedules, traces, profiles and comparisons.
//!
//! All numeric columns are formatted with six decimal places, so identical
//! inputs produce byte-identical files.

use crate::control::Schedule;
use crate::estimates::{
    first_term_switch_time, higher_order_gaps, higher_order_switch_time, EstimateParams,
};
use crate::fdm::ProfileSnapshot;
use crate::model::{Phase, TraceRecord};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("schedules share only {common} switches; at least 3 are needed to compare")]
    IndexMismatch { common: usize },
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

/// Writes the switch table `n,t_n,gap,mass_at_switch,phase_ended`.
/// An empty schedule produces a header-only file.
pub fn emit_switch_table<W: Write>(schedule: &Schedule, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "n,t_n,gap,mass_at_switch,phase_ended")?;
    for event in &schedule.events {
        writeln!(
            sink,
            "{},{},{},{},{}",
            event.n,
            num(event.t),
            num(event.gap),
            num(event.mass_at_switch),
            event.ended_phase.label()
        )?;
    }
    Ok(())
}

/// Writes the run trace `t,mass,phase,u_center`.
pub fn emit_trace<W: Write>(records: &[TraceRecord], sink: &mut W) -> io::Result<()> {
    writeln!(sink, "t,mass,phase,u_center")?;
    for record in records {
        writeln!(
            sink,
            "{},{},{},{}",
            num(record.t),
            num(record.mass),
            record.phase.label(),
            num(record.center_value)
        )?;
    }
    Ok(())
}

/// Writes profile snapshots in long format `stage,t,x,u`, one row per node.
pub fn emit_profiles<W: Write>(snapshots: &[ProfileSnapshot], sink: &mut W) -> io::Result<()> {
    writeln!(sink, "stage,t,x,u")?;
    for snapshot in snapshots {
        let h = 1.0 / (snapshot.values.len() - 1) as f64;
        for (j, value) in snapshot.values.iter().enumerate() {
            writeln!(
                sink,
                "{},{},{},{}",
                snapshot.stage,
                num(snapshot.t),
                num(j as f64 * h),
                num(*value)
            )?;
        }
    }
    Ok(())
}

/// Mean of the late-half gaps that ended the given phase, if any.
fn late_gap_mean(schedule: &Schedule, phase: Phase) -> Option<f64> {
    let start = schedule.events.len() / 2;
    let gaps: Vec<f64> = schedule.events[start..]
        .iter()
        .filter(|event| event.ended_phase == phase)
        .map(|event| event.gap)
        .collect();
    if gaps.is_empty() {
        None
    } else {
        Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
    }
}

fn opt_num(value: Option<f64>) -> String {
    value.map(num).unwrap_or_default()
}

/// Writes the side-by-side comparison of switch times.
///
/// Per-index rows align t_n from the finite-difference run, the spectral
/// run and both closed-form estimates, with the absolute and relative
/// deviation of the spectral times from the finite-difference ones. Two
/// summary rows report late-time mean gaps per method for the charging (up)
/// and discharging (down) stages. The first-term column is left blank when
/// the symmetric closed form does not apply (alpha outside (0, 1/2)).
pub fn compare_report<W: Write>(
    analytic: &Schedule,
    fdm: &Schedule,
    est: &EstimateParams,
    sink: &mut W,
) -> Result<(), ReportError> {
    let common = analytic.events.len().min(fdm.events.len());
    if common < 3 {
        return Err(ReportError::IndexMismatch { common });
    }
    let diffusivity = fdm.params.diffusivity;

    writeln!(
        sink,
        "row,n,t_fdm,t_analytic,t_higher_order,t_first_term,abs_dev,rel_dev"
    )?;
    for i in 0..common {
        let n = i + 1;
        let t_fdm = fdm.events[i].t;
        let t_analytic = analytic.events[i].t;
        let t_higher = higher_order_switch_time(n, est, diffusivity);
        let t_first = first_term_switch_time(n, est.alpha, diffusivity).ok();
        let dev = (t_analytic - t_fdm).abs();
        writeln!(
            sink,
            "switch,{},{},{},{},{},{},{}",
            n,
            num(t_fdm),
            num(t_analytic),
            num(t_higher),
            opt_num(t_first),
            num(dev),
            num(dev / t_fdm)
        )?;
    }

    let (down_est, up_est) = match higher_order_gaps(est, diffusivity) {
        Ok(gaps) => (Some(gaps.0), Some(gaps.1)),
        Err(_) => (None, None),
    };
    let first_gap = crate::estimates::first_term_gap(est.alpha, diffusivity).ok();
    for (label, phase, est_gap) in [
        ("late_gap_mean_up", Phase::Charging, up_est),
        ("late_gap_mean_down", Phase::Discharging, down_est),
    ] {
        let fdm_gap = late_gap_mean(fdm, phase);
        let analytic_gap = late_gap_mean(analytic, phase);
        let dev = match (fdm_gap, analytic_gap) {
            (Some(f), Some(a)) => Some((a - f).abs()),
            _ => None,
        };
        let rel = match (dev, fdm_gap) {
            (Some(d), Some(f)) if f != 0.0 => Some(d / f),
            _ => None,
        };
        writeln!(
            sink,
            "{},,{},{},{},{},{},{}",
            label,
            opt_num(fdm_gap),
            opt_num(analytic_gap),
            opt_num(est_gap),
            opt_num(first_gap),
            opt_num(dev),
            opt_num(rel)
        )?;
    }
    Ok(())
}

/// Renders the trace as a minimal standalone SVG: mass and center value as
/// polylines over time, with labeled axis ticks.
pub fn render_trace_svg<W: Write>(records: &[TraceRecord], sink: &mut W) -> io::Result<()> {
    const WIDTH: f64 = 800.0;
    const HEIGHT: f64 = 480.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 40.0;

    let t_max = records.last().map_or(1.0, |record| record.t).max(1e-12);
    let y_max = records
        .iter()
        .flat_map(|record| [record.mass, record.center_value])
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let x_of = |t: f64| LEFT + t / t_max * (WIDTH - LEFT - RIGHT);
    let y_of = |v: f64| HEIGHT - BOTTOM - v / y_max * (HEIGHT - TOP - BOTTOM);

    writeln!(
        sink,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"11\">"
    )?;
    writeln!(
        sink,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    )?;
    // axes
    writeln!(
        sink,
        "<line x1=\"{LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM
    )?;
    writeln!(
        sink,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - BOTTOM
    )?;
    for i in 0..=5 {
        let frac = i as f64 / 5.0;
        let t = frac * t_max;
        let x = x_of(t);
        writeln!(
            sink,
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>",
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0
        )?;
        writeln!(
            sink,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{t:.3}</text>",
            HEIGHT - BOTTOM + 18.0
        )?;
        let v = frac * y_max;
        let y = y_of(v);
        writeln!(
            sink,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            LEFT - 5.0
        )?;
        writeln!(
            sink,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{v:.3}</text>",
            LEFT - 8.0,
            y + 4.0
        )?;
    }
    for (values, color, label, label_y) in [
        (
            records
                .iter()
                .map(|record| (record.t, record.mass))
                .collect::<Vec<_>>(),
            "steelblue",
            "mass",
            TOP + 12.0,
        ),
        (
            records
                .iter()
                .map(|record| (record.t, record.center_value))
                .collect::<Vec<_>>(),
            "firebrick",
            "u(1/2)",
            TOP + 28.0,
        ),
    ] {
        let points: Vec<String> = values
            .iter()
            .map(|(t, v)| format!("{:.2},{:.2}", x_of(*t), y_of(*v)))
            .collect();
        writeln!(
            sink,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        )?;
        writeln!(
            sink,
            "<text x=\"{}\" y=\"{label_y}\" fill=\"{color}\">{label}</text>",
            WIDTH - RIGHT - 70.0
        )?;
    }
    writeln!(sink, "</svg>")?;
    Ok(())
}
