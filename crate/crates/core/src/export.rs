//! Deterministic CSV rendering: every number in shortest round-trip
//! scientific notation, `,` separators and `\n` line endings.

use std::fmt::Write;

use crate::domain::Field;
use crate::dynamics::Trajectory;
use crate::experiments::FrontTrace;
use crate::scalar::Scalar;
use crate::speeds::CurvePoint;

/// Formats `v` so that parsing the text gives back exactly `v`.
pub fn format_number<T: Scalar>(v: T) -> String {
    format!("{v:e}")
}

/// CSV with `header` and one line per row.
pub fn csv<T: Scalar>(header: &[&str], rows: impl IntoIterator<Item = Vec<T>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{v:e}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

fn coord_header(dim: usize) -> Vec<&'static str> {
    if dim == 2 {
        vec!["x", "y"]
    } else {
        vec!["x"]
    }
}

/// Columns `x[, y], u`.
pub fn profile_csv<T: Scalar>(u: &Field<T>) -> String {
    let hab = u.habitat();
    let mut header = coord_header(hab.dim());
    header.push("u");
    let rows = u.values().iter().enumerate().map(|(i, &v)| {
        let x = hab.coords(i);
        let mut row = x[..hab.dim()].to_vec();
        row.push(v);
        row
    });
    csv(&header, rows)
}

/// Columns `t, x[, y], u`, one line per recorded time and grid point.
pub fn trajectory_csv<T: Scalar>(traj: &Trajectory<T>) -> String {
    let hab = &traj.habitat;
    let mut header = vec!["t"];
    header.extend(coord_header(hab.dim()));
    header.push("u");
    let rows = traj.times.iter().zip(&traj.snapshots).flat_map(|(&t, u)| {
        u.values().iter().enumerate().map(move |(i, &v)| {
            let x = hab.coords(i);
            let mut row = vec![t];
            row.extend_from_slice(&x[..hab.dim()]);
            row.push(v);
            row
        })
    });
    csv(&header, rows)
}

/// Columns `t, position`.
pub fn front_csv<T: Scalar>(trace: &FrontTrace<T>) -> String {
    let rows = trace
        .times
        .iter()
        .zip(&trace.positions)
        .map(|(&t, &p)| vec![t, p]);
    csv(&["t", "position"], rows)
}

/// Columns `mu, lambda, ratio`.
pub fn curve_csv<T: Scalar>(points: &[CurvePoint<T>]) -> String {
    csv(
        &["mu", "lambda", "ratio"],
        points.iter().map(|p| vec![p.mu, p.lambda, p.ratio]),
    )
}
