//! File emission: CSV (LF line endings, 17 significant digits), legacy VTK
//! polydata, and pretty JSON. Files are written to a temporary name and renamed.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::domain::ScalarField;
use crate::error::{Error, Result};

/// `{:.16e}`: 17 significant digits, round-trips every finite `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Writes `bytes` to `path` via a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// CSV text with a header row and pre-formatted fields.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// `x,y,u` per interior node, in lattice order.
pub fn field_csv(u: &ScalarField) -> Result<String> {
    let rows = u
        .grid
        .nodes()
        .iter()
        .zip(&u.values)
        .map(|(n, v)| vec![fmt_f64(n.x), fmt_f64(n.y), fmt_f64(*v)]);
    csv_string(&["x", "y", "u"], rows)
}

/// `s,x,y,u` per boundary intersection point, sorted by `s`.
pub fn trace_csv(u: &ScalarField) -> Result<String> {
    let mut idx: Vec<usize> = (0..u.trace.len()).collect();
    let pts = u.grid.boundary_points();
    idx.sort_by(|&a, &b| pts[a].s.total_cmp(&pts[b].s));
    let rows = idx.into_iter().map(|k| {
        vec![
            fmt_f64(pts[k].s),
            fmt_f64(pts[k].x),
            fmt_f64(pts[k].y),
            fmt_f64(u.trace[k]),
        ]
    });
    csv_string(&["s", "x", "y", "u"], rows)
}

/// Legacy ASCII VTK 3.0 polydata: the nodes lifted to `(x, y, u)`, one quad
/// per lattice cell whose four corners are all interior nodes.
pub fn field_vtk(u: &ScalarField, title: &str) -> String {
    let nodes = u.grid.nodes();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&title.replace('\n', " "));
    out.push_str("\nASCII\nDATASET POLYDATA\n");
    out.push_str(&format!("POINTS {} double\n", nodes.len()));
    for (n, v) in nodes.iter().zip(&u.values) {
        out.push_str(&format!("{} {} {}\n", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(*v)));
    }
    let mut quads = Vec::new();
    for (k, n) in nodes.iter().enumerate() {
        let corners = [
            Some(k),
            u.grid.node_at(n.i + 1, n.j),
            u.grid.node_at(n.i + 1, n.j + 1),
            u.grid.node_at(n.i, n.j + 1),
        ];
        if let [Some(a), Some(b), Some(c), Some(d)] = corners {
            quads.push([a, b, c, d]);
        }
    }
    out.push_str(&format!("POLYGONS {} {}\n", quads.len(), 5 * quads.len()));
    for q in &quads {
        out.push_str(&format!("4 {} {} {} {}\n", q[0], q[1], q[2], q[3]));
    }
    out.push_str(&format!(
        "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default\n",
        nodes.len()
    ));
    for v in &u.values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
