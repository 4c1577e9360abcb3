use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde_json::Value;

use nived_core::BackgroundMesh;

use crate::config::RunConfig;

/// Comment header lines (without the comment marker): version, then the
/// resolved configuration as TOML.
pub fn header_lines(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("nived {}", nived_core::VERSION)];
    lines.extend(config.to_toml().lines().map(str::to_owned));
    lines
}

pub fn comment_header(config: &RunConfig) -> String {
    header_lines(config).iter().map(|l| format!("# {l}\n")).collect()
}

/// 17 significant digits in scientific notation, enough to round-trip.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// Writes a CSV file: the comment header, then `columns`, then `rows`.
pub fn write_csv(path: &Path, config: &RunConfig, columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = comment_header(config).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    fs::write(path, out)
}

/// Writes `summary.json` with `version` and `config` ahead of `body`.
pub fn write_summary(dir: &Path, config: &RunConfig, body: Value) -> std::io::Result<PathBuf> {
    let mut doc = serde_json::Map::new();
    doc.insert("version".into(), Value::String(nived_core::VERSION.into()));
    doc.insert("config".into(), serde_json::to_value(config).map_err(std::io::Error::other)?);
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_mesh(path: &Path, config: &RunConfig, mesh: &BackgroundMesh) -> std::io::Result<()> {
    fs::write(path, mesh.to_text(&header_lines(config).join("\n")))
}

/// Point data attached to a VTK file.
pub enum PointData<'a> {
    /// Interleaved `(x, y)` per node, written as 3D vectors with zero z.
    Vector(&'a str, &'a [f64]),
    /// Voigt triple per node, written as a 3-component scalar.
    Voigt(&'a str, &'a [Vector3<f64>]),
}

/// Percent-encodes whitespace, `%` and non-printable bytes, as the legacy
/// format expects inside string arrays.
fn vtk_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for b in text.bytes() {
        if b.is_ascii_graphic() && b != b'%' {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

/// Legacy ASCII `UNSTRUCTURED_GRID` of the background triangles.
///
/// The title line carries the version and command. The title is limited to
/// 256 characters, so the full configuration goes into a `config` string
/// array of the dataset field data.
pub fn write_vtk(path: &Path, config: &RunConfig, mesh: &BackgroundMesh, data: &[PointData]) -> std::io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let title = format!(
        "nived {} {} {}",
        nived_core::VERSION,
        serde_json::to_value(config.command).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
        config.benchmark
    );
    let _ = writeln!(s, "{}", &title[..title.len().min(255)]);
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "FIELD FieldData 1");
    let _ = writeln!(s, "config 1 1 string");
    let _ = writeln!(s, "{}", vtk_escape(&header_lines(config).join("\n")));

    let nodes = mesh.nodes();
    let _ = writeln!(s, "POINTS {} double", nodes.len());
    for p in nodes {
        let _ = writeln!(s, "{} {} 0", float(p.x), float(p.y));
    }
    let tris = mesh.triangles();
    let _ = writeln!(s, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", tris.len());
    for _ in tris {
        let _ = writeln!(s, "5");
    }
    if !data.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", nodes.len());
    }
    for d in data {
        match d {
            PointData::Vector(name, values) => {
                assert_eq!(values.len(), 2 * nodes.len(), "vector field `{name}` has the wrong length");
                let _ = writeln!(s, "VECTORS {name} double");
                for v in values.chunks_exact(2) {
                    let _ = writeln!(s, "{} {} 0", float(v[0]), float(v[1]));
                }
            }
            PointData::Voigt(name, values) => {
                assert_eq!(values.len(), nodes.len(), "field `{name}` has the wrong length");
                let _ = writeln!(s, "SCALARS {name} double 3");
                let _ = writeln!(s, "LOOKUP_TABLE default");
                for v in values.iter() {
                    let _ = writeln!(s, "{} {} {}", float(v[0]), float(v[1]), float(v[2]));
                }
            }
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(s.as_bytes())
}
