use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point2;

use super::{edge_key, midpoint, signed_area, GeometryError};

/// A boundary edge of the background triangulation together with its tag.
///
/// After validation the node pair is oriented so that the domain lies to the
/// left, i.e. the edge follows the counterclockwise orientation of the
/// triangle that owns it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: String,
}

/// Triangular background mesh: the node set of the meshfree discretization
/// plus the connectivity used to build integration cells.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundMesh {
    nodes: Vec<Point2<f64>>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl BackgroundMesh {
    /// Validates and builds a mesh.
    ///
    /// Triangles must be counterclockwise with strictly positive area. The
    /// boundary edge list must coincide with the set of triangle edges that
    /// have exactly one incident triangle.
    pub fn new(
        nodes: Vec<Point2<f64>>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, GeometryError> {
        let n = nodes.len();
        if triangles.is_empty() {
            return Err(GeometryError::InvalidMesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(GeometryError::InvalidMesh(format!(
                    "triangle {t} references a node outside 0..{n}"
                )));
            }
            let area = signed_area(&nodes[tri[0]], &nodes[tri[1]], &nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(GeometryError::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }

        // Oriented edges owned by each triangle; an edge seen twice is interior.
        let mut owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                owners.entry(edge_key(a, b)).or_default().push((a, b));
            }
        }
        if let Some((key, _)) = owners.iter().find(|(_, v)| v.len() > 2) {
            return Err(GeometryError::InvalidMesh(format!(
                "edge {}-{} is shared by more than two triangles",
                key.0, key.1
            )));
        }

        let mut seen = BTreeSet::new();
        let mut oriented = Vec::with_capacity(boundary_edges.len());
        for edge in boundary_edges {
            let [a, b] = edge.nodes;
            if a >= n || b >= n {
                return Err(GeometryError::InvalidMesh(format!(
                    "boundary edge {a}-{b} references a node outside 0..{n}"
                )));
            }
            let key = edge_key(a, b);
            if !seen.insert(key) {
                return Err(GeometryError::InvalidMesh(format!(
                    "boundary edge {a}-{b} listed twice"
                )));
            }
            match owners.get(&key).map(Vec::as_slice) {
                Some([owned]) => oriented.push(BoundaryEdge {
                    nodes: [owned.0, owned.1],
                    tag: edge.tag,
                }),
                Some(_) => {
                    return Err(GeometryError::InvalidMesh(format!(
                        "boundary edge {a}-{b} is interior to the triangulation"
                    )))
                }
                None => {
                    return Err(GeometryError::InvalidMesh(format!(
                        "boundary edge {a}-{b} is not an edge of any triangle"
                    )))
                }
            }
        }
        let free_edges = owners.values().filter(|v| v.len() == 1).count();
        if free_edges != oriented.len() {
            return Err(GeometryError::InvalidMesh(format!(
                "{} free triangle edges but {} boundary edges listed; the boundary must be closed and fully tagged",
                free_edges,
                oriented.len()
            )));
        }

        Ok(Self {
            nodes,
            triangles,
            boundary_edges: oriented,
        })
    }

    pub fn nodes(&self) -> &[Point2<f64>] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point2<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Total area of the triangulation.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_vertices(t);
                signed_area(&a, &b, &c)
            })
            .sum()
    }

    /// Distinct boundary tags in sorted order.
    pub fn tags(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.boundary_edges.iter().map(|e| e.tag.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    /// Sorted node indices touched by edges carrying `tag`.
    pub fn tagged_nodes(&self, tag: &str) -> Result<Vec<usize>, GeometryError> {
        let set: BTreeSet<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        if set.is_empty() {
            return Err(GeometryError::UnknownTag(tag.to_owned()));
        }
        Ok(set.into_iter().collect())
    }

    /// Whether each node lies on the boundary.
    pub fn boundary_node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            mask[e.nodes[0]] = true;
            mask[e.nodes[1]] = true;
        }
        mask
    }

    /// Unique undirected edges as sorted pairs, in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3])))
            .collect();
        set.into_iter().collect()
    }

    /// Mean length of the mesh edges incident to each node.
    pub fn mean_incident_edge_length(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.nodes.len()];
        let mut count = vec![0usize; self.nodes.len()];
        for (a, b) in self.edges() {
            let len = (self.nodes[a] - self.nodes[b]).norm();
            sum[a] += len;
            sum[b] += len;
            count[a] += 1;
            count[b] += 1;
        }
        sum.iter()
            .zip(&count)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect()
    }

    /// Midpoint of a boundary edge, handy for tag classification.
    pub fn boundary_edge_midpoint(&self, e: &BoundaryEdge) -> Point2<f64> {
        midpoint(&self.nodes[e.nodes[0]], &self.nodes[e.nodes[1]])
    }

    /// Parses the plain-text mesh format.
    ///
    /// ```text
    /// nodes N
    /// x y            (N lines)
    /// triangles T
    /// i j k          (T lines, 0-based)
    /// boundary B
    /// i j tag        (B lines)
    /// ```
    /// Anything after `#` on a line is ignored.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut reader = Reader::new(text);
        let n = reader.header("nodes")?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, fields) = reader.record("node")?;
            let [x, y] = parse_fields::<f64, 2>(ln, &fields, "node coordinates `x y`")?;
            if !x.is_finite() || !y.is_finite() {
                return Err(GeometryError::Parse {
                    line: ln,
                    message: "node coordinates must be finite".into(),
                });
            }
            nodes.push(Point2::new(x, y));
        }
        let t = reader.header("triangles")?;
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let (ln, fields) = reader.record("triangle")?;
            triangles.push(parse_fields::<usize, 3>(ln, &fields, "triangle `i j k`")?);
        }
        let b = reader.header("boundary")?;
        let mut boundary = Vec::with_capacity(b);
        for _ in 0..b {
            let (ln, fields) = reader.record("boundary edge")?;
            if fields.len() != 3 {
                return Err(GeometryError::Parse {
                    line: ln,
                    message: "expected boundary edge `i j tag`".into(),
                });
            }
            let [i, j] = parse_fields::<usize, 2>(ln, &fields[..2], "boundary edge `i j tag`")?;
            boundary.push(BoundaryEdge {
                nodes: [i, j],
                tag: fields[2].to_owned(),
            });
        }
        if let Some((ln, _)) = reader.next_line() {
            return Err(GeometryError::Parse {
                line: ln,
                message: "unexpected content after the boundary section".into(),
            });
        }
        Self::new(nodes, triangles, boundary)
    }

    /// Serializes to the plain-text format. Coordinates use 17 significant
    /// digits so that a parse of the output reproduces the mesh exactly.
    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(out, "{:.16e} {:.16e}", p.x, p.y);
        }
        let _ = writeln!(out, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(out, "boundary {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.tag);
        }
        out
    }

    pub fn read_file(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

struct Reader<'a> {
    lines: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: Box::new(
                text.lines()
                    .enumerate()
                    .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                    .filter(|(_, l)| !l.is_empty()),
            ),
        }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.lines.next()
    }

    fn header(&mut self, name: &str) -> Result<usize, GeometryError> {
        let (ln, line) = self.next_line().ok_or_else(|| GeometryError::Parse {
            line: 0,
            message: format!("missing `{name}` header"),
        })?;
        let mut it = line.split_whitespace();
        match (it.next(), it.next().map(str::parse::<usize>), it.next()) {
            (Some(n), Some(Ok(count)), None) if n == name => Ok(count),
            _ => Err(GeometryError::Parse {
                line: ln,
                message: format!("expected `{name} <count>`"),
            }),
        }
    }

    fn record(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), GeometryError> {
        let (ln, line) = self.next_line().ok_or_else(|| GeometryError::Parse {
            line: 0,
            message: format!("file ended while reading a {what}"),
        })?;
        Ok((ln, line.split_whitespace().collect()))
    }
}

fn parse_fields<T: std::str::FromStr, const N: usize>(
    line: usize,
    fields: &[&str],
    expected: &str,
) -> Result<[T; N], GeometryError> {
    let err = || GeometryError::Parse {
        line,
        message: format!("expected {expected}"),
    };
    if fields.len() != N {
        return Err(err());
    }
    let parsed: Vec<T> = fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|_| err()))
        .collect::<Result<_, _>>()?;
    parsed.try_into().map_err(|_| err())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_text() -> &'static str {
        "# two triangles\n\
         nodes 4\n0 0\n1 0\n1 1\n0 1\n\
         triangles 2\n0 1 2\n0 2 3\n\
         boundary 4\n0 1 bottom\n1 2 right\n2 3 top\n3 0 left # closing\n"
    }

    #[test]
    fn parses_unit_square() {
        let mesh = BackgroundMesh::parse(unit_square_text()).unwrap();
        assert_eq!(mesh.node_count(), 4);
        assert_eq!(mesh.triangles().len(), 2);
        assert_eq!(mesh.tags(), vec!["bottom", "left", "right", "top"]);
        assert!((mesh.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_text() {
        let mesh = BackgroundMesh::parse(unit_square_text()).unwrap();
        let again = BackgroundMesh::parse(&mesh.to_text("header line")).unwrap();
        assert_eq!(mesh, again);
    }

    #[test]
    fn boundary_edges_are_reoriented_counterclockwise() {
        let text = unit_square_text().replace("0 1 bottom", "1 0 bottom");
        let mesh = BackgroundMesh::parse(&text).unwrap();
        let bottom = mesh.boundary_edges().iter().find(|e| e.tag == "bottom").unwrap();
        assert_eq!(bottom.nodes, [0, 1]);
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let text = unit_square_text().replace("0 1 2", "0 2 1");
        assert!(matches!(
            BackgroundMesh::parse(&text),
            Err(GeometryError::InvalidMesh(_))
        ));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let text = unit_square_text().replace("0 2 3", "0 2 7");
        assert!(BackgroundMesh::parse(&text).is_err());
    }

    #[test]
    fn rejects_open_boundary() {
        let text = unit_square_text()
            .replace("boundary 4", "boundary 3")
            .replace("3 0 left # closing\n", "");
        assert!(matches!(
            BackgroundMesh::parse(&text),
            Err(GeometryError::InvalidMesh(_))
        ));
    }

    #[test]
    fn rejects_interior_edge_tagged_as_boundary() {
        let text = unit_square_text()
            .replace("boundary 4", "boundary 5")
            .replace("3 0 left", "3 0 left\n0 2 diag");
        assert!(BackgroundMesh::parse(&text).is_err());
    }

    #[test]
    fn reports_line_of_malformed_record() {
        let text = unit_square_text().replace("1 1\n", "1 one\n");
        match BackgroundMesh::parse(&text) {
            Err(GeometryError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tagged_nodes_and_unknown_tag() {
        let mesh = BackgroundMesh::parse(unit_square_text()).unwrap();
        assert_eq!(mesh.tagged_nodes("top").unwrap(), vec![2, 3]);
        assert!(matches!(
            mesh.tagged_nodes("nope"),
            Err(GeometryError::UnknownTag(_))
        ));
    }

    #[test]
    fn mean_incident_edge_length_on_square() {
        let mesh = BackgroundMesh::parse(unit_square_text()).unwrap();
        let h = mesh.mean_incident_edge_length();
        let d = 2f64.sqrt();
        assert!((h[0] - (2.0 + d) / 3.0).abs() < 1e-15);
        assert!((h[1] - 1.0).abs() < 1e-15);
    }
}
