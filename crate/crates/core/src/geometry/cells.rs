use std::collections::BTreeMap;

use nalgebra::{Point2, Vector2};
use rayon::prelude::*;

use super::{midpoint, BackgroundMesh, GeometryError};

/// One straight edge of a nodal integration cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellEdge {
    pub midpoint: Point2<f64>,
    /// Unit outward normal.
    pub normal: Vector2<f64>,
    pub length: f64,
}

/// Polygonal integration cell attached to a node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalCell {
    pub node_index: usize,
    pub node_coords: Point2<f64>,
    /// Counterclockwise polygon.
    pub vertices: Vec<Point2<f64>>,
    pub area: f64,
    pub edges: Vec<CellEdge>,
}

impl NodalCell {
    fn from_polygon(node_index: usize, node_coords: Point2<f64>, vertices: Vec<Point2<f64>>) -> Self {
        let k = vertices.len();
        let mut twice_area = 0.0;
        let mut edges = Vec::with_capacity(k);
        for i in 0..k {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            twice_area += a.x * b.y - b.x * a.y;
            let d = b - a;
            let length = d.norm();
            edges.push(CellEdge {
                midpoint: midpoint(&a, &b),
                normal: Vector2::new(d.y, -d.x) / length,
                length,
            });
        }
        Self {
            node_index,
            node_coords,
            vertices,
            area: 0.5 * twice_area,
            edges,
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }
}

/// Half of a tagged boundary edge, from a boundary node to the edge midpoint.
///
/// These coincide with the boundary edges of the nodal cells, so a traction
/// integrated over them uses the same points as the cell-edge quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfEdge {
    pub midpoint: Point2<f64>,
    pub length: f64,
}

/// Portion of a Neumann boundary represented by one node.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannSegment {
    pub node_index: usize,
    pub coords: Point2<f64>,
    /// |S|: half the summed lengths of the incident tagged edges.
    pub length: f64,
    pub tag: String,
    pub half_edges: Vec<HalfEdge>,
}

/// The set of nodal cells tiling the domain.
#[derive(Clone, Debug)]
pub struct CellPartition {
    pub cells: Vec<NodalCell>,
    /// Segments for every boundary tag of the mesh.
    pub neumann_segments: BTreeMap<String, Vec<NeumannSegment>>,
    /// Maximum cell diameter.
    pub h: f64,
    /// Characteristic nodal spacing used by the priors.
    pub h_a: Vec<f64>,
}

impl CellPartition {
    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn segments(&self, tag: &str) -> Result<&[NeumannSegment], GeometryError> {
        self.neumann_segments
            .get(tag)
            .map(Vec::as_slice)
            .ok_or_else(|| GeometryError::UnknownTag(tag.to_owned()))
    }
}

/// Builds the median-dual cells: each polygon joins the centroids of the
/// triangles around a node with the midpoints of its incident edges.
/// Boundary nodes close their polygon through the node itself.
pub fn build_nodal_cells(mesh: &BackgroundMesh) -> Result<CellPartition, GeometryError> {
    let n = mesh.node_count();
    let nodes = mesh.nodes();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            incident[v].push(t);
        }
    }
    let centroids: Vec<Point2<f64>> = mesh
        .triangles()
        .iter()
        .map(|t| Point2::from((nodes[t[0]].coords + nodes[t[1]].coords + nodes[t[2]].coords) / 3.0))
        .collect();

    let cells = (0..n)
        .into_par_iter()
        .map(|v| {
            let fan = order_fan(v, &incident[v], mesh.triangles())?;
            let xv = nodes[v];
            let mut poly = Vec::with_capacity(2 * fan.triangles.len() + 2);
            if !fan.closed {
                poly.push(xv);
            }
            for (k, &t) in fan.triangles.iter().enumerate() {
                poly.push(midpoint(&xv, &nodes[fan.next[k]]));
                poly.push(centroids[t]);
            }
            if !fan.closed {
                let last = *fan.prev.last().expect("fan is nonempty");
                poly.push(midpoint(&xv, &nodes[last]));
            }
            Ok(NodalCell::from_polygon(v, xv, poly))
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    let h = cells.iter().map(NodalCell::diameter).fold(0.0, f64::max);
    let mut neumann_segments = BTreeMap::new();
    for tag in mesh.tags() {
        let segs = build_neumann_segments(mesh, &tag)?;
        neumann_segments.insert(tag, segs);
    }
    Ok(CellPartition {
        cells,
        neumann_segments,
        h,
        h_a: mesh.mean_incident_edge_length(),
    })
}

struct Fan {
    /// Incident triangles in counterclockwise order around the node.
    triangles: Vec<usize>,
    /// For each triangle, the vertex following the node counterclockwise.
    next: Vec<usize>,
    /// For each triangle, the vertex preceding the node.
    prev: Vec<usize>,
    closed: bool,
}

fn order_fan(v: usize, incident: &[usize], triangles: &[[usize; 3]]) -> Result<Fan, GeometryError> {
    if incident.is_empty() {
        return Err(GeometryError::NonManifold {
            node: v,
            reason: "node belongs to no triangle".into(),
        });
    }
    let around: Vec<(usize, usize, usize)> = incident
        .iter()
        .map(|&t| {
            let tri = triangles[t];
            let k = tri.iter().position(|&x| x == v).expect("incident triangle contains node");
            (t, tri[(k + 1) % 3], tri[(k + 2) % 3])
        })
        .collect();

    // A triangle starts the fan when no other triangle ends where it begins.
    let starts: Vec<usize> = (0..around.len())
        .filter(|&i| !around.iter().any(|o| o.2 == around[i].1))
        .collect();
    let (first, closed) = match starts.as_slice() {
        [] => (0, true),
        [s] => (*s, false),
        _ => {
            return Err(GeometryError::NonManifold {
                node: v,
                reason: format!("{} separate triangle fans meet at the node", starts.len()),
            })
        }
    };

    let mut fan = Fan {
        triangles: Vec::with_capacity(around.len()),
        next: Vec::with_capacity(around.len()),
        prev: Vec::with_capacity(around.len()),
        closed,
    };
    let mut used = vec![false; around.len()];
    let mut cur = first;
    loop {
        used[cur] = true;
        let (t, nx, pv) = around[cur];
        fan.triangles.push(t);
        fan.next.push(nx);
        fan.prev.push(pv);
        let successors: Vec<usize> = (0..around.len()).filter(|&j| around[j].1 == pv).collect();
        match successors.as_slice() {
            [] => break,
            [j] if used[*j] => break,
            [j] => cur = *j,
            _ => {
                return Err(GeometryError::NonManifold {
                    node: v,
                    reason: "an edge at the node is shared by more than two triangles".into(),
                })
            }
        }
    }
    if used.iter().any(|u| !u) {
        return Err(GeometryError::NonManifold {
            node: v,
            reason: "incident triangles do not form a single fan".into(),
        });
    }
    Ok(fan)
}

/// Nodal lengths of influence along the edges tagged `tag`.
pub fn build_neumann_segments(mesh: &BackgroundMesh, tag: &str) -> Result<Vec<NeumannSegment>, GeometryError> {
    let nodes = mesh.nodes();
    let mut by_node: BTreeMap<usize, Vec<HalfEdge>> = BTreeMap::new();
    for e in mesh.boundary_edges().iter().filter(|e| e.tag == tag) {
        let [a, b] = e.nodes;
        let m = midpoint(&nodes[a], &nodes[b]);
        for (v, _) in [(a, b), (b, a)] {
            let xv = nodes[v];
            by_node.entry(v).or_default().push(HalfEdge {
                midpoint: midpoint(&xv, &m),
                length: (m - xv).norm(),
            });
        }
    }
    if by_node.is_empty() {
        return Err(GeometryError::UnknownTag(tag.to_owned()));
    }
    Ok(by_node
        .into_iter()
        .map(|(v, half_edges)| NeumannSegment {
            node_index: v,
            coords: nodes[v],
            length: half_edges.iter().map(|h| h.length).sum(),
            tag: tag.to_owned(),
            half_edges,
        })
        .collect())
}
