use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Point2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{edge_key, signed_area, BackgroundMesh, BoundaryEdge, GeometryError};

/// Parametric description of the domains used by the benchmarks.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Axis-aligned rectangle. Tags: `bottom`, `right`, `top`, `left`.
    Rectangle { origin: [f64; 2], width: f64, height: f64 },
    /// Quarter annulus in the first quadrant centred at the origin.
    /// Tags: `inner`, `outer`, `bottom` (y = 0), `left` (x = 0).
    QuarterAnnulus { inner_radius: f64, outer_radius: f64 },
    /// L-shaped domain `[0, 2a]^2 \ (a, 2a]^2` with leg width `a`.
    /// Tags: `bottom`, `right` (x = 2a), `notch_h` (y = a), `notch_v` (x = a),
    /// `top` (y = 2a), `left`.
    LShape { leg: f64 },
    /// Square `[0, side]^2` minus the quarter disk of radius `hole_radius`
    /// at the origin. Tags: `hole`, `bottom`, `right`, `top`, `left`.
    PlateWithHole { hole_radius: f64, side: f64 },
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        Self::Rectangle {
            origin: [0.0, 0.0],
            width: 1.0,
            height: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Self::Rectangle { width, height, .. } => width * height,
            Self::QuarterAnnulus {
                inner_radius,
                outer_radius,
            } => FRAC_PI_2 / 2.0 * (outer_radius.powi(2) - inner_radius.powi(2)),
            Self::LShape { leg } => 3.0 * leg * leg,
            Self::PlateWithHole { hole_radius, side } => side * side - FRAC_PI_2 / 2.0 * hole_radius.powi(2),
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let ok = match *self {
            Self::Rectangle { width, height, .. } => width > 0.0 && height > 0.0,
            Self::QuarterAnnulus {
                inner_radius,
                outer_radius,
            } => inner_radius > 0.0 && outer_radius > inner_radius,
            Self::LShape { leg } => leg > 0.0,
            Self::PlateWithHole { hole_radius, side } => hole_radius > 0.0 && side > hole_radius,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidDomain(format!("{self:?}")))
        }
    }

    /// Whether `p` lies in the closed domain (up to round-off).
    fn contains(&self, p: &Point2<f64>) -> bool {
        let tol = 1e-12;
        let in_box = |lo: f64, hi: f64, v: f64| v >= lo - tol * hi.abs().max(1.0) && v <= hi + tol * hi.abs().max(1.0);
        match *self {
            Self::Rectangle { origin, width, height } => {
                in_box(origin[0], origin[0] + width, p.x) && in_box(origin[1], origin[1] + height, p.y)
            }
            Self::QuarterAnnulus {
                inner_radius,
                outer_radius,
            } => {
                let r = p.coords.norm();
                p.x >= -tol && p.y >= -tol && r >= inner_radius * (1.0 - tol) && r <= outer_radius * (1.0 + tol)
            }
            Self::LShape { leg } => {
                in_box(0.0, 2.0 * leg, p.x) && in_box(0.0, 2.0 * leg, p.y) && !(p.x > leg && p.y > leg)
            }
            Self::PlateWithHole { hole_radius, side } => {
                in_box(0.0, side, p.x) && in_box(0.0, side, p.y) && p.coords.norm() >= hole_radius * (1.0 - tol)
            }
        }
    }

    /// Moves a boundary point a signed distance `delta` along the boundary
    /// curve carrying `tag`: a rotation about the origin on circular arcs, a
    /// shift along `tangent` on straight sides.
    fn slide(&self, p: &Point2<f64>, tag: &str, tangent: &Vector2<f64>, delta: f64) -> Point2<f64> {
        let arc = matches!(
            (self, tag),
            (Self::QuarterAnnulus { .. }, "inner" | "outer") | (Self::PlateWithHole { .. }, "hole")
        );
        if arc {
            let (s, c) = (delta / p.coords.norm()).sin_cos();
            Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
        } else {
            p + tangent * delta
        }
    }

    /// Boundary tag for an edge whose midpoint is `m`.
    fn classify(&self, m: Point2<f64>) -> String {
        let near = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-9 * scale;
        let tag = match *self {
            Self::Rectangle { origin, width, height } => {
                let s = width.max(height);
                if near(m.y, origin[1], s) {
                    "bottom"
                } else if near(m.x, origin[0] + width, s) {
                    "right"
                } else if near(m.y, origin[1] + height, s) {
                    "top"
                } else {
                    "left"
                }
            }
            Self::QuarterAnnulus {
                inner_radius,
                outer_radius,
            } => {
                if near(m.y, 0.0, outer_radius) {
                    "bottom"
                } else if near(m.x, 0.0, outer_radius) {
                    "left"
                } else if m.coords.norm() < 0.5 * (inner_radius + outer_radius) {
                    "inner"
                } else {
                    "outer"
                }
            }
            Self::LShape { leg } => {
                let s = 2.0 * leg;
                if near(m.y, 0.0, s) {
                    "bottom"
                } else if near(m.x, 0.0, s) {
                    "left"
                } else if near(m.x, 2.0 * leg, s) {
                    "right"
                } else if near(m.y, 2.0 * leg, s) {
                    "top"
                } else if near(m.y, leg, s) {
                    "notch_h"
                } else {
                    "notch_v"
                }
            }
            Self::PlateWithHole { side, .. } => {
                if near(m.y, 0.0, side) {
                    "bottom"
                } else if near(m.x, 0.0, side) {
                    "left"
                } else if near(m.x, side, side) {
                    "right"
                } else if near(m.y, side, side) {
                    "top"
                } else {
                    "hole"
                }
            }
        };
        tag.to_owned()
    }
}

/// A logically rectangular patch of `nu x nv` quads mapped into the plane.
struct Block<F: Fn(f64, f64) -> Point2<f64>> {
    nu: usize,
    nv: usize,
    map: F,
}

/// Merges blocks into one triangulation, welding coincident nodes.
#[derive(Default)]
struct Builder {
    nodes: Vec<Point2<f64>>,
    triangles: Vec<[usize; 3]>,
    index: HashMap<(i64, i64), usize>,
    scale: f64,
}

impl Builder {
    fn new(scale: f64) -> Self {
        Self {
            scale,
            ..Default::default()
        }
    }

    fn node(&mut self, p: Point2<f64>) -> usize {
        let q = 1e-9 * self.scale;
        let key = ((p.x / q).round() as i64, (p.y / q).round() as i64);
        // Look in the neighbouring buckets too so rounding at a bucket
        // boundary cannot split a node in two.
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&i) = self.index.get(&(key.0 + dx, key.1 + dy)) {
                    if (self.nodes[i] - p).norm() <= q {
                        return i;
                    }
                }
            }
        }
        let i = self.nodes.len();
        self.nodes.push(p);
        self.index.insert(key, i);
        i
    }

    fn add_block<F: Fn(f64, f64) -> Point2<f64>>(&mut self, block: &Block<F>) {
        let mut ids = vec![0usize; (block.nu + 1) * (block.nv + 1)];
        for j in 0..=block.nv {
            for i in 0..=block.nu {
                let p = (block.map)(i as f64 / block.nu as f64, j as f64 / block.nv as f64);
                ids[j * (block.nu + 1) + i] = self.node(p);
            }
        }
        for j in 0..block.nv {
            for i in 0..block.nu {
                let p00 = ids[j * (block.nu + 1) + i];
                let p10 = ids[j * (block.nu + 1) + i + 1];
                let p01 = ids[(j + 1) * (block.nu + 1) + i];
                let p11 = ids[(j + 1) * (block.nu + 1) + i + 1];
                for mut t in [[p00, p10, p11], [p00, p11, p01]] {
                    let [a, b, c] = t.map(|k| self.nodes[k]);
                    if signed_area(&a, &b, &c) < 0.0 {
                        t.swap(1, 2);
                    }
                    self.triangles.push(t);
                }
            }
        }
    }

    fn finish(self, domain: &DomainSpec) -> Result<BackgroundMesh, GeometryError> {
        let edges = tag_free_edges(&self.nodes, &self.triangles, domain);
        BackgroundMesh::new(self.nodes, self.triangles, edges)
    }
}

fn tag_free_edges(nodes: &[Point2<f64>], triangles: &[[usize; 3]], domain: &DomainSpec) -> Vec<BoundaryEdge> {
    let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            count.entry(edge_key(a, b)).or_insert((0, [a, b])).0 += 1;
        }
    }
    let mut free: Vec<[usize; 2]> = count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect();
    free.sort_unstable();
    free.into_iter()
        .map(|[a, b]| BoundaryEdge {
            nodes: [a, b],
            tag: domain.classify(super::midpoint(&nodes[a], &nodes[b])),
        })
        .collect()
}

/// Deterministic structured triangulation of `domain`.
///
/// `divisions` sets the number of element layers across the characteristic
/// width: the short side of a rectangle (the long side is scaled to keep
/// square cells), the radial extent of an annulus (with as many angular
/// divisions), the leg width of an L-shape, and the angular divisions per
/// half of the plate with a hole (radially graded, twice as many layers).
///
/// With a seed, interior nodes are jittered by at most 0.3 times the
/// shortest incident edge; see [`distort_mesh`].
pub fn generate_structured_mesh(
    domain: &DomainSpec,
    divisions: usize,
    distortion_seed: Option<u64>,
) -> Result<BackgroundMesh, GeometryError> {
    domain.validate()?;
    if divisions == 0 {
        return Err(GeometryError::InvalidDomain("divisions must be at least 1".into()));
    }
    let n = divisions;
    let mesh = match *domain {
        DomainSpec::Rectangle { origin, width, height } => {
            let (nu, nv) = if width >= height {
                (((n as f64) * width / height).round().max(1.0) as usize, n)
            } else {
                (n, ((n as f64) * height / width).round().max(1.0) as usize)
            };
            let mut b = Builder::new(width.max(height));
            b.add_block(&Block {
                nu,
                nv,
                map: |u, v| Point2::new(origin[0] + u * width, origin[1] + v * height),
            });
            b.finish(domain)?
        }
        DomainSpec::QuarterAnnulus {
            inner_radius,
            outer_radius,
        } => {
            let mut b = Builder::new(outer_radius);
            b.add_block(&Block {
                nu: n,
                nv: n,
                map: |u, v| {
                    let r = inner_radius + u * (outer_radius - inner_radius);
                    let (s, c) = axis_sin_cos(v * FRAC_PI_2);
                    Point2::new(r * c, r * s)
                },
            });
            b.finish(domain)?
        }
        DomainSpec::LShape { leg } => {
            let mut b = Builder::new(2.0 * leg);
            for (ox, oy) in [(0.0, 0.0), (leg, 0.0), (0.0, leg)] {
                b.add_block(&Block {
                    nu: n,
                    nv: n,
                    map: |u, v| Point2::new(ox + u * leg, oy + v * leg),
                });
            }
            b.finish(domain)?
        }
        DomainSpec::PlateWithHole { hole_radius, side } => {
            let grade = plate_grading(hole_radius, side);
            let mut b = Builder::new(side);
            // Lower block: arc from 0 to 45 degrees, outer side x = side.
            b.add_block(&Block {
                nu: 2 * n,
                nv: n,
                map: |u, v| {
                    let (s, c) = axis_sin_cos(v * FRAC_PI_2 / 2.0);
                    let inner = Vector2::new(hole_radius * c, hole_radius * s);
                    let outer = Vector2::new(side, v * side);
                    Point2::from(inner + grade(u) * (outer - inner))
                },
            });
            // Upper block: arc from 45 to 90 degrees, outer side y = side.
            b.add_block(&Block {
                nu: 2 * n,
                nv: n,
                map: |u, v| {
                    let (s, c) = axis_sin_cos(FRAC_PI_2 / 2.0 * (1.0 + v));
                    let inner = Vector2::new(hole_radius * c, hole_radius * s);
                    let outer = Vector2::new((1.0 - v) * side, side);
                    Point2::from(inner + grade(u) * (outer - inner))
                },
            });
            b.finish(domain)?
        }
    };
    match distortion_seed {
        Some(seed) => distort_mesh(&mesh, seed),
        None => Ok(mesh),
    }
}

/// Radial grading `[0, 1] -> [0, 1]` for the plate with a hole.
///
/// Exponential over the inner half and linear (with matching slope) over the
/// outer half. The exponent is chosen so that the first radial layer along
/// the axes is as thick as the hole arc spacing, which keeps cells near the
/// hole roughly square. The largest cells sit in the linear part, so their
/// diameter halves exactly when the divisions double.
fn plate_grading(hole_radius: f64, side: f64) -> impl Fn(f64) -> f64 + Copy {
    // Unnormalized profile and its value at u = 1.
    fn profile(kappa: f64, u: f64) -> f64 {
        if u <= 0.5 {
            (kappa * u).exp_m1()
        } else {
            (0.5 * kappa).exp_m1() + kappa * (0.5 * kappa).exp() * (u - 0.5)
        }
    }
    // With n angular divisions per 45 degrees and 2n radial layers, a first
    // layer of thickness r0 (pi/4) / n on the axis needs slope
    // g'(0) = r0 (pi/2) / (side - r0).
    let target = hole_radius * FRAC_PI_2 / (side - hole_radius);
    let ratio = |k: f64| k / profile(k, 1.0);
    let kappa = if target >= 1.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (1e-6, 1.0);
        while ratio(hi) > target {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    move |u: f64| {
        if u >= 1.0 {
            1.0
        } else if kappa == 0.0 {
            u
        } else {
            profile(kappa, u) / profile(kappa, 1.0)
        }
    }
}

/// `(sin, cos)` with exact values on the coordinate axes, so nodes on the
/// symmetry lines get exactly zero coordinates.
fn axis_sin_cos(theta: f64) -> (f64, f64) {
    if theta == 0.0 {
        (0.0, 1.0)
    } else if theta == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    }
}

/// Jitters interior nodes by a seeded random offset.
///
/// Each interior node moves by at most `0.3 * l` where `l` is its shortest
/// incident edge. If any triangle inverts, the amplitude is halved and the
/// whole perturbation is redrawn from the same seed; after five failed
/// attempts an error is returned.
pub fn distort_mesh(mesh: &BackgroundMesh, seed: u64) -> Result<BackgroundMesh, GeometryError> {
    const ATTEMPTS: usize = 5;
    let boundary = mesh.boundary_node_mask();
    let mut shortest = vec![f64::INFINITY; mesh.node_count()];
    for (a, b) in mesh.edges() {
        let l = (mesh.nodes()[a] - mesh.nodes()[b]).norm();
        shortest[a] = shortest[a].min(l);
        shortest[b] = shortest[b].min(l);
    }
    let mut amplitude = 0.3;
    for _ in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes: Vec<Point2<f64>> = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                // Draw for every node so the stream does not depend on
                // which nodes are on the boundary.
                let r: f64 = rng.random::<f64>().sqrt();
                let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                if boundary[i] {
                    *p
                } else {
                    let rad = amplitude * shortest[i] * r;
                    Point2::new(p.x + rad * t.cos(), p.y + rad * t.sin())
                }
            })
            .collect();
        let ok = mesh.triangles().iter().all(|t| {
            signed_area(&nodes[t[0]], &nodes[t[1]], &nodes[t[2]]) > 0.0
        });
        if ok {
            return BackgroundMesh::new(nodes, mesh.triangles().to_vec(), mesh.boundary_edges().to_vec());
        }
        amplitude *= 0.5;
    }
    Err(GeometryError::Distortion { attempts: ATTEMPTS })
}

/// Constrained Delaunay triangulation of the structured node set with
/// randomly jittered interior nodes.
///
/// Interior nodes move by up to `0.35 l` along each axis, where `l` is the
/// node's shortest incident edge in the structured mesh. Boundary nodes
/// between two edges of the same side slide along that side by up to
/// `0.35` of the shorter of the two edges; corners stay fixed. Node counts
/// and boundary connectivity match [`generate_structured_mesh`] for the same
/// `divisions`, while spacing and connectivity are irregular.
pub fn generate_unstructured_mesh(
    domain: &DomainSpec,
    divisions: usize,
    seed: u64,
) -> Result<BackgroundMesh, GeometryError> {
    use spade::{ConstrainedDelaunayTriangulation, Triangulation};

    if divisions < 2 {
        return Err(GeometryError::InvalidDomain("unstructured meshes need at least 2 divisions".into()));
    }
    let base = generate_structured_mesh(domain, divisions, None)?;
    let boundary = base.boundary_node_mask();
    let mut shortest = vec![f64::INFINITY; base.node_count()];
    for (a, b) in base.edges() {
        let l = (base.nodes()[a] - base.nodes()[b]).norm();
        shortest[a] = shortest[a].min(l);
        shortest[b] = shortest[b].min(l);
    }
    // Boundary neighbours of each boundary node, with the side they share.
    let mut sides: Vec<Vec<(usize, &str)>> = vec![Vec::new(); base.node_count()];
    for e in base.boundary_edges() {
        sides[e.nodes[0]].push((e.nodes[1], e.tag.as_str()));
        sides[e.nodes[1]].push((e.nodes[0], e.tag.as_str()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point2<f64>> = base
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (dx, dy): (f64, f64) = (rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35));
            if !boundary[i] {
                return Point2::new(p.x + dx * shortest[i], p.y + dy * shortest[i]);
            }
            match sides[i].as_slice() {
                &[(a, ta), (b, tb)] if ta == tb => {
                    let (pa, pb) = (base.nodes()[a], base.nodes()[b]);
                    let reach = (pa - p).norm().min((pb - p).norm());
                    domain.slide(p, ta, &(pb - pa).normalize(), dx * reach)
                }
                _ => *p,
            }
        })
        .collect();
    if let Some(p) = points.iter().find(|p| !domain.contains(p)) {
        return Err(GeometryError::InvalidDomain(format!("jittered node ({}, {}) left the domain", p.x, p.y)));
    }

    let mut cdt: ConstrainedDelaunayTriangulation<spade::Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(points.len());
    let mut handle_to_node = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        let h = cdt
            .insert(spade::Point2::new(p.x, p.y))
            .map_err(|e| GeometryError::InvalidDomain(format!("delaunay insertion failed: {e:?}")))?;
        handle_to_node.insert(h.index(), k);
        handles.push(h);
    }
    for e in base.boundary_edges() {
        cdt.add_constraint(handles[e.nodes[0]], handles[e.nodes[1]]);
    }
    // Boundary edges are oriented counter-clockwise around the domain, so the
    // shoelace sum over them is the area enclosed by the jittered boundary.
    let area_scale = base
        .boundary_edges()
        .iter()
        .map(|e| {
            let (a, b) = (points[e.nodes[0]], points[e.nodes[1]]);
            0.5 * (a.x * b.y - b.x * a.y)
        })
        .sum::<f64>();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let mut t = face.vertices().map(|v| handle_to_node[&v.fix().index()]);
        let [a, b, c] = t.map(|k| points[k]);
        let area = signed_area(&a, &b, &c);
        let centroid = Point2::from((a.coords + b.coords + c.coords) / 3.0);
        if area.abs() <= 1e-14 * area_scale || !domain.contains(&centroid) {
            continue;
        }
        if area < 0.0 {
            t.swap(1, 2);
        }
        triangles.push(t);
    }
    triangles.sort_unstable();
    let mesh = BackgroundMesh::new(points, triangles, base.boundary_edges().to_vec())?;
    if ((mesh.area() - area_scale) / area_scale).abs() > 1e-10 {
        return Err(GeometryError::InvalidDomain(format!(
            "unstructured triangulation covers area {} instead of {area_scale}",
            mesh.area()
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_nodal_cells;

    #[test]
    fn unit_square_two_divisions_counts() {
        let m = generate_structured_mesh(&DomainSpec::unit_square(), 2, None).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.triangles().len(), 8);
        assert_eq!(m.boundary_edges().len(), 8);
    }

    #[test]
    fn distortion_is_deterministic_and_keeps_boundary() {
        let base = generate_structured_mesh(&DomainSpec::unit_square(), 6, None).unwrap();
        let a = generate_structured_mesh(&DomainSpec::unit_square(), 6, Some(42)).unwrap();
        let b = generate_structured_mesh(&DomainSpec::unit_square(), 6, Some(42)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, base);
        let mask = base.boundary_node_mask();
        for ((on_boundary, p), q) in mask.iter().zip(a.nodes()).zip(base.nodes()) {
            if *on_boundary {
                assert_eq!(p, q);
            } else {
                assert!((p - q).norm() <= 0.3 / 6.0 + 1e-15);
            }
        }
    }

    #[test]
    fn annulus_nodes_stay_in_ring() {
        let d = DomainSpec::QuarterAnnulus {
            inner_radius: 1.0,
            outer_radius: 5.0,
        };
        let m = generate_structured_mesh(&d, 8, None).unwrap();
        for p in m.nodes() {
            let r = p.coords.norm();
            assert!((1.0 - 1e-12..=5.0 + 1e-12).contains(&r));
            assert!(p.x >= 0.0 && p.y >= 0.0);
        }
        assert_eq!(m.tags(), vec!["bottom", "inner", "left", "outer"]);
    }

    #[test]
    fn every_domain_partitions_its_area() {
        let domains = [
            DomainSpec::Rectangle {
                origin: [0.0, -2.0],
                width: 8.0,
                height: 4.0,
            },
            DomainSpec::QuarterAnnulus {
                inner_radius: 2.0,
                outer_radius: 4.0,
            },
            DomainSpec::LShape { leg: 100.0 },
            DomainSpec::PlateWithHole {
                hole_radius: 1.0,
                side: 5.0,
            },
        ];
        for d in &domains {
            for seed in [None, Some(7)] {
                let m = generate_structured_mesh(d, 4, seed).unwrap();
                let p = build_nodal_cells(&m).unwrap();
                assert!(((p.total_area() - m.area()) / m.area()).abs() < 1e-10, "{d:?}");
            }
        }
    }

    #[test]
    fn plate_grading_is_monotone_with_square_first_layer() {
        let g = plate_grading(1.0, 5.0);
        assert_eq!(g(0.0), 0.0);
        assert_eq!(g(1.0), 1.0);
        let mut prev = 0.0;
        for k in 1..=100 {
            let v = g(k as f64 / 100.0);
            assert!(v > prev);
            prev = v;
        }
        let slope0 = g(1e-7) / 1e-7;
        // First layer thickness along the x axis equals the arc spacing.
        assert!((slope0 * 4.0 / 2.0 - FRAC_PI_2 / 2.0).abs() < 1e-5);
        // Linear over the outer half.
        let d1 = g(0.8) - g(0.7);
        let d2 = g(0.9) - g(0.8);
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn lshape_and_plate_tags() {
        let m = generate_structured_mesh(&DomainSpec::LShape { leg: 1.0 }, 2, None).unwrap();
        assert_eq!(m.tags(), vec!["bottom", "left", "notch_h", "notch_v", "right", "top"]);
        let p = generate_structured_mesh(
            &DomainSpec::PlateWithHole {
                hole_radius: 1.0,
                side: 5.0,
            },
            3,
            None,
        )
        .unwrap();
        assert_eq!(p.tags(), vec!["bottom", "hole", "left", "right", "top"]);
        let hole = p.tagged_nodes("hole").unwrap();
        for i in hole {
            assert!((p.nodes()[i].coords.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unstructured_mesh_is_valid_and_seeded() {
        let a = generate_unstructured_mesh(&DomainSpec::unit_square(), 6, 9).unwrap();
        let b = generate_unstructured_mesh(&DomainSpec::unit_square(), 6, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 49);
        assert!((a.area() - 1.0).abs() < 1e-12);
        assert_eq!(a.tags(), vec!["bottom", "left", "right", "top"]);
        let base = generate_structured_mesh(&DomainSpec::unit_square(), 6, None).unwrap();
        assert_ne!(a.triangles(), base.triangles());
    }

    #[test]
    fn unstructured_meshes_cover_non_convex_domains() {
        for d in [
            DomainSpec::LShape { leg: 100.0 },
            DomainSpec::PlateWithHole {
                hole_radius: 1.0,
                side: 5.0,
            },
            DomainSpec::QuarterAnnulus {
                inner_radius: 2.0,
                outer_radius: 4.0,
            },
        ] {
            for n in [2, 5, 8] {
                let base = generate_structured_mesh(&d, n, None).unwrap();
                let m = generate_unstructured_mesh(&d, n, 3).unwrap();
                assert_eq!(m.node_count(), base.node_count());
                assert_eq!(m.boundary_edges(), base.boundary_edges());
                assert!(((m.area() - base.area()) / base.area()).abs() < 0.05, "{d:?} n={n}");
                let p = build_nodal_cells(&m).unwrap();
                assert!(((p.total_area() - m.area()) / m.area()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_zero_divisions_and_bad_domain() {
        assert!(generate_structured_mesh(&DomainSpec::unit_square(), 0, None).is_err());
        assert!(generate_structured_mesh(
            &DomainSpec::QuarterAnnulus {
                inner_radius: 3.0,
                outer_radius: 2.0
            },
            2,
            None
        )
        .is_err());
    }
}
