//! Polygonal meshes: construction, face classification and diagnostics.
//!
//! Elements are simple counter-clockwise vertex loops. Faces are the edges of
//! those loops, each shared by one (boundary) or two (interior) elements. A
//! face's unit normal points out of its first adjacent element; on
//! poro-acoustic interface faces the first element is always the
//! poro-elastic one, so the stored normal is the poro outward normal.

pub mod geometry;
mod io;
mod regularity;
mod structured;
mod voronoi;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};
pub use geometry::Rect;
pub use io::{read_mesh, write_mesh, parse_mesh, format_mesh};
pub use regularity::{regularity_report, RegularityReport};
pub use structured::{structured_quads, structured_triangles};
pub use voronoi::{generate_voronoi_mesh, lloyd_seeds, voronoi_cells};

/// Physical model solved on an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Physics {
    Elastic,
    Poroelastic,
    Acoustic,
}

impl Physics {
    pub fn name(self) -> &'static str {
        match self {
            Physics::Elastic => "elastic",
            Physics::Poroelastic => "poroelastic",
            Physics::Acoustic => "acoustic",
        }
    }

    pub fn parse(s: &str) -> Option<Physics> {
        match s {
            "elastic" => Some(Physics::Elastic),
            "poroelastic" | "poro" => Some(Physics::Poroelastic),
            "acoustic" => Some(Physics::Acoustic),
            _ => None,
        }
    }
}

/// Subdomain label of an element: its physics and a material region index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subdomain {
    pub physics: Physics,
    pub region: u32,
}

impl Subdomain {
    pub const fn new(physics: Physics, region: u32) -> Self {
        Self { physics, region }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceTag {
    Interior,
    Dirichlet,
    Neumann,
    InterfaceOpen,
    InterfaceSealed,
    /// Boundary face not yet classified.
    Untagged,
}

impl FaceTag {
    pub fn is_interface(self) -> bool {
        matches!(self, FaceTag::InterfaceOpen | FaceTag::InterfaceSealed)
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub vertices: [usize; 2],
    pub measure: f64,
    pub normal: Point,
    pub midpoint: Point,
    /// First adjacent element (the normal points out of it) and the optional neighbour.
    pub elements: (usize, Option<usize>),
    pub tag: FaceTag,
    /// Hydraulic interface permeability, set on interface faces only.
    pub tau: Option<f64>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }

    /// Outward normal of `element` on this face.
    pub fn normal_from(&self, element: usize) -> Point {
        if element == self.elements.0 {
            self.normal
        } else {
            [-self.normal[0], -self.normal[1]]
        }
    }
}

#[derive(Clone, Debug)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    element_faces: Vec<Vec<usize>>,
    faces: Vec<Face>,
    diameters: Vec<f64>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    bboxes: Vec<Rect>,
    subdomains: Vec<Subdomain>,
}

impl PolyMesh {
    /// Builds a mesh from vertex coordinates and element vertex loops.
    ///
    /// Clockwise loops are reversed. Degenerate or self-intersecting
    /// elements and faces shared by more than two elements are rejected.
    pub fn new(vertices: Vec<Point>, elements: Vec<Vec<usize>>, subdomains: Vec<Subdomain>) -> Result<Self> {
        if elements.len() != subdomains.len() {
            return Err(Error::Mesh(format!(
                "{} elements but {} subdomain labels",
                elements.len(),
                subdomains.len()
            )));
        }
        let mut elements = elements;
        let mut areas = Vec::with_capacity(elements.len());
        let mut centroids = Vec::with_capacity(elements.len());
        let mut diameters = Vec::with_capacity(elements.len());
        let mut bboxes = Vec::with_capacity(elements.len());
        for (k, loop_) in elements.iter_mut().enumerate() {
            if loop_.len() < 3 {
                return Err(Error::Mesh(format!("element {k} has fewer than 3 vertices")));
            }
            if let Some(&v) = loop_.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("element {k} references missing vertex {v}")));
            }
            let mut pts: Vec<Point> = loop_.iter().map(|&v| vertices[v]).collect();
            let mut a = geometry::signed_area(&pts);
            if a < 0.0 {
                loop_.reverse();
                pts.reverse();
                a = -a;
            }
            let h = geometry::diameter(&pts);
            if !(a > 1e-14 * h * h) {
                return Err(Error::Mesh(format!("element {k} has zero area")));
            }
            if !geometry::is_simple(&pts) {
                return Err(Error::Mesh(format!("element {k} is self-intersecting")));
            }
            areas.push(a);
            centroids.push(geometry::centroid(&pts));
            diameters.push(h);
            bboxes.push(Rect::of_points(&pts));
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut element_faces = vec![Vec::new(); elements.len()];
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, loop_) in elements.iter().enumerate() {
            let n = loop_.len();
            for i in 0..n {
                let (a, b) = (loop_[i], loop_[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.elements.1.is_some() || face.elements.0 == k {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) is shared by more than two elements"
                            )));
                        }
                        if face.vertices != [b, a] {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) has inconsistent orientation between elements {} and {k}",
                                face.elements.0
                            )));
                        }
                        face.elements.1 = Some(k);
                        face.tag = FaceTag::Interior;
                        element_faces[k].push(f);
                    }
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let d = geometry::sub(pb, pa);
                        let len = d[0].hypot(d[1]);
                        if len == 0.0 {
                            return Err(Error::Mesh(format!("element {k} has a zero-length edge")));
                        }
                        edge_map.insert(key, faces.len());
                        element_faces[k].push(faces.len());
                        faces.push(Face {
                            vertices: [a, b],
                            measure: len,
                            normal: [d[1] / len, -d[0] / len],
                            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                            elements: (k, None),
                            tag: FaceTag::Untagged,
                            tau: None,
                        });
                    }
                }
            }
        }

        let mut mesh = Self {
            vertices,
            elements,
            element_faces,
            faces,
            diameters,
            areas,
            centroids,
            bboxes,
            subdomains,
        };
        mesh.detect_interfaces_untagged();
        Ok(mesh)
    }

    /// Single-subdomain convenience constructor.
    pub fn with_label(vertices: Vec<Point>, elements: Vec<Vec<usize>>, label: Subdomain) -> Result<Self> {
        let n = elements.len();
        Self::new(vertices, elements, vec![label; n])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn element(&self, k: usize) -> &[usize] {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element_points(&self, k: usize) -> Vec<Point> {
        self.elements[k].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_faces(&self, k: usize) -> &[usize] {
        &self.element_faces[k]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn face_points(&self, f: usize) -> [Point; 2] {
        let [a, b] = self.faces[f].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn diameter(&self, k: usize) -> f64 {
        self.diameters[k]
    }

    pub fn area(&self, k: usize) -> f64 {
        self.areas[k]
    }

    pub fn centroid(&self, k: usize) -> Point {
        self.centroids[k]
    }

    pub fn bbox(&self, k: usize) -> Rect {
        self.bboxes[k]
    }

    pub fn subdomain(&self, k: usize) -> Subdomain {
        self.subdomains[k]
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    /// Mesh size `h`, the largest element diameter.
    pub fn h(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::of_points(&self.vertices)
    }

    /// Relabels every element from its centroid. Interface faces are
    /// re-detected; boundary tags are kept.
    pub fn assign_subdomains<F: Fn(Point) -> Subdomain>(&mut self, label: F) {
        for k in 0..self.elements.len() {
            self.subdomains[k] = label(self.centroids[k]);
        }
        for face in &mut self.faces {
            if face.tag.is_interface() {
                face.tag = FaceTag::Interior;
                face.tau = None;
            }
        }
        self.detect_interfaces_untagged();
    }

    // Interior faces between poro-elastic and acoustic elements are reoriented
    // so that the poro element comes first; they stay `Interior` until
    // `classify_boundary` assigns open/sealed from tau.
    fn detect_interfaces_untagged(&mut self) {
        for face in &mut self.faces {
            if let (k0, Some(k1)) = face.elements {
                let (p0, p1) = (self.subdomains[k0].physics, self.subdomains[k1].physics);
                if p0 == Physics::Acoustic && p1 == Physics::Poroelastic {
                    face.elements = (k1, Some(k0));
                    face.vertices.swap(0, 1);
                    face.normal = [-face.normal[0], -face.normal[1]];
                }
            }
        }
    }

    /// Tags every boundary face from its midpoint and every poro-acoustic face
    /// as open (`tau > 0`) or sealed (`tau == 0`).
    ///
    /// Interior faces are untouched. A boundary face the tagger leaves
    /// unmapped is a configuration error, as is an interface between
    /// unsupported physics pairs.
    pub fn classify_boundary<T, U>(&mut self, tagger: T, tau: U) -> Result<()>
    where
        T: Fn(Point) -> Option<BoundaryKind>,
        U: Fn(Point) -> f64,
    {
        for (f, face) in self.faces.iter_mut().enumerate() {
            match face.elements {
                (_, None) => {
                    face.tag = match tagger(face.midpoint) {
                        Some(BoundaryKind::Dirichlet) => FaceTag::Dirichlet,
                        Some(BoundaryKind::Neumann) => FaceTag::Neumann,
                        None => {
                            return Err(Error::Config(format!(
                                "boundary face {f} at ({:.6}, {:.6}) has no boundary condition",
                                face.midpoint[0], face.midpoint[1]
                            )))
                        }
                    };
                }
                (k0, Some(k1)) => {
                    let (p0, p1) = (self.subdomains[k0].physics, self.subdomains[k1].physics);
                    if p0 == p1 {
                        face.tag = FaceTag::Interior;
                        face.tau = None;
                        continue;
                    }
                    if p0 != Physics::Poroelastic || p1 != Physics::Acoustic {
                        return Err(Error::Config(format!(
                            "face {f} couples {} and {} elements, which is not supported",
                            p0.name(),
                            p1.name()
                        )));
                    }
                    let t = tau(face.midpoint);
                    if !(0.0..=1.0).contains(&t) {
                        return Err(Error::Config(format!("interface permeability {t} outside [0, 1] on face {f}")));
                    }
                    face.tau = Some(t);
                    face.tag = if t == 0.0 { FaceTag::InterfaceSealed } else { FaceTag::InterfaceOpen };
                }
            }
        }
        Ok(())
    }

    /// Tags all boundary faces with one kind and all interfaces as open with `tau = 1`.
    pub fn tag_all_boundary(&mut self, kind: BoundaryKind) {
        self.classify_boundary(|_| Some(kind), |_| 1.0)
            .expect("uniform tagging cannot leave a face unmapped");
    }

    /// The element containing `p`, lowest id first when `p` sits on a shared face.
    ///
    /// The second value reports whether `p` lies on an element boundary
    /// (within `1e-12 h`).
    pub fn locate(&self, p: Point) -> Option<(usize, bool)> {
        let mut hit = None;
        for k in 0..self.elements.len() {
            let b = self.bboxes[k];
            let tol = 1e-12 * self.diameters[k];
            if p[0] < b.min[0] - tol || p[0] > b.max[0] + tol || p[1] < b.min[1] - tol || p[1] > b.max[1] + tol {
                continue;
            }
            let pts = self.element_points(k);
            let on_boundary = geometry::distance_to_boundary(p, &pts) <= tol;
            if on_boundary {
                if hit.is_none() {
                    hit = Some((k, true));
                }
            } else if geometry::point_in_polygon(p, &pts) {
                return Some((k, false));
            }
        }
        hit
    }

    /// The union of this mesh and its mirror image across `x = line` (axis 0)
    /// or `y = line` (axis 1). Vertices on the mirror line are shared, so the
    /// result is conforming across it.
    pub fn reflected_union(&self, axis: usize, line: f64) -> Result<PolyMesh> {
        assert!(axis < 2);
        let scale = self.bounding_box().width().max(self.bounding_box().height());
        let tol = 1e-12 * scale;
        let mut vertices = self.vertices.clone();
        let mut image = Vec::with_capacity(self.vertices.len());
        for (i, p) in self.vertices.iter().enumerate() {
            if (p[axis] - line).abs() <= tol {
                image.push(i);
            } else {
                let mut q = *p;
                q[axis] = 2.0 * line - p[axis];
                image.push(vertices.len());
                vertices.push(q);
            }
        }
        let mut elements = self.elements.clone();
        let mut subdomains = self.subdomains.clone();
        for (k, loop_) in self.elements.iter().enumerate() {
            let mut mirrored: Vec<usize> = loop_.iter().map(|&v| image[v]).collect();
            mirrored.reverse();
            elements.push(mirrored);
            subdomains.push(self.subdomains[k]);
        }
        PolyMesh::new(vertices, elements, subdomains)
    }

    /// Checks the structural invariants: unit normals, positive areas and
    /// closure of every element boundary (sum of `|F| n` vanishes).
    pub fn validate(&self) -> Result<()> {
        for (f, face) in self.faces.iter().enumerate() {
            let n = face.normal;
            if (n[0].hypot(n[1]) - 1.0).abs() > 1e-14 {
                return Err(Error::Mesh(format!("face {f} normal is not unit length")));
            }
            if face.tag.is_interface() {
                let (k0, k1) = face.elements;
                let k1 = k1.ok_or_else(|| Error::Mesh(format!("interface face {f} on the boundary")))?;
                if self.subdomains[k0].physics == self.subdomains[k1].physics {
                    return Err(Error::Mesh(format!("interface face {f} between equal physics")));
                }
            }
        }
        for k in 0..self.n_elements() {
            let mut s = [0.0, 0.0];
            for &f in &self.element_faces[k] {
                let face = &self.faces[f];
                let n = face.normal_from(k);
                s[0] += face.measure * n[0];
                s[1] += face.measure * n[1];
            }
            let scale = self.diameters[k];
            if s[0].abs() > 1e-12 * scale || s[1].abs() > 1e-12 * scale {
                return Err(Error::Mesh(format!("element {k} boundary does not close")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_squares() -> PolyMesh {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
        let e = vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4]];
        PolyMesh::with_label(v, e, Subdomain::new(Physics::Elastic, 0)).unwrap()
    }

    #[test]
    fn faces_and_normals() {
        let m = two_squares();
        assert_eq!(m.n_faces(), 7);
        let interior: Vec<_> = m.faces().iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        let f = interior[0];
        assert_eq!(f.normal, [1.0, 0.0]);
        assert_eq!(f.normal_from(1), [-1.0, 0.0]);
        m.validate().unwrap();
    }

    #[test]
    fn clockwise_loops_are_reversed() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = PolyMesh::with_label(v, vec![vec![3, 2, 1, 0]], Subdomain::new(Physics::Acoustic, 0)).unwrap();
        assert_eq!(m.area(0), 1.0);
    }

    #[test]
    fn rejects_degenerate() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(PolyMesh::with_label(v, vec![vec![0, 1, 2]], Subdomain::new(Physics::Elastic, 0)).is_err());
    }

    #[test]
    fn all_dirichlet_tagging() {
        let mut m = two_squares();
        m.tag_all_boundary(BoundaryKind::Dirichlet);
        for f in m.faces() {
            if f.is_boundary() {
                assert_eq!(f.tag, FaceTag::Dirichlet);
            } else {
                assert_eq!(f.tag, FaceTag::Interior);
            }
        }
    }

    #[test]
    fn unmapped_boundary_face_is_config_error() {
        let mut m = two_squares();
        let r = m.classify_boundary(|p| if p[1] == 0.0 { Some(BoundaryKind::Dirichlet) } else { None }, |_| 1.0);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn interface_detection_and_orientation() {
        let mut m = two_squares();
        // acoustic on the left, poro on the right: normal must point poro -> acoustic
        m.assign_subdomains(|c| {
            if c[0] < 1.0 {
                Subdomain::new(Physics::Acoustic, 0)
            } else {
                Subdomain::new(Physics::Poroelastic, 0)
            }
        });
        m.classify_boundary(|_| Some(BoundaryKind::Dirichlet), |_| 0.0).unwrap();
        let f = m.faces().iter().find(|f| !f.is_boundary()).unwrap();
        assert_eq!(f.tag, FaceTag::InterfaceSealed);
        assert_eq!(m.subdomain(f.elements.0).physics, Physics::Poroelastic);
        assert_eq!(f.normal, [-1.0, 0.0]);
        m.validate().unwrap();
    }

    #[test]
    fn locate_tie_break_lowest_id() {
        let m = two_squares();
        assert_eq!(m.locate([0.5, 0.5]), Some((0, false)));
        assert_eq!(m.locate([1.5, 0.5]), Some((1, false)));
        assert_eq!(m.locate([1.0, 0.5]), Some((0, true)));
        assert_eq!(m.locate([3.0, 0.5]), None);
    }

    #[test]
    fn reflected_union_is_conforming() {
        let m = two_squares();
        let r = m.reflected_union(0, 0.0).unwrap();
        assert_eq!(r.n_elements(), 4);
        assert!((r.total_area() - 4.0).abs() < 1e-14);
        assert_eq!(r.faces().iter().filter(|f| !f.is_boundary()).count(), 3);
        r.validate().unwrap();
    }
}
