use std::ops::Range;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::basis::{eval_modal, n_modes};
use super::quadrature::{element_quadrature, face_quadrature, QuadratureRule};
use crate::mesh::{Physics, PolyMesh};
use crate::{Error, Point, Result};

/// Discontinuous piecewise-polynomial space on a subset of mesh elements.
///
/// Vector spaces store dofs element by element and, inside an element,
/// component-major: dof `offset + c * n_basis + i` is mode `i` of component `c`.
#[derive(Clone, Debug)]
pub struct DgSpace {
    mesh: Arc<PolyMesh>,
    components: usize,
    elements: Vec<usize>,
    degree: Vec<usize>,
    offset: Vec<usize>,
    n_dofs: usize,
}

/// Basis values and gradients at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub rule: QuadratureRule,
    pub n_basis: usize,
    /// `vals[q * n_basis + i]`
    pub vals: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    #[inline]
    pub fn val(&self, q: usize, i: usize) -> f64 {
        self.vals[q * self.n_basis + i]
    }

    #[inline]
    pub fn grad(&self, q: usize, i: usize) -> [f64; 2] {
        self.grads[q * self.n_basis + i]
    }
}

const NONE: usize = usize::MAX;

impl DgSpace {
    /// Space on `elements` with the given per-element degrees.
    pub fn new(mesh: Arc<PolyMesh>, elements: Vec<usize>, degrees: Vec<usize>, components: usize) -> Result<Self> {
        if elements.len() != degrees.len() {
            return Err(Error::InvalidInput("one degree per element is required".into()));
        }
        if !(1..=2).contains(&components) {
            return Err(Error::InvalidInput(format!("{components} components not supported")));
        }
        let ne = mesh.n_elements();
        let mut degree = vec![0; ne];
        let mut offset = vec![NONE; ne];
        let mut n = 0;
        for (&k, &p) in elements.iter().zip(&degrees) {
            if k >= ne {
                return Err(Error::InvalidInput(format!("element {k} not in mesh")));
            }
            if p == 0 || p > 12 {
                return Err(Error::InvalidInput(format!("degree {p} on element {k} outside 1..=12")));
            }
            if offset[k] != NONE {
                return Err(Error::InvalidInput(format!("element {k} listed twice")));
            }
            degree[k] = p;
            offset[k] = n;
            n += components * n_modes(p);
        }
        for face in mesh.faces() {
            if let (a, Some(b)) = face.elements {
                if offset[a] != NONE && offset[b] != NONE {
                    let (pa, pb) = (degree[a], degree[b]);
                    if pa.max(pb) > 2 * pa.min(pb) {
                        return Err(Error::InvalidInput(format!(
                            "degrees {pa} and {pb} of neighbours {a} and {b} differ by more than a factor 2"
                        )));
                    }
                }
            }
        }
        Ok(Self { mesh, components, elements, degree, offset, n_dofs: n })
    }

    /// Degree `p` on every element.
    pub fn uniform(mesh: Arc<PolyMesh>, p: usize, components: usize) -> Result<Self> {
        let elements: Vec<usize> = (0..mesh.n_elements()).collect();
        let degrees = vec![p; elements.len()];
        Self::new(mesh, elements, degrees, components)
    }

    /// Degree `p` on the elements carrying `physics`.
    pub fn on_physics(mesh: Arc<PolyMesh>, physics: Physics, p: usize, components: usize) -> Result<Self> {
        let elements: Vec<usize> = (0..mesh.n_elements()).filter(|&k| mesh.subdomain(k).physics == physics).collect();
        let degrees = vec![p; elements.len()];
        Self::new(mesh, elements, degrees, components)
    }

    pub fn mesh(&self) -> &PolyMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<PolyMesh> {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn contains(&self, k: usize) -> bool {
        self.offset[k] != NONE
    }

    pub fn degree(&self, k: usize) -> usize {
        self.degree[k]
    }

    pub fn max_degree(&self) -> usize {
        self.elements.iter().map(|&k| self.degree[k]).max().unwrap_or(0)
    }

    pub fn n_basis(&self, k: usize) -> usize {
        n_modes(self.degree[k])
    }

    pub fn offset(&self, k: usize) -> usize {
        debug_assert!(self.contains(k), "element {k} not in space");
        self.offset[k]
    }

    pub fn dofs(&self, k: usize) -> Range<usize> {
        let o = self.offset(k);
        o..o + self.components * self.n_basis(k)
    }

    /// Basis values and gradients of element `k` at `x`.
    pub fn eval_basis(&self, k: usize, x: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let nb = self.n_basis(k);
        let mut v = vec![0.0; nb];
        let mut g = vec![[0.0; 2]; nb];
        eval_modal(&self.mesh.bbox(k), self.degree[k], x, &mut v, &mut g);
        (v, g)
    }

    pub fn tabulate(&self, k: usize, rule: QuadratureRule) -> Tabulation {
        let nb = self.n_basis(k);
        let nq = rule.len();
        let mut vals = vec![0.0; nq * nb];
        let mut grads = vec![[0.0; 2]; nq * nb];
        let bbox = self.mesh.bbox(k);
        for q in 0..nq {
            eval_modal(&bbox, self.degree[k], rule.points[q], &mut vals[q * nb..(q + 1) * nb], &mut grads[q * nb..(q + 1) * nb]);
        }
        Tabulation { rule, n_basis: nb, vals, grads }
    }

    /// Tabulation on the element rule of the given order.
    pub fn element_tabulation(&self, k: usize, order: usize) -> Result<Tabulation> {
        Ok(self.tabulate(k, element_quadrature(&self.mesh, k, order)?))
    }

    /// Default element quadrature order, exact for products of two basis functions plus two.
    pub fn default_order(&self, k: usize) -> usize {
        2 * self.degree[k] + 2
    }

    /// Scalar mass matrix `∫ c φ_i φ_j` of element `k`.
    pub fn local_mass(&self, k: usize, coeff: f64) -> Result<DMatrix<f64>> {
        let t = self.element_tabulation(k, self.default_order(k))?;
        let nb = t.n_basis;
        let mut m = DMatrix::zeros(nb, nb);
        for (q, &w) in t.rule.weights.iter().enumerate() {
            let row = &t.vals[q * nb..(q + 1) * nb];
            for i in 0..nb {
                let wi = coeff * w * row[i];
                for j in 0..nb {
                    m[(i, j)] += wi * row[j];
                }
            }
        }
        Ok(m)
    }

    /// Evaluates the discrete field `coeffs` on element `k` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], k: usize, x: Point) -> [f64; 2] {
        let (v, _) = self.eval_basis(k, x);
        let nb = v.len();
        let o = self.offset(k);
        let mut out = [0.0; 2];
        for c in 0..self.components {
            out[c] = (0..nb).map(|i| coeffs[o + c * nb + i] * v[i]).sum();
        }
        out
    }

    /// Element-local `L²` projection of `f`; only the first `components`
    /// entries of `f` are used.
    pub fn l2_project<F: Fn(Point) -> [f64; 2]>(&self, f: F) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_dofs];
        for &k in &self.elements {
            let t = self.element_tabulation(k, self.default_order(k) + 4)?;
            let nb = t.n_basis;
            let mut m = DMatrix::zeros(nb, nb);
            let mut rhs = DMatrix::zeros(nb, self.components);
            for (q, &w) in t.rule.weights.iter().enumerate() {
                let fx = f(t.rule.points[q]);
                let row = &t.vals[q * nb..(q + 1) * nb];
                for i in 0..nb {
                    for j in 0..nb {
                        m[(i, j)] += w * row[i] * row[j];
                    }
                    for c in 0..self.components {
                        rhs[(i, c)] += w * row[i] * fx[c];
                    }
                }
            }
            let chol = Cholesky::new(m).expect("element mass matrix is positive definite under exact quadrature");
            let sol = chol.solve(&rhs);
            let o = self.offset(k);
            for c in 0..self.components {
                for i in 0..nb {
                    out[o + c * nb + i] = sol[(i, c)];
                }
            }
        }
        Ok(out)
    }

    /// Largest constant `C_k = λ_max(B_k, M_k) h_k / p_k²` of the discrete
    /// trace-inverse inequality `|v|²_{∂κ} <= C p² / h |v|²_κ`, over all elements.
    pub fn trace_inverse_constant(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &k in &self.elements {
            let nb = self.n_basis(k);
            let p = self.degree[k] as f64;
            let m = self.local_mass(k, 1.0)?;
            let mut b = DMatrix::zeros(nb, nb);
            for &f in self.mesh.element_faces(k) {
                let t = self.tabulate(k, face_quadrature(&self.mesh, f, 2 * self.degree[k] + 2));
                for (q, &w) in t.rule.weights.iter().enumerate() {
                    for i in 0..nb {
                        for j in 0..nb {
                            b[(i, j)] += w * t.val(q, i) * t.val(q, j);
                        }
                    }
                }
            }
            let l = Cholesky::new(m).ok_or_else(|| Error::Assembly(format!("singular mass on element {k}")))?.l();
            let li = l.clone().try_inverse().ok_or_else(|| Error::Assembly(format!("singular mass on element {k}")))?;
            let s = &li * b * li.transpose();
            let lmax = SymmetricEigen::new(s).eigenvalues.max();
            worst = worst.max(lmax * self.mesh.diameter(k) / (p * p));
        }
        Ok(worst)
    }

    /// Spectral condition number of the scalar mass matrix of element `k`.
    pub fn mass_condition(&self, k: usize) -> Result<f64> {
        let e = SymmetricEigen::new(self.local_mass(k, 1.0)?).eigenvalues;
        Ok(e.max() / e.min())
    }

    /// `L²` norm over the space's elements of `coeffs - exact`.
    pub fn l2_error<F: Fn(Point) -> [f64; 2]>(&self, coeffs: &[f64], exact: F) -> Result<f64> {
        let mut s = 0.0;
        for &k in &self.elements {
            let t = self.element_tabulation(k, 2 * self.degree[k] + 4)?;
            let nb = t.n_basis;
            let o = self.offset(k);
            for (q, &w) in t.rule.weights.iter().enumerate() {
                let ex = exact(t.rule.points[q]);
                for c in 0..self.components {
                    let uh: f64 = (0..nb).map(|i| coeffs[o + c * nb + i] * t.val(q, i)).sum();
                    s += w * (ex[c] - uh).powi(2);
                }
            }
        }
        Ok(s.sqrt())
    }
}

/// Least-squares fit of `log y` against `log x`.
#[cfg(test)]
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[allow(dead_code)]
pub(crate) fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
