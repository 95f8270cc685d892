//! Solves with nonsymmetric (positive-real) matrices and a front end that
//! picks the symmetric path when it applies.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::solve::{SolveConfig, SolveMethod, SolveStats, SpdSolver, DENSE_LIMIT};
use super::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

const RESTART: usize = 40;

struct LuBlock {
    idx: Vec<usize>,
    lu: LU<f64, Dyn, Dyn>,
}

enum Kind {
    Dense(LU<f64, Dyn, Dyn>),
    Gmres(Vec<LuBlock>, Vec<bool>),
}

/// Nonsymmetric operator prepared for repeated solves: dense LU below
/// [`DENSE_LIMIT`] unknowns, otherwise restarted GMRES with a right
/// block-Jacobi preconditioner over the element groups.
pub struct GeneralSolver {
    a: CsrMatrix,
    kind: Kind,
    cfg: SolveConfig,
    name: String,
}

impl GeneralSolver {
    pub fn new(a: CsrMatrix, groups: &[Vec<usize>], cfg: SolveConfig, name: &str) -> Result<Self> {
        cfg.validate()?;
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let direct = match cfg.method {
            SolveMethod::Direct => true,
            SolveMethod::ConjugateGradient => false,
            SolveMethod::Auto => n < DENSE_LIMIT,
        };
        let singular = |what: String| Error::Solve { block: what, reason: "matrix is singular".into() };
        let kind = if direct {
            let lu = a.to_dense().lu();
            if !lu.is_invertible() {
                return Err(singular(name.to_string()));
            }
            Kind::Dense(lu)
        } else {
            let mut covered = vec![false; n];
            let mut blocks = Vec::with_capacity(groups.len());
            for (k, g) in groups.iter().enumerate().filter(|(_, g)| !g.is_empty()) {
                let lu = a.dense_block(g).lu();
                if !lu.is_invertible() {
                    return Err(singular(format!("{name}, element block {k}")));
                }
                g.iter().for_each(|&i| covered[i] = true);
                blocks.push(LuBlock { idx: g.clone(), lu });
            }
            Kind::Gmres(blocks, covered)
        };
        Ok(Self { a, kind, cfg, name: name.to_string() })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        if let Kind::Gmres(blocks, covered) = &self.kind {
            for b in blocks {
                let rhs = DVector::from_iterator(b.idx.len(), b.idx.iter().map(|&i| r[i]));
                let s = b.lu.solve(&rhs).expect("block factor checked invertible");
                for (a, &i) in b.idx.iter().enumerate() {
                    z[i] = s[a];
                }
            }
            for i in 0..r.len() {
                if !covered[i] {
                    z[i] = r[i];
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.a.nrows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((vec![0.0; n], SolveStats::default()));
        }
        match &self.kind {
            Kind::Dense(lu) => {
                let mut x = lu.solve(&DVector::from_column_slice(b)).expect("checked invertible");
                let mut rel = f64::INFINITY;
                for _ in 0..3 {
                    let r: Vec<f64> = self.a.spmv(x.as_slice())?.iter().zip(b).map(|(ax, bi)| bi - ax).collect();
                    rel = norm2(&r) / bnorm;
                    if rel <= self.cfg.rel_tol {
                        break;
                    }
                    x += lu.solve(&DVector::from_vec(r)).expect("checked invertible");
                }
                if !(rel <= self.cfg.rel_tol) {
                    return Err(Error::Solve {
                        block: self.name.clone(),
                        reason: format!("direct solve residual {rel:.3e} above tolerance {:.1e}", self.cfg.rel_tol),
                    });
                }
                Ok((x.as_slice().to_vec(), SolveStats { iterations: 0, rel_residual: rel }))
            }
            Kind::Gmres(..) => self.gmres(b, x0, bnorm),
        }
    }

    fn gmres(&self, b: &[f64], x0: Option<&[f64]>, bnorm: f64) -> Result<(Vec<f64>, SolveStats)> {
        let n = b.len();
        let mut x = match x0 {
            Some(x0) if x0.len() == n => x0.to_vec(),
            Some(x0) => return Err(Error::DimensionMismatch { expected: n, got: x0.len() }),
            None => vec![0.0; n],
        };
        let tol = self.cfg.rel_tol * bnorm;
        let mut total = 0;
        let mut z = vec![0.0; n];
        let mut w = vec![0.0; n];
        loop {
            let ax = self.a.spmv(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
            let beta = norm2(&r);
            if beta <= tol {
                return Ok((x, SolveStats { iterations: total, rel_residual: beta / bnorm }));
            }
            if total >= self.cfg.max_iters {
                return Err(Error::Solve {
                    block: self.name.clone(),
                    reason: format!("GMRES did not converge in {total} iterations (relative residual {:.3e})", beta / bnorm),
                });
            }
            let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
            let mut h = DMatrix::<f64>::zeros(RESTART + 1, RESTART);
            let (mut cs, mut sn) = (vec![0.0; RESTART], vec![0.0; RESTART]);
            let mut g = vec![0.0; RESTART + 1];
            g[0] = beta;
            let mut m = 0;
            while m < RESTART && total < self.cfg.max_iters {
                self.precondition(&v[m], &mut z);
                self.a.spmv_into(&z, &mut w)?;
                // modified Gram-Schmidt
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[(i, m)] = hij;
                    w.iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
                }
                let hn = norm2(&w);
                h[(m + 1, m)] = hn;
                for i in 0..m {
                    let t = cs[i] * h[(i, m)] + sn[i] * h[(i + 1, m)];
                    h[(i + 1, m)] = -sn[i] * h[(i, m)] + cs[i] * h[(i + 1, m)];
                    h[(i, m)] = t;
                }
                let d = h[(m, m)].hypot(h[(m + 1, m)]);
                cs[m] = h[(m, m)] / d;
                sn[m] = h[(m + 1, m)] / d;
                h[(m, m)] = d;
                h[(m + 1, m)] = 0.0;
                g[m + 1] = -sn[m] * g[m];
                g[m] *= cs[m];
                total += 1;
                m += 1;
                if g[m].abs() <= tol || hn == 0.0 {
                    break;
                }
                v.push(w.iter().map(|wi| wi / hn).collect());
            }
            // back substitution for the Krylov coefficients
            let mut y = vec![0.0; m];
            for i in (0..m).rev() {
                let s: f64 = (i + 1..m).map(|j| h[(i, j)] * y[j]).sum();
                y[i] = (g[i] - s) / h[(i, i)];
            }
            let mut dx = vec![0.0; n];
            for (j, yj) in y.iter().enumerate() {
                dx.iter_mut().zip(&v[j]).for_each(|(a, b)| *a += yj * b);
            }
            self.precondition(&dx, &mut z);
            x.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
        }
    }
}

/// A solver for `K` choosing the symmetric or the general path by the
/// symmetry of `K`.
pub enum LinearSolver {
    Spd(SpdSolver),
    General(GeneralSolver),
}

impl LinearSolver {
    pub fn new(a: CsrMatrix, groups: &[Vec<usize>], cfg: SolveConfig, name: &str) -> Result<Self> {
        if a.asymmetry() <= 1e-14 * a.max_abs() {
            Ok(LinearSolver::Spd(SpdSolver::new(a, groups, cfg, name)?))
        } else {
            Ok(LinearSolver::General(GeneralSolver::new(a, groups, cfg, name)?))
        }
    }

    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>) -> Result<(Vec<f64>, SolveStats)> {
        match self {
            LinearSolver::Spd(s) => s.solve(b, x0),
            LinearSolver::General(s) => s.solve(b, x0),
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        match self {
            LinearSolver::Spd(s) => s.matrix(),
            LinearSolver::General(s) => s.matrix(),
        }
    }

    /// Whether each solve is a block-local exact solve.
    pub fn is_block_exact(&self) -> bool {
        matches!(self, LinearSolver::Spd(s) if s.is_block_exact())
    }
}
