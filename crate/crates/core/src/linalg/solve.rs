use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

/// Systems below this size use the dense factorization under [`SolveMethod::Auto`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Dense Cholesky below [`DENSE_LIMIT`] unknowns, CG above.
    Auto,
    Direct,
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    None,
    BlockDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub method: SolveMethod,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { method: SolveMethod::Auto, rel_tol: 1e-10, max_iters: 5000, preconditioner: Preconditioner::BlockDiagonal }
    }
}

impl SolveConfig {
    pub fn direct() -> Self {
        Self { method: SolveMethod::Direct, ..Self::default() }
    }

    pub fn cg() -> Self {
        Self { method: SolveMethod::ConjugateGradient, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("solver rel_tol {} must lie in (0, 1)", self.rel_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("solver max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

struct BlockFactor {
    idx: Vec<usize>,
    chol: Cholesky<f64, Dyn>,
}

fn factor_blocks(a: &CsrMatrix, groups: &[Vec<usize>], name: &str) -> Result<Vec<BlockFactor>> {
    groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(k, g)| {
            let b = a.dense_block(g);
            let chol = Cholesky::new(b).ok_or_else(|| Error::Solve {
                block: format!("{name}, element block {k}"),
                reason: "block is not positive definite".into(),
            })?;
            Ok(BlockFactor { idx: g.clone(), chol })
        })
        .collect()
}

fn apply_blocks(blocks: &[BlockFactor], r: &[f64], z: &mut [f64]) {
    for b in blocks {
        let rhs = DVector::from_iterator(b.idx.len(), b.idx.iter().map(|&i| r[i]));
        let s = b.chol.solve(&rhs);
        for (a, &i) in b.idx.iter().enumerate() {
            z[i] = s[a];
        }
    }
}

enum Kind {
    BlockExact(Vec<BlockFactor>),
    Dense(Cholesky<f64, Dyn>),
    Cg { blocks: Option<Vec<BlockFactor>>, covered: Vec<bool> },
}

/// A symmetric positive definite operator prepared for repeated solves.
pub struct SpdSolver {
    a: CsrMatrix,
    kind: Kind,
    cfg: SolveConfig,
    name: String,
}

impl SpdSolver {
    /// Prepares `a` for solves. `groups` lists the unknowns of each element;
    /// when `a` is block-diagonal over them every solve is exact and local.
    pub fn new(a: CsrMatrix, groups: &[Vec<usize>], cfg: SolveConfig, name: &str) -> Result<Self> {
        cfg.validate()?;
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        let n = a.nrows();
        let covers_all = {
            let mut seen = vec![false; n];
            for g in groups {
                for &i in g {
                    seen[i] = true;
                }
            }
            seen.iter().all(|&s| s)
        };
        let kind = if covers_all && !groups.is_empty() && a.is_block_diagonal(groups) {
            Kind::BlockExact(factor_blocks(&a, groups, name)?)
        } else {
            let direct = match cfg.method {
                SolveMethod::Direct => true,
                SolveMethod::ConjugateGradient => false,
                SolveMethod::Auto => n < DENSE_LIMIT,
            };
            if direct {
                let chol = Cholesky::new(a.to_dense()).ok_or_else(|| Error::Solve {
                    block: name.to_string(),
                    reason: "matrix is not positive definite".into(),
                })?;
                Kind::Dense(chol)
            } else {
                let mut covered = vec![false; n];
                let blocks = match cfg.preconditioner {
                    Preconditioner::None => None,
                    Preconditioner::BlockDiagonal => {
                        for g in groups {
                            for &i in g {
                                covered[i] = true;
                            }
                        }
                        Some(factor_blocks(&a, groups, name)?)
                    }
                };
                Kind::Cg { blocks, covered }
            }
        };
        Ok(Self { a, kind, cfg, name: name.to_string() })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, Kind::Cg { .. })
    }

    /// Whether the matrix was found block-diagonal over the element groups.
    pub fn is_block_exact(&self) -> bool {
        matches!(self.kind, Kind::BlockExact(_))
    }

    /// Solves `A x = b`, starting CG from `x0` when given.
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
            Kind::BlockExact(blocks) => {
                let mut x = vec![0.0; n];
                apply_blocks(blocks, b, &mut x);
                Ok((x, SolveStats { iterations: 0, rel_residual: 0.0 }))
            }
            Kind::Dense(chol) => {
                let mut x = chol.solve(&DVector::from_column_slice(b));
                // a couple of refinement sweeps keep the residual contract on
                // mildly ill-conditioned systems
                let mut rel = f64::INFINITY;
                for _ in 0..3 {
                    let r: Vec<f64> = self.a.spmv(x.as_slice())?.iter().zip(b).map(|(ax, bi)| bi - ax).collect();
                    rel = norm2(&r) / bnorm;
                    if rel <= self.cfg.rel_tol {
                        break;
                    }
                    x += chol.solve(&DVector::from_vec(r));
                }
                if !(rel <= self.cfg.rel_tol) {
                    let r: Vec<f64> = self.a.spmv(x.as_slice())?.iter().zip(b).map(|(ax, bi)| bi - ax).collect();
                    rel = norm2(&r) / bnorm;
                }
                if !(rel <= self.cfg.rel_tol) {
                    return Err(Error::Solve {
                        block: self.name.clone(),
                        reason: format!("direct solve residual {rel:.3e} above tolerance {:.1e}", self.cfg.rel_tol),
                    });
                }
                Ok((x.as_slice().to_vec(), SolveStats { iterations: 0, rel_residual: rel }))
            }
            Kind::Cg { blocks, covered } => {
                let pre = |r: &[f64], z: &mut [f64]| match blocks {
                    Some(bl) => {
                        apply_blocks(bl, r, z);
                        for i in 0..r.len() {
                            if !covered[i] {
                                z[i] = r[i];
                            }
                        }
                    }
                    None => z.copy_from_slice(r),
                };
                conjugate_gradient(&self.a, b, x0, &self.cfg, pre).map_err(|e| match e {
                    Error::Solve { reason, .. } => Error::Solve { block: self.name.clone(), reason },
                    e => e,
                })
            }
        }
    }
}

/// Preconditioned conjugate gradients with the stopping test `|r| <= tol |b|`.
pub fn conjugate_gradient<P>(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolveConfig,
    precond: P,
) -> Result<(Vec<f64>, SolveStats)>
where
    P: Fn(&[f64], &mut [f64]),
{
    let n = a.nrows();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats::default()));
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => return Err(Error::DimensionMismatch { expected: n, got: x0.len() }),
        None => vec![0.0; n],
    };
    let mut r = a.spmv(&x)?;
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut rn = norm2(&r);
    if rn <= cfg.rel_tol * bnorm {
        return Ok((x, SolveStats { iterations: 0, rel_residual: rn / bnorm }));
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=cfg.max_iters {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solve {
                block: String::new(),
                reason: format!("CG breakdown at iteration {it}: pᵀAp = {pap:.3e} (matrix not positive definite?)"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rn = norm2(&r);
        if rn <= cfg.rel_tol * bnorm {
            return Ok((x, SolveStats { iterations: it, rel_residual: rn / bnorm }));
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solve {
        block: String::new(),
        reason: format!("CG did not converge in {} iterations (relative residual {:.3e})", cfg.max_iters, rn / bnorm),
    })
}

/// One-shot convenience wrapper around [`SpdSolver`] without element blocks.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], cfg: &SolveConfig) -> Result<Vec<f64>> {
    let groups: Vec<Vec<usize>> = if cfg.preconditioner == Preconditioner::BlockDiagonal {
        (0..a.nrows()).map(|i| vec![i]).collect()
    } else {
        Vec::new()
    };
    let s = SpdSolver::new(a.clone(), &groups, *cfg, "matrix")?;
    Ok(s.solve(b, None)?.0)
}

#[allow(dead_code)]
pub(crate) fn dense_spd_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    Cholesky::new(a.clone()).map(|c| c.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
}
