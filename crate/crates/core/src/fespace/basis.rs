//! Modal total-degree Legendre basis scaled to an element bounding box.

use crate::mesh::Rect;
use crate::Point;

/// Number of scalar modes of total degree at most `p`.
pub const fn n_modes(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// `(i, j)` degree pairs, grouped by total degree.
pub fn mode_indices(p: usize) -> Vec<(usize, usize)> {
    let mut m = Vec::with_capacity(n_modes(p));
    for s in 0..=p {
        for j in 0..=s {
            m.push((s - j, j));
        }
    }
    m
}

/// Values and derivatives of `sqrt((2n+1)/2) L_n(x)` for `n = 0..=p`.
pub fn legendre(p: usize, x: f64, val: &mut [f64], der: &mut [f64]) {
    let mut l = [1.0, x];
    let mut d = [0.0, 1.0];
    val[0] = 1.0;
    der[0] = 0.0;
    if p >= 1 {
        val[1] = x;
        der[1] = 1.0;
    }
    for n in 1..p {
        let nf = n as f64;
        let ln = ((2.0 * nf + 1.0) * x * l[1] - nf * l[0]) / (nf + 1.0);
        let dn = d[0] + (2.0 * nf + 1.0) * l[1];
        val[n + 1] = ln;
        der[n + 1] = dn;
        l = [l[1], ln];
        d = [d[1], dn];
    }
    for n in 0..=p {
        let s = ((2 * n + 1) as f64 / 2.0).sqrt();
        val[n] *= s;
        der[n] *= s;
    }
}

/// Evaluates every mode at `x`. The modes are orthonormal in `L²(bbox)`.
pub fn eval_modal(bbox: &Rect, p: usize, x: Point, vals: &mut [f64], grads: &mut [[f64; 2]]) {
    let (w, h) = (bbox.width(), bbox.height());
    let xi = (2.0 * x[0] - (bbox.min[0] + bbox.max[0])) / w;
    let eta = (2.0 * x[1] - (bbox.min[1] + bbox.max[1])) / h;
    let mut lx = [0.0; 16];
    let mut dx = [0.0; 16];
    let mut ly = [0.0; 16];
    let mut dy = [0.0; 16];
    assert!(p < 16, "polynomial degree {p} not supported");
    legendre(p, xi, &mut lx, &mut dx);
    legendre(p, eta, &mut ly, &mut dy);
    let scale = 2.0 / (w * h).sqrt();
    let mut m = 0;
    for s in 0..=p {
        for j in 0..=s {
            let i = s - j;
            vals[m] = scale * lx[i] * ly[j];
            grads[m] = [scale * dx[i] * ly[j] * 2.0 / w, scale * lx[i] * dy[j] * 2.0 / h];
            m += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::quadrature::gauss_legendre;

    #[test]
    fn counts() {
        assert_eq!(n_modes(1), 3);
        assert_eq!(n_modes(4), 15);
        assert_eq!(mode_indices(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }

    #[test]
    fn constant_mode() {
        let b = Rect::new([1.0, 2.0], [3.0, 2.5]);
        let mut v = vec![0.0; 6];
        let mut g = vec![[0.0; 2]; 6];
        for x in [[1.0, 2.0], [2.2, 2.4], [3.0, 2.5]] {
            eval_modal(&b, 2, x, &mut v, &mut g);
            assert!((v[0] - 1.0 / b.area().sqrt()).abs() < 1e-15);
            assert_eq!(g[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn orthonormal_on_box() {
        let b = Rect::new([-0.3, 0.1], [0.9, 0.6]);
        let p = 4;
        let nb = n_modes(p);
        let (xg, wg) = gauss_legendre(p + 2);
        let mut mass = vec![0.0; nb * nb];
        let mut v = vec![0.0; nb];
        let mut g = vec![[0.0; 2]; nb];
        for (a, &s) in xg.iter().enumerate() {
            for (c, &t) in xg.iter().enumerate() {
                let x = [b.min[0] + 0.5 * (s + 1.0) * b.width(), b.min[1] + 0.5 * (t + 1.0) * b.height()];
                let w = wg[a] * wg[c] * b.area() / 4.0;
                eval_modal(&b, p, x, &mut v, &mut g);
                for i in 0..nb {
                    for j in 0..nb {
                        mass[i * nb + j] += w * v[i] * v[j];
                    }
                }
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((mass[i * nb + j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gradients_match_differences() {
        let b = Rect::new([0.0, 0.0], [2.0, 1.0]);
        let p = 3;
        let nb = n_modes(p);
        let x = [0.7, 0.4];
        let (mut v0, mut v1) = (vec![0.0; nb], vec![0.0; nb]);
        let mut g = vec![[0.0; 2]; nb];
        let mut gd = vec![[0.0; 2]; nb];
        eval_modal(&b, p, x, &mut v0, &mut g);
        let e = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            xp[d] += e;
            eval_modal(&b, p, xp, &mut v1, &mut gd);
            let mut xm = x;
            xm[d] -= e;
            let mut vm = vec![0.0; nb];
            eval_modal(&b, p, xm, &mut vm, &mut gd);
            for i in 0..nb {
                assert!(((v1[i] - vm[i]) / (2.0 * e) - g[i][d]).abs() < 1e-7);
            }
        }
    }
}
