//! Manufactured solutions of the verification cases with their analytic
//! derivatives and the body forces, boundary data and initial data they induce.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::forms::{BlockSystem, LoadTerm, ProblemKind};
use crate::materials::{AcousticMaterial, ElasticMaterial, PoroMaterial};
use crate::mesh::Rect;
use crate::{Point, Result};

/// Value and first two derivatives of a function of one variable.
#[derive(Clone, Copy, Debug)]
struct Jet1 {
    v: f64,
    d: f64,
    dd: f64,
}

impl Jet1 {
    fn mul(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v * o.v, d: self.d * o.v + self.v * o.d, dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd }
    }

    fn sin(a: f64, x: f64) -> Jet1 {
        Jet1 { v: (a * x).sin(), d: a * (a * x).cos(), dd: -a * a * (a * x).sin() }
    }

    fn cos(a: f64, x: f64) -> Jet1 {
        Jet1 { v: (a * x).cos(), d: -a * (a * x).sin(), dd: -a * a * (a * x).cos() }
    }

    fn one() -> Jet1 {
        Jet1 { v: 1.0, d: 0.0, dd: 0.0 }
    }
}

/// Value, gradient and Hessian of a scalar field in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet {
    fn separable(a: Jet1, b: Jet1) -> Jet {
        Jet {
            v: a.v * b.v,
            g: [a.d * b.v, a.v * b.d],
            h: [[a.dd * b.v, a.d * b.d], [a.d * b.d, a.v * b.dd]],
        }
    }

    fn scaled(self, s: f64) -> Jet {
        Jet { v: s * self.v, g: [s * self.g[0], s * self.g[1]], h: [[s * self.h[0][0], s * self.h[0][1]], [s * self.h[1][0], s * self.h[1][1]]] }
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0][0] + self.h[1][1]
    }
}

/// A vector field as two component jets.
pub type VJet = [Jet; 2];


fn grad_div(u: &VJet) -> [f64; 2] {
    [u[0].h[0][0] + u[1].h[1][0], u[0].h[0][1] + u[1].h[1][1]]
}

/// `∇·σ(u)` for constant Lamé coefficients.
fn div_stress(u: &VJet, lambda: f64, mu: f64) -> [f64; 2] {
    let gd = grad_div(u);
    [(lambda + mu) * gd[0] + mu * u[0].laplacian(), (lambda + mu) * gd[1] + mu * u[1].laplacian()]
}

/// `sin(ωt)` or `cos(ωt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeFactor {
    Sin(f64),
    Cos(f64),
}

impl TimeFactor {
    /// The `n`-th time derivative.
    pub fn deriv(self, n: usize, t: f64) -> f64 {
        let (w, phase) = match self {
            TimeFactor::Sin(w) => (w, 0.0),
            TimeFactor::Cos(w) => (w, 0.5 * PI),
        };
        w.powi(n as i32) * (w * t + phase + n as f64 * 0.5 * PI).sin()
    }

    pub fn value(self, t: f64) -> f64 {
        self.deriv(0, t)
    }
}

/// Exact values of one field at a point and time: value, gradient and time derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldValue {
    pub v: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub dt: [f64; 2],
}

/// One of the three manufactured verification cases.
#[derive(Clone, Debug, PartialEq)]
pub struct Manufactured {
    pub kind: ProblemKind,
    pub elastic: ElasticMaterial,
    pub poro: PoroMaterial,
    pub acoustic: AcousticMaterial,
    pub time_u: TimeFactor,
    pub time_phi: TimeFactor,
}

const OMEGA: f64 = std::f64::consts::SQRT_2 * PI;

impl Manufactured {
    /// Elastic wave on the unit square with `λ = μ = ρ = ζ = 1`.
    pub fn elastic() -> Self {
        Self {
            kind: ProblemKind::Elastic,
            elastic: ElasticMaterial { rho: 1.0, lambda: 1.0, mu: 1.0, zeta: 1.0 },
            ..Self::coupled()
        }
    }

    /// Biot problem on `(-1, 0) x (0, 1)` with `w = -u`.
    pub fn poro() -> Self {
        Self { kind: ProblemKind::Poro, ..Self::coupled() }
    }

    /// The Biot case coupled to an acoustic potential on `(0, 1)²`.
    pub fn coupled() -> Self {
        Self {
            kind: ProblemKind::Coupled,
            elastic: ElasticMaterial { rho: 1.0, lambda: 1.0, mu: 1.0, zeta: 1.0 },
            poro: PoroMaterial { rho_f: 1.0, rho_s: 1.0, phi: 0.5, a: 1.0, eta: 1.0, k: 1.0, m: 1.0, beta: 1.0, lambda: 1.0, mu: 1.0 },
            acoustic: AcousticMaterial { rho_a: 1.0, c: 1.0 },
            time_u: TimeFactor::Cos(OMEGA),
            time_phi: TimeFactor::Sin(OMEGA),
        }
    }

    pub fn for_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Elastic => Self::elastic(),
            ProblemKind::Poro => Self::poro(),
            ProblemKind::Coupled => Self::coupled(),
        }
    }

    /// Displacement domain and, for the coupled case, the acoustic domain.
    pub fn domains(&self) -> (Rect, Option<Rect>) {
        match self.kind {
            ProblemKind::Elastic => (Rect::unit(), None),
            ProblemKind::Poro => (Rect::new([-1.0, 0.0], [0.0, 1.0]), None),
            ProblemKind::Coupled => (Rect::new([-1.0, 0.0], [0.0, 1.0]), Some(Rect::unit())),
        }
    }

    fn time_u(&self) -> TimeFactor {
        match self.kind {
            ProblemKind::Elastic => TimeFactor::Sin(OMEGA),
            _ => self.time_u,
        }
    }

    /// Spatial profile `U` of the displacement, `u = T(t) U(x)`.
    pub fn u_profile(&self, x: Point) -> VJet {
        match self.kind {
            ProblemKind::Elastic => {
                let s2 = |z: f64| Jet1::sin(PI, z).mul(Jet1::sin(PI, z));
                let a = Jet::separable(s2(x[0]), Jet1::sin(2.0 * PI, x[1])).scaled(-1.0);
                let b = Jet::separable(Jet1::sin(2.0 * PI, x[0]), s2(x[1]));
                [a, b]
            }
            _ => {
                let x2 = Jet1 { v: x[0] * x[0], d: 2.0 * x[0], dd: 2.0 };
                let g = x2.mul(Jet1::cos(0.5 * PI, x[0])).mul(Jet1::sin(PI, x[0]));
                let j = Jet::separable(g, Jet1::one());
                [j, j]
            }
        }
    }

    /// `W = -U` for the Biot cases.
    pub fn w_profile(&self, x: Point) -> VJet {
        let u = self.u_profile(x);
        [u[0].scaled(-1.0), u[1].scaled(-1.0)]
    }

    pub fn phi_profile(&self, x: Point) -> Jet {
        let x2 = Jet1 { v: x[0] * x[0], d: 2.0 * x[0], dd: 2.0 };
        Jet::separable(x2.mul(Jet1::sin(PI, x[0])), Jet1::sin(PI, x[1]))
    }

    fn field(j: VJet, tf: TimeFactor, t: f64) -> FieldValue {
        let (a, b) = (tf.value(t), tf.deriv(1, t));
        FieldValue {
            v: [a * j[0].v, a * j[1].v],
            grad: [[a * j[0].g[0], a * j[0].g[1]], [a * j[1].g[0], a * j[1].g[1]]],
            dt: [b * j[0].v, b * j[1].v],
        }
    }

    pub fn u(&self, x: Point, t: f64) -> FieldValue {
        Self::field(self.u_profile(x), self.time_u(), t)
    }

    pub fn w(&self, x: Point, t: f64) -> FieldValue {
        Self::field(self.w_profile(x), self.time_u(), t)
    }

    /// Acoustic potential; the second component of `v` and `dt` is unused.
    pub fn phi(&self, x: Point, t: f64) -> FieldValue {
        let j = self.phi_profile(x);
        Self::field([j, Jet::default()], self.time_phi, t)
    }

    /// Coefficient of `T^(order)(t)` in the displacement body force `f`.
    pub fn f_profile(&self, x: Point, order: usize) -> [f64; 2] {
        let u = self.u_profile(x);
        let uv = [u[0].v, u[1].v];
        match self.kind {
            ProblemKind::Elastic => {
                let e = self.elastic;
                match order {
                    2 => [e.rho * uv[0], e.rho * uv[1]],
                    1 => [2.0 * e.rho * e.zeta * uv[0], 2.0 * e.rho * e.zeta * uv[1]],
                    _ => {
                        let ds = div_stress(&u, e.lambda, e.mu);
                        let z2 = e.rho * e.zeta * e.zeta;
                        [z2 * uv[0] - ds[0], z2 * uv[1] - ds[1]]
                    }
                }
            }
            _ => {
                let p = self.poro;
                let w = self.w_profile(x);
                let wv = [w[0].v, w[1].v];
                match order {
                    2 => [p.rho() * uv[0] + p.rho_f * wv[0], p.rho() * uv[1] + p.rho_f * wv[1]],
                    1 => [0.0, 0.0],
                    _ => {
                        let ds = div_stress(&u, p.lambda, p.mu);
                        let (gu, gw) = (grad_div(&u), grad_div(&w));
                        let s = p.beta * p.m;
                        [
                            -ds[0] - s * (p.beta * gu[0] + gw[0]),
                            -ds[1] - s * (p.beta * gu[1] + gw[1]),
                        ]
                    }
                }
            }
        }
    }

    /// Coefficient of `T^(order)(t)` in the fluid body force `g`.
    pub fn g_profile(&self, x: Point, order: usize) -> [f64; 2] {
        let p = self.poro;
        let (u, w) = (self.u_profile(x), self.w_profile(x));
        let (uv, wv) = ([u[0].v, u[1].v], [w[0].v, w[1].v]);
        match order {
            2 => [p.rho_f * uv[0] + p.rho_w() * wv[0], p.rho_f * uv[1] + p.rho_w() * wv[1]],
            1 => [p.eta_over_k() * wv[0], p.eta_over_k() * wv[1]],
            _ => {
                let (gu, gw) = (grad_div(&u), grad_div(&w));
                [-p.m * (p.beta * gu[0] + gw[0]), -p.m * (p.beta * gu[1] + gw[1])]
            }
        }
    }

    /// Coefficient of `T_φ^(order)(t)` in the acoustic source `h`.
    pub fn h_profile(&self, x: Point, order: usize) -> f64 {
        let a = self.acoustic;
        let j = self.phi_profile(x);
        match order {
            2 => a.rho_a / (a.c * a.c) * j.v,
            1 => 0.0,
            _ => -a.rho_a * j.laplacian(),
        }
    }

    /// Strong-form residual sources at `(x, t)`: `(f, g, h)`.
    pub fn sources_at(&self, x: Point, t: f64) -> ([f64; 2], [f64; 2], f64) {
        let tu = self.time_u();
        let mut f = [0.0; 2];
        let mut g = [0.0; 2];
        let mut h = 0.0;
        for o in 0..3 {
            let c = tu.deriv(o, t);
            let fo = self.f_profile(x, o);
            let go = self.g_profile(x, o);
            for i in 0..2 {
                f[i] += c * fo[i];
                g[i] += c * go[i];
            }
            h += self.time_phi.deriv(o, t) * self.h_profile(x, o);
        }
        (f, g, h)
    }

    /// Body-force and Dirichlet load terms for `sys`.
    pub fn loads(&self, sys: &BlockSystem) -> Result<Vec<LoadTerm>> {
        let tu = self.time_u();
        let mut out = Vec::new();
        let me = Arc::new(self.clone());
        let biot = self.kind != ProblemKind::Elastic;
        for o in 0..3 {
            let f = |x: Point| self.f_profile(x, o);
            let g = |x: Point| self.g_profile(x, o);
            let h = |x: Point| self.h_profile(x, o);
            let v = sys.body_load(
                Some(&f),
                if biot { Some(&g) } else { None },
                if self.kind == ProblemKind::Coupled { Some(&h) } else { None },
            )?;
            if v.iter().any(|&x| x != 0.0) {
                // u and w share the time factor; φ has its own, so split the vector
                let mut vu = v.clone();
                let mut vp = vec![0.0; v.len()];
                if let Some(r) = &sys.layout.phi {
                    vp[r.clone()].copy_from_slice(&v[r.clone()]);
                    vu[r.clone()].iter_mut().for_each(|x| *x = 0.0);
                }
                let tpu = tu;
                out.push(LoadTerm::new(move |t| tpu.deriv(o, t), vu));
                if vp.iter().any(|&x| x != 0.0) {
                    let tp = me.time_phi;
                    out.push(LoadTerm::new(move |t| tp.deriv(o, t), vp));
                }
            }
        }
        let gu = |x: Point| {
            let u = self.u_profile(x);
            [u[0].v, u[1].v]
        };
        let gw = |x: Point| {
            let w = self.w_profile(x);
            [w[0].v, w[1].v]
        };
        let gphi = |x: Point| self.phi_profile(x).v;
        let du = sys.dirichlet_load(Some(&gu), if biot { Some(&gw) } else { None }, None)?;
        out.push(LoadTerm::new(move |t| tu.value(t), du));
        if self.kind == ProblemKind::Coupled {
            let dp = sys.dirichlet_load(None, None, Some(&gphi))?;
            if dp.iter().any(|&x| x != 0.0) {
                let tp = self.time_phi;
                out.push(LoadTerm::new(move |t| tp.value(t), dp));
            }
        }
        Ok(out)
    }

    /// Projected initial displacement and velocity.
    pub fn initial_state(&self, sys: &BlockSystem, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = |x: Point| self.u(x, t).v;
        let ut = |x: Point| self.u(x, t).dt;
        let w = |x: Point| self.w(x, t).v;
        let wt = |x: Point| self.w(x, t).dt;
        let p = |x: Point| self.phi(x, t).v[0];
        let pt = |x: Point| self.phi(x, t).dt[0];
        let biot = self.kind != ProblemKind::Elastic;
        let x = sys.project(Some(&u), if biot { Some(&w) } else { None }, Some(&p))?;
        let z = sys.project(Some(&ut), if biot { Some(&wt) } else { None }, Some(&pt))?;
        Ok((x, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // fourth-order central differences
    fn d1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    fn d2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    }

    // mixed second derivative of a function of the point
    fn dxy<F: Fn(Point) -> f64>(f: &F, x: Point, h: f64) -> f64 {
        d1(|a| d1(|b| f([a, b]), x[1], h), x[0], h)
    }

    fn dd<F: Fn(Point) -> f64>(f: &F, x: Point, a: usize, b: usize, h: f64) -> f64 {
        if a != b {
            return dxy(f, x, h);
        }
        d2(|s| {
            let mut y = x;
            y[a] = s;
            f(y)
        }, x[a], h)
    }

    /// Strong operators applied by finite differences to the point values only.
    fn fd_sources(m: &Manufactured, x: Point, t: f64) -> ([f64; 2], [f64; 2], f64) {
        let h = 1e-3;
        let uc = |c: usize| move |y: Point, s: f64| m.u(y, s).v[c];
        let wc = |c: usize| move |y: Point, s: f64| m.w(y, s).v[c];
        let ph = |y: Point, s: f64| m.phi(y, s).v[0];
        let tt = |f: &dyn Fn(Point, f64) -> f64| d2(|s| f(x, s), t, h);
        let tdt = |f: &dyn Fn(Point, f64) -> f64| d1(|s| f(x, s), t, h);
        // ∇·σ(u) = (λ+μ)∇div u + μΔu; grad div by mixed differences
        let hess = |f: &dyn Fn(Point, f64) -> f64, a: usize, b: usize| dd(&|y: Point| f(y, t), x, a, b, h);
        let u0 = uc(0);
        let u1 = uc(1);
        let w0 = wc(0);
        let w1 = wc(1);
        let gdiv = |f0: &dyn Fn(Point, f64) -> f64, f1: &dyn Fn(Point, f64) -> f64| {
            [hess(f0, 0, 0) + hess(f1, 1, 0), hess(f0, 0, 1) + hess(f1, 1, 1)]
        };
        let lap = |f: &dyn Fn(Point, f64) -> f64| hess(f, 0, 0) + hess(f, 1, 1);
        let gdu = gdiv(&u0, &u1);
        let gdw = gdiv(&w0, &w1);
        let lu = [lap(&u0), lap(&u1)];
        let mut f = [0.0; 2];
        let mut g = [0.0; 2];
        let comps: [(&dyn Fn(Point, f64) -> f64, &dyn Fn(Point, f64) -> f64); 2] = [(&u0, &w0), (&u1, &w1)];
        for c in 0..2 {
            let (u, w) = comps[c];
            match m.kind {
                ProblemKind::Elastic => {
                    let e = m.elastic;
                    let ds = (e.lambda + e.mu) * gdu[c] + e.mu * lu[c];
                    f[c] = e.rho * tt(u) + 2.0 * e.rho * e.zeta * tdt(u) + e.rho * e.zeta.powi(2) * u(x, t) - ds;
                }
                _ => {
                    let p = m.poro;
                    let ds = (p.lambda + p.mu) * gdu[c] + p.mu * lu[c];
                    let gp = -p.m * (p.beta * gdu[c] + gdw[c]);
                    f[c] = p.rho() * tt(u) + p.rho_f * tt(w) - (ds - p.beta * gp);
                    g[c] = p.rho_f * tt(u) + p.rho_w() * tt(w) + p.eta_over_k() * tdt(w) + gp;
                }
            }
        }
        let a = m.acoustic;
        let hh = a.rho_a / (a.c * a.c) * tt(&ph) - a.rho_a * lap(&ph);
        (f, g, hh)
    }

    #[test]
    fn forcings_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in [Manufactured::elastic(), Manufactured::poro(), Manufactured::coupled()] {
            let (dom, _) = m.domains();
            for _ in 0..20 {
                let x = [rng.gen_range(dom.min[0]..dom.max[0]), rng.gen_range(dom.min[1]..dom.max[1])];
                let t = rng.gen_range(0.0..1.0);
                let (f, g, _) = m.sources_at(x, t);
                let (fo, go, _) = fd_sources(&m, x, t);
                for c in 0..2 {
                    assert!((f[c] - fo[c]).abs() < 1e-6 * (1.0 + fo[c].abs()), "{:?} f{c}: {} vs {}", m.kind, f[c], fo[c]);
                    if m.kind != ProblemKind::Elastic {
                        assert!((g[c] - go[c]).abs() < 1e-6 * (1.0 + go[c].abs()), "{:?} g{c}: {} vs {}", m.kind, g[c], go[c]);
                    }
                }
            }
        }
        let m = Manufactured::coupled();
        for _ in 0..20 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let t = rng.gen_range(0.0..1.0);
            let (_, _, h) = m.sources_at(x, t);
            let (_, _, ho) = fd_sources(&m, x, t);
            assert!((h - ho).abs() < 1e-6 * (1.0 + ho.abs()), "h: {h} vs {ho}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for m in [Manufactured::elastic(), Manufactured::coupled()] {
            let x = [-0.3 + 0.5 * (m.kind == ProblemKind::Elastic) as usize as f64, 0.4];
            let t = 0.37;
            let u = m.u(x, t);
            for c in 0..2 {
                for a in 0..2 {
                    let fd = d1(|s| {
                        let mut y = x;
                        y[a] = s;
                        m.u(y, t).v[c]
                    }, x[a], 1e-3);
                    assert!((u.grad[c][a] - fd).abs() < 1e-8);
                }
                assert!((u.dt[c] - d1(|s| m.u(x, s).v[c], t, 1e-3)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn elastic_initial_data() {
        let m = Manufactured::elastic();
        let x = [0.3, 0.8];
        let u = m.u(x, 0.0);
        assert_eq!(u.v, [0.0, 0.0]);
        let prof = m.u_profile(x);
        assert!((u.dt[0] - OMEGA * prof[0].v).abs() < 1e-14);
        assert!((u.dt[1] - OMEGA * prof[1].v).abs() < 1e-14);
    }

    #[test]
    fn coupled_interface_data_vanish() {
        let m = Manufactured::coupled();
        for y in [0.1, 0.5, 0.77] {
            let x = [0.0, y];
            for t in [0.1, 0.2] {
                assert!(m.phi(x, t).v[0].abs() < 1e-15 && m.phi(x, t).dt[0].abs() < 1e-15);
                assert!(m.phi_profile(x).g[0].abs() < 1e-15);
                let u = m.u(x, t);
                // σ(u) n with n = (1, 0): needs ∂x u = 0 and u = 0
                assert!(u.v[0].abs() < 1e-15 && u.grad[0][0].abs() < 1e-15 && u.grad[1][0].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn time_factors() {
        let s = TimeFactor::Sin(2.0);
        let c = TimeFactor::Cos(2.0);
        let t = 0.3f64;
        assert!((s.deriv(1, t) - 2.0 * (2.0 * t).cos()).abs() < 1e-14);
        assert!((s.deriv(2, t) + 4.0 * (2.0 * t).sin()).abs() < 1e-14);
        assert!((c.value(t) - (2.0 * t).cos()).abs() < 1e-14);
        assert!((c.deriv(1, t) + 2.0 * (2.0 * t).sin()).abs() < 1e-14);
    }
}
