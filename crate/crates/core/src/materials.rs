//! Piecewise-constant material coefficients.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::mesh::{Physics, PolyMesh, Subdomain};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticMaterial {
    pub rho: f64,
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub zeta: f64,
}

impl ElasticMaterial {
    pub fn new(rho: f64, lambda: f64, mu: f64, zeta: f64) -> Result<Self> {
        let m = Self { rho, lambda, mu, zeta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let d = 2.0;
        if !(self.rho > 0.0 && self.mu > 0.0 && self.lambda + 2.0 * self.mu / d > 0.0 && self.zeta >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid elastic material {self:?}")));
        }
        Ok(())
    }

    pub fn cp(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho).sqrt()
    }

    pub fn cs(&self) -> f64 {
        (self.mu / self.rho).sqrt()
    }

    /// Largest eigenvalue of the stiffness tensor acting on symmetric tensors.
    pub fn stiffness_norm(&self, d: usize) -> f64 {
        stiffness_norm(self.lambda, self.mu, d)
    }
}

/// Largest eigenvalue of the isotropic stiffness tensor `λ tr(ε) I + 2 μ ε`
/// on symmetric `d x d` tensors with the Frobenius inner product.
///
/// Computed from the Mandel form of the tensor (shear rows scaled by √2 so
/// the representation is orthonormal), which has eigenvalues `2μ` and `dλ + 2μ`.
pub fn stiffness_norm(lambda: f64, mu: f64, d: usize) -> f64 {
    assert!(d == 2 || d == 3);
    let n = d * (d + 1) / 2;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = lambda;
        }
        m[(i, i)] += 2.0 * mu;
    }
    for i in d..n {
        // Mandel shear entry: σ_ij √2 = 2μ (ε_ij √2)
        m[(i, i)] = 2.0 * mu;
    }
    let e = SymmetricEigen::new(m).eigenvalues;
    e.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoroMaterial {
    pub rho_f: f64,
    pub rho_s: f64,
    pub phi: f64,
    pub a: f64,
    /// Dynamic viscosity.
    pub eta: f64,
    /// Permeability.
    pub k: f64,
    /// Biot modulus.
    pub m: f64,
    /// Biot coefficient.
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl PoroMaterial {
    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidInput(format!("invalid poro-elastic material ({why}): {self:?}")));
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return bad("porosity must lie strictly between 0 and 1");
        }
        if !(self.rho_f > 0.0 && self.rho_s > 0.0) {
            return bad("densities must be positive");
        }
        if !(self.a >= 1.0) {
            return bad("tortuosity must be at least 1");
        }
        if !(self.eta >= 0.0 && self.k > 0.0 && self.m > 0.0) {
            return bad("viscosity, permeability and Biot modulus");
        }
        if !(self.beta >= 0.0 && self.beta <= 1.0) {
            return bad("Biot coefficient must lie in [0, 1]");
        }
        if !(self.mu > 0.0 && self.lambda + self.mu > 0.0) {
            return bad("Lamé coefficients");
        }
        Ok(())
    }

    /// `(ρ, ρ_w, ρ_u)`: average, apparent fluid and reduced solid densities.
    pub fn derived_densities(&self) -> Result<(f64, f64, f64)> {
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::InvalidInput(format!("porosity {} must lie strictly between 0 and 1", self.phi)));
        }
        Ok((self.rho(), self.rho_w(), self.rho_u()))
    }

    pub fn rho(&self) -> f64 {
        self.phi * self.rho_f + (1.0 - self.phi) * self.rho_s
    }

    pub fn rho_w(&self) -> f64 {
        self.a * self.rho_f / self.phi
    }

    pub fn rho_u(&self) -> f64 {
        0.5 * self.rho_s * (1.0 - self.phi)
    }

    pub fn eta_over_k(&self) -> f64 {
        self.eta / self.k
    }

    /// The drained skeleton as an undamped elastic material of density ρ.
    pub fn skeleton(&self) -> ElasticMaterial {
        ElasticMaterial { rho: self.rho(), lambda: self.lambda, mu: self.mu, zeta: 0.0 }
    }

    /// Pointwise mass quadratic form `(ρ v + ρ_f z)·v + (ρ_f v + ρ_w z)·z`.
    pub fn mass_form(&self, v: [f64; 2], z: [f64; 2]) -> f64 {
        let d = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        self.rho() * d(v, v) + 2.0 * self.rho_f * d(v, z) + self.rho_w() * d(z, z)
    }

    /// The same form as a sum of squares:
    /// `2ρ_u|v|² + ρ_f φ |v + z/φ|² + ρ_f (a-1)/φ |z|²`.
    pub fn mass_form_split(&self, v: [f64; 2], z: [f64; 2]) -> f64 {
        let s = [v[0] + z[0] / self.phi, v[1] + z[1] / self.phi];
        2.0 * self.rho_u() * (v[0] * v[0] + v[1] * v[1])
            + self.rho_f * self.phi * (s[0] * s[0] + s[1] * s[1])
            + self.rho_f * (self.a - 1.0) / self.phi * (z[0] * z[0] + z[1] * z[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcousticMaterial {
    pub rho_a: f64,
    pub c: f64,
}

impl AcousticMaterial {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_a > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidInput(format!("invalid acoustic material {self:?}")));
        }
        Ok(())
    }
}

/// Interface resistance `ζ_τ = (1 - τ) / τ` for an open face (`τ > 0`).
pub fn zeta_tau(tau: f64) -> f64 {
    assert!(tau > 0.0 && tau <= 1.0, "zeta_tau needs tau in (0, 1], got {tau}");
    (1.0 - tau) / tau
}

/// Material records keyed by subdomain region.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialTable {
    #[serde(default)]
    pub elastic: BTreeMap<u32, ElasticMaterial>,
    #[serde(default)]
    pub poro: BTreeMap<u32, PoroMaterial>,
    #[serde(default)]
    pub acoustic: BTreeMap<u32, AcousticMaterial>,
}

impl MaterialTable {
    pub fn validate(&self) -> Result<()> {
        self.elastic.values().try_for_each(|m| m.validate())?;
        self.poro.values().try_for_each(|m| m.validate())?;
        self.acoustic.values().try_for_each(|m| m.validate())
    }

    fn missing(sd: Subdomain) -> Error {
        Error::Config(format!("no {} material for region {}", sd.physics.name(), sd.region))
    }

    pub fn elastic_of(&self, sd: Subdomain) -> Result<ElasticMaterial> {
        self.elastic.get(&sd.region).copied().ok_or_else(|| Self::missing(sd))
    }

    pub fn poro_of(&self, sd: Subdomain) -> Result<PoroMaterial> {
        self.poro.get(&sd.region).copied().ok_or_else(|| Self::missing(sd))
    }

    pub fn acoustic_of(&self, sd: Subdomain) -> Result<AcousticMaterial> {
        self.acoustic.get(&sd.region).copied().ok_or_else(|| Self::missing(sd))
    }

    /// Checks that every element of the mesh has a material of its physics.
    pub fn check_mesh(&self, mesh: &PolyMesh) -> Result<()> {
        for &sd in mesh.subdomains() {
            match sd.physics {
                Physics::Elastic => self.elastic_of(sd).map(|_| ())?,
                Physics::Poroelastic => self.poro_of(sd).map(|_| ())?,
                Physics::Acoustic => self.acoustic_of(sd).map(|_| ())?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig4() -> PoroMaterial {
        PoroMaterial { rho_f: 1.0, rho_s: 1.0, phi: 0.5, a: 1.0, eta: 1.0, k: 1.0, m: 1.0, beta: 1.0, lambda: 1.0, mu: 1.0 }
    }

    #[test]
    fn stiffness_norm_examples() {
        assert!((stiffness_norm(1.0, 1.0, 2) - 4.0).abs() < 1e-14);
        assert!((stiffness_norm(0.0, 1.0, 2) - 2.0).abs() < 1e-14);
        let (l, m) = (1.8121e9, 1.5038e9);
        assert!((stiffness_norm(l, m, 2) - (2.0 * l + 2.0 * m)).abs() < 1e-6 * l);
        assert!((stiffness_norm(1.0, 1.0, 3) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn derived_density_examples() {
        let (rho, rho_w, _) = fig4().derived_densities().unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(rho_w, 2.0);
        let lower = PoroMaterial { rho_f: 750.0, rho_s: 2650.0, phi: 0.2, a: 2.0, ..fig4() };
        let (rho, rho_w, _) = lower.derived_densities().unwrap();
        assert!((rho - 2270.0).abs() < 1e-9);
        assert!((rho_w - 7500.0).abs() < 1e-9);
        assert!(PoroMaterial { phi: 0.0, ..fig4() }.derived_densities().is_err());
        assert!(PoroMaterial { phi: 1.0, ..fig4() }.derived_densities().is_err());
    }

    #[test]
    fn invalid_records() {
        assert!(ElasticMaterial::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ElasticMaterial::new(1.0, -1.5, 1.0, 0.0).is_err());
        assert!(AcousticMaterial { rho_a: 1.0, c: 0.0 }.validate().is_err());
        assert!(fig4().validate().is_ok());
    }

    #[test]
    fn zeta_tau_values() {
        assert_eq!(zeta_tau(1.0), 0.0);
        assert_eq!(zeta_tau(0.5), 1.0);
    }

    proptest! {
        #[test]
        fn mass_form_identity(phi in 0.05f64..0.95, a in 1.0f64..4.0, rf in 0.1f64..10.0, rs in 0.1f64..10.0,
                              v in prop::array::uniform2(-1.0f64..1.0), z in prop::array::uniform2(-1.0f64..1.0)) {
            let m = PoroMaterial { rho_f: rf, rho_s: rs, phi, a, ..fig4() };
            let lhs = m.mass_form(v, z);
            let rhs = m.mass_form_split(v, z);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            if a > 1.0 + 1e-9 && (v[0] != 0.0 || v[1] != 0.0 || z[0] != 0.0 || z[1] != 0.0) {
                prop_assert!(lhs > 0.0);
            } else {
                prop_assert!(lhs >= -1e-14);
            }
        }
    }
}
