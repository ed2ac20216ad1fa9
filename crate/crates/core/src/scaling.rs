//! Radial complex-scaling algebra: damping profiles, the stretch factors
//! d and d-tilde, scaled coordinates, Jacobians, scaled material tensors,
//! the complex frequency shift, and the truncation-free coordinate map.

use crate::anisotropy::Anisotropy;
use crate::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

/// Damping profile of the absorbing layer. Only the piecewise-constant
/// profile is implemented; the enum leaves room for monotone profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    PiecewiseConstant,
}

/// sigma(r) = 0 for r <= R and sigma_c for r > R.
#[derive(Debug, Clone, Copy)]
pub struct DampingProfile {
    radius_pml: f64,
    sigma_c: f64,
    kind: ProfileKind,
}

impl DampingProfile {
    pub fn piecewise_constant(radius_pml: f64, sigma_c: f64) -> Result<Self> {
        if !(radius_pml > 0.0) {
            return Err(Error::InvalidArgument("radius_pml must be positive".into()));
        }
        if !(sigma_c >= 0.0) {
            return Err(Error::InvalidArgument("sigma_c must be nonnegative".into()));
        }
        Ok(Self {
            radius_pml,
            sigma_c,
            kind: ProfileKind::PiecewiseConstant,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius_pml
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// sigma(r).
    pub fn sigma(&self, r: f64) -> f64 {
        if r > self.radius_pml {
            self.sigma_c
        } else {
            0.0
        }
    }

    /// sigma-tilde(r) = r^{-1} int_R^r sigma; for the piecewise-constant
    /// profile equal to sigma_c (r - R)/r past the interface.
    pub fn sigma_tilde(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma_tilde requires r > 0, got {r}"
            )));
        }
        if r <= self.radius_pml {
            Ok(0.0)
        } else {
            Ok(self.sigma_c * (r - self.radius_pml) / r)
        }
    }
}

/// Laplace variable restricted to the open right half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFreq(Complex64);

impl ComplexFreq {
    pub fn new(s: Complex64) -> Result<Self> {
        if s.re > 0.0 && s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::InvalidArgument(format!(
                "Laplace variable must satisfy Re s > 0, got {s}"
            )))
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// Damping profile combined with a complex frequency shift gamma >= 0.
/// gamma = 0 recovers the classical scaling.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedScaling {
    profile: DampingProfile,
    gamma: f64,
}

impl ShiftedScaling {
    pub fn new(profile: DampingProfile, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidArgument("gamma must be nonnegative".into()));
        }
        Ok(Self { profile, gamma })
    }

    pub fn classical(profile: DampingProfile) -> Self {
        Self {
            profile,
            gamma: 0.0,
        }
    }

    pub fn profile(&self) -> &DampingProfile {
        &self.profile
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Shift ratio nu = sigma_c / gamma; `None` when gamma = 0.
    pub fn nu(&self) -> Option<f64> {
        if self.gamma > 0.0 {
            Some(self.profile.sigma_c() / self.gamma)
        } else {
            None
        }
    }

    /// Shifted Laplace argument s + gamma.
    pub fn shifted(&self, s: ComplexFreq) -> Complex64 {
        s.value() + self.gamma
    }

    /// Stretch factors (d, d-tilde) at radius r:
    /// d = 1 + sigma(r)/(s + gamma), d~ = 1 + sigma~(r)/(s + gamma).
    pub fn d_pair(&self, s: ComplexFreq, r: f64) -> Result<(Complex64, Complex64)> {
        let sg = self.shifted(s);
        let d = 1.0 + self.profile.sigma(r) / sg;
        let dt = 1.0 + self.profile.sigma_tilde(r)? / sg;
        Ok((d, dt))
    }

    /// Complex-scaled coordinate x_sigma = x d~(s + gamma, ||x||).
    pub fn scaled_coordinate(
        &self,
        s: ComplexFreq,
        x: &Vector2<f64>,
    ) -> Result<Vector2<Complex64>> {
        let r = x.norm();
        if r == 0.0 {
            // the origin is never scaled
            return Ok(Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        }
        let (_, dt) = self.d_pair(s, r)?;
        Ok(Vector2::new(dt * x.x, dt * x.y))
    }

    /// Jacobian of the scaling, J = d P_par + d~ P_perp with P_par, P_perp
    /// the projectors onto span{x} and its orthogonal complement.
    pub fn jacobian(&self, s: ComplexFreq, x: &Vector2<f64>) -> Result<Matrix2<Complex64>> {
        let r = x.norm();
        if r < 1e-300 {
            if self.profile.sigma(r) != 0.0 {
                return Err(Error::InvalidArgument(
                    "scaling Jacobian undefined at the origin inside the layer".into(),
                ));
            }
            return Ok(Matrix2::identity());
        }
        let (d, dt) = self.d_pair(s, r)?;
        let xh = x / r;
        let mut j = Matrix2::zeros();
        for i in 0..2 {
            for k in 0..2 {
                let par = xh[i] * xh[k];
                let perp = if i == k { 1.0 - par } else { -par };
                j[(i, k)] = d * par + dt * perp;
            }
        }
        Ok(j)
    }

    /// Scaled material tensor A_sigma = J^{-1} A J^{-T} det J.
    pub fn a_sigma(
        &self,
        aniso: &Anisotropy,
        s: ComplexFreq,
        x: &Vector2<f64>,
    ) -> Result<Matrix2<Complex64>> {
        let j = self.jacobian(s, x)?;
        let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
        if det.norm() < 1e-280 {
            return Err(Error::SingularMatrix(format!(
                "scaling Jacobian singular at x = ({}, {}), s = {}",
                x.x,
                x.y,
                s.value()
            )));
        }
        let inv = Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det;
        let a = aniso.tensor().map(|v| Complex64::new(v, 0.0));
        Ok(inv * a * inv.transpose() * det)
    }

    /// The three rational coefficient combinations
    /// (s d d~, s d/d~, s d~/d) at radius r, evaluated through the expanded
    /// right-hand sides used by the time-domain systems:
    ///
    /// s d d~   = s + sig + sig~ + (sig sig~ - g (sig + sig~))/(s+g) - g sig sig~/(s+g)^2
    /// s d/d~   = s + (sig - sig~) - (sig - sig~)(g + sig~)/(s + g + sig~)
    /// s d~/d   = s - (sig - sig~) + (sig - sig~)(g + sig)/(s + g + sig)
    pub fn sdd_coefficients(
        &self,
        s: ComplexFreq,
        r: f64,
    ) -> Result<(Complex64, Complex64, Complex64)> {
        let sv = s.value();
        let g = self.gamma;
        let sig = self.profile.sigma(r);
        let sigt = self.profile.sigma_tilde(r)?;
        let sg = sv + g;
        let sdd = sv + sig + sigt + (sig * sigt - g * (sig + sigt)) / sg - g * sig * sigt / (sg * sg);
        let diff = sig - sigt;
        let s_d_over_dt = sv + diff - diff * (g + sigt) / (sv + g + sigt);
        let s_dt_over_d = sv - diff + diff * (g + sig) / (sv + g + sig);
        Ok((sdd, s_d_over_dt, s_dt_over_d))
    }
}

/// Bounded layer [R, R+L) mapped onto the unbounded exterior [R, inf)
/// by f(r) = R L / (R + L - r).
#[derive(Debug, Clone, Copy)]
pub struct MappedLayer {
    radius_pml: f64,
    width: f64,
}

impl MappedLayer {
    pub fn new(radius_pml: f64, width: f64) -> Result<Self> {
        if !(radius_pml > 0.0 && width > 0.0) {
            return Err(Error::InvalidArgument(
                "mapped layer needs positive radius and width".into(),
            ));
        }
        Ok(Self { radius_pml, width })
    }

    pub fn radius(&self) -> f64 {
        self.radius_pml
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// f(r) = R L / (R + L - r), a strictly increasing bijection
    /// [R, R+L) -> [R, inf).
    pub fn mapped_radius(&self, r: f64) -> Result<f64> {
        let (rp, l) = (self.radius_pml, self.width);
        if !(r >= rp && r < rp + l) {
            return Err(Error::InvalidArgument(format!(
                "mapped_radius needs r in [{rp}, {}), got {r}",
                rp + l
            )));
        }
        Ok(rp * l / (rp + l - r))
    }

    /// Derivative f'(r) = R L / (R + L - r)^2.
    pub fn mapped_radius_derivative(&self, r: f64) -> f64 {
        let d = self.radius_pml + self.width - r;
        self.radius_pml * self.width / (d * d)
    }
}
