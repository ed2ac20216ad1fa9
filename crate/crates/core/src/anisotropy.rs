//! Material-tensor bookkeeping for the 2D scalar anisotropic wave equation:
//! the wave-speed tensor A, its inverse B, spectral data, the stability
//! constants derived from them, and the plane-wave diagnostics (dispersion
//! relation, group/phase velocities, slowness curve, backward-wave scan).

use crate::{Error, Result};
use nalgebra::{Matrix2, Vector2};

/// Symmetric positive definite wave-speed tensor A with B = A^{-1} and the
/// spectral decomposition of B cached at construction.
#[derive(Debug, Clone)]
pub struct Anisotropy {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
    lambda_max: f64,
    lambda_min: f64,
    /// Angle phi0 such that B = R(phi0) diag(lambda_max, lambda_min) R(phi0)^T.
    /// Directions computed in the diagonal frame map back through it.
    rotation: f64,
}

/// Closed-form eigenvalues of a symmetric 2x2 matrix, largest first.
/// The discriminant is formed with `hypot` to avoid cancellation for
/// near-isotropic input.
fn sym_eigen(m: &Matrix2<f64>) -> (f64, f64, f64) {
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let half_tr = 0.5 * (a + c);
    let disc = f64::hypot(0.5 * (a - c), b);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    (half_tr + disc, half_tr - disc, angle)
}

impl Anisotropy {
    /// Build from the wave-speed tensor A (entries a11, a12, a22).
    pub fn from_tensor(a11: f64, a12: f64, a22: f64) -> Result<Self> {
        let a = Matrix2::new(a11, a12, a12, a22);
        let det = a11 * a22 - a12 * a12;
        if !(a11 > 0.0 && det > 0.0) {
            return Err(Error::NotSpd(format!(
                "A = [[{a11}, {a12}], [{a12}, {a22}]]"
            )));
        }
        let b = Matrix2::new(a22 / det, -a12 / det, -a12 / det, a11 / det);
        let (lambda_max, lambda_min, rotation) = sym_eigen(&b);
        Ok(Self {
            a,
            b,
            lambda_max,
            lambda_min,
            rotation,
        })
    }

    /// Build from B = A^{-1} (entries b11, b12, b22).
    pub fn from_inverse_tensor(b11: f64, b12: f64, b22: f64) -> Result<Self> {
        let det = b11 * b22 - b12 * b12;
        if !(b11 > 0.0 && det > 0.0) {
            return Err(Error::NotSpd(format!(
                "B = [[{b11}, {b12}], [{b12}, {b22}]]"
            )));
        }
        Self::from_tensor(b22 / det, -b12 / det, b11 / det)
    }

    pub fn isotropic(speed_sq: f64) -> Result<Self> {
        Self::from_tensor(speed_sq, 0.0, speed_sq)
    }

    pub fn tensor(&self) -> &Matrix2<f64> {
        &self.a
    }

    pub fn inverse_tensor(&self) -> &Matrix2<f64> {
        &self.b
    }

    /// Largest eigenvalue of B.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Smallest eigenvalue of B.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Angle of the lambda_max eigendirection of B against the x1-axis.
    pub fn rotation_angle(&self) -> f64 {
        self.rotation
    }

    pub fn det_a(&self) -> f64 {
        self.a[(0, 0)] * self.a[(1, 1)] - self.a[(0, 1)] * self.a[(1, 0)]
    }

    pub fn is_isotropic(&self, rel_tol: f64) -> bool {
        self.lambda_max - self.lambda_min <= rel_tol * self.lambda_max
    }

    /// Checks whether the material tensor is a multiple of the identity
    /// (required by the radially symmetric 1D reduction).
    pub fn isotropic_speed_sq(&self) -> Option<f64> {
        if self.is_isotropic(1e-12) && self.a[(0, 1)].abs() <= 1e-12 * self.a[(0, 0)] {
            Some(0.5 * (self.a[(0, 0)] + self.a[(1, 1)]))
        } else {
            None
        }
    }
}

/// Separation factor mu* = (lmax + lmin) / (2 sqrt(lmax lmin)) >= 1.
/// Sources supported inside radius R/mu* yield stable classical radial PMLs.
pub fn mu_star(aniso: &Anisotropy) -> f64 {
    (aniso.lambda_max + aniso.lambda_min) / (2.0 * (aniso.lambda_max * aniso.lambda_min).sqrt())
}

/// Anisotropy ratio beta = (lmax - lmin) / (lmax + lmin), in [0, 1).
pub fn beta(aniso: &Anisotropy) -> f64 {
    (aniso.lambda_max - aniso.lambda_min) / (aniso.lambda_max + aniso.lambda_min)
}

/// Admissible range for the shift ratio nu = sigma_c / gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuStar {
    /// Any nu > 0 is admissible (isotropic material).
    Unbounded,
    /// nu must stay strictly below this threshold.
    Threshold(f64),
}

impl NuStar {
    pub fn admits(&self, nu: f64) -> bool {
        match *self {
            NuStar::Unbounded => true,
            NuStar::Threshold(t) => nu < t,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            NuStar::Unbounded => None,
            NuStar::Threshold(t) => Some(t),
        }
    }
}

/// Stability threshold nu* = 2 sqrt(1/beta^2 - 1) (sqrt(1/beta^2 - 1) + 1/beta)
/// for the shifted scaling; unbounded in the isotropic case beta = 0.
pub fn nu_star(aniso: &Anisotropy) -> NuStar {
    let b = beta(aniso);
    if b <= 0.0 {
        return NuStar::Unbounded;
    }
    let w = (1.0 / (b * b) - 1.0).sqrt();
    NuStar::Threshold(2.0 * w * (w + 1.0 / b))
}

/// The two branches +-sqrt(k^T A k) of the dispersion relation
/// F(omega, k) = omega^2 - k^T A k.
pub fn dispersion_omega(aniso: &Anisotropy, k: &Vector2<f64>) -> (f64, f64) {
    let w = (aniso.a * k).dot(k).max(0.0).sqrt();
    (w, -w)
}

/// Group and phase velocity of the positive branch at wave vector k != 0.
pub fn group_phase_velocity(
    aniso: &Anisotropy,
    k: &Vector2<f64>,
) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let ksq = k.norm_squared();
    if ksq == 0.0 {
        return Err(Error::InvalidArgument(
            "group/phase velocity undefined at k = 0".into(),
        ));
    }
    let ak = aniso.a * k;
    let omega = ak.dot(k).sqrt();
    let v_g = ak / omega;
    let v_p = k * (omega / ksq);
    Ok((v_g, v_p))
}

/// Result of the backward-wave scan in a fixed direction.
#[derive(Debug, Clone)]
pub struct BackwardWaveScan {
    pub found: bool,
    /// Wave vector minimizing (v_g . e)(v_p . e) over the scanned circle.
    pub worst_k: Vector2<f64>,
    pub worst_product: f64,
    pub sample_count: usize,
}

/// Scans unit wave vectors for a backward wave in direction `e`, i.e. a mode
/// whose group and phase velocities project with opposite signs onto `e`.
/// The criterion quantifies over all k; the scan resolution is reported so
/// callers can judge the certificate.
pub fn backward_wave_in_direction(
    aniso: &Anisotropy,
    e: &Vector2<f64>,
    sample_count: usize,
) -> Result<BackwardWaveScan> {
    if (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("direction e must be a unit vector".into()));
    }
    if sample_count < 8 {
        return Err(Error::InvalidArgument("sample_count must be >= 8".into()));
    }
    let mut worst = f64::INFINITY;
    let mut worst_k = Vector2::new(1.0, 0.0);
    for i in 0..sample_count {
        let th = 2.0 * std::f64::consts::PI * i as f64 / sample_count as f64;
        let k = Vector2::new(th.cos(), th.sin());
        let (vg, vp) = group_phase_velocity(aniso, &k)?;
        let prod = vg.dot(e) * vp.dot(e);
        if prod < worst {
            worst = prod;
            worst_k = k;
        }
    }
    Ok(BackwardWaveScan {
        found: worst < 0.0,
        worst_k,
        worst_product: worst,
        sample_count,
    })
}

/// Radial variant of the backward-wave product at wave vector k:
/// (v_g . k)(v_p . k), always positive for star-shaped slowness curves.
pub fn radial_backward_product(aniso: &Anisotropy, k: &Vector2<f64>) -> Result<f64> {
    let (vg, vp) = group_phase_velocity(aniso, k)?;
    Ok(vg.dot(k) * vp.dot(k))
}

/// n points of the slowness curve {p : p^T A p = 1}, parameterized by angle.
pub fn slowness_curve(aniso: &Anisotropy, n: usize) -> Result<Vec<Vector2<f64>>> {
    if n < 3 {
        return Err(Error::InvalidArgument("slowness curve needs n >= 3".into()));
    }
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let d = Vector2::new(th.cos(), th.sin());
        let scale = (aniso.a * d).dot(&d).sqrt();
        pts.push(d / scale);
    }
    Ok(pts)
}
