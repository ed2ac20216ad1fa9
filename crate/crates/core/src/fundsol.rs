//! Laplace-domain fundamental solution of the radial-layer problem and the
//! geometric stability analysis around it: direction coefficients, the
//! stable/unstable classification of interior source points, branch-cut
//! witnesses, the essential-spectrum witness, and the circle-integral
//! identity used to normalize the fundamental solution.

use crate::anisotropy::Anisotropy;
use crate::quad::{brent, golden_min, periodic_trapezoid};
use crate::scaling::{ComplexFreq, DampingProfile, ShiftedScaling};
use crate::{bessel, Error, Result};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

/// Direction coefficients of a layer point x and interior point y:
/// with c = R x_hat - y, xi = ||x|| - R,
/// g11 = c_hat^T B c_hat, g12 = x_hat^T B c_hat, g22 = x_hat^T B x_hat.
#[derive(Debug, Clone, Copy)]
pub struct GammaCoeffs {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub c: Vector2<f64>,
    pub xi: f64,
}

/// Evaluates the direction coefficients for ||x|| >= R and arbitrary y.
pub fn gamma_coeffs(
    aniso: &Anisotropy,
    radius_pml: f64,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
) -> Result<GammaCoeffs> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::InvalidArgument("gamma_coeffs: x = 0".into()));
    }
    let xh = x / r;
    Ok(gamma_coeffs_dir(aniso, radius_pml, &xh, y, r - radius_pml))
}

/// Same as [`gamma_coeffs`], with the direction given explicitly.
fn gamma_coeffs_dir(
    aniso: &Anisotropy,
    radius_pml: f64,
    xh: &Vector2<f64>,
    y: &Vector2<f64>,
    xi: f64,
) -> GammaCoeffs {
    let b = aniso.inverse_tensor();
    let c = xh * radius_pml - y;
    let cn = c.norm();
    let ch = if cn > 0.0 { c / cn } else { Vector2::zeros() };
    GammaCoeffs {
        g11: (b * ch).dot(&ch),
        g12: (b * ch).dot(xh),
        g22: (b * xh).dot(xh),
        c,
        xi,
    }
}

/// g12 as a function of the direction angle, minimized by the classifier.
fn g12_at_angle(aniso: &Anisotropy, radius_pml: f64, y: &Vector2<f64>, theta: f64) -> f64 {
    let xh = Vector2::new(theta.cos(), theta.sin());
    gamma_coeffs_dir(aniso, radius_pml, &xh, y, 0.0).g12
}

/// Verdict of the source-point classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Stable,
    Unstable,
}

/// Classification of an interior source point: stable when the fundamental
/// solution stays analytic over the right half-plane for every layer point,
/// unstable when some direction carries g12 < 0.
#[derive(Debug, Clone)]
pub struct PointClass {
    pub verdict: Verdict,
    /// Direction minimizing g12; a branch-cut witness direction when unstable.
    pub witness_direction: Option<Vector2<f64>>,
    /// Minimum of g12 over the scanned circle (after local refinement).
    pub min_g12: f64,
    /// Angle of the minimizing direction.
    pub min_angle: f64,
    pub angular_samples: usize,
}

/// Margin below which a minimum of g12 counts as negative; keeps the
/// verdict from flapping across the boundary of the unstable set.
const CLASSIFY_MARGIN: f64 = 1e-12;

/// Scans directions on the unit circle for negative g12 and refines the
/// discrete minimum by golden-section search.
pub fn classify_point(
    aniso: &Anisotropy,
    profile: &DampingProfile,
    y: &Vector2<f64>,
    angular_samples: usize,
) -> Result<PointClass> {
    let radius = profile.radius();
    if y.norm() >= radius {
        return Err(Error::InvalidArgument(format!(
            "classify_point: y must lie strictly inside the interface radius {radius}"
        )));
    }
    if angular_samples < 64 {
        return Err(Error::InvalidArgument(
            "classify_point: angular_samples must be >= 64".into(),
        ));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = f64::INFINITY;
    let mut best_i = 0usize;
    for i in 0..angular_samples {
        let th = two_pi * i as f64 / angular_samples as f64;
        let v = g12_at_angle(aniso, radius, y, th);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let h = two_pi / angular_samples as f64;
    let th0 = two_pi * best_i as f64 / angular_samples as f64;
    let (th_min, v_min) = golden_min(
        |th| g12_at_angle(aniso, radius, y, th),
        th0 - h,
        th0 + h,
        1e-12,
    );
    let unstable = v_min < -CLASSIFY_MARGIN;
    Ok(PointClass {
        verdict: if unstable {
            Verdict::Unstable
        } else {
            Verdict::Stable
        },
        witness_direction: if unstable {
            Some(Vector2::new(th_min.cos(), th_min.sin()))
        } else {
            None
        },
        min_g12: v_min,
        min_angle: th_min.rem_euclid(two_pi),
        angular_samples,
    })
}

/// Complexified squared B-distance between the scaled images of x and y:
/// h = (x_s - y_s)^T B (x_s - y_s).
pub fn h_sigma(
    aniso: &Anisotropy,
    scaling: &ShiftedScaling,
    s: ComplexFreq,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
) -> Result<Complex64> {
    let xs = scaling.scaled_coordinate(s, x)?;
    let ys = scaling.scaled_coordinate(s, y)?;
    let d = xs - ys;
    let b = aniso.inverse_tensor();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for k in 0..2 {
            acc += d[i] * d[k] * b[(i, k)];
        }
    }
    Ok(acc)
}

/// A Laplace frequency and layer point at which h touches (-inf, 0],
/// certifying a branch-cut instability for the given source point.
#[derive(Debug, Clone)]
pub struct InstabilityWitness {
    pub s: Complex64,
    pub x: Vector2<f64>,
    pub h: Complex64,
}

/// Constructs a branch-cut witness for an unstable source point: a pair
/// (s, x) with h(s; x, y) on (-inf, 0] up to 1e-10 in both parts.
///
/// The frequency is chosen so the squared direction cosine of d(s) dips
/// below g12^2/(g11 g22), then the layer radius solves the resonance
/// condition Re d = -||c|| g12 / (xi g22) exactly.
pub fn instability_witness(
    aniso: &Anisotropy,
    profile: &DampingProfile,
    y: &Vector2<f64>,
) -> Result<InstabilityWitness> {
    if profile.sigma_c() <= 0.0 {
        return Err(Error::NoWitness("witness needs sigma_c > 0".into()));
    }
    let class = classify_point(aniso, profile, y, 720)?;
    let xh = match (class.verdict, class.witness_direction) {
        (Verdict::Unstable, Some(d)) => d,
        _ => {
            return Err(Error::NoWitness(format!(
                "point ({}, {}) is classified stable (min g12 = {:.3e})",
                y.x, y.y, class.min_g12
            )))
        }
    };
    let radius = profile.radius();
    let gc = gamma_coeffs_dir(aniso, radius, &xh, y, 0.0);
    // boundary case of condition (b): cos^2 arg d = g12^2/(g11 g22) makes
    // Re h vanish together with Im h, so the witness sits at the tip of
    // the cut; any smaller direction cosine pushes h into (-inf, 0)
    let cos2 = (gc.g12 * gc.g12 / (gc.g11 * gc.g22)).min(1.0);
    // pick d with Re d = 2 on that direction cosine, then s = sigma_c/(d-1)
    let dr = 2.0;
    let di = -dr * ((1.0 - cos2) / cos2).sqrt();
    let d = Complex64::new(dr, di);
    let s = Complex64::new(profile.sigma_c(), 0.0) / (d - 1.0);
    let s = ComplexFreq::new(s)?;
    // resonance radius from Re d
    let rho = radius - gc.c.norm() * gc.g12 / (dr * gc.g22);
    debug_assert!(rho > radius);
    let x = xh * rho;
    let scaling = ShiftedScaling::classical(*profile);
    let h = h_sigma(aniso, &scaling, s, &x, y)?;
    if h.re.abs() > 1e-10 || h.im.abs() > 1e-10 {
        return Err(Error::RootFinding(format!(
            "witness residual too large: h = {h}"
        )));
    }
    Ok(InstabilityWitness {
        s: s.value(),
        x,
        h,
    })
}

/// Fundamental solution G(s; x, y) = K0(s sqrt(h)) / (2 pi sqrt(det A)).
///
/// Fails with [`Error::BranchCut`] when h lands on (-inf, 0]; that failure
/// is the instability signature of the classical scaling.
pub fn green(
    aniso: &Anisotropy,
    scaling: &ShiftedScaling,
    s: ComplexFreq,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
) -> Result<Complex64> {
    if (x - y).norm() == 0.0 {
        return Err(Error::InvalidArgument("green: x = y".into()));
    }
    let h = h_sigma(aniso, scaling, s, x, y)?;
    if h.im == 0.0 && h.re <= 0.0 {
        return Err(Error::BranchCut(h));
    }
    let arg = s.value() * h.sqrt();
    let k0 = bessel::k0(arg)?;
    Ok(k0 / (2.0 * std::f64::consts::PI * aniso.det_a().sqrt()))
}

/// Witness (s0, x0, xi0) annihilating the scaled principal symbol:
/// xi0^T A_sigma(s0, x0) xi0 = 0, certifying essential spectrum in the
/// right half-plane for anisotropic media.
#[derive(Debug, Clone)]
pub struct SpectrumWitness {
    pub s0: Complex64,
    /// Layer point in Cartesian coordinates (original frame).
    pub x0: Vector2<f64>,
    /// Real phase vector (original frame).
    pub xi0: Vector2<f64>,
    /// |xi0^T A_sigma(s0, x0) xi0|.
    pub residual: f64,
    /// Angle of x0 in the diagonal frame of B.
    pub phi: f64,
    /// Anisotropy direction cosine a0(phi) = |A12| / sqrt(A11 A22).
    pub a0: f64,
}

/// Entries of A^phi = R_phi^T A R_phi for A = diag(1/lmax, 1/lmin).
fn a_phi_entries(aniso: &Anisotropy, phi: f64) -> (f64, f64, f64) {
    let a1 = 1.0 / aniso.lambda_max();
    let a2 = 1.0 / aniso.lambda_min();
    let (c, s) = (phi.cos(), phi.sin());
    let a11 = a1 * c * c + a2 * s * s;
    let a22 = a1 * s * s + a2 * c * c;
    let a12 = (a2 - a1) * s * c;
    (a11, a12, a22)
}

/// The anisotropy direction cosine a0(phi) of the diagonalized material.
pub fn spectrum_a0(aniso: &Anisotropy, phi: f64) -> f64 {
    let (a11, a12, a22) = a_phi_entries(aniso, phi);
    a12.abs() / (a11 * a22).sqrt()
}

/// Finds the essential-spectrum witness for an anisotropic material with a
/// non-decreasing damping profile. The search runs in the diagonal frame of
/// B and maps the layer point and phase back through the stored rotation.
pub fn essential_spectrum_witness(
    aniso: &Anisotropy,
    profile: &DampingProfile,
) -> Result<SpectrumWitness> {
    if aniso.is_isotropic(1e-12) {
        return Err(Error::NoWitness(
            "isotropic material: the scaled symbol never vanishes for Re s > 0".into(),
        ));
    }
    if profile.sigma_c() <= 0.0 {
        return Err(Error::NoWitness("witness needs sigma_c > 0".into()));
    }
    let radius = profile.radius();
    let phi = best_spectrum_angle(aniso);
    let (a11, a12, a22) = a_phi_entries(aniso, phi);
    let a0 = a12.abs() / (a11 * a22).sqrt();

    // cos arg z(eta, omega, r) with
    // z = eta^2 + omega^2 + (sig~ + sig) eta + sig sig~ + i (sig~ - sig) omega
    let cos_arg_z = |eta: f64, omega: f64, r: f64| -> f64 {
        let sig = profile.sigma(r);
        let sigt = profile.sigma_tilde(r).unwrap_or(0.0);
        let re = eta * eta + omega * omega + (sigt + sig) * eta + sig * sigt;
        let im = (sigt - sig) * omega;
        re / f64::hypot(re, im)
    };

    // pick r near the interface so the minimum over omega at eta = 0
    // (attained at omega^2 = sig sig~) dips below a0, then bracket eta
    let mut chosen: Option<(f64, f64)> = None;
    for i in 1..2000 {
        let r = radius * (1.0 + i as f64 * 1e-4);
        let sig = profile.sigma(r);
        let sigt = profile.sigma_tilde(r)?;
        if sigt <= 0.0 {
            continue;
        }
        let omega = (sig * sigt).sqrt();
        if cos_arg_z(0.0, omega, r) < a0 {
            chosen = Some((r, omega));
            break;
        }
    }
    let (r0, omega0) = chosen.ok_or_else(|| {
        Error::RootFinding("no radius with cos arg z < a0 near the interface".into())
    })?;
    // eta -> cos arg z sits below a0 at 0 and tends to 1 at infinity
    let mut hi = 1.0;
    while cos_arg_z(hi, omega0, r0) < a0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::RootFinding("eta bracket expansion failed".into()));
        }
    }
    let eta0 = brent(|eta| cos_arg_z(eta, omega0, r0) - a0, 0.0, hi, 1e-15)?;
    let s0 = Complex64::new(eta0, omega0);

    // phase vector in the diagonal frame
    let sfreq = ComplexFreq::new(s0)?;
    let scaling = ShiftedScaling::classical(*profile);
    let (d, dt) = scaling.d_pair(sfreq, r0)?;
    let cd = (d / dt).norm();
    let xi_phi = Vector2::new(
        cd.sqrt() * a22.sqrt(),
        -a11.sqrt() / cd.sqrt() * a12.signum(),
    );
    // map x0 and xi0 back to the original frame
    let rot = aniso.rotation_angle();
    let x0 = Vector2::new(r0 * (phi + rot).cos(), r0 * (phi + rot).sin());
    let rot_m = Matrix2::new(rot.cos(), -rot.sin(), rot.sin(), rot.cos());
    let phi_m = Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
    let xi0 = rot_m * phi_m * xi_phi;

    // residual of the scaled symbol at the witness, in the original frame
    let asig = scaling.a_sigma(aniso, sfreq, &x0)?;
    let xi_c = Vector2::new(Complex64::new(xi0.x, 0.0), Complex64::new(xi0.y, 0.0));
    let mut sym = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for k in 0..2 {
            sym += xi_c[i] * xi_c[k] * asig[(i, k)];
        }
    }
    let residual = sym.norm();
    if residual > 1e-10 {
        return Err(Error::RootFinding(format!(
            "spectrum witness residual {residual:.3e} exceeds 1e-10"
        )));
    }
    Ok(SpectrumWitness {
        s0,
        x0,
        xi0,
        residual,
        phi,
        a0,
    })
}

/// Angle maximizing |A12^phi| in the diagonal frame (pi/4 analytically; a
/// short scan keeps this robust against degenerate rounding).
fn best_spectrum_angle(aniso: &Anisotropy) -> f64 {
    let mut best = std::f64::consts::FRAC_PI_4;
    let mut best_v = 0.0;
    for i in 1..90 {
        let phi = std::f64::consts::PI * i as f64 / 180.0;
        let (a11, a12, a22) = a_phi_entries(aniso, phi);
        let v = a12.abs() / (a11 * a22).sqrt();
        if v > best_v {
            best_v = v;
            best = phi;
        }
    }
    best
}

/// Both sides of the circle-integral identity
/// oint dz / (z^T J^T B J z) = 2 pi sqrt(det A) / det J
/// at a layer point x: (quadrature value, closed form).
pub fn circle_integral_check(
    aniso: &Anisotropy,
    scaling: &ShiftedScaling,
    s: ComplexFreq,
    x: &Vector2<f64>,
) -> Result<(Complex64, Complex64)> {
    let j = scaling.jacobian(s, x)?;
    let b = aniso.inverse_tensor().map(|v| Complex64::new(v, 0.0));
    let m = j.transpose() * b * j;
    let quad = periodic_trapezoid(
        |th| {
            let (c, sn) = (th.cos(), th.sin());
            let q = m[(0, 0)] * c * c + (m[(0, 1)] + m[(1, 0)]) * c * sn + m[(1, 1)] * sn * sn;
            1.0 / q
        },
        1e-13,
    )?;
    let det_j = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
    let closed = 2.0 * std::f64::consts::PI * aniso.det_a().sqrt() / det_j;
    Ok((quad, closed))
}
