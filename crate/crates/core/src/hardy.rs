//! Radial Hardy-space infinite-element bases and matrices: the one-pole
//! (generalized Laguerre) and two-pole radial bases, their Laplace-domain
//! representations, the assembled radial mass/stiffness factors, and an
//! independent spatial quadrature oracle.
//!
//! All radial bases live on [1, inf) (interface radius 1); the basis
//! function with index 0 carries the interface trace (phi_0(1) = 1, all
//! higher ones vanish there), which is how the exterior couples to an
//! interior finite element space.

use crate::quad::adaptive;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Basis family of the radial exterior space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    OnePole,
    TwoPole,
}

/// Radial exterior basis: decay rate eta0 is fixed to 1; the two-pole
/// variant adds a second rate eta1 != 1. The spanned space has dimension
/// 2 (N + 1) for order parameter N.
#[derive(Debug, Clone, Copy)]
pub struct RadialBasisSpec {
    kind: BasisKind,
    eta1: f64,
    n_order: usize,
}

impl RadialBasisSpec {
    pub fn one_pole(n_order: usize) -> Self {
        Self {
            kind: BasisKind::OnePole,
            eta1: 1.0,
            n_order,
        }
    }

    pub fn two_pole(eta1: f64, n_order: usize) -> Result<Self> {
        if !(eta1 > 0.0) || eta1 == 1.0 {
            return Err(Error::InvalidArgument(
                "two-pole basis needs eta1 > 0, eta1 != 1 (use the one-pole basis at 1)".into(),
            ));
        }
        Ok(Self {
            kind: BasisKind::TwoPole,
            eta1,
            n_order,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn eta0(&self) -> f64 {
        1.0
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn n_order(&self) -> usize {
        self.n_order
    }

    /// Dimension of the spanned radial space, 2 (N + 1).
    pub fn dimension(&self) -> usize {
        2 * (self.n_order + 1)
    }

    /// Assembled discretization matrices for this basis.
    pub fn matrices(&self) -> Result<HardyMatrices> {
        match self.kind {
            BasisKind::OnePole => Ok(one_pole_matrices(2 * self.n_order + 1)),
            BasisKind::TwoPole => two_pole_matrices(self.eta1, self.n_order),
        }
    }

    /// Spatial basis function phi_n evaluated at r >= 1.
    pub fn spatial_value(&self, n: usize, r: f64) -> Result<f64> {
        match self.kind {
            BasisKind::OnePole => phi_n(n, r),
            BasisKind::TwoPole => phi_two_pole(n, self.eta1, r),
        }
    }

    /// Closed spatial form (exponential-polynomial components) of phi_n.
    pub fn spatial_fn(&self, n: usize) -> Result<SpatialFn> {
        match self.kind {
            BasisKind::OnePole => Ok(SpatialFn::one_pole(n)),
            BasisKind::TwoPole => SpatialFn::two_pole(n, self.eta1),
        }
    }
}

/// Generalized Laguerre polynomial L_{n,-1}(x).
///
/// Explicit sum for small n, three-term recurrence beyond:
/// (k+1) L_{k+1} = (2k - x) L_k - (k - 1) L_{k-1}, L_0 = 1, L_1 = -x.
pub fn laguerre_l_minus1(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return -x;
    }
    if n <= 12 {
        // sum_{k=1}^n (k/n) C(n,k) (-x)^k / k!
        let mut binom = n as f64; // C(n,1)
        let mut pow = -x;
        let mut kfact = 1.0;
        let mut acc = (1.0 / n as f64) * binom * pow / kfact;
        for k in 2..=n {
            binom *= (n - k + 1) as f64 / k as f64;
            pow *= -x;
            kfact *= k as f64;
            acc += (k as f64 / n as f64) * binom * pow / kfact;
        }
        acc
    } else {
        let mut p0 = 1.0;
        let mut p1 = -x;
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - x) * p1 - (kf - 1.0) * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }
}

/// Standard Laguerre polynomial L_n(x) (used for derivatives of the
/// one-pole basis through L'_{n,-1} = -L_{n-1}).
fn laguerre_l0(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// One-pole spatial basis phi_n(r) = exp(1 - r) L_{n,-1}(2 r - 2), r >= 1.
pub fn phi_n(n: usize, r: f64) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "radial basis defined on r >= 1, got {r}"
        )));
    }
    Ok((1.0 - r).exp() * laguerre_l_minus1(n, 2.0 * r - 2.0))
}

/// Two-pole spatial basis phi_n^eta(r), obtained from the exact
/// partial-fraction decomposition of its Laplace transform.
pub fn phi_two_pole(n: usize, eta: f64, r: f64) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "radial basis defined on r >= 1, got {r}"
        )));
    }
    Ok(SpatialFn::two_pole(n, eta)?.eval(r - 1.0))
}

// ---------------------------------------------------------------------------
// exponential-polynomial spatial representations
// ---------------------------------------------------------------------------

/// A finite sum of terms e^{-rate xi} * poly(xi) on xi = r - 1 >= 0.
#[derive(Debug, Clone)]
pub struct SpatialFn {
    /// (decay rate, polynomial coefficients in ascending order)
    pub terms: Vec<(f64, Vec<f64>)>,
}

impl SpatialFn {
    /// One-pole phi_n as a single exponential-polynomial term.
    pub fn one_pole(n: usize) -> Self {
        // coefficients of L_{n,-1}(2 xi) by the recurrence on coefficients
        let mut p0 = vec![1.0];
        if n == 0 {
            return Self {
                terms: vec![(1.0, p0)],
            };
        }
        let mut p1 = vec![0.0, -2.0]; // L_{1,-1}(2 xi) = -2 xi
        for k in 1..n {
            let kf = k as f64;
            // (k+1) L_{k+1}(2xi) = (2k - 2xi) L_k - (k-1) L_{k-1}
            let mut p2 = vec![0.0; p1.len() + 1];
            for (i, &c) in p1.iter().enumerate() {
                p2[i] += 2.0 * kf * c;
                p2[i + 1] -= 2.0 * c;
            }
            for (i, &c) in p0.iter().enumerate() {
                p2[i] -= (kf - 1.0) * c;
            }
            for c in p2.iter_mut() {
                *c /= kf + 1.0;
            }
            p0 = p1;
            p1 = p2;
        }
        Self {
            terms: vec![(1.0, p1)],
        }
    }

    /// Two-pole phi_n^eta by partial fractions of the Laplace transform.
    pub fn two_pole(n: usize, eta: f64) -> Result<Self> {
        let (a, b) = two_pole_partial_fractions(n, eta)?;
        let to_poly = |res: &[f64]| -> Vec<f64> {
            // sum_m res[m-1] xi^{m-1} / (m-1)!
            let mut fact = 1.0;
            res.iter()
                .enumerate()
                .map(|(i, &c)| {
                    if i > 0 {
                        fact *= i as f64;
                    }
                    c / fact
                })
                .collect()
        };
        let mut terms = Vec::new();
        if !a.is_empty() {
            terms.push((1.0, to_poly(&a)));
        }
        if !b.is_empty() {
            terms.push((eta, to_poly(&b)));
        }
        Ok(Self { terms })
    }

    /// Value at xi >= 0.
    pub fn eval(&self, xi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(rate, poly)| (-rate * xi).exp() * poly_eval(poly, xi))
            .sum()
    }

    /// Derivative d/dxi.
    pub fn derivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(rate, poly)| {
                let mut d = poly_derivative(poly);
                // e^{-a xi} (p' - a p)
                if d.len() < poly.len() {
                    d.resize(poly.len(), 0.0);
                }
                for (i, &c) in poly.iter().enumerate() {
                    d[i] -= rate * c;
                }
                (*rate, d)
            })
            .collect();
        Self { terms }
    }

    /// Slowest decay rate among the terms.
    pub fn min_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, _)| *r)
            .fold(f64::INFINITY, f64::min)
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ci)| i as f64 * ci)
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// partial fractions of the two-pole Laplace basis
// ---------------------------------------------------------------------------

/// Truncated Taylor coefficients of (u + c)^k around u = 0.
fn shifted_power_series(c: f64, k: usize, deg: usize) -> Vec<f64> {
    // binomial expansion: sum_i C(k, i) c^{k-i} u^i
    let mut out = vec![0.0; deg + 1];
    let mut binom = 1.0;
    let top = k.min(deg);
    for i in 0..=top {
        out[i] = binom * c.powi((k - i) as i32);
        binom *= (k - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Truncated Taylor coefficients of (u + c)^{-k} around u = 0 (c != 0).
fn inv_shifted_power_series(c: f64, k: usize, deg: usize) -> Vec<f64> {
    // c^{-k} sum_i (-1)^i C(k-1+i, i) (u/c)^i
    let mut out = vec![0.0; deg + 1];
    let mut coef = c.powi(-(k as i32));
    out[0] = coef;
    for i in 1..=deg {
        coef *= -((k - 1 + i) as f64) / (i as f64) / c;
        out[i] = coef;
    }
    out
}

fn truncate(mut v: Vec<f64>, deg: usize) -> Vec<f64> {
    v.truncate(deg + 1);
    v.resize(deg + 1, 0.0);
    v
}

/// Partial fractions of
///   Phi_n^eta(p) = -(1+eta) (p-1)^j (p-eta)^k / ((p+1)^{j+1} (p+eta)^{k+1}),
/// j = floor(n/2), k = floor((n-1)/2) for n >= 1 (n = 0: 1/(p+1)).
///
/// Returns residue vectors (A_1..A_{j+1}, B_1..B_{k+1}) of the poles at -1
/// and -eta; the decomposition is validated against the rational form at
/// sample points to 1e-10 relative.
fn two_pole_partial_fractions(n: usize, eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if eta == 1.0 || eta <= 0.0 {
        return Err(Error::InvalidArgument(
            "partial fractions need eta > 0, eta != 1".into(),
        ));
    }
    if n == 0 {
        return Ok((vec![1.0], vec![]));
    }
    let j = n / 2;
    let k = (n - 1) / 2;
    let scale = -(1.0 + eta);

    // Taylor around p = -1 (u = p + 1) of Phi (p+1)^{j+1}, degree j
    let a = {
        let f1 = shifted_power_series(-2.0, j, j); // (p-1)^j = (u-2)^j
        let f2 = shifted_power_series(-(1.0 + eta), k, j); // (p-eta)^k
        let f3 = inv_shifted_power_series(eta - 1.0, k + 1, j); // (p+eta)^{-(k+1)}
        let prod = truncate(poly_mul(&truncate(poly_mul(&f1, &f2), j), &f3), j);
        // A_{j+1-i} = prod[i]
        let mut a = vec![0.0; j + 1];
        for (i, &c) in prod.iter().enumerate() {
            a[j - i] = scale * c;
        }
        a
    };
    // Taylor around p = -eta (u = p + eta) of Phi (p+eta)^{k+1}, degree k
    let b = {
        let f1 = shifted_power_series(-(1.0 + eta), j, k); // (p-1)^j
        let f2 = shifted_power_series(-2.0 * eta, k, k); // (p-eta)^k
        let f3 = inv_shifted_power_series(1.0 - eta, j + 1, k); // (p+1)^{-(j+1)}
        let prod = truncate(poly_mul(&truncate(poly_mul(&f1, &f2), k), &f3), k);
        let mut b = vec![0.0; k + 1];
        for (i, &c) in prod.iter().enumerate() {
            b[k - i] = scale * c;
        }
        b
    };

    // residual check on the rational form
    for &re in &[0.4, 1.7, 3.1] {
        for &im in &[0.0, 0.9] {
            let p = Complex64::new(re, im);
            let exact = phi_laplace_two_pole(n as i64, eta, p)?;
            let mut apx = Complex64::new(0.0, 0.0);
            for (m, &c) in a.iter().enumerate() {
                apx += c / (p + 1.0).powi(m as i32 + 1);
            }
            for (m, &c) in b.iter().enumerate() {
                apx += c / (p + eta).powi(m as i32 + 1);
            }
            if (apx - exact).norm() > 1e-10 * exact.norm().max(1e-30) {
                return Err(Error::RootFinding(format!(
                    "partial fractions of basis {n} (eta = {eta}) failed the residual check: \
                     {apx} vs {exact} at p = {p}"
                )));
            }
        }
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Laplace-domain basis values
// ---------------------------------------------------------------------------

fn check_pole(p: Complex64, at: f64) -> Result<()> {
    if (p + at).norm() < 1e-14 {
        return Err(Error::InvalidArgument(format!("pole hit at p = {p}")));
    }
    Ok(())
}

/// One-pole Phi_n(p): 1/(p+1) for n = 0, else -2/(p+1)^2 ((p-1)/(p+1))^{n-1}.
pub fn phi_laplace_one_pole(n: i64, p: Complex64) -> Result<Complex64> {
    check_pole(p, 1.0)?;
    if n < 0 {
        return Err(Error::InvalidArgument("phi index must be >= 0".into()));
    }
    if n == 0 {
        return Ok(1.0 / (p + 1.0));
    }
    let t = (p - 1.0) / (p + 1.0);
    Ok(-2.0 / ((p + 1.0) * (p + 1.0)) * t.powi(n as i32 - 1))
}

/// One-pole Psi_n(p) = -2/(p+1) ((p-1)/(p+1))^n, with Psi_{-1} = 0.
pub fn psi_laplace_one_pole(n: i64, p: Complex64) -> Result<Complex64> {
    if n < 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_pole(p, 1.0)?;
    let t = (p - 1.0) / (p + 1.0);
    Ok(-2.0 / (p + 1.0) * t.powi(n as i32))
}

/// Two-pole Psi_n^eta(p), with Psi_{-1} = 0.
pub fn psi_laplace_two_pole(n: i64, eta: f64, p: Complex64) -> Result<Complex64> {
    if n < 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_pole(p, 1.0)?;
    check_pole(p, eta)?;
    let t = (p - 1.0) / (p + 1.0);
    let u = (p - eta) / (p + eta);
    let jj = ((n + 1) / 2) as i32;
    let kk = (n / 2) as i32;
    Ok(-(1.0 + eta) / (p + eta) * t.powi(jj) * u.powi(kk))
}

/// Two-pole companion basis Psi~_n^eta(p) (roles of the rates swapped).
pub fn psi_tilde_laplace_two_pole(n: i64, eta: f64, p: Complex64) -> Result<Complex64> {
    if n < 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    check_pole(p, 1.0)?;
    check_pole(p, eta)?;
    let t = (p - 1.0) / (p + 1.0);
    let u = (p - eta) / (p + eta);
    let jj = ((n + 1) / 2) as i32;
    let kk = (n / 2) as i32;
    Ok(-(1.0 + eta) / (p + 1.0) * u.powi(jj) * t.powi(kk))
}

/// Two-pole Phi_n^eta(p) = Psi_{n-1}^eta(p) / (p + 1).
pub fn phi_laplace_two_pole(n: i64, eta: f64, p: Complex64) -> Result<Complex64> {
    check_pole(p, 1.0)?;
    if n < 0 {
        return Err(Error::InvalidArgument("phi index must be >= 0".into()));
    }
    if n == 0 {
        return Ok(1.0 / (p + 1.0));
    }
    Ok(psi_laplace_two_pole(n - 1, eta, p)? / (p + 1.0))
}

// ---------------------------------------------------------------------------
// discretization matrices
// ---------------------------------------------------------------------------

/// The Laplace-domain factors of the radial matrices: the basis-change
/// operators T-, T+, the bilinear form Q, and the shifted differential
/// operator D~; assembled products give the radial mass and stiffness
/// blocks.
#[derive(Debug, Clone)]
pub struct HardyMatrices {
    pub t_minus: DMatrix<f64>,
    pub t_plus: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub d_tilde: DMatrix<f64>,
}

impl HardyMatrices {
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// mass_{nm} = int_1^inf phi_n phi_m dr = (T-^T Q T-)_{nm}.
    pub fn mass(&self) -> DMatrix<f64> {
        self.t_minus.transpose() * &self.q * &self.t_minus
    }

    /// r-weighted mass int_1^inf r phi_n phi_m dr = (T-^T D~^T Q T-)_{nm}.
    pub fn r_mass(&self) -> DMatrix<f64> {
        self.t_minus.transpose() * self.d_tilde.transpose() * &self.q * &self.t_minus
    }

    /// r-weighted derivative coupling int_1^inf r phi_n' phi_m dr
    /// = (T+^T D~^T Q T-)_{nm}.
    pub fn r_deriv(&self) -> DMatrix<f64> {
        self.t_plus.transpose() * self.d_tilde.transpose() * &self.q * &self.t_minus
    }
}

/// One-pole matrices of size (M+1) x (M+1): T+- = (+-I + superdiagonal)/2,
/// Q = 2 I, and the tridiagonal shifted differential operator.
pub fn one_pole_matrices(m_order: usize) -> HardyMatrices {
    let m = m_order + 1;
    let mut t_minus = DMatrix::zeros(m, m);
    let mut t_plus = DMatrix::zeros(m, m);
    for i in 0..m {
        t_minus[(i, i)] = -0.5;
        t_plus[(i, i)] = 0.5;
        if i + 1 < m {
            t_minus[(i, i + 1)] = 0.5;
            t_plus[(i, i + 1)] = 0.5;
        }
    }
    let q = DMatrix::identity(m, m) * 2.0;
    let mut tri = DMatrix::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = -(2.0 * i as f64 + 1.0);
        if i > 0 {
            tri[(i, i - 1)] = i as f64;
        }
        if i + 1 < m {
            tri[(i, i + 1)] = i as f64 + 1.0;
        }
    }
    let d_tilde = DMatrix::identity(m, m) - tri * 0.5;
    HardyMatrices {
        t_minus,
        t_plus,
        q,
        d_tilde,
    }
}

/// Two-pole matrices of size 2(N+1) x 2(N+1). T+- and Q follow the closed
/// block forms; the differential-operator matrix is built by exact
/// partial-fraction expansion of D_p on the companion basis (the closed
/// form printed for it is not reproducible; the spatial quadrature oracle
/// arbitrates, see the tests).
pub fn two_pole_matrices(eta: f64, n_order: usize) -> Result<HardyMatrices> {
    if !(eta > 0.0) || eta == 1.0 {
        return Err(Error::InvalidArgument(
            "two-pole matrices need eta > 0, eta != 1".into(),
        ));
    }
    let nb = n_order + 1; // number of 2x2 blocks
    let m = 2 * nb;
    // T blocks
    let tb = [[(1.0 - eta) / (1.0 + eta), 1.0], [0.0, 0.0]];
    let tu = [[(eta - 1.0) / (eta + 1.0), 0.0], [1.0, 0.0]];
    let mut tcal = DMatrix::zeros(m, m);
    for blk in 0..nb {
        for i in 0..2 {
            for j in 0..2 {
                tcal[(2 * blk + i, 2 * blk + j)] = tb[i][j];
                if blk + 1 < nb {
                    tcal[(2 * blk + i, 2 * (blk + 1) + j)] = tu[i][j];
                }
            }
        }
    }
    let id = DMatrix::<f64>::identity(m, m);
    let t_minus = (&tcal - &id) * (1.0 / (2.0 * eta));
    let t_plus = (&tcal + &id) * 0.5;
    // Q blocks
    let off = (1.0 - eta) / (1.0 + eta);
    let qscale = (1.0 + eta) * (1.0 + eta) / 2.0;
    let mut q = DMatrix::zeros(m, m);
    for blk in 0..nb {
        q[(2 * blk, 2 * blk)] = qscale;
        q[(2 * blk + 1, 2 * blk + 1)] = qscale;
        q[(2 * blk, 2 * blk + 1)] = qscale * off;
        q[(2 * blk + 1, 2 * blk)] = qscale * off;
    }
    let d_tilde = two_pole_d_tilde(eta, m)?;
    Ok(HardyMatrices {
        t_minus,
        t_plus,
        q,
        d_tilde,
    })
}

/// Partial-fraction vector of the companion basis function Psi~_n over the
/// elementary fractions 1/(p+1)^m, 1/(p+eta)^m:
/// Psi~_n = -(1+eta) (p-eta)^{k'} (p-1)^{j'} / ((p+1)^{j'+1} (p+eta)^{k'})
/// with k' = floor((n+1)/2), j' = floor(n/2).
fn psi_tilde_partial_fractions(n: usize, eta: f64) -> (Vec<f64>, Vec<f64>) {
    let kp = (n + 1) / 2;
    let jp = n / 2;
    let scale = -(1.0 + eta);
    // pole at -1, multiplicity jp + 1
    let a = {
        let deg = jp;
        let f1 = shifted_power_series(-(1.0 + eta), kp, deg); // (p - eta)^{k'}
        let f2 = shifted_power_series(-2.0, jp, deg); // (p - 1)^{j'}
        let prod = if kp == 0 {
            truncate(f2, deg)
        } else {
            let base = truncate(poly_mul(&f1, &f2), deg);
            if kp > 0 {
                truncate(
                    poly_mul(&base, &inv_shifted_power_series(eta - 1.0, kp, deg)),
                    deg,
                )
            } else {
                base
            }
        };
        let mut a = vec![0.0; jp + 1];
        for (i, &c) in prod.iter().enumerate() {
            a[jp - i] = scale * c;
        }
        a
    };
    // pole at -eta, multiplicity k'
    let b = if kp == 0 {
        vec![]
    } else {
        let deg = kp - 1;
        let f1 = shifted_power_series(-2.0 * eta, kp, deg); // (p - eta)^{k'}
        let f2 = shifted_power_series(-(1.0 + eta), jp, deg); // (p - 1)^{j'}
        let f3 = inv_shifted_power_series(1.0 - eta, jp + 1, deg); // (p+1)^{-(j'+1)}
        let prod = truncate(poly_mul(&truncate(poly_mul(&f1, &f2), deg), &f3), deg);
        let mut b = vec![0.0; kp];
        for (i, &c) in prod.iter().enumerate() {
            b[kp - 1 - i] = scale * c;
        }
        b
    };
    (a, b)
}

/// Matrix of the projected operator P D_p, D_p = 1 - d/dp, on the companion
/// basis Psi~_0..Psi~_{m-1}, computed exactly through partial fractions.
fn two_pole_d_tilde(eta: f64, m: usize) -> Result<DMatrix<f64>> {
    let ext = m + 2; // D_p raises the basis index by at most 2
    // elementary-fraction layout: index 2t   <-> 1/(p+1)^{t+1}
    //                             index 2t+1 <-> 1/(p+eta)^{t+1}
    let dim = ext;
    let pf_vec = |a: &[f64], b: &[f64], extra: usize| -> Vec<f64> {
        let mut v = vec![0.0; dim + extra];
        for (t, &c) in a.iter().enumerate() {
            v[2 * t] = c;
        }
        for (t, &c) in b.iter().enumerate() {
            v[2 * t + 1] = c;
        }
        v
    };
    // columns of the basis-change matrix C: Psi~_n over elementary fractions
    let mut cols = Vec::with_capacity(ext);
    for n in 0..ext {
        let (a, b) = psi_tilde_partial_fractions(n, eta);
        cols.push(pf_vec(&a, &b, 0));
    }
    // D_p Psi~_n in the elementary basis: identity part plus
    // -d/dp [c/(p+q)^t] = t c/(p+q)^{t+1}
    let mut d_full = DMatrix::<f64>::zeros(m, m);
    for n in 0..m {
        let col = &cols[n];
        let mut rhs = vec![0.0; dim + 2];
        for (idx, &c) in col.iter().enumerate() {
            rhs[idx] += c; // identity part
            let t = idx / 2 + 1; // current multiplicity
            rhs[idx + 2] += t as f64 * c; // -d/dp shifts multiplicity up
        }
        // expand rhs over Psi~_0..Psi~_{ext-1} by back substitution:
        // column n introduces elementary fraction n (staircase structure)
        let mut x = vec![0.0; ext];
        let mut resid = rhs;
        for nn in (0..ext).rev() {
            let pivot = cols[nn][nn];
            let coef = resid[nn] / pivot;
            x[nn] = coef;
            if coef != 0.0 {
                for (idx, &c) in cols[nn].iter().enumerate() {
                    resid[idx] -= coef * c;
                }
            }
        }
        // the truncated remainder beyond index ext-1 is dropped by the
        // projection; everything below must have been matched exactly
        for (idx, &rv) in resid.iter().enumerate().take(ext) {
            if rv.abs() > 1e-8 * (1.0 + rhs_norm(&x)) {
                return Err(Error::RootFinding(format!(
                    "basis expansion residual {rv:.3e} at fraction {idx} (eta = {eta})"
                )));
            }
        }
        for i in 0..m {
            d_full[(i, n)] = x[i];
        }
    }
    Ok(d_full)
}

fn rhs_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

// ---------------------------------------------------------------------------
// quadrature oracle
// ---------------------------------------------------------------------------

/// The three radial matrices computed independently by adaptive Gauss
/// quadrature of the spatial basis products, adapted to the slowest decay
/// rate min(1, eta): (mass, r-weighted mass, r-weighted derivative).
pub fn quadrature_oracle(
    spec: &RadialBasisSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let m = spec.dimension();
    let fns: Vec<SpatialFn> = (0..m)
        .map(|n| spec.spatial_fn(n))
        .collect::<Result<_>>()?;
    let ders: Vec<SpatialFn> = fns.iter().map(|f| f.derivative()).collect();
    let min_rate = fns
        .iter()
        .map(|f| f.min_rate())
        .fold(f64::INFINITY, f64::min);
    // integration window sized so the discarded tail is below 1e-18
    // relative to the slowest-decaying product
    let cut = 45.0 / (2.0 * min_rate);
    let mut mass = DMatrix::zeros(m, m);
    let mut rmass = DMatrix::zeros(m, m);
    let mut rderiv = DMatrix::zeros(m, m);
    for n in 0..m {
        for mm in 0..m {
            if mm <= n {
                let v = adaptive(
                    |xi| fns[n].eval(xi) * fns[mm].eval(xi),
                    0.0,
                    cut,
                    1e-13,
                    &[1.0, 5.0],
                )?;
                mass[(n, mm)] = v;
                mass[(mm, n)] = v;
                let w = adaptive(
                    |xi| (1.0 + xi) * fns[n].eval(xi) * fns[mm].eval(xi),
                    0.0,
                    cut,
                    1e-13,
                    &[1.0, 5.0],
                )?;
                rmass[(n, mm)] = w;
                rmass[(mm, n)] = w;
            }
            let d = adaptive(
                |xi| (1.0 + xi) * ders[n].eval(xi) * fns[mm].eval(xi),
                0.0,
                cut,
                1e-13,
                &[1.0, 5.0],
            )?;
            rderiv[(n, mm)] = d;
        }
    }
    Ok((mass, rmass, rderiv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn laguerre_small_orders() {
        assert_eq!(laguerre_l_minus1(0, 3.7), 1.0);
        for &x in &[0.0, 0.5, 2.0, 10.0] {
            assert!((laguerre_l_minus1(1, x) + x).abs() < 1e-15);
            // n = 2: x^2/2 - x
            assert!((laguerre_l_minus1(2, x) - (x * x / 2.0 - x)).abs() < 1e-13);
        }
        // sum and recurrence agree around the switch point
        for n in 10..=14 {
            for &x in &[0.3, 1.9, 7.5] {
                let mut p0 = 1.0;
                let mut p1 = -x;
                for k in 1..n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - x) * p1 - (kf - 1.0) * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                assert!(
                    (laguerre_l_minus1(n, x) - p1).abs() < 1e-11 * p1.abs().max(1.0),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn laguerre_matches_rodrigues_oracle() {
        // L_{n,-1}(x) = (x e^x / n) d^n/dx^n (x^{n-1} e^{-x}), checked by
        // symbolic differentiation of polynomial * e^{-x}
        let n = 5;
        // represent q(x) e^{-x} by q's coefficients; d/dx -> q' - q
        let mut q = vec![0.0; n];
        q[n - 1] = 1.0; // x^{n-1}
        for _ in 0..n {
            let mut dq = poly_derivative(&q);
            if dq.len() < q.len() {
                dq.resize(q.len(), 0.0);
            }
            for (i, &c) in q.iter().enumerate() {
                dq[i] -= c;
            }
            q = dq;
        }
        for &x in &[0.3, 1.0, 2.7, 6.0] {
            let oracle = x / n as f64 * poly_eval(&q, x);
            let got = laguerre_l_minus1(n, x);
            assert!((got - oracle).abs() < 1e-10 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn phi_values_at_interface() {
        assert!((phi_n(0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        for n in 1..=8 {
            assert!(phi_n(n, 1.0).unwrap().abs() < 1e-13);
        }
        // phi_0(r) = e^{1-r}
        for &r in &[1.0, 1.5, 3.0] {
            assert!((phi_n(0, r).unwrap() - (1.0 - r).exp()).abs() < 1e-15);
        }
        assert!(phi_n(0, 0.5).is_err());
        // two-pole interface values via partial fractions
        for &eta in &[0.5, 2.0, 20.0] {
            assert!((phi_two_pole(0, eta, 1.0).unwrap() - 1.0).abs() < 1e-12);
            for n in 1..=6 {
                assert!(
                    phi_two_pole(n, eta, 1.0).unwrap().abs() < 1e-10,
                    "eta={eta} n={n}"
                );
            }
        }
    }

    #[test]
    fn two_pole_first_basis_functions() {
        // phi_1^eta(r) = -(1+eta)/(1-eta) (e^{-eta(r-1)} - e^{-(r-1)})
        for &eta in &[0.5, 2.0, 20.0] {
            for &r in &[1.0, 1.3, 2.4, 5.0] {
                let xi: f64 = r - 1.0;
                let expect = -(1.0 + eta) / (1.0 - eta) * ((-eta * xi).exp() - (-xi).exp());
                let got = phi_two_pole(1, eta, r).unwrap();
                assert!(
                    (got - expect).abs() < 1e-12 * expect.abs().max(1.0),
                    "eta={eta} r={r}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn one_pole_frozen_small_matrices() {
        let h = one_pole_matrices(1);
        let mass = h.mass();
        assert!((mass[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((mass[(0, 1)] + 0.5).abs() < 1e-14);
        assert!((mass[(1, 0)] + 0.5).abs() < 1e-14);
        assert!((mass[(1, 1)] - 1.0).abs() < 1e-14);
        let rmass = h.r_mass();
        let expect = [[0.75, -1.0], [-1.0, 2.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((rmass[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
        // Q = 2 Id for any order
        for m in [0usize, 3, 9] {
            let h = one_pole_matrices(m);
            assert_eq!(h.q, DMatrix::identity(m + 1, m + 1) * 2.0);
        }
    }

    #[test]
    fn one_pole_matches_oracle_up_to_21() {
        let spec = RadialBasisSpec::one_pole(10); // M = 21
        let h = spec.matrices().unwrap();
        let (mass_o, rmass_o, rderiv_o) = quadrature_oracle(&spec).unwrap();
        assert!(max_abs_diff(&h.mass(), &mass_o) < 1e-10);
        assert!(max_abs_diff(&h.r_mass(), &rmass_o) < 1e-10);
        assert!(max_abs_diff(&h.r_deriv(), &rderiv_o) < 1e-10);
    }

    #[test]
    fn two_pole_matches_oracle() {
        for &eta in &[0.5, 2.0, 20.0] {
            for &n in &[0usize, 1, 4] {
                let spec = RadialBasisSpec::two_pole(eta, n).unwrap();
                let h = spec.matrices().unwrap();
                let (mass_o, rmass_o, rderiv_o) = quadrature_oracle(&spec).unwrap();
                assert!(
                    max_abs_diff(&h.mass(), &mass_o) < 1e-9,
                    "mass eta={eta} n={n}: {}",
                    max_abs_diff(&h.mass(), &mass_o)
                );
                assert!(
                    max_abs_diff(&h.r_mass(), &rmass_o) < 1e-9,
                    "rmass eta={eta} n={n}: {}",
                    max_abs_diff(&h.r_mass(), &rmass_o)
                );
                assert!(
                    max_abs_diff(&h.r_deriv(), &rderiv_o) < 1e-9,
                    "rderiv eta={eta} n={n}: {}",
                    max_abs_diff(&h.r_deriv(), &rderiv_o)
                );
            }
        }
    }

    #[test]
    fn two_pole_hand_computed_2x2() {
        // eta = 2, N = 0: mass = [[1/2, -1/2], [-1/2, 3/4]],
        // r-mass = [[3/4, -11/12], [-11/12, 25/16]] (direct integrals of
        // e^{-xi} and 3(e^{-2 xi} - e^{-xi}))
        let h = two_pole_matrices(2.0, 0).unwrap();
        let mass = h.mass();
        let rmass = h.r_mass();
        let m_expect = [[0.5, -0.5], [-0.5, 0.75]];
        let r_expect = [[0.75, -11.0 / 12.0], [-11.0 / 12.0, 25.0 / 16.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((mass[(i, j)] - m_expect[i][j]).abs() < 1e-13);
                assert!((rmass[(i, j)] - r_expect[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn q_blocks_limit_and_positivity() {
        // eta -> 1 limit of the Q blocks is 2 Id
        for &eta in &[1.0 + 1e-9, 1.0 - 1e-9] {
            let off: f64 = (1.0 - eta) / (1.0 + eta);
            let scale: f64 = (1.0 + eta) * (1.0 + eta) / 2.0;
            assert!((scale - 2.0).abs() < 1e-8);
            assert!(off.abs() < 1e-9);
        }
        // Q symmetric positive definite for eta in {0.5, 2, 20}
        for &eta in &[0.5, 2.0, 20.0] {
            let h = two_pole_matrices(eta, 2).unwrap();
            assert_eq!(h.q, h.q.transpose());
            assert!(nalgebra::Cholesky::new(h.q.clone()).is_some());
        }
    }

    #[test]
    fn mass_matrices_are_spd() {
        for spec in [
            RadialBasisSpec::one_pole(6),
            RadialBasisSpec::two_pole(0.5, 5).unwrap(),
            RadialBasisSpec::two_pole(20.0, 5).unwrap(),
        ] {
            let h = spec.matrices().unwrap();
            let mass = h.mass();
            let sym = (&mass + mass.transpose()) * 0.5;
            assert!(max_abs_diff(&mass, &sym) < 1e-11);
            assert!(nalgebra::Cholesky::new(sym.clone()).is_some());
            let rmass = h.r_mass();
            let sym = (&rmass + rmass.transpose()) * 0.5;
            assert!(max_abs_diff(&rmass, &sym) < 1e-10);
            assert!(nalgebra::Cholesky::new(sym).is_some());
        }
    }

    #[test]
    fn banded_structure() {
        // one-pole products: |i - j| <= 2; two-pole: block bandwidth <= 4
        let h = one_pole_matrices(9);
        for mat in [h.mass(), h.r_mass(), h.r_deriv()] {
            for i in 0..mat.nrows() {
                for j in 0..mat.ncols() {
                    if i.abs_diff(j) > 2 {
                        assert!(mat[(i, j)].abs() < 1e-13, "({i},{j}) = {}", mat[(i, j)]);
                    }
                }
            }
        }
        let h = two_pole_matrices(3.0, 5).unwrap();
        for mat in [h.mass(), h.r_mass(), h.r_deriv()] {
            for i in 0..mat.nrows() {
                for j in 0..mat.ncols() {
                    if (i / 2).abs_diff(j / 2) > 4 {
                        assert!(mat[(i, j)].abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn laplace_values_basics() {
        let p = Complex64::new(0.8, 0.3);
        assert!((phi_laplace_one_pole(0, p).unwrap() - 1.0 / (p + 1.0)).norm() < 1e-15);
        assert_eq!(
            psi_laplace_one_pole(-1, p).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(
            psi_laplace_two_pole(-1, 2.0, p).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(phi_laplace_one_pole(3, Complex64::new(-1.0, 0.0)).is_err());
        // Phi_1^eta = -(1+eta)/((p+eta)(p+1))
        for &eta in &[0.5, 2.0, 20.0] {
            let v = phi_laplace_two_pole(1, eta, p).unwrap();
            let expect = -(1.0 + eta) / ((p + eta) * (p + 1.0));
            assert!((v - expect).norm() < 1e-14 * expect.norm());
        }
    }

    #[test]
    fn laplace_round_trip_two_pole() {
        // numerical Laplace transform of the spatial basis matches the
        // rational form at sample points
        for &eta in &[0.5, 20.0] {
            for n in 0..=5usize {
                let sp = SpatialFn::two_pole(n, eta).unwrap();
                let min_rate = sp.min_rate();
                for i in 0..20 {
                    let p = Complex64::new(0.2 + 0.15 * i as f64, 0.3 * ((i % 5) as f64 - 2.0));
                    let cut = 45.0 / min_rate;
                    let re = adaptive(
                        |xi| ((-p * xi).exp() * sp.eval(xi)).re,
                        0.0,
                        cut,
                        1e-12,
                        &[],
                    )
                    .unwrap();
                    let im = adaptive(
                        |xi| ((-p * xi).exp() * sp.eval(xi)).im,
                        0.0,
                        cut,
                        1e-12,
                        &[],
                    )
                    .unwrap();
                    let got = Complex64::new(re, im);
                    let expect = phi_laplace_two_pole(n as i64, eta, p).unwrap();
                    assert!(
                        (got - expect).norm() < 1e-9 * expect.norm().max(1e-6),
                        "eta={eta} n={n} p={p}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn plancherel_contour_identity() {
        // (2 pi i)^{-1} int_{iR} Phi_n(p) Phi_m(-p) dp = int phi_n phi_m dr
        // contour integral via t = tan(u) substitution on p = i t
        let h = one_pole_matrices(6);
        let mass = h.mass();
        for n in 0..=6i64 {
            for m in 0..=6i64 {
                let f = |u: f64| -> f64 {
                    let t = u.tan();
                    let sec2 = 1.0 / (u.cos() * u.cos());
                    let p = Complex64::new(0.0, t);
                    let a = phi_laplace_one_pole(n, p).unwrap();
                    let b = phi_laplace_one_pole(m, -p).unwrap();
                    (a * b).re * sec2
                };
                let half_pi = std::f64::consts::FRAC_PI_2;
                let v = adaptive(f, -half_pi + 1e-12, half_pi - 1e-12, 1e-11, &[0.0]).unwrap()
                    / (2.0 * std::f64::consts::PI);
                assert!(
                    (v - mass[(n as usize, m as usize)]).abs() < 1e-8,
                    "n={n} m={m}: {v} vs {}",
                    mass[(n as usize, m as usize)]
                );
            }
        }
    }

    #[test]
    fn shifted_derivative_consistency() {
        // Laplace transform of r phi_n equals (1 - d/dp) Phi_n, with the
        // p-derivative taken by central differences
        let spec = RadialBasisSpec::one_pole(3);
        for n in 0..=4usize {
            let sp = spec.spatial_fn(n).unwrap();
            for &pr in &[0.5, 1.1, 2.3] {
                let p = Complex64::new(pr, 0.4);
                let transform = |pp: Complex64| -> Complex64 {
                    let re = adaptive(
                        |xi| ((-pp * xi).exp() * sp.eval(xi)).re,
                        0.0,
                        45.0,
                        1e-12,
                        &[],
                    )
                    .unwrap();
                    let im = adaptive(
                        |xi| ((-pp * xi).exp() * sp.eval(xi)).im,
                        0.0,
                        45.0,
                        1e-12,
                        &[],
                    )
                    .unwrap();
                    Complex64::new(re, im)
                };
                // lhs: int e^{-p xi} (1 + xi) phi d xi  (r = 1 + xi)
                let lhs_re = adaptive(
                    |xi| ((-p * xi).exp() * ((1.0 + xi) * sp.eval(xi))).re,
                    0.0,
                    45.0,
                    1e-12,
                    &[],
                )
                .unwrap();
                let lhs_im = adaptive(
                    |xi| ((-p * xi).exp() * ((1.0 + xi) * sp.eval(xi))).im,
                    0.0,
                    45.0,
                    1e-12,
                    &[],
                )
                .unwrap();
                let lhs = Complex64::new(lhs_re, lhs_im);
                let hstep = 1e-5;
                let dp = (transform(p + hstep) - transform(p - hstep)) / (2.0 * hstep);
                let rhs = transform(p) - dp;
                assert!((lhs - rhs).norm() < 1e-7, "n={n} p={p}: {lhs} vs {rhs}");
            }
        }
    }
}
