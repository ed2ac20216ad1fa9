//! Quadrature rules: Gauss-Legendre, Gauss-Lobatto, Gauss-Laguerre,
//! adaptive Gauss-Kronrod and periodic trapezoid sums.

use crate::{Error, Result};
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes by Newton iteration on the Legendre recurrence; accurate to
/// machine precision for n up to a few hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_pd(n, x);
                x -= p2 / d2;
                dp = legendre_pd(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pd(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at x.
fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Lobatto nodes on [-1, 1] (k+1 points for polynomial order k).
///
/// Interior nodes are the roots of P'_k, found by Newton iteration.
pub fn gauss_lobatto(order: usize) -> Vec<f64> {
    let n = order + 1;
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    let k = order;
    for i in 1..n - 1 {
        // Chebyshev-Gauss-Lobatto initial guess
        let mut x = -(std::f64::consts::PI * i as f64 / k as f64).cos();
        for _ in 0..100 {
            // root of P'_k via d/dx P_k and second derivative from the ODE:
            // (1-x^2) P'' = 2x P' - k(k+1) P
            let (p, d) = legendre_pd(k, x);
            let dd = (2.0 * x * d - (k * (k + 1)) as f64 * p) / (1.0 - x * x);
            let dx = d / dd;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    nodes
}

/// Gauss-Laguerre nodes and weights for integrals of the form
/// `int_0^inf e^{-x} f(x) dx`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut x = 0.0f64;
    for i in 0..n {
        // initial guesses from Stroud & Secrest
        x = if i == 0 {
            3.0 / (1.0 + 2.4 * n as f64)
        } else if i == 1 {
            nodes[0] + 15.0 / (1.0 + 2.5 * n as f64)
        } else {
            let ifl = (i - 1) as f64;
            x + (1.0 + 2.55 * ifl) / (1.9 * ifl) * (x - nodes[i - 2])
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let (p, d) = laguerre_pd(n, x);
            pp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-14 * x.max(1.0) {
                let (p2, d2) = laguerre_pd(n, x);
                x -= p2 / d2;
                pp = laguerre_pd(n, x).1;
                break;
            }
        }
        nodes[i] = x;
        weights[i] = -1.0 / (pp * n as f64 * laguerre_pd(n - 1, x).0);
    }
    (nodes, weights)
}

/// Laguerre polynomial L_n and derivative at x.
fn laguerre_pd(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0 - x) * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (p1 - p0) / x;
    (p1, d)
}

// Gauss-Kronrod 7-15 pair (QUADPACK constants).
const XGK: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const WGK: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const WG: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let v = f(c + h * x);
        k += wk * v;
        if i % 2 == 1 {
            g += WG[i / 2] * v;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`. Optional `hints` are abscissae at which the initial
/// subdivision is split (useful for sharply peaked integrands).
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    hints: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(hints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
    for w in cuts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        stack.push((w[0], w[1], v, e, 0));
    }
    let mut total = 0.0;
    let max_depth = 60;
    let mut worst: f64 = 0.0;
    while let Some((lo, hi, v, e, depth)) = stack.pop() {
        let local_tol = tol * (hi - lo) / (b - a);
        if e <= local_tol.max(1e-300) || depth >= max_depth {
            if depth >= max_depth {
                worst = worst.max(e);
            }
            total += v;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        stack.push((lo, mid, v1, e1, depth + 1));
        stack.push((mid, hi, v2, e2, depth + 1));
    }
    if worst > tol {
        return Err(Error::QuadratureFailed { tol, best: worst });
    }
    Ok(total)
}

/// Trapezoid rule for a smooth 2*pi-periodic complex integrand, with the
/// node count doubled until two successive levels agree to `tol` (relative).
pub fn periodic_trapezoid<F: FnMut(f64) -> Complex64>(mut f: F, tol: f64) -> Result<Complex64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n = 16usize;
    let mut prev = Complex64::new(f64::NAN, 0.0);
    let mut best_err = f64::INFINITY;
    while n <= 1 << 22 {
        let h = two_pi / n as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            s += f(i as f64 * h);
        }
        s *= h;
        if prev.re.is_finite() {
            let err = (s - prev).norm() / s.norm().max(1.0);
            if err < tol {
                return Ok(s);
            }
            best_err = best_err.min(err);
        }
        prev = s;
        n *= 2;
    }
    Err(Error::QuadratureFailed {
        tol,
        best: best_err,
    })
}

/// Brent root finder on a bracketing interval [a, b] with f(a) f(b) <= 0.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}]: f = ({fa:.3e}, {fb:.3e})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min(e * q / 2.0).abs() * 2.0
                && 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).abs()
            {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::RootFinding("brent: too many iterations".into()))
}

/// Golden-section minimization of `f` on [a, b].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
