//! Modified Bessel functions for complex arguments on the principal branch:
//! the McDonald functions K0, K1 off the cut (-inf, 0], and the real
//! functions I0, I1 (plain and exponentially scaled).
//!
//! Evaluation scheme: ascending series for |z| <= 2 (valid on the whole cut
//! plane through the principal logarithm); Temme-style continued fraction
//! for |z| > 2 in the closed right half-plane; reflection through the
//! connection formulas for Re z < 0, backed by the complex I0/I1 series and
//! their large-argument expansions.

use crate::{Error, Result};
use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577215664901532860606512;
/// Largest Re z for which e^{-z} does not underflow (and e^{z} not overflow).
const EXP_RANGE: f64 = 705.0;

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0
}

/// McDonald function K0(z), principal branch.
pub fn k0(z: Complex64) -> Result<Complex64> {
    Ok(k01(z)?.0)
}

/// McDonald function K1(z), principal branch.
pub fn k1(z: Complex64) -> Result<Complex64> {
    Ok(k01(z)?.1)
}

/// K0 and K1 together (they share all intermediate work).
pub fn k01(z: Complex64) -> Result<(Complex64, Complex64)> {
    if on_cut(z) {
        return Err(Error::BranchCut(z));
    }
    if !z.is_finite() {
        return Err(Error::InvalidArgument("non-finite argument".into()));
    }
    if z.re.abs() > EXP_RANGE {
        return Err(Error::Overflow("K0/K1", z.re.abs()));
    }
    if z.norm() <= 2.0 {
        Ok(k01_series(z))
    } else if z.re >= 0.0 {
        k01_cf2(z)
    } else {
        // analytic continuation across the imaginary axis:
        //   K_nu(z e^{+- i pi}) = e^{-+ i pi nu} K_nu(z) -+ i pi I_nu(z)
        let zr = -z; // Re zr > 0
        let (k0r, k1r) = if zr.norm() <= 2.0 {
            k01_series(zr)
        } else {
            k01_cf2(zr)?
        };
        let (i0r, i1r) = i01_complex(zr);
        let ipi = Complex64::new(0.0, std::f64::consts::PI);
        if z.im >= 0.0 {
            // z = zr * e^{i pi}
            Ok((k0r - ipi * i0r, -k1r - ipi * i1r))
        } else {
            Ok((k0r + ipi * i0r, -k1r + ipi * i1r))
        }
    }
}

/// Ascending series, |z| <= 2. Converges everywhere off the cut; the
/// principal log carries the branch.
fn k01_series(z: Complex64) -> (Complex64, Complex64) {
    let lg = (z / 2.0).ln() + EULER_GAMMA;
    let q = z * z / 4.0;

    // I0, I1 partial series evaluated alongside
    let mut term = Complex64::new(1.0, 0.0);
    let mut i0 = term;
    let mut k0_sum = Complex64::new(0.0, 0.0);
    let mut h = 0.0; // harmonic number H_k
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        h += 1.0 / kf;
        i0 += term;
        k0_sum += term * h;
        if term.norm() < 1e-18 * i0.norm() {
            break;
        }
    }
    let k0 = -lg * i0 + k0_sum;

    // K1(z) = 1/z + ln(z/2) I1(z) - z/4 * sum_k [psi(k+1)+psi(k+2)] q^k / (k! (k+1)!)
    let mut term = Complex64::new(1.0, 0.0); // q^k/(k!(k+1)!)
    let mut i1 = term; // I1(z)/(z/2) accumulates sum q^k/(k!(k+1)!)
    let mut s = Complex64::new(0.0, 0.0);
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    s += term * (2.0 * (-EULER_GAMMA) + hk + hk1);
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
        i1 += term;
        s += term * (2.0 * (-EULER_GAMMA) + hk + hk1);
        if term.norm() < 1e-18 * i1.norm() {
            break;
        }
    }
    let i1 = i1 * z / 2.0;
    let k1 = 1.0 / z + ((z / 2.0).ln()) * i1 - z / 4.0 * s;
    (k0, k1)
}

/// Temme/Thompson-Barnett continued fraction (CF2) for Re z >= 0, |z| > 2.
/// Produces K0 and K1 simultaneously.
fn k01_cf2(z: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = 2.0 * (one + z);
    let mut d = one / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25; // 1/4 - mu^2 with mu = 0
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..100_000u64 {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + a * d);
        delh = (b * d - one) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() <= 1e-17 * s.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::QuadratureFailed {
            tol: 1e-16,
            best: f64::NAN,
        });
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    Ok((k0, k1))
}

/// Complex I0, I1 for Re z >= 0 (series for |z| <= 14, expansion beyond).
fn i01_complex(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= 14.0 {
        let q = z * z / 4.0;
        let mut term = Complex64::new(1.0, 0.0);
        let mut i0 = term;
        for k in 1..80 {
            let kf = k as f64;
            term *= q / (kf * kf);
            i0 += term;
            if term.norm() < 1e-18 * i0.norm() {
                break;
            }
        }
        let mut term = Complex64::new(1.0, 0.0);
        let mut s = term;
        for k in 1..80 {
            let kf = k as f64;
            term *= q / (kf * (kf + 1.0));
            s += term;
            if term.norm() < 1e-18 * s.norm() {
                break;
            }
        }
        (i0, s * z / 2.0)
    } else {
        (i_asymptotic(0, z), i_asymptotic(1, z))
    }
}

/// Large-argument expansion of I_nu (nu = 0, 1) for Re z >= 0, including the
/// subdominant e^{-z} term which matters near the imaginary axis.
fn i_asymptotic(nu: u32, z: Complex64) -> Complex64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut t = Complex64::new(1.0, 0.0);
    let mut s_plus = t; // sum for K-type (all +): multiplies e^{-z}
    let mut s_minus = t; // alternating sum: multiplies e^{+z}
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        let kf = k as f64;
        t *= (mu - (2.0 * kf + 1.0).powi(2)) / (8.0 * (kf + 1.0)) / z;
        if t.norm() >= prev {
            break; // divergence point of the asymptotic series
        }
        prev = t.norm();
        s_plus += t;
        if k % 2 == 0 {
            s_minus -= t;
        } else {
            s_minus += t;
        }
        if t.norm() < 1e-17 {
            break;
        }
    }
    let front = 1.0 / (2.0 * std::f64::consts::PI * z).sqrt();
    // e^{+-(nu+1/2) pi i}: +i for nu=0, -i for nu=1 (upper signs, Im z >= 0)
    let sub_sign = if nu == 0 {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(0.0, -1.0)
    };
    let sub = if z.im >= 0.0 { sub_sign } else { sub_sign.conj() };
    front * (z.exp() * s_minus + sub * (-z).exp() * s_plus)
}

/// Real modified Bessel function I1(x) for x >= 0.
///
/// Ascending series up to x = 18, scaled expansion beyond; flags overflow
/// past the exponent range (use [`i1_scaled`] there).
pub fn i1(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!("i1: negative argument {x}")));
    }
    if x > 709.0 {
        return Err(Error::Overflow("I1", x));
    }
    if x <= 18.0 {
        Ok(i1_series(x))
    } else {
        Ok(i1_scaled_asym(x) * x.exp())
    }
}

/// Exponentially scaled e^{-x} I1(x) for x >= 0; safe for any magnitude.
pub fn i1_scaled(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "i1_scaled: negative argument {x}"
        )));
    }
    if x <= 18.0 {
        Ok(i1_series(x) * (-x).exp())
    } else {
        Ok(i1_scaled_asym(x))
    }
}

fn i1_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut s = term;
    for k in 1..80 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        s += term;
        if term < 1e-18 * s {
            break;
        }
    }
    s * x / 2.0
}

fn i1_scaled_asym(x: f64) -> f64 {
    let mu = 4.0;
    let mut t = 1.0;
    let mut s = t;
    let mut prev = f64::INFINITY;
    for k in 0..40u32 {
        let kf = k as f64;
        t *= (mu - (2.0 * kf + 1.0).powi(2)) / (8.0 * (kf + 1.0) * x);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        if t.abs() >= prev {
            break;
        }
        prev = t.abs();
        s += sign * t;
        if t.abs() < 1e-17 {
            break;
        }
    }
    s / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    /// Independent oracle: K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt,
    /// valid for Re z > 0, by adaptive quadrature on panels.
    fn k_oracle(nu: u32, z: Complex64) -> Complex64 {
        // cutoff where |e^{-z cosh t}| < 1e-22 relative to t=0 magnitude
        let tmax = ((60.0 + 50.0 / z.re) / z.re).acosh().max(1.0);
        let re = adaptive(
            |t| {
                let c = t.cosh();
                ((-z * c).exp() * (nu as f64 * t).cosh()).re
            },
            0.0,
            tmax,
            1e-14,
            &[0.5, 1.0],
        )
        .unwrap();
        let im = adaptive(
            |t| {
                let c = t.cosh();
                ((-z * c).exp() * (nu as f64 * t).cosh()).im
            },
            0.0,
            tmax,
            1e-14,
            &[0.5, 1.0],
        )
        .unwrap();
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1e-300)
    }

    #[test]
    fn k0_at_one_matches_quadrature_oracle() {
        let z = Complex64::new(1.0, 0.0);
        let v = k0(z).unwrap();
        let o = k_oracle(0, z);
        assert!(close(v, o, 1e-12), "{v} vs oracle {o}");
        assert!((v.re - 0.42102443824070834).abs() < 1e-14);
    }

    #[test]
    fn k01_match_oracle_in_right_half_plane() {
        let pts = [
            (0.3, 0.0),
            (1.5, 1.0),
            (2.0, 0.001),
            (1.9, -0.1),
            (2.1, 0.05),
            (3.0, -4.0),
            (8.0, 1.0),
            (5.0, 20.0),
            (30.0, -7.0),
        ];
        for &(re, im) in &pts {
            let z = Complex64::new(re, im);
            let (v0, v1) = k01(z).unwrap();
            let o0 = k_oracle(0, z);
            let o1 = k_oracle(1, z);
            assert!(close(v0, o0, 5e-13), "K0({z}): {v0} vs {o0}");
            assert!(close(v1, o1, 5e-13), "K1({z}): {v1} vs {o1}");
        }
    }

    #[test]
    fn k01_reference_values() {
        // reference points spanning series, CF2, reflection and both axes
        #[allow(clippy::excessive_precision)]
        let refs: [(f64, f64, f64, f64, f64, f64); 14] = [
            (2.0, 3.0, -0.082968526567625515, 0.027949603635183424, -0.086499976481281729, 0.039061434005214472),
            (0.5, -0.2, 0.8456023536411914, 0.31080739798775287, 1.3659809995112738, 0.73436888443499364),
            (10.0, 10.0, -8.5995322049402432e-6, 1.2334791571650979e-5, -8.5132483984864228e-6, 1.285270896727941e-5),
            (200.0, 100.0, 1.1077517529069379e-88, 3.4192766484813575e-89, 1.1103068445695787e-88, 3.415054596253273e-89),
            (-1.0, 2.0, -2.2723462549458841, -0.41389270300061663, -2.1834543862041483, 0.099929752591113739),
            (-5.0, -3.0, -32.364622699308347, -71.538347562918405, -26.492395041492396, -67.727469701169141),
            (1e-6, 0.0, 13.931442073626419, 0.0, 999999.99999278432, 0.0),
            (650.0, 20.0, 9.896893806462758e-285, -2.3087229888061075e-284, 9.9039511777679008e-285, -2.3105199542192852e-284),
            (0.1, 3.0, -0.54075947110057313, 0.36032210514512004, -0.49176014997955719, 0.45428213171601683),
            (0.0, 5.0, 0.48461835249266671, 0.27896835603119587, 0.51456010606331361, 0.23226288250728622),
            (3.0, -40.0, -0.0098044265151759069, 0.00094251430358355799, -0.0098260178489117589, 0.00082172695770685396),
            (-0.5, 25.0, 0.32704248798441935, -0.25259409588246345, 0.32192718173151344, -0.25908179131033707),
            (700.0, 0.0, 4.6697764316853769e-306, 0.0, 4.6731107967079661e-306, 0.0),
            (1.0, 0.0, 0.42102443824070833, 0.0, 0.60190723019723457, 0.0),
        ];
        for &(re, im, k0r, k0i, k1r, k1i) in &refs {
            let z = Complex64::new(re, im);
            let (v0, v1) = k01(z).unwrap();
            let r0 = Complex64::new(k0r, k0i);
            let r1 = Complex64::new(k1r, k1i);
            assert!(close(v0, r0, 1e-12), "K0({z}) = {v0}, want {r0}");
            assert!(close(v1, r1, 1e-12), "K1({z}) = {v1}, want {r1}");
        }
    }

    #[test]
    fn k0_bounded_by_value_on_real_axis() {
        // |K0(z)| <= K0(Re z) in the right half-plane
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let re = 0.05 + 20.0 * next();
            let im = 40.0 * (next() - 0.5);
            let z = Complex64::new(re, im);
            let v = k0(z).unwrap().norm();
            let bound = k0(Complex64::new(re, 0.0)).unwrap().re;
            assert!(v <= bound * (1.0 + 1e-12), "|K0({z})| = {v} > {bound}");
        }
    }

    #[test]
    fn k0_small_argument_log_law() {
        // K0(z) + log(z/2) + gamma -> 0 as z -> 0 along (0, 1]
        for &x in &[1.0, 0.1, 1e-3, 1e-6, 1e-8] {
            let z = Complex64::new(x, 0.0);
            let v = k0(z).unwrap().re + (x / 2.0).ln() + EULER_GAMMA;
            // remainder is O(z^2 log z)
            assert!(v.abs() < 2.0 * x * x * (1.0 + (1.0 / x).ln()), "x={x}: {v}");
        }
    }

    #[test]
    fn k1_small_argument_pole_law() {
        // z K1(z) -> 1 as z -> 0+
        for &x in &[1e-2, 1e-4, 1e-6] {
            let v = k1(Complex64::new(x, 0.0)).unwrap().re * x;
            assert!((v - 1.0).abs() < 1e-3 * x.max(1e-4), "x={x}: {v}");
        }
    }

    #[test]
    fn k0_derivative_is_minus_k1() {
        // central finite differences, spot sample
        let pts = [
            Complex64::new(1.3, 0.4),
            Complex64::new(3.0, -2.0),
            Complex64::new(0.7, 0.0),
            Complex64::new(6.0, 5.0),
        ];
        for &z in &pts {
            let h = 1e-6;
            let d = (k0(z + h).unwrap() - k0(z - h).unwrap()) / (2.0 * h);
            let v = -k1(z).unwrap();
            assert!(close(d, v, 1e-6), "K0'({z}) = {d} vs -K1 = {v}");
        }
    }

    #[test]
    fn branch_cut_is_rejected() {
        assert!(matches!(
            k0(Complex64::new(-1.0, 0.0)),
            Err(Error::BranchCut(_))
        ));
        assert!(matches!(
            k0(Complex64::new(0.0, 0.0)),
            Err(Error::BranchCut(_))
        ));
        assert!(matches!(
            k0(Complex64::new(-800.0, 1.0)),
            Err(Error::Overflow(_, _))
        ));
    }

    #[test]
    fn i1_reference_and_asymptotic() {
        assert_eq!(i1(0.0).unwrap(), 0.0);
        #[allow(clippy::excessive_precision)]
        let refs = [
            (0.5, 0.25789430539089632),
            (1.0, 0.56515910399248503),
            (5.0, 24.335642142450527),
            (18.0, 6043133.2421156284),
            (30.0, 768532038938.957),
            (100.0, 1.0683693903381625e42),
        ];
        for &(x, v) in &refs {
            let got = i1(x).unwrap();
            assert!((got - v).abs() < 1e-12 * v, "I1({x}) = {got}, want {v}");
        }
        // I1(30) / ((2 pi 30)^{-1/2} e^30) -> 1 within 1e-2
        let ratio = i1(30.0).unwrap() / ((2.0 * std::f64::consts::PI * 30.0).powf(-0.5) * 30f64.exp());
        assert!((ratio - 1.0).abs() < 1e-2);
        // scaled variant reaches far beyond the exponent range
        let s = i1_scaled(700.0).unwrap();
        assert!((s - 0.015070519444716847).abs() < 1e-12 * s);
        assert!(matches!(i1(710.0), Err(Error::Overflow(_, _))));
    }
}
