//! Semi-analytic error of the truncated 1D shifted layer: the
//! Laplace-domain transfer factor, its explicit time-domain series in
//! modified Bessel functions, convolution-quadrature inversion, and the
//! attenuation/stagnation diagnostics.

use crate::quad::adaptive;
use crate::solver1d::Signal;
use crate::{bessel, Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Parameters of the half-line model problem with a truncated layer:
/// u_tt = u_xx on x > 0, Dirichlet data g at x = 0, shifted damping
/// sigma_c on (R, R+L), Dirichlet cutoff at R + L, observed at x in (0, R).
#[derive(Debug, Clone)]
pub struct ErrorSeriesParams {
    pub radius_pml: f64,
    pub width: f64,
    pub sigma_c: f64,
    pub gamma: f64,
    pub g: Signal,
    pub x: f64,
}

impl ErrorSeriesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_pml > 0.0 && self.width > 0.0) {
            return Err(Error::InvalidArgument("need R > 0 and L > 0".into()));
        }
        if !(self.x > 0.0 && self.x < self.radius_pml) {
            return Err(Error::InvalidArgument(
                "observation point must lie in (0, R)".into(),
            ));
        }
        if !(self.sigma_c >= 0.0 && self.gamma >= 0.0) {
            return Err(Error::InvalidArgument(
                "sigma_c and gamma must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Convolution-quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CqKind {
    Bdf2,
    Trapezoidal,
}

#[derive(Debug, Clone, Copy)]
pub struct CqScheme {
    pub kind: CqKind,
    pub dt: f64,
    pub n_steps: usize,
}

impl CqKind {
    /// Generating function delta(zeta) of the multistep rule.
    fn delta(&self, zeta: Complex64) -> Complex64 {
        match self {
            CqKind::Bdf2 => 1.5 - 2.0 * zeta + 0.5 * zeta * zeta,
            CqKind::Trapezoidal => 2.0 * (1.0 - zeta) / (1.0 + zeta),
        }
    }
}

/// Laplace-domain error transfer factor
/// E(s, x) = e^{-2 s x*} / (1 - e^{-2 s x*}),
/// x* = (R + L) + sigma_c L / (s + gamma);
/// the time-domain error is the inverse transform of
/// E(s,x) g^(s) (e^{-s x} - e^{s x}).
pub fn laplace_error_factor(params: &ErrorSeriesParams, s: Complex64) -> Result<Complex64> {
    if s.re <= 0.0 {
        return Err(Error::InvalidArgument("need Re s > 0".into()));
    }
    let xs = scaled_cutoff(params, s);
    let q = (-2.0 * s * xs).exp();
    Ok(q / (1.0 - q))
}

fn scaled_cutoff(params: &ErrorSeriesParams, s: Complex64) -> Complex64 {
    params.radius_pml + params.width + params.sigma_c * params.width / (s + params.gamma)
}

/// Reflected signal combination T_l g(t, x)
/// = g(t - x - 2(R+L) l) - g(t + x - 2(R+L) l).
fn t_ell(params: &ErrorSeriesParams, ell: usize, t: f64) -> f64 {
    let shift = 2.0 * (params.radius_pml + params.width) * ell as f64;
    params.g.eval(t - params.x - shift) - params.g.eval(t + params.x - shift)
}

/// Largest reflection index contributing at time t: T_l g vanishes on
/// [0, t] once l >= (t + R) / (2 (R + L)) by causality.
fn ell_cutoff(params: &ErrorSeriesParams, t: f64) -> usize {
    let bound = (t + params.radius_pml) / (2.0 * (params.radius_pml + params.width));
    bound.ceil() as usize
}

/// Explicit time-domain error of the truncated shifted layer at (t, x):
///
///   e(t,x) = sum_l e^{-2 sigma_c L l} [ T_l g(t,x)
///          + int_0^t e^{-gamma tau} a_l I1(2 a_l sqrt(tau)) tau^{-1/2}
///            T_l g(t - tau, x) d tau ],     a_l = sqrt(2 L gamma sigma_c l).
///
/// The integral is evaluated after the substitution tau = u^2 with the
/// exponentially scaled Bessel function, so the damping e^{-2 sigma_c L l}
/// and the growth of I1 combine into the bounded Gaussian factor
/// e^{-gamma (u - a_l/gamma)^2}; no intermediate overflow occurs for any
/// sigma_c.
pub fn error_series(params: &ErrorSeriesParams, t: f64, tol: f64) -> Result<f64> {
    params.validate()?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let lmax = ell_cutoff(params, t);
    let mut acc = 0.0f64;
    for ell in 1..=lmax {
        let damp = (-2.0 * params.sigma_c * params.width * ell as f64).exp();
        acc += damp * t_ell(params, ell, t);
        if params.gamma > 0.0 && params.sigma_c > 0.0 {
            let alpha = (2.0 * params.width * params.gamma * params.sigma_c * ell as f64).sqrt();
            let u_star = alpha / params.gamma;
            let sqrt_t = t.sqrt();
            // integrand 2 a e^{-gamma (u - u*)^2} I1e(2 a u) T_l g(t - u^2)
            let f = |u: f64| -> f64 {
                let gauss = (-params.gamma * (u - u_star).powi(2)).exp();
                if gauss == 0.0 {
                    return 0.0;
                }
                let i1e = bessel::i1_scaled(2.0 * alpha * u).unwrap_or(0.0);
                2.0 * alpha * gauss * i1e * t_ell(params, ell, t - u * u)
            };
            let width = 6.0 / params.gamma.sqrt();
            let hints = [
                (u_star - width).max(0.0),
                u_star.min(sqrt_t),
                (u_star + width).min(sqrt_t),
            ];
            acc += adaptive(f, 0.0, sqrt_t, tol / lmax as f64, &hints)?;
        }
    }
    Ok(acc)
}

/// Sampled error signal e(t_n), n = 0..n_steps, by Lubich convolution
/// quadrature of E(s,x) g^(s) (e^{-sx} - e^{sx}): weights from the
/// generating function delta(zeta)/dt on a circle of radius
/// lambda = eps^{1/(2(n_steps+1))}, then a discrete causal convolution
/// with the samples of g.
pub fn cq_invert(params: &ErrorSeriesParams, scheme: &CqScheme) -> Result<Vec<f64>> {
    params.validate()?;
    let transfer = |s: Complex64| -> Complex64 {
        let xs = scaled_cutoff(params, s);
        let q = (-2.0 * s * xs).exp();
        // combined exponents keep both terms bounded in the right
        // half-plane: Re(-2 s x* +- s x) <= -(2(R+L) - x) Re s < 0
        let t1 = (-2.0 * s * xs - s * params.x).exp();
        let t2 = (-2.0 * s * xs + s * params.x).exp();
        (t1 - t2) / (1.0 - q)
    };
    let weights = cq_weights(&transfer, scheme)?;
    let n = scheme.n_steps;
    let g: Vec<f64> = (0..=n)
        .map(|i| params.g.eval(i as f64 * scheme.dt))
        .collect();
    let mut out = vec![0.0; n + 1];
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..=i {
            s += weights[i - j] * g[j];
        }
        *o = s;
    }
    Ok(out)
}

/// Convolution-quadrature weights w_0..w_{n_steps} of a transfer operator.
pub fn cq_weights(
    transfer: &dyn Fn(Complex64) -> Complex64,
    scheme: &CqScheme,
) -> Result<Vec<f64>> {
    let m = scheme.n_steps + 1;
    let lambda = (f64::EPSILON).powf(1.0 / (2.0 * m as f64));
    let mut vals: Vec<rustfft::num_complex::Complex<f64>> = (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let zeta = Complex64::new(lambda * th.cos(), lambda * th.sin());
            let s = scheme.kind.delta(zeta) / scheme.dt;
            transfer(s)
        })
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "transfer function not finite on the quadrature contour".into(),
        ));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut vals);
    let mut w = Vec::with_capacity(m);
    let mut lam_pow = 1.0;
    for (j, v) in vals.iter().enumerate() {
        w.push(v.re / m as f64 / lam_pow);
        if j + 1 < m {
            lam_pow *= lambda;
        }
    }
    Ok(w)
}

/// Stagnation sweep: evaluates |e(t, x)| of the series for each sigma_c in
/// the list, holding nu = sigma_c / gamma fixed at the template's ratio.
pub fn sigma_sweep(
    template: &ErrorSeriesParams,
    sigma_list: &[f64],
    t: f64,
    x: f64,
) -> Result<Vec<(f64, f64)>> {
    let nu = if template.gamma > 0.0 {
        template.sigma_c / template.gamma
    } else {
        return Err(Error::InvalidArgument(
            "sigma sweep needs gamma > 0 in the template (fixed nu)".into(),
        ));
    };
    use rayon::prelude::*;
    let results: Vec<Result<(f64, f64)>> = sigma_list
        .par_iter()
        .map(|&sc| {
            let p = ErrorSeriesParams {
                sigma_c: sc,
                gamma: sc / nu,
                x,
                ..template.clone()
            };
            let e = error_series(&p, t, 1e-12)?;
            Ok((sc, e.abs()))
        })
        .collect();
    results.into_iter().collect()
}

/// Attenuation magnitude of a time-harmonic plane wave in the shifted
/// layer: |lambda_att| = exp(-k omega sigma_c depth / (omega^2 + gamma^2)).
pub fn attenuation_factor(sigma_c: f64, gamma: f64, omega: f64, k: f64, depth: f64) -> Result<f64> {
    if depth < 0.0 {
        return Err(Error::InvalidArgument("depth must be >= 0".into()));
    }
    Ok((-k * omega * sigma_c * depth / (omega * omega + gamma * gamma)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig_params() -> ErrorSeriesParams {
        // the 1D stagnation configuration: R = 0.2, L = 1, gamma = sigma_c,
        // g(t) = t^2 e^{-t^2}, x = 0.1
        ErrorSeriesParams {
            radius_pml: 0.2,
            width: 1.0,
            sigma_c: 1.0,
            gamma: 1.0,
            g: Signal::GaussT2,
            x: 0.1,
        }
    }

    #[test]
    fn transfer_factor_limits() {
        let p = fig_params();
        // sigma_c -> infinity at gamma = 0, s real: E -> 0
        let mut p2 = p.clone();
        p2.gamma = 0.0;
        let s = Complex64::new(1.0, 0.0);
        let mut last = 1.0;
        for &sc in &[1.0, 10.0, 100.0] {
            p2.sigma_c = sc;
            let e = laplace_error_factor(&p2, s).unwrap().norm();
            assert!(e < last);
            last = e;
        }
        assert!(last < 1e-10);
        // L -> infinity: E -> 0
        let mut p3 = p.clone();
        p3.width = 40.0;
        assert!(laplace_error_factor(&p3, s).unwrap().norm() < 1e-30);
        // |E| < 1 on 1000 random right-half-plane points
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let s = Complex64::new(
                10f64.powf(rng.gen_range(-2.0..2.0)),
                rng.gen_range(-1.0..1.0) * 10f64.powf(rng.gen_range(-1.0..3.0)),
            );
            let e = laplace_error_factor(&p, s).unwrap().norm();
            assert!(e < 1.0, "|E| = {e} at s = {s}");
        }
    }

    #[test]
    fn series_support_and_zero_signal() {
        let mut p = fig_params();
        p.g = Signal::Zero;
        assert_eq!(error_series(&p, 5.0, 1e-10).unwrap(), 0.0);
        let p = fig_params();
        // error vanishes before the first reflection arrives:
        // t < 2 (R + L) - x = 2.3
        for &t in &[0.5, 1.0, 2.0, 2.29] {
            let e = error_series(&p, t, 1e-12).unwrap();
            assert_eq!(e, 0.0, "t = {t}");
        }
        let e = error_series(&p, 3.5, 1e-12).unwrap();
        assert!(e.abs() > 1e-8);
    }

    #[test]
    fn ell_truncation_is_exact() {
        // adding one more reflection term past the causal cutoff changes
        // nothing, bitwise, in the first sum
        let p = fig_params();
        let t = 6.0;
        let lmax = ell_cutoff(&p, t);
        let first_sum = |extra: usize| -> f64 {
            let mut acc = 0.0;
            for ell in 1..=(lmax + extra) {
                acc += (-2.0 * p.sigma_c * p.width * ell as f64).exp() * t_ell(&p, ell, t);
            }
            acc
        };
        assert_eq!(first_sum(0), first_sum(1));
        assert_eq!(first_sum(0), first_sum(3));
    }

    #[test]
    fn cq_recovers_pure_delay_difference() {
        // transfer e^{-sx} - e^{sx} with the boundary signal: the inverse
        // transform is g(t - x) - g(t + x); the forward-shift part acts as
        // polynomial extrapolation, accurate for smooth g and moderate x/dt
        let p = fig_params();
        let scheme = CqScheme {
            kind: CqKind::Bdf2,
            dt: 0.01,
            n_steps: 600,
        };
        let transfer = |s: Complex64| (-s * p.x).exp() - (s * p.x).exp();
        let w = cq_weights(&transfer, &scheme).unwrap();
        let g: Vec<f64> = (0..=scheme.n_steps)
            .map(|i| p.g.eval(i as f64 * scheme.dt))
            .collect();
        let mut max_err = 0.0f64;
        for n in 0..=scheme.n_steps {
            let t = n as f64 * scheme.dt;
            let mut v = 0.0;
            for j in 0..=n {
                v += w[n - j] * g[j];
            }
            let exact = p.g.eval(t - p.x) - p.g.eval(t + p.x);
            max_err = max_err.max((v - exact).abs());
        }
        assert!(max_err < 5e-3, "max err {max_err}");
        // halving dt improves roughly fourfold (second order)
        let scheme2 = CqScheme {
            kind: CqKind::Bdf2,
            dt: 0.005,
            n_steps: 1200,
        };
        let w2 = cq_weights(&transfer, &scheme2).unwrap();
        let g2: Vec<f64> = (0..=scheme2.n_steps)
            .map(|i| p.g.eval(i as f64 * scheme2.dt))
            .collect();
        let mut max_err2 = 0.0f64;
        for n in 0..=scheme2.n_steps {
            let t = n as f64 * scheme2.dt;
            let mut v = 0.0;
            for j in 0..=n {
                v += w2[n - j] * g2[j];
            }
            let exact = p.g.eval(t - p.x) - p.g.eval(t + p.x);
            max_err2 = max_err2.max((v - exact).abs());
        }
        let ratio = max_err / max_err2;
        assert!(ratio > 2.5, "expected ~4x improvement, got {ratio}");
    }

    #[test]
    fn series_matches_cq_inversion() {
        let p = fig_params();
        let scheme = CqScheme {
            kind: CqKind::Bdf2,
            dt: 1.0 / 3200.0,
            n_steps: 32000,
        };
        let cq = cq_invert(&p, &scheme).unwrap();
        let mut max_diff = 0.0f64;
        for k in 1..=100 {
            let n = k * 320; // sample every 0.1 up to t = 10
            let t = n as f64 * scheme.dt;
            let se = error_series(&p, t, 1e-11).unwrap();
            max_diff = max_diff.max((se - cq[n]).abs());
        }
        assert!(max_diff <= 1e-6, "series vs CQ: {max_diff:.3e}");
    }

    #[test]
    fn cq_richardson_order_two() {
        let p = fig_params();
        let run = |dt: f64, n: usize| -> Vec<f64> {
            cq_invert(
                &p,
                &CqScheme {
                    kind: CqKind::Bdf2,
                    dt,
                    n_steps: n,
                },
            )
            .unwrap()
        };
        let t_check = 8.0;
        let series = error_series(&p, t_check, 1e-12).unwrap();
        let e1 = (run(1.0 / 200.0, 1600)[1600] - series).abs();
        let e2 = (run(1.0 / 400.0, 3200)[3200] - series).abs();
        let ratio = e1 / e2;
        assert!(
            (2.5..6.5).contains(&ratio),
            "expected order-2 ratio near 4, got {ratio} ({e1:.2e}/{e2:.2e})"
        );
    }

    #[test]
    fn trapezoidal_scheme_also_converges() {
        let p = fig_params();
        let scheme = CqScheme {
            kind: CqKind::Trapezoidal,
            dt: 1.0 / 800.0,
            n_steps: 6400,
        };
        let cq = cq_invert(&p, &scheme).unwrap();
        let t = 8.0;
        let n = (t / scheme.dt).round() as usize;
        let se = error_series(&p, t, 1e-11).unwrap();
        assert!((se - cq[n]).abs() < 1e-5);
    }

    #[test]
    fn sweep_shows_stagnation() {
        let p = fig_params();
        let list = [1.0, 3.0, 10.0, 100.0, 1000.0];
        let table = sigma_sweep(&p, &list, 10.0, 0.1).unwrap();
        // decreases initially
        assert!(table[1].1 < table[0].1);
        // stagnation: |e| at 1e3 within a factor 2 of |e| at 1e2
        let e2 = table[3].1;
        let e3 = table[4].1;
        assert!(e3 <= 2.0 * e2 && e3 >= e2 / 2.0, "{e2:.3e} vs {e3:.3e}");
        assert!(e3 > 1e-6, "error should stagnate well above zero");
    }

    #[test]
    fn l_growth_kills_error() {
        // fixed sigma_c = 20: |e| decays monotonically in L and falls
        // below 1e-10 by L = 8
        let mut last = f64::INFINITY;
        for &l in &[1.0, 2.0, 3.0, 5.0, 8.0] {
            let p = ErrorSeriesParams {
                radius_pml: 0.2,
                width: l,
                sigma_c: 20.0,
                gamma: 20.0,
                g: Signal::GaussT2,
                x: 0.1,
            };
            let e = error_series(&p, 10.0, 1e-13).unwrap().abs();
            assert!(e <= last * (1.0 + 1e-12), "L = {l}: {e} > {last}");
            last = e;
        }
        assert!(last < 1e-10, "residual error {last}");
    }

    #[test]
    fn attenuation_values() {
        assert_eq!(attenuation_factor(20.0, 10.0, 3.0, 3.0, 0.0).unwrap(), 1.0);
        // gamma = nu sigma_c, omega = k: tends to 1 as sigma_c grows
        let nu = 2.0;
        let k = 3.0;
        let mut last = 0.0;
        for &sc in &[10.0, 100.0, 1000.0] {
            let v = attenuation_factor(sc, nu * sc, k, k, 0.5).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(last > 0.99);
        // classical limit gamma = 0: strictly below 1
        let v = attenuation_factor(5.0, 0.0, 2.0, 2.0, 0.3).unwrap();
        assert!(v < 1.0);
        let expect = (-2.0f64 * 2.0 * 5.0 * 0.3 / 4.0).exp();
        assert!((v - expect).abs() < 1e-15);
    }
}
