//! Closed-form constants of the error analysis.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::kernels::gauss_pi;

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {x}")))
    }
}

fn cutoff(b0: f64, lambda: f64) -> Result<()> {
    positive("b0", b0)?;
    if !(lambda.is_finite() && (0.0..2.0).contains(&lambda)) {
        return Err(config_err(format!("lambda must lie in [0, 2), got {lambda}")));
    }
    Ok(())
}

fn ordered_rates(sigma: f64, tau: f64) -> Result<()> {
    positive("sigma", sigma)?;
    positive("tau", tau)?;
    if sigma >= tau {
        return Err(config_err(format!(
            "need 0 < sigma < tau, got sigma = {sigma}, tau = {tau}"
        )));
    }
    Ok(())
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be nonnegative, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradConstants {
    pub b_lambda: f64,
    pub c: f64,
    pub g_bound: f64,
}

/// `b_L = Pi(-l/2) b0`, `c_{L,t} = 2 pi^{3/2} Pi(-l/2) t^{-(3-l)/2} b0` and
/// the bound `pi^{3/2} Pi(-l/2) t^{-(3-l)/2}` on `sup_v int |v-w|^-l e^{-t w^2} dw`.
pub fn grad_constants(b0: f64, lambda: f64, tau: f64) -> Result<GradConstants> {
    cutoff(b0, lambda)?;
    positive("tau", tau)?;
    let pi_l = gauss_pi(-lambda / 2.0)?;
    let g_bound = PI.powf(1.5) * pi_l * tau.powf(-(3.0 - lambda) / 2.0);
    Ok(GradConstants {
        b_lambda: pi_l * b0,
        c: 2.0 * g_bound * b0,
        g_bound,
    })
}

/// `c_{L,tau}` alone.
pub fn c_lambda(b0: f64, lambda: f64, tau: f64) -> Result<f64> {
    Ok(grad_constants(b0, lambda, tau)?.c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyConstants {
    pub k12: f64,
    pub k22: f64,
    pub k13: f64,
    pub k23: f64,
    pub k14: f64,
    pub k24: f64,
    pub k15: f64,
    pub k25: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Constants `k_{i,j}` of the defect estimate and their maxima over `j`.
pub fn lemma_key_constants(r: f64, m: f64, tau: f64, sigma: f64, b0: f64, lambda: f64) -> Result<KeyConstants> {
    nonnegative("R", r)?;
    nonnegative("M", m)?;
    ordered_rates(sigma, tau)?;
    let gc = grad_constants(b0, lambda, tau)?;
    let gs = grad_constants(b0, lambda, sigma)?;
    let bl = gc.b_lambda;
    let rm = r * r.max(m);
    let quad = (r * r).max(m * (2.0 * r + m));
    let k12 = 2f64.powf(2.5) * PI.powf(1.5) * E.powf(-0.5) * bl * (tau - sigma).powf(-0.5)
        * sigma.powf(-(3.0 - lambda) / 2.0)
        * rm;
    let k22 = (2.0 * PI).powi(4) * bl * tau.powf(-3.5) * sigma.powf(-(3.0 - lambda) / 2.0) * rm;
    let k13 = gs.c * m * r;
    let k23 = 2.0 * PI.powf(4.5) * bl * tau.powf(-(9.0 - lambda) / 2.0) * m * r;
    let k14 = 2f64.powf(1.5) * E.powf(-0.5) * PI.powf(1.5) * bl * tau.powf(-(3.0 - lambda) / 2.0)
        * (tau - sigma).powf(-0.5)
        * quad;
    let k24 = 8.0 * PI.powi(4) * bl * tau.powf(-(10.0 - lambda) / 2.0) * quad;
    let k15 = 2.0 * gs.c * r;
    Ok(KeyConstants {
        k12,
        k22,
        k13,
        k23,
        k14,
        k24,
        k15,
        k25: k15,
        k1: k12.max(k13).max(k14).max(k15),
        k2: k22.max(k23).max(k24).max(k15),
    })
}

/// Time-Lipschitz constants `(d1, d2)` of a mild solution in `M_tau(R, M)`.
pub fn time_lipschitz_constants(r: f64, m: f64, tau: f64, sigma: f64, b0: f64, lambda: f64) -> Result<(f64, f64)> {
    nonnegative("R", r)?;
    nonnegative("M", m)?;
    ordered_rates(sigma, tau)?;
    let cs = c_lambda(b0, lambda, sigma)?;
    let d1 = 2f64.sqrt() * E.powf(-0.5) * (tau - sigma).powf(-0.5) * r.max(m) + cs * r * r;
    let d2 = 4.0 * PI.powf(2.5) * tau.powf(-3.5) * r.max(m) + cs * (PI / sigma).powi(3) * r * r;
    Ok((d1, d2))
}

/// The increasing function `C(x) = k / (c R) * exp(c T (x + R))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFunction {
    pub k: f64,
    pub c_sigma: f64,
    pub r: f64,
    pub t: f64,
}

impl GrowthFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.k / (self.c_sigma * self.r) * (self.c_sigma * self.t * (x + self.r)).exp()
    }

    /// `rho / C(R + rho)`, maximised by the threshold search.
    pub fn window(&self, rho: f64) -> f64 {
        rho / self.eval(self.r + rho)
    }

    /// `d/dx ln C(x)`.
    pub fn log_slope(&self) -> f64 {
        self.c_sigma * self.t
    }
}

/// Polish a maximiser of `rho / C(R + rho)` by bisection on the stationarity
/// condition `1 / rho = (ln C)'`, which is decreasing in `rho`.
fn polish_rho(growth: &GrowthFunction, rho: f64) -> f64 {
    let s = |x: f64| 1.0 / x - growth.log_slope();
    let (mut lo, mut hi) = (0.5 * rho, 2.0 * rho);
    for _ in 0..64 {
        if s(lo) > 0.0 {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..64 {
        if s(hi) < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if !(s(lo) > 0.0 && s(hi) < 0.0) {
        return rho;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if s(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if s(lo).abs() <= s(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityThresholds {
    pub growth: GrowthFunction,
    pub rho: f64,
    /// `C(R + rho)`.
    pub c_at: f64,
    pub x0: f64,
    pub t0: f64,
    pub d0: f64,
    pub t_star: f64,
    /// True when the search failed and `rho = R` was used instead.
    pub fallback: bool,
}

/// Maximise a unimodal function on `(0, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, hi: f64) -> Option<f64> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if !(fc.is_finite() && fd.is_finite()) {
            return None;
        }
        if fc < fd {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        }
        if (b - a) <= 1e-15 * b.abs() {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x > 0.0 && f(x) > 0.0).then_some(x)
}

/// Thresholds `rho, X0, T0, D0, T*` guaranteeing bounded, nonnegative
/// iterates.
///
/// The Gronwall factor is `k = k1 (2 + d1) max(1, 1/(c_{L,sigma} R))`;
/// `rho` maximises `rho / C(R + rho)`: golden-section search locates the
/// maximum, bisection on the stationarity condition refines it.
pub fn stability_thresholds(
    r: f64,
    m: f64,
    t: f64,
    tau: f64,
    sigma: f64,
    b0: f64,
    lambda: f64,
) -> Result<StabilityThresholds> {
    positive("R", r)?;
    positive("M", m)?;
    positive("T", t)?;
    let key = lemma_key_constants(r, m, tau, sigma, b0, lambda)?;
    let (d1, _) = time_lipschitz_constants(r, m, tau, sigma, b0, lambda)?;
    let cs = c_lambda(b0, lambda, sigma)?;
    let phi_min = cs * r;
    let k = key.k1 * (2.0 + d1) * 1f64.max(1.0 / phi_min);
    let growth = GrowthFunction {
        k,
        c_sigma: cs,
        r,
        t,
    };
    let objective = |rho: f64| growth.window(rho);
    let mut hi = r.max(1e-300);
    for _ in 0..2000 {
        if objective(2.0 * hi) > objective(hi) {
            hi *= 2.0;
        } else {
            break;
        }
    }
    let (rho, fallback) = match golden_max(objective, 2.0 * hi) {
        Some(rho) => (polish_rho(&growth, rho), false),
        None => (r, true),
    };
    let c_at = growth.eval(r + rho);
    let window = rho / c_at;
    if !(window > 0.0) {
        return Err(Error::Domain(format!(
            "stability window rho / C(R + rho) = {window} is not positive (C(R + rho) = {c_at:e})"
        )));
    }
    let x0 = 0.5 * window;
    let mut t0 = window - x0;
    while c_at * (t0 + x0) > rho {
        t0 = f64::from_bits(t0.to_bits() - 1);
    }
    let d0 = 0.5 * cs * (r + rho);
    let t_star = t0.min(1.0 / d0).min(1.0).min(t);
    Ok(StabilityThresholds {
        growth,
        rho,
        c_at,
        x0,
        t0,
        d0,
        t_star,
        fallback,
    })
}

/// `Theta(T, tau1) = tau1 * lambda_min(T)`, with `lambda_min` the smallest
/// eigenvalue of the form `(x - T v)^2 + v^2` relative to `x^2 + v^2`.
pub fn translate_decay(t: f64, tau1: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("T must be >= 0, got {t}")));
    }
    positive("tau1", tau1)?;
    Ok(tau1 * lambda_min(t))
}

/// `((2 + T^2) - sqrt(T^4 + 4 T^2)) / 2`, in a cancellation-free form.
pub fn lambda_min(t: f64) -> f64 {
    let t2 = t * t;
    2.0 / ((2.0 + t2) + (t2 * t2 + 4.0 * t2).sqrt())
}

/// Spatial Lipschitz constant
/// `M = M0 {1 + (exp(2 c_{L,tau1} R T) - 1) / 2 [1 + exp(tau*^2 / (tau* - tau1))]}`.
pub fn spatial_lipschitz_constant(
    m0: f64,
    r: f64,
    t: f64,
    tau_star: f64,
    tau1: f64,
    b0: f64,
    lambda: f64,
) -> Result<f64> {
    nonnegative("M0", m0)?;
    nonnegative("R", r)?;
    nonnegative("T", t)?;
    ordered_rates(tau1, tau_star)?;
    let c1 = c_lambda(b0, lambda, tau1)?;
    Ok(m0 * (1.0 + 0.5 * (2.0 * c1 * r * t).exp_m1() * (1.0 + (tau_star * tau_star / (tau_star - tau1)).exp())))
}

/// Assembled upper bounds for the convergence constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceBounds {
    pub k_tilde1: f64,
    pub k_tilde2: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

pub fn convergence_bounds(
    r: f64,
    rho: f64,
    t: f64,
    c_sigma: f64,
    key: &KeyConstants,
    d2: f64,
) -> ConvergenceBounds {
    let k_tilde1 = c_sigma * (2.0 * r + rho);
    let k_tilde2 = key.k2 * (3.0 + d2) / 2.0;
    let k = k_tilde2 / k_tilde1 * (k_tilde1 * t).exp();
    ConvergenceBounds {
        k_tilde1,
        k_tilde2,
        k,
        k1: d2 + k,
        k2: k,
    }
}

/// Parameters of a constants report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsInput {
    pub r: f64,
    pub m: f64,
    pub t: f64,
    pub tau: f64,
    pub sigma: f64,
    pub tau1: f64,
    pub tau_star: f64,
    pub m0: f64,
    pub b0: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub inputs: ConstantsInput,
    pub b_lambda: f64,
    pub c_tau: f64,
    pub c_sigma: f64,
    pub c_tau1: f64,
    pub g_bound_tau: f64,
    pub key: KeyConstants,
    pub d1: f64,
    pub d2: f64,
    pub stability: StabilityThresholds,
    pub theta: f64,
    pub lipschitz_m: f64,
    pub r_star: f64,
    pub m_star: f64,
    pub convergence: ConvergenceBounds,
}

/// Evaluate every constant for one parameter set.
pub fn constants_report(input: ConstantsInput) -> Result<ConstantsReport> {
    let ConstantsInput {
        r,
        m,
        t,
        tau,
        sigma,
        tau1,
        tau_star,
        m0,
        b0,
        lambda,
    } = input;
    let gc = grad_constants(b0, lambda, tau)?;
    let c_sigma = c_lambda(b0, lambda, sigma)?;
    let key = lemma_key_constants(r, m, tau, sigma, b0, lambda)?;
    let (d1, d2) = time_lipschitz_constants(r, m, tau, sigma, b0, lambda)?;
    let stability = stability_thresholds(r, m, t, tau, sigma, b0, lambda)?;
    let convergence = convergence_bounds(r, stability.rho, t, c_sigma, &key, d2);
    Ok(ConstantsReport {
        inputs: input,
        b_lambda: gc.b_lambda,
        c_tau: gc.c,
        c_sigma,
        c_tau1: c_lambda(b0, lambda, tau1)?,
        g_bound_tau: gc.g_bound,
        key,
        d1,
        d2,
        stability,
        theta: translate_decay(t, tau1)?,
        lipschitz_m: spatial_lipschitz_constant(m0, r, t, tau_star, tau1, b0, lambda)?,
        r_star: gc.c * r * r,
        m_star: gc.c * m * (2.0 * r + m),
        convergence,
    })
}
